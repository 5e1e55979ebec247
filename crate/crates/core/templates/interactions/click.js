// Toggle an outline on the clicked mark
{{ANCHOR}}
  .on("click", function(event, d) {
    const selected = !d3.select(this).classed("selected");
    d3.select(this)
      .classed("selected", selected)
      .style("stroke", selected ? {{SELECT_COLOR}} : null)
      .style("stroke-width", selected ? 2 : null);
  });
