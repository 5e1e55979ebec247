// Move a mark by dragging it
{{ANCHOR}}
  .call(d3.drag()
    .on("drag", function(event) {
      const offset = d3.select(this).property("__offset") || { x: 0, y: 0 };
      offset.x += event.dx;
      offset.y += event.dy;
      d3.select(this)
        .property("__offset", offset)
        .attr("transform", "translate(" + offset.x + "," + offset.y + ")");
    }));
