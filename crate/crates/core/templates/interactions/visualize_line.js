// Attribute picker that re-encodes the values traced by the line
const picker = d3.select("#chart")
  .insert("select", ":first-child")
  .attr("class", "attribute-picker");
picker.selectAll("option")
  .data(Object.keys({{DATA}}[0]).filter(f => !isNaN(+{{DATA}}[0][f])))
  .enter()
  .append("option")
  .text(f => f);
picker.property("value", {{Y_FIELD}});
picker.on("change", function() {
  const field = this.value;
  {{Y_SCALE_VAR}}.domain(d3.extent({{DATA}}, d => +d[field])).nice();
  {{SVG}}.select(".y-axis")
    .transition()
    .duration({{DURATION}})
    .call(d3.axisLeft({{Y_SCALE_VAR}}));
  {{LINE_GEN}}.y(d => {{Y_SCALE_VAR}}(+d[field]));
  {{SVG}}.selectAll({{MARK_SELECTOR}})
    .transition()
    .duration({{DURATION}})
    .attr("d", {{LINE_GEN}});
});
