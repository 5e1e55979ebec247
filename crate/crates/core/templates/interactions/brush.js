// Fade the marks outside a brushed region
{{SVG}}.append("g")
  .attr("class", "brush")
  .call(d3.brush()
    .extent([[0, 0], [{{WIDTH}}, {{HEIGHT}}]])
    .on("end", function(event) {
      const region = event.selection;
      {{SVG}}.selectAll({{MARK_SELECTOR}}).attr("opacity", function() {
        const box = this.getBBox();
        const inside = region !== null && box.x + box.width >= region[0][0] && box.x <= region[1][0] && box.y + box.height >= region[0][1] && box.y <= region[1][1];
        return region === null || inside ? 1 : {{FADE_OPACITY}};
      });
    }));
