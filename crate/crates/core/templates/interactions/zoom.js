// Pan and zoom the marks of the plot group
{{ANCHOR}}
  .call(d3.zoom()
    .scaleExtent([{{ZOOM_MIN}}, {{ZOOM_MAX}}])
    .on("zoom", function(event) {
      {{SVG}}.selectAll({{MARK_SELECTOR}}).attr("transform", event.transform);
    }));
