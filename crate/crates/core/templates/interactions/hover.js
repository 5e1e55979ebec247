// Highlight a mark under the pointer and restore its color afterwards
{{ANCHOR}}
  .on("mouseover", function(event, d) {
    d3.select(this).attr({{COLOR_ATTR}}, {{HIGHLIGHT}});
  })
  .on("mouseout", function(event, d) {
    d3.select(this).attr({{COLOR_ATTR}}, {{MARK_COLOR}});
  });
