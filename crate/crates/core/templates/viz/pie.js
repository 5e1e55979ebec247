// Chart dimensions and margins
const margin = { top: 20, right: 30, bottom: 50, left: 60 };
const width = 640 - margin.left - margin.right;
const height = 400 - margin.top - margin.bottom;

// SVG container with a translated plot group
const svg = d3.select("#chart")
  .append("svg")
  .attr("width", width + margin.left + margin.right)
  .attr("height", height + margin.top + margin.bottom)
  .append("g")
  .attr("transform", "translate(" + margin.left + "," + margin.top + ")");

// Load the data, then draw the slices
d3.csv({{DATA_URL}}).then(function(data) {
  {{ROW_FILTER}};
  // Parse the bound attributes
  data.forEach(function(d) {
    d.{{CAT_ATTR}} = {{CAT_VALUE}};
    d.{{VAL_ATTR}} = {{VAL_VALUE}};
  });

  // Total value per category, in order of first appearance
  const summary = d3.rollups(data, v => d3.sum(v, d => Math.abs(d.{{VAL_ATTR}})), d => d.{{CAT_ATTR}});
  const radius = Math.min(width, height) / 2;

  // Slice colors by category
  const color = d3.scaleOrdinal()
    .domain(summary.map(s => s[0]))
    .range(d3.schemeTableau10);

  // Layout and arc generators
  const pie = d3.pie()
    .value(s => s[1])
    .sort(null);
  const arc = d3.arc()
    .innerRadius(0)
    .outerRadius(radius);

  // Group centered in the plot area
  const slices = svg.append("g")
    .attr("transform", "translate(" + width / 2 + "," + height / 2 + ")");

  // One path per category
  slices.selectAll("path")
    .data(pie(summary))
    .enter()
    .append("path")
    .attr("d", arc)
    .attr("fill", p => color(p.data[0]))
    .attr("stroke", "white");
});
