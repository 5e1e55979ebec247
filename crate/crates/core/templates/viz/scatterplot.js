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

// Load the data, then draw scales, axes and marks
d3.csv({{DATA_URL}}).then(function(data) {
  {{ROW_FILTER}};
  // Parse the bound attributes
  data.forEach(function(d) {
    d.{{X_ATTR}} = {{X_VALUE}};
    d.{{Y_ATTR}} = {{Y_VALUE}};
  });

  // Position scales
  const x = {{X_SCALE}}
    .domain(d3.extent(data, d => d.{{X_ATTR}}))
    .nice()
    .range([0, width]);
  const y = {{Y_SCALE}}
    .domain(d3.extent(data, d => d.{{Y_ATTR}}))
    .nice()
    .range([height, 0]);

  // Axes and axis titles
  svg.append("g")
    .attr("class", "x-axis")
    .attr("transform", "translate(0," + height + ")")
    .call(d3.axisBottom(x));
  svg.append("g")
    .attr("class", "y-axis")
    .call(d3.axisLeft(y));
  svg.append("text")
    .attr("x", width / 2)
    .attr("y", height + 40)
    .attr("text-anchor", "middle")
    .text({{X_ATTR}});
  svg.append("text")
    .attr("transform", "rotate(-90)")
    .attr("x", -height / 2)
    .attr("y", -45)
    .attr("text-anchor", "middle")
    .text({{Y_ATTR}});

  // One circle per row
  svg.selectAll("circle")
    .data(data)
    .enter()
    .append("circle")
    .attr("cx", d => x(d.{{X_ATTR}}))
    .attr("cy", d => y(d.{{Y_ATTR}}))
    .attr("r", 4)
    .attr("fill", "steelblue");
});
