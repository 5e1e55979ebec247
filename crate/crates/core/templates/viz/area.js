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
  data.sort((a, b) => d3.ascending(a.{{X_ATTR}}, b.{{X_ATTR}}));

  // Position scales; the value axis starts at zero
  const x = {{X_SCALE}}
    .domain(d3.extent(data, d => d.{{X_ATTR}}))
    .range([0, width]);
  const y = {{Y_SCALE}}
    .domain([Math.min(0, d3.min(data, d => d.{{Y_ATTR}})), d3.max(data, d => d.{{Y_ATTR}})])
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

  // Area generator filled down to the zero line
  const area = d3.area()
    .x(d => x(d.{{X_ATTR}}))
    .y0(y(0))
    .y1(d => y(d.{{Y_ATTR}}));

  // A single filled path
  svg.append("path")
    .datum(data)
    .attr("class", "area")
    .attr("fill", "steelblue")
    .attr("stroke", "none")
    .attr("d", area);
});
