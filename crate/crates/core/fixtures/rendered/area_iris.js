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
d3.csv("data.csv").then(function(data) {
  // Parse the bound attributes
  data.forEach(function(d) {
    d.sepalLength = +d.sepalLength;
    d.sepalWidth = +d.sepalWidth;
  });
  data.sort((a, b) => d3.ascending(a.sepalLength, b.sepalLength));

  // Position scales; the value axis starts at zero
  const x = d3.scaleLinear()
    .domain(d3.extent(data, d => d.sepalLength))
    .range([0, width]);
  const y = d3.scaleLinear()
    .domain([Math.min(0, d3.min(data, d => d.sepalWidth)), d3.max(data, d => d.sepalWidth)])
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
    .text("sepalLength");
  svg.append("text")
    .attr("transform", "rotate(-90)")
    .attr("x", -height / 2)
    .attr("y", -45)
    .attr("text-anchor", "middle")
    .text("sepalWidth");

  // Area generator filled down to the zero line
  const area = d3.area()
    .x(d => x(d.sepalLength))
    .y0(y(0))
    .y1(d => y(d.sepalWidth));

  // A single filled path
  svg.append("path")
    .datum(data)
    .attr("class", "area")
    .attr("fill", "steelblue")
    .attr("stroke", "none")
    .attr("d", area);
});
