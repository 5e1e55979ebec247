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
  // Drop 8 rows with missing or invalid values in Miles_per_Gallon, Cylinders
  data = data.filter(d => d.Miles_per_Gallon.trim() !== "" && isFinite(+d.Miles_per_Gallon) && (d.Cylinders.trim() !== "" && isFinite(+d.Cylinders)));

  // Parse the bound attributes
  data.forEach(function(d) {
    d.Miles_per_Gallon = +d.Miles_per_Gallon;
    d.Cylinders = +d.Cylinders;
  });
  data.sort((a, b) => d3.ascending(a.Miles_per_Gallon, b.Miles_per_Gallon));

  // Position scales
  const x = d3.scaleLinear()
    .domain(d3.extent(data, d => d.Miles_per_Gallon))
    .range([0, width]);
  const y = d3.scaleLinear()
    .domain(d3.extent(data, d => d.Cylinders))
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
    .text("Miles_per_Gallon");
  svg.append("text")
    .attr("transform", "rotate(-90)")
    .attr("x", -height / 2)
    .attr("y", -45)
    .attr("text-anchor", "middle")
    .text("Cylinders");

  // Line generator over the sorted rows
  const line = d3.line()
    .x(d => x(d.Miles_per_Gallon))
    .y(d => y(d.Cylinders));

  // A single path through every row
  svg.append("path")
    .datum(data)
    .attr("class", "line")
    .attr("fill", "none")
    .attr("stroke", "steelblue")
    .attr("stroke-width", 1.5)
    .attr("d", line);
});
