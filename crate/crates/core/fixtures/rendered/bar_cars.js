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
  // Drop 8 rows with missing or invalid values in Name, Miles_per_Gallon
  data = data.filter(d => d.Name.trim() !== "" && (d.Miles_per_Gallon.trim() !== "" && isFinite(+d.Miles_per_Gallon)));

  // Parse the bound attributes
  data.forEach(function(d) {
    d.Name = d.Name.trim();
    d.Miles_per_Gallon = +d.Miles_per_Gallon;
  });

  // Mean value per category, in order of first appearance
  const summary = d3.rollups(data, v => d3.mean(v, d => d.Miles_per_Gallon), d => d.Name);

  // Category and value scales
  const x = d3.scaleBand()
    .domain(summary.map(s => s[0]))
    .range([0, width])
    .padding(0.2);
  const y = d3.scaleLinear()
    .domain([0, d3.max(summary, s => s[1])])
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
    .text("Name");
  svg.append("text")
    .attr("transform", "rotate(-90)")
    .attr("x", -height / 2)
    .attr("y", -45)
    .attr("text-anchor", "middle")
    .text("Miles_per_Gallon");

  // One bar per category
  svg.selectAll("rect")
    .data(summary)
    .enter()
    .append("rect")
    .attr("x", s => x(s[0]))
    .attr("y", s => y(s[1]))
    .attr("width", x.bandwidth())
    .attr("height", s => height - y(s[1]))
    .attr("fill", "steelblue");
});
