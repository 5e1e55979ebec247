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

// Load the data, then lay out and draw the network
d3.csv("data.csv").then(function(data) {
  // Parse the bound attributes
  data.forEach(function(d) {
    d.Name = d.Name.trim();
  });

  // One node per row; rows of the same group are chained by links
  const nodes = data.map((d, i) => ({ id: i, group: d.Name }));
  const links = [];
  d3.groups(nodes, n => n.group).forEach(g => g[1].slice(1).forEach((n, i) => links.push({ source: g[1][i].id, target: n.id })));

  // Groups spread horizontally
  const x = d3.scalePoint()
    .domain(nodes.map(n => n.group))
    .range([0, width])
    .padding(0.5);
  const color = d3.scaleOrdinal(d3.schemeTableau10);

  // Static force layout
  const simulation = d3.forceSimulation(nodes)
    .force("link", d3.forceLink(links)
      .id(n => n.id)
      .distance(15))
    .force("charge", d3.forceManyBody().strength(-10))
    .force("x", d3.forceX(n => x(n.group)).strength(0.2))
    .force("y", d3.forceY(height / 2).strength(0.1))
    .stop();
  simulation.tick(300);

  // Links first so that nodes are drawn on top
  svg.selectAll("line")
    .data(links)
    .enter()
    .append("line")
    .attr("x1", l => l.source.x)
    .attr("y1", l => l.source.y)
    .attr("x2", l => l.target.x)
    .attr("y2", l => l.target.y)
    .attr("stroke", "#999");

  // One circle per node
  svg.selectAll("circle")
    .data(nodes)
    .enter()
    .append("circle")
    .attr("cx", n => n.x)
    .attr("cy", n => n.y)
    .attr("r", 4)
    .attr("fill", n => color(n.group));
});
