// Run a D3 program against a CSV file in a headless DOM and print the SVG.
// usage: node render.js program.js data.csv
const fs = require("fs");
const path = require("path");
const { JSDOM } = require("jsdom");

const [program, dataFile] = process.argv.slice(2);
if (!program || !dataFile) {
  console.error("usage: node render.js program.js data.csv");
  process.exit(2);
}

const dom = new JSDOM('<!DOCTYPE html><body><div id="chart"></div></body>', { runScripts: "outside-only" });
const { window } = dom;
window.eval(fs.readFileSync(path.join(__dirname, "node_modules/d3/dist/d3.min.js"), "utf8"));

const csv = fs.readFileSync(dataFile, "utf8");
window.d3.csv = () => Promise.resolve(window.d3.csvParse(csv));
window.d3.json = () => Promise.resolve(JSON.parse(csv));

window.eval(fs.readFileSync(program, "utf8"));

setTimeout(() => {
  const svg = window.document.querySelector("#chart svg");
  if (!svg) {
    console.error(`${path.basename(program)}: no svg produced`);
    process.exit(1);
  }
  process.stdout.write(svg.outerHTML + "\n");
}, 50);
