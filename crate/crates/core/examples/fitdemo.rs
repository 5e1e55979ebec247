//! Fit a shipped template to a CSV and optionally add interactions:
//! `cargo run --example fitdemo -- scatterplot fixtures/iris.csv hover zoom`
use std::collections::BTreeSet;

use vizassist_core::augment::augment;
use vizassist_core::dataset::{load_dataset, select_attributes, DataFormat};
use vizassist_core::fitter::fit;
use vizassist_core::{InteractionState, InteractionType, VizType};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let viz: VizType = args[1].parse()?;
    let bytes = std::fs::read(&args[2])?;
    let d = load_dataset(&args[2], &bytes, DataFormat::Csv)?;
    let b = select_attributes(&d, viz, &BTreeSet::new())?;
    let mut source = fit(viz, &d, &b)?.source;
    let mut state = InteractionState::EMPTY;
    for name in &args[3..] {
        let i: InteractionType = name.parse()?;
        let out = augment(&source, i, viz, state)?;
        source = out.source;
        state = out.new_state;
    }
    print!("{source}");
    Ok(())
}
