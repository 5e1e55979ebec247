//! Print the feature vector and prediction for an SVG file.
use vizassist_core::classifier::{classify, extract_features};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).ok_or("usage: svgfeatures FILE")?;
    let f = extract_features(&std::fs::read_to_string(path)?)?;
    println!("{}", serde_json::to_string_pretty(&f)?);
    println!("{}", serde_json::to_string(&classify(&f))?);
    Ok(())
}
