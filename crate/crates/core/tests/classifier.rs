use std::collections::BTreeSet;

use vizassist_core::classifier::{classify, classify_svg, extract_features};
use vizassist_core::dataset::{load_dataset, select_attributes, DataFormat};
use vizassist_core::fitter::fit;
use vizassist_core::VizType;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))).unwrap()
}

fn fitted(viz: VizType, data: &str) -> String {
    let bytes = fixture(&format!("{data}.csv"));
    let d = load_dataset(data, bytes.as_bytes(), DataFormat::Csv).unwrap();
    let b = select_attributes(&d, viz, &BTreeSet::new()).unwrap();
    fit(viz, &d, &b).unwrap().source
}

#[test]
fn rendered_programs_match_current_templates() {
    for data in ["iris", "cars"] {
        for viz in VizType::ALL {
            let shipped = fixture(&format!("rendered/{viz}_{data}.js"));
            assert_eq!(
                fitted(viz, data),
                shipped,
                "{viz} {data}: rerun tools/render/render_fixtures.sh"
            );
        }
    }
}

#[test]
fn closed_loop_over_rendered_templates() {
    for data in ["iris", "cars"] {
        for viz in VizType::ALL {
            let c = classify_svg(&fixture(&format!("rendered/{viz}_{data}.svg"))).unwrap();
            assert_eq!(c.viz, Some(viz), "{viz} {data}: {c:?}");
            assert!(c.confidence >= 0.8, "{viz} {data}: {c:?}");
        }
    }
}

#[test]
fn iris_scatter_has_one_circle_per_row() {
    let f = extract_features(&fixture("rendered/scatterplot_iris.svg")).unwrap();
    assert_eq!(f.circle, 150);
    assert_eq!(f.rect, 0);
    assert!(f.has_axes);
}

/// Multiply every coordinate-like number in the drawing by `k`.
fn scaled(svg: &str, k: f64) -> String {
    scale_attributes(svg, k)
}

fn scale_numbers(s: &str, k: f64) -> String {
    let mut out = String::new();
    let mut num = String::new();
    let flush = |num: &mut String, out: &mut String| {
        if !num.is_empty() {
            match num.parse::<f64>() {
                Ok(v) => out.push_str(&format!("{}", v * k)),
                Err(_) => out.push_str(num),
            }
            num.clear();
        }
    };
    let mut prev = ' ';
    for c in s.chars() {
        let starts =
            c.is_ascii_digit() || c == '.' || (c == '-' && !(prev.is_ascii_digit() || prev == '.'));
        if starts || (!num.is_empty() && (c.is_ascii_digit() || c == '.')) {
            num.push(c);
        } else {
            flush(&mut num, &mut out);
            out.push(c);
        }
        prev = c;
    }
    flush(&mut num, &mut out);
    out
}

/// Scale geometry attributes; arc flags and rotation stay as they are.
fn scale_attributes(svg: &str, k: f64) -> String {
    let geometric = [
        "x",
        "y",
        "width",
        "height",
        "cx",
        "cy",
        "r",
        "x1",
        "x2",
        "y1",
        "y2",
        "transform",
    ];
    let mut out = String::new();
    let mut rest = svg;
    while let Some(eq) = rest.find("=\"") {
        let name_start = rest[..eq]
            .rfind(|c: char| c.is_whitespace())
            .map_or(0, |p| p + 1);
        let name = &rest[name_start..eq];
        let close = rest[eq + 2..].find('"').unwrap() + eq + 2;
        let value = &rest[eq + 2..close];
        out.push_str(&rest[..eq + 2]);
        if geometric.contains(&name) {
            out.push_str(&scale_numbers(value, k));
        } else if name == "d" {
            out.push_str(&scale_path(value, k));
        } else {
            out.push_str(value);
        }
        rest = &rest[close..];
    }
    out.push_str(rest);
    out
}

fn scale_path(d: &str, k: f64) -> String {
    // Arc commands carry rotation and two flags at positions 2..5 of each
    // seven-number group; everything else is a coordinate.
    let mut out = String::new();
    for chunk in d.split_inclusive(|c: char| c.is_ascii_alphabetic()) {
        let (body, cmd) = match chunk.chars().last() {
            Some(c) if c.is_ascii_alphabetic() => (&chunk[..chunk.len() - 1], Some(c)),
            _ => (chunk, None),
        };
        out.push_str(&scale_args(
            body,
            k,
            out.chars().rev().find(|c| c.is_ascii_alphabetic()),
        ));
        if let Some(c) = cmd {
            out.push(c);
        }
    }
    out
}

fn scale_args(body: &str, k: f64, cmd: Option<char>) -> String {
    let is_arc = matches!(cmd, Some('A' | 'a'));
    body.split(',')
        .enumerate()
        .map(|(ix, part)| {
            if is_arc && matches!(ix % 7, 2..=4) {
                part.to_string()
            } else {
                scale_numbers(part, k)
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}

#[test]
fn classification_is_scale_invariant() {
    for data in ["iris", "cars"] {
        for viz in VizType::ALL {
            let svg = fixture(&format!("rendered/{viz}_{data}.svg"));
            let base = classify(&extract_features(&svg).unwrap());
            for k in [0.5, 3.0] {
                let f = extract_features(&scaled(&svg, k)).unwrap();
                assert_eq!(classify(&f).viz, base.viz, "{viz} {data} x{k}");
            }
        }
    }
}

#[test]
fn features_are_deterministic() {
    let svg = fixture("rendered/graph_cars.svg");
    assert_eq!(
        extract_features(&svg).unwrap(),
        extract_features(&svg).unwrap()
    );
}
