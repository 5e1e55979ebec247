//! Visualization type prediction from rendered SVG.
//!
//! [`extract_features`] flattens the element tree into a mark histogram plus
//! a few geometric ratios; [`classify`] runs a fixed rule cascade over it.
//! Every feature is a count or a ratio, so uniformly scaling the drawing
//! does not change the prediction.

use roxmltree::{Document, Node as XmlNode};
use serde::{Deserialize, Serialize};

use crate::vocab::VizType;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ClassifierError {
    #[error("malformed SVG: {0}")]
    MalformedSvg(String),
}

impl ClassifierError {
    pub fn code(&self) -> &'static str {
        "MalformedSvg"
    }
}

/// Mark counts exclude anything inside an axis group.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SvgFeatureVector {
    pub rect: usize,
    pub circle: usize,
    pub path: usize,
    pub line: usize,
    pub text: usize,
    pub g: usize,
    pub axis_groups: usize,
    pub has_axes: bool,
    /// Share of straight, curve and arc segments among all path segments.
    pub path_l_fraction: f64,
    pub path_c_fraction: f64,
    pub path_a_fraction: f64,
    /// Share of rects sharing the most common baseline.
    pub rect_baseline_ratio: f64,
    /// Variance of circle radii over the squared mean radius.
    pub circle_radius_variance: f64,
    /// Distinct circle centers over circle count.
    pub circle_position_spread: f64,
    pub filled_closed_paths: usize,
    pub open_stroked_paths: usize,
    pub max_path_vertices: usize,
    pub arc_paths: usize,
    /// Total angle swept by the outer arcs of arc paths, in turns.
    pub arc_coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// `None` when no rule fires.
    #[serde(with = "viz_or_unknown")]
    pub viz: Option<VizType>,
    pub confidence: f64,
    pub rule: String,
}

mod viz_or_unknown {
    use super::*;

    pub fn serialize<S: serde::Serializer>(v: &Option<VizType>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(v.map_or("unknown", |v| v.as_str()))
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(
        d: D,
    ) -> Result<Option<VizType>, D::Error> {
        let s = String::deserialize(d)?;
        if s == "unknown" {
            return Ok(None);
        }
        s.parse().map(Some).map_err(serde::de::Error::custom)
    }
}

impl Classification {
    fn unknown() -> Self {
        Classification {
            viz: None,
            confidence: 0.0,
            rule: "none".into(),
        }
    }

    pub fn label(&self) -> &'static str {
        self.viz.map_or("unknown", |v| v.as_str())
    }
}

fn num(node: XmlNode, attr: &str) -> f64 {
    node.attribute(attr)
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0.0)
}

fn is_axis_group(node: XmlNode) -> bool {
    if !node.has_tag_name("g") {
        return false;
    }
    let class_axis = node
        .attribute("class")
        .is_some_and(|c| c.split_whitespace().any(|w| w.contains("axis")));
    class_axis
        || node
            .children()
            .any(|c| c.has_tag_name("path") && c.attribute("class") == Some("domain"))
}

fn style_value<'a>(node: XmlNode<'a, 'a>, prop: &str) -> Option<&'a str> {
    let from_style = node.attribute("style").and_then(|s| {
        s.split(';').find_map(|decl| {
            let (k, v) = decl.split_once(':')?;
            (k.trim() == prop).then(|| v.trim())
        })
    });
    from_style.or_else(|| node.attribute(prop))
}

/// Effective fill, following inheritance.
fn fill_of(node: XmlNode) -> String {
    node.ancestors()
        .filter(|n| n.is_element())
        .find_map(|n| style_value(n, "fill"))
        .unwrap_or("black")
        .to_string()
}

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1e-12)
}

#[derive(Debug, Default)]
struct PathProfile {
    lines: usize,
    curves: usize,
    arcs: usize,
    closed: bool,
    vertices: usize,
    /// (radius, swept angle in radians) per arc segment.
    arc_segments: Vec<(f64, f64)>,
}

fn path_tokens(d: &str) -> Vec<PathToken> {
    let mut out = Vec::new();
    let bytes = d.as_bytes();
    let mut k = 0;
    while k < bytes.len() {
        let c = bytes[k] as char;
        if c.is_ascii_alphabetic() && c != 'e' && c != 'E' {
            out.push(PathToken::Cmd(c));
            k += 1;
        } else if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' {
            let start = k;
            let mut seen_dot = c == '.';
            k += 1;
            while k < bytes.len() {
                let ch = bytes[k] as char;
                if ch.is_ascii_digit() {
                    k += 1;
                } else if ch == '.' && !seen_dot {
                    seen_dot = true;
                    k += 1;
                } else if (ch == 'e' || ch == 'E') && k + 1 < bytes.len() {
                    k += 1;
                    if matches!(bytes[k], b'-' | b'+') {
                        k += 1;
                    }
                } else {
                    break;
                }
            }
            if let Ok(v) = d[start..k].parse() {
                out.push(PathToken::Num(v));
            }
        } else {
            k += 1;
        }
    }
    out
}

#[derive(Debug, Clone, Copy)]
enum PathToken {
    Cmd(char),
    Num(f64),
}

fn profile_path(d: &str) -> PathProfile {
    let tokens = path_tokens(d);
    let mut p = PathProfile::default();
    let (mut x, mut y) = (0.0_f64, 0.0_f64);
    let (mut sx, mut sy) = (0.0, 0.0);
    let mut cmd = 'M';
    let mut k = 0;
    while k < tokens.len() {
        if let PathToken::Cmd(c) = tokens[k] {
            cmd = c;
            k += 1;
            if matches!(c, 'Z' | 'z') {
                p.closed = true;
                x = sx;
                y = sy;
                continue;
            }
        }
        let arity = match cmd.to_ascii_uppercase() {
            'M' | 'L' | 'T' => 2,
            'H' | 'V' => 1,
            'S' | 'Q' => 4,
            'C' => 6,
            'A' => 7,
            _ => {
                k += 1;
                continue;
            }
        };
        let mut args = [0.0; 7];
        let mut n = 0;
        while n < arity && k < tokens.len() {
            match tokens[k] {
                PathToken::Num(v) => {
                    args[n] = v;
                    n += 1;
                    k += 1;
                }
                PathToken::Cmd(_) => break,
            }
        }
        if n < arity {
            break;
        }
        let rel = cmd.is_ascii_lowercase();
        let (ox, oy) = if rel { (x, y) } else { (0.0, 0.0) };
        match cmd.to_ascii_uppercase() {
            'M' => {
                x = ox + args[0];
                y = oy + args[1];
                sx = x;
                sy = y;
                p.vertices += 1;
                // Further pairs after a move are implicit line-tos.
                cmd = if rel { 'l' } else { 'L' };
            }
            'L' | 'T' => {
                x = ox + args[0];
                y = oy + args[1];
                p.lines += 1;
                p.vertices += 1;
            }
            'H' => {
                x = if rel { x + args[0] } else { args[0] };
                p.lines += 1;
                p.vertices += 1;
            }
            'V' => {
                y = if rel { y + args[0] } else { args[0] };
                p.lines += 1;
                p.vertices += 1;
            }
            'S' | 'Q' => {
                x = ox + args[2];
                y = oy + args[3];
                p.curves += 1;
                p.vertices += 1;
            }
            'C' => {
                x = ox + args[4];
                y = oy + args[5];
                p.curves += 1;
                p.vertices += 1;
            }
            'A' => {
                let (nx, ny) = (ox + args[5], oy + args[6]);
                let r = args[0].abs().max(args[1].abs());
                let chord = ((nx - x).powi(2) + (ny - y).powi(2)).sqrt();
                let swept = if r > 0.0 {
                    let half = (chord / (2.0 * r)).min(1.0).asin();
                    if args[3] != 0.0 {
                        std::f64::consts::TAU - 2.0 * half
                    } else {
                        2.0 * half
                    }
                } else {
                    0.0
                };
                p.arc_segments.push((r, swept));
                x = nx;
                y = ny;
                p.arcs += 1;
                p.vertices += 1;
            }
            _ => {}
        }
    }
    p
}

/// Parse `svg` and compute its feature vector.
pub fn extract_features(svg: &str) -> Result<SvgFeatureVector, ClassifierError> {
    let doc = Document::parse(svg).map_err(|e| ClassifierError::MalformedSvg(e.to_string()))?;
    let root = doc
        .descendants()
        .find(|n| n.has_tag_name("svg"))
        .ok_or_else(|| ClassifierError::MalformedSvg("no <svg> element".into()))?;

    let mut f = SvgFeatureVector::default();
    let mut baselines: Vec<f64> = Vec::new();
    let mut radii: Vec<f64> = Vec::new();
    let mut centers: Vec<(f64, f64)> = Vec::new();
    let (mut seg_l, mut seg_c, mut seg_a) = (0usize, 0usize, 0usize);
    let mut coverage = 0.0;

    let mut stack: Vec<XmlNode> = root.children().filter(|n| n.is_element()).collect();
    stack.reverse();
    while let Some(node) = stack.pop() {
        if is_axis_group(node) {
            f.axis_groups += 1;
            continue;
        }
        match node.tag_name().name() {
            "g" => f.g += 1,
            "rect" => {
                f.rect += 1;
                baselines.push(num(node, "y") + num(node, "height"));
            }
            "circle" => {
                f.circle += 1;
                radii.push(num(node, "r"));
                centers.push((num(node, "cx"), num(node, "cy")));
            }
            "line" => f.line += 1,
            "text" => f.text += 1,
            "path" => {
                f.path += 1;
                let p = profile_path(node.attribute("d").unwrap_or(""));
                seg_l += p.lines;
                seg_c += p.curves;
                seg_a += p.arcs;
                f.max_path_vertices = f.max_path_vertices.max(p.vertices);
                let filled = !matches!(fill_of(node).as_str(), "none" | "transparent");
                if filled && p.closed && p.arcs == 0 {
                    f.filled_closed_paths += 1;
                }
                if !filled && !p.closed {
                    f.open_stroked_paths += 1;
                }
                if p.arcs > 0 {
                    f.arc_paths += 1;
                    let outer = p.arc_segments.iter().map(|(r, _)| *r).fold(0.0, f64::max);
                    coverage += p
                        .arc_segments
                        .iter()
                        .filter(|(r, _)| approx_eq(*r, outer))
                        .map(|(_, a)| a)
                        .sum::<f64>();
                }
            }
            _ => {}
        }
        let mut kids: Vec<XmlNode> = node.children().filter(|n| n.is_element()).collect();
        kids.reverse();
        stack.extend(kids);
    }

    f.has_axes = f.axis_groups > 0;
    let segments = (seg_l + seg_c + seg_a) as f64;
    if segments > 0.0 {
        f.path_l_fraction = seg_l as f64 / segments;
        f.path_c_fraction = seg_c as f64 / segments;
        f.path_a_fraction = seg_a as f64 / segments;
    }
    if !baselines.is_empty() {
        let mode = baselines
            .iter()
            .map(|b| baselines.iter().filter(|o| approx_eq(*b, **o)).count())
            .max()
            .unwrap_or(0);
        f.rect_baseline_ratio = mode as f64 / baselines.len() as f64;
    }
    if !radii.is_empty() {
        let n = radii.len() as f64;
        let mean = radii.iter().sum::<f64>() / n;
        if mean > 0.0 {
            let var = radii.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n;
            f.circle_radius_variance = var / (mean * mean);
        }
        let mut distinct: Vec<(f64, f64)> = Vec::new();
        for c in &centers {
            if !distinct
                .iter()
                .any(|d| approx_eq(d.0, c.0) && approx_eq(d.1, c.1))
            {
                distinct.push(*c);
            }
        }
        f.circle_position_spread = distinct.len() as f64 / n;
    }
    f.arc_coverage = coverage / std::f64::consts::TAU;
    Ok(f)
}

fn verdict(viz: VizType, rule: &str, share: f64) -> Classification {
    Classification {
        viz: Some(viz),
        confidence: 0.5 + 0.5 * share.clamp(0.0, 1.0),
        rule: rule.to_string(),
    }
}

/// Rule cascade over a feature vector.
pub fn classify(f: &SvgFeatureVector) -> Classification {
    let marks = (f.rect + f.circle + f.path + f.line) as f64;
    if marks == 0.0 {
        return Classification::unknown();
    }
    let share = |n: usize| n as f64 / marks;
    let distinct_centers = (f.circle_position_spread * f.circle as f64).round() as usize;

    if f.arc_paths > 0 && (f.arc_coverage - 1.0).abs() <= 0.02 && f.arc_paths * 5 >= f.path * 4 {
        return verdict(
            VizType::Pie,
            "arc wedges cover a full turn",
            share(f.arc_paths),
        );
    }
    if f.circle >= 2 && f.line >= 1 && f.line * 10 >= f.circle && f.rect == 0 {
        return verdict(
            VizType::Graph,
            "circles joined by line segments",
            share(f.circle + f.line),
        );
    }
    if f.circle >= 3 && f.circle >= 2 * (f.rect + f.path + f.line) && distinct_centers >= 3 {
        return verdict(
            VizType::Scatterplot,
            "many circles at varied positions",
            share(f.circle),
        );
    }
    if f.rect >= 1 && f.rect >= 2 * (f.circle + f.path + f.line) && f.rect_baseline_ratio >= 0.9 {
        return verdict(VizType::Bar, "rects on a shared baseline", share(f.rect));
    }
    if f.filled_closed_paths >= 1 && f.max_path_vertices >= 4 && f.arc_paths == 0 {
        return verdict(VizType::Area, "filled closed polyline", share(f.path));
    }
    if f.open_stroked_paths >= 1 && f.max_path_vertices >= 3 && f.arc_paths == 0 {
        return verdict(VizType::Line, "long open polyline", share(f.path));
    }
    Classification::unknown()
}

/// Extract and classify in one step.
pub fn classify_svg(svg: &str) -> Result<Classification, ClassifierError> {
    extract_features(svg).map(|f| classify(&f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_svg_is_all_zero() {
        let f = extract_features("<svg/>").unwrap();
        assert_eq!(f, SvgFeatureVector::default());
        assert_eq!(classify(&f).viz, None);
    }

    #[test]
    fn truncated_xml() {
        let err = extract_features("<svg><g><rect").unwrap_err();
        assert_eq!(err.code(), "MalformedSvg");
    }

    #[test]
    fn axis_contents_are_not_marks() {
        let svg = r#"<svg><g class="x-axis"><path class="domain" d="M0,0H10"/><line x2="6"/><text>1</text></g>
            <rect x="0" y="10" width="5" height="20"/><rect x="6" y="20" width="5" height="10"/></svg>"#;
        let f = extract_features(svg).unwrap();
        assert_eq!(
            (f.rect, f.line, f.path, f.text, f.axis_groups),
            (2, 0, 0, 0, 1)
        );
        assert_eq!(f.rect_baseline_ratio, 1.0);
        assert_eq!(classify(&f).viz, Some(VizType::Bar));
    }

    #[test]
    fn full_circle_from_two_half_arcs() {
        let p = profile_path("M0,-10A10,10,0,1,1,0,10A10,10,0,1,1,0,-10Z");
        let total: f64 = p.arc_segments.iter().map(|(_, a)| a).sum();
        assert!((total - std::f64::consts::TAU).abs() < 1e-9);
        let q = profile_path("M0,-10A10,10,0,0,1,10,0L0,0Z");
        assert!((q.arc_segments[0].1 - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn relative_commands_and_exponents() {
        let p = profile_path("m1e1,0l5,5h-2v3c1,1 2,2 3,3z");
        assert_eq!((p.lines, p.curves, p.vertices), (3, 1, 5));
        assert!(p.closed);
    }
}
