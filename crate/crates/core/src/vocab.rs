use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Visualization types with a shipped template.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VizType {
    Bar,
    Scatterplot,
    Line,
    Area,
    Pie,
    Graph,
}

impl VizType {
    pub const ALL: [VizType; 6] = [
        VizType::Bar,
        VizType::Scatterplot,
        VizType::Line,
        VizType::Area,
        VizType::Pie,
        VizType::Graph,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VizType::Bar => "bar",
            VizType::Scatterplot => "scatterplot",
            VizType::Line => "line",
            VizType::Area => "area",
            VizType::Pie => "pie",
            VizType::Graph => "graph",
        }
    }
}

impl fmt::Display for VizType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown token `{0}`")]
pub struct UnknownToken(pub String);

impl FromStr for VizType {
    type Err = UnknownToken;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VizType::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| UnknownToken(s.to_string()))
    }
}

/// The six interaction widget types.
///
/// The declaration order is the canonical order used for listing and for
/// bit positions in [`crate::mdp::InteractionState`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionType {
    Brush,
    Click,
    Drag,
    Hover,
    Visualize,
    Zoom,
}

impl InteractionType {
    pub const ALL: [InteractionType; 6] = [
        InteractionType::Brush,
        InteractionType::Click,
        InteractionType::Drag,
        InteractionType::Hover,
        InteractionType::Visualize,
        InteractionType::Zoom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InteractionType::Brush => "brush",
            InteractionType::Click => "click",
            InteractionType::Drag => "drag",
            InteractionType::Hover => "hover",
            InteractionType::Visualize => "visualize",
            InteractionType::Zoom => "zoom",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for InteractionType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InteractionType {
    type Err = UnknownToken;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InteractionType::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| UnknownToken(s.to_string()))
    }
}

/// A set of implemented interactions, stored as a bitset over
/// [`InteractionType::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct InteractionState(u8);

impl InteractionState {
    pub const EMPTY: InteractionState = InteractionState(0);

    pub fn from_bits(bits: u8) -> Option<Self> {
        (bits < 64).then_some(InteractionState(bits))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, i: InteractionType) -> bool {
        self.0 & (1 << i.index()) != 0
    }

    pub fn with(self, i: InteractionType) -> Self {
        InteractionState(self.0 | (1 << i.index()))
    }

    pub fn without(self, i: InteractionType) -> Self {
        InteractionState(self.0 & !(1 << i.index()))
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset_of(self, other: InteractionState) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = InteractionType> {
        InteractionType::ALL
            .into_iter()
            .filter(move |i| self.contains(*i))
    }

    /// Every state over six interactions, in bit order.
    pub fn all() -> impl Iterator<Item = InteractionState> {
        (0u8..64).map(InteractionState)
    }

    /// Canonical key: comma-joined interaction names, `""` for the empty set.
    pub fn key(self) -> String {
        self.iter()
            .map(|i| i.as_str())
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn parse_key(key: &str) -> Result<Self, UnknownToken> {
        key.split([',', ';'])
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .try_fold(InteractionState::EMPTY, |s, t| Ok(s.with(t.parse()?)))
    }
}

impl FromIterator<InteractionType> for InteractionState {
    fn from_iter<T: IntoIterator<Item = InteractionType>>(iter: T) -> Self {
        iter.into_iter()
            .fold(InteractionState::EMPTY, |s, i| s.with(i))
    }
}

impl fmt::Display for InteractionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.key())
    }
}

impl Serialize for InteractionState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for InteractionState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let items = Vec::<InteractionType>::deserialize(d)?;
        Ok(items.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_round_trip() {
        for v in VizType::ALL {
            assert_eq!(v.as_str().parse::<VizType>().unwrap(), v);
        }
        for i in InteractionType::ALL {
            assert_eq!(i.as_str().parse::<InteractionType>().unwrap(), i);
            assert_eq!(InteractionType::ALL[i.index()], i);
        }
        assert!("geographic".parse::<VizType>().is_err());
    }

    #[test]
    fn state_keys() {
        let s: InteractionState = [InteractionType::Zoom, InteractionType::Hover]
            .into_iter()
            .collect();
        assert_eq!(s.key(), "hover,zoom");
        assert_eq!(InteractionState::parse_key("zoom;hover").unwrap(), s);
        assert_eq!(
            InteractionState::parse_key("").unwrap(),
            InteractionState::EMPTY
        );
        assert!(InteractionState::EMPTY.is_subset_of(s));
        assert_eq!(s.without(InteractionType::Zoom).len(), 1);
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"["hover","zoom"]"#);
    }
}
