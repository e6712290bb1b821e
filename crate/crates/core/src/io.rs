//! JSON encoding of spaces.
//!
//! ```json
//! {"schema_version": 1, "mode": "graph", "weights": [1, 1, 1],
//!  "edges": [[0, 1, 0.5], [1, 2, 0.5]], "coords": [[0], [0.5], [1]]}
//! ```
//! Matrix-mode files carry `"matrix": [[...], ...]` instead of `"edges"`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{MetricMeasureSpace, MetricMode};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    #[serde(default = "default_version")]
    pub schema_version: u32,
    pub mode: MetricMode,
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
}

fn default_version() -> u32 {
    SCHEMA_VERSION
}

impl SpaceFile {
    pub fn from_space(space: &MetricMeasureSpace) -> Self {
        let (matrix, edges) = match space.mode() {
            MetricMode::Matrix => (Some((0..space.len()).map(|i| space.row(i).to_vec()).collect()), None),
            MetricMode::Graph => (None, space.edges()),
        };
        Self {
            schema_version: SCHEMA_VERSION,
            mode: space.mode(),
            weights: space.weights().to_vec(),
            matrix,
            edges,
            coords: space.coords().map(<[Vec<f64>]>::to_vec),
        }
    }

    pub fn into_space(self) -> Result<MetricMeasureSpace> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Parse {
                line: 1,
                message: format!("unsupported schema_version {}", self.schema_version),
            });
        }
        let space = match (self.mode, self.matrix, self.edges) {
            (MetricMode::Matrix, Some(m), None) => MetricMeasureSpace::from_matrix(m, self.weights)?,
            (MetricMode::Graph, None, Some(e)) => MetricMeasureSpace::from_graph(self.weights.len(), &e, self.weights)?,
            (mode, _, _) => {
                return Err(Error::Parse {
                    line: 1,
                    message: format!("mode {mode:?} needs exactly one of \"matrix\" (matrix mode) or \"edges\" (graph mode)"),
                })
            }
        };
        match self.coords {
            Some(c) => space.with_coords(c),
            None => Ok(space),
        }
    }
}

/// Parses a space file; JSON errors carry the offending line.
pub fn parse_space(text: &str) -> Result<MetricMeasureSpace> {
    let file: SpaceFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    file.into_space()
}

pub fn space_to_json(space: &MetricMeasureSpace) -> String {
    serde_json::to_string(&SpaceFile::from_space(space)).expect("finite values serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{grid, random_euclidean};

    #[test]
    fn round_trip_preserves_distances_and_weights() {
        for s in [grid(2, 5).unwrap(), random_euclidean(12, 3).unwrap()] {
            let t = parse_space(&space_to_json(&s)).unwrap();
            assert_eq!(t.mode(), s.mode());
            assert_eq!(t.weights(), s.weights());
            for i in 0..s.len() {
                assert_eq!(&*t.row(i), &*s.row(i));
            }
            assert_eq!(t.coords(), s.coords());
        }
    }

    #[test]
    fn errors_carry_lines() {
        let text = "{\n  \"mode\": \"graph\",\n  \"weights\": [1, 1],\n  \"edges\": [[0, 1, oops]]\n}";
        match parse_space(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let both = r#"{"mode": "graph", "weights": [1], "matrix": [[0]], "edges": []}"#;
        assert!(matches!(parse_space(both), Err(Error::Parse { .. })));
        let bad = r#"{"mode": "matrix", "weights": [1, 1], "matrix": [[0, 1], [2, 0]]}"#;
        assert!(matches!(parse_space(bad), Err(Error::InvalidSpace(_))));
    }
}
