//! Textual set, function and ball specifications used on the command line.

use std::fs;

use fracperim::covers::Ball;
use fracperim::{Error, MetricMeasureSpace, PointSet, Result};

fn number<T: std::str::FromStr>(text: &str, what: &str) -> Result<T> {
    text.trim()
        .parse()
        .map_err(|_| Error::Parse { line: 1, message: format!("{what}: cannot parse {text:?}") })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &str) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{path}: {e}")))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), message: format!("{path}: {e}") })
}

fn coords(space: &MetricMeasureSpace, axis: usize) -> Result<Vec<f64>> {
    let c = space
        .coords()
        .ok_or_else(|| Error::InvalidSpace("coordinate-based specification on a space without coordinates".into()))?;
    c.iter()
        .map(|p| {
            p.get(axis)
                .copied()
                .ok_or_else(|| Error::InvalidSpace(format!("axis {axis} out of range for {}-dimensional coordinates", p.len())))
        })
        .collect()
}

/// Sets: `all`, `empty`, `halfspace:AXIS:T` (`x_AXIS < T`), `ball:C:R`,
/// `range:A:B` (indices `A..B`), `indices:I,J,...`, `complement:SPEC`,
/// `file:PATH` (JSON array of indices).
pub fn parse_set(space: &MetricMeasureSpace, spec: &str) -> Result<PointSet> {
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let parts: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(':').collect() };
    let bad = || Error::Parse { line: 1, message: format!("malformed set specification {spec:?}") };
    match (head, parts.as_slice()) {
        ("all", []) => Ok(PointSet::full(space)),
        ("empty", []) => Ok(PointSet::empty(space)),
        ("halfspace", [axis, t]) => {
            let x = coords(space, number(axis, "axis")?)?;
            let t: f64 = number(t, "threshold")?;
            Ok(PointSet::from_predicate(space, |i| x[i] < t))
        }
        ("ball", [c, r]) => space.ball(number(c, "center")?, number(r, "radius")?),
        ("range", [a, b]) => PointSet::from_indices(space, number::<usize>(a, "start")?..number::<usize>(b, "end")?),
        ("indices", [list]) => {
            let idx = list.split(',').filter(|s| !s.is_empty()).map(|s| number(s, "index")).collect::<Result<Vec<usize>>>()?;
            PointSet::from_indices(space, idx)
        }
        ("complement", _) => Ok(parse_set(space, rest)?.complement(space)),
        ("file", _) => PointSet::from_indices(space, read_json::<Vec<usize>>(rest)?),
        _ => Err(bad()),
    }
}

/// Functions: `coord:AXIS`, `distance:C`, `cosine:AXIS:M`, `constant:V`,
/// `indicator:SETSPEC`, `file:PATH` (JSON array of values).
pub fn parse_function(space: &MetricMeasureSpace, spec: &str) -> Result<Vec<f64>> {
    let (head, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let parts: Vec<&str> = if rest.is_empty() { Vec::new() } else { rest.split(':').collect() };
    let bad = || Error::Parse { line: 1, message: format!("malformed function specification {spec:?}") };
    match (head, parts.as_slice()) {
        ("coord", [axis]) => coords(space, number(axis, "axis")?),
        ("distance", [c]) => {
            let c: usize = number(c, "center")?;
            space.distance(c, c)?;
            Ok(space.row(c).to_vec())
        }
        ("cosine", [axis, m]) => {
            let x = coords(space, number(axis, "axis")?)?;
            let m: f64 = number(m, "frequency")?;
            let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = if hi > lo { hi - lo } else { 1.0 };
            Ok(x.iter().map(|v| (std::f64::consts::PI * m * (v - lo) / span).cos()).collect())
        }
        ("constant", [v]) => Ok(vec![number(v, "value")?; space.len()]),
        ("indicator", _) => {
            let e = parse_set(space, rest)?;
            Ok((0..space.len()).map(|i| if e.contains(i) { 1.0 } else { 0.0 }).collect())
        }
        ("file", _) => read_json(rest),
        _ => Err(bad()),
    }
}

/// Candidate balls: `all:R` (every point with radius R) or `file:PATH`
/// (JSON array of `[center, radius]`).
pub fn parse_balls(space: &MetricMeasureSpace, spec: &str) -> Result<Vec<Ball>> {
    match spec.split_once(':') {
        Some(("all", r)) => {
            let r: f64 = number(r, "radius")?;
            Ok((0..space.len()).map(|c| Ball::new(c, r)).collect())
        }
        Some(("file", path)) => Ok(read_json::<Vec<(usize, f64)>>(path)?.into_iter().map(|(c, r)| Ball::new(c, r)).collect()),
        _ => Err(Error::Parse { line: 1, message: format!("malformed ball list {spec:?}") }),
    }
}

/// `A:B:N` gives `N` evenly spaced values from `A` to `B`; otherwise a comma list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if let [a, b, n] = parts.as_slice() {
        let a: f64 = number(a, "grid start")?;
        let b: f64 = number(b, "grid end")?;
        let n: usize = number(n, "grid size")?;
        return Ok(match n {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
        });
    }
    spec.split(',').map(|s| number(s, "theta")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use fracperim::generators::grid;

    #[test]
    fn set_specs() {
        let g = grid(1, 9).unwrap();
        assert_eq!(parse_set(&g, "halfspace:0:0.5").unwrap().indices(), vec![0, 1, 2, 3]);
        assert_eq!(parse_set(&g, "range:2:4").unwrap().indices(), vec![2, 3]);
        assert_eq!(parse_set(&g, "indices:1,5").unwrap().indices(), vec![1, 5]);
        assert_eq!(parse_set(&g, "complement:range:0:8").unwrap().indices(), vec![8]);
        assert_eq!(parse_set(&g, "ball:4:0.2").unwrap().indices(), vec![3, 4, 5]);
        assert!(parse_set(&g, "halfspace:0").is_err());
        assert!(parse_set(&g, "indices:99").is_err());
    }

    #[test]
    fn function_and_grid_specs() {
        let g = grid(1, 5).unwrap();
        assert_eq!(parse_function(&g, "coord:0").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_function(&g, "distance:4").unwrap(), vec![1.0, 0.75, 0.5, 0.25, 0.0]);
        assert_eq!(parse_function(&g, "indicator:range:0:2").unwrap(), vec![1.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(parse_function(&g, "distance:7").is_err());
        let t = parse_grid("0.1:0.9:9").unwrap();
        assert_eq!(t.len(), 9);
        assert_eq!((t[0], t[8]), (0.1, 0.9));
        assert_eq!(parse_grid("0.2,0.4").unwrap(), vec![0.2, 0.4]);
    }
}
