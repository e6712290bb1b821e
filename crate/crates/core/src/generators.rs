//! Benchmark spaces: lattice grids, reweighted spaces, snowflaked metrics and
//! bowtie graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::space::MetricMeasureSpace;

/// Largest number of points a generated grid may have.
pub const MAX_GRID_POINTS: usize = 1_000_000;

/// Lattice on `[0,1]^dim` with spacing `h = 1/(n_per_side − 1)`,
/// nearest-neighbour edges of length `h` and uniform weights `h^dim`.
/// Boundary cells are not corrected, so the total mass slightly exceeds 1.
pub fn grid(dim: usize, n_per_side: usize) -> Result<MetricMeasureSpace> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidSpace(format!("grid dimension must be 1, 2 or 3, got {dim}")));
    }
    if n_per_side < 2 {
        return Err(Error::InvalidSpace(format!("grid needs at least 2 points per side, got {n_per_side}")));
    }
    let total = n_per_side
        .checked_pow(dim as u32)
        .filter(|&t| t <= MAX_GRID_POINTS)
        .ok_or_else(|| {
            Error::InvalidSpace(format!(
                "grid({dim}, {n_per_side}) exceeds the {MAX_GRID_POINTS}-point limit"
            ))
        })?;
    let h = 1.0 / (n_per_side - 1) as f64;
    let stride: Vec<usize> = (0..dim).map(|a| n_per_side.pow(a as u32)).collect();
    let mut edges = Vec::with_capacity(dim * total);
    let mut coords = Vec::with_capacity(total);
    for i in 0..total {
        let idx: Vec<usize> = (0..dim).map(|a| (i / stride[a]) % n_per_side).collect();
        for a in 0..dim {
            if idx[a] + 1 < n_per_side {
                edges.push((i, i + stride[a], h));
            }
        }
        coords.push(idx.iter().map(|&k| k as f64 * h).collect());
    }
    MetricMeasureSpace::from_graph(total, &edges, vec![h.powi(dim as i32); total])?.with_coords(coords)
}

/// Multiplies each weight by `max(d(origin, i), h_min)^alpha`.
pub fn weighted_space(base: &MetricMeasureSpace, alpha: f64, origin: usize) -> Result<MetricMeasureSpace> {
    if !alpha.is_finite() {
        return Err(Error::InvalidSpace(format!("weight exponent must be finite, got {alpha}")));
    }
    let h_min = base.min_distance();
    let row = base.row(origin_checked(base, origin)?);
    let weights = base
        .weights()
        .iter()
        .zip(row.iter())
        .map(|(&w, &d)| w * d.max(h_min).powf(alpha))
        .collect();
    base.with_weights(weights)
}

fn origin_checked(base: &MetricMeasureSpace, origin: usize) -> Result<usize> {
    if origin < base.len() {
        Ok(origin)
    } else {
        Err(Error::IndexOutOfRange { index: origin, n: base.len() })
    }
}

/// The snowflaked metric `d^eps` on the same points and weights.
pub fn snowflake(base: &MetricMeasureSpace, eps: f64) -> Result<MetricMeasureSpace> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidSpace(format!("snowflake exponent must lie in (0,1), got {eps}")));
    }
    let n = base.len();
    let matrix = (0..n)
        .map(|i| base.row(i).iter().map(|d| d.powf(eps)).collect())
        .collect();
    let out = MetricMeasureSpace::from_matrix(matrix, base.weights().to_vec())?;
    match base.coords() {
        Some(c) => out.with_coords(c.to_vec()),
        None => Ok(out),
    }
}

/// Two unit-length path wings sharing their first vertex (index 0).
/// Each wing has `n_per_wing` points counting the shared vertex; weights are
/// the spacing `h = 1/(n_per_wing − 1)`.
pub fn bowtie(n_per_wing: usize) -> Result<MetricMeasureSpace> {
    if n_per_wing < 2 {
        return Err(Error::InvalidSpace(format!("bowtie needs at least 2 points per wing, got {n_per_wing}")));
    }
    let m = n_per_wing - 1;
    let h = 1.0 / m as f64;
    let n = 2 * m + 1;
    let mut edges = Vec::with_capacity(2 * m);
    let mut coords = vec![vec![0.0]];
    for wing in 0..2 {
        let sign = if wing == 0 { -1.0 } else { 1.0 };
        for k in 1..=m {
            let i = wing * m + k;
            let prev = if k == 1 { 0 } else { i - 1 };
            edges.push((prev, i, h));
            coords.push(vec![sign * k as f64 * h]);
        }
    }
    MetricMeasureSpace::from_graph(n, &edges, vec![h; n])?.with_coords(coords)
}

/// Two unit squares (lattices with `n_per_side` points per side) glued at a
/// single corner vertex (index 0). Weights are `h²`.
pub fn bowtie_2d(n_per_side: usize) -> Result<MetricMeasureSpace> {
    if n_per_side < 2 {
        return Err(Error::InvalidSpace(format!("bowtie needs at least 2 points per side, got {n_per_side}")));
    }
    let k = n_per_side;
    let h = 1.0 / (k - 1) as f64;
    let per_square = k * k - 1;
    let n = 2 * per_square + 1;
    // Square s, lattice (a, b) with (0, 0) the shared corner.
    let index = |s: usize, a: usize, b: usize| -> usize {
        if a == 0 && b == 0 {
            0
        } else {
            1 + s * per_square + (b * k + a - 1)
        }
    };
    let mut edges = Vec::new();
    let mut coords = vec![vec![0.0; 2]; n];
    for s in 0..2 {
        let sign = if s == 0 { -1.0 } else { 1.0 };
        for b in 0..k {
            for a in 0..k {
                let i = index(s, a, b);
                coords[i] = vec![sign * a as f64 * h, sign * b as f64 * h];
                if a + 1 < k {
                    edges.push((i, index(s, a + 1, b), h));
                }
                if b + 1 < k {
                    edges.push((i, index(s, a, b + 1), h));
                }
            }
        }
    }
    MetricMeasureSpace::from_graph(n, &edges, vec![h * h; n])?.with_coords(coords)
}

/// Random points in the unit square with the Euclidean metric and weights
/// drawn from `[0.5, 2)`.
pub fn random_euclidean(n: usize, seed: u64) -> Result<MetricMeasureSpace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
    let weights = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let matrix = pts
        .iter()
        .map(|p| pts.iter().map(|q| (p[0] - q[0]).hypot(p[1] - q[1])).collect())
        .collect();
    MetricMeasureSpace::from_matrix(matrix, weights)?.with_coords(pts.iter().map(|p| p.to_vec()).collect())
}

/// Random connected graph: a random spanning tree plus extra edges, lengths
/// in `[0.5, 2)` and weights in `[0.5, 2)`.
pub fn random_graph(n: usize, extra_edges: usize, seed: u64) -> Result<MetricMeasureSpace> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((rng.gen_range(0..i), i, rng.gen_range(0.5..2.0)));
    }
    for _ in 0..extra_edges {
        let i = rng.gen_range(0..n);
        let j = rng.gen_range(0..n);
        if i != j {
            edges.push((i, j, rng.gen_range(0.5..2.0)));
        }
    }
    let weights = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    MetricMeasureSpace::from_graph(n, &edges, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_examples() {
        let g = grid(1, 3).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.d(0, 1), 0.5);
        assert_eq!(g.weights(), &[0.5, 0.5, 0.5]);
        let g = grid(1, 2).unwrap();
        assert_eq!((g.len(), g.d(0, 1), g.weights()), (2, 1.0, &[1.0, 1.0][..]));
        let g = grid(2, 3).unwrap();
        assert_eq!((g.len(), g.diameter()), (9, 2.0));
        assert!(grid(3, 101).is_err());
        assert!(grid(1, 1).is_err());
    }

    #[test]
    fn grid_total_mass_overcount() {
        for n in [2, 5, 64, 257] {
            let m = grid(1, n).unwrap().total_mass();
            assert!(m >= 1.0 && m <= 1.0 + 2.0 / (n - 1) as f64, "n={n}: {m}");
        }
    }

    #[test]
    fn weighted_examples() {
        let g = grid(1, 3).unwrap();
        assert_eq!(weighted_space(&g, 0.0, 0).unwrap().weights(), g.weights());
        let w = weighted_space(&g, 1.0, 0).unwrap();
        assert_eq!(w.weights(), &[0.25, 0.25, 0.5]);
        let g = grid(1, 64).unwrap();
        let w = weighted_space(&g, 1.0, 0).unwrap();
        let near: f64 = w.weights()[..32].iter().sum();
        let far: f64 = w.weights()[32..].iter().sum();
        // Direct sums: Σ_{k=32}^{63} k = 1520 and 1 + Σ_{k=1}^{31} k = 497 (origin clamped).
        assert!((far / near - 1520.0 / 497.0).abs() < 1e-12);
        assert!((far / near - 3.0).abs() < 0.1);
    }

    #[test]
    fn snowflake_examples() {
        let two = MetricMeasureSpace::from_matrix(vec![vec![0.0, 4.0], vec![4.0, 0.0]], vec![1.0, 3.0]).unwrap();
        let s = snowflake(&two, 0.5).unwrap();
        assert_eq!(s.d(0, 1), 2.0);
        assert_eq!(s.weights(), two.weights());
        let p = MetricMeasureSpace::from_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)], vec![1.0; 3]).unwrap();
        let s = snowflake(&p, 0.5).unwrap();
        assert_eq!(s.d(0, 2), 2f64.sqrt());
        assert!(s.d(0, 2) < s.d(0, 1) + s.d(1, 2));
        let near_one = snowflake(&p, 1.0 - 1e-15).unwrap();
        assert!((near_one.d(0, 2) - 2.0).abs() < 1e-12);
        assert!(snowflake(&p, 1.0).is_err());
    }

    #[test]
    fn bowtie_examples() {
        let b = bowtie(2).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.d(1, 2), 2.0);
        let b = bowtie(64).unwrap();
        assert_eq!(b.ball(0, 1.01).unwrap().count(), b.len());
        let b2 = bowtie_2d(5).unwrap();
        assert_eq!(b2.len(), 49);
        assert_eq!(b2.d(0, 24), 2.0);
        assert_eq!(b2.d(24, 48), 4.0);
    }
}
