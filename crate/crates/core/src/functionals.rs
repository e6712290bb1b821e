//! Nonlocal functionals: fractional perimeter, fractional energies with the
//! one-sided and symmetrized kernels, level-set sums, the graph-cut
//! perimeter, ball averages and discrete Lipschitz slopes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_theta, Error, Result};
use crate::pointset::PointSet;
use crate::space::MetricMeasureSpace;
use crate::sum::{compensated_sum, NeumaierSum};

/// Value of a nonlocal functional with the data it was computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub value: f64,
    pub theta: f64,
    /// Number of points in the domain Ω.
    pub domain_size: usize,
    /// Number of ordered pairs with a nonzero contribution.
    pub pair_count: usize,
}

/// Normalization of the fractional energy kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// `1 / (d^θ μ(B(x,d)))`.
    Asymmetric,
    /// `1 / (d^θ [μ(B(x,d)) + μ(B(y,d))])`.
    Symmetric,
}

const ROW_BLOCK: usize = 32;
const COL_BLOCK: usize = 1024;

/// Σ_{x ∈ xs} Σ_{y ∈ ys, y ≠ x} term(x, y, d(x,y), μ(B(x,d)), μ(B(y,d))).
///
/// Rows are processed in blocks with the columns tiled so that the
/// transposed ball-mass lookups stay in cache. Each row accumulates its
/// columns in order and rows are folded in order, so the result does not
/// depend on the thread count.
pub(crate) fn pair_sum<F>(space: &MetricMeasureSpace, xs: &[usize], ys: &[usize], term: F) -> (f64, usize)
where
    F: Fn(usize, usize, f64, f64, f64) -> f64 + Sync,
{
    let n = space.len();
    let table = space.ball_mass_table();
    let blocks: Vec<(Vec<f64>, usize)> = xs
        .par_chunks(ROW_BLOCK)
        .map(|chunk| {
            let rows: Vec<_> = chunk.iter().map(|&x| space.row(x)).collect();
            let mut acc = vec![NeumaierSum::new(); chunk.len()];
            let mut count = 0usize;
            for cols in ys.chunks(COL_BLOCK) {
                for (i, &x) in chunk.iter().enumerate() {
                    let row = &rows[i];
                    for &y in cols {
                        let d = row[y];
                        if d == 0.0 {
                            continue;
                        }
                        let (mxy, myx) = match table {
                            Some(t) => (t[x * n + y], t[y * n + x]),
                            None => (space.ball_mass(x, d), space.ball_mass(y, d)),
                        };
                        let v = term(x, y, d, mxy, myx);
                        if v != 0.0 {
                            acc[i].add(v);
                            count += 1;
                        }
                    }
                }
            }
            (acc.iter().map(NeumaierSum::value).collect(), count)
        })
        .collect();
    let count = blocks.iter().map(|b| b.1).sum();
    let value = compensated_sum(blocks.into_iter().flat_map(|b| b.0));
    (value, count)
}

fn check_function(space: &MetricMeasureSpace, u: &[f64]) -> Result<()> {
    if u.len() != space.len() {
        return Err(Error::InvalidSpace(format!(
            "function has {} values for a space of {} points",
            u.len(),
            space.len()
        )));
    }
    match u.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFiniteValue { index }),
        None => Ok(()),
    }
}

fn check_set(space: &MetricMeasureSpace, set: &PointSet) -> Result<()> {
    if set.universe_len() != space.len() {
        return Err(Error::InvalidSpace(format!(
            "set over {} points used with a space of {} points",
            set.universe_len(),
            space.len()
        )));
    }
    Ok(())
}

/// `P_θ(E, Ω) = Σ_{x∈Ω∩E} Σ_{y∈Ω\E} 2μ_xμ_y / (d^θ [μ(B(x,d)) + μ(B(y,d))])`.
pub fn fractional_perimeter(
    space: &MetricMeasureSpace,
    e: &PointSet,
    omega: &PointSet,
    theta: f64,
) -> Result<EnergyValue> {
    check_theta(theta)?;
    check_set(space, e)?;
    check_set(space, omega)?;
    let inside: Vec<usize> = omega.iter().filter(|&i| e.contains(i)).collect();
    let outside: Vec<usize> = omega.iter().filter(|&i| !e.contains(i)).collect();
    let w = space.weights();
    let (value, pair_count) = pair_sum(space, &inside, &outside, |x, y, d, mxy, myx| {
        2.0 * w[x] * w[y] / (d.powf(theta) * (mxy + myx))
    });
    Ok(EnergyValue {
        value,
        theta,
        domain_size: omega.count(),
        pair_count,
    })
}

/// Σ_{x≠y∈Ω} |u(x)−u(y)| μ_xμ_y / (d^θ · kernel mass).
pub fn fractional_energy(
    space: &MetricMeasureSpace,
    u: &[f64],
    omega: &PointSet,
    theta: f64,
    kernel: Kernel,
) -> Result<EnergyValue> {
    check_theta(theta)?;
    check_function(space, u)?;
    check_set(space, omega)?;
    let members = omega.indices();
    let w = space.weights();
    let (value, pair_count) = match kernel {
        Kernel::Asymmetric => pair_sum(space, &members, &members, |x, y, d, mxy, _| {
            (u[x] - u[y]).abs() * w[x] * w[y] / (d.powf(theta) * mxy)
        }),
        Kernel::Symmetric => pair_sum(space, &members, &members, |x, y, d, mxy, myx| {
            (u[x] - u[y]).abs() * w[x] * w[y] / (d.powf(theta) * (mxy + myx))
        }),
    };
    Ok(EnergyValue {
        value,
        theta,
        domain_size: members.len(),
        pair_count,
    })
}

/// `∫ P_θ({u > t}, Ω) dt` as an exact sum over the distinct levels of `u` on Ω.
pub fn coarea_rhs(space: &MetricMeasureSpace, u: &[f64], omega: &PointSet, theta: f64) -> Result<EnergyValue> {
    check_theta(theta)?;
    check_function(space, u)?;
    check_set(space, omega)?;
    let mut levels: Vec<f64> = omega.iter().map(|i| u[i]).collect();
    levels.sort_unstable_by(f64::total_cmp);
    levels.dedup();
    let mut total = NeumaierSum::new();
    let mut pair_count = 0;
    for pair in levels.windows(2) {
        let superlevel = PointSet::from_predicate(space, |i| u[i] > pair[0]);
        let p = fractional_perimeter(space, &superlevel, omega, theta)?;
        total.add((pair[1] - pair[0]) * p.value);
        pair_count += p.pair_count;
    }
    Ok(EnergyValue {
        value: total.value(),
        theta,
        domain_size: omega.count(),
        pair_count,
    })
}

/// Σ over graph edges inside Ω that cross from E to Ω\E of `min(μ_x, μ_y)/d`.
pub fn graph_perimeter(space: &MetricMeasureSpace, e: &PointSet, omega: &PointSet) -> Result<f64> {
    check_set(space, e)?;
    check_set(space, omega)?;
    let adj = space.adjacency().ok_or(Error::NotGeodesic)?;
    let w = space.weights();
    Ok(compensated_sum(e.iter().filter(|&x| omega.contains(x)).flat_map(|x| {
        adj[x]
            .iter()
            .filter(|&&(y, _)| omega.contains(y) && !e.contains(y))
            .map(move |&(y, len)| w[x].min(w[y]) / len)
    })))
}

/// Mean `u_B` and `(⨏_B |u − u_B|^q)^{1/q}`.
pub fn mean_and_deviation(space: &MetricMeasureSpace, u: &[f64], b: &PointSet, q: f64) -> Result<(f64, f64)> {
    check_function(space, u)?;
    check_set(space, b)?;
    if b.is_empty() {
        return Err(Error::EmptySet("ball for mean and deviation"));
    }
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::precondition("Lebesgue exponent at least 1", format!("q = {q}")));
    }
    let w = space.weights();
    let mass = b.mass();
    // Shifting by one sample keeps the mean exact on constant functions.
    let base = u[b.iter().next().expect("nonempty")];
    let mean = base + compensated_sum(b.iter().map(|i| (u[i] - base) * w[i])) / mass;
    let dev = compensated_sum(b.iter().map(|i| (u[i] - mean).abs().powf(q) * w[i])) / mass;
    Ok((mean, dev.powf(1.0 / q)))
}

/// `Lip_r u(x) = max_{0 < d(x,y) < r} |u(y) − u(x)| / d(x,y)`, 0 if no such `y`.
pub fn lip_r(space: &MetricMeasureSpace, u: &[f64], x: usize, r: f64) -> Result<f64> {
    check_function(space, u)?;
    if x >= space.len() {
        return Err(Error::IndexOutOfRange { index: x, n: space.len() });
    }
    if !(r > 0.0) {
        return Err(Error::NonPositiveRadius(r));
    }
    let row = space.row(x);
    Ok(row
        .iter()
        .enumerate()
        .filter(|&(y, &d)| y != x && d < r)
        .map(|(y, &d)| (u[y] - u[x]).abs() / d)
        .fold(0.0, f64::max))
}

/// Discrete `Lip u(x)`: the largest slope to a nearest neighbour of `x`.
pub fn lip(space: &MetricMeasureSpace, u: &[f64], x: usize) -> Result<f64> {
    check_function(space, u)?;
    if x >= space.len() {
        return Err(Error::IndexOutOfRange { index: x, n: space.len() });
    }
    let row = space.row(x);
    let nearest = row
        .iter()
        .enumerate()
        .filter(|&(y, _)| y != x)
        .map(|(_, &d)| d)
        .fold(f64::INFINITY, f64::min);
    Ok(row
        .iter()
        .enumerate()
        .filter(|&(y, &d)| y != x && d == nearest)
        .map(|(y, &d)| (u[y] - u[x]).abs() / d)
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> MetricMeasureSpace {
        MetricMeasureSpace::from_matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 1.0]).unwrap()
    }

    fn path3() -> MetricMeasureSpace {
        MetricMeasureSpace::from_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)], vec![1.0; 3]).unwrap()
    }

    fn set(space: &MetricMeasureSpace, idx: &[usize]) -> PointSet {
        PointSet::from_indices(space, idx.iter().copied()).unwrap()
    }

    #[test]
    fn perimeter_examples() {
        let s = two_point();
        let x = PointSet::full(&s);
        for theta in [0.1, 0.5, 0.9] {
            assert_eq!(fractional_perimeter(&s, &set(&s, &[0]), &x, theta).unwrap().value, 1.0);
        }
        let p = path3();
        let x = PointSet::full(&p);
        let v = fractional_perimeter(&p, &set(&p, &[0]), &x, 0.5).unwrap();
        assert!((v.value - (1.0 + 1.0 / (2.0 * 2f64.sqrt()))).abs() < 1e-12);
        assert_eq!(v.pair_count, 2);
        assert_eq!(fractional_perimeter(&p, &PointSet::empty(&p), &x, 0.5).unwrap().value, 0.0);
        assert_eq!(fractional_perimeter(&p, &x, &x, 0.5).unwrap().value, 0.0);
        assert_eq!(
            fractional_perimeter(&p, &x, &x, 1.0),
            Err(Error::ThetaOutOfRange(1.0))
        );
    }

    #[test]
    fn energy_examples() {
        let s = two_point();
        let x = PointSet::full(&s);
        let u = [0.0, 1.0];
        assert_eq!(fractional_energy(&s, &u, &x, 0.3, Kernel::Symmetric).unwrap().value, 1.0);
        assert_eq!(fractional_energy(&s, &u, &x, 0.3, Kernel::Asymmetric).unwrap().value, 2.0);
        for k in [Kernel::Symmetric, Kernel::Asymmetric] {
            assert_eq!(fractional_energy(&s, &[2.0, 2.0], &x, 0.3, k).unwrap().value, 0.0);
        }
        assert_eq!(
            fractional_energy(&s, &[0.0, f64::NAN], &x, 0.3, Kernel::Symmetric),
            Err(Error::NonFiniteValue { index: 1 })
        );
    }

    #[test]
    fn coarea_examples() {
        let s = two_point();
        let x = PointSet::full(&s);
        assert_eq!(coarea_rhs(&s, &[0.0, 1.0], &x, 0.7).unwrap().value, 1.0);
        assert_eq!(coarea_rhs(&s, &[3.0, 3.0], &x, 0.7).unwrap().value, 0.0);
        let p = path3();
        let x = PointSet::full(&p);
        let v = coarea_rhs(&p, &[0.0, 0.0, 1.0], &x, 0.5).unwrap().value;
        assert!((v - (1.0 + 1.0 / (2.0 * 2f64.sqrt()))).abs() < 1e-12);
    }

    #[test]
    fn graph_perimeter_examples() {
        let g = crate::generators::grid(1, 65).unwrap();
        let x = PointSet::full(&g);
        assert_eq!(graph_perimeter(&g, &PointSet::empty(&g), &x).unwrap(), 0.0);
        let left = PointSet::from_predicate(&g, |i| g.coords().unwrap()[i][0] <= 0.5);
        assert!((graph_perimeter(&g, &left, &x).unwrap() - 1.0).abs() < 1e-12);
        let g = crate::generators::grid(2, 33).unwrap();
        let x = PointSet::full(&g);
        let left = PointSet::from_predicate(&g, |i| g.coords().unwrap()[i][0] <= 0.5);
        let h = 1.0 / 32.0;
        assert!((graph_perimeter(&g, &left, &x).unwrap() - 33.0 * h).abs() < 1e-12);
        assert_eq!(graph_perimeter(&two_point(), &set(&two_point(), &[0]), &PointSet::full(&two_point())), Err(Error::NotGeodesic));
    }

    #[test]
    fn mean_deviation_examples() {
        let p = path3();
        let x = PointSet::full(&p);
        let (m, d) = mean_and_deviation(&p, &[0.0, 1.0, 2.0], &x, 1.0).unwrap();
        assert!((m - 1.0).abs() < 1e-15 && (d - 2.0 / 3.0).abs() < 1e-15);
        let s = two_point();
        let (m, d) = mean_and_deviation(&s, &[0.0, 1.0], &PointSet::full(&s), 2.0).unwrap();
        assert!((m - 0.5).abs() < 1e-15 && (d - 0.5).abs() < 1e-15);
        assert_eq!(mean_and_deviation(&p, &[5.0; 3], &x, 1.0).unwrap().1, 0.0);
        assert!(mean_and_deviation(&p, &[5.0; 3], &PointSet::empty(&p), 1.0).is_err());
    }

    #[test]
    fn lip_examples() {
        let p = path3();
        let u = [0.0, 1.0, 3.0];
        assert_eq!(lip_r(&p, &u, 1, 1.5).unwrap(), 2.0);
        assert_eq!(lip_r(&p, &u, 0, 1.5).unwrap(), 1.0);
        assert_eq!(lip_r(&p, &[1.0; 3], 0, 5.0).unwrap(), 0.0);
        assert_eq!(lip(&p, &u, 1).unwrap(), 2.0);
        assert!(lip_r(&p, &u, 0, 0.0).is_err());
    }
}
