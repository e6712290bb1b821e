//! Structural constants of a finite space: doubling, relative lower mass
//! bound, reverse doubling, lower Ahlfors regularity and annular decay.
//!
//! Ball masses are piecewise constant in the radius, so every sup or inf
//! over a continuous radius is evaluated exactly at the breakpoints.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::MetricMeasureSpace;

/// Seed for the quadruple sampling used on large spaces.
pub const FIT_SEED: u64 = 0x0051_d0f1_7000_0001;
/// Quadruple budget above which exponent fits switch to sampling.
pub const FIT_QUADRUPLE_LIMIT: usize = 4_000_000;

/// Distinct distances from one center with the open and closed ball masses
/// at each of them.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    /// Distinct positive distances, ascending.
    pub radii: Vec<f64>,
    /// `open[k] = μ({y : d < radii[k]})`.
    pub open: Vec<f64>,
    /// `closed[k] = μ({y : d ≤ radii[k]})`.
    pub closed: Vec<f64>,
}

impl RadialProfile {
    pub fn new(space: &MetricMeasureSpace, x: usize) -> Self {
        let row = space.sorted_row(x);
        let mut radii = Vec::new();
        let mut open = Vec::new();
        let mut closed = Vec::new();
        let d = &row.distances;
        let mut k = 0;
        while k < d.len() {
            let mut end = k;
            while end < d.len() && d[end] == d[k] {
                end += 1;
            }
            if d[k] > 0.0 {
                radii.push(d[k]);
                open.push(row.prefix[k]);
                closed.push(row.prefix[end]);
            }
            k = end;
        }
        Self { radii, open, closed }
    }
}

/// Estimated structural constants.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StructuralConstants {
    /// Exact maximum of μ(B(x,2r))/μ(B(x,r)) over centers and radii r ≤ diameter.
    pub c_mu: f64,
    /// Smallest exponent for which the lower mass bound holds with constant ≤ `c_mu²`.
    pub q_d: f64,
    /// The constant achieved at `q_d`.
    pub c_lower: f64,
    /// Exponent and constant obtained by iterating doubling: `log₂ c_mu` and `c_mu²`.
    pub q_iterated: f64,
    pub c_iterated: f64,
    /// Largest reverse-doubling exponent with constant ≤ `c_mu²`, radii ≥ the
    /// smallest positive distance.
    pub s: f64,
    pub c_s: f64,
    /// Lower Ahlfors pair: `c0 = min μ(B(x,r))/r^Q` for `r < 2·diameter`.
    pub q_ahlfors: f64,
    pub c0: f64,
    /// Annular decay pair; `None` on non-geodesic spaces.
    pub annular: Option<AnnularDecay>,
    /// True when the exponent fits used sampled rather than all quadruples.
    pub sampled: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct AnnularDecay {
    pub c_a: f64,
    pub beta: f64,
}

impl StructuralConstants {
    /// `Q_d` floored at 1, the value used wherever an exponent `Q > 1` or
    /// `Q/(Q−θ)` is needed.
    pub fn q_effective(&self) -> f64 {
        self.q_d.max(1.0)
    }

    /// Default Lebesgue exponent `Q/(Q−θ)`.
    pub fn default_q(&self, theta: f64) -> f64 {
        let q = self.q_effective();
        q / (q - theta)
    }
}

/// Estimates all structural constants. `ahlfors_q` defaults to the fitted `Q_d`.
pub fn estimate_constants(space: &MetricMeasureSpace, ahlfors_q: Option<f64>) -> Result<StructuralConstants> {
    if space.len() < 2 {
        return Err(Error::TooFewPoints);
    }
    let profiles: Vec<RadialProfile> = (0..space.len())
        .into_par_iter()
        .map(|x| RadialProfile::new(space, x))
        .collect();
    let c_mu = doubling_constant_from(space, &profiles);
    let budget = c_mu * c_mu;
    let quads = Quadruples::new(space, &profiles);
    let (q_d, c_lower) = lower_mass_exponent(space, &profiles, &quads, budget);
    let (s, c_s) = reverse_doubling_exponent(space, &profiles, &quads, budget);
    let q_ahlfors = ahlfors_q.unwrap_or(q_d);
    let c0 = ahlfors_constant_from(space, &profiles, q_ahlfors);
    let annular = space
        .is_geodesic()
        .then(|| annular_decay_from(space, &profiles, c_mu));
    Ok(StructuralConstants {
        c_mu,
        q_d,
        c_lower,
        q_iterated: c_mu.log2(),
        c_iterated: budget,
        s,
        c_s,
        q_ahlfors,
        c0,
        annular,
        sampled: quads.sampled,
    })
}

/// Exact doubling constant.
pub fn doubling_constant(space: &MetricMeasureSpace) -> Result<f64> {
    if space.len() < 2 {
        return Err(Error::TooFewPoints);
    }
    let profiles: Vec<RadialProfile> = (0..space.len())
        .into_par_iter()
        .map(|x| RadialProfile::new(space, x))
        .collect();
    Ok(doubling_constant_from(space, &profiles))
}

/// The ratio μ(B(x,2r))/μ(B(x,r)) is constant on intervals (a, b] whose
/// endpoints are distances or half-distances from `x`, so its maximum over
/// `r ≤ diam` is attained at one of those endpoints or at `diam`.
fn doubling_constant_from(space: &MetricMeasureSpace, profiles: &[RadialProfile]) -> f64 {
    let diam = space.diameter();
    profiles
        .par_iter()
        .enumerate()
        .map(|(x, p)| {
            let ratio = |r: f64| space.ball_mass(x, 2.0 * r) / space.ball_mass(x, r);
            let mut best = ratio(diam);
            for &d in &p.radii {
                best = best.max(ratio(d)).max(ratio(0.5 * d));
            }
            best
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(1.0, f64::max)
}

/// Index triples `(x, y, k)` with `y` a point and `k` indexing a radius of
/// `x`'s profile, either all of them or a seeded sample.
struct Quadruples {
    triples: Vec<(u32, u32, u32)>,
    sampled: bool,
}

impl Quadruples {
    fn new(space: &MetricMeasureSpace, profiles: &[RadialProfile]) -> Self {
        let n = space.len();
        let m_max = profiles.iter().map(|p| p.radii.len()).max().unwrap_or(0).max(1);
        let full = n.saturating_mul(n).saturating_mul(m_max).saturating_mul(m_max);
        if full <= FIT_QUADRUPLE_LIMIT {
            let mut triples = Vec::new();
            for x in 0..n {
                for y in 0..n {
                    for k in 0..profiles[x].radii.len() {
                        triples.push((x as u32, y as u32, k as u32));
                    }
                }
            }
            return Self { triples, sampled: false };
        }
        let count = (FIT_QUADRUPLE_LIMIT / m_max).max(10_000);
        let mut rng = ChaCha8Rng::seed_from_u64(FIT_SEED);
        let triples = (0..count)
            .map(|_| {
                let x = rng.gen_range(0..n);
                let y = rng.gen_range(0..n);
                let k = rng.gen_range(0..profiles[x].radii.len());
                (x as u32, y as u32, k as u32)
            })
            .collect();
        Self { triples, sampled: true }
    }
}

/// Smallest `Q` such that `(r/R)^Q μ(B(x,R))/μ(B(y,r)) ≤ budget` over all
/// `y ∈ B(x,R)`, `r ≤ R`.
///
/// For fixed masses the worst `R` approaches a distance `d_k` from above
/// (mass = closed ball at `d_k`), the worst `r` sits at a distance of `y`
/// (open ball mass). Each quadruple yields a lower bound on `Q` in closed form.
fn lower_mass_exponent(
    space: &MetricMeasureSpace,
    profiles: &[RadialProfile],
    quads: &Quadruples,
    budget: f64,
) -> (f64, f64) {
    let q = quads
        .triples
        .par_iter()
        .map(|&(x, y, k)| {
            let (x, y, k) = (x as usize, y as usize, k as usize);
            let px = &profiles[x];
            let big_r = px.radii[k];
            if space.d(x, y) > big_r {
                return 0.0;
            }
            let big_m = px.closed[k];
            let py = &profiles[y];
            let mut need: f64 = 0.0;
            for j in 0..py.radii.len() {
                let r = py.radii[j];
                if r > big_r {
                    break;
                }
                let excess = big_m / (budget * py.open[j]);
                if r < big_r && excess > 1.0 {
                    need = need.max(excess.ln() / (big_r / r).ln());
                }
            }
            need
        })
        .reduce(|| 0.0, f64::max);
    let c = lower_mass_constant(space, profiles, quads, q);
    (q, c)
}

fn lower_mass_constant(space: &MetricMeasureSpace, profiles: &[RadialProfile], quads: &Quadruples, q: f64) -> f64 {
    quads
        .triples
        .par_iter()
        .map(|&(x, y, k)| {
            let (x, y, k) = (x as usize, y as usize, k as usize);
            let big_r = profiles[x].radii[k];
            if space.d(x, y) > big_r {
                return 1.0;
            }
            let big_m = profiles[x].closed[k];
            let py = &profiles[y];
            let mut worst: f64 = 1.0;
            for j in 0..py.radii.len() {
                let r = py.radii[j];
                if r > big_r {
                    break;
                }
                worst = worst.max((r / big_r).powf(q) * big_m / py.open[j]);
            }
            worst
        })
        .reduce(|| 1.0, f64::max)
}

/// Largest `s ≤ 64` with `μ(B(y,r))/μ(B(x,R)) ≤ budget·(r/R)^s` for
/// `h_min ≤ r ≤ R ≤ 2·diam`, `y ∈ B(x,R)`.
///
/// Below the smallest positive distance a ball is a single atom whose mass
/// cannot decay, so radii under `h_min` are excluded.
fn reverse_doubling_exponent(
    space: &MetricMeasureSpace,
    profiles: &[RadialProfile],
    quads: &Quadruples,
    budget: f64,
) -> (f64, f64) {
    const S_CAP: f64 = 64.0;
    let two_diam = 2.0 * space.diameter();
    let h = space.min_distance();
    let total = space.total_mass();
    // R is attained at a distance d_k of x (open mass) or at 2·diam.
    let bound = |x: usize, y: usize, big_r: f64, big_m: f64| -> f64 {
        if space.d(x, y) >= big_r {
            return S_CAP;
        }
        let py = &profiles[y];
        // ratio ≤ budget (r/R)^s  ⇔  s ≤ ln(budget/ratio)/ln(R/r)
        let limit = |r: f64, mass: f64| (budget * big_m / mass).ln() / (big_r / r).ln();
        let mut allowed = S_CAP;
        if h < big_r {
            allowed = allowed.min(limit(h, space.ball_mass(y, h)));
        }
        for j in 0..py.radii.len() {
            let r = py.radii[j];
            if r >= big_r {
                break;
            }
            // r just above d_j carries the closed mass.
            allowed = allowed.min(limit(r, py.closed[j]));
        }
        allowed
    };
    let from_triples = quads
        .triples
        .par_iter()
        .map(|&(x, y, k)| {
            let (x, y, k) = (x as usize, y as usize, k as usize);
            bound(x, y, profiles[x].radii[k], profiles[x].open[k])
        })
        .reduce(|| S_CAP, f64::min);
    let n = space.len();
    let from_top = (0..n)
        .into_par_iter()
        .map(|y| bound(0, y, two_diam, total))
        .reduce(|| S_CAP, f64::min);
    let s = from_triples.min(from_top).max(0.0);
    (s, budget)
}

/// `min_x inf_{0<r<2 diam} μ(B(x,r))/r^Q`; on each interval `(d_k, d_{k+1}]`
/// the infimum sits at the right end, and the last interval ends at `2·diam`.
pub fn ahlfors_constant(space: &MetricMeasureSpace, q: f64) -> Result<f64> {
    if space.len() < 2 {
        return Err(Error::TooFewPoints);
    }
    let profiles: Vec<RadialProfile> = (0..space.len())
        .into_par_iter()
        .map(|x| RadialProfile::new(space, x))
        .collect();
    Ok(ahlfors_constant_from(space, &profiles, q))
}

fn ahlfors_constant_from(space: &MetricMeasureSpace, profiles: &[RadialProfile], q: f64) -> f64 {
    let tail = space.total_mass() / (2.0 * space.diameter()).powf(q);
    profiles
        .par_iter()
        .map(|p| {
            p.radii
                .iter()
                .zip(&p.open)
                .map(|(&r, &m)| m / r.powf(q))
                .fold(tail, f64::min)
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// Fits `μ(shell)/μ(B(x,r)) ≤ C_A ε^β` with `C_A = C_mu`, over shells
/// `{ρ < d < r}` whose inner radius is 0 or a distance from `x` and whose
/// width is at least the smallest positive distance (thinner shells cannot
/// be resolved on a discrete space).
fn annular_decay_from(space: &MetricMeasureSpace, profiles: &[RadialProfile], c_mu: f64) -> AnnularDecay {
    let h = space.min_distance();
    let beta = profiles
        .par_iter()
        .enumerate()
        .map(|(x, p)| {
            let mut beta: f64 = 1.0;
            let mut outer: Vec<(f64, f64)> = p.radii.iter().zip(&p.open).map(|(&r, &m)| (r, m)).collect();
            outer.push((space.diameter() + h, space.total_mass()));
            let center = space.weight(x);
            let inner = std::iter::once((0.0, center)).chain(p.radii.iter().zip(&p.closed).map(|(&r, &m)| (r, m)));
            for (rho, inner_mass) in inner {
                for &(r, ball) in &outer {
                    if r - rho < h * (1.0 - 1e-12) {
                        continue;
                    }
                    let eps = 1.0 - rho / r;
                    let shell = ball - inner_mass;
                    if shell <= 0.0 || eps >= 1.0 {
                        continue;
                    }
                    let ratio = shell / (c_mu * ball);
                    if ratio > eps {
                        // ratio ≤ ε^β  ⇔  β ≤ ln ratio / ln ε
                        beta = beta.min(ratio.ln() / eps.ln());
                    }
                }
            }
            beta
        })
        .reduce(|| 1.0, f64::min);
    let beta = beta.max(f64::MIN_POSITIVE);
    AnnularDecay { c_a: c_mu, beta }
}
