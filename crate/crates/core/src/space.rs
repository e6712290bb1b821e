//! Finite metric measure spaces: weighted points with either an explicit
//! distance matrix or a graph whose shortest-path lengths define the metric.

use std::collections::{BinaryHeap, VecDeque};
use std::cmp::{Ordering, Reverse};
use std::num::NonZeroUsize;
use std::ops::Deref;
use std::sync::{Arc, Mutex, OnceLock};

use fixedbitset::FixedBitSet;
use lru::LruCache;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::sum::compensated_sum;

/// Above this size geodesic distances are computed per source on demand.
pub const DENSE_DISTANCE_LIMIT: usize = 20_000;
/// Above this size the per-pair ball-mass table is not materialized.
pub const BALL_MASS_TABLE_LIMIT: usize = 12_000;
/// Above this size the triangle inequality is checked on sampled triples.
pub const FULL_TRIANGLE_CHECK_LIMIT: usize = 500;
const SAMPLED_TRIANGLES: usize = 1_000_000;
const TRIANGLE_SEED: u64 = 0x7269_616e_676c_6573;
const ROW_CACHE_CAPACITY: usize = 256;
const TRIANGLE_RTOL: f64 = 1e-12;

/// How the metric was specified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricMode {
    Matrix,
    Graph,
}

enum DistanceStorage {
    Dense(Vec<f64>),
    OnDemand(Mutex<LruCache<usize, Arc<Vec<f64>>>>),
}

/// A borrowed or shared row of the distance matrix.
pub enum Row<'a> {
    Borrowed(&'a [f64]),
    Shared(Arc<Vec<f64>>),
}

impl Deref for Row<'_> {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        match self {
            Row::Borrowed(s) => s,
            Row::Shared(v) => v.as_slice(),
        }
    }
}

/// Per-center distances sorted ascending with cumulative masses; answers
/// open- and closed-ball mass queries by binary search.
pub struct SortedRow {
    pub distances: Vec<f64>,
    /// `prefix[k]` is the mass of the `k` nearest points (prefix[0] = 0).
    pub prefix: Vec<f64>,
}

impl SortedRow {
    fn build(row: &[f64], weights: &[f64]) -> Self {
        let mut order: Vec<(f64, usize)> = row.iter().copied().zip(0..).collect();
        order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut prefix = Vec::with_capacity(order.len() + 1);
        prefix.push(0.0);
        let mut acc = crate::sum::NeumaierSum::new();
        for &(_, j) in &order {
            acc.add(weights[j]);
            prefix.push(acc.value());
        }
        Self {
            distances: order.into_iter().map(|(d, _)| d).collect(),
            prefix,
        }
    }

    /// μ({y : d < r}).
    #[inline]
    pub fn open_mass(&self, r: f64) -> f64 {
        self.prefix[self.distances.partition_point(|&d| d < r)]
    }

    /// μ({y : d ≤ r}).
    #[inline]
    pub fn closed_mass(&self, r: f64) -> f64 {
        self.prefix[self.distances.partition_point(|&d| d <= r)]
    }

    /// Distinct positive distances from the center, ascending.
    pub fn distinct_positive(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &d in &self.distances {
            if d > 0.0 && out.last() != Some(&d) {
                out.push(d);
            }
        }
        out
    }
}

/// A finite metric measure space `(X, d, μ)`.
///
/// Immutable after construction. Derived tables (sorted rows, ball masses)
/// are computed lazily once and shared by all queries.
pub struct MetricMeasureSpace {
    n: usize,
    weights: Vec<f64>,
    total_mass: f64,
    mode: MetricMode,
    storage: DistanceStorage,
    adjacency: Option<Vec<Vec<(usize, f64)>>>,
    coords: Option<Vec<Vec<f64>>>,
    diameter: f64,
    min_distance: f64,
    sorted_rows: OnceLock<Vec<SortedRow>>,
    ball_mass_table: OnceLock<Option<Vec<f64>>>,
}

impl std::fmt::Debug for MetricMeasureSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricMeasureSpace")
            .field("n", &self.n)
            .field("mode", &self.mode)
            .field("total_mass", &self.total_mass)
            .field("diameter", &self.diameter)
            .finish()
    }
}

fn validate_weights(weights: &[f64], n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidSpace("a space needs at least one point".into()));
    }
    if weights.len() != n {
        return Err(Error::InvalidSpace(format!(
            "expected {n} weights, got {}",
            weights.len()
        )));
    }
    if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(Error::InvalidSpace(format!(
            "weight {i} must be positive and finite, got {}",
            weights[i]
        )));
    }
    Ok(())
}

impl MetricMeasureSpace {
    /// Builds a space from a dense distance matrix.
    pub fn from_matrix(matrix: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        let n = matrix.len();
        validate_weights(&weights, n)?;
        let mut dense = Vec::with_capacity(n * n);
        for (i, row) in matrix.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidSpace(format!(
                    "matrix row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            dense.extend_from_slice(row);
        }
        for i in 0..n {
            for j in 0..n {
                let d = dense[i * n + j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidSpace(format!(
                        "distance ({i},{j}) must be finite and nonnegative, got {d}"
                    )));
                }
                if i == j && d != 0.0 {
                    return Err(Error::InvalidSpace(format!(
                        "diagonal entry ({i},{i}) must be zero, got {d}"
                    )));
                }
                if i != j && d == 0.0 {
                    return Err(Error::InvalidSpace(format!(
                        "points {i} and {j} are at distance zero (duplicate points)"
                    )));
                }
                if dense[j * n + i] != d {
                    return Err(Error::InvalidSpace(format!(
                        "matrix is not symmetric at ({i},{j}): {d} vs {}",
                        dense[j * n + i]
                    )));
                }
            }
        }
        check_triangle_inequality(n, |i| Row::Borrowed(&dense[i * n..(i + 1) * n]))?;
        Ok(Self::assemble(
            n,
            weights,
            MetricMode::Matrix,
            DistanceStorage::Dense(dense),
            None,
        ))
    }

    /// Builds a geodesic space from an undirected weighted graph; the metric
    /// is the shortest-path length.
    pub fn from_graph(n: usize, edges: &[(usize, usize, f64)], weights: Vec<f64>) -> Result<Self> {
        validate_weights(&weights, n)?;
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (k, &(i, j, len)) in edges.iter().enumerate() {
            if i >= n || j >= n {
                return Err(Error::InvalidSpace(format!(
                    "edge {k} ({i},{j}) references a point outside 0..{n}"
                )));
            }
            if i == j {
                return Err(Error::InvalidSpace(format!("edge {k} is a self-loop at {i}")));
            }
            if !(len.is_finite() && len > 0.0) {
                return Err(Error::InvalidSpace(format!(
                    "edge {k} ({i},{j}) must have positive finite length, got {len}"
                )));
            }
            add_edge(&mut adjacency[i], j, len);
            add_edge(&mut adjacency[j], i, len);
        }
        for list in &mut adjacency {
            list.sort_unstable_by_key(|e| e.0);
        }
        let reached = bfs_hops(&adjacency, 0).iter().filter(|h| **h != usize::MAX).count();
        if reached != n {
            return Err(Error::InvalidSpace(format!(
                "graph is disconnected: {reached} of {n} points reachable from point 0"
            )));
        }

        let storage = if n <= DENSE_DISTANCE_LIMIT {
            DistanceStorage::Dense(all_pairs_shortest_paths(&adjacency))
        } else {
            DistanceStorage::OnDemand(Mutex::new(LruCache::new(
                NonZeroUsize::new(ROW_CACHE_CAPACITY).expect("nonzero capacity"),
            )))
        };
        let space = Self::assemble(n, weights, MetricMode::Graph, storage, Some(adjacency));
        check_triangle_inequality(n, |i| space.row(i))?;
        Ok(space)
    }

    fn assemble(
        n: usize,
        weights: Vec<f64>,
        mode: MetricMode,
        storage: DistanceStorage,
        adjacency: Option<Vec<Vec<(usize, f64)>>>,
    ) -> Self {
        let total_mass = compensated_sum(weights.iter().copied());
        let mut space = Self {
            n,
            weights,
            total_mass,
            mode,
            storage,
            adjacency,
            coords: None,
            diameter: 0.0,
            min_distance: f64::INFINITY,
            sorted_rows: OnceLock::new(),
            ball_mass_table: OnceLock::new(),
        };
        let (diameter, min_distance) = match (&space.storage, &space.adjacency) {
            (DistanceStorage::Dense(d), _) => d.par_iter().fold(
                || (0.0f64, f64::INFINITY),
                |(mx, mn), &v| (mx.max(v), if v > 0.0 { mn.min(v) } else { mn }),
            )
            .reduce(|| (0.0, f64::INFINITY), |a, b| (a.0.max(b.0), a.1.min(b.1))),
            (DistanceStorage::OnDemand(_), Some(adj)) => {
                let min_edge = adj
                    .iter()
                    .flat_map(|l| l.iter().map(|e| e.1))
                    .fold(f64::INFINITY, f64::min);
                let diam = (0..n)
                    .into_par_iter()
                    .map(|i| single_source(adj, i).into_iter().fold(0.0, f64::max))
                    .reduce(|| 0.0, f64::max);
                (diam, min_edge)
            }
            (DistanceStorage::OnDemand(_), None) => unreachable!("on-demand storage needs a graph"),
        };
        space.diameter = diameter;
        space.min_distance = min_distance;
        space
    }

    /// The same metric carrying a different measure.
    pub fn with_weights(&self, weights: Vec<f64>) -> Result<Self> {
        validate_weights(&weights, self.n)?;
        let storage = match &self.storage {
            DistanceStorage::Dense(d) => DistanceStorage::Dense(d.clone()),
            DistanceStorage::OnDemand(_) => DistanceStorage::OnDemand(Mutex::new(LruCache::new(
                NonZeroUsize::new(ROW_CACHE_CAPACITY).expect("nonzero capacity"),
            ))),
        };
        let mut out = Self::assemble(self.n, weights, self.mode, storage, self.adjacency.clone());
        out.coords = self.coords.clone();
        Ok(out)
    }

    /// Attaches Euclidean coordinates (used by coordinate-based set families).
    pub fn with_coords(mut self, coords: Vec<Vec<f64>>) -> Result<Self> {
        if coords.len() != self.n {
            return Err(Error::InvalidSpace(format!(
                "expected {} coordinate rows, got {}",
                self.n,
                coords.len()
            )));
        }
        let dim = coords.first().map_or(0, Vec::len);
        if coords.iter().any(|c| c.len() != dim || c.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidSpace("coordinates must be finite with a common dimension".into()));
        }
        self.coords = Some(coords);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    pub fn mode(&self) -> MetricMode {
        self.mode
    }

    pub fn is_geodesic(&self) -> bool {
        self.mode == MetricMode::Graph
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Smallest positive pairwise distance (infinite for a single point).
    pub fn min_distance(&self) -> f64 {
        self.min_distance
    }

    pub fn coords(&self) -> Option<&[Vec<f64>]> {
        self.coords.as_deref()
    }

    pub fn adjacency(&self) -> Option<&[Vec<(usize, f64)>]> {
        self.adjacency.as_deref()
    }

    /// Undirected edges `(i, j, length)` with `i < j`, in graph mode.
    pub fn edges(&self) -> Option<Vec<(usize, usize, f64)>> {
        self.adjacency.as_ref().map(|adj| {
            adj.iter()
                .enumerate()
                .flat_map(|(i, l)| l.iter().filter(move |e| e.0 > i).map(move |e| (i, e.0, e.1)))
                .collect()
        })
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, n: self.n })
        }
    }

    /// The distance between two points.
    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        self.check_index(i)?;
        self.check_index(j)?;
        Ok(self.d(i, j))
    }

    /// Unchecked distance lookup.
    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        match &self.storage {
            DistanceStorage::Dense(d) => d[i * self.n + j],
            DistanceStorage::OnDemand(_) => self.row(i)[j],
        }
    }

    /// All distances from point `i`.
    pub fn row(&self, i: usize) -> Row<'_> {
        match &self.storage {
            DistanceStorage::Dense(d) => Row::Borrowed(&d[i * self.n..(i + 1) * self.n]),
            DistanceStorage::OnDemand(cache) => {
                if let Some(r) = cache.lock().expect("row cache poisoned").get(&i) {
                    return Row::Shared(Arc::clone(r));
                }
                let adj = self.adjacency.as_ref().expect("on-demand storage needs a graph");
                let row = Arc::new(single_source(adj, i));
                cache
                    .lock()
                    .expect("row cache poisoned")
                    .put(i, Arc::clone(&row));
                Row::Shared(row)
            }
        }
    }

    /// Sorted distance rows with cumulative masses, built on first use.
    pub fn sorted_rows(&self) -> &[SortedRow] {
        self.sorted_rows.get_or_init(|| {
            (0..self.n)
                .into_par_iter()
                .map(|i| SortedRow::build(&self.row(i), &self.weights))
                .collect()
        })
    }

    pub fn sorted_row(&self, i: usize) -> &SortedRow {
        &self.sorted_rows()[i]
    }

    /// The open ball `{y : d(center, y) < r}`.
    pub fn ball(&self, center: usize, r: f64) -> Result<PointSet> {
        self.check_index(center)?;
        if !(r > 0.0) {
            return Err(Error::NonPositiveRadius(r));
        }
        Ok(self.ball_unchecked(center, r))
    }

    pub(crate) fn ball_unchecked(&self, center: usize, r: f64) -> PointSet {
        let row = self.row(center);
        let mut bits = FixedBitSet::with_capacity(self.n);
        for (j, &d) in row.iter().enumerate() {
            if d < r {
                bits.insert(j);
            }
        }
        PointSet::from_bits(bits, &self.weights)
    }

    /// μ(B(center, r)) for the open ball.
    pub fn ball_measure(&self, center: usize, r: f64) -> Result<f64> {
        self.check_index(center)?;
        if !(r > 0.0) {
            return Err(Error::NonPositiveRadius(r));
        }
        Ok(self.ball_mass(center, r))
    }

    /// Unchecked μ(B(center, r)).
    #[inline]
    pub fn ball_mass(&self, center: usize, r: f64) -> f64 {
        self.sorted_row(center).open_mass(r)
    }

    /// Unchecked μ of the closed ball.
    #[inline]
    pub fn closed_ball_mass(&self, center: usize, r: f64) -> f64 {
        self.sorted_row(center).closed_mass(r)
    }

    /// `μ(B(x, d(x, y)))` for every ordered pair, row-major; `None` when the
    /// space is too large to tabulate.
    pub fn ball_mass_table(&self) -> Option<&[f64]> {
        self.ball_mass_table
            .get_or_init(|| {
                if self.n > BALL_MASS_TABLE_LIMIT {
                    return None;
                }
                let n = self.n;
                let mut table = vec![0.0; n * n];
                table.par_chunks_mut(n).enumerate().for_each(|(x, out)| {
                    fill_ball_mass_row(&self.row(x), &self.weights, out);
                });
                Some(table)
            })
            .as_deref()
    }

    /// `μ(B(x, d(x, y)))`.
    #[inline]
    pub fn ball_mass_at(&self, x: usize, y: usize) -> f64 {
        match self.ball_mass_table() {
            Some(t) => t[x * self.n + y],
            None => {
                let row = self.row(x);
                let r = row[y];
                compensated_sum(row.iter().zip(&self.weights).filter(|(d, _)| **d < r).map(|(_, w)| *w))
            }
        }
    }

    /// All distinct positive pairwise distances, ascending.
    pub fn critical_radii(&self) -> Vec<f64> {
        let mut all: Vec<f64> = (0..self.n)
            .into_par_iter()
            .flat_map_iter(|i| {
                let row = self.row(i);
                let mut v: Vec<f64> = row[i + 1..].to_vec();
                v.sort_unstable_by(f64::total_cmp);
                v.dedup();
                v
            })
            .collect();
        all.sort_unstable_by(f64::total_cmp);
        all.dedup();
        all
    }

    pub fn set_mass(&self, set: &PointSet) -> f64 {
        set.debug_check_mass(&self.weights);
        set.mass()
    }
}

fn add_edge(list: &mut Vec<(usize, f64)>, to: usize, len: f64) {
    match list.iter_mut().find(|e| e.0 == to) {
        Some(e) => e.1 = e.1.min(len),
        None => list.push((to, len)),
    }
}

fn fill_ball_mass_row(row: &[f64], weights: &[f64], out: &mut [f64]) {
    // Nonnegative floats order like their bit patterns; rows usually have
    // far fewer distinct values than entries, so bucket by distinct value.
    let mut keys: Vec<u64> = row.iter().map(|d| d.to_bits()).collect();
    keys.sort_unstable();
    keys.dedup();
    let mut bucket_mass = vec![crate::sum::NeumaierSum::new(); keys.len()];
    let bucket: Vec<u32> = row
        .iter()
        .map(|d| keys.binary_search(&d.to_bits()).expect("key present") as u32)
        .collect();
    for (b, &w) in bucket.iter().zip(weights) {
        bucket_mass[*b as usize].add(w);
    }
    let mut below = Vec::with_capacity(keys.len());
    let mut acc = crate::sum::NeumaierSum::new();
    for m in &bucket_mass {
        below.push(acc.value());
        acc.add(m.value());
    }
    for (o, b) in out.iter_mut().zip(bucket) {
        *o = below[b as usize];
    }
}

fn bfs_hops(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<usize> {
    let mut hops = vec![usize::MAX; adj.len()];
    hops[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &(w, _) in &adj[v] {
            if hops[w] == usize::MAX {
                hops[w] = hops[v] + 1;
                queue.push_back(w);
            }
        }
    }
    hops
}

fn uniform_edge_length(adj: &[Vec<(usize, f64)>]) -> Option<f64> {
    let first = adj.iter().flat_map(|l| l.first()).map(|e| e.1).next()?;
    adj.iter()
        .all(|l| l.iter().all(|e| e.1 == first))
        .then_some(first)
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);
impl Eq for HeapItem {}
impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

fn dijkstra(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::from([Reverse(HeapItem(0.0, source))]);
    while let Some(Reverse(HeapItem(d, v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, len) in &adj[v] {
            let nd = d + len;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Reverse(HeapItem(nd, w)));
            }
        }
    }
    dist
}

/// Path length of `k` hops of length `h`, accumulated hop by hop so that
/// equal hop counts always give bit-identical distances.
fn hop_lengths(h: f64, max_hops: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_hops + 1);
    let mut acc = 0.0;
    out.push(acc);
    for _ in 0..max_hops {
        acc += h;
        out.push(acc);
    }
    out
}

fn single_source(adj: &[Vec<(usize, f64)>], source: usize) -> Vec<f64> {
    match uniform_edge_length(adj) {
        Some(h) => {
            let hops = bfs_hops(adj, source);
            let table = hop_lengths(h, adj.len());
            hops.into_iter().map(|k| table[k]).collect()
        }
        None => dijkstra(adj, source),
    }
}

fn all_pairs_shortest_paths(adj: &[Vec<(usize, f64)>]) -> Vec<f64> {
    let n = adj.len();
    let mut dense = vec![0.0; n * n];
    dense
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, out)| out.copy_from_slice(&single_source(adj, i)));
    // Dijkstra sums along different paths may disagree in the last bit.
    for i in 0..n {
        for j in (i + 1)..n {
            let m = dense[i * n + j].min(dense[j * n + i]);
            dense[i * n + j] = m;
            dense[j * n + i] = m;
        }
    }
    dense
}

fn check_triangle_inequality<'a, F>(n: usize, row: F) -> Result<()>
where
    F: Fn(usize) -> Row<'a> + Sync,
{
    let violation = |i: usize, j: usize, k: usize, dij: f64, djk: f64, dik: f64| {
        Error::InvalidSpace(format!(
            "triangle inequality fails for ({i},{j},{k}): d({i},{k}) = {dik} > {dij} + {djk}"
        ))
    };
    if n <= FULL_TRIANGLE_CHECK_LIMIT {
        let found = (0..n).into_par_iter().find_map_first(|i| {
            let ri = row(i);
            for j in 0..n {
                let rj = row(j);
                let dij = ri[j];
                for k in 0..n {
                    let bound = dij + rj[k];
                    if ri[k] > bound + TRIANGLE_RTOL * bound {
                        return Some(violation(i, j, k, dij, rj[k], ri[k]));
                    }
                }
            }
            None
        });
        return found.map_or(Ok(()), Err);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(TRIANGLE_SEED);
    let triples: Vec<(usize, usize, usize)> = (0..SAMPLED_TRIANGLES)
        .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)))
        .collect();
    for (i, j, k) in triples {
        let ri = row(i);
        let rj = row(j);
        let bound = ri[j] + rj[k];
        if ri[k] > bound + TRIANGLE_RTOL * bound {
            return Err(violation(i, j, k, ri[j], rj[k], ri[k]));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn unit_path(n: usize) -> MetricMeasureSpace {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        MetricMeasureSpace::from_graph(n, &edges, vec![1.0; n]).unwrap()
    }

    fn two_point() -> MetricMeasureSpace {
        MetricMeasureSpace::from_matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn distance_examples() {
        let p = unit_path(3);
        assert_eq!(p.distance(0, 2).unwrap(), 2.0);
        assert_eq!(p.distance(1, 1).unwrap(), 0.0);
        assert_eq!(two_point().distance(1, 0).unwrap(), 1.0);
        assert_eq!(
            p.distance(0, 3),
            Err(Error::IndexOutOfRange { index: 3, n: 3 })
        );
    }

    #[test]
    fn ball_examples() {
        let s = two_point();
        assert_eq!(s.ball(0, 1.0).unwrap().indices(), vec![0]);
        assert_eq!(s.ball(0, 1.5).unwrap().indices(), vec![0, 1]);
        assert_eq!(unit_path(3).ball(1, 1.0).unwrap().indices(), vec![1]);
        assert_eq!(s.ball(0, 0.0), Err(Error::NonPositiveRadius(0.0)));
        assert!(s.ball(0, -1.0).is_err());
    }

    #[test]
    fn ball_measure_examples() {
        let p = unit_path(3);
        assert_eq!(p.ball_measure(1, 1.5).unwrap(), 3.0);
        assert_eq!(p.ball_measure(0, 1.0).unwrap(), 1.0);
        assert_eq!(p.ball_measure(2, p.diameter() + 0.1).unwrap(), p.total_mass());
        assert!(p.ball_measure(0, 0.0).is_err());
    }

    #[test]
    fn critical_radii_examples() {
        assert_eq!(unit_path(3).critical_radii(), vec![1.0, 2.0]);
        assert_eq!(two_point().critical_radii(), vec![1.0]);
        let single = MetricMeasureSpace::from_matrix(vec![vec![0.0]], vec![1.0]).unwrap();
        assert!(single.critical_radii().is_empty());
    }

    #[test]
    fn rejects_invalid_input() {
        let asym = MetricMeasureSpace::from_matrix(vec![vec![0.0, 1.0], vec![2.0, 0.0]], vec![1.0; 2]);
        assert!(matches!(asym, Err(Error::InvalidSpace(m)) if m.contains("symmetric")));
        let neg = MetricMeasureSpace::from_matrix(vec![vec![0.0, -1.0], vec![-1.0, 0.0]], vec![1.0; 2]);
        assert!(neg.is_err());
        let dup = MetricMeasureSpace::from_matrix(vec![vec![0.0, 0.0], vec![0.0, 0.0]], vec![1.0; 2]);
        assert!(dup.is_err());
        let weight = MetricMeasureSpace::from_matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 0.0]);
        assert!(weight.is_err());
        let tri = MetricMeasureSpace::from_matrix(
            vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]],
            vec![1.0; 3],
        );
        assert!(matches!(tri, Err(Error::InvalidSpace(m)) if m.contains("triangle")));
        let disconnected = MetricMeasureSpace::from_graph(3, &[(0, 1, 1.0)], vec![1.0; 3]);
        assert!(matches!(disconnected, Err(Error::InvalidSpace(m)) if m.contains("disconnected")));
    }

    #[test]
    fn dijkstra_and_hop_paths_agree_on_dyadic_lengths() {
        let edges = [(0, 1, 0.25), (1, 2, 0.5), (0, 2, 1.0), (2, 3, 0.25)];
        let s = MetricMeasureSpace::from_graph(4, &edges, vec![1.0; 4]).unwrap();
        assert_eq!(s.d(0, 2), 0.75);
        assert_eq!(s.d(0, 3), 1.0);
        assert_eq!(s.d(3, 0), 1.0);
    }

    #[test]
    fn ball_mass_table_matches_direct_sums() {
        let p = unit_path(5);
        for x in 0..5 {
            for y in 0..5 {
                let r = p.d(x, y);
                let direct: f64 = (0..5).filter(|&z| p.d(x, z) < r).map(|z| p.weight(z)).sum();
                assert_eq!(p.ball_mass_at(x, y), direct);
            }
        }
    }
}
