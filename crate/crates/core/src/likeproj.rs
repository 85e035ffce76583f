//! Like-projection onto the feasible set and the classic Euclidean projection.
//!
//! The like-projection measures distance after rescaling a candidate `u`
//! through the reparametrisation `ψ_z(u) = (x_γ u_x, u_y / x_γ)`, where `γ`
//! is the first index with `u_γ ≠ 0` and `x_γ ≠ 0`. When `x = 0` the map is
//! the identity. Minimizers have the closed form described on
//! [`like_project_with`].

use crate::error::{check_len, Result, SblsError};
use crate::feasible::DEFAULT_ZERO_TOL;
use crate::tensor::Point;

/// Result sets larger than this are summarised by their count and one representative.
pub const MAX_ENUMERATED: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectOptions {
    /// Entries with `|v| <= zero_tol` are treated as zero.
    pub zero_tol: f64,
    /// Magnitudes within `tie_tol` of the cut-off value count as tied.
    pub tie_tol: f64,
}

impl Default for ProjectOptions {
    fn default() -> Self {
        ProjectOptions {
            zero_tol: DEFAULT_ZERO_TOL,
            tie_tol: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    /// All minimizers in enumeration order, or only the first one when truncated.
    pub minimizers: Vec<Point>,
    /// Exact number of minimizers (saturating).
    pub count: u128,
    /// Squared distance attained by the first minimizer.
    pub distance_sq: f64,
    pub truncated: bool,
}

impl ProjectionResult {
    pub fn representative(&self) -> &Point {
        &self.minimizers[0]
    }
}

/// `ψ_z(u)`, or `None` when no index of `supp(u_x)` carries a nonzero `x`.
pub fn psi(z: &Point, u: &Point) -> Option<Point> {
    let (x, ux) = (z.x(), u.x());
    if x.iter().all(|&v| v == 0.0) {
        return Some(u.clone());
    }
    let g = (0..x.len()).find(|&i| ux[i] != 0.0 && x[i] != 0.0)?;
    let a = x[g];
    let px: Vec<f64> = ux.iter().map(|v| a * v).collect();
    let py: Vec<f64> = u.y().iter().map(|v| v / a).collect();
    Some(Point::new(&px, &py))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Indices sorted by decreasing magnitude, ties broken by increasing index.
pub fn magnitude_order(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()).then(a.cmp(&b)));
    idx
}

/// `M_k(v)`: the `k`-th largest magnitude, or zero when `k > v.len()`.
pub fn kth_largest_magnitude(v: &[f64], k: usize) -> f64 {
    if k == 0 || k > v.len() {
        return 0.0;
    }
    v[magnitude_order(v)[k - 1]].abs()
}

/// `Σ` of squared entries outside the `k` largest magnitudes.
pub fn tail_sq(v: &[f64], k: usize) -> f64 {
    magnitude_order(v)
        .iter()
        .skip(k)
        .map(|&i| v[i] * v[i])
        .sum()
}

/// Closed-form squared like-projection distance.
pub fn tail_distance_sq(z: &Point, s: usize, t: usize) -> f64 {
    let ytail = tail_sq(z.y(), t);
    if z.x().iter().all(|&v| v == 0.0) {
        1.0 + ytail
    } else {
        tail_sq(z.x(), s) + ytail
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

/// Ways of keeping the `k` largest magnitudes of a block.
struct KeepChoice {
    /// Entries strictly above the cut-off, always kept.
    forced: Vec<usize>,
    /// Entries tied at the cut-off.
    tied: Vec<usize>,
    /// How many of `tied` to keep.
    pick: usize,
}

impl KeepChoice {
    fn new(v: &[f64], k: usize, opts: &ProjectOptions) -> Self {
        let cut = kth_largest_magnitude(v, k);
        if cut == 0.0 {
            let forced = (0..v.len()).filter(|&i| v[i] != 0.0).collect();
            return KeepChoice {
                forced,
                tied: Vec::new(),
                pick: 0,
            };
        }
        let forced: Vec<usize> = (0..v.len())
            .filter(|&i| v[i].abs() > cut + opts.tie_tol)
            .collect();
        let tied: Vec<usize> = (0..v.len())
            .filter(|&i| v[i] != 0.0 && (v[i].abs() - cut).abs() <= opts.tie_tol)
            .collect();
        let pick = k - forced.len();
        KeepChoice { forced, tied, pick }
    }

    fn count(&self) -> u128 {
        binomial(self.tied.len(), self.pick)
    }

    /// Kept index sets in lexicographic order of the chosen tied subset.
    fn sets(&self, limit: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for combo in Combinations::new(self.tied.len(), self.pick) {
            if out.len() >= limit {
                break;
            }
            let mut set = self.forced.clone();
            set.extend(combo.iter().map(|&c| self.tied[c]));
            set.sort_unstable();
            out.push(set);
        }
        out
    }
}

/// Lexicographic `k`-subsets of `0..n`.
pub(crate) struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let cur = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(cur)
    }
}

fn zeroed(v: &[f64], tol: f64) -> Vec<f64> {
    v.iter().map(|&a| if a.abs() <= tol { 0.0 } else { a }).collect()
}

fn finish(mut points: Vec<Point>, count: u128, z: &Point) -> ProjectionResult {
    let truncated = count > MAX_ENUMERATED as u128;
    if truncated {
        points.truncate(1);
    }
    let distance_sq = sq_dist(
        psi(z, &points[0]).expect("minimizer must be in the domain of psi").as_slice(),
        z.as_slice(),
    );
    ProjectionResult {
        minimizers: points,
        count,
        distance_sq,
        truncated,
    }
}

/// Like-projection with the default options.
pub fn like_project(z: &Point, s: usize, t: usize) -> ProjectionResult {
    like_project_with(z, s, t, &ProjectOptions::default())
}

/// All minimizers of `‖ψ_z(u) − z‖²` over feasible `u`.
///
/// For `x ≠ 0` keep the `s` largest magnitudes of `x` and the `t` largest of
/// `y`, divide kept x entries by the first kept one and multiply kept y
/// entries by it. For `x = 0` any unit vector `e_i` works for the x block and
/// `y` keeps its `t` largest entries unscaled. Ties at the cut-off magnitude
/// produce one minimizer per choice, enumerated in index order.
pub fn like_project_with(z: &Point, s: usize, t: usize, opts: &ProjectOptions) -> ProjectionResult {
    let (m, n) = (z.m(), z.n());
    let x = zeroed(z.x(), opts.zero_tol);
    let y = zeroed(z.y(), opts.zero_tol);
    let ychoice = KeepChoice::new(&y, t, opts);
    let ysets = ychoice.sets(MAX_ENUMERATED + 1);

    if x.iter().all(|&v| v == 0.0) {
        let count = (m as u128).saturating_mul(ychoice.count());
        let mut points = Vec::new();
        'outer: for i0 in 0..m {
            for ys in &ysets {
                if points.len() > MAX_ENUMERATED {
                    break 'outer;
                }
                let mut u = Point::zeros(m, n);
                u.x_mut()[i0] = 1.0;
                for &j in ys {
                    u.y_mut()[j] = y[j];
                }
                points.push(u);
            }
        }
        return finish(points, count, z);
    }

    let xchoice = KeepChoice::new(&x, s, opts);
    let count = xchoice.count().saturating_mul(ychoice.count());
    let mut points = Vec::new();
    'outer: for xs in xchoice.sets(MAX_ENUMERATED + 1) {
        let alpha = x[xs[0]];
        for ys in &ysets {
            if points.len() > MAX_ENUMERATED {
                break 'outer;
            }
            let mut u = Point::zeros(m, n);
            for &i in &xs {
                u.x_mut()[i] = x[i] / alpha;
            }
            for &j in ys {
                u.y_mut()[j] = alpha * y[j];
            }
            points.push(u);
        }
    }
    finish(points, count, z)
}

/// Euclidean projection onto the feasible set.
///
/// For each candidate leading index `γ` the cost is `(x_γ − 1)²` plus the
/// mass before `γ` plus the mass discarded after keeping the `s − 1` largest
/// entries beyond `γ`. Every optimal `γ` and every tie at a cut-off is
/// reported, ordered by `γ` first.
pub fn classic_project(z: &Point, s: usize, t: usize) -> ProjectionResult {
    classic_project_with(z, s, t, &ProjectOptions::default())
}

pub fn classic_project_with(
    z: &Point,
    s: usize,
    t: usize,
    opts: &ProjectOptions,
) -> ProjectionResult {
    let (m, n) = (z.m(), z.n());
    let x = zeroed(z.x(), opts.zero_tol);
    let y = zeroed(z.y(), opts.zero_tol);
    let ychoice = KeepChoice::new(&y, t, opts);
    let ysets = ychoice.sets(MAX_ENUMERATED + 1);

    let costs: Vec<f64> = (0..m)
        .map(|g| {
            let head: f64 = x[..g].iter().map(|v| v * v).sum();
            (x[g] - 1.0).powi(2) + head + tail_sq(&x[g + 1..], s - 1)
        })
        .collect();
    let best = costs.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = 1e-12 * (1.0 + best);

    let mut count: u128 = 0;
    let mut points = Vec::new();
    for g in (0..m).filter(|&g| costs[g] <= best + slack) {
        let rest = &x[g + 1..];
        let xchoice = KeepChoice::new(rest, s - 1, opts);
        count = count.saturating_add(xchoice.count().saturating_mul(ychoice.count()));
        for xs in xchoice.sets(MAX_ENUMERATED + 1) {
            for ys in &ysets {
                if points.len() > MAX_ENUMERATED {
                    break;
                }
                let mut u = Point::zeros(m, n);
                u.x_mut()[g] = 1.0;
                for &i in &xs {
                    u.x_mut()[g + 1 + i] = rest[i];
                }
                for &j in ys {
                    u.y_mut()[j] = y[j];
                }
                points.push(u);
            }
        }
    }
    let truncated = count > MAX_ENUMERATED as u128;
    if truncated {
        points.truncate(1);
    }
    let distance_sq = sq_dist(points[0].as_slice(), z.as_slice());
    ProjectionResult {
        minimizers: points,
        count,
        distance_sq,
        truncated,
    }
}

/// Exhaustive like-projection over every support pair, for small dimensions.
///
/// For a fixed support the optimal free values are available in closed form,
/// so the search is exact. Minimizers within `1e-12 (1 + d*)` of the optimum
/// are returned, deduplicated, in no particular order.
pub fn like_project_oracle(z: &Point, s: usize, t: usize) -> Result<ProjectionResult> {
    let (m, n) = (z.m(), z.n());
    if m + n > 20 {
        return Err(SblsError::InvalidArgument(format!(
            "exhaustive projection limited to m + n <= 20, got {}",
            m + n
        )));
    }
    check_len("z", m + n, z.len())?;
    let (x, y) = (z.x(), z.y());
    let x_zero = x.iter().all(|&v| v == 0.0);

    let mut cands: Vec<(f64, Point)> = Vec::new();
    for mask1 in 1u32..(1 << m) {
        if mask1.count_ones() as usize > s {
            continue;
        }
        let s1: Vec<usize> = (0..m).filter(|&i| mask1 >> i & 1 == 1).collect();
        let p = s1[0];
        let mut ux = vec![0.0; m];
        ux[p] = 1.0;
        let (scale, x_cost) = if x_zero {
            (1.0, 1.0)
        } else {
            let Some(&g) = s1.iter().find(|&&i| x[i] != 0.0) else {
                continue;
            };
            let a = x[g];
            for &i in &s1[1..] {
                ux[i] = x[i] / a;
            }
            let lead_cost = if p == g { 0.0 } else { a * a };
            let off: f64 = (0..m)
                .filter(|i| mask1 >> i & 1 == 0)
                .map(|i| x[i] * x[i])
                .sum();
            (a, lead_cost + off)
        };
        for mask2 in 0u32..(1 << n) {
            if mask2.count_ones() as usize > t {
                continue;
            }
            let mut uy = vec![0.0; n];
            let mut cost = x_cost;
            for j in 0..n {
                if mask2 >> j & 1 == 1 {
                    uy[j] = scale * y[j];
                } else {
                    cost += y[j] * y[j];
                }
            }
            cands.push((cost, Point::new(&ux, &uy)));
        }
    }
    let best = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let slack = 1e-12 * (1.0 + best);
    let mut minimizers: Vec<Point> = Vec::new();
    for (c, u) in cands {
        if c <= best + slack && !minimizers.iter().any(|v| approx_same(v, &u, 1e-12)) {
            minimizers.push(u);
        }
    }
    Ok(ProjectionResult {
        count: minimizers.len() as u128,
        minimizers,
        distance_sq: best,
        truncated: false,
    })
}

/// Componentwise closeness with a relative slack.
pub fn approx_same(a: &Point, b: &Point, tol: f64) -> bool {
    a.len() == b.len()
        && a
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .all(|(p, q)| (p - q).abs() <= tol * (1.0 + p.abs().max(q.abs())))
}

/// Whether two point sets agree up to `tol`, ignoring order.
pub fn same_point_set(a: &[Point], b: &[Point], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|p| b.iter().any(|q| approx_same(p, q, tol)))
        && b.iter().all(|q| a.iter().any(|p| approx_same(p, q, tol)))
}
