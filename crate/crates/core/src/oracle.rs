//! Brute-force search over support pairs for small instances.
//!
//! For a fixed pair of supports `(S₁, S₂)` the problem is bilinear in the free
//! values. It is solved by alternating exact least squares followed by
//! Gauss-Newton refinement from several starts. This is a heuristic, so only
//! a zero objective is reported as a certified global minimum.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Result, SblsError};
use crate::likeproj::{binomial, Combinations};
use crate::parallel::with_pool;
use crate::tensor::{Instance, Point};

/// Default cap on the number of support pairs visited.
pub const DEFAULT_PAIR_BUDGET: u128 = 1_000_000;

/// Supports of x and y, as 0-based indices within each block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportPair {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfig {
    /// Random restarts per support pair, on top of one deterministic start.
    pub n_starts: usize,
    pub seed: u64,
    /// Also scan a 41-point grid on [−3, 3] per free x entry (at most three).
    pub grid: bool,
    pub max_pairs: u128,
    pub max_sweeps: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            n_starts: 8,
            seed: 0,
            grid: false,
            max_pairs: DEFAULT_PAIR_BUDGET,
            max_sweeps: 300,
        }
    }
}

/// Number of support pairs with `1 ≤ |S₁| ≤ s` and `|S₂| ≤ t`.
pub fn count_supports(m: usize, n: usize, s: usize, t: usize) -> u128 {
    let a: u128 = (1..=s.min(m)).map(|k| binomial(m, k)).sum();
    let b: u128 = (0..=t.min(n)).map(|k| binomial(n, k)).sum();
    a.saturating_mul(b)
}

/// Subsets of `0..n` with sizes in `lo..=hi`, in lexicographic order of their sorted sequences.
fn lex_subsets(n: usize, lo: usize, hi: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (lo..=hi.min(n))
        .flat_map(|k| Combinations::new(n, k))
        .collect();
    out.sort();
    out
}

/// Every support pair, `S₁` outermost, each block in lexicographic order with `S₂ = ∅` first.
pub fn enumerate_supports(m: usize, n: usize, s: usize, t: usize, budget: u128) -> Result<Vec<SupportPair>> {
    let needed = count_supports(m, n, s, t);
    if needed > budget {
        return Err(SblsError::BudgetExceeded { needed, budget });
    }
    let xs = lex_subsets(m, 1, s);
    let ys = lex_subsets(n, 0, t);
    Ok(xs
        .iter()
        .flat_map(|s1| {
            ys.iter().map(move |s2| SupportPair {
                s1: s1.clone(),
                s2: s2.clone(),
            })
        })
        .collect())
}

/// Minimum-norm least-squares solution of `M v ≈ rhs`.
fn lstsq(mat: DMatrix<f64>, rhs: DVector<f64>) -> DVector<f64> {
    if mat.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = mat.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = (smax * 1e-12).max(f64::MIN_POSITIVE);
    svd.solve(&rhs, eps).expect("both factors were computed")
}

struct Restricted<'a> {
    inst: &'a Instance,
    lead: usize,
    free_x: Vec<usize>,
    s2: Vec<usize>,
    b: DVector<f64>,
}

impl<'a> Restricted<'a> {
    fn new(inst: &'a Instance, pair: &SupportPair) -> Self {
        Restricted {
            inst,
            lead: pair.s1[0],
            free_x: pair.s1[1..].to_vec(),
            s2: pair.s2.clone(),
            b: DVector::from_column_slice(&inst.b),
        }
    }

    fn x_from(&self, free: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.inst.m()];
        x[self.lead] = 1.0;
        for (&i, &v) in self.free_x.iter().zip(free) {
            x[i] = v;
        }
        x
    }

    /// Best y on `S₂` for fixed x.
    fn solve_y(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.inst.n()];
        if self.s2.is_empty() {
            return y;
        }
        let a = self.inst.tensor.mode2(x).expect("x has length m");
        let mat = DMatrix::from_fn(a.rows, self.s2.len(), |i, c| a.get(i, self.s2[c]));
        let sol = lstsq(mat, self.b.clone());
        for (c, &j) in self.s2.iter().enumerate() {
            y[j] = sol[c];
        }
        y
    }

    /// Best free x entries for fixed y, with the leading entry held at one.
    fn solve_x(&self, y: &[f64]) -> Vec<f64> {
        let bm = self.inst.tensor.mode3(y).expect("y has length n");
        let mut x = vec![0.0; self.inst.m()];
        x[self.lead] = 1.0;
        if self.free_x.is_empty() {
            return x;
        }
        let rhs = DVector::from_fn(bm.rows, |i, _| self.b[i] - bm.get(i, self.lead));
        let mat = DMatrix::from_fn(bm.rows, self.free_x.len(), |i, c| bm.get(i, self.free_x[c]));
        let sol = lstsq(mat, rhs);
        for (c, &i) in self.free_x.iter().enumerate() {
            x[i] = sol[c];
        }
        x
    }

    fn objective(&self, x: &[f64], y: &[f64]) -> f64 {
        self.inst.objective(&Point::new(x, y)).expect("shapes match")
    }

    /// Alternating least squares from `x0`, finished by Gauss-Newton steps.
    fn polish(&self, x0: Vec<f64>, sweeps: usize) -> (Point, f64) {
        let mut x = x0;
        let mut y = self.solve_y(&x);
        let mut f = self.objective(&x, &y);
        if self.s2.is_empty() {
            return (Point::new(&x, &y), f);
        }
        for _ in 0..sweeps {
            let xn = self.solve_x(&y);
            let yn = self.solve_y(&xn);
            let fnew = self.objective(&xn, &yn);
            if fnew > f {
                break;
            }
            let gain = f - fnew;
            x = xn;
            y = yn;
            f = fnew;
            if gain <= 1e-6 * f || f <= 1e-300 {
                break;
            }
        }
        for _ in 0..60 {
            match self.gauss_newton(&x, &y, f) {
                Some((xn, yn, fnew)) => {
                    let gain = f - fnew;
                    x = xn;
                    y = yn;
                    f = fnew;
                    if gain <= 1e-15 * f || f <= 1e-300 {
                        break;
                    }
                }
                None => break,
            }
        }
        (Point::new(&x, &y), f)
    }

    /// One damped Gauss-Newton step on the free x entries and y on `S₂`.
    fn gauss_newton(&self, x: &[f64], y: &[f64], f: f64) -> Option<(Vec<f64>, Vec<f64>, f64)> {
        let bm = self.inst.tensor.mode3(y).ok()?;
        let am = self.inst.tensor.mode2(x).ok()?;
        let r = self.inst.residual(&Point::new(x, y)).ok()?;
        let kx = self.free_x.len();
        let cols = kx + self.s2.len();
        let jac = DMatrix::from_fn(bm.rows, cols, |i, c| {
            if c < kx {
                bm.get(i, self.free_x[c])
            } else {
                am.get(i, self.s2[c - kx])
            }
        });
        let step = lstsq(jac, -DVector::from_column_slice(&r));
        let mut t = 1.0;
        for _ in 0..30 {
            let mut xn = x.to_vec();
            let mut yn = y.to_vec();
            for (c, &i) in self.free_x.iter().enumerate() {
                xn[i] += t * step[c];
            }
            for (c, &j) in self.s2.iter().enumerate() {
                yn[j] += t * step[kx + c];
            }
            let fnew = self.objective(&xn, &yn);
            if fnew < f {
                return Some((xn, yn, fnew));
            }
            t *= 0.5;
        }
        None
    }
}

/// Best point found with support inside the given pair.
pub fn solve_restricted(inst: &Instance, pair: &SupportPair, cfg: &OracleConfig) -> Result<(Point, f64)> {
    let (_, m, n) = inst.dims();
    let valid = !pair.s1.is_empty()
        && pair.s1.len() <= inst.s
        && pair.s2.len() <= inst.t
        && pair.s1.windows(2).all(|w| w[0] < w[1])
        && pair.s2.windows(2).all(|w| w[0] < w[1])
        && pair.s1.last().map_or(true, |&i| i < m)
        && pair.s2.last().map_or(true, |&j| j < n);
    if !valid {
        return Err(SblsError::InvalidArgument(format!(
            "support pair {:?} / {:?} is not admissible",
            pair.s1, pair.s2
        )));
    }
    let prob = Restricted::new(inst, pair);
    let k = prob.free_x.len();
    let mut best = prob.polish(prob.x_from(&vec![0.0; k]), cfg.max_sweeps);
    let mut consider = |cand: (Point, f64)| {
        if cand.1 < best.1 {
            best = cand;
        }
    };
    if k > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.n_starts {
            let free: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
            consider(prob.polish(prob.x_from(&free), cfg.max_sweeps));
        }
        if cfg.grid && k <= 3 {
            let grid: Vec<f64> = (0..41).map(|i| -3.0 + 0.15 * i as f64).collect();
            let mut grid_best: Option<(Vec<f64>, f64)> = None;
            let total = 41usize.pow(k as u32);
            for code in 0..total {
                let free: Vec<f64> = (0..k).map(|d| grid[code / 41usize.pow(d as u32) % 41]).collect();
                let x = prob.x_from(&free);
                let f = prob.objective(&x, &prob.solve_y(&x));
                if grid_best.as_ref().map_or(true, |g| f < g.1) {
                    grid_best = Some((free, f));
                }
            }
            let (free, _) = grid_best.expect("grid is nonempty");
            consider(prob.polish(prob.x_from(&free), cfg.max_sweeps));
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BruteResult {
    pub point: Point,
    pub f: f64,
    pub pair: SupportPair,
    /// True when the objective is zero up to rounding, so the point is a global minimizer.
    pub certified: bool,
    pub pairs_examined: usize,
}

/// Objective level below which a brute-force result counts as exactly zero.
pub fn certification_threshold(inst: &Instance) -> f64 {
    1e-16 * (1.0 + inst.b.iter().map(|v| v * v).sum::<f64>())
}

/// Restricted solves over every support pair, best objective wins.
///
/// Ties go to the earliest pair in enumeration order, so the result does not
/// depend on the number of threads.
pub fn global_brute(inst: &Instance, cfg: &OracleConfig) -> Result<BruteResult> {
    let (_, m, n) = inst.dims();
    let pairs = enumerate_supports(m, n, inst.s, inst.t, cfg.max_pairs)?;
    let results: Vec<Result<(Point, f64)>> = with_pool(|| {
        pairs
            .par_iter()
            .enumerate()
            .map(|(k, pair)| {
                let c = OracleConfig {
                    seed: cfg.seed.wrapping_add(k as u64),
                    ..cfg.clone()
                };
                solve_restricted(inst, pair, &c)
            })
            .collect()
    })?;
    let mut best: Option<(usize, Point, f64)> = None;
    for (k, res) in results.into_iter().enumerate() {
        let (p, f) = res?;
        if best.as_ref().map_or(true, |b| f < b.2) {
            best = Some((k, p, f));
        }
    }
    let (k, point, f) = best.expect("at least one support pair");
    Ok(BruteResult {
        certified: f <= certification_threshold(inst),
        point,
        f,
        pair: pairs[k].clone(),
        pairs_examined: pairs.len(),
    })
}
