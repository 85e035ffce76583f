//! Like-projected gradient descent, alternating hard thresholding and a
//! seeded multistart driver.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Result, SblsError};
use crate::feasible::check_feasible;
use crate::likeproj::{like_project_with, magnitude_order, ProjectOptions};
use crate::parallel::with_pool;
use crate::stationarity::{classify, StationarityReport, Tolerance};
use crate::tensor::{norm2, Instance, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Liht,
    Alternating,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Liht => "liht",
            Method::Alternating => "alternating",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    /// Initial Lipschitz estimate.
    pub l0: f64,
    pub max_iter: usize,
    /// Stop when one iteration decreases `f` by at most this much.
    pub f_tol: f64,
    /// Stop when an accepted step has norm at most this.
    pub step_tol: f64,
    /// Factor applied to `L` after a rejected step.
    pub backtrack: f64,
    /// Give up once `L` would exceed this.
    pub max_l: f64,
    pub seed: u64,
    pub n_starts: usize,
    pub methods: Vec<Method>,
    /// Record every iterate in `SolveTrace::path`.
    pub keep_path: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            l0: 1.0,
            max_iter: 2000,
            f_tol: 0.0,
            step_tol: 1e-12,
            backtrack: 2.0,
            max_l: 1e12,
            seed: 0,
            n_starts: 10,
            methods: vec![Method::Liht, Method::Alternating],
            keep_path: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    StepTolerance,
    ObjectiveTolerance,
    ZeroResidual,
    MaxIterations,
    /// Backtracking pushed `L` past `max_l`.
    Stalled,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::StepTolerance => "step-tolerance",
            SolveStatus::ObjectiveTolerance => "objective-tolerance",
            SolveStatus::ZeroResidual => "zero-residual",
            SolveStatus::MaxIterations => "max-iterations",
            SolveStatus::Stalled => "stalled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateRecord {
    pub iteration: usize,
    pub f: f64,
    pub l: f64,
    pub step_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub method: Method,
    pub iterates: Vec<IterateRecord>,
    /// Iterates matching `iterates`, empty unless `keep_path` is set.
    pub path: Vec<Point>,
    pub point: Point,
    pub f: f64,
    pub l: f64,
    pub status: SolveStatus,
    pub report: StationarityReport,
}

fn validate(cfg: &SolveConfig) -> Result<()> {
    if !(cfg.l0 > 0.0) || !(cfg.backtrack > 1.0) || !(cfg.max_l >= cfg.l0) {
        return Err(SblsError::InvalidArgument(
            "need l0 > 0, backtrack > 1 and max_l >= l0".into(),
        ));
    }
    Ok(())
}

fn start_point(inst: &Instance, z0: &Point) -> Result<()> {
    check_feasible(z0, inst.s, inst.t, crate::feasible::DEFAULT_ZERO_TOL)?;
    Ok(())
}

fn finish(inst: &Instance, method: Method, (iterates, path): (Vec<IterateRecord>, Vec<Point>), point: Point, l: f64, status: SolveStatus) -> Result<SolveTrace> {
    let f = iterates.last().map(|r| r.f).unwrap_or(f64::NAN);
    let tol = Tolerance::at(inst, &point)?;
    let report = classify(inst, &point, l, &tol)?;
    Ok(SolveTrace {
        method,
        iterates,
        path,
        point,
        f,
        l,
        status,
        report,
    })
}

struct Log {
    keep: bool,
    iterates: Vec<IterateRecord>,
    path: Vec<Point>,
}

impl Log {
    fn new(cfg: &SolveConfig, z0: &Point, first: IterateRecord) -> Self {
        let mut log = Log { keep: cfg.keep_path, iterates: Vec::new(), path: Vec::new() };
        log.push(z0, first);
        log
    }

    fn push(&mut self, z: &Point, rec: IterateRecord) {
        self.iterates.push(rec);
        if self.keep {
            self.path.push(z.clone());
        }
    }

    fn done(self) -> (Vec<IterateRecord>, Vec<Point>) {
        (self.iterates, self.path)
    }
}

fn diff_norm(a: &Point, b: &Point) -> f64 {
    let d: Vec<f64> = a.as_slice().iter().zip(b.as_slice()).map(|(p, q)| p - q).collect();
    norm2(&d)
}

/// One like-projected gradient step: the representative of `P̄(z − ∇f(z)/L)`.
pub fn liht_step(inst: &Instance, z: &Point, l: f64) -> Result<Point> {
    let g = inst.gradient(z)?;
    let w: Vec<f64> = z.as_slice().iter().zip(&g).map(|(a, b)| a - b / l).collect();
    let w = Point::from_concat(w, z.m())?;
    let proj = like_project_with(&w, inst.s, inst.t, &ProjectOptions::default());
    Ok(proj.minimizers.into_iter().next().expect("projection is never empty"))
}

/// Like-projected gradient descent with backtracking on `L`.
///
/// Each iteration first relaxes `L` by one backtracking factor (never below
/// `l0`), then multiplies it by the factor until the step does not increase
/// `f`.
pub fn liht_solve(inst: &Instance, z0: &Point, cfg: &SolveConfig) -> Result<SolveTrace> {
    validate(cfg)?;
    start_point(inst, z0)?;
    let mut z = z0.clone();
    let mut f = inst.objective(&z)?;
    let mut l = cfg.l0;
    let mut log = Log::new(cfg, &z, IterateRecord { iteration: 0, f, l, step_norm: 0.0 });
    if f == 0.0 {
        return finish(inst, Method::Liht, log.done(), z, l, SolveStatus::ZeroResidual);
    }
    for iteration in 1..=cfg.max_iter {
        l = (l / cfg.backtrack).max(cfg.l0);
        let (cand, fc) = loop {
            let cand = liht_step(inst, &z, l)?;
            let fc = inst.objective(&cand)?;
            if fc <= f {
                break (cand, fc);
            }
            if diff_norm(&cand, &z) <= cfg.step_tol {
                return finish(inst, Method::Liht, log.done(), z, l, SolveStatus::StepTolerance);
            }
            l *= cfg.backtrack;
            if l > cfg.max_l {
                return finish(inst, Method::Liht, log.done(), z, l / cfg.backtrack, SolveStatus::Stalled);
            }
        };
        let step_norm = diff_norm(&cand, &z);
        let decrease = f - fc;
        z = cand;
        f = fc;
        log.push(&z, IterateRecord { iteration, f, l, step_norm });
        let status = if f == 0.0 {
            Some(SolveStatus::ZeroResidual)
        } else if step_norm <= cfg.step_tol {
            Some(SolveStatus::StepTolerance)
        } else if decrease <= cfg.f_tol {
            Some(SolveStatus::ObjectiveTolerance)
        } else {
            None
        };
        if let Some(status) = status {
            return finish(inst, Method::Liht, log.done(), z, l, status);
        }
    }
    finish(inst, Method::Liht, log.done(), z, l, SolveStatus::MaxIterations)
}

/// Keeps the `k` largest magnitudes of `v`, always including `forced` if given.
fn hard_threshold(v: &[f64], k: usize, forced: Option<usize>) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    let mut kept = 0;
    if let Some(g) = forced {
        out[g] = v[g];
        kept = 1;
    }
    for i in magnitude_order(v) {
        if kept >= k {
            break;
        }
        if Some(i) != forced {
            out[i] = v[i];
            kept += 1;
        }
    }
    out
}

/// Divides x by its first nonzero entry and multiplies y by it, leaving `xy` unchanged.
fn renormalise(x: &[f64], y: &[f64]) -> Option<Point> {
    let a = *x.iter().find(|v| **v != 0.0)?;
    let x: Vec<f64> = x.iter().map(|v| v / a).collect();
    let y: Vec<f64> = y.iter().map(|v| v * a).collect();
    Some(Point::new(&x, &y))
}

enum BlockOutcome {
    Accepted(Point, f64),
    /// The rejected candidate is already within `step_tol` of the current point.
    Converged,
    /// `L` would exceed `max_l`.
    Stalled,
}

/// Backtracked gradient step on one block.
fn block_step(
    inst: &Instance,
    z: &Point,
    f: f64,
    l: &mut f64,
    cfg: &SolveConfig,
    x_block: bool,
) -> Result<BlockOutcome> {
    let g = inst.gradient(z)?;
    let m = z.m();
    loop {
        let cand = if x_block {
            let w: Vec<f64> = z.x().iter().zip(&g[..m]).map(|(a, b)| a - b / *l).collect();
            let lead = z.x().iter().position(|v| *v != 0.0);
            renormalise(&hard_threshold(&w, inst.s, lead), z.y())
        } else {
            let w: Vec<f64> = z.y().iter().zip(&g[m..]).map(|(a, b)| a - b / *l).collect();
            Some(Point::new(z.x(), &hard_threshold(&w, inst.t, None)))
        };
        if let Some(cand) = cand {
            let fc = inst.objective(&cand)?;
            if fc <= f {
                return Ok(BlockOutcome::Accepted(cand, fc));
            }
            if diff_norm(&cand, z) <= cfg.step_tol {
                return Ok(BlockOutcome::Converged);
            }
        }
        *l *= cfg.backtrack;
        if *l > cfg.max_l {
            *l /= cfg.backtrack;
            return Ok(BlockOutcome::Stalled);
        }
    }
}

/// Alternating hard-thresholded gradient steps on x then y.
///
/// Each block keeps its own `L`, relaxed and backtracked as in `liht_solve`.
/// The x step always keeps the current leading index, then rescales so that
/// it equals one.
pub fn alternating_ht(inst: &Instance, z0: &Point, cfg: &SolveConfig) -> Result<SolveTrace> {
    validate(cfg)?;
    start_point(inst, z0)?;
    let mut z = z0.clone();
    let mut f = inst.objective(&z)?;
    let (mut lx, mut ly) = (cfg.l0, cfg.l0);
    let mut log = Log::new(cfg, &z, IterateRecord { iteration: 0, f, l: cfg.l0, step_norm: 0.0 });
    if f == 0.0 {
        return finish(inst, Method::Alternating, log.done(), z, cfg.l0, SolveStatus::ZeroResidual);
    }
    for iteration in 1..=cfg.max_iter {
        let before = z.clone();
        let f_before = f;
        let mut stalled = 0;
        for x_block in [true, false] {
            let l = if x_block { &mut lx } else { &mut ly };
            *l = (*l / cfg.backtrack).max(cfg.l0);
            match block_step(inst, &z, f, l, cfg, x_block)? {
                BlockOutcome::Accepted(p, fp) => {
                    z = p;
                    f = fp;
                }
                BlockOutcome::Converged => {}
                BlockOutcome::Stalled => stalled += 1,
            }
        }
        let step_norm = diff_norm(&z, &before);
        log.push(&z, IterateRecord { iteration, f, l: lx.max(ly), step_norm });
        let status = if stalled == 2 {
            Some(SolveStatus::Stalled)
        } else if f == 0.0 {
            Some(SolveStatus::ZeroResidual)
        } else if step_norm <= cfg.step_tol {
            Some(SolveStatus::StepTolerance)
        } else if f_before - f <= cfg.f_tol {
            Some(SolveStatus::ObjectiveTolerance)
        } else {
            None
        };
        if let Some(status) = status {
            return finish(inst, Method::Alternating, log.done(), z, lx.max(ly), status);
        }
    }
    finish(inst, Method::Alternating, log.done(), z, lx.max(ly), SolveStatus::MaxIterations)
}

pub use crate::generators::random_feasible_point as random_start;

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub start: usize,
    pub method: Method,
    pub f: f64,
    pub status: SolveStatus,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultistartResult {
    pub best: SolveTrace,
    pub best_start: usize,
    pub runs: Vec<RunSummary>,
}

/// Runs every configured solver from `n_starts` seeded random starts.
///
/// Start `i` draws from a ChaCha stream seeded with `seed + i`, so results do
/// not depend on thread scheduling. The winner is the lowest objective, ties
/// going to the earlier start and then to the earlier method in `methods`.
pub fn multistart(inst: &Instance, cfg: &SolveConfig) -> Result<MultistartResult> {
    validate(cfg)?;
    if cfg.n_starts == 0 || cfg.methods.is_empty() {
        return Err(SblsError::InvalidArgument("need at least one start and one method".into()));
    }
    let (_, m, n) = inst.dims();
    let jobs: Vec<(usize, usize)> = (0..cfg.n_starts)
        .flat_map(|i| (0..cfg.methods.len()).map(move |k| (i, k)))
        .collect();
    let results: Vec<Result<SolveTrace>> = with_pool(|| {
        jobs.par_iter()
            .map(|&(i, k)| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
                let z0 = random_start(m, n, inst.s, inst.t, &mut rng);
                match cfg.methods[k] {
                    Method::Liht => liht_solve(inst, &z0, cfg),
                    Method::Alternating => alternating_ht(inst, &z0, cfg),
                }
            })
            .collect()
    })?;
    let mut runs = Vec::with_capacity(jobs.len());
    let mut best: Option<(usize, SolveTrace)> = None;
    for (&(i, _), res) in jobs.iter().zip(results) {
        let trace = res?;
        runs.push(RunSummary {
            start: i,
            method: trace.method,
            f: trace.f,
            status: trace.status,
            iterations: trace.iterates.len() - 1,
        });
        if best.as_ref().map_or(true, |(_, b)| trace.f < b.f) {
            best = Some((i, trace));
        }
    }
    let (best_start, best) = best.expect("at least one run");
    Ok(MultistartResult { best, best_start, runs })
}
