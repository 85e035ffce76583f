//! Certified first-order stationarity checks.
//!
//! Every check evaluates the gradient once, applies an absolute tolerance and
//! reports the offending indices or moves. Indices are 0-based positions in
//! the concatenated vector `z`.

use crate::error::{Result, SblsError};
use crate::feasible::{check_feasible, normal_violations, BudgetCase, ConeSense, SupportProfile};
use crate::likeproj::{kth_largest_magnitude, like_project_with, psi, ProjectOptions};
use crate::reformulation::{lift, normal_e_violations};
use crate::tensor::{norm2, norm_inf, Instance, Point};

/// Absolute tolerances used by the checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub grad_tol: f64,
    pub obj_tol: f64,
    pub zero_tol: f64,
}

impl Tolerance {
    /// Defaults scaled to the point: `1e-8 (1 + ‖∇f‖∞)`, `1e-10 (1 + f)` and `1e-10`.
    pub fn at(inst: &Instance, z: &Point) -> Result<Self> {
        let (f, g) = inst.objective_and_gradient(z)?;
        Ok(Tolerance {
            grad_tol: 1e-8 * (1.0 + norm_inf(&g)),
            obj_tol: 1e-10 * (1.0 + f),
            zero_tol: crate::feasible::DEFAULT_ZERO_TOL,
        })
    }
}

struct Eval {
    f: f64,
    grad: Vec<f64>,
    profile: SupportProfile,
}

fn evaluate(inst: &Instance, z: &Point, tol: &Tolerance) -> Result<Eval> {
    let (f, grad) = inst.objective_and_gradient(z)?;
    let profile = check_feasible(z, inst.s, inst.t, tol.zero_tol)?;
    Ok(Eval { f, grad, profile })
}

/// Outcome of a normal-cone test `−∇f(z) ∈ N(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalCheck {
    pub holds: bool,
    pub case: BudgetCase,
    /// Indices where the gradient should vanish but does not.
    pub violations: Vec<usize>,
}

fn normal_check(inst: &Instance, z: &Point, sense: ConeSense, tol: &Tolerance) -> Result<NormalCheck> {
    let e = evaluate(inst, z, tol)?;
    let violations = normal_violations(&e.profile, &e.grad, sense, inst.s, inst.t, tol.grad_tol);
    Ok(NormalCheck {
        holds: violations.is_empty(),
        case: e.profile.case(inst.s, inst.t),
        violations,
    })
}

/// Bouligand normal stationarity.
pub fn check_nb(inst: &Instance, z: &Point, tol: &Tolerance) -> Result<NormalCheck> {
    normal_check(inst, z, ConeSense::Bouligand, tol)
}

/// Clarke normal stationarity.
pub fn check_nc(inst: &Instance, z: &Point, tol: &Tolerance) -> Result<NormalCheck> {
    normal_check(inst, z, ConeSense::Clarke, tol)
}

/// Projection of `−∇f` onto a tangent cone.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentCheck {
    pub holds: bool,
    /// `‖d*‖`, the norm of the projected negative gradient.
    pub norm: f64,
    /// Coordinates spanned by the subspace that attains the projection.
    pub covered: Vec<usize>,
    /// Largest `|∇f_i|` over `covered`.
    pub max_abs: f64,
}

/// Indices of the subspace of the tangent cone that best aligns with `∇f`.
///
/// For the Clarke cone this is `Γ \ {γ}`. For the Bouligand cone it adds the
/// largest remaining gradient entries past `γ` while budget room remains.
pub fn tangent_cover(p: &SupportProfile, grad: &[f64], sense: ConeSense, s: usize, t: usize) -> Vec<usize> {
    let mut covered = p.support_without_leading();
    if sense == ConeSense::Bouligand {
        let g = p.gamma_x.expect("feasible point");
        let mut pick = |range: std::ops::Range<usize>, room: usize| {
            let mut free: Vec<usize> = range.filter(|&i| !p.in_support(i)).collect();
            free.sort_by(|&a, &b| grad[b].abs().total_cmp(&grad[a].abs()).then(a.cmp(&b)));
            covered.extend(free.into_iter().take(room));
        };
        pick(g + 1..p.m, s - p.card1());
        pick(p.m..p.m + p.n, t - p.card2());
    }
    covered.sort_unstable();
    covered
}

pub fn tangent_check(inst: &Instance, z: &Point, sense: ConeSense, tol: &Tolerance) -> Result<TangentCheck> {
    let e = evaluate(inst, z, tol)?;
    let covered = tangent_cover(&e.profile, &e.grad, sense, inst.s, inst.t);
    let vals: Vec<f64> = covered.iter().map(|&i| e.grad[i]).collect();
    let max_abs = norm_inf(&vals);
    Ok(TangentCheck {
        holds: max_abs <= tol.grad_tol,
        norm: norm2(&vals),
        covered,
        max_abs,
    })
}

/// `‖d*‖` for the given cone sense.
pub fn restricted_gradient_norm(inst: &Instance, z: &Point, sense: ConeSense, tol: &Tolerance) -> Result<f64> {
    Ok(tangent_check(inst, z, sense, tol)?.norm)
}

pub fn check_tb(inst: &Instance, z: &Point, tol: &Tolerance) -> Result<TangentCheck> {
    tangent_check(inst, z, ConeSense::Bouligand, tol)
}

pub fn check_tc(inst: &Instance, z: &Point, tol: &Tolerance) -> Result<TangentCheck> {
    tangent_check(inst, z, ConeSense::Clarke, tol)
}

/// A one-dimensional improvement move `z − z_i e_i + u e_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CwMove {
    /// Index zeroed before the line search. `None` for a plain coordinate move.
    pub remove: Option<usize>,
    /// Index along which the line search runs.
    pub adjust: usize,
    /// Optimal step `u*`.
    pub step: f64,
    /// Objective after the move.
    pub value: f64,
    /// The moved point.
    pub point: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CwCheck {
    pub holds: bool,
    /// Every violating move, best (lowest objective) first.
    pub violations: Vec<CwMove>,
}

impl CwCheck {
    pub fn witness(&self) -> Option<&CwMove> {
        self.violations.first()
    }
}

/// Exact minimisation of `f(base + u e_j)` over `u`.
fn line_min(inst: &Instance, base: &Point, j: usize) -> Result<(f64, f64)> {
    let r = inst.residual(base)?;
    let m = base.m();
    let col = if j < m {
        inst.tensor.mode3(base.y())?.column(j)
    } else {
        inst.tensor.mode2(base.x())?.column(j - m)
    };
    let cc: f64 = col.iter().map(|c| c * c).sum();
    let rr: f64 = r.iter().map(|v| v * v).sum();
    if cc == 0.0 {
        return Ok((0.0, 0.5 * rr));
    }
    let cr: f64 = col.iter().zip(&r).map(|(c, v)| c * v).sum();
    let u = -cr / cc;
    Ok((u, (0.5 * (rr - cr * cr / cc)).max(0.0)))
}

/// Coordinate-wise minimum test over swaps and single-coordinate moves.
///
/// Which moves are tested depends on whether each budget is exhausted. A
/// coordinate move is a violation when the partial derivative exceeds
/// `grad_tol` or the line minimum drops below `f(z) − obj_tol`. A true swap
/// is a violation when its line minimum drops below `f(z) − obj_tol`.
pub fn check_cw(inst: &Instance, z: &Point, tol: &Tolerance) -> Result<CwCheck> {
    let e = evaluate(inst, z, tol)?;
    let p = &e.profile;
    let g = p.gamma_x.unwrap();
    let (m, dim) = (p.m, p.m + p.n);
    let threshold = e.f - tol.obj_tol;

    let mut coords: Vec<usize> = Vec::new();
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let block_pairs = |range: std::ops::Range<usize>, pairs: &mut Vec<(usize, usize)>| {
        for i in p.support_without_leading().into_iter().filter(|i| range.contains(i)) {
            for j in range.clone().filter(|&j| j > g) {
                pairs.push((i, j));
            }
        }
    };
    match p.case(inst.s, inst.t) {
        BudgetCase::BothFull => {
            block_pairs(0..m, &mut pairs);
            block_pairs(m..dim, &mut pairs);
        }
        BudgetCase::NeitherFull => coords.extend(g + 1..dim),
        BudgetCase::XFull => {
            coords.extend(m..dim);
            block_pairs(0..m, &mut pairs);
        }
        BudgetCase::YFull => {
            coords.extend(g + 1..m);
            block_pairs(m..dim, &mut pairs);
        }
    }

    let mut violations = Vec::new();
    let coordinate_move = |j: usize, violations: &mut Vec<CwMove>| -> Result<()> {
        let (u, value) = line_min(inst, z, j)?;
        if e.grad[j].abs() > tol.grad_tol || value < threshold {
            let mut point = z.clone();
            point.as_mut_slice()[j] += u;
            violations.push(CwMove { remove: None, adjust: j, step: u, value, point });
        }
        Ok(())
    };
    for &j in &coords {
        coordinate_move(j, &mut violations)?;
    }
    for &(i, j) in &pairs {
        if i == j {
            coordinate_move(j, &mut violations)?;
            continue;
        }
        let mut base = z.clone();
        base.as_mut_slice()[i] = 0.0;
        let (u, value) = line_min(inst, &base, j)?;
        if value < threshold {
            let mut point = base;
            point.as_mut_slice()[j] += u;
            if check_feasible(&point, inst.s, inst.t, tol.zero_tol).is_err() {
                return Err(SblsError::Internal(format!(
                    "swap ({i}, {j}) left the feasible set"
                )));
            }
            violations.push(CwMove { remove: Some(i), adjust: j, step: u, value, point });
        }
    }
    violations.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then(a.remove.cmp(&b.remove))
            .then(a.adjust.cmp(&b.adjust))
    });
    Ok(CwCheck {
        holds: violations.is_empty(),
        violations,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlikeCheck {
    pub holds: bool,
    pub l: f64,
    /// Whether the fixed-point route was resolvable in floating point and agreed.
    pub cross_checked: bool,
    /// Indices breaking the inequality characterisation.
    pub violations: Vec<usize>,
}

/// Whether `z` is a fixed point of the like-projected gradient step with step `1/L`.
///
/// Two independent routes are evaluated. The inequality route requires
/// `∇f = 0` on the support and `|∇f_i| ≤ L M_s(|x|)` (resp. `L M_t(|y|)`) off
/// it, each up to `grad_tol`. The fixed-point route forms `z − ∇f/L` and
/// checks membership in its like-projection. Disagreement is reported as an
/// internal error.
pub fn check_llike(inst: &Instance, z: &Point, l: f64, tol: &Tolerance) -> Result<LlikeCheck> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(SblsError::InvalidArgument(format!("L must be positive, got {l}")));
    }
    let e = evaluate(inst, z, tol)?;
    let violations = llike_violations(&e, z, l, inst.s, inst.t, tol.grad_tol);
    let by_inequality = violations.is_empty();
    // Below this scale `z − ∇f/L` rounds back to `z` and the routes cannot be told apart.
    let cross_checked = tol.grad_tol / l >= 64.0 * f64::EPSILON * (1.0 + norm_inf(z.as_slice()));
    if cross_checked && by_inequality != llike_fixed_point(&e, z, l, inst.s, inst.t, tol)? {
        return Err(SblsError::Internal(format!(
            "L-like routes disagree at L = {l}: inequality route says {by_inequality}"
        )));
    }
    Ok(LlikeCheck {
        holds: by_inequality,
        l,
        cross_checked,
        violations,
    })
}

fn llike_violations(e: &Eval, z: &Point, l: f64, s: usize, t: usize, grad_tol: f64) -> Vec<usize> {
    let p = &e.profile;
    let ms = kth_largest_magnitude(z.x(), s);
    let mt = kth_largest_magnitude(z.y(), t);
    (0..p.m + p.n)
        .filter(|&i| {
            let gi = e.grad[i].abs();
            if p.in_support(i) {
                gi > grad_tol
            } else {
                let cap = if i < p.m { ms } else { mt };
                gi > l * cap + grad_tol
            }
        })
        .collect()
}

fn llike_fixed_point(e: &Eval, z: &Point, l: f64, s: usize, t: usize, tol: &Tolerance) -> Result<bool> {
    let p = &e.profile;
    let g = p.gamma_x.unwrap();
    let zc: Vec<f64> = (0..z.len())
        .map(|i| if p.in_support(i) { z.as_slice()[i] } else { 0.0 })
        .collect();
    let snapped: Vec<f64> = e
        .grad
        .iter()
        .map(|&v| if v.abs() <= tol.grad_tol { 0.0 } else { v })
        .collect();
    if snapped[g] != 0.0 {
        return Ok(false);
    }
    let w: Vec<f64> = zc.iter().zip(&snapped).map(|(a, b)| a - b / l).collect();
    let w = Point::from_concat(w, z.m())?;
    let zc = Point::from_concat(zc, z.m())?;
    let tie_tol = tol.grad_tol / l;
    let proj = like_project_with(&w, s, t, &ProjectOptions { zero_tol: 0.0, tie_tol });
    if !proj.truncated {
        let close = |u: &Point| {
            u.as_slice()
                .iter()
                .zip(zc.as_slice())
                .all(|(a, b)| (a - b).abs() <= 0.5 * tie_tol + 1e-15 * b.abs())
        };
        return Ok(proj.minimizers.iter().any(close));
    }
    // Too many minimizers to list: compare the distance attained by z itself.
    let Some(image) = psi(&w, &zc) else {
        return Ok(false);
    };
    let d: f64 = image
        .as_slice()
        .iter()
        .zip(w.as_slice())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    let scale = 1.0 + norm_inf(w.as_slice());
    Ok(d <= proj.distance_sq + 1e-12 * (1.0 + proj.distance_sq) + 2.0 * (s + t) as f64 * scale * tie_tol)
}

/// Smallest `L` for which the L-like condition holds, if any.
pub fn minimal_l(inst: &Instance, z: &Point, tol: &Tolerance) -> Result<Option<f64>> {
    let e = evaluate(inst, z, tol)?;
    let p = &e.profile;
    let ms = kth_largest_magnitude(z.x(), inst.s);
    let mt = kth_largest_magnitude(z.y(), inst.t);
    let mut best: f64 = 0.0;
    for i in 0..p.m + p.n {
        let gi = e.grad[i].abs();
        if gi <= tol.grad_tol {
            continue;
        }
        if p.in_support(i) {
            return Ok(None);
        }
        let cap = if i < p.m { ms } else { mt };
        if cap == 0.0 {
            return Ok(None);
        }
        best = best.max(gi / cap);
    }
    Ok(Some(best))
}

/// Multipliers certifying M-stationarity.
#[derive(Debug, Clone, PartialEq)]
pub struct MWitness {
    pub w: Vec<f64>,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MCheck {
    pub holds: bool,
    pub witness: MWitness,
    /// Indices `i > γ` where `−∇f − μ` fails to vanish.
    pub violations: Vec<usize>,
}

/// M-stationarity through the lifted indicator `w` and multiplier `μ`.
///
/// `μ` may be nonzero only where `w_i > 0`, that is off the support. It is
/// chosen as `−∇f_i` there (and zero at or before `γ`), and the check asks
/// that `−∇f − μ` lies in the normal cone of `E`.
pub fn check_m(inst: &Instance, z: &Point, tol: &Tolerance) -> Result<MCheck> {
    let e = evaluate(inst, z, tol)?;
    let p = &e.profile;
    let g = p.gamma_x.unwrap();
    let w = lift(z, tol.zero_tol).w;
    let mu: Vec<f64> = (0..z.len())
        .map(|i| if i <= g || p.in_support(i) { 0.0 } else { -e.grad[i] })
        .collect();
    let residual: Vec<f64> = e.grad.iter().zip(&mu).map(|(a, b)| -a - b).collect();
    let violations = normal_e_violations(z, &residual, tol.grad_tol, tol.zero_tol)?;
    Ok(MCheck {
        holds: violations.is_empty(),
        witness: MWitness { w, mu },
        violations,
    })
}

/// All stationarity flags at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityReport {
    pub objective: f64,
    pub gradient: Vec<f64>,
    pub tolerance: Tolerance,
    pub nb: NormalCheck,
    pub tb: TangentCheck,
    pub nc: NormalCheck,
    pub tc: TangentCheck,
    pub cw: CwCheck,
    pub llike: LlikeCheck,
    pub m: MCheck,
    pub minimal_l: Option<f64>,
}

impl StationarityReport {
    /// `(NB, TB, NC, TC, CW, Llike, M)`.
    pub fn flags(&self) -> [bool; 7] {
        [
            self.nb.holds,
            self.tb.holds,
            self.nc.holds,
            self.tc.holds,
            self.cw.holds,
            self.llike.holds,
            self.m.holds,
        ]
    }
}

/// Runs every check and verifies the implications between them.
pub fn classify(inst: &Instance, z: &Point, l: f64, tol: &Tolerance) -> Result<StationarityReport> {
    let (objective, gradient) = inst.objective_and_gradient(z)?;
    let report = StationarityReport {
        objective,
        gradient,
        tolerance: *tol,
        nb: check_nb(inst, z, tol)?,
        tb: check_tb(inst, z, tol)?,
        nc: check_nc(inst, z, tol)?,
        tc: check_tc(inst, z, tol)?,
        cw: check_cw(inst, z, tol)?,
        llike: check_llike(inst, z, l, tol)?,
        m: check_m(inst, z, tol)?,
        minimal_l: minimal_l(inst, z, tol)?,
    };
    let [nb, tb, nc, tc, cw, ll, m] = report.flags();
    let mut broken = Vec::new();
    let mut need = |ok: bool, what: &str| {
        if !ok {
            broken.push(what.to_string());
        }
    };
    need(nb == tb, "NB = TB");
    need(nc == tc, "NC = TC");
    need(nc == m, "NC = M");
    need(!ll || nb, "Llike => NB");
    need(!cw || nb, "CW => NB");
    need(!nb || nc, "NB => NC");
    if report.nb.case == BudgetCase::BothFull {
        need(nb == nc, "NB = NC at full budgets");
    }
    if let Some(lmin) = report.minimal_l {
        need(l < lmin || ll, "Llike at L >= minimal L");
    }
    if !broken.is_empty() {
        return Err(SblsError::Internal(format!(
            "implication lattice violated: {}",
            broken.join(", ")
        )));
    }
    Ok(report)
}
