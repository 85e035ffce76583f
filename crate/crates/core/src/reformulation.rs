//! Complementarity reformulation with auxiliary indicator variables.
//!
//! A pair `(z, w)` with `w = (u, v) ∈ R^m × R^n` encodes sparsity through
//! `zᵀw = 0`, `Σ u ≥ m − s` and `Σ v ≥ n − t`. In the mixed-integer form each
//! `w_i` is binary, in the relaxed form it lies in `[0, 1]`. The point `z`
//! must also lie in `E`, the set with `x ≠ 0` and leading x entry one.

use crate::error::{check_len, Result};
use crate::feasible::{SupportProfile, DEFAULT_ZERO_TOL};
use crate::tensor::{norm_inf, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct AuxPair {
    pub z: Point,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxationMode {
    MixedInteger,
    Relaxed,
}

/// Conditions a pair can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairCondition {
    NotInE,
    Complementarity,
    XBudget,
    YBudget,
    Domain,
    Shape,
}

/// Leading x index when `z ∈ E`.
pub fn e_leading_index(z: &Point, zero_tol: f64) -> Option<usize> {
    let p = SupportProfile::new(z, zero_tol);
    let g = p.gamma_x?;
    ((z.as_slice()[g] - 1.0).abs() <= zero_tol).then_some(g)
}

/// `w_i = 0` on the support of `z` and `1` elsewhere.
pub fn lift(z: &Point, zero_tol: f64) -> AuxPair {
    let w = z
        .as_slice()
        .iter()
        .map(|v| if v.abs() > zero_tol { 0.0 } else { 1.0 })
        .collect();
    AuxPair { z: z.clone(), w }
}

pub fn pair_failures(
    pair: &AuxPair,
    s: usize,
    t: usize,
    mode: RelaxationMode,
    zero_tol: f64,
) -> Vec<PairCondition> {
    let z = &pair.z;
    let (m, n) = (z.m(), z.n());
    if pair.w.len() != m + n {
        return vec![PairCondition::Shape];
    }
    let mut out = Vec::new();
    if e_leading_index(z, zero_tol).is_none() {
        out.push(PairCondition::NotInE);
    }
    let comp: f64 = z.as_slice().iter().zip(&pair.w).map(|(a, b)| (a * b).abs()).sum();
    if comp > zero_tol * (1.0 + norm_inf(z.as_slice())) {
        out.push(PairCondition::Complementarity);
    }
    let (u, v) = pair.w.split_at(m);
    if u.iter().sum::<f64>() < (m - s) as f64 - zero_tol {
        out.push(PairCondition::XBudget);
    }
    if v.iter().sum::<f64>() < (n - t) as f64 - zero_tol {
        out.push(PairCondition::YBudget);
    }
    let in_domain = |w: f64| match mode {
        RelaxationMode::MixedInteger => w.abs() <= zero_tol || (w - 1.0).abs() <= zero_tol,
        RelaxationMode::Relaxed => (-zero_tol..=1.0 + zero_tol).contains(&w),
    };
    if !pair.w.iter().all(|&w| in_domain(w)) {
        out.push(PairCondition::Domain);
    }
    out
}

pub fn check_pair(pair: &AuxPair, s: usize, t: usize, mode: RelaxationMode) -> bool {
    pair_failures(pair, s, t, mode, DEFAULT_ZERO_TOL).is_empty()
}

/// Indices where a vector in the normal cone of `E` at `z` must vanish.
pub fn normal_e_zero_set(z: &Point, zero_tol: f64) -> Option<Vec<usize>> {
    let g = e_leading_index(z, zero_tol)?;
    Some((g + 1..z.len()).collect())
}

/// Indices `i > γ` with `|d_i| > tol`.
pub fn normal_e_violations(z: &Point, d: &[f64], tol: f64, zero_tol: f64) -> Result<Vec<usize>> {
    check_len("direction", z.len(), d.len())?;
    let set = normal_e_zero_set(z, zero_tol).ok_or_else(|| {
        crate::error::SblsError::InvalidArgument("point is not in E".into())
    })?;
    Ok(set.into_iter().filter(|&i| d[i].abs() > tol).collect())
}

/// Whether `d` lies in the normal cone of `E` at `z`, tested exactly.
pub fn normal_e_membership(z: &Point, d: &[f64]) -> Result<bool> {
    Ok(normal_e_violations(z, d, 0.0, DEFAULT_ZERO_TOL)?.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasible::is_feasible;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lift_of_worked_point() {
        let z = Point::new(&[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0]);
        let pair = lift(&z, DEFAULT_ZERO_TOL);
        assert_eq!(pair.w, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        assert!(check_pair(&pair, 2, 2, RelaxationMode::MixedInteger));
        assert!(check_pair(&pair, 2, 2, RelaxationMode::Relaxed));
        assert!(!check_pair(&pair, 1, 2, RelaxationMode::Relaxed));
    }

    #[test]
    fn fractional_weights_only_pass_relaxed() {
        let z = Point::new(&[1.0, 0.0, 0.0], &[2.0, 0.0, 0.0]);
        let pair = AuxPair {
            z,
            w: vec![0.0, 0.5, 0.7, 0.0, 1.0, 0.9],
        };
        assert!(check_pair(&pair, 2, 2, RelaxationMode::Relaxed));
        assert!(!check_pair(&pair, 2, 2, RelaxationMode::MixedInteger));
    }

    #[test]
    fn normal_cone_of_e() {
        let z = Point::new(&[0.0, 1.0, 0.0], &[1.0, 1.0, 0.0]);
        assert!(normal_e_membership(&z, &[3.0, -1.0, 0.0, 0.0, 0.0, 0.0]).unwrap());
        assert!(!normal_e_membership(&z, &[0.0, 0.0, 1e-3, 0.0, 0.0, 0.0]).unwrap());
        let bad = Point::new(&[0.0, 2.0, 0.0], &[1.0, 1.0, 0.0]);
        assert!(normal_e_membership(&bad, &[0.0; 6]).is_err());
    }

    #[test]
    fn pair_feasibility_implies_point_feasibility() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (m, n, s, t) = (5, 4, 2, 2);
        let mut accepted = 0;
        for _ in 0..3000 {
            let mut z = Point::zeros(m, n);
            for i in 0..m + n {
                if rng.gen_bool(0.4) {
                    z.as_mut_slice()[i] = rng.gen_range(-2.0..2.0);
                }
            }
            if let Some(g) = (0..m).find(|&i| z.x()[i] != 0.0) {
                if rng.gen_bool(0.8) {
                    z.x_mut()[g] = 1.0;
                }
            }
            let mut w = lift(&z, DEFAULT_ZERO_TOL).w;
            for wi in w.iter_mut() {
                if *wi > 0.0 && rng.gen_bool(0.3) {
                    *wi = rng.gen_range(0.0..1.0);
                }
            }
            let pair = AuxPair { z: z.clone(), w };
            for mode in [RelaxationMode::MixedInteger, RelaxationMode::Relaxed] {
                if check_pair(&pair, s, t, mode) {
                    accepted += 1;
                    assert!(is_feasible(&z, s, t, DEFAULT_ZERO_TOL));
                }
            }
            if is_feasible(&z, s, t, DEFAULT_ZERO_TOL) {
                let l = lift(&z, DEFAULT_ZERO_TOL);
                assert!(check_pair(&l, s, t, RelaxationMode::MixedInteger));
                assert!(check_pair(&l, s, t, RelaxationMode::Relaxed));
            }
        }
        assert!(accepted > 50);
    }
}
