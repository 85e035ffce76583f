//! The feasible set and its tangent and normal cones.
//!
//! A point `z = (x, y)` is feasible when `‖x‖₀ ≤ s`, `‖y‖₀ ≤ t`, `x ≠ 0` and
//! the first nonzero entry of `x` equals one. That entry's index is written
//! `γ` below. All indices in this module are 0-based positions in the
//! concatenated vector `z`, so y indices start at `m`.

use crate::error::{check_len, Infeasibility, Result};
use crate::tensor::Point;

/// Entries with `|v| <= zero_tol` count as zero.
pub const DEFAULT_ZERO_TOL: f64 = 1e-10;

/// Supports of a point and the position of its leading x entry.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportProfile {
    pub m: usize,
    pub n: usize,
    /// Support of x (indices `< m`).
    pub gamma1: Vec<usize>,
    /// Support of y (indices `>= m`).
    pub gamma2: Vec<usize>,
    /// First nonzero index of x, if any.
    pub gamma_x: Option<usize>,
}

impl SupportProfile {
    pub fn new(z: &Point, zero_tol: f64) -> Self {
        let m = z.m();
        let nz = |v: &f64| v.abs() > zero_tol;
        let gamma1: Vec<usize> = (0..m).filter(|&i| nz(&z.as_slice()[i])).collect();
        let gamma2: Vec<usize> = (m..z.len()).filter(|&i| nz(&z.as_slice()[i])).collect();
        let gamma_x = gamma1.first().copied();
        SupportProfile {
            m,
            n: z.n(),
            gamma1,
            gamma2,
            gamma_x,
        }
    }

    pub fn card1(&self) -> usize {
        self.gamma1.len()
    }

    pub fn card2(&self) -> usize {
        self.gamma2.len()
    }

    pub fn in_support(&self, i: usize) -> bool {
        if i < self.m {
            self.gamma1.binary_search(&i).is_ok()
        } else {
            self.gamma2.binary_search(&i).is_ok()
        }
    }

    /// `Γ \ {γ}` in increasing order.
    pub fn support_without_leading(&self) -> Vec<usize> {
        self.gamma1
            .iter()
            .chain(&self.gamma2)
            .copied()
            .filter(|&i| Some(i) != self.gamma_x)
            .collect()
    }

    /// Which sparsity budgets are exhausted.
    pub fn case(&self, s: usize, t: usize) -> BudgetCase {
        match (self.card1() == s, self.card2() == t) {
            (true, true) => BudgetCase::BothFull,
            (true, false) => BudgetCase::XFull,
            (false, true) => BudgetCase::YFull,
            (false, false) => BudgetCase::NeitherFull,
        }
    }
}

/// The four cardinality regimes that shape the Bouligand cones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetCase {
    BothFull,
    XFull,
    YFull,
    NeitherFull,
}

impl BudgetCase {
    pub fn label(self) -> &'static str {
        match self {
            BudgetCase::BothFull => "both-full",
            BudgetCase::XFull => "x-full",
            BudgetCase::YFull => "y-full",
            BudgetCase::NeitherFull => "neither-full",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeSense {
    Bouligand,
    Clarke,
}

/// Checks feasibility and returns the reason when it fails.
pub fn check_feasible(z: &Point, s: usize, t: usize, zero_tol: f64) -> Result<SupportProfile> {
    let p = SupportProfile::new(z, zero_tol);
    let Some(g) = p.gamma_x else {
        return Err(Infeasibility::ZeroX.into());
    };
    let lead = z.as_slice()[g];
    if (lead - 1.0).abs() > zero_tol {
        return Err(Infeasibility::LeadingNotOne {
            index: g,
            value: lead,
        }
        .into());
    }
    if p.card1() > s {
        return Err(Infeasibility::XTooDense {
            count: p.card1(),
            budget: s,
        }
        .into());
    }
    if p.card2() > t {
        return Err(Infeasibility::YTooDense {
            count: p.card2(),
            budget: t,
        }
        .into());
    }
    Ok(p)
}

pub fn is_feasible(z: &Point, s: usize, t: usize, zero_tol: f64) -> bool {
    check_feasible(z, s, t, zero_tol).is_ok()
}

/// Indices where a normal vector must vanish, given the cone sense.
pub fn normal_zero_set(p: &SupportProfile, sense: ConeSense, s: usize, t: usize) -> Vec<usize> {
    let g = p.gamma_x.expect("normal cone needs x != 0");
    let all_after = |from: usize, to: usize| (from..to).collect::<Vec<_>>();
    let mut set = match sense {
        ConeSense::Clarke => p.support_without_leading(),
        ConeSense::Bouligand => match p.case(s, t) {
            BudgetCase::BothFull => p.support_without_leading(),
            BudgetCase::XFull => {
                let mut v: Vec<usize> = p.gamma1.iter().copied().filter(|&i| i != g).collect();
                v.extend(all_after(p.m, p.m + p.n));
                v
            }
            BudgetCase::YFull => {
                let mut v = all_after(g + 1, p.m);
                v.extend(&p.gamma2);
                v
            }
            BudgetCase::NeitherFull => all_after(g + 1, p.m + p.n),
        },
    };
    set.sort_unstable();
    set
}

/// Indices in the normal-cone zero set where `|d_i| > tol`.
pub fn normal_violations(
    p: &SupportProfile,
    d: &[f64],
    sense: ConeSense,
    s: usize,
    t: usize,
    tol: f64,
) -> Vec<usize> {
    normal_zero_set(p, sense, s, t)
        .into_iter()
        .filter(|&i| d[i].abs() > tol)
        .collect()
}

fn profile_for_cone(z: &Point, d: &[f64], s: usize, t: usize) -> Result<SupportProfile> {
    check_len("direction", z.len(), d.len())?;
    let p = check_feasible(z, s, t, DEFAULT_ZERO_TOL)?;
    Ok(p)
}

/// Whether `d` lies in the tangent cone of the given sense at `z`.
/// The support of `z` uses the default zero tolerance. `d` is tested exactly.
pub fn tangent_membership(
    z: &Point,
    d: &[f64],
    sense: ConeSense,
    s: usize,
    t: usize,
) -> Result<bool> {
    let p = profile_for_cone(z, d, s, t)?;
    let g = p.gamma_x.unwrap();
    let supp_d: Vec<usize> = (0..d.len()).filter(|&i| d[i] != 0.0).collect();
    Ok(match sense {
        ConeSense::Clarke => supp_d.iter().all(|&i| i != g && p.in_support(i)),
        ConeSense::Bouligand => {
            if supp_d.iter().any(|&i| i <= g) {
                return Ok(false);
            }
            let extra_x = supp_d
                .iter()
                .filter(|&&i| i < p.m && !p.in_support(i))
                .count();
            let extra_y = supp_d
                .iter()
                .filter(|&&i| i >= p.m && !p.in_support(i))
                .count();
            p.card1() + extra_x <= s && p.card2() + extra_y <= t
        }
    })
}

/// Whether `d` lies in the normal cone of the given sense at `z`.
pub fn normal_membership(
    z: &Point,
    d: &[f64],
    sense: ConeSense,
    s: usize,
    t: usize,
) -> Result<bool> {
    let p = profile_for_cone(z, d, s, t)?;
    Ok(normal_violations(&p, d, sense, s, t, 0.0).is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::SblsError;
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn zbar() -> Point {
        Point::new(&[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0])
    }

    #[test]
    fn feasibility_reasons() {
        assert!(is_feasible(&zbar(), 2, 2, DEFAULT_ZERO_TOL));
        let z = Point::new(&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]);
        assert!(matches!(
            check_feasible(&z, 2, 2, DEFAULT_ZERO_TOL),
            Err(SblsError::Infeasible(Infeasibility::ZeroX))
        ));
        let z = Point::new(&[0.0, 2.0, 0.0], &[1.0, 0.0, 0.0]);
        assert!(matches!(
            check_feasible(&z, 2, 2, DEFAULT_ZERO_TOL),
            Err(SblsError::Infeasible(Infeasibility::LeadingNotOne { index: 1, .. }))
        ));
        let z = Point::new(&[1.0, 1.0, 1.0], &[1.0, 0.0, 0.0]);
        assert!(!is_feasible(&z, 2, 2, DEFAULT_ZERO_TOL));
        let z = Point::new(&[1.0, 1e-12, 0.0], &[1.0, 0.0, 0.0]);
        assert_eq!(SupportProfile::new(&z, DEFAULT_ZERO_TOL).card1(), 1);
    }

    #[test]
    fn tangent_examples_at_zbar() {
        let z = zbar();
        let e = |i: usize| {
            let mut d = vec![0.0; 6];
            d[i] = 1.0;
            d
        };
        for sense in [ConeSense::Bouligand, ConeSense::Clarke] {
            assert!(tangent_membership(&z, &e(1), sense, 2, 2).unwrap());
            assert!(!tangent_membership(&z, &e(0), sense, 2, 2).unwrap());
            assert!(!tangent_membership(&z, &e(2), sense, 2, 2).unwrap());
        }
    }

    #[test]
    fn bouligand_zero_sets_by_case() {
        // m = 4, n = 4, s = 2, t = 2, x = (0,1,0,0)
        let z = Point::new(&[0.0, 1.0, 0.0, 0.0], &[0.0, 3.0, 0.0, 0.0]);
        let p = SupportProfile::new(&z, DEFAULT_ZERO_TOL);
        assert_eq!(p.case(2, 2), BudgetCase::NeitherFull);
        assert_eq!(
            normal_zero_set(&p, ConeSense::Bouligand, 2, 2),
            vec![2, 3, 4, 5, 6, 7]
        );
        assert_eq!(p.case(1, 2), BudgetCase::XFull);
        assert_eq!(
            normal_zero_set(&p, ConeSense::Bouligand, 1, 2),
            vec![4, 5, 6, 7]
        );
        assert_eq!(p.case(2, 1), BudgetCase::YFull);
        assert_eq!(normal_zero_set(&p, ConeSense::Bouligand, 2, 1), vec![2, 3, 5]);
        assert_eq!(normal_zero_set(&p, ConeSense::Bouligand, 1, 1), vec![5]);
        assert_eq!(normal_zero_set(&p, ConeSense::Clarke, 2, 2), vec![5]);
    }

    /// Random feasible point with random support sizes.
    fn random_point(rng: &mut ChaCha8Rng, m: usize, n: usize, s: usize, t: usize) -> Point {
        let k1 = rng.gen_range(1..=s);
        let k2 = rng.gen_range(0..=t);
        let mut s1: Vec<usize> = sample(rng, m, k1).into_vec();
        s1.sort_unstable();
        let mut z = Point::zeros(m, n);
        for (pos, &i) in s1.iter().enumerate() {
            z.x_mut()[i] = if pos == 0 { 1.0 } else { rng.gen_range(0.5..2.0) };
        }
        for j in sample(rng, n, k2) {
            z.y_mut()[j] = rng.gen_range(-2.0..2.0);
        }
        z
    }

    /// Random tangent vector built from the union-of-subspaces description.
    fn random_tangent(rng: &mut ChaCha8Rng, p: &SupportProfile, s: usize, t: usize) -> Vec<f64> {
        let g = p.gamma_x.unwrap();
        let mut d = vec![0.0; p.m + p.n];
        for i in p.support_without_leading() {
            d[i] = rng.gen_range(-1.0..1.0);
        }
        let free_x: Vec<usize> = (g + 1..p.m).filter(|&i| !p.in_support(i)).collect();
        let free_y: Vec<usize> = (p.m..p.m + p.n).filter(|&i| !p.in_support(i)).collect();
        let room_x = s - p.card1();
        let room_y = t - p.card2();
        for &i in free_x.iter().take(room_x.min(free_x.len())) {
            d[i] = rng.gen_range(-1.0..1.0);
        }
        for &i in free_y.iter().rev().take(room_y.min(free_y.len())) {
            d[i] = rng.gen_range(-1.0..1.0);
        }
        d
    }

    fn random_normal(rng: &mut ChaCha8Rng, p: &SupportProfile, sense: ConeSense, s: usize, t: usize) -> Vec<f64> {
        let mut d: Vec<f64> = (0..p.m + p.n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for i in normal_zero_set(p, sense, s, t) {
            d[i] = 0.0;
        }
        d
    }

    #[test]
    fn polarity_and_inclusion_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let (m, n, s, t) = (6, 5, 3, 2);
        for _ in 0..300 {
            let z = random_point(&mut rng, m, n, s, t);
            let p = check_feasible(&z, s, t, DEFAULT_ZERO_TOL).unwrap();
            let dt = random_tangent(&mut rng, &p, s, t);
            assert!(tangent_membership(&z, &dt, ConeSense::Bouligand, s, t).unwrap());
            let dn = random_normal(&mut rng, &p, ConeSense::Bouligand, s, t);
            assert!(normal_membership(&z, &dn, ConeSense::Bouligand, s, t).unwrap());
            let ip: f64 = dt.iter().zip(&dn).map(|(a, b)| a * b).sum();
            assert_eq!(ip, 0.0);

            // Clarke tangent ⊆ Bouligand tangent, Bouligand normal ⊆ Clarke normal.
            let mut dc = vec![0.0; m + n];
            for i in p.support_without_leading() {
                dc[i] = rng.gen_range(-1.0..1.0);
            }
            assert!(tangent_membership(&z, &dc, ConeSense::Clarke, s, t).unwrap());
            assert!(tangent_membership(&z, &dc, ConeSense::Bouligand, s, t).unwrap());
            assert!(normal_membership(&z, &dn, ConeSense::Clarke, s, t).unwrap());
            let dcn = random_normal(&mut rng, &p, ConeSense::Clarke, s, t);
            let ip: f64 = dc.iter().zip(&dcn).map(|(a, b)| a * b).sum();
            assert_eq!(ip, 0.0);
        }
    }

    #[test]
    fn tangent_directions_keep_the_ray_feasible() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let (m, n, s, t) = (5, 5, 2, 3);
        for _ in 0..200 {
            let z = random_point(&mut rng, m, n, s, t);
            let d: Vec<f64> = (0..m + n)
                .map(|_| if rng.gen_bool(0.3) { rng.gen_range(-1.0..1.0) } else { 0.0 })
                .collect();
            let member = tangent_membership(&z, &d, ConeSense::Bouligand, s, t).unwrap();
            let ray_ok = [0.37, 1.3, -0.71, 2.9].iter().all(|&mu| {
                let w: Vec<f64> = z.as_slice().iter().zip(&d).map(|(a, b)| a + mu * b).collect();
                is_feasible(&Point::from_concat(w, m).unwrap(), s, t, DEFAULT_ZERO_TOL)
            });
            assert_eq!(member, ray_ok, "z = {:?}, d = {:?}", z, d);
        }
    }
}
