//! Instance generators: blind deconvolution, rank-one matrix sensing and
//! random planted problems.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, SblsError};
use crate::tensor::{Instance, Matrix, Point, Tensor3};

/// Tensor with `a_ijk = h_ij g_ik`, so that `a x y = (H x) ⊙ (G y)`.
pub fn gen_blind_deconv(h: &Matrix, g: &Matrix) -> Result<Tensor3> {
    if h.rows != g.rows {
        return Err(SblsError::DimensionMismatch {
            what: "dictionary rows",
            expected: h.rows,
            got: g.rows,
        });
    }
    let (l, m, n) = (h.rows, h.cols, g.cols);
    let mut t = Tensor3::zeros(l, m, n);
    for i in 0..l {
        for j in 0..m {
            for k in 0..n {
                t.set(i, j, k, h.get(i, j) * g.get(i, k));
            }
        }
    }
    Ok(t)
}

/// Tensor with `a_ijk = (M_i)_jk`, so that `(a x y)_i = ⟨M_i, x yᵀ⟩`.
pub fn gen_matrix_sensing(ms: &[Matrix]) -> Result<Tensor3> {
    let first = ms
        .first()
        .ok_or_else(|| SblsError::InvalidArgument("need at least one measurement matrix".into()))?;
    let (m, n) = (first.rows, first.cols);
    let mut data = Vec::with_capacity(ms.len() * m * n);
    for mi in ms {
        if mi.rows != m || mi.cols != n {
            return Err(SblsError::InvalidArgument(format!(
                "measurement shapes differ: {}x{} vs {m}x{n}",
                mi.rows, mi.cols
            )));
        }
        data.extend_from_slice(&mi.data);
    }
    Tensor3::from_dense(ms.len(), m, n, data)
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Matrix {
    let data = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
    Matrix { rows, cols, data }
}

/// Feasible point with exactly `s` and `t` nonzeros, leading x entry one and
/// standard normal values elsewhere.
pub fn random_feasible_point(m: usize, n: usize, s: usize, t: usize, rng: &mut ChaCha8Rng) -> Point {
    let mut z = Point::zeros(m, n);
    let mut s1 = sample(rng, m, s).into_vec();
    s1.sort_unstable();
    for (c, &i) in s1.iter().enumerate() {
        z.x_mut()[i] = if c == 0 { 1.0 } else { StandardNormal.sample(rng) };
    }
    for j in sample(rng, n, t) {
        z.y_mut()[j] = StandardNormal.sample(rng);
    }
    z
}

fn planted_from(tensor: Tensor3, s: usize, t: usize, rng: &mut ChaCha8Rng) -> Result<(Instance, Point)> {
    let (l, m, n) = tensor.dims();
    if s == 0 || s >= m || t == 0 || t >= n {
        return Err(SblsError::InvalidArgument(format!(
            "need 1 <= s < m and 1 <= t < n, got s={s}, t={t}, m={m}, n={n}"
        )));
    }
    let z = random_feasible_point(m, n, s, t, rng);
    let b = tensor.bilinear(z.x(), z.y())?;
    debug_assert_eq!(b.len(), l);
    Ok((Instance::new(tensor, b, s, t)?, z))
}

/// Gaussian tensor with `b = a x° y°` for a random feasible `z°`.
pub fn gen_planted(l: usize, m: usize, n: usize, s: usize, t: usize, seed: u64) -> Result<(Instance, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..l * m * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    planted_from(Tensor3::from_dense(l, m, n, data)?, s, t, &mut rng)
}

/// Blind deconvolution with Gaussian dictionaries and a planted sparse solution.
pub fn gen_planted_blind_deconv(l: usize, m: usize, n: usize, s: usize, t: usize, seed: u64) -> Result<(Instance, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = gaussian_matrix(l, m, &mut rng);
    let g = gaussian_matrix(l, n, &mut rng);
    planted_from(gen_blind_deconv(&h, &g)?, s, t, &mut rng)
}

/// Matrix sensing with Gaussian measurements and a planted sparse solution.
pub fn gen_planted_matrix_sensing(l: usize, m: usize, n: usize, s: usize, t: usize, seed: u64) -> Result<(Instance, Point)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ms: Vec<Matrix> = (0..l).map(|_| gaussian_matrix(m, n, &mut rng)).collect();
    planted_from(gen_matrix_sensing(&ms)?, s, t, &mut rng)
}

/// Gaussian tensor and Gaussian right-hand side, usually with no zero-residual solution.
pub fn gen_random(l: usize, m: usize, n: usize, s: usize, t: usize, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..l * m * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let b = (0..l).map(|_| StandardNormal.sample(&mut rng)).collect();
    Instance::new(Tensor3::from_dense(l, m, n, data)?, b, s, t)
}
