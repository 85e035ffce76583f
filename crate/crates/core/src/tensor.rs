//! Third-order tensors, mode products and the least-squares objective.
//!
//! A tensor `a` of shape `l × m × n` is stored row-major, so entry
//! `(i, j, k)` lives at `(i * m + j) * n + k`. A point `z = (x, y)` keeps
//! `x ∈ R^m` and `y ∈ R^n` concatenated in one vector.

use crate::error::{check_len, Result, SblsError};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len("matrix data", rows * cols, data.len())?;
        Ok(Matrix { rows, cols, data })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// `M v`.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        self.data
            .chunks_exact(self.cols.max(1))
            .take(self.rows)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Mᵀ v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * vi;
            }
        }
        out
    }
}

/// Dense third-order tensor of shape `l × m × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    l: usize,
    m: usize,
    n: usize,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(l: usize, m: usize, n: usize) -> Self {
        Tensor3 {
            l,
            m,
            n,
            data: vec![0.0; l * m * n],
        }
    }

    pub fn from_dense(l: usize, m: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        check_len("tensor data", l * m * n, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(SblsError::InvalidArgument(
                "tensor entries must be finite".into(),
            ));
        }
        Ok(Tensor3 { l, m, n, data })
    }

    /// Build from 0-based `(i, j, k, value)` triples. Repeated keys are rejected.
    pub fn from_coo(
        l: usize,
        m: usize,
        n: usize,
        entries: &[(usize, usize, usize, f64)],
    ) -> Result<Self> {
        let mut t = Tensor3::zeros(l, m, n);
        let mut seen = vec![false; l * m * n];
        for &(i, j, k, v) in entries {
            if i >= l || j >= m || k >= n {
                return Err(SblsError::InvalidArgument(format!(
                    "entry ({i}, {j}, {k}) outside shape {l}x{m}x{n}"
                )));
            }
            if !v.is_finite() {
                return Err(SblsError::InvalidArgument(
                    "tensor entries must be finite".into(),
                ));
            }
            let idx = t.offset(i, j, k);
            if seen[idx] {
                return Err(SblsError::InvalidArgument(format!(
                    "duplicate entry ({i}, {j}, {k})"
                )));
            }
            seen[idx] = true;
            t.data[idx] = v;
        }
        Ok(t)
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.m + j) * self.n + k
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.l, self.m, self.n)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let o = self.offset(i, j, k);
        self.data[o] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Number of entries whose bit pattern is not `+0.0`.
    pub fn stored_len(&self) -> usize {
        self.data.iter().filter(|v| v.to_bits() != 0).count()
    }

    /// Mode-2 product `a ×₂ x`, an `l × n` matrix with entries `Σ_j a_ijk x_j`.
    pub fn mode2(&self, x: &[f64]) -> Result<Matrix> {
        check_len("x", self.m, x.len())?;
        let mut out = Matrix::zeros(self.l, self.n);
        for i in 0..self.l {
            for (j, &xj) in x.iter().enumerate() {
                if xj == 0.0 {
                    continue;
                }
                let base = self.offset(i, j, 0);
                let fibre = &self.data[base..base + self.n];
                let row = &mut out.data[i * self.n..(i + 1) * self.n];
                for (o, a) in row.iter_mut().zip(fibre) {
                    *o += a * xj;
                }
            }
        }
        Ok(out)
    }

    /// Mode-3 product `a ×₃ y`, an `l × m` matrix with entries `Σ_k a_ijk y_k`.
    pub fn mode3(&self, y: &[f64]) -> Result<Matrix> {
        check_len("y", self.n, y.len())?;
        let mut out = Matrix::zeros(self.l, self.m);
        for i in 0..self.l {
            for j in 0..self.m {
                let base = self.offset(i, j, 0);
                let fibre = &self.data[base..base + self.n];
                out.data[i * self.m + j] = fibre.iter().zip(y).map(|(a, b)| a * b).sum();
            }
        }
        Ok(out)
    }

    /// The vector `a x y ∈ R^l`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        check_len("y", self.n, y.len())?;
        Ok(self.mode2(x)?.mul_vec(y))
    }
}

/// A point `z = (x, y)` stored as one concatenated vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    z: Vec<f64>,
    m: usize,
}

impl Point {
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        let mut z = Vec::with_capacity(x.len() + y.len());
        z.extend_from_slice(x);
        z.extend_from_slice(y);
        Point { z, m: x.len() }
    }

    pub fn from_concat(z: Vec<f64>, m: usize) -> Result<Self> {
        if m > z.len() {
            return Err(SblsError::DimensionMismatch {
                what: "point x block",
                expected: m,
                got: z.len(),
            });
        }
        Ok(Point { z, m })
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Point {
            z: vec![0.0; m + n],
            m,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.z.len() - self.m
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn x(&self) -> &[f64] {
        &self.z[..self.m]
    }

    pub fn y(&self) -> &[f64] {
        &self.z[self.m..]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.z
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.z
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.z
    }

    pub fn x_mut(&mut self) -> &mut [f64] {
        &mut self.z[..self.m]
    }

    pub fn y_mut(&mut self) -> &mut [f64] {
        let m = self.m;
        &mut self.z[m..]
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.z)
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, a| acc.max(a.abs()))
}

/// Problem data: tensor, target vector and the two sparsity budgets.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub tensor: Tensor3,
    pub b: Vec<f64>,
    pub s: usize,
    pub t: usize,
}

impl Instance {
    pub fn new(tensor: Tensor3, b: Vec<f64>, s: usize, t: usize) -> Result<Self> {
        let (l, m, n) = tensor.dims();
        check_len("b", l, b.len())?;
        if b.iter().any(|v| !v.is_finite()) {
            return Err(SblsError::InvalidArgument("b must be finite".into()));
        }
        if s == 0 || s >= m {
            return Err(SblsError::InvalidArgument(format!(
                "sparsity s = {s} must satisfy 1 <= s < m = {m}"
            )));
        }
        if t == 0 || t >= n {
            return Err(SblsError::InvalidArgument(format!(
                "sparsity t = {t} must satisfy 1 <= t < n = {n}"
            )));
        }
        Ok(Instance { tensor, b, s, t })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.tensor.dims()
    }

    pub fn m(&self) -> usize {
        self.tensor.m
    }

    pub fn n(&self) -> usize {
        self.tensor.n
    }

    fn check_point(&self, z: &Point) -> Result<()> {
        check_len("point x block", self.tensor.m, z.m())?;
        check_len("point y block", self.tensor.n, z.n())
    }

    /// `r = a x y − b`.
    pub fn residual(&self, z: &Point) -> Result<Vec<f64>> {
        self.check_point(z)?;
        let mut r = self.tensor.bilinear(z.x(), z.y())?;
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        Ok(r)
    }

    /// `f(z) = ½‖a x y − b‖²`.
    pub fn objective(&self, z: &Point) -> Result<f64> {
        let r = self.residual(z)?;
        Ok(0.5 * r.iter().map(|v| v * v).sum::<f64>())
    }

    /// `∇f(z) = ((a ×₃ y)ᵀ r, (a ×₂ x)ᵀ r)`.
    pub fn gradient(&self, z: &Point) -> Result<Vec<f64>> {
        Ok(self.objective_and_gradient(z)?.1)
    }

    pub fn objective_and_gradient(&self, z: &Point) -> Result<(f64, Vec<f64>)> {
        let r = self.residual(z)?;
        let f = 0.5 * r.iter().map(|v| v * v).sum::<f64>();
        let mut g = self.tensor.mode3(z.y())?.tr_mul_vec(&r);
        g.extend(self.tensor.mode2(z.x())?.tr_mul_vec(&r));
        Ok((f, g))
    }
}

/// Central-difference approximation of `∇f`, meant for verification only.
pub fn central_difference_gradient(inst: &Instance, z: &Point, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(SblsError::InvalidArgument("step must be positive".into()));
    }
    let mut probe = z.clone();
    let mut g = Vec::with_capacity(z.len());
    for i in 0..z.len() {
        let orig = probe.as_slice()[i];
        probe.as_mut_slice()[i] = orig + h;
        let fp = inst.objective(&probe)?;
        probe.as_mut_slice()[i] = orig - h;
        let fm = inst.objective(&probe)?;
        probe.as_mut_slice()[i] = orig;
        g.push((fp - fm) / (2.0 * h));
    }
    Ok(g)
}
