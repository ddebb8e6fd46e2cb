//! Dense complex linear algebra sized for desk-scale quantum checks
//! (matrices up to a few hundred rows).

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weyl::{WeylLabel, WeylStructure};

pub type C64 = Complex64;

/// Default absolute tolerance for numeric checks.
pub const DEFAULT_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(ComplexMatrix { rows, cols, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conjugate(&self) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(ComplexMatrix { rows: self.rows, cols: self.cols, data })
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| self[(i / r2, j / c2)] * other[(i % r2, j % c2)])
    }

    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        if self.cols != v.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix applied to vector of length {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        let amps = (0..self.rows)
            .map(|i| {
                let row = &self.data[i * self.cols..(i + 1) * self.cols];
                row.iter().zip(&v.amps).map(|(a, b)| a * b).sum()
            })
            .collect();
        Ok(StateVector { amps })
    }

    /// ⟨v|A|v⟩.
    pub fn expectation(&self, v: &StateVector) -> Result<C64> {
        let av = self.apply(v)?;
        Ok(v.inner(&av))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// max |A_ij − A_ji*|.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// max |(U U†) − I|.
    pub fn unitarity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let uu = &(self * &self.dagger()) - &Self::identity(self.rows);
        uu.max_abs()
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() < tol
    }

    /// Partial trace over subsystem `which` of a square operator on `dims`.
    pub fn partial_trace(&self, dims: &[usize], which: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        if !self.is_square() || self.rows != total || which >= dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "partial trace of {}x{} over factor {which} of {dims:?}",
                self.rows, self.cols
            )));
        }
        let inner: usize = dims[which + 1..].iter().product();
        let dk = dims[which];
        let outer: usize = dims[..which].iter().product();
        let out_dim = outer * inner;
        let mut out = Self::zeros(out_dim, out_dim);
        for o1 in 0..outer {
            for i1 in 0..inner {
                for o2 in 0..outer {
                    for i2 in 0..inner {
                        let mut acc = ZERO;
                        for k in 0..dk {
                            let r = (o1 * dk + k) * inner + i1;
                            let c = (o2 * dk + k) * inner + i2;
                            acc += self[(r, c)];
                        }
                        out[(o1 * inner + i1, o2 * inner + i2)] = acc;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Reorders tensor factors: factor `i` of the result is factor `perm[i]` of `self`.
    pub fn permute_subsystems(&self, dims: &[usize], perm: &[usize]) -> Result<Self> {
        let map = permutation_index_map(dims, perm)?;
        if !self.is_square() || self.rows != map.len() {
            return Err(Error::DimensionMismatch(format!("permute {}x{} over {dims:?}", self.rows, self.cols)));
        }
        Ok(Self::from_fn(self.rows, self.cols, |i, j| self[(map[i], map[j])]))
    }

    /// Largest |λ| of a Hermitian matrix.
    pub fn spectral_norm_hermitian(&self) -> Result<f64> {
        let e = hermitian_eigen(self)?;
        Ok(e.values.iter().map(|v| v.abs()).fold(0.0, f64::max))
    }

    /// Principal square root of a PSD matrix (negative eigenvalues clipped to zero).
    pub fn psd_sqrt(&self) -> Result<Self> {
        let e = hermitian_eigen(self)?;
        Ok(e.reconstruct_with(|l| l.max(0.0).sqrt()))
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson { rows: self.rows, cols: self.cols, entries: self.data.iter().map(|z| [z.re, z.im]).collect() }
    }

    pub fn from_json(j: &MatrixJson) -> Result<Self> {
        Self::from_vec(j.rows, j.cols, j.entries.iter().map(|e| C64::new(e[0], e[1])).collect())
    }
}

/// `map[new_index] = old_index` for a subsystem permutation.
pub fn permutation_index_map(dims: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    let k = dims.len();
    let mut seen = vec![false; k];
    if perm.len() != k || perm.iter().any(|&p| p >= k || std::mem::replace(&mut seen[p], true)) {
        return Err(Error::invalid(format!("{perm:?} is not a permutation of {k} factors")));
    }
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let total: usize = dims.iter().product();
    let mut old_strides = vec![1usize; k];
    for i in (0..k.saturating_sub(1)).rev() {
        old_strides[i] = old_strides[i + 1] * dims[i + 1];
    }
    let mut map = Vec::with_capacity(total);
    let mut digits = vec![0usize; k];
    for _ in 0..total {
        map.push(digits.iter().zip(perm).map(|(&dgt, &p)| dgt * old_strides[p]).sum());
        for i in (0..k).rev() {
            digits[i] += 1;
            if digits[i] < new_dims[i] {
                break;
            }
            digits[i] = 0;
        }
    }
    Ok(map)
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Wire format `{"rows":r,"cols":c,"entries":[[re,im],...]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Self {
        StateVector { amps }
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut amps = vec![ZERO; dim];
        amps[k] = ONE;
        StateVector { amps }
    }

    pub fn from_real(values: &[f64]) -> Self {
        StateVector { amps: values.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// ⟨self|other⟩, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        StateVector { amps: self.amps.iter().map(|z| z / n).collect() }
    }

    pub fn conjugate(&self) -> Self {
        StateVector { amps: self.amps.iter().map(|z| z.conj()).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        StateVector { amps: self.amps.iter().map(|z| z * s).collect() }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        StateVector { amps }
    }

    /// |self⟩⟨other|.
    pub fn outer(&self, other: &Self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim(), other.dim(), |i, j| self.amps[i] * other.amps[j].conj())
    }

    pub fn projector(&self) -> ComplexMatrix {
        self.outer(self)
    }

    pub fn permute_subsystems(&self, dims: &[usize], perm: &[usize]) -> Result<Self> {
        let map = permutation_index_map(dims, perm)?;
        if map.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!("vector of length {} over {dims:?}", self.dim())));
        }
        Ok(StateVector { amps: map.iter().map(|&o| self.amps[o]).collect() })
    }
}

/// Generalized bit flip X|n⟩ = |n+1⟩.
pub fn shift_matrix(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| if i == (j + 1) % d { ONE } else { ZERO })
}

/// Generalized phase flip Z|n⟩ = ωⁿ|n⟩.
pub fn clock_matrix(d: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, d, |i, j| if i == j { root_of_unity(d, i as i64) } else { ZERO })
}

pub fn root_of_unity(d: usize, k: i64) -> C64 {
    let k = k.rem_euclid(d as i64) as f64;
    C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k / d as f64)
}

/// X^s Z^t on a single qudit of dimension d.
pub fn weyl_matrix(d: usize, s: u32, t: u32) -> ComplexMatrix {
    // (X^s Z^t)|n⟩ = ω^{tn} |n+s⟩
    ComplexMatrix::from_fn(
        d,
        d,
        |i, j| {
            if i == (j + s as usize) % d {
                root_of_unity(d, t as i64 * j as i64)
            } else {
                ZERO
            }
        },
    )
}

/// Tensor product over factors of X^{s_i} Z^{t_i}.
pub fn build_unitary(label: &WeylLabel, structure: &WeylStructure) -> Result<ComplexMatrix> {
    structure.check_label(label)?;
    let mut out = ComplexMatrix::identity(1);
    for (&d, &(s, t)) in structure.factors().iter().zip(label.pairs()) {
        out = out.kron(&weyl_matrix(d as usize, s, t));
    }
    Ok(out)
}

/// |Φ⟩ = Σ|nn⟩/√d.
pub fn standard_mes(d: usize) -> StateVector {
    let amp = C64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut amps = vec![ZERO; d * d];
    for n in 0..d {
        amps[n * d + n] = amp;
    }
    StateVector { amps }
}

/// (U ⊗ I)|Φ⟩.
pub fn mes_vector(u: &ComplexMatrix) -> Result<StateVector> {
    if !u.is_square() {
        return Err(Error::DimensionMismatch(format!("MES unitary must be square, got {}x{}", u.rows(), u.cols())));
    }
    let d = u.rows();
    let norm = 1.0 / (d as f64).sqrt();
    // amplitude at |i, n⟩ is U_{i n}/√d
    Ok(StateVector { amps: u.data().iter().map(|z| z * norm).collect() })
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Column k is the eigenvector for `values[k]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn max(&self) -> f64 {
        *self.values.last().expect("empty spectrum")
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn vector(&self, k: usize) -> StateVector {
        StateVector { amps: (0..self.vectors.rows()).map(|i| self.vectors[(i, k)]).collect() }
    }

    /// V f(Λ) V†.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.vectors.rows();
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| self.vectors[(i, k)] * fl[k] * self.vectors[(j, k)].conj()).sum()
        })
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
pub fn hermitian_eigen(a: &ComplexMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!("eigen of {}x{} matrix", a.rows(), a.cols())));
    }
    let dev = a.hermitian_deviation();
    if dev >= 1e-10 * a.max_abs().max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    let n = a.rows();
    let mut m = ComplexMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm();

    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|p| ((p + 1)..n).map(move |q| (p, q))).map(|(p, q)| m[(p, q)].norm_sqr()).sum();
        if off.sqrt() <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let abs = apq.norm();
                if abs <= 1e-300 || abs <= 1e-18 * scale {
                    continue;
                }
                let phase = apq / abs;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (2.0 * abs);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let ph_c = phase.conj();
                // G = diag(.., e^{-iφ} at q) · R(c, s) restricted to columns p, q
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = ph_c * (-s);
                let g_qq = ph_c * c;
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * g_pp + akq * g_qp;
                    m[(k, q)] = akp * g_pq + akq * g_qq;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                    m[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn lambda_max(a: &ComplexMatrix) -> Result<f64> {
    Ok(hermitian_eigen(a)?.max())
}

/// Singular values and right singular vectors of a real m×n matrix
/// (one-sided Jacobi). Returns (σ_k, columns of V) with σ unsorted.
pub fn real_svd_right(a: &[Vec<f64>], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let m = a.len();
    // work column-major: cols[j][i] = a[i][j]
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a[i][j]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _sweep in 0..80 {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha: f64 = cols[i].iter().map(|x| x * x).sum();
                let beta: f64 = cols[j].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[i].iter().zip(&cols[j]).map(|(x, y)| x * y).sum();
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (ci, cj) = two_mut(&mut cols, i, j);
                for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
                    let (xi, yj) = (*x, *y);
                    *x = c * xi - s * yj;
                    *y = s * xi + c * yj;
                }
                let (vi, vj) = two_mut(&mut v, i, j);
                for (x, y) in vi.iter_mut().zip(vj.iter_mut()) {
                    let (xi, yj) = (*x, *y);
                    *x = c * xi - s * yj;
                    *y = s * xi + c * yj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = cols.iter().map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    (sigma, v)
}

fn two_mut<T>(v: &mut [T], i: usize, j: usize) -> (&mut T, &mut T) {
    debug_assert!(i < j);
    let (lo, hi) = v.split_at_mut(j);
    (&mut lo[i], &mut hi[0])
}

/// Orthonormal basis of {x ∈ R^dim : ⟨c, x⟩ = 0 for every constraint row c}.
/// Singular values below `rel_threshold · σ_max` count as zero.
pub fn nullspace_real(constraints: &[Vec<f64>], dim: usize, rel_threshold: f64) -> Vec<Vec<f64>> {
    if constraints.is_empty() {
        return (0..dim).map(|j| (0..dim).map(|i| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    }
    let (sigma, v) = real_svd_right(constraints, dim);
    let smax = sigma.iter().cloned().fold(0.0, f64::max);
    let cut = rel_threshold * smax;
    sigma.iter().zip(v).filter(|(s, _)| **s <= cut).map(|(_, col)| col).collect()
}

/// Orthonormal real basis of n×n Hermitian matrices under ⟨A,B⟩ = Re Tr(A†B):
/// E_kk, (E_kl+E_lk)/√2, i(E_kl−E_lk)/√2 for k<l.
pub fn hermitian_basis(n: usize) -> Vec<ComplexMatrix> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        let mut e = ComplexMatrix::zeros(n, n);
        e[(k, k)] = ONE;
        out.push(e);
    }
    for k in 0..n {
        for l in (k + 1)..n {
            let mut s = ComplexMatrix::zeros(n, n);
            s[(k, l)] = C64::new(r, 0.0);
            s[(l, k)] = C64::new(r, 0.0);
            out.push(s);
            let mut a = ComplexMatrix::zeros(n, n);
            a[(k, l)] = C64::new(0.0, r);
            a[(l, k)] = C64::new(0.0, -r);
            out.push(a);
        }
    }
    out
}

/// Coordinates of a Hermitian matrix in [`hermitian_basis`].
pub fn hermitian_to_real(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.rows();
    let s2 = std::f64::consts::SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for k in 0..n {
        out.push(m[(k, k)].re);
    }
    for k in 0..n {
        for l in (k + 1)..n {
            out.push(s2 * m[(k, l)].re);
            out.push(s2 * m[(k, l)].im);
        }
    }
    out
}

pub fn real_to_hermitian(x: &[f64], n: usize) -> ComplexMatrix {
    let basis = hermitian_basis(n);
    let mut out = ComplexMatrix::zeros(n, n);
    for (c, b) in x.iter().zip(&basis) {
        if *c != 0.0 {
            out = &out + &b.scale_real(*c);
        }
    }
    out
}

/// The two real functionals M ↦ Re Tr(M A), M ↦ Im Tr(M A) on Hermitian M,
/// expressed against [`hermitian_basis`].
pub fn trace_functionals(a: &ComplexMatrix) -> [Vec<f64>; 2] {
    let basis = hermitian_basis(a.rows());
    let vals: Vec<C64> = basis.iter().map(|b| (b * a).trace()).collect();
    [vals.iter().map(|z| z.re).collect(), vals.iter().map(|z| z.im).collect()]
}

/// Random sampling helpers shared by randomized checks.
pub mod random {
    use super::*;

    pub fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    /// Haar-distributed pure state.
    pub fn state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> StateVector {
        StateVector::new((0..dim).map(|_| gaussian_c64(rng)).collect()).normalized()
    }

    pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| gaussian_c64(rng))
    }

    pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
        let g = ginibre(rng, n);
        (&g + &g.dagger()).scale_real(0.5)
    }

    /// G G† for a Ginibre G of the given rank.
    pub fn psd<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(n, rank, |_, _| gaussian_c64(rng));
        &g * &g.dagger()
    }

    /// Unitary from Gram–Schmidt on a Ginibre matrix.
    pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
        let g = ginibre(rng, n);
        let mut cols: Vec<StateVector> = Vec::with_capacity(n);
        for j in 0..n {
            let mut v = StateVector::new((0..n).map(|i| g[(i, j)]).collect());
            for u in &cols {
                let p = u.inner(&v);
                for (x, y) in v.amps.iter_mut().zip(&u.amps) {
                    *x -= p * y;
                }
            }
            cols.push(v.normalized());
        }
        ComplexMatrix::from_fn(n, n, |i, j| cols[j].amps[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> bool {
        (a - b).max_abs() < tol
    }

    #[test]
    fn weyl_matrices() {
        let id = build_unitary(&WeylLabel::identity(2), &WeylStructure::new(vec![3, 2]).unwrap()).unwrap();
        assert!(close(&id, &ComplexMatrix::identity(6), 1e-15));

        let xz = weyl_matrix(2, 1, 1);
        let expect = ComplexMatrix::from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert!(close(&xz, &expect, 1e-15));

        let z3 = weyl_matrix(3, 0, 1);
        let w = root_of_unity(3, 1);
        assert!(close(&z3, &ComplexMatrix::diag(&[ONE, w, w * w]), 1e-15));

        let x = shift_matrix(5);
        let z = clock_matrix(5);
        // ZX = ω XZ
        assert!(close(&(&z * &x), &(&x * &z).scale(root_of_unity(5, 1)), 1e-14));
        assert!(close(&weyl_matrix(5, 2, 3), &(&(&x * &x) * &(&(&z * &z) * &z)), 1e-14));
    }

    #[test]
    fn mes_vectors() {
        let r = 1.0 / 2f64.sqrt();
        let phi = mes_vector(&ComplexMatrix::identity(2)).unwrap();
        assert_eq!(phi, StateVector::from_real(&[r, 0.0, 0.0, r]).scale(ONE));
        let psi_z = mes_vector(&clock_matrix(2)).unwrap();
        for (a, b) in psi_z.amps.iter().zip([r, 0.0, 0.0, -r]) {
            assert!((a - C64::new(b, 0.0)).norm() < 1e-15);
        }
        assert!(mes_vector(&ComplexMatrix::zeros(2, 3)).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in 2..6 {
            let u = random::unitary(&mut rng, d);
            let v = random::unitary(&mut rng, d);
            let lhs = mes_vector(&u).unwrap().inner(&mes_vector(&v).unwrap());
            // ⟨ψ_U|ψ_V⟩ = Tr(U†V)/d, the conjugate of Tr(V†U)/d
            let rhs = (&v.dagger() * &u).trace().conj() / d as f64;
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn mes_schmidt_coefficients_are_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 2..7 {
            let u = random::unitary(&mut rng, d);
            let psi = mes_vector(&u).unwrap();
            let rho_a = psi.projector().partial_trace(&[d, d], 1).unwrap();
            let e = hermitian_eigen(&rho_a).unwrap();
            for l in e.values {
                assert!((l.max(0.0).sqrt() - 1.0 / (d as f64).sqrt()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn eigen_examples() {
        let e = hermitian_eigen(&ComplexMatrix::identity(4)).unwrap();
        assert!(e.values.iter().all(|&l| (l - 1.0).abs() < 1e-15));
        let d = ComplexMatrix::diag(&[C64::new(3.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 0.0)]);
        let e = hermitian_eigen(&d).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);

        let mut non_herm = ComplexMatrix::zeros(2, 2);
        non_herm[(0, 1)] = ONE;
        assert!(matches!(hermitian_eigen(&non_herm), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eigen_reconstructs_random_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for n in [1usize, 2, 5, 20] {
            let a = random::hermitian(&mut rng, n);
            let e = hermitian_eigen(&a).unwrap();
            let rec = e.reconstruct_with(|l| l);
            assert!(close(&a, &rec, 1e-8), "n={n}");
            for w in e.values.windows(2) {
                assert!(w[0] <= w[1]);
            }
            let norm = a.frobenius_norm();
            for k in 0..n {
                let v = e.vector(k);
                let av = a.apply(&v).unwrap();
                let lv = v.scale(C64::new(e.values[k], 0.0));
                let resid = av.amps.iter().zip(&lv.amps).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                assert!(resid < 1e-8 * norm.max(1.0));
            }
            let shifted = &a + &ComplexMatrix::identity(n).scale_real(2.5);
            let es = hermitian_eigen(&shifted).unwrap();
            for (x, y) in es.values.iter().zip(&e.values) {
                assert!((x - y - 2.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn nullspace_examples() {
        assert_eq!(nullspace_real(&[], 4, 1e-8).len(), 4);

        let paulis = [
            ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]),
            ComplexMatrix::from_fn(2, 2, |i, j| match (i, j) {
                (0, 1) => C64::new(0.0, -1.0),
                (1, 0) => C64::new(0.0, 1.0),
                _ => ZERO,
            }),
            ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]),
        ];
        let rows: Vec<Vec<f64>> = paulis.iter().flat_map(trace_functionals).collect();
        let ns = nullspace_real(&rows, 4, 1e-8);
        assert_eq!(ns.len(), 1);
        let m = real_to_hermitian(&ns[0], 2);
        // proportional to I
        assert!((m[(0, 0)] - m[(1, 1)]).norm() < 1e-12);
        assert!(m[(0, 1)].norm() < 1e-12);
        for r in &rows {
            let resid: f64 = r.iter().zip(&ns[0]).map(|(a, b)| a * b).sum();
            assert!(resid.abs() < 1e-9);
        }
    }

    #[test]
    fn hermitian_coordinates_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let h = random::hermitian(&mut rng, 4);
        let x = hermitian_to_real(&h);
        assert!(close(&real_to_hermitian(&x, 4), &h, 1e-12));
        // functional coordinates agree with direct traces
        let a = random::ginibre(&mut rng, 4);
        let [re, im] = trace_functionals(&a);
        let tr = (&h * &a).trace();
        let via_re: f64 = re.iter().zip(&x).map(|(p, q)| p * q).sum();
        let via_im: f64 = im.iter().zip(&x).map(|(p, q)| p * q).sum();
        assert!((via_re - tr.re).abs() < 1e-10 && (via_im - tr.im).abs() < 1e-10);
    }

    #[test]
    fn tensor_and_partial_trace() {
        assert!(close(
            &ComplexMatrix::identity(2).kron(&ComplexMatrix::identity(3)),
            &ComplexMatrix::identity(6),
            1e-15
        ));
        let phi = standard_mes(3).projector();
        for side in 0..2 {
            let r = phi.partial_trace(&[3, 3], side).unwrap();
            assert!(close(&r, &ComplexMatrix::identity(3).scale_real(1.0 / 3.0), 1e-15));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random::ginibre(&mut rng, 3);
        assert_eq!(a.transpose().transpose(), a);
        let b = random::ginibre(&mut rng, 2);
        let ab = a.kron(&b);
        let tr_b = ab.partial_trace(&[3, 2], 1).unwrap();
        assert!(close(&tr_b, &a.scale(b.trace()), 1e-12));
        let tr_a = ab.partial_trace(&[3, 2], 0).unwrap();
        assert!(close(&tr_a, &b.scale(a.trace()), 1e-12));
        assert!(ab.partial_trace(&[2, 2], 0).is_err());
    }

    #[test]
    fn subsystem_permutation_swaps_kron_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random::ginibre(&mut rng, 2);
        let b = random::ginibre(&mut rng, 3);
        let c = random::ginibre(&mut rng, 4);
        let abc = a.kron(&b).kron(&c);
        let cab = abc.permute_subsystems(&[2, 3, 4], &[2, 0, 1]).unwrap();
        assert!(close(&cab, &c.kron(&a).kron(&b), 1e-12));
        let x = random::state(&mut rng, 2);
        let y = random::state(&mut rng, 3);
        let yx = x.kron(&y).permute_subsystems(&[2, 3], &[1, 0]).unwrap();
        assert_eq!(yx, y.kron(&x));
        assert!(abc.permute_subsystems(&[2, 3, 4], &[0, 0, 1]).is_err());
    }

    #[test]
    fn weyl_basis_expansion_is_complete() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for d in 2..=6usize {
            let m = random::hermitian(&mut rng, d);
            let mut rec = ComplexMatrix::zeros(d, d);
            for s in 0..d as u32 {
                for t in 0..d as u32 {
                    let u = weyl_matrix(d, s, t);
                    let coeff = (&m * &u).trace();
                    rec = &rec + &u.dagger().scale(coeff / d as f64);
                }
            }
            assert!(close(&rec, &m, 1e-9), "d={d}");
        }
    }

    #[test]
    fn random_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 1..8 {
            assert!(random::unitary(&mut rng, n).is_unitary(1e-12));
        }
        let psd = random::psd(&mut rng, 5, 2);
        let e = hermitian_eigen(&psd).unwrap();
        assert!(e.min() > -1e-10);
        let root = psd.psd_sqrt().unwrap();
        assert!(close(&(&root * &root), &psd, 1e-9));
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = weyl_matrix(3, 1, 2);
        let j = serde_json::to_string(&m.to_json()).unwrap();
        let back: MatrixJson = serde_json::from_str(&j).unwrap();
        assert_eq!(ComplexMatrix::from_json(&back).unwrap(), m);
        let bad = MatrixJson { rows: 2, cols: 2, entries: vec![[0.0, 0.0]] };
        assert!(ComplexMatrix::from_json(&bad).is_err());
    }
}
