//! Detector states and largest-Schmidt-coefficient bounds.
//!
//! A detector Σ_r √p_r |φ_r⟩_AB ⊗ |ψ_r⟩_CD is encoded by the operator T_AC
//! with |Ψ⟩ = d·(T_AC ⊗ I_BD)|Φ⟩; its largest Schmidt coefficient across
//! AC:BD is λ₁(T T†). Entanglement transfer into a d-dimensional MES is
//! possible iff λ₁ ≤ 1/d.

use num_rational::Rational64;
use serde::Serialize;

use crate::constructions::mixed_family;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, lambda_max, standard_mes, weyl_matrix, ComplexMatrix, C64};
use crate::weyl::{MesMembers, MesSet, WeylStructure};

fn ratio(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

#[derive(Clone, Debug)]
pub struct DetectorState {
    /// T_AC on A ⊗ C, dimension d·d_aux.
    pub t_matrix: ComplexMatrix,
    pub d: usize,
    pub d_aux: usize,
    pub weights: Vec<f64>,
}

impl DetectorState {
    pub fn m_ac(&self) -> ComplexMatrix {
        &self.t_matrix * &self.t_matrix.dagger()
    }

    /// Tr(T T†), 1 for a normalized detector.
    pub fn norm_sq(&self) -> f64 {
        self.t_matrix.frobenius_norm().powi(2)
    }

    pub fn lambda1(&self) -> Result<f64> {
        lambda_max(&self.m_ac())
    }
}

/// T_AC = (1/d) Σ_{r<k} √a Z^r ⊗ Z^{−r} + √(b/d) |1⟩⟨0| ⊗ X.
pub fn build_mixed_detector(d: usize) -> Result<DetectorState> {
    let fam = mixed_family(d)?;
    let a = ratio(fam.weight_mes);
    let b = ratio(fam.weight_product);
    let df = d as f64;
    let mut t = ComplexMatrix::zeros(d * d, d * d);
    for r in 0..fam.k {
        let zr = weyl_matrix(d, 0, r as u32);
        let zmr = weyl_matrix(d, 0, ((d - r) % d) as u32);
        t = &t + &zr.kron(&zmr).scale_real(a.sqrt() / df);
    }
    let mut flip = ComplexMatrix::zeros(d, d);
    flip[(1, 0)] = C64::new(1.0, 0.0);
    t = &t + &flip.kron(&weyl_matrix(d, 1, 0)).scale_real((b / df).sqrt());
    let mut weights = vec![a; fam.k];
    weights.push(b);
    Ok(DetectorState { t_matrix: t, d, d_aux: d, weights })
}

/// 1/d + (2k − d)² / (d²(4k − d)) with k = ⌊d/2⌋ + 1.
pub fn mixed_detector_bound(d: usize) -> f64 {
    let k = (d / 2 + 1) as f64;
    let d = d as f64;
    1.0 / d + (2.0 * k - d).powi(2) / (d * d * (4.0 * k - d))
}

/// (1/d²) [[a k², k√(dab)], [k√(dab), a k² + d b]] and its largest eigenvalue.
pub fn tilde_m_2x2(d: usize) -> Result<(ComplexMatrix, f64)> {
    let fam = mixed_family(d)?;
    let a = ratio(fam.weight_mes);
    let b = ratio(fam.weight_product);
    let k = fam.k as f64;
    let df = d as f64;
    let off = k * (df * a * b).sqrt();
    let m = ComplexMatrix::from_real_rows(&[&[a * k * k, off], &[off, a * k * k + df * b]]).scale_real(1.0 / (df * df));
    // closed-form top eigenvalue of a real symmetric 2×2
    let (p, q, r) = (m[(0, 0)].re, m[(0, 1)].re, m[(1, 1)].re);
    let lambda = 0.5 * (p + r) + (0.25 * (p - r).powi(2) + q * q).sqrt();
    Ok((m, lambda))
}

/// Compression of M_AC to span{|0,0⟩, |1,1⟩}.
pub fn compress_to_00_11(m_ac: &ComplexMatrix, d: usize) -> ComplexMatrix {
    let idx = [0, d + 1];
    ComplexMatrix::from_fn(2, 2, |i, j| m_ac[(idx[i], idx[j])])
}

pub fn nielsen_transfer_possible(lambda1: f64, d: usize) -> bool {
    lambda1 <= 1.0 / d as f64 + 1e-12
}

/// Members with X^s Z^t ↦ X^s Z^{−t}, i.e. complex conjugates up to phase.
pub fn conjugate_set(set: &MesSet) -> Result<MesSet> {
    let out = match &set.members {
        MesMembers::Labels { structure, labels } => {
            let conj = labels
                .iter()
                .map(|l| {
                    let pairs: Vec<(i64, i64)> = l.pairs().iter().map(|&(s, t)| (s as i64, -(t as i64))).collect();
                    structure.label(&pairs)
                })
                .collect::<Result<Vec<_>>>()?;
            MesSet::from_labels(structure.clone(), conj)?
        }
        MesMembers::Matrices { unitaries, .. } => {
            MesSet::from_matrices(unitaries.iter().map(|u| u.conjugate()).collect(), 1e-10)?
        }
    };
    Ok(out)
}

/// T_AC = Σ_L √p_L L ⊗ L′ / √(d d′) for member/auxiliary pairs, without a size constraint.
pub fn pairing_detector(set: &MesSet, weights: &[f64], aux: &MesSet) -> Result<DetectorState> {
    if weights.len() != set.len() || aux.len() != set.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} members, {} weights, {} auxiliary labels",
            set.len(),
            weights.len(),
            aux.len()
        )));
    }
    if weights.iter().any(|&w| w < 0.0 || !w.is_finite()) {
        return Err(Error::invalid("weights must be finite and nonnegative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("weights sum to {total}, expected 1")));
    }
    let (d, d_aux) = (set.dim(), aux.dim());
    let scale = 1.0 / ((d * d_aux) as f64).sqrt();
    let mut t = ComplexMatrix::zeros(d * d_aux, d * d_aux);
    for ((l, lp), w) in set.unitaries().iter().zip(aux.unitaries()).zip(weights) {
        t = &t + &l.kron(&lp).scale_real(w.sqrt() * scale);
    }
    Ok(DetectorState { t_matrix: t, d, d_aux, weights: weights.to_vec() })
}

/// λ₁ of the most general detector for a set of exactly d MESs; never exceeds 1/d′.
pub fn general_detector_lambda1(set: &MesSet, weights: &[f64], aux: &MesSet) -> Result<f64> {
    if set.len() != set.dim() {
        return Err(Error::invalid(format!("general detector needs |set| = d = {}, got {}", set.dim(), set.len())));
    }
    pairing_detector(set, weights, aux)?.lambda1()
}

/// {I, Z, …, Z^{k−1}, Z†} with the mixed-family weights (a on the first k, b on Z†)
/// and conjugate auxiliary labels.
pub fn mes_replacement_lambda1(d: usize) -> Result<f64> {
    let fam = mixed_family(d)?;
    let (structure, labels) = fam.members.labels().expect("label-backed family");
    let mut labels = labels.to_vec();
    labels.push(structure.label(&[(0, -1)])?);
    let set = MesSet::from_labels(structure.clone(), labels)?;
    let mut weights = vec![ratio(fam.weight_mes); fam.k];
    weights.push(ratio(fam.weight_product));
    pairing_detector(&set, &weights, &conjugate_set(&set)?)?.lambda1()
}

fn check_measurement(m: &ComplexMatrix, d: usize) -> Result<f64> {
    if m.rows() != d || m.cols() != d {
        return Err(Error::DimensionMismatch(format!(
            "measurement operator is {}x{}, expected {d}x{d}",
            m.rows(),
            m.cols()
        )));
    }
    let dev = m.hermitian_deviation();
    if dev >= 1e-10 * m.max_abs().max(1.0) {
        return Err(Error::NotHermitian(dev));
    }
    let tr = m.trace().re;
    if tr <= 1e-12 {
        return Err(Error::invalid("measurement operator must be nonzero"));
    }
    let min = hermitian_eigen(m)?.min();
    if min < -1e-9 * tr {
        return Err(Error::invalid(format!("measurement operator is not PSD (min eigenvalue {min:.3e})")));
    }
    Ok(tr)
}

/// Column j of a monomial unitary maps to (row, entry); None if any column has
/// more than one nonzero entry.
fn monomial_form(u: &ComplexMatrix) -> Option<Vec<(usize, C64)>> {
    (0..u.cols())
        .map(|j| {
            let mut hit = None;
            for i in 0..u.rows() {
                if u[(i, j)] != C64::new(0.0, 0.0) {
                    if hit.is_some() {
                        return None;
                    }
                    hit = Some((i, u[(i, j)]));
                }
            }
            hit
        })
        .collect()
}

/// L† M L, using the permutation structure when L is monomial so that
/// diagonal entries are copied without phase roundoff.
fn conjugate_by(m: &ComplexMatrix, l: &ComplexMatrix) -> ComplexMatrix {
    match monomial_form(l) {
        Some(cols) => ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| {
            let (ri, pi) = cols[i];
            let (rj, pj) = cols[j];
            if i == j {
                m[(ri, ri)]
            } else {
                pi.conj() * pj * m[(ri, rj)]
            }
        }),
        None => &(&l.dagger() * m) * l,
    }
}

fn twirl_unnormalized(m: &ComplexMatrix, set: &MesSet) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(set.dim(), set.dim());
    for l in set.unitaries() {
        out = &out + &conjugate_by(m, &l);
    }
    out
}

/// M_set = Σ_L L† (M / Tr M) L.
pub fn twirl(m: &ComplexMatrix, set: &MesSet) -> Result<ComplexMatrix> {
    let tr = check_measurement(m, set.dim())?;
    Ok(twirl_unnormalized(m, set).scale_real(1.0 / tr))
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymmetricBoundResult {
    /// 1/d + Tr(M_set − I)²/d².
    pub bound: f64,
    pub lambda1_numeric: f64,
    /// Tr(M_set − I)².
    pub twirl_deviation: f64,
    /// ⟨φ|M_AC|φ⟩/⟨φ|φ⟩ for |φ⟩ = (√M ⊗ I)|Φ⟩, equal to `bound`.
    pub rayleigh_quotient: f64,
}

/// Lower bound on λ₁ of the detector T_AC = Σ_L (√M′ L) ⊗ L* / d after a first
/// measurement outcome M on Alice's side.
pub fn asymmetric_bound(m: &ComplexMatrix, set: &MesSet) -> Result<AsymmetricBoundResult> {
    let d = set.dim();
    if set.len() != d {
        return Err(Error::invalid(format!("asymmetric bound needs |set| = d = {d}, got {}", set.len())));
    }
    let tr = check_measurement(m, d)?;
    // (Σ_L L† M L − Tr M · I) / Tr M, so that scalar M gives an exact zero
    let dev = (&twirl_unnormalized(m, set) - &ComplexMatrix::identity(d).scale_real(tr)).scale_real(1.0 / tr);
    let twirl_deviation = (&dev * &dev).trace().re;
    let df = d as f64;
    let bound = 1.0 / df + twirl_deviation / (df * df);

    let sqrt_mp = m.scale_real(1.0 / tr).psd_sqrt()?;
    let mut t = ComplexMatrix::zeros(d * d, d * d);
    for l in set.unitaries() {
        t = &t + &(&sqrt_mp * &l).kron(&l.conjugate()).scale_real(1.0 / df);
    }
    let m_ac = &t * &t.dagger();
    let lambda1_numeric = lambda_max(&m_ac)?;

    let phi = sqrt_mp.kron(&ComplexMatrix::identity(d)).apply(&standard_mes(d))?;
    let rayleigh_quotient = m_ac.expectation(&phi)?.re / phi.inner(&phi).re;

    if lambda1_numeric < bound - 1e-9 {
        return Err(Error::Consistency(format!("λ₁ = {lambda1_numeric} fell below the bound {bound}")));
    }
    if (rayleigh_quotient - bound).abs() > 1e-9 {
        return Err(Error::Consistency(format!("Rayleigh quotient {rayleigh_quotient} differs from bound {bound}")));
    }
    Ok(AsymmetricBoundResult { bound, lambda1_numeric, twirl_deviation, rayleigh_quotient })
}

/// The d-member single-qudit set {Z^t}_{t∈Z_d}.
pub fn clock_set(d: usize) -> Result<MesSet> {
    let s = WeylStructure::single(d as u32)?;
    let labels = (0..d as i64).map(|t| s.label(&[(0, t)])).collect::<Result<Vec<_>>>()?;
    MesSet::from_labels(s, labels)
}
