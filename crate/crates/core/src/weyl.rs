//! Phase-tracked generalized Pauli (Weyl) operators over a product of cyclic
//! factors, the γ invariant, and the kernel/difference-set certificate.
//!
//! A label assigns an exponent pair (s, t) to every factor and stands for
//! ⊗_i X^{s_i} Z^{t_i}. A single qudit of dimension d is the structure `[d]`;
//! m qubits with the Pauli basis is `[2; m]`. Phases are tracked as exponents
//! of ω_L with L the lcm of the factor orders.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::CycNumber;
use crate::error::{Error, Result};
use crate::linalg::{build_unitary, ComplexMatrix, C64};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeylStructure {
    factors: Vec<u32>,
}

impl WeylStructure {
    pub fn new(factors: Vec<u32>) -> Result<Self> {
        if factors.is_empty() || factors.iter().any(|&d| d < 2) {
            return Err(Error::invalid(format!("every Weyl factor must have order >= 2, got {factors:?}")));
        }
        Ok(WeylStructure { factors })
    }

    pub fn single(d: u32) -> Result<Self> {
        Self::new(vec![d])
    }

    pub fn qubits(m: usize) -> Result<Self> {
        Self::new(vec![2; m])
    }

    pub fn factors(&self) -> &[u32] {
        &self.factors
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|&d| d as usize).product()
    }

    pub fn phase_order(&self) -> u32 {
        self.factors.iter().fold(1u32, |acc, &d| acc.lcm(&d))
    }

    /// Builds a label, reducing every exponent into its residue range.
    pub fn label(&self, pairs: &[(i64, i64)]) -> Result<WeylLabel> {
        if pairs.len() != self.factors.len() {
            return Err(Error::invalid(format!(
                "label has {} factors, structure has {}",
                pairs.len(),
                self.factors.len()
            )));
        }
        let pairs = pairs
            .iter()
            .zip(&self.factors)
            .map(|(&(s, t), &d)| (s.rem_euclid(d as i64) as u32, t.rem_euclid(d as i64) as u32))
            .collect();
        Ok(WeylLabel { pairs })
    }

    pub fn identity(&self) -> WeylLabel {
        WeylLabel::identity(self.factors.len())
    }

    pub fn check_label(&self, l: &WeylLabel) -> Result<()> {
        let ok = l.pairs.len() == self.factors.len()
            && l.pairs.iter().zip(&self.factors).all(|(&(s, t), &d)| s < d && t < d);
        if ok {
            Ok(())
        } else {
            Err(Error::invalid(format!("label {l} does not belong to structure {:?}", self.factors)))
        }
    }

    /// All total_dim² labels in lexicographic order of the (s, t) pairs.
    pub fn all_labels(&self) -> Vec<WeylLabel> {
        let mut out = vec![WeylLabel { pairs: Vec::new() }];
        for &d in &self.factors {
            let mut next = Vec::with_capacity(out.len() * (d * d) as usize);
            for prefix in &out {
                for s in 0..d {
                    for t in 0..d {
                        let mut p = prefix.pairs.clone();
                        p.push((s, t));
                        next.push(WeylLabel { pairs: p });
                    }
                }
            }
            out = next;
        }
        out
    }

    /// Phaseless product label a + b.
    pub fn add(&self, a: &WeylLabel, b: &WeylLabel) -> WeylLabel {
        let pairs = a
            .pairs
            .iter()
            .zip(&b.pairs)
            .zip(&self.factors)
            .map(|((&(s1, t1), &(s2, t2)), &d)| ((s1 + s2) % d, (t1 + t2) % d))
            .collect();
        WeylLabel { pairs }
    }

    pub fn neg(&self, a: &WeylLabel) -> WeylLabel {
        let pairs = a.pairs.iter().zip(&self.factors).map(|(&(s, t), &d)| ((d - s) % d, (d - t) % d)).collect();
        WeylLabel { pairs }
    }

    /// Phaseless label of a·b†.
    pub fn sub(&self, a: &WeylLabel, b: &WeylLabel) -> WeylLabel {
        self.add(a, &self.neg(b))
    }

    fn check_pair(&self, a: &WeylLabel, b: &WeylLabel) -> Result<()> {
        self.check_label(a)?;
        self.check_label(b)
    }

    /// Exponent c (mod the phase order) with L·U = ω^c U·L, where
    /// c = Σ_i (L/d_i)(b_i s_i − t_i a_i) for L = (a, b), U = (s, t).
    pub fn commutation_exponent(&self, l: &WeylLabel, u: &WeylLabel) -> Result<u32> {
        self.check_pair(l, u)?;
        Ok(self.commutation_exponent_unchecked(l, u))
    }

    fn commutation_exponent_unchecked(&self, l: &WeylLabel, u: &WeylLabel) -> u32 {
        let order = self.phase_order() as i64;
        let mut c = 0i64;
        for ((&(a, b), &(s, t)), &d) in l.pairs.iter().zip(&u.pairs).zip(&self.factors) {
            let local = (b as i64 * s as i64 - t as i64 * a as i64).rem_euclid(d as i64);
            c += local * (order / d as i64);
        }
        c.rem_euclid(order) as u32
    }

    /// Phase-tracked product using Z^t X^{s'} = ω^{t s'} X^{s'} Z^t on each factor.
    pub fn mul(&self, a: &PhasedWeyl, b: &PhasedWeyl) -> Result<PhasedWeyl> {
        self.check_pair(&a.label, &b.label)?;
        let order = self.phase_order() as i64;
        let mut phase = a.phase_exp as i64 + b.phase_exp as i64;
        for ((&(_, t1), &(s2, _)), &d) in a.label.pairs.iter().zip(&b.label.pairs).zip(&self.factors) {
            phase += (t1 as i64 * s2 as i64 % d as i64) * (order / d as i64);
        }
        Ok(PhasedWeyl { label: self.add(&a.label, &b.label), phase_exp: phase.rem_euclid(order) as u32 })
    }

    /// (ω^c X^s Z^t)† = ω^{−c + ts} X^{−s} Z^{−t}, factor by factor.
    pub fn dagger(&self, a: &PhasedWeyl) -> Result<PhasedWeyl> {
        self.check_label(&a.label)?;
        let order = self.phase_order() as i64;
        let mut phase = -(a.phase_exp as i64);
        for (&(s, t), &d) in a.label.pairs.iter().zip(&self.factors) {
            phase += (s as i64 * t as i64 % d as i64) * (order / d as i64);
        }
        Ok(PhasedWeyl { label: self.neg(&a.label), phase_exp: phase.rem_euclid(order) as u32 })
    }
}

/// Phaseless Weyl label: one (s, t) pair per factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WeylLabel {
    pairs: Vec<(u32, u32)>,
}

impl WeylLabel {
    pub fn identity(factors: usize) -> Self {
        WeylLabel { pairs: vec![(0, 0); factors] }
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn is_identity(&self) -> bool {
        self.pairs.iter().all(|&p| p == (0, 0))
    }
}

impl fmt::Display for WeylLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, t)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            write!(f, "X^{s} Z^{t}")?;
        }
        Ok(())
    }
}

/// ω_L^{phase_exp} · U_label.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PhasedWeyl {
    pub label: WeylLabel,
    pub phase_exp: u32,
}

impl PhasedWeyl {
    pub fn new(label: WeylLabel) -> Self {
        PhasedWeyl { label, phase_exp: 0 }
    }
}

#[derive(Clone, Debug)]
pub enum MesMembers {
    Labels { structure: WeylStructure, labels: Vec<WeylLabel> },
    Matrices { dim: usize, unitaries: Vec<ComplexMatrix> },
}

/// A finite set of maximally entangled states |ψ_U⟩ = (U ⊗ I)|Φ⟩, identified by their U.
#[derive(Clone, Debug)]
pub struct MesSet {
    pub name: Option<String>,
    pub members: MesMembers,
}

impl MesSet {
    pub fn from_labels(structure: WeylStructure, labels: Vec<WeylLabel>) -> Result<Self> {
        for l in &labels {
            structure.check_label(l)?;
        }
        Ok(MesSet { name: None, members: MesMembers::Labels { structure, labels } })
    }

    /// Matrix-backed set; every member must be unitary within `tol`.
    pub fn from_matrices(unitaries: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let dim = unitaries.first().map(|u| u.rows()).ok_or_else(|| Error::invalid("empty matrix set"))?;
        for (i, u) in unitaries.iter().enumerate() {
            if u.rows() != dim || u.cols() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "member {i} is {}x{}, expected {dim}x{dim}",
                    u.rows(),
                    u.cols()
                )));
            }
            let dev = u.unitarity_deviation();
            if dev >= tol {
                return Err(Error::NotUnitary(dev));
            }
        }
        Ok(MesSet { name: None, members: MesMembers::Matrices { dim, unitaries } })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn len(&self) -> usize {
        match &self.members {
            MesMembers::Labels { labels, .. } => labels.len(),
            MesMembers::Matrices { unitaries, .. } => unitaries.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Local dimension d of the d⊗d system.
    pub fn dim(&self) -> usize {
        match &self.members {
            MesMembers::Labels { structure, .. } => structure.total_dim(),
            MesMembers::Matrices { dim, .. } => *dim,
        }
    }

    pub fn labels(&self) -> Option<(&WeylStructure, &[WeylLabel])> {
        match &self.members {
            MesMembers::Labels { structure, labels } => Some((structure, labels)),
            MesMembers::Matrices { .. } => None,
        }
    }

    fn require_labels(&self) -> Result<(&WeylStructure, &[WeylLabel])> {
        self.labels().ok_or_else(|| Error::invalid("operation requires a label-backed set"))
    }

    /// Explicit unitaries for every member.
    pub fn unitaries(&self) -> Vec<ComplexMatrix> {
        match &self.members {
            MesMembers::Labels { structure, labels } => {
                labels.iter().map(|l| build_unitary(l, structure).expect("validated label")).collect()
            }
            MesMembers::Matrices { unitaries, .. } => unitaries.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    CertifiedLoccIndistinguishable,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::CertifiedLoccIndistinguishable => write!(f, "CertifiedLoccIndistinguishable"),
            Verdict::Inconclusive => write!(f, "Inconclusive"),
        }
    }
}

/// γ_U = (1/d) Σ_L Tr(L U L† U†) = Σ_L ω^{c(L,U)} for a label-backed set.
pub fn gamma(set: &MesSet, u: &WeylLabel) -> Result<CycNumber> {
    let (structure, labels) = set.require_labels()?;
    structure.check_label(u)?;
    Ok(gamma_unchecked(structure, labels, u))
}

fn gamma_unchecked(structure: &WeylStructure, labels: &[WeylLabel], u: &WeylLabel) -> CycNumber {
    let exps = labels.iter().map(|l| structure.commutation_exponent_unchecked(l, u) as i64);
    CycNumber::from_root_multiset(structure.phase_order(), exps)
}

/// Floating-point γ_U = (1/d) Σ_L Tr(L U L† U†) for explicit unitaries.
pub fn gamma_numeric(unitaries: &[ComplexMatrix], u: &ComplexMatrix) -> C64 {
    let d = u.rows() as f64;
    let ud = u.dagger();
    unitaries.iter().map(|l| (&(&(l * u) * &l.dagger()) * &ud).trace()).sum::<C64>() / d
}

/// d δ_{s0} − ω^{−2s} − ω^{−s} + ω^{−⌊d/2⌋t} + ω^{⌊d/2⌋t−s}, the closed form of
/// γ_{st} for the Γ_d family.
pub fn gamma_closed_form_gamma_d(d: u32, s: i64, t: i64) -> Result<CycNumber> {
    if d < 4 {
        return Err(Error::invalid(format!("closed-form γ needs d >= 4, got {d}")));
    }
    let h = (d / 2) as i64;
    let delta = if s.rem_euclid(d as i64) == 0 { d as i64 } else { 0 };
    let positive = CycNumber::from_root_multiset(d, [-h * t, h * t - s]);
    let negative = CycNumber::from_root_multiset(d, [-2 * s, -s]);
    let base = CycNumber::from_integer(d, delta);
    base.checked_add(&positive)?.checked_sub(&negative)
}

/// Basis labels with γ_U = 0 (exact).
pub fn kernel_set(set: &MesSet) -> Result<BTreeSet<WeylLabel>> {
    Ok(gamma_table(set)?.into_iter().filter(|(_, g)| g.is_zero()).map(|(l, _)| l).collect())
}

/// Exact γ for every basis label, evaluated in parallel.
pub fn gamma_table(set: &MesSet) -> Result<BTreeMap<WeylLabel, CycNumber>> {
    let (structure, labels) = set.require_labels()?;
    let all = structure.all_labels();
    let values: Vec<CycNumber> = all.par_iter().map(|u| gamma_unchecked(structure, labels, u)).collect();
    Ok(all.into_iter().zip(values).collect())
}

/// {L₁ L₂†} as phaseless labels over ordered pairs L₁ ≠ L₂. The identity,
/// from L₁ = L₂, is left out; it never lies in the kernel since γ_I = |ℒ|.
pub fn difference_set(set: &MesSet) -> Result<BTreeSet<WeylLabel>> {
    let (structure, labels) = set.require_labels()?;
    let mut out = BTreeSet::new();
    for (i, a) in labels.iter().enumerate() {
        for (j, b) in labels.iter().enumerate() {
            if i != j {
                out.insert(structure.sub(a, b));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub set_size: usize,
    pub dim: usize,
    pub kernel: BTreeSet<WeylLabel>,
    pub difference: BTreeSet<WeylLabel>,
    pub verdict: Verdict,
    pub gamma_table: Option<BTreeMap<WeylLabel, CycNumber>>,
}

impl CriterionReport {
    pub fn kernel_in_difference(&self) -> bool {
        self.kernel.is_subset(&self.difference)
    }
}

/// Certified iff |ℒ| = d and K(ℒ) ⊆ Δ(ℒ); otherwise Inconclusive.
pub fn criterion_verdict(set: &MesSet) -> Result<CriterionReport> {
    let (structure, labels) = set.require_labels()?;
    let distinct: BTreeSet<&WeylLabel> = labels.iter().collect();
    if distinct.len() != labels.len() {
        return Err(Error::NotOrthogonal("duplicate labels".into()));
    }
    let table = gamma_table(set)?;
    let kernel: BTreeSet<WeylLabel> = table.iter().filter(|(_, g)| g.is_zero()).map(|(l, _)| l.clone()).collect();
    let difference = difference_set(set)?;
    let dim = structure.total_dim();
    let verdict = if labels.len() == dim && kernel.is_subset(&difference) {
        Verdict::CertifiedLoccIndistinguishable
    } else {
        Verdict::Inconclusive
    };
    Ok(CriterionReport { set_size: labels.len(), dim, kernel, difference, verdict, gamma_table: Some(table) })
}

/// Floating-point analogue of the criterion for matrix-backed sets, evaluated
/// against the single-qudit basis {X^s Z^t} of the set's dimension. The verdict
/// is always Inconclusive; `condition_holds` says whether the numeric
/// kernel/difference inclusion held.
#[derive(Clone, Debug)]
pub struct NumericCriterionReport {
    pub set_size: usize,
    pub dim: usize,
    pub kernel: BTreeSet<WeylLabel>,
    pub difference: BTreeSet<WeylLabel>,
    pub condition_holds: bool,
    pub verdict: Verdict,
    pub gamma_values: Vec<(WeylLabel, C64)>,
}

pub fn numeric_criterion(set: &MesSet, tol: f64) -> Result<NumericCriterionReport> {
    let d = set.dim();
    let structure = WeylStructure::single(d as u32)?;
    let unitaries = set.unitaries();
    let basis: Vec<(WeylLabel, ComplexMatrix)> =
        structure.all_labels().into_iter().map(|l| (l.clone(), build_unitary(&l, &structure).unwrap())).collect();
    let gamma_values: Vec<(WeylLabel, C64)> =
        basis.par_iter().map(|(l, u)| (l.clone(), gamma_numeric(&unitaries, u))).collect();
    let kernel: BTreeSet<WeylLabel> =
        gamma_values.iter().filter(|(_, g)| g.norm() < tol).map(|(l, _)| l.clone()).collect();
    let mut difference = BTreeSet::new();
    for (i, a) in unitaries.iter().enumerate() {
        for (j, b) in unitaries.iter().enumerate() {
            if i == j {
                continue;
            }
            let prod = a * &b.dagger();
            for (l, u) in &basis {
                // a b† ∝ U iff |Tr(U† a b†)| = d
                if ((&u.dagger() * &prod).trace().norm() - d as f64).abs() < tol * d as f64 {
                    difference.insert(l.clone());
                }
            }
        }
    }
    let condition_holds = set.len() == d && kernel.is_subset(&difference);
    Ok(NumericCriterionReport {
        set_size: set.len(),
        dim: d,
        kernel,
        difference,
        condition_holds,
        verdict: Verdict::Inconclusive,
        gamma_values,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrthogonalityReport {
    pub orthogonal: bool,
    /// max |Tr(U V†)| over distinct members.
    pub max_violation: f64,
}

/// Label-backed: exact (distinct labels). Matrix-backed: max |Tr(U V†)| < tol.
pub fn check_orthogonality(set: &MesSet, tol: f64) -> OrthogonalityReport {
    match &set.members {
        MesMembers::Labels { structure, labels } => {
            let distinct: BTreeSet<&WeylLabel> = labels.iter().collect();
            let orthogonal = distinct.len() == labels.len();
            let max_violation = if orthogonal { 0.0 } else { structure.total_dim() as f64 };
            OrthogonalityReport { orthogonal, max_violation }
        }
        MesMembers::Matrices { unitaries, .. } => {
            let mut worst = 0.0f64;
            for (i, a) in unitaries.iter().enumerate() {
                for b in &unitaries[i + 1..] {
                    worst = worst.max((a * &b.dagger()).trace().norm());
                }
            }
            OrthogonalityReport { orthogonal: worst < tol, max_violation: worst }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::weyl_matrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single(d: u32, pairs: &[(i64, i64)]) -> MesSet {
        let st = WeylStructure::single(d).unwrap();
        let labels = pairs.iter().map(|&p| st.label(&[p]).unwrap()).collect();
        MesSet::from_labels(st, labels).unwrap()
    }

    fn lbl(st: &WeylStructure, s: i64, t: i64) -> WeylLabel {
        st.label(&[(s, t)]).unwrap()
    }

    #[test]
    fn structure_validation() {
        assert!(WeylStructure::new(vec![]).is_err());
        assert!(WeylStructure::new(vec![1]).is_err());
        let st = WeylStructure::new(vec![2, 3]).unwrap();
        assert_eq!(st.total_dim(), 6);
        assert_eq!(st.phase_order(), 6);
        assert_eq!(st.all_labels().len(), 36);
        assert!(st.label(&[(0, 0)]).is_err());
    }

    #[test]
    fn zx_commutation_phase() {
        let st = WeylStructure::single(3).unwrap();
        let x = PhasedWeyl::new(lbl(&st, 1, 0));
        let z = PhasedWeyl::new(lbl(&st, 0, 1));
        let zx = st.mul(&z, &x).unwrap();
        let xz = st.mul(&x, &z).unwrap();
        assert_eq!(zx.label, xz.label);
        assert_eq!((zx.phase_exp + 3 - xz.phase_exp) % 3, 1);
    }

    #[test]
    fn product_example_in_d4() {
        let st = WeylStructure::single(4).unwrap();
        let a = PhasedWeyl::new(lbl(&st, 2, 3));
        let b = PhasedWeyl::new(lbl(&st, 2, 1));
        let p = st.mul(&a, &b).unwrap();
        assert!(p.label.is_identity());
        assert_eq!(p.phase_exp, 2);
    }

    #[test]
    fn product_matches_matrices() {
        let d = 5usize;
        let st = WeylStructure::single(d as u32).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let a = PhasedWeyl {
                label: lbl(&st, rng.gen_range(0..5), rng.gen_range(0..5)),
                phase_exp: rng.gen_range(0..5),
            };
            let b = PhasedWeyl {
                label: lbl(&st, rng.gen_range(0..5), rng.gen_range(0..5)),
                phase_exp: rng.gen_range(0..5),
            };
            let to_m = |p: &PhasedWeyl| {
                let (s, t) = p.label.pairs()[0];
                weyl_matrix(d, s, t).scale(crate::linalg::root_of_unity(d, p.phase_exp as i64))
            };
            let prod = st.mul(&a, &b).unwrap();
            assert!((&(&to_m(&a) * &to_m(&b)) - &to_m(&prod)).max_abs() < 1e-12);
            let dag = st.dagger(&a).unwrap();
            assert!((&to_m(&a).dagger() - &to_m(&dag)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn phase_bookkeeping_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let st = WeylStructure::new(vec![4, 3, 2]).unwrap();
        let order = st.phase_order();
        let rand_pw = |rng: &mut ChaCha8Rng| {
            let pairs: Vec<(i64, i64)> =
                st.factors().iter().map(|&d| (rng.gen_range(0..d as i64), rng.gen_range(0..d as i64))).collect();
            PhasedWeyl { label: st.label(&pairs).unwrap(), phase_exp: rng.gen_range(0..order) }
        };
        for _ in 0..1000 {
            let (a, b, c) = (rand_pw(&mut rng), rand_pw(&mut rng), rand_pw(&mut rng));
            let left = st.mul(&st.mul(&a, &b).unwrap(), &c).unwrap();
            let right = st.mul(&a, &st.mul(&b, &c).unwrap()).unwrap();
            assert_eq!(left, right);
            let id = st.mul(&a, &st.dagger(&a).unwrap()).unwrap();
            assert!(id.label.is_identity());
            assert_eq!(id.phase_exp, 0);
        }
    }

    #[test]
    fn commutation_exponents() {
        let st = WeylStructure::single(4).unwrap();
        let l = lbl(&st, 0, 1);
        assert_eq!(st.commutation_exponent(&l, &st.identity()).unwrap(), 0);
        assert_eq!(st.commutation_exponent(&l, &lbl(&st, 1, 0)).unwrap(), 1);
        assert_eq!(st.commutation_exponent(&lbl(&st, 1, 0), &l).unwrap(), 3);

        let q = WeylStructure::qubits(2).unwrap();
        let xx = q.label(&[(1, 0), (1, 0)]).unwrap();
        let zx = q.label(&[(0, 1), (1, 0)]).unwrap();
        assert_eq!(q.commutation_exponent(&xx, &zx).unwrap(), 1);
    }

    #[test]
    fn gamma_examples_for_gamma_4() {
        let set = single(4, &[(0, 0), (0, 1), (2, 0), (2, 3)]);
        let (st, _) = set.labels().unwrap();
        let st = st.clone();
        assert_eq!(gamma(&set, &st.identity()).unwrap(), CycNumber::from_integer(4, 4));
        assert!(gamma(&set, &lbl(&st, 0, 1)).unwrap().is_zero());
        assert_eq!(gamma(&set, &lbl(&st, 1, 0)).unwrap(), CycNumber::from_integer(4, 2));
    }

    #[test]
    fn closed_form_examples() {
        for t in 0..4 {
            assert!(gamma_closed_form_gamma_d(4, 2, t).unwrap().is_zero());
        }
        for s in 0..5 {
            for t in 0..5 {
                assert!(!gamma_closed_form_gamma_d(5, s, t).unwrap().is_zero(), "({s},{t})");
            }
        }
        assert!(gamma_closed_form_gamma_d(6, 3, 0).unwrap().is_zero());
        assert!(gamma_closed_form_gamma_d(3, 0, 0).is_err());
    }

    #[test]
    fn gamma_matches_matrix_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let d: u32 = rng.gen_range(2..=9);
            let n = rng.gen_range(1..=d as usize);
            let pairs: Vec<(i64, i64)> =
                (0..n).map(|_| (rng.gen_range(0..d as i64), rng.gen_range(0..d as i64))).collect();
            let set = single(d, &pairs);
            let (st, _) = set.labels().unwrap();
            let unitaries = set.unitaries();
            for u in st.all_labels() {
                let exact = gamma(&set, &u).unwrap().to_complex();
                let um = build_unitary(&u, st).unwrap();
                let numeric = gamma_numeric(&unitaries, &um);
                assert!((exact - numeric).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn difference_examples() {
        let one = single(5, &[(2, 3)]);
        assert!(difference_set(&one).unwrap().is_empty());

        let g4 = single(4, &[(0, 0), (0, 1), (2, 0), (2, 3)]);
        let st = WeylStructure::single(4).unwrap();
        let expect: BTreeSet<WeylLabel> =
            [(0, 1), (0, 3), (2, 0), (2, 1), (2, 2), (2, 3)].iter().map(|&(s, t)| lbl(&st, s, t)).collect();
        assert_eq!(difference_set(&g4).unwrap(), expect);
    }

    #[test]
    fn small_set_is_inconclusive() {
        let set = single(3, &[(0, 0), (0, 1)]);
        let r = criterion_verdict(&set).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(!r.kernel.iter().any(|l| l.is_identity()));
        assert!(!r.difference.iter().any(|l| l.is_identity()));
    }

    #[test]
    fn duplicates_are_rejected() {
        let set = single(3, &[(0, 0), (0, 0)]);
        assert!(matches!(criterion_verdict(&set), Err(Error::NotOrthogonal(_))));
        assert!(!check_orthogonality(&set, 1e-10).orthogonal);
    }

    #[test]
    fn matrix_sets_route_to_numeric() {
        let set = MesSet::from_matrices(vec![weyl_matrix(3, 0, 0), weyl_matrix(3, 1, 2)], 1e-10).unwrap();
        assert!(gamma(&set, &WeylLabel::identity(1)).is_err());
        let rep = numeric_criterion(&set, 1e-9).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
        assert!(check_orthogonality(&set, 1e-10).orthogonal);
        let bad = ComplexMatrix::identity(3).scale_real(2.0);
        assert!(matches!(MesSet::from_matrices(vec![bad], 1e-10), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn numeric_criterion_agrees_with_exact_on_quadruple() {
        let set = single(4, &[(0, 0), (1, 1), (1, 3), (2, 3)]);
        let exact = criterion_verdict(&set).unwrap();
        let mats = MesSet::from_matrices(set.unitaries(), 1e-10).unwrap();
        let num = numeric_criterion(&mats, 1e-9).unwrap();
        assert_eq!(num.kernel, exact.kernel);
        assert_eq!(num.difference, exact.difference);
        assert!(num.condition_holds);
    }

    proptest::proptest! {
        #[test]
        fn translation_leaves_sets_unchanged(
            d in 2u32..8,
            raw in proptest::collection::vec((0i64..8, 0i64..8), 1..6),
            shift in (0i64..8, 0i64..8),
        ) {
            let set = single(d, &raw);
            let (st, labels) = set.labels().unwrap();
            let g = st.label(&[shift]).unwrap();
            let moved: Vec<WeylLabel> = labels.iter().map(|l| st.add(&g, l)).collect();
            let moved = MesSet::from_labels(st.clone(), moved).unwrap();
            proptest::prop_assert_eq!(kernel_set(&set).unwrap(), kernel_set(&moved).unwrap());
            proptest::prop_assert_eq!(difference_set(&set).unwrap(), difference_set(&moved).unwrap());
            proptest::prop_assert_eq!(
                gamma(&set, &st.identity()).unwrap(),
                CycNumber::from_integer(st.phase_order(), labels.len() as i64)
            );
        }

        #[test]
        fn commutation_is_antisymmetric(a in (0i64..12, 0i64..12), b in (0i64..12, 0i64..12), d in 2u32..12) {
            let st = WeylStructure::single(d).unwrap();
            let (l, u) = (st.label(&[a]).unwrap(), st.label(&[b]).unwrap());
            let c1 = st.commutation_exponent(&l, &u).unwrap();
            let c2 = st.commutation_exponent(&u, &l).unwrap();
            proptest::prop_assert_eq!((c1 + c2) % d, 0);
            proptest::prop_assert_eq!(st.commutation_exponent(&l, &l).unwrap(), 0);
        }

        #[test]
        fn verdict_ignores_member_order(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = rng.gen_range(3u32..7);
            let st = WeylStructure::single(d).unwrap();
            let mut all = st.all_labels();
            let mut labels = Vec::new();
            for _ in 0..d {
                let i = rng.gen_range(0..all.len());
                labels.push(all.swap_remove(i));
            }
            let a = criterion_verdict(&MesSet::from_labels(st.clone(), labels.clone()).unwrap()).unwrap();
            labels.reverse();
            let b = criterion_verdict(&MesSet::from_labels(st, labels).unwrap()).unwrap();
            proptest::prop_assert_eq!(a.verdict, b.verdict);
            proptest::prop_assert_eq!(a.kernel, b.kernel);
        }
    }
}
