//! First-move analysis: the space of Hermitian operators M on one party such
//! that (√M ⊗ I) keeps every pair of states orthogonal. If that space is
//! spanned by the identity for both parties, no finite local protocol can
//! start without destroying orthogonality.

use serde::Serialize;

use crate::constructions::ProductStateSet;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_to_real, mes_vector, nullspace_real, real_to_hermitian, trace_functionals, ComplexMatrix, StateVector,
};
use crate::weyl::{MesSet, Verdict};

pub const RANK_THRESHOLD: f64 = 1e-8;
const ORTHOGONALITY_TOL: f64 = 1e-10;
const OVERLAP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Alice,
    Bob,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Alice => Party::Bob,
            Party::Bob => Party::Alice,
        }
    }
}

#[derive(Clone, Debug)]
pub enum BipartiteStates {
    Product(ProductStateSet),
    Mes(MesSet),
}

impl BipartiteStates {
    pub fn local_dim(&self) -> usize {
        match self {
            BipartiteStates::Product(p) => p.dim,
            BipartiteStates::Mes(m) => m.dim(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            BipartiteStates::Product(p) => p.len(),
            BipartiteStates::Mes(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Full state vectors on A ⊗ B.
    pub fn vectors(&self) -> Result<Vec<StateVector>> {
        match self {
            BipartiteStates::Product(p) => Ok(p.vectors()),
            BipartiteStates::Mes(m) => m.unitaries().iter().map(mes_vector).collect(),
        }
    }
}

/// Operators A_rs with ⟨v_r|(M ⊗ I)|v_s⟩ ∝ Tr(M A_rs) (or I ⊗ M for Bob), r < s.
/// Product pairs whose other-party overlap vanishes contribute nothing.
fn constraint_operators(states: &BipartiteStates, party: Party) -> Result<Vec<ComplexMatrix>> {
    let mut out = Vec::new();
    match states {
        BipartiteStates::Product(set) => {
            for (r, (ar, br)) in set.pairs.iter().enumerate() {
                for (s, (as_, bs)) in set.pairs.iter().enumerate().skip(r + 1) {
                    let (own_r, own_s, other) = match party {
                        Party::Alice => (ar, as_, br.inner(bs)),
                        Party::Bob => (br, bs, ar.inner(as_)),
                    };
                    let full = ar.inner(as_) * br.inner(bs);
                    if full.norm() >= ORTHOGONALITY_TOL {
                        return Err(Error::NotOrthogonal(format!("states {r} and {s} overlap by {:.3e}", full.norm())));
                    }
                    if other.norm() > OVERLAP_TOL {
                        // ⟨own_r|M|own_s⟩ = Tr(M |own_s⟩⟨own_r|)
                        out.push(own_s.outer(own_r));
                    }
                }
            }
        }
        BipartiteStates::Mes(set) => {
            let us = set.unitaries();
            let d = set.dim() as f64;
            for (r, ur) in us.iter().enumerate() {
                for (s, us_) in us.iter().enumerate().skip(r + 1) {
                    let overlap = (us_ * &ur.dagger()).trace().norm() / d;
                    if overlap >= ORTHOGONALITY_TOL {
                        return Err(Error::NotOrthogonal(format!("members {r} and {s} overlap by {overlap:.3e}")));
                    }
                    out.push(match party {
                        // Tr(L_r† M L_s) = Tr(M L_s L_r†)
                        Party::Alice => us_ * &ur.dagger(),
                        // Tr(L_r† L_s M^T) = Tr(M (L_r† L_s)^T)
                        Party::Bob => (&ur.dagger() * us_).transpose(),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Real linear functionals (against the Hermitian coordinate basis) whose common
/// kernel is the set of orthogonality-preserving M for `party`.
pub fn orthogonality_constraints(states: &BipartiteStates, party: Party) -> Result<Vec<Vec<f64>>> {
    Ok(constraint_operators(states, party)?.iter().flat_map(trace_functionals).collect())
}

/// M = I + εH with ε = 1/(2‖H‖): a non-scalar PSD solution.
#[derive(Clone, Debug)]
pub struct FirstMoveWitness {
    pub operator: ComplexMatrix,
    pub epsilon: f64,
    /// Largest off-diagonal |⟨v_r|(M ⊗ I)|v_s⟩| after the move.
    pub max_gram_offdiag: f64,
}

#[derive(Clone, Debug)]
pub struct FirstMoveReport {
    pub party: Party,
    pub solution_dim: usize,
    pub basis: Vec<ComplexMatrix>,
    pub nontrivial_exists: bool,
    pub witness: Option<FirstMoveWitness>,
}

fn apply_local(v: &StateVector, m: &ComplexMatrix, party: Party) -> Result<StateVector> {
    let d = m.rows();
    let op = match party {
        Party::Alice => m.kron(&ComplexMatrix::identity(d)),
        Party::Bob => ComplexMatrix::identity(d).kron(m),
    };
    op.apply(v)
}

pub fn first_move_report(states: &BipartiteStates, party: Party) -> Result<FirstMoveReport> {
    let n = states.local_dim();
    let constraints = orthogonality_constraints(states, party)?;
    let basis: Vec<ComplexMatrix> =
        nullspace_real(&constraints, n * n, RANK_THRESHOLD).iter().map(|x| real_to_hermitian(x, n)).collect();
    let solution_dim = basis.len();
    let nontrivial_exists = solution_dim > 1;
    let witness = if nontrivial_exists { Some(build_witness(states, party, &basis)?) } else { None };
    Ok(FirstMoveReport { party, solution_dim, basis, nontrivial_exists, witness })
}

fn build_witness(states: &BipartiteStates, party: Party, basis: &[ComplexMatrix]) -> Result<FirstMoveWitness> {
    let n = states.local_dim();
    let id = ComplexMatrix::identity(n);
    // traceless parts; the largest one is certainly non-scalar
    let h = basis
        .iter()
        .map(|b| b - &id.scale(b.trace() / n as f64))
        .max_by(|a, b| a.frobenius_norm().total_cmp(&b.frobenius_norm()))
        .expect("solution space has dimension > 1");
    let norm = h.spectral_norm_hermitian()?;
    if norm <= RANK_THRESHOLD {
        return Err(Error::Consistency("solution space has no non-scalar element".into()));
    }
    let epsilon = 1.0 / (2.0 * norm);
    let operator = &id + &h.scale_real(epsilon);
    let root = operator.psd_sqrt()?;
    let moved = states.vectors()?.iter().map(|v| apply_local(v, &root, party)).collect::<Result<Vec<StateVector>>>()?;
    let mut max_gram_offdiag = 0.0f64;
    for (r, a) in moved.iter().enumerate() {
        for b in &moved[r + 1..] {
            max_gram_offdiag = max_gram_offdiag.max(a.inner(b).norm());
        }
    }
    if max_gram_offdiag > 1e-9 {
        return Err(Error::Consistency(format!("first-move witness disturbs orthogonality by {max_gram_offdiag:.3e}")));
    }
    Ok(FirstMoveWitness { operator, epsilon, max_gram_offdiag })
}

#[derive(Clone, Debug)]
pub struct SymmetryVerdict {
    pub alice: FirstMoveReport,
    pub bob: FirstMoveReport,
    pub verdict: Verdict,
}

/// Certified iff neither party has a nontrivial orthogonality-preserving first move.
pub fn locally_indistinguishable_by_symmetry(states: &BipartiteStates) -> Result<SymmetryVerdict> {
    let alice = first_move_report(states, Party::Alice)?;
    let bob = first_move_report(states, Party::Bob)?;
    let verdict = if !alice.nontrivial_exists && !bob.nontrivial_exists {
        Verdict::CertifiedLoccIndistinguishable
    } else {
        Verdict::Inconclusive
    };
    Ok(SymmetryVerdict { alice, bob, verdict })
}

/// Residual max |functional(M)| of a Hermitian M under a constraint system.
pub fn constraint_residual(constraints: &[Vec<f64>], m: &ComplexMatrix) -> f64 {
    let x = hermitian_to_real(m);
    constraints.iter().map(|c| c.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>().abs()).fold(0.0, f64::max)
}
