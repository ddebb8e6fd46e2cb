//! Witness operators for the antisymmetric Ξ family and the measurement-free
//! facts behind its separable indistinguishability: trace ledger, dominance,
//! positivity on product states, and the rank obstruction for odd primes.
//!
//! Operators on two copies of q ⊗ 2p are ordered (q_A, q_B, 2p_A, 2p_B); the
//! members of Ξ act on qubit ⊗ p ⊗ q, so states are permuted before comparison.

use std::collections::BTreeMap;

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::{
    build_l_v, factorization_params, is_prime, lp_sigma_labels, xi_member_matrices, xi_set, FactorParams, XiVariant,
};
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_basis, hermitian_eigen, hermitian_to_real, mes_vector, random, weyl_matrix, ComplexMatrix, StateVector,
    C64,
};

/// Swap |i, j⟩ ↦ |j, i⟩ on n ⊗ n.
pub fn swap_operator(n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n * n, n * n, |r, c| {
        let (i, j) = (c / n, c % n);
        if r == j * n + i {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// P_q = Σ_n |n, n⟩⟨n, n|.
pub fn diagonal_projector(q: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(
        q * q,
        q * q,
        |r, c| {
            if r == c && r / q == r % q {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        },
    )
}

#[derive(Clone, Debug)]
pub struct WitnessOperator {
    /// (s, t) with V = X_p^s Z_p^t.
    pub v: (u32, u32),
    pub l_v: ComplexMatrix,
    /// H_{L_V} = A_2p − ψ_{L_V}.
    pub h: ComplexMatrix,
}

#[derive(Clone, Debug)]
pub struct WitnessOperators {
    pub params: FactorParams,
    pub p_q: ComplexMatrix,
    pub a_2p: ComplexMatrix,
    pub v_2p: ComplexMatrix,
    pub h_of: Vec<WitnessOperator>,
    /// H_2d = P_q ⊗ A_2p.
    pub h_2d: ComplexMatrix,
    pub trace_h_2d: Rational64,
}

const STRUCT_TOL: f64 = 1e-12;

impl WitnessOperators {
    pub fn new(d: usize) -> Result<Self> {
        let params = factorization_params(d)?;
        let FactorParams { p, q, sigma, .. } = params;
        let n = 2 * p;
        let v_2p = swap_operator(n);
        let a_2p = (&ComplexMatrix::identity(n * n) - &v_2p).scale_real(1.0 / n as f64);
        let p_q = diagonal_projector(q);
        let h_of = lp_sigma_labels(p, sigma)
            .into_iter()
            .map(|v| {
                let l_v = build_l_v(&weyl_matrix(p, v.0, v.1))?;
                let h = &a_2p - &mes_vector(&l_v)?.projector();
                Ok(WitnessOperator { v, l_v, h })
            })
            .collect::<Result<Vec<_>>>()?;
        let h_2d = p_q.kron(&a_2p);
        // Tr P_q · Tr A_2p with Tr A_2p = (n² − n)/n
        let trace_h_2d = Rational64::from_integer(q as i64) * Rational64::new((n * n - n) as i64, n as i64);
        let ops = WitnessOperators { params, p_q, a_2p, v_2p, h_of, h_2d, trace_h_2d };
        ops.validate()?;
        Ok(ops)
    }

    /// A_2p Hermitian with A² = A/p (spectrum in {0, 1/p}), P_q² = P_q, and
    /// the exact trace matching the dense one.
    fn validate(&self) -> Result<()> {
        let p = self.params.p as f64;
        let a = &self.a_2p;
        if a.hermitian_deviation() > STRUCT_TOL || (&(a * a) - &a.scale_real(1.0 / p)).max_abs() > STRUCT_TOL {
            return Err(Error::Consistency("A_2p is not (1/p) times a projector".into()));
        }
        if (&(&self.p_q * &self.p_q) - &self.p_q).max_abs() > STRUCT_TOL {
            return Err(Error::Consistency("P_q is not a projector".into()));
        }
        let exact = *self.trace_h_2d.numer() as f64 / *self.trace_h_2d.denom() as f64;
        if (self.h_2d.trace().re - exact).abs() > 1e-9 {
            return Err(Error::Consistency("dense trace of H_2d disagrees with the exact value".into()));
        }
        for w in &self.h_of {
            if (&w.l_v.transpose() + &w.l_v).max_abs() > STRUCT_TOL {
                return Err(Error::Consistency(format!("L_V for V = {:?} is not antisymmetric", w.v)));
            }
        }
        Ok(())
    }

    pub fn h_for(&self, v: (u32, u32)) -> Result<&WitnessOperator> {
        self.h_of
            .iter()
            .find(|w| w.v == v)
            .ok_or_else(|| Error::invalid(format!("V = X^{} Z^{} is not a generator of this family", v.0, v.1)))
    }

    /// P_q ⊗ H_{L_V} on (q_A, q_B, 2p_A, 2p_B).
    pub fn block_operator(&self, v: (u32, u32)) -> Result<ComplexMatrix> {
        Ok(self.p_q.kron(&self.h_for(v)?.h))
    }

    /// 2p·⟨x⊗y|H_{L_V}|x⊗y⟩ evaluated from the operator and from
    /// 1 − |⟨x|y⟩|² − |⟨x|L_V|y*⟩|².
    pub fn product_value(&self, x: &StateVector, y: &StateVector, v: (u32, u32)) -> Result<TwoSided> {
        let w = self.h_for(v)?;
        let n = 2 * self.params.p;
        check_len(x, n)?;
        check_len(y, n)?;
        let operator = w.h.expectation(&x.kron(y))?.re * n as f64;
        let formula = scalar_formula(x, y, &w.l_v)?;
        Ok(TwoSided { operator, formula })
    }

    /// ⟨z⊗w|P_q ⊗ H_{L_V}|z⊗w⟩ for z, w on q ⊗ 2p, evaluated densely and as
    /// Σ_n ⟨x_n⊗y_n|H_{L_V}|x_n⊗y_n⟩ over the unnormalized blocks z = Σ|n⟩|x_n⟩.
    pub fn block_product_value(&self, z: &StateVector, w: &StateVector, v: (u32, u32)) -> Result<TwoSided> {
        let op = self.block_operator(v)?;
        self.block_product_value_with(z, w, v, &op)
    }

    fn block_product_value_with(
        &self,
        z: &StateVector,
        w: &StateVector,
        v: (u32, u32),
        op: &ComplexMatrix,
    ) -> Result<TwoSided> {
        let FactorParams { p, q, .. } = self.params;
        let n = 2 * p;
        check_len(z, q * n)?;
        check_len(w, q * n)?;
        let zw = z.kron(w).permute_subsystems(&[q, n, q, n], &[0, 2, 1, 3])?;
        let operator = op.expectation(&zw)?.re;
        let l_v = &self.h_for(v)?.l_v;
        let mut formula = 0.0;
        for k in 0..q {
            let xk = StateVector::new(z.amps[k * n..(k + 1) * n].to_vec());
            let yk = StateVector::new(w.amps[k * n..(k + 1) * n].to_vec());
            formula += scalar_formula(&xk, &yk, l_v)? / n as f64;
        }
        Ok(TwoSided { operator, formula })
    }
}

fn check_len(v: &StateVector, n: usize) -> Result<()> {
    if v.dim() != n {
        return Err(Error::DimensionMismatch(format!("state of dimension {}, expected {n}", v.dim())));
    }
    Ok(())
}

/// ‖x‖²‖y‖² − |⟨x|y⟩|² − |⟨x|L|y*⟩|².
fn scalar_formula(x: &StateVector, y: &StateVector, l: &ComplexMatrix) -> Result<f64> {
    let ly = l.apply(&y.conjugate())?;
    let nx = x.inner(x).re;
    let ny = y.inner(y).re;
    Ok(nx * ny - x.inner(y).norm_sqr() - x.inner(&ly).norm_sqr())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoSided {
    pub operator: f64,
    pub formula: f64,
}

impl TwoSided {
    pub fn gap(&self) -> f64 {
        (self.operator - self.formula).abs()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DominanceMember {
    pub n: usize,
    pub v: (u32, u32),
    pub min_eigenvalue: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DominanceReport {
    pub d: usize,
    pub members: Vec<DominanceMember>,
    pub holds: bool,
}

/// P_q ⊗ ψ_{L_V} − ψ_U ⪰ 0 for every member U = L_V ⊗ Z_q^n of Ξ (ExtraOnce).
pub fn dominance_check(d: usize) -> Result<DominanceReport> {
    let xi = xi_set(d, XiVariant::ExtraOnce)?;
    let FactorParams { p, q, .. } = xi.params;
    let n = 2 * p;
    let p_q = diagonal_projector(q);
    let members = xi
        .member_labels
        .par_iter()
        .map(|m| {
            let (l_v, zq) = xi_member_matrices(p, q, m)?;
            let psi_u = mes_vector(&l_v.kron(&zq))?.projector();
            // (q_A, q_B, 2p_A, 2p_B) → (2p_A, q_A, 2p_B, q_B)
            let dominating =
                p_q.kron(&mes_vector(&l_v)?.projector()).permute_subsystems(&[q, q, n, n], &[2, 0, 3, 1])?;
            let min_eigenvalue = hermitian_eigen(&(&dominating - &psi_u))?.min();
            Ok(DominanceMember { n: m.n, v: m.v, min_eigenvalue })
        })
        .collect::<Result<Vec<_>>>()?;
    let holds = members.iter().all(|m| m.min_eigenvalue >= -1e-10);
    Ok(DominanceReport { d, members, holds })
}

#[derive(Clone, Debug, Serialize)]
pub struct ContradictionLedger {
    pub d: usize,
    pub p: usize,
    pub q: usize,
    pub sigma: usize,
    pub k_sigma: usize,
    pub xi_size: usize,
    pub full_product_size: usize,
    pub trace_h_2d: i64,
    pub k_sigma_minus_trace: i64,
    pub consistent: bool,
}

/// |Ξ| = k_σ, Tr H_2d = 2d − q and k_σ − Tr H_2d = σ.
pub fn contradiction_ledger(d: usize) -> Result<ContradictionLedger> {
    let ops = WitnessOperators::new(d)?;
    let xi = xi_set(d, XiVariant::ExtraOnce)?;
    let FactorParams { p, q, sigma, k_sigma } = ops.params;
    if !ops.trace_h_2d.is_integer() {
        return Err(Error::Consistency(format!("Tr H_2d = {} is not an integer", ops.trace_h_2d)));
    }
    let trace = ops.trace_h_2d.to_integer();
    let k_sigma_minus_trace = k_sigma as i64 - trace;
    let consistent = xi.len() == k_sigma && trace == (2 * d - q) as i64 && k_sigma_minus_trace == sigma as i64;
    Ok(ContradictionLedger {
        d,
        p,
        q,
        sigma,
        k_sigma,
        xi_size: xi.len(),
        full_product_size: xi.full_product_size(),
        trace_h_2d: trace,
        k_sigma_minus_trace,
        consistent,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport {
    pub d: usize,
    pub samples: usize,
    pub seed: u64,
    pub min_product_value: f64,
    pub max_product_gap: f64,
    pub min_block_value: f64,
    pub max_block_gap: f64,
}

/// Random product states x⊗y and z⊗w against randomly chosen generators.
/// Sample i uses stream i of a ChaCha8 generator seeded with `seed`.
pub fn positivity_sampling(d: usize, samples: usize, seed: u64) -> Result<PositivityReport> {
    let ops = WitnessOperators::new(d)?;
    let FactorParams { p, q, .. } = ops.params;
    let n = 2 * p;
    let blocks: BTreeMap<(u32, u32), ComplexMatrix> =
        ops.h_of.iter().map(|w| Ok((w.v, ops.block_operator(w.v)?))).collect::<Result<_>>()?;
    let gens: Vec<(u32, u32)> = blocks.keys().copied().collect();
    let results = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let v = gens[rng.gen_range(0..gens.len())];
            let x = random::state(&mut rng, n);
            // a quarter of the samples take y = x, where the value is exactly 0
            let y = match i % 4 {
                1 => x.clone(),
                _ => random::state(&mut rng, n),
            };
            let single = ops.product_value(&x, &y, v)?;
            let z = random::state(&mut rng, q * n);
            let w = random::state(&mut rng, q * n);
            let block = ops.block_product_value_with(&z, &w, v, &blocks[&v])?;
            Ok((single, block))
        })
        .collect::<Result<Vec<_>>>()?;
    let fold = |f: fn(&(TwoSided, TwoSided)) -> f64, init: f64, min: bool| {
        results.iter().map(f).fold(init, |a, b| if min { a.min(b) } else { a.max(b) })
    };
    Ok(PositivityReport {
        d,
        samples,
        seed,
        min_product_value: fold(|r| r.0.operator.min(r.0.formula), f64::INFINITY, true),
        max_product_gap: fold(|r| r.0.gap(), 0.0, false),
        min_block_value: fold(|r| r.1.operator.min(r.1.formula), f64::INFINITY, true),
        max_block_gap: fold(|r| r.1.gap(), 0.0, false),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactKind {
    /// R_{a,a+o} = 0 for every a.
    Zero,
    /// |R_{a,a+o}|² = r² for every a.
    FullModulus,
}

impl FactKind {
    fn complement(self) -> FactKind {
        match self {
            FactKind::Zero => FactKind::FullModulus,
            FactKind::FullModulus => FactKind::Zero,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ObstructionFact {
    pub step: usize,
    /// Offset o (mod p) of the entries R_{a,a+o} the fact is about.
    pub offset: usize,
    pub kind: FactKind,
    /// Principal minor {0, m, m+1} (for a = 0) the fact was read from; None for hypotheses.
    pub minor: Option<[usize; 3]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Conflict {
    pub step: usize,
    pub offset: usize,
}

/// Replay of the rank-≤2 argument on a Hermitian p×p matrix R with constant
/// diagonal r and vanishing first off-diagonal.
#[derive(Clone, Debug, Serialize)]
pub struct RankObstructionTrace {
    pub p: usize,
    pub facts: Vec<ObstructionFact>,
    /// Step j at which the offsets −2j and 2j + 1 coincide.
    pub contradiction_index: usize,
    pub contradiction_offset: usize,
    /// Earliest step at which any new fact contradicted an earlier one.
    pub first_conflict: Option<Conflict>,
    pub contradiction: bool,
}

/// Records facts about offsets, mirrored through o ↦ −o by Hermiticity.
struct FactBook {
    p: usize,
    known: BTreeMap<usize, FactKind>,
    facts: Vec<ObstructionFact>,
    first_conflict: Option<Conflict>,
}

impl FactBook {
    fn record(&mut self, step: usize, offset: i64, kind: FactKind, minor: Option<[usize; 3]>) {
        let p = self.p as i64;
        let o = offset.rem_euclid(p) as usize;
        self.facts.push(ObstructionFact { step, offset: o, kind, minor });
        for key in [o, (p as usize - o) % p as usize] {
            match self.known.get(&key) {
                Some(&prev) if prev != kind => {
                    if self.first_conflict.is_none() {
                        self.first_conflict = Some(Conflict { step, offset: key });
                    }
                }
                Some(_) => {}
                None => {
                    self.known.insert(key, kind);
                }
            }
        }
    }

    /// Minor {a, a+m, a+m+1} with R_{a+m,a+m+1} = 0 forces |R_m|² + |R_{m+1}|² = r².
    fn propagate(&mut self, step: usize, m: i64, at_m: FactKind) -> FactKind {
        let kind = at_m.complement();
        let p = self.p as i64;
        let minor = [0, m.rem_euclid(p) as usize, (m + 1).rem_euclid(p) as usize];
        self.record(step, m + 1, kind, Some(minor));
        kind
    }
}

pub fn rank_obstruction(p: usize) -> Result<RankObstructionTrace> {
    if p < 3 || !is_prime(p) {
        return Err(Error::invalid(format!("rank obstruction needs an odd prime, got {p}")));
    }
    let j_p = ((p * p - 1) / 4) % p;
    let mut book = FactBook { p, known: BTreeMap::new(), facts: Vec::new(), first_conflict: None };
    book.record(0, 0, FactKind::FullModulus, None);
    book.record(0, 1, FactKind::Zero, None);
    let mut contradiction = false;
    let mut contradiction_offset = 0;
    let mut chain = FactKind::Zero;
    for j in 1..p {
        // offset 2j from 2j − 1, then 2j + 1 from 2j; the first is mirrored to −2j
        chain = book.propagate(j, 2 * j as i64 - 1, chain);
        book.record(j, -2 * j as i64, chain, None);
        chain = book.propagate(j, 2 * j as i64, chain);
        let (lo, hi) = ((-2 * j as i64).rem_euclid(p as i64), (2 * j as i64 + 1).rem_euclid(p as i64));
        if lo == hi {
            if j != j_p {
                return Err(Error::Consistency(format!("offsets coincide at j = {j}, expected {j_p}")));
            }
            contradiction = true;
            contradiction_offset = lo as usize;
            break;
        }
    }
    if j_p == 0 || !(4 * j_p + 1).is_multiple_of(p) {
        return Err(Error::Consistency(format!("j_p = {j_p} does not solve 4j = −1 mod {p}")));
    }
    Ok(RankObstructionTrace {
        p,
        facts: book.facts,
        contradiction_index: j_p,
        contradiction_offset,
        first_conflict: book.first_conflict,
        contradiction,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FalsifierReport {
    pub p: usize,
    pub samples: usize,
    pub seed: u64,
    pub iterations: usize,
    /// Samples with residual < 1e−6 and trace > 1e−3.
    pub counterexamples: usize,
    /// Smallest constraint residual among samples keeping trace > 1e−3.
    pub min_residual: f64,
    /// Smallest max(residual, 1 − trace) over samples.
    pub min_score: f64,
    /// Residual of the full-rank control R = I/p.
    pub full_rank_control_residual: f64,
    /// Heuristic search, not a proof.
    pub evidence_only: bool,
}

/// Orthonormalized rows (Gram–Schmidt) of real functionals.
fn orthonormal_rows(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for r in rows {
        let mut v = r.clone();
        for u in &out {
            let dot: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-10 {
            out.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    out
}

/// Real functionals Re/Im Tr(R V) for V ∈ ℒ_p^0 ∖ {I}.
fn falsifier_constraints(p: usize) -> Vec<Vec<f64>> {
    let basis = hermitian_basis(p);
    lp_sigma_labels(p, 0)
        .into_iter()
        .filter(|&v| v != (0, 0))
        .flat_map(|(s, t)| {
            let v = weyl_matrix(p, s, t);
            let vals: Vec<C64> = basis.iter().map(|b| (b * &v).trace()).collect();
            [vals.iter().map(|z| z.re).collect::<Vec<f64>>(), vals.iter().map(|z| z.im).collect()]
        })
        .collect()
}

fn residual(rows: &[Vec<f64>], x: &[f64]) -> f64 {
    rows.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>().abs()).fold(0.0, f64::max)
}

fn truncate_rank2(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let e = hermitian_eigen(m)?;
    let n = e.values.len();
    let mut out = ComplexMatrix::zeros(m.rows(), m.cols());
    for k in n.saturating_sub(2)..n {
        let lambda = e.values[k].max(0.0);
        if lambda > 0.0 {
            let v = e.vector(k);
            out = &out + &v.projector().scale_real(lambda);
        }
    }
    Ok(out)
}

/// Alternating projections between {Hermitian R : Tr R = 1, Tr(R V) = 0 for
/// V ∈ ℒ_p^0 ∖ {I}} and rank-≤2 PSD matrices, from random rank-2 starts.
pub fn rank2_falsifier(p: usize, samples: usize, seed: u64, iterations: usize) -> Result<FalsifierReport> {
    if p < 3 || !is_prime(p) {
        return Err(Error::invalid(format!("falsifier needs an odd prime, got {p}")));
    }
    let constraints = falsifier_constraints(p);
    let trace_row = hermitian_to_real(&ComplexMatrix::identity(p));
    let mut affine_rows = constraints.clone();
    affine_rows.push(trace_row.clone());
    let ortho = orthonormal_rows(&affine_rows);
    // a point of the affine set: I/p
    let anchor = hermitian_to_real(&ComplexMatrix::identity(p).scale_real(1.0 / p as f64));
    let project_affine = |x: &[f64]| -> Vec<f64> {
        let mut diff: Vec<f64> = x.iter().zip(&anchor).map(|(a, b)| a - b).collect();
        for u in &ortho {
            let dot: f64 = diff.iter().zip(u).map(|(a, b)| a * b).sum();
            diff.iter_mut().zip(u).for_each(|(a, b)| *a -= dot * b);
        }
        diff.iter().zip(&anchor).map(|(a, b)| a + b).collect()
    };
    let control = residual(&constraints, &anchor);

    let outcomes = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut r = random::psd(&mut rng, p, 2);
            r = r.scale_real(1.0 / r.trace().re);
            for _ in 0..iterations {
                let x = project_affine(&hermitian_to_real(&r));
                r = truncate_rank2(&crate::linalg::real_to_hermitian(&x, p))?;
            }
            let x = hermitian_to_real(&r);
            Ok((residual(&constraints, &x), r.trace().re))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;

    let counterexamples = outcomes.iter().filter(|(res, tr)| *res < 1e-6 && *tr > 1e-3).count();
    let min_residual = outcomes.iter().filter(|(_, tr)| *tr > 1e-3).map(|(res, _)| *res).fold(f64::INFINITY, f64::min);
    let min_score = outcomes.iter().map(|(res, tr)| res.max(1.0 - tr)).fold(f64::INFINITY, f64::min);
    Ok(FalsifierReport {
        p,
        samples,
        seed,
        iterations,
        counterexamples,
        min_residual,
        min_score,
        full_rank_control_residual: control,
        evidence_only: true,
    })
}
