//! Factories for the state families: product sets, Weyl MES families, the
//! named small examples, and the antisymmetric Ξ construction in dimension 2d.

use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{weyl_matrix, ComplexMatrix, StateVector, C64};
use crate::weyl::{MesSet, WeylStructure};

/// Orthogonal bipartite product states a_r ⊗ b_r on d ⊗ d.
#[derive(Clone, Debug)]
pub struct ProductStateSet {
    pub name: Option<String>,
    pub dim: usize,
    pub pairs: Vec<(StateVector, StateVector)>,
    pub extension: Option<Vec<(StateVector, StateVector)>>,
}

impl ProductStateSet {
    pub fn new(dim: usize, pairs: Vec<(StateVector, StateVector)>) -> Result<Self> {
        for (i, (a, b)) in pairs.iter().enumerate() {
            if a.dim() != dim || b.dim() != dim {
                return Err(Error::DimensionMismatch(format!(
                    "product state {i} has local dimensions {}x{}, expected {dim}",
                    a.dim(),
                    b.dim()
                )));
            }
        }
        Ok(ProductStateSet { name: None, dim, pairs, extension: None })
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The base states followed by the extension states, as a plain set.
    pub fn extended(&self) -> ProductStateSet {
        let mut pairs = self.pairs.clone();
        pairs.extend(self.extension.iter().flatten().cloned());
        let name = self.name.as_ref().map(|n| format!("{n}_extended"));
        ProductStateSet { name, dim: self.dim, pairs, extension: None }
    }

    /// max |⟨a_r|a_s⟩⟨b_r|b_s⟩| over r ≠ s.
    pub fn max_overlap(&self) -> f64 {
        let mut worst = 0.0f64;
        for (r, (ar, br)) in self.pairs.iter().enumerate() {
            for (as_, bs) in &self.pairs[r + 1..] {
                worst = worst.max((ar.inner(as_) * br.inner(bs)).norm());
            }
        }
        worst
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        self.max_overlap() < tol
    }

    /// Full vectors a_r ⊗ b_r.
    pub fn vectors(&self) -> Vec<StateVector> {
        self.pairs.iter().map(|(a, b)| a.kron(b)).collect()
    }
}

fn ket(d: usize, entries: &[(usize, f64)]) -> StateVector {
    let mut amps = vec![C64::new(0.0, 0.0); d];
    for &(k, v) in entries {
        amps[k] += C64::new(v, 0.0);
    }
    StateVector::new(amps).normalized()
}

/// n₊ = n + 1 for 1 ≤ n ≤ d − 2 and (d − 1)₊ = 1.
pub fn n_plus(n: usize, d: usize) -> usize {
    if n == d - 1 {
        1
    } else {
        n + 1
    }
}

/// {|n⟩⊗|δ_n⟩} ∪ {|δ_n⟩⊗|n₊⟩} ∪ {|θ₀⟩⊗|θ₀⟩} with |δ_n⟩ ∝ |n⟩ − |0⟩ and |θ₀⟩ ∝ Σ|j⟩.
/// For d ≥ 4 the extension (|0⟩ + |n⟩ − 2|(n₊)₊⟩) ⊗ |n₊⟩ is attached.
pub fn shifted_product_set(d: usize) -> Result<ProductStateSet> {
    if d < 3 {
        return Err(Error::invalid(format!("product family needs d >= 3, got {d}")));
    }
    let delta = |n: usize| ket(d, &[(n, 1.0), (0, -1.0)]);
    let theta = ket(d, &(0..d).map(|j| (j, 1.0)).collect::<Vec<_>>());
    let mut pairs = Vec::with_capacity(2 * d - 1);
    for n in 1..d {
        pairs.push((StateVector::basis(d, n), delta(n)));
    }
    for n in 1..d {
        pairs.push((delta(n), StateVector::basis(d, n_plus(n, d))));
    }
    pairs.push((theta.clone(), theta));
    let mut set = ProductStateSet::new(d, pairs)?.named(format!("product_d{d}"));
    if d >= 4 {
        let ext = (1..d)
            .map(|n| {
                let np = n_plus(n, d);
                let npp = n_plus(np, d);
                (ket(d, &[(0, 1.0), (n, 1.0), (npp, -2.0)]), StateVector::basis(d, np))
            })
            .collect();
        set.extension = Some(ext);
    }
    Ok(set)
}

/// k = ⌊d/2⌋ + 1 MESs {I, Z, …, Z^{k−1}} with one product state |1⟩⊗|0⟩.
#[derive(Clone, Debug)]
pub struct MixedFamily {
    pub d: usize,
    pub k: usize,
    pub members: MesSet,
    pub product_state: (StateVector, StateVector),
    /// Weight a of each MES.
    pub weight_mes: Rational64,
    /// Weight b of the product state.
    pub weight_product: Rational64,
}

pub fn mixed_family(d: usize) -> Result<MixedFamily> {
    if d < 3 {
        return Err(Error::invalid(format!("mixed family needs d >= 3, got {d}")));
    }
    let k = d / 2 + 1;
    let b = Rational64::new(d as i64, (4 * k - d) as i64);
    let a = (Rational64::from_integer(1) - b) / Rational64::from_integer(k as i64);
    let structure = WeylStructure::single(d as u32)?;
    let labels = (0..k as i64).map(|r| structure.label(&[(0, r)])).collect::<Result<Vec<_>>>()?;
    let members = MesSet::from_labels(structure, labels)?.named(format!("mixed_d{d}"));
    Ok(MixedFamily {
        d,
        k,
        members,
        product_state: (StateVector::basis(d, 1), StateVector::basis(d, 0)),
        weight_mes: a,
        weight_product: b,
    })
}

/// Γ_d = {I, Z, …, Z^{d−3}, X^{⌊d/2⌋}, X^{−⌊d/2⌋} Z^{−1}}.
pub fn gamma_d_set(d: usize) -> Result<MesSet> {
    if d < 4 {
        return Err(Error::invalid(format!("gamma_d needs d >= 4, got {d}")));
    }
    let structure = WeylStructure::single(d as u32)?;
    let h = (d / 2) as i64;
    let mut pairs: Vec<(i64, i64)> = (0..d as i64 - 2).map(|t| (0, t)).collect();
    pairs.push((h, 0));
    pairs.push((-h, -1));
    let labels = pairs.iter().map(|&p| structure.label(&[p])).collect::<Result<Vec<_>>>()?;
    Ok(MesSet::from_labels(structure, labels)?.named(format!("gamma_d{d}")))
}

/// Γ_e = {I, Z, …, Z^{d−2}, X^{d/2}} for even d.
pub fn gamma_e_set(d: usize) -> Result<MesSet> {
    if d < 4 || !d.is_multiple_of(2) {
        return Err(Error::invalid(format!("gamma_e needs even d >= 4, got {d}")));
    }
    let structure = WeylStructure::single(d as u32)?;
    let mut pairs: Vec<(i64, i64)> = (0..d as i64 - 1).map(|t| (0, t)).collect();
    pairs.push(((d / 2) as i64, 0));
    let labels = pairs.iter().map(|&p| structure.label(&[p])).collect::<Result<Vec<_>>>()?;
    Ok(MesSet::from_labels(structure, labels)?.named(format!("gamma_e{d}")))
}

pub const NAMED_EXAMPLES: [&str; 3] = ["quintuple5", "quadrupleBGK", "pauliL4"];

pub fn named_example(name: &str) -> Result<MesSet> {
    let (factors, members): (Vec<u32>, Vec<Vec<(i64, i64)>>) = match name {
        "quintuple5" => (vec![5], vec![vec![(0, 0)], vec![(1, 1)], vec![(1, 2)], vec![(3, 1)], vec![(3, 2)]]),
        "quadrupleBGK" => (vec![4], vec![vec![(0, 0)], vec![(1, 1)], vec![(1, 3)], vec![(2, 3)]]),
        // 𝟙𝟙, 𝒳𝒳, 𝒴𝒳 (∝ XZ ⊗ X), 𝒵𝒳
        "pauliL4" => {
            (vec![2, 2], vec![vec![(0, 0), (0, 0)], vec![(1, 0), (1, 0)], vec![(1, 1), (1, 0)], vec![(0, 1), (1, 0)]])
        }
        other => {
            return Err(Error::invalid(format!(
                "unknown example '{other}', expected one of {}",
                NAMED_EXAMPLES.join(", ")
            )))
        }
    };
    let structure = WeylStructure::new(factors)?;
    let labels = members.iter().map(|m| structure.label(m)).collect::<Result<Vec<_>>>()?;
    Ok(MesSet::from_labels(structure, labels)?.named(name))
}

/// d = p·q with p the smallest prime factor and q the largest proper divisor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FactorParams {
    pub p: usize,
    pub q: usize,
    pub sigma: usize,
    pub k_sigma: usize,
}

pub fn smallest_prime_factor(n: usize) -> usize {
    let mut f = 2;
    while f * f <= n {
        if n.is_multiple_of(f) {
            return f;
        }
        f += 1;
    }
    n
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && smallest_prime_factor(n) == n
}

pub fn factorization_params(d: usize) -> Result<FactorParams> {
    if d < 2 {
        return Err(Error::invalid(format!("factorization needs d >= 2, got {d}")));
    }
    let p = smallest_prime_factor(d);
    let q = d / p;
    let sigma = usize::from(d.is_multiple_of(2));
    Ok(FactorParams { p, q, sigma, k_sigma: 2 * d - q + sigma })
}

/// L_V = |0⟩⟨1| ⊗ V − |1⟩⟨0| ⊗ V^T on qubit ⊗ p.
pub fn build_l_v(v: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !v.is_square() {
        return Err(Error::DimensionMismatch(format!("V must be square, got {}x{}", v.rows(), v.cols())));
    }
    let dev = v.unitarity_deviation();
    if dev >= 1e-10 {
        return Err(Error::NotUnitary(dev));
    }
    let p = v.rows();
    let vt = v.transpose();
    Ok(ComplexMatrix::from_fn(2 * p, 2 * p, |i, j| match (i / p, j / p) {
        (0, 1) => v[(i, j - p)],
        (1, 0) => -vt[(i - p, j)],
        _ => C64::new(0.0, 0.0),
    }))
}

/// Exponent pairs (s, t) of ℒ_p^σ = {Z^a}_{a=0}^{p−2+σ} ∪ {X Z^a}_{a∈Z_p}.
pub fn lp_sigma_labels(p: usize, sigma: usize) -> Vec<(u32, u32)> {
    let mut out: Vec<(u32, u32)> = (0..(p - 1 + sigma) as u32).map(|a| (0, a)).collect();
    out.extend((0..p as u32).map(|a| (1, a)));
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum XiVariant {
    /// Z_p^{p−1} is paired only with n = 0; size 2d − q + σ.
    ExtraOnce,
    /// Every n ∈ Z_q against every V ∈ ℒ_p^σ; size q(2p − 1 + σ).
    FullProduct,
}

/// One member L_V ⊗ Z_q^n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct XiMember {
    pub n: usize,
    /// (s, t) with V = X_p^s Z_p^t.
    pub v: (u32, u32),
}

/// Antisymmetric MES family in local dimension 2d, ordered qubit ⊗ p ⊗ q.
#[derive(Clone, Debug)]
pub struct XiConstruction {
    pub d: usize,
    pub params: FactorParams,
    pub variant: XiVariant,
    pub member_labels: Vec<XiMember>,
    pub members: MesSet,
}

impl XiConstruction {
    pub fn len(&self) -> usize {
        self.member_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_labels.is_empty()
    }

    pub fn full_product_size(&self) -> usize {
        self.params.q * (2 * self.params.p - 1 + self.params.sigma)
    }
}

pub fn xi_member_matrices(p: usize, q: usize, m: &XiMember) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let l_v = build_l_v(&weyl_matrix(p, m.v.0, m.v.1))?;
    let zq = weyl_matrix(q, 0, m.n as u32);
    Ok((l_v, zq))
}

pub fn xi_set(d: usize, variant: XiVariant) -> Result<XiConstruction> {
    let params = factorization_params(d)?;
    let FactorParams { p, q, sigma, .. } = params;
    let mut member_labels = Vec::new();
    let generators = match variant {
        XiVariant::ExtraOnce => lp_sigma_labels(p, 0),
        XiVariant::FullProduct => lp_sigma_labels(p, sigma),
    };
    for n in 0..q {
        for &v in &generators {
            member_labels.push(XiMember { n, v });
        }
    }
    if variant == XiVariant::ExtraOnce && sigma == 1 {
        member_labels.push(XiMember { n: 0, v: (0, (p - 1) as u32) });
    }
    let unitaries = member_labels
        .iter()
        .map(|m| xi_member_matrices(p, q, m).map(|(l, z)| l.kron(&z)))
        .collect::<Result<Vec<_>>>()?;
    let members = MesSet::from_matrices(unitaries, 1e-10)?.named(format!("xi_{}", 2 * d));
    Ok(XiConstruction { d, params, variant, member_labels, members })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KminSource {
    /// Weyl MES family Γ_D of size D.
    WeylFamily,
    /// Ξ construction in dimension D = 2d of size k_σ(d).
    AntisymmetricFamily,
}

/// Closed-form row of the minimal-size classification for a local dimension D.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TableRow {
    FourOrPrime,
    TwicePrime,
    FourM,
    SixMOdd,
    TwicePQ,
}

impl TableRow {
    pub fn description(&self) -> &'static str {
        match self {
            TableRow::FourOrPrime => "4 or p>=5 prime: D",
            TableRow::TwicePrime => "2p (p>=3 prime): D-1",
            TableRow::FourM => "4m (m>=2): 3D/4+1",
            TableRow::SixMOdd => "6m (m odd): 5D/6",
            TableRow::TwicePQ => "2pq (p>=5 prime, q>=p odd): (2p-1)D/(2p)",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KminRow {
    pub dim: usize,
    pub k_min: usize,
    pub source: KminSource,
    pub construction: String,
    /// Closed-form classification, absent for odd composite D.
    pub table_row: Option<TableRow>,
    pub table_value: Option<usize>,
    /// k_σ(D/2) for even D.
    pub k_sigma: Option<usize>,
}

/// Closed-form minimal certified size for D ≥ 4, or None when no row applies.
pub fn table_classification(dim: usize) -> Option<(TableRow, usize)> {
    if dim == 4 || (dim >= 5 && is_prime(dim)) {
        return Some((TableRow::FourOrPrime, dim));
    }
    if !dim.is_multiple_of(2) {
        return None;
    }
    let d = dim / 2;
    if is_prime(d) {
        return Some((TableRow::TwicePrime, dim - 1));
    }
    if d.is_multiple_of(2) {
        return Some((TableRow::FourM, 3 * dim / 4 + 1));
    }
    if d.is_multiple_of(3) {
        return Some((TableRow::SixMOdd, 5 * dim / 6));
    }
    let p = smallest_prime_factor(d);
    Some((TableRow::TwicePQ, (2 * p - 1) * dim / (2 * p)))
}

/// Smallest certified set size per dimension D in 4..=max_dim, taking the
/// better of the Γ_D family (size D) and, for even D, Ξ (size k_σ(D/2)).
pub fn kmin_table(max_dim: usize) -> Result<Vec<KminRow>> {
    if max_dim < 4 {
        return Err(Error::invalid(format!("kmin table needs max_dim >= 4, got {max_dim}")));
    }
    let mut rows = Vec::with_capacity(max_dim - 3);
    for dim in 4..=max_dim {
        let k_sigma = if dim % 2 == 0 { Some(factorization_params(dim / 2)?.k_sigma) } else { None };
        let (k_min, source, construction) = match k_sigma {
            Some(k) if k < dim => (k, KminSource::AntisymmetricFamily, format!("xi_{dim}")),
            _ => (dim, KminSource::WeylFamily, format!("gamma_d{dim}")),
        };
        let classification = table_classification(dim);
        rows.push(KminRow {
            dim,
            k_min,
            source,
            construction,
            table_row: classification.map(|c| c.0),
            table_value: classification.map(|c| c.1),
            k_sigma,
        });
    }
    Ok(rows)
}
