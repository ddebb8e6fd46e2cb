//! Report assembly for the command-line front end and the C interface.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::asymmetry::{first_move_report, BipartiteStates, FirstMoveReport, Party};
use crate::constructions::{
    factorization_params, gamma_d_set, gamma_e_set, kmin_table, mixed_family, named_example, shifted_product_set,
    xi_set, XiVariant, NAMED_EXAMPLES,
};
use crate::detector::{
    asymmetric_bound, build_mixed_detector, clock_set, conjugate_set, general_detector_lambda1,
    mes_replacement_lambda1, mixed_detector_bound, nielsen_transfer_possible, tilde_m_2x2,
};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::setfile::LoadedSet;
use crate::weyl::{
    check_orthogonality, criterion_verdict, gamma_table, numeric_criterion, MesMembers, MesSet, Verdict,
};
use crate::witness::{contradiction_ledger, dominance_check, positivity_sampling, rank2_falsifier, rank_obstruction};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Orthogonality tolerance for matrix-backed and product sets.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Default tolerance for numeric γ on matrix-backed sets.
pub const DEFAULT_GAMMA_TOL: f64 = 1e-9;
/// First-move analysis is skipped above this local dimension.
pub const FIRST_MOVE_MAX_DIM: usize = 16;
pub const FALSIFIER_ITERATIONS: usize = 200;

pub const FAMILIES: [&str; 10] = [
    "gamma_d",
    "gamma_e",
    "product",
    "product_extended",
    "mixed",
    "xi",
    "clock",
    "quintuple5",
    "quadrupleBGK",
    "pauliL4",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub payload: Value,
}

impl Check {
    fn new(name: &str, status: Status, payload: Value) -> Self {
        Check { name: name.to_string(), status, payload }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InputDescriptor {
    /// `family:<name>` or `file:<path>`.
    pub source: String,
    pub name: Option<String>,
    /// labels, matrices, product or mixed.
    pub kind: String,
    pub local_dim: usize,
    pub size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub factors: Option<Vec<u32>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub tool_version: String,
    pub command: String,
    pub input: Option<InputDescriptor>,
    pub seed: Option<u64>,
    pub checks: Vec<Check>,
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl AnalysisReport {
    fn new(command: &str, input: Option<InputDescriptor>, seed: Option<u64>) -> Self {
        AnalysisReport {
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            input,
            seed,
            checks: Vec::new(),
            verdict: None,
            timing_ms: None,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "loccw {} {}", self.tool_version, self.command);
        if let Some(i) = &self.input {
            let name = i.name.as_deref().unwrap_or("unnamed");
            let _ = writeln!(out, "input: {name} ({}, {} members, local dimension {})", i.kind, i.size, i.local_dim);
        }
        if let Some(s) = self.seed {
            let _ = writeln!(out, "seed: {s}");
        }
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Inconclusive => "inconclusive",
            };
            let _ = writeln!(out, "[{status}] {}", c.name);
            if let Value::Object(map) = &c.payload {
                for (k, v) in map {
                    match v {
                        Value::Array(items) if items.iter().any(Value::is_object) => {
                            let _ = writeln!(out, "    {k}:");
                            for item in items {
                                let _ = writeln!(out, "      - {}", compact(item));
                            }
                        }
                        _ => {
                            let _ = writeln!(out, "    {k}: {}", compact(v));
                        }
                    }
                }
            }
        }
        if let Some(v) = self.verdict {
            let _ = writeln!(out, "verdict: {v}");
        }
        if let Some(t) = self.timing_ms {
            let _ = writeln!(out, "time: {t:.1} ms");
        }
        out
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => format!("[{}]", a.iter().map(compact).collect::<Vec<_>>().join(", ")),
        Value::Object(m) => m.iter().map(|(k, v)| format!("{k}={}", compact(v))).collect::<Vec<_>>().join(" "),
        other => other.to_string(),
    }
}

/// A resolved input: a set, or the mixed MES/product ensemble with fixed weights.
#[derive(Clone, Debug)]
pub enum Source {
    Set(LoadedSet),
    WeightedMixed { d: usize },
}

#[derive(Clone, Debug)]
pub struct Input {
    pub source: Source,
    pub descriptor: InputDescriptor,
}

fn mes_kind(set: &MesSet) -> (&'static str, Option<Vec<u32>>) {
    match &set.members {
        MesMembers::Labels { structure, .. } => ("labels", Some(structure.factors().to_vec())),
        MesMembers::Matrices { .. } => ("matrices", None),
    }
}

impl Input {
    pub fn from_set(set: LoadedSet, source: String) -> Self {
        let descriptor = match &set {
            LoadedSet::Mes(m) => {
                let (kind, factors) = mes_kind(m);
                InputDescriptor {
                    source,
                    name: m.name.clone(),
                    kind: kind.into(),
                    local_dim: m.dim(),
                    size: m.len(),
                    factors,
                }
            }
            LoadedSet::Product(p) => InputDescriptor {
                source,
                name: p.name.clone(),
                kind: "product".into(),
                local_dim: p.dim,
                size: p.len(),
                factors: None,
            },
        };
        Input { source: Source::Set(set), descriptor }
    }

    pub fn mes(&self) -> Result<&MesSet> {
        match &self.source {
            Source::Set(LoadedSet::Mes(m)) => Ok(m),
            _ => Err(Error::invalid("this command needs a set of maximally entangled states")),
        }
    }
}

fn need_d(d: Option<usize>, family: &str) -> Result<usize> {
    d.ok_or_else(|| Error::invalid(format!("family '{family}' needs a dimension")))
}

/// Maps accepted alternative family names to their canonical form.
pub fn canonical_family(name: &str) -> &str {
    match name {
        "theorem1" => "product",
        "theorem1_extended" => "product_extended",
        "theorem2" => "mixed",
        other => other,
    }
}

/// Builds a named family. `d` is required for parametrized families.
pub fn family_input(family: &str, d: Option<usize>, variant: XiVariant) -> Result<Input> {
    let family = canonical_family(family);
    let src = format!("family:{family}");
    let set = match family {
        "gamma_d" => LoadedSet::Mes(gamma_d_set(need_d(d, family)?)?),
        "gamma_e" => LoadedSet::Mes(gamma_e_set(need_d(d, family)?)?),
        "clock" => {
            let d = need_d(d, family)?;
            LoadedSet::Mes(clock_set(d)?.named(format!("clock_d{d}")))
        }
        "xi" => LoadedSet::Mes(xi_set(need_d(d, family)?, variant)?.members),
        "product" => LoadedSet::Product(shifted_product_set(need_d(d, family)?)?),
        "product_extended" => LoadedSet::Product(shifted_product_set(need_d(d, family)?)?.extended()),
        "mixed" => {
            let d = need_d(d, family)?;
            let fam = mixed_family(d)?;
            let descriptor = InputDescriptor {
                source: src,
                name: Some(format!("mixed_d{d}")),
                kind: "mixed".into(),
                local_dim: d,
                size: fam.k + 1,
                factors: Some(vec![d as u32]),
            };
            return Ok(Input { source: Source::WeightedMixed { d }, descriptor });
        }
        name if NAMED_EXAMPLES.contains(&name) => LoadedSet::Mes(named_example(name)?),
        other => {
            return Err(Error::invalid(format!("unknown family '{other}', expected one of: {}", FAMILIES.join(", "))))
        }
    };
    Ok(Input::from_set(set, src))
}

fn timed<F: FnOnce() -> Result<AnalysisReport>>(timing: bool, f: F) -> Result<AnalysisReport> {
    let start = Instant::now();
    let mut report = f()?;
    if timing {
        report.timing_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    Ok(report)
}

fn first_move_payload(r: &FirstMoveReport) -> Value {
    json!({
        "party": r.party,
        "solution_dim": r.solution_dim,
        "nontrivial_exists": r.nontrivial_exists,
        "witness_epsilon": r.witness.as_ref().map(|w| w.epsilon),
        "witness_max_gram_offdiag": r.witness.as_ref().map(|w| w.max_gram_offdiag),
    })
}

fn bipartite(input: &Input) -> Result<BipartiteStates> {
    match &input.source {
        Source::Set(LoadedSet::Mes(m)) => Ok(BipartiteStates::Mes(m.clone())),
        Source::Set(LoadedSet::Product(p)) => Ok(BipartiteStates::Product(p.clone())),
        Source::WeightedMixed { .. } => Err(Error::invalid("first-move analysis needs a pure MES or product set")),
    }
}

fn first_move_check(states: &BipartiteStates, parties: &[Party]) -> Result<Check> {
    let dim = states.local_dim();
    if dim > FIRST_MOVE_MAX_DIM {
        return Ok(Check::new(
            "first_move",
            Status::Inconclusive,
            json!({ "skipped": format!("local dimension {dim} above {FIRST_MOVE_MAX_DIM}") }),
        ));
    }
    let mut payload = serde_json::Map::new();
    let mut all_trivial = true;
    for &party in parties {
        let r = first_move_report(states, party)?;
        all_trivial &= !r.nontrivial_exists;
        let key = match party {
            Party::Alice => "alice",
            Party::Bob => "bob",
        };
        payload.insert(key.into(), first_move_payload(&r));
    }
    let status = if all_trivial { Status::Pass } else { Status::Inconclusive };
    Ok(Check::new("first_move", status, Value::Object(payload)))
}

fn labels_json<'a, I: IntoIterator<Item = &'a crate::weyl::WeylLabel>>(it: I) -> Value {
    Value::Array(it.into_iter().map(|l| Value::String(l.to_string())).collect())
}

fn mes_checks(set: &MesSet, tolerance: f64, report: &mut AnalysisReport) -> Result<bool> {
    let orth = check_orthogonality(set, ORTHOGONALITY_TOL);
    report.checks.push(Check::new("orthogonality", Status::from_bool(orth.orthogonal), json!(orth)));
    if !orth.orthogonal {
        return Ok(false);
    }
    let mut certified = false;
    match &set.members {
        MesMembers::Labels { .. } => {
            let r = criterion_verdict(set)?;
            certified |= r.verdict == Verdict::CertifiedLoccIndistinguishable;
            let status = if certified { Status::Pass } else { Status::Inconclusive };
            report.checks.push(Check::new(
                "weyl_criterion",
                status,
                json!({
                    "set_size": r.set_size,
                    "dim": r.dim,
                    "size_matches_dim": r.set_size == r.dim,
                    "kernel": labels_json(&r.kernel),
                    "difference_size": r.difference.len(),
                    "kernel_in_difference": r.kernel_in_difference(),
                    "verdict": r.verdict,
                }),
            ));
        }
        MesMembers::Matrices { .. } => {
            let r = numeric_criterion(set, tolerance)?;
            report.checks.push(Check::new(
                "weyl_criterion_numeric",
                Status::Inconclusive,
                json!({
                    "set_size": r.set_size,
                    "dim": r.dim,
                    "tolerance": tolerance,
                    "kernel_size": r.kernel.len(),
                    "difference_size": r.difference.len(),
                    "condition_holds": r.condition_holds,
                    "note": "numeric evaluation, never certifies",
                }),
            ));
        }
    }
    let fm = first_move_check(&BipartiteStates::Mes(set.clone()), &[Party::Alice, Party::Bob])?;
    certified |= fm.status == Status::Pass;
    report.checks.push(fm);
    Ok(certified)
}

fn mixed_detector_checks(d: usize, report: &mut AnalysisReport) -> Result<bool> {
    let fam = mixed_family(d)?;
    let det = build_mixed_detector(d)?;
    let lambda1 = det.lambda1()?;
    let bound = mixed_detector_bound(d);
    let (_, block_closed) = tilde_m_2x2(d)?;
    let transfer = nielsen_transfer_possible(lambda1, d);
    let ok = lambda1 >= bound - 1e-9 && lambda1 > 1.0 / d as f64;
    report.checks.push(Check::new(
        "detector",
        Status::from_bool(ok),
        json!({
            "d": d,
            "k": fam.k,
            "weight_mes": fam.weight_mes.to_string(),
            "weight_product": fam.weight_product.to_string(),
            "norm": det.norm_sq(),
            "lambda1": lambda1,
            "analytic_bound": bound,
            "block_eigenvalue": block_closed,
            "threshold": 1.0 / d as f64,
            "transfer_possible": transfer,
        }),
    ));
    let replaced = mes_replacement_lambda1(d)?;
    report.checks.push(Check::new(
        "detector_mes_replacement",
        Status::from_bool(replaced <= 1.0 / d as f64 + 1e-9),
        json!({ "lambda1": replaced, "threshold": 1.0 / d as f64, "transfer_possible": nielsen_transfer_possible(replaced, d) }),
    ));
    Ok(ok && !transfer)
}

/// Orthogonality, then every applicable certificate.
pub fn analyze(input: &Input, tolerance: f64, timing: bool) -> Result<AnalysisReport> {
    timed(timing, || {
        let mut report = AnalysisReport::new("analyze", Some(input.descriptor.clone()), None);
        let certified = match &input.source {
            Source::Set(LoadedSet::Mes(m)) => mes_checks(m, tolerance, &mut report)?,
            Source::Set(LoadedSet::Product(p)) => {
                let overlap = p.max_overlap();
                let orthogonal = overlap < ORTHOGONALITY_TOL;
                report.checks.push(Check::new(
                    "orthogonality",
                    Status::from_bool(orthogonal),
                    json!({ "orthogonal": orthogonal, "max_violation": overlap }),
                ));
                if orthogonal {
                    let fm = first_move_check(&BipartiteStates::Product(p.clone()), &[Party::Alice, Party::Bob])?;
                    let pass = fm.status == Status::Pass;
                    report.checks.push(fm);
                    pass
                } else {
                    false
                }
            }
            Source::WeightedMixed { d } => mixed_detector_checks(*d, &mut report)?,
        };
        report.verdict = Some(if certified { Verdict::CertifiedLoccIndistinguishable } else { Verdict::Inconclusive });
        Ok(report)
    })
}

/// γ for every basis label: exact for label-backed sets, numeric otherwise.
pub fn gamma_table_report(input: &Input, tolerance: f64, timing: bool) -> Result<AnalysisReport> {
    let set = input.mes()?;
    timed(timing, || {
        let mut report = AnalysisReport::new("gamma-table", Some(input.descriptor.clone()), None);
        match &set.members {
            MesMembers::Labels { .. } => {
                let table = gamma_table(set)?;
                let rows: Vec<Value> = table
                    .iter()
                    .map(|(l, g)| {
                        let z = g.to_complex();
                        json!({
                            "label": l.to_string(),
                            "exact": g.coeff_strings(),
                            "order": g.order(),
                            "re": z.re,
                            "im": z.im,
                            "in_kernel": g.is_zero(),
                        })
                    })
                    .collect();
                let kernel_size = table.values().filter(|g| g.is_zero()).count();
                report.checks.push(Check::new(
                    "gamma_table",
                    Status::Pass,
                    json!({ "exact": true, "kernel_size": kernel_size, "rows": rows }),
                ));
            }
            MesMembers::Matrices { .. } => {
                let r = numeric_criterion(set, tolerance)?;
                let rows: Vec<Value> = r
                    .gamma_values
                    .iter()
                    .map(|(l, g)| {
                        json!({ "label": l.to_string(), "exact": null, "re": g.re, "im": g.im, "in_kernel": g.norm() < tolerance })
                    })
                    .collect();
                report.checks.push(Check::new(
                    "gamma_table",
                    Status::Inconclusive,
                    json!({
                        "exact": false,
                        "warning": "matrix-backed set: numeric values only",
                        "tolerance": tolerance,
                        "kernel_size": r.kernel.len(),
                        "rows": rows,
                    }),
                ));
            }
        }
        Ok(report)
    })
}

/// Detector for the weighted mixed ensemble.
pub fn detector_mixed(d: usize, timing: bool) -> Result<AnalysisReport> {
    let input = family_input("mixed", Some(d), XiVariant::ExtraOnce)?;
    timed(timing, || {
        let mut report = AnalysisReport::new("detector", Some(input.descriptor.clone()), None);
        let certified = mixed_detector_checks(d, &mut report)?;
        report.verdict = Some(if certified { Verdict::CertifiedLoccIndistinguishable } else { Verdict::Inconclusive });
        Ok(report)
    })
}

/// λ₁ lower bound after a first outcome `m` on Alice's side.
pub fn detector_asymmetric(input: &Input, m: &ComplexMatrix, timing: bool) -> Result<AnalysisReport> {
    let set = input.mes()?;
    timed(timing, || {
        let mut report = AnalysisReport::new("detector", Some(input.descriptor.clone()), None);
        let r = asymmetric_bound(m, set)?;
        let d = set.dim();
        let transfer = nielsen_transfer_possible(r.lambda1_numeric, d);
        report.checks.push(Check::new(
            "asymmetric_bound",
            Status::from_bool(r.lambda1_numeric >= r.bound - 1e-9),
            json!({
                "bound": r.bound,
                "lambda1": r.lambda1_numeric,
                "twirl_deviation": r.twirl_deviation,
                "rayleigh_quotient": r.rayleigh_quotient,
                "threshold": 1.0 / d as f64,
                "transfer_possible": transfer,
            }),
        ));
        Ok(report)
    })
}

/// Uniform weights with conjugate auxiliary labels; λ₁ never exceeds 1/d.
pub fn detector_general(input: &Input, timing: bool) -> Result<AnalysisReport> {
    let set = input.mes()?;
    timed(timing, || {
        let mut report = AnalysisReport::new("detector", Some(input.descriptor.clone()), None);
        let d = set.dim();
        let weights = vec![1.0 / set.len() as f64; set.len()];
        let lambda1 = general_detector_lambda1(set, &weights, &conjugate_set(set)?)?;
        report.checks.push(Check::new(
            "general_detector",
            Status::from_bool(lambda1 <= 1.0 / d as f64 + 1e-9),
            json!({
                "lambda1": lambda1,
                "threshold": 1.0 / d as f64,
                "transfer_possible": nielsen_transfer_possible(lambda1, d),
            }),
        ));
        Ok(report)
    })
}

pub fn asymmetry_report(input: &Input, parties: &[Party], timing: bool) -> Result<AnalysisReport> {
    let states = bipartite(input)?;
    timed(timing, || {
        let mut report = AnalysisReport::new("asymmetry", Some(input.descriptor.clone()), None);
        let check = first_move_check(&states, parties)?;
        if parties.len() == 2 {
            report.verdict = Some(if check.status == Status::Pass {
                Verdict::CertifiedLoccIndistinguishable
            } else {
                Verdict::Inconclusive
            });
        }
        report.checks.push(check);
        Ok(report)
    })
}

#[derive(Clone, Copy, Debug)]
pub struct WitnessOptions {
    pub d: usize,
    pub samples: usize,
    pub falsifier_samples: usize,
    pub seed: u64,
}

/// Ledger identities, dominance, sampled positivity and, for odd p, the rank
/// obstruction with its sampling falsifier.
pub fn witness_report(opts: WitnessOptions, timing: bool) -> Result<AnalysisReport> {
    let WitnessOptions { d, samples, falsifier_samples, seed } = opts;
    let xi = xi_set(d, XiVariant::ExtraOnce)?;
    let input = Input::from_set(LoadedSet::Mes(xi.members.clone()), "family:xi".into());
    timed(timing, || {
        let mut report = AnalysisReport::new("witness", Some(input.descriptor.clone()), Some(seed));
        let ledger = contradiction_ledger(d)?;
        report.checks.push(Check::new("ledger", Status::from_bool(ledger.consistent), json!(ledger)));

        let orth = check_orthogonality(&xi.members, 1e-12);
        let unitary = xi.members.unitaries().iter().map(|u| u.unitarity_deviation()).fold(0.0, f64::max);
        report.checks.push(Check::new(
            "xi_members",
            Status::from_bool(orth.orthogonal && unitary < 1e-12),
            json!({
                "size": xi.len(),
                "full_product_size": xi.full_product_size(),
                "max_orthogonality_violation": orth.max_violation,
                "max_unitarity_deviation": unitary,
                "ordering": ["qubit", "p", "q"],
            }),
        ));

        let dom = dominance_check(d)?;
        let worst = dom.members.iter().map(|m| m.min_eigenvalue).fold(f64::INFINITY, f64::min);
        report.checks.push(Check::new(
            "dominance",
            Status::from_bool(dom.holds),
            json!({ "members": dom.members.len(), "min_eigenvalue": worst }),
        ));

        let pos = positivity_sampling(d, samples, seed)?;
        let ok = pos.min_product_value >= -1e-12
            && pos.min_block_value >= -1e-12
            && pos.max_product_gap <= 1e-10
            && pos.max_block_gap <= 1e-10;
        report.checks.push(Check::new("positivity", Status::from_bool(ok), json!(pos)));

        let p = factorization_params(d)?.p;
        if p >= 3 {
            let trace = rank_obstruction(p)?;
            report.checks.push(Check::new("rank_obstruction", Status::from_bool(trace.contradiction), json!(trace)));
            let fals = rank2_falsifier(p, falsifier_samples, seed, FALSIFIER_ITERATIONS)?;
            let status = if fals.counterexamples == 0 { Status::Pass } else { Status::Fail };
            report.checks.push(Check::new("rank2_falsifier", status, json!(fals)));
        } else {
            report.checks.push(Check::new(
                "rank_obstruction",
                Status::Inconclusive,
                json!({ "p": p, "note": "p = 2: strictness follows from the ledger gap k_sigma - Tr H = 1" }),
            ));
        }
        Ok(report)
    })
}

pub fn kmin_report(max_dim: usize, timing: bool) -> Result<AnalysisReport> {
    if max_dim > 64 {
        return Err(Error::invalid(format!("max dimension {max_dim} above 64")));
    }
    timed(timing, || {
        let mut report = AnalysisReport::new("kmin", None, None);
        let rows = kmin_table(max_dim)?;
        let matches = rows.iter().all(|r| r.table_value.is_none_or(|v| v == r.k_min));
        report.checks.push(Check::new("kmin_table", Status::from_bool(matches), json!({ "rows": rows })));
        Ok(report)
    })
}

pub fn render_kmin_text(report: &AnalysisReport) -> Option<String> {
    let rows = report.check("kmin_table")?.payload.get("rows")?.as_array()?;
    let mut out = String::from("   D  k_min  source                construction  closed form\n");
    for r in rows {
        let closed = r["table_value"].as_u64().map_or("-".to_string(), |v| v.to_string());
        let _ = writeln!(
            out,
            "{:>4}  {:>5}  {:<20}  {:<12}  {}",
            r["dim"].as_u64()?,
            r["k_min"].as_u64()?,
            r["source"].as_str()?,
            r["construction"].as_str()?,
            closed,
        );
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_d7_is_certified() {
        let input = family_input("gamma_d", Some(7), XiVariant::ExtraOnce).unwrap();
        let r = analyze(&input, DEFAULT_GAMMA_TOL, false).unwrap();
        assert_eq!(r.verdict, Some(Verdict::CertifiedLoccIndistinguishable));
        assert_eq!(r.check("weyl_criterion").unwrap().status, Status::Pass);
    }

    #[test]
    fn product_set_certified_by_first_move() {
        let input = family_input("product", Some(4), XiVariant::ExtraOnce).unwrap();
        let r = analyze(&input, DEFAULT_GAMMA_TOL, false).unwrap();
        assert_eq!(r.check("first_move").unwrap().status, Status::Pass);
        assert_eq!(r.verdict, Some(Verdict::CertifiedLoccIndistinguishable));
    }

    #[test]
    fn mixed_family_certified_by_detector() {
        let r = detector_mixed(5, false).unwrap();
        assert_eq!(r.verdict, Some(Verdict::CertifiedLoccIndistinguishable));
    }

    #[test]
    fn gamma_table_row_counts() {
        let input = family_input("gamma_d", Some(4), XiVariant::ExtraOnce).unwrap();
        let r = gamma_table_report(&input, DEFAULT_GAMMA_TOL, false).unwrap();
        let p = &r.check("gamma_table").unwrap().payload;
        assert_eq!(p["rows"].as_array().unwrap().len(), 16);
        assert_eq!(p["kernel_size"], 6);
        let input = family_input("quintuple5", None, XiVariant::ExtraOnce).unwrap();
        let r = gamma_table_report(&input, DEFAULT_GAMMA_TOL, false).unwrap();
        assert_eq!(r.check("gamma_table").unwrap().payload["kernel_size"], 0);
    }

    #[test]
    fn reports_are_deterministic_without_timing() {
        let input = family_input("pauliL4", None, XiVariant::ExtraOnce).unwrap();
        let a = analyze(&input, DEFAULT_GAMMA_TOL, false).unwrap().to_json().unwrap();
        let b = analyze(&input, DEFAULT_GAMMA_TOL, false).unwrap().to_json().unwrap();
        assert_eq!(a, b);
        assert!(!a.contains("timing_ms"));
        let t = analyze(&input, DEFAULT_GAMMA_TOL, true).unwrap();
        assert!(t.timing_ms.is_some());
    }

    #[test]
    fn unknown_family_and_missing_dimension() {
        assert!(family_input("nope", Some(3), XiVariant::ExtraOnce).is_err());
        assert!(family_input("gamma_d", None, XiVariant::ExtraOnce).is_err());
    }

    #[test]
    fn kmin_rows_match_classification() {
        let r = kmin_report(24, false).unwrap();
        assert_eq!(r.check("kmin_table").unwrap().status, Status::Pass);
        assert!(kmin_report(65, false).is_err());
    }

    #[test]
    fn witness_report_small() {
        let opts = WitnessOptions { d: 3, samples: 40, falsifier_samples: 8, seed: 7 };
        let r = witness_report(opts, false).unwrap();
        for c in &r.checks {
            assert_eq!(c.status, Status::Pass, "{}: {}", c.name, c.payload);
        }
    }
}
