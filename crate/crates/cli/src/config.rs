//! Configuration files.
//!
//! The format is TOML with one extension: a value that is a bare word
//! (`system = linear2d`) is read as a string. Minimal example:
//!
//! ```toml
//! system = linear2d
//! ```
//!
//! Full layout (all sections optional except `system`):
//!
//! ```toml
//! seed = 0
//! output_dir = "out"
//!
//! [system]
//! name = "vdp_modified"            # builtin name, or "custom"
//! params = { mu = 2.0, eta = 2.2 }
//! # custom systems:
//! # dim = 2
//! # field = [[{ coeff = -1.0, exponents = [1, 0] }], [{ coeff = -1.0, exponents = [0, 1] }]]
//! # observables = [...]           # default: the coordinates
//!
//! [weight]                         # default: the builtin weight
//! kind = "inverse_norm"            # inverse_norm | constant | hamiltonian
//! # value = 1.0                    # constant
//! # hamiltonian = [{ coeff = 0.5, exponents = [2, 0] }, ...]
//!
//! [domain]                         # default: the builtin box
//! lower = [-3.0, -3.0]
//! upper = [3.0, 3.0]
//! equilibrium = [0.0, 0.0]
//!
//! [basis]
//! kind = "legendre"                # legendre | bspline
//! degree = 24                      # scalar or one per dimension
//! # nodes = 60                     # bspline breakpoints per dimension
//! normalize_measure = true
//! equilibrium_vanishing = true
//!
//! [quadrature]
//! nodes = 32                       # Gauss order per dimension (per cell for bspline)
//!
//! [tolerances]
//! rel_tol = 1e-10
//! oracle_tail_tol = 1e-8
//! ```
//!
//! Command-specific sections are `[output]`, `[check]`, `[oracle]`,
//! `[compare]` and `[laguerre]`; see the field docs below.

use std::collections::BTreeMap;
use std::path::PathBuf;

use koopman_lyap::basis::{DiscretizationSpec, FactorSpec, IndexSet, DEFAULT_DROP_TOL};
use koopman_lyap::flow::IntegratorConfig;
use koopman_lyap::gramian::DEFAULT_TRUNC_TOL;
use koopman_lyap::model::{
    builtin_system, linspace, BoxDomain, MultiIndex, NuclearCost, Polynomial, PolynomialMap, Problem, Term,
    WeightFunction, SINGULAR_RADIUS,
};
use koopman_lyap::quadrature::{composite_rule, gauss_legendre};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerDim {
    One(usize),
    Each(Vec<usize>),
}

impl PerDim {
    fn expand(&self, dim: usize, name: &str) -> Result<Vec<usize>, CliError> {
        match self {
            PerDim::One(v) => Ok(vec![*v; dim]),
            PerDim::Each(v) if v.len() == dim => Ok(v.clone()),
            PerDim::Each(v) => Err(CliError::Config(format!("{name}: expected {dim} entries, found {}", v.len()))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SystemSection {
    pub name: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    pub dim: Option<usize>,
    pub field: Option<Vec<Vec<TermSpec>>>,
    pub observables: Option<Vec<Vec<TermSpec>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSection {
    pub kind: String,
    pub value: Option<f64>,
    pub center: Option<Vec<f64>>,
    pub hamiltonian: Option<Vec<TermSpec>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSection {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub equilibrium: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BasisSection {
    pub kind: String,
    pub degree: PerDim,
    /// Breakpoints per dimension for B-splines, endpoints included.
    pub nodes: Option<PerDim>,
    /// `"full"` or `"total_degree"`.
    pub index_set: String,
    pub normalize_measure: bool,
    pub equilibrium_vanishing: bool,
}

impl Default for BasisSection {
    fn default() -> Self {
        Self {
            kind: "legendre".into(),
            degree: PerDim::One(11),
            nodes: None,
            index_set: "full".into(),
            normalize_measure: true,
            equilibrium_vanishing: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSection {
    pub nodes: PerDim,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        Self { nodes: PerDim::One(12) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_time: f64,
    /// Tail tolerance of the trajectory cost oracle.
    pub oracle_tail_tol: f64,
    /// Relative eigenvalue cut-off of the sum of squares.
    pub trunc_tol: f64,
    /// Relative Gram eigenvalue cut-off of the whitening.
    pub drop_tol: f64,
    pub laguerre_tail_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        let ic = IntegratorConfig::default();
        Self {
            rel_tol: ic.rel_tol,
            abs_tol: ic.abs_tol,
            max_step: ic.max_step,
            max_time: ic.max_time,
            oracle_tail_tol: 1e-8,
            trunc_tol: DEFAULT_TRUNC_TOL,
            drop_tol: DEFAULT_DROP_TOL,
            laguerre_tail_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSection {
    /// Points per dimension of the uniform output grid.
    pub grid: usize,
    /// Number of eigenfunction files written by `solve`.
    pub eigenfunctions: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { grid: 50, eigenfunctions: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckSection {
    /// Points per dimension for the ω₀ and port-Hamiltonian grids.
    pub grid: usize,
    pub boundary_points: usize,
    /// Seeded trajectories for the decay-bound check.
    pub trajectories: usize,
    pub horizon: f64,
}

impl Default for CheckSection {
    fn default() -> Self {
        Self {
            grid: 101,
            boundary_points: 101,
            trajectories: 20,
            horizon: 5.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleSection {
    /// Explicit points; when empty, `random` seeded points are drawn.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<f64>>,
    /// CSV file with one point per row.
    pub file: Option<PathBuf>,
    pub random: Option<usize>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareSection {
    /// `"oracle"` or `"quadratic"` (exact `zᵀXz`, linear systems only).
    pub reference: String,
    /// Points per dimension of the comparison grid (0 for none).
    pub grid: usize,
    pub random: usize,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
    /// Points closer than this to the equilibrium are skipped.
    pub exclude_radius: f64,
    /// Maximum admissible error; exceeding it is reported as a failure.
    pub tolerance: Option<f64>,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            reference: "oracle".into(),
            grid: 0,
            random: 100,
            lower: None,
            upper: None,
            exclude_radius: 0.0,
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LaguerreSection {
    pub point: Option<Vec<f64>>,
    /// 0-based index into the observables.
    pub observable: usize,
    pub terms: usize,
}

impl Default for LaguerreSection {
    fn default() -> Self {
        Self {
            point: None,
            observable: 0,
            terms: 40,
        }
    }
}

/// The configuration file as written, with defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawConfig {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub system: SystemSection,
    pub weight: Option<WeightSection>,
    pub domain: Option<DomainSection>,
    #[serde(default)]
    pub basis: BasisSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub compare: CompareSection,
    #[serde(default)]
    pub laguerre: LaguerreSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    Oracle,
    Quadratic,
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub raw: RawConfig,
    pub problem: Problem,
    pub discretization: DiscretizationSpec,
    pub integrator: IntegratorConfig,
    pub reference: Reference,
    /// SHA-256 of the canonical form of `raw`.
    pub hash: String,
}

impl ProblemConfig {
    pub fn seed(&self) -> u64 {
        self.raw.seed.unwrap_or(0)
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.raw.tolerances
    }

    /// Same configuration with the seed replaced (the hash follows).
    pub fn with_seed(mut self, seed: u64) -> Result<Self, CliError> {
        self.raw.seed = Some(seed);
        self.hash = canonical_hash(&self.raw)?;
        Ok(self)
    }
}

fn canonical_hash(raw: &RawConfig) -> Result<String, CliError> {
    let canonical = toml::to_string(raw).map_err(|e| CliError::Config(e.to_string()))?;
    Ok(format!("{:x}", Sha256::digest(canonical.as_bytes())))
}

const KEYWORDS: [&str; 6] = ["true", "false", "inf", "nan", "+inf", "-inf"];

fn is_bare_word(v: &str) -> bool {
    let mut chars = v.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        && !KEYWORDS.contains(&v)
}

/// Quotes bare-word values of `key = value` lines.
fn quote_bare_words(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for line in text.lines() {
        let trimmed = line.trim_start();
        let quoted = (!trimmed.starts_with('#') && !trimmed.starts_with('['))
            .then(|| line.split_once('='))
            .flatten()
            .and_then(|(key, value)| {
                let (value, comment) = match value.split_once('#') {
                    Some((v, c)) => (v, Some(c)),
                    None => (value, None),
                };
                let v = value.trim();
                is_bare_word(v).then(|| {
                    let mut s = format!("{key}= \"{v}\"");
                    if let Some(c) = comment {
                        s.push_str(" #");
                        s.push_str(c);
                    }
                    s
                })
            });
        out.push_str(quoted.as_deref().unwrap_or(line));
        out.push('\n');
    }
    out
}

/// Parses and validates a configuration file.
pub fn parse_config(text: &str) -> Result<ProblemConfig, CliError> {
    let mut value: toml::Value = toml::from_str(&quote_bare_words(text)).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(table) = value.as_table_mut() {
        if let Some(toml::Value::String(name)) = table.get("system").cloned() {
            let mut sys = toml::map::Map::new();
            sys.insert("name".into(), toml::Value::String(name));
            table.insert("system".into(), toml::Value::Table(sys));
        }
    }
    let mut unknown = Vec::new();
    let raw: RawConfig = serde_ignored::deserialize(value, |path| unknown.push(path.to_string()))
        .map_err(|e| CliError::Config(e.to_string()))?;
    if !unknown.is_empty() {
        return Err(CliError::Config(format!("unknown keys: {}", unknown.join(", "))));
    }
    validate(raw)
}

fn polynomial(dim: usize, terms: &[TermSpec], name: &str) -> Result<Polynomial, CliError> {
    let terms = terms
        .iter()
        .map(|t| Term {
            coeff: t.coeff,
            monomial: MultiIndex::new(t.exponents.clone()),
        })
        .collect();
    Polynomial::new(dim, terms).map_err(|e| CliError::Config(format!("{name}: {e}")))
}

fn config_err(stage: &str) -> impl Fn(koopman_lyap::Error) -> CliError + '_ {
    move |e| CliError::Config(format!("{stage}: {e}"))
}

fn base_problem(sys: &SystemSection, domain: Option<&DomainSection>) -> Result<Problem, CliError> {
    if sys.name != "custom" {
        for (key, present) in [
            ("dim", sys.dim.is_some()),
            ("field", sys.field.is_some()),
            ("observables", sys.observables.is_some()),
        ] {
            if present {
                return Err(CliError::Config(format!("system.{key} is only allowed for custom systems")));
            }
        }
        return builtin_system(&sys.name, &sys.params).map_err(config_err("system"));
    }
    if !sys.params.is_empty() {
        return Err(CliError::Config("system.params is not used by custom systems".into()));
    }
    let dim = sys.dim.ok_or_else(|| CliError::Config("custom system needs system.dim".into()))?;
    let field = sys
        .field
        .as_ref()
        .ok_or_else(|| CliError::Config("custom system needs system.field".into()))?;
    let components = field
        .iter()
        .enumerate()
        .map(|(i, c)| polynomial(dim, c, &format!("system.field[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let field = PolynomialMap::new(dim, components).map_err(config_err("system.field"))?;
    let cost = match &sys.observables {
        None => NuclearCost::coordinates(dim),
        Some(obs) => NuclearCost::new(
            obs.iter()
                .enumerate()
                .map(|(i, c)| polynomial(dim, c, &format!("system.observables[{i}]")))
                .collect::<Result<_, _>>()?,
        )
        .map_err(config_err("system.observables"))?,
    };
    if domain.is_none() {
        return Err(CliError::Config("custom system needs a [domain] section".into()));
    }
    let domain = BoxDomain::symmetric(dim, 1.0).map_err(config_err("domain"))?;
    Ok(Problem {
        name: "custom".into(),
        field,
        cost,
        weight: WeightFunction::inverse_norm(vec![0.0; dim]),
        domain,
        port_hamiltonian: None,
    })
}

fn weight(section: &WeightSection, dom: &BoxDomain) -> Result<WeightFunction, CliError> {
    let unused = |key: &str, present: bool| {
        if present {
            Err(CliError::Config(format!("weight.{key} is not used by weight kind {}", section.kind)))
        } else {
            Ok(())
        }
    };
    match section.kind.as_str() {
        "inverse_norm" => {
            unused("value", section.value.is_some())?;
            unused("hamiltonian", section.hamiltonian.is_some())?;
            let center = section.center.clone().unwrap_or_else(|| dom.equilibrium().to_vec());
            if center.len() != dom.dim() {
                return Err(CliError::Config(format!("weight.center must have {} entries", dom.dim())));
            }
            Ok(WeightFunction::inverse_norm(center))
        }
        "constant" => {
            unused("center", section.center.is_some())?;
            unused("hamiltonian", section.hamiltonian.is_some())?;
            let v = section
                .value
                .ok_or_else(|| CliError::Config("weight kind constant needs weight.value".into()))?;
            WeightFunction::constant(v).map_err(config_err("weight.value"))
        }
        "hamiltonian" => {
            unused("value", section.value.is_some())?;
            let h = section
                .hamiltonian
                .as_ref()
                .ok_or_else(|| CliError::Config("weight kind hamiltonian needs weight.hamiltonian".into()))?;
            let h = polynomial(dom.dim(), h, "weight.hamiltonian")?;
            let zero = section.center.clone().unwrap_or_else(|| dom.equilibrium().to_vec());
            Ok(WeightFunction::hamiltonian(h, vec![zero]))
        }
        other => Err(CliError::Config(format!(
            "weight.kind {other:?} (expected inverse_norm, constant or hamiltonian)"
        ))),
    }
}

fn discretization(raw: &RawConfig, dim: usize) -> Result<DiscretizationSpec, CliError> {
    let b = &raw.basis;
    let degrees = b.degree.expand(dim, "basis.degree")?;
    let quad = raw.quadrature.nodes.expand(dim, "quadrature.nodes")?;
    if let Some(q) = quad.iter().find(|&&q| q == 0) {
        return Err(CliError::Config(format!("quadrature.nodes must be positive, got {q}")));
    }
    let factors = match b.kind.as_str() {
        "legendre" => {
            if b.nodes.is_some() {
                return Err(CliError::Config("basis.nodes is only used by bspline bases".into()));
            }
            degrees.iter().map(|&degree| FactorSpec::Legendre { degree }).collect()
        }
        "bspline" => {
            let nodes = b
                .nodes
                .as_ref()
                .ok_or_else(|| CliError::Config("basis kind bspline needs basis.nodes".into()))?
                .expand(dim, "basis.nodes")?;
            if let Some(n) = nodes.iter().find(|&&n| n < 2) {
                return Err(CliError::Config(format!("basis.nodes must be at least 2, got {n}")));
            }
            degrees
                .iter()
                .zip(&nodes)
                .map(|(&degree, &nodes)| FactorSpec::BSpline { nodes, degree })
                .collect()
        }
        other => return Err(CliError::Config(format!("basis.kind {other:?} (expected legendre or bspline)"))),
    };
    let index_set = match b.index_set.as_str() {
        "full" => IndexSet::Full,
        "total_degree" => IndexSet::TotalDegree(degrees.iter().copied().max().unwrap_or(0)),
        other => return Err(CliError::Config(format!("basis.index_set {other:?} (expected full or total_degree)"))),
    };
    Ok(DiscretizationSpec {
        factors,
        index_set,
        quad_nodes: quad,
        normalize_measure: b.normalize_measure,
        equilibrium_vanishing: b.equilibrium_vanishing,
        drop_tol: raw.tolerances.drop_tol,
    })
}

/// Rejects quadrature orders that put a tensor node on a singular point of the weight.
fn check_singular_nodes(spec: &DiscretizationSpec, dom: &BoxDomain, w: &WeightFunction) -> Result<(), CliError> {
    let mut node_sets = Vec::with_capacity(dom.dim());
    for k in 0..dom.dim() {
        let (a, b) = (dom.lower()[k], dom.upper()[k]);
        let n = spec.quad_nodes[k];
        let rule = match spec.factors[k] {
            FactorSpec::Legendre { .. } => gauss_legendre(n, a, b),
            FactorSpec::BSpline { nodes, .. } => composite_rule(&linspace(a, b, nodes), n),
        }
        .map_err(config_err("quadrature"))?;
        node_sets.push(rule.nodes);
    }
    for s in w.singular_points() {
        let hit = s
            .iter()
            .zip(&node_sets)
            .all(|(sk, nodes)| nodes.iter().any(|x| (x - sk).abs() <= SINGULAR_RADIUS));
        if hit {
            return Err(CliError::Config(format!(
                "quadrature.nodes {:?} places a node on the weight singularity at {s:?}; use even orders",
                spec.quad_nodes
            )));
        }
    }
    Ok(())
}

fn validate(raw: RawConfig) -> Result<ProblemConfig, CliError> {
    let mut problem = base_problem(&raw.system, raw.domain.as_ref())?;
    let dim = problem.field.dim_in();
    if let Some(d) = &raw.domain {
        if d.lower.len() != dim || d.upper.len() != dim {
            return Err(CliError::Config(format!("domain.lower and domain.upper must have {dim} entries")));
        }
        let eq = d.equilibrium.clone().unwrap_or_else(|| vec![0.0; dim]);
        problem.domain = BoxDomain::with_equilibrium(d.lower.clone(), d.upper.clone(), eq).map_err(config_err("domain"))?;
        if raw.system.name == "custom" && raw.weight.is_none() {
            problem.weight = WeightFunction::inverse_norm(problem.domain.equilibrium().to_vec());
        }
    }
    if let Some(w) = &raw.weight {
        problem.weight = weight(w, &problem.domain)?;
    }
    let discretization = discretization(&raw, dim)?;
    check_singular_nodes(&discretization, &problem.domain, &problem.weight)?;

    let t = &raw.tolerances;
    let integrator = IntegratorConfig {
        rel_tol: t.rel_tol,
        abs_tol: t.abs_tol,
        max_step: t.max_step,
        max_time: t.max_time,
    };
    integrator.validate().map_err(config_err("tolerances"))?;
    for (name, v) in [
        ("oracle_tail_tol", t.oracle_tail_tol),
        ("trunc_tol", t.trunc_tol),
        ("drop_tol", t.drop_tol),
        ("laguerre_tail_tol", t.laguerre_tail_tol),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::Config(format!("tolerances.{name} must be positive, got {v}")));
        }
    }
    if raw.output.grid < 2 {
        return Err(CliError::Config("output.grid must be at least 2".into()));
    }
    if raw.check.grid < 2 || raw.check.boundary_points < 2 || !(raw.check.horizon > 0.0) {
        return Err(CliError::Config("check.grid and check.boundary_points must be >= 2, check.horizon > 0".into()));
    }
    let reference = match raw.compare.reference.as_str() {
        "oracle" => Reference::Oracle,
        "quadratic" => {
            if !problem.field.is_linear() || problem.cost.observables().iter().any(|c| c.degree() > 1) {
                return Err(CliError::Config(
                    "compare.reference quadratic needs a linear field and linear observables".into(),
                ));
            }
            Reference::Quadratic
        }
        other => return Err(CliError::Config(format!("compare.reference {other:?} (expected oracle or quadratic)"))),
    };
    for (name, b) in [
        ("oracle.lower", &raw.oracle.lower),
        ("oracle.upper", &raw.oracle.upper),
        ("compare.lower", &raw.compare.lower),
        ("compare.upper", &raw.compare.upper),
        ("laguerre.point", &raw.laguerre.point),
    ] {
        if let Some(v) = b {
            if v.len() != dim {
                return Err(CliError::Config(format!("{name} must have {dim} entries")));
            }
        }
    }
    if let Some(p) = raw.oracle.points.iter().find(|p| p.len() != dim) {
        return Err(CliError::Config(format!("oracle.points entry {p:?} must have {dim} entries")));
    }
    if raw.laguerre.observable >= problem.cost.rank() {
        return Err(CliError::Config(format!(
            "laguerre.observable {} out of range ({} observables)",
            raw.laguerre.observable,
            problem.cost.rank()
        )));
    }

    let hash = canonical_hash(&raw)?;
    Ok(ProblemConfig {
        raw,
        problem,
        discretization,
        integrator,
        reference,
        hash,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_takes_linear2d_defaults() {
        let cfg = parse_config("system = linear2d\n").unwrap();
        assert_eq!(cfg.problem.name, "linear2d");
        assert_eq!(cfg.discretization, DiscretizationSpec::legendre(2, 11, 12).with_unit_measure());
        assert_eq!(cfg.problem.domain.lower(), &[-1.0, -1.0]);
        assert_eq!(cfg.seed(), 0);
        assert_eq!(cfg.hash.len(), 64);
    }

    #[test]
    fn bare_words_and_dotted_keys() {
        let cfg = parse_config("system.name=vdp_modified # comment\nbasis.degree = 6\nquadrature.nodes = 8\n").unwrap();
        assert_eq!(cfg.problem.name, "vdp_modified");
        assert_eq!(cfg.discretization.quad_nodes, vec![8, 8]);
        assert_eq!(quote_bare_words("a = true\nb = x # c\n"), "a = true\nb = \"x\" # c\n");
    }

    #[test]
    fn unknown_keys_are_listed() {
        let err = parse_config("system = linear2d\nfoo = 1\n[basis]\ndegre = 3\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("foo") && msg.contains("basis.degre"), "{msg}");
    }

    #[test]
    fn missing_fields_are_named() {
        let err = parse_config("system = linear2d\n[weight]\nkind = hamiltonian\n").unwrap_err();
        assert!(err.to_string().contains("weight.hamiltonian"), "{err}");
        let err = parse_config("[basis]\ndegree = 3\n").unwrap_err();
        assert!(err.to_string().contains("system"), "{err}");
    }

    #[test]
    fn odd_quadrature_on_singular_weight_is_rejected() {
        let err = parse_config("system = linear2d\nquadrature.nodes = 13\n").unwrap_err();
        assert!(err.to_string().contains("singular"), "{err}");
        // A weight centred off the odd rule's nodes is fine.
        let ok = "system = linear2d\nquadrature.nodes = 13\n[weight]\nkind = inverse_norm\ncenter = [0.05, 0.05]\n";
        assert!(parse_config(ok).is_ok());
    }

    #[test]
    fn invalid_values_are_rejected() {
        assert!(parse_config("system = linear2d\nbasis.degree = -1\n").is_err());
        assert!(parse_config("system = linear2d\ntolerances.rel_tol = 0.0\n").is_err());
        assert!(parse_config("system = nosuch\n").is_err());
        assert!(parse_config("system = linear2d\ncompare.reference = quadratic\n").is_ok());
        assert!(parse_config("system = vdp_modified\ncompare.reference = quadratic\n").is_err());
    }

    #[test]
    fn custom_system() {
        let text = r#"
[system]
name = "custom"
dim = 1
field = [[{ coeff = -1.0, exponents = [1] }]]
[domain]
lower = [-1.0]
upper = [1.0]
[quadrature]
nodes = 8
[basis]
degree = 5
"#;
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.problem.field.eval(&[0.5]).unwrap(), vec![-0.5]);
        assert_eq!(cfg.problem.domain.upper(), &[1.0]);
        assert!(parse_config("[system]\nname = \"custom\"\ndim = 1\n").is_err());
    }
}
