//! Scenario files: a space, named inputs, and a command list.

use std::collections::BTreeMap;

use choquet_core::ordering::ConvexPL;
use choquet_core::{AtomicMeasure, DFunction, ProbabilityAtoms, Space, VectorMeasure};
use serde::Deserialize;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub space: Space,
    #[serde(default)]
    pub vector_measures: BTreeMap<String, VectorMeasure>,
    #[serde(default)]
    pub atomic_measures: BTreeMap<String, AtomicMeasure>,
    #[serde(default)]
    pub dfunctions: BTreeMap<String, DFunction>,
    #[serde(default)]
    pub probabilities: BTreeMap<String, ProbabilityAtoms>,
    pub commands: Vec<Command>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
pub enum Rel {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Row {
    pub row: Vec<f64>,
    pub rel: Rel,
    pub rhs: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bound {
    pub var: usize,
    #[serde(default)]
    pub lower: Option<f64>,
    #[serde(default)]
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Max,
    Min,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Command {
    PrimalNorm {
        x: Vec<f64>,
    },
    DualNorm {
        xstar: Vec<f64>,
    },
    ExtremePoints,
    Facets,
    MinimalFace {
        xstar: Vec<f64>,
    },
    IsStrictlyConvex,
    IsSimplexoid,
    Lp {
        sense: Sense,
        objective: Vec<f64>,
        constraints: Vec<Row>,
        #[serde(default)]
        bounds: Vec<Bound>,
    },
    TotalVariation {
        measure: String,
    },
    Pair {
        measure: String,
        g: BTreeMap<String, Vec<f64>>,
    },
    Mass {
        measure: String,
    },
    Disintegrate {
        measure: String,
    },
    Barycenter {
        probability: String,
    },
    Hustad {
        measure: String,
    },
    Transfer {
        measure: String,
    },
    Tilde {
        measure: String,
    },
    Density {
        measure: String,
    },
    InN {
        measure: String,
        mu: String,
    },
    EvalPf {
        dfunction: String,
        measure: String,
    },
    IntegrateD {
        dfunction: String,
        measure: String,
    },
    ChoquetLeq {
        p: String,
        q: String,
    },
    IsMaximal {
        probability: String,
    },
    Maximalize {
        probability: String,
    },
    Envelope {
        f: ConvexPL<f64>,
        at: Vec<f64>,
    },
    Mokobodzki {
        probability: String,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    Precd {
        nu1: String,
        nu2: String,
    },
    IsMinimal {
        measure: String,
        mu: String,
    },
    Minimalize {
        measure: String,
        mu: String,
    },
    EnumerateMinimal {
        mu: String,
    },
    Sublinear {
        p: String,
        q: String,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    PrecB {
        mu1: String,
        mu2: String,
    },
    Verify {
        suite: String,
        #[serde(default)]
        trials: Option<usize>,
        #[serde(default)]
        seed: Option<u64>,
    },
}

fn default_samples() -> usize {
    2000
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::PrimalNorm { .. } => "primal_norm",
            Command::DualNorm { .. } => "dual_norm",
            Command::ExtremePoints => "extreme_points",
            Command::Facets => "facets",
            Command::MinimalFace { .. } => "minimal_face",
            Command::IsStrictlyConvex => "is_strictly_convex",
            Command::IsSimplexoid => "is_simplexoid",
            Command::Lp { .. } => "lp",
            Command::TotalVariation { .. } => "total_variation",
            Command::Pair { .. } => "pair",
            Command::Mass { .. } => "mass",
            Command::Disintegrate { .. } => "disintegrate",
            Command::Barycenter { .. } => "barycenter",
            Command::Hustad { .. } => "hustad",
            Command::Transfer { .. } => "transfer",
            Command::Tilde { .. } => "tilde",
            Command::Density { .. } => "density",
            Command::InN { .. } => "in_n",
            Command::EvalPf { .. } => "eval_pf",
            Command::IntegrateD { .. } => "integrate_d",
            Command::ChoquetLeq { .. } => "choquet_leq",
            Command::IsMaximal { .. } => "is_maximal",
            Command::Maximalize { .. } => "maximalize",
            Command::Envelope { .. } => "envelope",
            Command::Mokobodzki { .. } => "mokobodzki",
            Command::Precd { .. } => "precd",
            Command::IsMinimal { .. } => "is_minimal",
            Command::Minimalize { .. } => "minimalize",
            Command::EnumerateMinimal { .. } => "enumerate_minimal",
            Command::Sublinear { .. } => "sublinear",
            Command::PrecB { .. } => "prec_b",
            Command::Verify { .. } => "verify",
        }
    }
}

enum Kind {
    Vector,
    Atomic,
    Probability,
    DFunction,
}

impl Scenario {
    /// Parses and validates a scenario; `tol` replaces the geometric
    /// tolerance of the space before any check runs.
    pub fn parse(text: &str, tol: Option<f64>) -> Result<Self, String> {
        let mut s: Scenario = serde_json::from_str(text).map_err(|e| format!("scenario: {e}"))?;
        if s.schema != SCHEMA {
            return Err(format!(
                "scenario: unsupported schema {}, expected {SCHEMA}",
                s.schema
            ));
        }
        if let Some(t) = tol {
            s.space = s.space.retolerance(t).map_err(|e| format!("--tol: {e}"))?;
        }
        s.validate()?;
        Ok(s)
    }

    /// Checks dimensions of every named input and that every reference
    /// resolves, before anything runs.
    fn validate(&self) -> Result<(), String> {
        let sp = &self.space;
        for (n, m) in &self.vector_measures {
            m.validate(sp)
                .map_err(|e| format!("vector_measures.{n}: {e}"))?;
        }
        for (n, m) in &self.atomic_measures {
            m.validate(sp)
                .map_err(|e| format!("atomic_measures.{n}: {e}"))?;
        }
        for (n, p) in &self.probabilities {
            p.validate(sp)
                .map_err(|e| format!("probabilities.{n}: {e}"))?;
        }
        for (n, f) in &self.dfunctions {
            for (t, pieces) in &f.pieces {
                if pieces.is_empty() {
                    return Err(format!("dfunctions.{n}.pieces.{t}: no pieces"));
                }
                if let Some(p) = pieces.iter().find(|p| p.len() != sp.dim()) {
                    return Err(format!(
                        "dfunctions.{n}.pieces.{t}: piece of length {}, space has dimension {}",
                        p.len(),
                        sp.dim()
                    ));
                }
            }
        }
        for (i, c) in self.commands.iter().enumerate() {
            let at = |field: &str| format!("commands[{i}].{field}");
            for (field, name, kind) in references(c) {
                let found = match kind {
                    Kind::Vector => self.vector_measures.contains_key(name),
                    Kind::Atomic => self.atomic_measures.contains_key(name),
                    Kind::Probability => self.probabilities.contains_key(name),
                    Kind::DFunction => self.dfunctions.contains_key(name),
                };
                if !found {
                    let what = match kind {
                        Kind::Vector => "vector measure",
                        Kind::Atomic => "atomic measure",
                        Kind::Probability => "probability",
                        Kind::DFunction => "dfunction",
                    };
                    return Err(format!("{}: unknown {what} `{name}`", at(field)));
                }
            }
            let dim_of = |field: &str, v: &[f64]| {
                if v.len() == sp.dim() {
                    Ok(())
                } else {
                    Err(format!(
                        "{}: length {}, space has dimension {}",
                        at(field),
                        v.len(),
                        sp.dim()
                    ))
                }
            };
            match c {
                Command::PrimalNorm { x } => dim_of("x", x)?,
                Command::DualNorm { xstar } | Command::MinimalFace { xstar } => {
                    dim_of("xstar", xstar)?
                }
                Command::Envelope { f, at: x } => {
                    dim_of("at", x)?;
                    if f.pieces().is_empty() {
                        return Err(format!("{}: no pieces", at("f")));
                    }
                    for p in f.pieces() {
                        dim_of("f.pieces", &p.a)?;
                    }
                }
                Command::Lp {
                    objective,
                    constraints,
                    bounds,
                    ..
                } => {
                    let n = objective.len();
                    for (j, r) in constraints.iter().enumerate() {
                        if r.row.len() != n {
                            return Err(format!(
                                "{}: row of length {}, objective has {n} variables",
                                at(&format!("constraints[{j}]")),
                                r.row.len()
                            ));
                        }
                    }
                    if let Some(b) = bounds.iter().find(|b| b.var >= n) {
                        return Err(format!("{}: variable {} out of range", at("bounds"), b.var));
                    }
                }
                Command::Verify { suite, .. }
                    if !choquet_core::suites::SUITES.contains(&suite.as_str()) =>
                {
                    return Err(format!("{}: unknown suite `{suite}`", at("suite")));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn references(c: &Command) -> Vec<(&'static str, &str, Kind)> {
    use Command::*;
    match c {
        TotalVariation { measure } | Pair { measure, .. } | Transfer { measure } => {
            vec![("measure", measure, Kind::Vector)]
        }
        Mass { measure }
        | Disintegrate { measure }
        | Hustad { measure }
        | Tilde { measure }
        | Density { measure } => vec![("measure", measure, Kind::Atomic)],
        Barycenter { probability }
        | IsMaximal { probability }
        | Maximalize { probability }
        | Mokobodzki { probability, .. } => vec![("probability", probability, Kind::Probability)],
        InN { measure, mu } | IsMinimal { measure, mu } | Minimalize { measure, mu } => {
            vec![("measure", measure, Kind::Atomic), ("mu", mu, Kind::Vector)]
        }
        EvalPf { dfunction, measure } => vec![
            ("dfunction", dfunction, Kind::DFunction),
            ("measure", measure, Kind::Vector),
        ],
        IntegrateD { dfunction, measure } => vec![
            ("dfunction", dfunction, Kind::DFunction),
            ("measure", measure, Kind::Atomic),
        ],
        ChoquetLeq { p, q } | Sublinear { p, q, .. } => {
            vec![("p", p, Kind::Probability), ("q", q, Kind::Probability)]
        }
        Precd { nu1, nu2 } => vec![("nu1", nu1, Kind::Atomic), ("nu2", nu2, Kind::Atomic)],
        EnumerateMinimal { mu } => vec![("mu", mu, Kind::Vector)],
        PrecB { mu1, mu2 } => vec![("mu1", mu1, Kind::Vector), ("mu2", mu2, Kind::Vector)],
        PrimalNorm { .. }
        | DualNorm { .. }
        | ExtremePoints
        | Facets
        | MinimalFace { .. }
        | IsStrictlyConvex
        | IsSimplexoid
        | Lp { .. }
        | Envelope { .. }
        | Verify { .. } => Vec::new(),
    }
}
