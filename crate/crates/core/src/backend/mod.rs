//! Solver-independent MILP model and the backend trait that solves it.
//!
//! [`LinearModel`] is the handle the formulations build on: variables and rows
//! are append-only, so a [`VarId`] stays valid after cuts are added. Backends
//! receive the whole model on every solve.

mod highs_backend;
mod microlp_backend;

use std::fmt::Write as _;
use std::time::Duration;

use thiserror::Error;

pub use highs_backend::HighsBackend;
pub use microlp_backend::MicrolpBackend;

/// Environment variable selecting the default backend (`highs` or `microlp`).
pub const BACKEND_ENV: &str = "MDEVSP_BACKEND";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarType {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lb: f64,
    pub ub: f64,
    pub kind: VarType,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Amount by which `values` violates the row (zero when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Minimization MILP.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearModel {
    vars: Vec<Variable>,
    rows: Vec<Row>,
    objective: Vec<f64>,
}

impl LinearModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> VarId {
        self.push_var(name.into(), 0.0, 1.0, VarType::Binary)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lb: f64, ub: f64) -> VarId {
        self.push_var(name.into(), lb, ub, VarType::Continuous)
    }

    fn push_var(&mut self, name: String, lb: f64, ub: f64, kind: VarType) -> VarId {
        self.vars.push(Variable { name, lb, ub, kind });
        self.objective.push(0.0);
        VarId(self.vars.len() - 1)
    }

    /// Adds a row; repeated variables in `terms` are merged.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> RowId {
        let mut merged: Vec<(VarId, f64)> = Vec::new();
        for (v, c) in terms {
            match merged.iter_mut().find(|(w, _)| *w == v) {
                Some(entry) => entry.1 += c,
                None => merged.push((v, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0.0);
        self.rows.push(Row {
            name: name.into(),
            terms: merged,
            sense,
            rhs,
        });
        RowId(self.rows.len() - 1)
    }

    pub fn set_objective(&mut self, terms: impl IntoIterator<Item = (VarId, f64)>) {
        self.objective.iter_mut().for_each(|c| *c = 0.0);
        for (v, c) in terms {
            self.objective[v.0] += c;
        }
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row(&self, id: RowId) -> &Row {
        &self.rows[id.0]
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_binaries(&self) -> usize {
        self.vars.iter().filter(|v| v.kind == VarType::Binary).count()
    }

    pub fn n_continuous(&self) -> usize {
        self.vars.len() - self.n_binaries()
    }

    pub fn rows_named(&self, prefix: &str) -> impl Iterator<Item = &Row> + '_ {
        let prefix = prefix.to_owned();
        self.rows.iter().filter(move |r| r.name.starts_with(&prefix))
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, v)| c * v).sum()
    }

    /// Largest row or bound violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(values));
        let bounds = self
            .vars
            .iter()
            .zip(values)
            .map(|(v, &x)| (v.lb - x).max(x - v.ub).max(0.0));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    /// CPLEX LP text format.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::from("\\ generated by mdevsp\nMinimize\n obj:");
        let obj: Vec<(VarId, f64)> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(i, c)| (VarId(i), *c))
            .collect();
        if obj.is_empty() {
            out.push_str(" 0");
        }
        self.write_terms(&mut out, &obj);
        out.push_str("\nSubject To\n");
        for row in &self.rows {
            let _ = write!(out, " {}:", row.name);
            if row.terms.is_empty() {
                out.push_str(" 0");
            }
            self.write_terms(&mut out, &row.terms);
            let op = match row.sense {
                Sense::Le => "<=",
                Sense::Eq => "=",
                Sense::Ge => ">=",
            };
            let _ = writeln!(out, " {op} {}", fmt_num(row.rhs));
        }
        out.push_str("Bounds\n");
        for v in self.vars.iter().filter(|v| v.kind == VarType::Continuous) {
            let _ = writeln!(out, " {} <= {} <= {}", fmt_num(v.lb), v.name, fmt_num(v.ub));
        }
        out.push_str("Binaries\n");
        for v in self.vars.iter().filter(|v| v.kind == VarType::Binary) {
            let _ = writeln!(out, " {}", v.name);
        }
        out.push_str("End\n");
        out
    }

    fn write_terms(&self, out: &mut String, terms: &[(VarId, f64)]) {
        for &(v, c) in terms {
            let sign = if c < 0.0 { '-' } else { '+' };
            let _ = write!(out, " {sign} {} {}", fmt_num(c.abs()), self.vars[v.0].name);
        }
    }
}

fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "+inf".into() } else { "-inf".into() }
    } else {
        format!("{x}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    /// Stopped at the time limit with an incumbent.
    Feasible,
    Infeasible,
    /// Stopped at the time limit without an incumbent.
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveParams {
    pub time_limit: Option<Duration>,
    /// Solve the LP relaxation instead of the MILP.
    pub relax_integrality: bool,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendSolution {
    pub status: SolveStatus,
    /// Variable values, present for `Optimal` and `Feasible`.
    pub values: Option<Vec<f64>>,
    pub objective: Option<f64>,
    /// Best proven lower bound.
    pub bound: Option<f64>,
}

impl BackendSolution {
    pub fn infeasible() -> Self {
        BackendSolution {
            status: SolveStatus::Infeasible,
            values: None,
            objective: None,
            bound: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Capabilities {
    pub supports_incumbent_callbacks: bool,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("{backend}: {message}")]
    Solver {
        backend: &'static str,
        message: String,
    },
    #[error("unknown backend `{0}` (expected `highs` or `microlp`)")]
    Unknown(String),
}

pub trait MilpBackend: Send + Sync {
    fn name(&self) -> &'static str;

    fn capabilities(&self) -> Capabilities {
        Capabilities::default()
    }

    fn solve(&self, model: &LinearModel, params: &SolveParams)
        -> Result<BackendSolution, BackendError>;
}

pub fn backend_by_name(name: &str) -> Result<Box<dyn MilpBackend>, BackendError> {
    match name.to_ascii_lowercase().as_str() {
        "highs" => Ok(Box::new(HighsBackend::default())),
        "microlp" => Ok(Box::new(MicrolpBackend)),
        other => Err(BackendError::Unknown(other.to_owned())),
    }
}

/// Backend named by `MDEVSP_BACKEND`, HiGHS when unset.
pub fn backend_from_env() -> Result<Box<dyn MilpBackend>, BackendError> {
    match std::env::var(BACKEND_ENV) {
        Ok(name) if !name.trim().is_empty() => backend_by_name(name.trim()),
        _ => Ok(Box::new(HighsBackend::default())),
    }
}
