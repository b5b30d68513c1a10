use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem, Sense as HSense};

use super::{
    BackendError, BackendSolution, LinearModel, MilpBackend, Sense, SolveParams, SolveStatus,
    VarType,
};

/// HiGHS branch-and-cut, run to a zero relative gap.
#[derive(Debug, Clone)]
pub struct HighsBackend {
    pub threads: Option<i32>,
}

impl Default for HighsBackend {
    fn default() -> Self {
        HighsBackend { threads: Some(1) }
    }
}

impl MilpBackend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve(
        &self,
        model: &LinearModel,
        params: &SolveParams,
    ) -> Result<BackendSolution, BackendError> {
        let mut pb = RowProblem::default();
        let cols: Vec<_> = model
            .vars()
            .iter()
            .zip(model.objective())
            .map(|(v, &c)| {
                if v.kind == VarType::Binary && !params.relax_integrality {
                    pb.add_integer_column(c, v.lb..=v.ub)
                } else {
                    pb.add_column(c, v.lb..=v.ub)
                }
            })
            .collect();
        for row in model.rows() {
            let factors = row.terms.iter().map(|&(v, c)| (cols[v.0], c));
            match row.sense {
                Sense::Le => pb.add_row(..=row.rhs, factors),
                Sense::Ge => pb.add_row(row.rhs.., factors),
                Sense::Eq => pb.add_row(row.rhs..=row.rhs, factors),
            }
        }

        let mut m = pb.optimise(HSense::Minimise);
        m.make_quiet();
        m.set_option("mip_rel_gap", 0.0);
        m.set_option("mip_abs_gap", 1e-6);
        m.set_option("primal_feasibility_tolerance", 1e-9);
        m.set_option("mip_feasibility_tolerance", 1e-9);
        m.set_option("random_seed", (params.seed % i32::MAX as u64) as i32);
        if let Some(t) = self.threads {
            m.set_option("threads", t);
        }
        if let Some(limit) = params.time_limit {
            m.set_option("time_limit", limit.as_secs_f64().max(1e-3));
        }
        let solved = m.try_solve().map_err(|e| BackendError::Solver {
            backend: "highs",
            message: format!("{e:?}"),
        })?;

        let has_primal = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let status = match solved.status() {
            HighsModelStatus::Optimal => SolveStatus::Optimal,
            HighsModelStatus::Infeasible => return Ok(BackendSolution::infeasible()),
            HighsModelStatus::ModelEmpty => SolveStatus::Optimal,
            HighsModelStatus::ReachedTimeLimit
            | HighsModelStatus::ReachedIterationLimit
            | HighsModelStatus::ReachedSolutionLimit
            | HighsModelStatus::ReachedInterrupt => {
                if has_primal {
                    SolveStatus::Feasible
                } else {
                    SolveStatus::TimeLimit
                }
            }
            HighsModelStatus::UnboundedOrInfeasible if !has_primal => {
                return Ok(BackendSolution::infeasible())
            }
            other => {
                return Err(BackendError::Solver {
                    backend: "highs",
                    message: format!("unexpected model status {other:?}"),
                })
            }
        };
        if status == SolveStatus::TimeLimit {
            let bound = solved.double_info_value(c"mip_dual_bound").ok();
            return Ok(BackendSolution {
                status,
                values: None,
                objective: None,
                bound: bound.filter(|b| b.is_finite()),
            });
        }
        let values = solved.get_solution().columns().to_vec();
        let objective = model.objective_value(&values);
        let bound = if params.relax_integrality || model.n_binaries() == 0 {
            Some(objective)
        } else {
            solved
                .double_info_value(c"mip_dual_bound")
                .ok()
                .filter(|b| b.is_finite())
        };
        let bound = match status {
            SolveStatus::Optimal => Some(bound.map_or(objective, |b| b.min(objective))),
            _ => bound,
        };
        Ok(BackendSolution {
            status,
            values: Some(values),
            objective: Some(objective),
            bound,
        })
    }
}
