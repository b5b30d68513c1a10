use microlp::{
    ComparisonOp, Error as LpError, LinearExpr, OptimizationDirection, Problem, SolutionStatus,
    SolveOptions, SolveOutcome,
};

use super::{
    BackendError, BackendSolution, LinearModel, MilpBackend, Sense, SolveParams, SolveStatus,
    VarType,
};

/// Pure-Rust branch and bound. Slower than HiGHS but needs no C++ toolchain.
#[derive(Debug, Clone, Copy, Default)]
pub struct MicrolpBackend;

impl MilpBackend for MicrolpBackend {
    fn name(&self) -> &'static str {
        "microlp"
    }

    fn solve(
        &self,
        model: &LinearModel,
        params: &SolveParams,
    ) -> Result<BackendSolution, BackendError> {
        let mut pb = Problem::new(OptimizationDirection::Minimize);
        let vars: Vec<_> = model
            .vars()
            .iter()
            .zip(model.objective())
            .map(|(v, &c)| {
                if v.kind == VarType::Binary && !params.relax_integrality {
                    pb.add_binary_var(c)
                } else {
                    pb.add_var(c, (v.lb, v.ub))
                }
            })
            .collect();
        for row in model.rows() {
            let mut expr = LinearExpr::empty();
            for &(v, c) in &row.terms {
                expr.add(vars[v.0], c);
            }
            let op = match row.sense {
                Sense::Le => ComparisonOp::Le,
                Sense::Ge => ComparisonOp::Ge,
                Sense::Eq => ComparisonOp::Eq,
            };
            pb.add_constraint(expr, op, row.rhs);
        }

        let mut options = SolveOptions::default();
        options.time_limit = params.time_limit;
        options.mip_gap = 0.0;
        let outcome = match pb.solve_with(options) {
            Ok(o) => o,
            Err(LpError::Infeasible) => return Ok(BackendSolution::infeasible()),
            Err(e) => {
                return Err(BackendError::Solver {
                    backend: "microlp",
                    message: e.to_string(),
                })
            }
        };
        match outcome {
            SolveOutcome::Solution(sol) => {
                let values: Vec<f64> = vars.iter().map(|&v| sol.var_value_raw(v)).collect();
                let objective = model.objective_value(&values);
                let (status, bound) = match sol.status() {
                    SolutionStatus::Optimal => (SolveStatus::Optimal, Some(objective)),
                    SolutionStatus::Feasible => (SolveStatus::Feasible, sol.stats().best_bound),
                };
                Ok(BackendSolution {
                    status,
                    values: Some(values),
                    objective: Some(objective),
                    bound,
                })
            }
            SolveOutcome::Interrupted(i) => Ok(BackendSolution {
                status: SolveStatus::TimeLimit,
                values: None,
                objective: None,
                bound: i.stats().best_bound,
            }),
        }
    }
}
