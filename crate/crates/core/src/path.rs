//! Short-step primal path-following on `φ_τ = f/τ + Γ`.
//!
//! `τ` shrinks geometrically by `σ = 1/(1 + 1/√|Γ|)` from `τ₀` to `τ_E`;
//! after each shrink the previous point is recentered by damped Newton to
//! tolerance `1/4`, and a final Newton solve at `τ_E` reaches the caller's
//! tolerance.

use crate::error::{Error, Phase, Result};
use crate::linalg::Matrix;
use crate::newton::{
    damped_newton, default_iter_cap, quadratic_phase_bound, NewtonResult, Termination,
};
use crate::problem::Objective;

/// Tolerance of every centering solve before the final one.
pub const CENTERING_TOL: f64 = 0.25;
/// Inner iteration bound of a centering solve.
pub const INNER_ITERATION_BOUND: usize = 380;
/// Slack added to `⌈log₂(1 − log₂ ε)⌉` when checking the final solve.
pub const FINAL_SOLVE_SLACK: usize = 5;

/// `f/τ + Γ` for a fixed `τ`.
pub struct PathFamily<'a, F: ?Sized, G: ?Sized> {
    pub f: &'a F,
    pub barrier: &'a G,
    pub tau: f64,
}

impl<F: Objective + ?Sized, G: Objective + ?Sized> Objective for PathFamily<'_, F, G> {
    fn dim(&self) -> usize {
        self.barrier.dim()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let b = self.barrier.value(x);
        if b == f64::INFINITY {
            return b;
        }
        let v = self.f.value(x) / self.tau + b;
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let inv = 1.0 / self.tau;
        let mut g = self.barrier.gradient(x);
        for (gi, fi) in g.iter_mut().zip(self.f.gradient(x)) {
            *gi += inv * fi;
        }
        g
    }

    fn hessian(&self, x: &[f64]) -> Matrix {
        let mut h = self.barrier.hessian(x);
        h.add_scaled(1.0 / self.tau, &self.f.hessian(x));
        h
    }

    fn barrier_weight(&self) -> f64 {
        self.barrier.barrier_weight()
    }
}

/// `σ = 1/(1 + 1/√|Γ|)`
pub fn shrink_factor(barrier_weight: f64) -> f64 {
    1.0 / (1.0 + 1.0 / barrier_weight.sqrt())
}

/// `⌈log(|Γ|·τ₀/τ_E) / log(1 + 1/√|Γ|)⌉`
pub fn outer_iteration_bound(barrier_weight: f64, tau0: f64, tau_e: f64) -> f64 {
    ((barrier_weight * tau0 / tau_e).ln() / (1.0 + 1.0 / barrier_weight.sqrt()).ln()).ceil()
}

/// One damped-Newton solve inside a path-following run.
#[derive(Debug, Clone)]
pub struct InnerSolve {
    pub outer_step: usize,
    pub tau: f64,
    pub is_final: bool,
    pub result: NewtonResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathTermination {
    Converged,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct PathResult {
    pub x_final: Vec<f64>,
    /// Centering steps executed by the loop.
    pub outer_iterations: usize,
    /// Newton steps of each centering solve.
    pub inner_iterations_per_step: Vec<usize>,
    /// Newton steps of the final solve at `τ_E`.
    pub final_iterations: usize,
    pub total_linear_solves: usize,
    pub tau_schedule: Vec<f64>,
    pub termination: PathTermination,
    pub solves: Vec<InnerSolve>,
    /// Outer steps whose centering solve needed more than
    /// [`INNER_ITERATION_BOUND`] iterations.
    pub inner_bound_violations: Vec<usize>,
    /// The final solve exceeded `⌈log₂(1 − log₂ ε)⌉ + 5` iterations.
    pub final_bound_violated: bool,
    pub shrink_factor: f64,
}

/// Follows the central path of `f/τ + Γ` from `tau0` down to `tau_e`.
///
/// `x_start` must be within `1/4` of the minimum of `f/tau0 + Γ`. `phase` tags
/// any error.
pub fn path_follow_newton<F, G>(
    f: &F,
    barrier: &G,
    x_start: &[f64],
    tau0: f64,
    tau_e: f64,
    eps: f64,
    phase: Phase,
) -> Result<PathResult>
where
    F: Objective + ?Sized,
    G: Objective + ?Sized,
{
    if !(tau_e > 0.0 && tau_e <= tau0) {
        return Err(Error::BadParameters(format!(
            "need 0 < tau_E <= tau_0, got tau_E = {tau_e}, tau_0 = {tau0}"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::BadParameters(format!(
            "path tolerance must be positive, got {eps}"
        )));
    }

    let sigma = shrink_factor(barrier.barrier_weight());
    let centering_cap = default_iter_cap(1.0);
    let mut tau = tau0;
    let mut x = x_start.to_vec();
    let mut out = PathResult {
        x_final: Vec::new(),
        outer_iterations: 0,
        inner_iterations_per_step: Vec::new(),
        final_iterations: 0,
        total_linear_solves: 0,
        tau_schedule: Vec::new(),
        termination: PathTermination::Converged,
        solves: Vec::new(),
        inner_bound_violations: Vec::new(),
        final_bound_violated: false,
        shrink_factor: sigma,
    };

    loop {
        let j = out.outer_iterations;
        tau = tau_e.max(sigma * tau);
        let g = PathFamily { f, barrier, tau };
        let r = damped_newton(&g, &x, CENTERING_TOL, centering_cap);
        out.tau_schedule.push(tau);
        out.inner_iterations_per_step.push(r.iterations);
        out.total_linear_solves += r.linear_solves();
        out.outer_iterations += 1;
        if r.iterations > INNER_ITERATION_BOUND {
            out.inner_bound_violations.push(j);
        }
        check(&r, phase, j, tau)?;
        x = r.x_final.clone();
        out.solves.push(InnerSolve {
            outer_step: j,
            tau,
            is_final: false,
            result: r,
        });
        if tau == tau_e {
            break;
        }
    }

    let g = PathFamily {
        f,
        barrier,
        tau: tau_e,
    };
    let r = damped_newton(&g, &x, eps, default_iter_cap(CENTERING_TOL));
    out.final_iterations = r.iterations;
    out.total_linear_solves += r.linear_solves();
    out.final_bound_violated =
        r.iterations as f64 > quadratic_phase_bound(eps) + FINAL_SOLVE_SLACK as f64;
    check(&r, phase, out.outer_iterations, tau_e)?;
    out.x_final = r.x_final.clone();
    out.solves.push(InnerSolve {
        outer_step: out.outer_iterations,
        tau: tau_e,
        is_final: true,
        result: r,
    });
    Ok(out)
}

fn check(r: &NewtonResult, phase: Phase, step: usize, tau: f64) -> Result<()> {
    match r.termination {
        Termination::DecrementSmall => Ok(()),
        Termination::IterationCap => Err(Error::NumericalFailure {
            phase,
            detail: format!("Newton iteration cap hit at outer step {step} (tau = {tau:e})"),
        }),
        Termination::NumericalFailure(b) => Err(Error::NumericalFailure {
            phase,
            detail: format!("{b} at outer step {step} (tau = {tau:e})"),
        }),
    }
}
