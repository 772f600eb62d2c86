//! Damped Newton method with backtracking on self-concordant functions.
//!
//! Each iteration solves `∇²f(x)·Δx = −∇f(x)` by Cholesky, stops once
//! `λ²/2 ≤ ε` with `λ² = −Δxᵀ∇f(x)`, and otherwise backtracks from `t = 1`
//! by `t ← 0.8·t` until `f(x + tΔx) ≤ f(x) − 0.1·t·λ²`. Points outside the
//! domain evaluate to `+∞` and are rejected by the same test.

use crate::linalg::{norm2, Cholesky, LinalgError};
use crate::problem::Objective;

pub const ARMIJO_FRACTION: f64 = 0.1;
pub const BACKTRACK_FACTOR: f64 = 0.8;
/// Step lengths below this are treated as a breakdown.
pub const MIN_STEP: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Breakdown {
    /// The Hessian failed to factor.
    NotPositiveDefinite { pivot: usize, value: f64 },
    /// Backtracking shrank `t` below [`MIN_STEP`].
    StepUnderflow,
    /// `λ²` was NaN or infinite.
    NonFiniteDecrement,
    /// `λ² < 0` from rounding while the gradient is not small.
    NegativeDecrement(f64),
    /// The starting point is outside the domain.
    InfeasibleStart,
}

impl std::fmt::Display for Breakdown {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Breakdown::NotPositiveDefinite { pivot, value } => {
                write!(
                    f,
                    "Hessian not positive definite (pivot {pivot} = {value:e})"
                )
            }
            Breakdown::StepUnderflow => write!(f, "line search step fell below {MIN_STEP:e}"),
            Breakdown::NonFiniteDecrement => write!(f, "non-finite Newton decrement"),
            Breakdown::NegativeDecrement(v) => write!(f, "negative Newton decrement {v:e}"),
            Breakdown::InfeasibleStart => write!(f, "starting point outside the domain"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    DecrementSmall,
    IterationCap,
    NumericalFailure(Breakdown),
}

/// One row of the iteration log: the state at iterate `k` and the step taken
/// from it. The final row of a converged run has `t == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonStep {
    pub value: f64,
    pub lambda_sq: f64,
    pub t: f64,
    pub backtracks: usize,
}

#[derive(Debug, Clone)]
pub struct NewtonResult {
    pub x_final: Vec<f64>,
    /// Number of Newton steps taken.
    pub iterations: usize,
    pub decrement_sq_history: Vec<f64>,
    pub line_search_steps: usize,
    pub termination: Termination,
    pub steps: Vec<NewtonStep>,
}

impl NewtonResult {
    pub fn converged(&self) -> bool {
        self.termination == Termination::DecrementSmall
    }

    /// Linear systems factored during the run, one per evaluated iterate.
    pub fn linear_solves(&self) -> usize {
        self.decrement_sq_history.len()
    }
}

/// Newton step and squared decrement at `x`.
pub fn newton_decrement_sq<F: Objective + ?Sized>(
    f: &F,
    x: &[f64],
) -> Result<(f64, Vec<f64>), LinalgError> {
    let g = f.gradient(x);
    let h = f.hessian(x);
    let mut step = Cholesky::factor(&h)?.solve(&g);
    step.iter_mut().for_each(|s| *s = -*s);
    let lambda_sq = -step.iter().zip(&g).map(|(s, gi)| s * gi).sum::<f64>();
    Ok((lambda_sq, step))
}

/// Iteration cap `10·(375·gap + 64)`, at least 500.
pub fn default_iter_cap(gap_estimate: f64) -> usize {
    let cap = 10.0 * (375.0 * gap_estimate.max(0.0) + 64.0);
    if cap.is_finite() {
        (cap.ceil() as usize).max(500)
    } else {
        usize::MAX
    }
}

/// `375·gap + log₂(1 − log₂ ε)`: iterations needed from a start whose
/// optimality gap is `gap`.
pub fn iteration_bound(initial_gap: f64, eps: f64) -> f64 {
    375.0 * initial_gap + (1.0 - eps.log2()).log2()
}

/// `⌈log₂(1 − log₂ ε)⌉`: iterations needed from a start within `1/4` of optimal.
pub fn quadratic_phase_bound(eps: f64) -> f64 {
    (1.0 - eps.log2()).log2().ceil()
}

pub fn damped_newton<F: Objective + ?Sized>(
    f: &F,
    x0: &[f64],
    eps: f64,
    iter_cap: usize,
) -> NewtonResult {
    let mut x = x0.to_vec();
    let mut history = Vec::new();
    let mut steps = Vec::new();
    let mut line_search_steps = 0;
    let mut fx = f.value(&x);

    let finish = |x: Vec<f64>, k, history, ls, steps, termination| NewtonResult {
        x_final: x,
        iterations: k,
        decrement_sq_history: history,
        line_search_steps: ls,
        termination,
        steps,
    };

    if !fx.is_finite() {
        let t = Termination::NumericalFailure(Breakdown::InfeasibleStart);
        return finish(x, 0, history, 0, steps, t);
    }

    let mut k = 0;
    loop {
        let (mut lambda_sq, step) = match newton_decrement_sq(f, &x) {
            Ok(r) => r,
            Err(LinalgError::NotPositiveDefinite { pivot, value }) => {
                let t =
                    Termination::NumericalFailure(Breakdown::NotPositiveDefinite { pivot, value });
                return finish(x, k, history, line_search_steps, steps, t);
            }
            Err(e @ LinalgError::DimensionMismatch { .. }) => unreachable!("{e}"),
        };
        if !lambda_sq.is_finite() {
            let t = Termination::NumericalFailure(Breakdown::NonFiniteDecrement);
            return finish(x, k, history, line_search_steps, steps, t);
        }
        if lambda_sq < 0.0 {
            // rounding only: the factored Hessian is positive definite
            if norm2(&f.gradient(&x)) <= eps.sqrt() {
                lambda_sq = 0.0;
            } else {
                let t = Termination::NumericalFailure(Breakdown::NegativeDecrement(lambda_sq));
                return finish(x, k, history, line_search_steps, steps, t);
            }
        }
        history.push(lambda_sq);

        if 0.5 * lambda_sq <= eps {
            steps.push(NewtonStep {
                value: fx,
                lambda_sq,
                t: 0.0,
                backtracks: 0,
            });
            return finish(
                x,
                k,
                history,
                line_search_steps,
                steps,
                Termination::DecrementSmall,
            );
        }
        if k >= iter_cap {
            steps.push(NewtonStep {
                value: fx,
                lambda_sq,
                t: 0.0,
                backtracks: 0,
            });
            return finish(
                x,
                k,
                history,
                line_search_steps,
                steps,
                Termination::IterationCap,
            );
        }

        let mut t = 1.0;
        let mut backtracks = 0;
        let mut trial: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + si).collect();
        let mut f_trial = f.value(&trial);
        // `!(a <= b)` also rejects NaN
        while !(f_trial <= fx - ARMIJO_FRACTION * t * lambda_sq) {
            t *= BACKTRACK_FACTOR;
            backtracks += 1;
            if t < MIN_STEP {
                steps.push(NewtonStep {
                    value: fx,
                    lambda_sq,
                    t,
                    backtracks,
                });
                let term = Termination::NumericalFailure(Breakdown::StepUnderflow);
                return finish(x, k, history, line_search_steps + backtracks, steps, term);
            }
            for ((ti, xi), si) in trial.iter_mut().zip(&x).zip(&step) {
                *ti = xi + t * si;
            }
            f_trial = f.value(&trial);
        }
        line_search_steps += backtracks;
        steps.push(NewtonStep {
            value: fx,
            lambda_sq,
            t,
            backtracks,
        });
        x = trial;
        fx = f_trial;
        k += 1;
    }
}
