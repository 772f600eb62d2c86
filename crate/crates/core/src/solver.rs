//! The three-phase method.
//!
//! 1. Center `Γ̂` coordinate by coordinate (`x_I`).
//! 2. Follow the path of `φ⁽²⁾_τ` from `τ₀` down to `τ_F` (`x_II`).
//! 3. Follow the path of `φ⁽³⁾_π` from `π₀ = τ_F` down to `π_F` with final
//!    tolerance `tol·π_F/16` (`x_III`), which makes `Φ(x_III) − min Φ ≤ tol`.

use std::thread;

use crate::error::{Error, Phase, Result};
use crate::linalg::{self, norm2};
use crate::newton::{damped_newton, default_iter_cap, NewtonResult, Termination};
use crate::path::{path_follow_newton, PathFamily, PathResult};
use crate::problem::{
    check_psi_convexity, eval_phi, make_phi1, phase2_pair, phase3_pair, validate, ConvexityStatus,
    DomainGeometry, Objective, ProblemSpec,
};

/// `ε = min{(δ·Δ/(2048·√n))², 1/36}`
pub fn phase1_tolerance(geometry: &DomainGeometry, spec: &ProblemSpec) -> f64 {
    let r = geometry.shortest_side * spec.delta() / (2048.0 * (spec.n() as f64).sqrt());
    (r * r).min(1.0 / 36.0)
}

/// `⌈64 + log₂(1 − log₂ ε)⌉`
pub fn phase1_iteration_bound(eps: f64) -> usize {
    (64.0 + (1.0 - eps.log2()).log2()).ceil() as usize
}

/// Minimizes the scalar barrier of coordinate `j` from the middle of
/// `(ℓ_j, u_j)`.
pub fn solve_box_j(
    j: usize,
    spec: &ProblemSpec,
    geometry: &DomainGeometry,
    eps: f64,
) -> Result<NewtonResult> {
    let scalar = spec.coordinate(j);
    let gamma_j = make_phi1(&scalar);
    let x0 = [0.5 * (geometry.lower[j] + geometry.upper[j])];
    let r = damped_newton(&gamma_j, &x0, eps, default_iter_cap(1.0));
    match r.termination {
        Termination::DecrementSmall => Ok(r),
        Termination::IterationCap => Err(Error::NumericalFailure {
            phase: Phase::One,
            detail: format!("Newton iteration cap hit on coordinate {j}"),
        }),
        Termination::NumericalFailure(b) => Err(Error::NumericalFailure {
            phase: Phase::One,
            detail: format!("{b} on coordinate {j}"),
        }),
    }
}

#[derive(Debug, Clone)]
pub struct Phase1Trace {
    pub eps: f64,
    pub x: Vec<f64>,
    pub runs: Vec<NewtonResult>,
}

impl Phase1Trace {
    pub fn iterations(&self) -> Vec<usize> {
        self.runs.iter().map(|r| r.iterations).collect()
    }
}

/// Phase 1. Coordinates are independent; with `threads > 1` they are solved
/// in contiguous chunks and reassembled in index order, so the result does
/// not depend on `threads`.
pub fn phase1(
    spec: &ProblemSpec,
    geometry: &DomainGeometry,
    threads: usize,
) -> Result<Phase1Trace> {
    let n = spec.n();
    let eps = phase1_tolerance(geometry, spec);
    let threads = threads.clamp(1, n.max(1));
    let runs: Vec<NewtonResult> = if threads == 1 {
        (0..n)
            .map(|j| solve_box_j(j, spec, geometry, eps))
            .collect::<Result<_>>()?
    } else {
        let chunk = n.div_ceil(threads);
        thread::scope(|s| {
            let handles: Vec<_> = (0..n)
                .step_by(chunk)
                .map(|start| {
                    s.spawn(move || {
                        (start..(start + chunk).min(n))
                            .map(|j| solve_box_j(j, spec, geometry, eps))
                            .collect::<Result<Vec<_>>>()
                    })
                })
                .collect();
            let mut all = Vec::with_capacity(n);
            for h in handles {
                all.extend(h.join().expect("phase-1 worker panicked")?);
            }
            Ok::<_, Error>(all)
        })?
    };
    let x = runs.iter().map(|r| r.x_final[0]).collect();
    Ok(Phase1Trace { eps, x, runs })
}

/// `τ₀ = 64/Δ·(‖Q‖₂·(‖x_L‖₂ + ‖x_R‖₂) + ‖c‖₂)` with `‖Q‖_F` for `‖Q‖₂`,
/// clamped to at least `τ_F`.
pub fn compute_tau0(spec: &ProblemSpec) -> f64 {
    let q_norm = linalg::spectral_norm_upper_bound(spec.q());
    let raw = 64.0 / spec.delta()
        * (q_norm * (norm2(spec.x_lower()) + norm2(spec.x_upper())) + norm2(spec.c()));
    raw.max(spec.tau_f())
}

/// `(1/Δ)·‖∇φ⁽²⁾_τ₀(x)‖₂`; phase 2 requires this to be at most `1/2`.
pub fn phase2_entry_measure(spec: &ProblemSpec, tau0: f64, x: &[f64]) -> f64 {
    let (f, gamma) = phase2_pair(spec);
    let g = PathFamily {
        f: &f,
        barrier: &gamma,
        tau: tau0,
    }
    .gradient(x);
    norm2(&g) / spec.delta()
}

#[derive(Debug, Clone)]
pub struct PathPhaseTrace {
    /// `τ₀` for phase 2, `π₀` for phase 3.
    pub start: f64,
    /// `τ_F` for phase 2, `π_F` for phase 3.
    pub end: f64,
    pub eps: f64,
    pub path: PathResult,
}

pub fn phase2(spec: &ProblemSpec, x_i: &[f64]) -> Result<PathPhaseTrace> {
    let tau0 = compute_tau0(spec);
    let measure = phase2_entry_measure(spec, tau0, x_i);
    if !(measure <= 0.5) {
        return Err(Error::EntryConditionViolated { measure });
    }
    let (f, gamma) = phase2_pair(spec);
    let path = path_follow_newton(&f, &gamma, x_i, tau0, spec.tau_f(), 0.25, Phase::Two)?;
    Ok(PathPhaseTrace {
        start: tau0,
        end: spec.tau_f(),
        eps: 0.25,
        path,
    })
}

pub fn phase3(spec: &ProblemSpec, x_ii: &[f64], tol: f64) -> Result<PathPhaseTrace> {
    let pi0 = spec.tau_f();
    let eps = tol * spec.pi_f() / 16.0;
    let (f, gamma) = phase3_pair(spec);
    let path = path_follow_newton(&f, &gamma, x_ii, pi0, spec.pi_f(), eps, Phase::Three)?;
    Ok(PathPhaseTrace {
        start: pi0,
        end: spec.pi_f(),
        eps,
        path,
    })
}

/// Problem size
/// `L = 1 + log(1+‖Q‖₂) + log(1+‖c‖₂) + log(1+‖x_L‖₂) + log(1+‖x_R‖₂)
///    + log(1+Δ+1/Δ) + log n − log π_F + log(1−log tol) + log(1−log δ)`.
pub fn problem_size(spec: &ProblemSpec, geometry: &DomainGeometry, tol: f64) -> f64 {
    let d = spec.delta();
    1.0 + (1.0 + linalg::spectral_norm(spec.q())).ln()
        + (1.0 + norm2(spec.c())).ln()
        + (1.0 + norm2(spec.x_lower())).ln()
        + (1.0 + norm2(spec.x_upper())).ln()
        + (1.0 + d + 1.0 / d).ln()
        + (spec.n() as f64).ln()
        - spec.pi_f().ln()
        + (1.0 - tol.ln()).ln()
        + (1.0 - geometry.shortest_side.ln()).ln()
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub tol: f64,
    /// Worker threads for phase 1.
    pub threads: usize,
}

impl SolveOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, threads: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct SolveTrace {
    pub phase1: Phase1Trace,
    pub phase2: PathPhaseTrace,
    pub phase3: PathPhaseTrace,
    pub x_i: Vec<f64>,
    pub x_ii: Vec<f64>,
    pub x_iii: Vec<f64>,
    /// Factorizations in phases 2 and 3.
    pub total_linear_solves: usize,
    /// Scalar Newton iterations of phase 1 (no linear systems).
    pub phase1_scalar_steps: usize,
    pub convexity: ConvexityStatus,
    pub problem_size: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub x_hat: Vec<f64>,
    pub phi_value: f64,
    /// `16/π_F·ε`, the guaranteed gap of `Φ(x_hat)`.
    pub certified_gap: f64,
}

pub fn solve(spec: &ProblemSpec, tol: f64) -> Result<(Solution, SolveTrace)> {
    solve_with(spec, &SolveOptions::new(tol))
}

pub fn solve_with(spec: &ProblemSpec, options: &SolveOptions) -> Result<(Solution, SolveTrace)> {
    let tol = options.tol;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::BadParameters(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let geometry = validate(spec)?;
    let mut warnings = Vec::new();
    if spec.asymmetry_warning() {
        warnings.push(format!(
            "input Q was not symmetric (relative asymmetry {:e}); using (Q + Q^T)/2",
            spec.input_asymmetry()
        ));
    }
    let convexity = check_psi_convexity(spec);
    if convexity == ConvexityStatus::Unknown {
        warnings
            .push("psi convexity could not be certified; complexity bounds may not apply".into());
    }

    let phase1 = phase1(spec, &geometry, options.threads)?;
    let bound = phase1_iteration_bound(phase1.eps);
    for (j, r) in phase1.runs.iter().enumerate() {
        if r.iterations > bound {
            warnings.push(format!(
                "phase 1 coordinate {j}: {} iterations exceed bound {bound}",
                r.iterations
            ));
        }
    }
    let x_i = phase1.x.clone();

    let phase2 = phase2(spec, &x_i)?;
    let x_ii = phase2.path.x_final.clone();
    let phase3 = phase3(spec, &x_ii, tol)?;
    let x_iii = phase3.path.x_final.clone();

    for (name, p) in [("phase 2", &phase2.path), ("phase 3", &phase3.path)] {
        for &j in &p.inner_bound_violations {
            warnings.push(format!(
                "{name} outer step {j}: {} inner iterations exceed 380",
                p.inner_iterations_per_step[j]
            ));
        }
        if p.final_bound_violated {
            warnings.push(format!(
                "{name}: final Newton solve took {} iterations",
                p.final_iterations
            ));
        }
    }

    let total_linear_solves = phase2.path.total_linear_solves + phase3.path.total_linear_solves;
    let phase1_scalar_steps = phase1.runs.iter().map(|r| r.iterations).sum();
    let solution = Solution {
        phi_value: eval_phi(spec, &x_iii),
        certified_gap: 16.0 / spec.pi_f() * phase3.eps,
        x_hat: x_iii.clone(),
    };
    let trace = SolveTrace {
        phase1,
        phase2,
        phase3,
        x_i,
        x_ii,
        x_iii,
        total_linear_solves,
        phase1_scalar_steps,
        convexity,
        problem_size: problem_size(spec, &geometry, tol),
        warnings,
    };
    Ok((solution, trace))
}
