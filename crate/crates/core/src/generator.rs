//! Seeded random instances with certified convexity of `ψ`.
//!
//! The stream is xoshiro256++ seeded through SplitMix64 (`seed_from_u64`);
//! a uniform draw in `[0, 1)` is the top 53 bits of one output times `2⁻⁵³`.
//! Draw order, for a fixed `n`:
//!
//! 1. `M`, `(n−1)×n`, row-major, entries `(2u − 1)/√n`;
//! 2. `c_j = 2u − 1`;
//! 3. per coordinate: centre `p_j = 0.9·Δ·(2u − 1)`, two half-widths
//!    `box_scale·(1 − tightness)·(0.05 + 0.95u)`, and one draw that
//!    stretches the upper side by 4 when it falls below `1/8`.
//!
//! `Q = MᵀM + q_min_eig·I`, so `λ_min(Q) = q_min_eig` up to rounding for
//! `n ≥ 2` (`MᵀM` is singular).

use rand_xoshiro::rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::linalg::{min_eigenvalue, Matrix};
use crate::problem::ProblemSpec;

/// Safety factor applied to the smallest `τ_F` that certifies `ψ`.
pub const TAU_MARGIN: f64 = 1.1;
const FAR_SIDE_PROBABILITY: f64 = 0.125;
const FAR_SIDE_STRETCH: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n: usize,
    pub seed: u64,
    pub q_min_eig: f64,
    pub box_scale: f64,
    pub delta: f64,
    pub tau_f: f64,
    pub pi_f: f64,
    /// In `[0, 1)`; box widths scale with `1 − tightness`.
    pub tightness: f64,
}

impl GenParams {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            q_min_eig: 0.0,
            box_scale: 2.0,
            delta: 1.0,
            tau_f: 1.0,
            pi_f: 0.01,
            tightness: 0.0,
        }
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::BadParameters(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if !self.q_min_eig.is_finite() {
            return bad(format!("q_min_eig must be finite, got {}", self.q_min_eig));
        }
        for (name, v) in [
            ("box_scale", self.box_scale),
            ("delta", self.delta),
            ("tau_F", self.tau_f),
            ("pi_F", self.pi_f),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if !(0.0..1.0).contains(&self.tightness) {
            return bad(format!(
                "tightness must lie in [0, 1), got {}",
                self.tightness
            ));
        }
        Ok(())
    }
}

/// Uniform in `[0, 1)` from the top 53 bits of one output.
pub fn unit_f64<R: Rng>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// `1.1 · max(0, −λ_min) · w²/4`: the least `τ_F` with
/// `λ_min + 4τ_F/w² ≥ 0`, plus the margin.
pub fn required_tau_f(lambda_min: f64, max_width: f64) -> f64 {
    TAU_MARGIN * (-lambda_min).max(0.0) * max_width * max_width / 4.0
}

pub fn generate(params: &GenParams) -> Result<ProblemSpec> {
    params.check()?;
    let n = params.n;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(params.seed);
    let mut u = || unit_f64(&mut rng);

    let scale = 1.0 / (n as f64).sqrt();
    let m: Vec<f64> = (0..(n - 1) * n)
        .map(|_| (2.0 * u() - 1.0) * scale)
        .collect();
    let mut q = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            q[(i, j)] = (0..n - 1).map(|k| m[k * n + i] * m[k * n + j]).sum();
        }
    }
    q.add_to_diagonal(&vec![params.q_min_eig; n]);
    q.symmetrize();

    let c: Vec<f64> = (0..n).map(|_| 2.0 * u() - 1.0).collect();

    let half = params.box_scale * (1.0 - params.tightness);
    let mut x_lower = Vec::with_capacity(n);
    let mut x_upper = Vec::with_capacity(n);
    for _ in 0..n {
        let p = 0.9 * params.delta * (2.0 * u() - 1.0);
        let below = half * (0.05 + 0.95 * u());
        let mut above = half * (0.05 + 0.95 * u());
        if u() < FAR_SIDE_PROBABILITY {
            above *= FAR_SIDE_STRETCH;
        }
        x_lower.push(p - below);
        x_upper.push(p + above);
    }

    let max_width = x_lower
        .iter()
        .zip(&x_upper)
        .map(|(l, u)| u - l)
        .fold(0.0, f64::max);
    let tau_f = params
        .tau_f
        .max(required_tau_f(min_eigenvalue(&q), max_width));
    let pi_f = params.pi_f.min(tau_f);
    ProblemSpec::new(q, c, x_lower, x_upper, params.delta, tau_f, pi_f)
}
