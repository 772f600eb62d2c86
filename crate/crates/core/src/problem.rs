//! Problem data, domain geometry, and the objective/barrier functions.
//!
//! Every function used by the solver is a combination
//!
//! ```text
//! a * q̂(x) + b * Γ_LR(x) + d * Γ_Δ(x)
//! ```
//!
//! with `q̂(x) = ½ xᵀQx + cᵀx`, `Γ_LR` the log barrier of the box
//! `x_L < x < x_R` and `Γ_Δ` the log barrier of the cube `-Δ < x < Δ`.
//! [`QuadBarrier`] holds the three coefficients and evaluates value,
//! gradient and Hessian; values outside the domain are `+∞`.

use crate::error::{Error, Result};
use crate::linalg::{self, dot, Matrix};

/// Relative asymmetry of the input `Q` above which a warning is recorded.
pub const ASYMMETRY_WARN: f64 = 1e-12;

/// A problem instance: minimize
/// `½xᵀQx + cᵀx + τ_F·Γ_LR(x) + π_F·Γ_Δ(x)` over `Ω = B ∩ S`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    q: Matrix,
    c: Vec<f64>,
    x_lower: Vec<f64>,
    x_upper: Vec<f64>,
    delta: f64,
    tau_f: f64,
    pi_f: f64,
    asymmetry: f64,
}

impl ProblemSpec {
    /// Assembles a problem, replacing `Q` by `(Q + Qᵀ)/2`.
    ///
    /// Only dimensions are checked here; call [`validate`] for the rest.
    pub fn new(
        q: Matrix,
        c: Vec<f64>,
        x_lower: Vec<f64>,
        x_upper: Vec<f64>,
        delta: f64,
        tau_f: f64,
        pi_f: f64,
    ) -> Result<Self> {
        let n = q.dim();
        for (what, v) in [("c", &c), ("x_L", &x_lower), ("x_R", &x_upper)] {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: n,
                    got: v.len(),
                });
            }
        }
        let mut q = q;
        let raw = q.symmetrize();
        let scale = q.frobenius_norm();
        let asymmetry = if raw == 0.0 {
            0.0
        } else {
            raw / scale.max(f64::MIN_POSITIVE)
        };
        Ok(Self {
            q,
            c,
            x_lower,
            x_upper,
            delta,
            tau_f,
            pi_f,
            asymmetry,
        })
    }

    pub fn n(&self) -> usize {
        self.q.dim()
    }
    pub fn q(&self) -> &Matrix {
        &self.q
    }
    pub fn c(&self) -> &[f64] {
        &self.c
    }
    pub fn x_lower(&self) -> &[f64] {
        &self.x_lower
    }
    pub fn x_upper(&self) -> &[f64] {
        &self.x_upper
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn tau_f(&self) -> f64 {
        self.tau_f
    }
    pub fn pi_f(&self) -> f64 {
        self.pi_f
    }

    /// Largest `|Q_ij - Q_ji|` of the input relative to `‖Q‖_F`.
    pub fn input_asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn asymmetry_warning(&self) -> bool {
        self.asymmetry > ASYMMETRY_WARN
    }

    /// The scalar problem of coordinate `j`: `Q = 0`, `c = 0`, and the box
    /// and trust region restricted to that coordinate.
    pub fn coordinate(&self, j: usize) -> ProblemSpec {
        ProblemSpec {
            q: Matrix::zeros(1),
            c: vec![0.0],
            x_lower: vec![self.x_lower[j]],
            x_upper: vec![self.x_upper[j]],
            delta: self.delta,
            tau_f: self.tau_f,
            pi_f: self.pi_f,
            asymmetry: 0.0,
        }
    }

    /// `true` iff `x` lies strictly inside `Ω`.
    pub fn is_interior(&self, x: &[f64]) -> bool {
        x.len() == self.n()
            && x.iter().enumerate().all(|(j, &xj)| {
                xj > self.x_lower[j] && xj < self.x_upper[j] && xj > -self.delta && xj < self.delta
            })
    }
}

/// The closure of `Ω` is the box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainGeometry {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub shortest_side: f64,
}

impl DomainGeometry {
    pub fn midpoint(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }
}

/// Checks every invariant of `spec` and computes the domain box.
pub fn validate(spec: &ProblemSpec) -> Result<DomainGeometry> {
    let n = spec.n();
    if n == 0 {
        return Err(Error::BadParameters("dimension n must be positive".into()));
    }
    if !spec.q.is_finite() {
        return Err(Error::NonFinite("Q".into()));
    }
    for (name, v) in [
        ("c", &spec.c),
        ("x_L", &spec.x_lower),
        ("x_R", &spec.x_upper),
    ] {
        if let Some(j) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("{name}[{j}]")));
        }
    }
    for (name, v) in [
        ("delta", spec.delta),
        ("tau_F", spec.tau_f),
        ("pi_F", spec.pi_f),
    ] {
        if !v.is_finite() {
            return Err(Error::NonFinite(name.into()));
        }
    }
    if spec.delta <= 0.0 {
        return Err(Error::BadParameters(format!(
            "delta = {} must be positive",
            spec.delta
        )));
    }
    if !(spec.pi_f > 0.0 && spec.tau_f >= spec.pi_f) {
        return Err(Error::BadParameters(format!(
            "need tau_F >= pi_F > 0, got tau_F = {}, pi_F = {}",
            spec.tau_f, spec.pi_f
        )));
    }
    for j in 0..n {
        if spec.x_lower[j] >= spec.x_upper[j] {
            return Err(Error::BadBounds {
                index: j,
                lower: spec.x_lower[j],
                upper: spec.x_upper[j],
            });
        }
    }

    let lower: Vec<f64> = spec.x_lower.iter().map(|&l| l.max(-spec.delta)).collect();
    let upper: Vec<f64> = spec.x_upper.iter().map(|&u| u.min(spec.delta)).collect();
    let shortest_side = lower
        .iter()
        .zip(&upper)
        .map(|(l, u)| u - l)
        .fold(f64::INFINITY, f64::min);
    if !(shortest_side > 0.0) {
        return Err(Error::InfeasibleDomain { shortest_side });
    }
    Ok(DomainGeometry {
        lower,
        upper,
        shortest_side,
    })
}

/// A smooth function on an open box with exact derivatives.
pub trait Objective {
    fn dim(&self) -> usize;
    /// `+∞` outside the function's domain.
    fn value(&self, x: &[f64]) -> f64;
    /// Only meaningful at interior points.
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Only meaningful at interior points.
    fn hessian(&self, x: &[f64]) -> Matrix;
    /// `|Γ|` of the barrier part; `0` for a pure quadratic.
    fn barrier_weight(&self) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierKind {
    BoxLR,
    TrustDelta,
    Hat,
}

/// `quad * q̂ + box_lr * Γ_LR + trust * Γ_Δ`.
#[derive(Debug, Clone, Copy)]
pub struct QuadBarrier<'a> {
    spec: &'a ProblemSpec,
    pub quad: f64,
    pub box_lr: f64,
    pub trust: f64,
    weight: f64,
}

impl<'a> QuadBarrier<'a> {
    pub fn new(spec: &'a ProblemSpec, quad: f64, box_lr: f64, trust: f64, weight: f64) -> Self {
        Self {
            spec,
            quad,
            box_lr,
            trust,
            weight,
        }
    }

    pub fn spec(&self) -> &'a ProblemSpec {
        self.spec
    }

    /// `|Γ|` scaled: `r·|Γ| = |r·Γ|`.
    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    /// Diagonal of the barrier Hessian.
    fn barrier_curvature(&self, x: &[f64]) -> Vec<f64> {
        let s = self.spec;
        let mut d = vec![0.0; x.len()];
        if self.box_lr != 0.0 {
            for (j, dj) in d.iter_mut().enumerate() {
                let a = x[j] - s.x_lower[j];
                let b = s.x_upper[j] - x[j];
                *dj += self.box_lr * (1.0 / (a * a) + 1.0 / (b * b));
            }
        }
        if self.trust != 0.0 {
            for (j, dj) in d.iter_mut().enumerate() {
                let a = s.delta + x[j];
                let b = s.delta - x[j];
                *dj += self.trust * (1.0 / (a * a) + 1.0 / (b * b));
            }
        }
        d
    }
}

impl Objective for QuadBarrier<'_> {
    fn dim(&self) -> usize {
        self.spec.n()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let s = self.spec;
        let mut v = 0.0;
        if self.box_lr != 0.0 {
            let mut acc = 0.0;
            for ((xj, lo), hi) in x.iter().zip(&s.x_lower).zip(&s.x_upper) {
                let a = xj - lo;
                let b = hi - xj;
                if !(a > 0.0 && b > 0.0) {
                    return f64::INFINITY;
                }
                acc += a.ln() + b.ln();
            }
            v -= self.box_lr * acc;
        }
        if self.trust != 0.0 {
            let mut acc = 0.0;
            for &xj in x {
                let a = s.delta + xj;
                let b = s.delta - xj;
                if !(a > 0.0 && b > 0.0) {
                    return f64::INFINITY;
                }
                acc += a.ln() + b.ln();
            }
            v -= self.trust * acc;
        }
        if self.quad != 0.0 {
            v += self.quad * qhat_value(s, x);
        }
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let s = self.spec;
        let mut g = if self.quad != 0.0 {
            let mut g = s.q.mul_vec(x);
            for (gj, cj) in g.iter_mut().zip(&s.c) {
                *gj = self.quad * (*gj + cj);
            }
            g
        } else {
            vec![0.0; x.len()]
        };
        if self.box_lr != 0.0 {
            for (j, gj) in g.iter_mut().enumerate() {
                *gj += self.box_lr * (1.0 / (s.x_upper[j] - x[j]) - 1.0 / (x[j] - s.x_lower[j]));
            }
        }
        if self.trust != 0.0 {
            for (j, gj) in g.iter_mut().enumerate() {
                *gj += self.trust * (1.0 / (s.delta - x[j]) - 1.0 / (s.delta + x[j]));
            }
        }
        g
    }

    fn hessian(&self, x: &[f64]) -> Matrix {
        let mut h = if self.quad != 0.0 {
            let mut h = self.spec.q.clone();
            h.scale(self.quad);
            h
        } else {
            Matrix::zeros(x.len())
        };
        h.add_to_diagonal(&self.barrier_curvature(x));
        h
    }

    fn barrier_weight(&self) -> f64 {
        self.weight
    }
}

fn qhat_value(spec: &ProblemSpec, x: &[f64]) -> f64 {
    0.5 * spec.q.quadratic_form(x) + dot(&spec.c, x)
}

/// `q̂(x) = ½xᵀQx + cᵀx`; defined everywhere.
pub fn make_qhat(spec: &ProblemSpec) -> QuadBarrier<'_> {
    QuadBarrier::new(spec, 1.0, 0.0, 0.0, 0.0)
}

pub fn make_barrier(kind: BarrierKind, spec: &ProblemSpec) -> QuadBarrier<'_> {
    let n = spec.n() as f64;
    match kind {
        BarrierKind::BoxLR => QuadBarrier::new(spec, 0.0, 1.0, 0.0, 2.0 * n),
        BarrierKind::TrustDelta => QuadBarrier::new(spec, 0.0, 0.0, 1.0, 2.0 * n),
        BarrierKind::Hat => QuadBarrier::new(spec, 0.0, 1.0, 1.0, 4.0 * n),
    }
}

/// `φ⁽¹⁾ = Γ̂`
pub fn make_phi1(spec: &ProblemSpec) -> QuadBarrier<'_> {
    make_barrier(BarrierKind::Hat, spec)
}

/// `φ⁽²⁾_τ = 8·(2/τ·q̂ + 2·Γ̂)`, self-concordant for `τ ≥ τ_F`.
///
/// The reported barrier weight is `|16·Γ̂| = 64n`.
pub fn make_phi2(spec: &ProblemSpec, tau: f64) -> Result<QuadBarrier<'_>> {
    if !(tau >= spec.tau_f) {
        return Err(Error::BadParameters(format!(
            "phi2 needs tau >= tau_F = {}, got {tau}",
            spec.tau_f
        )));
    }
    let n = spec.n() as f64;
    Ok(QuadBarrier::new(spec, 16.0 / tau, 16.0, 16.0, 64.0 * n))
}

/// `φ⁽³⁾_π = 8τ_F/π·(2/τ_F·q̂ + 2·Γ_LR) + 16·Γ_Δ`, self-concordant for
/// `0 < π ≤ τ_F`.
///
/// The reported barrier weight is `|16·Γ_Δ| = 32n`.
pub fn make_phi3(spec: &ProblemSpec, pi: f64) -> Result<QuadBarrier<'_>> {
    if !(pi > 0.0 && pi <= spec.tau_f) {
        return Err(Error::BadParameters(format!(
            "phi3 needs 0 < pi <= tau_F = {}, got {pi}",
            spec.tau_f
        )));
    }
    let n = spec.n() as f64;
    Ok(QuadBarrier::new(
        spec,
        16.0 / pi,
        16.0 * spec.tau_f / pi,
        16.0,
        32.0 * n,
    ))
}

/// Phase-2 pair `(f, Γ) = (16·q̂, 16·Γ̂)` so that `f/τ + Γ = φ⁽²⁾_τ`.
pub fn phase2_pair(spec: &ProblemSpec) -> (QuadBarrier<'_>, QuadBarrier<'_>) {
    let n = spec.n() as f64;
    (
        QuadBarrier::new(spec, 16.0, 0.0, 0.0, 0.0),
        QuadBarrier::new(spec, 0.0, 16.0, 16.0, 64.0 * n),
    )
}

/// Phase-3 pair `(f, Γ) = (16·(q̂ + τ_F·Γ_LR), 16·Γ_Δ)` so that
/// `f/π + Γ = φ⁽³⁾_π`.
pub fn phase3_pair(spec: &ProblemSpec) -> (QuadBarrier<'_>, QuadBarrier<'_>) {
    let n = spec.n() as f64;
    (
        QuadBarrier::new(spec, 16.0, 16.0 * spec.tau_f, 0.0, 0.0),
        QuadBarrier::new(spec, 0.0, 0.0, 16.0, 32.0 * n),
    )
}

/// The problem objective `Φ`.
pub fn make_phi(spec: &ProblemSpec) -> QuadBarrier<'_> {
    QuadBarrier::new(spec, 1.0, spec.tau_f, spec.pi_f, 0.0)
}

/// `Φ(x)`, `+∞` outside `Ω`.
pub fn eval_phi(spec: &ProblemSpec, x: &[f64]) -> f64 {
    make_phi(spec).value(x)
}

/// `ψ = q̂ + τ_F/2·Γ_LR`.
pub fn make_psi(spec: &ProblemSpec) -> QuadBarrier<'_> {
    QuadBarrier::new(spec, 1.0, 0.5 * spec.tau_f, 0.0, 0.0)
}

pub fn eval_psi(spec: &ProblemSpec, x: &[f64]) -> f64 {
    make_psi(spec).value(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvexityStatus {
    Certified,
    Unknown,
}

/// `λ_min(Q) + 4τ_F / max_j (x_R,j − x_L,j)²`, a lower bound on
/// `λ_min(∇²ψ)` over the box.
pub fn psi_convexity_margin(spec: &ProblemSpec) -> f64 {
    let widest = spec
        .x_lower
        .iter()
        .zip(&spec.x_upper)
        .map(|(l, u)| u - l)
        .fold(0.0_f64, f64::max);
    linalg::min_eigenvalue(&spec.q) + 4.0 * spec.tau_f / (widest * widest)
}

/// Sufficient check for convexity of `ψ`. `Unknown` is not a failure.
pub fn check_psi_convexity(spec: &ProblemSpec) -> ConvexityStatus {
    if psi_convexity_margin(spec) >= 0.0 {
        ConvexityStatus::Certified
    } else {
        ConvexityStatus::Unknown
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec1(q: f64, c: f64, xl: f64, xr: f64, delta: f64, tau: f64, pi: f64) -> ProblemSpec {
        ProblemSpec::new(
            Matrix::from_rows(&[[q]]).unwrap(),
            vec![c],
            vec![xl],
            vec![xr],
            delta,
            tau,
            pi,
        )
        .unwrap()
    }

    fn symmetric(n: usize, tau: f64, pi: f64) -> ProblemSpec {
        ProblemSpec::new(
            Matrix::zeros(n),
            vec![0.0; n],
            vec![-2.0; n],
            vec![2.0; n],
            1.0,
            tau,
            pi,
        )
        .unwrap()
    }

    #[test]
    fn validate_trust_region_inside_box() {
        let g = validate(&spec1(0.0, 0.0, -2.0, 2.0, 1.0, 1.0, 1.0)).unwrap();
        assert_eq!(g.lower, vec![-1.0]);
        assert_eq!(g.upper, vec![1.0]);
        assert_eq!(g.shortest_side, 2.0);
    }

    #[test]
    fn validate_componentwise() {
        let s = ProblemSpec::new(
            Matrix::zeros(2),
            vec![0.0; 2],
            vec![0.0, -3.0],
            vec![5.0, -1.0],
            2.0,
            1.0,
            1.0,
        )
        .unwrap();
        let g = validate(&s).unwrap();
        assert_eq!(g.lower, vec![0.0, -2.0]);
        assert_eq!(g.upper, vec![2.0, -1.0]);
        assert_eq!(g.shortest_side, 1.0);
    }

    #[test]
    fn validate_errors() {
        assert!(matches!(
            validate(&spec1(0.0, 0.0, 3.0, 4.0, 1.0, 1.0, 1.0)),
            Err(Error::InfeasibleDomain { .. })
        ));
        assert!(matches!(
            validate(&spec1(0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0)),
            Err(Error::BadBounds { index: 0, .. })
        ));
        assert!(matches!(
            validate(&spec1(0.0, 0.0, -1.0, 1.0, 0.0, 1.0, 1.0)),
            Err(Error::BadParameters(_))
        ));
        assert!(matches!(
            validate(&spec1(0.0, 0.0, -1.0, 1.0, 1.0, 0.5, 1.0)),
            Err(Error::BadParameters(_))
        ));
        assert!(matches!(
            validate(&spec1(0.0, 0.0, -1.0, 1.0, 1.0, 1.0, 0.0)),
            Err(Error::BadParameters(_))
        ));
        assert!(matches!(
            validate(&spec1(f64::NAN, 0.0, -1.0, 1.0, 1.0, 1.0, 1.0)),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            validate(&spec1(0.0, 0.0, f64::NEG_INFINITY, 1.0, 1.0, 1.0, 1.0)),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            ProblemSpec::new(
                Matrix::zeros(2),
                vec![0.0],
                vec![0.0; 2],
                vec![1.0; 2],
                1.0,
                1.0,
                1.0
            ),
            Err(Error::DimensionMismatch { what: "c", .. })
        ));
    }

    #[test]
    fn constructor_symmetrizes() {
        let q = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]).unwrap();
        let s =
            ProblemSpec::new(q, vec![0.0; 2], vec![-1.0; 2], vec![1.0; 2], 1.0, 1.0, 1.0).unwrap();
        assert!(s.q().is_symmetric());
        assert_eq!(s.q()[(0, 1)], 1.0);
        assert!(s.asymmetry_warning());
        assert!(!symmetric(2, 1.0, 1.0).asymmetry_warning());
    }

    #[test]
    fn qhat_examples() {
        let s = spec1(1.0, 0.0, -5.0, 5.0, 3.0, 1.0, 1.0);
        let q = make_qhat(&s);
        assert_eq!(q.value(&[2.0]), 2.0);
        assert_eq!(q.gradient(&[2.0]), vec![2.0]);
        assert_eq!(q.barrier_weight(), 0.0);
        // defined outside Ω too
        assert_eq!(q.value(&[10.0]), 50.0);

        let s = ProblemSpec::new(
            Matrix::zeros(2),
            vec![3.0, -1.0],
            vec![-5.0; 2],
            vec![5.0; 2],
            3.0,
            1.0,
            1.0,
        )
        .unwrap();
        assert_eq!(make_qhat(&s).value(&[1.0, 1.0]), 2.0);
        assert_eq!(make_qhat(&s).gradient(&[1.0, 1.0]), vec![3.0, -1.0]);

        let swap = Matrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let s = ProblemSpec::new(
            swap,
            vec![0.0; 2],
            vec![-5.0; 2],
            vec![5.0; 2],
            3.0,
            1.0,
            1.0,
        )
        .unwrap();
        assert_eq!(make_qhat(&s).value(&[1.0, 1.0]), 1.0);
    }

    #[test]
    fn barrier_examples() {
        let s = spec1(0.0, 0.0, -1.0, 1.0, 1.0, 1.0, 1.0);
        let b = make_barrier(BarrierKind::BoxLR, &s);
        assert_eq!(b.value(&[0.0]), 0.0);
        assert_eq!(b.gradient(&[0.0]), vec![0.0]);
        assert_eq!(b.hessian(&[0.0])[(0, 0)], 2.0);

        let t = make_barrier(BarrierKind::TrustDelta, &s);
        assert_eq!(t.value(&[0.0]), 0.0);
        assert_eq!(t.hessian(&[0.0])[(0, 0)], 2.0);

        let h = make_barrier(BarrierKind::Hat, &s);
        assert_eq!(h.value(&[1.0]), f64::INFINITY);
        assert_eq!(h.value(&[-1.5]), f64::INFINITY);
        assert_eq!(make_phi1(&s).value(&[1.0]), f64::INFINITY);
    }

    #[test]
    fn barrier_weights() {
        let s = symmetric(5, 1.0, 1.0);
        assert_eq!(make_barrier(BarrierKind::BoxLR, &s).barrier_weight(), 10.0);
        assert_eq!(
            make_barrier(BarrierKind::TrustDelta, &s).barrier_weight(),
            10.0
        );
        assert_eq!(make_barrier(BarrierKind::Hat, &s).barrier_weight(), 20.0);
        assert_eq!(make_phi2(&s, 1.0).unwrap().barrier_weight(), 320.0);
        assert_eq!(make_phi3(&s, 1.0).unwrap().barrier_weight(), 160.0);
    }

    #[test]
    fn trust_hessian_lower_bound() {
        let s = symmetric(3, 1.0, 1.0);
        let t = make_barrier(BarrierKind::TrustDelta, &s);
        for x in [[0.0, 0.5, -0.9], [0.99, -0.99, 0.1]] {
            let h = t.hessian(&x);
            for j in 0..3 {
                assert!(h[(j, j)] >= 2.0 / (s.delta() * s.delta()));
                for k in 0..3 {
                    if j != k {
                        assert_eq!(h[(j, k)], 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn phi2_parameter_range() {
        let s = symmetric(2, 1.0, 0.5);
        assert!(make_phi2(&s, 0.99).is_err());
        assert!(make_phi2(&s, 1.0).is_ok());
        assert!(make_phi3(&s, 1.01).is_err());
        assert!(make_phi3(&s, 0.0).is_err());
        assert!(make_phi3(&s, 0.5).is_ok());
    }

    #[test]
    fn phi2_without_quadratic_is_scaled_hat() {
        let s = symmetric(2, 1.0, 0.5);
        let x = [0.3, -0.7];
        let hat = make_phi1(&s).value(&x);
        for tau in [1.0, 7.0, 1e6] {
            assert!(
                (make_phi2(&s, tau).unwrap().value(&x) - 16.0 * hat).abs()
                    <= 1e-13 * hat.abs().max(1.0)
            );
        }
        assert!(
            (make_phi3(&s, 1.0).unwrap().value(&x) - 16.0 * hat).abs()
                <= 1e-13 * hat.abs().max(1.0)
        );
    }

    #[test]
    fn phi2_scalar_value() {
        // 8·q̂(0.5) + 16·Γ̂(0.5) with q̂(0.5) = 0.125 and
        // Γ̂(0.5) = -ln 2.5 - 2 ln 1.5 - ln 0.5; reference from a 30-digit evaluation.
        let s = spec1(1.0, 0.0, -2.0, 2.0, 1.0, 1.0, 1.0);
        let phi2 = make_phi2(&s, 2.0).unwrap();
        let expected = -15.545_180_280_488_616;
        assert!((phi2.value(&[0.5]) - expected).abs() <= 1e-14 * expected.abs());
    }

    #[test]
    fn phi2_tends_to_16_phi1() {
        let s = ProblemSpec::new(
            Matrix::from_rows(&[[2.0, -1.0], [-1.0, 3.0]]).unwrap(),
            vec![1.0, -2.0],
            vec![-1.5, -0.5],
            vec![0.5, 3.0],
            1.0,
            4.0,
            1.0,
        )
        .unwrap();
        let x = [0.1, 0.2];
        let lim = 16.0 * make_phi1(&s).value(&x);
        let far = make_phi2(&s, 1e12).unwrap().value(&x);
        assert!((far - lim).abs() < 1e-9);
    }

    #[test]
    fn phi3_identities() {
        let s = ProblemSpec::new(
            Matrix::from_rows(&[[2.0, -1.0], [-1.0, 3.0]]).unwrap(),
            vec![1.0, -2.0],
            vec![-1.5, -0.5],
            vec![0.5, 3.0],
            1.0,
            4.0,
            0.04,
        )
        .unwrap();
        let p2 = make_phi2(&s, 4.0).unwrap();
        let p3 = make_phi3(&s, 4.0).unwrap();
        let p3f = make_phi3(&s, 0.04).unwrap();
        for x in [[0.0, 0.0], [0.4, 0.9], [-0.9, -0.4], [0.25, -0.25]] {
            let (a, b) = (p2.value(&x), p3.value(&x));
            assert!((a - b).abs() <= 4.0 * f64::EPSILON * a.abs().max(1.0));
            let scaled = 16.0 / 0.04 * eval_phi(&s, &x);
            assert!((p3f.value(&x) - scaled).abs() <= 1e-12 * scaled.abs().max(1.0));
        }
    }

    #[test]
    fn phi_closed_form_symmetric() {
        for n in 1..4 {
            let s = symmetric(n, 0.7, 0.2);
            let expected = -0.7 * 2.0 * n as f64 * 2.0_f64.ln();
            assert!((eval_phi(&s, &vec![0.0; n]) - expected).abs() < 1e-14);
            let mut x = vec![0.0; n];
            x[0] = 1.0;
            assert_eq!(eval_phi(&s, &x), f64::INFINITY);
        }
    }

    #[test]
    fn psi_identity() {
        let s = ProblemSpec::new(
            Matrix::from_rows(&[[1.0, 0.5], [0.5, -0.2]]).unwrap(),
            vec![0.3, 0.1],
            vec![-1.0, -3.0],
            vec![2.0, 0.5],
            1.0,
            2.0,
            0.5,
        )
        .unwrap();
        let lr = make_barrier(BarrierKind::BoxLR, &s);
        let td = make_barrier(BarrierKind::TrustDelta, &s);
        for x in [[0.0, 0.0], [0.5, -0.5], [-0.9, 0.4]] {
            let lhs = eval_psi(&s, &x);
            let rhs = eval_phi(&s, &x) - 1.0 * lr.value(&x) - 0.5 * td.value(&x);
            assert!((lhs - rhs).abs() < 1e-12);
        }
        let z = symmetric(2, 3.0, 1.0);
        let x = [0.2, -0.4];
        assert!((eval_psi(&z, &x) - 1.5 * lr_value(&z, &x)).abs() < 1e-14);
    }

    fn lr_value(s: &ProblemSpec, x: &[f64]) -> f64 {
        make_barrier(BarrierKind::BoxLR, s).value(x)
    }

    #[test]
    fn convexity_check_examples() {
        let psd = ProblemSpec::new(
            Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap(),
            vec![0.0; 2],
            vec![-1.0; 2],
            vec![1.0; 2],
            1.0,
            1e-9,
            1e-9,
        )
        .unwrap();
        assert_eq!(check_psi_convexity(&psd), ConvexityStatus::Certified);
        assert_eq!(
            check_psi_convexity(&spec1(-1.0, 0.0, -1.0, 1.0, 1.0, 1.0, 1.0)),
            ConvexityStatus::Certified
        );
        assert_eq!(
            check_psi_convexity(&spec1(-1.0, 0.0, -2.0, 2.0, 1.0, 0.5, 0.5)),
            ConvexityStatus::Unknown
        );
    }
}
