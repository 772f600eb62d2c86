//! Slow, obviously-correct reference computations used to check the solver:
//! bisection, shrinking-grid minimization of `Φ`, finite-difference
//! derivative checks, self-concordance sampling and an inertia-based
//! eigenvalue bisection.

use std::thread;

use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::generator::unit_f64;
use crate::linalg::{norm_inf, Matrix};
use crate::problem::{eval_phi, DomainGeometry, Objective, ProblemSpec};

/// Root of `fp` on `[a, b]` given `fp(a) < 0 < fp(b)`, to a bracket of width
/// at most `tol`.
pub fn bisect_root(fp: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a < b) || !(tol > 0.0) {
        return Err(Error::BadParameters(format!(
            "bisect_root needs a < b and tol > 0, got [{a}, {b}], tol {tol}"
        )));
    }
    let (fa, fb) = (fp(a), fp(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa < 0.0 && fb > 0.0) {
        return Err(Error::NoSignChange { a, b });
    }
    let (mut lo, mut hi) = (a, b);
    while hi - lo > tol {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        let fm = fp(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm < 0.0 {
            lo = m
        } else {
            hi = m
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points_per_axis: usize,
    pub shrink_rounds: usize,
    pub shrink_factor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points_per_axis: 2001,
            shrink_rounds: 6,
            shrink_factor: 0.2,
        }
    }
}

impl GridSpec {
    /// The default grid, thinned for `n = 3` so a round stays near `10⁷`
    /// evaluations.
    pub fn for_dim(n: usize) -> Self {
        match n {
            3 => Self {
                points_per_axis: 201,
                shrink_rounds: 10,
                shrink_factor: 0.2,
            },
            _ => Self::default(),
        }
    }

    fn check(&self) -> Result<()> {
        if self.points_per_axis < 3 || self.points_per_axis.is_multiple_of(2) {
            return Err(Error::BadParameters(format!(
                "points_per_axis must be odd and at least 3, got {}",
                self.points_per_axis
            )));
        }
        if !(self.shrink_factor > 0.0 && self.shrink_factor < 1.0) {
            return Err(Error::BadParameters(format!(
                "shrink_factor must lie in (0, 1), got {}",
                self.shrink_factor
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub x_star: Vec<f64>,
    pub phi_star: f64,
    /// Largest grid spacing of the last round.
    pub resolution: f64,
}

/// Minimizes `Φ` over `Ω` by repeated grid search, each round on a window
/// `shrink_factor` times smaller centred at the previous best point. Only
/// for `n ≤ 3`.
pub fn grid_refine_min(
    spec: &ProblemSpec,
    geometry: &DomainGeometry,
    grid: &GridSpec,
) -> Result<GridResult> {
    grid_refine_min_threads(spec, geometry, grid, default_threads())
}

pub fn grid_refine_min_threads(
    spec: &ProblemSpec,
    geometry: &DomainGeometry,
    grid: &GridSpec,
    threads: usize,
) -> Result<GridResult> {
    let n = spec.n();
    if n > 3 {
        return Err(Error::DimensionTooLarge { n });
    }
    grid.check()?;
    let p = grid.points_per_axis;
    let mut lo = geometry.lower.clone();
    let mut hi = geometry.upper.clone();
    let mut best = (f64::INFINITY, geometry.midpoint());
    let mut resolution = 0.0;

    for round in 0..=grid.shrink_rounds {
        if round > 0 {
            for j in 0..n {
                let half = 0.5 * grid.shrink_factor * (hi[j] - lo[j]);
                lo[j] = (best.1[j] - half).max(geometry.lower[j]);
                hi[j] = (best.1[j] + half).min(geometry.upper[j]);
            }
        }
        let axes: Vec<Vec<f64>> = (0..n)
            .map(|j| {
                (0..p)
                    .map(|i| lo[j] + (i + 1) as f64 / (p + 1) as f64 * (hi[j] - lo[j]))
                    .collect()
            })
            .collect();
        resolution = (0..n)
            .map(|j| (hi[j] - lo[j]) / (p + 1) as f64)
            .fold(0.0, f64::max);
        let r = scan_grid(spec, &axes, threads);
        if r.0 < best.0 {
            best = r;
        }
    }
    Ok(GridResult {
        x_star: best.1,
        phi_star: best.0,
        resolution,
    })
}

fn default_threads() -> usize {
    thread::available_parallelism().map_or(1, |t| t.get())
}

/// Best point of the tensor grid; ties go to the lowest index so the result
/// is independent of `threads`.
fn scan_grid(spec: &ProblemSpec, axes: &[Vec<f64>], threads: usize) -> (f64, Vec<f64>) {
    let n = axes.len();
    let p = axes[0].len();
    let scan_rows = |rows: std::ops::Range<usize>| {
        let mut best = (f64::INFINITY, vec![0.0; n]);
        let mut x = vec![0.0; n];
        let inner = p.pow(n as u32 - 1);
        for i0 in rows {
            x[0] = axes[0][i0];
            for k in 0..inner {
                let mut rem = k;
                for j in (1..n).rev() {
                    x[j] = axes[j][rem % p];
                    rem /= p;
                }
                let v = eval_phi(spec, &x);
                if v < best.0 {
                    best = (v, x.clone());
                }
            }
        }
        best
    };
    let threads = threads.clamp(1, p);
    if threads == 1 || n == 1 {
        return scan_rows(0..p);
    }
    let chunk = p.div_ceil(threads);
    thread::scope(|s| {
        let handles: Vec<_> = (0..p)
            .step_by(chunk)
            .map(|start| s.spawn(move || scan_rows(start..(start + chunk).min(p))))
            .collect();
        let mut best = (f64::INFINITY, vec![0.0; n]);
        for h in handles {
            let r = h.join().expect("grid worker panicked");
            if r.0 < best.0 {
                best = r;
            }
        }
        best
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeOrder {
    Gradient,
    Hessian,
}

/// Worst relative error of the analytic gradient (against central
/// differences of the value) or Hessian (against central differences of
/// the analytic gradient), with `h = 1e−6·(1 + ‖x‖∞)`. The error is the
/// largest absolute deviation divided by `max(1, largest analytic entry)`.
pub fn fd_check<F: Objective + ?Sized>(f: &F, x: &[f64], order: DerivativeOrder) -> f64 {
    let n = x.len();
    let h = 1e-6 * (1.0 + norm_inf(x));
    let shifted = |j: usize, s: f64| {
        let mut y = x.to_vec();
        y[j] += s;
        y
    };
    match order {
        DerivativeOrder::Gradient => {
            let g = f.gradient(x);
            let mut worst = 0.0_f64;
            for (j, gj) in g.iter().enumerate() {
                let fd = (f.value(&shifted(j, h)) - f.value(&shifted(j, -h))) / (2.0 * h);
                worst = nan_max(worst, (fd - gj).abs());
            }
            worst / norm_inf(&g).max(1.0)
        }
        DerivativeOrder::Hessian => {
            let hess = f.hessian(x);
            let scale = hess.as_slice().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            let mut worst = 0.0_f64;
            for j in 0..n {
                let gp = f.gradient(&shifted(j, h));
                let gm = f.gradient(&shifted(j, -h));
                for i in 0..n {
                    let fd = (gp[i] - gm[i]) / (2.0 * h);
                    worst = nan_max(worst, (fd - hess[(i, j)]).abs());
                }
            }
            worst / scale
        }
    }
}

fn nan_max(a: f64, b: f64) -> f64 {
    if b.is_nan() {
        f64::INFINITY
    } else {
        a.max(b)
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
#[error("not convex on sample: g'' = {second} along segment {segment}")]
pub struct NotConvexOnSample {
    pub segment: usize,
    pub second: f64,
}

/// Samples `|g'''| / (2·g''^{3/2})` along random chords of `Ω`, with
/// `g(t) = f(x + t·d)`. `g''` is `dᵀ∇²f d`; `g'''` is a central difference
/// of it with step `1e−4·chord` and one Richardson extrapolation. Returns the
/// largest ratio seen.
pub fn self_concordance_scan<F: Objective + ?Sized>(
    f: &F,
    geometry: &DomainGeometry,
    segments: usize,
    samples_per_segment: usize,
    seed: u64,
) -> std::result::Result<f64, NotConvexOnSample> {
    let n = geometry.lower.len();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for seg in 0..segments {
        let x0: Vec<f64> = (0..n)
            .map(|j| {
                let w = geometry.upper[j] - geometry.lower[j];
                geometry.lower[j] + (0.05 + 0.9 * unit_f64(&mut rng)) * w
            })
            .collect();
        let mut d: Vec<f64> = (0..n).map(|_| 2.0 * unit_f64(&mut rng) - 1.0).collect();
        let norm = crate::linalg::norm2(&d);
        if norm == 0.0 {
            d[0] = 1.0;
        } else {
            d.iter_mut().for_each(|v| *v /= norm);
        }
        let (mut t_lo, mut t_hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for j in 0..n {
            if d[j] != 0.0 {
                let a = (geometry.lower[j] - x0[j]) / d[j];
                let b = (geometry.upper[j] - x0[j]) / d[j];
                t_lo = t_lo.max(a.min(b));
                t_hi = t_hi.min(a.max(b));
            }
        }
        let chord = t_hi - t_lo;
        let h = 1e-4 * chord;
        let second = |t: f64| {
            let x: Vec<f64> = x0.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            f.hessian(&x).quadratic_form(&d)
        };
        for k in 0..samples_per_segment {
            let s = if samples_per_segment == 1 {
                0.5
            } else {
                0.01 + 0.98 * k as f64 / (samples_per_segment - 1) as f64
            };
            let t = t_lo + s * chord;
            let g2 = second(t);
            if !(g2 > 0.0) {
                return Err(NotConvexOnSample {
                    segment: seg,
                    second: g2,
                });
            }
            let d1 = (second(t + h) - second(t - h)) / (2.0 * h);
            let d2 = (second(t + 0.5 * h) - second(t - 0.5 * h)) / h;
            let g3 = (4.0 * d2 - d1) / 3.0;
            worst = worst.max(g3.abs() / (2.0 * g2.powf(1.5) + 1e-300));
        }
    }
    Ok(worst)
}

/// Number of eigenvalues of symmetric `q` below `lambda`, from the signs of
/// the pivots of `LDLᵀ(q − λI)` (Sylvester's law of inertia).
pub fn count_eigenvalues_below(q: &Matrix, lambda: f64) -> usize {
    let n = q.dim();
    let mut a = q.clone();
    a.add_to_diagonal(&vec![-lambda; n]);
    let mut l = Matrix::zeros(n);
    let mut d = vec![0.0; n];
    let mut count = 0;
    for j in 0..n {
        let mut dj = a[(j, j)];
        for k in 0..j {
            dj -= l[(j, k)] * l[(j, k)] * d[k];
        }
        if dj == 0.0 {
            dj = -f64::EPSILON * (1.0 + a[(j, j)].abs());
        }
        d[j] = dj;
        if dj < 0.0 {
            count += 1;
        }
        for i in j + 1..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)] * d[k];
            }
            l[(i, j)] = v / dj;
        }
    }
    count
}

/// The `k`-th smallest eigenvalue of symmetric `q` (0-based) by bisection on
/// the inertia count, to an interval of width `tol`.
pub fn eigenvalue_by_bisection(q: &Matrix, k: usize, tol: f64) -> f64 {
    let n = q.dim();
    assert!(k < n, "eigenvalue index {k} out of range for n = {n}");
    let radius = (0..n)
        .map(|i| {
            q[(i, i)].abs()
                + (0..n)
                    .filter(|&j| j != i)
                    .map(|j| q[(i, j)].abs())
                    .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let (mut lo, mut hi) = (-radius - 1.0, radius + 1.0);
    while hi - lo > tol {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        if count_eigenvalues_below(q, m) > k {
            hi = m
        } else {
            lo = m
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_eigenvalue;
    use crate::problem::{make_barrier, make_phi1, make_phi2, make_qhat, validate, BarrierKind};

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

    fn gamma_j_prime(xl: f64, xr: f64, delta: f64) -> impl Fn(f64) -> f64 {
        move |x| 1.0 / (xr - x) - 1.0 / (x - xl) + 1.0 / (delta - x) - 1.0 / (delta + x)
    }

    #[test]
    fn bisect_identity() {
        assert!(bisect_root(|x| x, -1.0, 1.0, 1e-12).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn bisect_worst_case_gamma_j() {
        let x = bisect_root(
            gamma_j_prime(-1.0, 1e8, 1.0),
            -1.0 + 1e-12,
            1.0 - 1e-12,
            1e-14,
        )
        .unwrap();
        // exact root of 3x² - 2x/1e8... is within 1e-8 of 1/3
        assert!((x - 1.0 / 3.0).abs() < 1e-8);
        let sym = bisect_root(gamma_j_prime(-1.0, 1.0, 1.0), -0.9, 0.9, 1e-14).unwrap();
        assert_eq!(sym, 0.0);
    }

    #[test]
    fn bisect_requires_sign_change() {
        assert!(matches!(
            bisect_root(|x| x * x + 1.0, -1.0, 1.0, 1e-6),
            Err(Error::NoSignChange { .. })
        ));
        assert!(matches!(
            bisect_root(|x| x, 1.0, -1.0, 1e-6),
            Err(Error::BadParameters(_))
        ));
    }

    #[test]
    fn grid_symmetric_zero() {
        let s = ProblemSpec::new(
            Matrix::zeros(2),
            vec![0.0; 2],
            vec![-2.0; 2],
            vec![2.0; 2],
            1.0,
            1.0,
            0.1,
        )
        .unwrap();
        let g = validate(&s).unwrap();
        let r = grid_refine_min(&s, &g, &GridSpec::default()).unwrap();
        assert!(r.x_star.iter().all(|x| x.abs() <= r.resolution));
        assert!(r.resolution < 1e-7);
    }

    #[test]
    fn grid_agrees_with_bisection_in_one_dimension() {
        let s = spec1(1.0, 0.3, -2.0, 2.0, 1.0, 1.0, 0.01);
        let g = validate(&s).unwrap();
        let r = grid_refine_min(&s, &g, &GridSpec::default()).unwrap();
        let d = |x: f64| {
            x + 0.3 + 1.0 / (2.0 - x) - 1.0 / (x + 2.0) + 0.01 * (1.0 / (1.0 - x) - 1.0 / (1.0 + x))
        };
        let root = bisect_root(d, -0.999, 0.999, 1e-14).unwrap();
        assert!((r.x_star[0] - root).abs() <= 2.0 * r.resolution + 1e-14);
        assert!(r.phi_star >= eval_phi(&s, &[root]) - 1e-15);
    }

    #[test]
    fn grid_is_thread_independent() {
        let s = ProblemSpec::new(
            Matrix::from_rows(&[[2.0, 0.3], [0.3, 1.0]]).unwrap(),
            vec![0.4, -0.7],
            vec![-1.0, -0.5],
            vec![0.8, 2.0],
            1.0,
            1.0,
            0.05,
        )
        .unwrap();
        let g = validate(&s).unwrap();
        let grid = GridSpec {
            points_per_axis: 101,
            shrink_rounds: 4,
            shrink_factor: 0.2,
        };
        let a = grid_refine_min_threads(&s, &g, &grid, 1).unwrap();
        let b = grid_refine_min_threads(&s, &g, &grid, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_rejects_large_dimension_and_bad_grid() {
        let s = ProblemSpec::new(
            Matrix::zeros(4),
            vec![0.0; 4],
            vec![-1.0; 4],
            vec![1.0; 4],
            1.0,
            1.0,
            1.0,
        )
        .unwrap();
        let g = validate(&s).unwrap();
        assert!(matches!(
            grid_refine_min(&s, &g, &GridSpec::default()),
            Err(Error::DimensionTooLarge { n: 4 })
        ));
        let s1 = spec1(0.0, 0.0, -1.0, 1.0, 1.0, 1.0, 1.0);
        let g1 = validate(&s1).unwrap();
        let even = GridSpec {
            points_per_axis: 10,
            ..GridSpec::default()
        };
        assert!(matches!(
            grid_refine_min(&s1, &g1, &even),
            Err(Error::BadParameters(_))
        ));
    }

    #[test]
    fn fd_exact_on_quadratic() {
        let s = ProblemSpec::new(
            Matrix::identity(3),
            vec![0.0; 3],
            vec![-5.0; 3],
            vec![5.0; 3],
            2.0,
            1.0,
            1.0,
        )
        .unwrap();
        let q = make_qhat(&s);
        let x = [0.3, -0.2, 0.7];
        assert!(fd_check(&q, &x, DerivativeOrder::Gradient) <= 1e-9);
        assert!(fd_check(&q, &x, DerivativeOrder::Hessian) <= 1e-9);
    }

    #[test]
    fn fd_on_barriers() {
        let s = ProblemSpec::new(
            Matrix::from_rows(&[[1.0, -0.4], [-0.4, 0.5]]).unwrap(),
            vec![0.2, 0.1],
            vec![-0.7, -2.0],
            vec![1.5, 0.4],
            1.0,
            1.0,
            0.1,
        )
        .unwrap();
        let g = validate(&s).unwrap();
        let mid = g.midpoint();
        let hat = make_phi1(&s);
        assert!(fd_check(&hat, &mid, DerivativeOrder::Gradient) <= 1e-5);
        assert!(fd_check(&hat, &mid, DerivativeOrder::Hessian) <= 1e-4);
        let p3 = crate::problem::make_phi3(&s, 0.3).unwrap();
        let x = [0.1, -0.3];
        assert!(fd_check(&p3, &x, DerivativeOrder::Gradient) <= 1e-5);
        assert!(fd_check(&p3, &x, DerivativeOrder::Hessian) <= 1e-4);
    }

    #[test]
    fn fd_detects_wrong_gradient() {
        struct Wrong;
        impl Objective for Wrong {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, x: &[f64]) -> f64 {
                x[0] * x[0]
            }
            fn gradient(&self, x: &[f64]) -> Vec<f64> {
                vec![3.0 * x[0]]
            }
            fn hessian(&self, _: &[f64]) -> Matrix {
                Matrix::from_diagonal(&[2.0])
            }
            fn barrier_weight(&self) -> f64 {
                0.0
            }
        }
        assert!(fd_check(&Wrong, &[1.0], DerivativeOrder::Gradient) > 0.1);
        assert!(fd_check(&Wrong, &[1.0], DerivativeOrder::Hessian) > 0.1);
    }

    #[test]
    fn scan_log_barrier() {
        let s = ProblemSpec::new(
            Matrix::zeros(3),
            vec![0.0; 3],
            vec![-3.0; 3],
            vec![3.0; 3],
            1.0,
            1.0,
            1.0,
        )
        .unwrap();
        let g = validate(&s).unwrap();
        let b = make_barrier(BarrierKind::TrustDelta, &s);
        let r = self_concordance_scan(&b, &g, 100, 50, 0).unwrap();
        assert!(r <= 1.0 + 1e-3 && r > 0.1, "ratio {r}");
        // a single log term along its own axis attains the bound
        let g1 = DomainGeometry {
            lower: vec![-1.0],
            upper: vec![1e3],
            shortest_side: 1001.0,
        };
        struct OneLog;
        impl Objective for OneLog {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, x: &[f64]) -> f64 {
                -(x[0] + 1.0).ln()
            }
            fn gradient(&self, x: &[f64]) -> Vec<f64> {
                vec![-1.0 / (x[0] + 1.0)]
            }
            fn hessian(&self, x: &[f64]) -> Matrix {
                Matrix::from_diagonal(&[1.0 / (x[0] + 1.0).powi(2)])
            }
            fn barrier_weight(&self) -> f64 {
                1.0
            }
        }
        let r1 = self_concordance_scan(&OneLog, &g1, 3, 20, 1).unwrap();
        assert!((r1 - 1.0).abs() <= 1e-3, "ratio {r1}");
    }

    #[test]
    fn scan_phi2_and_nonconvex() {
        let s = ProblemSpec::new(
            Matrix::from_rows(&[[-0.5, 0.2], [0.2, 1.0]]).unwrap(),
            vec![0.3, 0.0],
            vec![-1.0, -1.0],
            vec![1.0, 1.0],
            1.0,
            1.0,
            0.1,
        )
        .unwrap();
        let g = validate(&s).unwrap();
        let p2 = make_phi2(&s, 1.0).unwrap();
        assert!(self_concordance_scan(&p2, &g, 100, 50, 3).unwrap() <= 1.0 + 1e-3);
        assert!(self_concordance_scan(&make_qhat(&s), &g, 100, 50, 3).is_err());
    }

    #[test]
    fn inertia_bisection_matches_jacobi() {
        let q = Matrix::from_rows(&[
            [4.0, 1.0, -2.0, 0.5, 0.0],
            [1.0, -3.0, 0.7, 0.0, 1.1],
            [-2.0, 0.7, 2.0, -1.0, 0.3],
            [0.5, 0.0, -1.0, 0.1, 0.9],
            [0.0, 1.1, 0.3, 0.9, -1.5],
        ])
        .unwrap();
        let ev = crate::linalg::symmetric_eigenvalues(&q);
        for (k, &e) in ev.iter().enumerate() {
            assert!(
                (eigenvalue_by_bisection(&q, k, 1e-13) - e).abs() <= 1e-9,
                "k = {k}"
            );
        }
        assert!((eigenvalue_by_bisection(&q, 0, 1e-13) - min_eigenvalue(&q)).abs() <= 1e-9);
        assert_eq!(
            count_eigenvalues_below(&Matrix::from_diagonal(&[3.0, -2.0, 5.0]), 0.0),
            1
        );
    }
}
