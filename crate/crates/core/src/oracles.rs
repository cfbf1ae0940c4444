//! Scalar lemmas used by the convergence arguments, in directly checkable form.
//!
//! The comparison ODE is `V̇ = -α V^p` for `V < 1` and `V̇ = -β V^q` for
//! `V ≥ 1`, with `0 < p < 1 < q`. Its closed form bounds the Lyapunov function
//! of every network regime.

use alloc::vec::Vec;

use crate::error::{bail, Result};
use crate::linalg::Matrix;
use crate::math::{abs, powf};
use crate::matrices::{is_class_a2, DEFAULT_TOL};

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        bail!(Domain, "p must lie in (0,1), got {p}");
    }
    Ok(())
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 1.0 && q.is_finite()) {
        bail!(Domain, "q must exceed 1, got {q}");
    }
    Ok(())
}

fn check_gain(name: &str, g: f64) -> Result<()> {
    if !(g > 0.0 && g.is_finite()) {
        bail!(Domain, "{name} must be positive, got {g}");
    }
    Ok(())
}

/// Finite-time settling bound `V0^{1-p} / (α(1-p))` for `V̇ ≤ -α V^p`.
pub fn finite_time_bound(alpha: f64, p: f64, v0: f64) -> Result<f64> {
    check_gain("alpha", alpha)?;
    check_p(p)?;
    if !(v0 >= 0.0) {
        bail!(Domain, "V0 must be nonnegative, got {v0}");
    }
    Ok(powf(v0, 1.0 - p) / (alpha * (1.0 - p)))
}

/// Fixed-time settling bound `1/(α(1-p)) + 1/(β(q-1))`, valid for every `V0`.
pub fn fixed_time_bound(alpha: f64, p: f64, beta: f64, q: f64) -> Result<f64> {
    check_gain("alpha", alpha)?;
    check_gain("beta", beta)?;
    check_p(p)?;
    check_q(q)?;
    Ok(1.0 / (alpha * (1.0 - p)) + 1.0 / (beta * (q - 1.0)))
}

/// Exact solution of the two-branch comparison ODE.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonSolution {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub q: f64,
    pub v0: f64,
    /// [`fixed_time_bound`] for these parameters.
    pub settling_bound: f64,
    /// Time at which `V` reaches 1 (0 when `V0 ≤ 1`).
    pub reach_one_time: f64,
    /// Exact time at which `V` reaches 0.
    pub zero_time: f64,
    /// `(t, V(t))` on the requested grid.
    pub samples: Vec<(f64, f64)>,
}

impl ComparisonSolution {
    /// `V(t)` for `t ≥ 0`.
    pub fn value_at(&self, t: f64) -> f64 {
        let (a, b, p, q) = (self.alpha, self.beta, self.p, self.q);
        if t < self.reach_one_time {
            // q-branch: V^{1-q} grows linearly at rate β(q-1)
            let base = b * (q - 1.0) * t + powf(self.v0, 1.0 - q);
            return powf(base, -1.0 / (q - 1.0));
        }
        let start = if self.v0 > 1.0 { 1.0 } else { self.v0 };
        let base = powf(start, 1.0 - p) - a * (1.0 - p) * (t - self.reach_one_time);
        if base <= 0.0 {
            0.0
        } else {
            powf(base, 1.0 / (1.0 - p))
        }
    }
}

/// Solves the comparison ODE from `V0`, stitching the branches at `V = 1`,
/// and samples it on `grid`.
pub fn comparison_ode_solve(
    alpha: f64,
    beta: f64,
    p: f64,
    q: f64,
    v0: f64,
    grid: &[f64],
) -> Result<ComparisonSolution> {
    let settling_bound = fixed_time_bound(alpha, p, beta, q)?;
    if !(v0 >= 0.0 && v0.is_finite()) {
        bail!(Domain, "V0 must be finite and nonnegative, got {v0}");
    }
    let reach_one_time = if v0 > 1.0 {
        (1.0 - powf(v0, 1.0 - q)) / (beta * (q - 1.0))
    } else {
        0.0
    };
    let zero_time = reach_one_time + powf(v0.min(1.0), 1.0 - p) / (alpha * (1.0 - p));
    let mut sol = ComparisonSolution {
        alpha,
        beta,
        p,
        q,
        v0,
        settling_bound,
        reach_one_time,
        zero_time,
        samples: Vec::with_capacity(grid.len()),
    };
    sol.samples = grid.iter().map(|&t| (t, sol.value_at(t))).collect();
    Ok(sol)
}

/// `‖z‖_l ≤ ‖z‖_r ≤ n^{1/r - 1/l} ‖z‖_l` for `0 < r < l`, each side with
/// `1e-12` relative slack. Returns false when `r < l` does not hold.
pub fn norm_equivalence_check(z: &[f64], r: f64, l: f64) -> bool {
    if !(r > 0.0 && r < l) || z.is_empty() {
        return false;
    }
    let norm = |e: f64| powf(z.iter().map(|v| powf(abs(*v), e)).sum::<f64>(), 1.0 / e);
    let (nl, nr) = (norm(l), norm(r));
    let upper = powf(z.len() as f64, 1.0 / r - 1.0 / l) * nl;
    let slack = 1e-12;
    nl <= nr * (1.0 + slack) + f64::MIN_POSITIVE && nr <= upper * (1.0 + slack) + f64::MIN_POSITIVE
}

/// `|Xᵀ A Y + Σ_{j>i} a_ij (x_j - x_i)(y_j - y_i)|` for symmetric zero-row-sum
/// `A`.
pub fn quadratic_identity_check(a: &Matrix, x: &[f64], y: &[f64]) -> Result<f64> {
    if !a.is_square() || x.len() != a.rows() || y.len() != a.rows() {
        bail!(
            Dimension,
            "{}x{} matrix with vectors of length {} and {}",
            a.rows(),
            a.cols(),
            x.len(),
            y.len()
        );
    }
    if !is_class_a2(a, DEFAULT_TOL)? {
        bail!(Domain, "quadratic identity needs a symmetric, connected, zero-row-sum matrix");
    }
    let ay = a.mul_vec(y)?;
    let left: f64 = x.iter().zip(&ay).map(|(u, v)| u * v).sum();
    let n = x.len();
    let mut right = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            right -= a[(i, j)] * (x[j] - x[i]) * (y[j] - y[i]);
        }
    }
    Ok(abs(left - right))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YoungOutcome {
    /// `ab ≤ a^u/u + b^v/v` (with `1e-12` relative slack).
    pub holds: bool,
    /// `|a^u - b^v| ≤ 1e-10`.
    pub equality: bool,
}

/// Young's inequality for conjugate exponents `1/u + 1/v = 1`.
pub fn young_check(a: f64, b: f64, u: f64, v: f64) -> Result<YoungOutcome> {
    if !(a > 0.0 && b > 0.0) {
        bail!(Domain, "a and b must be positive, got {a}, {b}");
    }
    if !(u > 1.0 && v > 1.0) || abs(1.0 / u + 1.0 / v - 1.0) > 1e-12 {
        bail!(Domain, "exponents {u}, {v} are not conjugate");
    }
    let (au, bv) = (powf(a, u), powf(b, v));
    let rhs = au / u + bv / v;
    Ok(YoungOutcome {
        holds: a * b <= rhs * (1.0 + 1e-12),
        equality: abs(au - bv) <= 1e-10,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn m<const C: usize>(rows: &[[f64; C]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn finite_time_examples() {
        assert_eq!(finite_time_bound(2.0, 0.5, 1.0).unwrap(), 1.0);
        assert_eq!(finite_time_bound(2.0, 0.5, 0.0).unwrap(), 0.0);
        assert_eq!(finite_time_bound(1.0, 0.5, 16.0).unwrap(), 8.0);
        assert!(finite_time_bound(1.0, 1.0, 1.0).is_err());
        assert!(finite_time_bound(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn fixed_time_examples() {
        assert_eq!(fixed_time_bound(1.0, 0.5, 1.0, 2.0).unwrap(), 3.0);
        assert_eq!(fixed_time_bound(2.0, 0.5, 4.0, 3.0).unwrap(), 1.125);
        assert!(fixed_time_bound(1.0, 0.5, 1.0, 1.0).is_err());
        assert!(fixed_time_bound(-1.0, 0.5, 1.0, 2.0).is_err());
    }

    #[test]
    fn finite_bound_overtakes_fixed_bound() {
        let fixed = fixed_time_bound(1.0, 0.5, 1.0, 2.0).unwrap();
        assert!(finite_time_bound(1.0, 0.5, 1.0).unwrap() < fixed);
        assert!(finite_time_bound(1.0, 0.5, 1e6).unwrap() > fixed);
    }

    #[test]
    fn comparison_single_branch() {
        let sol = comparison_ode_solve(1.0, 1.0, 0.5, 2.0, 1.0, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(sol.reach_one_time, 0.0);
        assert_eq!(sol.zero_time, 2.0);
        assert!((sol.samples[1].1 - 0.25).abs() < 1e-15);
        assert_eq!(sol.samples[2].1, 0.0);
        assert_eq!(sol.samples[3].1, 0.0);
        let below = comparison_ode_solve(3.0, 1.0, 0.25, 2.0, 0.5, &[]).unwrap();
        assert!((below.zero_time - finite_time_bound(3.0, 0.25, 0.5).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn comparison_reach_one_limit() {
        let (b, q) = (2.0, 3.0);
        let sol = comparison_ode_solve(1.0, b, 0.5, q, 1e12, &[]).unwrap();
        assert!((sol.reach_one_time - 1.0 / (b * (q - 1.0))).abs() < 1e-12);
        assert!(sol.zero_time <= sol.settling_bound);
        assert!((sol.value_at(sol.reach_one_time) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_equivalence_examples() {
        assert!(norm_equivalence_check(&[1.0, 1.0], 1.0, 2.0));
        assert!(norm_equivalence_check(&[0.0, 1.0, 0.0], 0.5, 3.0));
        assert!(!norm_equivalence_check(&[1.0, 1.0], 2.0, 1.0));
    }

    #[test]
    fn quadratic_identity_examples() {
        let a = m(&[[-1.0, 1.0], [1.0, -1.0]]);
        assert_eq!(quadratic_identity_check(&a, &[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(quadratic_identity_check(&a, &[3.0, 3.0], &[3.0, 3.0]).unwrap(), 0.0);
        let directed = m(&[[-1.0, 1.0], [0.0, 0.0]]);
        assert!(quadratic_identity_check(&directed, &[1.0, 0.0], &[0.0, 1.0]).is_err());
        assert!(quadratic_identity_check(&a, &[1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn young_examples() {
        let eq = young_check(1.0, 1.0, 2.0, 2.0).unwrap();
        assert!(eq.holds && eq.equality);
        let strict = young_check(2.0, 1.0, 2.0, 2.0).unwrap();
        assert!(strict.holds && !strict.equality);
        assert!(young_check(1.0, 1.0, 2.0, 3.0).is_err());
        assert!(young_check(0.0, 1.0, 2.0, 2.0).is_err());
    }

    #[test]
    fn young_equality_on_the_curve() {
        // b = a^{u/v} makes a^u = b^v
        let (a, u) = (1.7, 3.0);
        let v = u / (u - 1.0);
        let out = young_check(a, powf(a, u / v), u, v).unwrap();
        assert!(out.holds && out.equality);
        let _ = vec![0u8];
    }
}
