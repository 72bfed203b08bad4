//! Damped Gauss-Newton (Levenberg-Marquardt) with Nielsen's damping update.
//!
//! The damping term is `lambda * I` rather than Marquardt's diagonal
//! scaling, so rank-deficient Jacobians (more unknowns than residuals) still
//! give a solvable step.

use nalgebra::{DMatrix, DVector};

pub trait LeastSquares {
    fn residuals(&self, x: &DVector<f64>) -> DVector<f64>;
    fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmSettings {
    pub max_iters: usize,
    /// Stop once the sum of squared residuals falls below this.
    pub cost_floor: f64,
    pub grad_tol: f64,
    pub step_tol: f64,
    pub tau: f64,
}

impl Default for LmSettings {
    fn default() -> Self {
        LmSettings { max_iters: 500, cost_floor: 1e-30, grad_tol: 1e-16, step_tol: 1e-16, tau: 1e-3 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    CostFloor,
    SmallGradient,
    SmallStep,
    MaxIterations,
    NonFinite,
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub x: DVector<f64>,
    /// Sum of squared residuals at `x`.
    pub cost: f64,
    pub iterations: usize,
    pub termination: Termination,
}

fn sum_sq(r: &DVector<f64>) -> f64 {
    r.norm_squared()
}

pub fn minimize<P: LeastSquares>(problem: &P, x0: DVector<f64>, s: &LmSettings) -> LmOutcome {
    let mut x = x0;
    let mut r = problem.residuals(&x);
    let mut cost = sum_sq(&r);
    if !cost.is_finite() {
        return LmOutcome { x, cost, iterations: 0, termination: Termination::NonFinite };
    }
    let mut j = problem.jacobian(&x);
    let mut a = j.tr_mul(&j);
    let mut g = j.tr_mul(&r);
    let mut lambda = s.tau * a.diagonal().max().max(1e-12);
    let mut nu = 2.0;
    let p = x.len();

    for it in 0..s.max_iters {
        if cost <= s.cost_floor {
            return LmOutcome { x, cost, iterations: it, termination: Termination::CostFloor };
        }
        if g.amax() <= s.grad_tol {
            return LmOutcome { x, cost, iterations: it, termination: Termination::SmallGradient };
        }
        let mut damped = a.clone();
        for k in 0..p {
            damped[(k, k)] += lambda;
        }
        let Some(chol) = damped.cholesky() else {
            lambda *= nu;
            nu *= 2.0;
            continue;
        };
        let h = chol.solve(&(-&g));
        if h.norm() <= s.step_tol * (x.norm() + s.step_tol) {
            return LmOutcome { x, cost, iterations: it, termination: Termination::SmallStep };
        }
        let x_new = &x + &h;
        let r_new = problem.residuals(&x_new);
        let cost_new = sum_sq(&r_new);
        // predicted reduction of 0.5 * cost under the linear model
        let predicted = 0.5 * h.dot(&(lambda * &h - &g));
        let rho = if cost_new.is_finite() && predicted > 0.0 { 0.5 * (cost - cost_new) / predicted } else { -1.0 };
        if rho > 0.0 {
            x = x_new;
            r = r_new;
            cost = cost_new;
            j = problem.jacobian(&x);
            a = j.tr_mul(&j);
            g = j.tr_mul(&r);
            lambda *= (1.0 - (2.0 * rho - 1.0).powi(3)).max(1.0 / 3.0);
            nu = 2.0;
        } else {
            lambda *= nu;
            nu *= 2.0;
            if !lambda.is_finite() {
                return LmOutcome { x, cost, iterations: it + 1, termination: Termination::NonFinite };
            }
        }
    }
    LmOutcome { x, cost, iterations: s.max_iters, termination: Termination::MaxIterations }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Rosenbrock as residuals (10 (y - x^2), 1 - x).
    struct Rosenbrock;

    impl LeastSquares for Rosenbrock {
        fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
            DVector::from_vec(vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]])
        }

        fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::from_row_slice(2, 2, &[-20.0 * x[0], 10.0, -1.0, 0.0])
        }
    }

    /// One residual, two unknowns: x^2 + y^2 - 1.
    struct Circle;

    impl LeastSquares for Circle {
        fn residuals(&self, x: &DVector<f64>) -> DVector<f64> {
            DVector::from_element(1, x[0] * x[0] + x[1] * x[1] - 1.0)
        }

        fn jacobian(&self, x: &DVector<f64>) -> DMatrix<f64> {
            DMatrix::from_row_slice(1, 2, &[2.0 * x[0], 2.0 * x[1]])
        }
    }

    #[test]
    fn rosenbrock_converges() {
        let out = minimize(&Rosenbrock, DVector::from_vec(vec![-1.2, 1.0]), &LmSettings::default());
        assert!(out.cost < 1e-20, "{out:?}");
        assert!((out.x[0] - 1.0).abs() < 1e-9 && (out.x[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn underdetermined_system_reaches_the_manifold() {
        let out = minimize(&Circle, DVector::from_vec(vec![2.0, 0.5]), &LmSettings::default());
        assert!(out.cost < 1e-20, "{out:?}");
    }

    #[test]
    fn iteration_cap_is_respected() {
        let s = LmSettings { max_iters: 3, ..LmSettings::default() };
        let out = minimize(&Rosenbrock, DVector::from_vec(vec![-1.2, 1.0]), &s);
        assert_eq!(out.termination, Termination::MaxIterations);
        assert_eq!(out.iterations, 3);
    }
}
