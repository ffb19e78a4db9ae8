use nalgebra::{DMatrix, DVector};

/// Relative central-difference step; the step is `FD_SCALE * max(1, |x_j|)`.
pub const FD_SCALE: f64 = 1e-6;

fn fd_step(x: f64) -> f64 {
    FD_SCALE * x.abs().max(1.0)
}

/// Central-difference Jacobian of `f` at `x`.
pub fn fd_jacobian(f: impl Fn(&DVector<f64>) -> DVector<f64>, x: &DVector<f64>) -> DMatrix<f64> {
    let m = f(x).len();
    let mut jac = DMatrix::zeros(m, x.len());
    let mut xp = x.clone();
    for j in 0..x.len() {
        let step = fd_step(x[j]);
        xp[j] = x[j] + step;
        let plus = f(&xp);
        xp[j] = x[j] - step;
        let minus = f(&xp);
        xp[j] = x[j];
        jac.set_column(j, &((plus - minus) / (2.0 * step)));
    }
    jac
}

/// Central-difference gradient of a scalar function.
pub fn fd_gradient(f: impl Fn(&DVector<f64>) -> f64, x: &DVector<f64>) -> DVector<f64> {
    let g = fd_jacobian(|v| DVector::from_element(1, f(v)), x);
    g.row(0).transpose()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdReport {
    pub max_abs_error: f64,
    /// Largest `|analytic - fd| / max(1, |fd|)`.
    pub max_rel_error: f64,
}

/// Compares an analytic Jacobian with central differences of `f` at `x`.
pub fn fd_check(f: impl Fn(&DVector<f64>) -> DVector<f64>, analytic: &DMatrix<f64>, x: &DVector<f64>) -> FdReport {
    let fd = fd_jacobian(f, x);
    assert_eq!(fd.shape(), analytic.shape(), "jacobian shape mismatch");
    let mut report = FdReport { max_abs_error: 0.0, max_rel_error: 0.0 };
    for (a, b) in analytic.iter().zip(fd.iter()) {
        let err = (a - b).abs();
        report.max_abs_error = report.max_abs_error.max(err);
        report.max_rel_error = report.max_rel_error.max(err / b.abs().max(1.0));
    }
    report
}
