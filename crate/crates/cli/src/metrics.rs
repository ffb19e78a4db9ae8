use walker_core::model::{ReferenceTrajectory, WalkerParams};
use walker_core::{DiscretePath, Result};

/// Mean `|xbar_k - xbar_r(t_k)|` over the nodes of the final third of the path.
pub fn foot_tracking_error(params: &WalkerParams, path: &DiscretePath, reference: &ReferenceTrajectory) -> Result<f64> {
    let n = path.steps();
    let start = (2 * n).div_ceil(3);
    let r = params.com_radius();
    let mut sum = 0.0;
    for k in start..=n {
        let q = path.configs[k];
        sum += (q.x - r * q.theta.sin() - reference.foot(path.time(k))?).abs();
    }
    Ok(sum / (n - start + 1) as f64)
}

/// Root-mean-square distance `|(x, theta) - (x_r, theta_r)|` over all nodes.
pub fn config_tracking_error(path: &DiscretePath, reference: &ReferenceTrajectory) -> Result<f64> {
    let mut sum = 0.0;
    for (k, q) in path.configs.iter().enumerate() {
        let r = reference.eval(path.time(k))?;
        sum += (q.x - r.x).powi(2) + (q.theta - r.theta).powi(2);
    }
    Ok((sum / path.configs.len() as f64).sqrt())
}

/// Largest control component over the path.
pub fn max_control(path: &DiscretePath) -> f64 {
    path.controls.iter().map(|u| u.max_abs()).fold(0.0, f64::max)
}

/// Root-mean-square control norm per interval.
pub fn rms_control(path: &DiscretePath) -> f64 {
    if path.controls.is_empty() {
        return 0.0;
    }
    (path.controls.iter().map(|u| u.norm_sq()).sum::<f64>() / path.controls.len() as f64).sqrt()
}
