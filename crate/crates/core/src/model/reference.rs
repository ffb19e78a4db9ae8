use crate::error::{invalid, Result, WalkerError};

/// How the center-of-mass abscissa of the reference is composed from the
/// reference foot position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceXForm {
    /// `x_r = xbar_r + r cos(theta_r)`.
    #[default]
    CosOffset,
    /// `x_r = xbar_r + r sin(theta_r)`, consistent with the walker geometry.
    SinOffset,
}

/// One stride of the piecewise reference, valid from `t_start` until the
/// next phase starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePhase {
    pub t_start: f64,
    /// Foot offset; the foot sits at `foot_offset + foot_speed * t` (absolute `t`).
    pub foot_offset: f64,
    pub foot_speed: f64,
    /// Constant leg rate; `theta_r = a + theta_rate (t - t_start)`.
    pub theta_rate: f64,
}

/// Reference value `(x_r, theta_r, xdot_r, thetadot_r)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReferenceSample {
    pub x: f64,
    pub theta: f64,
    pub xdot: f64,
    pub thetadot: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceTrajectory {
    /// Leg angle affine in time within each stride, reset to `a` at every
    /// reference impact; foot moving at constant speed.
    Piecewise { r: f64, a: f64, phases: Vec<ReferencePhase>, x_form: ReferenceXForm },
    /// Precomputed values at the interval midpoints `t = h (2k + 1) / 2`.
    Sampled(Vec<ReferenceSample>),
}

impl ReferenceTrajectory {
    pub fn from_phases(r: f64, a: f64, phases: Vec<ReferencePhase>, x_form: ReferenceXForm) -> Result<Self> {
        if phases.is_empty() {
            return Err(invalid("reference", "needs at least one phase"));
        }
        if phases.windows(2).any(|w| !(w[1].t_start > w[0].t_start)) {
            return Err(invalid("reference", "phase start times must be strictly increasing"));
        }
        if phases.iter().any(|p| {
            !(p.t_start.is_finite()
                && p.foot_offset.is_finite()
                && p.foot_speed.is_finite()
                && p.theta_rate.is_finite())
        }) {
            return Err(invalid("reference", "phase data must be finite"));
        }
        Ok(Self::Piecewise { r, a, phases, x_form })
    }

    /// Builds every stride that starts before `horizon` from the initial
    /// stride data. A stride ends when `theta_r` reaches `-a`; the next one
    /// restarts at `a` with the rate scaled by `cos(2a)`, and the foot keeps
    /// its position and speed across the exchange.
    #[allow(clippy::too_many_arguments)]
    pub fn from_initial(
        r: f64,
        a: f64,
        t0: f64,
        foot_offset: f64,
        foot_speed: f64,
        theta_rate: f64,
        horizon: f64,
        x_form: ReferenceXForm,
    ) -> Result<Self> {
        let mut phases = vec![ReferencePhase { t_start: t0, foot_offset, foot_speed, theta_rate }];
        let contraction = (2.0 * a).cos();
        loop {
            let last = *phases.last().unwrap();
            if last.theta_rate >= 0.0 || phases.len() > 10_000 {
                break;
            }
            let t_next = last.t_start + 2.0 * a / (-last.theta_rate);
            if !(t_next < t0 + horizon) {
                break;
            }
            phases.push(ReferencePhase {
                t_start: t_next,
                foot_offset: last.foot_offset,
                foot_speed: last.foot_speed,
                theta_rate: contraction * last.theta_rate,
            });
        }
        Self::from_phases(r, a, phases, x_form)
    }

    pub fn sampled(samples: Vec<ReferenceSample>) -> Self {
        Self::Sampled(samples)
    }

    /// Evaluates a piecewise reference at time `t`.
    pub fn eval(&self, t: f64) -> Result<ReferenceSample> {
        match self {
            Self::Piecewise { r, a, phases, x_form } => {
                let t0 = phases[0].t_start;
                if !(t >= t0) {
                    return Err(WalkerError::OutOfDomain { t, t0 });
                }
                let idx = phases.partition_point(|p| p.t_start <= t) - 1;
                let p = &phases[idx];
                let theta = a + p.theta_rate * (t - p.t_start);
                let foot = p.foot_offset + p.foot_speed * t;
                let (sin, cos) = theta.sin_cos();
                let (x, xdot) = match x_form {
                    ReferenceXForm::CosOffset => (foot + r * cos, p.foot_speed - r * sin * p.theta_rate),
                    ReferenceXForm::SinOffset => (foot + r * sin, p.foot_speed + r * cos * p.theta_rate),
                };
                Ok(ReferenceSample { x, theta, xdot, thetadot: p.theta_rate })
            }
            Self::Sampled(_) => {
                Err(WalkerError::Configuration("a sampled reference has no continuous-time evaluation".into()))
            }
        }
    }

    /// Reference foot position at `t` (piecewise only).
    pub fn foot(&self, t: f64) -> Result<f64> {
        match self {
            Self::Piecewise { phases, .. } => {
                let t0 = phases[0].t_start;
                if !(t >= t0) {
                    return Err(WalkerError::OutOfDomain { t, t0 });
                }
                let p = &phases[phases.partition_point(|p| p.t_start <= t) - 1];
                Ok(p.foot_offset + p.foot_speed * t)
            }
            Self::Sampled(_) => Err(WalkerError::Configuration("a sampled reference carries no foot track".into())),
        }
    }

    /// Reference used by the cost on interval `k`, taken at `t = h (2k + 1) / 2`.
    pub fn midpoint_sample(&self, k: usize, h: f64) -> Result<ReferenceSample> {
        match self {
            Self::Piecewise { .. } => self.eval(h * (2 * k + 1) as f64 / 2.0),
            Self::Sampled(samples) => samples.get(k).copied().ok_or_else(|| {
                WalkerError::Configuration(format!(
                    "sampled reference has {} intervals, interval {k} requested",
                    samples.len()
                ))
            }),
        }
    }

    /// Reference impact instants after the initial phase start.
    pub fn impact_times(&self) -> Vec<f64> {
        match self {
            Self::Piecewise { phases, .. } => phases.iter().skip(1).map(|p| p.t_start).collect(),
            Self::Sampled(_) => Vec::new(),
        }
    }
}
