use crate::model::{Config, ControlInput, Covector, WalkerParams};

use super::discrete::{del_residual, forward_momentum, velocity_from_momentum};

/// One application of the discrete impact map on the grid pair `(index, index + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactRecord {
    pub index: usize,
    /// Pair produced by the stride that ended in the guard.
    pub pre: [Config; 2],
    /// Pair the next stride starts from; this is what `configs` stores.
    pub post: [Config; 2],
}

/// Discrete trajectory on the uniform grid `t_k = k h`.
///
/// `configs[k]` holds post-impact values at impact indices. Controls, when
/// present, are one per interval.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    pub h: f64,
    pub configs: Vec<Config>,
    pub controls: Vec<ControlInput>,
    pub impacts: Vec<ImpactRecord>,
}

impl DiscretePath {
    pub fn steps(&self) -> usize {
        self.configs.len().saturating_sub(1)
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    pub fn control(&self, k: usize) -> ControlInput {
        self.controls.get(k).copied().unwrap_or(ControlInput::ZERO)
    }

    pub fn impact_at(&self, k: usize) -> Option<&ImpactRecord> {
        self.impacts.iter().find(|i| i.index == k)
    }

    pub fn impact_indices(&self) -> Vec<usize> {
        self.impacts.iter().map(|i| i.index).collect()
    }

    /// Configuration `i` as seen by the stride that owns node `k`.
    ///
    /// Nodes up to an impact index belong to the stride before the impact and
    /// see the pre-impact pair; later nodes see the post-impact pair.
    pub fn config_seen_from(&self, k: usize, i: usize) -> Config {
        for imp in &self.impacts {
            if i == imp.index || i == imp.index + 1 {
                let slot = i - imp.index;
                return if k <= imp.index { imp.pre[slot] } else { imp.post[slot] };
            }
        }
        self.configs[i]
    }

    /// Pair `(q_k, q_k+1)` of interval `k` as seen by the stride that owns it.
    pub fn interval_pair(&self, k: usize) -> [Config; 2] {
        [self.config_seen_from(k + 1, k), self.config_seen_from(k + 1, k + 1)]
    }

    /// Forced discrete Euler-Lagrange residual at interior node `k`.
    pub fn del_residual_at(&self, params: &WalkerParams, k: usize) -> Covector {
        del_residual(
            params,
            self.config_seen_from(k, k - 1),
            self.config_seen_from(k, k),
            self.config_seen_from(k, k + 1),
            &self.control(k - 1),
            &self.control(k),
            self.h,
        )
    }

    /// Largest residual norm over all interior nodes.
    pub fn max_del_residual(&self, params: &WalkerParams) -> f64 {
        (1..self.steps()).map(|k| self.del_residual_at(params, k).amax()).fold(0.0, f64::max)
    }

    /// Velocity at node `k` recovered from the discrete momentum of the
    /// interval ending at `k` (forward difference at `k = 0`, and from the
    /// post-impact pair at impact nodes).
    pub fn velocity_estimate(&self, params: &WalkerParams, k: usize) -> Config {
        let h = self.h;
        if self.impact_at(k).is_some() || k == 0 {
            if self.configs.len() < 2 {
                return Config::default();
            }
            let q0 = self.configs[k];
            let q1 = if let Some(imp) = self.impact_at(k) { imp.post[1] } else { self.configs[1] };
            return q0.velocity_to(q1, h);
        }
        let [q0, q1] = self.interval_pair(k - 1);
        let p = forward_momentum(params, q0, q1, &self.control(k - 1), h);
        velocity_from_momentum(params, q1, p)
    }
}
