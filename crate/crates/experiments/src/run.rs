use corrcache::piggyback::{meets_lower_bound, piggyback_applicable, piggyback_power};
use corrcache::superposition::{
    cache_split, constructive_power, optimize_pi_constructive, refine_allocation, worst_case_profiles,
    CacheAllocation, DemandProfile, Optimum,
};
use corrcache::{lower_bound_power, ChannelConfig, CorrelatedLibrary};
use rayon::prelude::*;

use crate::config::{ConfigError, ExperimentConfig, Sweep, SweepPoint};

/// One row of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub sweep: f64,
    pub p_lb: f64,
    /// Correlation-aware superposition scheme, minimised over the cache allocation.
    pub p_ub: f64,
    pub pi_star: Vec<f64>,
    /// Absent when the piggyback scheme does not apply or is disabled.
    pub p_pb: Option<f64>,
    pub p_ign: Option<f64>,
    pub meets_lb: Option<bool>,
}

struct Evaluated {
    point: CurvePoint,
    ign_pi: Option<CacheAllocation>,
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    ch: &'a ChannelConfig,
    profiles: &'a [DemandProfile],
}

impl Context<'_> {
    fn optimum(&self, lib: &CorrelatedLibrary, memory: f64) -> Optimum {
        optimize_pi_constructive(lib, self.ch, memory, &self.cfg.optimizer, self.profiles, None)
            .expect("profiles match the channel")
    }

    fn refined(&self, lib: &CorrelatedLibrary, memory: f64, start: &CacheAllocation) -> Optimum {
        refine_allocation(lib, self.ch.n_users(), memory, &self.cfg.optimizer, start, |pi| {
            constructive_power(self.profiles, &cache_split(lib, self.ch.n_users(), memory, pi), self.ch)
        })
    }

    fn evaluate(&self, p: &SweepPoint) -> Evaluated {
        let (lib, m) = (&p.library, p.memory);
        let ub = self.optimum(lib, m);
        let ign = self.cfg.include_ignorant.then(|| self.optimum(&lib.correlation_ignorant(), m));
        let (p_pb, meets_lb) = if self.cfg.include_piggyback && piggyback_applicable(lib, self.ch.n_users(), m) {
            (
                piggyback_power(lib, self.ch, m).ok(),
                meets_lower_bound(lib, self.ch, m).ok(),
            )
        } else {
            (None, None)
        };
        Evaluated {
            point: CurvePoint {
                sweep: p.value,
                p_lb: lower_bound_power(lib, self.ch, m),
                p_ub: ub.power,
                pi_star: ub.pi.as_slice().to_vec(),
                p_pb,
                p_ign: ign.as_ref().map(|o| o.power),
                meets_lb,
            },
            ign_pi: ign.map(|o| o.pi),
        }
    }
}

/// Allocation that reproduces the placement of `pi` at `from` when the
/// cache grows to `to`, leaving the extra memory unused.
fn carried(pi: &[f64], from: f64, to: f64) -> CacheAllocation {
    CacheAllocation::new(pi.iter().map(|p| p * from / to).collect()).expect("scaled allocation stays valid")
}

/// Evaluates every sweep point. Output order follows the sweep.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<CurvePoint>, ConfigError> {
    let sweep = cfg.points()?;
    let profiles = worst_case_profiles(cfg.n_files, cfg.n_users).map_err(|e| ConfigError::Field {
        field: "n_users",
        message: e.to_string(),
    })?;
    let ctx = Context { cfg, ch: &cfg.channel, profiles: &profiles };
    let mut evaluated: Vec<Evaluated> = sweep.par_iter().map(|p| ctx.evaluate(p)).collect();

    // Memory sweeps: restart each point from the previous optimum.
    if cfg.sweep == Sweep::Memory {
        for i in 1..sweep.len() {
            let (prev_m, m) = (sweep[i - 1].memory, sweep[i].memory);
            if m <= 0.0 || prev_m <= 0.0 {
                continue;
            }
            let lib = &sweep[i].library;
            let start = carried(&evaluated[i - 1].point.pi_star, prev_m, m);
            let o = ctx.refined(lib, m, &start);
            if o.power < evaluated[i].point.p_ub {
                evaluated[i].point.p_ub = o.power;
                evaluated[i].point.pi_star = o.pi.as_slice().to_vec();
            }
            if let Some(prev_pi) = evaluated[i - 1].ign_pi.clone() {
                let ign_lib = lib.correlation_ignorant();
                let o = ctx.refined(&ign_lib, m, &carried(prev_pi.as_slice(), prev_m, m));
                let cur = &mut evaluated[i];
                if cur.point.p_ign.is_some_and(|p| o.power < p) {
                    cur.point.p_ign = Some(o.power);
                    cur.ign_pi = Some(o.pi);
                }
            }
        }
    }
    Ok(evaluated.into_iter().map(|e| e.point).collect())
}
