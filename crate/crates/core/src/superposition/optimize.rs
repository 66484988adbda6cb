//! Search for the cache allocation `π` minimising a power objective.
//!
//! The objective is piecewise smooth in `π` with kinks where some `t_ℓ`
//! crosses an integer. The search scans a simplex grid on `Σπ = 1`, then moves
//! mass between pairs of sublibraries, searching each smooth piece of the
//! one-dimensional move by golden section.

use crate::model::{ChannelConfig, CorrelatedLibrary, ModelError};

use super::closed_form::upper_bound_power;
use super::placement::{cache_split, CacheAllocation};
use super::profile::{constructive_power, DemandProfile};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    /// Grid step is `1 / grid_resolution`.
    pub grid_resolution: usize,
    /// Refinement stops once a full pass gains less than this.
    pub refine_tol: f64,
    pub max_passes: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        OptimizerSettings { grid_resolution: 20, refine_tol: 1e-10, max_passes: 200 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub pi: CacheAllocation,
    pub power: f64,
    /// Objective after the grid scan and after every accepted move.
    pub trace: Vec<f64>,
}

/// Minimises `objective` over allocations with `Σπ = 1` supported on the
/// sublibraries with positive rate. `start` seeds an extra refinement run.
pub fn minimize_allocation<F>(
    lib: &CorrelatedLibrary,
    n_users: usize,
    memory: f64,
    settings: &OptimizerSettings,
    start: Option<&CacheAllocation>,
    objective: F,
) -> Optimum
where
    F: Fn(&CacheAllocation) -> f64,
{
    let n = lib.n_files();
    let active = active_levels(lib);
    let eval = |pi: &[f64]| objective(&CacheAllocation::new(pi.to_vec()).expect("valid allocation"));
    if active.len() <= 1 || memory <= 0.0 {
        let pi = match active.first() {
            Some(&i) => CacheAllocation::single(n, i + 1),
            None => CacheAllocation::single(n, 1),
        };
        let power = objective(&pi);
        let fallback = Optimum { pi, power, trace: vec![power] };
        return match start {
            Some(s) => {
                let other = objective(s);
                if other < power {
                    Optimum { pi: s.clone(), power: other, trace: vec![other] }
                } else {
                    fallback
                }
            }
            None => fallback,
        };
    }
    let breaks = breakpoints(lib, n_users, memory);

    let res = settings.grid_resolution.max(1);
    let mut best = vec![0.0; n];
    let mut best_val = f64::INFINITY;
    for comp in compositions(res, active.len()) {
        let mut pi = vec![0.0; n];
        for (slot, &c) in active.iter().zip(&comp) {
            pi[*slot] = c as f64 / res as f64;
        }
        let v = eval(&pi);
        if v < best_val {
            best_val = v;
            best = pi;
        }
    }

    let mut result = refine(best, best_val, &active, &breaks, settings, &eval);
    if let Some(s) = start {
        let seed = s.as_slice().to_vec();
        let seed_val = eval(&seed);
        let other = refine(seed, seed_val, &active, &breaks, settings, &eval);
        if other.1 < result.1 {
            result = other;
        }
    }
    let (pi, power, trace) = result;
    Optimum { pi: CacheAllocation::new(pi).expect("valid allocation"), power, trace }
}

/// Refinement only, starting from `start` (which may leave part of the
/// cache unused).
pub fn refine_allocation<F>(
    lib: &CorrelatedLibrary,
    n_users: usize,
    memory: f64,
    settings: &OptimizerSettings,
    start: &CacheAllocation,
    objective: F,
) -> Optimum
where
    F: Fn(&CacheAllocation) -> f64,
{
    let eval = |pi: &[f64]| objective(&CacheAllocation::new(pi.to_vec()).expect("valid allocation"));
    let seed = start.as_slice().to_vec();
    let val = eval(&seed);
    if memory <= 0.0 {
        return Optimum { pi: start.clone(), power: val, trace: vec![val] };
    }
    let breaks = breakpoints(lib, n_users, memory);
    let (pi, power, trace) = refine(seed, val, &active_levels(lib), &breaks, settings, &eval);
    Optimum { pi: CacheAllocation::new(pi).expect("valid allocation"), power, trace }
}

fn active_levels(lib: &CorrelatedLibrary) -> Vec<usize> {
    (0..lib.n_files()).filter(|&i| lib.level_rates()[i] > 0.0).collect()
}

// Values of π_ℓ at which t_ℓ is an integer.
fn breakpoints(lib: &CorrelatedLibrary, n_users: usize, memory: f64) -> Vec<Vec<f64>> {
    (0..lib.n_files())
        .map(|i| {
            let per_unit = lib.sublibrary_size(i + 1) as f64 * lib.level_rates()[i]
                / (n_users as f64 * memory);
            (1..=n_users)
                .map(|t| t as f64 * per_unit)
                .filter(|&p| p < 1.0)
                .collect()
        })
        .collect()
}

fn refine<E>(
    mut pi: Vec<f64>,
    mut val: f64,
    active: &[usize],
    breaks: &[Vec<f64>],
    settings: &OptimizerSettings,
    eval: &E,
) -> (Vec<f64>, f64, Vec<f64>)
where
    E: Fn(&[f64]) -> f64,
{
    let mut trace = vec![val];
    for _ in 0..settings.max_passes {
        let pass_start = val;
        for &i in active {
            for &j in active {
                if i == j {
                    continue;
                }
                // move δ from j to i, δ ∈ [−π_i, π_j]
                let lo = -pi[i];
                let hi = pi[j];
                if hi - lo <= 0.0 {
                    continue;
                }
                let mut cuts = vec![lo, hi];
                cuts.extend(breaks[i].iter().map(|b| b - pi[i]));
                cuts.extend(breaks[j].iter().map(|b| pi[j] - b));
                cuts.retain(|c| *c >= lo && *c <= hi);
                cuts.sort_by(f64::total_cmp);
                cuts.dedup();
                let at = |d: f64| {
                    let mut p = pi.clone();
                    p[i] = (p[i] + d).clamp(0.0, 1.0);
                    p[j] = (p[j] - d).clamp(0.0, 1.0);
                    (eval(&p), p)
                };
                let mut cand: Option<(f64, Vec<f64>)> = None;
                let mut consider = |v: f64, p: Vec<f64>| {
                    if v < val - settings.refine_tol && cand.as_ref().is_none_or(|c| v < c.0) {
                        cand = Some((v, p));
                    }
                };
                for &c in &cuts {
                    let (v, p) = at(c);
                    consider(v, p);
                }
                for w in cuts.windows(2) {
                    let d = golden_section(w[0], w[1], |d| at(d).0);
                    let (v, p) = at(d);
                    consider(v, p);
                }
                if let Some((v, p)) = cand {
                    val = v;
                    pi = p;
                    trace.push(val);
                }
            }
        }
        if pass_start - val < settings.refine_tol {
            break;
        }
    }
    (pi, val, trace)
}

fn golden_section<G: Fn(f64) -> f64>(mut a: f64, mut b: f64, f: G) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..80 {
        if (b - a).abs() < 1e-13 {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// All ways of writing `total` as an ordered sum of `parts` non-negative integers.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Allocation minimising the closed-form upper bound.
pub fn optimize_pi(
    lib: &CorrelatedLibrary,
    ch: &ChannelConfig,
    memory: f64,
    settings: &OptimizerSettings,
) -> Optimum {
    minimize_allocation(lib, ch.n_users(), memory, settings, None, |pi| {
        upper_bound_power(lib, ch, memory, pi)
    })
}

/// Allocation minimising the worst-case power of the explicit scheme over
/// `profiles`.
pub fn optimize_pi_constructive(
    lib: &CorrelatedLibrary,
    ch: &ChannelConfig,
    memory: f64,
    settings: &OptimizerSettings,
    profiles: &[DemandProfile],
    start: Option<&CacheAllocation>,
) -> Result<Optimum, ModelError> {
    if let Some(p) = profiles.first() {
        if p.n_users() != ch.n_users() {
            return Err(ModelError::LengthMismatch { expected: ch.n_users(), got: p.n_users() });
        }
    }
    Ok(minimize_allocation(lib, ch.n_users(), memory, settings, start, |pi| {
        constructive_power(profiles, &cache_split(lib, ch.n_users(), memory, pi), ch)
    }))
}
