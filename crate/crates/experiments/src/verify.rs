use corrcache::oracle::{verify_scheme, Mutation, Scheme, VerifyReport};
use corrcache::piggyback;
use corrcache::superposition::{achievable_power_constructive, cache_split, upper_bound_power, CacheAllocation};

use crate::config::{ConfigError, ExperimentConfig};
use crate::run::{run_experiment, CurvePoint};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub lines: Vec<String>,
    pub passed: bool,
}

impl VerifyOutcome {
    /// 0 on a full pass, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.passed &= ok;
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn oracle(&mut self, what: &str, sweep: f64, report: Result<VerifyReport, corrcache::oracle::OracleError>) {
        match report {
            Ok(r) => self.check(r.passed(), format!("sweep={sweep}: {what} oracle {r}")),
            Err(e) => self.check(false, format!("sweep={sweep}: {what} oracle error: {e}")),
        }
    }
}

fn ordering(p: &CurvePoint) -> bool {
    p.p_lb <= p.p_ub + TOL
        && p.p_ign.is_none_or(|v| p.p_lb <= v + TOL)
        && p.p_pb.is_none_or(|v| p.p_lb <= v + TOL)
}

/// Runs the sweep, then checks every point with the decodability oracle and
/// the closed-form cross-checks. `mutation` corrupts every delivery instance.
pub fn verify_command(cfg: &ExperimentConfig, mutation: Option<Mutation>) -> Result<VerifyOutcome, ConfigError> {
    let points = run_experiment(cfg)?;
    let k = cfg.n_users;
    let ch = &cfg.channel;
    let mut out = VerifyOutcome { lines: Vec::new(), passed: true };
    for (p, sp) in points.iter().zip(cfg.points()?) {
        let (lib, m) = (&sp.library, sp.memory);
        let pi = CacheAllocation::new(p.pi_star.clone()).expect("optimizer output is a valid allocation");

        let spec = cache_split(lib, k, m, &pi);
        out.oracle("superposition", p.sweep, verify_scheme(&Scheme::Superposition(spec), lib, k, mutation));
        if cfg.include_ignorant {
            let ign = lib.correlation_ignorant();
            let spec = cache_split(&ign, k, m, &CacheAllocation::single(ign.n_files(), 1));
            out.oracle("ignorant", p.sweep, verify_scheme(&Scheme::Superposition(spec), &ign, k, mutation));
        }
        if p.p_pb.is_some() {
            out.oracle("piggyback", p.sweep, verify_scheme(&Scheme::Piggyback { memory: m }, lib, k, mutation));
        }

        let constructive = achievable_power_constructive(lib, ch, m, &pi).expect("sizes were validated");
        let closed = upper_bound_power(lib, ch, m, &pi);
        out.check(
            constructive <= closed + TOL,
            format!("sweep={}: constructive {constructive:.12} <= closed form {closed:.12}", p.sweep),
        );
        if let Some(pb) = p.p_pb {
            let c = piggyback::constructive_power(lib, ch, m).expect("applicability was checked");
            out.check(
                (c - pb).abs() <= TOL,
                format!("sweep={}: piggyback closed form {pb:.12} = explicit levels {c:.12}", p.sweep),
            );
        }
        out.check(ordering(p), format!("sweep={}: lower bound below every scheme", p.sweep));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_user_single_file_passes() {
        let cfg = ExperimentConfig::parse(
            "n_files = 1\nn_users = 1\nlevel_rates = [1.0]\ngains_sq = [0.5]\nsweep = \"memory\"\n\
             sweep_start = 0.0\nsweep_stop = 1.0\nsweep_steps = 2\n",
        )
        .unwrap();
        let out = verify_command(&cfg, None).unwrap();
        assert!(out.passed, "{:#?}", out.lines);
        assert_eq!(out.exit_code(), 0);
    }
}
