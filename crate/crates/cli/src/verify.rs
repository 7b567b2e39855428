use std::io::Write;

use anyhow::{Context, Result};
use ic_capacity::oracle::{
    ck_suite, conditioning_suite, degradation_suite, falsify_suite, nletter_suite, sign_suite,
    CheckRecord,
};
use ic_capacity::Exec;
use serde::Serialize;

use crate::{write_json, Common, Io, RunConfig, Suite, VerifyArgs, EXIT_OK, EXIT_VIOLATION};

pub const CK_JOINTS: usize = 100;
pub const DEGRADATION_SYSTEMS: usize = 1000;
pub const NLETTER_CODES: usize = 100;
pub const SIGN_DRAWS: usize = 10_000;

/// Runs the selected suites in a fixed order. `samples` sizes the
/// conditioning and falsification suites.
pub fn records(
    suite: Suite,
    n: usize,
    cfg: &RunConfig,
    adversarial: bool,
) -> Result<Vec<CheckRecord>> {
    let exec = Exec::default();
    let seed = cfg.seed;
    let want = |s: Suite| suite == Suite::All || suite == s;
    let mut out = Vec::new();
    if want(Suite::Ck) {
        out.extend(ck_suite(n, CK_JOINTS, seed, exec)?);
    }
    if want(Suite::Degradation) {
        out.extend(degradation_suite(DEGRADATION_SYSTEMS, seed)?);
    }
    if want(Suite::Conditioning) {
        out.extend(conditioning_suite(cfg.samples, seed, exec, adversarial)?);
    }
    if want(Suite::Nletter) {
        out.extend(nletter_suite(NLETTER_CODES, seed, exec, adversarial)?);
    }
    if want(Suite::Falsify) {
        out.extend(falsify_suite(cfg.samples, seed, exec, adversarial)?);
    }
    if want(Suite::Sign) {
        out.extend(sign_suite(SIGN_DRAWS, seed)?);
    }
    Ok(out)
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a RunConfig,
    adversarial: bool,
    records: &'a [CheckRecord],
}

pub fn run(common: &Common, cfg: &RunConfig, args: &VerifyArgs, io: &mut Io) -> Result<i32> {
    let recs = records(args.suite, args.n, cfg, args.adversarial)?;
    let out = &mut io.out;
    for r in &recs {
        let verdict = if r.pass { "pass" } else { "FAIL" };
        writeln!(
            out,
            "{:<13} {:<40} instances {:>6}  worst {:>11.3e}  limit {:.0e}  {verdict}",
            r.suite, r.id, r.instances, r.worst, r.threshold
        )?;
    }
    let failed = recs.iter().filter(|r| !r.pass).count();
    writeln!(
        out,
        "{} checks, {} passed, {failed} failed",
        recs.len(),
        recs.len() - failed
    )?;
    if failed > 0 {
        writeln!(out, "counterexample found")?;
    }
    if let Some(p) = &common.json {
        write_json(
            p,
            &Report {
                config: cfg,
                adversarial: args.adversarial,
                records: &recs,
            },
        )?;
    }
    if let Some(p) = &common.csv {
        let mut w =
            csv::Writer::from_path(p).with_context(|| format!("writing {}", p.display()))?;
        for r in &recs {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(if failed == 0 { EXIT_OK } else { EXIT_VIOLATION })
}
