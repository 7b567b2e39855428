use std::io::Write;

use anyhow::{bail, Result};
use ic_capacity::expr::DecodeOrder;
use ic_capacity::expr::Expression;
use ic_capacity::gaussian::{
    all_permutation_cut_structures, best_certified_bound, classify, outer_bound,
    successive_decoding_sum_rate, GaussianIC, Regime, RegimeReport,
};
use serde::Serialize;

use crate::{require_spec, write_json, Channel, Common, Io, RunConfig, EXIT_NO_REGIME, EXIT_OK};

/// Rates reported whether or not a regime is certified. Only
/// `best_certified_outer` is a proven bound; `min_outer` also ranges over
/// bounds whose hypotheses fail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Heuristics {
    pub successive_decoding: f64,
    pub interference_as_noise: f64,
    pub best_certified_outer: Option<f64>,
    pub min_outer: f64,
}

pub fn heuristics(ch: &GaussianIC) -> Result<Heuristics> {
    let mut min_outer = f64::INFINITY;
    for s in all_permutation_cut_structures(ch.k()) {
        min_outer = min_outer.min(outer_bound(ch, &s)?.value);
    }
    Ok(Heuristics {
        successive_decoding: successive_decoding_sum_rate(ch, &DecodeOrder::canonical(ch.k()))?,
        interference_as_noise: ch.evaluate(&Expression::interference_as_noise(ch.k()))?,
        best_certified_outer: best_certified_bound(ch)?,
        min_outer,
    })
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a RunConfig,
    report: &'a RegimeReport,
    heuristics: &'a Heuristics,
}

pub fn summary_line(r: &RegimeReport) -> String {
    match r.certified_capacity {
        Some(c) => format!("{:?}: certified, C_sum = {c:.6} bits", r.regime),
        None if r.regime == Regime::None => "None: no certified regime".into(),
        None => format!("{:?}: no certified capacity", r.regime),
    }
}

pub fn run(common: &Common, cfg: &RunConfig, io: &mut Io) -> Result<i32> {
    let Channel::Gaussian(ch) = require_spec(common, io)? else {
        bail!("classify needs a gaussian spec");
    };
    let report = classify(&ch)?;
    let h = heuristics(&ch)?;
    let out = &mut io.out;
    writeln!(out, "conditions:")?;
    for c in &report.conditions {
        let mark = if c.holds { "pass" } else { "FAIL" };
        writeln!(out, "  {mark}  {:<42} margin {:>12.6}", c.id, c.margin)?;
    }
    writeln!(out, "{}", summary_line(&report))?;
    writeln!(out, "heuristic values (bits):")?;
    writeln!(
        out,
        "  successive decoding        {:.6}",
        h.successive_decoding
    )?;
    writeln!(
        out,
        "  interference as noise      {:.6}",
        h.interference_as_noise
    )?;
    match h.best_certified_outer {
        Some(v) => writeln!(out, "  best certified outer bound {v:.6}")?,
        None => writeln!(out, "  best certified outer bound none")?,
    }
    writeln!(out, "  min outer (uncertified)    {:.6}", h.min_outer)?;
    if let Some(p) = &common.json {
        write_json(
            p,
            &Report {
                config: cfg,
                report: &report,
                heuristics: &h,
            },
        )?;
    }
    Ok(if report.certified_capacity.is_some() {
        EXIT_OK
    } else {
        EXIT_NO_REGIME
    })
}
