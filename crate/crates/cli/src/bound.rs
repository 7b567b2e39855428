use std::io::Write;

use anyhow::{bail, Context, Result};
use ic_capacity::discrete::structure_bound;
use ic_capacity::expr::{BoundResult, BoundStructure};
use ic_capacity::gaussian::outer_bound;
use serde::Serialize;

use crate::{require_spec, write_json, BoundArgs, Channel, Common, Io, RunConfig, EXIT_OK};

/// Comma-separated positive integers.
fn parse_list(s: &str, what: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|t| {
            let v: usize = t
                .trim()
                .parse()
                .with_context(|| format!("{what}: `{t}` is not a positive integer"))?;
            if v == 0 {
                bail!("{what}: indices are 1-based");
            }
            Ok(v)
        })
        .collect()
}

/// `1,2|3` into zero-based groups.
pub fn parse_groups(s: &str) -> Result<Vec<Vec<usize>>> {
    s.split('|')
        .map(|g| {
            Ok(parse_list(g, "--groups")?
                .into_iter()
                .map(|v| v - 1)
                .collect())
        })
        .collect()
}

pub fn structure(args: &BoundArgs, k: usize) -> Result<BoundStructure> {
    let s = match args.theorem {
        1 => BoundStructure::NestedChain,
        3 => {
            let perm = parse_list(
                args.perm.as_deref().context("--theorem 3 needs --perm")?,
                "--perm",
            )?;
            let cuts = parse_list(
                args.cuts.as_deref().context("--theorem 3 needs --cuts")?,
                "--cuts",
            )?;
            BoundStructure::PermutationCuts {
                perm: perm.into_iter().map(|v| v - 1).collect(),
                cuts,
            }
        }
        4 => BoundStructure::OutputGroups {
            groups: parse_groups(
                args.groups
                    .as_deref()
                    .context("--theorem 4 needs --groups")?,
            )?,
        },
        t => bail!("--theorem must be 1, 3 or 4, got {t}"),
    };
    s.validate(k)?;
    Ok(s)
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a RunConfig,
    structure: &'a BoundStructure,
    result: &'a BoundResult,
}

pub fn run(common: &Common, cfg: &RunConfig, args: &BoundArgs, io: &mut Io) -> Result<i32> {
    let ch = require_spec(common, io)?;
    let out = &mut io.out;
    let (s, result) = match &ch {
        Channel::Gaussian(g) => {
            let s = structure(args, g.k())?;
            let r = outer_bound(g, &s)?;
            (s, r)
        }
        Channel::Discrete(d) => {
            let s = structure(args, d.num_users())?;
            let r = structure_bound(d, &s, &cfg.search())?;
            (s, r)
        }
    };
    writeln!(out, "bound {}", result.expression_id)?;
    writeln!(out, "value = {:.6} bits", result.value)?;
    let status = match (&ch, result.certified) {
        (Channel::Gaussian(_), true) => {
            "certified: every hypothesis holds by proportional degradation".to_string()
        }
        (Channel::Gaussian(_), false) => "heuristic: some hypothesis is not certified".to_string(),
        (Channel::Discrete(_), true) => {
            format!("certified: no counterexample in {} samples", cfg.samples)
        }
        (Channel::Discrete(_), false) => "heuristic: a hypothesis has a counterexample".to_string(),
    };
    writeln!(out, "{status}")?;
    if let Some(a) = &result.argmax {
        writeln!(out, "argmax:")?;
        for (q, (w, b)) in a.q_weights().iter().zip(a.branches()).enumerate() {
            let users: Vec<String> = b
                .iter()
                .map(|p| {
                    let v: Vec<String> = p.iter().map(|x| format!("{x:.4}")).collect();
                    format!("[{}]", v.join(" "))
                })
                .collect();
            writeln!(out, "  q={} weight {w:.4}: {}", q + 1, users.join(" "))?;
        }
    }
    if let Some(st) = &result.search_stats {
        writeln!(
            out,
            "search: {} restarts, {} sweeps, {} improvements",
            st.restarts, st.iterations, st.trace_len
        )?;
    }
    if let Some(p) = &common.json {
        write_json(
            p,
            &Report {
                config: cfg,
                structure: &s,
                result: &result,
            },
        )?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(
        theorem: u8,
        perm: Option<&str>,
        cuts: Option<&str>,
        groups: Option<&str>,
    ) -> BoundArgs {
        BoundArgs {
            theorem,
            perm: perm.map(String::from),
            cuts: cuts.map(String::from),
            groups: groups.map(String::from),
        }
    }

    #[test]
    fn structures_from_flags() {
        assert_eq!(
            structure(&args(3, Some("2,1,3"), Some("2,3"), None), 3).unwrap(),
            BoundStructure::PermutationCuts {
                perm: vec![1, 0, 2],
                cuts: vec![2, 3]
            }
        );
        assert_eq!(
            structure(&args(4, None, None, Some("1,2|3")), 3).unwrap(),
            BoundStructure::OutputGroups {
                groups: vec![vec![0, 1], vec![2]]
            }
        );
        assert_eq!(
            structure(&args(1, None, None, None), 2).unwrap(),
            BoundStructure::NestedChain
        );
    }

    #[test]
    fn bad_flags_are_rejected() {
        assert!(structure(&args(2, None, None, None), 3).is_err());
        assert!(structure(&args(3, Some("2,1,3"), None, None), 3).is_err());
        assert!(structure(&args(3, Some("2,1,1"), Some("3"), None), 3).is_err());
        assert!(structure(&args(3, Some("2,1,3"), Some("2,1,3"), None), 3).is_err());
        assert!(structure(&args(3, Some("0,1,2"), Some("3"), None), 3).is_err());
        assert!(structure(&args(4, None, None, Some("1|2")), 3).is_err());
        assert!(structure(&args(4, None, None, Some("1,x|2,3")), 3).is_err());
    }
}
