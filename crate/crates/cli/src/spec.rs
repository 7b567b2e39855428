//! JSON channel specs.
//!
//! ```json
//! {"kind": "gaussian", "gains": [[1, 1], [0.5, 1]], "powers": [1, 1]}
//! {"kind": "discrete", "input_cards": [2, 2], "output_cards": [2, 2], "transition": [...]}
//! ```
//!
//! `gains[j][i]` is the gain from transmitter `i` to receiver `j`. The
//! discrete `transition` is `P(y | x)` flattened row-major with the input
//! tuple outermost and the output tuple innermost; within a tuple the first
//! user is the most significant digit.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ic_capacity::discrete::DiscreteIC;
use ic_capacity::gaussian::GaussianIC;
use serde::{Deserialize, Serialize};

/// Row deviations up to this are renormalized with a warning.
pub const RENORMALIZE_TOL: f64 = 1e-9;
/// Row deviations up to this are accepted silently.
pub const SILENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Gaussian,
    Discrete,
}

/// On-disk form. Fields not used by the kind must be absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gains: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub powers: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_cards: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_cards: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    Gaussian(GaussianIC),
    Discrete(DiscreteIC),
}

impl From<&Channel> for ChannelSpec {
    fn from(ch: &Channel) -> Self {
        match ch {
            Channel::Gaussian(g) => ChannelSpec {
                kind: Kind::Gaussian,
                gains: Some(g.gains().to_vec()),
                powers: Some(g.powers().to_vec()),
                input_cards: None,
                output_cards: None,
                transition: None,
            },
            Channel::Discrete(d) => ChannelSpec {
                kind: Kind::Discrete,
                gains: None,
                powers: None,
                input_cards: Some(d.input_cards().to_vec()),
                output_cards: Some(d.output_cards().to_vec()),
                transition: Some(d.transition().to_vec()),
            },
        }
    }
}

fn required<T>(v: Option<T>, field: &str, kind: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("field `{field}` is required for kind \"{kind}\""))
}

fn forbidden<T>(v: &Option<T>, field: &str, kind: &str) -> Result<()> {
    if v.is_some() {
        bail!("field `{field}` does not apply to kind \"{kind}\"");
    }
    Ok(())
}

impl ChannelSpec {
    /// Parses JSON text; errors name the offending field and position.
    pub fn parse(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            if path == "." {
                anyhow!("{inner}")
            } else {
                anyhow!("field `{path}`: {inner}")
            }
        })
    }

    /// Validates and builds the channel. Returns warnings for discrete rows
    /// that had to be renormalized.
    pub fn build(self) -> Result<(Channel, Vec<String>)> {
        match self.kind {
            Kind::Gaussian => {
                let kind = "gaussian";
                forbidden(&self.input_cards, "input_cards", kind)?;
                forbidden(&self.output_cards, "output_cards", kind)?;
                forbidden(&self.transition, "transition", kind)?;
                let gains = required(self.gains, "gains", kind)?;
                let powers = required(self.powers, "powers", kind)?;
                let ch = GaussianIC::new(gains, powers).context("fields `gains`/`powers`")?;
                Ok((Channel::Gaussian(ch), Vec::new()))
            }
            Kind::Discrete => {
                let kind = "discrete";
                forbidden(&self.gains, "gains", kind)?;
                forbidden(&self.powers, "powers", kind)?;
                let input_cards = required(self.input_cards, "input_cards", kind)?;
                let output_cards = required(self.output_cards, "output_cards", kind)?;
                let mut transition = required(self.transition, "transition", kind)?;
                let ny: usize = output_cards.iter().product();
                let mut warnings = Vec::new();
                if ny > 0 && transition.len() % ny == 0 {
                    for (r, row) in transition.chunks_mut(ny).enumerate() {
                        let s: f64 = row.iter().sum();
                        let dev = (s - 1.0).abs();
                        if dev > RENORMALIZE_TOL {
                            bail!("field `transition`: row {r} sums to {s}, off by more than {RENORMALIZE_TOL:e}");
                        }
                        if dev > SILENT_TOL {
                            row.iter_mut().for_each(|p| *p /= s);
                            warnings
                                .push(format!("transition row {r} summed to {s}; renormalized"));
                        }
                    }
                }
                let ch = DiscreteIC::new(input_cards, output_cards, transition)
                    .context("fields `input_cards`/`output_cards`/`transition`")?;
                Ok((Channel::Discrete(ch), warnings))
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("specs always serialize")
    }
}

/// Reads, parses and validates a spec file.
pub fn load(path: &Path) -> Result<(Channel, Vec<String>)> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ChannelSpec::parse(&text)
        .and_then(ChannelSpec::build)
        .with_context(|| format!("invalid spec {}", path.display()))
}
