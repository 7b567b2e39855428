use anyhow::{bail, Context, Result};
use ic_capacity::gaussian::{classify, GaussianIC};
use ic_capacity::Exec;

use crate::classify::heuristics;
use crate::{require_spec, write_json, Channel, Common, Io, SweepArgs, EXIT_OK};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// Receiver, transmitter (zero-based).
    Gain(usize, usize),
    Power(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub target: Target,
    pub values: Vec<f64>,
}

fn digit(c: char) -> Option<usize> {
    c.to_digit(10).filter(|&d| d >= 1).map(|d| d as usize - 1)
}

/// Parses `a21=0:2:41` or `p1=0.5:4:8`.
pub fn parse_param(s: &str) -> Result<Param> {
    let (name, range) = s
        .split_once('=')
        .with_context(|| format!("`{s}`: expected name=min:max:steps"))?;
    let chars: Vec<char> = name.chars().collect();
    let target = match chars.as_slice() {
        ['a', j, i] => digit(*j).zip(digit(*i)).map(|(j, i)| Target::Gain(j, i)),
        ['p', i] => digit(*i).map(Target::Power),
        _ => None,
    }
    .with_context(|| format!("unknown parameter `{name}`; use aJI or pI with 1-based indices"))?;
    let parts: Vec<&str> = range.split(':').collect();
    let [lo, hi, steps] = parts.as_slice() else {
        bail!("`{s}`: expected name=min:max:steps");
    };
    let lo: f64 = lo
        .trim()
        .parse()
        .with_context(|| format!("`{s}`: bad minimum"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .with_context(|| format!("`{s}`: bad maximum"))?;
    let steps: usize = steps
        .trim()
        .parse()
        .with_context(|| format!("`{s}`: bad step count"))?;
    if steps == 0 {
        bail!("`{s}`: step count must be at least 1");
    }
    if !lo.is_finite() || !hi.is_finite() {
        bail!("`{s}`: range must be finite");
    }
    let values = if steps == 1 {
        vec![lo]
    } else {
        (0..steps)
            .map(|t| lo + (hi - lo) * t as f64 / (steps - 1) as f64)
            .collect()
    };
    Ok(Param {
        name: name.to_string(),
        target,
        values,
    })
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), fmt)
}

/// Header and rows of the sweep table; rows follow the parameter grid with
/// the first parameter varying slowest.
pub fn table(base: &GaussianIC, params: &[Param]) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let k = base.k();
    for p in params {
        let out_of_range = match p.target {
            Target::Gain(j, i) => j >= k || i >= k,
            Target::Power(i) => i >= k,
        };
        if out_of_range {
            bail!("parameter `{}` is out of range for {k} users", p.name);
        }
    }
    let probe = classify(base)?;
    let mut header: Vec<String> = params.iter().map(|p| p.name.clone()).collect();
    header.push("regime".into());
    header.extend(probe.conditions.iter().map(|c| format!("margin[{}]", c.id)));
    header.extend(
        [
            "certified_capacity",
            "successive_decoding",
            "interference_as_noise",
            "best_certified_outer",
            "min_outer",
        ]
        .map(String::from),
    );

    let total: usize = params.iter().map(|p| p.values.len()).product();
    let rows = Exec::default().map(total, |mut idx| -> Result<Vec<String>> {
        let mut pick = vec![0.0; params.len()];
        for (slot, p) in pick.iter_mut().zip(params).rev() {
            *slot = p.values[idx % p.values.len()];
            idx /= p.values.len();
        }
        let mut gains = base.gains().to_vec();
        let mut powers = base.powers().to_vec();
        for (p, &v) in params.iter().zip(&pick) {
            match p.target {
                Target::Gain(j, i) => gains[j][i] = v,
                Target::Power(i) => powers[i] = v,
            }
        }
        let ch = GaussianIC::new(gains, powers)?;
        let r = classify(&ch)?;
        let h = heuristics(&ch)?;
        let mut row: Vec<String> = pick.iter().map(|&v| fmt(v)).collect();
        row.push(format!("{:?}", r.regime));
        row.extend(r.conditions.iter().map(|c| fmt(c.margin)));
        row.push(fmt_opt(r.certified_capacity));
        row.push(fmt(h.successive_decoding));
        row.push(fmt(h.interference_as_noise));
        row.push(fmt_opt(h.best_certified_outer));
        row.push(fmt(h.min_outer));
        Ok(row)
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok((header, rows))
}

pub fn run(common: &Common, args: &SweepArgs, io: &mut Io) -> Result<i32> {
    let params = args
        .params
        .iter()
        .map(|s| parse_param(s))
        .collect::<Result<Vec<_>>>()?;
    let Channel::Gaussian(base) = require_spec(common, io)? else {
        bail!("sweep needs a gaussian spec");
    };
    let (header, rows) = table(&base, &params)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for r in &rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().context("finishing the CSV table")?;
    match &common.csv {
        Some(p) => std::fs::write(p, &bytes).with_context(|| format!("writing {}", p.display()))?,
        None => io.out.extend_from_slice(&bytes),
    }
    if let Some(p) = &common.json {
        let objs: Vec<serde_json::Map<String, serde_json::Value>> = rows
            .iter()
            .map(|r| {
                header
                    .iter()
                    .cloned()
                    .zip(r.iter().map(|v| serde_json::Value::String(v.clone())))
                    .collect()
            })
            .collect();
        write_json(p, &objs)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parameter_parsing() {
        let p = parse_param("a21=0:2:41").unwrap();
        assert_eq!(p.target, Target::Gain(1, 0));
        assert_eq!(p.values.len(), 41);
        assert_eq!(p.values[20], 1.0);
        assert_eq!(p.values[40], 2.0);
        assert_eq!(parse_param("p3=1:1:1").unwrap().values, vec![1.0]);
        for bad in [
            "a21=0:2:0",
            "b21=0:1:2",
            "a2=0:1:2",
            "a01=0:1:2",
            "a21=0:2",
            "a21",
            "p1=x:1:2",
        ] {
            assert!(parse_param(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn out_of_range_parameter() {
        let ch = GaussianIC::new(vec![vec![1.0, 0.5], vec![0.5, 1.0]], vec![1.0, 1.0]).unwrap();
        assert!(table(&ch, &[parse_param("a31=0:1:2").unwrap()]).is_err());
    }
}
