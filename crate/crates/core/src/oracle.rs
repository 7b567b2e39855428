//! Independent cross-checks: n-letter code experiments, the Gaussian
//! degradation construction, conditioning arguments, an exhaustive grid
//! maximizer, and the batch suites built from them.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::discrete::{
    branch_values, build_degraded_chain, falsify_with, ConditionKind, ConditionSpec, DiscreteIC,
    Kernel, ProductInput,
};
use crate::error::{arg, Error, Result};
use crate::exec::{stream_rng, Exec};
use crate::expr::Expression;
use crate::gaussian::{proportional_ratio, GaussianIC};
use crate::info::{
    checked_size, csiszar_korner_residual_sets, sample_simplex, JointDist, Variable,
    DEFAULT_TENSOR_CAP,
};

/// Slack for sampled inequality checks.
pub const SLACK: f64 = 1e-9;

/// Per-user codebooks of a length-`n` code; messages are uniform over the
/// codewords, which may repeat.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomCode {
    pub n: usize,
    pub codebooks: Vec<Vec<Vec<usize>>>,
}

impl RandomCode {
    pub fn new(n: usize, codebooks: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        if n == 0 {
            return arg("blocklength must be positive");
        }
        for (i, cb) in codebooks.iter().enumerate() {
            if cb.is_empty() {
                return arg(format!("codebook {} is empty", i + 1));
            }
            if cb.iter().any(|w| w.len() != n) {
                return arg(format!("codebook {} has a word of the wrong length", i + 1));
            }
        }
        Ok(RandomCode { n, codebooks })
    }

    /// Codewords drawn i.i.d. uniformly over the alphabets.
    pub fn random<R: Rng + ?Sized>(
        cards: &[usize],
        n: usize,
        sizes: &[usize],
        rng: &mut R,
    ) -> Result<Self> {
        if sizes.len() != cards.len() {
            return arg("one codebook size per user is required");
        }
        let codebooks = cards
            .iter()
            .zip(sizes)
            .map(|(&c, &m)| {
                (0..m)
                    .map(|_| (0..n).map(|_| rng.random_range(0..c)).collect())
                    .collect()
            })
            .collect();
        RandomCode::new(n, codebooks)
    }
}

fn pow_checked(base: usize, n: usize) -> Result<usize> {
    checked_size(std::iter::repeat_n(base, n), DEFAULT_TENSOR_CAP)
}

/// `I(X^n_omega1; Y_a^n | X^n_omega2) - I(X^n_omega1; Y_b^n | X^n_omega2)`
/// for the law induced by `code` over the memoryless channel.
pub fn nletter_inequality_check(
    ch: &DiscreteIC,
    code: &RandomCode,
    sets: (&[usize], &[usize]),
    receivers: (usize, usize),
) -> Result<f64> {
    let k = ch.num_users();
    let (om1, om2) = sets;
    let (ra, rb) = receivers;
    if code.codebooks.len() != k {
        return arg(format!(
            "code has {} users, channel {k}",
            code.codebooks.len()
        ));
    }
    if ra >= k || rb >= k || ra == rb {
        return arg(format!("invalid receiver pair ({ra}, {rb})"));
    }
    if om1.is_empty()
        || om1.iter().chain(om2).any(|&i| i >= k)
        || om1.iter().any(|i| om2.contains(i))
    {
        return arg("input sets must be disjoint, in range, and the first nonempty");
    }
    let n = code.n;
    let cards = ch.input_cards();
    for (cb, &c) in code.codebooks.iter().zip(cards) {
        if cb.iter().flatten().any(|&s| s >= c) {
            return arg("codeword symbol outside the input alphabet");
        }
    }
    let word_cards: Vec<usize> = cards
        .iter()
        .map(|&c| pow_checked(c, n))
        .collect::<Result<_>>()?;
    let (ca, cb) = (ch.output_cards()[ra], ch.output_cards()[rb]);
    let (na, nb) = (pow_checked(ca, n)?, pow_checked(cb, n)?);
    let nw = checked_size(word_cards.iter().copied(), DEFAULT_TENSOR_CAP)?;
    checked_size([nw, na, nb], DEFAULT_TENSOR_CAP)?;

    // pair marginal P(y_a, y_b | x) per input tuple
    let tuples: Vec<Vec<usize>> = ch.input_tuples().collect();
    let ny: usize = ch.output_cards().iter().product();
    let out_cards = ch.output_cards();
    let pair: Vec<Vec<f64>> = (0..tuples.len())
        .map(|x| {
            let mut m = vec![0.0; ca * cb];
            let row = &ch.transition()[x * ny..(x + 1) * ny];
            for (y, &p) in row.iter().enumerate() {
                let (mut rem, mut ya, mut yb) = (y, 0, 0);
                for j in (0..k).rev() {
                    let d = rem % out_cards[j];
                    rem /= out_cards[j];
                    if j == ra {
                        ya = d;
                    }
                    if j == rb {
                        yb = d;
                    }
                }
                m[ya * cb + yb] += p;
            }
            m
        })
        .collect();
    let tuple_index = |x: &[usize]| x.iter().zip(cards).fold(0, |acc, (&s, &c)| acc * c + s);

    // per-user word laws
    let word_law: Vec<Vec<f64>> = code
        .codebooks
        .iter()
        .zip(&word_cards)
        .zip(cards)
        .map(|((book, &wc), &c)| {
            let mut p = vec![0.0; wc];
            for w in book {
                p[w.iter().fold(0, |acc, &s| acc * c + s)] += 1.0 / book.len() as f64;
            }
            p
        })
        .collect();

    let mut probs = vec![0.0; nw * na * nb];
    let mut words = vec![0usize; k];
    for wi in 0..nw {
        let mut rem = wi;
        for i in (0..k).rev() {
            words[i] = rem % word_cards[i];
            rem /= word_cards[i];
        }
        let pw: f64 = (0..k).map(|i| word_law[i][words[i]]).product();
        if pw == 0.0 {
            continue;
        }
        // per-letter input tuples
        let letters: Vec<usize> = (0..n)
            .map(|t| {
                let x: Vec<usize> = (0..k)
                    .map(|i| (words[i] / cards[i].pow((n - 1 - t) as u32)) % cards[i])
                    .collect();
                tuple_index(&x)
            })
            .collect();
        for ya in 0..na {
            for yb in 0..nb {
                let mut p = pw;
                for (t, &x) in letters.iter().enumerate() {
                    let sa = (ya / ca.pow((n - 1 - t) as u32)) % ca;
                    let sb = (yb / cb.pow((n - 1 - t) as u32)) % cb;
                    p *= pair[x][sa * cb + sb];
                }
                probs[(wi * na + ya) * nb + yb] = p;
            }
        }
    }
    let mut vars: Vec<Variable> = word_cards
        .iter()
        .enumerate()
        .map(|(i, &c)| Variable::new(format!("X{}n", i + 1), c))
        .collect();
    vars.push(Variable::new("Yan", na));
    vars.push(Variable::new("Ybn", nb));
    let joint = JointDist::new(vars, probs)?;
    Ok(joint.cmi_idx(om1, &[k], om2)? - joint.cmi_idx(om1, &[k + 1], om2)?)
}

/// Two outputs `Y1 = a.X + Z1`, `Y2 = b.X + Z2` over `mu1` decoded inputs
/// followed by the conditioned ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSystem {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub mu1: usize,
}

impl GaussianSystem {
    pub fn new(a: Vec<f64>, b: Vec<f64>, mu1: usize) -> Result<Self> {
        if a.len() != b.len() || mu1 == 0 || mu1 > a.len() {
            return arg(format!(
                "rows of length {} and {} with split {mu1}",
                a.len(),
                b.len()
            ));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return arg("coefficients must be finite");
        }
        Ok(GaussianSystem { a, b, mu1 })
    }

    /// Random system with `a = alpha b` on the decoded inputs.
    pub fn random_proportional<R: Rng + ?Sized>(
        mu1: usize,
        mu2: usize,
        rng: &mut R,
    ) -> (Self, f64) {
        let alpha: f64 = rng.random_range(-1.0..=1.0);
        let b: Vec<f64> = (0..mu1 + mu2).map(|_| rng.sample(StandardNormal)).collect();
        let a = b
            .iter()
            .enumerate()
            .map(|(j, &bj)| {
                if j < mu1 {
                    alpha * bj
                } else {
                    rng.sample(StandardNormal)
                }
            })
            .collect();
        (GaussianSystem { a, b, mu1 }, alpha)
    }

    pub fn ratio(&self) -> Option<f64> {
        let decoded: Vec<usize> = (0..self.mu1).collect();
        let conditioned: Vec<usize> = (self.mu1..self.a.len()).collect();
        proportional_ratio(&self.a, &self.b, &decoded, &conditioned)
    }
}

/// Builds `Y1' = alpha Y2 + sum_{j > mu1} (a_j - alpha b_j) X_j +
/// sqrt(1 - alpha^2) Z'` and returns the largest gap between its
/// conditional mean coefficients and variance and those of `Y1`.
pub fn degradation_equivalence_check(sys: &GaussianSystem, alpha: f64) -> Result<f64> {
    if !(alpha.abs() <= 1.0) {
        return Err(Error::Domain(format!(
            "|alpha| = {} exceeds 1",
            alpha.abs()
        )));
    }
    let mut worst: f64 = 0.0;
    for (j, (&a, &b)) in sys.a.iter().zip(&sys.b).enumerate() {
        let correction = if j < sys.mu1 { 0.0 } else { a - alpha * b };
        worst = worst.max((alpha * b + correction - a).abs());
    }
    let variance = alpha * alpha + (1.0 - alpha * alpha);
    Ok(worst.max((variance - 1.0).abs()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConditioningKind {
    /// `I(X_dec; Y_weak | X_cond, D) <= I(X_dec; Y_strong | X_cond, D)`.
    Inputs,
    /// `I(U; Y_weak | X_cond, D) <= I(U; Y_strong | X_cond, D)`.
    Auxiliary,
    /// Inputs form with the users in `omega` moved to the conditioning side.
    PartialInputs { omega: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditioningSpec {
    pub kind: ConditioningKind,
    pub decoded: Vec<usize>,
    pub conditioned: Vec<usize>,
    pub weak: usize,
    pub strong: usize,
    pub d_card: usize,
    pub u_card: usize,
}

impl ConditioningSpec {
    fn validate(&self, k: usize) -> Result<()> {
        let mut all: Vec<usize> = self
            .decoded
            .iter()
            .chain(&self.conditioned)
            .copied()
            .collect();
        all.sort_unstable();
        if all != (0..k).collect::<Vec<_>>() || self.decoded.is_empty() {
            return arg("decoded and conditioned users must partition all users");
        }
        if self.weak >= k || self.strong >= k || self.weak == self.strong {
            return arg("invalid receiver pair");
        }
        if self.d_card == 0 || self.u_card == 0 {
            return arg("auxiliary alphabets must be nonempty");
        }
        if let ConditioningKind::PartialInputs { omega } = &self.kind {
            if omega.iter().any(|i| !self.decoded.contains(i)) || omega.len() >= self.decoded.len()
            {
                return arg("omega must be a strict subset of the decoded users");
            }
        }
        Ok(())
    }

    pub fn reversed(&self) -> Self {
        let mut r = self.clone();
        std::mem::swap(&mut r.weak, &mut r.strong);
        r
    }
}

/// A sampled law over `(D, U, X1..XK)` violating a conditioned inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub margin: f64,
    pub sample_index: usize,
    pub law: Vec<f64>,
}

/// Samples arbitrary joints of `(D, U, X)` and checks the conditioned
/// inequality on each.
pub fn conditioning_preservation_check<R: Rng + ?Sized>(
    ch: &DiscreteIC,
    spec: &ConditioningSpec,
    samples: usize,
    rng: &mut R,
) -> Result<Option<Violation>> {
    conditioning_with(ch, spec, samples, rng.next_u64(), Exec::default())
}

pub fn conditioning_with(
    ch: &DiscreteIC,
    spec: &ConditioningSpec,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<Option<Violation>> {
    let k = ch.num_users();
    spec.validate(k)?;
    if samples == 0 {
        return arg("at least one sample is required");
    }
    let u_card = match spec.kind {
        ConditioningKind::Auxiliary => spec.u_card,
        _ => 1,
    };
    let nx: usize = ch.input_cards().iter().product();
    let size = checked_size([spec.d_card, u_card, nx], DEFAULT_TENSOR_CAP)?;
    let x = |s: &[usize]| s.iter().map(|i| 2 + i).collect::<Vec<usize>>();
    let (a, c): (Vec<usize>, Vec<usize>) = match &spec.kind {
        ConditioningKind::Inputs => (x(&spec.decoded), x(&spec.conditioned)),
        ConditioningKind::Auxiliary => (vec![1], x(&spec.conditioned)),
        ConditioningKind::PartialInputs { omega } => {
            let rest: Vec<usize> = spec
                .decoded
                .iter()
                .filter(|i| !omega.contains(i))
                .copied()
                .collect();
            let given: Vec<usize> = omega.iter().chain(&spec.conditioned).copied().collect();
            (x(&rest), x(&given))
        }
    };
    let c: Vec<usize> = std::iter::once(0).chain(c).collect();
    let yw = [2 + k + spec.weak];
    let ys = [2 + k + spec.strong];
    let found = exec.find_first(samples, |s| {
        let run = || -> Result<Option<Violation>> {
            let mut rng = stream_rng(seed, s as u64);
            let mut law = sample_simplex(size, &mut rng)?;
            if s % 2 == 1 {
                // peaked draws reach the simplex boundary
                law.iter_mut().for_each(|p| *p = p.powi(6));
                let t: f64 = law.iter().sum();
                law.iter_mut().for_each(|p| *p /= t);
            }
            let joint = ch.joint_with_inputs(
                vec![Variable::new("D", spec.d_card), Variable::new("U", u_card)],
                &law,
            )?;
            let m = joint.cmi_idx(&a, &yw, &c)? - joint.cmi_idx(&a, &ys, &c)?;
            Ok((m > SLACK).then_some(Violation {
                margin: m,
                sample_index: s,
                law,
            }))
        };
        run().transpose()
    });
    found.transpose()
}

/// Grid maximum of an expression together with a local resolution estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMaximum {
    pub value: f64,
    pub argmax: ProductInput,
    /// Largest drop from the maximum to a neighbouring grid point.
    pub gap: f64,
}

/// Largest number of grid points evaluated by the exhaustive search.
pub const GRID_CAP: u128 = 10_000_000;

fn simplex_grid(card: usize, m: usize) -> Vec<Vec<f64>> {
    let mf = m as f64;
    match card {
        2 => (0..=m)
            .map(|i| vec![i as f64 / mf, (m - i) as f64 / mf])
            .collect(),
        _ => {
            let mut out = Vec::new();
            for i in 0..=m {
                for j in 0..=m - i {
                    out.push(vec![i as f64 / mf, j as f64 / mf, (m - i - j) as f64 / mf]);
                }
            }
            out
        }
    }
}

/// Exhaustive search over per-user distributions on the grid of step `1/m`:
/// one time-sharing branch for sum-type expressions, two for min-type ones.
pub fn brute_force_sum_capacity(
    ch: &DiscreteIC,
    expr: &Expression,
    m: usize,
) -> Result<GridMaximum> {
    brute_force_with(ch, expr, m, Exec::default())
}

pub fn brute_force_with(
    ch: &DiscreteIC,
    expr: &Expression,
    m: usize,
    exec: Exec,
) -> Result<GridMaximum> {
    expr.validate(ch.num_users())?;
    if m == 0 {
        return arg("grid resolution must be positive");
    }
    let cards = ch.input_cards();
    if cards.iter().any(|&c| c != 2 && c != 3) {
        return arg("exhaustive search supports binary and ternary inputs only");
    }
    let grids: Vec<Vec<Vec<f64>>> = cards.iter().map(|&c| simplex_grid(c, m)).collect();
    let mut points: u128 = grids.iter().map(|g| g.len() as u128).product();
    if !expr.is_sum() {
        points = points * points * (m as u128 + 1);
    }
    if points > GRID_CAP {
        return Err(Error::Size {
            entries: points,
            cap: GRID_CAP as usize,
        });
    }
    let counts: Vec<usize> = grids.iter().map(|g| g.len()).collect();
    let n: usize = counts.iter().product();
    let decode = |mut p: usize| {
        let mut idx = vec![0; counts.len()];
        for (d, &c) in idx.iter_mut().zip(&counts).rev() {
            *d = p % c;
            p /= c;
        }
        idx
    };
    let branch_at = |p: usize| -> Vec<Vec<f64>> {
        decode(p)
            .iter()
            .zip(&grids)
            .map(|(&i, g)| g[i].clone())
            .collect()
    };
    let values: Vec<Vec<f64>> = exec
        .map(n, |p| {
            let input = ProductInput::new(vec![1.0], vec![branch_at(p)])?;
            branch_values(ch, &input, expr)
        })
        .into_iter()
        .collect::<Result<_>>()?;
    let min_of = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);

    if expr.is_sum() {
        let (best, value) = values.iter().enumerate().map(|(p, v)| (p, v[0])).fold(
            (0, f64::NEG_INFINITY),
            |acc, x| if x.1 > acc.1 { x } else { acc },
        );
        // neighbours: one step in one user's grid index
        let idx = decode(best);
        let mut gap: f64 = 0.0;
        for u in 0..idx.len() {
            for delta in [-1i64, 1] {
                let j = idx[u] as i64 + delta;
                if j < 0 || j as usize >= counts[u] {
                    continue;
                }
                let mut nb = idx.clone();
                nb[u] = j as usize;
                let p = nb.iter().zip(&counts).fold(0, |acc, (&d, &c)| acc * c + d);
                gap = gap.max(value - values[p][0]);
            }
        }
        return Ok(GridMaximum {
            value,
            argmax: ProductInput::new(vec![1.0], vec![branch_at(best)])?,
            gap,
        });
    }

    // two branches mixed with weight w / m
    let rows = exec.map(n, |p1| {
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for (p2, v2) in values.iter().enumerate() {
            for w in 0..=m {
                let wf = w as f64 / m as f64;
                let mixed: Vec<f64> = values[p1]
                    .iter()
                    .zip(v2)
                    .map(|(a, b)| wf * a + (1.0 - wf) * b)
                    .collect();
                let v = min_of(&mixed);
                if v > best.0 {
                    best = (v, p2, w);
                }
            }
        }
        best
    });
    let (p1, (value, p2, w)) =
        rows.into_iter()
            .enumerate()
            .fold((0, (f64::NEG_INFINITY, 0, 0)), |acc, (p, r)| {
                if r.0 > acc.1 .0 {
                    (p, r)
                } else {
                    acc
                }
            });
    let wf = w as f64 / m as f64;
    let mut gap: f64 = 0.0;
    for dw in [-1i64, 1] {
        let w2 = w as i64 + dw;
        if (0..=m as i64).contains(&w2) {
            let wf2 = w2 as f64 / m as f64;
            let mixed: Vec<f64> = values[p1]
                .iter()
                .zip(&values[p2])
                .map(|(a, b)| wf2 * a + (1.0 - wf2) * b)
                .collect();
            gap = gap.max(value - min_of(&mixed));
        }
    }
    Ok(GridMaximum {
        value,
        argmax: ProductInput::new(vec![wf, 1.0 - wf], vec![branch_at(p1), branch_at(p2)])?,
        gap,
    })
}

/// Summary of one batch of checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub id: String,
    pub instances: usize,
    /// Worst observed residual or margin.
    pub worst: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckRecord {
    fn at_most(suite: &str, id: String, values: &[f64], threshold: f64) -> Self {
        let worst = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        CheckRecord {
            suite: suite.into(),
            id,
            instances: values.len(),
            worst,
            threshold,
            pass: worst <= threshold,
        }
    }
}

/// Random joint over `(W, Ya1..Yan, Yb1..Ybn)` with alphabets of size 2 or 3
/// (`W` of size 1 to 3).
pub fn random_ck_joint<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<JointDist> {
    let mut vars = vec![Variable::new("W", rng.random_range(1..=3))];
    let (ya, yb) = crate::info::ck_names(n);
    for name in ya.into_iter().chain(yb) {
        vars.push(Variable::new(name, rng.random_range(2..=3)));
    }
    let size = checked_size(vars.iter().map(|v| v.card), DEFAULT_TENSOR_CAP)?;
    JointDist::new(vars, sample_simplex(size, rng)?)
}

/// Telescoping identity residuals on `count` random joints for each
/// blocklength `1..=n_max`.
pub fn ck_suite(n_max: usize, count: usize, seed: u64, exec: Exec) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        let res: Vec<f64> = exec
            .map(count, |s| {
                let mut rng = stream_rng(seed ^ (n as u64) << 32, s as u64);
                let d = random_ck_joint(n, &mut rng)?;
                let ya: Vec<usize> = (1..=n).collect();
                let yb: Vec<usize> = (n + 1..=2 * n).collect();
                Ok(csiszar_korner_residual_sets(&d, &ya, &yb, &[0])?.abs())
            })
            .into_iter()
            .collect::<Result<_>>()?;
        out.push(CheckRecord::at_most("ck", format!("n={n}"), &res, 1e-10));
    }
    Ok(out)
}

/// Random proportional systems: the ratio is recovered and the
/// degradation construction reproduces the weaker output.
pub fn degradation_suite(count: usize, seed: u64) -> Result<Vec<CheckRecord>> {
    let mut res = Vec::with_capacity(count);
    let mut recovered = Vec::with_capacity(count);
    for s in 0..count {
        let mut rng = stream_rng(seed, s as u64);
        let mu1 = rng.random_range(1..=3);
        let mu2 = rng.random_range(0..=2);
        let (sys, alpha) = GaussianSystem::random_proportional(mu1, mu2, &mut rng);
        let found = sys.ratio().ok_or(Error::Numerical {
            what: "proportional ratio of a constructed system",
            value: alpha,
        })?;
        recovered.push((found - alpha).abs());
        res.push(degradation_equivalence_check(&sys, found)?);
    }
    Ok(vec![
        CheckRecord::at_most("degradation", "ratio recovered".into(), &recovered, 1e-9),
        CheckRecord::at_most("degradation", "construction mismatch".into(), &res, 1e-12),
    ])
}

/// Random two-user binary channel where `Y2` is `Y1` through a BSC.
pub fn random_degraded_pair<R: Rng + ?Sized>(rng: &mut R) -> Result<DiscreteIC> {
    let mut front = Vec::with_capacity(8);
    for _ in 0..4 {
        front.extend(sample_simplex(2, rng)?);
    }
    let eps = rng.random_range(0.05..0.45);
    build_degraded_chain(&Kernel::new(4, 2, front)?, &[Kernel::bsc(eps)?], &[2, 2])
}

fn conditioning_specs() -> Vec<(String, ConditioningSpec)> {
    let base =
        |kind: ConditioningKind, decoded: Vec<usize>, conditioned: Vec<usize>| ConditioningSpec {
            kind,
            decoded,
            conditioned,
            weak: 1,
            strong: 0,
            d_card: 2,
            u_card: 2,
        };
    vec![
        (
            "inputs dec={1,2}".into(),
            base(ConditioningKind::Inputs, vec![0, 1], vec![]),
        ),
        (
            "inputs dec={1} cond={2}".into(),
            base(ConditioningKind::Inputs, vec![0], vec![1]),
        ),
        (
            "auxiliary cond={2}".into(),
            base(ConditioningKind::Auxiliary, vec![0], vec![1]),
        ),
        (
            "auxiliary cond={}".into(),
            base(ConditioningKind::Auxiliary, vec![0, 1], vec![]),
        ),
        (
            "partial omega={1}".into(),
            base(
                ConditioningKind::PartialInputs { omega: vec![0] },
                vec![0, 1],
                vec![],
            ),
        ),
    ]
}

/// Conditioned inequalities on degraded pairs; `adversarial` swaps the
/// receivers, which should produce violations.
pub fn conditioning_suite(
    samples: usize,
    seed: u64,
    exec: Exec,
    adversarial: bool,
) -> Result<Vec<CheckRecord>> {
    let ch = random_degraded_pair(&mut stream_rng(seed, u64::MAX))?;
    let mut out = Vec::new();
    for (i, (id, spec)) in conditioning_specs().into_iter().enumerate() {
        let (spec, id) = if adversarial {
            (spec.reversed(), format!("{id} reversed"))
        } else {
            (spec, id)
        };
        let v = conditioning_with(&ch, &spec, samples, seed.wrapping_add(i as u64), exec)?;
        let worst = v.as_ref().map_or(0.0, |v| v.margin);
        out.push(CheckRecord {
            suite: "conditioning".into(),
            id,
            instances: v.as_ref().map_or(samples, |v| v.sample_index + 1),
            worst,
            threshold: SLACK,
            pass: v.is_none(),
        });
    }
    Ok(out)
}

/// Length-2 random codes on degraded pairs.
pub fn nletter_suite(
    codes: usize,
    seed: u64,
    exec: Exec,
    adversarial: bool,
) -> Result<Vec<CheckRecord>> {
    let set_choices: [(&[usize], &[usize], &str); 3] = [
        (&[1], &[], "omega1={2}"),
        (&[0, 1], &[], "omega1={1,2}"),
        (&[0], &[1], "omega1={1} omega2={2}"),
    ];
    let mut out = Vec::new();
    for (ci, (om1, om2, name)) in set_choices.iter().enumerate() {
        let res: Vec<f64> = exec
            .map(codes, |s| {
                let mut rng = stream_rng(seed.wrapping_add(ci as u64), s as u64);
                let ch = random_degraded_pair(&mut rng)?;
                let sizes = [rng.random_range(1..=4), rng.random_range(1..=4)];
                let code = RandomCode::random(&[2, 2], 2, &sizes, &mut rng)?;
                let rx = if adversarial { (0, 1) } else { (1, 0) };
                nletter_inequality_check(&ch, &code, (om1, om2), rx)
            })
            .into_iter()
            .collect::<Result<_>>()?;
        let id = if adversarial {
            format!("n=2 {name} reversed")
        } else {
            format!("n=2 {name}")
        };
        out.push(CheckRecord::at_most("nletter", id, &res, SLACK));
    }
    Ok(out)
}

/// Less-noisy conditions on physically degraded chains.
pub fn falsify_suite(
    samples: usize,
    seed: u64,
    exec: Exec,
    adversarial: bool,
) -> Result<Vec<CheckRecord>> {
    let mut rng = stream_rng(seed, u64::MAX - 1);
    let pair = random_degraded_pair(&mut rng)?;
    let chain3 = {
        let front = Kernel::new(8, 2, {
            let mut v = Vec::new();
            for _ in 0..8 {
                v.extend(sample_simplex(2, &mut rng)?);
            }
            v
        })?;
        build_degraded_chain(&front, &[Kernel::bsc(0.1)?, Kernel::bsc(0.2)?], &[2, 2, 2])?
    };
    let mut cases = vec![
        (
            "two-user chain",
            pair.clone(),
            ConditionSpec::new(ConditionKind::ChainLessNoisy),
        ),
        (
            "two-user per-user",
            pair.clone(),
            ConditionSpec::new(ConditionKind::LessNoisyPerUser),
        ),
        (
            "three-user chain",
            chain3.clone(),
            ConditionSpec::new(ConditionKind::ChainLessNoisy),
        ),
        (
            "three-user per-user",
            chain3,
            ConditionSpec::new(ConditionKind::LessNoisyPerUser),
        ),
    ];
    if adversarial {
        cases.push((
            "two-user reversed",
            pair,
            ConditionSpec::new(ConditionKind::SetLessNoisy {
                omega1: vec![],
                omega2: vec![],
                weak: 0,
                strong: 1,
            }),
        ));
    }
    let mut out = Vec::new();
    for (i, (id, ch, spec)) in cases.into_iter().enumerate() {
        let cex = falsify_with(&ch, &spec, samples, seed.wrapping_add(i as u64), exec)?;
        out.push(CheckRecord {
            suite: "falsify".into(),
            id: id.into(),
            instances: cex.as_ref().map_or(samples, |c| c.sample_index + 1),
            worst: cex.as_ref().map_or(0.0, |c| c.margin),
            threshold: SLACK,
            pass: cex.is_none(),
        });
    }
    Ok(out)
}

/// The closed-form power condition `P1 + 1 >= a12^2 (a21^2 P1 + 1)` against
/// direct evaluation of `I(X2; Y2 | X3) >= I(X2; Y1 | X3)`. Draws within
/// `1e-9` of the boundary are skipped.
pub fn sign_suite(draws: usize, seed: u64) -> Result<Vec<CheckRecord>> {
    let mut disagreements = 0usize;
    let mut checked = 0usize;
    for s in 0..draws {
        let mut rng = stream_rng(seed, s as u64);
        let a12: f64 = rng.random_range(0.0..2.0);
        let a21: f64 = rng.random_range(0.0..2.0);
        let p1: f64 = rng.random_range(0.0..10.0);
        let p2: f64 = rng.random_range(0.01..10.0);
        let predicate = p1 + 1.0 - a12 * a12 * (a21 * a21 * p1 + 1.0);
        if predicate.abs() < 1e-9 {
            continue;
        }
        let mut gains = vec![vec![1.0; 3]; 3];
        gains[0][1] = a12;
        gains[1][0] = a21;
        for row in gains.iter_mut() {
            row[2] = rng.random_range(0.0..2.0);
        }
        let ch = GaussianIC::new(gains, vec![p1, p2, 1.0])?;
        let direct = ch.cmi(&[1], &[2], 1)? - ch.cmi(&[1], &[2], 0)?;
        checked += 1;
        if (direct >= 0.0) != (predicate >= 0.0) {
            disagreements += 1;
        }
    }
    Ok(vec![CheckRecord {
        suite: "sign".into(),
        id: format!("power condition vs direct ({checked} draws)"),
        instances: checked,
        worst: disagreements as f64,
        threshold: 0.0,
        pass: disagreements == 0,
    }])
}
