//! Discrete memoryless interference channels.
//!
//! A channel is a dense transition tensor `P(y_1..y_K | x_1..x_K)` laid out
//! row-major with the inputs outermost: entry `(x, y)` lives at
//! `x_index * prod(output_cards) + y_index`, and within each tuple the first
//! user's symbol is the most significant digit.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::exec::{stream_rng, Exec};
use crate::expr::{BoundResult, BoundStructure, Expression, Inequality, MiTerm, SearchStats};
use crate::info::{
    assemble_joint, checked_size, compensated_sum, sample_simplex, JointDist, Variable,
    DEFAULT_TENSOR_CAP, MASS_TOL,
};

/// Slack separating genuine inequality violations from rounding noise.
pub const VIOLATION_SLACK: f64 = 1e-9;

fn check_stochastic(v: &[f64], what: &str) -> Result<()> {
    if let Some(p) = v.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
        return arg(format!("{what} has a negative or non-finite entry {p}"));
    }
    let s = compensated_sum(v.iter().copied());
    if (s - 1.0).abs() > MASS_TOL {
        return arg(format!("{what} sums to {s}, not 1"));
    }
    Ok(())
}

/// Mixed-radix digits of `idx`, most significant first.
fn digits(mut idx: usize, cards: &[usize]) -> Vec<usize> {
    let mut out = vec![0; cards.len()];
    for (d, &c) in out.iter_mut().zip(cards).rev() {
        *d = idx % c;
        idx /= c;
    }
    out
}

fn index_of(digits: impl IntoIterator<Item = usize>, cards: &[usize]) -> usize {
    digits
        .into_iter()
        .zip(cards)
        .fold(0, |acc, (d, &c)| acc * c + d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteIC {
    input_cards: Vec<usize>,
    output_cards: Vec<usize>,
    transition: Vec<f64>,
}

impl DiscreteIC {
    pub fn new(
        input_cards: Vec<usize>,
        output_cards: Vec<usize>,
        transition: Vec<f64>,
    ) -> Result<Self> {
        let k = input_cards.len();
        if k == 0 || output_cards.len() != k {
            return arg(format!(
                "need matching nonempty input and output lists, got {} and {}",
                k,
                output_cards.len()
            ));
        }
        if input_cards.iter().chain(&output_cards).any(|&c| c == 0) {
            return arg("alphabet sizes must be positive");
        }
        let nx = checked_size(input_cards.iter().copied(), DEFAULT_TENSOR_CAP)?;
        let ny = checked_size(output_cards.iter().copied(), DEFAULT_TENSOR_CAP)?;
        checked_size([nx, ny], DEFAULT_TENSOR_CAP)?;
        if transition.len() != nx * ny {
            return arg(format!(
                "transition has {} entries, expected {}",
                transition.len(),
                nx * ny
            ));
        }
        for x in 0..nx {
            check_stochastic(
                &transition[x * ny..(x + 1) * ny],
                &format!("transition row for inputs {:?}", digits(x, &input_cards)),
            )?;
        }
        Ok(DiscreteIC {
            input_cards,
            output_cards,
            transition,
        })
    }

    /// Builds the tensor from `f(x, y) = P(y | x)`.
    pub fn from_fn<F>(input_cards: Vec<usize>, output_cards: Vec<usize>, f: F) -> Result<Self>
    where
        F: Fn(&[usize], &[usize]) -> f64,
    {
        let nx = checked_size(input_cards.iter().copied(), DEFAULT_TENSOR_CAP)?;
        let ny = checked_size(output_cards.iter().copied(), DEFAULT_TENSOR_CAP)?;
        checked_size([nx, ny], DEFAULT_TENSOR_CAP)?;
        let mut t = Vec::with_capacity(nx * ny);
        for x in 0..nx {
            let xd = digits(x, &input_cards);
            for y in 0..ny {
                t.push(f(&xd, &digits(y, &output_cards)));
            }
        }
        DiscreteIC::new(input_cards, output_cards, t)
    }

    /// Deterministic channel `y = g(x)`.
    pub fn deterministic<F>(input_cards: Vec<usize>, output_cards: Vec<usize>, g: F) -> Result<Self>
    where
        F: Fn(&[usize]) -> Vec<usize>,
    {
        DiscreteIC::from_fn(
            input_cards,
            output_cards,
            |x, y| {
                if g(x) == y {
                    1.0
                } else {
                    0.0
                }
            },
        )
    }

    pub fn num_users(&self) -> usize {
        self.input_cards.len()
    }

    pub fn input_cards(&self) -> &[usize] {
        &self.input_cards
    }

    pub fn output_cards(&self) -> &[usize] {
        &self.output_cards
    }

    pub fn transition(&self) -> &[f64] {
        &self.transition
    }

    fn ny(&self) -> usize {
        self.output_cards.iter().product()
    }

    /// `P(y | x)` for full tuples.
    pub fn prob(&self, x: &[usize], y: &[usize]) -> f64 {
        self.transition[index_of(x.iter().copied(), &self.input_cards) * self.ny()
            + index_of(y.iter().copied(), &self.output_cards)]
    }

    /// All input tuples in tensor order.
    pub fn input_tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let nx: usize = self.input_cards.iter().product();
        (0..nx).map(move |x| digits(x, &self.input_cards))
    }

    /// Joint law over `(prefix.., X1..XK, Y1..YK)` from a law over
    /// `(prefix.., X1..XK)` laid out row-major.
    pub fn joint_with_inputs(&self, prefix: Vec<Variable>, law: &[f64]) -> Result<JointDist> {
        let ny = self.ny();
        let nx: usize = self.input_cards.iter().product();
        let np = checked_size(prefix.iter().map(|v| v.card), DEFAULT_TENSOR_CAP)?;
        if law.len() != np * nx {
            return arg(format!(
                "input law has {} entries, expected {}",
                law.len(),
                np * nx
            ));
        }
        checked_size([law.len(), ny], DEFAULT_TENSOR_CAP)?;
        let mut probs = Vec::with_capacity(law.len() * ny);
        for (i, &w) in law.iter().enumerate() {
            let row = &self.transition[(i % nx) * ny..(i % nx + 1) * ny];
            probs.extend(row.iter().map(|t| w * t));
        }
        let mut vars = prefix;
        vars.extend(
            self.input_cards
                .iter()
                .enumerate()
                .map(|(i, &c)| Variable::new(format!("X{}", i + 1), c)),
        );
        vars.extend(
            self.output_cards
                .iter()
                .enumerate()
                .map(|(j, &c)| Variable::new(format!("Y{}", j + 1), c)),
        );
        JointDist::new(vars, probs)
    }

    /// The same channel with input and output symbols renamed:
    /// symbol `s` of input `i` becomes `input_perms[i][s]`, likewise for
    /// outputs.
    pub fn relabel(&self, input_perms: &[Vec<usize>], output_perms: &[Vec<usize>]) -> Result<Self> {
        check_perms(input_perms, &self.input_cards)?;
        check_perms(output_perms, &self.output_cards)?;
        let mut t = vec![0.0; self.transition.len()];
        let ny = self.ny();
        for x in 0..self.input_cards.iter().product() {
            let xd = digits(x, &self.input_cards);
            let xi = index_of(
                xd.iter().zip(input_perms).map(|(&s, p)| p[s]),
                &self.input_cards,
            );
            for y in 0..ny {
                let yd = digits(y, &self.output_cards);
                let yi = index_of(
                    yd.iter().zip(output_perms).map(|(&s, p)| p[s]),
                    &self.output_cards,
                );
                t[xi * ny + yi] = self.transition[x * ny + y];
            }
        }
        DiscreteIC::new(self.input_cards.clone(), self.output_cards.clone(), t)
    }

    /// Whether every receiver but the last hears only its own transmitter,
    /// each through its own independent link.
    pub fn check_many_to_one(&self) -> Result<()> {
        let k = self.num_users();
        if k < 2 {
            return Err(Error::NotManyToOne("needs at least two users".into()));
        }
        let nx: usize = self.input_cards.iter().product();
        let ny = self.ny();
        // per-input marginals P(y_j | x)
        let mut marg: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(nx); k];
        for x in 0..nx {
            let row = &self.transition[x * ny..(x + 1) * ny];
            for (j, m) in marg.iter_mut().enumerate() {
                let mut v = vec![0.0; self.output_cards[j]];
                for (y, &p) in row.iter().enumerate() {
                    v[digits(y, &self.output_cards)[j]] += p;
                }
                m.push(v);
            }
        }
        for x in 0..nx {
            let xd = digits(x, &self.input_cards);
            for j in 0..k - 1 {
                // must match the row where all other inputs are zero
                let mut base = vec![0; k];
                base[j] = xd[j];
                let b = index_of(base.iter().copied(), &self.input_cards);
                if marg[j][x]
                    .iter()
                    .zip(&marg[j][b])
                    .any(|(p, q)| (p - q).abs() > MASS_TOL)
                {
                    return Err(Error::NotManyToOne(format!(
                        "receiver {} depends on inputs other than its own",
                        j + 1
                    )));
                }
            }
            for y in 0..ny {
                let yd = digits(y, &self.output_cards);
                let product: f64 = (0..k).map(|j| marg[j][x][yd[j]]).product();
                if (product - self.transition[x * ny + y]).abs() > MASS_TOL {
                    return Err(Error::NotManyToOne(format!(
                        "outputs are not conditionally independent at inputs {xd:?}"
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_perms(perms: &[Vec<usize>], cards: &[usize]) -> Result<()> {
    if perms.len() != cards.len() {
        return arg("one permutation per alphabet is required");
    }
    for (p, &c) in perms.iter().zip(cards) {
        let mut s = p.clone();
        s.sort_unstable();
        if s != (0..c).collect::<Vec<_>>() {
            return arg(format!("{p:?} is not a permutation of 0..{c}"));
        }
    }
    Ok(())
}

/// Time-sharing weights and, for each branch, independent per-user input
/// distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductInput {
    q_weights: Vec<f64>,
    branches: Vec<Vec<Vec<f64>>>,
}

impl ProductInput {
    pub fn new(q_weights: Vec<f64>, branches: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if q_weights.is_empty() || branches.len() != q_weights.len() {
            return arg(format!(
                "{} weights for {} branches",
                q_weights.len(),
                branches.len()
            ));
        }
        check_stochastic(&q_weights, "time-sharing weights")?;
        let k = branches[0].len();
        for (q, b) in branches.iter().enumerate() {
            if b.len() != k || k == 0 {
                return arg("every branch needs the same nonzero number of users");
            }
            for (i, d) in b.iter().enumerate() {
                if d.is_empty() {
                    return arg("empty input distribution");
                }
                check_stochastic(d, &format!("branch {q} input {}", i + 1))?;
            }
        }
        Ok(ProductInput {
            q_weights,
            branches,
        })
    }

    /// Uniform inputs with a single branch.
    pub fn uniform(input_cards: &[usize]) -> Self {
        Self::uniform_with_q(input_cards, 1)
    }

    pub fn uniform_with_q(input_cards: &[usize], q_card: usize) -> Self {
        let branch: Vec<Vec<f64>> = input_cards
            .iter()
            .map(|&c| vec![1.0 / c as f64; c])
            .collect();
        ProductInput {
            q_weights: vec![1.0 / q_card as f64; q_card],
            branches: vec![branch; q_card],
        }
    }

    /// Every user sends a fixed symbol.
    pub fn point_mass(input_cards: &[usize], symbols: &[usize]) -> Result<Self> {
        if symbols.len() != input_cards.len() {
            return arg("one symbol per user is required");
        }
        let mut branch = Vec::new();
        for (&c, &s) in input_cards.iter().zip(symbols) {
            if s >= c {
                return arg(format!("symbol {s} outside alphabet of size {c}"));
            }
            let mut d = vec![0.0; c];
            d[s] = 1.0;
            branch.push(d);
        }
        ProductInput::new(vec![1.0], vec![branch])
    }

    fn random<R: Rng + ?Sized>(input_cards: &[usize], q_card: usize, rng: &mut R) -> Result<Self> {
        let q_weights = sample_simplex(q_card, rng)?;
        let mut branches = Vec::with_capacity(q_card);
        for _ in 0..q_card {
            let mut b = Vec::with_capacity(input_cards.len());
            for &c in input_cards {
                b.push(sample_simplex(c, rng)?);
            }
            branches.push(b);
        }
        Ok(ProductInput {
            q_weights,
            branches,
        })
    }

    pub fn q_weights(&self) -> &[f64] {
        &self.q_weights
    }

    pub fn branches(&self) -> &[Vec<Vec<f64>>] {
        &self.branches
    }

    pub fn num_users(&self) -> usize {
        self.branches[0].len()
    }

    pub fn check_against(&self, ch: &DiscreteIC) -> Result<()> {
        if self.num_users() != ch.num_users() {
            return arg(format!(
                "input has {} users, channel has {}",
                self.num_users(),
                ch.num_users()
            ));
        }
        for b in &self.branches {
            for (i, (d, &c)) in b.iter().zip(ch.input_cards()).enumerate() {
                if d.len() != c {
                    return arg(format!(
                        "input {} has {} symbols, channel alphabet has {c}",
                        i + 1,
                        d.len()
                    ));
                }
            }
        }
        Ok(())
    }

    /// Input renamed consistently with [`DiscreteIC::relabel`].
    pub fn relabel(&self, input_perms: &[Vec<usize>]) -> Self {
        let mut out = self.clone();
        for (b, ob) in self.branches.iter().zip(&mut out.branches) {
            for ((d, od), p) in b.iter().zip(ob.iter_mut()).zip(input_perms) {
                for (s, &v) in d.iter().enumerate() {
                    od[p[s]] = v;
                }
            }
        }
        out
    }

    fn n_coords(&self) -> usize {
        1 + self.branches.len() * self.num_users()
    }

    fn coord_mut(&mut self, c: usize) -> &mut Vec<f64> {
        if c == 0 {
            return &mut self.q_weights;
        }
        let k = self.branches[0].len();
        &mut self.branches[(c - 1) / k][(c - 1) % k]
    }
}

/// Row-stochastic matrix `P(out | in)`, used as a garbling stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Kernel {
    pub in_card: usize,
    pub out_card: usize,
    /// Row-major, `probs[i * out_card + o]`.
    pub probs: Vec<f64>,
}

impl Kernel {
    pub fn new(in_card: usize, out_card: usize, probs: Vec<f64>) -> Result<Self> {
        if in_card == 0 || out_card == 0 || probs.len() != in_card * out_card {
            return arg(format!(
                "kernel {in_card}x{out_card} cannot hold {} entries",
                probs.len()
            ));
        }
        for i in 0..in_card {
            check_stochastic(&probs[i * out_card..(i + 1) * out_card], "kernel row")?;
        }
        Ok(Kernel {
            in_card,
            out_card,
            probs,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut probs = vec![0.0; n * n];
        for i in 0..n {
            probs[i * n + i] = 1.0;
        }
        Kernel {
            in_card: n,
            out_card: n,
            probs,
        }
    }

    /// Binary symmetric channel with crossover `eps`.
    pub fn bsc(eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::Domain(format!("crossover {eps} outside [0, 1]")));
        }
        Kernel::new(2, 2, vec![1.0 - eps, eps, eps, 1.0 - eps])
    }

    /// Output independent of the input.
    pub fn uniform(in_card: usize, out_card: usize) -> Self {
        Kernel {
            in_card,
            out_card,
            probs: vec![1.0 / out_card as f64; in_card * out_card],
        }
    }

    pub fn get(&self, i: usize, o: usize) -> f64 {
        self.probs[i * self.out_card + o]
    }
}

/// Physically degraded channel `X -> Y1 -> Y2 -> ... -> YK`: `front` maps the
/// input tuple (in tensor order) to `Y1` and `garbles[i]` maps `Y_{i+1}` to
/// `Y_{i+2}`.
pub fn build_degraded_chain(
    front: &Kernel,
    garbles: &[Kernel],
    input_cards: &[usize],
) -> Result<DiscreteIC> {
    let k = input_cards.len();
    if garbles.len() + 1 != k {
        return arg(format!(
            "{k} receivers need {} garbling stages, got {}",
            k.saturating_sub(1),
            garbles.len()
        ));
    }
    let nx = checked_size(input_cards.iter().copied(), DEFAULT_TENSOR_CAP)?;
    if front.in_card != nx {
        return arg(format!(
            "front end reads {} input tuples, channel has {nx}",
            front.in_card
        ));
    }
    let mut output_cards = vec![front.out_card];
    for (s, g) in garbles.iter().enumerate() {
        if g.in_card != output_cards[s] {
            return arg(format!(
                "stage {} expects {} symbols, previous stage emits {}",
                s + 1,
                g.in_card,
                output_cards[s]
            ));
        }
        output_cards.push(g.out_card);
    }
    DiscreteIC::from_fn(input_cards.to_vec(), output_cards, |x, y| {
        let xi = index_of(x.iter().copied(), input_cards);
        let mut p = front.get(xi, y[0]);
        for (s, g) in garbles.iter().enumerate() {
            p *= g.get(y[s], y[s + 1]);
        }
        p
    })
}

/// Evaluates an expression on the joint induced by `input`; every term is
/// conditioned on the time-sharing variable.
pub fn evaluate_expression(
    ch: &DiscreteIC,
    input: &ProductInput,
    expr: &Expression,
) -> Result<f64> {
    expr.validate(ch.num_users())?;
    let joint = assemble_joint(input, ch)?;
    evaluate_on_joint(&joint, ch.num_users(), expr)
}

/// Value of each branch sum separately.
pub fn branch_values(ch: &DiscreteIC, input: &ProductInput, expr: &Expression) -> Result<Vec<f64>> {
    expr.validate(ch.num_users())?;
    let joint = assemble_joint(input, ch)?;
    let k = ch.num_users();
    expr.branches
        .iter()
        .map(|b| {
            let mut s = 0.0;
            for t in b {
                s += term_on_joint(&joint, k, t)?;
            }
            Ok(s)
        })
        .collect()
}

fn term_on_joint(joint: &JointDist, k: usize, t: &MiTerm) -> Result<f64> {
    let a: Vec<usize> = t.inputs.iter().map(|i| 1 + i).collect();
    let b: Vec<usize> = t.receivers.iter().map(|j| 1 + k + j).collect();
    let c: Vec<usize> = std::iter::once(0)
        .chain(t.given.iter().map(|i| 1 + i))
        .collect();
    joint.cmi_idx(&a, &b, &c)
}

fn evaluate_on_joint(joint: &JointDist, k: usize, expr: &Expression) -> Result<f64> {
    expr.evaluate_with(|t: &MiTerm| term_on_joint(joint, k, t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub restarts: usize,
    pub tol: f64,
    /// Time-sharing alphabet for min-type expressions; defaults to the
    /// number of branches.
    pub q_card: Option<usize>,
    pub seed: u64,
    pub exec: Exec,
    pub max_sweeps: usize,
    /// Falsification samples used when a result is certified by search.
    pub samples: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 64,
            tol: 1e-9,
            q_card: None,
            seed: 0,
            exec: Exec::default(),
            max_sweeps: 200,
            samples: 10_000,
        }
    }
}

/// Maximizes `expr` over product inputs by multi-start coordinate ascent.
///
/// Sum-type expressions are searched with a single branch since a mixture
/// only averages branch values. The result is never certified.
pub fn maximize_expression(
    ch: &DiscreteIC,
    expr: &Expression,
    cfg: &SearchConfig,
) -> Result<BoundResult> {
    let q_card = if expr.is_sum() {
        1
    } else {
        cfg.q_card.unwrap_or(expr.branches.len())
    };
    maximize_with_q_card(ch, expr, cfg, q_card)
}

/// [`maximize_expression`] with an explicit time-sharing alphabet.
pub fn maximize_with_q_card(
    ch: &DiscreteIC,
    expr: &Expression,
    cfg: &SearchConfig,
    q_card: usize,
) -> Result<BoundResult> {
    expr.validate(ch.num_users())?;
    if q_card == 0 || cfg.restarts == 0 {
        return arg("q_card and restarts must be positive");
    }
    if !(cfg.tol > 0.0) {
        return arg(format!("tolerance {} must be positive", cfg.tol));
    }
    checked_size(
        std::iter::once(q_card)
            .chain(ch.input_cards().iter().copied())
            .chain(ch.output_cards().iter().copied()),
        DEFAULT_TENSOR_CAP,
    )?;

    let runs = cfg.exec.map(cfg.restarts, |r| {
        let start = if r == 0 {
            ProductInput::uniform_with_q(ch.input_cards(), q_card)
        } else {
            ProductInput::random(
                ch.input_cards(),
                q_card,
                &mut stream_rng(cfg.seed, r as u64),
            )?
        };
        ascend(ch, expr, start, cfg)
    });

    let mut best: Option<(f64, ProductInput)> = None;
    let mut stats = SearchStats {
        restarts: cfg.restarts,
        ..Default::default()
    };
    for run in runs {
        let (v, input, sweeps) = run?;
        stats.iterations += sweeps;
        if best.as_ref().is_none_or(|(b, _)| v > *b) {
            stats.trace_len += 1;
            best = Some((v, input));
        }
    }
    let (value, argmax) = best.expect("at least one restart");
    Ok(BoundResult {
        value,
        expression_id: expr.id.clone(),
        argmax: Some(argmax),
        certified: false,
        search_stats: Some(stats),
    })
}

const GOLDEN: f64 = 0.618_033_988_749_895;
const GRID: usize = 8;

/// Coordinate ascent from `start`: repeatedly moves probability mass between
/// pairs of symbols of one distribution, with a grid-then-golden-section
/// line search, until a sweep gains less than `tol`.
fn ascend(
    ch: &DiscreteIC,
    expr: &Expression,
    mut x: ProductInput,
    cfg: &SearchConfig,
) -> Result<(f64, ProductInput, usize)> {
    let mut f = evaluate_expression(ch, &x, expr)?;
    let mut sweeps = 0;
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        let before = f;
        for c in 0..x.n_coords() {
            let d = x.coord_mut(c).len();
            for a in 0..d {
                for b in a + 1..d {
                    f = line_search(ch, expr, &mut x, c, a, b, f)?;
                }
            }
        }
        if f - before < cfg.tol {
            break;
        }
    }
    Ok((f, x, sweeps))
}

/// Best shift `t` of mass from symbol `b` to symbol `a` in coordinate `c`;
/// applies it if it improves on `f0` and returns the new value.
fn line_search(
    ch: &DiscreteIC,
    expr: &Expression,
    x: &mut ProductInput,
    c: usize,
    a: usize,
    b: usize,
    f0: f64,
) -> Result<f64> {
    let (va, vb) = {
        let v = x.coord_mut(c);
        (v[a], v[b])
    };
    if va + vb == 0.0 {
        return Ok(f0);
    }
    let (lo, hi) = (-va, vb);
    let mut eval = |t: f64| -> Result<f64> {
        let v = x.coord_mut(c);
        v[a] = (va + t).max(0.0);
        v[b] = (vb - t).max(0.0);
        evaluate_expression(ch, x, expr)
    };
    let step = (hi - lo) / GRID as f64;
    let mut best_t = 0.0;
    let mut best_f = f0;
    let mut best_g = None;
    for g in 0..=GRID {
        let t = if g == GRID { hi } else { lo + step * g as f64 };
        let v = eval(t)?;
        if v > best_f {
            best_f = v;
            best_t = t;
            best_g = Some(g);
        }
    }
    // refine around the best grid point, or around the current point when
    // no grid point beats it
    {
        let (mut l, mut r) = match best_g {
            Some(g) => (
                if g == 0 {
                    lo
                } else {
                    lo + step * (g - 1) as f64
                },
                if g == GRID {
                    hi
                } else {
                    lo + step * (g + 1) as f64
                },
            ),
            None => (lo.max(-step), hi.min(step)),
        };
        let mut m1 = r - GOLDEN * (r - l);
        let mut m2 = l + GOLDEN * (r - l);
        let mut f1 = eval(m1)?;
        let mut f2 = eval(m2)?;
        for _ in 0..40 {
            if r - l < 1e-12 {
                break;
            }
            if f1 >= f2 {
                r = m2;
                m2 = m1;
                f2 = f1;
                m1 = r - GOLDEN * (r - l);
                f1 = eval(m1)?;
            } else {
                l = m1;
                m1 = m2;
                f1 = f2;
                m2 = l + GOLDEN * (r - l);
                f2 = eval(m2)?;
            }
            for (t, v) in [(m1, f1), (m2, f2)] {
                if v > best_f {
                    best_f = v;
                    best_t = t;
                }
            }
        }
    }
    let v = x.coord_mut(c);
    v[a] = (va + best_t).max(0.0);
    v[b] = (vb - best_t).max(0.0);
    Ok(best_f)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConditionKind {
    /// `I(U; Y_i | X_i..X_K) <= I(U; Y_{i-1} | X_i..X_K)` for `i >= 2`.
    LessNoisyPerUser,
    /// `I(U; Y_i | X_{i+1}..X_K) <= I(U; Y_l | X_{i+1}..X_K)` for all `l < i`.
    ChainLessNoisy,
    /// `I(U, X_omega1; Y_weak | X_omega2) <= I(U, X_omega1; Y_strong | X_omega2)`.
    SetLessNoisy {
        omega1: Vec<usize>,
        omega2: Vec<usize>,
        weak: usize,
        strong: usize,
    },
    PermutationCuts {
        perm: Vec<usize>,
        cuts: Vec<usize>,
    },
    OutputGroups {
        groups: Vec<Vec<usize>>,
    },
    /// `I(U; Y_K | X_K) <= I(U; Y_1..Y_{K-1} | X_K)`.
    ManyToOne,
    /// Both two-user mixed-interference conditions.
    TwoUserMixed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionSpec {
    pub kind: ConditionKind,
    /// Auxiliary alphabet size; defaults to the product of the alphabets the
    /// auxiliary is jointly distributed with.
    pub u_card: Option<usize>,
}

impl ConditionSpec {
    pub fn new(kind: ConditionKind) -> Self {
        ConditionSpec { kind, u_card: None }
    }

    /// The hypotheses of a bound structure.
    pub fn for_structure(s: &BoundStructure) -> Self {
        ConditionSpec::new(match s {
            BoundStructure::NestedChain => ConditionKind::LessNoisyPerUser,
            BoundStructure::PermutationCuts { perm, cuts } => ConditionKind::PermutationCuts {
                perm: perm.clone(),
                cuts: cuts.clone(),
            },
            BoundStructure::OutputGroups { groups } => ConditionKind::OutputGroups {
                groups: groups.clone(),
            },
        })
    }

    pub fn inequalities(&self, k: usize) -> Result<Vec<Inequality>> {
        let out = match &self.kind {
            ConditionKind::LessNoisyPerUser => BoundStructure::NestedChain.hypotheses(k)?,
            ConditionKind::ChainLessNoisy => {
                let mut out = Vec::new();
                for i in 1..k {
                    for l in 0..i {
                        out.push(Inequality::new(
                            format!("chain[{},{}]", i + 1, l + 1),
                            true,
                            vec![],
                            (i + 1..k).collect(),
                            vec![i],
                            vec![l],
                        ));
                    }
                }
                out
            }
            ConditionKind::SetLessNoisy {
                omega1,
                omega2,
                weak,
                strong,
            } => {
                let all = omega1.iter().chain(omega2).chain([weak, strong]);
                if let Some(bad) = all.clone().find(|&&i| i >= k) {
                    return arg(format!("index {bad} out of range for {k} users"));
                }
                if omega1.iter().any(|i| omega2.contains(i)) || weak == strong {
                    return arg("input sets must be disjoint and receivers distinct");
                }
                let covered = omega1.len() + omega2.len() == k;
                vec![Inequality::new(
                    "set".into(),
                    !covered,
                    omega1.clone(),
                    omega2.clone(),
                    vec![*weak],
                    vec![*strong],
                )]
            }
            ConditionKind::PermutationCuts { perm, cuts } => BoundStructure::PermutationCuts {
                perm: perm.clone(),
                cuts: cuts.clone(),
            }
            .hypotheses(k)?,
            ConditionKind::OutputGroups { groups } => BoundStructure::OutputGroups {
                groups: groups.clone(),
            }
            .hypotheses(k)?,
            ConditionKind::ManyToOne => {
                if k < 2 {
                    return arg("many-to-one condition needs two users");
                }
                vec![Inequality::new(
                    "many-to-one".into(),
                    true,
                    vec![],
                    vec![k - 1],
                    vec![k - 1],
                    (0..k - 1).collect(),
                )]
            }
            ConditionKind::TwoUserMixed => {
                if k != 2 {
                    return arg(format!("two-user condition on {k} users"));
                }
                vec![
                    Inequality::new(
                        "strong-at-1".into(),
                        false,
                        vec![1],
                        vec![0],
                        vec![1],
                        vec![0],
                    ),
                    Inequality::new("weak-at-2".into(), true, vec![], vec![1], vec![1], vec![0]),
                ]
            }
        };
        if self.u_card == Some(0) {
            return arg("auxiliary alphabet must be nonempty");
        }
        Ok(out)
    }
}

/// A sampled law violating one inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub inequality_id: String,
    /// `LHS - RHS` in bits, above the slack.
    pub margin: f64,
    pub sample_index: usize,
    pub u_card: usize,
    /// Law over `(U, X1..XK)`, row-major with `U` outermost.
    pub law: Vec<f64>,
}

/// Draws a probability vector; the style cycles between flat, peaked and
/// near-deterministic draws so that boundary laws get explored too.
fn sample_vector<R: Rng + ?Sized>(dim: usize, style: usize, rng: &mut R) -> Result<Vec<f64>> {
    let mut v = sample_simplex(dim, rng)?;
    if style > 0 && dim > 1 {
        let power = if style == 1 { 4 } else { 12 };
        v.iter_mut().for_each(|p| *p = p.powi(power));
        let s = compensated_sum(v.iter().copied());
        if s > 0.0 {
            v.iter_mut().for_each(|p| *p /= s);
        } else {
            v = sample_simplex(dim, rng)?;
        }
    }
    Ok(v)
}

/// Samples a law over `(U, X)` of the factorization the inequality
/// quantifies over: `U` jointly with the dependent inputs, then each block
/// of given inputs independently.
pub fn sample_law<R: Rng + ?Sized>(
    ch: &DiscreteIC,
    h: &Inequality,
    u_card: usize,
    style: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let k = ch.num_users();
    let cards = ch.input_cards();
    let dep = h.dependent(k);
    let dep_cards: Vec<usize> = dep.iter().map(|&i| cards[i]).collect();
    let n_dep: usize = dep_cards.iter().product();
    let joint = if style == 3 {
        // U a deterministic function of the dependent inputs
        let px = sample_simplex(n_dep, rng)?;
        let mut j = vec![0.0; u_card * n_dep];
        for (xd, &p) in px.iter().enumerate() {
            let u = if u_card == n_dep {
                xd
            } else {
                rng.random_range(0..u_card)
            };
            j[u * n_dep + xd] = p;
        }
        j
    } else {
        sample_vector(u_card * n_dep, style, rng)?
    };
    let blocks: Vec<(Vec<usize>, Vec<f64>)> = h
        .blocks
        .iter()
        .map(|b| {
            let n: usize = b.iter().map(|&i| cards[i]).product();
            Ok((b.clone(), sample_vector(n, style.min(2), rng)?))
        })
        .collect::<Result<_>>()?;
    let nx: usize = cards.iter().product();
    let mut law = Vec::with_capacity(u_card * nx);
    for u in 0..u_card {
        for x in ch.input_tuples() {
            let xd = index_of(dep.iter().map(|&i| x[i]), &dep_cards);
            let mut p = joint[u * n_dep + xd];
            for (b, pb) in &blocks {
                let bc: Vec<usize> = b.iter().map(|&i| cards[i]).collect();
                p *= pb[index_of(b.iter().map(|&i| x[i]), &bc)];
            }
            law.push(p);
        }
    }
    Ok(law)
}

/// `LHS - RHS` of one inequality on a law over `(U, X)`.
pub fn inequality_margin(
    ch: &DiscreteIC,
    h: &Inequality,
    u_card: usize,
    law: &[f64],
) -> Result<f64> {
    let k = ch.num_users();
    let joint = ch.joint_with_inputs(vec![Variable::new("U", u_card)], law)?;
    let a: Vec<usize> = std::iter::once(0)
        .chain(h.inputs.iter().map(|i| 1 + i))
        .collect();
    let c: Vec<usize> = h.given.iter().map(|i| 1 + i).collect();
    let y = |r: &[usize]| r.iter().map(|j| 1 + k + j).collect::<Vec<_>>();
    Ok(joint.cmi_idx(&a, &y(&h.weaker), &c)? - joint.cmi_idx(&a, &y(&h.stronger), &c)?)
}

fn validate_inequality(h: &Inequality, k: usize) -> Result<()> {
    let idx = h
        .inputs
        .iter()
        .chain(&h.given)
        .chain(&h.weaker)
        .chain(&h.stronger)
        .chain(h.blocks.iter().flatten());
    if let Some(bad) = idx.clone().find(|&&i| i >= k) {
        return arg(format!(
            "inequality {} uses index {bad} beyond {k} users",
            h.id
        ));
    }
    let mut flat: Vec<usize> = h.blocks.iter().flatten().copied().collect();
    let mut given = h.given.clone();
    flat.sort_unstable();
    given.sort_unstable();
    if flat != given {
        return arg(format!(
            "blocks of {} do not partition the given inputs",
            h.id
        ));
    }
    Ok(())
}

fn default_u_card(ch: &DiscreteIC, h: &Inequality) -> usize {
    if !h.with_aux {
        return 1;
    }
    h.dependent(ch.num_users())
        .iter()
        .map(|&i| ch.input_cards()[i])
        .product()
}

/// Searches for a law violating one of the condition's inequalities.
/// `None` means no violation was found in `samples` draws, which is
/// evidence, not proof.
pub fn falsify_condition<R: RngCore + ?Sized>(
    ch: &DiscreteIC,
    spec: &ConditionSpec,
    samples: usize,
    rng: &mut R,
) -> Result<Option<Counterexample>> {
    falsify_with(ch, spec, samples, rng.next_u64(), Exec::default())
}

/// [`falsify_condition`] with an explicit base seed and execution policy.
/// Sample `s` draws from stream `s`, so the result does not depend on the
/// policy.
pub fn falsify_with(
    ch: &DiscreteIC,
    spec: &ConditionSpec,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<Option<Counterexample>> {
    if samples == 0 {
        return arg("at least one sample is required");
    }
    let k = ch.num_users();
    let ineqs = spec.inequalities(k)?;
    let mut plan = Vec::with_capacity(ineqs.len());
    for h in ineqs {
        validate_inequality(&h, k)?;
        let u = if h.with_aux {
            spec.u_card.unwrap_or_else(|| default_u_card(ch, &h))
        } else {
            1
        };
        let nx: usize = ch.input_cards().iter().product();
        let ny: usize = ch.output_cards().iter().product();
        checked_size([u, nx, ny], DEFAULT_TENSOR_CAP)?;
        plan.push((h, u));
    }
    let found = exec.find_first(samples, |s| {
        let mut rng = stream_rng(seed, s as u64);
        for (h, u) in &plan {
            let r = sample_law(ch, h, *u, s % 4, &mut rng)
                .and_then(|law| Ok((inequality_margin(ch, h, *u, &law)?, law)));
            match r {
                Err(e) => return Some(Err(e)),
                Ok((m, law)) if m > VIOLATION_SLACK => {
                    return Some(Ok(Counterexample {
                        inequality_id: h.id.clone(),
                        margin: m,
                        sample_index: s,
                        u_card: *u,
                        law,
                    }))
                }
                Ok(_) => {}
            }
        }
        None
    });
    found.transpose()
}

/// Sum capacity of a many-to-one channel by treating interference as noise,
/// certified when the less-noisy condition survives falsification.
pub fn many_to_one_tin_capacity(ch: &DiscreteIC, cfg: &SearchConfig) -> Result<BoundResult> {
    ch.check_many_to_one()?;
    let k = ch.num_users();
    let mut res = maximize_expression(ch, &Expression::interference_as_noise(k), cfg)?;
    let cex = falsify_with(
        ch,
        &ConditionSpec::new(ConditionKind::ManyToOne),
        cfg.samples.max(1),
        cfg.seed,
        cfg.exec,
    )?;
    res.certified = cex.is_none();
    Ok(res)
}

/// Discrete outer bound for a structure: the maximized expression, certified
/// when the structure's hypotheses survive falsification.
pub fn structure_bound(
    ch: &DiscreteIC,
    s: &BoundStructure,
    cfg: &SearchConfig,
) -> Result<BoundResult> {
    let expr = s.expression(ch.num_users())?;
    let mut res = maximize_expression(ch, &expr, cfg)?;
    let cex = falsify_with(
        ch,
        &ConditionSpec::for_structure(s),
        cfg.samples.max(1),
        cfg.seed,
        cfg.exec,
    )?;
    res.certified = cex.is_none();
    Ok(res)
}
