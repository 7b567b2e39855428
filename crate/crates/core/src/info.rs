//! Dense joint distributions over named finite variables, with entropy and
//! conditional mutual information in bits.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::discrete::{DiscreteIC, ProductInput};
use crate::error::{arg, Error, Result};

/// Default cap on the number of entries of a dense joint tensor.
pub const DEFAULT_TENSOR_CAP: usize = 1 << 20;

/// Tolerance on the total mass of a joint distribution.
pub const MASS_TOL: f64 = 1e-12;

/// Mutual-information values in `[-MI_CLAMP, 0)` are rounding noise and are
/// clamped to zero; anything more negative is reported as an error.
pub const MI_CLAMP: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub card: usize,
}

impl Variable {
    pub fn new(name: impl Into<String>, card: usize) -> Self {
        Variable {
            name: name.into(),
            card,
        }
    }
}

/// A resolved, duplicate-free set of variable positions in a [`JointDist`].
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VarSet(Vec<usize>);

impl VarSet {
    pub fn empty() -> Self {
        VarSet(Vec::new())
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        v.sort_unstable();
        v.dedup();
        VarSet(v)
    }

    pub fn is_disjoint(&self, other: &VarSet) -> bool {
        self.0.iter().all(|i| !other.0.contains(i))
    }

    /// Builds a set from raw positions, rejecting duplicates and positions
    /// outside `0..nvars`.
    pub fn from_indices(idx: &[usize], nvars: usize) -> Result<Self> {
        let mut v = idx.to_vec();
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return arg(format!("duplicate variable in set {idx:?}"));
        }
        if let Some(&bad) = v.iter().find(|&&i| i >= nvars) {
            return arg(format!(
                "variable position {bad} out of range (have {nvars})"
            ));
        }
        Ok(VarSet(v))
    }
}

/// Probability tensor over the product of the variables' alphabets, stored
/// row-major with the first variable outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    vars: Vec<Variable>,
    probs: Vec<f64>,
}

pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut sum = 0.0f64;
    let mut c = 0.0f64;
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Number of entries of the product alphabet, or a size error beyond `cap`.
pub fn checked_size(cards: impl IntoIterator<Item = usize>, cap: usize) -> Result<usize> {
    let mut n: u128 = 1;
    for c in cards {
        n = n.saturating_mul(c as u128);
    }
    if n > cap as u128 {
        return Err(Error::Size { entries: n, cap });
    }
    Ok(n as usize)
}

impl JointDist {
    pub fn new(vars: Vec<Variable>, probs: Vec<f64>) -> Result<Self> {
        Self::with_cap(vars, probs, DEFAULT_TENSOR_CAP)
    }

    pub fn with_cap(vars: Vec<Variable>, probs: Vec<f64>, cap: usize) -> Result<Self> {
        if vars.is_empty() {
            return arg("a joint distribution needs at least one variable");
        }
        for (i, v) in vars.iter().enumerate() {
            if v.card == 0 {
                return arg(format!("variable `{}` has zero cardinality", v.name));
            }
            if vars[..i].iter().any(|w| w.name == v.name) {
                return arg(format!("duplicate variable name `{}`", v.name));
            }
        }
        let size = checked_size(vars.iter().map(|v| v.card), cap)?;
        if probs.len() != size {
            return arg(format!(
                "tensor has {} entries, expected {size} from the cardinalities",
                probs.len()
            ));
        }
        if let Some(p) = probs.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return arg(format!("negative or non-finite probability {p}"));
        }
        let total = compensated_sum(probs.iter().copied());
        if (total - 1.0).abs() > MASS_TOL {
            return arg(format!("probabilities sum to {total}, not 1"));
        }
        Ok(JointDist { vars, probs })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn var_set(&self, names: &[&str]) -> Result<VarSet> {
        let idx = names
            .iter()
            .map(|n| self.index_of(n))
            .collect::<Result<Vec<_>>>()?;
        VarSet::from_indices(&idx, self.vars.len())
    }

    /// Marginal law of the variables at `idx`, laid out row-major in the
    /// order given.
    pub fn marginal(&self, idx: &[usize]) -> Vec<f64> {
        let nv = self.vars.len();
        let mut ostride = vec![0usize; nv];
        let mut size = 1usize;
        for &v in idx.iter().rev() {
            ostride[v] = size;
            size *= self.vars[v].card;
        }
        let mut out = vec![0.0; size];
        let mut counter = vec![0usize; nv];
        let mut mi = 0usize;
        for &p in &self.probs {
            out[mi] += p;
            for v in (0..nv).rev() {
                counter[v] += 1;
                mi += ostride[v];
                if counter[v] < self.vars[v].card {
                    break;
                }
                mi -= ostride[v] * self.vars[v].card;
                counter[v] = 0;
            }
        }
        out
    }

    fn entropy_idx(&self, idx: &[usize]) -> f64 {
        if idx.is_empty() {
            return 0.0;
        }
        entropy_of_probs(&self.marginal(idx))
    }

    /// Shannon entropy (bits) of the marginal on `names`.
    pub fn entropy(&self, names: &[&str]) -> Result<f64> {
        let set = self.var_set(names)?;
        self.entropy_of(&set)
    }

    pub fn entropy_of(&self, set: &VarSet) -> Result<f64> {
        if set.is_empty() {
            return arg("entropy of an empty variable set");
        }
        Ok(self.entropy_idx(set.indices()))
    }

    /// `I(A;B|C)` in bits. `C` may be empty; an empty `A` or `B` gives zero.
    pub fn conditional_mi(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
        let (a, b, c) = (self.var_set(a)?, self.var_set(b)?, self.var_set(c)?);
        self.cmi(&a, &b, &c)
    }

    pub fn cmi(&self, a: &VarSet, b: &VarSet, c: &VarSet) -> Result<f64> {
        if !a.is_disjoint(b) || !a.is_disjoint(c) || !b.is_disjoint(c) {
            return arg(format!(
                "mutual-information sets overlap: {:?} / {:?} / {:?}",
                a.0, b.0, c.0
            ));
        }
        if a.is_empty() || b.is_empty() {
            return Ok(0.0);
        }
        let ac = a.union(c);
        let bc = b.union(c);
        let abc = ac.union(b);
        let value = self.entropy_idx(ac.indices()) + self.entropy_idx(bc.indices())
            - self.entropy_idx(abc.indices())
            - self.entropy_idx(c.indices());
        clamp_mi(value)
    }

    /// Position-based shorthand for [`JointDist::cmi`].
    pub fn cmi_idx(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<f64> {
        let n = self.vars.len();
        self.cmi(
            &VarSet::from_indices(a, n)?,
            &VarSet::from_indices(b, n)?,
            &VarSet::from_indices(c, n)?,
        )
    }

    /// Labeled CSV dump: one column per variable plus a `p` column, one row
    /// per tensor entry.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for v in &self.vars {
            s.push_str(&v.name);
            s.push(',');
        }
        s.push_str("p\n");
        let nv = self.vars.len();
        let mut counter = vec![0usize; nv];
        for &p in &self.probs {
            for c in &counter {
                let _ = write!(s, "{c},");
            }
            let _ = writeln!(s, "{p:e}");
            for v in (0..nv).rev() {
                counter[v] += 1;
                if counter[v] < self.vars[v].card {
                    break;
                }
                counter[v] = 0;
            }
        }
        s
    }
}

pub(crate) fn entropy_of_probs(p: &[f64]) -> f64 {
    // a point mass summing to 1 + ulp would otherwise give -1e-16
    compensated_sum(p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2())).max(0.0)
}

fn clamp_mi(value: f64) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value >= -MI_CLAMP {
        Ok(0.0)
    } else {
        Err(Error::Numerical {
            what: "conditional mutual information",
            value,
        })
    }
}

/// Variable names used by [`csiszar_korner_residual`]: `W` for the side
/// variable, `Ya1..Yan` and `Yb1..Ybn` for the two sequences.
pub fn ck_names(n: usize) -> (Vec<String>, Vec<String>) {
    (
        (1..=n).map(|t| format!("Ya{t}")).collect(),
        (1..=n).map(|t| format!("Yb{t}")).collect(),
    )
}

/// `sum_t I(Yb_{t+1}^n; Ya_t | W, Ya^{t-1}) - sum_t I(Ya^{t-1}; Yb_t | W, Yb_{t+1}^n)`
/// for a joint over `W` (optional), `Ya1..Yan`, `Yb1..Ybn`. The two sums
/// telescope to the same value, so the residual is zero up to rounding.
pub fn csiszar_korner_residual(d: &JointDist, n: usize) -> Result<f64> {
    if n == 0 {
        return arg("blocklength must be at least 1");
    }
    let (ya, yb) = ck_names(n);
    let ya = ya
        .iter()
        .map(|s| d.index_of(s))
        .collect::<Result<Vec<_>>>()?;
    let yb = yb
        .iter()
        .map(|s| d.index_of(s))
        .collect::<Result<Vec<_>>>()?;
    let w = match d.index_of("W") {
        Ok(i) => vec![i],
        Err(_) => Vec::new(),
    };
    let expected = 2 * n + w.len();
    if d.variables().len() != expected {
        return Err(Error::UnknownVariable(format!(
            "expected exactly {expected} variables (W, Ya*, Yb*), found {}",
            d.variables().len()
        )));
    }
    csiszar_korner_residual_sets(d, &ya, &yb, &w)
}

/// Residual for explicit sequence positions; `w` may hold several variables,
/// which is the same as conditioning on their tuple.
pub fn csiszar_korner_residual_sets(
    d: &JointDist,
    ya: &[usize],
    yb: &[usize],
    w: &[usize],
) -> Result<f64> {
    let n = ya.len();
    if yb.len() != n || n == 0 {
        return arg("sequences must have equal, nonzero length");
    }
    let mut left = Vec::with_capacity(n);
    let mut right = Vec::with_capacity(n);
    for t in 0..n {
        let past_a = &ya[..t];
        let future_b = &yb[t + 1..];
        let c_left: Vec<usize> = w.iter().chain(past_a).copied().collect();
        left.push(d.cmi_idx(future_b, &ya[t..=t], &c_left)?);
        let c_right: Vec<usize> = w.iter().chain(future_b).copied().collect();
        right.push(d.cmi_idx(past_a, &yb[t..=t], &c_right)?);
    }
    Ok(compensated_sum(left) - compensated_sum(right))
}

/// Uniform draw from the probability simplex of dimension `dim`, via
/// normalized exponential spacings.
pub fn sample_simplex<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Vec<f64>> {
    if dim == 0 {
        return arg("simplex dimension must be at least 1");
    }
    if dim == 1 {
        return Ok(vec![1.0]);
    }
    let mut v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = compensated_sum(v.iter().copied());
    for x in &mut v {
        *x /= total;
    }
    Ok(v)
}

/// Single-letter joint over `(Q, X1..XK, Y1..YK)` induced by a product input
/// and a memoryless channel: `P(q) prod_i P(x_i|q) P(y|x)`.
pub fn assemble_joint(input: &ProductInput, channel: &DiscreteIC) -> Result<JointDist> {
    input.check_against(channel)?;
    let q_card = input.q_weights().len();
    let nx: usize = channel.input_cards().iter().product();
    let mut law = Vec::with_capacity(q_card * nx);
    for q in 0..q_card {
        let w = input.q_weights()[q];
        let branch = &input.branches()[q];
        law.extend(channel.input_tuples().map(|x| {
            x.iter()
                .zip(branch)
                .fold(w, |acc, (&xi, dist)| acc * dist[xi])
        }));
    }
    channel.joint_with_inputs(vec![Variable::new("Q", q_card)], &law)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dist(vars: &[(&str, usize)], probs: Vec<f64>) -> JointDist {
        JointDist::new(
            vars.iter().map(|(n, c)| Variable::new(*n, *c)).collect(),
            probs,
        )
        .unwrap()
    }

    #[test]
    fn entropy_examples() {
        let d = dist(&[("A", 2)], vec![0.5, 0.5]);
        assert_abs_diff_eq!(d.entropy(&["A"]).unwrap(), 1.0, epsilon = 1e-15);
        let d = dist(&[("A", 3)], vec![0.0, 1.0, 0.0]);
        assert_eq!(d.entropy(&["A"]).unwrap(), 0.0);
        let d = dist(&[("A", 4)], vec![0.25; 4]);
        assert_abs_diff_eq!(d.entropy(&["A"]).unwrap(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn entropy_rejects_unknown_and_empty() {
        let d = dist(&[("A", 2)], vec![0.5, 0.5]);
        assert_eq!(
            d.entropy(&["B"]),
            Err(Error::UnknownVariable("B".to_string()))
        );
        assert!(matches!(d.entropy(&[]), Err(Error::Argument(_))));
    }

    #[test]
    fn construction_invariants() {
        let v = vec![Variable::new("A", 2)];
        assert!(JointDist::new(v.clone(), vec![0.5, 0.6]).is_err());
        assert!(JointDist::new(v.clone(), vec![1.5, -0.5]).is_err());
        assert!(JointDist::new(v.clone(), vec![1.0]).is_err());
        let big = vec![Variable::new("A", 1 << 11), Variable::new("B", 1 << 10)];
        assert!(matches!(
            JointDist::new(big, vec![]),
            Err(Error::Size { .. })
        ));
    }

    #[test]
    fn marginal_order_follows_request() {
        // P(A=a, B=b) with A outer.
        let d = dist(&[("A", 2), ("B", 3)], vec![0.1, 0.2, 0.05, 0.3, 0.15, 0.2]);
        let ba = d.marginal(&[1, 0]);
        assert_abs_diff_eq!(ba[0], 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(ba[1], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(ba[5], 0.2, epsilon = 1e-15);
        let b = d.marginal(&[1]);
        assert_abs_diff_eq!(b[2], 0.25, epsilon = 1e-15);
    }

    #[test]
    fn cmi_examples() {
        // independent
        let d = dist(&[("A", 2), ("B", 2)], vec![0.25; 4]);
        assert_eq!(d.conditional_mi(&["A"], &["B"], &[]).unwrap(), 0.0);
        // identity
        let d = dist(&[("A", 2), ("B", 2)], vec![0.5, 0.0, 0.0, 0.5]);
        assert_abs_diff_eq!(
            d.conditional_mi(&["A"], &["B"], &[]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        // B = A xor C
        let mut p = vec![0.0; 8];
        for a in 0..2 {
            for c in 0..2 {
                p[a * 4 + c * 2 + (a ^ c)] = 0.25;
            }
        }
        let d = dist(&[("A", 2), ("C", 2), ("B", 2)], p);
        assert_abs_diff_eq!(
            d.conditional_mi(&["A"], &["B"], &[]).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            d.conditional_mi(&["A"], &["B"], &["C"]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn cmi_rejects_overlap() {
        let d = dist(&[("A", 2), ("B", 2)], vec![0.25; 4]);
        assert!(matches!(
            d.conditional_mi(&["A"], &["A", "B"], &[]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn clamp_policy() {
        assert_eq!(clamp_mi(-5e-11), Ok(0.0));
        assert!(matches!(clamp_mi(-1e-9), Err(Error::Numerical { .. })));
    }

    #[test]
    fn ck_single_letter_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = sample_simplex(2 * 3 * 2, &mut rng).unwrap();
        let d = dist(&[("W", 2), ("Ya1", 3), ("Yb1", 2)], p);
        assert_eq!(csiszar_korner_residual(&d, 1).unwrap(), 0.0);
    }

    #[test]
    fn ck_rejects_bad_names() {
        let d = dist(&[("Ya1", 2), ("Yc1", 2)], vec![0.25; 4]);
        assert!(matches!(
            csiszar_korner_residual(&d, 1),
            Err(Error::UnknownVariable(_))
        ));
        let d = dist(&[("Ya1", 2), ("Yb1", 2), ("Z", 1)], vec![0.25; 4]);
        assert!(csiszar_korner_residual(&d, 1).is_err());
    }

    #[test]
    fn simplex_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        assert_eq!(sample_simplex(1, &mut rng).unwrap(), vec![1.0]);
        assert!(sample_simplex(0, &mut rng).is_err());
        let a = sample_simplex(3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let b = sample_simplex(3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, b);
        assert_abs_diff_eq!(a.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(a.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn simplex_mean_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 10_000;
        let mean = (0..n)
            .map(|_| sample_simplex(2, &mut rng).unwrap()[0])
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn csv_dump_lists_every_entry() {
        let d = dist(&[("A", 2), ("B", 2)], vec![0.5, 0.0, 0.0, 0.5]);
        let csv = d.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "A,B,p");
        assert_eq!(lines.len(), 5);
        assert!(lines[4].starts_with("1,1,5e-1"));
    }
}
