//! Real Gaussian interference channels `Y_j = sum_i a_ji X_i + Z_j` with
//! unit-variance noise and average power budgets `E[X_i^2] <= P_i`.
//!
//! Every rate below is evaluated with independent Gaussian inputs at full
//! power and no time sharing.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::expr::{BoundResult, BoundStructure, DecodeOrder, Expression, Inequality, MiTerm};

/// Relative tolerance for the gain-ratio equalities.
pub const RATIO_TOL: f64 = 1e-9;

/// Slack for closed-form inequality margins.
const MARGIN_TOL: f64 = 1e-12;

/// `1/2 log2(1 + x)`, the point-to-point Gaussian capacity at SNR `x`.
pub fn psi(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("psi is undefined at {x}")));
    }
    Ok(0.5 * x.ln_1p() / std::f64::consts::LN_2)
}

fn psi_raw(x: f64) -> f64 {
    0.5 * x.ln_1p() / std::f64::consts::LN_2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianIC {
    /// `gains[j][i]` is the gain from transmitter `i` into receiver `j`.
    gains: Vec<Vec<f64>>,
    powers: Vec<f64>,
}

impl GaussianIC {
    pub fn new(gains: Vec<Vec<f64>>, powers: Vec<f64>) -> Result<Self> {
        let k = powers.len();
        if k < 2 {
            return arg(format!("need at least two users, got {k}"));
        }
        if gains.len() != k || gains.iter().any(|r| r.len() != k) {
            return arg(format!("gain matrix must be {k}x{k}"));
        }
        if gains.iter().flatten().any(|g| !g.is_finite()) {
            return arg("gains must be finite");
        }
        if let Some(p) = powers.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return arg(format!("power {p} must be finite and nonnegative"));
        }
        Ok(GaussianIC { gains, powers })
    }

    pub fn k(&self) -> usize {
        self.powers.len()
    }

    pub fn gain(&self, receiver: usize, transmitter: usize) -> f64 {
        self.gains[receiver][transmitter]
    }

    pub fn gains(&self) -> &[Vec<f64>] {
        &self.gains
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn power(&self, i: usize) -> f64 {
        self.powers[i]
    }

    pub fn with_gain(mut self, receiver: usize, transmitter: usize, g: f64) -> Self {
        self.gains[receiver][transmitter] = g;
        self
    }

    pub fn with_power(mut self, i: usize, p: f64) -> Self {
        self.powers[i] = p;
        self
    }

    /// Received power `a_ji^2 P_i` of user `i` at receiver `j`.
    fn rx_power(&self, j: usize, i: usize) -> f64 {
        let a = self.gains[j][i];
        a * a * self.powers[i]
    }

    pub fn is_normalized(&self) -> bool {
        (0..self.k()).all(|i| self.gains[i][i] == 1.0)
    }

    /// Equivalent channel with unit direct gains.
    ///
    /// Transmitter `i` is rescaled by `a_ii`, so `a'_ji = a_ji / a_ii` and
    /// `P'_i = a_ii^2 P_i`; every received power `a_ji^2 P_i`, and hence every
    /// rate, is unchanged.
    pub fn normalize(&self) -> Result<GaussianIC> {
        let k = self.k();
        let mut out = self.clone();
        for i in 0..k {
            let d = self.gains[i][i];
            if d == 0.0 {
                return Err(Error::Degenerate(format!("direct gain a_{i}{i} is zero")));
            }
            for j in 0..k {
                out.gains[j][i] = if i == j { 1.0 } else { self.gains[j][i] / d };
            }
            out.powers[i] = d * d * self.powers[i];
        }
        Ok(out)
    }

    fn check_users(&self, sets: &[&[usize]]) -> Result<()> {
        let k = self.k();
        for (n, s) in sets.iter().enumerate() {
            if let Some(&bad) = s.iter().find(|&&i| i >= k) {
                return arg(format!("user {bad} out of range for {k} users"));
            }
            for t in &sets[n + 1..] {
                if s.iter().any(|i| t.contains(i)) {
                    return arg(format!("user sets {s:?} and {t:?} overlap"));
                }
            }
        }
        Ok(())
    }

    /// `I(X_S; Y_j | X_T)`: users outside `S` and `T` act as noise.
    pub fn cmi(&self, decoded: &[usize], known: &[usize], receiver: usize) -> Result<f64> {
        self.check_users(&[decoded, known, &[receiver]])
            .or_else(|e| match e {
                // the receiver index may coincide with a user in S or T
                Error::Argument(_) if receiver < self.k() => self.check_users(&[decoded, known]),
                e => Err(e),
            })?;
        let signal: f64 = decoded.iter().map(|&i| self.rx_power(receiver, i)).sum();
        let noise: f64 = 1.0
            + (0..self.k())
                .filter(|i| !decoded.contains(i) && !known.contains(i))
                .map(|i| self.rx_power(receiver, i))
                .sum::<f64>();
        Ok(psi_raw(signal / noise))
    }

    /// `I(X_S; Y_R | X_T)` for a group of receivers with independent
    /// unit-variance noise, via log-determinants.
    pub fn group_cmi(
        &self,
        decoded: &[usize],
        known: &[usize],
        receivers: &[usize],
    ) -> Result<f64> {
        self.check_users(&[decoded, known])?;
        let k = self.k();
        if receivers.is_empty() || receivers.iter().any(|&j| j >= k) {
            return arg(format!("invalid receiver group {receivers:?}"));
        }
        if receivers.len() == 1 {
            return self.cmi(decoded, known, receivers[0]);
        }
        let r = receivers.len();
        let cov = |users: &mut dyn Iterator<Item = usize>| {
            let mut m = DMatrix::<f64>::identity(r, r);
            for i in users {
                for (a, &ja) in receivers.iter().enumerate() {
                    for (b, &jb) in receivers.iter().enumerate() {
                        m[(a, b)] += self.gains[ja][i] * self.gains[jb][i] * self.powers[i];
                    }
                }
            }
            m
        };
        let log2det = |m: DMatrix<f64>| -> Result<f64> {
            let c = m.cholesky().ok_or(Error::Numerical {
                what: "covariance determinant",
                value: f64::NAN,
            })?;
            Ok(c.l().diagonal().iter().map(|d| 2.0 * d.log2()).sum())
        };
        let with_signal = cov(&mut (0..k).filter(|i| !known.contains(i)));
        let noise_only = cov(&mut (0..k).filter(|i| !known.contains(i) && !decoded.contains(i)));
        Ok((0.5 * (log2det(with_signal)? - log2det(noise_only)?)).max(0.0))
    }

    pub fn term(&self, t: &MiTerm) -> Result<f64> {
        self.group_cmi(&t.inputs, &t.given, &t.receivers)
    }

    pub fn evaluate(&self, expr: &Expression) -> Result<f64> {
        expr.validate(self.k())?;
        expr.evaluate_with(|t| self.term(t))
    }
}

/// Common ratio `alpha = a_i / b_i` over `decoded`, if it exists with
/// `|alpha| <= 1`; users in neither set must be silent at both receivers.
pub fn proportional_ratio(
    a_row: &[f64],
    b_row: &[f64],
    decoded: &[usize],
    conditioned: &[usize],
) -> Option<f64> {
    let k = a_row.len();
    for i in 0..k {
        if !decoded.contains(&i)
            && !conditioned.contains(&i)
            && (a_row[i] != 0.0 || b_row[i] != 0.0)
        {
            return None;
        }
    }
    let mut alpha: Option<f64> = None;
    for &i in decoded {
        let (a, b) = (a_row[i], b_row[i]);
        if b == 0.0 {
            if a != 0.0 {
                return None;
            }
            continue;
        }
        let r = a / b;
        match alpha {
            None => alpha = Some(r),
            Some(al) => {
                if (r - al).abs() > RATIO_TOL * al.abs().max(r.abs()).max(1.0) {
                    return None;
                }
            }
        }
    }
    let alpha = alpha.unwrap_or(0.0);
    (alpha.abs() <= 1.0 + RATIO_TOL).then_some(alpha)
}

/// Whether receiver `pair.0` is a degraded version of receiver `pair.1` for
/// the decoded users given the conditioned ones, with the common gain ratio.
pub fn check_proportional_degradation(
    ch: &GaussianIC,
    pair: (usize, usize),
    decoded: &[usize],
    conditioned: &[usize],
) -> Result<Option<f64>> {
    if decoded.is_empty() {
        return arg("decoded user set must be nonempty");
    }
    ch.check_users(&[decoded, conditioned])?;
    let k = ch.k();
    if pair.0 >= k || pair.1 >= k {
        return arg(format!("receiver pair {pair:?} out of range"));
    }
    Ok(proportional_ratio(
        &ch.gains[pair.0],
        &ch.gains[pair.1],
        decoded,
        conditioned,
    ))
}

/// Gaussian sufficient condition for one less-noisy hypothesis: the weaker
/// receiver is proportionally degraded relative to the stronger one over
/// every input outside the conditioning set. Receiver groups are not
/// handled and report `None`.
pub fn hypothesis_ratio(ch: &GaussianIC, h: &Inequality) -> Option<f64> {
    if h.weaker.len() != 1 || h.stronger.len() != 1 {
        return None;
    }
    let decoded = h.dependent(ch.k());
    if decoded.is_empty() {
        return Some(0.0);
    }
    proportional_ratio(
        &ch.gains[h.weaker[0]],
        &ch.gains[h.stronger[0]],
        &decoded,
        &h.given,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    ProportionalDegraded,
    ThreeUserSuccessive,
    TwoUserMixed,
    RankOneDegraded,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionOutcome {
    pub id: String,
    pub holds: bool,
    /// Positive when the condition holds with room to spare; equalities
    /// report minus the absolute mismatch.
    pub margin: f64,
}

impl ConditionOutcome {
    fn at_least(id: &str, margin: f64) -> Self {
        ConditionOutcome {
            id: id.to_string(),
            holds: margin >= -MARGIN_TOL,
            margin,
        }
    }

    // 0.0 - diff keeps an exact match at +0
    fn equal(id: &str, lhs: f64, rhs: f64) -> Self {
        let diff = (lhs - rhs).abs();
        ConditionOutcome {
            id: id.to_string(),
            holds: diff <= RATIO_TOL * lhs.abs().max(rhs.abs()).max(1.0),
            margin: 0.0 - diff,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub regime: Regime,
    pub conditions: Vec<ConditionOutcome>,
    pub certified_capacity: Option<f64>,
}

impl RegimeReport {
    pub fn all_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }
}

/// Three-user regime where successive decoding is sum-rate optimal: strong
/// cross links into receiver 1, proportional gains and the power condition
/// `P1 + 1 >= a12^2 (a21^2 P1 + 1)`.
pub fn classify_three_user(ch: &GaussianIC) -> Result<RegimeReport> {
    if ch.k() != 3 {
        return arg(format!("three-user classifier got {} users", ch.k()));
    }
    let n = ch.normalize()?;
    let a = |j: usize, i: usize| n.gain(j - 1, i - 1);
    let p1 = n.power(0);
    let conditions = vec![
        ConditionOutcome::at_least("|a12| >= 1", a(1, 2).abs() - 1.0),
        ConditionOutcome::at_least("|a31| <= 1", 1.0 - a(3, 1).abs()),
        ConditionOutcome::at_least("|a23| >= 1", a(2, 3).abs() - 1.0),
        ConditionOutcome::equal("a31 = a32/a12", a(3, 1) * a(1, 2), a(3, 2)),
        ConditionOutcome::equal("a12 = a13/a23", a(1, 2) * a(2, 3), a(1, 3)),
        ConditionOutcome::at_least(
            "P1 + 1 >= a12^2 (a21^2 P1 + 1)",
            p1 + 1.0 - a(1, 2).powi(2) * (a(2, 1).powi(2) * p1 + 1.0),
        ),
    ];
    let holds = conditions.iter().all(|c| c.holds);
    Ok(RegimeReport {
        regime: if holds {
            Regime::ThreeUserSuccessive
        } else {
            Regime::None
        },
        certified_capacity: if holds {
            Some(sum_capacity_three_user(&n)?)
        } else {
            None
        },
        conditions,
    })
}

/// `min( psi(P1 + a12^2 P2) + psi(P3 / (a31^2 P1 + a32^2 P2 + 1)),
///       psi(P1 + a12^2 P2 + a13^2 P3) )` on the normalized channel.
pub fn sum_capacity_three_user(ch: &GaussianIC) -> Result<f64> {
    if ch.k() != 3 {
        return arg(format!("three-user capacity formula got {} users", ch.k()));
    }
    let n = ch.normalize()?;
    let a = |j: usize, i: usize| n.gain(j - 1, i - 1);
    let p = |i: usize| n.power(i - 1);
    let first = psi_raw(p(1) + a(1, 2).powi(2) * p(2))
        + psi_raw(p(3) / (a(3, 1).powi(2) * p(1) + a(3, 2).powi(2) * p(2) + 1.0));
    let second = psi_raw(p(1) + a(1, 2).powi(2) * p(2) + a(1, 3).powi(2) * p(3));
    Ok(first.min(second))
}

/// Largest sum rate of the successive decoding scheme: each user's rate is
/// the smallest of its decoding constraints across the receivers that decode
/// it.
pub fn successive_decoding_sum_rate(ch: &GaussianIC, order: &DecodeOrder) -> Result<f64> {
    if order.num_users() != ch.k() {
        return arg(format!(
            "decode order covers {} receivers, channel has {}",
            order.num_users(),
            ch.k()
        ));
    }
    let mut total = 0.0;
    for cons in order.constraints() {
        let mut best = f64::INFINITY;
        for t in &cons {
            best = best.min(ch.term(t)?);
        }
        total += best;
    }
    Ok(total)
}

/// Two-user mixed interference: `|a12| >= 1` makes receiver 2 degraded for
/// user 2 given user 1, `|a21| <= 1` makes receiver 2 degraded for user 1
/// given user 2.
pub fn mixed_regime_two_user(ch: &GaussianIC) -> Result<RegimeReport> {
    if ch.k() != 2 {
        return arg(format!("two-user classifier got {} users", ch.k()));
    }
    let n = ch.normalize()?;
    let (a12, a21) = (n.gain(0, 1), n.gain(1, 0));
    let (p1, p2) = (n.power(0), n.power(1));
    let conditions = vec![
        ConditionOutcome::at_least("|a12| >= 1", a12.abs() - 1.0),
        ConditionOutcome::at_least("|a21| <= 1", 1.0 - a21.abs()),
    ];
    let holds = conditions.iter().all(|c| c.holds);
    let capacity =
        (psi_raw(p1 + a12 * a12 * p2)).min(psi_raw(p1) + psi_raw(p2 / (a21 * a21 * p1 + 1.0)));
    Ok(RegimeReport {
        regime: if holds {
            Regime::TwoUserMixed
        } else {
            Regime::None
        },
        conditions,
        certified_capacity: holds.then_some(capacity),
    })
}

/// Numerical rank one: second singular value below `1e-9` times the first.
pub fn rank_one_degraded_check(ch: &GaussianIC) -> bool {
    let k = ch.k();
    let m = DMatrix::from_fn(k, k, |j, i| ch.gain(j, i));
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv[0] > 0.0 && sv[1] < 1e-9 * sv[0]
}

/// Evaluates a bound structure with Gaussian inputs. The result is
/// certified when every hypothesis of the structure holds through
/// proportional degradation.
pub fn outer_bound(ch: &GaussianIC, structure: &BoundStructure) -> Result<BoundResult> {
    let expr = structure.expression(ch.k())?;
    let value = ch.evaluate(&expr)?;
    let certified = structure
        .hypotheses(ch.k())?
        .iter()
        .all(|h| hypothesis_ratio(ch, h).is_some());
    Ok(BoundResult {
        value,
        expression_id: expr.id,
        argmax: None,
        certified,
        search_stats: None,
    })
}

/// Every permutation-cut structure for `k` users.
pub fn all_permutation_cut_structures(k: usize) -> Vec<BoundStructure> {
    fn perms(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(k - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }
    let mut out = Vec::new();
    for perm in perms(k) {
        // cut sets: subsets of 1..k-1 plus k
        for mask in 0u32..(1 << (k - 1)) {
            let mut cuts: Vec<usize> = (1..k).filter(|c| mask & (1 << (c - 1)) != 0).collect();
            cuts.push(k);
            out.push(BoundStructure::PermutationCuts {
                perm: perm.clone(),
                cuts,
            });
        }
    }
    out
}

/// Smallest value among the certified permutation-cut bounds, if any.
pub fn best_certified_bound(ch: &GaussianIC) -> Result<Option<f64>> {
    let mut best: Option<f64> = None;
    for s in all_permutation_cut_structures(ch.k()) {
        let b = outer_bound(ch, &s)?;
        if b.certified {
            best = Some(best.map_or(b.value, |v: f64| v.min(b.value)));
        }
    }
    Ok(best)
}

/// Largest of the successive decoding and treating-interference-as-noise
/// sum rates, both achievable.
pub fn best_achievable(ch: &GaussianIC) -> Result<f64> {
    let sd = successive_decoding_sum_rate(ch, &DecodeOrder::canonical(ch.k()))?;
    let tin = ch.evaluate(&Expression::interference_as_noise(ch.k()))?;
    Ok(sd.max(tin))
}

/// Classifies any channel. The closed-form families come first; otherwise
/// capacity is certified when the best certified permutation-cut bound
/// meets an achievable rate. Rank-one channels are recognised but carry no
/// certified value.
///
/// The report lists the family conditions (two and three users only)
/// followed by the bounds-meet condition.
pub fn classify(ch: &GaussianIC) -> Result<RegimeReport> {
    let family = match ch.k() {
        2 => Some(mixed_regime_two_user(ch)?),
        3 => Some(classify_three_user(ch)?),
        _ => None,
    };
    let inner = best_achievable(ch)?;
    let outer = best_certified_bound(ch)?;
    let meet = ConditionOutcome {
        id: "certified outer bound = achievable rate".into(),
        holds: outer.is_some_and(|o| o - inner <= RATIO_TOL * o.max(1.0)),
        margin: outer.map_or(f64::NEG_INFINITY, |o| inner - o),
    };
    let mut conditions = family.as_ref().map_or(Vec::new(), |f| f.conditions.clone());
    conditions.push(meet.clone());
    let (regime, certified_capacity) = match family {
        Some(f) if f.certified_capacity.is_some() => (f.regime, f.certified_capacity),
        _ if meet.holds => (Regime::ProportionalDegraded, outer),
        _ if rank_one_degraded_check(ch) => (Regime::RankOneDegraded, None),
        _ => (Regime::None, None),
    };
    Ok(RegimeReport {
        regime,
        conditions,
        certified_capacity,
    })
}
