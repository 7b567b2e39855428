//! Sum-rate expressions shared by the Gaussian and discrete models.
//!
//! An [`Expression`] is a minimum over branches, each branch a sum of
//! conditional mutual-information terms `I(X_S; Y_R | X_T, Q)`. Outer bounds
//! are single-branch sums; successive-decoding rates are genuine minima.
//!
//! User and receiver indices are zero-based throughout the library.

use serde::{Deserialize, Serialize};

use crate::discrete::ProductInput;
use crate::error::{arg, Result};

/// `I(X_inputs ; Y_receivers | X_given, Q)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiTerm {
    pub inputs: Vec<usize>,
    pub receivers: Vec<usize>,
    pub given: Vec<usize>,
}

impl MiTerm {
    pub fn new(inputs: &[usize], receivers: &[usize], given: &[usize]) -> Self {
        MiTerm {
            inputs: inputs.to_vec(),
            receivers: receivers.to_vec(),
            given: given.to_vec(),
        }
    }

    fn validate(&self, k: usize) -> Result<()> {
        let all = self.inputs.iter().chain(&self.receivers).chain(&self.given);
        if let Some(&bad) = all.clone().find(|&&i| i >= k) {
            return arg(format!("index {bad} out of range for {k} users"));
        }
        if self.inputs.is_empty() || self.receivers.is_empty() {
            return arg("a term needs at least one input and one receiver");
        }
        if self.inputs.iter().any(|i| self.given.contains(i)) {
            return arg(format!(
                "inputs {:?} overlap conditioning {:?}",
                self.inputs, self.given
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expression {
    pub id: String,
    pub branches: Vec<Vec<MiTerm>>,
}

impl Expression {
    pub fn sum(id: &str, terms: Vec<MiTerm>) -> Self {
        Expression {
            id: id.to_string(),
            branches: vec![terms],
        }
    }

    /// A single sum; time sharing cannot help such objectives.
    pub fn is_sum(&self) -> bool {
        self.branches.len() == 1
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if self.branches.is_empty() || self.branches.iter().any(|b| b.is_empty()) {
            return arg(format!("expression `{}` has an empty branch", self.id));
        }
        self.branches
            .iter()
            .flatten()
            .try_for_each(|t| t.validate(k))
    }

    /// Min over branches of the sum of `term_value` over each branch.
    pub fn evaluate_with<F>(&self, mut term_value: F) -> Result<f64>
    where
        F: FnMut(&MiTerm) -> Result<f64>,
    {
        let mut best = f64::INFINITY;
        for branch in &self.branches {
            let mut s = 0.0;
            for t in branch {
                s += term_value(t)?;
            }
            best = best.min(s);
        }
        Ok(best)
    }

    /// `sum_i I(X_i; Y_i | X_{i+1}, ..., X_K)`.
    pub fn nested_chain(k: usize) -> Self {
        let terms = (0..k)
            .map(|i| MiTerm {
                inputs: vec![i],
                receivers: vec![i],
                given: (i + 1..k).collect(),
            })
            .collect();
        Expression::sum("nested-chain", terms)
    }

    /// `sum_i I(X_i; Y_i)`: every receiver treats interference as noise.
    pub fn interference_as_noise(k: usize) -> Self {
        let terms = (0..k).map(|i| MiTerm::new(&[i], &[i], &[])).collect();
        Expression::sum("interference-as-noise", terms)
    }

    /// Two-user objective `min(I(X1,X2;Y1), I(X1;Y1|X2) + I(X2;Y2))`.
    pub fn two_user_mixed() -> Self {
        Expression {
            id: "two-user-mixed".to_string(),
            branches: vec![
                vec![MiTerm::new(&[0, 1], &[0], &[])],
                vec![MiTerm::new(&[0], &[0], &[1]), MiTerm::new(&[1], &[1], &[])],
            ],
        }
    }

    /// Three-user objective
    /// `min(I(X1,X2;Y1|X3) + I(X3;Y3), I(X1,X2,X3;Y1))`.
    pub fn three_user_successive() -> Self {
        Expression {
            id: "three-user-successive".to_string(),
            branches: vec![
                vec![
                    MiTerm::new(&[0, 1], &[0], &[2]),
                    MiTerm::new(&[2], &[2], &[]),
                ],
                vec![MiTerm::new(&[0, 1, 2], &[0], &[])],
            ],
        }
    }

    /// Rate constraints of a successive-decoding scheme, expanded into the
    /// equivalent minimum of sums: one branch per choice of one binding
    /// constraint for every user.
    pub fn successive_decoding(order: &DecodeOrder) -> Self {
        let per_user = order.constraints();
        let mut branches: Vec<Vec<MiTerm>> = vec![Vec::new()];
        for cons in &per_user {
            branches = branches
                .into_iter()
                .flat_map(|b| {
                    cons.iter().map(move |t| {
                        let mut nb = b.clone();
                        nb.push(t.clone());
                        nb
                    })
                })
                .collect();
        }
        Expression {
            id: "successive-decoding".to_string(),
            branches,
        }
    }
}

/// The three families of single-letter outer bounds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "structure", rename_all = "kebab-case")]
pub enum BoundStructure {
    /// Each user's own link, conditioned on all later users.
    NestedChain,
    /// Users reordered by `perm`, merged into consecutive blocks ending at
    /// the (one-based, strictly increasing) positions in `cuts`; the last cut
    /// must equal K.
    PermutationCuts { perm: Vec<usize>, cuts: Vec<usize> },
    /// Outputs partitioned into groups, each group acting as one receiver
    /// for the inputs of the same indices.
    OutputGroups { groups: Vec<Vec<usize>> },
}

impl BoundStructure {
    pub fn validate(&self, k: usize) -> Result<()> {
        match self {
            BoundStructure::NestedChain => Ok(()),
            BoundStructure::PermutationCuts { perm, cuts } => {
                let mut sorted = perm.clone();
                sorted.sort_unstable();
                if sorted != (0..k).collect::<Vec<_>>() {
                    return arg(format!("{perm:?} is not a permutation of 0..{k}"));
                }
                if cuts.is_empty()
                    || cuts[0] < 1
                    || cuts.windows(2).any(|w| w[0] >= w[1])
                    || *cuts.last().unwrap() != k
                {
                    return arg(format!(
                        "cuts {cuts:?} must be strictly increasing from at least 1 and end at {k}"
                    ));
                }
                Ok(())
            }
            BoundStructure::OutputGroups { groups } => {
                let mut seen = vec![false; k];
                for g in groups {
                    if g.is_empty() {
                        return arg("output groups must be nonempty");
                    }
                    for &j in g {
                        if j >= k {
                            return arg(format!("receiver {j} out of range for {k} users"));
                        }
                        if seen[j] {
                            return arg(format!("receiver {j} appears in two groups"));
                        }
                        seen[j] = true;
                    }
                }
                if seen.iter().any(|s| !s) {
                    return arg("output groups must cover every receiver");
                }
                Ok(())
            }
        }
    }

    /// Blocks of users merged by a permutation-cut structure, in order.
    fn blocks(perm: &[usize], cuts: &[usize]) -> Vec<Vec<usize>> {
        let mut prev = 0;
        cuts.iter()
            .map(|&c| {
                let b = perm[prev..c].to_vec();
                prev = c;
                b
            })
            .collect()
    }

    pub fn expression(&self, k: usize) -> Result<Expression> {
        self.validate(k)?;
        Ok(match self {
            BoundStructure::NestedChain => Expression::nested_chain(k),
            BoundStructure::PermutationCuts { perm, cuts } => {
                let blocks = Self::blocks(perm, cuts);
                let terms = blocks
                    .iter()
                    .enumerate()
                    .map(|(theta, b)| MiTerm {
                        inputs: b.clone(),
                        receivers: vec![*b.last().unwrap()],
                        given: blocks[theta + 1..].iter().flatten().copied().collect(),
                    })
                    .collect();
                Expression::sum("permutation-cuts", terms)
            }
            BoundStructure::OutputGroups { groups } => {
                let terms = groups
                    .iter()
                    .enumerate()
                    .map(|(i, g)| MiTerm {
                        inputs: g.clone(),
                        receivers: g.clone(),
                        given: groups[i + 1..].iter().flatten().copied().collect(),
                    })
                    .collect();
                Expression::sum("output-groups", terms)
            }
        })
    }

    /// The less-noisy hypotheses under which the structure's expression is
    /// an outer bound on the sum capacity.
    pub fn hypotheses(&self, k: usize) -> Result<Vec<Inequality>> {
        self.validate(k)?;
        let mut out = Vec::new();
        match self {
            BoundStructure::NestedChain => {
                for i in 1..k {
                    out.push(Inequality::new(
                        format!("nested-chain[{}]", i + 1),
                        true,
                        vec![],
                        (i..k).collect(),
                        vec![i],
                        vec![i - 1],
                    ));
                }
            }
            BoundStructure::PermutationCuts { perm, cuts } => {
                let lam = |l: usize| perm[l - 1];
                let from = |l0: usize| (l0..=k).map(lam).collect::<Vec<_>>();
                // merging inside the first block
                for w in 1..cuts[0] {
                    out.push(Inequality::new(
                        format!("first-block[{w}]"),
                        false,
                        (1..=w).map(lam).collect(),
                        from(w + 1),
                        vec![lam(w)],
                        vec![lam(w + 1)],
                    ));
                }
                // merging inside later blocks
                for theta in 0..cuts.len() - 1 {
                    let start = cuts[theta];
                    for w in 1..cuts[theta + 1] - start {
                        out.push(Inequality::new(
                            format!("block{}[{w}]", theta + 2),
                            true,
                            (start + 1..=start + w).map(lam).collect(),
                            from(start + w + 1),
                            vec![lam(start + w)],
                            vec![lam(start + w + 1)],
                        ));
                    }
                }
                // ordering between consecutive block representatives
                for theta in 1..cuts.len() {
                    out.push(Inequality::new(
                        format!("cut[{}]", theta + 1),
                        true,
                        vec![],
                        from(cuts[theta - 1] + 1),
                        vec![lam(cuts[theta])],
                        vec![lam(cuts[theta - 1])],
                    ));
                }
            }
            BoundStructure::OutputGroups { groups } => {
                for i in 1..groups.len() {
                    let mut ineq = Inequality::new(
                        format!("group[{}]", i + 1),
                        true,
                        vec![],
                        groups[i..].iter().flatten().copied().collect(),
                        groups[i].clone(),
                        groups[i - 1].clone(),
                    );
                    ineq.blocks = groups[i..].to_vec();
                    out.push(ineq);
                }
            }
        }
        Ok(out)
    }
}

/// One universally quantified inequality
/// `I(U, X_inputs; Y_weaker | X_given) <= I(U, X_inputs; Y_stronger | X_given)`
/// over all laws where `U` and the non-given inputs are jointly distributed
/// and the given inputs are drawn independently block by block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inequality {
    pub id: String,
    pub with_aux: bool,
    pub inputs: Vec<usize>,
    pub given: Vec<usize>,
    pub weaker: Vec<usize>,
    pub stronger: Vec<usize>,
    /// Partition of `given` into independently drawn blocks.
    pub blocks: Vec<Vec<usize>>,
}

impl Inequality {
    pub fn new(
        id: String,
        with_aux: bool,
        inputs: Vec<usize>,
        given: Vec<usize>,
        weaker: Vec<usize>,
        stronger: Vec<usize>,
    ) -> Self {
        let blocks = given.iter().map(|&g| vec![g]).collect();
        Inequality {
            id,
            with_aux,
            inputs,
            given,
            weaker,
            stronger,
            blocks,
        }
    }

    /// Inputs jointly distributed with the auxiliary variable.
    pub fn dependent(&self, k: usize) -> Vec<usize> {
        (0..k).filter(|i| !self.given.contains(i)).collect()
    }

    pub fn reversed(&self) -> Self {
        let mut r = self.clone();
        std::mem::swap(&mut r.weaker, &mut r.stronger);
        r.id = format!("{}(reversed)", self.id);
        r
    }
}

/// Per-receiver successive decoding lists; each list ends with the
/// receiver's own user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeOrder {
    lists: Vec<Vec<usize>>,
}

impl DecodeOrder {
    pub fn new(lists: Vec<Vec<usize>>) -> Result<Self> {
        let k = lists.len();
        if k == 0 {
            return arg("decode order needs at least one receiver");
        }
        for (j, l) in lists.iter().enumerate() {
            if l.last() != Some(&j) {
                return arg(format!("receiver {j} must decode its own user last"));
            }
            if let Some(&bad) = l.iter().find(|&&u| u >= k) {
                return arg(format!("receiver {j} decodes unknown user {bad}"));
            }
            let mut s = l.clone();
            s.sort_unstable();
            if s.windows(2).any(|w| w[0] == w[1]) {
                return arg(format!("receiver {j} decodes a user twice"));
            }
        }
        Ok(DecodeOrder { lists })
    }

    /// Receiver `j` decodes users `K-1, K-2, ..., j` in that order.
    pub fn canonical(k: usize) -> Self {
        DecodeOrder {
            lists: (0..k).map(|j| (j..k).rev().collect()).collect(),
        }
    }

    pub fn lists(&self) -> &[Vec<usize>] {
        &self.lists
    }

    pub fn num_users(&self) -> usize {
        self.lists.len()
    }

    /// For each user, the rate constraints `I(X_u; Y_j | X_already_decoded)`
    /// at every receiver that decodes it.
    pub fn constraints(&self) -> Vec<Vec<MiTerm>> {
        let mut per_user = vec![Vec::new(); self.lists.len()];
        for (j, l) in self.lists.iter().enumerate() {
            for (pos, &u) in l.iter().enumerate() {
                per_user[u].push(MiTerm::new(&[u], &[j], &l[..pos]));
            }
        }
        per_user
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct SearchStats {
    pub restarts: usize,
    pub iterations: usize,
    pub trace_len: usize,
}

/// A bound or capacity value together with how it was obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub value: f64,
    pub expression_id: String,
    pub argmax: Option<ProductInput>,
    /// True only when the expression's hypotheses were verified: analytically
    /// for Gaussian channels, by an unsuccessful counterexample search for
    /// discrete ones.
    pub certified: bool,
    pub search_stats: Option<SearchStats>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_matches_three_user_scheme() {
        let o = DecodeOrder::canonical(3);
        assert_eq!(o.lists(), &[vec![2, 1, 0], vec![2, 1], vec![2]]);
        let e = Expression::successive_decoding(&o);
        assert_eq!(e.branches.len(), 6);
    }

    #[test]
    fn decode_order_validation() {
        assert!(DecodeOrder::new(vec![vec![1, 0], vec![1]]).is_ok());
        assert!(DecodeOrder::new(vec![vec![0, 1], vec![1]]).is_err());
        assert!(DecodeOrder::new(vec![vec![0], vec![1, 1]]).is_err());
        assert!(DecodeOrder::new(vec![vec![2, 0], vec![1]]).is_err());
    }

    #[test]
    fn permutation_cut_validation() {
        let ok = BoundStructure::PermutationCuts {
            perm: vec![1, 0, 2],
            cuts: vec![2, 3],
        };
        assert!(ok.validate(3).is_ok());
        for (perm, cuts) in [
            (vec![1, 0, 2], vec![2, 2, 3]),
            (vec![1, 0, 2], vec![3, 2]),
            (vec![1, 0, 2], vec![2]),
            (vec![1, 1, 2], vec![3]),
            (vec![1, 0, 2], vec![0, 3]),
        ] {
            assert!(BoundStructure::PermutationCuts { perm, cuts }
                .validate(3)
                .is_err());
        }
    }

    #[test]
    fn output_group_validation() {
        let g = |v: Vec<Vec<usize>>| BoundStructure::OutputGroups { groups: v };
        assert!(g(vec![vec![0, 1], vec![2]]).validate(3).is_ok());
        assert!(g(vec![vec![0, 1], vec![1, 2]]).validate(3).is_err());
        assert!(g(vec![vec![0], vec![2]]).validate(3).is_err());
        assert!(g(vec![vec![0, 1, 2], vec![]]).validate(3).is_err());
    }

    #[test]
    fn permutation_cut_expression_shape() {
        let s = BoundStructure::PermutationCuts {
            perm: vec![1, 0, 2],
            cuts: vec![2, 3],
        };
        let e = s.expression(3).unwrap();
        assert_eq!(
            e.branches[0],
            vec![
                MiTerm::new(&[1, 0], &[0], &[2]),
                MiTerm::new(&[2], &[2], &[])
            ]
        );
        let s = BoundStructure::PermutationCuts {
            perm: vec![2, 1, 0],
            cuts: vec![3],
        };
        let e = s.expression(3).unwrap();
        assert_eq!(e.branches[0], vec![MiTerm::new(&[2, 1, 0], &[0], &[])]);
    }

    #[test]
    fn permutation_cut_hypotheses_for_three_users() {
        let s = BoundStructure::PermutationCuts {
            perm: vec![1, 0, 2],
            cuts: vec![2, 3],
        };
        let h = s.hypotheses(3).unwrap();
        assert_eq!(h.len(), 2);
        // I(X2;Y2|X1,X3) <= I(X2;Y1|X1,X3)
        assert_eq!(h[0].inputs, vec![1]);
        assert_eq!(h[0].given, vec![0, 2]);
        assert_eq!((h[0].weaker[0], h[0].stronger[0]), (1, 0));
        assert!(!h[0].with_aux);
        // I(U;Y3|X3) <= I(U;Y1|X3)
        assert_eq!(h[1].given, vec![2]);
        assert_eq!((h[1].weaker[0], h[1].stronger[0]), (2, 0));
        assert!(h[1].with_aux);

        let s = BoundStructure::PermutationCuts {
            perm: vec![2, 1, 0],
            cuts: vec![3],
        };
        let h = s.hypotheses(3).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!((h[0].weaker[0], h[0].stronger[0]), (2, 1));
        assert_eq!(h[0].given, vec![1, 0]);
        assert_eq!((h[1].weaker[0], h[1].stronger[0]), (1, 0));
        assert_eq!(h[1].inputs, vec![2, 1]);
        assert_eq!(h[1].given, vec![0]);
    }

    #[test]
    fn nested_chain_hypotheses() {
        let h = BoundStructure::NestedChain.hypotheses(3).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!(h[0].given, vec![1, 2]);
        assert_eq!((h[0].weaker[0], h[0].stronger[0]), (1, 0));
        assert_eq!(h[1].given, vec![2]);
    }

    #[test]
    fn min_of_sums_evaluation() {
        let e = Expression::two_user_mixed();
        let v = e
            .evaluate_with(|t| Ok(t.inputs.len() as f64 + t.given.len() as f64))
            .unwrap();
        // branch 1: 2, branch 2: (1+1) + 1 = 3
        assert_eq!(v, 2.0);
    }
}
