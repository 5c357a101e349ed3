//! Ground-truth solver: dense value iteration over an explicitly enumerated
//! MDP. Learned policies are graded against its output.

use thiserror::Error;

const ROW_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("transition tensor has {len} entries, expected states*actions*states = {expected}")]
    BadTransitionShape { len: usize, expected: usize },
    #[error("reward matrix has {len} entries, expected states*actions = {expected}")]
    BadRewardShape { len: usize, expected: usize },
    #[error("transition row (s={state}, a={action}) sums to {sum}, expected 1 within 1e-9")]
    RowNotStochastic { state: usize, action: usize, sum: f64 },
    #[error("transition entry (s={state}, a={action}, s'={next}) = {value} is negative")]
    NegativeEntry { state: usize, action: usize, next: usize, value: f64 },
    #[error("reward (s={state}, a={action}) is not finite")]
    NonFiniteReward { state: usize, action: usize },
    #[error("gamma = {0} is outside [0, 1)")]
    BadGamma(f64),
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("dense tensor would need {entries} entries, above the {ceiling} ceiling")]
    TooLarge { entries: usize, ceiling: usize },
    #[error("policy length {len} does not match {states} states")]
    BadPolicyLength { len: usize, states: usize },
}

/// Dense ceiling on states * actions * states.
pub const DENSE_ENTRY_CEILING: usize = 100_000_000;

/// Enumerated finite MDP with dense transition and reward tensors.
///
/// `transition` is indexed `[s * actions * states + a * states + s']`,
/// `reward` is indexed `[s * actions + a]`.
#[derive(Clone, Debug)]
pub struct ExplicitMdp {
    pub states: usize,
    pub actions: usize,
    pub transition: Vec<f64>,
    pub reward: Vec<f64>,
    pub gamma: f64,
}

impl ExplicitMdp {
    pub fn validate(&self) -> Result<(), OracleError> {
        let s = self.states;
        let a = self.actions;
        let entries = s
            .checked_mul(a)
            .and_then(|x| x.checked_mul(s))
            .ok_or(OracleError::TooLarge { entries: usize::MAX, ceiling: DENSE_ENTRY_CEILING })?;
        if entries > DENSE_ENTRY_CEILING {
            return Err(OracleError::TooLarge { entries, ceiling: DENSE_ENTRY_CEILING });
        }
        if self.transition.len() != entries {
            return Err(OracleError::BadTransitionShape { len: self.transition.len(), expected: entries });
        }
        if self.reward.len() != s * a {
            return Err(OracleError::BadRewardShape { len: self.reward.len(), expected: s * a });
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(OracleError::BadGamma(self.gamma));
        }
        for state in 0..s {
            for action in 0..a {
                let row = self.row(state, action);
                let mut sum = 0.0;
                for (next, &p) in row.iter().enumerate() {
                    if p < 0.0 {
                        return Err(OracleError::NegativeEntry { state, action, next, value: p });
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(OracleError::RowNotStochastic { state, action, sum });
                }
                if !self.reward[state * a + action].is_finite() {
                    return Err(OracleError::NonFiniteReward { state, action });
                }
            }
        }
        Ok(())
    }

    #[inline]
    pub fn row(&self, state: usize, action: usize) -> &[f64] {
        let base = (state * self.actions + action) * self.states;
        &self.transition[base..base + self.states]
    }

    #[inline]
    pub fn reward_at(&self, state: usize, action: usize) -> f64 {
        self.reward[state * self.actions + action]
    }
}

/// Optimal values and greedy policy returned by [`value_iteration`].
#[derive(Clone, Debug)]
pub struct Solution {
    pub values: Vec<f64>,
    pub policy: Vec<usize>,
    pub iterations: usize,
    /// Sup-norm change of each sweep, for convergence diagnostics.
    pub sweep_deltas: Vec<f64>,
}

fn backup(mdp: &ExplicitMdp, values: &[f64], state: usize) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut best_action = 0;
    for action in 0..mdp.actions {
        let row = mdp.row(state, action);
        let mut expected = 0.0;
        for (next, &p) in row.iter().enumerate() {
            if p > 0.0 {
                expected += p * values[next];
            }
        }
        let q = mdp.reward_at(state, action) + mdp.gamma * expected;
        // Ties break to the lowest action index.
        if q > best {
            best = q;
            best_action = action;
        }
    }
    (best, best_action)
}

/// Iterate Bellman optimality backups until the sup-norm change drops
/// below `tol`; the fixed-point error is then at most `tol * gamma / (1 - gamma)`.
pub fn value_iteration(mdp: &ExplicitMdp, tol: f64) -> Result<Solution, OracleError> {
    mdp.validate()?;
    if !(tol > 0.0) {
        return Err(OracleError::BadTolerance(tol));
    }
    let mut values = vec![0.0; mdp.states];
    let mut next = vec![0.0; mdp.states];
    let mut sweep_deltas = Vec::new();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut delta: f64 = 0.0;
        for state in 0..mdp.states {
            let (v, _) = backup(mdp, &values, state);
            delta = delta.max((v - values[state]).abs());
            next[state] = v;
        }
        std::mem::swap(&mut values, &mut next);
        sweep_deltas.push(delta);
        if delta < tol {
            break;
        }
    }
    let policy = (0..mdp.states).map(|s| backup(mdp, &values, s).1).collect();
    Ok(Solution { values, policy, iterations, sweep_deltas })
}

/// Evaluate a fixed policy by iterating its Bellman operator to `tol`.
pub fn policy_value(mdp: &ExplicitMdp, policy: &[usize], tol: f64) -> Result<Vec<f64>, OracleError> {
    mdp.validate()?;
    if !(tol > 0.0) {
        return Err(OracleError::BadTolerance(tol));
    }
    if policy.len() != mdp.states {
        return Err(OracleError::BadPolicyLength { len: policy.len(), states: mdp.states });
    }
    let mut values = vec![0.0; mdp.states];
    let mut next = vec![0.0; mdp.states];
    loop {
        let mut delta: f64 = 0.0;
        for state in 0..mdp.states {
            let action = policy[state];
            let row = mdp.row(state, action);
            let mut expected = 0.0;
            for (n, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    expected += p * values[n];
                }
            }
            let v = mdp.reward_at(state, action) + mdp.gamma * expected;
            delta = delta.max((v - values[state]).abs());
            next[state] = v;
        }
        std::mem::swap(&mut values, &mut next);
        if delta < tol {
            return Ok(values);
        }
    }
}

/// States reachable from `start` following `policy` over the support of the
/// transition tensor.
pub fn reachable_states(mdp: &ExplicitMdp, policy: &[usize], start: usize) -> Vec<usize> {
    let mut seen = vec![false; mdp.states];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(state) = stack.pop() {
        let row = mdp.row(state, policy[state]);
        for (next, &p) in row.iter().enumerate() {
            if p > 0.0 && !seen[next] {
                seen[next] = true;
                stack.push(next);
            }
        }
    }
    (0..mdp.states).filter(|&s| seen[s]).collect()
}

/// Fraction of states in `restrict_to` where the two policies agree.
pub fn policy_match(p1: &[usize], p2: &[usize], restrict_to: &[usize]) -> f64 {
    assert_eq!(p1.len(), p2.len(), "policies must cover the same state space");
    if restrict_to.is_empty() {
        return 1.0;
    }
    let agree = restrict_to.iter().filter(|&&s| p1[s] == p2[s]).count();
    agree as f64 / restrict_to.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn single_state_mdp(reward: f64, gamma: f64) -> ExplicitMdp {
        ExplicitMdp {
            states: 1,
            actions: 1,
            transition: vec![1.0],
            reward: vec![reward],
            gamma,
        }
    }

    /// Independent oracle: enumerate every deterministic policy and
    /// evaluate each one; the best must agree with value iteration.
    fn best_policy_by_enumeration(mdp: &ExplicitMdp, tol: f64) -> (Vec<usize>, Vec<f64>) {
        let total = mdp.actions.pow(mdp.states as u32);
        let mut best: Option<(Vec<usize>, Vec<f64>)> = None;
        for code in 0..total {
            let mut c = code;
            let policy: Vec<usize> = (0..mdp.states)
                .map(|_| {
                    let a = c % mdp.actions;
                    c /= mdp.actions;
                    a
                })
                .collect();
            let values = policy_value(mdp, &policy, tol).unwrap();
            let better = match &best {
                None => true,
                Some((_, v)) => values.iter().zip(v.iter()).map(|(a, b)| a - b).sum::<f64>() > 0.0,
            };
            if better {
                best = Some((policy, values));
            }
        }
        best.unwrap()
    }

    #[test]
    fn geometric_series_single_state() {
        let sol = value_iteration(&single_state_mdp(1.0, 0.1), 1e-9).unwrap();
        assert!((sol.values[0] - 1.0 / 0.9).abs() < 1e-8);
        assert_eq!(sol.policy, vec![0]);
    }

    #[test]
    fn two_state_deterministic_chain() {
        // s0 -> s1 reward 0, s1 -> s1 reward 1, gamma 0.5.
        let mdp = ExplicitMdp {
            states: 2,
            actions: 1,
            transition: vec![0.0, 1.0, 0.0, 1.0],
            reward: vec![0.0, 1.0],
            gamma: 0.5,
        };
        let sol = value_iteration(&mdp, 1e-10).unwrap();
        assert!((sol.values[1] - 2.0).abs() < 1e-8);
        assert!((sol.values[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn two_state_two_action_matches_policy_enumeration() {
        // s0: a0 stays (reward 0), a1 goes to s1 (reward 1).
        // s1: a0 stays (reward 2), a1 goes to s0 (reward 0).
        let mdp = ExplicitMdp {
            states: 2,
            actions: 2,
            transition: vec![
                1.0, 0.0, // s0 a0
                0.0, 1.0, // s0 a1
                0.0, 1.0, // s1 a0
                1.0, 0.0, // s1 a1
            ],
            reward: vec![0.0, 1.0, 2.0, 0.0],
            gamma: 0.9,
        };
        let sol = value_iteration(&mdp, 1e-10).unwrap();
        assert_eq!(sol.policy, vec![1, 0]);
        assert!((sol.values[1] - 20.0).abs() < 1e-6);
        assert!((sol.values[0] - 19.0).abs() < 1e-6);

        let (best_policy, best_values) = best_policy_by_enumeration(&mdp, 1e-10);
        assert_eq!(sol.policy, best_policy);
        for (a, b) in sol.values.iter().zip(best_values.iter()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_invalid_tensors() {
        let mut mdp = single_state_mdp(1.0, 0.5);
        mdp.transition = vec![0.5];
        assert!(matches!(
            value_iteration(&mdp, 1e-9),
            Err(OracleError::RowNotStochastic { .. })
        ));
        let mut mdp = single_state_mdp(1.0, 0.5);
        mdp.gamma = 1.0;
        assert!(matches!(value_iteration(&mdp, 1e-9), Err(OracleError::BadGamma(_))));
        let mdp = single_state_mdp(1.0, 0.5);
        assert!(matches!(
            value_iteration(&mdp, 0.0),
            Err(OracleError::BadTolerance(_))
        ));
        let mut mdp = single_state_mdp(1.0, 0.5);
        mdp.reward = vec![f64::NAN];
        assert!(matches!(
            value_iteration(&mdp, 1e-9),
            Err(OracleError::NonFiniteReward { .. })
        ));
    }

    fn random_mdp(states: usize, actions: usize, gamma: f64, rng: &mut SeededRng) -> ExplicitMdp {
        let mut transition = Vec::with_capacity(states * actions * states);
        let mut reward = Vec::with_capacity(states * actions);
        for _ in 0..states * actions {
            let raw: Vec<f64> = (0..states).map(|_| rng.next_f64() + 1e-3).collect();
            let sum: f64 = raw.iter().sum();
            transition.extend(raw.iter().map(|x| x / sum));
            reward.push(rng.uniform(-1.0, 1.0));
        }
        ExplicitMdp { states, actions, transition, reward, gamma }
    }

    #[test]
    fn sweeps_contract_by_gamma() {
        let mut rng = SeededRng::new(17);
        let mdp = random_mdp(12, 3, 0.8, &mut rng);
        let sol = value_iteration(&mdp, 1e-10).unwrap();
        for pair in sol.sweep_deltas.windows(2) {
            assert!(
                pair[1] <= mdp.gamma * pair[0] + 1e-12,
                "sweep change {} after {}",
                pair[1],
                pair[0]
            );
        }
    }

    #[test]
    fn greedy_policy_is_a_fixed_point() {
        let mut rng = SeededRng::new(23);
        let mdp = random_mdp(10, 4, 0.9, &mut rng);
        let sol = value_iteration(&mdp, 1e-12).unwrap();
        let again: Vec<usize> = (0..mdp.states).map(|s| backup(&mdp, &sol.values, s).1).collect();
        assert_eq!(sol.policy, again);
    }

    #[test]
    fn optimal_policy_dominates_on_exhaustive_small_mdps() {
        // All MDPs with <= 64 deterministic policies: 3 states x 2 actions = 8,
        // 2 states x 4 actions = 16, 3 states x 3 actions = 27.
        let mut rng = SeededRng::new(31);
        for (s, a) in [(3, 2), (2, 4), (3, 3)] {
            let mdp = random_mdp(s, a, 0.85, &mut rng);
            let sol = value_iteration(&mdp, 1e-11).unwrap();
            let opt = policy_value(&mdp, &sol.policy, 1e-11).unwrap();
            let total = a.pow(s as u32);
            for code in 0..total {
                let mut c = code;
                let policy: Vec<usize> = (0..s)
                    .map(|_| {
                        let x = c % a;
                        c /= a;
                        x
                    })
                    .collect();
                let v = policy_value(&mdp, &policy, 1e-11).unwrap();
                for (pv, ov) in v.iter().zip(opt.iter()) {
                    assert!(*pv <= ov + 1e-7);
                }
            }
        }
    }

    #[test]
    fn random_policies_never_beat_optimal_on_many_mdps() {
        let mut rng = SeededRng::new(41);
        for _ in 0..100 {
            let mdp = random_mdp(10, 3, 0.9, &mut rng);
            let sol = value_iteration(&mdp, 1e-10).unwrap();
            let policy: Vec<usize> = (0..10).map(|_| rng.next_below(3)).collect();
            let v = policy_value(&mdp, &policy, 1e-10).unwrap();
            for (pv, ov) in v.iter().zip(sol.values.iter()) {
                assert!(*pv <= ov + 1e-6);
            }
        }
    }

    #[test]
    fn policy_evaluation_examples() {
        // One state, two actions with rewards 0 and 1; evaluating the
        // reward-0 policy gives 0.
        let mdp = ExplicitMdp {
            states: 1,
            actions: 2,
            transition: vec![1.0, 1.0],
            reward: vec![0.0, 1.0],
            gamma: 0.5,
        };
        let v = policy_value(&mdp, &[0], 1e-10).unwrap();
        assert!(v[0].abs() < 1e-9);
        let sol = value_iteration(&mdp, 1e-10).unwrap();
        let opt = policy_value(&mdp, &sol.policy, 1e-10).unwrap();
        assert!((opt[0] - sol.values[0]).abs() < 2e-10);
    }

    #[test]
    fn policy_match_counts() {
        let all: Vec<usize> = (0..20).collect();
        let p1: Vec<usize> = vec![1; 20];
        assert_eq!(policy_match(&p1, &p1, &all), 1.0);
        let p2: Vec<usize> = vec![0; 20];
        assert_eq!(policy_match(&p1, &p2, &all), 0.0);
        let mut p3 = p1.clone();
        p3[7] = 0;
        assert!((policy_match(&p1, &p3, &all) - 0.95).abs() < 1e-12);
    }

    #[test]
    fn reachability_walks_the_support() {
        // s0 -a0-> s1 -a0-> s1; s2 unreachable.
        let mdp = ExplicitMdp {
            states: 3,
            actions: 1,
            transition: vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            reward: vec![0.0; 3],
            gamma: 0.5,
        };
        assert_eq!(reachable_states(&mdp, &[0, 0, 0], 0), vec![0, 1]);
    }
}
