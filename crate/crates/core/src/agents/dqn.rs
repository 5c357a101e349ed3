//! Deep Q-learning over a sliding window of recent state-action pairs,
//! with experience replay and a periodically synchronized target network.

use std::collections::VecDeque;

use super::nn::{NetError, NetSpec, QNetwork, RegressionSample};
use super::qtable::epsilon_greedy;
use super::replay::ReplayPool;
use crate::offload::Transition;
use crate::rng::SeededRng;

/// Network and training knobs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DqnConfig {
    /// Number of recent (state, action) pairs fed to the network.
    pub window: usize,
    pub conv1_filters: usize,
    pub conv1_kernel: usize,
    pub conv2_filters: usize,
    pub conv2_kernel: usize,
    pub hidden: usize,
    pub replay_capacity: usize,
    pub minibatch: usize,
    pub sgd_lr: f64,
    /// Target network refresh period, in training steps.
    pub target_sync_period: usize,
}

impl Default for DqnConfig {
    fn default() -> Self {
        DqnConfig {
            window: 8,
            conv1_filters: 8,
            conv1_kernel: 3,
            conv2_filters: 8,
            conv2_kernel: 3,
            hidden: 32,
            replay_capacity: 2048,
            minibatch: 32,
            sgd_lr: 0.05,
            target_sync_period: 100,
        }
    }
}

impl DqnConfig {
    pub fn net_spec(&self, state_dim: usize, num_actions: usize) -> NetSpec {
        NetSpec {
            window: self.window,
            channels: state_dim + 1,
            conv1_filters: self.conv1_filters,
            conv1_kernel: self.conv1_kernel,
            conv2_filters: self.conv2_filters,
            conv2_kernel: self.conv2_kernel,
            hidden: self.hidden,
            outputs: num_actions,
        }
    }
}

/// Rolling window of the last W (state, action) pairs, flattened time-major
/// into the network's input layout. Slots before the first push read as
/// zeros. The action occupies one extra column scaled to (0, 1], with 0
/// reserved for "no action yet" (padding and the reset observation).
#[derive(Clone, Debug)]
pub struct InputWindow {
    window: usize,
    state_dim: usize,
    num_actions: usize,
    rows: VecDeque<Vec<f64>>,
}

impl InputWindow {
    pub fn new(window: usize, state_dim: usize, num_actions: usize) -> Self {
        assert!(window > 0 && state_dim > 0 && num_actions > 0);
        InputWindow { window, state_dim, num_actions, rows: VecDeque::with_capacity(window) }
    }

    /// Append one row: the observed state plus the action that led to it
    /// (`None` at reset).
    pub fn push(&mut self, state: &[f64], action: Option<usize>) {
        assert_eq!(state.len(), self.state_dim);
        let mut row = Vec::with_capacity(self.state_dim + 1);
        row.extend_from_slice(state);
        let norm = match action {
            Some(a) => (a + 1) as f64 / self.num_actions as f64,
            None => 0.0,
        };
        row.push(norm);
        if self.rows.len() == self.window {
            self.rows.pop_front();
        }
        self.rows.push_back(row);
    }

    /// Flat `window x (state_dim + 1)` input, oldest row first,
    /// zero-padded at the front until the window fills.
    pub fn as_input(&self) -> Vec<f64> {
        let channels = self.state_dim + 1;
        let mut out = vec![0.0; self.window * channels];
        let pad = self.window - self.rows.len();
        for (i, row) in self.rows.iter().enumerate() {
            let base = (pad + i) * channels;
            out[base..base + channels].copy_from_slice(row);
        }
        out
    }
}

/// The DQN defender: policy network, lagged target copy, replay pool.
#[derive(Clone, Debug)]
pub struct DqnAgent {
    net: QNetwork,
    target: QNetwork,
    pool: ReplayPool<Transition<Vec<f64>>>,
    cfg: DqnConfig,
    gamma: f64,
    replay_rng: SeededRng,
    train_steps: u64,
}

impl DqnAgent {
    pub fn new(
        state_dim: usize,
        num_actions: usize,
        cfg: DqnConfig,
        gamma: f64,
        init_rng: &mut SeededRng,
        replay_rng: SeededRng,
    ) -> Result<Self, NetError> {
        let net = QNetwork::new(cfg.net_spec(state_dim, num_actions), init_rng)?;
        let target = net.clone();
        Ok(DqnAgent {
            pool: ReplayPool::new(cfg.replay_capacity),
            net,
            target,
            cfg,
            gamma,
            replay_rng,
            train_steps: 0,
        })
    }

    pub fn config(&self) -> &DqnConfig {
        &self.cfg
    }

    pub fn network(&self) -> &QNetwork {
        &self.net
    }

    /// Replace the policy network weights (hotbooting) and resync the target.
    pub fn load_network(&mut self, net: QNetwork) -> Result<(), NetError> {
        if net.spec() != self.net.spec() {
            return Err(NetError::SpecMismatch {
                expected: self.net.spec().signature(),
                found: net.spec().signature(),
            });
        }
        self.target = net.clone();
        self.net = net;
        Ok(())
    }

    pub fn q_values(&self, input: &[f64]) -> Vec<f64> {
        self.net.forward(input).expect("input assembled by InputWindow")
    }

    pub fn select(&self, input: &[f64], eps: f64, rng: &mut SeededRng) -> usize {
        epsilon_greedy(&self.q_values(input), eps, rng)
    }

    /// Store one transition and train: sample a minibatch with
    /// replacement, regress toward `reward + gamma * max target(next)`,
    /// take one SGD step, and refresh the target network every
    /// `target_sync_period` steps. Returns the minibatch loss.
    pub fn observe(&mut self, transition: Transition<Vec<f64>>) -> f64 {
        self.pool.push(transition);
        let batch: Vec<RegressionSample> = self
            .pool
            .sample_indices(self.cfg.minibatch, &mut self.replay_rng)
            .into_iter()
            .map(|i| {
                let t = self.pool.get(i);
                let next_best = self
                    .target
                    .forward(&t.next_state)
                    .expect("stored windows match the net")
                    .into_iter()
                    .fold(f64::NEG_INFINITY, f64::max);
                RegressionSample {
                    input: t.state.clone(),
                    action: t.action,
                    target: t.reward + self.gamma * next_best,
                }
            })
            .collect();
        let (loss, grads) = self.net.loss_and_gradients(&batch).expect("batch shapes fixed");
        self.net.sgd_step(&grads, self.cfg.sgd_lr);
        self.train_steps += 1;
        if self.train_steps % self.cfg.target_sync_period as u64 == 0 {
            self.target = self.net.clone();
        }
        loss
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn agent(gamma: f64, seed: u64) -> DqnAgent {
        let mut cfg = DqnConfig::default();
        cfg.window = 6;
        cfg.hidden = 8;
        cfg.conv1_filters = 3;
        cfg.conv2_filters = 3;
        cfg.minibatch = 8;
        cfg.sgd_lr = 0.02;
        let mut init = SeededRng::for_stream(seed, Stream::AgentInit);
        DqnAgent::new(3, 4, cfg, gamma, &mut init, SeededRng::for_stream(seed, Stream::Replay))
            .unwrap()
    }

    #[test]
    fn window_pads_then_slides() {
        let mut w = InputWindow::new(3, 2, 4);
        assert_eq!(w.as_input(), vec![0.0; 9]);
        w.push(&[0.5, 0.25], Some(3));
        let input = w.as_input();
        assert_eq!(&input[0..6], &[0.0; 6]);
        assert_eq!(&input[6..9], &[0.5, 0.25, 1.0]);
        w.push(&[0.1, 0.2], None);
        w.push(&[0.3, 0.4], Some(1));
        w.push(&[0.5, 0.6], Some(2));
        let input = w.as_input();
        assert_eq!(&input[0..3], &[0.1, 0.2, 0.0]);
        assert_eq!(&input[6..9], &[0.5, 0.6, 0.75]);
    }

    /// Myopic regression to a single repeated transition behaves like
    /// supervised learning: the loss falls monotonically.
    #[test]
    fn single_transition_loss_decreases_monotonically() {
        let mut agent = agent(0.0, 77);
        let window_len = agent.net.spec().input_len();
        let transition = Transition {
            state: vec![0.3; window_len],
            action: 2,
            reward: 1.0,
            next_state: vec![0.1; window_len],
        };
        let mut prev = f64::INFINITY;
        for _ in 0..100 {
            let loss = agent.observe(transition.clone());
            assert!(loss <= prev + 1e-12, "loss rose: {prev} -> {loss}");
            prev = loss;
        }
        assert!(prev < 1e-3, "loss stuck at {prev}");
    }

    #[test]
    fn replay_pool_is_bounded_fifo() {
        let mut agent = agent(0.5, 78);
        let window_len = agent.net.spec().input_len();
        let cap = agent.config().replay_capacity;
        for i in 0..cap + 10 {
            let t = Transition {
                state: vec![i as f64; window_len],
                action: 0,
                reward: 0.0,
                next_state: vec![0.0; window_len],
            };
            agent.observe(t);
        }
        assert_eq!(agent.pool.len(), cap);
        assert_eq!(agent.pool.get(0).state[0], 10.0);
    }

    #[test]
    fn hotboot_swap_requires_matching_spec() {
        let mut a = agent(0.5, 79);
        let b = agent(0.5, 80);
        let before = a.q_values(&vec![0.2; a.net.spec().input_len()]);
        a.load_network(b.network().clone()).unwrap();
        let after = a.q_values(&vec![0.2; a.net.spec().input_len()]);
        assert_ne!(before, after);

        let mut other_spec = *b.network().spec();
        other_spec.outputs = 7;
        let wrong = QNetwork::zeros(other_spec).unwrap();
        assert!(matches!(a.load_network(wrong), Err(NetError::SpecMismatch { .. })));
    }
}
