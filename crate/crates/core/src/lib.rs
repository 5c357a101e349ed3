//! Deterministic simulation of two edge-security games — anti-jamming
//! computation offloading and PHY-layer spoofing authentication — together
//! with a family of reinforcement-learning defenders (tabular Q-learning,
//! Dyna-Q, post-decision-state learning, a from-scratch convolutional DQN
//! with experience replay, and a hotbooted variant) and a value-iteration
//! solver used as ground truth.
//!
//! Everything is seeded: identical configuration and seed reproduce every
//! trace bit for bit.

pub mod agents;
pub mod auth;
pub mod channel;
pub mod offload;
pub mod oracle;
pub mod params;
pub mod quant;
pub mod rng;

pub use channel::ChannelModel;
pub use params::{AgentHyperparams, EpsilonSchedule, RewardWeights};
pub use quant::Quantizer;
pub use rng::{SeededRng, Stream};
