//! Anti-jamming computation-offloading game: a mobile device with one task
//! per slot picks an edge node and an offloading rate while a jammer
//! interferes. In frozen mode the ground-truth dynamics enumerate into an
//! exact MDP for the solver.

mod config;
mod env;
mod ground;
mod reward;

pub use config::{
    JammerConfig, JammerKind, OffloadAction, OffloadConfig, OffloadError, SmartJammerConfig,
};
pub use env::{normalize_observation, observation_quantizers, OffloadEnv, SlotObservation};
pub use ground::{enumerate_mdp, FrozenGround, GroundLayout, GroundState};
pub use reward::{
    bit_error_rate, energy_and_delay, sinr, utility, RewardBreakdown, Transition,
};
