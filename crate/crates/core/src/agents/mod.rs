//! Defense-learning algorithms: tabular Q-learning, Dyna-Q planning,
//! post-decision-state learning, and a windowed convolutional DQN with
//! experience replay and hotbooting support.

pub mod dqn;
pub mod dynaq;
pub mod nn;
pub mod pds;
pub mod qtable;
pub mod replay;

pub use dqn::{DqnAgent, DqnConfig, InputWindow};
pub use dynaq::DynaModel;
pub use nn::{average_params, NetError, NetSpec, QNetwork, RegressionSample};
pub use pds::{PdsModel, PdsSplit};
pub use qtable::{epsilon_greedy, greedy_index, q_update, AlphaMode, QLearningAgent, QTable};
pub use replay::ReplayPool;
