//! Networked common goods game: agents with budgets fund goods they are
//! adjacent to in a bipartite graph, and each agent's utility is a concave
//! function of the total water level of every neighboring good.

mod error;

pub mod discrete;
pub mod dynamics;
pub mod game;
pub mod lab;
pub mod utility;
pub mod waterfill;

pub use error::{Error, Result};
pub use game::{Agent, Allocation, Edge, GameInstance, Good};
pub use utility::UtilityFunction;
