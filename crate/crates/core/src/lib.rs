//! Denoising of piecewise-constant signals on graphs.
//!
//! The central routine, [`expansion::denoise`], approximately minimizes
//!
//! ```text
//! F_w(mu) = 1/2 ||Y - mu||^2 + lambda * sum_{ {i,j} in E } w(i,j) 1{mu_i != mu_j}
//! ```
//!
//! over grid-valued signals by repeated alpha-expansion moves, each solved
//! exactly as a minimum s-t cut. Around it sit effective-resistance edge
//! weights ([`resistance`]), exact solvers for chain graphs ([`chain`] for the
//! l0 objective, [`tv`] for total variation), and a simulation and tuning
//! harness ([`sim`]).

pub mod chain;
pub mod error;
pub mod expansion;
pub mod graph;
pub mod io;
pub mod maxflow;
pub mod resistance;
pub mod sim;
pub mod tv;

pub use chain::{exact_l0_chain, Segmentation};
pub use error::{Error, Result};
pub use expansion::{denoise, DenoiseReport, ExpansionProblem, SweepOrder};

pub use graph::{
    cut_weight, induced_partition, labeled_objective, objective_l0, objective_tv, objective_w,
    EdgeWeighting, Graph, Grid, LabeledSignal, Partition,
};
pub use maxflow::{FlowNetwork, MinCut};
pub use resistance::effective_resistances;
pub use tv::{tv_chain, TvSolution};
