//! Evaluation of communication-network designs.
//!
//! A design is a topology, a topology-based routing algorithm and a
//! node-capability scheme. The crate scores designs on two objectives:
//! transmission capacity, the critical packet-generation rate `R_c` at which
//! traffic stops flowing freely, and cost, approximated by the largest node
//! capability `C_max`. `R_c` is available analytically from effective
//! betweenness and empirically from a discrete-time traffic simulation.
//!
//! Module map:
//! - [`graph`]: immutable simple graphs, distances, edge-list I/O
//! - [`topology`]: ring, lattice, WS, ER, BA, PA and HOT generators
//! - [`routing`]: SPR/EFR candidate paths and effective betweenness
//! - [`capacity`]: capability schemes, analytic `R_c`, `C_max`, closed forms
//! - [`simulator`]: packet traffic, order parameter, simulated `R_c`
//! - [`experiments`]: instance-averaged tables and scaling fits

pub mod capacity;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod routing;
pub mod seed;
pub mod simulator;
pub mod topology;

pub use capacity::{
    analytic_rc, assign, closed_form_cmax, closed_form_rc, tradeoff_ratios, CapabilityAssignment,
    Combo, DesignEvaluation, Profiles, Scheme,
};
pub use error::{Error, Result};
pub use graph::{load_edge_list, save_edge_list, Graph, GraphMetrics, NodeId};
pub use routing::{
    BetweennessProfile, ForwardingTable, RoutingAlgorithm, RoutingSystem, SuccessorChoice,
};
pub use simulator::{EtaConfig, OrderParameterEstimate, RcEstimate, RcSearch, SimOptions, Simulation};
pub use topology::{Family, GenSpec, Topology};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
