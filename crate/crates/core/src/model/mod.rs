//! Instance data, scenarios, decision variables and their encoding.

pub mod config;
pub mod policy;
pub mod scenario;

pub use config::{
    ConfigError, CostParams, DayRange, DeliveryWindow, NetworkConfig, RetailerSpec, TransportSpec,
    Violation,
};
pub use policy::{decode_chromosome, Chromosome, DispatchParams, GeneError, PolicyParams};
pub use scenario::{
    bounds_for_scenario, DecisionBounds, DispatchKind, GeneKind, PriorityRule, QueueTopology,
    Scenario, ScenarioError, VarBound,
};
