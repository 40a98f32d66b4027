//! The six dispatch scenarios and the decision-variable search space of each.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::config::NetworkConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DispatchKind {
    /// Ship when the queued quantity reaches a threshold `M`.
    QuantityBased,
    /// Ship every `S` days.
    ScheduleBased,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QueueTopology {
    /// One queue, multi-stop trucks.
    SingleQueue,
    /// One queue per retailer, single-destination trucks.
    MultiQueue,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PriorityRule {
    Fifo,
    /// Smallest order first, ties by placement time.
    Sof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scenario {
    pub id: u8,
    pub dispatch_kind: DispatchKind,
    pub topology: QueueTopology,
    pub priority: PriorityRule,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScenarioError {
    #[error("unknown scenario {0} (expected 1..=6)")]
    Unknown(u32),
    #[error("SOF priority requires a single dispatch queue")]
    SofWithMultiQueue,
}

impl Scenario {
    pub const IDS: [u8; 6] = [1, 2, 3, 4, 5, 6];

    pub fn from_id(id: u32) -> Result<Self, ScenarioError> {
        use DispatchKind::*;
        use PriorityRule::*;
        use QueueTopology::*;
        let (kind, topology, priority) = match id {
            1 => (QuantityBased, MultiQueue, Fifo),
            2 => (QuantityBased, SingleQueue, Fifo),
            3 => (QuantityBased, SingleQueue, Sof),
            4 => (ScheduleBased, MultiQueue, Fifo),
            5 => (ScheduleBased, SingleQueue, Fifo),
            6 => (ScheduleBased, SingleQueue, Sof),
            other => return Err(ScenarioError::Unknown(other)),
        };
        Ok(Self {
            id: id as u8,
            dispatch_kind: kind,
            topology,
            priority,
        })
    }

    /// Looks up the scenario id for a combination, rejecting SOF with multiple queues.
    pub fn from_parts(
        dispatch_kind: DispatchKind,
        topology: QueueTopology,
        priority: PriorityRule,
    ) -> Result<Self, ScenarioError> {
        if topology == QueueTopology::MultiQueue && priority == PriorityRule::Sof {
            return Err(ScenarioError::SofWithMultiQueue);
        }
        Self::all()
            .into_iter()
            .find(|s| {
                s.dispatch_kind == dispatch_kind && s.topology == topology && s.priority == priority
            })
            .ok_or(ScenarioError::SofWithMultiQueue)
    }

    pub fn all() -> Vec<Self> {
        Self::IDS
            .iter()
            .map(|&id| Self::from_id(id as u32).expect("static ids"))
            .collect()
    }

    pub fn is_multi_queue(&self) -> bool {
        self.topology == QueueTopology::MultiQueue
    }

    /// Number of dispatch queues (and dispatch genes) for `retailers` retailers.
    pub fn queue_count(&self, retailers: usize) -> usize {
        match self.topology {
            QueueTopology::SingleQueue => 1,
            QueueTopology::MultiQueue => retailers,
        }
    }

    pub fn gene_count(&self, retailers: usize) -> usize {
        2 + self.queue_count(retailers)
    }

    pub fn describe(&self) -> &'static str {
        match self.id {
            1 => "Quantity-based multi-queue dispatch",
            2 => "Quantity-based single-queue dispatch with FIFO priority",
            3 => "Quantity-based single-queue dispatch with SOF priority",
            4 => "Schedule-based multi-queue dispatch",
            5 => "Schedule-based single-queue dispatch with FIFO priority",
            6 => "Schedule-based single-queue dispatch with SOF priority",
            _ => "custom scenario",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "scenario {} ({})", self.id, self.describe())
    }
}

/// How a gene is bred and mutated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneKind {
    /// `r` or `Q`: linear crossover, Gaussian mutation.
    Inventory,
    /// `M`/`M_i`: uniform crossover, +/- one step mutation.
    Threshold,
    /// `S`/`S_i`: linear crossover, +/- one day mutation.
    Interval,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarBound {
    pub name: String,
    pub lower: i64,
    pub upper: i64,
    pub step: i64,
    pub kind: GeneKind,
}

impl VarBound {
    fn new(name: impl Into<String>, lower: i64, upper: i64, step: i64, kind: GeneKind) -> Self {
        Self {
            name: name.into(),
            lower,
            upper,
            step,
            kind,
        }
    }

    /// Largest value of the `lower + k * step` grid that does not exceed `upper`.
    ///
    /// For `M_3` in `[150, 500]` with step 150 this is 450.
    pub fn grid_max(&self) -> i64 {
        self.lower + (self.upper - self.lower) / self.step * self.step
    }

    pub fn grid_len(&self) -> usize {
        ((self.upper - self.lower) / self.step + 1) as usize
    }

    pub fn grid_value(&self, k: usize) -> i64 {
        self.lower + k as i64 * self.step
    }

    pub fn contains(&self, value: i64) -> bool {
        value >= self.lower && value <= self.upper && (value - self.lower) % self.step == 0
    }

    /// Brings a value back to the nearest admissible extreme.
    pub fn clamp(&self, value: i64) -> i64 {
        value.clamp(self.lower, self.grid_max())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionBounds {
    pub vars: Vec<VarBound>,
}

pub const REORDER_POINT_RANGE: (i64, i64) = (50, 300);
pub const ORDER_QUANTITY_RANGE: (i64, i64) = (200, 1000);
pub const INTERVAL_RANGE: (i64, i64) = (1, 6);

impl DecisionBounds {
    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn contains(&self, genes: &[i64]) -> bool {
        genes.len() == self.vars.len() && self.vars.iter().zip(genes).all(|(b, &g)| b.contains(g))
    }

    pub fn names(&self) -> Vec<&str> {
        self.vars.iter().map(|v| v.name.as_str()).collect()
    }
}

/// Search space for a scenario: `r`, `Q`, then one dispatch variable per queue.
pub fn bounds_for_scenario(scenario: Scenario, config: &NetworkConfig) -> DecisionBounds {
    let mut vars = vec![
        VarBound::new(
            "r",
            REORDER_POINT_RANGE.0,
            REORDER_POINT_RANGE.1,
            1,
            GeneKind::Inventory,
        ),
        VarBound::new(
            "Q",
            ORDER_QUANTITY_RANGE.0,
            ORDER_QUANTITY_RANGE.1,
            1,
            GeneKind::Inventory,
        ),
    ];
    let cap = config.transport.truck_capacity as i64;
    match (scenario.dispatch_kind, scenario.topology) {
        (DispatchKind::QuantityBased, QueueTopology::MultiQueue) => {
            for (i, r) in config.retailers.iter().enumerate() {
                let q = r.order_quantity as i64;
                vars.push(VarBound::new(
                    format!("M_{}", i + 1),
                    q,
                    cap,
                    q,
                    GeneKind::Threshold,
                ));
            }
        }
        (DispatchKind::QuantityBased, QueueTopology::SingleQueue) => {
            let q = config.min_order_quantity() as i64;
            vars.push(VarBound::new("M", q, cap, q, GeneKind::Threshold));
        }
        (DispatchKind::ScheduleBased, QueueTopology::MultiQueue) => {
            for i in 0..config.retailer_count() {
                vars.push(VarBound::new(
                    format!("S_{}", i + 1),
                    INTERVAL_RANGE.0,
                    INTERVAL_RANGE.1,
                    1,
                    GeneKind::Interval,
                ));
            }
        }
        (DispatchKind::ScheduleBased, QueueTopology::SingleQueue) => {
            vars.push(VarBound::new(
                "S",
                INTERVAL_RANGE.0,
                INTERVAL_RANGE.1,
                1,
                GeneKind::Interval,
            ));
        }
    }
    DecisionBounds { vars }
}
