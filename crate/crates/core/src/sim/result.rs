//! Cost ledger, per-replication results and their CSV exports.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub holding: f64,
    pub ordering: f64,
    pub delivery: f64,
    /// Backorder waits plus delivery-window violations.
    pub penalty: f64,
    pub backorder_penalty: f64,
    pub window_penalty: f64,
    pub orders_received: u64,
    pub orders_filled_immediately: u64,
    pub replenishment_orders: u64,
    pub truck_trips: u64,
}

impl CostLedger {
    pub fn total(&self) -> f64 {
        self.holding + self.ordering + self.delivery + self.penalty
    }

    /// Share of received orders filled from stock; 1 when nothing was ordered.
    pub fn fill_rate(&self) -> f64 {
        if self.orders_received == 0 {
            return 1.0;
        }
        self.orders_filled_immediately as f64 / self.orders_received as f64
    }

    pub fn add_backorder_penalty(&mut self, amount: f64) {
        self.backorder_penalty += amount;
        self.penalty += amount;
    }

    pub fn add_window_penalty(&mut self, amount: f64) {
        self.window_penalty += amount;
        self.penalty += amount;
    }

    /// One row per cost component, header `component,amount`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "component,amount")?;
        for (name, v) in [
            ("holding", self.holding),
            ("ordering", self.ordering),
            ("delivery", self.delivery),
            ("penalty", self.penalty),
            ("backorder_penalty", self.backorder_penalty),
            ("window_penalty", self.window_penalty),
            ("total", self.total()),
        ] {
            writeln!(out, "{name},{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub time: f64,
    pub on_hand: i64,
    pub inventory_position: i64,
}

pub fn write_trace_csv<W: Write>(trace: &[TracePoint], mut out: W) -> io::Result<()> {
    writeln!(out, "time,on_hand,inventory_position")?;
    for p in trace {
        writeln!(out, "{},{},{}", p.time, p.on_hand, p.inventory_position)?;
    }
    Ok(())
}

/// A truck departure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Departure {
    pub time: f64,
    pub queue: usize,
    pub load: u64,
    pub orders: Vec<usize>,
}

/// Item flows for conservation checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowTotals {
    pub initial_stock: u64,
    pub received: u64,
    pub dispatched: u64,
    pub queued_at_end: u64,
    pub on_hand_at_end: u64,
    pub backordered_at_end: u64,
    pub on_order_at_end: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub total_cost: f64,
    pub fill_rate: f64,
    pub breakdown: CostLedger,
    pub flows: FlowTotals,
    pub trace: Option<Vec<TracePoint>>,
    pub departures: Option<Vec<Departure>>,
}
