//! Network instance: retailers, costs, transport and the delivery window.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A retailer placing fixed-size orders at the warehouse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetailerSpec {
    /// Items per order (`q_i`).
    pub order_quantity: u32,
    /// Orders per day. Interarrival times are exponential with mean `1 / rate`.
    /// A rate of zero marks an inactive retailer.
    pub arrival_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostParams {
    /// Per truck trip, independent of load.
    pub delivery_cost: f64,
    /// Per replenishment order placed with the supplier.
    pub ordering_cost: f64,
    /// Per item per day on hand.
    pub holding_rate: f64,
    /// Per item per day of window violation or backorder wait.
    pub penalty_rate: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            delivery_cost: 500.0,
            ordering_cost: 200.0,
            holding_rate: 5.0,
            penalty_rate: 5.0,
        }
    }
}

/// Days after order placement within which a delivery is on time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeliveryWindow {
    pub earliest: f64,
    pub latest: f64,
}

impl DeliveryWindow {
    pub fn width(&self) -> f64 {
        self.latest - self.earliest
    }

    /// Days outside the window for a lead time of `lead_time` days.
    pub fn violation(&self, lead_time: f64) -> f64 {
        (self.earliest - lead_time).max(0.0) + (lead_time - self.latest).max(0.0)
    }
}

impl Default for DeliveryWindow {
    fn default() -> Self {
        Self {
            earliest: 3.0,
            latest: 6.0,
        }
    }
}

/// Closed interval `[lo, hi]` in days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DayRange {
    pub lo: f64,
    pub hi: f64,
}

impl DayRange {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub const fn fixed(value: f64) -> Self {
        Self {
            lo: value,
            hi: value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransportSpec {
    pub truck_capacity: u32,
    pub supplier_lead_time: DayRange,
    /// Trip time when a truck serves a single retailer (multi-queue dispatch).
    pub direct_trip_time: DayRange,
    /// Time of each leg of a multi-stop trip (single-queue dispatch).
    pub leg_time: DayRange,
    /// Minimum days between consecutive truck departures.
    pub min_dispatch_gap: f64,
}

impl Default for TransportSpec {
    fn default() -> Self {
        Self {
            truck_capacity: 500,
            supplier_lead_time: DayRange::new(2.0, 4.0),
            direct_trip_time: DayRange::new(2.0, 4.0),
            leg_time: DayRange::new(1.0, 2.0),
            min_dispatch_gap: 1.0,
        }
    }
}

/// The full simulated instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub retailers: Vec<RetailerSpec>,
    pub costs: CostParams,
    pub transport: TransportSpec,
    pub window: DeliveryWindow,
    pub horizon_days: f64,
}

impl NetworkConfig {
    /// Three retailers ordering 50, 100 and 150 items at 1/3 order per day,
    /// with the default costs, truck and window.
    pub fn reference_instance() -> Self {
        let rate = 1.0 / 3.0;
        Self {
            retailers: [50, 100, 150]
                .into_iter()
                .map(|q| RetailerSpec {
                    order_quantity: q,
                    arrival_rate: rate,
                })
                .collect(),
            costs: CostParams::default(),
            transport: TransportSpec::default(),
            window: DeliveryWindow::default(),
            horizon_days: 100.0,
        }
    }

    pub fn retailer_count(&self) -> usize {
        self.retailers.len()
    }

    pub fn min_order_quantity(&self) -> u32 {
        self.retailers
            .iter()
            .map(|r| r.order_quantity)
            .min()
            .unwrap_or(0)
    }

    pub fn max_order_quantity(&self) -> u32 {
        self.retailers
            .iter()
            .map(|r| r.order_quantity)
            .max()
            .unwrap_or(0)
    }

    /// Checks every invariant and returns the config unchanged when all hold.
    pub fn validate(self) -> Result<Self, ConfigError> {
        let mut v = Vec::new();
        let cap = self.transport.truck_capacity;

        if self.retailers.is_empty() {
            v.push(Violation::new(
                "retailers",
                "at least one retailer required",
            ));
        }
        for (i, r) in self.retailers.iter().enumerate() {
            let path = |field: &str| format!("retailers[{i}].{field}");
            if r.order_quantity == 0 {
                v.push(Violation::new(path("order_quantity"), "q_i > 0 violated"));
            }
            if r.order_quantity > cap {
                v.push(Violation::new(
                    path("order_quantity"),
                    format!(
                        "order exceeds truck capacity (q_{} = {} > {cap})",
                        i + 1,
                        r.order_quantity
                    ),
                ));
            }
            if !(r.arrival_rate.is_finite() && r.arrival_rate >= 0.0) {
                v.push(Violation::new(
                    path("arrival_rate"),
                    "arrival rate must be finite and non-negative",
                ));
            }
        }

        let c = &self.costs;
        for (name, value) in [
            ("delivery_cost", c.delivery_cost),
            ("ordering_cost", c.ordering_cost),
            ("holding_rate", c.holding_rate),
            ("penalty_rate", c.penalty_rate),
        ] {
            if !(value.is_finite() && value >= 0.0) {
                v.push(Violation::new(format!("costs.{name}"), "must be >= 0"));
            }
        }

        let w = &self.window;
        if !(w.earliest >= 0.0) {
            v.push(Violation::new("window.earliest", "C1 >= 0 violated"));
        }
        if !(w.earliest < w.latest) {
            v.push(Violation::new("window", "C1 < C2 violated"));
        }

        let t = &self.transport;
        if t.truck_capacity == 0 {
            v.push(Violation::new(
                "transport.truck_capacity",
                "capacity > 0 violated",
            ));
        }
        for (name, range) in [
            ("supplier_lead_time", t.supplier_lead_time),
            ("direct_trip_time", t.direct_trip_time),
            ("leg_time", t.leg_time),
        ] {
            if !(range.lo >= 0.0 && range.lo <= range.hi && range.hi.is_finite()) {
                v.push(Violation::new(
                    format!("transport.{name}"),
                    "range requires 0 <= lo <= hi",
                ));
            }
        }
        if !(t.min_dispatch_gap > 0.0 && t.min_dispatch_gap.is_finite()) {
            v.push(Violation::new(
                "transport.min_dispatch_gap",
                "min_dispatch_gap > 0 violated",
            ));
        }

        if !(self.horizon_days > 0.0 && self.horizon_days.is_finite()) {
            v.push(Violation::new("horizon_days", "horizon must be positive"));
        }

        if v.is_empty() {
            Ok(self)
        } else {
            Err(ConfigError { violations: v })
        }
    }
}

/// One failed invariant, located by field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid configuration: {}", .violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
pub struct ConfigError {
    pub violations: Vec<Violation>,
}

impl ConfigError {
    pub fn mentions(&self, needle: &str) -> bool {
        self.violations
            .iter()
            .any(|v| v.message.contains(needle) || v.path.contains(needle))
    }
}
