//! Discrete-event simulation of the warehouse and its dispatch process.

pub mod calendar;
pub mod kernel;
pub mod result;
pub mod rng;

pub use calendar::{CalendarError, Event, EventCalendar, EventKind};
pub use kernel::{
    accrue_backorder_penalty, accrue_holding, build_truckload, fulfill_or_backorder,
    maybe_trigger_dispatch, route_legs, run_replication, run_with_options, settle_delivery,
    DispatchDecision, FillOutcome, Order, ScriptedArrival, SimError, SimOptions, WarehouseState,
};
pub use result::{write_trace_csv, CostLedger, Departure, FlowTotals, SimResult, TracePoint};
pub use rng::{draw, Dist, DistError, RngStream};
