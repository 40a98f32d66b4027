//! Event-scheduling simulation of the warehouse.
//!
//! One replication covers demand arrivals, continuous-review `(r, Q)`
//! replenishment with a FIFO backorder queue, dispatch queues, truck loading
//! and routing, and a cost ledger.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::calendar::{CalendarError, EventCalendar, EventKind};
use super::result::{CostLedger, Departure, FlowTotals, SimResult, TracePoint};
use super::rng::{draw, purpose, Dist, DistError, RngStream};
use crate::model::{
    DeliveryWindow, DispatchParams, GeneError, NetworkConfig, PolicyParams, PriorityRule,
    QueueTopology, Scenario, TransportSpec,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Order {
    pub id: usize,
    pub retailer: usize,
    pub quantity: u32,
    pub placement_time: f64,
    pub fulfillment_time: Option<f64>,
    pub delivery_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WarehouseState {
    pub clock: f64,
    pub on_hand: i64,
    pub on_order: i64,
    pub backorders: VecDeque<usize>,
    pub backordered_qty: i64,
    pub queues: Vec<VecDeque<usize>>,
    pub queue_qty: Vec<i64>,
    pub last_dispatch: Option<f64>,
    pub orders: Vec<Order>,
    multi_queue: bool,
}

impl WarehouseState {
    pub fn new(initial_stock: i64, topology: QueueTopology, retailers: usize) -> Self {
        let queues = match topology {
            QueueTopology::SingleQueue => 1,
            QueueTopology::MultiQueue => retailers,
        };
        Self {
            clock: 0.0,
            on_hand: initial_stock,
            on_order: 0,
            backorders: VecDeque::new(),
            backordered_qty: 0,
            queues: vec![VecDeque::new(); queues],
            queue_qty: vec![0; queues],
            last_dispatch: None,
            orders: Vec::new(),
            multi_queue: topology == QueueTopology::MultiQueue,
        }
    }

    /// On hand + on order - backorders.
    pub fn position(&self) -> i64 {
        self.on_hand + self.on_order - self.backordered_qty
    }

    pub fn queue_for(&self, retailer: usize) -> usize {
        if self.multi_queue {
            retailer
        } else {
            0
        }
    }

    pub fn new_order(&mut self, retailer: usize, quantity: u32) -> usize {
        let id = self.orders.len();
        self.orders.push(Order {
            id,
            retailer,
            quantity,
            placement_time: self.clock,
            fulfillment_time: None,
            delivery_time: None,
        });
        id
    }

    /// Earliest time the truck may leave again.
    pub fn truck_ready_at(&self, gap: f64) -> f64 {
        self.last_dispatch.map_or(f64::NEG_INFINITY, |t| t + gap)
    }

    fn enqueue(&mut self, id: usize) {
        let o = &self.orders[id];
        let q = self.queue_for(o.retailer);
        self.queue_qty[q] += o.quantity as i64;
        self.queues[q].push_back(id);
    }

    fn head_placement(&self, queue: usize) -> f64 {
        self.queues[queue]
            .front()
            .map_or(f64::INFINITY, |&id| self.orders[id].placement_time)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FillOutcome {
    FilledNow,
    Backordered,
}

/// Fills an order whole from stock or appends it to the backorder queue.
pub fn fulfill_or_backorder(
    state: &mut WarehouseState,
    ledger: &mut CostLedger,
    order: usize,
) -> FillOutcome {
    ledger.orders_received += 1;
    let q = state.orders[order].quantity as i64;
    if state.on_hand >= q {
        state.on_hand -= q;
        state.orders[order].fulfillment_time = Some(state.clock);
        state.enqueue(order);
        ledger.orders_filled_immediately += 1;
        FillOutcome::FilledNow
    } else {
        state.backordered_qty += q;
        state.backorders.push_back(order);
        FillOutcome::Backordered
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DispatchDecision {
    Idle,
    Now {
        queue: usize,
    },
    /// A threshold is met but the truck is busy until this time.
    At(f64),
}

/// Threshold check for quantity-based dispatch. `thresholds` has one entry
/// per queue.
pub fn maybe_trigger_dispatch(
    state: &WarehouseState,
    thresholds: &[u32],
    gap: f64,
) -> DispatchDecision {
    let ready = (0..state.queues.len())
        .filter(|&q| !state.queues[q].is_empty() && state.queue_qty[q] >= thresholds[q] as i64);
    match pick_queue(state, ready) {
        None => DispatchDecision::Idle,
        Some(queue) => {
            let at = state.truck_ready_at(gap);
            if state.clock >= at {
                DispatchDecision::Now { queue }
            } else {
                DispatchDecision::At(at)
            }
        }
    }
}

/// Among candidate queues, the one whose head order was placed first.
fn pick_queue(state: &WarehouseState, candidates: impl Iterator<Item = usize>) -> Option<usize> {
    candidates.min_by(|&a, &b| {
        state
            .head_placement(a)
            .total_cmp(&state.head_placement(b))
            .then(a.cmp(&b))
    })
}

/// Removes and returns the orders loaded on one truck.
///
/// FIFO walks the queue from its head; SOF first sorts it by
/// `(quantity, placement_time)`. Loading stops at the first order that does
/// not fit.
pub fn build_truckload(
    queue: &mut VecDeque<usize>,
    orders: &[Order],
    priority: PriorityRule,
    capacity: u32,
) -> Vec<usize> {
    if priority == PriorityRule::Sof {
        queue.make_contiguous().sort_by(|&a, &b| {
            let (oa, ob) = (&orders[a], &orders[b]);
            oa.quantity
                .cmp(&ob.quantity)
                .then(oa.placement_time.total_cmp(&ob.placement_time))
        });
    }
    let mut load = 0u64;
    let mut shipment = Vec::new();
    while let Some(&id) = queue.front() {
        let q = orders[id].quantity as u64;
        if load + q > capacity as u64 {
            break;
        }
        load += q;
        shipment.push(id);
        queue.pop_front();
    }
    shipment
}

/// Delivery time of every order in a shipment leaving at `departure`.
///
/// Single-destination trucks take one direct trip draw. Multi-stop trucks
/// visit retailers in order of first appearance in the load, one leg draw per
/// stop.
pub fn route_legs(
    shipment: &[usize],
    orders: &[Order],
    topology: QueueTopology,
    departure: f64,
    transport: &TransportSpec,
    rng: &mut RngStream,
) -> Result<Vec<(usize, f64)>, DistError> {
    match topology {
        QueueTopology::MultiQueue => {
            let arrive = departure + draw(rng, transport.direct_trip_time.into())?;
            Ok(shipment.iter().map(|&id| (id, arrive)).collect())
        }
        QueueTopology::SingleQueue => {
            let mut stops: Vec<(usize, f64)> = Vec::new();
            let mut t = departure;
            for &id in shipment {
                let retailer = orders[id].retailer;
                if !stops.iter().any(|&(r, _)| r == retailer) {
                    t += draw(rng, transport.leg_time.into())?;
                    stops.push((retailer, t));
                }
            }
            Ok(shipment
                .iter()
                .map(|&id| {
                    let r = orders[id].retailer;
                    let at = stops.iter().find(|s| s.0 == r).map(|s| s.1).unwrap_or(t);
                    (id, at)
                })
                .collect())
        }
    }
}

/// Window penalty for a delivered order.
pub fn settle_delivery(order: &Order, window: &DeliveryWindow, penalty_rate: f64) -> f64 {
    let Some(delivered) = order.delivery_time else {
        return 0.0;
    };
    let lead = delivered - order.placement_time;
    penalty_rate * order.quantity as f64 * window.violation(lead)
}

pub fn accrue_holding(
    ledger: &mut CostLedger,
    t_from: f64,
    t_to: f64,
    on_hand: i64,
    holding_rate: f64,
) -> Result<(), SimError> {
    if t_to < t_from {
        return Err(SimError::NegativeInterval { t_from, t_to });
    }
    ledger.holding += holding_rate * on_hand as f64 * (t_to - t_from);
    Ok(())
}

pub fn accrue_backorder_penalty(
    ledger: &mut CostLedger,
    quantity: u32,
    wait: f64,
    penalty_rate: f64,
) {
    ledger.add_backorder_penalty(penalty_rate * quantity as f64 * wait);
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("horizon must be positive, got {0}")]
    InvalidHorizon(f64),
    #[error("policy does not fit the scenario: {0}")]
    Policy(#[from] GeneError),
    #[error("reorder quantity must be positive")]
    ZeroOrderQuantity,
    #[error("scripted arrival references unknown retailer {0}")]
    UnknownRetailer(usize),
    #[error("negative accrual interval [{t_from}, {t_to}]")]
    NegativeInterval { t_from: f64, t_to: f64 },
    #[error(transparent)]
    Calendar(#[from] CalendarError),
    #[error(transparent)]
    Distribution(#[from] DistError),
    #[error("internal invariant violated at t={time}: {message}")]
    Invariant { time: f64, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScriptedArrival {
    pub time: f64,
    pub retailer: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub horizon: f64,
    /// Record the inventory trace and truck departures.
    pub record_trace: bool,
    /// Apply the reorder check to the initial position at t = 0.
    pub review_at_start: bool,
    /// Replace the exponential demand streams with a fixed arrival list.
    pub arrivals: Option<Vec<ScriptedArrival>>,
}

impl SimOptions {
    pub fn new(horizon: f64) -> Self {
        Self {
            horizon,
            record_trace: false,
            review_at_start: true,
            arrivals: None,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }
}

pub fn run_replication(
    config: &NetworkConfig,
    policy: &PolicyParams,
    scenario: Scenario,
    seed: u64,
    horizon: f64,
) -> Result<SimResult, SimError> {
    run_with_options(config, policy, scenario, seed, &SimOptions::new(horizon))
}

pub fn run_with_options(
    config: &NetworkConfig,
    policy: &PolicyParams,
    scenario: Scenario,
    seed: u64,
    options: &SimOptions,
) -> Result<SimResult, SimError> {
    if !(options.horizon > 0.0 && options.horizon.is_finite()) {
        return Err(SimError::InvalidHorizon(options.horizon));
    }
    policy.check_shape(scenario, config.retailer_count())?;
    if policy.order_quantity == 0 {
        return Err(SimError::ZeroOrderQuantity);
    }
    if let Some(script) = &options.arrivals {
        if let Some(a) = script
            .iter()
            .find(|a| a.retailer >= config.retailer_count())
        {
            return Err(SimError::UnknownRetailer(a.retailer));
        }
    }
    Replication::new(config, policy, scenario, seed, options).run()
}

struct Replication<'a> {
    config: &'a NetworkConfig,
    policy: &'a PolicyParams,
    scenario: Scenario,
    options: &'a SimOptions,
    state: WarehouseState,
    ledger: CostLedger,
    calendar: EventCalendar,
    arrival_rngs: Vec<RngStream>,
    lead_rng: RngStream,
    trip_rng: RngStream,
    last_accrual: f64,
    eligible_pending: bool,
    due: Vec<bool>,
    flows: FlowTotals,
    trace: Vec<TracePoint>,
    departures: Vec<Departure>,
}

impl<'a> Replication<'a> {
    fn new(
        config: &'a NetworkConfig,
        policy: &'a PolicyParams,
        scenario: Scenario,
        seed: u64,
        options: &'a SimOptions,
    ) -> Self {
        let r = policy.reorder_point as i64;
        let state = WarehouseState::new(r, scenario.topology, config.retailer_count());
        let queues = state.queues.len();
        Self {
            config,
            policy,
            scenario,
            options,
            state,
            ledger: CostLedger::default(),
            calendar: EventCalendar::new(),
            arrival_rngs: (0..config.retailer_count())
                .map(|i| RngStream::arrivals(seed, i))
                .collect(),
            lead_rng: RngStream::new(seed, purpose::SUPPLIER_LEAD_TIME),
            trip_rng: RngStream::new(seed, purpose::TRIP),
            last_accrual: 0.0,
            eligible_pending: false,
            due: vec![false; queues],
            flows: FlowTotals {
                initial_stock: r as u64,
                ..Default::default()
            },
            trace: Vec::new(),
            departures: Vec::new(),
        }
    }

    fn horizon(&self) -> f64 {
        self.options.horizon
    }

    fn schedule(&mut self, time: f64, kind: EventKind) -> Result<(), SimError> {
        if time < self.horizon() {
            self.calendar.schedule(time, kind)?;
        }
        Ok(())
    }

    fn record(&mut self) {
        if !self.options.record_trace {
            return;
        }
        let point = TracePoint {
            time: self.state.clock,
            on_hand: self.state.on_hand,
            inventory_position: self.state.position(),
        };
        let changed = self.trace.last().is_none_or(|p| {
            p.on_hand != point.on_hand || p.inventory_position != point.inventory_position
        });
        if changed {
            self.trace.push(point);
        }
    }

    fn run(mut self) -> Result<SimResult, SimError> {
        self.record();
        if self.options.review_at_start {
            self.review()?;
        }
        self.seed_arrivals()?;
        if let DispatchParams::Schedule(intervals) = &self.policy.dispatch {
            for (q, &s) in intervals.clone().iter().enumerate() {
                self.schedule(s as f64, EventKind::ScheduledDispatch { queue: q })?;
            }
        }

        while let Some(t) = self.calendar.peek_time() {
            if t >= self.horizon() {
                break;
            }
            let event = self.calendar.pop_next_event()?;
            self.advance_to(event.time)?;
            match event.kind {
                EventKind::OrderArrival { retailer } => self.on_order_arrival(retailer)?,
                EventKind::ReplenishmentArrival { quantity } => self.on_replenishment(quantity)?,
                EventKind::DeliveryArrival { order } => self.on_delivery(order),
                EventKind::ScheduledDispatch { queue } => self.on_scheduled_dispatch(queue)?,
                EventKind::DispatchEligible => {
                    self.eligible_pending = false;
                    self.try_dispatch()?;
                }
            }
            self.check_invariants()?;
            self.record();
        }

        self.finish()
    }

    fn advance_to(&mut self, t: f64) -> Result<(), SimError> {
        accrue_holding(
            &mut self.ledger,
            self.last_accrual,
            t,
            self.state.on_hand,
            self.config.costs.holding_rate,
        )?;
        self.last_accrual = t;
        self.state.clock = t;
        Ok(())
    }

    fn seed_arrivals(&mut self) -> Result<(), SimError> {
        if let Some(script) = &self.options.arrivals {
            for a in script.clone() {
                self.schedule(
                    a.time,
                    EventKind::OrderArrival {
                        retailer: a.retailer,
                    },
                )?;
            }
            return Ok(());
        }
        for i in 0..self.config.retailer_count() {
            self.schedule_next_arrival(i)?;
        }
        Ok(())
    }

    fn schedule_next_arrival(&mut self, retailer: usize) -> Result<(), SimError> {
        let rate = self.config.retailers[retailer].arrival_rate;
        if rate <= 0.0 {
            return Ok(());
        }
        let gap = draw(&mut self.arrival_rngs[retailer], Dist::Exponential { rate })?;
        self.schedule(self.state.clock + gap, EventKind::OrderArrival { retailer })
    }

    /// Places one replenishment order when the position is at or below `r`.
    fn review(&mut self) -> Result<(), SimError> {
        if self.state.position() > self.policy.reorder_point as i64 {
            return Ok(());
        }
        let q = self.policy.order_quantity;
        self.ledger.ordering += self.config.costs.ordering_cost;
        self.ledger.replenishment_orders += 1;
        self.state.on_order += q as i64;
        let lead = draw(
            &mut self.lead_rng,
            self.config.transport.supplier_lead_time.into(),
        )?;
        self.schedule(
            self.state.clock + lead,
            EventKind::ReplenishmentArrival { quantity: q },
        )?;
        self.record();
        Ok(())
    }

    fn on_order_arrival(&mut self, retailer: usize) -> Result<(), SimError> {
        if self.options.arrivals.is_none() {
            self.schedule_next_arrival(retailer)?;
        }
        let q = self.config.retailers[retailer].order_quantity;
        let id = self.state.new_order(retailer, q);
        let outcome = fulfill_or_backorder(&mut self.state, &mut self.ledger, id);
        self.review()?;
        if outcome == FillOutcome::FilledNow {
            self.try_dispatch()?;
        }
        Ok(())
    }

    fn on_replenishment(&mut self, quantity: u32) -> Result<(), SimError> {
        self.state.on_hand += quantity as i64;
        self.state.on_order -= quantity as i64;
        self.flows.received += quantity as u64;
        let mut served = false;
        while let Some(&id) = self.state.backorders.front() {
            let q = self.state.orders[id].quantity;
            if (q as i64) > self.state.on_hand {
                break;
            }
            self.state.backorders.pop_front();
            self.state.on_hand -= q as i64;
            self.state.backordered_qty -= q as i64;
            let wait = self.state.clock - self.state.orders[id].placement_time;
            accrue_backorder_penalty(&mut self.ledger, q, wait, self.config.costs.penalty_rate);
            self.state.orders[id].fulfillment_time = Some(self.state.clock);
            self.state.enqueue(id);
            served = true;
        }
        self.review()?;
        if served {
            self.try_dispatch()?;
        }
        Ok(())
    }

    fn on_delivery(&mut self, order: usize) {
        self.state.orders[order].delivery_time = Some(self.state.clock);
        let penalty = settle_delivery(
            &self.state.orders[order],
            &self.config.window,
            self.config.costs.penalty_rate,
        );
        self.ledger.add_window_penalty(penalty);
    }

    fn on_scheduled_dispatch(&mut self, queue: usize) -> Result<(), SimError> {
        let s = self.policy.dispatch.values()[queue] as f64;
        self.schedule(self.state.clock + s, EventKind::ScheduledDispatch { queue })?;
        self.due[queue] = true;
        self.try_dispatch()
    }

    fn request_eligibility(&mut self, at: f64) -> Result<(), SimError> {
        if !self.eligible_pending && at < self.horizon() {
            self.calendar.schedule(at, EventKind::DispatchEligible)?;
            self.eligible_pending = true;
        }
        Ok(())
    }

    fn try_dispatch(&mut self) -> Result<(), SimError> {
        let gap = self.config.transport.min_dispatch_gap;
        match &self.policy.dispatch {
            DispatchParams::Quantity(thresholds) => loop {
                match maybe_trigger_dispatch(&self.state, thresholds, gap) {
                    DispatchDecision::Idle => return Ok(()),
                    DispatchDecision::Now { queue } => self.dispatch(queue)?,
                    DispatchDecision::At(t) => return self.request_eligibility(t),
                }
            },
            DispatchParams::Schedule(_) => {
                for q in 0..self.due.len() {
                    if self.due[q] && self.state.queues[q].is_empty() {
                        self.due[q] = false;
                    }
                }
                let due = self.due.clone();
                let Some(queue) = pick_queue(&self.state, (0..due.len()).filter(|&q| due[q]))
                else {
                    return Ok(());
                };
                let ready = self.state.truck_ready_at(gap);
                if self.state.clock < ready {
                    return self.request_eligibility(ready);
                }
                self.due[queue] = false;
                self.dispatch(queue)?;
                if self.due.iter().any(|&d| d) {
                    self.request_eligibility(self.state.clock + gap)?;
                }
                Ok(())
            }
        }
    }

    fn dispatch(&mut self, queue: usize) -> Result<(), SimError> {
        let shipment = build_truckload(
            &mut self.state.queues[queue],
            &self.state.orders,
            self.scenario.priority,
            self.config.transport.truck_capacity,
        );
        if shipment.is_empty() {
            return Ok(());
        }
        let load: u64 = shipment
            .iter()
            .map(|&id| self.state.orders[id].quantity as u64)
            .sum();
        self.state.queue_qty[queue] -= load as i64;
        self.ledger.delivery += self.config.costs.delivery_cost;
        self.ledger.truck_trips += 1;
        self.state.last_dispatch = Some(self.state.clock);
        self.flows.dispatched += load;

        let arrivals = route_legs(
            &shipment,
            &self.state.orders,
            self.scenario.topology,
            self.state.clock,
            &self.config.transport,
            &mut self.trip_rng,
        )?;
        for (order, at) in arrivals {
            self.schedule(at, EventKind::DeliveryArrival { order })?;
        }
        if self.options.record_trace {
            self.departures.push(Departure {
                time: self.state.clock,
                queue,
                load,
                orders: shipment,
            });
        }
        Ok(())
    }

    fn check_invariants(&self) -> Result<(), SimError> {
        let fail = |message: &str| {
            Err(SimError::Invariant {
                time: self.state.clock,
                message: message.to_string(),
            })
        };
        if self.state.on_hand < 0 {
            return fail("negative on-hand inventory");
        }
        if self.state.on_order < 0 {
            return fail("negative on-order inventory");
        }
        for (q, queue) in self.state.queues.iter().enumerate() {
            let sum: i64 = queue
                .iter()
                .map(|&id| self.state.orders[id].quantity as i64)
                .sum();
            if sum != self.state.queue_qty[q] {
                return fail("dispatch queue total out of sync");
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<SimResult, SimError> {
        let horizon = self.horizon();
        self.advance_to(horizon)?;
        let p = self.config.costs.penalty_rate;
        for &id in &self.state.backorders {
            let o = &self.state.orders[id];
            accrue_backorder_penalty(&mut self.ledger, o.quantity, horizon - o.placement_time, p);
        }
        if self.options.record_trace {
            self.trace.push(TracePoint {
                time: horizon,
                on_hand: self.state.on_hand,
                inventory_position: self.state.position(),
            });
        }
        self.flows.queued_at_end = self.state.queue_qty.iter().sum::<i64>() as u64;
        self.flows.on_hand_at_end = self.state.on_hand as u64;
        self.flows.backordered_at_end = self.state.backordered_qty as u64;
        self.flows.on_order_at_end = self.state.on_order as u64;

        let record = self.options.record_trace;
        Ok(SimResult {
            total_cost: self.ledger.total(),
            fill_rate: self.ledger.fill_rate(),
            breakdown: self.ledger,
            flows: self.flows,
            trace: record.then_some(self.trace),
            departures: record.then_some(self.departures),
        })
    }
}
