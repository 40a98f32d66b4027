use dispatch_opt::model::{
    CostParams, DayRange, DeliveryWindow, DispatchKind, NetworkConfig, PolicyParams, RetailerSpec,
    Scenario, TransportSpec,
};
use dispatch_opt::sim::{run_with_options, SimOptions, SimResult};
use proptest::prelude::*;

// Randomized instances for the invariant fuzz.

#[derive(Debug, Clone)]
pub struct Case {
    pub config: NetworkConfig,
    pub policy: PolicyParams,
    pub scenario: Scenario,
    pub seed: u64,
}

fn range(lo: f64, width: f64) -> DayRange {
    DayRange::new(lo, lo + width)
}

pub fn case() -> impl Strategy<Value = Case> {
    let retailers = prop::collection::vec((1u32..=20, 0.05f64..1.5), 1..=4);
    let costs = (0.0f64..1000.0, 0.0f64..500.0, 0.0f64..10.0, 0.0f64..10.0);
    let times = (
        (0.0f64..3.0, 0.0f64..3.0),
        (0.0f64..3.0, 0.0f64..3.0),
        (0.0f64..2.0, 0.0f64..2.0),
        0.0f64..2.0,
    );
    let window = (0.0f64..5.0, 0.0f64..5.0);
    (
        retailers,
        costs,
        times,
        window,
        0u32..=600,
        1.0f64..60.0,
        1u32..=6,
        any::<u64>(),
        any::<[u64; 6]>(),
    )
        .prop_map(
            |(
                rs,
                (kd, ko, h, p),
                (lead, trip, leg, gap),
                (c1, cw),
                cap_extra,
                horizon,
                sid,
                seed,
                picks,
            )| {
                let retailers: Vec<RetailerSpec> = rs
                    .iter()
                    .map(|&(q, rate)| RetailerSpec {
                        order_quantity: q * 10,
                        arrival_rate: rate,
                    })
                    .collect();
                let qmax = retailers.iter().map(|r| r.order_quantity).max().unwrap();
                let qmin = retailers.iter().map(|r| r.order_quantity).min().unwrap();
                let capacity = qmax + cap_extra;
                let config = NetworkConfig {
                    retailers: retailers.clone(),
                    costs: CostParams {
                        delivery_cost: kd,
                        ordering_cost: ko,
                        holding_rate: h,
                        penalty_rate: p,
                    },
                    transport: TransportSpec {
                        truck_capacity: capacity,
                        supplier_lead_time: range(lead.0, lead.1),
                        direct_trip_time: range(trip.0, trip.1),
                        leg_time: range(leg.0, leg.1),
                        min_dispatch_gap: gap,
                    },
                    window: DeliveryWindow {
                        earliest: c1,
                        latest: c1 + cw,
                    },
                    horizon_days: horizon,
                };
                let scenario = Scenario::from_id(sid).unwrap();
                let r = 1 + (picks[0] % 300) as u32;
                let q = 1 + (picks[1] % 600) as u32;
                let n = retailers.len();
                let policy = match (scenario.dispatch_kind, scenario.is_multi_queue()) {
                    (DispatchKind::QuantityBased, true) => PolicyParams::quantity(
                        r,
                        q,
                        retailers
                            .iter()
                            .enumerate()
                            .map(|(i, rt)| {
                                let steps = capacity / rt.order_quantity;
                                let k =
                                    1 + (picks[2].rotate_left(i as u32 * 9) % steps as u64) as u32;
                                k * rt.order_quantity
                            })
                            .collect(),
                    ),
                    (DispatchKind::QuantityBased, false) => {
                        let steps = capacity / qmin;
                        let k = 1 + (picks[3] % steps as u64) as u32;
                        PolicyParams::quantity(r, q, vec![k * qmin])
                    }
                    (DispatchKind::ScheduleBased, true) => PolicyParams::schedule(
                        r,
                        q,
                        (0..n)
                            .map(|i| 1 + (picks[4].rotate_left(i as u32 * 7) % 6) as u32)
                            .collect(),
                    ),
                    (DispatchKind::ScheduleBased, false) => {
                        PolicyParams::schedule(r, q, vec![1 + (picks[5] % 6) as u32])
                    }
                };
                Case {
                    config,
                    policy,
                    scenario,
                    seed,
                }
            },
        )
}

pub fn check_invariants(c: &Case, r: &SimResult) -> Result<(), TestCaseError> {
    let b = &r.breakdown;
    let tol = 1e-9 * r.total_cost.abs().max(1.0);
    prop_assert!((r.total_cost - (b.holding + b.ordering + b.delivery + b.penalty)).abs() <= tol);
    prop_assert!((b.penalty - (b.backorder_penalty + b.window_penalty)).abs() <= tol);
    for v in [
        b.holding,
        b.ordering,
        b.delivery,
        b.backorder_penalty,
        b.window_penalty,
    ] {
        prop_assert!(v >= 0.0 && v.is_finite());
    }
    prop_assert!(
        (b.ordering - b.replenishment_orders as f64 * c.config.costs.ordering_cost).abs() <= tol
    );
    prop_assert!((b.delivery - b.truck_trips as f64 * c.config.costs.delivery_cost).abs() <= tol);
    prop_assert!((0.0..=1.0).contains(&r.fill_rate));
    prop_assert!(b.orders_filled_immediately <= b.orders_received);

    // Units entering the warehouse = units still there + units shipped or
    // waiting to ship.
    let f = &r.flows;
    prop_assert_eq!(
        f.initial_stock + f.received,
        f.on_hand_at_end + f.dispatched + f.queued_at_end
    );
    prop_assert_eq!(
        f.received + f.on_order_at_end,
        b.replenishment_orders * c.policy.order_quantity as u64
    );

    let deps = r.departures.as_ref().unwrap();
    prop_assert_eq!(deps.len() as u64, b.truck_trips);
    let mut seen = std::collections::HashSet::new();
    let mut shipped = 0;
    for (k, d) in deps.iter().enumerate() {
        prop_assert!(d.load <= c.config.transport.truck_capacity as u64);
        prop_assert!(d.load > 0);
        prop_assert!(d.time < c.config.horizon_days);
        if k > 0 {
            prop_assert!(d.time - deps[k - 1].time >= c.config.transport.min_dispatch_gap - 1e-9);
        }
        for &o in &d.orders {
            prop_assert!(seen.insert(o), "order {} shipped twice", o);
        }
        if c.scenario.is_multi_queue() {
            let q = c.config.retailers[d.queue].order_quantity as u64;
            prop_assert_eq!(d.load % q, 0);
            prop_assert_eq!(d.load / q, d.orders.len() as u64);
        }
        shipped += d.load;
    }
    prop_assert_eq!(shipped, f.dispatched);

    let trace = r.trace.as_ref().unwrap();
    for w in trace.windows(2) {
        prop_assert!(w[1].time >= w[0].time);
    }
    prop_assert!(trace.iter().all(|p| p.on_hand >= 0));
    Ok(())
}

/// Simulates one case with trace and checks it.
pub fn run_case(c: &Case) -> Result<(), TestCaseError> {
    let config = c
        .config
        .clone()
        .validate()
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let opts = SimOptions::new(config.horizon_days).with_trace();
    let r = run_with_options(&config, &c.policy, c.scenario, c.seed, &opts)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    check_invariants(c, &r)
}
