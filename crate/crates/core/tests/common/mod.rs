#![allow(dead_code)]

pub mod fuzz;

use dispatch_opt::model::{
    CostParams, DayRange, DeliveryWindow, NetworkConfig, PolicyParams, RetailerSpec, Scenario,
    TransportSpec,
};
use dispatch_opt::sim::{CostLedger, ScriptedArrival, SimOptions};

/// Ten-day instance with every distribution degenerate and demand scripted
/// at t = 1..9 rotating over the three retailers.
pub fn scripted_config() -> NetworkConfig {
    NetworkConfig {
        retailers: [50, 100, 150]
            .into_iter()
            .map(|q| RetailerSpec {
                order_quantity: q,
                arrival_rate: 1.0 / 3.0,
            })
            .collect(),
        costs: CostParams {
            delivery_cost: 500.0,
            ordering_cost: 200.0,
            holding_rate: 1.0,
            penalty_rate: 2.0,
        },
        transport: TransportSpec {
            truck_capacity: 500,
            supplier_lead_time: DayRange::fixed(3.0),
            direct_trip_time: DayRange::fixed(3.0),
            leg_time: DayRange::fixed(1.5),
            min_dispatch_gap: 1.0,
        },
        window: DeliveryWindow {
            earliest: 4.0,
            latest: 5.0,
        },
        horizon_days: 10.0,
    }
}

pub fn scripted_policy() -> PolicyParams {
    PolicyParams::quantity(100, 200, vec![300])
}

pub fn scripted_scenario() -> Scenario {
    Scenario::from_id(2).unwrap()
}

pub fn scripted_options() -> SimOptions {
    let mut opts = SimOptions::new(10.0).with_trace();
    opts.arrivals = Some(
        (1..=9)
            .map(|t| ScriptedArrival {
                time: t as f64,
                retailer: (t - 1) % 3,
            })
            .collect(),
    );
    opts
}

/// Hand-computed ledger for the scripted instance.
///
/// | t   | event                          | on hand | notes                          |
/// |-----|--------------------------------|---------|--------------------------------|
/// | 0   | review, position 100 <= r      | 100     | order #1 due t=3               |
/// | 1   | o1 (50) filled                 | 50      |                                |
/// | 2   | o2 (100) backordered           | 50      |                                |
/// | 3   | +200, o2 served (wait 1)       | 150     | 200 penalty                    |
/// | 3   | o3 (150) filled, review        | 0       | order #2 due t=6; truck o1-o3  |
/// | 4   | o4 (50) backordered            | 0       |                                |
/// | 4.5 | o1 delivered, lead 3.5         |         | early 0.5 -> 50                |
/// | 5   | o5 (100) backordered, review   | 0       | order #3 due t=8               |
/// | 6   | +200, o4 (wait 2), o5 (wait 1) | 50      | 200 + 200 penalty              |
/// | 6   | o2 delivered, lead 4           |         |                                |
/// | 6   | o6 (150) backordered, review   | 50      | order #4 due t=9               |
/// | 7   | o7 (50) filled                 | 0       |                                |
/// | 7.5 | o3 delivered, lead 4.5         |         |                                |
/// | 8   | +200, o6 served (wait 2)       | 50      | 600 penalty; truck o4,o5,o7,o6 |
/// | 8   | o8 (100) backordered           | 50      |                                |
/// | 9   | +200, o8 served (wait 1)       | 150     | 200 penalty                    |
/// | 9   | o9 (150) filled, review        | 0       | order #5                       |
/// | 9.5 | o4 late 0.5, o7 early 1.5      |         | 50 + 150                       |
///
/// Holding: 100 + 50 + 50 + 50 + 50 = 300 unit-days.
pub fn scripted_expected() -> CostLedger {
    CostLedger {
        holding: 300.0,
        ordering: 1000.0,
        delivery: 1000.0,
        penalty: 1650.0,
        backorder_penalty: 1400.0,
        window_penalty: 250.0,
        orders_received: 9,
        orders_filled_immediately: 4,
        replenishment_orders: 5,
        truck_trips: 2,
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

/// Compares every ledger field at relative tolerance `tol`; returns the
/// mismatching fields.
pub fn ledger_mismatches(got: &CostLedger, want: &CostLedger, tol: f64) -> Vec<String> {
    let mut bad = Vec::new();
    for (name, g, w) in [
        ("holding", got.holding, want.holding),
        ("ordering", got.ordering, want.ordering),
        ("delivery", got.delivery, want.delivery),
        ("penalty", got.penalty, want.penalty),
        (
            "backorder_penalty",
            got.backorder_penalty,
            want.backorder_penalty,
        ),
        ("window_penalty", got.window_penalty, want.window_penalty),
        ("total", got.total(), want.total()),
    ] {
        if rel_err(g, w) > tol {
            bad.push(format!("{name}: got {g}, want {w}"));
        }
    }
    for (name, g, w) in [
        ("orders_received", got.orders_received, want.orders_received),
        (
            "filled",
            got.orders_filled_immediately,
            want.orders_filled_immediately,
        ),
        (
            "replenishments",
            got.replenishment_orders,
            want.replenishment_orders,
        ),
        ("trucks", got.truck_trips, want.truck_trips),
    ] {
        if g != w {
            bad.push(format!("{name}: got {g}, want {w}"));
        }
    }
    bad
}

/// Exact probability that member `i` (rank by F ascending, distinct values)
/// wins a size-k tournament drawn without replacement from `n` members:
/// C(n-1-i, k-1) / C(n, k).
pub fn tournament_win_probability(n: usize, k: usize, rank: usize) -> f64 {
    fn choose(n: usize, k: usize) -> f64 {
        if k > n {
            return 0.0;
        }
        (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
    }
    choose(n - 1 - rank, k - 1) / choose(n, k)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    adaptive(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Student-t quantile by quadrature of the density plus bisection. Shares
/// no code with the library's incomplete-beta route.
pub fn t_quantile_oracle(prob: f64, df: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let norm = (ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0)).exp()
        / (df * std::f64::consts::PI).sqrt();
    let pdf = move |x: f64| norm * (1.0 + x * x / df).powf(-(df + 1.0) / 2.0);
    let cdf = |x: f64| {
        let (fa, fm, fb) = (pdf(0.0), pdf(x / 2.0), pdf(x));
        0.5 + adaptive(
            &pdf,
            0.0,
            x,
            fa,
            fm,
            fb,
            simpson(0.0, x, fa, fm, fb),
            1e-14,
            50,
        )
    };
    let mut hi = 1.0;
    while cdf(hi) < prob {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Normal-noise evaluator with known mean and standard deviation; each
/// seed gives one reproducible draw.
pub fn noisy_evaluator(mu: f64, sigma: f64) -> impl FnMut(u64) -> f64 {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    move |seed| {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let z: f64 = StandardNormal.sample(&mut rng);
        mu + sigma * z
    }
}

/// Relative CI width recomputed with statrs.
pub fn relative_width_oracle(samples: &[f64], confidence: f64) -> f64 {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    use statrs::statistics::Statistics;
    let n = samples.len() as f64;
    let mean = samples.mean();
    let sd = samples.std_dev();
    let t = StudentsT::new(0.0, 1.0, n - 1.0)
        .unwrap()
        .inverse_cdf(1.0 - (1.0 - confidence) / 2.0);
    2.0 * t * sd / n.sqrt() / mean.abs()
}

/// Smooth bowl over `(r, Q)` with its minimum at r = 100, Q = 500.
pub fn bowl(genes: &[i64]) -> dispatch_opt::ssga::FitnessRecord {
    let (r, q) = (genes[0] as f64, genes[1] as f64);
    dispatch_opt::ssga::FitnessRecord::new((r - 100.0).powi(2) + (q - 500.0).powi(2), 1.0, 1, true)
}
