//! Decision variables and their integer gene encoding.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::scenario::{DecisionBounds, DispatchKind, Scenario};
use crate::ssga::FitnessRecord;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum DispatchParams {
    /// Quantity thresholds: one shared value or one per retailer queue.
    Quantity(Vec<u32>),
    /// Shipping intervals in whole days: one shared value or one per queue.
    Schedule(Vec<u32>),
}

impl DispatchParams {
    pub fn values(&self) -> &[u32] {
        match self {
            DispatchParams::Quantity(v) | DispatchParams::Schedule(v) => v,
        }
    }

    pub fn kind(&self) -> DispatchKind {
        match self {
            DispatchParams::Quantity(_) => DispatchKind::QuantityBased,
            DispatchParams::Schedule(_) => DispatchKind::ScheduleBased,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyParams {
    pub reorder_point: u32,
    pub order_quantity: u32,
    pub dispatch: DispatchParams,
}

impl PolicyParams {
    pub fn quantity(reorder_point: u32, order_quantity: u32, thresholds: Vec<u32>) -> Self {
        Self {
            reorder_point,
            order_quantity,
            dispatch: DispatchParams::Quantity(thresholds),
        }
    }

    pub fn schedule(reorder_point: u32, order_quantity: u32, intervals: Vec<u32>) -> Self {
        Self {
            reorder_point,
            order_quantity,
            dispatch: DispatchParams::Schedule(intervals),
        }
    }

    /// Gene order: r, Q, then dispatch variables by retailer index.
    pub fn encode(&self) -> Vec<i64> {
        let mut genes = vec![self.reorder_point as i64, self.order_quantity as i64];
        genes.extend(self.dispatch.values().iter().map(|&v| v as i64));
        genes
    }

    /// Checks that the dispatch variant and arity fit the scenario.
    pub fn check_shape(&self, scenario: Scenario, retailers: usize) -> Result<(), GeneError> {
        if self.dispatch.kind() != scenario.dispatch_kind {
            return Err(GeneError::WrongDispatchKind);
        }
        let want = scenario.queue_count(retailers);
        let got = self.dispatch.values().len();
        if got != want {
            return Err(GeneError::LengthMismatch {
                expected: want + 2,
                actual: got + 2,
            });
        }
        if self.dispatch.values().contains(&0) {
            return Err(GeneError::NonPositive { index: 2 });
        }
        Ok(())
    }

    /// `M=300` or `S_1=3;S_2=3;S_3=3`.
    pub fn dispatch_label(&self) -> String {
        let (sym, vals) = match &self.dispatch {
            DispatchParams::Quantity(v) => ("M", v),
            DispatchParams::Schedule(v) => ("S", v),
        };
        if vals.len() == 1 {
            format!("{sym}={}", vals[0])
        } else {
            vals.iter()
                .enumerate()
                .map(|(i, v)| format!("{sym}_{}={v}", i + 1))
                .collect::<Vec<_>>()
                .join(";")
        }
    }
}

impl fmt::Display for PolicyParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "r={} Q={} {}",
            self.reorder_point,
            self.order_quantity,
            self.dispatch_label()
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeneError {
    #[error("length mismatch: expected {expected} genes, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("gene {index} must be a positive integer")]
    NonPositive { index: usize },
    #[error("gene {index} ({name}) = {value} outside [{lower}, {upper}] step {step}")]
    OutOfBounds {
        index: usize,
        name: String,
        value: i64,
        lower: i64,
        upper: i64,
        step: i64,
    },
    #[error("dispatch parameters do not match the scenario's dispatch kind")]
    WrongDispatchKind,
}

/// Maps genes to policy parameters, checking arity and positivity only.
pub fn decode_chromosome(
    genes: &[i64],
    scenario: Scenario,
    retailers: usize,
) -> Result<PolicyParams, GeneError> {
    let expected = scenario.gene_count(retailers);
    if genes.len() != expected {
        return Err(GeneError::LengthMismatch {
            expected,
            actual: genes.len(),
        });
    }
    if let Some(index) = genes.iter().position(|&g| g <= 0 || g > u32::MAX as i64) {
        return Err(GeneError::NonPositive { index });
    }
    let dispatch: Vec<u32> = genes[2..].iter().map(|&g| g as u32).collect();
    let dispatch = match scenario.dispatch_kind {
        DispatchKind::QuantityBased => DispatchParams::Quantity(dispatch),
        DispatchKind::ScheduleBased => DispatchParams::Schedule(dispatch),
    };
    Ok(PolicyParams {
        reorder_point: genes[0] as u32,
        order_quantity: genes[1] as u32,
        dispatch,
    })
}

impl DecisionBounds {
    pub fn check(&self, genes: &[i64]) -> Result<(), GeneError> {
        if genes.len() != self.vars.len() {
            return Err(GeneError::LengthMismatch {
                expected: self.vars.len(),
                actual: genes.len(),
            });
        }
        for (index, (b, &value)) in self.vars.iter().zip(genes).enumerate() {
            if !b.contains(value) {
                return Err(GeneError::OutOfBounds {
                    index,
                    name: b.name.clone(),
                    value,
                    lower: b.lower,
                    upper: b.upper,
                    step: b.step,
                });
            }
        }
        Ok(())
    }

    /// Bound-checked decode.
    pub fn decode(&self, genes: &[i64], scenario: Scenario) -> Result<PolicyParams, GeneError> {
        self.check(genes)?;
        // The bounds fix the arity; for multi-queue scenarios it implies the retailer count.
        let retailers = if scenario.is_multi_queue() {
            self.vars.len() - 2
        } else {
            1
        };
        decode_chromosome(genes, scenario, retailers)
    }
}

/// An integer-coded candidate solution with its cached fitness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chromosome {
    pub genes: Vec<i64>,
    pub fitness: Option<FitnessRecord>,
}

impl Chromosome {
    pub fn new(genes: Vec<i64>) -> Self {
        Self {
            genes,
            fitness: None,
        }
    }

    /// Fitness value, or `+inf` when not yet evaluated.
    pub fn f(&self) -> f64 {
        self.fitness.as_ref().map_or(f64::INFINITY, |r| r.f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::config::NetworkConfig;
    use crate::model::scenario::bounds_for_scenario;
    use proptest::prelude::*;

    fn sc(id: u32) -> Scenario {
        Scenario::from_id(id).unwrap()
    }

    #[test]
    fn decode_best_single_queue_solution() {
        let p = decode_chromosome(&[303, 261, 300], sc(2), 3).unwrap();
        assert_eq!(p, PolicyParams::quantity(303, 261, vec![300]));
        assert_eq!(p.dispatch_label(), "M=300");
    }

    #[test]
    fn decode_best_multi_queue_schedule() {
        let p = decode_chromosome(&[277, 316, 3, 3, 3], sc(4), 3).unwrap();
        assert_eq!(p, PolicyParams::schedule(277, 316, vec![3, 3, 3]));
        assert_eq!(p.dispatch_label(), "S_1=3;S_2=3;S_3=3");
    }

    #[test]
    fn decode_rejects_wrong_arity() {
        assert_eq!(
            decode_chromosome(&[303, 261], sc(2), 3),
            Err(GeneError::LengthMismatch {
                expected: 3,
                actual: 2
            })
        );
    }

    #[test]
    fn bounded_decode_flags_out_of_range_gene() {
        let cfg = NetworkConfig::reference_instance();
        let b = bounds_for_scenario(sc(2), &cfg);
        // r = 303 lies above the r search range even though it decodes structurally.
        match b.decode(&[303, 261, 300], sc(2)) {
            Err(GeneError::OutOfBounds { index: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match b.decode(&[250, 261, 325], sc(2)) {
            Err(GeneError::OutOfBounds { index: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert!(b.decode(&[250, 261, 300], sc(2)).is_ok());
    }

    fn in_bounds_policy(id: u32) -> impl Strategy<Value = (Scenario, Vec<i64>)> {
        let cfg = NetworkConfig::reference_instance();
        let b = bounds_for_scenario(sc(id), &cfg);
        let per_gene: Vec<_> = b
            .vars
            .iter()
            .map(|v| {
                let v = v.clone();
                (0..v.grid_len()).prop_map(move |k| v.grid_value(k))
            })
            .collect();
        per_gene.prop_map(move |g| (sc(id), g))
    }

    proptest! {
        #[test]
        fn decode_encode_round_trip((s, genes) in (1u32..=6).prop_flat_map(in_bounds_policy)) {
            let cfg = NetworkConfig::reference_instance();
            let b = bounds_for_scenario(s, &cfg);
            let p = b.decode(&genes, s).unwrap();
            p.check_shape(s, 3).unwrap();
            prop_assert_eq!(p.encode(), genes.clone());
            prop_assert_eq!(decode_chromosome(&p.encode(), s, 3).unwrap(), p);
        }
    }
}
