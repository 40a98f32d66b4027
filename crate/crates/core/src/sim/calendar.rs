//! Pending-event store for the event-scheduling kernel.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    ReplenishmentArrival { quantity: u32 },
    DeliveryArrival { order: usize },
    OrderArrival { retailer: usize },
    ScheduledDispatch { queue: usize },
    DispatchEligible,
}

impl EventKind {
    /// Tie-break rank at equal times. Stock arriving now is usable by demand
    /// arriving now.
    pub fn rank(&self) -> u8 {
        match self {
            EventKind::ReplenishmentArrival { .. } => 0,
            EventKind::DeliveryArrival { .. } => 1,
            EventKind::OrderArrival { .. } => 2,
            EventKind::ScheduledDispatch { .. } => 3,
            EventKind::DispatchEligible => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub seq: u64,
}

impl Event {
    fn key(&self) -> (f64, u8, u64) {
        (self.time, self.kind.rank(), self.seq)
    }
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        let (t1, k1, s1) = self.key();
        let (t2, k2, s2) = other.key();
        t1.total_cmp(&t2).then(k1.cmp(&k2)).then(s1.cmp(&s2))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CalendarError {
    #[error("event calendar is empty")]
    Empty,
    #[error("cannot schedule an event at {time} before the clock {clock}")]
    InPast { time: f64, clock: f64 },
}

/// Min-ordered by `(time, kind rank, insertion seq)`.
#[derive(Debug, Default)]
pub struct EventCalendar {
    heap: BinaryHeap<Reverse<Event>>,
    next_seq: u64,
    clock: f64,
}

impl EventCalendar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn schedule(&mut self, time: f64, kind: EventKind) -> Result<u64, CalendarError> {
        if !(time >= self.clock) {
            return Err(CalendarError::InPast {
                time,
                clock: self.clock,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Event { time, kind, seq }));
        Ok(seq)
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|Reverse(e)| e.time)
    }

    /// Removes the minimum event and advances the clock to its time.
    pub fn pop_next_event(&mut self) -> Result<Event, CalendarError> {
        let Reverse(e) = self.heap.pop().ok_or(CalendarError::Empty)?;
        self.clock = e.time;
        Ok(e)
    }
}
