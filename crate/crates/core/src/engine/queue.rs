//! Time-ordered event queue with a monotone sequence tiebreak.

use alloc::collections::BinaryHeap;
use core::cmp::{Ordering, Reverse};

use thiserror::Error;

use crate::time::{SimDuration, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("event scheduled at {requested} but the clock is already at {now}")]
pub struct ScheduleError {
    pub requested: SimTime,
    pub now: SimTime,
}

/// A scheduled event. Ordered by `(fire_at, seq)`; `seq` is unique per queue.
#[derive(Debug, Clone)]
pub struct Event<T> {
    pub fire_at: SimTime,
    pub seq: u64,
    pub payload: T,
}

impl<T> PartialEq for Event<T> {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl<T> Eq for Event<T> {}

impl<T> PartialOrd for Event<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T> Ord for Event<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl<T> Event<T> {
    fn key(&self) -> (SimTime, u64) {
        (self.fire_at, self.seq)
    }
}

#[derive(Debug, Clone)]
pub struct EventQueue<T> {
    heap: BinaryHeap<Reverse<Event<T>>>,
    now: SimTime,
    next_seq: u64,
}

impl<T> Default for EventQueue<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T> EventQueue<T> {
    pub fn new() -> Self {
        Self { heap: BinaryHeap::new(), now: SimTime::ZERO, next_seq: 0 }
    }

    /// Current clock: the firing time of the last popped event.
    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn schedule(&mut self, fire_at: SimTime, payload: T) -> Result<u64, ScheduleError> {
        if fire_at < self.now {
            return Err(ScheduleError { requested: fire_at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Event { fire_at, seq, payload }));
        Ok(seq)
    }

    /// Schedules relative to the current clock; never fails.
    pub fn schedule_after(&mut self, delay: SimDuration, payload: T) -> u64 {
        let at = self.now + delay;
        self.schedule(at, payload).expect("a non-negative delay cannot land in the past")
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|Reverse(e)| e.fire_at)
    }

    /// Removes the earliest event and advances the clock to it.
    pub fn pop(&mut self) -> Option<Event<T>> {
        let Reverse(event) = self.heap.pop()?;
        self.now = event.fire_at;
        Some(event)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
