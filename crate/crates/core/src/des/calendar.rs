use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::SimError;

struct Scheduled<E> {
    at: f64,
    seq: u64,
    payload: E,
}

impl<E> PartialEq for Scheduled<E> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<E> Eq for Scheduled<E> {}

impl<E> PartialOrd for Scheduled<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Scheduled<E> {
    // Reversed: BinaryHeap is a max-heap and the earliest (time, seq) must pop first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .at
            .total_cmp(&self.at)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl<E: Clone> Clone for Scheduled<E> {
    fn clone(&self) -> Self {
        Self {
            at: self.at,
            seq: self.seq,
            payload: self.payload.clone(),
        }
    }
}

/// Pending events ordered by timestamp, ties broken by insertion order.
#[derive(Clone)]
pub struct EventCalendar<E> {
    heap: BinaryHeap<Scheduled<E>>,
    now: f64,
    next_seq: u64,
}

impl<E> Default for EventCalendar<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventCalendar<E> {
    pub fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            now: 0.0,
            next_seq: 0,
        }
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|s| s.at)
    }

    pub fn schedule(&mut self, at: f64, payload: E) -> Result<(), SimError> {
        if !at.is_finite() {
            return Err(SimError::NonFiniteTime(at));
        }
        if at < self.now {
            return Err(SimError::BackInTime { at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Scheduled { at, seq, payload });
        Ok(())
    }

    /// Removes the earliest event and advances the clock to its timestamp.
    pub fn pop(&mut self) -> Option<(f64, E)> {
        let next = self.heap.pop()?;
        self.now = next.at;
        Some((next.at, next.payload))
    }

    /// Empties the calendar and rewinds the clock to zero.
    pub fn reset(&mut self) {
        self.heap.clear();
        self.now = 0.0;
        self.next_seq = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drain(cal: &mut EventCalendar<&'static str>) -> Vec<&'static str> {
        std::iter::from_fn(|| cal.pop().map(|(_, e)| e)).collect()
    }

    #[test]
    fn dispatches_by_time() {
        let mut cal = EventCalendar::new();
        cal.schedule(5.0, "five").unwrap();
        cal.schedule(3.0, "three").unwrap();
        assert_eq!(drain(&mut cal), ["three", "five"]);
        assert_eq!(cal.now(), 5.0);
    }

    #[test]
    fn ties_keep_insertion_order() {
        let mut cal = EventCalendar::new();
        cal.schedule(7.0, "A").unwrap();
        cal.schedule(7.0, "B").unwrap();
        cal.schedule(7.0, "C").unwrap();
        assert_eq!(drain(&mut cal), ["A", "B", "C"]);
    }

    #[test]
    fn schedule_at_now_goes_first() {
        let mut cal = EventCalendar::new();
        cal.schedule(4.0, "later").unwrap();
        cal.schedule(2.0, "first").unwrap();
        assert_eq!(cal.pop().unwrap().1, "first");
        cal.schedule(2.0, "now").unwrap();
        assert_eq!(drain(&mut cal), ["now", "later"]);
    }

    #[test]
    fn rejects_past_and_non_finite() {
        let mut cal = EventCalendar::new();
        cal.schedule(10.0, "x").unwrap();
        cal.pop();
        assert_eq!(
            cal.schedule(9.0, "y"),
            Err(SimError::BackInTime { at: 9.0, now: 10.0 })
        );
        assert!(cal.schedule(f64::NAN, "z").is_err());
        assert!(cal.schedule(f64::INFINITY, "z").is_err());
    }

    #[test]
    fn clock_never_moves_backward() {
        let mut cal = EventCalendar::new();
        for t in [9.0, 1.0, 4.0, 4.0, 0.5, 7.25] {
            cal.schedule(t, "e").unwrap();
        }
        let mut last = 0.0;
        while let Some((t, _)) = cal.pop() {
            assert!(t >= last);
            last = t;
        }
    }
}
