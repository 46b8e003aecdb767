use std::cell::RefCell;

use crate::model::{Request, Time};

/// True requests handed out at their release times.
///
/// The only way to see a request is [`OnlineStream::advance`], which reveals
/// everything released by the given time. Every reveal is written to an
/// audit log so tests can check that nothing was seen early.
#[derive(Debug)]
pub struct OnlineStream {
    requests: Vec<Request>,
    /// Indices sorted by `(release, index)`.
    order: Vec<usize>,
    next: usize,
    clock: Time,
    audit: RefCell<Vec<Reveal>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reveal {
    pub index: usize,
    pub release: Time,
    pub at: Time,
}

impl OnlineStream {
    pub fn new(requests: Vec<Request>) -> Self {
        let mut order: Vec<usize> = (0..requests.len()).collect();
        order.sort_by_key(|&i| (requests[i].release, i));
        OnlineStream { requests, order, next: 0, clock: Time::MIN, audit: RefCell::new(Vec::new()) }
    }

    /// Reveals every request with release `<= t`; returns only the new ones.
    /// The clock never runs backwards: asking for an earlier time than
    /// before reveals nothing.
    pub fn advance(&mut self, t: Time) -> Vec<(usize, Request)> {
        self.clock = self.clock.max(t);
        let mut out = Vec::new();
        while self.next < self.order.len() {
            let i = self.order[self.next];
            let q = self.requests[i];
            if q.release > self.clock {
                break;
            }
            self.audit.borrow_mut().push(Reveal { index: i, release: q.release, at: self.clock });
            out.push((i, q));
            self.next += 1;
        }
        out
    }

    pub fn clock(&self) -> Time {
        self.clock
    }

    pub fn audit(&self) -> Vec<Reveal> {
        self.audit.borrow().clone()
    }

    /// Ends the run and hands back the full sequence for scoring.
    pub fn finish(self) -> (Vec<Request>, Vec<Reveal>) {
        (self.requests, self.audit.into_inner())
    }
}
