//! Time budgets without depending on `std`.

use core::time::Duration;

/// Monotonic elapsed-time source.
pub trait Clock {
    /// Time since the clock was started.
    fn elapsed(&self) -> Duration;
}

/// A clock that never advances. Budgets measured with it never expire.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed(&self) -> Duration {
        Duration::ZERO
    }
}

/// A clock plus an optional limit on its elapsed time.
#[derive(Clone, Copy)]
pub struct Deadline<'a> {
    clock: &'a dyn Clock,
    limit: Option<Duration>,
}

impl<'a> Deadline<'a> {
    pub fn new(clock: &'a dyn Clock, limit: Option<Duration>) -> Self {
        Deadline { clock, limit }
    }

    pub fn unlimited() -> Deadline<'static> {
        Deadline { clock: &NoClock, limit: None }
    }

    pub fn elapsed(&self) -> Duration {
        self.clock.elapsed()
    }

    pub fn expired(&self) -> bool {
        self.limit.is_some_and(|l| self.clock.elapsed() >= l)
    }

    /// Time left, `None` when unlimited.
    pub fn remaining(&self) -> Option<Duration> {
        self.limit.map(|l| l.saturating_sub(self.clock.elapsed()))
    }

    /// The tighter of this deadline and `budget` from now, on the same clock.
    pub fn tightened(&self, budget: Option<Duration>) -> Deadline<'a> {
        let limit = match (self.limit, budget) {
            (None, None) => None,
            (Some(l), None) => Some(l),
            (None, Some(b)) => Some(self.clock.elapsed() + b),
            (Some(l), Some(b)) => Some(l.min(self.clock.elapsed() + b)),
        };
        Deadline { clock: self.clock, limit }
    }
}

impl core::fmt::Debug for Deadline<'_> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Deadline").field("limit", &self.limit).finish()
    }
}
