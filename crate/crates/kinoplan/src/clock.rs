use std::time::Instant;

use kinoplan_core::{Clock, WorkCounters};

/// Real elapsed time since construction; ignores the work counters.
#[derive(Clone, Copy, Debug)]
pub struct WallClock {
    start: Instant,
}

impl WallClock {
    pub fn start() -> Self {
        WallClock { start: Instant::now() }
    }
}

impl Clock for WallClock {
    fn elapsed(&self, _: &WorkCounters) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}
