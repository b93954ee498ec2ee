use serde::{Deserialize, Serialize};

use super::Vec2;

/// Which sign changes of an event function count as hits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// From negative to non-negative.
    Rising,
    /// From positive to non-positive.
    Falling,
    Both,
}

impl Direction {
    pub(crate) fn crosses(self, before: f64, after: f64) -> bool {
        let rising = before < 0.0 && after >= 0.0;
        let falling = before > 0.0 && after <= 0.0;
        match self {
            Self::Rising => rising,
            Self::Falling => falling,
            Self::Both => rising || falling,
        }
    }
}

/// A scalar event function of (t, x) with direction and terminal flag.
pub struct EventSpec<'a> {
    func: Box<dyn Fn(f64, Vec2) -> f64 + Sync + 'a>,
    pub direction: Direction,
    pub terminal: bool,
    /// Typical magnitude of the event function; hits are polished until
    /// |g| <= 1e-10 scale or the time bracket collapses.
    pub scale: f64,
    pub name: String,
}

impl<'a> EventSpec<'a> {
    pub fn new(
        name: impl Into<String>,
        direction: Direction,
        func: impl Fn(f64, Vec2) -> f64 + Sync + 'a,
    ) -> Self {
        Self {
            func: Box::new(func),
            direction,
            terminal: false,
            scale: 1.0,
            name: name.into(),
        }
    }

    pub fn terminal(mut self, terminal: bool) -> Self {
        self.terminal = terminal;
        self
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn value(&self, t: f64, x: Vec2) -> f64 {
        (self.func)(t, x)
    }
}

impl std::fmt::Debug for EventSpec<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EventSpec")
            .field("name", &self.name)
            .field("direction", &self.direction)
            .field("terminal", &self.terminal)
            .field("scale", &self.scale)
            .finish()
    }
}

/// A located event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventHit {
    pub index: usize,
    pub t: f64,
    pub x: Vec2,
    /// Event function value at the located time.
    pub value: f64,
}

/// Brent iteration control for event polishing.
pub(crate) struct Polish {
    pub xtol: f64,
    pub ytol: f64,
}

impl roots::Convergency<f64> for Polish {
    fn is_root_found(&mut self, y: f64) -> bool {
        y.abs() <= self.ytol
    }

    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        (x1 - x2).abs() <= self.xtol
    }

    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter > 200
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_directions() {
        assert!(Direction::Rising.crosses(-1.0, 0.0));
        assert!(!Direction::Rising.crosses(0.0, 1.0));
        assert!(Direction::Falling.crosses(1.0, -1.0));
        assert!(!Direction::Falling.crosses(-1.0, 1.0));
        assert!(Direction::Both.crosses(-1.0, 1.0) && Direction::Both.crosses(1.0, -1.0));
    }
}
