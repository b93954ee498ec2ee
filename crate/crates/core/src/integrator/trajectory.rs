use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::{EventHit, Vec2};

/// Continuous extension over one accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    pub y0: Vec2,
    pub y1: Vec2,
    pub d2: Vec2,
    pub d3: Vec2,
}

impl DenseSegment {
    /// Interpolated state at `t`, nominally within [t0, t0 + h].
    pub fn eval(&self, t: f64) -> Vec2 {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        std::array::from_fn(|i| {
            th1 * self.y0[i] + th * (self.y1[i] + th1 * (self.d2[i] + th * self.d3[i]))
        })
    }
}

/// Time-ordered samples with dense output and recorded event hits.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub x: Vec<Vec2>,
    /// `segments[i]` interpolates between samples `i` and `i + 1`; empty when
    /// steps were not recorded.
    pub segments: Vec<DenseSegment>,
    pub events: Vec<EventHit>,
    pub n_steps: usize,
    pub n_rejected: usize,
}

impl Trajectory {
    pub(crate) fn start(t0: f64, x0: Vec2) -> Self {
        Self {
            t: vec![t0],
            x: vec![x0],
            ..Self::default()
        }
    }

    pub(crate) fn push(&mut self, t: f64, x: Vec2, seg: DenseSegment, record: bool) {
        if record {
            self.t.push(t);
            self.x.push(x);
            self.segments.push(seg);
        }
    }

    /// Adds the terminal sample at an event inside the last step.
    pub(crate) fn push_final(&mut self, t: f64, x: Vec2, seg: DenseSegment, record: bool) {
        if record {
            if t > *self.t.last().expect("non-empty") {
                self.t.push(t);
                self.x.push(x);
                self.segments.push(seg);
            }
        } else {
            self.close(t, x);
        }
    }

    /// Stores the end point when intermediate steps were not recorded.
    pub(crate) fn close(&mut self, t: f64, x: Vec2) {
        if t > *self.t.last().expect("non-empty") {
            self.t.push(t);
            self.x.push(x);
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.t[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.t.last().expect("non-empty")
    }

    pub fn last_state(&self) -> Vec2 {
        *self.x.last().expect("non-empty")
    }

    /// Dense-output state at `t`; `None` outside the covered interval or when
    /// steps were not recorded.
    pub fn eval(&self, t: f64) -> Option<Vec2> {
        if t < self.t_start() || t > self.t_end() {
            return None;
        }
        if t == self.t_start() {
            return Some(self.x[0]);
        }
        if self.segments.is_empty() {
            return (t == self.t_end()).then(|| self.last_state());
        }
        let i = self
            .t
            .partition_point(|&ti| ti < t)
            .saturating_sub(1)
            .min(self.segments.len() - 1);
        Some(self.segments[i].eval(t))
    }

    /// Hits of the event with the given index.
    pub fn hits(&self, index: usize) -> impl Iterator<Item = &EventHit> {
        self.events.iter().filter(move |e| e.index == index)
    }

    /// Writes one CSV row per sample: `header` names the columns and `row`
    /// maps (t, x) to their values. Floats carry 17 significant digits.
    pub fn write_csv<W: Write>(
        &self,
        out: &mut W,
        header: &[&str],
        row: impl Fn(f64, Vec2) -> Vec<f64>,
    ) -> io::Result<()> {
        writeln!(out, "{}", header.join(","))?;
        for (t, x) in self.t.iter().zip(&self.x) {
            let vals: Vec<String> = row(*t, *x).iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", vals.join(","))?;
        }
        Ok(())
    }
}
