use crate::error::ModelError;
use crate::params::{EpsSplit, PhysicalParams};

use super::{ChartAState, ChartBState, LogState, State};

impl State {
    pub fn to_chart_a(self, es: &EpsSplit) -> ChartAState {
        ChartAState {
            sigma: es.eps * self.s,
            h: self.h,
        }
    }

    pub fn to_chart_b(self, es: &EpsSplit) -> ChartBState {
        ChartBState {
            s: self.s,
            eta: self.h / es.eps,
        }
    }
}

impl ChartAState {
    pub fn to_state(self, es: &EpsSplit) -> State {
        State {
            s: self.sigma / es.eps,
            h: self.h,
        }
    }
}

impl ChartBState {
    pub fn to_state(self, es: &EpsSplit) -> State {
        State {
            s: self.s,
            h: es.eps * self.eta,
        }
    }
}

/// (pS, pH) = (-log10(s S_ext), -log10(h H_ext)).
pub fn to_log(state: State, phys: &PhysicalParams) -> Result<LogState, ModelError> {
    if !(state.s > 0.0) {
        return Err(ModelError::domain("log conversion", "s > 0", state.s));
    }
    if !(state.h > 0.0) {
        return Err(ModelError::domain("log conversion", "h > 0", state.h));
    }
    Ok(LogState {
        ps: -(state.s * phys.s_ext).log10(),
        ph: -(state.h * phys.h_ext).log10(),
    })
}

pub fn from_log(x: LogState, phys: &PhysicalParams) -> State {
    State {
        s: 10f64.powf(-x.ps) / phys.s_ext,
        h: 10f64.powf(-x.ph) / phys.h_ext,
    }
}
