//! Time series and verdicts produced by runs and experiments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::fit::FitResult;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub t: f64,
    /// `[Q1, Q2, Q3, Q4]`; NaN where the functional is undefined for the run.
    pub q: [f64; 4],
    /// `‖B‖_{H^s}` for each `s` of [`RunRecord::s_list`].
    pub hs_b: Vec<f64>,
    pub h_psi1: f64,
    pub h_psi2: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "reason", rename_all = "snake_case")]
pub enum Verdict {
    /// Plain run without acceptance band.
    Complete,
    Pass,
    Fail(String),
    Inconclusive(String),
}

impl Verdict {
    pub fn exit_code(&self) -> i32 {
        match self {
            Verdict::Complete | Verdict::Pass => 0,
            Verdict::Inconclusive(_) => 2,
            Verdict::Fail(_) => 1,
        }
    }

    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    /// Combines verdicts: any failure wins, then any inconclusive.
    pub fn and(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail(a), Fail(b)) => Fail(format!("{a}; {b}")),
            (Fail(a), _) | (_, Fail(a)) => Fail(a),
            (Inconclusive(a), Inconclusive(b)) => Inconclusive(format!("{a}; {b}")),
            (Inconclusive(a), _) | (_, Inconclusive(a)) => Inconclusive(a),
            (Pass, _) | (_, Pass) => Pass,
            (Complete, Complete) => Complete,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub s_list: Vec<f64>,
    /// Sobolev index used for the `Hpsi1`, `Hpsi2` columns.
    pub psi_s: f64,
    pub rows: Vec<RecordRow>,
    /// Experiment-level observables, keyed by name.
    pub scalars: BTreeMap<String, f64>,
    pub fits: BTreeMap<String, FitResult>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

impl RunRecord {
    pub fn new(s_list: Vec<f64>, psi_s: f64) -> Self {
        RunRecord {
            s_list,
            psi_s,
            rows: Vec::new(),
            scalars: BTreeMap::new(),
            fits: BTreeMap::new(),
            notes: Vec::new(),
            verdict: Verdict::Complete,
        }
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    /// Column of `Q_i`, `i` in `1..=4`.
    pub fn q_series(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.q[i - 1]).collect()
    }

    /// `max_t |Q_i(t) − Q_i(0)| / |Q_i(0)|` (absolute when `Q_i(0) = 0`).
    pub fn relative_drift(&self, i: usize) -> f64 {
        let q = self.q_series(i);
        let Some(&q0) = q.first() else { return 0.0 };
        let scale = if q0 == 0.0 { 1.0 } else { q0.abs() };
        q.iter().map(|v| (v - q0).abs() / scale).fold(0.0, f64::max)
    }

    pub fn hs_series(&self, idx: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.hs_b[idx]).collect()
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.scalars.insert(key.to_string(), value);
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }
}
