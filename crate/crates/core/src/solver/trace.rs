use std::fmt::Write as _;
use std::io::{self, Write};

use crate::geometry::Vector;

pub const CSV_HEADER: &str = "n,gamma,alpha,f_val,phi_val,Phi_n,step_norm,f_gap,dist_to_target,nu_n";

/// One logged iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub n: u64,
    pub x: Vector,
    pub gamma: f64,
    /// Regularization weight actually applied (zero in plain GP mode).
    pub alpha: f64,
    pub f_val: f64,
    pub phi_val: Option<f64>,
    /// `f(x_n) + alpha_n (phi(x_n) - phi*)`
    pub phi_n: f64,
    /// `|x_{n+1} - x_n|`
    pub step_norm: f64,
    pub f_gap: Option<f64>,
    pub dist_to_target: Option<f64>,
    /// `L_n = L_f + alpha_n L_phi`
    pub lipschitz_n: f64,
    /// `1/gamma_n - L_n/2`
    pub nu_n: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    MaxIterations,
    StepToleranceReached,
    TimeLimit,
    /// Non-finite value produced at iteration `n`; the final state holds the
    /// last finite iterate.
    Aborted { n: u64, reason: String },
}

impl RunStatus {
    pub fn is_aborted(&self) -> bool {
        matches!(self, RunStatus::Aborted { .. })
    }
}

/// State after the last completed update.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalState {
    /// Index of `x` (one past the last update).
    pub n: u64,
    pub x: Vector,
    pub f_val: f64,
    pub f_gap: Option<f64>,
    pub dist_to_target: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub final_state: FinalState,
    pub status: RunStatus,
    /// First iteration with `nu_n > 0`, if any was reached.
    pub n0: Option<u64>,
    pub phi_star: Option<f64>,
}

impl RunTrace {
    pub fn final_x(&self) -> &Vector {
        &self.final_state.x
    }

    /// True if every iteration `1..=last` was logged.
    pub fn is_dense(&self) -> bool {
        self.records
            .iter()
            .enumerate()
            .all(|(i, r)| r.n == i as u64 + 1)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        let mut line = String::new();
        for r in &self.records {
            line.clear();
            let _ = write!(line, "{},", r.n);
            for v in [Some(r.gamma), Some(r.alpha), Some(r.f_val), r.phi_val, Some(r.phi_n), Some(r.step_norm), r.f_gap, r.dist_to_target] {
                push_field(&mut line, v);
                line.push(',');
            }
            push_field(&mut line, Some(r.nu_n));
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

/// Shortest round-trip decimal; empty when absent.
fn push_field(line: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        let _ = write!(line, "{v:?}");
    }
}
