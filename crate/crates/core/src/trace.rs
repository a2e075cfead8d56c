//! Per-iteration run records shared by all solvers.

use crate::metrics::MetricReport;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub outer_k: usize,
    /// Inner iterations behind this row (PPAWSS); zero for single-loop schemes.
    pub inner_k: usize,
    /// Cumulative single-sample oracle calls.
    pub calls: u64,
    pub metrics: MetricReport,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
    /// Set when the run stopped on budget exhaustion.
    pub truncated: bool,
}

impl RunTrace {
    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub(crate) fn push(&mut self, row: TraceRow) {
        // A second row for the same iterate (the final row after a refused
        // batch) replaces the first so the call count stays current.
        if let Some(prev) = self.rows.last_mut() {
            if prev.outer_k == row.outer_k && prev.inner_k == row.inner_k {
                *prev = row;
                return;
            }
        }
        self.rows.push(row);
    }
}

/// What the solvers record and how often.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceOptions {
    /// Record every `every` iterations; `None` picks ⌈K/200⌉ for single-loop
    /// schemes and every outer iteration for PPAWSS.
    pub every: Option<usize>,
    /// Compute the strongly monotone gap (affine maps with μ > 0 only).
    pub gap: bool,
    /// Compute ‖T_λ(x)‖² at this λ.
    pub yosida_lambda: Option<f64>,
    /// Natural-residual tolerance for the resolvent solve behind the Yosida
    /// residual.
    pub resolvent_tol: f64,
    /// Skip metric evaluation entirely (rows carry calls only).
    pub disabled: bool,
}

impl Default for TraceOptions {
    fn default() -> Self {
        TraceOptions {
            every: None,
            gap: false,
            yosida_lambda: None,
            resolvent_tol: 1e-10,
            disabled: false,
        }
    }
}

impl TraceOptions {
    pub fn off() -> Self {
        TraceOptions {
            disabled: true,
            ..Self::default()
        }
    }

    pub fn every(n: usize) -> Self {
        TraceOptions {
            every: Some(n.max(1)),
            ..Self::default()
        }
    }

    pub(crate) fn cadence(&self, planned_iterations: usize) -> usize {
        self.every
            .unwrap_or_else(|| planned_iterations.div_ceil(200))
            .max(1)
    }
}
