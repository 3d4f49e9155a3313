//! Parameter sweeps over translation components with a fixed partition.

use rayon::prelude::*;
use serde::Serialize;

use super::artifacts::Artifact;
use super::config::{ExperimentConfig, RunParams};
use super::run::{csv_bytes, iterate_built, ErrorRecord};
use crate::attractor::Status;
use crate::circle::fmt17;
use crate::error::Result;
use crate::geometry::{format_rational, Rational};

/// Outcome at one grid node.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    /// Grid index along each axis.
    pub index: Vec<usize>,
    pub values: Vec<String>,
    pub status: Option<Status>,
    pub stabilized_at: Option<usize>,
    pub final_measure: Option<f64>,
    pub ell: Option<u64>,
    pub error: Option<ErrorRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    /// Steps per axis; the record count is their product.
    pub shape: Vec<usize>,
    pub records: Vec<SweepRecord>,
}

impl SweepResult {
    pub fn stabilized(&self) -> usize {
        self.records.iter().filter(|r| r.status == Some(Status::Stabilized)).count()
    }

    pub fn max_iter_reached(&self) -> usize {
        self.records.iter().filter(|r| r.status == Some(Status::MaxIterReached)).count()
    }

    /// Columns `i,j,x,y,status,stabilized_at,final_measure,ell,error_code,error`
    /// in grid order with the first axis slowest; `j`, `y` are empty for 1-axis sweeps.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let opt = |o: Option<String>| o.unwrap_or_default();
        let rows = self.records.iter().map(|r| {
            vec![
                r.index[0].to_string(),
                opt(r.index.get(1).map(|j| j.to_string())),
                r.values[0].clone(),
                opt(r.values.get(1).cloned()),
                opt(r.status.map(|s| format!("{s:?}"))),
                opt(r.stabilized_at.map(|n| n.to_string())),
                opt(r.final_measure.map(fmt17)),
                opt(r.ell.map(|l| l.to_string())),
                opt(r.error.as_ref().map(|e| e.code.clone())),
                opt(r.error.as_ref().map(|e| e.message.clone())),
            ]
        });
        csv_bytes(
            &["i", "j", "x", "y", "status", "stabilized_at", "final_measure", "ell", "error_code", "error"],
            rows,
        )
    }
}

fn node(config: &ExperimentConfig, run: &RunParams, index: Vec<usize>, values: Vec<Rational>) -> SweepRecord {
    let axes = &config.sweep.as_ref().expect("validated").axes;
    let outcome = (|| {
        let mut spec = config.map.clone().expect("validated");
        for (a, v) in axes.iter().zip(&values) {
            spec = spec.with_parameter(a.vector, a.component, *v)?;
        }
        iterate_built(&spec.build()?, run)
    })();
    let values: Vec<String> = values.iter().map(format_rational).collect();
    match outcome {
        Ok(it) => SweepRecord {
            index,
            values,
            status: Some(it.trace().status),
            stabilized_at: it.trace().stabilized_at,
            final_measure: Some(it.final_measure()),
            ell: it.ell(),
            error: None,
        },
        Err(e) => SweepRecord {
            index,
            values,
            status: None,
            stabilized_at: None,
            final_measure: None,
            ell: None,
            error: Some(ErrorRecord::from(&e)),
        },
    }
}

/// Runs every node in parallel; records come back in grid order and per-node
/// errors are recorded rather than raised.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    let axes = &config.sweep.as_ref().expect("validated").axes;
    let values: Vec<Vec<Rational>> = axes.iter().map(|a| a.values()).collect::<Result<_>>()?;
    let shape: Vec<usize> = values.iter().map(Vec::len).collect();
    let mut nodes: Vec<(Vec<usize>, Vec<Rational>)> = Vec::new();
    for i in 0..shape[0] {
        if shape.len() == 1 {
            nodes.push((vec![i], vec![values[0][i]]));
        } else {
            for j in 0..shape[1] {
                nodes.push((vec![i, j], vec![values[0][i], values[1][j]]));
            }
        }
    }
    // snapshots are per-run images, not needed per node
    let run = RunParams {
        snapshots: Vec::new(),
        ..config.run.clone()
    };
    let records = nodes
        .into_par_iter()
        .map(|(index, vals)| node(config, &run, index, vals))
        .collect();
    Ok(SweepResult { shape, records })
}

#[derive(Serialize)]
struct SweepReport {
    mode: &'static str,
    shape: Vec<usize>,
    nodes: usize,
    stabilized: usize,
    max_iter_reached: usize,
    errors: usize,
}

pub(crate) fn sweep(config: &ExperimentConfig) -> Result<(serde_json::Value, Vec<Artifact>)> {
    let res = run_sweep(config)?;
    let report = SweepReport {
        mode: "sweep",
        shape: res.shape.clone(),
        nodes: res.records.len(),
        stabilized: res.stabilized(),
        max_iter_reached: res.max_iter_reached(),
        errors: res.records.iter().filter(|r| r.error.is_some()).count(),
    };
    let value = serde_json::to_value(&report).map_err(|e| crate::error::LabError::Io(e.to_string()))?;
    Ok((value, vec![Artifact::new("sweep.csv", res.to_csv()?)]))
}
