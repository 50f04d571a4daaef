//! Parameter sweeps, evaluated in parallel and emitted in ascending order.

use anyhow::{bail, Result};
use clap::ValueEnum;
use pulsewell::omega0::evaluate_omega0;
use pulsewell::resolvent::{evaluate_survival, lambda0_min_singular, short_pulse_params};
use pulsewell::{PrecisionPolicy, PulseParams, SourceSpec, TruncationSpec};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::Record;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Parameter {
    Lambda,
    Omega,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    General,
    Omega0,
    Shortpulse,
    Lambda0,
}

/// Abscissae of a sweep, ascending.
pub fn abscissae(from: f64, to: f64, points: usize, scale: Scale) -> Result<Vec<f64>> {
    if !(from < to) || points < 2 {
        bail!("sweep needs from < to and at least 2 points");
    }
    if scale == Scale::Log && from <= 0.0 {
        bail!("log scale needs from > 0");
    }
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            if i == 0 {
                return from;
            }
            if i + 1 == points {
                return to;
            }
            let u = i as f64 / last;
            match scale {
                Scale::Linear => from + (to - from) * u,
                Scale::Log => (from.ln() + (to.ln() - from.ln()) * u).exp(),
            }
        })
        .collect())
}

/// Everything a sweep needs besides the abscissae.
pub struct SweepSetup {
    pub parameter: Parameter,
    pub mode: Mode,
    pub lambda: f64,
    pub omega: f64,
    pub alpha: f64,
    pub ratio: f64,
    pub source: SourceSpec,
    pub trunc: TruncationSpec,
    pub policy: PrecisionPolicy,
    pub tol: f64,
}

impl SweepSetup {
    fn point(&self, x: f64) -> (f64, f64) {
        match self.parameter {
            Parameter::Lambda => (x, self.omega),
            Parameter::Omega => (self.lambda, x),
        }
    }

    fn evaluate(&self, x: f64) -> Record {
        let (lambda, omega) = self.point(x);
        let outcome = match self.mode {
            Mode::General => PulseParams::new(lambda, omega, self.alpha)
                .and_then(|p| evaluate_survival(&p, &self.source, &self.trunc, &self.policy).map(|r| (p, r))),
            Mode::Omega0 => PulseParams::new(lambda, 0.0, 1.0)
                .and_then(|p| evaluate_omega0(lambda, &self.source, self.tol, &self.policy).map(|r| (p, r))),
            Mode::Shortpulse => short_pulse_params(lambda, self.ratio)
                .and_then(|p| evaluate_survival(&p, &self.source, &self.trunc, &self.policy).map(|r| (p, r))),
            Mode::Lambda0 => unreachable!("lambda0 sweeps use their own record type"),
        };
        match outcome {
            Ok((p, r)) => Record::from_result(&p, &r),
            Err(e) => {
                let (omega, alpha) = match self.mode {
                    Mode::Omega0 => (0.0, 1.0),
                    Mode::Shortpulse => (self.ratio * lambda, lambda),
                    _ => (omega, self.alpha),
                };
                Record::failed(lambda, omega, alpha, &e)
            }
        }
    }
}

/// Row of a `lambda = 0` sweep over the driving frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lambda0Record {
    pub omega: f64,
    pub truncation: usize,
    pub sigma_min: f64,
    pub flag: String,
}

/// Grid of `sigma` values strictly inside `(0, omega)`.
pub fn sigma_grid(omega: f64, count: usize) -> Vec<f64> {
    (1..=count).map(|i| omega * i as f64 / (count + 1) as f64).collect()
}

pub fn run_lambda0(xs: &[f64], truncation: usize) -> Vec<Lambda0Record> {
    let mut rows: Vec<Lambda0Record> = xs
        .par_iter()
        .map(|&omega| match lambda0_min_singular(omega, &sigma_grid(omega, 4), truncation) {
            Ok(s) => Lambda0Record {
                omega,
                truncation,
                sigma_min: s,
                flag: "ok".into(),
            },
            Err(e) => Lambda0Record {
                omega,
                truncation,
                sigma_min: 0.0,
                flag: crate::output::error_flag(&e).into(),
            },
        })
        .collect();
    rows.sort_by(|a, b| a.omega.total_cmp(&b.omega));
    rows
}

pub fn run(setup: &SweepSetup, xs: &[f64]) -> Vec<Record> {
    let mut rows: Vec<(f64, Record)> = xs.par_iter().map(|&x| (x, setup.evaluate(x))).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    rows.into_iter().map(|(_, r)| r).collect()
}
