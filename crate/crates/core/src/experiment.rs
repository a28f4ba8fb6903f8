//! Experiment tables and the self-verification report behind the `qpa` CLI.
//!
//! Every table is plain CSV with one header row; reals are written with 17
//! significant digits so repeated runs are byte-identical.

use std::fmt;
use std::io::Write;

use rayon::prelude::*;

use crate::channels::{make_channel, ChannelKind, AGREEMENT_TOL, COMPLETENESS_TOL};
use crate::eavesdrop::{bh_unitary, cnot_decomposition, initial_pair, initial_pair_from_circuit, BellCoeffs};
use crate::gates::Unitary;
use crate::qpa::{self, ideal_step, noisy_step, threshold_theta, NoiseConfig, NoiseLocation, ProtocolTrace, Wire};
use crate::qstate::max_abs_diff;
use crate::{channels, Error, Result};

/// Linearly spaced noise strengths, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Default for ThetaGrid {
    fn default() -> Self {
        Self {
            min: 0.0,
            max: 0.3,
            count: 31,
        }
    }
}

impl ThetaGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            return Err(Error::InvalidGrid("theta-count must be at least 1".into()));
        }
        if !(self.min.is_finite() && self.max.is_finite()) || self.min > self.max {
            return Err(Error::InvalidGrid(format!(
                "need theta-min <= theta-max, got {} > {}",
                self.min, self.max
            )));
        }
        if self.count == 1 {
            return Ok(vec![self.min]);
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        let mut pts: Vec<f64> = (0..self.count).map(|k| self.min + step * k as f64).collect();
        pts[self.count - 1] = self.max;
        Ok(pts)
    }
}

/// Parameters shared by all experiment commands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub f_alpha: f64,
    /// Noise channels; empty means noiseless. Only `sweep` accepts more than one.
    pub channels: Vec<ChannelKind>,
    pub theta: f64,
    pub steps: usize,
    pub location: Wire,
    pub grid: ThetaGrid,
    /// Target `1-F` for the threshold table.
    pub target: f64,
}

impl Default for RunSpec {
    fn default() -> Self {
        Self {
            f_alpha: 0.95,
            channels: Vec::new(),
            theta: 0.0,
            steps: 5,
            location: Wire::AliceControl,
            grid: ThetaGrid::default(),
            target: 1e-4,
        }
    }
}

impl RunSpec {
    fn single_channel(&self) -> Result<Option<ChannelKind>> {
        match self.channels.as_slice() {
            [] => Ok(None),
            [kind] => Ok(Some(*kind)),
            _ => Err(Error::UnknownChannel(format!(
                "{} channels given; this command takes a single channel",
                self.channels.len()
            ))),
        }
    }

    fn noise_for(&self, kind: ChannelKind, theta: f64) -> Result<NoiseConfig> {
        Ok(NoiseConfig::new(kind, theta)?.at(NoiseLocation::on(self.location)))
    }
}

/// Formats a real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let csv_err = |e: csv::Error| Error::Csv(e.to_string());
        w.write_record(&self.header).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Csv(e.to_string()))
    }

    /// Column `name` parsed as reals; panics on a missing column.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let idx = self.header.iter().position(|h| h == name).expect("column exists");
        self.rows
            .iter()
            .map(|r| r[idx].parse().expect("numeric cell"))
            .collect()
    }
}

pub const TRACE_HEADER: [&str; 6] = [
    "n",
    "fidelity",
    "one_minus_fidelity",
    "step_probability",
    "survival",
    "efficiency",
];

pub fn trace_table(trace: &ProtocolTrace) -> CsvTable {
    let mut t = CsvTable::new(&TRACE_HEADER);
    for r in &trace.records {
        t.rows.push(vec![
            r.n.to_string(),
            fmt_real(r.fidelity),
            fmt_real(r.infidelity()),
            fmt_real(r.step_probability),
            fmt_real(r.survival),
            fmt_real(r.efficiency),
        ]);
    }
    t
}

/// Ideal protocol trace (rows `n = 0..=steps`).
pub fn cmd_ideal(spec: &RunSpec) -> Result<CsvTable> {
    Ok(trace_table(&qpa::run_ideal(spec.f_alpha, spec.steps)?))
}

/// Noisy protocol trace; without a channel this is the ideal trace.
pub fn cmd_noisy(spec: &RunSpec) -> Result<CsvTable> {
    match spec.single_channel()? {
        None => cmd_ideal(spec),
        Some(kind) => Ok(trace_table(&qpa::run_noisy(
            spec.f_alpha,
            &spec.noise_for(kind, spec.theta)?,
            spec.steps,
        )?)),
    }
}

/// `1-F` after `steps` rounds over the theta grid, one row per (theta, channel),
/// ordered by theta and then by the order channels were given.
pub fn cmd_sweep(spec: &RunSpec) -> Result<CsvTable> {
    if spec.channels.is_empty() {
        return Err(Error::UnknownChannel("sweep needs at least one channel".into()));
    }
    let thetas = spec.grid.points()?;
    let jobs: Vec<(f64, ChannelKind)> = thetas
        .iter()
        .flat_map(|&t| spec.channels.iter().map(move |&k| (t, k)))
        .collect();
    // validate everything up front so errors do not depend on scheduling
    for &(theta, kind) in &jobs {
        make_channel(kind, theta)?;
    }
    let values: Vec<f64> = jobs
        .par_iter()
        .map(|&(theta, kind)| {
            let noise = spec.noise_for(kind, theta)?;
            Ok(qpa::run_noisy(spec.f_alpha, &noise, spec.steps)?.last().infidelity())
        })
        .collect::<Result<_>>()?;
    let mut t = CsvTable::new(&["theta", "channel", "one_minus_fidelity"]);
    for ((theta, kind), v) in jobs.iter().zip(values) {
        t.rows.push(vec![fmt_real(*theta), kind.to_string(), fmt_real(v)]);
    }
    Ok(t)
}

/// Threshold noise strength for each of the nine channels.
pub fn cmd_table1(spec: &RunSpec) -> Result<CsvTable> {
    let kinds = ChannelKind::NINE;
    let thetas: Vec<f64> = kinds
        .par_iter()
        .map(|&kind| threshold_theta(kind, spec.f_alpha, spec.steps, spec.target))
        .collect::<Result<_>>()?;
    let mut t = CsvTable::new(&["channel", "theta"]);
    for (kind, theta) in kinds.iter().zip(thetas) {
        t.rows.push(vec![kind.to_string(), fmt_real(theta)]);
    }
    Ok(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: String, deviation: f64, tol: f64) {
        let passed = deviation <= tol;
        self.checks.push(Check {
            name,
            passed,
            detail: format!("max deviation {deviation:.3e} (tol {tol:.0e})"),
        });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct VerifyOptions {
    /// Scales the first bit-flip Kraus operator so the report must fail.
    pub corrupt_kraus_normalization: bool,
}

/// Twenty admissible noise strengths spread over a channel's range.
pub fn theta_samples(kind: ChannelKind) -> Vec<f64> {
    let (lo, hi) = match kind {
        ChannelKind::Rotation(..) => (-std::f64::consts::PI, std::f64::consts::PI),
        _ => (0.0, kind.theta_max()),
    };
    (0..20).map(|k| lo + (hi - lo) * k as f64 / 19.0).collect()
}

/// Deterministic, well-spread Bell weights (additive recurrence on the
/// golden-ratio-like generators of the R4 sequence).
pub fn sample_bell_coeffs(count: usize) -> Vec<BellCoeffs> {
    let g = 1.167_303_978_261_418_7_f64; // root of x^5 = x + 1
    let alphas = [1.0 / g, 1.0 / (g * g), 1.0 / g.powi(3), 1.0 / g.powi(4)];
    (1..=count)
        .map(|k| {
            let w: Vec<f64> = alphas.iter().map(|a| (0.5 + a * k as f64).fract() + 1e-3).collect();
            let s: f64 = w.iter().sum();
            BellCoeffs {
                a: w[0] / s,
                b: w[1] / s,
                c: w[2] / s,
                d: w[3] / s,
            }
        })
        .collect()
}

/// Runs the channel representation checks, the circuit-vs-recurrence oracle
/// and the copying-machine identities.
pub fn verify(options: VerifyOptions) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let points = channels::bloch_test_grid();

    for kind in ChannelKind::all() {
        let mut completeness = 0.0f64;
        let mut agreement = 0.0f64;
        for theta in theta_samples(kind) {
            let mut ch = make_channel(kind, theta)?;
            if options.corrupt_kraus_normalization && kind == ChannelKind::BIT_FLIP {
                ch.corrupt_kraus(1.001);
            }
            completeness = completeness.max(ch.completeness_error());
            agreement = agreement.max(ch.representation_error(&points)?);
        }
        report.push(format!("kraus completeness ({kind})"), completeness, COMPLETENESS_TOL);
        report.push(format!("representation agreement ({kind})"), agreement, AGREEMENT_TOL);
    }

    let mut oracle = 0.0f64;
    for c in sample_bell_coeffs(50) {
        let (ideal, p_ideal) = ideal_step(&c)?;
        let (state, p) = noisy_step(&c.to_density(), &NoiseConfig::noiseless())?;
        oracle = oracle
            .max((p - p_ideal).abs())
            .max(max_abs_diff(state.matrix(), ideal.to_density().matrix()));
    }
    report.push("noiseless circuit vs Bell recurrence (50 states)".into(), oracle, 1e-12);

    let w = Unitary::from_circuit(&cnot_decomposition())?;
    report.push(
        "cloner CNOT decomposition".into(),
        max_abs_diff(w.matrix(), bh_unitary().matrix()),
        1e-12,
    );

    let mut pair = 0.0f64;
    for k in 0..=100 {
        let f = k as f64 / 100.0;
        let (formula, _) = initial_pair(f)?;
        pair = pair.max(initial_pair_from_circuit(f)?.max_abs_diff(&formula));
    }
    report.push("attacked pair: circuit vs formula (101 f values)".into(), pair, 1e-12);

    Ok(report)
}
