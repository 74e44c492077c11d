//! Frequency sweeps written as CSV, one row per frequency.

use std::io::Write;

use rayon::prelude::*;

use crate::compute::{compute, regime_for, Computed, Frequency};
use crate::config::RunConfig;
use crate::CliError;

pub const FAILED: &str = "failed";

/// Column names, in order.
pub fn header() -> Vec<String> {
    let mut cols = vec!["omega".to_string(), "regime".to_string()];
    for i in 1..=3 {
        for j in 1..=3 {
            cols.push(format!("ReM{i}{j}"));
            cols.push(format!("ImM{i}{j}"));
        }
    }
    for i in 1..=3 {
        cols.push(format!("ReB{i}{i}"));
        cols.push(format!("ImB{i}{i}"));
    }
    for c in ["normA", "normRmsi", "oracle_Rem", "oracle_Imm", "residual", "iterations"] {
        cols.push(c.to_string());
    }
    cols
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(omega: f64, c: &Computed) -> Vec<String> {
    let b = &c.bundle;
    let mut out = vec![num(omega), c.regime.name().to_string()];
    for r in &b.m.0 {
        for z in r {
            out.push(num(z.re));
            out.push(num(z.im));
        }
    }
    for z in b.b.diag() {
        out.push(num(z.re));
        out.push(num(z.im));
    }
    out.push(num(b.a.norm()));
    out.push(num(b.r_msi_norm));
    match c.oracle {
        Some(o) => {
            out.push(num(o.re));
            out.push(num(o.im));
        }
        None => out.extend([String::new(), String::new()]),
    }
    out.push(num(b.provenance.residual));
    out.push(b.provenance.iterations.to_string());
    out
}

fn failed_row(omega: f64, width: usize) -> Vec<String> {
    let mut out = vec![num(omega), FAILED.to_string()];
    out.resize(width, String::new());
    out
}

/// Per-frequency results in ascending frequency order.
pub fn compute_all(cfg: &RunConfig) -> Vec<(f64, mptensor::Result<Computed>)> {
    cfg.omegas
        .par_iter()
        .map(|&omega| {
            let result = Frequency::new(cfg, omega).and_then(|f| compute(cfg, omega, regime_for(cfg, &f.exc)));
            match &result {
                Ok(c) => log::info!("ω = {omega:e}: {} via {}", c.regime, c.bundle.provenance.source),
                Err(e) => log::error!("ω = {omega:e}: {e}"),
            }
            (omega, result)
        })
        .collect()
}

/// Writes the sweep CSV; returns the number of failed frequencies.
pub fn write_csv<W: Write>(results: &[(f64, mptensor::Result<Computed>)], w: W) -> Result<usize, CliError> {
    let cols = header();
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(&cols)?;
    let mut failed = 0;
    for (omega, r) in results {
        match r {
            Ok(c) => csv.write_record(row(*omega, c))?,
            Err(_) => {
                failed += 1;
                csv.write_record(failed_row(*omega, cols.len()))?
            }
        }
    }
    csv.flush()?;
    Ok(failed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_is_stable() {
        let expected = "omega,regime,ReM11,ImM11,ReM12,ImM12,ReM13,ImM13,ReM21,ImM21,ReM22,ImM22,ReM23,ImM23,\
                        ReM31,ImM31,ReM32,ImM32,ReM33,ImM33,ReB11,ImB11,ReB22,ImB22,ReB33,ImB33,\
                        normA,normRmsi,oracle_Rem,oracle_Imm,residual,iterations";
        assert_eq!(header().join(","), expected);
    }

    #[test]
    fn failed_rows_keep_the_width() {
        let r = failed_row(1.0, header().len());
        assert_eq!(r.len(), 32);
        assert_eq!(r[1], FAILED);
    }
}
