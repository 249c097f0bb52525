//! CSV and JSON serialization of band tables and reports.
//!
//! CSV layout: header `s,mu_1..mu_d,omega_1..omega_n`, one row per sample,
//! comma separated, `\n` line endings, every value in scientific notation
//! with 17 significant digits (exact round trip).

use std::io::{self, Write};

use serde_json::{json, Value};

use crate::dispersion::{BandExtrema, BandTable, GapReport, Monotonicity};
use crate::oracle::OracleReport;

fn number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn band_csv_header(dimension: usize, bands: usize) -> String {
    std::iter::once("s".to_string())
        .chain((1..=dimension).map(|i| format!("mu_{i}")))
        .chain((1..=bands).map(|j| format!("omega_{j}")))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn emit_band_csv<W: Write>(table: &BandTable, sink: &mut W) -> io::Result<()> {
    writeln!(sink, "{}", band_csv_header(table.dimension, table.bands))?;
    for row in &table.rows {
        let line = std::iter::once(row.s)
            .chain(row.mu.components().iter().copied())
            .chain(row.omegas.iter().copied())
            .map(number)
            .collect::<Vec<_>>()
            .join(",");
        writeln!(sink, "{line}")?;
    }
    Ok(())
}

pub fn band_table_json(table: &BandTable) -> Value {
    json!({
        "dimension": table.dimension,
        "bands": table.bands,
        "rows": table.rows.iter().map(|r| json!({
            "s": r.s,
            "mu": r.mu.components(),
            "omegas": r.omegas,
        })).collect::<Vec<_>>(),
    })
}

pub fn gaps_json(report: &GapReport) -> Value {
    json!({
        "gaps": report.gaps.iter().map(|g| json!({
            "lower_band": g.lower,
            "upper_band": g.lower + 1,
            "omega_low": g.low,
            "omega_high": g.high,
            "width": g.width,
        })).collect::<Vec<_>>(),
    })
}

pub fn extrema_json(e: &BandExtrema) -> Value {
    json!({
        "band": e.band + 1,
        "argmax": e.argmax.components(),
        "max": e.max,
        "argmin": e.argmin.components(),
        "min": e.min,
        "max_on_boundary": e.max_on_boundary,
    })
}

pub fn monotonicity_json(band: usize, m: &Monotonicity) -> Value {
    json!({
        "band": band + 1,
        "nonmonotonic": m.nonmonotonic,
        "turning_points": m.turning_points,
    })
}

pub fn oracle_json(r: &OracleReport) -> Value {
    json!({
        "cells": r.cells,
        "dof": r.supercell.len(),
        "deviation": r.deviation,
        "omega_max": r.omega_max,
        "passed": r.passed,
    })
}

/// Envelope shared by every JSON report.
pub fn report(command: &str, model: &str, result: Value, tolerances: Value) -> Value {
    json!({
        "command": command,
        "model": model,
        "result": result,
        "tolerances": tolerances,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{band_structure, PathSpec};
    use crate::model::builtin;
    use std::f64::consts::PI;

    fn csv(table: &BandTable) -> String {
        let mut buf = Vec::new();
        emit_band_csv(table, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn three_samples_give_four_lines() {
        let table = band_structure(
            &builtin("mono1d").unwrap(),
            &PathSpec::segment(vec![0.0], vec![PI], 3),
        )
        .unwrap();
        let text = csv(&table);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "s,mu_1,omega_1");
        assert!(text.ends_with('\n') && !text.contains(",\n"));
        let last: Vec<f64> = lines[3].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(last[1], PI);
    }

    #[test]
    fn empty_table_is_header_only() {
        assert_eq!(
            csv(&BandTable::empty(2, 5)),
            "s,mu_1,mu_2,omega_1,omega_2,omega_3,omega_4,omega_5\n"
        );
    }

    #[test]
    fn values_round_trip_exactly() {
        for x in [0.123_456_789_012_345_68, PI, 2.5, 1e-300, 0.0] {
            assert_eq!(number(x).parse::<f64>().unwrap(), x);
        }
    }
}
