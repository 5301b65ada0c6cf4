//! Result emission: trajectory CSV (17-significant-digit floats, fixed
//! column order) and versioned JSON reports.

use anyhow::Result;
use nordheim_core::march::TrajectoryRecord;
use serde::Serialize;
use std::path::Path;

fn fmt(x: f64) -> String {
    format!("{:.16e}", x)
}

/// One row per record: t, M0, M1x..z, M2, L13, Linf, drifts, clamp/renorm
/// diagnostics, then one margin column per monitored bound.
pub fn trajectory_csv(records: &[TrajectoryRecord]) -> String {
    let mut header = vec![
        "t",
        "M0",
        "M1x",
        "M1y",
        "M1z",
        "M2",
        "L13",
        "Linf",
        "drift_mass",
        "drift_momentum",
        "drift_energy",
        "clamped_mass",
        "renorm_factor",
    ]
    .into_iter()
    .map(str::to_string)
    .collect::<Vec<_>>();
    if let Some(first) = records.first() {
        for flag in &first.bound_flags {
            header.push(format!("margin_{}", flag.name));
        }
    }
    let mut out = header.join(",");
    out.push('\n');
    for r in records {
        let mut cols = vec![
            fmt(r.time),
            fmt(r.moments.m0),
            fmt(r.moments.m1[0]),
            fmt(r.moments.m1[1]),
            fmt(r.moments.m1[2]),
            fmt(r.moments.m2),
            fmt(r.moments.l1s[3]),
            fmt(r.linf),
            fmt(r.conservation_drift.0),
            fmt(r.conservation_drift.1),
            fmt(r.conservation_drift.2),
            fmt(r.clamped_mass),
            fmt(r.renorm_factor),
        ];
        for flag in &r.bound_flags {
            cols.push(fmt(flag.margin));
        }
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct Versioned<T: Serialize> {
    schema: u32,
    #[serde(flatten)]
    body: T,
}

/// Serialize a payload under the versioned envelope {"schema": 1, ...}.
pub fn versioned_json<T: Serialize>(body: T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Versioned { schema: 1, body })?;
    s.push('\n');
    Ok(s)
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))
}
