//! File formats: the raw node-value state (16-byte header: N as u32 LE,
//! L as f64 LE, u32 pad, followed by N³ little-endian f64 node values in
//! lexicographic (x, y, z) order) and the two-column Ψ̂ sample table CSV.

use anyhow::{bail, Context, Result};
use nordheim_core::grid::{DistributionState, VelocityGrid};
use std::io::{Read, Write};
use std::path::Path;

pub fn write_state(path: &Path, state: &DistributionState) -> Result<()> {
    let grid = state.grid();
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    file.write_all(&(grid.points_per_axis() as u32).to_le_bytes())?;
    file.write_all(&grid.extent().to_le_bytes())?;
    file.write_all(&0u32.to_le_bytes())?;
    let mut buf = Vec::with_capacity(state.values().len() * 8);
    for v in state.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    file.write_all(&buf)?;
    Ok(())
}

pub fn read_state(path: &Path) -> Result<DistributionState> {
    let mut file =
        std::fs::File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut header = [0u8; 16];
    file.read_exact(&mut header)
        .context("state file shorter than its 16-byte header")?;
    let n = u32::from_le_bytes(header[0..4].try_into().unwrap()) as usize;
    let extent = f64::from_le_bytes(header[4..12].try_into().unwrap());
    let grid = VelocityGrid::new(extent, n).map_err(|e| anyhow::anyhow!("{e}"))?;
    let mut body = Vec::new();
    file.read_to_end(&mut body)?;
    if body.len() != grid.len() * 8 {
        bail!(
            "state file body holds {} bytes, expected {} for N = {n}",
            body.len(),
            grid.len() * 8
        );
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DistributionState::from_values(grid, values, 0.0).map_err(|e| anyhow::anyhow!("{e}"))
}

/// Two-column CSV (ξ, Ψ̂(ξ)): strictly increasing ξ starting at 0.
pub fn read_psi_table(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read psi table {}", path.display()))?;
    let mut xi = Vec::new();
    let mut val = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let x: f64 = parts
            .next()
            .with_context(|| format!("psi table line {}: missing xi", lineno + 1))?
            .trim()
            .parse()
            .with_context(|| format!("psi table line {}: bad xi", lineno + 1))?;
        let y: f64 = parts
            .next()
            .with_context(|| format!("psi table line {}: missing value", lineno + 1))?
            .trim()
            .parse()
            .with_context(|| format!("psi table line {}: bad value", lineno + 1))?;
        if parts.next().is_some() {
            bail!("psi table line {}: expected exactly two columns", lineno + 1);
        }
        xi.push(x);
        val.push(y);
    }
    if xi.is_empty() {
        bail!("psi table {} has no rows", path.display());
    }
    Ok((xi, val))
}
