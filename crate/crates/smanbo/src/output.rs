//! CSV rendering of trial logs.

use std::io::Write;

use crate::error::Result;
use crate::sim::TrialLog;

/// Decimal rendering with nine significant digits.
pub fn sig9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (8 - exp).clamp(0, 15) as usize;
    let s = format!("{x:.decimals$}");
    if s == "-0" || s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0".into()
    } else {
        s
    }
}

pub const TRIAL_HEADER: [&str; 8] = ["t", "target_id", "true_x", "true_y", "est_x", "est_y", "trace_P", "ospa"];
pub const EPOCH_HEADER: [&str; 5] = ["epoch", "agent", "ux", "uy", "plan_ms"];

pub fn write_trial_csv<W: Write>(log: &TrialLog, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(TRIAL_HEADER)?;
    for rec in &log.sense {
        for t in &rec.targets {
            out.write_record([
                sig9(rec.t),
                t.target_id.to_string(),
                sig9(t.truth.pos.x),
                sig9(t.truth.pos.y),
                sig9(t.estimate[0]),
                sig9(t.estimate[1]),
                sig9(t.trace),
                sig9(rec.ospa),
            ])?;
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_epoch_csv<W: Write>(log: &TrialLog, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(EPOCH_HEADER)?;
    for e in &log.epochs {
        for (i, u) in e.executed.iter().enumerate() {
            out.write_record([e.epoch.to_string(), i.to_string(), sig9(u.ux), sig9(u.uy), sig9(e.plan_ms)])?;
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn to_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}
