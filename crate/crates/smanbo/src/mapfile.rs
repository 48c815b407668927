//! Plain-text forest files.
//!
//! ```text
//! 45.000000 5.000000 1234
//! 12.345678 67.890123 5.000000
//! ...
//! ```
//!
//! The header holds `lambda radius seed`, every further line one disk
//! `cx cy r`. Values carry exactly six decimals, which reproduces the
//! quantized coordinates of generated forests bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use smanbo_core::worldgen::OcclusionForest;
use smanbo_core::Disk;

use crate::error::{Error, Result};

/// A forest together with the parameters and seed that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct MapFile {
    pub lambda: f64,
    pub radius: f64,
    pub seed: u64,
    pub forest: OcclusionForest,
}

fn fixed(v: f64) -> Result<String> {
    let s = format!("{v:.6}");
    if s.parse::<f64>().ok() != Some(v) {
        return Err(Error::MapPrecision { value: v });
    }
    Ok(s)
}

pub fn render_map(map: &MapFile) -> Result<String> {
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", fixed(map.lambda)?, fixed(map.radius)?, map.seed);
    for d in &map.forest.disks {
        let _ = writeln!(out, "{} {} {}", fixed(d.center.x)?, fixed(d.center.y)?, fixed(d.radius)?);
    }
    Ok(out)
}

pub fn parse_map(text: &str, path: &Path) -> Result<MapFile> {
    let err = |line: usize, reason: String| Error::MapParse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| err(1, "missing header `lambda radius seed`".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 {
        return Err(err(1, format!("header needs 3 fields, found {}", fields.len())));
    }
    let num = |line: usize, s: &str| s.parse::<f64>().map_err(|_| err(line, format!("`{s}` is not a number")));
    let lambda = num(1, fields[0])?;
    let radius = num(1, fields[1])?;
    let seed = fields[2]
        .parse::<u64>()
        .map_err(|_| err(1, format!("`{}` is not a seed", fields[2])))?;

    let mut disks = Vec::new();
    for (i, line) in lines {
        let row = i + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(err(row, format!("expected `cx cy r`, found {} fields", fields.len())));
        }
        let r = num(row, fields[2])?;
        if !(r > 0.0) {
            return Err(err(row, "radius must be positive".into()));
        }
        disks.push(Disk::new(num(row, fields[0])?, num(row, fields[1])?, r));
    }
    Ok(MapFile {
        lambda,
        radius,
        seed,
        forest: OcclusionForest::new(disks),
    })
}

pub fn save_map(path: &Path, map: &MapFile) -> Result<()> {
    let text = render_map(map)?;
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_map(path: &Path) -> Result<MapFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_map(&text, path)
}
