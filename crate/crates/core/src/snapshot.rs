//! `rxd-field v1` text snapshots.
//!
//! ```text
//! rxd-field v1
//! dim=2 n=64 lower=-1,-1 upper=1,1 t=0.2
//! <n^dim values, one per line, row-major with x fastest>
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

pub const MAGIC: &str = "rxd-field v1";

/// A field read back from disk together with its time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub field: Field,
    pub time: f64,
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Renders a snapshot; values carry 17 significant digits.
pub fn format_field(field: &Field, time: f64) -> String {
    let g = field.grid();
    let mut out = String::with_capacity(64 + 25 * field.len());
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!(
        "dim={} n={} lower={} upper={} t={}\n",
        g.dim(),
        g.n(),
        join(g.lower()),
        join(g.upper()),
        time
    ));
    for v in field.values() {
        out.push_str(&format!("{v:.16e}\n"));
    }
    out
}

pub fn write_field(path: &Path, field: &Field, time: f64) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(format_field(field, time).as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn parse_field(text: &str, path: &Path) -> Result<Snapshot> {
    let bad = |message: String| Error::Snapshot {
        path: path.to_path_buf(),
        message,
    };
    let mut lines = text.lines();
    match lines.next() {
        Some(l) if l.trim_end() == MAGIC => {}
        other => return Err(bad(format!("expected `{MAGIC}`, found {other:?}"))),
    }
    let header = lines.next().ok_or_else(|| bad("missing header line".into()))?;
    let (mut dim, mut n, mut lower, mut upper, mut time) = (None, None, None, None, None);
    for token in header.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| bad(format!("header token `{token}` is not key=value")))?;
        let list = |v: &str| -> Result<Vec<f64>> {
            v.split(',')
                .map(|x| x.parse::<f64>().map_err(|e| bad(format!("{key}: {e}"))))
                .collect()
        };
        match key {
            "dim" => dim = Some(value.parse::<usize>().map_err(|e| bad(format!("dim: {e}")))?),
            "n" => n = Some(value.parse::<usize>().map_err(|e| bad(format!("n: {e}")))?),
            "lower" => lower = Some(list(value)?),
            "upper" => upper = Some(list(value)?),
            "t" => time = Some(value.parse::<f64>().map_err(|e| bad(format!("t: {e}")))?),
            _ => return Err(bad(format!("unknown header key `{key}`"))),
        }
    }
    let missing = |k: &str| bad(format!("header lacks `{k}`"));
    let grid = Grid::new(
        dim.ok_or_else(|| missing("dim"))?,
        n.ok_or_else(|| missing("n"))?,
        &lower.ok_or_else(|| missing("lower"))?,
        &upper.ok_or_else(|| missing("upper"))?,
    )
    .map_err(|e| bad(e.to_string()))?;
    let time = time.ok_or_else(|| missing("t"))?;

    let values = lines
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| {
            l.trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("value {i}: {e}")))
        })
        .collect::<Result<Vec<f64>>>()?;
    if values.len() != grid.len() {
        return Err(bad(format!(
            "expected {} values, found {}",
            grid.len(),
            values.len()
        )));
    }
    let field = Field::new(grid, values).map_err(|e| bad(e.to_string()))?;
    Ok(Snapshot { field, time })
}

pub fn read_field(path: &Path) -> Result<Snapshot> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_field(&text, path)
}
