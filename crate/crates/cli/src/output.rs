//! CSV and provenance writers. Numbers carry 12 significant digits so that
//! identical runs give byte-identical files.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::config::ScenarioConfig;

#[derive(Debug, Error)]
#[error("{}: {err}", path.display())]
pub struct OutputError {
    pub path: PathBuf,
    pub err: io::Error,
}

fn ctx(path: &Path) -> impl Fn(io::Error) -> OutputError + '_ {
    move |err| OutputError {
        path: path.to_path_buf(),
        err,
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), OutputError> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(ctx(&path))?;
    Ok((path, BufWriter::new(file)))
}

pub fn ensure_dir(dir: &Path) -> Result<(), OutputError> {
    std::fs::create_dir_all(dir).map_err(ctx(dir))
}

/// `z,t,value` rows, one block of `z.len()` rows per time slice.
pub fn write_heatmap(dir: &Path, name: &str, z: &[f64], slices: &[(f64, Vec<f64>)]) -> Result<PathBuf, OutputError> {
    let (path, mut w) = create(dir, name)?;
    let mut body = || -> io::Result<()> {
        writeln!(w, "z,t,value")?;
        for (t, values) in slices {
            debug_assert_eq!(values.len(), z.len());
            let t = num(*t);
            for (zi, v) in z.iter().zip(values) {
                writeln!(w, "{},{t},{}", num(*zi), num(*v))?;
            }
        }
        w.flush()
    };
    body().map_err(ctx(&path))?;
    Ok(path)
}

/// Plain numeric table with a header row.
pub fn write_table(dir: &Path, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf, OutputError> {
    let (path, mut w) = create(dir, name)?;
    let mut body = || -> io::Result<()> {
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            let cells: Vec<String> = row.iter().map(|x| num(*x)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        w.flush()
    };
    body().map_err(ctx(&path))?;
    Ok(path)
}

pub fn write_metrics(dir: &Path, metrics: &[(String, f64)]) -> Result<PathBuf, OutputError> {
    let (path, mut w) = create(dir, "metrics.csv")?;
    let mut body = || -> io::Result<()> {
        writeln!(w, "metric,value")?;
        for (k, v) in metrics {
            writeln!(w, "{k},{}", num(*v))?;
        }
        w.flush()
    };
    body().map_err(ctx(&path))?;
    Ok(path)
}

pub fn write_provenance(dir: &Path, cfg: &ScenarioConfig, solver: &[(String, String)]) -> Result<PathBuf, OutputError> {
    let (path, mut w) = create(dir, "provenance.txt")?;
    let mut body = || -> io::Result<()> {
        writeln!(w, "# slp {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(w, "[config]")?;
        write!(w, "{}", cfg.echo())?;
        writeln!(w, "[solver]")?;
        for (k, v) in solver {
            writeln!(w, "{k}={v}")?;
        }
        w.flush()
    };
    body().map_err(ctx(&path))?;
    Ok(path)
}

/// Reads back a `z,t,value` file.
pub fn read_heatmap(path: &Path) -> Result<Vec<[f64; 3]>, OutputError> {
    let file = File::open(path).map_err(ctx(path))?;
    let bad = |msg: String| OutputError {
        path: path.to_path_buf(),
        err: io::Error::new(io::ErrorKind::InvalidData, msg),
    };
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(ctx(path))?;
        if i == 0 {
            if line != "z,t,value" {
                return Err(bad(format!("unexpected header `{line}`")));
            }
            continue;
        }
        let cells: Vec<f64> = line
            .split(',')
            .map(|c| c.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(format!("line {}: {e}", i + 1)))?;
        let row: [f64; 3] = cells
            .try_into()
            .map_err(|_| bad(format!("line {}: expected 3 columns", i + 1)))?;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(0.5), "5.00000000000e-1");
        assert_eq!(num(-1234.5678901234), "-1.23456789012e3");
        let x = std::f64::consts::PI;
        let back: f64 = num(x).parse().unwrap();
        assert!(((back - x) / x).abs() < 1e-11);
    }
}
