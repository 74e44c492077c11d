//! Two-column `(omega, value)` files cut from sweep CSVs.

use std::path::{Path, PathBuf};

use crate::sweep::{num, FAILED};
use crate::CliError;

/// One series of one sweep file.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub omega: Vec<f64>,
    pub value: Vec<f64>,
}

fn input(msg: String) -> CliError {
    CliError::Input(msg)
}

/// Reads `column` against `omega`, skipping failed rows.
pub fn read_series(path: &Path, column: &str) -> Result<Series, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| input(format!("{}: {e}", path.display())))?.clone();
    if headers.is_empty() {
        return Err(input(format!("{} is empty", path.display())));
    }
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| input(format!("{} has no column '{name}'", path.display())))
    };
    let (iw, iv) = (find("omega")?, find(column)?);
    let ir = headers.iter().position(|h| h == "regime");
    let mut s = Series { omega: Vec::new(), value: Vec::new() };
    let mut rows = 0;
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| input(format!("{} row {}: {e}", path.display(), n + 1)))?;
        rows += 1;
        if ir.and_then(|i| rec.get(i)) == Some(FAILED) {
            log::warn!("{}: skipping failed row {}", path.display(), n + 1);
            continue;
        }
        let parse = |i: usize| -> Result<f64, CliError> {
            let v = rec.get(i).unwrap_or("");
            v.parse()
                .map_err(|_| input(format!("{} row {}: '{}' is not a number", path.display(), n + 1, v)))
        };
        s.omega.push(parse(iw)?);
        s.value.push(parse(iv)?);
    }
    if rows == 0 {
        return Err(input(format!("{} has no data rows", path.display())));
    }
    if s.omega.windows(2).any(|w| w[0] >= w[1]) {
        return Err(input(format!("{}: omega is not strictly ascending", path.display())));
    }
    Ok(s)
}

pub fn render(s: &Series) -> String {
    s.omega.iter().zip(&s.value).map(|(w, v)| format!("{} {}\n", num(*w), num(*v))).collect()
}

/// Writes `<stem>_<series>.dat` per input file and series. Files given
/// together are overlays, so their omega grids must match.
pub fn plotdata(inputs: &[PathBuf], series: &[String], out: &Path) -> Result<Vec<PathBuf>, CliError> {
    if inputs.is_empty() || series.is_empty() {
        return Err(CliError::Config("plotdata needs at least one CSV and one --series".into()));
    }
    let mut pending = Vec::new();
    for column in series {
        let mut grid: Option<(&Path, Vec<f64>)> = None;
        for path in inputs {
            let s = read_series(path, column)?;
            match &grid {
                None => grid = Some((path, s.omega.clone())),
                Some((first, g)) if *g != s.omega => {
                    return Err(input(format!(
                        "omega grids of {} and {} differ; overlays need identical grids",
                        first.display(),
                        path.display()
                    )))
                }
                Some(_) => {}
            }
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("series");
            pending.push((out.join(format!("{stem}_{column}.dat")), render(&s)));
        }
    }
    let mut written = Vec::new();
    for (path, text) in pending {
        std::fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}
