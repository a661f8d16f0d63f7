use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use hulc::Dataset;

/// Reads a headed CSV of numeric columns.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let names: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if names.is_empty() {
        bail!("{}: no header row", path.display());
    }
    let mut columns = vec![Vec::new(); names.len()];
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: row {}", path.display(), i + 1))?;
        for (j, field) in rec.iter().enumerate() {
            let v: f64 = field.trim().parse().with_context(|| {
                format!("{}: row {}, column `{}`: `{field}` is not a number", path.display(), i + 1, names[j])
            })?;
            columns[j].push(v);
        }
    }
    Ok(Dataset::new(names, columns)?)
}

pub fn write_dataset(data: &Dataset, out: Option<&Path>) -> Result<()> {
    let mut w = csv_writer(out)?;
    w.write_record(data.names())?;
    for i in 0..data.n_rows() {
        w.write_record((0..data.n_cols()).map(|j| data.column(j)[i].to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_writer(out: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}
