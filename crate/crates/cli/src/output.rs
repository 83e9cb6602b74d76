//! CSV output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Error;
use crate::series::{TimeSeries, COLUMNS};

/// Writes the twelve columns with a header row and LF line endings. Values
/// use the shortest decimal form that parses back to the same bits,
/// switching to exponent notation for very large or small magnitudes.
pub fn write_csv(ts: &TimeSeries, path: impl AsRef<Path>) -> Result<(), Error> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_csv_to(ts, &mut out)?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn write_csv_to<W: Write>(ts: &TimeSeries, out: W) -> Result<(), Error> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    writer.write_record(COLUMNS)?;
    for i in 0..ts.len() {
        writer.write_record(ts.row(i).iter().map(|v| format!("{v:?}")))?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}
