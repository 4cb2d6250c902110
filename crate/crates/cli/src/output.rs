use std::fs::File;
use std::io::{self, BufWriter, Write};

use lpm_shapley::report::{write_csv, Footer};
use serde::Serialize;

use crate::args::{Format, OutputArgs};
use crate::failure::{Classify, CmdResult};

#[derive(Serialize)]
struct Envelope<'a, J: Serialize> {
    seed: Option<u64>,
    samples: Option<u64>,
    rows: &'a J,
}

fn sink(output: &OutputArgs) -> CmdResult<Box<dyn Write>> {
    Ok(match &output.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).io_err(format!("creating {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Write CSV rows with the metadata footer, or the JSON mirror of the same
/// result.
pub fn emit<C, J>(output: &OutputArgs, footer: Footer, csv_rows: Vec<C>, json: &J) -> CmdResult
where
    C: Serialize,
    J: Serialize,
{
    let mut w = sink(output)?;
    match output.format {
        Format::Csv => write_csv(&mut w, csv_rows, &footer).io_err("writing CSV")?,
        Format::Json => {
            let envelope = Envelope {
                seed: footer.seed,
                samples: footer.samples,
                rows: json,
            };
            serde_json::to_writer_pretty(&mut w, &envelope).io_err("writing JSON")?;
            writeln!(w).io_err("writing JSON")?;
        }
    }
    w.flush().io_err("flushing output")
}
