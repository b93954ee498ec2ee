use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::config::{CliError, Provenance};

/// One output file: its name inside the output directory and its content.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub name: String,
    pub body: String,
}

/// A CSV table preceded by the provenance header as `#` comment lines.
pub fn csv(
    prov: &Provenance,
    name: &str,
    header: &str,
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Artifact {
    let mut body = prov.csv_header();
    body.push_str(header);
    body.push('\n');
    for row in rows {
        body.push_str(&row.join(","));
        body.push('\n');
    }
    Artifact {
        name: format!("{name}.csv"),
        body,
    }
}

/// A CSV artifact whose table was rendered by a library writer.
pub fn csv_from(prov: &Provenance, name: &str, table: &[u8]) -> Artifact {
    let mut body = prov.csv_header();
    body.push_str(&String::from_utf8_lossy(table));
    Artifact {
        name: format!("{name}.csv"),
        body,
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    provenance: &'a Provenance,
    result: &'a T,
}

pub fn json<T: Serialize>(prov: &Provenance, name: &str, result: &T) -> Result<Artifact, CliError> {
    let mut body = serde_json::to_string_pretty(&Envelope {
        provenance: prov,
        result,
    })
    .map_err(|e| CliError::Numeric(format!("cannot serialize {name}: {e}")))?;
    body.push('\n');
    Ok(Artifact {
        name: format!("{name}.json"),
        body,
    })
}

/// Shortest round-trip form, in exponent notation outside [1e-4, 1e15).
pub fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else if v == 0.0 || (1e-4..1e15).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "nan".into(), num)
}

pub fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

/// Writes every artifact into `dir`, creating it if needed, and lists the
/// written paths on `stdout`. Without a directory only the first artifact
/// is printed.
pub fn emit(
    artifacts: &[Artifact],
    dir: Option<&Path>,
    stdout: &mut impl Write,
) -> Result<(), CliError> {
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir)
                .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
            for a in artifacts {
                let path = dir.join(&a.name);
                fs::write(&path, &a.body)
                    .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
                writeln!(stdout, "wrote {}", path.display())?;
            }
        }
        None => {
            if let Some(a) = artifacts.first() {
                stdout.write_all(a.body.as_bytes())?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers() {
        assert_eq!(num(0.1), "0.1");
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(opt(None), "nan");
        assert_eq!(num(1e-7), "1e-7");
        assert_eq!(num(-2.5e-9), "-2.5e-9");
    }
}
