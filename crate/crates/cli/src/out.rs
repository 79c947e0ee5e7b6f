//! Output plumbing: scalar rendering and deterministic JSON writing.

use modectx::scalar::Scalar;
use serde::Serialize;

/// A scalar rendered for reports: the exact literal is the source of truth,
/// the float is a convenience.
#[derive(Debug, Clone, Serialize)]
pub struct ScalarRepr {
    pub literal: String,
    pub float: f64,
}

impl ScalarRepr {
    pub fn of<S: Scalar>(s: &S) -> Self {
        ScalarRepr {
            literal: s.literal(),
            float: s.to_f64(),
        }
    }
}

/// Serializes pretty JSON to `--out FILE` or stdout. A closed stdout pipe is
/// not an error.
pub fn emit<T: Serialize>(value: &T, out: Option<&std::path::Path>) -> Result<(), String> {
    let json = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
    match out {
        Some(path) => std::fs::write(path, json + "\n").map_err(|e| e.to_string()),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout(), "{json}") {
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                other => other.map_err(|e| e.to_string()),
            }
        }
    }
}
