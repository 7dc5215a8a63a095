//! Report envelope `{meta, input, results}` with reals as 12-significant-digit strings.

use std::time::{Instant, SystemTime, UNIX_EPOCH};

use quasirand::report::sig12;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Cli;
use crate::CliError;

/// Replace every non-integer JSON number by its `sig12` string.
pub fn stringify_reals(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => Value::String(sig12(n.as_f64().expect("f64 number"))),
        Value::Array(a) => Value::Array(a.into_iter().map(stringify_reals).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, stringify_reals(v))).collect()),
        other => other,
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Result<Value, CliError> {
    serde_json::to_value(x).map_err(|e| CliError::Input(format!("serialization failed: {e}")))
}

pub struct Clock {
    started: Instant,
    unix_ms: u128,
}

impl Clock {
    pub fn start() -> Self {
        Clock {
            started: Instant::now(),
            unix_ms: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0),
        }
    }
}

pub fn envelope(cli: &Cli, clock: &Clock, input: Value, results: Value) -> Result<Value, CliError> {
    let meta = json!({
        "tool": "quasirand",
        "version": env!("CARGO_PKG_VERSION"),
        "command": cli.command.name(),
        "config": to_value(cli)?,
        "seed": cli.seed,
        "started_unix_ms": clock.unix_ms as u64,
        "wall_clock_seconds": clock.started.elapsed().as_secs_f64(),
    });
    Ok(json!({
        "meta": stringify_reals(meta),
        "input": stringify_reals(input),
        "results": stringify_reals(results),
    }))
}

/// Write pretty JSON to `--out` when given, stdout otherwise.
pub fn emit(cli: &Cli, report: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(report).expect("values serialize") + "\n";
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_become_strings_integers_stay() {
        let v = stringify_reals(json!({"a": 0.1, "b": [1, 2.5e-13], "c": {"d": 4.0}, "e": "x"}));
        assert_eq!(v, json!({"a": "0.1", "b": [1, "2.5e-13"], "c": {"d": "4"}, "e": "x"}));
    }
}
