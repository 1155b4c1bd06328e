//! Channel arguments and JSON configuration files.
//!
//! A config file is a JSON object whose keys are long flag names of the
//! chosen subcommand (`n1`, `ell_max` or `ell-max`, ...). Its entries are
//! turned into flags placed ahead of the command-line flags, so anything
//! given on the command line overrides the file.

use std::ffi::OsString;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use ir_ntc_core::channels::linear_to_db;
use ir_ntc_core::ChannelSpec;
use serde_json::Value;

/// Channel given as `bsc:<p>` or `awgn:<snr_db>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelArg(pub ChannelSpec);

impl FromStr for ChannelArg {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| anyhow!("expected bsc:<p> or awgn:<snr_db>, got {s:?}"))?;
        let x: f64 = value
            .trim()
            .parse()
            .with_context(|| format!("bad channel parameter {value:?}"))?;
        let spec = match kind.trim().to_ascii_lowercase().as_str() {
            "bsc" => ChannelSpec::bsc(x)?,
            "awgn" => ChannelSpec::awgn_db(x)?,
            other => bail!("unknown channel kind {other:?}"),
        };
        Ok(Self(spec))
    }
}

impl fmt::Display for ChannelArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            ChannelSpec::Bsc { p } => write!(f, "bsc:{p}"),
            ChannelSpec::Awgn { eta } => write!(f, "awgn:{}", linear_to_db(eta)),
        }
    }
}

/// Accepts `"bsc:0.0789"`, `{"kind":"bsc","p":0.0789}` or
/// `{"kind":"awgn","snr_db":2.0}` and returns the flag form.
pub fn channel_from_json(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => {
            ChannelArg::from_str(s)?;
            Ok(s.clone())
        }
        Value::Object(map) => {
            let kind = map
                .get("kind")
                .and_then(Value::as_str)
                .ok_or_else(|| anyhow!("channel needs a \"kind\""))?;
            let (key, tag) = match kind {
                "bsc" => ("p", "bsc"),
                "awgn" => ("snr_db", "awgn"),
                other => bail!("unknown channel kind {other:?}"),
            };
            let x = map
                .get(key)
                .and_then(Value::as_f64)
                .ok_or_else(|| anyhow!("{kind} channel needs a numeric \"{key}\""))?;
            Ok(format!("{tag}:{x}"))
        }
        _ => bail!("channel must be a string or an object"),
    }
}

fn scalar(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => bail!("expected a string or number, got {v}"),
    }
}

/// Flags equivalent to a config object.
pub fn config_flags(v: &Value) -> Result<Vec<String>> {
    let map = v
        .as_object()
        .ok_or_else(|| anyhow!("config file must hold a JSON object"))?;
    let mut out = Vec::new();
    for (key, value) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        let flag = if flag == "--i" {
            "--I".to_string()
        } else {
            flag
        };
        match value {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => out.push(flag),
            _ if key == "channel" => {
                out.push(flag);
                out.push(channel_from_json(value)?);
            }
            Value::Array(items) => {
                let parts = items.iter().map(scalar).collect::<Result<Vec<_>>>()?;
                out.push(flag);
                out.push(parts.join(","));
            }
            _ => {
                out.push(flag);
                out.push(scalar(value)?);
            }
        }
    }
    Ok(out)
}

/// Removes `--config <file>` from `argv` and splices the file's flags in
/// right after the subcommand name. A flag also given on the command line
/// is dropped from the config, so list flags are replaced, not appended.
pub fn expand_config(argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(arg) = it.next() {
        let s = arg.to_string_lossy();
        if s == "--config" {
            let p = it.next().ok_or_else(|| anyhow!("--config needs a file"))?;
            path = Some(p);
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(OsString::from(p));
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else { return Ok(rest) };
    let text = std::fs::read_to_string(Path::new(&path))
        .with_context(|| format!("reading config {}", Path::new(&path).display()))?;
    let json: Value = serde_json::from_str(&text).context("parsing config JSON")?;
    let flags = config_flags(&json)?;
    // the subcommand is the first argument after the program name that is not a flag
    let at = rest
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map_or(rest.len(), |i| i + 2);
    let tail = rest.split_off(at.min(rest.len()));
    let given = |flag: &str| {
        tail.iter().any(|a| {
            let a = a.to_string_lossy();
            a == flag || a.strip_prefix(flag).is_some_and(|r| r.starts_with('='))
        })
    };
    let mut keep = true;
    for f in flags {
        if f.starts_with("--") {
            keep = !given(&f);
        }
        if keep {
            rest.push(OsString::from(f));
        }
    }
    rest.extend(tail);
    Ok(rest)
}
