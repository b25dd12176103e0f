//! Config files: one `key = value` per line, `#` starts a comment. Keys are
//! long flag names (`graph-stage` or `graph_stage`). A key fills in its flag
//! only when the command line does not already set it; `true`/`false`
//! toggle switches.

use anyhow::{bail, Context, Result};

const SUBCOMMANDS: [&str; 9] = [
    "gen",
    "gt",
    "build",
    "build-baseline",
    "search",
    "insert",
    "delete",
    "analyze",
    "report",
];

/// Returns `argv` with config-file entries inserted after the subcommand.
pub fn apply(argv: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let entries = parse(&text).with_context(|| format!("parsing config {path}"))?;
    let Some(sub) = argv.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(argv);
    };
    let mut extra = Vec::new();
    for (key, value) in entries {
        let flag = format!("--{key}");
        if argv.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}="))) {
            continue;
        }
        match value.as_str() {
            "true" => extra.push(flag),
            "false" => {}
            _ => {
                extra.push(flag);
                extra.push(value);
            }
        }
    }
    let mut out = argv;
    out.splice(sub + 1..sub + 1, extra);
    Ok(out)
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Parses the config text into `(flag-name, value)` pairs in file order.
pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("line {}: expected key = value", i + 1);
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            bail!("line {}: invalid key {:?}", i + 1, k.trim());
        }
        if out.iter().any(|(seen, _)| *seen == key) {
            bail!("line {}: duplicate key {key}", i + 1);
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}
