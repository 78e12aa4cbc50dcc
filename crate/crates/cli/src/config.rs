//! `--config FILE` support: a flat `key = value` file whose entries become
//! flags placed ahead of the command-line ones, so explicit flags win.

use std::path::Path;

use crate::CliError;

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", n + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(CliError::Config(format!("config line {}: bad key {:?}", n + 1, k.trim())));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Location of the `--config` value in `argv`, if any.
fn config_path(argv: &[String]) -> Result<Option<String>, CliError> {
    let mut found = None;
    let mut i = 0;
    while i < argv.len() {
        let a = &argv[i];
        if a == "--" {
            break;
        }
        if let Some(v) = a.strip_prefix("--config=") {
            found = Some(v.to_string());
        } else if a == "--config" {
            let v = argv
                .get(i + 1)
                .ok_or_else(|| CliError::Config("--config needs a file name".into()))?;
            found = Some(v.clone());
            i += 1;
        }
        i += 1;
    }
    Ok(found)
}

/// Rewrites `argv` with the config file's entries inserted right after the
/// subcommand. `true`/`false` values toggle switches.
pub fn merge(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&argv)? else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::Config(format!("cannot read config {path}: {e}")))?;
    let entries = parse(&text)?;

    // The subcommand is the first bare word that is not the value of --config.
    let mut sub = None;
    let mut i = 1;
    while i < argv.len() {
        if argv[i] == "--config" {
            i += 2;
            continue;
        }
        if !argv[i].starts_with('-') {
            sub = Some(i);
            break;
        }
        i += 1;
    }
    let Some(sub) = sub else {
        return Ok(argv);
    };

    let mut flags = Vec::new();
    for (k, v) in entries {
        match v.as_str() {
            "true" => flags.push(format!("--{k}")),
            "false" => {}
            _ => flags.push(format!("--{k}={v}")),
        }
    }
    let mut out = argv[..=sub].to_vec();
    out.extend(flags);
    out.extend_from_slice(&argv[sub + 1..]);
    Ok(out)
}
