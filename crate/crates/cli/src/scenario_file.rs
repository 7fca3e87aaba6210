//! TOML scenario files.

use std::path::Path;

use dtamp::scene::Scenario;

use crate::error::{CliError, ParseError, Result};

pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(parse_scenario_str(&text, path)?)
}

/// Parses and validates `text`; `path` is only used in diagnostics.
pub fn parse_scenario_str(text: &str, path: &Path) -> std::result::Result<Scenario, ParseError> {
    let error = |line: usize, key: String, message: String| ParseError {
        path: path.to_path_buf(),
        line,
        key,
        message,
    };
    let scenario: Scenario = toml::from_str(text).map_err(|e| {
        let start = e.span().map_or(0, |s| s.start);
        let message = e.message().trim().to_string();
        error(line_of(text, start), syntax_key(text, start, &message), message)
    })?;
    if let Err(e) = scenario.validate() {
        let message = match e {
            dtamp::Error::InvalidScenario(m) => m,
            other => other.to_string(),
        };
        let (line, key) = validation_location(text, &message);
        return Err(error(line, key, message));
    }
    Ok(scenario)
}

/// Canonical text form; parsing it yields an identical scenario.
pub fn to_canonical(scenario: &Scenario) -> String {
    toml::to_string(scenario).expect("scenarios serialize to TOML")
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Table header in force on the line holding `offset`, without brackets.
fn section_at(text: &str, offset: usize) -> Option<String> {
    let offset = offset.min(text.len());
    let line_end = text[offset..].find('\n').map_or(text.len(), |i| offset + i);
    text[..line_end]
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| l.starts_with('['))
        .map(|l| l.trim_matches(|c| c == '[' || c == ']').trim().to_string())
}

fn join(section: Option<String>, key: &str) -> String {
    match section {
        Some(s) if !key.is_empty() => format!("{s}.{key}"),
        Some(s) => s,
        None => key.to_string(),
    }
}

fn first_backticked(message: &str) -> Option<&str> {
    let start = message.find('`')? + 1;
    let len = message[start..].find('`')?;
    Some(&message[start..start + len])
}

fn syntax_key(text: &str, offset: usize, message: &str) -> String {
    let section = section_at(text, offset);
    if message.starts_with("unknown field") || message.starts_with("missing field") {
        if let Some(k) = first_backticked(message) {
            return join(section, k);
        }
    }
    let offset = offset.min(text.len());
    let line_start = text[..offset].rfind('\n').map_or(0, |i| i + 1);
    let line = text[line_start..].lines().next().unwrap_or("");
    match line.split_once('=') {
        Some((k, _)) => join(section, k.trim()),
        None => section.unwrap_or_default(),
    }
}

/// Message prefix to the section it concerns.
const PREFIXES: [(&str, &str); 7] = [
    ("robot", "robots"),
    ("objective", "objective"),
    ("object", "objects"),
    ("obstacle", "obstacles"),
    ("penalty", "penalties"),
    ("extensions", "extensions"),
    ("solver", "solver"),
];

/// Best-effort position of the key a validation message complains about.
fn validation_location(text: &str, message: &str) -> (usize, String) {
    let dotted = message.split(|c: char| c.is_whitespace() || c == ',').find(|w| {
        w.contains('.')
            && w.split('.')
                .all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_lowercase() || c == '_'))
    });
    if let Some(path) = dotted {
        let (section, key) = path.split_once('.').unwrap_or((path, ""));
        return (key_line(text, section, key), path.to_string());
    }
    if let Some(name) = first_backticked(message) {
        let needle = format!("\"{name}\"");
        if let Some(pos) = text.lines().position(|l| l.contains("name") && l.contains(&needle)) {
            let offset: usize = text.lines().take(pos).map(|l| l.len() + 1).sum();
            return (pos + 1, join(section_at(text, offset + 1), name));
        }
    }
    let section = PREFIXES
        .iter()
        .find(|(prefix, _)| message.starts_with(prefix))
        .map_or("scenario", |(_, s)| s);
    (key_line(text, section, ""), section.to_string())
}

/// Line of `key` inside `[section]`, else of the header, else 1.
fn key_line(text: &str, section: &str, key: &str) -> usize {
    let mut in_section = false;
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let l = raw.trim();
        if l.starts_with('[') {
            let name = l.trim_matches(|c| c == '[' || c == ']').trim();
            in_section = name == section || name.starts_with(&format!("{section}."));
            if in_section && header.is_none() {
                header = Some(i + 1);
            }
            continue;
        }
        if !key.is_empty() && in_section {
            if let Some((k, _)) = l.split_once('=') {
                if k.trim() == key {
                    return i + 1;
                }
            }
        }
    }
    header.unwrap_or(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dtamp::scene::presets;

    #[test]
    fn presets_round_trip() {
        for name in presets::NAMES {
            let s = presets::by_name(name).unwrap();
            let text = to_canonical(&s);
            let back = parse_scenario_str(&text, Path::new("x.toml")).unwrap();
            assert_eq!(back, s, "{name}");
        }
    }

    #[test]
    fn dotted_validation_key_is_located() {
        let text = "[horizon]\nsegments = 3\nduration = -1.0\n";
        assert_eq!(
            validation_location(text, "horizon.duration must be positive"),
            (3, "horizon.duration".into())
        );
    }
}
