//! Geometry files: a JSON array of `{position_m, directivity}` objects.

use std::path::Path;

use serde::{Deserialize, Serialize};
use superarray_core::ArrayConfig;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Element {
    pub position_m: f64,
    pub directivity: f64,
}

pub fn to_elements(cfg: &ArrayConfig) -> Vec<Element> {
    cfg.positions()
        .iter()
        .zip(cfg.directivity())
        .map(|(&position_m, &directivity)| Element {
            position_m,
            directivity,
        })
        .collect()
}

pub fn from_elements(elements: &[Element]) -> superarray_core::Result<ArrayConfig> {
    ArrayConfig::new(
        elements.iter().map(|e| e.position_m).collect(),
        elements.iter().map(|e| e.directivity).collect(),
    )
}

pub fn parse(text: &str) -> Result<ArrayConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let elements: Vec<Element> = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("{path}: {}", e.into_inner()))
    })?;
    from_elements(&elements).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load(path: &Path) -> Result<ArrayConfig> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn to_json(cfg: &ArrayConfig) -> String {
    let mut s = serde_json::to_string_pretty(&to_elements(cfg)).expect("geometry serializes");
    s.push('\n');
    s
}
