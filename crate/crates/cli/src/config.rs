//! Turning command-line strings into models, points and grids.

use std::fmt;
use std::path::Path;

use uhlmann_core::{builtin, load_model, ModelDefinition};

/// Invalid invocation; reported on stderr with exit code 1.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<E: std::error::Error> From<E> for ConfigError {
    fn from(e: E) -> Self {
        ConfigError(e.to_string())
    }
}

pub fn config_error(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

/// `builtin:NAME` or a path to a model file.
pub fn load(source: &str) -> Result<ModelDefinition, ConfigError> {
    if let Some(name) = source.strip_prefix("builtin:") {
        return builtin(name).map_err(|e| config_error(e.to_string()));
    }
    let path = Path::new(source);
    let text = std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read model file {source}: {e}")))?;
    load_model(&text).map_err(|e| config_error(format!("{source}: {e}")))
}

fn parse_f64(text: &str, what: &str) -> Result<f64, ConfigError> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| config_error(format!("{what}: `{text}` is not a number")))?;
    if !v.is_finite() {
        return Err(config_error(format!("{what}: `{text}` is not finite")));
    }
    Ok(v)
}

/// Split `name=value,name=value` and order the values by `params`.
fn assign<T>(
    text: &str,
    params: &[String],
    flag: &str,
    parse: impl Fn(&str, &str) -> Result<T, ConfigError>,
) -> Result<Vec<T>, ConfigError> {
    let mut slots: Vec<Option<T>> = params.iter().map(|_| None).collect();
    for item in text.split(',').filter(|s| !s.trim().is_empty()) {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| config_error(format!("{flag}: expected name=value, got `{item}`")))?;
        let name = name.trim();
        let k = params
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| config_error(format!("{flag}: unknown parameter `{name}`")))?;
        if slots[k].is_some() {
            return Err(config_error(format!("{flag}: `{name}` given twice")));
        }
        slots[k] = Some(parse(value, name)?);
    }
    slots
        .into_iter()
        .zip(params)
        .map(|(v, name)| v.ok_or_else(|| config_error(format!("{flag}: missing `{name}`"))))
        .collect()
}

/// `--at a=0,b=0.69`
pub fn parse_point(text: &str, params: &[String]) -> Result<Vec<f64>, ConfigError> {
    assign(text, params, "--at", parse_f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    /// `count` values from `lo` to `hi`, both endpoints included.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.hi
                } else {
                    self.lo + step * k as f64
                }
            })
            .collect()
    }
}

/// `lo:hi:count`
pub fn parse_axis(text: &str, what: &str) -> Result<Axis, ConfigError> {
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(config_error(format!(
            "{what}: expected lo:hi:count, got `{text}`"
        )));
    };
    let lo = parse_f64(lo, what)?;
    let hi = parse_f64(hi, what)?;
    let count: usize = count
        .trim()
        .parse()
        .map_err(|_| config_error(format!("{what}: count `{count}` is not a positive integer")))?;
    if count == 0 {
        return Err(config_error(format!("{what}: count must be at least 1")));
    }
    if hi < lo {
        return Err(config_error(format!("{what}: hi < lo")));
    }
    Ok(Axis { lo, hi, count })
}

/// `--grid a=0:1:5,b=0.1:2:5`, one axis per parameter in parameter order.
pub fn parse_grid(text: &str, params: &[String]) -> Result<Vec<Axis>, ConfigError> {
    assign(text, params, "--grid", parse_axis)
}

/// Cartesian product of the axes; the first parameter varies slowest.
pub fn grid_points(axes: &[Axis]) -> Vec<Vec<f64>> {
    let values: Vec<Vec<f64>> = axes.iter().map(Axis::values).collect();
    let mut points = vec![Vec::new()];
    for axis in &values {
        points = points
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    points
}
