//! Flat `key = value` scenario files.
//!
//! One assignment per line; blank lines and lines starting with `#` or `;`
//! are skipped, as are `[section]` headers. Values are bare words, numbers or
//! double-quoted strings. Every key is optional and falls back to
//! [`Scenario::default`]. Unknown and repeated keys are rejected.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pneumabond_core::{
    ActuatorParams, C2Mode, ControlParams, Method, Mode, PacketParams, SolverOptions,
};

use crate::error::Error;

/// Recognised keys, in the order they are written back out.
pub const KEYS: [&str; 25] = [
    "mode",
    "t_end",
    "dt",
    "record_stride",
    "solver",
    "m",
    "rb",
    "k",
    "cd",
    "d_orifice",
    "area",
    "rho",
    "r_gas",
    "temperature",
    "l0",
    "c2_mode",
    "volume_coupled",
    "mu",
    "kp",
    "kd",
    "amplitude",
    "omega",
    "pressure_limit",
    "csv_path",
    "plot_dir",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Shared by both sides.
    pub packet: PacketParams,
    pub mu: f64,
    pub control: ControlParams,
    pub solver: SolverOptions,
    /// Symmetric clamp on the supply pressures (Pa).
    pub pressure_limit: Option<f64>,
    pub csv_path: PathBuf,
    pub plot_dir: Option<PathBuf>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            packet: PacketParams::default(),
            mu: 2.5,
            control: ControlParams::default(),
            solver: SolverOptions::default(),
            pressure_limit: None,
            csv_path: PathBuf::from("simulation.csv"),
            plot_dir: None,
        }
    }
}

impl Scenario {
    pub fn actuator(&self) -> ActuatorParams {
        ActuatorParams::symmetric(self.packet, self.mu)
    }

    pub fn validate(&self) -> Result<(), Error> {
        self.actuator().validate()?;
        self.control.validate()?;
        self.solver
            .validate()
            .map_err(|e| Error::Validation(e.to_string()))?;
        if let Some(limit) = self.pressure_limit {
            if !(limit.is_finite() && limit > 0.0) {
                return Err(Error::Validation(format!(
                    "pressure_limit = {limit} is invalid: must be finite and > 0"
                )));
            }
        }
        Ok(())
    }

    /// Writes every key back in canonical order; unset optional keys are
    /// left out. Floats use the shortest representation that parses back to
    /// the same value.
    pub fn to_config_string(&self) -> String {
        let p = &self.packet;
        let c = &self.control;
        let s = &self.solver;
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        put("mode", c.mode.to_string());
        put("t_end", s.t_end.to_string());
        put("dt", s.dt.to_string());
        put("record_stride", s.record_stride.to_string());
        put("solver", s.method.to_string());
        put("m", p.mass.to_string());
        put("rb", p.damping.to_string());
        put("k", p.stiffness.to_string());
        put("cd", p.discharge_coefficient.to_string());
        put("d_orifice", p.orifice_diameter.to_string());
        put("area", p.area.to_string());
        put("rho", p.air_density.to_string());
        put("r_gas", p.gas_constant.to_string());
        put("temperature", p.temperature.to_string());
        put("l0", p.column_length.to_string());
        put("c2_mode", p.c2_mode.to_string());
        put("volume_coupled", p.volume_coupled.to_string());
        put("mu", self.mu.to_string());
        put("kp", c.kp.to_string());
        put("kd", c.kd.to_string());
        put("amplitude", c.amplitude.to_string());
        put("omega", c.omega.to_string());
        if let Some(limit) = self.pressure_limit {
            put("pressure_limit", limit.to_string());
        }
        put("csv_path", quote(&self.csv_path));
        if let Some(dir) = &self.plot_dir {
            put("plot_dir", quote(dir));
        }
        out
    }
}

fn quote(path: &Path) -> String {
    format!("\"{}\"", path.display())
}

/// Reads and validates a scenario file.
pub fn load_config(path: impl AsRef<Path>) -> Result<Scenario, Error> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

/// Parses and validates scenario text.
pub fn parse_config(text: &str) -> Result<Scenario, Error> {
    let mut scenario = Scenario::default();
    let mut seen = HashSet::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty()
            || trimmed.starts_with('#')
            || trimmed.starts_with(';')
            || (trimmed.starts_with('[') && trimmed.ends_with(']'))
        {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(Error::Parse {
                line,
                key: None,
                message: "expected `key = value`".into(),
            });
        };
        let key = key.trim();
        let value = unquote(value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if !seen.insert(key.to_string()) {
            return Err(Error::Parse {
                line,
                key: Some(key.into()),
                message: "key given more than once".into(),
            });
        }
        assign(&mut scenario, key, value).map_err(|message| Error::Parse {
            line,
            key: Some(key.into()),
            message,
        })?;
    }
    scenario.validate()?;
    Ok(scenario)
}

fn unquote(value: &str) -> &str {
    value
        .strip_prefix('"')
        .and_then(|v| v.strip_suffix('"'))
        .unwrap_or(value)
}

fn number(value: &str) -> Result<f64, String> {
    value
        .parse::<f64>()
        .map_err(|_| format!("`{value}` is not a number"))
}

fn parsed<T: FromStr<Err = String>>(value: &str) -> Result<T, String> {
    value.parse()
}

fn assign(s: &mut Scenario, key: &str, value: &str) -> Result<(), String> {
    let p = &mut s.packet;
    let c = &mut s.control;
    match key {
        "mode" => c.mode = parsed::<Mode>(value)?,
        "t_end" => s.solver.t_end = number(value)?,
        "dt" => s.solver.dt = number(value)?,
        "record_stride" => {
            s.solver.record_stride = value
                .parse()
                .map_err(|_| format!("`{value}` is not a non-negative integer"))?
        }
        "solver" => s.solver.method = parsed::<Method>(value)?,
        "m" => p.mass = number(value)?,
        "rb" => p.damping = number(value)?,
        "k" => p.stiffness = number(value)?,
        "cd" => p.discharge_coefficient = number(value)?,
        "d_orifice" => p.orifice_diameter = number(value)?,
        "area" => p.area = number(value)?,
        "rho" => p.air_density = number(value)?,
        "r_gas" => p.gas_constant = number(value)?,
        "temperature" => p.temperature = number(value)?,
        "l0" => p.column_length = number(value)?,
        "c2_mode" => p.c2_mode = parsed::<C2Mode>(value)?,
        "volume_coupled" => {
            p.volume_coupled = value
                .parse()
                .map_err(|_| format!("`{value}` is not true or false"))?
        }
        "mu" => s.mu = number(value)?,
        "kp" => c.kp = number(value)?,
        "kd" => c.kd = number(value)?,
        "amplitude" => c.amplitude = number(value)?,
        "omega" => c.omega = number(value)?,
        "pressure_limit" => s.pressure_limit = Some(number(value)?),
        "csv_path" => s.csv_path = PathBuf::from(value),
        "plot_dir" => s.plot_dir = Some(PathBuf::from(value)),
        _ => unreachable!("key list and assignments disagree"),
    }
    Ok(())
}
