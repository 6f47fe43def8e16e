//! JSON scenario ingestion.
//!
//! Keys carry their unit as a suffix (`mass_kg`, `intensity_W_per_m2`).
//! Frequencies may be given either as `<name>_rad_per_s` or `<name>_hz`;
//! the latter is multiplied by 2π here and nowhere else. Unknown keys and
//! missing required keys are reported together, each with its dotted path.

use std::f64::consts::TAU;

use serde_json::{Map, Value};

use super::{AtomSpec, BeamConfig, NanoparticleSpec, PhysicalConstants, PhysicalScenario, Timing, TrapConfig};
use crate::error::{Error, Result};
use crate::protocol::{HyperfineLevel, InitialState, ProtocolOptions};
use crate::C64;

pub const DISCUSSION_PRESET: &str = include_str!("../../presets/discussion.json");
pub const FIGURE_TRANSIENT_PRESET: &str = include_str!("../../presets/figure_transient.json");

/// Looks up a shipped preset by name (with or without `.json`).
pub fn preset(name: &str) -> Option<&'static str> {
    match name.trim_end_matches(".json") {
        "discussion" => Some(DISCUSSION_PRESET),
        "figure_transient" => Some(FIGURE_TRANSIENT_PRESET),
        _ => None,
    }
}

const SCENARIO_SECTIONS: [&str; 5] = ["atom", "nanoparticle", "trap", "beam", "timing"];
const TOP_LEVEL_KEYS: [&str; 10] = [
    "atom",
    "nanoparticle",
    "trap",
    "beam",
    "timing",
    "gravity_m_per_s2",
    "superposition_size_m",
    "protocol",
    "transient",
    "sweep",
];

/// Walks one JSON object, recording missing, mistyped and unknown keys.
struct Reader<'a> {
    path: String,
    obj: Option<&'a Map<String, Value>>,
    known: Vec<String>,
}

impl<'a> Reader<'a> {
    fn new(path: &str, value: Option<&'a Value>, errors: &mut Vec<String>) -> Self {
        let obj = match value {
            Some(Value::Object(m)) => Some(m),
            Some(_) => {
                errors.push(format!("{path}: expected an object"));
                None
            }
            None => None,
        };
        Reader { path: path.to_string(), obj, known: Vec::new() }
    }

    fn key_path(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    fn raw(&mut self, key: &str) -> Option<&'a Value> {
        self.known.push(key.to_string());
        self.obj.and_then(|m| m.get(key))
    }

    fn opt_f64(&mut self, key: &str, errors: &mut Vec<String>) -> Option<f64> {
        match self.raw(key) {
            None | Some(Value::Null) => None,
            Some(v) => match v.as_f64() {
                Some(x) => Some(x),
                None => {
                    errors.push(format!("{}: expected a number", self.key_path(key)));
                    None
                }
            },
        }
    }

    fn req_f64(&mut self, key: &str, errors: &mut Vec<String>) -> f64 {
        let present = self.obj.map(|m| m.contains_key(key)).unwrap_or(false);
        match self.opt_f64(key, errors) {
            Some(x) => x,
            None => {
                if !present {
                    errors.push(format!("{}: missing required key", self.key_path(key)));
                }
                f64::NAN
            }
        }
    }

    fn opt_bool(&mut self, key: &str, errors: &mut Vec<String>) -> Option<bool> {
        match self.raw(key) {
            None | Some(Value::Null) => None,
            Some(Value::Bool(b)) => Some(*b),
            Some(_) => {
                errors.push(format!("{}: expected true or false", self.key_path(key)));
                None
            }
        }
    }

    fn opt_u64(&mut self, key: &str, errors: &mut Vec<String>) -> Option<u64> {
        match self.raw(key) {
            None | Some(Value::Null) => None,
            Some(v) => match v.as_u64() {
                Some(x) => Some(x),
                None => {
                    errors.push(format!("{}: expected a non-negative integer", self.key_path(key)));
                    None
                }
            },
        }
    }

    fn opt_str(&mut self, key: &str, errors: &mut Vec<String>) -> Option<&'a str> {
        match self.raw(key) {
            None | Some(Value::Null) => None,
            Some(Value::String(s)) => Some(s.as_str()),
            Some(_) => {
                errors.push(format!("{}: expected a string", self.key_path(key)));
                None
            }
        }
    }

    /// Reads `<base>_rad_per_s` or `<base>_hz`, returning rad/s.
    fn opt_freq(&mut self, base: &str, errors: &mut Vec<String>) -> Option<f64> {
        let rad = self.opt_f64(&format!("{base}_rad_per_s"), errors);
        let hz = self.opt_f64(&format!("{base}_hz"), errors);
        match (rad, hz) {
            (Some(_), Some(_)) => {
                errors.push(format!(
                    "{}: give either `_rad_per_s` or `_hz`, not both",
                    self.key_path(base)
                ));
                None
            }
            (Some(w), None) => Some(w),
            (None, Some(f)) => Some(TAU * f),
            (None, None) => None,
        }
    }

    fn req_freq(&mut self, base: &str, errors: &mut Vec<String>) -> f64 {
        let any_present = self
            .obj
            .map(|m| m.contains_key(&format!("{base}_rad_per_s")) || m.contains_key(&format!("{base}_hz")))
            .unwrap_or(false);
        match self.opt_freq(base, errors) {
            Some(w) => w,
            None => {
                if !any_present {
                    errors.push(format!("{}_rad_per_s (or _hz): missing required key", self.key_path(base)));
                }
                f64::NAN
            }
        }
    }

    fn finish(self, errors: &mut Vec<String>) {
        if let Some(m) = self.obj {
            for k in m.keys() {
                if !self.known.iter().any(|x| x == k) {
                    errors.push(format!("{}: unknown key", self.key_path(k)));
                }
            }
        }
    }
}

fn check_top_level(root: &Value, errors: &mut Vec<String>) -> Option<()> {
    match root {
        Value::Object(m) => {
            for k in m.keys() {
                if !TOP_LEVEL_KEYS.contains(&k.as_str()) {
                    errors.push(format!("{k}: unknown key"));
                }
            }
            Some(())
        }
        _ => {
            errors.push("configuration root must be a JSON object".into());
            None
        }
    }
}

fn into_result<T>(value: T, errors: Vec<String>) -> Result<T> {
    if errors.is_empty() {
        Ok(value)
    } else {
        Err(Error::Config(errors))
    }
}

/// Parses and validates the scenario part of a configuration document.
pub fn parse_scenario(root: &Value) -> Result<PhysicalScenario> {
    let mut errors = Vec::new();
    check_top_level(root, &mut errors);
    let get = |k: &str| root.get(k);

    let mut top = Reader::new("", Some(root).filter(|r| r.is_object()), &mut errors);
    let gravity = top.opt_f64("gravity_m_per_s2", &mut errors);
    let superposition_size = top.opt_f64("superposition_size_m", &mut errors);

    let mut r = Reader::new("atom", get("atom"), &mut errors);
    let atom_mass = r.req_f64("mass_kg", &mut errors);
    let wl = r.opt_f64("transition_wavelength_m", &mut errors);
    let wf = r.opt_freq("transition_frequency", &mut errors);
    let transition_freq = match (wl, wf) {
        (Some(_), Some(_)) => {
            errors.push("atom: give either transition_wavelength_m or transition_frequency, not both".into());
            f64::NAN
        }
        (Some(l), None) => TAU * PhysicalConstants::SI.c / l,
        (None, Some(w)) => w,
        (None, None) => {
            errors.push("atom.transition_wavelength_m (or transition_frequency_rad_per_s): missing required key".into());
            f64::NAN
        }
    };
    let linewidth = r.req_freq("linewidth", &mut errors);
    let dipole_moment = r.req_f64("dipole_moment_C_m", &mut errors);
    r.finish(&mut errors);

    let mut r = Reader::new("nanoparticle", get("nanoparticle"), &mut errors);
    let radius = r.req_f64("radius_m", &mut errors);
    let np_mass = r.req_f64("mass_kg", &mut errors);
    r.finish(&mut errors);

    let mut r = Reader::new("trap", get("trap"), &mut errors);
    let stiff_freq = r.req_freq("paul_stiff", &mut errors);
    let soft_freq = r.req_freq("paul_soft", &mut errors);
    let wavelength = r.req_f64("wavelength_m", &mut errors);
    let intensity = r.req_f64("intensity_W_per_m2", &mut errors);
    let detuning = r.req_freq("detuning", &mut errors);
    let width = r.opt_f64("width_m", &mut errors);
    let raman_detuning = r.req_freq("raman_detuning", &mut errors);
    let kvec = r.opt_f64("raman_wavevector_rad_per_m", &mut errors);
    let kwl = r.opt_f64("raman_wavelength_m", &mut errors);
    let raman_wavevector = match (kvec, kwl) {
        (Some(_), Some(_)) => {
            errors.push("trap: give either raman_wavevector_rad_per_m or raman_wavelength_m, not both".into());
            f64::NAN
        }
        (Some(k), None) => k,
        (None, Some(l)) => TAU / l,
        (None, None) => {
            errors.push("trap.raman_wavelength_m (or raman_wavevector_rad_per_m): missing required key".into());
            f64::NAN
        }
    };
    let separation = r.req_f64("separation_m", &mut errors);
    let radiation_force = r.req_f64("radiation_force_N", &mut errors);
    r.finish(&mut errors);

    let mut r = Reader::new("beam", get("beam"), &mut errors);
    let beam_intensity = r.req_f64("intensity_W_per_m2", &mut errors);
    let pulse_duration = r.req_f64("pulse_duration_s", &mut errors);
    let laser_phase = r.opt_f64("laser_phase_rad", &mut errors).unwrap_or(0.0);
    r.finish(&mut errors);

    let mut r = Reader::new("timing", get("timing"), &mut errors);
    let free_fall = r.req_f64("free_fall_s", &mut errors);
    let hold = r.opt_f64("hold_s", &mut errors).unwrap_or(0.0);
    r.finish(&mut errors);

    for s in SCENARIO_SECTIONS {
        if get(s).is_none() {
            errors.push(format!("{s}: missing required section"));
        }
    }

    let constants = match gravity {
        Some(g) => PhysicalConstants::SI.with_gravity(g),
        None => PhysicalConstants::SI,
    };
    let scenario = PhysicalScenario {
        constants,
        atom: AtomSpec { mass: atom_mass, transition_freq, linewidth, dipole_moment },
        nanoparticle: NanoparticleSpec { radius, mass: np_mass },
        trap: TrapConfig {
            stiff_freq,
            soft_freq,
            wavelength,
            intensity,
            detuning,
            width,
            raman_detuning,
            raman_wavevector,
            separation,
            radiation_force,
        },
        beam: BeamConfig { intensity: beam_intensity, pulse_duration, laser_phase },
        timing: Timing { free_fall, hold },
        superposition_size,
    };
    errors.sort();
    errors.dedup();
    let scenario = into_result(scenario, errors)?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn parse_scenario_str(text: &str) -> Result<PhysicalScenario> {
    parse_scenario(&serde_json::from_str(text)?)
}

/// Scenario of the shipped `discussion.json` preset.
pub fn discussion_scenario() -> PhysicalScenario {
    parse_scenario_str(DISCUSSION_PRESET).expect("shipped preset is valid")
}

/// Options for the `protocol` section. Absent section means defaults.
pub fn parse_protocol(root: &Value) -> Result<ProtocolOptions> {
    let mut errors = Vec::new();
    let mut opts = ProtocolOptions::default();
    let mut r = Reader::new("protocol", root.get("protocol"), &mut errors);
    if let Some(seed) = r.opt_u64("seed", &mut errors) {
        opts.seed = seed;
    }
    if let Some(b) = r.opt_bool("exact_phase", &mut errors) {
        opts.exact_phase = b;
    }
    if let Some(b) = r.opt_bool("cubic_correction", &mut errors) {
        opts.cubic_correction = b;
    }
    if let Some(b) = r.opt_bool("force", &mut errors) {
        opts.force = b;
    }
    opts.beta_override = r.opt_f64("beta", &mut errors);
    if let Some(level) = r.opt_str("target_level", &mut errors) {
        match level {
            "down" => opts.target = HyperfineLevel::Down,
            "up" => opts.target = HyperfineLevel::Up,
            other => errors.push(format!("protocol.target_level: expected \"down\" or \"up\", got {other:?}")),
        }
    }
    let initial = r.raw("initial");
    r.finish(&mut errors);
    if let Some(init) = initial {
        let mut ri = Reader::new("protocol.initial", Some(init), &mut errors);
        let coherent = ri.raw("coherent");
        let thermal = ri.raw("thermal");
        ri.finish(&mut errors);
        match (coherent, thermal) {
            (Some(c), None) => {
                let mut rc = Reader::new("protocol.initial.coherent", Some(c), &mut errors);
                let re = rc.opt_f64("re", &mut errors).unwrap_or(0.0);
                let im = rc.opt_f64("im", &mut errors).unwrap_or(0.0);
                rc.finish(&mut errors);
                opts.initial = InitialState::Coherent(C64::new(re, im));
            }
            (None, Some(t)) => {
                let mut rt = Reader::new("protocol.initial.thermal", Some(t), &mut errors);
                let n = rt.req_f64("mean_occupation", &mut errors);
                let count = rt.opt_u64("samples", &mut errors).unwrap_or(200) as usize;
                rt.finish(&mut errors);
                opts.initial = InitialState::Thermal { mean_occupation: n, seed: opts.seed, count };
            }
            _ => errors.push("protocol.initial: expected exactly one of `coherent` or `thermal`".into()),
        }
    }
    into_result(opts, errors)
}

/// Settings for the transient phase-difference curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientConfig {
    pub mass: f64,
    /// rad/s
    pub omega: f64,
    pub g_e: f64,
    pub superposition_size: f64,
    /// Frame-2 initial position; defaults to g_E/ω².
    pub x2_initial: f64,
    pub p2_initial: f64,
    pub points: usize,
}

pub fn parse_transient(root: &Value) -> Result<TransientConfig> {
    let mut errors = Vec::new();
    let section = root.get("transient");
    if section.is_none() {
        errors.push("transient: missing required section".into());
    }
    let mut r = Reader::new("transient", section, &mut errors);
    let mass = r.req_f64("mass_kg", &mut errors);
    let omega = r.req_freq("omega", &mut errors);
    let g_e = r.opt_f64("gravity_m_per_s2", &mut errors).unwrap_or(PhysicalConstants::SI.g_e);
    let superposition_size = r.req_f64("superposition_size_m", &mut errors);
    let x2 = r.opt_f64("x2_initial_m", &mut errors);
    let p2_initial = r.opt_f64("p2_initial_kgms", &mut errors).unwrap_or(0.0);
    let points = r.opt_u64("points", &mut errors).unwrap_or(1001) as usize;
    r.finish(&mut errors);
    if errors.is_empty() {
        if !(mass > 0.0) {
            errors.push("transient.mass_kg: must be > 0".into());
        }
        if !(omega > 0.0) {
            errors.push("transient.omega: must be > 0".into());
        }
        if points < 2 {
            errors.push("transient.points: need at least 2".into());
        }
    }
    let cfg = TransientConfig {
        mass,
        omega,
        g_e,
        superposition_size,
        x2_initial: x2.unwrap_or(g_e / (omega * omega)),
        p2_initial,
        points,
    };
    into_result(cfg, errors)
}

/// One scan axis for the `sweep` command.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Dotted key path into the configuration, e.g. `trap.paul_soft_rad_per_s`.
    pub parameter: String,
    pub values: Vec<f64>,
}

pub fn parse_sweep(root: &Value) -> Result<SweepConfig> {
    let mut errors = Vec::new();
    let section = root.get("sweep");
    if section.is_none() {
        errors.push("sweep: missing required section".into());
    }
    let mut r = Reader::new("sweep", section, &mut errors);
    let parameter = r.opt_str("parameter", &mut errors).unwrap_or_default().to_string();
    let explicit = r.raw("values");
    let from = r.opt_f64("from", &mut errors);
    let to = r.opt_f64("to", &mut errors);
    let steps = r.opt_u64("steps", &mut errors);
    let log = r.opt_bool("log", &mut errors).unwrap_or(false);
    r.finish(&mut errors);
    if section.is_some() && parameter.is_empty() {
        errors.push("sweep.parameter: missing required key".into());
    }
    let values = match (explicit, from, to, steps) {
        (Some(Value::Array(a)), None, None, None) => a
            .iter()
            .enumerate()
            .filter_map(|(i, v)| {
                let x = v.as_f64();
                if x.is_none() {
                    errors.push(format!("sweep.values[{i}]: expected a number"));
                }
                x
            })
            .collect(),
        (None, Some(a), Some(b), Some(n)) if n >= 1 => linspace(a, b, n as usize, log),
        _ if section.is_some() => {
            errors.push("sweep: give either `values` or all of `from`, `to`, `steps`".into());
            Vec::new()
        }
        _ => Vec::new(),
    };
    into_result(SweepConfig { parameter, values }, errors)
}

fn linspace(a: f64, b: f64, n: usize, log: bool) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            if log {
                (a.ln() + f * (b.ln() - a.ln())).exp()
            } else {
                a + f * (b - a)
            }
        })
        .collect()
}

/// Sets the value at a dotted key path, creating intermediate objects.
pub fn set_path(root: &mut Value, path: &str, value: Value) -> Result<()> {
    let mut cur = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Config(vec![format!("{path}: `{part}` is not inside an object")]))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    Ok(())
}

/// Applies a `key=value` override; the value is parsed as JSON, falling back
/// to a plain string.
pub fn apply_override(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(vec![format!("override `{assignment}`: expected KEY=VALUE")]))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    set_path(root, key.trim(), value)
}
