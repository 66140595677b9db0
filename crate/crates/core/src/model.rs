//! Device and drive parameter records.
//!
//! Frequencies are stored as ordinary frequencies in Hz, exactly as they
//! appear in configuration files, and exposed in rad/s through accessor
//! methods. All downstream computation uses the angular values. Keeping the
//! Hz value as the stored field makes the config round trip bit-exact.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Cavity linewidths and resonance.
#[derive(Debug, Clone, PartialEq)]
pub struct CavityParams {
    pub omega_c_hz: f64,
    pub kappa_hz: f64,
    pub kappa_e_hz: f64,
}

impl CavityParams {
    pub fn new(omega_c_hz: f64, kappa_hz: f64, kappa_e_hz: f64) -> Result<Self> {
        let cavity = Self {
            omega_c_hz,
            kappa_hz,
            kappa_e_hz,
        };
        cavity.validate()?;
        Ok(cavity)
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega_c_hz.is_finite() && self.omega_c_hz > 0.0) {
            return Err(Error::config("cavity.omega_c_hz", "must be > 0"));
        }
        if !(self.kappa_hz.is_finite() && self.kappa_hz > 0.0) {
            return Err(Error::config("cavity.kappa_hz", "must be > 0"));
        }
        if !(self.kappa_e_hz.is_finite() && self.kappa_e_hz > 0.0) {
            return Err(Error::config("cavity.kappa_e_hz", "must be > 0"));
        }
        if self.kappa_e_hz > self.kappa_hz {
            return Err(Error::config(
                "cavity.kappa_e_hz",
                format!(
                    "external linewidth {} Hz exceeds total linewidth {} Hz",
                    self.kappa_e_hz, self.kappa_hz
                ),
            ));
        }
        Ok(())
    }

    pub fn omega_c(&self) -> f64 {
        TAU * self.omega_c_hz
    }

    pub fn kappa(&self) -> f64 {
        TAU * self.kappa_hz
    }

    pub fn kappa_e(&self) -> f64 {
        TAU * self.kappa_e_hz
    }

    /// Intrinsic loss rate κ − κ_e.
    pub fn kappa_i(&self) -> f64 {
        self.kappa() - self.kappa_e()
    }

    /// Coupling ratio κ_e/κ.
    pub fn eta_c(&self) -> f64 {
        self.kappa_e_hz / self.kappa_hz
    }
}

/// One mechanical oscillator coupled to the cavity.
///
/// `g_hz` is the authoritative single-photon coupling. `mass_kg` and
/// `x_zp_m` are informational and never enter a computation.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanicalMode {
    pub label: String,
    pub omega_hz: f64,
    pub gamma_hz: f64,
    pub g_hz: f64,
    pub mass_kg: Option<f64>,
    pub x_zp_m: Option<f64>,
}

impl MechanicalMode {
    pub fn new(label: impl Into<String>, omega_hz: f64, gamma_hz: f64, g_hz: f64) -> Self {
        Self {
            label: label.into(),
            omega_hz,
            gamma_hz,
            g_hz,
            mass_kg: None,
            x_zp_m: None,
        }
    }

    pub fn omega(&self) -> f64 {
        TAU * self.omega_hz
    }

    pub fn gamma(&self) -> f64 {
        TAU * self.gamma_hz
    }

    pub fn g(&self) -> f64 {
        TAU * self.g_hz
    }

    /// α = g²/ω².
    pub fn alpha(&self) -> f64 {
        let r = self.g_hz / self.omega_hz;
        r * r
    }
}

/// A cavity with N ≥ 1 mechanical modes.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceModel {
    pub cavity: CavityParams,
    pub modes: Vec<MechanicalMode>,
}

impl DeviceModel {
    pub fn new(cavity: CavityParams, modes: Vec<MechanicalMode>) -> Result<Self> {
        let model = Self { cavity, modes };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        self.cavity.validate()?;
        if self.modes.is_empty() {
            return Err(Error::config("mode", "N ≥ 1 required"));
        }
        for (i, mode) in self.modes.iter().enumerate() {
            let k = i + 1;
            if !(mode.omega_hz.is_finite() && mode.omega_hz > 0.0) {
                return Err(Error::config(format!("mode.{k}.omega_hz"), "must be > 0"));
            }
            if !(mode.gamma_hz.is_finite() && mode.gamma_hz > 0.0) {
                return Err(Error::config(format!("mode.{k}.gamma_hz"), "must be > 0"));
            }
            if !mode.g_hz.is_finite() {
                return Err(Error::config(format!("mode.{k}.g_hz"), "must be finite"));
            }
            if self.modes[..i].iter().any(|m| m.label == mode.label) {
                return Err(Error::config(
                    format!("mode.{k}.label"),
                    format!("duplicate mode label `{}`", mode.label),
                ));
            }
        }
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    /// Diagnostic: every mechanical frequency exceeds the cavity linewidth.
    pub fn resolved_sideband(&self) -> bool {
        self.modes.iter().all(|m| m.omega_hz > self.cavity.kappa_hz)
    }

    /// Static frequency pull per intracavity photon, S = Σ 2g²/ω (rad/s).
    pub fn shift_per_photon(&self) -> f64 {
        self.modes
            .iter()
            .map(|m| 2.0 * m.g() * m.g() / m.omega())
            .sum()
    }

    pub fn max_omega(&self) -> f64 {
        self.modes
            .iter()
            .map(MechanicalMode::omega)
            .fold(0.0, f64::max)
    }

    pub fn min_gamma(&self) -> f64 {
        self.modes
            .iter()
            .map(MechanicalMode::gamma)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Pump and probe settings.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveConfig {
    pub pump_power_w: f64,
    /// Δ_pu/2π = (ω_c − ω_pu)/2π.
    pub pump_detuning_hz: f64,
    /// Only the time-domain integrator uses this.
    pub probe_power_w: f64,
}

impl DriveConfig {
    pub fn new(pump_power_w: f64, pump_detuning_hz: f64) -> Self {
        Self {
            pump_power_w,
            pump_detuning_hz,
            probe_power_w: pump_power_w * 1e-6,
        }
    }

    pub fn validate(&self, cavity: &CavityParams) -> Result<()> {
        if !(self.pump_power_w.is_finite() && self.pump_power_w >= 0.0) {
            return Err(Error::config("drive.pump_power_w", "must be ≥ 0"));
        }
        if !self.pump_detuning_hz.is_finite() {
            return Err(Error::config("drive.pump_detuning_hz", "must be finite"));
        }
        if !(self.probe_power_w.is_finite() && self.probe_power_w >= 0.0) {
            return Err(Error::config("probe.power_w", "must be ≥ 0"));
        }
        if cavity.omega_c_hz - self.pump_detuning_hz <= 0.0 {
            return Err(Error::config(
                "drive.pump_detuning_hz",
                "pump frequency nonpositive",
            ));
        }
        Ok(())
    }

    pub fn pump_detuning(&self) -> f64 {
        TAU * self.pump_detuning_hz
    }

    /// ω_pu = ω_c − Δ_pu.
    pub fn pump_frequency(&self, cavity: &CavityParams) -> f64 {
        TAU * (cavity.omega_c_hz - self.pump_detuning_hz)
    }

    pub fn with_pump_power(&self, pump_power_w: f64) -> Self {
        Self {
            pump_power_w,
            ..self.clone()
        }
    }
}

fn field_amplitude(power_w: f64, frequency: f64) -> Result<f64> {
    if !(frequency > 0.0) {
        return Err(Error::PumpFrequencyNonpositive);
    }
    Ok((2.0 * power_w / (HBAR * frequency)).sqrt())
}

/// E_pu = √(2P_pu/ħω_pu) in √(photons/s).
pub fn pump_amplitude(drive: &DriveConfig, cavity: &CavityParams) -> Result<f64> {
    field_amplitude(drive.pump_power_w, drive.pump_frequency(cavity))
}

/// E_pr = √(2P_pr/ħω_pr) with ω_pr = ω_pu + Ω.
pub fn probe_amplitude(drive: &DriveConfig, cavity: &CavityParams, omega: f64) -> Result<f64> {
    field_amplitude(drive.probe_power_w, drive.pump_frequency(cavity) + omega)
}

/// Parameters of the reference two-mode device, pumped at the mean
/// mechanical frequency with 1 μW.
pub fn reference_device() -> (DeviceModel, DriveConfig) {
    let cavity = CavityParams {
        omega_c_hz: 6.986e9,
        kappa_hz: 6.2e6,
        kappa_e_hz: 4.8e6,
    };
    let modes = vec![
        MechanicalMode::new("mode1", 32.1e6, 930.0, 39.0),
        MechanicalMode::new("mode2", 32.5e6, 930.0, 44.0),
    ];
    let drive = DriveConfig::new(1e-6, 0.5 * (32.1e6 + 32.5e6));
    (DeviceModel { cavity, modes }, drive)
}

/// Down-scaled two-mode device for time-domain runs. Same structure as the
/// reference device with a mechanical-to-linewidth ratio small enough that
/// a fixed-step integration settles in well under a second of CPU time.
/// The pump power gives cooperativities close to 20.
pub fn scaled_test_device() -> (DeviceModel, DriveConfig) {
    let cavity = CavityParams {
        omega_c_hz: 5.0e9,
        kappa_hz: 1.0e3,
        kappa_e_hz: 0.8e3,
    };
    let modes = vec![
        MechanicalMode::new("mode1", 10.0e3, 10.0, 0.37),
        MechanicalMode::new("mode2", 10.3e3, 10.0, 0.37),
    ];
    let drive = DriveConfig::new(1e-12, 0.5 * (10.0e3 + 10.3e3));
    (DeviceModel { cavity, modes }, drive)
}

/// Single mode of the scaled device driven 3 kHz from the cavity, at the
/// power halfway between the two turning points of the photon-number
/// curve. The cubic has three real roots there.
pub fn bistable_device() -> (DeviceModel, DriveConfig) {
    let (mut model, _) = scaled_test_device();
    model.modes.truncate(1);
    let detuning_hz = 3.0e3;
    let s = model.shift_per_photon();
    let hk = 0.5 * model.cavity.kappa();
    let d = std::f64::consts::TAU * detuning_hz;
    let disc = (d * d - 3.0 * hk * hk).sqrt();
    let turning = [(2.0 * d - disc) / 3.0, (2.0 * d + disc) / 3.0];
    // n·S = x at the turning points; rhs is the matching κ_e E²/2
    let rhs = |x: f64| x / s * (hk * hk + (d - x) * (d - x));
    let target = 0.5 * (rhs(turning[0]) + rhs(turning[1]));
    let omega_pu = model.cavity.omega_c() - d;
    let e2 = 2.0 * target / model.cavity.kappa_e();
    let power = e2 * HBAR * omega_pu / 2.0;
    (model, DriveConfig::new(power, detuning_hz))
}

/// Flat `key = value` configuration, in file order, before validation.
///
/// Overrides are applied with [`ConfigDocument::set`] before
/// [`ConfigDocument::build`] validates the whole set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigDocument {
    entries: Vec<(String, String)>,
}

impl ConfigDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let mut doc = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(
                    line,
                    format!("line {}: expected `key = value`", lineno + 1),
                ));
            };
            let key = key.trim();
            if doc.get(key).is_some() {
                return Err(Error::config(key, "duplicate key"));
            }
            doc.entries
                .push((key.to_string(), value.trim().to_string()));
        }
        Ok(doc)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Insert or replace a value. Setting either pump detuning key removes
    /// the other one so an override always wins.
    pub fn set(&mut self, key: &str, value: &str) {
        let exclusive = match key {
            "drive.pump_detuning_hz" => Some("drive.pump_detuning"),
            "drive.pump_detuning" => Some("drive.pump_detuning_hz"),
            _ => None,
        };
        if let Some(other) = exclusive {
            self.entries.retain(|(k, _)| k != other);
        }
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value.to_string(),
            None => self.entries.push((key.to_string(), value.to_string())),
        }
    }

    /// Apply a `key=value` override string.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(Error::config(assignment, "override must be `key=value`"));
        };
        let key = key.trim();
        check_known_key(key)?;
        self.set(key, value.trim());
        Ok(())
    }

    pub fn build(&self) -> Result<(DeviceModel, DriveConfig)> {
        for (key, _) in &self.entries {
            check_known_key(key)?;
        }
        let number = |key: &str| -> Result<Option<f64>> {
            self.get(key).map(|v| parse_number(key, v)).transpose()
        };
        let required = |key: &str| -> Result<f64> {
            number(key)?.ok_or_else(|| Error::config(key, "missing required key"))
        };

        let cavity = CavityParams {
            omega_c_hz: required("cavity.omega_c_hz")?,
            kappa_hz: required("cavity.kappa_hz")?,
            kappa_e_hz: required("cavity.kappa_e_hz")?,
        };
        cavity.validate()?;

        let mut indices = BTreeMap::new();
        for (key, _) in &self.entries {
            if let Some(rest) = key.strip_prefix("mode.") {
                let (idx, _) = rest.split_once('.').unwrap_or((rest, ""));
                let k: usize =
                    idx.parse().ok().filter(|&k| k >= 1).ok_or_else(|| {
                        Error::config(key.as_str(), "mode index must be 1, 2, ...")
                    })?;
                indices.insert(k, ());
            }
        }
        if indices.is_empty() {
            return Err(Error::config("mode", "N ≥ 1 required"));
        }
        let n = indices.len();
        if let Some(missing) = (1..=n).find(|k| !indices.contains_key(k)) {
            return Err(Error::config(
                format!("mode.{missing}"),
                "mode indices must be contiguous from 1",
            ));
        }
        let mut modes = Vec::with_capacity(n);
        for k in 1..=n {
            let key = |field: &str| format!("mode.{k}.{field}");
            modes.push(MechanicalMode {
                label: self
                    .get(&key("label"))
                    .map(str::to_string)
                    .unwrap_or_else(|| format!("mode{k}")),
                omega_hz: required(&key("omega_hz"))?,
                gamma_hz: required(&key("gamma_hz"))?,
                g_hz: required(&key("g_hz"))?,
                mass_kg: number(&key("mass_kg"))?,
                x_zp_m: number(&key("x_zp_m"))?,
            });
        }
        let model = DeviceModel::new(cavity, modes)?;

        let pump_power_w = required("drive.pump_power_w")?;
        let pump_detuning_hz = match (
            number("drive.pump_detuning_hz")?,
            self.get("drive.pump_detuning"),
        ) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "drive.pump_detuning",
                    "give either drive.pump_detuning_hz or drive.pump_detuning, not both",
                ))
            }
            (Some(hz), None) => hz,
            (None, Some(symbol)) => resolve_detuning(symbol, &model)?,
            (None, None) => {
                return Err(Error::config(
                    "drive.pump_detuning_hz",
                    "missing required key",
                ))
            }
        };
        let probe_power_w = number("probe.power_w")?.unwrap_or(pump_power_w * 1e-6);
        let drive = DriveConfig {
            pump_power_w,
            pump_detuning_hz,
            probe_power_w,
        };
        drive.validate(&model.cavity)?;
        Ok((model, drive))
    }
}

fn check_known_key(key: &str) -> Result<()> {
    const TOP: [&str; 7] = [
        "cavity.omega_c_hz",
        "cavity.kappa_hz",
        "cavity.kappa_e_hz",
        "drive.pump_power_w",
        "drive.pump_detuning_hz",
        "drive.pump_detuning",
        "probe.power_w",
    ];
    const MODE_FIELDS: [&str; 6] = ["omega_hz", "gamma_hz", "g_hz", "label", "mass_kg", "x_zp_m"];
    if TOP.contains(&key) {
        return Ok(());
    }
    if let Some(rest) = key.strip_prefix("mode.") {
        if let Some((idx, field)) = rest.split_once('.') {
            if idx.parse::<usize>().is_ok() && MODE_FIELDS.contains(&field) {
                return Ok(());
            }
        }
    }
    Err(Error::config(key, "unknown key"))
}

fn parse_number(key: &str, value: &str) -> Result<f64> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::config(key, format!("non-numeric value `{value}`"))),
    }
}

fn resolve_detuning(symbol: &str, model: &DeviceModel) -> Result<f64> {
    if symbol == "mean" {
        let sum: f64 = model.modes.iter().map(|m| m.omega_hz).sum();
        return Ok(sum / model.n_modes() as f64);
    }
    symbol
        .strip_prefix("mode")
        .and_then(|k| k.parse::<usize>().ok())
        .and_then(|k| k.checked_sub(1))
        .and_then(|i| model.modes.get(i))
        .map(|m| m.omega_hz)
        .ok_or_else(|| {
            Error::config(
                "drive.pump_detuning",
                format!("expected `mean` or `mode<k>`, got `{symbol}`"),
            )
        })
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<(DeviceModel, DriveConfig)> {
    ConfigDocument::parse(text)?.build()
}

/// Serialize to the configuration format. Values use the shortest
/// representation that parses back to the same bits.
pub fn to_config_string(model: &DeviceModel, drive: &DriveConfig) -> String {
    let mut out = String::new();
    let c = &model.cavity;
    let _ = writeln!(out, "cavity.omega_c_hz = {:?}", c.omega_c_hz);
    let _ = writeln!(out, "cavity.kappa_hz = {:?}", c.kappa_hz);
    let _ = writeln!(out, "cavity.kappa_e_hz = {:?}", c.kappa_e_hz);
    for (i, m) in model.modes.iter().enumerate() {
        let k = i + 1;
        let _ = writeln!(out, "mode.{k}.label = {}", m.label);
        let _ = writeln!(out, "mode.{k}.omega_hz = {:?}", m.omega_hz);
        let _ = writeln!(out, "mode.{k}.gamma_hz = {:?}", m.gamma_hz);
        let _ = writeln!(out, "mode.{k}.g_hz = {:?}", m.g_hz);
        if let Some(mass) = m.mass_kg {
            let _ = writeln!(out, "mode.{k}.mass_kg = {mass:?}");
        }
        if let Some(xzp) = m.x_zp_m {
            let _ = writeln!(out, "mode.{k}.x_zp_m = {xzp:?}");
        }
    }
    let _ = writeln!(out, "drive.pump_power_w = {:?}", drive.pump_power_w);
    let _ = writeln!(out, "drive.pump_detuning_hz = {:?}", drive.pump_detuning_hz);
    let _ = writeln!(out, "probe.power_w = {:?}", drive.probe_power_w);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE_CFG: &str = "\
# reference device
cavity.omega_c_hz = 6.986e9
cavity.kappa_hz   = 6.2e6
cavity.kappa_e_hz = 4.8e6
mode.1.omega_hz = 32.1e6
mode.1.gamma_hz = 930
mode.1.g_hz     = 39
mode.2.omega_hz = 32.5e6
mode.2.gamma_hz = 930
mode.2.g_hz     = 44
drive.pump_power_w = 1e-6
drive.pump_detuning = mean
";

    #[test]
    fn parses_reference_file() {
        let (model, drive) = parse_config(REFERENCE_CFG).unwrap();
        assert_eq!(model.n_modes(), 2);
        assert_eq!(model.modes[0].omega(), TAU * 32.1e6);
        assert_eq!(model.modes[1].omega(), TAU * 32.5e6);
        assert_eq!(drive.pump_detuning_hz, 32.3e6);
        assert_eq!(drive.probe_power_w, 1e-12);
        assert_eq!((model, drive), reference_device());
    }

    #[test]
    fn empty_mode_list_rejected() {
        let text: String = REFERENCE_CFG
            .lines()
            .filter(|l| !l.starts_with("mode."))
            .map(|l| l.replace("mean", "0"))
            .collect::<Vec<_>>()
            .join("\n");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("N ≥ 1 required"), "{err}");
    }

    #[test]
    fn external_linewidth_above_total_names_key() {
        let text = REFERENCE_CFG.replace("cavity.kappa_e_hz = 4.8e6", "cavity.kappa_e_hz = 7.0e6");
        match parse_config(&text).unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "cavity.kappa_e_hz"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_and_malformed_keys_are_named() {
        let text = REFERENCE_CFG.replace("mode.2.g_hz     = 44\n", "");
        match parse_config(&text).unwrap_err() {
            Error::Config { key, message } => {
                assert_eq!(key, "mode.2.g_hz");
                assert!(message.contains("missing"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let text = REFERENCE_CFG.replace("= 930\nmode.1.g_hz", "= fast\nmode.1.g_hz");
        match parse_config(&text).unwrap_err() {
            Error::Config { key, message } => {
                assert_eq!(key, "mode.1.gamma_hz");
                assert!(message.contains("non-numeric"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("{REFERENCE_CFG}cavity.temperature_k = 0.02\n");
        match parse_config(&text).unwrap_err() {
            Error::Config { key, message } => {
                assert_eq!(key, "cavity.temperature_k");
                assert_eq!(message, "unknown key");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn detuning_symbols_resolve() {
        for (sym, hz) in [("mode1", 32.1e6), ("mode2", 32.5e6)] {
            let mut doc = ConfigDocument::parse(REFERENCE_CFG).unwrap();
            doc.apply_override(&format!("drive.pump_detuning={sym}"))
                .unwrap();
            assert_eq!(doc.build().unwrap().1.pump_detuning_hz, hz);
        }
        let mut doc = ConfigDocument::parse(REFERENCE_CFG).unwrap();
        doc.apply_override("drive.pump_detuning_hz=1e6").unwrap();
        assert_eq!(doc.build().unwrap().1.pump_detuning_hz, 1e6);
        assert!(doc.apply_override("drive.bogus=1").is_err());
    }

    #[test]
    fn defaults_match_reference_values() {
        let (model, drive) = reference_device();
        assert!((model.cavity.eta_c() - 4.8 / 6.2).abs() < 1e-15);
        assert!((model.cavity.eta_c() - 0.7742).abs() < 1e-4);
        assert!(model.resolved_sideband());
        assert!((drive.pump_detuning() - TAU * 32.3e6).abs() < 1e-6);
        assert_eq!(
            model.cavity.kappa_i(),
            model.cavity.kappa() - model.cavity.kappa_e()
        );
    }

    #[test]
    fn pump_amplitude_values() {
        let (model, drive) = reference_device();
        let zero = drive.with_pump_power(0.0);
        assert_eq!(pump_amplitude(&zero, &model.cavity).unwrap(), 0.0);

        // 2P/(ħω_pu) evaluated by hand: ω_pu = 2π·6.9537e9 = 4.36915e10 rad/s,
        // 2e-6 / (1.054571817e-34 · 4.36915e10) = 4.34065e17, sqrt = 6.5884e8.
        let e = pump_amplitude(&drive, &model.cavity).unwrap();
        assert!((e - 6.5884e8).abs() / 6.5884e8 < 1e-4, "{e}");

        let e4 = pump_amplitude(&drive.with_pump_power(4e-6), &model.cavity).unwrap();
        assert!((e4 / e - 2.0).abs() < 1e-14);

        let bad = DriveConfig::new(1e-6, 7e9);
        assert_eq!(
            pump_amplitude(&bad, &model.cavity),
            Err(Error::PumpFrequencyNonpositive)
        );
    }
}
