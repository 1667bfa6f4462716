//! Presets and flat `key=value` configuration.
//!
//! Resolution order: preset defaults, then the config file, then flags.
//! Keys are kebab-case; underscores are accepted and normalised.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use twoslit::observables::SinglePacketSource;
use twoslit::{BathModel, ConfigError, GammaConvention, Grid1D, SpatialOrder, SuperpositionParams};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2a,
    Fig2b,
    Fig3,
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Fig1,
        Preset::Fig2a,
        Preset::Fig2b,
        Preset::Fig3,
        Preset::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig3 => "fig3",
            Preset::Custom => "custom",
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                format!("unknown preset '{s}' (expected fig1, fig2a, fig2b, fig3 or custom)")
            })
    }
}

/// Which environment drives the dynamical run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BathSpec {
    None,
    Ohmic {
        gamma0: f64,
        kbt: f64,
    },
    Scattering {
        lambda: f64,
    },
    Constant {
        gamma: f64,
        diffusion: f64,
        anomalous: f64,
    },
}

impl BathSpec {
    pub fn model(&self, mass: f64) -> Result<BathModel, ConfigError> {
        match *self {
            BathSpec::None => Ok(BathModel::isolated()),
            BathSpec::Ohmic { gamma0, kbt } => BathModel::ohmic_high_temperature(gamma0, mass, kbt),
            BathSpec::Scattering { lambda } => BathModel::scattering_model(lambda),
            BathSpec::Constant {
                gamma,
                diffusion,
                anomalous,
            } => {
                if !(diffusion >= 0.0) {
                    return Err(ConfigError::InvalidParameter {
                        name: "diffusion",
                        value: diffusion,
                    });
                }
                Ok(BathModel::constant(gamma, diffusion, anomalous, "constant"))
            }
        }
    }

    fn name(&self) -> &'static str {
        match self {
            BathSpec::None => "none",
            BathSpec::Ohmic { .. } => "ohmic",
            BathSpec::Scattering { .. } => "scattering",
            BathSpec::Constant { .. } => "constant",
        }
    }
}

/// Data products a run can emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Observable {
    Pattern,
    Wigner,
    Visibility,
    Incoherence,
    Screen,
}

impl Observable {
    const ALL: [Observable; 5] = [
        Observable::Pattern,
        Observable::Wigner,
        Observable::Visibility,
        Observable::Incoherence,
        Observable::Screen,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Pattern => "pattern",
            Observable::Wigner => "wigner",
            Observable::Visibility => "visibility",
            Observable::Incoherence => "incoherence",
            Observable::Screen => "screen",
        }
    }

    /// Whether this product needs the master-equation run.
    pub fn needs_evolution(self) -> bool {
        matches!(
            self,
            Observable::Pattern | Observable::Wigner | Observable::Visibility
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub preset: Preset,
    pub superposition: SuperpositionParams,
    pub bath: BathSpec,
    /// Incoherence couplings; one ν_C series per entry.
    pub incoherence_c: Vec<f64>,
    pub species: String,
    pub grid_points: usize,
    pub grid_extent: f64,
    /// `None` picks `stability_margin` times the stability bound.
    pub dt: Option<f64>,
    pub stability_margin: f64,
    pub spatial_order: SpatialOrder,
    pub kinetic: bool,
    pub anomalous_term: bool,
    pub t_final: f64,
    /// Steps between rows of the pattern-evolution output.
    pub snapshot_stride: usize,
    pub gamma_convention: GammaConvention,
    pub eval_point: f64,
    /// Separation used for t_D; `None` means L₀.
    pub td_dx: Option<f64>,
    /// Separation used in Γ for the decohered screen pattern; `None` means 2L₀.
    pub pattern_dx: Option<f64>,
    pub single_packets: SinglePacketSource,
    pub screen_time: f64,
    pub screen_points: usize,
    pub screen_extent: f64,
    pub wigner_p_points: usize,
    /// `None` uses the largest momentum the grid resolves.
    pub wigner_p_max: Option<f64>,
    pub incoherence_samples: usize,
    pub observables: Vec<Observable>,
    pub out: PathBuf,
}

/// Every recognised key with a one-line description, in canonical order.
pub const KEYS: &[(&str, &str)] = &[
    (
        "preset",
        "named parameter set: fig1, fig2a, fig2b, fig3, custom",
    ),
    ("out", "output directory"),
    (
        "observables",
        "comma list of pattern, wigner, visibility, incoherence, screen",
    ),
    ("l0", "half-separation of the slit centres"),
    ("sigma-x0", "initial packet width across the slits"),
    ("sigma-y0", "initial packet width along the beam"),
    ("k-y", "beam momentum (hbar = 1)"),
    ("mass", "particle mass"),
    (
        "bath",
        "environment model: none, ohmic, scattering, constant",
    ),
    ("gamma0", "ohmic damping rate"),
    ("kbt", "ohmic bath temperature (energy units)"),
    ("lambda", "scattering-model localisation rate"),
    ("gamma", "constant bath: dissipation rate"),
    ("diffusion", "constant bath: diffusion coefficient"),
    (
        "anomalous",
        "constant bath: anomalous-diffusion coefficient",
    ),
    ("c", "comma list of incoherence couplings C"),
    ("species", "label for the incoherence couplings"),
    ("grid-points", "number of grid points"),
    ("grid-extent", "grid covers [-extent, extent]"),
    ("dt", "time step, or 'auto'"),
    (
        "stability-margin",
        "fraction of the stability bound allowed for dt",
    ),
    ("spatial-order", "finite-difference order: 2 or 4"),
    ("kinetic", "include the kinetic term: true or false"),
    (
        "anomalous-term",
        "include the anomalous-diffusion term: true or false",
    ),
    ("t-final", "evolution time"),
    ("snapshot-stride", "steps between pattern-evolution rows"),
    (
        "gamma-convention",
        "decoherence-factor exponent: master-eq or paper-text",
    ),
    (
        "eval-point",
        "screen coordinate where visibility is evaluated",
    ),
    (
        "td-dx",
        "separation for the decoherence-time estimate, or 'auto' (l0)",
    ),
    (
        "pattern-dx",
        "separation in the decohered screen pattern, or 'auto' (2 l0)",
    ),
    (
        "single-packets",
        "single-packet diagonals for visibility: evolved or closed-form",
    ),
    (
        "screen-time",
        "time at which the screen pattern is evaluated",
    ),
    ("screen-points", "number of screen samples"),
    ("screen-extent", "screen covers [-extent, extent]"),
    ("wigner-p-points", "momentum samples of the Wigner function"),
    (
        "wigner-p-max",
        "momentum range of the Wigner function, or 'auto'",
    ),
    (
        "incoherence-samples",
        "time samples of each incoherence visibility series",
    ),
];

fn canonical_key(key: &str) -> String {
    key.trim().replace('_', "-")
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.trim().parse().map_err(|_| CliError::Parse {
        key: key.to_string(),
        value: value.to_string(),
        reason: "not a number".into(),
    })
}

fn parse_auto(key: &str, value: &str) -> Result<Option<f64>, CliError> {
    if value.trim() == "auto" {
        Ok(None)
    } else {
        parse_num(key, value).map(Some)
    }
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(CliError::Parse {
            key: key.to_string(),
            value: value.to_string(),
            reason: "expected true or false".into(),
        }),
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn fmt_auto(v: Option<f64>) -> String {
    v.map_or_else(|| "auto".to_string(), |v| v.to_string())
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl SimulationConfig {
    /// Fully populated defaults for `preset`.
    pub fn preset(preset: Preset) -> Self {
        let base = SimulationConfig {
            preset,
            superposition: SuperpositionParams {
                l0: 2.0,
                sigma_x0: 0.5,
                sigma_y0: 10.0,
                k_y: 50.0,
                mass: 1.0,
            },
            bath: BathSpec::Ohmic {
                gamma0: 0.001,
                kbt: 300.0,
            },
            incoherence_c: vec![1.0],
            species: "C70".into(),
            grid_points: 512,
            grid_extent: 20.0,
            dt: None,
            stability_margin: 0.5,
            spatial_order: SpatialOrder::Fourth,
            kinetic: true,
            anomalous_term: true,
            t_final: 2.0,
            snapshot_stride: 20,
            gamma_convention: GammaConvention::default(),
            eval_point: 0.0,
            td_dx: None,
            pattern_dx: None,
            single_packets: SinglePacketSource::Evolved,
            screen_time: 2.0,
            screen_points: 2001,
            screen_extent: 12.0,
            wigner_p_points: 257,
            wigner_p_max: None,
            incoherence_samples: 201,
            observables: vec![Observable::Pattern, Observable::Wigner],
            out: PathBuf::from(format!("out/{}", preset.name())),
        };
        match preset {
            Preset::Fig1 => base,
            Preset::Fig2a => SimulationConfig {
                observables: vec![Observable::Visibility],
                ..base
            },
            Preset::Fig2b => SimulationConfig {
                incoherence_c: vec![0.1, 1.0, 2.0],
                species: "neutron C=0.1, fullerene C=1, 2".into(),
                observables: vec![Observable::Incoherence],
                ..base
            },
            // Fit inputs: the fig1 packet geometry observed at t = 2, where
            // the closed-system fringe spacing is π on the default screen.
            Preset::Fig3 => SimulationConfig {
                observables: vec![Observable::Screen],
                ..base
            },
            Preset::Custom => SimulationConfig {
                observables: vec![
                    Observable::Pattern,
                    Observable::Wigner,
                    Observable::Visibility,
                ],
                ..base
            },
        }
    }

    /// Sets one key. Unknown keys are rejected.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let key = canonical_key(key);
        let k = key.as_str();
        let v = value.trim();
        let bad = |reason: &str| CliError::Parse {
            key: k.to_string(),
            value: v.to_string(),
            reason: reason.into(),
        };
        match k {
            "preset" => self.preset = v.parse().map_err(|e: String| bad(&e))?,
            "out" => self.out = PathBuf::from(v),
            "observables" => {
                let mut list = Vec::new();
                for name in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let o = Observable::ALL
                        .into_iter()
                        .find(|o| o.name() == name)
                        .ok_or_else(|| bad("unknown observable"))?;
                    if !list.contains(&o) {
                        list.push(o);
                    }
                }
                list.sort();
                self.observables = list;
            }
            "l0" => self.superposition.l0 = parse_num(k, v)?,
            "sigma-x0" => self.superposition.sigma_x0 = parse_num(k, v)?,
            "sigma-y0" => self.superposition.sigma_y0 = parse_num(k, v)?,
            "k-y" => self.superposition.k_y = parse_num(k, v)?,
            "mass" => self.superposition.mass = parse_num(k, v)?,
            "bath" => {
                self.bath = match v {
                    "none" => BathSpec::None,
                    "ohmic" => BathSpec::Ohmic {
                        gamma0: 0.001,
                        kbt: 300.0,
                    },
                    "scattering" => BathSpec::Scattering { lambda: 0.0 },
                    "constant" => BathSpec::Constant {
                        gamma: 0.0,
                        diffusion: 0.0,
                        anomalous: 0.0,
                    },
                    _ => return Err(bad("expected none, ohmic, scattering or constant")),
                }
            }
            "gamma0" | "kbt" => {
                let x = parse_num(k, v)?;
                match &mut self.bath {
                    BathSpec::Ohmic { gamma0, kbt } => {
                        *(if k == "gamma0" { gamma0 } else { kbt }) = x
                    }
                    _ => return Err(bad("only valid with bath=ohmic")),
                }
            }
            "lambda" => {
                let x = parse_num(k, v)?;
                match &mut self.bath {
                    BathSpec::Scattering { lambda } => *lambda = x,
                    _ => return Err(bad("only valid with bath=scattering")),
                }
            }
            "gamma" | "diffusion" | "anomalous" => {
                let x = parse_num(k, v)?;
                match &mut self.bath {
                    BathSpec::Constant {
                        gamma,
                        diffusion,
                        anomalous,
                    } => {
                        *match k {
                            "gamma" => gamma,
                            "diffusion" => diffusion,
                            _ => anomalous,
                        } = x
                    }
                    _ => return Err(bad("only valid with bath=constant")),
                }
            }
            "c" => self.incoherence_c = parse_list(k, v)?,
            "species" => self.species = v.to_string(),
            "grid-points" => self.grid_points = parse_num(k, v)?,
            "grid-extent" => self.grid_extent = parse_num(k, v)?,
            "dt" => self.dt = parse_auto(k, v)?,
            "stability-margin" => self.stability_margin = parse_num(k, v)?,
            "spatial-order" => {
                self.spatial_order = SpatialOrder::from_int(parse_num(k, v)?)
                    .ok_or_else(|| bad("expected 2 or 4"))?
            }
            "kinetic" => self.kinetic = parse_bool(k, v)?,
            "anomalous-term" => self.anomalous_term = parse_bool(k, v)?,
            "t-final" => self.t_final = parse_num(k, v)?,
            "snapshot-stride" => self.snapshot_stride = parse_num(k, v)?,
            "gamma-convention" => {
                self.gamma_convention = GammaConvention::parse(v)
                    .ok_or_else(|| bad("expected master-eq or paper-text"))?
            }
            "eval-point" => self.eval_point = parse_num(k, v)?,
            "td-dx" => self.td_dx = parse_auto(k, v)?,
            "pattern-dx" => self.pattern_dx = parse_auto(k, v)?,
            "single-packets" => {
                self.single_packets = match v {
                    "evolved" => SinglePacketSource::Evolved,
                    "closed-form" => SinglePacketSource::ClosedForm,
                    _ => return Err(bad("expected evolved or closed-form")),
                }
            }
            "screen-time" => self.screen_time = parse_num(k, v)?,
            "screen-points" => self.screen_points = parse_num(k, v)?,
            "screen-extent" => self.screen_extent = parse_num(k, v)?,
            "wigner-p-points" => self.wigner_p_points = parse_num(k, v)?,
            "wigner-p-max" => self.wigner_p_max = parse_auto(k, v)?,
            "incoherence-samples" => self.incoherence_samples = parse_num(k, v)?,
            _ => return Err(bad("unknown key")),
        }
        Ok(())
    }

    /// Builds a config from a preset name plus ordered overrides. A `preset`
    /// entry among the overrides selects the starting point and is applied
    /// first; the last one wins.
    pub fn resolve<'a>(
        default: Preset,
        layers: impl IntoIterator<Item = &'a [(String, String)]>,
    ) -> Result<Self, CliError> {
        let layers: Vec<&[(String, String)]> = layers.into_iter().collect();
        let mut preset = default;
        for (k, v) in layers.iter().flat_map(|l| l.iter()) {
            if canonical_key(k) == "preset" {
                preset = v.trim().parse().map_err(|e: String| CliError::Parse {
                    key: "preset".into(),
                    value: v.clone(),
                    reason: e,
                })?;
            }
        }
        let mut cfg = Self::preset(preset);
        for (k, v) in layers.iter().flat_map(|l| l.iter()) {
            if canonical_key(k) != "preset" {
                cfg.apply(k, v)?;
            }
        }
        Ok(cfg)
    }

    /// Canonical `key=value` pairs; feeding them back through `apply`
    /// reproduces the config.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let p = &self.superposition;
        let mut out = vec![
            ("preset", self.preset.name().to_string()),
            ("out", self.out.display().to_string()),
            (
                "observables",
                self.observables
                    .iter()
                    .map(|o| o.name())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("l0", p.l0.to_string()),
            ("sigma-x0", p.sigma_x0.to_string()),
            ("sigma-y0", p.sigma_y0.to_string()),
            ("k-y", p.k_y.to_string()),
            ("mass", p.mass.to_string()),
            ("bath", self.bath.name().to_string()),
        ];
        match self.bath {
            BathSpec::None => {}
            BathSpec::Ohmic { gamma0, kbt } => {
                out.push(("gamma0", gamma0.to_string()));
                out.push(("kbt", kbt.to_string()));
            }
            BathSpec::Scattering { lambda } => out.push(("lambda", lambda.to_string())),
            BathSpec::Constant {
                gamma,
                diffusion,
                anomalous,
            } => {
                out.push(("gamma", gamma.to_string()));
                out.push(("diffusion", diffusion.to_string()));
                out.push(("anomalous", anomalous.to_string()));
            }
        }
        out.extend([
            ("c", fmt_list(&self.incoherence_c)),
            ("species", self.species.clone()),
            ("grid-points", self.grid_points.to_string()),
            ("grid-extent", self.grid_extent.to_string()),
            ("dt", fmt_auto(self.dt)),
            ("stability-margin", self.stability_margin.to_string()),
            ("spatial-order", self.spatial_order.as_int().to_string()),
            ("kinetic", self.kinetic.to_string()),
            ("anomalous-term", self.anomalous_term.to_string()),
            ("t-final", self.t_final.to_string()),
            ("snapshot-stride", self.snapshot_stride.to_string()),
            ("gamma-convention", self.gamma_convention.name().to_string()),
            ("eval-point", self.eval_point.to_string()),
            ("td-dx", fmt_auto(self.td_dx)),
            ("pattern-dx", fmt_auto(self.pattern_dx)),
            (
                "single-packets",
                match self.single_packets {
                    SinglePacketSource::Evolved => "evolved",
                    SinglePacketSource::ClosedForm => "closed-form",
                }
                .to_string(),
            ),
            ("screen-time", self.screen_time.to_string()),
            ("screen-points", self.screen_points.to_string()),
            ("screen-extent", self.screen_extent.to_string()),
            ("wigner-p-points", self.wigner_p_points.to_string()),
            ("wigner-p-max", fmt_auto(self.wigner_p_max)),
            ("incoherence-samples", self.incoherence_samples.to_string()),
        ]);
        out
    }

    pub fn grid(&self) -> Result<Grid1D, ConfigError> {
        Grid1D::symmetric(self.grid_extent, self.grid_points)
    }

    pub fn bath_model(&self) -> Result<BathModel, ConfigError> {
        self.bath.model(self.superposition.mass)
    }

    pub fn td_separation(&self) -> f64 {
        self.td_dx.unwrap_or(self.superposition.l0)
    }

    pub fn pattern_separation(&self) -> f64 {
        self.pattern_dx
            .unwrap_or(self.superposition.slit_separation())
    }

    pub fn needs_evolution(&self) -> bool {
        self.observables.iter().any(|o| o.needs_evolution())
    }
}

impl fmt::Display for SimulationConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.to_pairs() {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Reads a flat `key=value` file. Blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut seen = BTreeMap::new();
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::Parse {
            key: format!("line {}", n + 1),
            value: line.to_string(),
            reason: "expected key=value".into(),
        })?;
        let k = canonical_key(k);
        if let Some(first) = seen.insert(k.clone(), n + 1) {
            return Err(CliError::Parse {
                key: k,
                value: v.trim().to_string(),
                reason: format!("duplicate key, first set on line {first}"),
            });
        }
        out.push((k, v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_config_text(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_round_trip_for_every_preset() {
        for preset in Preset::ALL {
            let cfg = SimulationConfig::preset(preset);
            let pairs: Vec<(String, String)> = cfg
                .to_pairs()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect();
            let back = SimulationConfig::resolve(Preset::Custom, [pairs.as_slice()]).unwrap();
            assert_eq!(back, cfg, "{}", preset.name());
        }
    }

    #[test]
    fn every_key_is_listed() {
        let names: Vec<&str> = KEYS.iter().map(|(k, _)| *k).collect();
        let mut cfg = SimulationConfig::preset(Preset::Custom);
        cfg.bath = BathSpec::Constant {
            gamma: 0.0,
            diffusion: 0.0,
            anomalous: 0.0,
        };
        for (k, _) in cfg.to_pairs() {
            assert!(names.contains(&k), "{k}");
        }
    }

    #[test]
    fn later_layers_win() {
        let file = parse_config_text("preset = fig2a\n# comment\nt_final=1.5\ndt=0.001\n").unwrap();
        let flags = vec![("t-final".to_string(), "0.5".to_string())];
        let cfg =
            SimulationConfig::resolve(Preset::Fig1, [file.as_slice(), flags.as_slice()]).unwrap();
        assert_eq!(cfg.preset, Preset::Fig2a);
        assert_eq!(cfg.t_final, 0.5);
        assert_eq!(cfg.dt, Some(0.001));
        assert_eq!(cfg.observables, vec![Observable::Visibility]);
    }

    #[test]
    fn bad_input_is_reported_with_its_key() {
        let mut cfg = SimulationConfig::preset(Preset::Fig1);
        for (k, v) in [
            ("grid-points", "many"),
            ("nope", "1"),
            ("lambda", "1"),
            ("spatial-order", "6"),
        ] {
            match cfg.apply(k, v) {
                Err(CliError::Parse { key, .. }) => assert_eq!(key, k),
                other => panic!("{k}: {other:?}"),
            }
        }
        assert!(parse_config_text("a=1\na=2").is_err());
        assert!(parse_config_text("just text").is_err());
    }

    #[test]
    fn bath_keys_follow_the_model() {
        let mut cfg = SimulationConfig::preset(Preset::Custom);
        cfg.apply("bath", "scattering").unwrap();
        cfg.apply("lambda", "0.25").unwrap();
        let bath = cfg.bath_model().unwrap();
        assert_eq!(bath.diffusion.constant_value(), Some(1.0));
        cfg.apply("bath", "ohmic").unwrap();
        cfg.apply("kbt", "600").unwrap();
        assert_eq!(
            cfg.bath_model().unwrap().diffusion.constant_value(),
            Some(1.2)
        );
    }
}
