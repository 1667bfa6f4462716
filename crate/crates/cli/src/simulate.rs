//! Validation and orchestration of the runs a config asks for.

use twoslit::analytic::{
    decohered_pattern, decoherence_time, free_packet, packet_overlap, packet_width,
    pattern_with_coherence,
};
use twoslit::dynamics::EvolveError;
use twoslit::incoherence::{incoherent_pattern, visibility_incoherence, J0_MAX_ARGUMENT};
use twoslit::lattice::make_superposition_state;
use twoslit::observables::{
    fringe_contrast, single_packet_diagonals, visibility_from_diagonals, wigner_momentum_limit,
    wigner_transform,
};
use twoslit::{
    evolve, BathModel, EvolutionRecord, Grid1D, IncoherenceParams, IntegratorConfig, RunAbort,
    VisibilitySeries, WignerGrid,
};

use crate::config::{Observable, SimulationConfig};
use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Integrator settings for `cfg`; `dt` defaults to the margin times the bound.
pub fn integrator(cfg: &SimulationConfig, grid: &Grid1D, bath: &BathModel) -> IntegratorConfig {
    let mut ic =
        IntegratorConfig::at_margin(grid, cfg.superposition.mass, bath, cfg.stability_margin);
    ic.spatial_order = cfg.spatial_order;
    ic.kinetic = cfg.kinetic;
    ic.anomalous = cfg.anomalous_term;
    ic.dt = cfg.dt.unwrap_or_else(|| {
        cfg.stability_margin * ic.stability_limit(grid, cfg.superposition.mass, bath)
    });
    ic
}

fn wigner_p_grid(cfg: &SimulationConfig, grid: &Grid1D) -> Result<Grid1D, twoslit::ConfigError> {
    let p_max = cfg
        .wigner_p_max
        .unwrap_or_else(|| wigner_momentum_limit(grid));
    Grid1D::symmetric(p_max, cfg.wigner_p_points)
}

/// Every violated invariant of `cfg`, without running anything.
pub fn validate(cfg: &SimulationConfig) -> ValidationReport {
    let mut r = ValidationReport::default();
    let p = &cfg.superposition;
    if cfg.observables.is_empty() {
        r.violations.push("no observables requested".into());
    }
    if let Err(e) = p.validate() {
        r.violations.push(format!("superposition: {e}"));
    }
    r.warnings.extend(p.warnings());
    if !(cfg.t_final > 0.0 && cfg.t_final.is_finite()) {
        r.violations
            .push(format!("t-final must be positive, got {}", cfg.t_final));
    }
    let bath = match cfg.bath_model() {
        Ok(b) => Some(b),
        Err(e) => {
            r.violations.push(format!("bath: {e}"));
            None
        }
    };
    let grid = match cfg.grid() {
        Ok(g) => Some(g),
        Err(e) => {
            r.violations.push(format!("grid: {e}"));
            None
        }
    };

    if cfg.needs_evolution() {
        if cfg.snapshot_stride == 0 {
            r.violations
                .push("snapshot-stride must be at least 1".into());
        }
        if let Some(g) = &grid {
            if p.validate().is_ok() {
                if let Err(e) = make_superposition_state(p, *g) {
                    r.violations.push(format!("grid coverage: {e}"));
                } else if cfg.t_final.is_finite() && cfg.t_final > 0.0 {
                    let reach = p.l0 + 6.0 * packet_width(p, cfg.t_final);
                    if reach > g.x_max() {
                        r.warnings.push(format!(
                            "free packets reach |x| = {reach:.3} by t = {}, beyond the grid edge {}",
                            cfg.t_final,
                            g.x_max()
                        ));
                    }
                }
            }
            if let Some(b) = &bath {
                let ic = integrator(cfg, g, b);
                if let Err(e) = ic.check(g, p.mass, b) {
                    r.violations.push(format!("stability: {e}"));
                }
            }
            if cfg.observables.contains(&Observable::Wigner) {
                match wigner_p_grid(cfg, g) {
                    Ok(pg) => {
                        let limit = wigner_momentum_limit(g);
                        if pg.x_max() > limit * (1.0 + 1e-12) {
                            r.violations.push(format!(
                                "wigner: p range {} exceeds the resolvable limit {limit}",
                                pg.x_max()
                            ));
                        }
                    }
                    Err(e) => r.violations.push(format!("wigner momentum grid: {e}")),
                }
            }
            if cfg.observables.contains(&Observable::Visibility)
                && g.locate(cfg.eval_point).is_none()
            {
                r.violations.push(format!(
                    "eval-point {} lies outside the grid",
                    cfg.eval_point
                ));
            }
        }
    }

    if cfg.observables.contains(&Observable::Incoherence)
        || cfg.observables.contains(&Observable::Screen)
    {
        if cfg.incoherence_c.is_empty() {
            r.violations
                .push("c: at least one coupling is required".into());
        }
        for &c in &cfg.incoherence_c {
            match IncoherenceParams::new(c, cfg.species.clone()) {
                Ok(ip) if c.abs() <= J0_MAX_ARGUMENT => r.warnings.extend(ip.warnings()),
                Ok(_) => r.violations.push(format!(
                    "c = {c} beyond the supported |C| <= {J0_MAX_ARGUMENT}"
                )),
                Err(e) => r.violations.push(format!("c: {e}")),
            }
        }
    }
    if cfg.observables.contains(&Observable::Incoherence) && cfg.incoherence_samples < 2 {
        r.violations
            .push("incoherence-samples must be at least 2".into());
    }
    if cfg.observables.contains(&Observable::Screen) {
        if cfg.screen_points < 3 {
            r.violations.push("screen-points must be at least 3".into());
        }
        if !(cfg.screen_time >= 0.0 && cfg.screen_extent > 0.0) {
            r.violations
                .push("screen-time must be non-negative and screen-extent positive".into());
        }
    }
    r
}

/// Visibility series plus the three diagonals it was built from, at the
/// evaluation point.
#[derive(Debug, Clone)]
pub struct VisibilityOutput {
    pub series: VisibilitySeries,
    pub full: Vec<f64>,
    pub rho11: Vec<f64>,
    pub rho22: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ScreenPattern {
    pub time: f64,
    pub x: Vec<f64>,
    pub isolated: Vec<f64>,
    pub decohered: Vec<f64>,
    pub incoherent: Vec<f64>,
    pub c: f64,
}

impl ScreenPattern {
    /// Central-fringe contrasts (isolated, decohered, incoherent).
    pub fn contrasts(&self) -> [Option<f64>; 3] {
        [&self.isolated, &self.decohered, &self.incoherent]
            .map(|v| fringe_contrast(&self.x, v, 0.0))
    }
}

#[derive(Debug)]
pub struct Outcome {
    pub config: SimulationConfig,
    pub warnings: Vec<String>,
    pub integrator: Option<IntegratorConfig>,
    pub record: Option<EvolutionRecord>,
    /// Set when the run stopped early; the record is then partial.
    pub abort: Option<RunAbort>,
    pub visibility: Option<VisibilityOutput>,
    pub wigner: Option<WignerGrid>,
    pub incoherence: Vec<(f64, VisibilitySeries)>,
    pub screen: Option<ScreenPattern>,
    pub decoherence_time: f64,
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Runs everything `cfg` asks for. Diagnostic aborts are returned inside
/// the outcome so partial data can still be written.
pub fn simulate(cfg: &SimulationConfig) -> Result<Outcome, CliError> {
    let report = validate(cfg);
    if !report.is_ok() {
        return Err(CliError::Invalid(report.violations));
    }
    let p = cfg.superposition;
    let bath = cfg.bath_model()?;
    let mut out = Outcome {
        config: cfg.clone(),
        warnings: report.warnings,
        integrator: None,
        record: None,
        abort: None,
        visibility: None,
        wigner: None,
        incoherence: Vec::new(),
        screen: None,
        decoherence_time: decoherence_time(&bath, cfg.td_separation(), cfg.gamma_convention)?,
    };

    if cfg.needs_evolution() {
        let grid = cfg.grid()?;
        let ic = integrator(cfg, &grid, &bath);
        out.integrator = Some(ic);
        let rho0 = make_superposition_state(&p, grid)?;
        match evolve(&rho0, p.mass, &bath, &ic, cfg.t_final, usize::MAX) {
            Ok(record) => out.record = Some(record),
            Err(EvolveError::Aborted { reason, partial }) => {
                out.abort = Some(reason);
                out.record = Some(*partial);
            }
            Err(EvolveError::Config(e)) => return Err(e.into()),
        }
        if out.abort.is_none() {
            let record = out.record.as_ref().expect("record present");
            if cfg.observables.contains(&Observable::Wigner) {
                out.wigner = Some(wigner_transform(
                    record.final_state(),
                    wigner_p_grid(cfg, &grid)?,
                )?);
            }
            if cfg.observables.contains(&Observable::Visibility) {
                match single_packet_diagonals(record, &p, &bath, &ic, cfg.single_packets) {
                    Ok(s) => {
                        let times = record.step_times();
                        let series = visibility_from_diagonals(
                            &grid,
                            &times,
                            &record.diagonals,
                            &s.rho11,
                            &s.rho22,
                            cfg.eval_point,
                        )?;
                        let at = |d: &Vec<Vec<f64>>| -> Vec<f64> {
                            d.iter()
                                .map(|v| {
                                    grid.interpolate(v, cfg.eval_point)
                                        .expect("eval point validated")
                                })
                                .collect()
                        };
                        out.visibility = Some(VisibilityOutput {
                            full: at(&record.diagonals),
                            rho11: at(&s.rho11),
                            rho22: at(&s.rho22),
                            series,
                        });
                    }
                    Err(EvolveError::Aborted { reason, .. }) => out.abort = Some(reason),
                    Err(EvolveError::Config(e)) => return Err(e.into()),
                }
            }
        }
    }

    if cfg.observables.contains(&Observable::Incoherence) {
        let times = linspace(0.0, cfg.t_final, cfg.incoherence_samples);
        let weight = 1.0 / (2.0 * (1.0 + packet_overlap(&p)));
        let diag = |center: f64| -> Vec<f64> {
            times
                .iter()
                .map(|&t| weight * free_packet(center, &p, cfg.eval_point, t).norm_sqr())
                .collect()
        };
        let (rho11, rho22) = (diag(p.l0), diag(-p.l0));
        for &c in &cfg.incoherence_c {
            let params = IncoherenceParams::new(c, cfg.species.clone())?;
            out.incoherence.push((
                c,
                visibility_incoherence(&params, &rho11, &rho22, &times, cfg.eval_point)?,
            ));
        }
    }

    if cfg.observables.contains(&Observable::Screen) {
        let c = cfg.incoherence_c[0];
        let params = IncoherenceParams::new(c, cfg.species.clone())?;
        let x = linspace(-cfg.screen_extent, cfg.screen_extent, cfg.screen_points);
        let t = cfg.screen_time;
        let dx = cfg.pattern_separation();
        let mut screen = ScreenPattern {
            time: t,
            isolated: Vec::with_capacity(x.len()),
            decohered: Vec::with_capacity(x.len()),
            incoherent: Vec::with_capacity(x.len()),
            x,
            c,
        };
        for &xi in &screen.x {
            screen
                .isolated
                .push(pattern_with_coherence(&p, 1.0, xi, 0.0, t));
            screen.decohered.push(decohered_pattern(
                &p,
                &bath,
                xi,
                0.0,
                t,
                dx,
                cfg.gamma_convention,
            ));
            screen
                .incoherent
                .push(incoherent_pattern(&p, &params, xi, 0.0, t)?);
        }
        out.screen = Some(screen);
    }
    Ok(out)
}
