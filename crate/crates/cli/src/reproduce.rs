//! Canned runs behind `reproduce <target>`.
//!
//! Each target starts from a built-in configuration, which goes through the
//! text format so that `--set` overrides apply as they do for config files.
//! Loops over a target's own curve parameter (forces in fig1, trap
//! frequencies in fig2 and fig3) take precedence over overrides of that
//! parameter.

use std::f64::consts::PI;
use std::path::PathBuf;

use rabi_sense::dynamics::EvolveConfig;
use rabi_sense::metrology::RepetitionBudget;
use rabi_sense::presets;
use rabi_sense::units::{khz_to_rad_s, yn};
use rabi_sense::{HilbertSpec, SystemParams};

use crate::commands::{self, analytic_moments, par_map, Report};
use crate::config::{
    ExperimentConfig, ModelKind, ProtocolSettings, Scale, SteadyMethod, SteadySettings, SweepAxis,
    SweepVar,
};
use crate::error::{CliError, Result};
use crate::output::{Cell, PlotSpec, Table};

pub const TARGETS: [&str; 6] = ["fig1", "fig2", "fig3", "fig4", "fig5", "tab-sensitivities"];

fn plateau() -> SteadySettings {
    SteadySettings {
        method: SteadyMethod::Plateau,
        horizon: 10.0,
        eps: 1e-6,
    }
}

fn oscillator(params: SystemParams, fock_dim: usize, sweep: Option<SweepAxis>) -> ExperimentConfig {
    let t_final = 15.0 / params.gamma;
    ExperimentConfig {
        model: ModelKind::Rabi,
        params,
        protocol: None,
        hilbert: HilbertSpec::full(fock_dim),
        evolve: EvolveConfig::new(t_final, t_final / 60.0).with_tolerances(1e-7, 1e-9),
        steady: plateau(),
        qfi_epsilon: None,
        budget: RepetitionBudget::single_shot(),
        sweep,
        output: PathBuf::from("."),
    }
}

fn axis(variable: SweepVar, start: f64, stop: f64, points: usize, numeric: bool) -> Option<SweepAxis> {
    Some(SweepAxis {
        variable,
        start,
        stop,
        points,
        scale: Scale::Linear,
        numeric,
    })
}

/// Built-in configuration of `target`.
pub fn canned(target: &str) -> Result<ExperimentConfig> {
    let cfg = match target {
        "fig1" => oscillator(presets::fig1(presets::FIG1_FORCES_YN[0]), 40, None),
        "fig2" => oscillator(
            presets::fig2(presets::FIG2_OMEGAS_KHZ[1], 4.0),
            24,
            axis(SweepVar::G, khz_to_rad_s(0.5), khz_to_rad_s(4.5), 9, true),
        ),
        "fig3" => oscillator(
            presets::fig3(presets::FIG3_OMEGAS_KHZ[1], 0.0),
            24,
            axis(SweepVar::Force, 0.0, yn(10.0), 6, true),
        ),
        "fig4" => oscillator(
            presets::fig4(4.0),
            24,
            axis(SweepVar::G, khz_to_rad_s(0.5), khz_to_rad_s(5.0), 46, false),
        ),
        "tab-sensitivities" => oscillator(presets::sensitivity_point(), 24, None),
        "fig5" => {
            let p = presets::fig5(0.0);
            ExperimentConfig {
                model: ModelKind::Squeezed,
                params: p.base,
                protocol: Some(ProtocolSettings {
                    xi: p.xi,
                    phi: p.phi,
                    omega0: p.omega0,
                    kappa: p.kappa,
                    t_final: p.t_final,
                }),
                hilbert: HilbertSpec::full(80),
                evolve: EvolveConfig::new(p.t_final, p.t_final / 20.0),
                steady: plateau(),
                qfi_epsilon: None,
                budget: RepetitionBudget::single_shot(),
                sweep: axis(SweepVar::Xi, 0.0, khz_to_rad_s(presets::FIG5_XI_MAX_KHZ), 10, false),
                output: PathBuf::from("."),
            }
        }
        other => {
            return Err(CliError::Usage(format!(
                "unknown target `{other}`; choose one of {}",
                TARGETS.join(", ")
            )))
        }
    };
    Ok(cfg)
}

/// Canned configuration with overrides applied.
pub fn resolve(target: &str, overrides: &[String]) -> Result<ExperimentConfig> {
    ExperimentConfig::from_text(&canned(target)?.to_text(), overrides)
}

pub fn run(target: &str, cfg: &ExperimentConfig, jobs: usize) -> Result<Report> {
    let mut report = match target {
        "fig1" => fig1(cfg, jobs)?,
        "fig2" => fig2(cfg, jobs)?,
        "fig3" => fig3(cfg, jobs)?,
        "fig4" | "tab-sensitivities" => commands::sensitivity(cfg)?,
        "fig5" => commands::squeeze(cfg, jobs, false)?,
        other => return Err(CliError::Usage(format!("unknown target `{other}`"))),
    };
    report.stem = format!("reproduce-{target}");
    Ok(report)
}

fn hz(w: f64) -> f64 {
    w / (2.0 * PI)
}

fn fig1(cfg: &ExperimentConfig, jobs: usize) -> Result<Report> {
    let forces: Vec<f64> = presets::FIG1_FORCES_YN.iter().map(|&f| yn(f)).collect();
    let runs = par_map(jobs, &forces, |&f| {
        let p = cfg.params.with_force(f);
        let r = commands::run_oscillator(cfg, &p, &cfg.evolve)?;
        let closed = analytic_moments(&p)?.map(|m| m.x);
        Ok((r, closed))
    })?;
    let mut header = vec!["t_s".to_string()];
    let mut plot = PlotSpec::new("relaxation of <x>", "t_s", "t (s)", "<x>");
    for f in presets::FIG1_FORCES_YN {
        let col = format!("x_F{f}yN");
        plot = plot.series(&col, &format!("F = {f} yN"));
        header.push(col);
    }
    for f in presets::FIG1_FORCES_YN {
        let col = format!("x_closed_F{f}yN");
        plot = plot.series(&col, &format!("closed form, F = {f} yN"));
        header.push(col);
    }
    let mut table = Table::new(header);
    let times = &runs[0].0.times;
    for (i, &t) in times.iter().enumerate() {
        let mut row = vec![Cell::from(t)];
        row.extend(runs.iter().map(|(r, _)| Cell::from(r.series("x").map(|s| s[i]))));
        row.extend(runs.iter().map(|(_, c)| Cell::from(*c)));
        table.push(row);
    }
    for ((r, c), f) in runs.iter().zip(presets::FIG1_FORCES_YN) {
        let last = r.series("x").and_then(|s| s.last().copied()).unwrap_or(f64::NAN);
        println!("F = {f} yN: <x>(t_f) = {last:.4}, closed form {:.4}", c.unwrap_or(f64::NAN));
    }
    Ok(Report {
        stem: String::new(),
        table,
        plot: Some(plot),
    })
}

fn curve_sweep(cfg: &ExperimentConfig, omegas_khz: &[f64]) -> Result<(SweepAxis, Vec<(f64, f64)>)> {
    let a = cfg
        .sweep
        .ok_or_else(|| CliError::Usage("this target needs a [sweep] section".into()))?;
    let pts = omegas_khz
        .iter()
        .flat_map(|&w| a.values().into_iter().map(move |v| (khz_to_rad_s(w), v)))
        .collect();
    Ok((a, pts))
}

fn fig2(cfg: &ExperimentConfig, jobs: usize) -> Result<Report> {
    let (a, pts) = curve_sweep(cfg, &presets::FIG2_OMEGAS_KHZ)?;
    let var = a.variable;
    let rows = par_map(jobs, &pts, |&(w, v)| {
        let c = cfg.with_value(SweepVar::Omega, w).with_value(var, v);
        let p = c.params;
        let m = analytic_moments(&p)?;
        let num = match (m, a.numeric) {
            (Some(_), true) => Some(commands::numeric_steady(&c, &p).and_then(|rho| {
                let n = rabi_sense::analytics::numeric_moments(rho.matrix(), c.hilbert)?;
                Ok((n.mean_x, n.cov[(0, 0)].sqrt()))
            })?),
            _ => None,
        };
        Ok(vec![
            Cell::from(hz(w)),
            Cell::from(var.display_value(v)),
            Cell::from(rabi_sense::analytics::derived(&p).ok().map(|d| d.lambda)),
            Cell::from(m.map(|m| m.x)),
            Cell::from(m.map(|m| m.var_x)),
            Cell::from(num.map(|n| n.0)),
            Cell::from(num.map(|n| n.1)),
        ])
    })?;
    let mut table = Table::new([
        "omega_Hz".to_string(),
        var.column(),
        "lambda".into(),
        "x_ss".into(),
        "dx_ss".into(),
        "x_num".into(),
        "dx_num".into(),
    ]);
    rows.into_iter().for_each(|r| table.push(r));
    let plot = PlotSpec::new("<x> versus coupling, one curve per omega_Hz", &var.column(), &commands::axis_label(var), "<x>")
        .series("x_ss", "closed form")
        .series("x_num", "master equation")
        .series("dx_ss", "closed-form spread")
        .series("dx_num", "numerical spread");
    Ok(Report {
        stem: String::new(),
        table,
        plot: Some(plot),
    })
}

fn fig3(cfg: &ExperimentConfig, jobs: usize) -> Result<Report> {
    let (a, pts) = curve_sweep(cfg, &presets::FIG3_OMEGAS_KHZ)?;
    let var = a.variable;
    let rows = par_map(jobs, &pts, |&(w, v)| {
        let c = cfg.with_value(SweepVar::Omega, w).with_value(var, v);
        let p = c.params;
        let m = analytic_moments(&p)?;
        let num = match (m, a.numeric) {
            (Some(_), true) => {
                let rho = commands::numeric_steady(&c, &p)?;
                Some(rabi_sense::analytics::numeric_moments(rho.matrix(), c.hilbert)?.n)
            }
            _ => None,
        };
        Ok(vec![
            Cell::from(hz(w)),
            Cell::from(var.display_value(v)),
            Cell::from(rabi_sense::analytics::derived(&p).ok().map(|d| d.lambda)),
            Cell::from(m.map(|m| m.n)),
            Cell::from(num),
        ])
    })?;
    let mut table = Table::new([
        "omega_Hz".to_string(),
        var.column(),
        "lambda".into(),
        "n_ss".into(),
        "n_num".into(),
    ]);
    rows.into_iter().for_each(|r| table.push(r));
    let plot = PlotSpec::new("mean phonon number, one curve per omega_Hz", &var.column(), &commands::axis_label(var), "<n>")
        .series("n_ss", "closed form")
        .series("n_num", "master equation");
    Ok(Report {
        stem: String::new(),
        table,
        plot: Some(plot),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canned_configs_survive_the_text_format() {
        for t in TARGETS {
            let c = canned(t).unwrap();
            assert_eq!(resolve(t, &[]).unwrap(), c, "{t}");
        }
        assert!(canned("fig9").is_err());
    }
}
