//! Subcommands that act on a loaded configuration.

use rayon::prelude::*;

use rabi_sense::analytics::{self, numeric_moments, SteadyMoments};
use rabi_sense::dynamics::{
    self, jump_operator, steady_state_evolve, DensityMatrix, EvolveConfig, Hamiltonian,
    Observable, SteadyConfig, TAIL_LEVELS,
};
use rabi_sense::hilbert::{self, fock_ops, fock_state, pauli, spin_minus, spin_op, tensor_vec};
use rabi_sense::metrology::{self, OracleModel, Readout, SteadyProvider};
use rabi_sense::protocol::{self, SqueezeProtocolParams, DELTA_SIGMA_Z, PHONONS, SIGMA_Z};
use rabi_sense::units::{YOCTO_NEWTON, XONTO_NEWTON};
use rabi_sense::{ComplexMatrix, Error, HilbertSpec, SystemParams};

use crate::config::{ExperimentConfig, ModelKind, Scale, SteadyMethod, SweepVar};
use crate::error::{CliError, Result};
use crate::output::{Cell, PlotSpec, Table};

/// Runs `f` on every item with `jobs` worker threads; results keep the
/// input order.
pub fn par_map<T, R, F>(jobs: usize, items: &[T], f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

/// A table and how to plot it.
pub struct Report {
    pub stem: String,
    pub table: Table,
    pub plot: Option<PlotSpec>,
}

fn oscillator_model(cfg: &ExperimentConfig) -> Result<OracleModel> {
    match cfg.model {
        ModelKind::Rabi => Ok(OracleModel::Rabi),
        ModelKind::Effective => Ok(OracleModel::Effective),
        ModelKind::Squeezed => Err(CliError::Usage(
            "steady states are defined for the rabi and effective models; use `squeeze` or `evolve` for the sweep".into(),
        )),
    }
}

fn hamiltonian(cfg: &ExperimentConfig, p: &SystemParams) -> Result<ComplexMatrix> {
    Ok(match oscillator_model(cfg)? {
        OracleModel::Rabi => hilbert::rabi_hamiltonian(p, cfg.hilbert)?,
        OracleModel::Effective => analytics::effective_hamiltonian(p, cfg.hilbert)?,
    })
}

/// `|−⟩|0⟩` for the full model, the vacuum otherwise.
fn initial_state(spec: HilbertSpec) -> DensityMatrix {
    let vac = fock_state(spec.fock_dim, 0);
    if spec.include_spin {
        DensityMatrix::pure(&tensor_vec(&spin_minus(), &vac))
    } else {
        DensityMatrix::pure(&vac)
    }
}

fn steady_config(cfg: &ExperimentConfig, gamma: f64) -> SteadyConfig {
    let mut s = SteadyConfig::for_gamma(gamma).with_tolerances(cfg.evolve.rel_tol, cfg.evolve.abs_tol);
    s.eps = cfg.steady.eps;
    s.max_step = cfg.evolve.max_step;
    s
}

fn require_damping(p: &SystemParams) -> Result<()> {
    if p.gamma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter("a steady state needs gamma > 0".into()).into())
    }
}

/// Numerical steady state by the configured method.
pub fn numeric_steady(cfg: &ExperimentConfig, p: &SystemParams) -> Result<DensityMatrix> {
    require_damping(p)?;
    let model = oscillator_model(cfg)?;
    let spec = cfg.hilbert;
    let rho = match cfg.steady.method {
        SteadyMethod::Direct => metrology::model_steady_state(p, spec, model, SteadyProvider::Direct)?,
        SteadyMethod::Plateau => metrology::model_steady_state(
            p,
            spec,
            model,
            SteadyProvider::Plateau {
                horizon: cfg.steady.horizon / p.gamma,
                cfg: steady_config(cfg, p.gamma),
            },
        )?,
        SteadyMethod::Evolve => {
            let h = hamiltonian(cfg, p)?;
            let jump = jump_operator(spec)?;
            steady_state_evolve(&initial_state(spec), &h, p.gamma, &jump, &steady_config(cfg, p.gamma))?
                .into_converged()?
        }
    };
    let tail = rho.fock_tail(spec, TAIL_LEVELS);
    if tail > cfg.evolve.tail_threshold {
        eprintln!(
            "warning: top {TAIL_LEVELS} Fock levels hold {tail:.2e} of the population; raise hilbert.fock_dim"
        );
    }
    Ok(rho)
}

/// `(x, Δx, p, Δp, n, Δn², σ12, purity)` in a fixed order.
fn moment_cells(m: Option<&SteadyMoments>) -> Vec<Cell> {
    match m {
        Some(m) => [m.x, m.var_x, m.p, m.var_p, m.n, m.var_n, m.sigma12, m.purity]
            .into_iter()
            .map(Cell::from)
            .collect(),
        None => vec![Cell::Empty; 8],
    }
}

const MOMENT_COLUMNS: [&str; 8] = ["x", "dx", "p", "dp", "n", "var_n", "sigma12", "purity"];

fn numeric_steady_moments(cfg: &ExperimentConfig, p: &SystemParams) -> Result<SteadyMoments> {
    let rho = numeric_steady(cfg, p)?;
    let m = numeric_moments(rho.matrix(), cfg.hilbert)?;
    Ok(SteadyMoments {
        x: m.mean_x,
        var_x: m.cov[(0, 0)].sqrt(),
        p: m.mean_p,
        var_p: m.cov[(1, 1)].sqrt(),
        n: m.n,
        var_n: m.var_n,
        sigma12: m.cov[(0, 1)],
        purity: m.purity(),
    })
}

/// Closed-form moments; `None` past the instability.
pub fn analytic_moments(p: &SystemParams) -> Result<Option<SteadyMoments>> {
    p.validate()?;
    let d = analytics::derived(p)?;
    match analytics::steady_moments(&d, p.gamma / p.omega) {
        Ok(m) => Ok(Some(m)),
        Err(Error::Instability { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn steady(cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.params;
    let analytic = analytics::steady_moments(&analytics::derived(&p)?, p.gamma / p.omega)?;
    let numeric = numeric_steady_moments(cfg, &p)?;
    let mut table = Table::new(std::iter::once("source").chain(MOMENT_COLUMNS));
    for (label, m) in [("analytic", &analytic), ("numeric", &numeric)] {
        let mut row = vec![Cell::from(label)];
        row.extend(moment_cells(Some(m)));
        table.push(row);
        println!(
            "{label:>8}: <x> = {:.6}  dx = {:.6}  <n> = {:.6}",
            m.x, m.var_x, m.n
        );
    }
    Ok(Report {
        stem: "steady".into(),
        table,
        plot: None,
    })
}

pub fn evolve(cfg: &ExperimentConfig) -> Result<Report> {
    if cfg.model == ModelKind::Squeezed {
        let pp = cfg.protocol_params()?;
        let r = protocol::simulate_sweep(&pp, cfg.hilbert, &cfg.evolve)?;
        if r.truncation_unsafe {
            eprintln!("warning: Fock tail {:.2e} exceeded the threshold; raise hilbert.fock_dim", r.max_tail);
        }
        let cols = [SIGMA_Z, DELTA_SIGMA_Z, PHONONS];
        let mut table = Table::new(std::iter::once("t_s").chain(cols));
        for (i, &t) in r.times.iter().enumerate() {
            let mut row = vec![Cell::from(t)];
            for c in cols {
                row.push(Cell::from(r.series(c).map(|s| s[i])));
            }
            table.push(row);
        }
        let plot = PlotSpec::new("spin polarization during the field sweep", "t_s", "t (s)", "<sigma_z>")
            .series(SIGMA_Z, "<sigma_z>")
            .series(DELTA_SIGMA_Z, "Delta sigma_z");
        return Ok(Report {
            stem: "evolve".into(),
            table,
            plot: Some(plot),
        });
    }

    let p = cfg.params;
    let spec = cfg.hilbert;
    let r = run_oscillator(cfg, &p, &cfg.evolve)?;
    let mut header = vec!["t_s", "x", "p", "n"];
    if spec.include_spin {
        header.push(SIGMA_Z);
    }
    let mut table = Table::new(header.iter().copied());
    for (i, &t) in r.times.iter().enumerate() {
        let mut row = vec![Cell::from(t)];
        for c in &header[1..] {
            row.push(Cell::from(r.series(c).map(|s| s[i])));
        }
        table.push(row);
    }
    let plot = PlotSpec::new("relaxation of the oscillator quadrature", "t_s", "t (s)", "<x>").series("x", "<x>");
    Ok(Report {
        stem: "evolve".into(),
        table,
        plot: Some(plot),
    })
}

/// Master-equation run from the initial state with `x, p, n` (and `σ_z`).
pub fn run_oscillator(
    cfg: &ExperimentConfig,
    p: &SystemParams,
    ev: &EvolveConfig,
) -> Result<dynamics::SweepResult> {
    let spec = cfg.hilbert;
    let h = hamiltonian(cfg, p)?;
    let ops = fock_ops(HilbertSpec::bosonic(spec.fock_dim))?;
    let mut obs: Vec<Observable> = vec![
        ("x".into(), spec.lift(&ops.x())),
        ("p".into(), spec.lift(&ops.p())),
        ("n".into(), spec.lift(&ops.n)),
    ];
    if spec.include_spin {
        obs.push((SIGMA_Z.into(), spin_op(&pauli().z, spec)));
    }
    let jump = jump_operator(spec)?;
    let r = dynamics::evolve(&initial_state(spec), &Hamiltonian::Static(h), p.gamma, &jump, spec, ev, &obs)?;
    if r.truncation_unsafe {
        eprintln!("warning: Fock tail {:.2e} exceeded the threshold; raise hilbert.fock_dim", r.max_tail);
    }
    Ok(r)
}

fn sweep_points(cfg: &ExperimentConfig) -> Result<(SweepVar, Vec<f64>)> {
    let axis = cfg
        .sweep
        .ok_or_else(|| CliError::Usage("this command needs a [sweep] section".into()))?;
    Ok((axis.variable, axis.values()))
}

fn lambda_cell(p: &SystemParams) -> Cell {
    analytics::derived(p).map(|d| d.lambda).ok().into()
}

pub fn sweep(cfg: &ExperimentConfig, jobs: usize) -> Result<Report> {
    if cfg.model == ModelKind::Squeezed {
        return squeeze(cfg, jobs, false);
    }
    let (var, values) = sweep_points(cfg)?;
    let numeric = cfg.sweep.map(|a| a.numeric).unwrap_or(false);
    let mut header: Vec<String> = vec![var.column(), "lambda".into()];
    header.extend(MOMENT_COLUMNS.iter().map(|c| format!("{c}_ss")));
    if numeric {
        header.extend(["x_num", "dx_num", "n_num", "dn_num"].map(String::from));
    }
    let rows = par_map(jobs, &values, |&v| {
        let p = cfg.with_value(var, v).params;
        let m = analytic_moments(&p)?;
        let mut row = vec![Cell::from(var.display_value(v)), lambda_cell(&p)];
        row.extend(moment_cells(m.as_ref()));
        if numeric {
            if m.is_some() {
                let n = numeric_steady_moments(cfg, &p)?;
                row.extend([n.x, n.var_x, n.n, n.var_n.sqrt()].map(Cell::from));
            } else {
                row.extend(vec![Cell::Empty; 4]);
            }
        }
        Ok(row)
    })?;
    let mut table = Table::new(header);
    rows.into_iter().for_each(|r| table.push(r));
    let mut plot = PlotSpec::new(
        "steady-state quadrature",
        &var.column(),
        &axis_label(var),
        "<x>",
    )
    .series("x_ss", "closed form");
    if numeric {
        plot = plot.series("x_num", "master equation");
    }
    plot.log_x = cfg.sweep.map(|a| a.scale == Scale::Log).unwrap_or(false);
    Ok(Report {
        stem: "sweep".into(),
        table,
        plot: Some(plot),
    })
}

pub fn axis_label(var: SweepVar) -> String {
    match var {
        SweepVar::Z => "z (m)".into(),
        SweepVar::Force => "F (N)".into(),
        v => format!("{}/2pi (Hz)", v.name()),
    }
}

/// Points of a command that runs on a sweep when one is configured and on
/// the configured point otherwise.
fn points(cfg: &ExperimentConfig) -> Vec<(Option<f64>, ExperimentConfig)> {
    match cfg.sweep {
        Some(a) => a
            .values()
            .into_iter()
            .map(|v| (Some(v), cfg.with_value(a.variable, v)))
            .collect(),
        None => vec![(None, cfg.clone())],
    }
}

fn lead_column(cfg: &ExperimentConfig) -> Option<SweepVar> {
    cfg.sweep.map(|a| a.variable)
}

/// Force with three significant digits in the nearest of zN, yN, xN.
pub fn fmt_force(f: f64) -> String {
    let units = [(1e-21, "zN"), (YOCTO_NEWTON, "yN"), (XONTO_NEWTON, "xN")];
    for (scale, unit) in units {
        let v = f / scale;
        if v.abs() >= 1.0 {
            return format!("{} {unit}", three_sig(v));
        }
    }
    format!("{f:.2e} N")
}

fn three_sig(v: f64) -> String {
    let digits = v.abs().log10().floor() as i32;
    let decimals = (2 - digits).max(0) as usize;
    format!("{v:.decimals$}")
}

fn no_signal<T>(r: rabi_sense::Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::NoSignal) | Err(Error::NoSensitivity) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub struct Sensitivities {
    pub lambda: f64,
    pub fx: f64,
    pub fp: Option<f64>,
    pub fn_: Option<f64>,
    pub fq: f64,
}

pub fn sensitivities(cfg: &ExperimentConfig, p: &SystemParams) -> Result<Sensitivities> {
    oscillator_model(cfg)?;
    let b = &cfg.budget;
    let d = analytics::derived(p)?;
    let fx = metrology::sensitivity_report(p, Readout::X, b)?.delta_f;
    let fp = no_signal(metrology::sensitivity_report(p, Readout::P, b))?.map(|r| r.delta_f);
    let fn_ = no_signal(metrology::sensitivity_report(p, Readout::N, b))?.map(|r| r.delta_f);
    let fq = metrology::cramer_rao(metrology::qfi_closed_form(p)?, b.nu())?;
    Ok(Sensitivities {
        lambda: d.lambda,
        fx,
        fp,
        fn_,
        fq,
    })
}

pub fn sensitivity(cfg: &ExperimentConfig) -> Result<Report> {
    let lead = lead_column(cfg).filter(|v| *v != SweepVar::G);
    let mut header: Vec<String> = lead.map(|v| v.column()).into_iter().collect();
    header.extend(["g_Hz", "lambda", "dFx_N", "dFp_N", "dFn_N", "dFQ_N"].map(String::from));
    let mut table = Table::new(header);
    let pts = points(cfg);
    for (v, c) in &pts {
        let p = c.params;
        let s = sensitivities(c, &p)?;
        if pts.len() == 1 {
            println!("dFx = {}", fmt_force(s.fx));
            println!("dFp = {}", s.fp.map_or("no signal".into(), fmt_force));
            println!("dFn = {}", s.fn_.map_or("no signal".into(), fmt_force));
            println!("dFQ = {}", fmt_force(s.fq));
        }
        let mut row: Vec<Cell> = match (lead, v) {
            (Some(var), Some(v)) => vec![Cell::from(var.display_value(*v))],
            _ => Vec::new(),
        };
        row.extend([
            Cell::from(p.g / (2.0 * std::f64::consts::PI)),
            Cell::from(s.lambda),
            Cell::from(s.fx),
            Cell::from(s.fp),
            Cell::from(s.fn_),
            Cell::from(s.fq),
        ]);
        table.push(row);
    }
    let plot = cfg.sweep.map(|a| {
        let var = a.variable;
        let mut spec = PlotSpec::new("minimal detectable force", &var.column(), &axis_label(var), "dF (N)")
            .series("dFx_N", "x readout")
            .series("dFn_N", "n readout")
            .series("dFQ_N", "quantum Cramer-Rao bound");
        spec.log_x = a.scale == Scale::Log;
        spec
    });
    Ok(Report {
        stem: "sensitivity".into(),
        table,
        plot,
    })
}

fn fidelity_provider(cfg: &ExperimentConfig, p: &SystemParams) -> Result<SteadyProvider> {
    Ok(match cfg.steady.method {
        SteadyMethod::Direct => SteadyProvider::Direct,
        // the oracle evolves for a fixed horizon; the evolve method uses the same horizon
        SteadyMethod::Plateau | SteadyMethod::Evolve => {
            require_damping(p)?;
            SteadyProvider::Plateau {
                horizon: cfg.steady.horizon / p.gamma,
                cfg: steady_config(cfg, p.gamma),
            }
        }
    })
}

pub fn qfi(cfg: &ExperimentConfig, jobs: usize) -> Result<Report> {
    let model = oscillator_model(cfg)?;
    let lead = lead_column(cfg);
    let mut header: Vec<String> = lead.map(|v| v.column()).into_iter().collect();
    header.extend(
        [
            "lambda",
            "qfi_closed_per_N2",
            "qfi_covariance_per_N2",
            "qfi_fidelity_per_N2",
            "richardson_gap",
            "dFQ_N",
        ]
        .map(String::from),
    );
    let pts = points(cfg);
    let single = pts.len() == 1;
    let rows = par_map(jobs, &pts, |(v, c)| {
        let p = c.params;
        let d = analytics::derived(&p)?;
        let closed = metrology::qfi_closed_form(&p)?;
        let cov = analytics::covariance_ss(&d, p.gamma / p.omega)?;
        let covariance = metrology::qfi_covariance(&metrology::mean_derivative(&p)?, &cov)?;
        let eps = c.qfi_epsilon.unwrap_or_else(|| metrology::default_epsilon(&p));
        let fid = metrology::qfi_fidelity_oracle(&p, c.hilbert, model, fidelity_provider(c, &p)?, eps)?;
        if single {
            println!("closed form: {closed:.6e} N^-2");
            println!("covariance:  {covariance:.6e} N^-2");
            println!("fidelity:    {:.6e} N^-2 (Richardson gap {:.1e})", fid.qfi, fid.richardson_gap());
        }
        let mut row: Vec<Cell> = match (lead, v) {
            (Some(var), Some(v)) => vec![Cell::from(var.display_value(*v))],
            _ => Vec::new(),
        };
        row.extend(
            [
                d.lambda,
                closed,
                covariance,
                fid.qfi,
                fid.richardson_gap(),
                metrology::cramer_rao(closed, c.budget.nu())?,
            ]
            .map(Cell::from),
        );
        Ok(row)
    })?;
    let mut table = Table::new(header);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(Report {
        stem: "qfi".into(),
        table,
        plot: None,
    })
}

pub struct SqueezeRow {
    pub sigma_analytic: f64,
    pub sigma_numeric: f64,
    pub fmin_analytic: f64,
    pub fmin_numeric: Option<f64>,
}

pub fn squeeze_point(
    pp: &SqueezeProtocolParams,
    spec: HilbertSpec,
    ev: &EvolveConfig,
    min_force: bool,
) -> Result<SqueezeRow> {
    let r = protocol::simulate_sweep(pp, spec, ev)?;
    if r.truncation_unsafe {
        eprintln!(
            "warning: xi/2pi = {:.4} kHz: Fock tail {:.2e} exceeded the threshold; raise hilbert.fock_dim",
            pp.xi / (2e3 * std::f64::consts::PI),
            r.max_tail
        );
    }
    let sigma_numeric = *r.series(SIGMA_Z).and_then(|s| s.last()).expect("non-empty series");
    let fmin_numeric = if min_force {
        let m = protocol::min_force_numeric(pp, spec, ev, 1e-3)?;
        Some(m.force)
    } else {
        None
    };
    Ok(SqueezeRow {
        sigma_analytic: protocol::demkov_sigma_z(pp)?,
        sigma_numeric,
        fmin_analytic: protocol::min_force_demkov(pp)?,
        fmin_numeric,
    })
}

pub fn squeeze(cfg: &ExperimentConfig, jobs: usize, min_force: bool) -> Result<Report> {
    cfg.protocol_params()?;
    let min_force = min_force || cfg.sweep.map(|a| a.numeric).unwrap_or(false);
    let var = lead_column(cfg).unwrap_or(SweepVar::Xi);
    let pts = points(cfg);
    let rows = par_map(jobs, &pts, |(_, c)| {
        let pp = c.protocol_params()?;
        let s = squeeze_point(&pp, c.hilbert, &c.evolve, min_force)?;
        let shown = match var {
            SweepVar::Xi => pp.xi,
            SweepVar::Kappa => pp.kappa,
            SweepVar::Omega0 => pp.omega0,
            SweepVar::Omega => pp.base.omega,
            SweepVar::Field => pp.base.field,
            SweepVar::G => pp.base.g,
            SweepVar::Gamma => pp.base.gamma,
            SweepVar::Z => pp.base.z,
            SweepVar::Force => pp.base.force,
        };
        Ok(vec![
            Cell::from(var.display_value(shown)),
            Cell::from(s.sigma_analytic),
            Cell::from(s.sigma_numeric),
            Cell::from((1.0 - s.sigma_numeric * s.sigma_numeric).max(0.0).sqrt()),
            Cell::from(s.fmin_analytic),
            Cell::from(s.fmin_numeric),
        ])
    })?;
    if pts.len() == 1 {
        let r = &rows[0];
        if let (Cell::Num(a), Cell::Num(n), Cell::Num(f)) = (&r[1], &r[2], &r[4]) {
            println!("<sigma_z(t_f)>: two-state {a:.4}, simulated {n:.4}");
            println!("Fmin (two-state) = {}", fmt_force(*f));
        }
        if let Cell::Num(f) = &r[5] {
            println!("Fmin (simulated) = {}", fmt_force(*f));
        }
    }
    let mut table = Table::new([
        var.column(),
        "sigma_z_analytic".into(),
        "sigma_z_numeric".into(),
        "delta_sigma_z".into(),
        "Fmin_analytic_N".into(),
        "Fmin_numeric_N".into(),
    ]);
    rows.into_iter().for_each(|r| table.push(r));
    let plot = PlotSpec::new("final spin polarization", &var.column(), &axis_label(var), "<sigma_z(t_f)>")
        .series("sigma_z_analytic", "two-state model")
        .series("sigma_z_numeric", "full sweep");
    Ok(Report {
        stem: "squeeze".into(),
        table,
        plot: Some(plot),
    })
}
