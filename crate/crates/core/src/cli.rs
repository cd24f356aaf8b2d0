//! Batch commands behind the `delay-nullctl` binary. Each command reads a
//! [`Config`], applies command-line overrides and writes CSV files into the
//! output directory; the paths written are returned.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use log::info;
use num_complex::Complex64;

use crate::config::{Config, InitialSpec};
use crate::control::{synthesize_control, u_for_eigenvector, Horizon};
use crate::error::{Error, Result};
use crate::kernel::DelayKernel;
use crate::num;
use crate::oracle::{
    aligned_steps_per_unit, least_norm_control_on, norm_gap_report, write_gap_csv, TerminalProblem,
};
use crate::sim::{simulate, terminal_segment_norm};
use crate::spectral::{
    branches_for_radius, eval_charfn, find_roots, RootFinderConfig, SpectrumSet,
};
use crate::state::{m_norm, MState};
use crate::summation::{partial_sum, WeightTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Reconstruct,
    Synthesize,
    Verify,
    Compare,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub n_list: Option<Vec<u32>>,
    pub grid: Option<usize>,
    pub branches: Option<RangeInclusive<i64>>,
}

/// Loads the config (defaults when `path` is `None`) and applies overrides.
pub fn resolve_config(path: Option<&Path>, ov: &Overrides) -> Result<Config> {
    let mut c = match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(o) = &ov.out {
        c.out_dir = o.clone();
    }
    if let Some(n) = &ov.n_list {
        c.n_list = n.clone();
    }
    if let Some(g) = ov.grid {
        c.steps_per_unit = g;
    }
    if let Some(b) = &ov.branches {
        c.branches = Some(b.clone());
    }
    c.check().map_err(|m| Error::config(0, "command line", m))?;
    Ok(c)
}

pub fn run(cmd: Command, config: &Config) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    match cmd {
        Command::Spectrum => cmd_spectrum(config),
        Command::Reconstruct => cmd_reconstruct(config),
        Command::Synthesize => cmd_synthesize(config),
        Command::Verify => cmd_verify(config),
        Command::Compare => cmd_compare(config),
    }
}

fn write_file<F>(dir: &Path, name: &str, f: F) -> Result<PathBuf>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(&path, e))?;
    info!("wrote {}", path.display());
    Ok(path)
}

/// Roots for the configured range, or enough to cover `R_n` for the largest requested order.
fn spectrum_for(config: &Config, kernel: &DelayKernel) -> Result<SpectrumSet> {
    let range = match &config.branches {
        Some(r) => r.clone(),
        None => {
            let n = config.n_list.iter().copied().max().unwrap_or(1);
            let mut b = branches_for_radius(config.schedule.r_n(n));
            if let InitialSpec::Eigen { branch } = config.initial {
                b = b.max(branch.abs());
            }
            -b..=b
        }
    };
    find_roots(kernel, range)
}

fn initial_state(config: &Config, spectrum: &SpectrumSet, panels: usize) -> Result<MState> {
    let lambda = match config.initial {
        InitialSpec::Eigen { branch } => Some(
            spectrum
                .branch(branch)
                .ok_or_else(|| {
                    Error::Domain(format!("branch {branch} is not in the computed spectrum"))
                })?
                .lambda,
        ),
        _ => None,
    };
    config.initial_state(panels, lambda)
}

pub fn cmd_spectrum(config: &Config) -> Result<Vec<PathBuf>> {
    let kernel = config.kernel()?;
    let range = config.branches.clone().unwrap_or(-10..=10);
    let spec = find_roots(&kernel, range)?;
    let tol = RootFinderConfig::default();
    let a = write_file(&config.out_dir, "spectrum.csv", |w| spec.write_csv(w))?;
    let mut rows = Vec::with_capacity(spec.len());
    for r in spec.records() {
        rows.push((
            r.branch,
            eval_charfn(r.lambda, &kernel)?.norm(),
            tol.residual_tol(r.lambda),
        ));
    }
    let b = write_file(&config.out_dir, "spectrum_residuals.csv", |w| {
        writeln!(w, "branch,abs_d,tolerance")?;
        for (br, d, t) in &rows {
            writeln!(w, "{br},{},{}", num(*d), num(*t))?;
        }
        Ok(())
    })?;
    Ok(vec![a, b])
}

pub fn cmd_reconstruct(config: &Config) -> Result<Vec<PathBuf>> {
    let kernel = config.kernel()?;
    let spec = spectrum_for(config, &kernel)?;
    let x = initial_state(config, &spec, config.tail_panels)?;
    let mut errors = Vec::new();
    let mut tables = Vec::new();
    for &n in &config.n_list {
        let s = partial_sum(&x, n, &spec, &config.schedule)?;
        errors.push((n, m_norm(&s.axpy(Complex64::new(-1.0, 0.0), &x)?)));
        tables.push(WeightTable::build(n, &spec, &config.schedule));
    }
    let a = write_file(&config.out_dir, "reconstruct.csv", |w| {
        writeln!(w, "n,m_norm_error")?;
        for (n, e) in &errors {
            writeln!(w, "{n},{}", num(*e))?;
        }
        Ok(())
    })?;
    let b = write_file(&config.out_dir, "weights.csv", |w| {
        for (i, t) in tables.iter().enumerate() {
            t.write_csv(&mut *w, i == 0)?;
        }
        Ok(())
    })?;
    Ok(vec![a, b])
}

pub fn cmd_synthesize(config: &Config) -> Result<Vec<PathBuf>> {
    let kernel = config.kernel()?;
    let horizon = Horizon::new(config.horizon)?;
    let spec = spectrum_for(config, &kernel)?;
    let x = initial_state(config, &spec, config.tail_panels)?;
    let mut written = Vec::new();
    let mut meta = String::new();
    for &n in &config.n_list {
        let syn = synthesize_control(
            &x,
            n,
            &spec,
            &config.schedule,
            horizon,
            config.steps_per_unit,
        )?;
        written.push(write_file(
            &config.out_dir,
            &format!("control_n{n}.csv"),
            |w| syn.control.write_csv(w),
        )?);
        if meta.is_empty() {
            let c = &syn.convention;
            meta.push_str("[metadata]\n");
            meta.push_str(&format!("convention = {}\n", c.chosen.name()));
            meta.push_str(&format!(
                "validated_on = {},{}\n",
                num(c.validated_on.re),
                num(c.validated_on.im)
            ));
            meta.push_str(&format!(
                "residual_conjugate = {}\n",
                num(c.residual_conjugate)
            ));
            meta.push_str(&format!("residual_plain = {}\n", num(c.residual_plain)));
            meta.push_str("exceptional_weight = 1\n");
            let tol = RootFinderConfig::default();
            meta.push_str(&format!("root_tol = {}\n", num(tol.root_tol)));
            meta.push_str(&format!("dedup_tol = {}\n", num(tol.dedup_tol)));
        }
        meta.push_str(&format!("terms_n{n} = {}\n", syn.kappas.len()));
        for (b, k) in &syn.kappas {
            meta.push_str(&format!("kappa_n{n}_b{b} = {},{}\n", num(k.re), num(k.im)));
        }
    }
    let sidecar = format!("{}{}", config.to_ini(), meta);
    written.push(write_file(&config.out_dir, "synthesize.ini", |w| {
        w.write_all(sidecar.as_bytes())
    })?);
    Ok(written)
}

/// Controlled and free terminal norms; the ratio is 0 when both vanish.
fn verify_row(
    x0: &MState,
    u: &crate::control::ControlSignal,
    kernel: &DelayKernel,
    t: f64,
    grid: usize,
) -> Result<(f64, f64, f64, crate::sim::Trajectory)> {
    let ctl = simulate(x0, Some(u), kernel, t, grid)?;
    let free = simulate(x0, None, kernel, t, grid)?;
    let a = terminal_segment_norm(&ctl, t)?;
    let b = terminal_segment_norm(&free, t)?;
    let ratio = if b == 0.0 {
        if a == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        a / b
    };
    Ok((a, b, ratio, ctl))
}

/// Row `n = 0` (eigenvector data only) is the single-eigenvector control `u_lambda`.
pub fn cmd_verify(config: &Config) -> Result<Vec<PathBuf>> {
    let kernel = config.kernel()?;
    let horizon = Horizon::new(config.horizon)?;
    let grid = config.steps_per_unit;
    let spec = spectrum_for(config, &kernel)?;
    let x = initial_state(config, &spec, config.tail_panels)?;
    let x_sim = initial_state(config, &spec, grid)?;
    let mut rows = Vec::new();
    let mut last = None;
    if let InitialSpec::Eigen { branch } = config.initial {
        let r = spec
            .branch(branch)
            .expect("branch checked by initial_state");
        let u = u_for_eigenvector(r, &kernel, horizon, grid)?;
        let (a, b, q, tr) = verify_row(&x_sim, &u, &kernel, horizon.t(), grid)?;
        rows.push((0u32, a, b, q));
        last = Some(tr);
    }
    for &n in &config.n_list {
        let syn = synthesize_control(&x, n, &spec, &config.schedule, horizon, grid)?;
        let (a, b, q, tr) = verify_row(&x_sim, &syn.control, &kernel, horizon.t(), grid)?;
        rows.push((n, a, b, q));
        last = Some(tr);
    }
    let mut out = vec![write_file(&config.out_dir, "verify.csv", |w| {
        writeln!(w, "n,terminal_norm,free_norm,ratio")?;
        for (n, a, b, q) in &rows {
            writeln!(w, "{n},{},{},{}", num(*a), num(*b), num(*q))?;
        }
        Ok(())
    })?];
    if let Some(tr) = last {
        out.push(write_file(&config.out_dir, "trajectory.csv", |w| {
            tr.write_csv(w)
        })?);
    }
    Ok(out)
}

pub fn cmd_compare(config: &Config) -> Result<Vec<PathBuf>> {
    let kernel = config.kernel()?;
    let horizon = Horizon::new(config.horizon)?;
    let spec = spectrum_for(config, &kernel)?;
    let m = aligned_steps_per_unit(horizon.t(), config.oracle_points)?;
    let problem = TerminalProblem::new(&kernel, horizon.t(), m)?;
    let x_sim = initial_state(config, &spec, m)?;
    let oracle = least_norm_control_on(&problem, &x_sim, &kernel)?;
    let x = initial_state(config, &spec, config.tail_panels)?;
    let mut spectral = Vec::new();
    for &n in &config.n_list {
        let syn = synthesize_control(&x, n, &spec, &config.schedule, horizon, m)?;
        spectral.push((n, syn.control));
    }
    let rows = norm_gap_report(&oracle, &spectral)?;
    let a = write_file(&config.out_dir, "compare.csv", |w| write_gap_csv(&rows, w))?;
    let b = write_file(&config.out_dir, "oracle_control.csv", |w| {
        oracle.write_csv(w)
    })?;
    Ok(vec![a, b])
}
