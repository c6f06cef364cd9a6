use std::fs;
use std::path::{Path, PathBuf};
use std::thread;

use log::info;
use sha2::{Digest, Sha256};

use locdyn::csvio::{fmt_f64, write_density, write_table, write_trajectory, Header};
use locdyn::gamma::{gamma_ode, GammaTrajectory};
use locdyn::gauss::{contraction_limit, convergence_study_with, BoxConvention, GaussPair};
use locdyn::meanfield::{
    evolve_transient, residual_resummed, residual_steady_with, solve_steady_report, SolverConfig,
};
use locdyn::popmc::{self, checkpoint, McOptions, McRun};
use locdyn::udist::{pair_mean_combine, Deposition, InitialProfile, UDensity, UGrid};
use locdyn::{Error, Result};

use crate::config::RunConfig;

/// Output directory of one run. Files are written whole, and their digests
/// collected for `SHA256SUMS`.
pub struct RunDir {
    dir: PathBuf,
    digests: Vec<(String, String)>,
}

impl RunDir {
    pub fn create(root: &Path, cfg: &RunConfig) -> Result<Self> {
        let name = cfg.str("name");
        if name.is_empty() || name.contains(['/', '\\']) || name == "." || name == ".." {
            return Err(Error::Config(format!(
                "run name `{name}` is not a plain directory name"
            )));
        }
        let dir = root.join(&cfg.subcommand).join(name);
        fs::create_dir_all(&dir)?;
        let mut run = RunDir {
            dir,
            digests: Vec::new(),
        };
        run.write("config.echo", cfg.echo().into_bytes())?;
        Ok(run)
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, rel: &str, bytes: Vec<u8>) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, &bytes)?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.digests.push((rel.to_string(), hex));
        Ok(())
    }

    pub fn finish(mut self) -> Result<PathBuf> {
        let sums: String = self
            .digests
            .iter()
            .map(|(f, h)| format!("{h}  {f}\n"))
            .collect();
        self.digests.clear();
        fs::write(self.dir.join("SHA256SUMS"), sums)?;
        Ok(self.dir)
    }
}

fn base_header(cfg: &RunConfig) -> Header {
    let mut h: Header = vec![
        (
            "tool".into(),
            format!("locdyn {}", env!("CARGO_PKG_VERSION")),
        ),
        ("subcommand".into(), cfg.subcommand.clone()),
    ];
    h.extend(cfg.entries().iter().cloned());
    h
}

fn table(header: &Header, columns: &[&str], rows: Vec<Vec<f64>>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_table(&mut buf, header, columns, rows)?;
    Ok(buf)
}

fn trajectory(cfg: &RunConfig, g0: f64, tau_end: f64, dtau: f64) -> Result<GammaTrajectory> {
    match cfg.str("method") {
        "closed" => GammaTrajectory::closed(g0, tau_end, dtau),
        "ode" => gamma_ode(g0, tau_end, dtau),
        other => Err(Error::Config(format!("method `{other}` (closed | ode)"))),
    }
}

pub fn cmd_gamma(cfg: &RunConfig, out: &Path) -> Result<PathBuf> {
    let g0s: Vec<f64> = cfg.list("g0")?;
    let tau_end: f64 = cfg.get("tau_end")?;
    let dtau: f64 = cfg.get("dtau")?;
    let trajs = g0s
        .iter()
        .map(|&g0| trajectory(cfg, g0, tau_end, dtau))
        .collect::<Result<Vec<_>>>()?;
    let mut run = RunDir::create(out, cfg)?;
    for (k, traj) in trajs.iter().enumerate() {
        let mut buf = Vec::new();
        write_trajectory(&mut buf, traj, &base_header(cfg))?;
        run.write(&format!("gamma_{k}.csv"), buf)?;
    }
    run.finish()
}

fn solver_config(cfg: &RunConfig) -> Result<SolverConfig> {
    let u_max: f64 = cfg.get("u_max")?;
    let h: f64 = cfg.get("h")?;
    let mut s = SolverConfig::with_grid(u_max, h);
    let keys: Vec<&str> = cfg.entries().iter().map(|(k, _)| k.as_str()).collect();
    if keys.contains(&"alpha") {
        s.alpha = cfg.get("alpha")?;
    }
    if keys.contains(&"tol") {
        s.tol_fixed_point = cfg.get("tol")?;
    }
    if keys.contains(&"max_iters") {
        s.max_iters = cfg.get("max_iters")?;
    }
    if keys.contains(&"deposition") {
        s.deposition = cfg.get::<Deposition>("deposition")?;
    }
    if keys.contains(&"initial") {
        s.initial = cfg.get::<InitialProfile>("initial")?;
    }
    if keys.contains(&"tol_mass") {
        s.tol_mass = cfg.get("tol_mass")?;
    }
    if keys.contains(&"snapshot_stride") {
        s.snapshot_stride = cfg.get("snapshot_stride")?;
    }
    s.validate()?;
    Ok(s)
}

fn steady_summary(header: &mut Header, p: &UDensity, dep: Deposition) -> Result<()> {
    let (sup, l1) = residual_steady_with(p, dep);
    let mean = p.mean()?;
    header.push(("mean_u".into(), fmt_f64(mean)));
    header.push(("mean_combine".into(), fmt_f64(pair_mean_combine(p, p)?)));
    header.push(("residual_sup".into(), fmt_f64(sup)));
    header.push(("residual_l1".into(), fmt_f64(l1)));
    Ok(())
}

pub fn cmd_steady(cfg: &RunConfig, out: &Path) -> Result<PathBuf> {
    let s = solver_config(cfg)?;
    let report = solve_steady_report(&s)?;
    info!("steady state after {} iterations", report.iterations);
    let mut header = base_header(cfg);
    header.push(("iterations".into(), report.iterations.to_string()));
    header.push(("last_change".into(), fmt_f64(report.last_change)));
    steady_summary(&mut header, &report.density, s.deposition)?;
    let mut buf = Vec::new();
    write_density(&mut buf, &report.density, &header)?;
    let mut run = RunDir::create(out, cfg)?;
    run.write("steady.csv", buf)?;
    run.finish()
}

pub fn cmd_transient(cfg: &RunConfig, out: &Path) -> Result<PathBuf> {
    let s = solver_config(cfg)?;
    let g0: f64 = cfg.get("g0")?;
    let tau_end: f64 = cfg.get("tau_end")?;
    let m_max: usize = cfg.get("m_max")?;
    let g = match cfg.str("source") {
        "constant" => GammaTrajectory::constant(g0, tau_end, s.dtau)?,
        "closed" => GammaTrajectory::closed(g0, tau_end, s.dtau)?,
        other => {
            return Err(Error::Config(format!(
                "source `{other}` (constant | closed)"
            )))
        }
    };
    let grid = s.grid()?;
    let p0 = UDensity::from_profile(grid, s.initial)?;
    let sol = evolve_transient(&p0, &g, tau_end, &s)?;
    let mut header = base_header(cfg);
    header.push(("lost_mass".into(), fmt_f64(sol.lost_mass())));
    header.push(("max_mass_drift".into(), fmt_f64(sol.max_mass_drift())));
    let mut rows = Vec::new();
    for (t, p) in sol.tau_nodes().iter().zip(sol.densities()) {
        for (u, v) in grid.nodes().zip(p.values()) {
            rows.push(vec![*t, u, *v]);
        }
    }
    let mut run = RunDir::create(out, cfg)?;
    run.write("transient.csv", table(&header, &["tau", "u", "p"], rows)?)?;
    if m_max > 0 {
        let r = residual_resummed(&sol, &g, m_max)?;
        let names: Vec<String> = (1..=m_max).map(|m| format!("truncated_{m}")).collect();
        let mut cols = vec!["tau", "full"];
        cols.extend(names.iter().map(String::as_str));
        let rows = (0..r.tau.len())
            .map(|j| {
                let mut row = vec![r.tau[j], r.full[j]];
                row.extend(r.truncated.iter().map(|t| t[j]));
                row
            })
            .collect();
        run.write("resummed.csv", table(&header, &cols, rows)?)?;
    }
    run.finish()
}

/// Runs `job` for every seed on up to `jobs` threads; results keep seed order.
fn sweep<T: Send>(
    seeds: &[u64],
    jobs: usize,
    job: impl Fn(u64) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let jobs = jobs.max(1);
    let mut results = Vec::with_capacity(seeds.len());
    for chunk in seeds.chunks(jobs) {
        let batch: Vec<Result<T>> = thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&seed| {
                    let job = &job;
                    s.spawn(move || job(seed))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("seed worker panicked"))
                .collect()
        });
        for r in batch {
            results.push(r?);
        }
    }
    Ok(results)
}

fn mc_options(cfg: &RunConfig, seed: u64) -> Result<McOptions> {
    let mut o = McOptions::new(cfg.get("particles")?, seed);
    o.initial = cfg.get::<InitialProfile>("initial")?;
    o.ceiling = cfg.get("ceiling")?;
    if cfg.entries().iter().any(|(k, _)| k == "entrant") {
        o.entrant = cfg.get("entrant")?;
    }
    Ok(o)
}

fn write_mc(run: &mut RunDir, cfg: &RunConfig, seed: u64, mc: &McRun, grid: UGrid) -> Result<()> {
    let mut header = base_header(cfg);
    header.push(("seed".into(), seed.to_string()));
    header.push(("events".into(), mc.population.events().to_string()));
    header.push((
        "conversions".into(),
        mc.population.conversions().to_string(),
    ));
    header.push(("overflow".into(), mc.population.overflow().to_string()));
    let g_rows = mc
        .snapshots
        .iter()
        .map(|s| vec![s.tau, s.localized_fraction()])
        .collect();
    let mut moment_rows = Vec::new();
    let mut density_rows = Vec::new();
    for s in &mc.snapshots {
        if s.values.is_empty() {
            continue;
        }
        let se = if s.values.len() > 1 {
            s.standard_error()?
        } else {
            f64::NAN
        };
        moment_rows.push(vec![s.tau, s.mean()?, se]);
        let d = s.density(grid)?;
        for (u, v) in grid.nodes().zip(d.values()) {
            density_rows.push(vec![s.tau, u, *v]);
        }
    }
    let dir = format!("seed_{seed}");
    run.write(
        &format!("{dir}/g.csv"),
        table(&header, &["tau", "g_empirical"], g_rows)?,
    )?;
    run.write(
        &format!("{dir}/density.csv"),
        table(&header, &["tau", "u_bin", "p_hat"], density_rows)?,
    )?;
    run.write(
        &format!("{dir}/moments.csv"),
        table(&header, &["tau", "mean_u", "standard_error"], moment_rows)?,
    )?;
    if cfg.flag("checkpoint")? {
        run.write(
            &format!("{dir}/final.ldmc"),
            checkpoint::encode(&mc.population),
        )?;
    }
    Ok(())
}

fn seeds(cfg: &RunConfig) -> Result<Vec<u64>> {
    let s: Vec<u64> = cfg.list("seeds")?;
    if s.is_empty() {
        return Err(Error::Config("no seeds".into()));
    }
    Ok(s)
}

pub fn cmd_mc_steady(cfg: &RunConfig, out: &Path, jobs: usize) -> Result<PathBuf> {
    let tau_end: f64 = cfg.get("tau_end")?;
    let taus: Vec<f64> = cfg.list("snapshot_taus")?;
    let grid = UGrid::new(cfg.get("u_max")?, cfg.get("h")?)?;
    let seeds = seeds(cfg)?;
    for &seed in &seeds {
        mc_options(cfg, seed)?;
    }
    let runs = sweep(&seeds, jobs, |seed| {
        popmc::run_steady_with(tau_end, &taus, &mc_options(cfg, seed)?)
    })?;
    let mut run = RunDir::create(out, cfg)?;
    for (seed, mc) in seeds.iter().zip(&runs) {
        write_mc(&mut run, cfg, *seed, mc, grid)?;
    }
    run.finish()
}

pub fn cmd_mc_transient(cfg: &RunConfig, out: &Path, jobs: usize) -> Result<PathBuf> {
    let tau_end: f64 = cfg.get("tau_end")?;
    let g0: f64 = cfg.get("g0")?;
    let taus: Vec<f64> = cfg.list("snapshot_taus")?;
    let grid = UGrid::new(cfg.get("u_max")?, cfg.get("h")?)?;
    let seeds = seeds(cfg)?;
    for &seed in &seeds {
        mc_options(cfg, seed)?;
    }
    let runs = sweep(&seeds, jobs, |seed| {
        popmc::run_transient_with(g0, tau_end, &taus, &mc_options(cfg, seed)?)
    })?;
    let mut run = RunDir::create(out, cfg)?;
    for (seed, mc) in seeds.iter().zip(&runs) {
        write_mc(&mut run, cfg, *seed, mc, grid)?;
    }
    run.finish()
}

pub fn cmd_oracle(cfg: &RunConfig, out: &Path) -> Result<PathBuf> {
    let boxes: Vec<f64> = cfg.list("boxes")?;
    let template = GaussPair {
        quad_points: cfg.get("quad_points")?,
        integration_halfwidth: cfg.get("halfwidth")?,
        convention: cfg.get::<BoxConvention>("convention")?,
        tol: cfg.get("tol")?,
        ..GaussPair::new(cfg.get("xi1_sq")?, cfg.get("xi2_sq")?, 1.0)
    };
    let study = convergence_study_with(&template, &boxes)?;
    let mut header = base_header(cfg);
    header.push((
        "contraction_limit".into(),
        fmt_f64(contraction_limit(template.xi1_sq, template.xi2_sq)),
    ));
    header.push(("fitted_order".into(), fmt_f64(study.order)));
    let rows = study
        .boxes
        .iter()
        .zip(&study.moments)
        .map(|(b, m)| vec![*b, m.var1, m.var2, m.var_rel, m.norm])
        .collect();
    let mut run = RunDir::create(out, cfg)?;
    run.write(
        "oracle.csv",
        table(&header, &["box", "var1", "var2", "var_rel", "norm"], rows)?,
    )?;
    run.finish()
}

/// Localized-fraction curves for each seed fraction plus the steady-state
/// distribution, one two-column file each.
pub fn cmd_fig1(cfg: &RunConfig, out: &Path) -> Result<PathBuf> {
    let g0s: Vec<f64> = cfg.list("g0")?;
    let tau_end: f64 = cfg.get("tau_end")?;
    let dtau: f64 = cfg.get("dtau")?;
    let curves = g0s
        .iter()
        .map(|&g0| GammaTrajectory::closed(g0, tau_end, dtau))
        .collect::<Result<Vec<_>>>()?;
    let s = solver_config(cfg)?;
    let report = solve_steady_report(&s)?;
    let mut run = RunDir::create(out, cfg)?;
    for (k, traj) in curves.iter().enumerate() {
        let mut header = base_header(cfg);
        header.push(("curve".into(), k.to_string()));
        let mut buf = Vec::new();
        write_trajectory(&mut buf, traj, &header)?;
        run.write(&format!("g_{k}.csv"), buf)?;
    }
    let mut header = base_header(cfg);
    header.push(("iterations".into(), report.iterations.to_string()));
    steady_summary(&mut header, &report.density, s.deposition)?;
    let mut buf = Vec::new();
    write_density(&mut buf, &report.density, &header)?;
    run.write("steady.csv", buf)?;
    run.finish()
}
