mod config;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use mixedstab::assembly::{discretize, AssembledForms};
use mixedstab::mesh::{generate, import_mesh, Family, Triangulation};
use mixedstab::poisson::{convergence_study, default_n_list};
use mixedstab::stability::{
    analyze_mesh, babuska_infsup, brezzi_coercivity, brezzi_infsup, div_div_spectrum, laplace_eigenvalue,
    reports_to_csv, reproduce_table, stokes_infsup, AnalysisOptions,
};
use mixedstab::Error;

use config::{CaseArgs, Command, Format, OutputArgs, Pencil, RunConfig};

/// Failure with the exit code it maps to.
struct Failure {
    code: u8,
    msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidArgument(_) | Error::Parse { .. } | Error::Topology { .. } | Error::UnsupportedDegree { .. } => 2,
            _ => 1,
        };
        Failure { code, msg: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 1, msg: e.to_string() }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    if let Some(jobs) = cfg.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("mixed-stab: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mixed-stab: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn emit(output: &OutputArgs, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json(cfg: &RunConfig, output: &OutputArgs, key: &str, value: impl Serialize) -> Result<()> {
    let doc = json!({ "provenance": cfg.provenance(), "config": cfg, key: value });
    emit(output, &(serde_json::to_string_pretty(&doc).expect("serializable output") + "\n"))
}

fn emit_csv(cfg: &RunConfig, output: &OutputArgs, header: &str, rows: &[String]) -> Result<()> {
    let mut text = format!("{}\n{header}\n", cfg.provenance());
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    emit(output, &text)
}

/// Meshes selected by `--mesh` or `--family`/`--n`, in order.
fn meshes(case: &CaseArgs) -> Result<Vec<Arc<Triangulation>>> {
    if let Some(path) = &case.mesh {
        let text = fs::read_to_string(path)?;
        return Ok(vec![Arc::new(import_mesh(&text)?)]);
    }
    let out: mixedstab::Result<Vec<_>> =
        case.n.values().into_iter().map(|n| generate(case.family, n).map(Arc::new)).collect();
    Ok(out?)
}

/// Assembles every selected case and applies `f`, in parallel, keeping order.
fn per_case<T: Send>(
    case: &CaseArgs,
    f: impl Fn(&AssembledForms) -> mixedstab::Result<T> + Sync,
) -> Result<Vec<(Arc<Triangulation>, T)>> {
    let list = meshes(case)?;
    let out: mixedstab::Result<Vec<_>> = list
        .into_par_iter()
        .map(|mesh| {
            let forms = discretize(mesh.clone(), case.r)?;
            Ok((mesh, f(&forms)?))
        })
        .collect();
    Ok(out?)
}

fn label(mesh: &Triangulation, r: usize) -> String {
    format!("{},{},{}", mesh.family(), mesh.n(), r)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

fn run(cfg: &RunConfig) -> Result<()> {
    match &cfg.command {
        Command::Mesh { family, n, out } => {
            if *family == Family::Imported {
                return Err(Error::InvalidArgument("cannot generate an imported mesh".into()).into());
            }
            let mesh = generate(*family, *n)?;
            let text = mesh.export();
            match out {
                Some(path) => fs::write(path, text)?,
                None => print!("{text}"),
            }
            eprintln!(
                "{} n={}: {} vertices, {} cells, sigma = {}",
                family,
                n,
                mesh.num_vertices(),
                mesh.num_cells(),
                mesh.singular_vertices().sigma
            );
        }
        Command::Infsup { case, output, gamma, stokes, alpha, threshold_sweep, dump_matrices } => {
            let opts = AnalysisOptions {
                threshold: case.threshold,
                coercivity: *alpha,
                babuska: *gamma,
                stokes: *stokes,
                sweep: *threshold_sweep,
            };
            let list = meshes(case)?;
            if let Some(dir) = dump_matrices {
                fs::create_dir_all(dir)?;
                for mesh in &list {
                    dump(dir, &discretize(mesh.clone(), case.r)?)?;
                }
            }
            let reports: mixedstab::Result<Vec<_>> =
                list.into_par_iter().map(|mesh| analyze_mesh(mesh, case.r, &opts)).collect();
            let reports = reports?;
            for rep in &reports {
                if let Some(w) = &rep.warning {
                    eprintln!("warning: {} n={}: {w}", rep.family, rep.n);
                }
            }
            match output.format {
                Format::Json => emit_json(cfg, output, "reports", &reports)?,
                Format::Csv if *threshold_sweep => {
                    let rows: Vec<String> = reports
                        .iter()
                        .flat_map(|rep| {
                            rep.sweep.iter().flatten().map(move |(t, d)| format!("{},{},{},{t:e},{d}", rep.family, rep.n, rep.r))
                        })
                        .collect();
                    emit_csv(cfg, output, "family,n,r,threshold,dimN", &rows)?;
                }
                Format::Csv => emit(output, &format!("{}\n{}", cfg.provenance(), reports_to_csv(&reports)))?,
            }
        }
        Command::Spectrum { case, output, problem } => {
            let problem = *problem;
            let threshold = case.threshold;
            let spectra = per_case(case, |f| match problem {
                Pencil::Infsup => Ok(brezzi_infsup(f, threshold, false)?.spectrum),
                Pencil::Laplace => Ok(laplace_eigenvalue(f, threshold)?.spectrum),
                Pencil::Stokes => Ok(stokes_infsup(f, threshold)?.infsup.spectrum),
                Pencil::DivDiv => div_div_spectrum(f),
                Pencil::Babuska => Ok(babuska_infsup(f, threshold)?.spectrum),
            })?;
            match output.format {
                Format::Json => {
                    let items: Vec<_> = spectra
                        .iter()
                        .map(|(m, s)| json!({ "family": m.family(), "n": m.n(), "r": case.r, "values": s.values }))
                        .collect();
                    emit_json(cfg, output, "spectra", items)?;
                }
                Format::Csv => {
                    let rows: Vec<String> = spectra
                        .iter()
                        .flat_map(|(m, s)| {
                            let l = label(m, case.r);
                            s.values.iter().enumerate().map(move |(i, v)| format!("{l},{i},{v:.16e}"))
                        })
                        .collect();
                    emit_csv(cfg, output, "family,n,r,index,eigenvalue", &rows)?;
                }
            }
        }
        Command::Coercivity { case, output } => {
            let res = per_case(case, |f| brezzi_coercivity(f).map(|c| (c.alpha, c.kernel_dim)))?;
            match output.format {
                Format::Json => {
                    let items: Vec<_> = res
                        .iter()
                        .map(|(m, (a, k))| json!({ "family": m.family(), "n": m.n(), "r": case.r, "alpha": a, "kernel_dim": k }))
                        .collect();
                    emit_json(cfg, output, "results", items)?;
                }
                Format::Csv => {
                    let rows: Vec<String> =
                        res.iter().map(|(m, (a, k))| format!("{},{a:.12},{k}", label(m, case.r))).collect();
                    emit_csv(cfg, output, "family,n,r,alpha,kernel_dim", &rows)?;
                }
            }
        }
        Command::LaplaceEig { case, output } => {
            let threshold = case.threshold;
            let res = per_case(case, |f| Ok(laplace_eigenvalue(f, threshold)?.mu))?;
            let target = 2.0 * std::f64::consts::PI.powi(2);
            match output.format {
                Format::Json => {
                    let items: Vec<_> = res
                        .iter()
                        .map(|(m, mu)| json!({ "family": m.family(), "n": m.n(), "r": case.r, "mu_h": mu, "mu": target }))
                        .collect();
                    emit_json(cfg, output, "results", items)?;
                }
                Format::Csv => {
                    let rows: Vec<String> =
                        res.iter().map(|(m, mu)| format!("{},{},{target:.6}", label(m, case.r), fmt_opt(*mu))).collect();
                    emit_csv(cfg, output, "family,n,r,mu_h,mu", &rows)?;
                }
            }
        }
        Command::StokesInfsup { case, output } => {
            let threshold = case.threshold;
            let res = per_case(case, |f| {
                let s = stokes_infsup(f, threshold)?;
                let div = brezzi_infsup(f, threshold, false)?;
                Ok((s, div.beta))
            })?;
            match output.format {
                Format::Json => {
                    let items: Vec<_> = res
                        .iter()
                        .map(|(m, (s, b))| {
                            json!({
                                "family": m.family(), "n": m.n(), "r": case.r,
                                "dimN": s.infsup.dim_kernel,
                                "beta_h1": s.infsup.beta,
                                "beta_h1_reduced": s.infsup.beta_reduced,
                                "constant_mode": s.constant_mode_rayleigh,
                                "beta_div": b,
                            })
                        })
                        .collect();
                    emit_json(cfg, output, "results", items)?;
                }
                Format::Csv => {
                    let rows: Vec<String> = res
                        .iter()
                        .map(|(m, (s, b))| {
                            format!(
                                "{},{},{:.6},{},{:.6},{b:.6}",
                                label(m, case.r),
                                s.infsup.dim_kernel,
                                s.infsup.beta,
                                fmt_opt(s.infsup.beta_reduced),
                                s.constant_mode_rayleigh
                            )
                        })
                        .collect();
                    emit_csv(cfg, output, "family,n,r,dimN,beta_h1,beta_h1_reduced,constant_mode,beta_div", &rows)?;
                }
            }
        }
        Command::Converge { family, r, n, output, gnuplot } => {
            let n_list = n.clone().unwrap_or_else(|| default_n_list(*r));
            let rep = convergence_study(*family, *r, &n_list)?;
            if let Some(dir) = gnuplot {
                fs::create_dir_all(dir)?;
                let path = dir.join(format!("normalized_r{r}.dat"));
                fs::write(path, format!("{}\n{}", cfg.provenance(), rep.to_gnuplot()))?;
            }
            match output.format {
                Format::Json => emit_json(cfg, output, "report", &rep)?,
                Format::Csv => emit(output, &format!("{}\n{}", cfg.provenance(), rep.to_csv()))?,
            }
        }
        Command::Tables { which, n, threshold, output } => {
            let opts = AnalysisOptions { threshold: *threshold, ..AnalysisOptions::default() };
            let reports = reproduce_table(*which, n.map(|s| s.bounds()), &opts)?;
            match output.format {
                Format::Json => emit_json(cfg, output, "reports", &reports)?,
                Format::Csv => emit(output, &format!("{}\n{}", cfg.provenance(), reports_to_csv(&reports)))?,
            }
        }
    }
    Ok(())
}

fn dump(dir: &Path, forms: &AssembledForms) -> Result<()> {
    let mesh = forms.mesh();
    for (name, m) in forms.named() {
        let file = dir.join(format!("{}_n{}_r{}_{name}.mtx", mesh.family(), mesh.n(), forms.degree()));
        let mut w = std::io::BufWriter::new(fs::File::create(file)?);
        m.write_matrix_market(&mut w)?;
        w.flush()?;
    }
    Ok(())
}
