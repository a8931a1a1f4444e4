use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use lpsalem::charsums::{self, Phase};
use lpsalem::constructions::{build, parse_recipe, IntPoly};
use lpsalem::geometry;
use lpsalem::harness::{self, CFun, Check, ExperimentConfig};
use lpsalem::spectrum::{self, parse_p_grid};
use lpsalem::{fourier_transform, lp_norm, Ambient, Field, PointSet, SetFile};

#[derive(Parser)]
#[command(name = "lpsalem", version, about = "L^p Fourier analysis of subsets of F_q^d")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a set from a recipe and save it as JSON.
    Construct {
        #[arg(long)]
        recipe: String,
        #[arg(long)]
        field: String,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// L^p profile of a saved set.
    Spectrum {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "2,4,8,inf")]
        p: String,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build a recipe over several fields and test its predicted exponent.
    Sweep {
        #[arg(long)]
        recipe: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long = "q-list")]
        q_list: String,
        #[arg(long, default_value = "2,4,inf")]
        p: String,
        #[arg(long, default_value = "0.125,8")]
        band: String,
        #[arg(long, default_value_t = 0.1)]
        max_slope: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Distance set, spherical energies and lower bounds.
    Distance {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Count congruence classes of k-simplices.
    Simplices {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Also count orbits under translations and O_d.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Kloosterman or Weil sums over F_q^2, or a polynomial curve sum.
    Charsum {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        field: String,
        #[arg(long, default_value = "4")]
        p: String,
        /// Components of a polynomial curve, for --kind curve (e.g. "k,k^2,k^3").
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Monte Carlo over random sets of size q^alpha.
    Random {
        #[arg(long)]
        field: String,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value = "4")]
        p: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "const:5")]
        cfun: String,
        #[arg(long, default_value_t = 0.1)]
        max_exceedance: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Kloosterman,
    Weil,
    Curve,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn load(path: &Path) -> Result<(PointSet, String)> {
    let file = SetFile::read(path).with_context(|| format!("reading {}", path.display()))?;
    let name = file.recipe.clone().unwrap_or_else(|| path.display().to_string());
    Ok((file.to_set()?, name))
}

fn check(checks: &mut Vec<Check>, name: &str, pass: bool, detail: String) {
    checks.push(Check { name: name.into(), pass, detail });
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    match cli.command {
        Command::Construct { recipe, field, d, out } => {
            let ambient = Ambient::new(Arc::new(Field::from_spec(&field)?), d)?;
            let r = parse_recipe(&recipe)?;
            let built = build(&r, &ambient)?;
            built.set.to_file(Some(&r.to_string())).write(&out)?;
            println!("set {r} in F_{}^{d}: {} points", ambient.field().spec(), built.set.cardinality());
            if let Some(p) = built.prediction {
                println!("predicted exponent: {p}");
            }
            for n in &built.notes {
                println!("note: {n}");
            }
        }
        Command::Spectrum { input, p, csv } => {
            let (set, name) = load(&input)?;
            let grid = parse_p_grid(&p)?;
            let table = fourier_transform(&set);
            let profile = spectrum::spectral_profile(&table, &name, &grid)?;
            match csv {
                Some(path) => spectrum::write_profiles_csv(create(&path)?, std::slice::from_ref(&profile))?,
                None => spectrum::write_profiles_csv(io::stdout().lock(), std::slice::from_ref(&profile))?,
            }
            let res = spectrum::plancherel_residual_table(&table);
            check(&mut checks, "plancherel", res < 1e-9, format!("residual {res:e}"));
            for r in &profile.records {
                let b = r.bounds.interpolation.unwrap_or(r.bounds.trivial);
                check(
                    &mut checks,
                    &format!("interpolation p={}", spectrum::format_real(r.p)),
                    r.lp_norm <= b * (1.0 + 1e-12),
                    format!("{:.6e} <= {:.6e}", r.lp_norm, b),
                );
            }
        }
        Command::Sweep { recipe, d, q_list, p, band, max_slope, csv, json } => {
            let (lo, hi) = band
                .split_once(',')
                .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
                .context("band must be lo,hi")?;
            let config = ExperimentConfig {
                recipe,
                d,
                fields: q_list.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
                p_grid: parse_p_grid(&p)?,
                band: (lo, hi),
                max_slope,
                ..Default::default()
            };
            let rec = harness::sweep(&config)?;
            match csv {
                Some(path) => harness::write_sweep_csv(create(&path)?, &rec)?,
                None => harness::write_sweep_csv(io::stdout().lock(), &rec)?,
            }
            if let Some(path) = json {
                rec.write_json(create(&path)?)?;
            }
            checks = rec.checks;
        }
        Command::Distance { input, csv } => {
            let (set, _) = load(&input)?;
            let report = geometry::distance_bound_report(&set)?;
            let table = fourier_transform(&set);
            let en = geometry::spherical_energy(&table);
            let lemma = en.lemma_check(lp_norm(&table, 4.0)?);
            if let Some(path) = csv {
                geometry::write_distance_csv(create(&path)?, std::slice::from_ref(&report))?;
            }
            print_json(&serde_json::json!({ "report": report, "lemma": lemma, "energy": en.energy }))?;
            check(&mut checks, "spherical Cauchy-Schwarz", lemma.holds, format!("{:.6e} <= {:.6e}", lemma.lhs, lemma.rhs));
            let direct: f64 = table.values()[1..].iter().map(|z| z.norm_sqr()).sum();
            let resid = (en.total() - direct).abs();
            check(&mut checks, "energy partition", resid < 1e-9, format!("residual {resid:e}"));
        }
        Command::Simplices { input, k, oracle, csv } => {
            let (set, name) = load(&input)?;
            let census = geometry::simplex_census(&set, k, oracle)?;
            if let Some(path) = csv {
                geometry::write_census_csv(create(&path)?, &[(name, census.clone())])?;
            }
            print_json(&census)?;
            if let Some(o) = census.orbit_count {
                check(
                    &mut checks,
                    "signatures <= orbits",
                    census.signature_count <= o,
                    format!("{} <= {o}", census.signature_count),
                );
            }
        }
        Command::Charsum { kind, field, p, f, csv } => {
            let fld = Field::from_spec(&field)?;
            let grid_p = parse_p_grid(&p)?;
            let (grid, phase) = match kind {
                Kind::Kloosterman => (charsums::kloosterman_grid(&fld)?, Phase::Kloosterman),
                Kind::Weil => (
                    charsums::weil_grid(&fld)?,
                    Phase::Polynomial(vec![IntPoly::monomial(1), IntPoly::monomial(2)]),
                ),
                Kind::Curve => {
                    let polys = f
                        .context("--kind curve needs --f")?
                        .split(',')
                        .map(IntPoly::parse)
                        .collect::<lpsalem::Result<Vec<_>>>()?;
                    let ambient = Ambient::new(Arc::new(fld.clone()), polys.len())?;
                    (charsums::char_sum_grid(&ambient, &Phase::Polynomial(polys.clone()))?, Phase::Polynomial(polys))
                }
            };
            if let Some(path) = csv {
                charsums::write_grid_csv(create(&path)?, &grid)?;
            }
            let moments =
                grid_p.iter().map(|&q| charsums::moment_summary(&grid, q)).collect::<lpsalem::Result<Vec<_>>>()?;
            for m in &moments {
                if let Some(r) = m.ratio.filter(|_| m.p == 4.0) {
                    check(&mut checks, "L^4 moment", r <= 1.0, format!("{:.4} <= {:.4}", m.value, m.bound.unwrap()));
                }
            }
            match kind {
                Kind::Kloosterman => {
                    let rep = charsums::kloosterman_pointwise_check(&fld)?;
                    check(
                        &mut checks,
                        "|K(a,b)| <= 2 sqrt(q)",
                        rep.violations == 0,
                        format!("{} pairs, max ratio {:.4}", rep.pairs_checked, rep.max_ratio),
                    );
                    print_json(&serde_json::json!({ "moments": moments, "pointwise": rep }))?;
                }
                Kind::Weil | Kind::Curve => {
                    let Phase::Polynomial(polys) = &phase else { unreachable!() };
                    let rep = charsums::weil_pointwise_check(&grid.ambient, polys)?;
                    check(
                        &mut checks,
                        "|S(z)| <= (n-1) sqrt(q)",
                        rep.violations == 0,
                        format!("{} checked, {} flagged (p | n), max ratio {:.4}", rep.checked, rep.flagged, rep.max_ratio),
                    );
                    print_json(&serde_json::json!({ "moments": moments, "pointwise": rep }))?;
                }
            }
            match charsums::spectrum_link(&grid.ambient, &phase) {
                Ok(link) => check(&mut checks, "spectrum link", link.residual < 1e-9, format!("residual {:e}", link.residual)),
                Err(e) => eprintln!("spectrum link skipped: {e}"),
            }
        }
        Command::Random { field, d, alpha, p, trials, seed, cfun, max_exceedance, csv, json } => {
            let config = ExperimentConfig {
                recipe: format!("random(alpha={alpha})"),
                d,
                fields: vec![field],
                p_grid: parse_p_grid(&p)?,
                alpha,
                trials,
                seed,
                cfun: cfun.parse::<CFun>()?,
                max_exceedance,
                ..Default::default()
            };
            if config.p_grid.len() != 1 {
                bail!("--p takes a single exponent");
            }
            let rec = harness::monte_carlo(&config)?;
            match csv {
                Some(path) => harness::write_monte_carlo_csv(create(&path)?, &rec)?,
                None => harness::write_monte_carlo_csv(io::stdout().lock(), &rec)?,
            }
            if let Some(path) = json {
                rec.write_json(create(&path)?)?;
            }
            checks = rec.checks;
        }
    }
    Ok(checks)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(checks) => {
            for c in &checks {
                eprintln!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if checks.iter().all(|c| c.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
