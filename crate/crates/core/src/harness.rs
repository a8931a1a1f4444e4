//! Experiment runner: q-sweeps with ratio bands and log-slope fits, seeded Monte Carlo over
//! random sets, and flat CSV/JSON records.

use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::constructions::{build, parse_recipe, random_set, random_set_size};
use crate::error::{Error, Result};
use crate::gf::Field;
use crate::lattice::Ambient;
use crate::numeric::ls_slope;
use crate::spectrum::{
    fourier_transform, format_real, lp_norm, plancherel_residual_table, salem_exponent_from, salem_ratio,
};

fn real<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&format_real(*x))
    }
}

fn reals<S: Serializer>(xs: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|&x| format_real(x)))
}

fn opt_real<S: Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => real(v, s),
        None => s.serialize_none(),
    }
}

/// The threshold factor C(q) in ‖X̂‖_p > C(q) q^{-d} q^{α/2}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CFun {
    Const(f64),
    Log,
    LogLog,
}

impl CFun {
    pub fn eval(self, q: f64) -> f64 {
        match self {
            CFun::Const(c) => c,
            CFun::Log => q.ln(),
            CFun::LogLog => q.ln().ln(),
        }
    }
}

impl FromStr for CFun {
    type Err = Error;
    fn from_str(s: &str) -> Result<CFun> {
        match s.trim() {
            "log" => Ok(CFun::Log),
            "loglog" => Ok(CFun::LogLog),
            t => {
                let c = t
                    .strip_prefix("const:")
                    .and_then(|c| c.parse::<f64>().ok())
                    .filter(|c| c.is_finite() && *c > 0.0)
                    .ok_or_else(|| Error::InvalidParameter(format!("threshold function {s:?}")))?;
                Ok(CFun::Const(c))
            }
        }
    }
}

impl std::fmt::Display for CFun {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CFun::Const(c) => write!(f, "const:{c}"),
            CFun::Log => write!(f, "log"),
            CFun::LogLog => write!(f, "loglog"),
        }
    }
}

impl Serialize for CFun {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub recipe: String,
    pub d: usize,
    /// Field specs, e.g. "5", "9", "2^4".
    pub fields: Vec<String>,
    #[serde(serialize_with = "reals")]
    pub p_grid: Vec<f64>,
    pub band: (f64, f64),
    /// Largest |slope| of ln(ratio) against ln q accepted by a sweep.
    pub max_slope: f64,
    pub alpha: f64,
    pub trials: usize,
    pub seed: u64,
    pub cfun: CFun,
    /// Largest exceedance frequency accepted by a Monte Carlo run.
    pub max_exceedance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            recipe: "full()".into(),
            d: 2,
            fields: Vec::new(),
            p_grid: vec![2.0, 4.0, f64::INFINITY],
            band: (0.125, 8.0),
            max_slope: 0.1,
            alpha: 1.0,
            trials: 200,
            seed: 0,
            cfun: CFun::Const(5.0),
            max_exceedance: 0.1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.fields.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if self.p_grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let (lo, hi) = self.band;
        if !(lo > 0.0 && lo <= 1.0 && hi >= 1.0) {
            return Err(Error::InvalidParameter(format!("band [{lo}, {hi}] must contain 1")));
        }
        for f in &self.fields {
            Field::from_spec(f)?;
        }
        Ok(())
    }

    /// sha256 of the JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    fn ambient(&self, spec: &str) -> Result<Ambient> {
        Ambient::new(Arc::new(Field::from_spec(spec)?), self.d)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(serialize_with = "real")]
    pub p: f64,
    #[serde(serialize_with = "real")]
    pub lp_norm: f64,
    #[serde(serialize_with = "opt_real")]
    pub s_emp: Option<f64>,
    pub s_pred: Option<f64>,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepCell {
    pub field: String,
    pub q: usize,
    pub set_size: usize,
    pub prediction: Option<String>,
    pub plancherel_residual: f64,
    pub rows: Vec<SweepRow>,
    pub notes: Vec<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloCell {
    pub field: String,
    pub q: usize,
    pub set_size: usize,
    pub threshold: f64,
    pub trials: usize,
    pub exceedances: usize,
    pub frequency: f64,
    pub wilson: (f64, f64),
    pub norms: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub config_hash: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub sweep: Vec<SweepCell>,
    pub monte_carlo: Vec<MonteCarloCell>,
    pub checks: Vec<Check>,
    pub wall_clock_secs: f64,
}

impl RunRecord {
    fn new(config: &ExperimentConfig) -> RunRecord {
        RunRecord {
            config_hash: config.hash(),
            version: crate::VERSION.to_string(),
            config: config.clone(),
            sweep: Vec::new(),
            monte_carlo: Vec::new(),
            checks: Vec::new(),
            wall_clock_secs: 0.0,
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn write_json<W: Write>(&self, out: W) -> Result<()> {
        serde_json::to_writer_pretty(out, self)?;
        Ok(())
    }
}

fn sweep_cell(config: &ExperimentConfig, spec: &str) -> SweepCell {
    let mut cell = SweepCell {
        field: spec.to_string(),
        q: 0,
        set_size: 0,
        prediction: None,
        plancherel_residual: 0.0,
        rows: Vec::new(),
        notes: Vec::new(),
        error: None,
    };
    let run = |cell: &mut SweepCell| -> Result<()> {
        let ambient = config.ambient(spec)?;
        cell.q = ambient.q();
        let built = build(&parse_recipe(&config.recipe)?, &ambient)?;
        cell.set_size = built.set.cardinality();
        cell.prediction = built.prediction.map(|p| p.to_string());
        cell.notes = built.notes.clone();
        let table = fourier_transform(&built.set);
        cell.plancherel_residual = plancherel_residual_table(&table);
        for &p in &config.p_grid {
            let lp = lp_norm(&table, p)?;
            let s_pred = built.prediction.map(|pr| pr.at(p));
            cell.rows.push(SweepRow {
                p,
                lp_norm: lp,
                s_emp: salem_exponent_from(lp, ambient.size(), cell.set_size).ok(),
                s_pred,
                ratio: s_pred.map(|s| salem_ratio(lp, ambient.size(), cell.set_size, s)),
            });
        }
        Ok(())
    };
    if let Err(e) = run(&mut cell) {
        cell.error = Some(e.to_string());
    }
    cell
}

/// Builds the recipe at every q, profiles it, and checks the predicted exponent.
pub fn sweep(config: &ExperimentConfig) -> Result<RunRecord> {
    config.validate()?;
    let start = Instant::now();
    let mut rec = RunRecord::new(config);
    rec.sweep = config.fields.par_iter().map(|spec| sweep_cell(config, spec)).collect();
    let (lo, hi) = config.band;
    for cell in &rec.sweep {
        if let Some(e) = &cell.error {
            rec.checks.push(Check { name: format!("build q={}", cell.field), pass: false, detail: e.clone() });
            continue;
        }
        rec.checks.push(Check {
            name: format!("plancherel q={}", cell.field),
            pass: cell.plancherel_residual < 1e-9,
            detail: format!("residual {:e}", cell.plancherel_residual),
        });
    }
    for (j, &p) in config.p_grid.iter().enumerate() {
        let ok: Vec<&SweepCell> = rec.sweep.iter().filter(|c| c.error.is_none()).collect();
        let pts: Vec<(f64, f64)> =
            ok.iter().filter_map(|c| c.rows[j].ratio.map(|r| ((c.q as f64).ln(), r))).collect();
        if pts.is_empty() {
            continue;
        }
        let outside: Vec<String> = ok
            .iter()
            .filter_map(|c| c.rows[j].ratio.filter(|r| !(*r >= lo && *r <= hi)).map(|r| format!("q={} ratio={r:.4}", c.field)))
            .collect();
        rec.checks.push(Check {
            name: format!("ratio band p={}", format_real(p)),
            pass: outside.is_empty(),
            detail: if outside.is_empty() { format!("all {} ratios in [{lo}, {hi}]", pts.len()) } else { outside.join("; ") },
        });
        if pts.len() >= 2 {
            let xs: Vec<f64> = pts.iter().map(|t| t.0).collect();
            let ys: Vec<f64> = pts.iter().map(|t| t.1.ln()).collect();
            let slope = ls_slope(&xs, &ys);
            rec.checks.push(Check {
                name: format!("log-slope p={}", format_real(p)),
                pass: slope.is_some_and(|s| s.abs() <= config.max_slope),
                detail: match slope {
                    Some(s) => format!("slope {s:.4}, limit {}", config.max_slope),
                    None => "slope undefined".into(),
                },
            });
        }
    }
    rec.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok(rec)
}

pub const SWEEP_HEADER: [&str; 11] =
    ["field", "q", "d", "recipe", "set_size", "p", "lp_norm", "s_emp", "s_pred", "ratio", "error"];

pub fn write_sweep_csv<W: Write>(out: W, rec: &RunRecord) -> Result<()> {
    let opt = |x: Option<f64>| x.map(format_real).unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for c in &rec.sweep {
        let head = [c.field.clone(), c.q.to_string(), rec.config.d.to_string(), rec.config.recipe.clone(), c.set_size.to_string()];
        if let Some(e) = &c.error {
            w.write_record(head.iter().cloned().chain(["".into(), "".into(), "".into(), "".into(), "".into(), e.clone()]))?;
            continue;
        }
        for r in &c.rows {
            let tail = [format_real(r.p), format_real(r.lp_norm), opt(r.s_emp), opt(r.s_pred), opt(r.ratio), String::new()];
            w.write_record(head.iter().cloned().chain(tail))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// 95% Wilson score interval for k successes in n trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054;
    let n = n as f64;
    let ph = k as f64 / n;
    let denom = 1.0 + z * z / n;
    let center = (ph + z * z / (2.0 * n)) / denom;
    let half = z / denom * (ph * (1.0 - ph) / n + z * z / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Seeds for each trial at one field, drawn from a stream keyed by (seed, field position).
pub fn trial_seeds(seed: u64, stream: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..trials).map(|_| rng.next_u64()).collect()
}

/// Draws random sets of size ⌊q^α⌋ and counts how often ‖X̂‖_p exceeds C(q) q^{-d} q^{α/2}.
/// Uses the first entry of the p-grid.
pub fn monte_carlo(config: &ExperimentConfig) -> Result<RunRecord> {
    config.validate()?;
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let start = Instant::now();
    let p = config.p_grid[0];
    let mut rec = RunRecord::new(config);
    for (i, spec) in config.fields.iter().enumerate() {
        let ambient = config.ambient(spec)?;
        let q = ambient.q() as f64;
        let size = random_set_size(&ambient, config.alpha)?;
        let threshold = config.cfun.eval(q) * q.powi(-(config.d as i32)) * q.powf(config.alpha / 2.0);
        let seeds = trial_seeds(config.seed, i as u64, config.trials);
        let norms = seeds
            .par_iter()
            .map(|&s| {
                let set = random_set(&ambient, config.alpha, s)?;
                lp_norm(&fourier_transform(&set), p)
            })
            .collect::<Result<Vec<f64>>>()?;
        let exceedances = norms.iter().filter(|&&n| n > threshold).count();
        rec.monte_carlo.push(MonteCarloCell {
            field: spec.clone(),
            q: ambient.q(),
            set_size: size,
            threshold,
            trials: config.trials,
            exceedances,
            frequency: exceedances as f64 / config.trials as f64,
            wilson: wilson_interval(exceedances, config.trials),
            norms,
        });
    }
    for c in &rec.monte_carlo {
        rec.checks.push(Check {
            name: format!("exceedance q={}", c.field),
            pass: c.frequency < config.max_exceedance,
            detail: format!(
                "{}/{} above {:.4e}, frequency {:.4} (95% CI {:.4}..{:.4}), limit {}",
                c.exceedances, c.trials, c.threshold, c.frequency, c.wilson.0, c.wilson.1, config.max_exceedance
            ),
        });
    }
    rec.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok(rec)
}

/// Least-squares slope of exceedance frequency against ln q; None with fewer than two fields.
pub fn exceedance_trend(rec: &RunRecord) -> Option<f64> {
    let xs: Vec<f64> = rec.monte_carlo.iter().map(|c| (c.q as f64).ln()).collect();
    let ys: Vec<f64> = rec.monte_carlo.iter().map(|c| c.frequency).collect();
    ls_slope(&xs, &ys)
}

pub const MONTE_CARLO_HEADER: [&str; 9] =
    ["field", "q", "set_size", "threshold", "trials", "exceedances", "frequency", "wilson_lo", "wilson_hi"];

pub fn write_monte_carlo_csv<W: Write>(out: W, rec: &RunRecord) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(MONTE_CARLO_HEADER)?;
    for c in &rec.monte_carlo {
        w.write_record([
            c.field.clone(),
            c.q.to_string(),
            c.set_size.to_string(),
            format_real(c.threshold),
            c.trials.to_string(),
            c.exceedances.to_string(),
            format_real(c.frequency),
            format_real(c.wilson.0),
            format_real(c.wilson.1),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(recipe: &str, d: usize, fields: &[&str]) -> ExperimentConfig {
        ExperimentConfig {
            recipe: recipe.into(),
            d,
            fields: fields.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    #[test]
    fn empty_grid_is_an_error() {
        assert!(matches!(sweep(&cfg("full()", 2, &[])), Err(Error::EmptyGrid)));
        assert!(matches!(monte_carlo(&cfg("full()", 2, &[])), Err(Error::EmptyGrid)));
        let mut c = cfg("full()", 2, &["5"]);
        c.band = (2.0, 8.0);
        assert!(sweep(&c).is_err());
    }

    #[test]
    fn diagonal_sweep_is_exact() {
        let rec = sweep(&cfg("diagonal(n=1)", 2, &["5", "7", "9", "11"])).unwrap();
        assert!(rec.all_pass(), "{:?}", rec.checks);
        for c in &rec.sweep {
            for r in &c.rows {
                // a line: |Ê| = 1/q on q - 1 nonzero frequencies
                let want = if r.p.is_infinite() { 1.0 } else { ((c.q as f64 - 1.0) / c.q as f64).powf(1.0 / r.p) };
                assert!((r.ratio.unwrap() - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn errors_are_recorded_per_q() {
        let rec = sweep(&cfg("sphere0()", 3, &["5", "4"])).unwrap();
        assert!(rec.sweep[0].error.is_none());
        assert!(rec.sweep[1].error.is_some());
        assert!(!rec.all_pass());
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &rec).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 3 + 1);
    }

    #[test]
    fn hash_is_stable() {
        let a = cfg("full()", 2, &["5"]);
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.contains("\"inf\""));
    }

    #[test]
    fn cfun_parsing() {
        assert_eq!("const:5".parse::<CFun>().unwrap(), CFun::Const(5.0));
        assert_eq!("loglog".parse::<CFun>().unwrap(), CFun::LogLog);
        assert!("const:-1".parse::<CFun>().is_err());
        assert!("sqrt".parse::<CFun>().is_err());
        assert!((CFun::Log.eval(std::f64::consts::E) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(0, 200);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.02);
        let (lo, hi) = wilson_interval(100, 200);
        assert!((lo + hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_trial_reproducible() {
        let mut c = cfg("full()", 2, &["7"]);
        c.trials = 1;
        c.seed = 11;
        c.p_grid = vec![4.0];
        let a = monte_carlo(&c).unwrap();
        let b = monte_carlo(&c).unwrap();
        assert_eq!(a.monte_carlo, b.monte_carlo);
        assert_eq!(a.monte_carlo[0].set_size, 7);
        c.trials = 0;
        assert!(monte_carlo(&c).is_err());
    }
}
