//! Fourier transforms of subsets of F_q^d, L^p norms over nonzero frequencies and
//! empirical Salem exponents.
//!
//! Normalization: `Ê(x) = q^{-d} sum_{y in E} chi(-x.y)`, so `Ê(0) = q^{-d} #E` and
//! Plancherel reads `sum_x |Ê(x)|^2 = q^{-d} #E`.

mod fft;

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::FieldElement;
use crate::lattice::{Ambient, PointSet};
use crate::numeric::CompensatedSum;

/// Ê over the whole ambient, indexed by the canonical point encoding.
#[derive(Clone, Debug)]
pub struct FourierTable {
    ambient: Ambient,
    values: Vec<Complex64>,
    set_size: usize,
}

impl FourierTable {
    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn get(&self, idx: usize) -> Complex64 {
        self.values[idx]
    }

    /// #E of the transformed set.
    pub fn set_size(&self) -> usize {
        self.set_size
    }

    /// Largest |Ê(x)| over x != 0 (0 when the ambient has one point).
    pub fn sup_off_origin(&self) -> f64 {
        self.values[1..].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Maps the index of x_i to the index of w with w_b = sum_a u_a Tr(g t^{a+b}),
/// u = coeffs(x_i). Then chi(g x_i y_i) = exp(2 pi i <w, coeffs(y_i)> / p).
fn axis_permutation(ambient: &Ambient, g: FieldElement) -> Vec<usize> {
    let f = ambient.field();
    let (p, m) = (f.p() as usize, f.m() as usize);
    let t = f.basis_generator();
    let gram: Vec<Vec<usize>> = (0..m)
        .map(|a| (0..m).map(|b| f.trace(f.mul(g, f.pow(t, (a + b) as u64))) as usize).collect())
        .collect();
    (0..f.q() as usize)
        .map(|u| {
            let coeffs = f.coeffs(FieldElement::from_index_unchecked(u as u32));
            let mut w = 0usize;
            for b in (0..m).rev() {
                let wb = (0..m).map(|a| coeffs[a] as usize * gram[a][b]).sum::<usize>() % p;
                w = w * p + wb;
            }
            w
        })
        .collect()
}

/// `out(x) = q^{-d} sum_y input(y) chi(-c x.y)` for c != 0.
fn transform_with(ambient: &Ambient, mut data: Vec<Complex64>, c: FieldElement) -> Vec<Complex64> {
    let f = ambient.field();
    let (p, m, q, d) = (f.p() as usize, f.m() as usize, ambient.q(), ambient.d());
    fft::dft_zp(&mut data, p, m * d);
    let perm = axis_permutation(ambient, f.neg(c));
    let scale = 1.0 / ambient.size() as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); ambient.size()];
    out.par_chunks_mut(1 << 12).enumerate().for_each(|(ci, chunk)| {
        let start = ci << 12;
        for (off, o) in chunk.iter_mut().enumerate() {
            let mut x = start + off;
            let mut src = 0usize;
            let mut scale_q = 1usize;
            for _ in 0..d {
                src += perm[x % q] * scale_q;
                x /= q;
                scale_q *= q;
            }
            *o = data[src] * scale;
        }
    });
    out
}

fn indicator(set: &PointSet) -> Vec<Complex64> {
    let mut data = vec![Complex64::new(0.0, 0.0); set.ambient().size()];
    for i in set.iter() {
        data[i] = Complex64::new(1.0, 0.0);
    }
    data
}

/// Ê via the separable radix-p transform.
pub fn fourier_transform(set: &PointSet) -> FourierTable {
    FourierTable {
        ambient: set.ambient().clone(),
        values: transform_with(set.ambient(), indicator(set), FieldElement::ONE),
        set_size: set.cardinality(),
    }
}

/// Ê computed with the twisted character chi_c(a) = chi(c a) in place of chi.
pub fn fourier_transform_twisted(set: &PointSet, c: FieldElement) -> Result<FourierTable> {
    if c.is_zero() {
        return Err(Error::InvalidParameter("twist must be nonzero".into()));
    }
    Ok(FourierTable {
        ambient: set.ambient().clone(),
        values: transform_with(set.ambient(), indicator(set), c),
        set_size: set.cardinality(),
    })
}

/// Transform of an arbitrary complex function on the ambient (same normalization).
pub fn transform_function(ambient: &Ambient, values: &[Complex64]) -> Result<Vec<Complex64>> {
    if values.len() != ambient.size() {
        return Err(Error::AmbientMismatch(format!(
            "function has {} values, ambient has {}",
            values.len(),
            ambient.size()
        )));
    }
    Ok(transform_with(ambient, values.to_vec(), FieldElement::ONE))
}

/// Direct evaluation of the definition, O(q^d #E). Slow; used for cross-checks.
pub fn naive_transform(set: &PointSet) -> FourierTable {
    let a = set.ambient();
    let f = a.field();
    let pts: Vec<usize> = set.indices();
    let scale = 1.0 / a.size() as f64;
    let values = (0..a.size())
        .into_par_iter()
        .map(|x| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &y in &pts {
                acc += f.chi(f.neg(a.dot_idx(x, y)));
            }
            acc * scale
        })
        .collect();
    FourierTable { ambient: a.clone(), values, set_size: set.cardinality() }
}

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        Err(Error::InvalidExponent(p))
    } else {
        Ok(())
    }
}

/// `(q^{-d} sum_{x != 0} |Ê(x)|^p)^{1/p}`, or the max over x != 0 when p is infinite.
pub fn lp_norm(table: &FourierTable, p: f64) -> Result<f64> {
    check_exponent(p)?;
    Ok(lp_of_values(table.values(), table.ambient().size(), p))
}

/// Same average applied to an arbitrary array indexed like the ambient.
pub(crate) fn lp_of_values(values: &[Complex64], size: usize, p: f64) -> f64 {
    let rest = &values[1..];
    let max = rest.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if p.is_infinite() || max == 0.0 {
        return max;
    }
    let mut acc = CompensatedSum::new();
    if p == 2.0 {
        let inv = 1.0 / (max * max);
        for z in rest {
            acc.add(z.norm_sqr() * inv);
        }
    } else {
        for z in rest {
            acc.add((z.norm() / max).powf(p));
        }
    }
    max * (acc.value() / size as f64).powf(1.0 / p)
}

/// `1 - ln(q^d lp) / ln(#E)`; +inf when lp = 0.
pub fn salem_exponent_from(lp: f64, ambient_size: usize, card: usize) -> Result<f64> {
    if card < 2 {
        return Err(Error::TooFewPoints { needed: 2, found: card });
    }
    if lp == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 - (ambient_size as f64 * lp).ln() / (card as f64).ln())
}

pub fn salem_exponent(set: &PointSet, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if set.cardinality() < 2 {
        return Err(Error::TooFewPoints { needed: 2, found: set.cardinality() });
    }
    let t = fourier_transform(set);
    salem_exponent_from(lp_norm(&t, p)?, set.ambient().size(), set.cardinality())
}

/// `lp / (q^{-d} #E^{1-s})`: how far a measured norm sits from a predicted exponent.
pub fn salem_ratio(lp: f64, ambient_size: usize, card: usize, s: f64) -> f64 {
    lp / ((card as f64).powf(1.0 - s) / ambient_size as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralBounds {
    /// q^{-d} #E
    pub trivial: f64,
    /// q^{-d} #E^{1-1/p}, for p >= 2
    pub interpolation: Option<f64>,
    /// sqrt(1 - #E/q^d) q^{-d} sqrt(#E), for p >= 2
    pub lower: Option<f64>,
}

pub fn spectral_bounds(ambient_size: usize, card: usize, p: f64) -> Result<SpectralBounds> {
    check_exponent(p)?;
    let n = ambient_size as f64;
    let e = card as f64;
    let trivial = e / n;
    let (interpolation, lower) = if p >= 2.0 {
        let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
        (Some(e.powf(1.0 - inv_p) / n), Some((1.0 - e / n).max(0.0).sqrt() * e.sqrt() / n))
    } else {
        (None, None)
    };
    Ok(SpectralBounds { trivial, interpolation, lower })
}

/// `q^{-2d} #E (1 - q^{-d} #E)`, the exact value of ‖Ê‖_2^2.
pub fn l2_squared_closed_form(ambient_size: usize, card: usize) -> f64 {
    let n = ambient_size as f64;
    let e = card as f64;
    e / (n * n) * (1.0 - e / n)
}

pub fn plancherel_residual_table(table: &FourierTable) -> f64 {
    let mut acc = CompensatedSum::new();
    for z in table.values() {
        acc.add(z.norm_sqr());
    }
    let want = table.set_size() as f64 / table.ambient().size() as f64;
    if want == 0.0 {
        return acc.value().abs();
    }
    (acc.value() - want).abs() / want
}

/// Relative deviation from Plancherel's identity.
pub fn plancherel_residual(set: &PointSet) -> f64 {
    plancherel_residual_table(&fourier_transform(set))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileRecord {
    pub p: f64,
    pub lp_norm: f64,
    /// None when #E < 2; +inf when the norm vanishes.
    pub s_emp: Option<f64>,
    pub bounds: SpectralBounds,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralProfile {
    pub field: String,
    pub q: u32,
    pub d: usize,
    pub set_name: String,
    pub set_size: usize,
    pub records: Vec<ProfileRecord>,
}

pub fn spectral_profile(table: &FourierTable, set_name: &str, p_grid: &[f64]) -> Result<SpectralProfile> {
    for &p in p_grid {
        check_exponent(p)?;
    }
    if p_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("p grid must be sorted".into()));
    }
    let size = table.ambient().size();
    let card = table.set_size();
    let records = p_grid
        .iter()
        .map(|&p| {
            let lp = lp_norm(table, p)?;
            Ok(ProfileRecord {
                p,
                lp_norm: lp,
                s_emp: salem_exponent_from(lp, size, card).ok(),
                bounds: spectral_bounds(size, card, p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralProfile {
        field: table.ambient().field().spec(),
        q: table.ambient().field().q(),
        d: table.ambient().d(),
        set_name: set_name.to_owned(),
        set_size: card,
        records,
    })
}

/// Formats an exponent or a measurement; infinities become "inf".
pub fn format_real(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

fn format_opt(x: Option<f64>) -> String {
    x.map(format_real).unwrap_or_default()
}

/// Parses "2,4,8,inf".
pub fn parse_p_grid(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            let p = match t {
                "inf" | "infinity" | "∞" => f64::INFINITY,
                _ => t.parse::<f64>().map_err(|_| Error::InvalidParameter(format!("bad exponent {t:?}")))?,
            };
            check_exponent(p)?;
            Ok(p)
        })
        .collect()
}

pub const PROFILE_HEADER: [&str; 10] =
    ["field", "d", "set_name", "set_size", "p", "lp_norm", "s_emp", "bound_trivial", "bound_interp", "bound_lower"];

pub fn write_profiles_csv<W: Write>(out: W, profiles: &[SpectralProfile]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PROFILE_HEADER)?;
    for prof in profiles {
        for r in &prof.records {
            w.write_record([
                prof.field.clone(),
                prof.d.to_string(),
                prof.set_name.clone(),
                prof.set_size.to_string(),
                format_real(r.p),
                format_real(r.lp_norm),
                format_opt(r.s_emp),
                format_real(r.bounds.trivial),
                format_opt(r.bounds.interpolation),
                format_opt(r.bounds.lower),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
