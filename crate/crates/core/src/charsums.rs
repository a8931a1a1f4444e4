//! Direct evaluation of additive character sums S_f(z) = sum_x chi(z . f(x)), including
//! Kloosterman and Weil sums, their L^p moments, and their link to set spectra.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::{kloosterman_curve, polynomial_curve, IntPoly};
use crate::error::{Error, Result};
use crate::geometry::sumset;
use crate::gf::{Field, FieldElement};
use crate::lattice::{Ambient, PointSet};
use crate::spectrum::{fourier_transform, lp_of_values};

/// The map f whose image is summed over.
#[derive(Clone, Debug)]
pub enum Phase {
    /// x -> (f_1(x), ..., f_d(x)) on F_q.
    Polynomial(Vec<IntPoly>),
    /// x -> (x, ..., x, 1/x) on F_q^*.
    Kloosterman,
    /// The Kloosterman map extended to F_q by f(0) = 0.
    KloostermanExtended,
}

impl Phase {
    fn check(&self, a: &Ambient) -> Result<()> {
        match self {
            Phase::Polynomial(ps) if ps.len() != a.d() => {
                Err(Error::InvalidParameter(format!("{} components for d = {}", ps.len(), a.d())))
            }
            Phase::Kloosterman | Phase::KloostermanExtended if a.d() < 2 => {
                Err(Error::InvalidParameter("Kloosterman phase needs d >= 2".into()))
            }
            _ => Ok(()),
        }
    }

    /// f(x) for every x in the domain, ascending in x.
    pub fn images(&self, a: &Ambient) -> Result<Vec<Vec<FieldElement>>> {
        self.check(a)?;
        let f = a.field();
        let d = a.d();
        Ok(match self {
            Phase::Polynomial(ps) => f.elements().map(|x| ps.iter().map(|p| p.eval(f, x)).collect()).collect(),
            Phase::Kloosterman | Phase::KloostermanExtended => {
                let mut out = Vec::new();
                if matches!(self, Phase::KloostermanExtended) {
                    out.push(vec![FieldElement::ZERO; d]);
                }
                for x in f.nonzero_elements() {
                    let mut pt = vec![x; d];
                    pt[d - 1] = f.inv(x)?;
                    out.push(pt);
                }
                out
            }
        })
    }
}

fn dot(f: &Field, z: &[FieldElement], y: &[FieldElement]) -> FieldElement {
    z.iter().zip(y).fold(FieldElement::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b)))
}

fn sum_over(f: &Field, z: &[FieldElement], images: &[Vec<FieldElement>]) -> Complex64 {
    images.iter().map(|y| f.chi(dot(f, z, y))).sum()
}

/// S_f(z), summed directly over the domain of f.
pub fn char_sum(a: &Ambient, phase: &Phase, z: &[FieldElement]) -> Result<Complex64> {
    if z.len() != a.d() {
        return Err(Error::InvalidParameter(format!("point has {} coordinates, d = {}", z.len(), a.d())));
    }
    Ok(sum_over(a.field(), z, &phase.images(a)?))
}

/// K(a, b) = sum_{x != 0} chi(a x + b / x)
pub fn kloosterman(f: &Field, a: FieldElement, b: FieldElement) -> Complex64 {
    f.nonzero_elements()
        .map(|x| f.chi(f.add(f.mul(a, x), f.mul(b, f.inv(x).expect("x is nonzero")))))
        .sum()
}

/// W(a, b) = sum_x chi(a x + b x^2)
pub fn weil(f: &Field, a: FieldElement, b: FieldElement) -> Complex64 {
    f.elements().map(|x| f.chi(f.add(f.mul(a, x), f.mul(b, f.mul(x, x))))).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    General,
    Kloosterman,
    Weil,
}

impl GridKind {
    /// c in the moment check ‖S‖_4 <= c sqrt(q).
    pub fn l4_constant(self) -> Option<f64> {
        match self {
            GridKind::General => None,
            GridKind::Kloosterman => Some(3.0),
            GridKind::Weil => Some(2.0),
        }
    }
}

/// S(z) for every z in F_q^d, indexed like the ambient.
#[derive(Clone, Debug)]
pub struct CharSumGrid {
    pub kind: GridKind,
    pub ambient: Ambient,
    pub values: Vec<Complex64>,
}

pub fn char_sum_grid(a: &Ambient, phase: &Phase) -> Result<CharSumGrid> {
    let images = phase.images(a)?;
    let f = a.field();
    let values = (0..a.size()).into_par_iter().map(|z| sum_over(f, &a.decode(z), &images)).collect();
    Ok(CharSumGrid { kind: GridKind::General, ambient: a.clone(), values })
}

fn pair_grid(f: &Field, kind: GridKind, g: impl Fn(FieldElement, FieldElement) -> Complex64 + Sync) -> Result<CharSumGrid> {
    let a = Ambient::new(std::sync::Arc::new(f.clone()), 2)?;
    let q = a.q();
    let values = (0..a.size())
        .into_par_iter()
        .map(|z| {
            let x = FieldElement::from_index_unchecked((z % q) as u32);
            let y = FieldElement::from_index_unchecked((z / q) as u32);
            g(x, y)
        })
        .collect();
    Ok(CharSumGrid { kind, ambient: a, values })
}

/// K(a, b) at index a + q b.
pub fn kloosterman_grid(f: &Field) -> Result<CharSumGrid> {
    pair_grid(f, GridKind::Kloosterman, |a, b| kloosterman(f, a, b))
}

/// W(a, b) at index a + q b.
pub fn weil_grid(f: &Field) -> Result<CharSumGrid> {
    pair_grid(f, GridKind::Weil, |a, b| weil(f, a, b))
}

/// (q^{-d} sum_{z != 0} |S(z)|^p)^{1/p}, the sup over z != 0 for p = inf.
pub fn charsum_lp(grid: &CharSumGrid, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    Ok(lp_of_values(&grid.values, grid.ambient.size(), p))
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentSummary {
    pub kind: GridKind,
    pub field: String,
    pub p: f64,
    pub value: f64,
    /// c sqrt(q) for the Kloosterman and Weil grids
    pub bound: Option<f64>,
    pub ratio: Option<f64>,
}

pub fn moment_summary(grid: &CharSumGrid, p: f64) -> Result<MomentSummary> {
    let value = charsum_lp(grid, p)?;
    let bound = grid.kind.l4_constant().map(|c| c * (grid.ambient.q() as f64).sqrt());
    Ok(MomentSummary {
        kind: grid.kind,
        field: grid.ambient.field().spec(),
        p,
        value,
        bound,
        ratio: bound.map(|b| value / b),
    })
}

pub fn write_grid_csv<W: Write>(out: W, grid: &CharSumGrid) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let q = grid.ambient.q();
    let pair = grid.ambient.d() == 2;
    if pair {
        w.write_record(["a", "b", "re", "im", "abs"])?;
    } else {
        w.write_record(["z", "re", "im", "abs"])?;
    }
    for (z, v) in grid.values.iter().enumerate() {
        let tail = [v.re.to_string(), v.im.to_string(), v.norm().to_string()];
        if pair {
            w.write_record([(z % q).to_string(), (z / q).to_string()].iter().chain(&tail))?;
        } else {
            w.write_record(std::iter::once(&z.to_string()).chain(&tail))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// max_z |q^d Ê(z) - conj(S_f(z))| where E is the image of f built by the set constructors.
#[derive(Clone, Debug, Serialize)]
pub struct LinkReport {
    pub image_size: usize,
    pub domain_size: usize,
    pub residual: f64,
}

pub fn spectrum_link(a: &Ambient, phase: &Phase) -> Result<LinkReport> {
    let set: PointSet = match phase {
        Phase::Polynomial(ps) => polynomial_curve(a, ps)?.set,
        Phase::Kloosterman => kloosterman_curve(a)?.set,
        Phase::KloostermanExtended => {
            let mut s = kloosterman_curve(a)?.set;
            s.insert(0)?;
            s
        }
    };
    let domain_size = phase.images(a)?.len();
    if set.cardinality() != domain_size {
        return Err(Error::NotInjective(format!("{} points from a domain of {domain_size}", set.cardinality())));
    }
    let table = fourier_transform(&set);
    let grid = char_sum_grid(a, phase)?;
    let n = a.size() as f64;
    let residual = table
        .values()
        .iter()
        .zip(&grid.values)
        .map(|(e, s)| (e * n - s.conj()).norm())
        .fold(0.0, f64::max);
    Ok(LinkReport { image_size: set.cardinality(), domain_size, residual })
}

/// q^{-d} sum_z |S(z)|^2 against #{(x, x') : f(x) = f(x')}.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ParsevalReport {
    pub energy: f64,
    pub collisions: u64,
    pub residual: f64,
}

pub fn parseval_check(a: &Ambient, phase: &Phase) -> Result<ParsevalReport> {
    let images = phase.images(a)?;
    let grid = char_sum_grid(a, phase)?;
    let energy = grid.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / a.size() as f64;
    let mut counts = vec![0u64; a.size()];
    for y in &images {
        counts[a.encode(y)?] += 1;
    }
    let collisions = counts.iter().map(|c| c * c).sum::<u64>();
    Ok(ParsevalReport { energy, collisions, residual: (energy - collisions as f64).abs() })
}

/// A pair (u, v) of the extended Kloosterman image whose fiber count differs from 1, 2 or q as expected.
#[derive(Clone, Debug, Serialize)]
pub struct FiberException {
    pub u: usize,
    pub v: usize,
    pub fiber: u64,
    pub expected: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KloostermanReport {
    pub field: String,
    pub pairs_checked: usize,
    /// pairs ab != 0 with |K(a, b)| > 2 sqrt(q)
    pub violations: usize,
    /// max |K(a, b)| / (2 sqrt(q)) over ab != 0
    pub max_ratio: f64,
    /// K(0, 0)
    pub k00: f64,
    /// ordered pairs (u, v) of E = {(x, 1/x)} ∪ {0} in F_q^2
    pub fiber_pairs: usize,
    /// pairs whose fiber count is not 1 (u = v), q (u + v = 0) or 2 (otherwise); None for even q
    pub fiber_exceptions: Option<Vec<FiberException>>,
}

/// Exhaustive check of |K(a, b)| <= 2 sqrt(q) and of the fiber counts of E + E.
pub fn kloosterman_pointwise_check(f: &Field) -> Result<KloostermanReport> {
    let grid = kloosterman_grid(f)?;
    let q = f.q() as usize;
    let bound = 2.0 * (q as f64).sqrt();
    let mut pairs = 0;
    let mut violations = 0;
    let mut max_ratio = 0.0f64;
    for (z, v) in grid.values.iter().enumerate() {
        if z % q == 0 || z / q == 0 {
            continue;
        }
        pairs += 1;
        let r = v.norm() / bound;
        max_ratio = max_ratio.max(r);
        if v.norm() > bound + 1e-9 {
            violations += 1;
        }
    }
    let a = &grid.ambient;
    let mut e = kloosterman_curve(a)?.set;
    e.insert(0)?;
    let pts = e.indices();
    let exceptions = if f.p() == 2 {
        None
    } else {
        let fibers = sumset(&[&e, &e])?.fibers;
        let mut out = Vec::new();
        for &u in &pts {
            for &v in &pts {
                let s = a.add_idx(u, v);
                let expected = if s == 0 {
                    q as u64
                } else if u == v {
                    1
                } else {
                    2
                };
                if fibers[s] != expected {
                    out.push(FiberException { u, v, fiber: fibers[s], expected });
                }
            }
        }
        Some(out)
    };
    Ok(KloostermanReport {
        field: f.spec(),
        pairs_checked: pairs,
        violations,
        max_ratio,
        k00: grid.values[0].re,
        fiber_pairs: pts.len() * pts.len(),
        fiber_exceptions: exceptions,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WeilReport {
    pub field: String,
    /// z whose phase z . f has degree n >= 1 with p not dividing n
    pub checked: usize,
    /// z whose phase has degree divisible by p; reported, not asserted
    pub flagged: usize,
    /// z with constant phase
    pub constant: usize,
    pub violations: usize,
    /// max |S(z)| / ((n - 1) sqrt(q)) over checked z with n >= 2
    pub max_ratio: f64,
}

/// Exhaustive check of |S_f(z)| <= (n - 1) sqrt(q), n the degree of x -> z . f(x).
pub fn weil_pointwise_check(a: &Ambient, polys: &[IntPoly]) -> Result<WeilReport> {
    let phase = Phase::Polynomial(polys.to_vec());
    let grid = char_sum_grid(a, &phase)?;
    let f = a.field();
    let coeffs: Vec<Vec<FieldElement>> = polys.iter().map(|p| p.field_coeffs(f)).collect();
    let len = coeffs.iter().map(|c| c.len()).max().unwrap_or(0);
    let p = f.p() as usize;
    let sq = (a.q() as f64).sqrt();
    let mut report =
        WeilReport { field: f.spec(), checked: 0, flagged: 0, constant: 0, violations: 0, max_ratio: 0.0 };
    for (z, s) in grid.values.iter().enumerate() {
        let zc = a.decode(z);
        let combined: Vec<FieldElement> = (0..len)
            .map(|j| {
                zc.iter().zip(&coeffs).fold(FieldElement::ZERO, |acc, (&zi, c)| {
                    f.add(acc, f.mul(zi, c.get(j).copied().unwrap_or(FieldElement::ZERO)))
                })
            })
            .collect();
        let n = (1..len).rev().find(|&j| !combined[j].is_zero());
        match n {
            None => report.constant += 1,
            Some(n) if n % p == 0 => report.flagged += 1,
            Some(n) => {
                report.checked += 1;
                let bound = (n as f64 - 1.0) * sq;
                if s.norm() > bound + 1e-6 {
                    report.violations += 1;
                }
                if n >= 2 {
                    report.max_ratio = report.max_ratio.max(s.norm() / bound);
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn el(f: &Field, i: i64) -> FieldElement {
        f.from_int(i)
    }

    #[test]
    fn small_values() {
        let f = Field::prime(5).unwrap();
        let k = kloosterman(&f, el(&f, 1), el(&f, 1));
        let want = 2.0 + 2.0 * (4.0 * std::f64::consts::PI / 5.0).cos();
        assert!((k.re - want).abs() < 1e-12 && k.im.abs() < 1e-12);
        assert!((weil(&f, el(&f, 0), el(&f, 1)).norm() - 5f64.sqrt()).abs() < 1e-12);
        for a in 1..5 {
            assert!(weil(&f, el(&f, a), el(&f, 0)).norm() < 1e-12);
        }
        assert!((kloosterman(&f, el(&f, 0), el(&f, 0)).re - 4.0).abs() < 1e-12);
    }

    #[test]
    fn grids_and_moments() {
        let f = Field::prime(7).unwrap();
        let g = kloosterman_grid(&f).unwrap();
        assert!(g.values.iter().all(|v| v.norm() <= 7.0 + 1e-9));
        // K(a, b) at index a + 7b
        let direct = kloosterman(&f, el(&f, 3), el(&f, 2));
        assert!((g.values[3 + 14] - direct).norm() < 1e-12);
        let m = moment_summary(&g, 4.0).unwrap();
        assert!(m.ratio.unwrap() <= 1.0);
        let w = moment_summary(&weil_grid(&f).unwrap(), 4.0).unwrap();
        assert!(w.ratio.unwrap() <= 1.0);
        assert!(charsum_lp(&g, 0.5).is_err());
        let mut buf = Vec::new();
        write_grid_csv(&mut buf, &g).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "a,b,re,im,abs");
        assert_eq!(text.lines().count(), 50);
    }

    #[test]
    fn weil_grid_is_the_parabola_sum() {
        let a = Ambient::of_order(9, 2).unwrap();
        let phase = Phase::Polynomial(vec![IntPoly::monomial(1), IntPoly::monomial(2)]);
        let g = char_sum_grid(&a, &phase).unwrap();
        let w = weil_grid(a.field()).unwrap();
        for (x, y) in g.values.iter().zip(&w.values) {
            assert!((x - y).norm() < 1e-9);
        }
    }

    #[test]
    fn links_to_spectra() {
        for q in [5, 8, 9] {
            let a = Ambient::of_order(q, 2).unwrap();
            let par = Phase::Polynomial(vec![IntPoly::monomial(1), IntPoly::monomial(2)]);
            assert!(spectrum_link(&a, &par).unwrap().residual < 1e-9);
            assert!(spectrum_link(&a, &Phase::Kloosterman).unwrap().residual < 1e-9);
            assert!(spectrum_link(&a, &Phase::KloostermanExtended).unwrap().residual < 1e-9);
        }
        let a = Ambient::of_order(5, 2).unwrap();
        let sq = Phase::Polynomial(vec![IntPoly::monomial(2), IntPoly::monomial(4)]);
        assert!(matches!(spectrum_link(&a, &sq), Err(Error::NotInjective(_))));
    }

    #[test]
    fn extension_adds_one() {
        let a = Ambient::of_order(7, 2).unwrap();
        let k = char_sum_grid(&a, &Phase::Kloosterman).unwrap();
        let s = char_sum_grid(&a, &Phase::KloostermanExtended).unwrap();
        for (x, y) in k.values.iter().zip(&s.values) {
            assert!((y - x - 1.0).norm() < 1e-9);
        }
    }

    #[test]
    fn parseval_counts_collisions() {
        let a = Ambient::of_order(5, 2).unwrap();
        let sq = Phase::Polynomial(vec![IntPoly::monomial(2), IntPoly::monomial(4)]);
        let r = parseval_check(&a, &sq).unwrap();
        // x and -x collide for x != 0
        assert_eq!(r.collisions, 1 + 4 * 2);
        assert!(r.residual < 1e-9);
    }

    #[test]
    fn kloosterman_report() {
        let r = kloosterman_pointwise_check(&Field::prime(5).unwrap()).unwrap();
        assert_eq!(r.pairs_checked, 16);
        assert_eq!(r.violations, 0);
        assert!((r.k00 - 4.0).abs() < 1e-12);
        assert_eq!(r.fiber_pairs, 25);
        let e = r.fiber_exceptions.unwrap();
        // u + v = 0 always has fiber q
        assert!(e.iter().all(|x| x.expected != 5));
        assert!(kloosterman_pointwise_check(&Field::of_order(8).unwrap()).unwrap().fiber_exceptions.is_none());
    }

    #[test]
    fn weil_report() {
        let a = Ambient::of_order(7, 3).unwrap();
        let polys: Vec<IntPoly> = (1..=3).map(IntPoly::monomial).collect();
        let r = weil_pointwise_check(&a, &polys).unwrap();
        assert_eq!(r.violations, 0);
        assert_eq!(r.constant, 1);
        assert_eq!(r.checked + r.flagged + r.constant, 343);
        let a3 = Ambient::of_order(3, 2).unwrap();
        let r3 = weil_pointwise_check(&a3, &[IntPoly::monomial(1), IntPoly::monomial(3)]).unwrap();
        assert_eq!(r3.flagged, 6);
    }
}
