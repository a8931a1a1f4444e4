//! Example sets in F_q^d together with the Salem exponent predicted for them.

mod poly;
mod recipe;

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::FieldElement;
use crate::lattice::{Ambient, PointSet};

pub use poly::{rank, IntPoly};
pub use recipe::{build, parse_recipe, Recipe, Value};

/// Predicted s(p) such that ‖Ê‖_p ≈ q^{-d} (#E)^{1-s(p)}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SalemPrediction {
    /// s = 1/2 for every p
    Salem,
    /// s = (d-2)/(2(d-1)) + 1/(p(d-1))
    SphereZero { d: usize },
    /// s = (p(d-2)+2)/(2p(d-1))
    Cone { d: usize },
    /// s = (2+(d-2)p)/(2p(d-1))
    Cylinder { d: usize },
    /// s = n/p
    Flat { n: usize },
    /// s = min(1/2, n/p)
    CurveRank { n: usize },
    /// s = 1 - k/d + k/(pd)
    Complement { k: usize, d: usize },
}

impl SalemPrediction {
    pub fn at(&self, p: f64) -> f64 {
        let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
        match *self {
            SalemPrediction::Salem => 0.5,
            // The three families share one formula: (d-2)/(2(d-1)) + 1/(p(d-1)).
            SalemPrediction::SphereZero { d } | SalemPrediction::Cone { d } | SalemPrediction::Cylinder { d } => {
                let d = d as f64;
                (d - 2.0) / (2.0 * (d - 1.0)) + inv / (d - 1.0)
            }
            SalemPrediction::Flat { n } => n as f64 * inv,
            SalemPrediction::CurveRank { n } => (n as f64 * inv).min(0.5),
            SalemPrediction::Complement { k, d } => {
                let (k, d) = (k as f64, d as f64);
                1.0 - k / d + k * inv / d
            }
        }
    }
}

impl fmt::Display for SalemPrediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SalemPrediction::Salem => write!(f, "1/2"),
            SalemPrediction::SphereZero { d } => write!(f, "sphere0(d={d})"),
            SalemPrediction::Cone { d } => write!(f, "cone(d={d})"),
            SalemPrediction::Cylinder { d } => write!(f, "cylinder(d={d})"),
            SalemPrediction::Flat { n } => write!(f, "{n}/p"),
            SalemPrediction::CurveRank { n } => write!(f, "min(1/2,{n}/p)"),
            SalemPrediction::Complement { k, d } => write!(f, "1-{k}/{d}+{k}/({d}p)"),
        }
    }
}

/// A constructed set plus what is known about it.
#[derive(Clone, Debug)]
pub struct Built {
    pub set: PointSet,
    pub prediction: Option<SalemPrediction>,
    /// Caveats discovered while building (collapsed points, degenerate degrees, ...).
    pub notes: Vec<String>,
}

impl Built {
    fn plain(set: PointSet) -> Built {
        Built { set, prediction: None, notes: Vec::new() }
    }
}

fn odd(ambient: &Ambient) -> bool {
    ambient.field().p() != 2
}

fn sum_of_squares(ambient: &Ambient, x: usize, coords: std::ops::Range<usize>) -> FieldElement {
    let f = ambient.field();
    coords.fold(FieldElement::ZERO, |acc, i| {
        let c = ambient.coord(x, i);
        f.add(acc, f.mul(c, c))
    })
}

/// S_r^{d-1} = {y : |y|^2 = r}.
pub fn sphere(ambient: &Ambient, r: FieldElement) -> Built {
    let d = ambient.d();
    let set = PointSet::from_predicate(ambient, |x| sum_of_squares(ambient, x, 0..d) == r);
    let prediction = if !odd(ambient) {
        None
    } else if !r.is_zero() {
        Some(SalemPrediction::Salem)
    } else if d >= 3 || (d == 2 && ambient.field().minus_one_is_square()) {
        Some(SalemPrediction::SphereZero { d })
    } else {
        None
    };
    Built { set, prediction, notes: Vec::new() }
}

/// C^d = {z : z_1^2 + ... + z_{d-2}^2 = z_{d-1} z_d, z_d != 0}.
pub fn cone_c(ambient: &Ambient) -> Result<Built> {
    let d = ambient.d();
    if d < 3 {
        return Err(Error::InvalidParameter("cones need d >= 3".into()));
    }
    let f = ambient.field();
    let set = PointSet::from_predicate(ambient, |x| {
        let zd = ambient.coord(x, d - 1);
        !zd.is_zero() && sum_of_squares(ambient, x, 0..d - 2) == f.mul(ambient.coord(x, d - 2), zd)
    });
    Ok(Built { set, prediction: odd(ambient).then_some(SalemPrediction::Cone { d }), notes: Vec::new() })
}

/// D^d = {z : z_1^2 + ... + z_{d-1}^2 = z_d^2, z_d != 0}.
pub fn cone_d(ambient: &Ambient) -> Result<Built> {
    let d = ambient.d();
    if d < 3 {
        return Err(Error::InvalidParameter("cones need d >= 3".into()));
    }
    let f = ambient.field();
    let set = PointSet::from_predicate(ambient, |x| {
        let zd = ambient.coord(x, d - 1);
        !zd.is_zero() && sum_of_squares(ambient, x, 0..d - 1) == f.mul(zd, zd)
    });
    Ok(Built { set, prediction: odd(ambient).then_some(SalemPrediction::Cone { d }), notes: Vec::new() })
}

/// {y : y_1^2 + ... + y_{d-1}^2 = r}, i.e. S_r^{d-2} ⊕ F_q.
pub fn cylinder(ambient: &Ambient, r: FieldElement) -> Result<Built> {
    let d = ambient.d();
    if d < 3 {
        return Err(Error::InvalidParameter("cylinder needs d >= 3".into()));
    }
    if r.is_zero() {
        return Err(Error::InvalidParameter("cylinder radius must be nonzero".into()));
    }
    let set = PointSet::from_predicate(ambient, |x| sum_of_squares(ambient, x, 0..d - 1) == r);
    Ok(Built { set, prediction: odd(ambient).then_some(SalemPrediction::Cylinder { d }), notes: Vec::new() })
}

/// {z : z_1^2 + ... + z_{d-1}^2 = y z_d}; y = 1 in d = 2 is the parabola {(k, k^2)}.
pub fn paraboloid(ambient: &Ambient, y: FieldElement) -> Result<Built> {
    let d = ambient.d();
    if d < 2 {
        return Err(Error::InvalidParameter("paraboloid needs d >= 2".into()));
    }
    if y.is_zero() {
        return Err(Error::InvalidParameter("paraboloid scale must be nonzero".into()));
    }
    let f = ambient.field();
    let set = PointSet::from_predicate(ambient, |x| {
        sum_of_squares(ambient, x, 0..d - 1) == f.mul(y, ambient.coord(x, d - 1))
    });
    Ok(Built { set, prediction: odd(ambient).then_some(SalemPrediction::Salem), notes: Vec::new() })
}

/// {(k, ..., k) : k in F_q^n} ⊂ F_q^d with n | d.
pub fn diagonal(ambient: &Ambient, n: usize) -> Result<Built> {
    let d = ambient.d();
    if n == 0 || !d.is_multiple_of(n) {
        return Err(Error::InvalidParameter(format!("diagonal block n = {n} must divide d = {d}")));
    }
    let reps = d / n;
    let block = ambient.q().pow(n as u32);
    let set = PointSet::from_indices(ambient, (0..block).map(|k| (0..reps).map(|j| k * block.pow(j as u32)).sum()))?;
    Ok(Built { set, prediction: Some(SalemPrediction::Flat { n }), notes: Vec::new() })
}

/// {(k, ..., k, 1/k) : k in F_q^*}.
pub fn kloosterman_curve(ambient: &Ambient) -> Result<Built> {
    let d = ambient.d();
    if d < 2 {
        return Err(Error::InvalidParameter("Kloosterman curve needs d >= 2".into()));
    }
    let f = ambient.field();
    let mut set = PointSet::empty(ambient);
    for k in f.nonzero_elements() {
        let mut pt = vec![k; d];
        pt[d - 1] = f.inv(k)?;
        set.insert(ambient.encode_unchecked(&pt))?;
    }
    let prediction = if d == 2 { SalemPrediction::Salem } else { SalemPrediction::CurveRank { n: 2 } };
    Ok(Built { set, prediction: Some(prediction), notes: Vec::new() })
}

/// Dimension of the span of the polynomials modulo constants, over F_q.
pub fn curve_rank(ambient: &Ambient, polys: &[IntPoly]) -> usize {
    let f = ambient.field();
    let rows = polys
        .iter()
        .map(|p| {
            let mut c = p.field_coeffs(f);
            if !c.is_empty() {
                c[0] = FieldElement::ZERO;
            }
            c
        })
        .collect();
    rank(f, rows)
}

/// {(f_1(k), ..., f_d(k)) : k in F_q}.
pub fn polynomial_curve(ambient: &Ambient, polys: &[IntPoly]) -> Result<Built> {
    let d = ambient.d();
    if polys.len() != d {
        return Err(Error::InvalidParameter(format!("curve needs {d} polynomials, got {}", polys.len())));
    }
    let f = ambient.field();
    let mut set = PointSet::empty(ambient);
    for k in f.elements() {
        let pt: Vec<FieldElement> = polys.iter().map(|p| p.eval(f, k)).collect();
        set.insert(ambient.encode_unchecked(&pt))?;
    }
    let mut notes = Vec::new();
    if set.cardinality() < ambient.q() {
        notes.push(format!("curve is not injective: {} distinct points from q = {}", set.cardinality(), ambient.q()));
    }
    let p = f.p() as usize;
    for (i, poly) in polys.iter().enumerate() {
        if let Some(deg) = poly.degree() {
            if deg > 0 && deg % p == 0 {
                notes.push(format!("f_{} = {poly} has degree {deg} divisible by p = {p}", i + 1));
            }
        }
    }
    let n = curve_rank(ambient, polys);
    let prediction = match n {
        0 => None,
        n if n == d => Some(SalemPrediction::Salem),
        n => Some(SalemPrediction::CurveRank { n }),
    };
    Ok(Built { set, prediction, notes })
}

/// (k, k^2, ..., k^d)
pub fn veronese(ambient: &Ambient) -> Result<Built> {
    let polys: Vec<IntPoly> = (1..=ambient.d()).map(IntPoly::monomial).collect();
    polynomial_curve(ambient, &polys)
}

/// F_q^d \ (F_q^k × {0}).
pub fn subspace_complement(ambient: &Ambient, k: usize) -> Result<Built> {
    let d = ambient.d();
    if k == 0 || k >= d {
        return Err(Error::InvalidParameter(format!("need 1 <= k < d, got k = {k}, d = {d}")));
    }
    let block = ambient.q().pow(k as u32);
    let set = PointSet::from_predicate(ambient, |x| x >= block);
    Ok(Built { set, prediction: Some(SalemPrediction::Complement { k, d }), notes: Vec::new() })
}

/// E ⊕ F: the first k coordinates from E, the remaining d-k from F.
pub fn direct_sum(e: &PointSet, f: &PointSet) -> Result<PointSet> {
    if *e.ambient().field() != *f.ambient().field() {
        return Err(Error::AmbientMismatch(format!("{:?} vs {:?}", e.ambient(), f.ambient())));
    }
    let k = e.ambient().d();
    let ambient = Ambient::new(e.ambient().field_arc().clone(), k + f.ambient().d())?;
    let shift = e.ambient().size();
    let mut out = PointSet::empty(&ambient);
    for y in f.iter() {
        for x in e.iter() {
            out.insert(x + shift * y)?;
        }
    }
    Ok(out)
}

/// Target size ⌊q^α⌋ (with a small guard against round-off at exact powers).
pub fn random_set_size(ambient: &Ambient, alpha: f64) -> Result<usize> {
    let d = ambient.d() as f64;
    if !(alpha > 0.0 && alpha <= d) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must lie in (0, {d}]")));
    }
    let size = ((ambient.q() as f64).powf(alpha) + 1e-9).floor() as usize;
    Ok(size.min(ambient.size()))
}

/// A uniformly random subset of size ⌊q^α⌋, via reservoir sampling driven by ChaCha8.
pub fn random_set(ambient: &Ambient, alpha: f64, seed: u64) -> Result<PointSet> {
    let size = random_set_size(ambient, alpha)?;
    random_subset(ambient, size, seed)
}

pub fn random_subset(ambient: &Ambient, size: usize, seed: u64) -> Result<PointSet> {
    if size > ambient.size() {
        return Err(Error::InvalidParameter(format!("cannot pick {size} of {} points", ambient.size())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reservoir: Vec<usize> = (0..size).collect();
    for i in size..ambient.size() {
        let j = rng.gen_range(0..=i);
        if j < size {
            reservoir[j] = i;
        }
    }
    PointSet::from_indices(ambient, reservoir)
}

/// The set {x : x.y = 0 for all y in E'} built from an affine line E' inside a sphere.
#[derive(Clone, Debug)]
pub struct Annihilator {
    /// E' = {a + λ v}
    pub line: PointSet,
    /// E
    pub set: PointSet,
    /// span(a, v) = E^⊥, the support of Ê
    pub span: PointSet,
    /// |a|^2, the radius of the sphere containing E'
    pub t: FieldElement,
    pub base: usize,
    pub direction: usize,
}

/// Searches (in index order) for v != 0 with |v|^2 = 0 and a with a.v = 0, |a|^2 != 0;
/// then E' = a + F_q v lies in S_{|a|^2}.
pub fn annihilator_of_plane(ambient: &Ambient) -> Result<Annihilator> {
    if !odd(ambient) {
        return Err(Error::EvenField(ambient.field().q()));
    }
    let f = ambient.field();
    let n = ambient.size();
    let found = (1..n)
        .filter(|&v| ambient.norm_sq_idx(v).is_zero())
        .find_map(|v| {
            (1..n)
                .find(|&a| ambient.dot_idx(a, v).is_zero() && !ambient.norm_sq_idx(a).is_zero())
                .map(|a| (a, v))
        });
    let (a, v) = found.ok_or(Error::NoLineFound)?;
    let t = ambient.norm_sq_idx(a);
    let line = PointSet::from_indices(ambient, f.elements().map(|l| ambient.add_idx(a, ambient.scale_idx(l, v))))?;
    let set = PointSet::from_predicate(ambient, |x| ambient.dot_idx(x, a).is_zero() && ambient.dot_idx(x, v).is_zero());
    let span = PointSet::from_indices(
        ambient,
        f.elements()
            .flat_map(|mu| f.elements().map(move |l| (mu, l)))
            .map(|(mu, l)| ambient.add_idx(ambient.scale_idx(mu, a), ambient.scale_idx(l, v))),
    )?;
    Ok(Annihilator { line, set, span, t, base: a, direction: v })
}

/// Result of a Sidon test. A witness is x1 + x2 = x3 + x4 with {x1, x2} != {x3, x4}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SidonReport {
    pub is_sidon: bool,
    pub witness: Option<[usize; 4]>,
}

/// Every sum x + y (x, y in E) has exactly one unordered representation.
pub fn is_sidon(set: &PointSet) -> SidonReport {
    let a = set.ambient();
    let pts = set.indices();
    let mut seen: HashMap<usize, (usize, usize)> = HashMap::with_capacity(pts.len() * (pts.len() + 1) / 2);
    for (i, &x) in pts.iter().enumerate() {
        for &y in &pts[i..] {
            let s = a.add_idx(x, y);
            if let Some(&(u, v)) = seen.get(&s) {
                return SidonReport { is_sidon: false, witness: Some([u, v, x, y]) };
            }
            seen.insert(s, (x, y));
        }
    }
    SidonReport { is_sidon: true, witness: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{fourier_transform, lp_norm};

    fn amb(q: u64, d: usize) -> Ambient {
        Ambient::of_order(q, d).unwrap()
    }

    fn el(a: &Ambient, i: i64) -> FieldElement {
        a.field().from_int(i)
    }

    #[test]
    fn sphere_counts() {
        let a5 = amb(5, 2);
        assert_eq!(sphere(&a5, el(&a5, 1)).set.cardinality(), 4);
        assert_eq!(sphere(&a5, el(&a5, 0)).set.cardinality(), 9);
        let a7 = amb(7, 2);
        let s0 = sphere(&a7, el(&a7, 0));
        assert_eq!(s0.set.indices(), vec![0]);
        assert!(s0.prediction.is_none());
    }

    #[test]
    fn cone_counts() {
        let a = amb(5, 3);
        let d = cone_d(&a).unwrap().set;
        assert_eq!(d.cardinality(), 16);
        assert!(!d.contains_point(&a.point(&[1, 2, 0]).unwrap()));
        assert_eq!(cone_c(&a).unwrap().set.cardinality(), 20);
        assert!(cone_c(&amb(5, 2)).is_err());
    }

    #[test]
    fn cylinder_is_direct_sum() {
        let a = amb(5, 3);
        let cyl = cylinder(&a, el(&a, 1)).unwrap().set;
        assert_eq!(cyl.cardinality(), 20);
        let a2 = amb(5, 2);
        let line = PointSet::full(&amb(5, 1));
        let ds = direct_sum(&sphere(&a2, el(&a2, 1)).set, &line).unwrap();
        assert_eq!(ds, cyl);
        assert!(cylinder(&a, FieldElement::ZERO).is_err());
    }

    #[test]
    fn paraboloid_d2_is_parabola() {
        let a = amb(5, 2);
        let par = paraboloid(&a, FieldElement::ONE).unwrap().set;
        let want = PointSet::from_indices(&a, (0..5usize).map(|k| k + 5 * (k * k % 5))).unwrap();
        assert_eq!(par, want);
    }

    #[test]
    fn diagonal_and_support() {
        let a = amb(5, 2);
        let diag = diagonal(&a, 1).unwrap().set;
        assert_eq!(diag.indices(), vec![0, 6, 12, 18, 24]);
        assert!(diagonal(&a, 3).is_err());
        let a4 = amb(3, 4);
        let d2 = diagonal(&a4, 2).unwrap();
        assert_eq!(d2.set.cardinality(), 9);
        let t = fourier_transform(&d2.set);
        let support = t.values()[1..].iter().filter(|z| z.norm() > 1e-9).count();
        assert_eq!(support, 9 - 1);
    }

    #[test]
    fn kloosterman_curve_f5() {
        let a = amb(5, 2);
        let k = kloosterman_curve(&a).unwrap().set;
        assert_eq!(k.cardinality(), 4);
        let t = fourier_transform(&k);
        let bound = 2.0 * 5f64.sqrt() / 25.0;
        for z in 0..25 {
            if !a.coord(z, 0).is_zero() && !a.coord(z, 1).is_zero() {
                assert!(t.get(z).norm() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn curves_and_rank() {
        let a = amb(5, 2);
        let ver = veronese(&a).unwrap();
        assert_eq!(ver.set.cardinality(), 5);
        assert_eq!(ver.prediction, Some(SalemPrediction::Salem));
        let t = fourier_transform(&ver.set);
        assert!((lp_norm(&t, f64::INFINITY).unwrap() - 5f64.sqrt() / 25.0).abs() < 1e-12);
        let kk = [IntPoly::parse("k").unwrap(), IntPoly::parse("k").unwrap()];
        let c = polynomial_curve(&a, &kk).unwrap();
        assert_eq!(c.set, diagonal(&a, 1).unwrap().set);
        assert_eq!(c.prediction, Some(SalemPrediction::CurveRank { n: 1 }));
        let shifted = [IntPoly::parse("k").unwrap(), IntPoly::parse("1").unwrap()];
        assert_eq!(curve_rank(&a, &shifted), 1);
        let sq = [IntPoly::parse("k^2").unwrap(), IntPoly::parse("k^4").unwrap()];
        let c = polynomial_curve(&a, &sq).unwrap();
        assert!(c.notes.iter().any(|n| n.contains("not injective")));
        let deg5 = [IntPoly::parse("k").unwrap(), IntPoly::parse("k^5").unwrap()];
        assert!(polynomial_curve(&a, &deg5).unwrap().notes.iter().any(|n| n.contains("divisible by p")));
    }

    #[test]
    fn complement_spectrum() {
        let a = amb(3, 2);
        let e = subspace_complement(&a, 1).unwrap().set;
        assert_eq!(e.cardinality(), 6);
        let t = fourier_transform(&e);
        let z = a.encode(&a.point(&[0, 1]).unwrap()).unwrap();
        assert!((t.get(z).norm() - 1.0 / 3.0).abs() < 1e-12);
        let support = t.values()[1..].iter().filter(|z| z.norm() > 1e-9).count();
        assert_eq!(support, 2);
    }

    #[test]
    fn direct_sum_small() {
        let a1 = amb(5, 1);
        let o = PointSet::from_indices(&a1, [0]).unwrap();
        assert_eq!(direct_sum(&o, &o).unwrap().indices(), vec![0]);
        let a2 = amb(5, 2);
        let s = sphere(&a2, el(&a2, 1)).set;
        let ds = direct_sum(&s, &o).unwrap();
        assert_eq!(ds.cardinality(), 4);
        let t = fourier_transform(&ds);
        for z in 0..25 {
            for w in 1..5 {
                assert!((t.get(z) - t.get(z + 25 * w)).norm() < 1e-12);
            }
        }
        let other = PointSet::full(&amb(7, 1));
        assert!(direct_sum(&s, &other).is_err());
    }

    #[test]
    fn random_sets() {
        let a = amb(9, 1);
        assert_eq!(random_set(&a, 0.5, 1).unwrap().cardinality(), 3);
        let b = amb(7, 2);
        assert_eq!(random_set(&b, 1.0, 42).unwrap(), random_set(&b, 1.0, 42).unwrap());
        assert_ne!(random_set(&b, 1.0, 42).unwrap(), random_set(&b, 1.0, 43).unwrap());
        assert!(random_set(&b, 0.0, 1).is_err());
        assert!(random_set(&b, 2.5, 1).is_err());
        assert_eq!(random_set(&b, 2.0, 1).unwrap().cardinality(), 49);
    }

    #[test]
    fn annihilator_f5() {
        let a = amb(5, 3);
        let ann = annihilator_of_plane(&a).unwrap();
        assert!(!ann.t.is_zero());
        assert_eq!(ann.line.cardinality(), 5);
        assert!(ann.line.iter().all(|x| a.norm_sq_idx(x) == ann.t));
        assert_eq!(ann.set.cardinality(), 5);
        assert_eq!(ann.span.cardinality(), 25);
        assert!(matches!(annihilator_of_plane(&amb(4, 3)), Err(Error::EvenField(4))));
    }

    #[test]
    fn sidon_examples() {
        let a = amb(5, 2);
        let par = paraboloid(&a, FieldElement::ONE).unwrap().set;
        assert!(is_sidon(&par).is_sidon);
        let diag = diagonal(&a, 1).unwrap().set;
        let rep = is_sidon(&diag);
        assert!(!rep.is_sidon);
        let [x1, x2, x3, x4] = rep.witness.unwrap();
        assert_eq!(a.add_idx(x1, x2), a.add_idx(x3, x4));
        let single = PointSet::from_indices(&a, [7]).unwrap();
        assert!(is_sidon(&single).is_sidon);
        let a4 = amb(4, 2);
        let two = PointSet::from_indices(&a4, [1, 2]).unwrap();
        assert!(!is_sidon(&two).is_sidon);
    }
}
