//! Sumsets, difference and direction sets, distance sets, spherical averages of |Ê|^2,
//! and congruence censuses of simplices.

use std::collections::HashSet;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::is_sidon;
use crate::error::{Error, Result};
use crate::gf::FieldElement;
use crate::lattice::{Ambient, PointSet};
use crate::numeric::CompensatedSum;
use crate::spectrum::{fourier_transform, lp_norm, salem_exponent_from, FourierTable};

/// E_1 + ... + E_k with the fiber counts f(z) = #{(x_1..x_k) : x_i in E_i, sum x_i = z}.
#[derive(Clone, Debug)]
pub struct Sumset {
    pub set: PointSet,
    pub fibers: Vec<u64>,
}

impl Sumset {
    /// sum_z f(z)^2
    pub fn fiber_energy(&self) -> u128 {
        self.fibers.iter().map(|&f| f as u128 * f as u128).sum()
    }
}

pub fn sumset(sets: &[&PointSet]) -> Result<Sumset> {
    let first = sets.first().ok_or_else(|| Error::InvalidParameter("sumset of no sets".into()))?;
    let a = first.ambient();
    for s in &sets[1..] {
        a.check(s.ambient())?;
    }
    let mut counts = vec![0u64; a.size()];
    for x in first.iter() {
        counts[x] = 1;
    }
    for s in &sets[1..] {
        let pts = s.indices();
        let mut next = vec![0u64; a.size()];
        for (z, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &y in &pts {
                next[a.add_idx(z, y)] += c;
            }
        }
        counts = next;
    }
    let set = PointSet::from_predicate(a, |z| counts[z] != 0);
    Ok(Sumset { set, fibers: counts })
}

/// E - E
pub fn difference_set(set: &PointSet) -> PointSet {
    let a = set.ambient();
    let pts = set.indices();
    let mut out = PointSet::empty(a);
    for &x in &pts {
        for &y in &pts {
            out.insert(a.sub_idx(x, y)).expect("difference lies in the ambient");
        }
    }
    out
}

/// Scales a nonzero point so its first nonzero coordinate is 1.
fn normalize_direction(a: &Ambient, z: usize) -> usize {
    let f = a.field();
    let lead = (0..a.d()).map(|i| a.coord(z, i)).find(|c| !c.is_zero()).expect("nonzero point");
    a.scale_idx(f.inv(lead).expect("lead is nonzero"), z)
}

/// Number of one-dimensional subspaces spanned by nonzero differences of E.
pub fn direction_count(set: &PointSet) -> usize {
    let a = set.ambient();
    let diff = difference_set(set);
    let mut dirs = PointSet::empty(a);
    for z in diff.iter().filter(|&z| z != 0) {
        dirs.insert(normalize_direction(a, z)).expect("in range");
    }
    dirs.cardinality()
}

/// D(E) = {|x - y|^2 : x, y in E}, ascending.
pub fn distance_set(set: &PointSet) -> Vec<FieldElement> {
    let a = set.ambient();
    let diff = difference_set(set);
    let mut seen = vec![false; a.q()];
    for z in diff.iter() {
        seen[a.norm_sq_idx(z).index() as usize] = true;
    }
    seen.iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(t, _)| a.field().element(t as u32).expect("t < q"))
        .collect()
}

/// #{m : |m|^2 = t} for every t.
pub fn sphere_sizes(a: &Ambient) -> Vec<usize> {
    let mut sizes = vec![0usize; a.q()];
    for m in 0..a.size() {
        sizes[a.norm_sq_idx(m).index() as usize] += 1;
    }
    sizes
}

/// energy(t) = sum over m != 0 with |m|^2 = t of |Ê(m)|^2.
#[derive(Clone, Debug, Serialize)]
pub struct SphericalEnergy {
    pub q: usize,
    pub d: usize,
    pub set_size: usize,
    pub energy: Vec<f64>,
    /// #S_t, counting every m with |m|^2 = t (the origin included for t = 0).
    pub sphere_sizes: Vec<usize>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LemmaCheck {
    /// energy(0)^2 + sum_{t != 0} energy(t)^2
    pub lhs: f64,
    /// max_t #S_t * q^d * ‖Ê‖_4^4
    pub rhs: f64,
    pub holds: bool,
}

pub fn spherical_energy(table: &FourierTable) -> SphericalEnergy {
    let a = table.ambient();
    let mut acc = vec![CompensatedSum::new(); a.q()];
    let mut sizes = vec![0usize; a.q()];
    for m in 0..a.size() {
        let t = a.norm_sq_idx(m).index() as usize;
        sizes[t] += 1;
        if m != 0 {
            acc[t].add(table.get(m).norm_sqr());
        }
    }
    SphericalEnergy {
        q: a.q(),
        d: a.d(),
        set_size: table.set_size(),
        energy: acc.iter().map(|s| s.value()).collect(),
        sphere_sizes: sizes,
    }
}

impl SphericalEnergy {
    fn n(&self) -> f64 {
        (self.q as f64).powi(self.d as i32)
    }

    /// sum_t energy(t); equals sum_{m != 0} |Ê(m)|^2.
    pub fn total(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for &e in &self.energy {
            s.add(e);
        }
        s.value()
    }

    /// energy(0)^2 + sum_{t != 0} energy(t)^2
    pub fn squared_sum(&self) -> f64 {
        let mut s = CompensatedSum::new();
        for &e in &self.energy {
            s.add(e * e);
        }
        s.value()
    }

    /// M(E) = q^{3d+1} / #E^4 * sum_{t != 0} energy(t)^2
    pub fn mattila(&self) -> Result<f64> {
        if self.set_size == 0 {
            return Err(Error::TooFewPoints { needed: 1, found: 0 });
        }
        let mut s = CompensatedSum::new();
        for &e in &self.energy[1..] {
            s.add(e * e);
        }
        let e4 = (self.set_size as f64).powi(4);
        Ok(self.n().powi(3) * self.q as f64 / e4 * s.value())
    }

    /// max over t != 0 of energy(t)
    pub fn gensalem_max(&self) -> f64 {
        self.energy[1..].iter().copied().fold(0.0, f64::max)
    }

    /// q^eps * q^{-3d/2-1} * #E^2
    pub fn gensalem_threshold(&self, eps: f64) -> f64 {
        let q = self.q as f64;
        q.powf(eps) * q.powf(-1.5 * self.d as f64 - 1.0) * (self.set_size as f64).powi(2)
    }

    /// Cauchy-Schwarz on each sphere: energy(t)^2 <= #S_t * sum_{S_t \ 0} |Ê|^4.
    pub fn lemma_check(&self, l4: f64) -> LemmaCheck {
        let lhs = self.squared_sum();
        let max_sphere = *self.sphere_sizes.iter().max().unwrap_or(&0) as f64;
        let rhs = max_sphere * self.n() * l4.powi(4);
        LemmaCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-12) }
    }
}

/// Side-by-side distance counts and the lower bounds they are compared with.
#[derive(Clone, Debug, Serialize)]
pub struct DistanceReport {
    pub field: String,
    pub d: usize,
    pub set_size: usize,
    pub distance_count: usize,
    pub mattila: f64,
    /// min(q, q / M(E)); q when M(E) = 0
    pub mattila_bound: f64,
    pub s_emp4: Option<f64>,
    /// min(q, q^{1-d} #E^{4 s_emp(4)})
    pub salem_bound: Option<f64>,
    pub ratio_mattila: f64,
    pub ratio_salem: Option<f64>,
}

pub fn distance_bound_report(set: &PointSet) -> Result<DistanceReport> {
    let a = set.ambient();
    if a.field().p() == 2 {
        return Err(Error::EvenField(a.field().q()));
    }
    let q = a.q() as f64;
    let table = fourier_transform(set);
    let en = spherical_energy(&table);
    let m = en.mattila()?;
    let mattila_bound = if m == 0.0 { q } else { q.min(q / m) };
    let count = distance_set(set).len();
    let s4 = salem_exponent_from(lp_norm(&table, 4.0)?, a.size(), set.cardinality()).ok();
    let salem_bound = s4.map(|s| {
        let b = q.powf(1.0 - a.d() as f64) * (set.cardinality() as f64).powf(4.0 * s);
        if b.is_nan() {
            q
        } else {
            q.min(b)
        }
    });
    Ok(DistanceReport {
        field: a.field().spec(),
        d: a.d(),
        set_size: set.cardinality(),
        distance_count: count,
        mattila: m,
        mattila_bound,
        s_emp4: s4,
        salem_bound,
        ratio_mattila: count as f64 / mattila_bound,
        ratio_salem: salem_bound.map(|b| count as f64 / b),
    })
}

pub const DISTANCE_HEADER: [&str; 10] = [
    "field",
    "d",
    "set_size",
    "distance_count",
    "mattila",
    "mattila_bound",
    "s_emp4",
    "salem_bound",
    "ratio_mattila",
    "ratio_salem",
];

fn opt(x: Option<f64>) -> String {
    x.map(crate::spectrum::format_real).unwrap_or_default()
}

pub fn write_distance_csv<W: Write>(out: W, rows: &[DistanceReport]) -> Result<()> {
    use crate::spectrum::format_real as fr;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(DISTANCE_HEADER)?;
    for r in rows {
        w.write_record([
            r.field.clone(),
            r.d.to_string(),
            r.set_size.to_string(),
            r.distance_count.to_string(),
            fr(r.mattila),
            fr(r.mattila_bound),
            opt(r.s_emp4),
            opt(r.salem_bound),
            fr(r.ratio_mattila),
            opt(r.ratio_salem),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// A d x d matrix over F_q, row-major.
pub type Matrix = Vec<FieldElement>;

/// All A with A^T A = I, found by choosing mutually orthogonal unit columns.
pub fn orthogonal_group(a: &Ambient) -> Vec<Matrix> {
    let f = a.field();
    let d = a.d();
    let units: Vec<usize> = (0..a.size()).filter(|&x| a.norm_sq_idx(x) == FieldElement::ONE).collect();
    let mut out = Vec::new();
    let mut cols: Vec<usize> = Vec::with_capacity(d);
    fn rec(a: &Ambient, units: &[usize], cols: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cols.len() == a.d() {
            out.push(cols.clone());
            return;
        }
        for &u in units {
            if cols.iter().all(|&c| a.dot_idx(c, u).is_zero()) {
                cols.push(u);
                rec(a, units, cols, out);
                cols.pop();
            }
        }
    }
    let mut col_sets = Vec::new();
    rec(a, &units, &mut cols, &mut col_sets);
    for cs in col_sets {
        let mut m = vec![FieldElement::ZERO; d * d];
        for (j, &c) in cs.iter().enumerate() {
            for i in 0..d {
                m[i * d + j] = a.coord(c, i);
            }
        }
        out.push(m);
    }
    let _ = f;
    out
}

/// A x
pub fn apply(a: &Ambient, m: &Matrix, x: usize) -> usize {
    let f = a.field();
    let d = a.d();
    let mut out = 0usize;
    let mut scale = 1usize;
    for i in 0..d {
        let mut acc = FieldElement::ZERO;
        for j in 0..d {
            acc = f.add(acc, f.mul(m[i * d + j], a.coord(x, j)));
        }
        out += acc.index() as usize * scale;
        scale *= a.q();
    }
    out
}

/// Orbit oracle budget: |O_d| times the number of ordered tuples.
pub const ORBIT_BUDGET: u128 = 200_000_000;
/// Signature budget: number of ordered tuples.
pub const TUPLE_BUDGET: u128 = 100_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct SimplexCensus {
    pub field: String,
    pub d: usize,
    pub k: usize,
    pub set_size: usize,
    /// Number of distinct squared-distance matrices over ordered (k+1)-tuples of distinct points.
    pub signature_count: usize,
    /// Number of orbits under translations and O_d, when the oracle ran.
    pub orbit_count: Option<usize>,
    /// q^{binom(k+1, 2)}
    pub upper_bound: f64,
    pub convention: String,
    pub note: Option<String>,
}

fn falling(n: usize, r: usize) -> u128 {
    (0..r).map(|i| n.saturating_sub(i) as u128).product()
}

fn for_each_tuple(pts: &[usize], len: usize, mut f: impl FnMut(&[usize])) {
    let n = pts.len();
    if len == 0 || n < len {
        return;
    }
    let mut pos = vec![0usize; len];
    let mut tuple = vec![0usize; len];
    let mut depth = 0usize;
    loop {
        if pos[depth] >= n {
            if depth == 0 {
                return;
            }
            depth -= 1;
            pos[depth] += 1;
            continue;
        }
        let cand = pts[pos[depth]];
        if tuple[..depth].contains(&cand) {
            pos[depth] += 1;
            continue;
        }
        tuple[depth] = cand;
        if depth + 1 == len {
            f(&tuple);
            pos[depth] += 1;
        } else {
            depth += 1;
            pos[depth] = 0;
        }
    }
}

pub fn simplex_census(set: &PointSet, k: usize, oracle: bool) -> Result<SimplexCensus> {
    let a = set.ambient();
    if k == 0 || k > a.d() {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= d, got k = {k}")));
    }
    let pts = set.indices();
    let tuples = falling(pts.len(), k + 1);
    if tuples > TUPLE_BUDGET {
        return Err(Error::BudgetExceeded { size: tuples, budget: TUPLE_BUDGET });
    }
    // Parallel over the first vertex; each worker fills its own set.
    let signatures: HashSet<Vec<u32>> = pts
        .par_iter()
        .fold(HashSet::new, |mut acc, &x0| {
            let rest: Vec<usize> = pts.iter().copied().filter(|&y| y != x0).collect();
            let mut full = vec![x0; k + 1];
            for_each_tuple(&rest, k, |tail| {
                full[1..].copy_from_slice(tail);
                let mut sig = Vec::with_capacity((k + 1) * k / 2);
                for i in 0..=k {
                    for j in i + 1..=k {
                        sig.push(a.norm_sq_idx(a.sub_idx(full[i], full[j])).index());
                    }
                }
                acc.insert(sig);
            });
            acc
        })
        .reduce(HashSet::new, |mut x, y| {
            x.extend(y);
            x
        });

    let mut note = None;
    let orbit_count = if oracle {
        let group = orthogonal_group(a);
        let cost = group.len() as u128 * tuples;
        if cost > ORBIT_BUDGET {
            note = Some(format!("orbit oracle skipped: {cost} group applications exceed {ORBIT_BUDGET}"));
            None
        } else {
            // act[g][x] = g x
            let act: Vec<Vec<usize>> = group.iter().map(|g| (0..a.size()).map(|x| apply(a, g, x)).collect()).collect();
            let reps: HashSet<Vec<usize>> = pts
                .par_iter()
                .fold(HashSet::new, |mut acc, &x0| {
                    let rest: Vec<usize> = pts.iter().copied().filter(|&y| y != x0).collect();
                    for_each_tuple(&rest, k, |tail| {
                        let diffs: Vec<usize> = tail.iter().map(|&y| a.sub_idx(y, x0)).collect();
                        let best = act
                            .iter()
                            .map(|g| diffs.iter().map(|&u| g[u]).collect::<Vec<_>>())
                            .min()
                            .expect("group is nonempty");
                        acc.insert(best);
                    });
                    acc
                })
                .reduce(HashSet::new, |mut x, y| {
                    x.extend(y);
                    x
                });
            Some(reps.len())
        }
    } else {
        None
    };

    Ok(SimplexCensus {
        field: a.field().spec(),
        d: a.d(),
        k,
        set_size: set.cardinality(),
        signature_count: signatures.len(),
        orbit_count,
        upper_bound: (a.q() as f64).powi(((k + 1) * k / 2) as i32),
        convention: "ordered tuples of distinct points; signature = squared distances |x_i - x_j|^2, i < j".into(),
        note,
    })
}

pub const CENSUS_HEADER: [&str; 7] = ["field", "d", "set", "k", "signature_count", "orbit_count", "upper_bound"];

pub fn write_census_csv<W: Write>(out: W, rows: &[(String, SimplexCensus)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CENSUS_HEADER)?;
    for (name, c) in rows {
        w.write_record([
            c.field.clone(),
            c.d.to_string(),
            name.clone(),
            c.k.to_string(),
            c.signature_count.to_string(),
            c.orbit_count.map(|o| o.to_string()).unwrap_or_default(),
            crate::spectrum::format_real(c.upper_bound),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Both sides of (Π #E_i)^2 <= #(ΣE_i) (q^{-d} Π #E_i^2 + q^{2kd} Π ‖Ê_i‖_{2p_i}^2).
#[derive(Clone, Debug, Serialize)]
pub struct SumsetBoundCheck {
    pub sumset_size: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// #(ΣE_i) * sum_z f(z)^2: the exact middle term of the chain
    pub middle: f64,
    pub holds: bool,
}

pub fn sumset_bound_check(sets: &[&PointSet], exponents: &[f64]) -> Result<SumsetBoundCheck> {
    if sets.len() != exponents.len() || sets.is_empty() {
        return Err(Error::InvalidParameter("need one exponent per set".into()));
    }
    let recip: f64 = exponents.iter().map(|&p| if p.is_infinite() { 0.0 } else { 1.0 / p }).sum();
    if exponents.iter().any(|&p| p.is_nan() || p < 1.0) || (recip - 1.0).abs() > 1e-12 {
        return Err(Error::NotConjugate(recip));
    }
    let s = sumset(sets)?;
    let a = sets[0].ambient();
    let n = a.size() as f64;
    let k = sets.len() as i32;
    let prod_card: f64 = sets.iter().map(|e| e.cardinality() as f64).product();
    let mut prod_norm = 1.0;
    for (e, &p) in sets.iter().zip(exponents) {
        let t = fourier_transform(e);
        prod_norm *= lp_norm(&t, 2.0 * p)?.powi(2);
    }
    let size = s.set.cardinality() as f64;
    let lhs = prod_card * prod_card;
    let rhs = size * (prod_card * prod_card / n + n.powi(2 * k) * prod_norm);
    let middle = size * s.fiber_energy() as f64;
    Ok(SumsetBoundCheck { sumset_size: s.set.cardinality(), lhs, rhs, middle, holds: lhs <= rhs * (1.0 + 1e-12) })
}

/// Sizes of E+E, E-E and Dir(E) next to the lower bounds predicted from s_emp(4).
#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub set_size: usize,
    pub sumset_size: usize,
    pub difference_size: usize,
    pub direction_count: usize,
    pub s_emp4: Option<f64>,
    /// min(#E^{4s}, q^d)
    pub predicted: Option<f64>,
    /// min(#E^{4s}/q, q^{d-1})
    pub predicted_directions: Option<f64>,
    /// #(E-E) <= q #Dir(E) + 1
    pub pigeonhole_holds: bool,
}

pub fn growth_report(set: &PointSet) -> Result<GrowthReport> {
    let a = set.ambient();
    let q = a.q() as f64;
    let n = a.size() as f64;
    let plus = sumset(&[set, set])?.set.cardinality();
    let diff = difference_set(set).cardinality();
    let dirs = direction_count(set);
    let t = fourier_transform(set);
    let s4 = salem_exponent_from(lp_norm(&t, 4.0)?, a.size(), set.cardinality()).ok();
    let e = set.cardinality() as f64;
    let predicted = s4.map(|s| e.powf(4.0 * s).min(n));
    let predicted_directions = s4.map(|s| (e.powf(4.0 * s) / q).min(n / q));
    Ok(GrowthReport {
        set_size: set.cardinality(),
        sumset_size: plus,
        difference_size: diff,
        direction_count: dirs,
        s_emp4: s4,
        predicted,
        predicted_directions,
        pigeonhole_holds: diff <= a.q() * dirs + 1,
    })
}

/// The two-sided inequality relating ‖(E+E)^‖_p and ‖Ê‖_{2p} for a Sidon set E.
#[derive(Clone, Debug, Serialize)]
pub struct SidonSumCheck {
    pub p: f64,
    /// ‖(E+E)^‖_p
    pub sumset_norm: f64,
    /// q^d ‖Ê‖_{2p}^2 / 2 - q^{-d} #E
    pub lower: f64,
    /// q^{-d} #E + q^d ‖Ê‖_{2p}^2 / 2
    pub upper: f64,
    pub holds_lower: bool,
    pub holds_upper: bool,
    pub s_emp: Option<f64>,
    /// 2/p
    pub target: f64,
}

pub fn sidon_sum_check(set: &PointSet, p: f64) -> Result<SidonSumCheck> {
    let rep = is_sidon(set);
    if !rep.is_sidon {
        return Err(Error::NotSidon(format!("witness {:?}", rep.witness)));
    }
    let a = set.ambient();
    let n = a.size() as f64;
    let t = fourier_transform(set);
    let l2p = lp_norm(&t, 2.0 * p)?;
    let s = sumset(&[set, set])?;
    let ts = fourier_transform(&s.set);
    let norm = lp_norm(&ts, p)?;
    let e = set.cardinality() as f64;
    let half = 0.5 * n * l2p * l2p;
    let lower = half - e / n;
    let upper = e / n + half;
    let tol = 1e-12 * upper.abs().max(norm);
    Ok(SidonSumCheck {
        p,
        sumset_norm: norm,
        lower,
        upper,
        holds_lower: lower <= norm + tol,
        holds_upper: norm <= upper + tol,
        s_emp: salem_exponent_from(lp_norm(&t, p)?, a.size(), set.cardinality()).ok(),
        target: if p.is_infinite() { 0.0 } else { 2.0 / p },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{annihilator_of_plane, paraboloid};
    use crate::spectrum::transform_function;
    use num_complex::Complex64;

    fn amb(q: u64, d: usize) -> Ambient {
        Ambient::of_order(q, d).unwrap()
    }

    fn parabola(q: u64) -> PointSet {
        let a = amb(q, 2);
        paraboloid(&a, FieldElement::ONE).unwrap().set
    }

    #[test]
    fn small_sumsets() {
        let a = amb(5, 1);
        let e = PointSet::from_indices(&a, [0, 1]).unwrap();
        assert_eq!(sumset(&[&e, &e]).unwrap().set.indices(), vec![0, 1, 2]);
        let one = PointSet::from_indices(&a, [1]).unwrap();
        assert_eq!(sumset(&[&one, &one]).unwrap().set.indices(), vec![2]);
        let par = parabola(5);
        let s = sumset(&[&par, &par]).unwrap();
        assert_eq!(s.set.cardinality(), 15);
        assert_eq!(s.fibers.iter().sum::<u64>(), 25);
        assert!(sumset(&[&par, &e]).is_err());
    }

    #[test]
    fn differences_directions_distances() {
        let par = parabola(5);
        assert_eq!(difference_set(&par).cardinality(), 21);
        assert_eq!(direction_count(&par), 5);
        assert_eq!(distance_set(&par).len(), 5);
        let a = amb(5, 2);
        let single = PointSet::from_indices(&a, [3]).unwrap();
        assert_eq!(difference_set(&single).indices(), vec![0]);
        assert_eq!(direction_count(&single), 0);
        let two = PointSet::from_indices(&a, [0, 1]).unwrap();
        let d: Vec<u32> = distance_set(&two).iter().map(|t| t.index()).collect();
        assert_eq!(d, vec![0, 1]);
        assert_eq!(distance_set(&PointSet::full(&a)).len(), 5);
    }

    #[test]
    fn energy_identities() {
        let a = amb(7, 2);
        let e = PointSet::from_predicate(&a, |x| (x * 13 + 5) % 7 < 3);
        let t = fourier_transform(&e);
        let en = spherical_energy(&t);
        let direct: f64 = t.values()[1..].iter().map(|z| z.norm_sqr()).sum();
        assert!((en.total() - direct).abs() < 1e-12 * direct);
        let check = en.lemma_check(lp_norm(&t, 4.0).unwrap());
        assert!(check.holds);
        let full = spherical_energy(&fourier_transform(&PointSet::full(&a)));
        assert!(full.energy.iter().all(|&x| x < 1e-20));
        assert!(full.mattila().unwrap() < 1e-20);
    }

    #[test]
    fn annihilator_energy_at_special_radius() {
        let a = amb(5, 3);
        let ann = annihilator_of_plane(&a).unwrap();
        let en = spherical_energy(&fourier_transform(&ann.set));
        let t = ann.t.index() as usize;
        // span(a, v) meets S_t in the two lines ±a + F_q v, each |Ê| = q^{-2}.
        assert!((en.energy[t] - 2.0 * 5f64.powi(-3)).abs() < 1e-12);
    }

    #[test]
    fn distance_reports() {
        let a = amb(5, 2);
        let full = distance_bound_report(&PointSet::full(&a)).unwrap();
        assert_eq!(full.distance_count, 5);
        assert_eq!(full.mattila_bound, 5.0);
        let par = distance_bound_report(&parabola(5)).unwrap();
        assert_eq!(par.distance_count, 5);
        assert!(matches!(distance_bound_report(&PointSet::full(&amb(4, 2))), Err(Error::EvenField(4))));
        let mut buf = Vec::new();
        write_distance_csv(&mut buf, &[full, par]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 3);
    }

    #[test]
    fn orthogonal_groups() {
        assert_eq!(orthogonal_group(&amb(5, 1)).len(), 2);
        assert_eq!(orthogonal_group(&amb(5, 2)).len(), 8);
        assert_eq!(orthogonal_group(&amb(7, 2)).len(), 16);
        let a = amb(3, 3);
        let g = orthogonal_group(&a);
        assert_eq!(g.len(), 48);
        for m in &g {
            for x in 0..a.size() {
                assert_eq!(a.norm_sq_idx(apply(&a, m, x)), a.norm_sq_idx(x));
            }
        }
    }

    #[test]
    fn census_examples() {
        let a = amb(5, 2);
        let c = simplex_census(&PointSet::full(&a), 1, true).unwrap();
        assert_eq!(c.signature_count, 5);
        assert!(c.signature_count <= c.orbit_count.unwrap());
        assert!(simplex_census(&PointSet::full(&a), 3, false).is_err());
        let par = parabola(5);
        let c2 = simplex_census(&par, 2, true).unwrap();
        assert!(c2.signature_count <= c2.orbit_count.unwrap());
        let mut buf = Vec::new();
        write_census_csv(&mut buf, &[("full".into(), c)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "5,2,full,1,5,5,5");
    }

    #[test]
    fn sumset_chain_and_sidon() {
        let par = parabola(5);
        let chk = sumset_bound_check(&[&par, &par], &[2.0, 2.0]).unwrap();
        assert!(chk.holds);
        assert!(chk.lhs <= chk.middle * (1.0 + 1e-12));
        assert!(chk.middle <= chk.rhs * (1.0 + 1e-12));
        assert!(matches!(sumset_bound_check(&[&par, &par], &[2.0, 3.0]), Err(Error::NotConjugate(_))));
        let a = amb(5, 2);
        let one = PointSet::from_indices(&a, [7]).unwrap();
        let single = sumset_bound_check(&[&one, &one, &one], &[3.0, 3.0, 3.0]).unwrap();
        assert_eq!(single.sumset_size, 1);
        assert!(single.holds);
        for p in [2.0, 4.0] {
            let s = sidon_sum_check(&par, p).unwrap();
            assert!(s.holds_lower && s.holds_upper);
        }
        let diag = PointSet::from_indices(&a, [0, 6, 12]).unwrap();
        assert!(matches!(sidon_sum_check(&diag, 2.0), Err(Error::NotSidon(_))));
        let g = growth_report(&par).unwrap();
        assert_eq!((g.sumset_size, g.difference_size, g.direction_count), (15, 21, 5));
        assert!(g.pigeonhole_holds);
    }

    #[test]
    fn fiber_plancherel() {
        let par = parabola(7);
        let s = sumset(&[&par, &par]).unwrap();
        let a = par.ambient();
        let vals: Vec<Complex64> = s.fibers.iter().map(|&f| Complex64::new(f as f64, 0.0)).collect();
        let hat = transform_function(a, &vals).unwrap();
        let rhs: f64 = a.size() as f64 * hat.iter().map(|z| z.norm_sqr()).sum::<f64>();
        assert!((s.fiber_energy() as f64 - rhs).abs() < 1e-9 * rhs);
    }
}
