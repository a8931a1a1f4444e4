//! Points of F_q^d and dense subsets.
//!
//! A point `x = (x_0, ..., x_{d-1})` is encoded as `idx(x) = sum_i idx(x_i) q^i`
//! (coordinate 0 least significant). This packing is part of the set-file format.

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Field, FieldElement};

/// Default cap on q^d.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

/// The vector space F_q^d.
#[derive(Clone)]
pub struct Ambient {
    field: Arc<Field>,
    d: usize,
    size: usize,
    /// pow[i] = q^i for i in 0..=d
    pow: Vec<usize>,
}

impl fmt::Debug for Ambient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.field.spec(), self.d)
    }
}

impl PartialEq for Ambient {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && (Arc::ptr_eq(&self.field, &other.field) || *self.field == *other.field)
    }
}

impl Eq for Ambient {}

impl Ambient {
    pub fn new(field: Arc<Field>, d: usize) -> Result<Ambient> {
        Self::with_budget(field, d, DEFAULT_BUDGET)
    }

    pub fn with_budget(field: Arc<Field>, d: usize, budget: u64) -> Result<Ambient> {
        if d == 0 {
            return Err(Error::InvalidParameter("dimension d must be >= 1".into()));
        }
        let q = field.q() as u128;
        let size = q.checked_pow(d as u32).unwrap_or(u128::MAX);
        if size > budget as u128 {
            return Err(Error::BudgetExceeded { size, budget: budget as u128 });
        }
        let pow = (0..=d).map(|i| (q as usize).pow(i as u32)).collect();
        Ok(Ambient { field, d, size: size as usize, pow })
    }

    /// Convenience: F_q^d with the canonical modulus.
    pub fn of_order(q: u64, d: usize) -> Result<Ambient> {
        Ambient::new(Arc::new(Field::of_order(q)?), d)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn field_arc(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn q(&self) -> usize {
        self.field.q() as usize
    }

    /// q^d
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn check(&self, other: &Ambient) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AmbientMismatch(format!("{self:?} vs {other:?}")))
        }
    }

    pub fn encode(&self, coords: &[FieldElement]) -> Result<usize> {
        if coords.len() != self.d {
            return Err(Error::AmbientMismatch(format!(
                "point has {} coordinates, ambient has d = {}",
                coords.len(),
                self.d
            )));
        }
        let q = self.q();
        let mut idx = 0usize;
        for c in coords.iter().rev() {
            if c.index() as usize >= q {
                return Err(Error::IndexOutOfRange { index: c.index() as u64, size: q as u64 });
            }
            idx = idx * q + c.index() as usize;
        }
        Ok(idx)
    }

    /// Encodes coordinates known to be in range and of length d.
    #[inline]
    pub fn encode_unchecked(&self, coords: &[FieldElement]) -> usize {
        let q = self.q();
        coords.iter().rev().fold(0usize, |acc, c| acc * q + c.index() as usize)
    }

    pub fn decode(&self, idx: usize) -> Vec<FieldElement> {
        let q = self.q();
        let mut v = idx;
        (0..self.d)
            .map(|_| {
                let c = FieldElement::from_index_unchecked((v % q) as u32);
                v /= q;
                c
            })
            .collect()
    }

    #[inline]
    pub fn coord(&self, idx: usize, i: usize) -> FieldElement {
        FieldElement::from_index_unchecked(((idx / self.pow[i]) % self.q()) as u32)
    }

    pub fn check_index(&self, idx: usize) -> Result<()> {
        if idx < self.size {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: idx as u64, size: self.size as u64 })
        }
    }

    /// Coordinatewise combination of two encoded points.
    #[inline]
    fn zip_idx(&self, a: usize, b: usize, op: impl Fn(FieldElement, FieldElement) -> FieldElement) -> usize {
        let mut out = 0usize;
        for i in 0..self.d {
            out += op(self.coord(a, i), self.coord(b, i)).index() as usize * self.pow[i];
        }
        out
    }

    #[inline]
    pub fn add_idx(&self, a: usize, b: usize) -> usize {
        if self.field.m() == 1 {
            // Prime fields: per-coordinate addition mod p without going through the field.
            let q = self.q();
            let (mut x, mut y, mut out) = (a, b, 0usize);
            for i in 0..self.d {
                let s = x % q + y % q;
                out += (if s >= q { s - q } else { s }) * self.pow[i];
                x /= q;
                y /= q;
            }
            return out;
        }
        let f = &self.field;
        self.zip_idx(a, b, |x, y| f.add(x, y))
    }

    #[inline]
    pub fn sub_idx(&self, a: usize, b: usize) -> usize {
        let f = &self.field;
        self.zip_idx(a, b, |x, y| f.sub(x, y))
    }

    #[inline]
    pub fn neg_idx(&self, a: usize) -> usize {
        let f = &self.field;
        self.zip_idx(a, 0, |x, _| f.neg(x))
    }

    /// c * x for a scalar c.
    pub fn scale_idx(&self, c: FieldElement, a: usize) -> usize {
        let f = &self.field;
        self.zip_idx(a, 0, |x, _| f.mul(c, x))
    }

    #[inline]
    pub fn dot_idx(&self, a: usize, b: usize) -> FieldElement {
        let f = &self.field;
        let mut acc = FieldElement::ZERO;
        for i in 0..self.d {
            acc = f.add(acc, f.mul(self.coord(a, i), self.coord(b, i)));
        }
        acc
    }

    #[inline]
    pub fn norm_sq_idx(&self, a: usize) -> FieldElement {
        self.dot_idx(a, a)
    }

    /// x . y
    pub fn dot(&self, x: &[FieldElement], y: &[FieldElement]) -> Result<FieldElement> {
        if x.len() != self.d || y.len() != self.d {
            return Err(Error::AmbientMismatch(format!(
                "dot of lengths {} and {} in d = {}",
                x.len(),
                y.len(),
                self.d
            )));
        }
        let f = &self.field;
        Ok(x.iter().zip(y).fold(FieldElement::ZERO, |acc, (&a, &b)| f.add(acc, f.mul(a, b))))
    }

    /// |x|^2 = x_1^2 + ... + x_d^2
    pub fn norm_sq(&self, x: &[FieldElement]) -> Result<FieldElement> {
        self.dot(x, x)
    }

    /// Field elements from small integers (reduced as canonical indices mod q).
    pub fn point(&self, coords: &[i64]) -> Result<Vec<FieldElement>> {
        if coords.len() != self.d {
            return Err(Error::AmbientMismatch(format!(
                "point has {} coordinates, ambient has d = {}",
                coords.len(),
                self.d
            )));
        }
        Ok(coords.iter().map(|&c| self.field.from_int(c)).collect())
    }
}

/// A subset of F_q^d stored as a dense bit array of length q^d.
#[derive(Clone)]
pub struct PointSet {
    ambient: Ambient,
    bits: Vec<u64>,
    card: usize,
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointSet({:?}, #E = {})", self.ambient, self.card)
    }
}

impl PartialEq for PointSet {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.bits == other.bits
    }
}

impl Eq for PointSet {}

impl PointSet {
    pub fn empty(ambient: &Ambient) -> PointSet {
        PointSet { ambient: ambient.clone(), bits: vec![0; ambient.size().div_ceil(64)], card: 0 }
    }

    pub fn full(ambient: &Ambient) -> PointSet {
        let mut s = PointSet::empty(ambient);
        s.bits.iter_mut().for_each(|w| *w = u64::MAX);
        s.clear_tail();
        s.card = ambient.size();
        s
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(ambient: &Ambient, indices: I) -> Result<PointSet> {
        let mut s = PointSet::empty(ambient);
        for i in indices {
            s.insert(i)?;
        }
        Ok(s)
    }

    pub fn from_points(ambient: &Ambient, points: &[Vec<FieldElement>]) -> Result<PointSet> {
        let mut s = PointSet::empty(ambient);
        for p in points {
            s.insert(ambient.encode(p)?)?;
        }
        Ok(s)
    }

    /// Builds {x : pred(x)} by scanning the whole ambient.
    pub fn from_predicate(ambient: &Ambient, mut pred: impl FnMut(usize) -> bool) -> PointSet {
        let mut s = PointSet::empty(ambient);
        for i in 0..ambient.size() {
            if pred(i) {
                s.bits[i >> 6] |= 1 << (i & 63);
                s.card += 1;
            }
        }
        s
    }

    fn clear_tail(&mut self) {
        let n = self.ambient.size();
        if !n.is_multiple_of(64) {
            if let Some(last) = self.bits.last_mut() {
                *last &= (1u64 << (n % 64)) - 1;
            }
        }
    }

    pub fn ambient(&self) -> &Ambient {
        &self.ambient
    }

    /// #E
    pub fn cardinality(&self) -> usize {
        self.card
    }

    pub fn is_empty(&self) -> bool {
        self.card == 0
    }

    /// Returns true when the point was newly added.
    pub fn insert(&mut self, idx: usize) -> Result<bool> {
        self.ambient.check_index(idx)?;
        let (w, b) = (idx >> 6, 1u64 << (idx & 63));
        if self.bits[w] & b != 0 {
            return Ok(false);
        }
        self.bits[w] |= b;
        self.card += 1;
        Ok(true)
    }

    pub fn insert_point(&mut self, x: &[FieldElement]) -> Result<bool> {
        let idx = self.ambient.encode(x)?;
        self.insert(idx)
    }

    pub fn remove(&mut self, idx: usize) -> Result<bool> {
        self.ambient.check_index(idx)?;
        let (w, b) = (idx >> 6, 1u64 << (idx & 63));
        if self.bits[w] & b == 0 {
            return Ok(false);
        }
        self.bits[w] &= !b;
        self.card -= 1;
        Ok(true)
    }

    #[inline]
    pub fn contains(&self, idx: usize) -> bool {
        idx < self.ambient.size() && self.bits[idx >> 6] & (1 << (idx & 63)) != 0
    }

    pub fn contains_point(&self, x: &[FieldElement]) -> bool {
        self.ambient.encode(x).map(|i| self.contains(i)).unwrap_or(false)
    }

    pub fn union(&self, other: &PointSet) -> Result<PointSet> {
        self.ambient.check(&other.ambient)?;
        let bits: Vec<u64> = self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect();
        let card = bits.iter().map(|w| w.count_ones() as usize).sum();
        Ok(PointSet { ambient: self.ambient.clone(), bits, card })
    }

    pub fn intersection(&self, other: &PointSet) -> Result<PointSet> {
        self.ambient.check(&other.ambient)?;
        let bits: Vec<u64> = self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect();
        let card = bits.iter().map(|w| w.count_ones() as usize).sum();
        Ok(PointSet { ambient: self.ambient.clone(), bits, card })
    }

    pub fn complement(&self) -> PointSet {
        let mut s = PointSet {
            ambient: self.ambient.clone(),
            bits: self.bits.iter().map(|w| !w).collect(),
            card: self.ambient.size() - self.card,
        };
        s.clear_tail();
        s
    }

    /// E + v
    pub fn translate(&self, v: &[FieldElement]) -> Result<PointSet> {
        let vi = self.ambient.encode(v)?;
        let a = &self.ambient;
        PointSet::from_indices(a, self.iter().map(|x| a.add_idx(x, vi)))
    }

    /// -E
    pub fn negate(&self) -> PointSet {
        let a = &self.ambient;
        PointSet::from_indices(a, self.iter().map(|x| a.neg_idx(x))).expect("negation stays in range")
    }

    /// Indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    None
                } else {
                    let b = word.trailing_zeros() as usize;
                    word &= word - 1;
                    Some(w * 64 + b)
                }
            })
        })
    }

    pub fn indices(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn points(&self) -> Vec<Vec<FieldElement>> {
        self.iter().map(|i| self.ambient.decode(i)).collect()
    }

    /// Recounts the bits; equals `cardinality()` unless the cache is broken.
    pub fn recount(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn to_file(&self, recipe: Option<&str>) -> SetFile {
        SetFile {
            field: self.ambient.field().spec(),
            d: self.ambient.d(),
            indices: self.indices(),
            recipe: recipe.map(str::to_owned),
        }
    }
}

/// On-disk form of a point set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetFile {
    pub field: String,
    pub d: usize,
    pub indices: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recipe: Option<String>,
}

impl SetFile {
    pub fn to_set(&self) -> Result<PointSet> {
        if self.indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("set file indices must be strictly increasing".into()));
        }
        let field = Arc::new(Field::from_spec(&self.field)?);
        let ambient = Ambient::new(field, self.d)?;
        PointSet::from_indices(&ambient, self.indices.iter().copied())
    }

    pub fn read(path: &Path) -> Result<SetFile> {
        let text = fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amb(q: u64, d: usize) -> Ambient {
        Ambient::of_order(q, d).unwrap()
    }

    #[test]
    fn dot_examples() {
        let a = amb(5, 3);
        let x = a.point(&[1, 2, 3]).unwrap();
        let y = a.point(&[4, 0, 1]).unwrap();
        assert_eq!(a.dot(&x, &y).unwrap().index(), 2);
        let z = a.point(&[0, 0, 0]).unwrap();
        assert_eq!(a.dot(&x, &z).unwrap(), FieldElement::ZERO);
        let a2 = amb(5, 2);
        let v = a2.point(&[3, 4]).unwrap();
        assert_eq!(a2.norm_sq(&v).unwrap(), FieldElement::ZERO);
        let a7 = amb(7, 2);
        assert_eq!(a7.norm_sq(&a7.point(&[1, 2]).unwrap()).unwrap().index(), 5);
        assert!(a.dot(&x, &v).is_err());
    }

    #[test]
    fn encode_round_trip_exhaustive() {
        for (q, d) in [(5u64, 3usize), (4, 4), (9, 2), (2, 10)] {
            let a = amb(q, d);
            for idx in 0..a.size() {
                let x = a.decode(idx);
                assert_eq!(a.encode(&x).unwrap(), idx);
                assert_eq!(a.dot_idx(idx, idx), a.norm_sq(&x).unwrap());
            }
        }
    }

    #[test]
    fn little_endian_packing() {
        let a = amb(5, 2);
        assert_eq!(a.encode(&a.point(&[1, 0]).unwrap()).unwrap(), 1);
        assert_eq!(a.encode(&a.point(&[0, 1]).unwrap()).unwrap(), 5);
    }

    #[test]
    fn set_basics() {
        let a = amb(5, 2);
        let full = PointSet::full(&a);
        assert_eq!(full.cardinality(), 25);
        assert!(full.complement().is_empty());
        let e = PointSet::from_indices(&a, [0, 3, 7, 3]).unwrap();
        assert_eq!(e.cardinality(), 3);
        assert_eq!(e.complement().cardinality(), 22);
        let t = e.translate(&a.point(&[2, 4]).unwrap()).unwrap();
        assert_eq!(t.cardinality(), 3);
        assert_eq!(t.recount(), 3);
        assert!(PointSet::from_indices(&a, [25]).is_err());
        assert_eq!(e.union(&t).unwrap().recount(), e.union(&t).unwrap().cardinality());
    }

    #[test]
    fn budget_enforced() {
        let f = Arc::new(Field::of_order(2).unwrap());
        assert!(matches!(Ambient::with_budget(f.clone(), 11, 1024), Err(Error::BudgetExceeded { .. })));
        assert!(Ambient::with_budget(f, 10, 1024).is_ok());
    }

    #[test]
    fn set_file_round_trip() {
        let a = amb(4, 2);
        let e = PointSet::from_indices(&a, [9, 1, 4]).unwrap();
        let file = e.to_file(Some("test()"));
        assert_eq!(file.indices, vec![1, 4, 9]);
        let json = serde_json::to_string(&file).unwrap();
        assert_eq!(json, r#"{"field":"2^2/1,1,1","d":2,"indices":[1,4,9],"recipe":"test()"}"#);
        let back: SetFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_set().unwrap(), e);
    }
}
