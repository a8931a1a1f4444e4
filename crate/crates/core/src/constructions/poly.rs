//! Integer-coefficient polynomials in one variable `k`, evaluated in F_q.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf::{Field, FieldElement};

/// Coefficients from the constant term up. Trailing zeros are trimmed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntPoly(Vec<i64>);

impl IntPoly {
    pub fn new(mut coeffs: Vec<i64>) -> IntPoly {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        IntPoly(coeffs)
    }

    /// k^e
    pub fn monomial(e: usize) -> IntPoly {
        let mut c = vec![0; e + 1];
        c[e] = 1;
        IntPoly(c)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.0
    }

    /// Degree as an integer polynomial; None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    /// An integer c maps to `sign(c) * e` where e is the element with canonical index |c| mod q.
    /// Over prime fields this is ordinary reduction mod p.
    pub fn coefficient_in(field: &Field, c: i64) -> FieldElement {
        let e = field.from_int(c.unsigned_abs() as i64 % field.q() as i64);
        if c < 0 {
            field.neg(e)
        } else {
            e
        }
    }

    pub fn field_coeffs(&self, field: &Field) -> Vec<FieldElement> {
        self.0.iter().map(|&c| Self::coefficient_in(field, c)).collect()
    }

    pub fn eval(&self, field: &Field, k: FieldElement) -> FieldElement {
        self.field_coeffs(field)
            .iter()
            .rev()
            .fold(FieldElement::ZERO, |acc, &c| field.add(field.mul(acc, k), c))
    }

    /// Parses `3k^2 - k + 1`, `2*k^3`, `k`, `5` or a coefficient list `(1;0;2)`.
    pub fn parse(s: &str) -> Result<IntPoly> {
        let s = s.trim();
        let err = |msg: &str| Error::InvalidParameter(format!("polynomial {s:?}: {msg}"));
        if let Some(inner) = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
            let coeffs = inner
                .split(';')
                .map(|c| c.trim().parse::<i64>().map_err(|_| err("bad coefficient")))
                .collect::<Result<Vec<_>>>()?;
            return Ok(IntPoly::new(coeffs));
        }
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err("empty"));
        }
        let mut coeffs: Vec<i64> = Vec::new();
        let bytes = compact.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let mut sign = 1i64;
            if bytes[i] == b'+' || bytes[i] == b'-' {
                if bytes[i] == b'-' {
                    sign = -1;
                }
                i += 1;
            } else if i > 0 {
                return Err(err("expected + or -"));
            }
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let mut coef: Option<i64> = if i > start {
                Some(compact[start..i].parse().map_err(|_| err("coefficient overflow"))?)
            } else {
                None
            };
            if i < bytes.len() && bytes[i] == b'*' {
                if coef.is_none() {
                    return Err(err("dangling *"));
                }
                i += 1;
            }
            let mut exp = 0usize;
            if i < bytes.len() && (bytes[i] == b'k' || bytes[i] == b'x') {
                i += 1;
                exp = 1;
                if i < bytes.len() && bytes[i] == b'^' {
                    i += 1;
                    let es = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    exp = compact[es..i].parse().map_err(|_| err("bad exponent"))?;
                }
                coef.get_or_insert(1);
            }
            let c = coef.ok_or_else(|| err("expected a term"))?;
            if coeffs.len() <= exp {
                coeffs.resize(exp + 1, 0);
            }
            coeffs[exp] += sign * c;
        }
        Ok(IntPoly::new(coeffs))
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, &c) in self.0.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else if first { "" } else { "+" };
            let a = c.unsigned_abs();
            let body = match (e, a) {
                (0, _) => a.to_string(),
                (1, 1) => "k".into(),
                (1, _) => format!("{a}k"),
                (_, 1) => format!("k^{e}"),
                _ => format!("{a}k^{e}"),
            };
            write!(f, "{sign}{body}")?;
            first = false;
        }
        Ok(())
    }
}

/// Rank over F_q of the given vectors (Gaussian elimination).
pub fn rank(field: &Field, mut rows: Vec<Vec<FieldElement>>) -> usize {
    let cols = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    for r in rows.iter_mut() {
        r.resize(cols, FieldElement::ZERO);
    }
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = field.inv(rows[rank][col]).expect("pivot is nonzero");
        let pivot_row: Vec<FieldElement> = rows[rank].iter().map(|&x| field.mul(x, inv)).collect();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && !row[col].is_zero() {
                let factor = row[col];
                for (x, &pv) in row.iter_mut().zip(&pivot_row) {
                    *x = field.sub(*x, field.mul(factor, pv));
                }
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
    }
    rank
}
