//! Recipe grammar: `name(key=value, ...)`.
//!
//! Values are numbers, polynomial expressions in `k`, coefficient lists `(c0;c1;...)`,
//! bracketed lists `[v, ...]`, or nested recipes. Examples: `sphere(r=0)`, `coneD()`,
//! `curve(f=[k,k^2,k^3])`, `sum(k=2, left=sphere(r=1), right=full())`.

use std::fmt;

use crate::error::{Error, Result};
use crate::gf::FieldElement;
use crate::lattice::Ambient;

use super::{poly::IntPoly, Built};

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    /// A bare token: number or polynomial expression, interpreted by the consumer.
    Atom(String),
    List(Vec<Value>),
    Recipe(Recipe),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Recipe {
    pub name: String,
    pub args: Vec<(String, Value)>,
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Atom(s) => write!(f, "{s}"),
            Value::List(v) => {
                write!(f, "[")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, "]")
            }
            Value::Recipe(r) => write!(f, "{r}"),
        }
    }
}

impl fmt::Display for Recipe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, (k, v)) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, ")")
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::RecipeSyntax { pos: self.pos, msg: msg.into() })
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, ch: char) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(ch) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected '{ch}'"))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        if start == self.pos || self.src.as_bytes()[start].is_ascii_digit() {
            self.pos = start;
            return self.err("expected a name");
        }
        Ok(self.src[start..self.pos].to_owned())
    }

    fn recipe(&mut self) -> Result<Recipe> {
        let name = self.ident()?;
        self.expect('(')?;
        let mut args = Vec::new();
        self.skip_ws();
        if self.peek() == Some(')') {
            self.pos += 1;
            return Ok(Recipe { name, args });
        }
        loop {
            let key = self.ident()?;
            if args.iter().any(|(k, _)| *k == key) {
                return self.err(format!("duplicate parameter {key}"));
            }
            self.expect('=')?;
            let v = self.value()?;
            args.push((key, v));
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(')') => {
                    self.pos += 1;
                    return Ok(Recipe { name, args });
                }
                _ => return self.err("expected ',' or ')'"),
            }
        }
    }

    fn value(&mut self) -> Result<Value> {
        self.skip_ws();
        match self.peek() {
            Some('[') => {
                self.pos += 1;
                let mut items = Vec::new();
                self.skip_ws();
                if self.peek() == Some(']') {
                    self.pos += 1;
                    return Ok(Value::List(items));
                }
                loop {
                    items.push(self.value()?);
                    self.skip_ws();
                    match self.peek() {
                        Some(',') => self.pos += 1,
                        Some(']') => {
                            self.pos += 1;
                            return Ok(Value::List(items));
                        }
                        _ => return self.err("expected ',' or ']'"),
                    }
                }
            }
            Some('(') => {
                let start = self.pos;
                match self.src[start..].find(')') {
                    Some(end) => {
                        self.pos = start + end + 1;
                        Ok(Value::Atom(self.src[start..self.pos].to_owned()))
                    }
                    None => self.err("unterminated coefficient list"),
                }
            }
            Some(c) if c.is_ascii_alphabetic() => {
                // A nested recipe if a name is followed by '(', otherwise an expression.
                let save = self.pos;
                let name = self.ident()?;
                self.skip_ws();
                if self.peek() == Some('(') && name.len() > 1 {
                    self.pos = save;
                    return Ok(Value::Recipe(self.recipe()?));
                }
                self.pos = save;
                self.atom()
            }
            Some(_) => self.atom(),
            None => self.err("expected a value"),
        }
    }

    fn atom(&mut self) -> Result<Value> {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == ',' || c == ']' || c == ')' {
                break;
            }
            self.pos += c.len_utf8();
        }
        let text = self.src[start..self.pos].trim();
        if text.is_empty() {
            self.pos = start;
            return self.err("expected a value");
        }
        Ok(Value::Atom(text.to_owned()))
    }
}

pub fn parse_recipe(src: &str) -> Result<Recipe> {
    let mut p = Parser { src, pos: 0 };
    let r = p.recipe()?;
    p.skip_ws();
    if p.pos != src.len() {
        return p.err("trailing input");
    }
    Ok(r)
}

impl Recipe {
    fn get(&self, key: &str) -> Option<&Value> {
        self.args.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    fn allow(&self, keys: &[&str]) -> Result<()> {
        for (k, _) in &self.args {
            if !keys.contains(&k.as_str()) {
                return Err(Error::InvalidParameter(format!("{}() takes no parameter {k:?}", self.name)));
            }
        }
        Ok(())
    }

    fn atom(&self, key: &str) -> Result<Option<&str>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Atom(s)) => Ok(Some(s)),
            Some(v) => Err(Error::InvalidParameter(format!("{key} = {v} is not a scalar"))),
        }
    }

    fn int(&self, key: &str, default: i64) -> Result<i64> {
        match self.atom(key)? {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| Error::InvalidParameter(format!("{key} = {s} is not an integer"))),
        }
    }

    fn real(&self, key: &str, default: f64) -> Result<f64> {
        match self.atom(key)? {
            None => Ok(default),
            Some(s) => s.parse().map_err(|_| Error::InvalidParameter(format!("{key} = {s} is not a number"))),
        }
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize> {
        let v = self.int(key, default as i64)?;
        usize::try_from(v).map_err(|_| Error::InvalidParameter(format!("{key} = {v} must be non-negative")))
    }

    fn element(&self, ambient: &Ambient, key: &str, default: i64) -> Result<FieldElement> {
        Ok(IntPoly::coefficient_in(ambient.field(), self.int(key, default)?))
    }

    fn sub_recipe(&self, key: &str) -> Result<&Recipe> {
        match self.get(key) {
            Some(Value::Recipe(r)) => Ok(r),
            _ => Err(Error::InvalidParameter(format!("{}() needs {key}=<recipe>", self.name))),
        }
    }
}

/// Builds the set described by a recipe in the given ambient.
pub fn build(recipe: &Recipe, ambient: &Ambient) -> Result<Built> {
    use super::*;
    let r = recipe;
    match r.name.as_str() {
        "full" => {
            r.allow(&[])?;
            Ok(Built::plain(PointSet::full(ambient)))
        }
        "origin" => {
            r.allow(&[])?;
            Ok(Built::plain(PointSet::from_indices(ambient, [0])?))
        }
        "indices" => {
            r.allow(&["i"])?;
            let items = match r.get("i") {
                Some(Value::List(v)) => v,
                _ => return Err(Error::InvalidParameter("indices() needs i=[...]".into())),
            };
            let idx = items
                .iter()
                .map(|v| match v {
                    Value::Atom(s) => s.parse::<usize>().map_err(|_| Error::InvalidParameter(format!("bad index {s}"))),
                    _ => Err(Error::InvalidParameter(format!("bad index {v}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Built::plain(PointSet::from_indices(ambient, idx)?))
        }
        "sphere" => {
            r.allow(&["r"])?;
            Ok(sphere(ambient, r.element(ambient, "r", 1)?))
        }
        "sphere0" => {
            r.allow(&[])?;
            if ambient.field().p() == 2 {
                return Err(Error::EvenField(ambient.field().q()));
            }
            if ambient.d() < 2 || (ambient.d() == 2 && !ambient.field().minus_one_is_square()) {
                return Err(Error::InvalidParameter(
                    "sphere of radius zero needs d >= 3, or d = 2 with -1 a square in F_q".into(),
                ));
            }
            Ok(sphere(ambient, FieldElement::ZERO))
        }
        "coneC" => {
            r.allow(&[])?;
            cone_c(ambient)
        }
        "coneD" => {
            r.allow(&[])?;
            cone_d(ambient)
        }
        "cylinder" => {
            r.allow(&["r"])?;
            cylinder(ambient, r.element(ambient, "r", 1)?)
        }
        "paraboloid" => {
            r.allow(&["y"])?;
            paraboloid(ambient, r.element(ambient, "y", 1)?)
        }
        "diagonal" => {
            r.allow(&["n"])?;
            diagonal(ambient, r.usize("n", 1)?)
        }
        "kloosterman" => {
            r.allow(&[])?;
            kloosterman_curve(ambient)
        }
        "veronese" => {
            r.allow(&[])?;
            veronese(ambient)
        }
        "curve" => {
            r.allow(&["f"])?;
            let items = match r.get("f") {
                Some(Value::List(v)) => v,
                _ => return Err(Error::InvalidParameter("curve() needs f=[...]".into())),
            };
            let polys = items
                .iter()
                .map(|v| match v {
                    Value::Atom(s) => IntPoly::parse(s),
                    _ => Err(Error::InvalidParameter(format!("bad polynomial {v}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            polynomial_curve(ambient, &polys)
        }
        "complement" => {
            r.allow(&["k"])?;
            subspace_complement(ambient, r.usize("k", 1)?)
        }
        "sum" => {
            r.allow(&["k", "left", "right"])?;
            let k = r.usize("k", 1)?;
            if k == 0 || k >= ambient.d() {
                return Err(Error::InvalidParameter(format!("sum needs 1 <= k < d = {}", ambient.d())));
            }
            let left_amb = Ambient::new(ambient.field_arc().clone(), k)?;
            let right_amb = Ambient::new(ambient.field_arc().clone(), ambient.d() - k)?;
            let left = build(r.sub_recipe("left")?, &left_amb)?;
            let right = build(r.sub_recipe("right")?, &right_amb)?;
            let mut notes = left.notes;
            notes.extend(right.notes);
            Ok(Built { set: direct_sum(&left.set, &right.set)?, prediction: None, notes })
        }
        "random" => {
            r.allow(&["alpha", "seed"])?;
            let alpha = r.real("alpha", 1.0)?;
            let seed = r.int("seed", 0)?;
            Ok(Built::plain(random_set(ambient, alpha, seed as u64)?))
        }
        "annihilator" => {
            r.allow(&[])?;
            let ann = annihilator_of_plane(ambient)?;
            Ok(Built { set: ann.set, prediction: Some(SalemPrediction::Flat { n: 1 }), notes: Vec::new() })
        }
        other => Err(Error::InvalidParameter(format!("unknown recipe {other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::SalemPrediction;

    #[test]
    fn parses_examples() {
        let r = parse_recipe("sphere(r=0)").unwrap();
        assert_eq!(r.name, "sphere");
        assert_eq!(r.args, vec![("r".into(), Value::Atom("0".into()))]);
        let r = parse_recipe(" coneD( ) ").unwrap();
        assert!(r.args.is_empty());
        let r = parse_recipe("curve(f=[k, k^2 + 1, (0;0;0;2)])").unwrap();
        assert_eq!(r.to_string(), "curve(f=[k,k^2 + 1,(0;0;0;2)])");
        let r = parse_recipe("sum(k=2, left=sphere(r=1), right=full())").unwrap();
        assert!(matches!(r.get("left"), Some(Value::Recipe(_))));
        assert_eq!(parse_recipe(&r.to_string()).unwrap(), r);
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse_recipe("sphere(r=0"), Err(Error::RecipeSyntax { .. })));
        assert!(matches!(parse_recipe("sphere(r=)"), Err(Error::RecipeSyntax { .. })));
        assert!(matches!(parse_recipe("sphere(r=1) x"), Err(Error::RecipeSyntax { .. })));
        assert!(matches!(parse_recipe("(r=1)"), Err(Error::RecipeSyntax { .. })));
        assert!(matches!(parse_recipe("s(r=1,r=2)"), Err(Error::RecipeSyntax { .. })));
    }

    #[test]
    fn builds() {
        let a = Ambient::of_order(5, 3).unwrap();
        let b = build(&parse_recipe("sphere0()").unwrap(), &a).unwrap();
        assert_eq!(b.set.cardinality(), 25);
        assert_eq!(b.prediction, Some(SalemPrediction::SphereZero { d: 3 }));
        let s = build(&parse_recipe("sum(k=2, left=sphere(r=1), right=full())").unwrap(), &a).unwrap();
        assert_eq!(s.set.cardinality(), 20);
        let c = build(&parse_recipe("curve(f=[k,k^2,k^3])").unwrap(), &a).unwrap();
        assert_eq!(c.set, build(&parse_recipe("veronese()").unwrap(), &a).unwrap().set);
        assert!(build(&parse_recipe("sphere(q=1)").unwrap(), &a).is_err());
        assert!(build(&parse_recipe("nothing()").unwrap(), &a).is_err());
        let a7 = Ambient::of_order(7, 2).unwrap();
        assert!(build(&parse_recipe("sphere0()").unwrap(), &a7).is_err());
        let r = build(&parse_recipe("random(alpha=1.5, seed=3)").unwrap(), &a7).unwrap();
        assert_eq!(r.set.cardinality(), 18);
    }
}
