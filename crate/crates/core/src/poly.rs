//! Multivariate polynomials with integer coefficients over named parameters.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::linear::{write_term, Bindings, Lin, UnboundParam};

/// Sorted `(parameter, exponent)` list; the empty monomial is `1`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Monomial(pub BTreeMap<String, u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(name: &str) -> Self {
        let mut m = BTreeMap::new();
        m.insert(name.to_string(), 1);
        Monomial(m)
    }

    pub fn degree(&self) -> u32 {
        self.0.values().sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (k, e) in &other.0 {
            *out.entry(k.clone()).or_insert(0) += e;
        }
        Monomial(out)
    }

    fn eval(&self, bindings: &Bindings) -> Result<i128, UnboundParam> {
        let mut acc = 1i128;
        for (k, e) in &self.0 {
            let v = bindings.get(k).ok_or_else(|| UnboundParam(k.clone()))?;
            acc *= (*v as i128).pow(*e);
        }
        Ok(acc)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, e) in &self.0 {
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if *e == 1 {
                f.write_str(k)?;
            } else {
                write!(f, "{k}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Serializes as its rendering, e.g. `"p0*p1 - p0 + 1"`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Poly {
    pub terms: BTreeMap<Monomial, i64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: i64) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(name: &str) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::var(name), 1);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<i64> {
        match self.terms.len() {
            0 => Some(0),
            1 => self.terms.get(&Monomial::one()).copied(),
            _ => None,
        }
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn add_term(&mut self, m: Monomial, c: i64) {
        if c == 0 {
            return;
        }
        let e = self.terms.entry(m.clone()).or_insert(0);
        *e += c;
        if *e == 0 {
            self.terms.remove(&m);
        }
    }

    /// Value at a parameter point, computed in 128-bit arithmetic.
    pub fn eval(&self, bindings: &Bindings) -> Result<i128, UnboundParam> {
        let mut acc = 0i128;
        for (m, c) in &self.terms {
            acc += *c as i128 * m.eval(bindings)?;
        }
        Ok(acc)
    }

    pub fn scale(&self, k: i64) -> Poly {
        if k == 0 {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn params(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().flat_map(|m| m.0.keys().map(String::as_str))
    }

    /// Substitutes bound parameters, keeping the others symbolic.
    pub fn partial_eval(&self, bindings: &Bindings) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut coeff = *c;
            let mut rest = BTreeMap::new();
            for (k, e) in &m.0 {
                match bindings.get(k) {
                    Some(v) => coeff *= v.pow(*e),
                    None => {
                        rest.insert(k.clone(), *e);
                    }
                }
            }
            out.add_term(Monomial(rest), coeff);
        }
        out
    }

    /// Terms in rendering order: higher degree first, then lexicographic.
    pub fn ordered_terms(&self) -> Vec<(&Monomial, i64)> {
        let mut v: Vec<_> = self.terms.iter().map(|(m, c)| (m, *c)).collect();
        v.sort_by(|a, b| b.0.degree().cmp(&a.0.degree()).then_with(|| a.0.cmp(b.0)));
        v
    }
}

impl From<&Lin> for Poly {
    fn from(l: &Lin) -> Self {
        let mut p = Poly::constant(l.constant);
        for (k, c) in &l.coeffs {
            p.add_term(Monomial::var(k), *c);
        }
        p
    }
}

impl From<Lin> for Poly {
    fn from(l: Lin) -> Self {
        Poly::from(&l)
    }
}

impl From<i64> for Poly {
    fn from(c: i64) -> Self {
        Poly::constant(c)
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &rhs.scale(-1)
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-1)
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in self.ordered_terms() {
            if m.0.is_empty() {
                write_term(f, &mut first, c, None)?;
            } else {
                write_term(f, &mut first, c, Some(&m.to_string()))?;
            }
        }
        Ok(())
    }
}

impl Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        crate::pra::parse_poly(&text).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(pairs: &[(&str, i64)]) -> Bindings {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn arithmetic_and_eval() {
        let p0 = Poly::var("p0");
        let p1 = Poly::var("p1");
        // p0*(p1-1) + 1
        let e = &(&p0 * &(&p1 - &Poly::constant(1))) + &Poly::constant(1);
        assert_eq!(e.eval(&b(&[("p0", 2), ("p1", 3)])).unwrap(), 5);
        assert_eq!(e.to_string(), "p0*p1 - p0 + 1");
        assert!((&e - &e).is_zero());
    }

    #[test]
    fn unbound_parameter_errors() {
        let e = Poly::var("N0");
        assert_eq!(e.eval(&Bindings::new()), Err(UnboundParam("N0".into())));
    }

    #[test]
    fn rendering_orders_by_degree() {
        let p = &(&Poly::var("a") * &Poly::var("a")) + &Poly::var("b");
        let p = &p + &Poly::constant(-4);
        assert_eq!(p.to_string(), "a^2 + b - 4");
    }

    #[test]
    fn serde_roundtrip() {
        let p = &(&Poly::var("N0") * &Poly::var("p1")) + &Poly::constant(-2);
        let s = serde_json::to_string(&p).unwrap();
        let q: Poly = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn partial_evaluation() {
        let p = &(&Poly::var("N0") * &Poly::var("p1")) + &Poly::var("p1");
        let q = p.partial_eval(&b(&[("p1", 3)]));
        assert_eq!(q, &Poly::var("N0").scale(3) + &Poly::constant(3));
    }
}
