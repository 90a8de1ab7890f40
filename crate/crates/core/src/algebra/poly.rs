//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;
pub type Mono = Vec<u32>;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qfrac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Mono, Q>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Q::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(e, Q::one())
    }

    pub fn monomial(exp: Mono, c: Q) -> Self {
        let mut p = Self::zero(exp.len());
        if !c.is_zero() {
            p.terms.insert(exp, c);
        }
        p
    }

    /// Linear form `sum_i coeffs[i] * x_i`.
    pub fn linear(nvars: usize, coeffs: &[i64]) -> Self {
        let mut p = Self::zero(nvars);
        for (i, &a) in coeffs.iter().enumerate() {
            if a != 0 {
                let mut e = vec![0; nvars];
                e[i] = 1;
                p.terms.insert(e, q(a));
            }
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Mono, Q)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Q)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u32]) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    pub fn add_term(&mut self, e: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(e.len(), self.nvars);
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(e, a)| (e.clone(), a * c)).collect() }
    }

    pub fn mul_term(&self, m: &[u32], c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, a)| (e.iter().zip(m).map(|(x, y)| x + y).collect(), a * c))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.nvars);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Weighted degree if homogeneous, `None` for zero or inhomogeneous input.
    pub fn degree(&self, weights: &[i64]) -> Option<i64> {
        let mut it = self.terms.keys().map(|e| mono_degree(e, weights));
        let first = it.next()?;
        if it.all(|d| d == first) {
            Some(first)
        } else {
            None
        }
    }

    pub fn is_homogeneous(&self, weights: &[i64]) -> bool {
        self.is_zero() || self.degree(weights).is_some()
    }

    pub fn constant_value(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().expect("one term");
                e.iter().all(|&x| x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Substitute `images[i]` for variable `i`; the result lives in `target_nvars` variables.
    pub fn substitute(&self, images: &[Poly], target_nvars: usize) -> Poly {
        let mut out = Poly::zero(target_nvars);
        let mut cache: BTreeMap<(usize, u32), Poly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut t = Poly::constant(target_nvars, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let pw = cache.entry((i, k)).or_insert_with(|| images[i].pow(k)).clone();
                t = &t * &pw;
            }
            out = &out + &t;
        }
        out
    }

    /// Embed into a ring with more variables, placing variable `i` at `map[i]`.
    pub fn reindex(&self, map: &[usize], target_nvars: usize) -> Poly {
        let mut out = Poly::zero(target_nvars);
        for (e, c) in &self.terms {
            let mut f = vec![0; target_nvars];
            for (i, &k) in e.iter().enumerate() {
                f[map[i]] += k;
            }
            out.add_term(f, c.clone());
        }
        out
    }

    /// Multiply all coefficients so that they become coprime integers with
    /// positive leading (lexicographically largest) coefficient.
    pub fn primitive_part(&self) -> Poly {
        use num_integer::Integer;
        if self.is_zero() {
            return self.clone();
        }
        let mut den = BigInt::one();
        for c in self.terms.values() {
            den = den.lcm(c.denom());
        }
        let mut num = BigInt::zero();
        for c in self.terms.values() {
            let v = (c * Q::from_integer(den.clone())).to_integer();
            num = num.gcd(&v);
        }
        let lead = self.terms.values().next_back().expect("nonzero");
        let sign = if lead.is_negative() { -BigInt::one() } else { BigInt::one() };
        self.scale(&(Q::from_integer(den) / Q::from_integer(num * sign)))
    }
}

pub fn mono_degree(e: &[u32], weights: &[i64]) -> i64 {
    e.iter().zip(weights).map(|(&k, &w)| k as i64 * w).sum()
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Q::one())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            for (f, d) in &rhs.terms {
                out.add_term(e.iter().zip(f).map(|(x, y)| x + y).collect(), c * d);
            }
        }
        out
    }
}

/// Variable names used for display.
#[derive(Clone, Debug, Default)]
pub struct VarNames(pub Vec<String>);

impl Poly {
    pub fn display<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { p: self, names }
    }
}

pub struct PolyDisplay<'a> {
    p: &'a Poly,
    names: &'a [String],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.p.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.p.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let is_const = e.iter().all(|&k| k == 0);
            if is_const || !c.is_one() {
                write!(f, "{c}")?;
                if !is_const {
                    write!(f, "*")?;
                }
            }
            let mut firstv = true;
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if !firstv {
                    write!(f, "*")?;
                }
                firstv = false;
                let name = self.names.get(i).cloned().unwrap_or_else(|| format!("v{i}"));
                if k == 1 {
                    write!(f, "{name}")?;
                } else {
                    write!(f, "{name}^{k}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display(&[]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let x = Poly::var(2, 0);
        let y = Poly::var(2, 1);
        let s = &x + &y;
        let d = &x - &y;
        let p = &s * &d;
        assert_eq!(p, &x.pow(2) - &y.pow(2));
        assert_eq!(p.degree(&[2, 2]), Some(4));
        assert_eq!((&s + &(-&s)).is_zero(), true);
    }

    #[test]
    fn substitution() {
        let x = Poly::var(1, 0);
        let p = &x.pow(2) + &Poly::one(1);
        let img = Poly::linear(2, &[1, 1]);
        let r = p.substitute(&[img.clone()], 2);
        assert_eq!(r, &(&img * &img) + &Poly::one(2));
    }

    #[test]
    fn primitive() {
        let p = Poly::linear(2, &[2, -4]).scale(&qfrac(-1, 3));
        assert_eq!(p.primitive_part(), Poly::linear(2, &[1, -2]));
    }
}
