//! Component rings: a polynomial ring on degree-2 generators with finitely
//! many linear forms inverted.
//!
//! A [`Universe`] fixes the coordinates (a basis of a character lattice, one
//! polynomial variable per basis vector) and a list of invertible linear
//! forms. A [`Ring`] picks the subset of forms that is actually inverted and
//! is realised as `Q[u, t_S] / (l_s t_s - 1 : s in S)` with `t_s` in degree -2.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{self, IntVec};

use super::poly::{Poly, Q};
use num_traits::One;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Universe {
    /// Ambient rank of the character lattice.
    rank: usize,
    /// Characters (vectors in `Z^rank`) whose coordinates are the polynomial variables.
    basis: Vec<IntVec>,
    /// Invertible forms, as primitive characters in the span of `basis`.
    forms: Vec<IntVec>,
}

impl fmt::Debug for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Universe(basis={:?}, forms={:?})", self.basis, self.forms)
    }
}

impl Universe {
    pub fn new(rank: usize, basis: Vec<IntVec>, mut forms: Vec<IntVec>) -> Result<Arc<Self>> {
        forms.sort();
        forms.dedup();
        for f in &forms {
            if lattice::coords(&basis, f).is_none() {
                return Err(Error::IncompatibleRings(format!("form {f:?} is not in the coordinate lattice")));
            }
        }
        Ok(Arc::new(Self { rank, basis, forms }))
    }

    /// The ground field, as a universe with no variables.
    pub fn point(rank: usize) -> Arc<Self> {
        Arc::new(Self { rank, basis: vec![], forms: vec![] })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn basis(&self) -> &[IntVec] {
        &self.basis
    }

    pub fn forms(&self) -> &[IntVec] {
        &self.forms
    }

    pub fn nu(&self) -> usize {
        self.basis.len()
    }

    pub fn nforms(&self) -> usize {
        self.forms.len()
    }

    pub fn nvars(&self) -> usize {
        self.nu() + self.nforms()
    }

    /// Weighted degrees of the variables.
    pub fn weights(&self) -> Vec<i64> {
        let mut w = vec![2; self.nu()];
        w.extend(std::iter::repeat(-2).take(self.nforms()));
        w
    }

    pub fn form_index(&self, alpha: &[i64]) -> Option<usize> {
        let p = lattice::primitive(alpha);
        self.forms.iter().position(|f| *f == p)
    }

    /// Linear polynomial of a character lying in the coordinate lattice.
    pub fn linear_form(&self, alpha: &[i64]) -> Result<Poly> {
        let c = lattice::coords(&self.basis, alpha)
            .ok_or_else(|| Error::IncompatibleRings(format!("character {alpha:?} is not in the coordinate lattice")))?;
        let mut full = c;
        full.extend(std::iter::repeat(0).take(self.nforms()));
        Ok(Poly::linear(self.nvars(), &full))
    }

    pub fn var_names(&self) -> Vec<String> {
        let std_basis = self.basis == lattice::identity(self.rank);
        let mut names: Vec<String> = (0..self.nu())
            .map(|i| {
                if std_basis && self.rank == 1 {
                    "c".to_string()
                } else if std_basis && self.rank <= 3 {
                    ["x", "y", "z"][i].to_string()
                } else {
                    format!("u{i}")
                }
            })
            .collect();
        names.extend((0..self.nforms()).map(|i| format!("t{i}")));
        names
    }
}

/// A localization of the polynomial ring of a universe.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ring {
    uni: Arc<Universe>,
    inverted: BTreeSet<usize>,
}

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ring(nu={}, inverted={:?})", self.uni.nu(), self.inverted.iter().map(|&i| &self.uni.forms[i]).collect::<Vec<_>>())
    }
}

impl Ring {
    pub fn polynomial(uni: Arc<Universe>) -> Self {
        Self { uni, inverted: BTreeSet::new() }
    }

    pub fn localized(uni: Arc<Universe>, inverted: BTreeSet<usize>) -> Self {
        Self { uni, inverted }
    }

    /// The ring with every listed character inverted (characters not in the
    /// universe are an error).
    pub fn inverting(uni: Arc<Universe>, chars: &[IntVec]) -> Result<Self> {
        let mut inv = BTreeSet::new();
        for a in chars {
            let i = uni
                .form_index(a)
                .ok_or_else(|| Error::IncompatibleRings(format!("form {a:?} is not available for inversion")))?;
            inv.insert(i);
        }
        Ok(Self { uni, inverted: inv })
    }

    pub fn field(rank: usize) -> Self {
        Self::polynomial(Universe::point(rank))
    }

    pub fn universe(&self) -> &Arc<Universe> {
        &self.uni
    }

    pub fn inverted(&self) -> &BTreeSet<usize> {
        &self.inverted
    }

    pub fn nvars(&self) -> usize {
        self.uni.nvars()
    }

    pub fn nu(&self) -> usize {
        self.uni.nu()
    }

    pub fn weights(&self) -> Vec<i64> {
        self.uni.weights()
    }

    pub fn is_field(&self) -> bool {
        self.uni.nu() == 0
    }

    /// `self` is a localization of (or equal to) `other`.
    pub fn localizes(&self, other: &Ring) -> bool {
        self.uni == other.uni && self.inverted.is_superset(&other.inverted)
    }

    pub fn with_inverted(&self, more: &BTreeSet<usize>) -> Ring {
        let mut inv = self.inverted.clone();
        inv.extend(more.iter().copied());
        Ring { uni: self.uni.clone(), inverted: inv }
    }

    /// Defining relations `l_s t_s - 1`.
    pub fn relations(&self) -> Vec<Poly> {
        let n = self.nvars();
        self.inverted
            .iter()
            .map(|&s| {
                let l = self.uni.linear_form(&self.uni.forms[s]).expect("form in lattice");
                let t = Poly::var(n, self.uni.nu() + s);
                &(&l * &t) - &Poly::one(n)
            })
            .collect()
    }

    pub fn zero(&self) -> Poly {
        Poly::zero(self.nvars())
    }

    pub fn one(&self) -> Poly {
        Poly::one(self.nvars())
    }

    pub fn constant(&self, c: Q) -> Poly {
        Poly::constant(self.nvars(), c)
    }

    pub fn var(&self, i: usize) -> Poly {
        Poly::var(self.nvars(), i)
    }

    pub fn linear_form(&self, alpha: &[i64]) -> Result<Poly> {
        self.uni.linear_form(alpha)
    }

    /// Inverse of the linear form of `alpha`, which must be inverted in this ring.
    pub fn inverse_form(&self, alpha: &[i64]) -> Result<Poly> {
        let i = self
            .uni
            .form_index(alpha)
            .filter(|i| self.inverted.contains(i))
            .ok_or_else(|| Error::IncompatibleRings(format!("form {alpha:?} is not inverted")))?;
        // l_alpha = k * l_primitive, so 1/l_alpha = t / k
        let prim = lattice::primitive(alpha);
        let k = alpha.iter().zip(&prim).find(|(_, p)| **p != 0).map(|(a, p)| a / p).unwrap_or(1);
        Ok(Poly::var(self.nvars(), self.uni.nu() + i).scale(&(Q::one() / super::poly::q(k))))
    }

    /// True when the element uses only the inverse variables of inverted forms.
    pub fn admits(&self, p: &Poly) -> bool {
        let nu = self.uni.nu();
        p.terms().all(|(e, _)| e[nu..].iter().enumerate().all(|(i, &k)| k == 0 || self.inverted.contains(&i)))
    }

    pub fn var_names(&self) -> Vec<String> {
        self.uni.var_names()
    }
}

/// A degree-preserving ring homomorphism given by images of all variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingMap {
    pub source: Ring,
    pub target: Ring,
    pub images: Vec<Poly>,
}

impl RingMap {
    pub fn identity(r: &Ring) -> Self {
        Self { source: r.clone(), target: r.clone(), images: (0..r.nvars()).map(|i| r.var(i)).collect() }
    }

    /// Localization `source -> target` within a common universe.
    pub fn localization(source: &Ring, target: &Ring) -> Result<Self> {
        if !target.localizes(source) {
            return Err(Error::IncompatibleRings(format!("{target:?} is not a localization of {source:?}")));
        }
        Ok(Self { source: source.clone(), target: target.clone(), images: (0..source.nvars()).map(|i| target.var(i)).collect() })
    }

    /// Inflation between universes: every coordinate character of the source
    /// is rewritten in the target coordinates, and inverted forms go to the
    /// same forms of the target.
    pub fn inflation(source: &Ring, target: &Ring) -> Result<Self> {
        let su = source.universe();
        let tu = target.universe();
        let mut images = Vec::with_capacity(source.nvars());
        for b in su.basis() {
            images.push(tu.linear_form(b)?);
        }
        for (i, f) in su.forms().iter().enumerate() {
            if source.inverted().contains(&i) {
                images.push(target.inverse_form(f)?);
            } else {
                // unused variable; map to zero so it never contributes
                images.push(target.zero());
            }
        }
        Ok(Self { source: source.clone(), target: target.clone(), images })
    }

    pub fn apply(&self, p: &Poly) -> Poly {
        p.substitute(&self.images, self.target.nvars())
    }

    pub fn compose(&self, next: &RingMap) -> Result<RingMap> {
        if self.target != next.source {
            return Err(Error::IncompatibleRings("ring maps are not composable".into()));
        }
        Ok(RingMap { source: self.source.clone(), target: next.target.clone(), images: self.images.iter().map(|p| next.apply(p)).collect() })
    }
}
