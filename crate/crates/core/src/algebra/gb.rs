//! Buchberger's algorithm for submodules of free modules over `Q[v_1..v_n]`.
//!
//! Module monomials `v^a e_i` are compared by, in turn: the block of the
//! position (higher blocks are eliminated first), the elimination degree (a
//! weighted count of designated variables), the total exponent degree, graded
//! reverse lexicographic order on exponents, and finally the position.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use super::poly::{Mono, Poly, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Order {
    block: Vec<u32>,
    elim: Vec<u32>,
}

impl Order {
    pub fn new(block: Vec<u32>, elim: Vec<u32>) -> Self {
        Self { block, elim }
    }

    /// Plain order on `npos` positions and `nvars` variables.
    pub fn plain(npos: usize, nvars: usize) -> Self {
        Self { block: vec![0; npos], elim: vec![0; nvars] }
    }

    pub fn npos(&self) -> usize {
        self.block.len()
    }

    pub fn nvars(&self) -> usize {
        self.elim.len()
    }

    fn key(&self, exp: &[u32], pos: usize) -> [u32; 3] {
        let e: u32 = exp.iter().zip(&self.elim).map(|(a, w)| a * w).sum();
        let t: u32 = exp.iter().sum();
        [self.block[pos], e, t]
    }
}

fn grevlex(a: &[u32], b: &[u32]) -> Ordering {
    for i in (0..a.len()).rev() {
        if a[i] != b[i] {
            return if a[i] < b[i] { Ordering::Greater } else { Ordering::Less };
        }
    }
    Ordering::Equal
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    key: [u32; 3],
    pub exp: Mono,
    pub pos: usize,
    pub c: Q,
}

impl Term {
    pub fn elim_degree(&self) -> u32 {
        self.key[1]
    }
}

fn cmp_terms(a: &Term, b: &Term) -> Ordering {
    a.key.cmp(&b.key).then_with(|| grevlex(&a.exp, &b.exp)).then_with(|| a.pos.cmp(&b.pos))
}

/// Module element with terms sorted in decreasing order.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Vector {
    terms: Vec<Term>,
}

impl Vector {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn from_polys(polys: &[Poly], order: &Order) -> Self {
        let mut terms = Vec::new();
        for (pos, p) in polys.iter().enumerate() {
            for (e, c) in p.terms() {
                terms.push(Term { key: order.key(e, pos), exp: e.clone(), pos, c: c.clone() });
            }
        }
        terms.sort_by(|a, b| cmp_terms(b, a));
        Self { terms }
    }

    pub fn to_polys(&self, npos: usize, nvars: usize) -> Vec<Poly> {
        let mut out = vec![Poly::zero(nvars); npos];
        for t in &self.terms {
            out[t.pos].add_term(t.exp.clone(), t.c.clone());
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn lead(&self) -> Option<&Term> {
        self.terms.first()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    fn scale(&mut self, c: &Q) {
        for t in &mut self.terms {
            t.c *= c;
        }
    }

    fn make_monic(&mut self) {
        if let Some(l) = self.terms.first() {
            if !l.c.is_one() {
                let inv = Q::one() / &l.c;
                self.scale(&inv);
            }
        }
    }

    /// `self - c * m * other`, terms at indices below `from` are known to be unaffected.
    fn sub_mul(&self, other: &Vector, c: &Q, m: &[u32], order: &Order) -> Vector {
        let shifted: Vec<Term> = other
            .terms
            .iter()
            .map(|t| {
                let exp: Mono = t.exp.iter().zip(m).map(|(a, b)| a + b).collect();
                Term { key: order.key(&exp, t.pos), exp, pos: t.pos, c: -(&t.c * c) }
            })
            .collect();
        let mut out = Vec::with_capacity(self.terms.len() + shifted.len());
        let (mut i, mut j) = (0, 0);
        let a = &self.terms;
        let b = &shifted;
        while i < a.len() && j < b.len() {
            match cmp_terms(&a[i], &b[j]) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &a[i].c + &b[j].c;
                    if !c.is_zero() {
                        out.push(Term { key: a[i].key, exp: a[i].exp.clone(), pos: a[i].pos, c });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Vector { terms: out }
    }
}

fn divides(a: &[u32], b: &[u32]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn lcm(a: &[u32], b: &[u32]) -> Mono {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn quotient(b: &[u32], a: &[u32]) -> Mono {
    b.iter().zip(a).map(|(x, y)| x - y).collect()
}

#[derive(Clone, Debug)]
struct Pair {
    i: usize,
    j: usize,
    lcm: Mono,
    deg: u32,
}

/// A Groebner basis together with its order.
#[derive(Clone, Debug)]
pub struct Groebner {
    order: Order,
    elems: Vec<Vector>,
    by_pos: Vec<Vec<usize>>,
}

impl Groebner {
    pub fn new(gens: Vec<Vector>, order: Order) -> Self {
        let npos = order.npos();
        let mut gb = Groebner { order, elems: Vec::new(), by_pos: vec![Vec::new(); npos] };
        let mut pairs: Vec<Pair> = Vec::new();
        let mut gens: Vec<Vector> = gens.into_iter().filter(|g| !g.is_zero()).collect();
        gens.sort_by(|a, b| cmp_terms(a.lead().expect("nonzero"), b.lead().expect("nonzero")));
        for g in gens {
            let r = gb.top_reduce(g);
            if !r.is_zero() {
                gb.insert(r, &mut pairs);
            }
        }
        while !pairs.is_empty() {
            let best = (0..pairs.len())
                .min_by(|&a, &b| pairs[a].deg.cmp(&pairs[b].deg).then_with(|| grevlex(&pairs[b].lcm, &pairs[a].lcm)))
                .expect("nonempty");
            let p = pairs.swap_remove(best);
            let s = gb.spoly(p.i, p.j, &p.lcm);
            let r = gb.top_reduce(s);
            if !r.is_zero() {
                gb.insert(r, &mut pairs);
            }
        }
        gb.interreduce();
        gb
    }

    fn spoly(&self, i: usize, j: usize, l: &[u32]) -> Vector {
        let a = &self.elems[i];
        let b = &self.elems[j];
        let la = a.lead().expect("nonzero");
        let lb = b.lead().expect("nonzero");
        let ma = quotient(l, &la.exp);
        let mb = quotient(l, &lb.exp);
        let zero = Vector::zero();
        let sa = zero.sub_mul(a, &-Q::one(), &ma, &self.order);
        sa.sub_mul(b, &Q::one(), &mb, &self.order)
    }

    fn insert(&mut self, mut h: Vector, pairs: &mut Vec<Pair>) {
        h.make_monic();
        let k = self.elems.len();
        let lh = h.lead().expect("nonzero").clone();
        // Gebauer-Moeller: discard old pairs made redundant by h
        pairs.retain(|p| {
            let pi = self.elems[p.i].lead().expect("nonzero");
            if pi.pos != lh.pos || !divides(&lh.exp, &p.lcm) {
                return true;
            }
            let li = lcm(&self.elems[p.i].lead().expect("nonzero").exp, &lh.exp);
            let lj = lcm(&self.elems[p.j].lead().expect("nonzero").exp, &lh.exp);
            li == p.lcm || lj == p.lcm
        });
        let mut new: Vec<Pair> = self.by_pos[lh.pos]
            .iter()
            .map(|&i| {
                let l = lcm(&self.elems[i].lead().expect("nonzero").exp, &lh.exp);
                let deg = l.iter().sum();
                Pair { i, j: k, lcm: l, deg }
            })
            .collect();
        // chain criterion among the new pairs
        new.sort_by(|a, b| a.deg.cmp(&b.deg).then_with(|| a.lcm.cmp(&b.lcm)));
        let mut kept: Vec<Pair> = Vec::new();
        for p in new {
            if kept.iter().any(|q| divides(&q.lcm, &p.lcm)) {
                continue;
            }
            kept.push(p);
        }
        pairs.extend(kept);
        self.by_pos[lh.pos].push(k);
        self.elems.push(h);
    }

    fn find_divisor(&self, t: &Term) -> Option<usize> {
        self.by_pos[t.pos].iter().copied().find(|&i| divides(&self.elems[i].lead().expect("nonzero").exp, &t.exp))
    }

    fn top_reduce(&self, mut v: Vector) -> Vector {
        while let Some(l) = v.lead() {
            let Some(i) = self.find_divisor(l) else { break };
            let g = &self.elems[i];
            let m = quotient(&l.exp, &g.lead().expect("nonzero").exp);
            let c = l.c.clone();
            v = v.sub_mul(g, &c, &m, &self.order);
        }
        v
    }

    /// Full normal form.
    pub fn reduce(&self, mut v: Vector) -> Vector {
        let mut idx = 0;
        while idx < v.terms.len() {
            let t = &v.terms[idx];
            if let Some(i) = self.find_divisor(t) {
                let g = &self.elems[i];
                let m = quotient(&t.exp, &g.lead().expect("nonzero").exp);
                let c = t.c.clone();
                v = v.sub_mul(g, &c, &m, &self.order);
            } else {
                idx += 1;
            }
        }
        v
    }

    fn interreduce(&mut self) {
        let n = self.elems.len();
        let mut keep = vec![true; n];
        for i in 0..n {
            let li = self.elems[i].lead().expect("nonzero");
            for j in 0..n {
                if i == j || !keep[j] {
                    continue;
                }
                let lj = self.elems[j].lead().expect("nonzero");
                if lj.pos == li.pos && divides(&lj.exp, &li.exp) && (lj.exp != li.exp || j < i) {
                    keep[i] = false;
                    break;
                }
            }
        }
        let kept: Vec<Vector> = self.elems.drain(..).zip(keep).filter(|(_, k)| *k).map(|(v, _)| v).collect();
        self.by_pos = vec![Vec::new(); self.order.npos()];
        for (k, v) in kept.iter().enumerate() {
            self.by_pos[v.lead().expect("nonzero").pos].push(k);
        }
        self.elems = kept;
        for k in 0..self.elems.len() {
            let v = self.elems[k].clone();
            let lead = Vector { terms: v.terms[..1].to_vec() };
            let tail = Vector { terms: v.terms[1..].to_vec() };
            let tail = self.reduce(tail);
            let mut terms = lead.terms;
            terms.extend(tail.terms);
            self.elems[k] = Vector { terms };
        }
        self.elems.sort_by(|a, b| cmp_terms(a.lead().expect("nonzero"), b.lead().expect("nonzero")));
        self.by_pos = vec![Vec::new(); self.order.npos()];
        for (k, v) in self.elems.iter().enumerate() {
            self.by_pos[v.lead().expect("nonzero").pos].push(k);
        }
    }

    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn elements(&self) -> &[Vector] {
        &self.elems
    }

    pub fn contains(&self, v: Vector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Whether `v^exp e_pos` is a standard monomial.
    pub fn is_standard(&self, exp: &[u32], pos: usize) -> bool {
        !self.by_pos[pos].iter().any(|&i| divides(&self.elems[i].lead().expect("nonzero").exp, exp))
    }

    /// Leading exponents at a position.
    pub fn leads_at(&self, pos: usize) -> impl Iterator<Item = &Mono> {
        self.by_pos[pos].iter().map(move |&i| &self.elems[i].lead().expect("nonzero").exp)
    }

    /// Largest exponent of each variable over all leading monomials.
    pub fn max_lead_exponents(&self) -> Vec<u32> {
        let mut m = vec![0; self.order.nvars()];
        for v in &self.elems {
            for (a, b) in m.iter_mut().zip(&v.lead().expect("nonzero").exp) {
                *a = (*a).max(*b);
            }
        }
        m
    }
}
