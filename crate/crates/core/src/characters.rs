//! Dirichlet characters mod `q` as exponent tuples on the cyclic components
//! of `(Z/qZ)^*`, with exact root-of-unity values.
//!
//! A [`CharacterGroup`] precomputes the group exponent `E`, per-component
//! weights, and a table of the `E`-th roots of unity, so the fast path
//! [`DirichletCharacter::eval`] is a dlog lookup plus a dot product. The exact
//! path returns a canonical [`RootOfUnity`] and is what the orthogonality
//! oracle groups on.

use std::collections::HashMap;
use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;

use crate::arith::{gcd, lcm, Modulus};
use crate::error::{domain, Result};

/// `exp(2*pi*i * numerator / order)` in lowest terms, or the value zero
/// (a character evaluated at a non-unit).
///
/// Canonical form: zero is `(0, 1, true)`; otherwise `numerator < order` and
/// `gcd(numerator, order) == 1`, so derived equality and hashing agree with
/// equality of the complex values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    numerator: u64,
    order: u64,
    zero: bool,
}

impl RootOfUnity {
    pub fn of(numerator: u64, order: u64) -> Self {
        assert!(order >= 1, "root of unity needs a positive order");
        let mut n = numerator % order;
        let mut o = order;
        let g = gcd(n, o);
        if g > 1 {
            n /= g;
            o /= g;
        }
        if n == 0 {
            o = 1;
        }
        RootOfUnity {
            numerator: n,
            order: o,
            zero: false,
        }
    }

    pub fn zero() -> Self {
        RootOfUnity {
            numerator: 0,
            order: 1,
            zero: true,
        }
    }

    pub fn one() -> Self {
        RootOfUnity {
            numerator: 0,
            order: 1,
            zero: false,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn is_one(&self) -> bool {
        !self.zero && self.numerator == 0
    }

    pub fn numerator(&self) -> u64 {
        self.numerator
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn mul(&self, other: &RootOfUnity) -> RootOfUnity {
        if self.zero || other.zero {
            return RootOfUnity::zero();
        }
        let l = lcm(self.order, other.order);
        RootOfUnity::of(
            (self.numerator * (l / self.order) + other.numerator * (l / other.order)) % l,
            l,
        )
    }

    pub fn conj(&self) -> RootOfUnity {
        if self.zero {
            return RootOfUnity::zero();
        }
        RootOfUnity::of(self.order - self.numerator, self.order)
    }

    pub fn value(&self) -> Complex64 {
        if self.zero {
            return Complex64::new(0.0, 0.0);
        }
        let t = TAU * self.numerator as f64 / self.order as f64;
        Complex64::new(t.cos(), t.sin())
    }
}

/// The full character group `X_q` for a fixed modulus, with shared
/// evaluation tables.
pub struct CharacterGroup<'a> {
    m: &'a Modulus,
    exponent: u64,
    weights: Vec<u64>,
    orders: Vec<u64>,
    roots: Vec<Complex64>,
}

impl<'a> CharacterGroup<'a> {
    pub fn new(m: &'a Modulus) -> Self {
        let exponent = m.units().exponent().max(1);
        let orders: Vec<u64> = m.units().components().iter().map(|c| c.order).collect();
        let weights: Vec<u64> = orders.iter().map(|&o| exponent / o).collect();
        let roots = (0..exponent)
            .map(|t| {
                let x = TAU * t as f64 / exponent as f64;
                Complex64::new(x.cos(), x.sin())
            })
            .collect();
        CharacterGroup {
            m,
            exponent,
            weights,
            orders,
            roots,
        }
    }

    pub fn modulus(&self) -> &Modulus {
        self.m
    }

    /// Number of characters, `phi(q)`.
    pub fn order(&self) -> u64 {
        self.m.phi()
    }

    /// Group exponent: every character value is an `exponent()`-th root of unity.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn character(&self, exponents: Vec<u64>) -> Result<DirichletCharacter<'_>> {
        if exponents.len() != self.orders.len() {
            return Err(domain(format!(
                "expected {} character exponents, got {}",
                self.orders.len(),
                exponents.len()
            )));
        }
        for (&e, &o) in exponents.iter().zip(&self.orders) {
            if e >= o {
                return Err(domain(format!(
                    "character exponent {e} out of range for component order {o}"
                )));
            }
        }
        Ok(self.character_unchecked(exponents))
    }

    fn character_unchecked(&self, exponents: Vec<u64>) -> DirichletCharacter<'_> {
        let twist = exponents
            .iter()
            .zip(&self.weights)
            .map(|(&e, &w)| e * w % self.exponent)
            .collect();
        DirichletCharacter {
            ctx: self,
            exponents,
            twist,
        }
    }

    pub fn principal(&self) -> DirichletCharacter<'_> {
        self.character_unchecked(vec![0; self.orders.len()])
    }

    /// All characters in ascending lexicographic order of their exponent
    /// tuples; the principal character comes first.
    pub fn iter(&self) -> impl Iterator<Item = DirichletCharacter<'_>> {
        CharacterIter {
            ctx: self,
            next: Some(vec![0; self.orders.len()]),
        }
    }

    /// Collected characters, handy for parallel iteration.
    pub fn characters(&self) -> Vec<DirichletCharacter<'_>> {
        self.iter().collect()
    }

    /// `(1/phi(q)) * sum over all characters of chi(u)`, evaluated exactly by
    /// grouping equal root-of-unity values. Returns 1 if `u == 1 (mod q)` and
    /// 0 otherwise. This is the oracle path; see
    /// [`orthogonality_sum_float`](Self::orthogonality_sum_float) for the
    /// floating production path.
    pub fn orthogonality_sum_exact(&self, u: u64) -> u64 {
        let mut counts: HashMap<RootOfUnity, u64> = HashMap::new();
        for chi in self.iter() {
            *counts.entry(chi.eval_root(u)).or_insert(0) += 1;
        }
        let total = sum_roots_exact(&counts)
            .expect("character values at a point form full cosets of roots of unity");
        if total == self.order() as i128 {
            1
        } else {
            assert_eq!(total, 0);
            0
        }
    }

    /// `(1/phi(q)) * sum over all characters of chi(u)` in floating point.
    pub fn orthogonality_sum_float(&self, u: u64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for chi in self.iter() {
            acc += chi.eval(u);
        }
        acc / self.order() as f64
    }
}

struct CharacterIter<'g> {
    ctx: &'g CharacterGroup<'g>,
    next: Option<Vec<u64>>,
}

impl<'g> Iterator for CharacterIter<'g> {
    type Item = DirichletCharacter<'g>;

    fn next(&mut self) -> Option<Self::Item> {
        let exps = self.next.take()?;
        let mut succ = exps.clone();
        let mut j = succ.len();
        let advanced = loop {
            if j == 0 {
                break false;
            }
            j -= 1;
            succ[j] += 1;
            if succ[j] < self.ctx.orders[j] {
                break true;
            }
            succ[j] = 0;
        };
        if advanced {
            self.next = Some(succ);
        }
        Some(self.ctx.character_unchecked(exps))
    }
}

/// A Dirichlet character, stored as its exponent tuple against the component
/// generators of the unit group.
pub struct DirichletCharacter<'g> {
    ctx: &'g CharacterGroup<'g>,
    exponents: Vec<u64>,
    twist: Vec<u64>,
}

impl<'g> DirichletCharacter<'g> {
    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn group(&self) -> &'g CharacterGroup<'g> {
        self.ctx
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    pub fn conjugate(&self) -> DirichletCharacter<'g> {
        let exps = self
            .exponents
            .iter()
            .zip(&self.ctx.orders)
            .map(|(&e, &o)| if e == 0 { 0 } else { o - e })
            .collect();
        self.ctx.character_unchecked(exps)
    }

    /// Combined exponent of chi(n) over the group exponent, or `None` at
    /// non-units. `n` is reduced mod `q` first.
    #[inline]
    fn combined_index(&self, n: u64) -> Option<u64> {
        let d = self.ctx.m.units().dlog(n)?;
        let mut t = 0u64;
        for (&w, &e) in self.twist.iter().zip(d) {
            // w < E <= 2^24 and e < 2^24, so the dot product fits u64 easily.
            t += w * e as u64;
        }
        Some(t % self.ctx.exponent)
    }

    /// Exact value of chi(n).
    pub fn eval_root(&self, n: u64) -> RootOfUnity {
        match self.combined_index(n) {
            None => RootOfUnity::zero(),
            Some(t) => RootOfUnity::of(t, self.ctx.exponent),
        }
    }

    /// Floating value of chi(n) via the shared root table.
    #[inline]
    pub fn eval(&self, n: u64) -> Complex64 {
        match self.combined_index(n) {
            None => Complex64::new(0.0, 0.0),
            Some(t) => self.ctx.roots[t as usize],
        }
    }
}

impl PartialEq for DirichletCharacter<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.exponents == other.exponents
    }
}

impl Eq for DirichletCharacter<'_> {}

impl fmt::Debug for DirichletCharacter<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DirichletCharacter({:?})", self.exponents)
    }
}

/// Exact sum of a multiset of root-of-unity values, when its structure allows
/// one: zeros contribute nothing; `c` copies of 1 sum to `c`; equally many
/// copies of every `d`-th root of unity sum to 0. Returns `None` for any
/// other shape. Character value multisets (over all characters at a point,
/// or over all units for a fixed character) always classify.
pub fn sum_roots_exact(counts: &HashMap<RootOfUnity, u64>) -> Option<i128> {
    let nonzero: Vec<(&RootOfUnity, u64)> = counts
        .iter()
        .filter(|(r, &c)| !r.is_zero() && c > 0)
        .map(|(r, &c)| (r, c))
        .collect();
    if nonzero.is_empty() {
        return Some(0);
    }
    if nonzero.len() == 1 && nonzero[0].0.is_one() {
        return Some(nonzero[0].1 as i128);
    }
    let d = nonzero.iter().fold(1u64, |acc, (r, _)| lcm(acc, r.order()));
    if nonzero.len() as u64 != d {
        return None;
    }
    let copies = nonzero[0].1;
    if nonzero.iter().any(|&(_, c)| c != copies) {
        return None;
    }
    let mut scaled: Vec<u64> = nonzero
        .iter()
        .map(|(r, _)| r.numerator() * (d / r.order()))
        .collect();
    scaled.sort_unstable();
    if scaled.iter().enumerate().all(|(i, &s)| s == i as u64) {
        Some(0)
    } else {
        None
    }
}
