//! Character sums over arithmetic progressions in an interval, and the moment
//! bounds attached to them: the second-moment inequality, the fourth moment
//! over nonprincipal characters (prime modulus), the principal-character count
//! with its divisor-bounded error, and reported bound shapes for the maximal
//! nonprincipal sum.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arith::{gcd, Modulus};
use crate::characters::{CharacterGroup, DirichletCharacter};
use crate::error::{domain, Result};

/// The summation set `{ n : K+1 <= n <= K+L, n == b (mod a) }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgressionInterval {
    offset: u64,
    length: u64,
    step: u64,
    residue: i64,
}

impl ProgressionInterval {
    pub fn new(offset: u64, length: u64, step: u64, residue: i64) -> Result<Self> {
        if length == 0 {
            return Err(domain("interval length must be positive"));
        }
        if step == 0 {
            return Err(domain("progression step must be positive"));
        }
        Ok(ProgressionInterval {
            offset,
            length,
            step,
            residue,
        })
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn length(&self) -> u64 {
        self.length
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn residue(&self) -> i64 {
        self.residue
    }

    fn index_bounds(&self) -> (i128, i128) {
        let a = self.step as i128;
        let b = self.residue as i128;
        let k = self.offset as i128;
        let l = self.length as i128;
        ((k - b).div_euclid(a) + 1, (k + l - b).div_euclid(a))
    }

    /// Number of members: `floor((K+L-b)/a) - floor((K-b)/a)`.
    pub fn term_count(&self) -> u64 {
        let (lo, hi) = self.index_bounds();
        (hi - lo + 1).max(0) as u64
    }

    /// Members in increasing order.
    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        let (lo, hi) = self.index_bounds();
        let a = self.step as i128;
        let b = self.residue as i128;
        (lo..=hi).map(move |m| (a * m + b) as u64)
    }
}

#[derive(Clone, Copy, Default)]
struct KahanComplex {
    sum: Complex64,
    c: Complex64,
}

impl KahanComplex {
    fn new() -> Self {
        KahanComplex {
            sum: Complex64::new(0.0, 0.0),
            c: Complex64::new(0.0, 0.0),
        }
    }

    #[inline]
    fn add(&mut self, v: Complex64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> Complex64 {
        self.sum
    }
}

/// `sum of chi(n)` over the progression interval, with compensated
/// accumulation. Arguments beyond `q` are reduced before evaluation.
pub fn progression_char_sum(chi: &DirichletCharacter<'_>, iv: &ProgressionInterval) -> Complex64 {
    let mut acc = KahanComplex::new();
    for n in iv.members() {
        acc.add(chi.eval(n));
    }
    acc.value()
}

/// Verifies the substitution `n = a*m + b`:
/// `S(chi) = chi(a) * sum over (K+1-b)/a <= m <= (K+L-b)/a of chi(m + b*inv(a))`.
/// Requires `gcd(a, q) = 1`. Returns whether both evaluations agree within
/// `1e-9` per term.
pub fn shift_identity_check(
    chi: &DirichletCharacter<'_>,
    iv: &ProgressionInterval,
) -> Result<bool> {
    let m = chi.group().modulus();
    let q = m.q();
    if gcd(iv.step % q, q) != 1 {
        return Err(domain(format!(
            "shift identity needs gcd(a, q) = 1, got a = {}, q = {q}",
            iv.step
        )));
    }
    let lhs = progression_char_sum(chi, iv);
    let a_inv = m.inverse(iv.step)?;
    let shift = (iv.residue as i128 * a_inv as i128).rem_euclid(q as i128) as u64;
    let (lo, hi) = iv.index_bounds();
    let mut acc = KahanComplex::new();
    for idx in lo..=hi {
        let n = (idx + shift as i128).rem_euclid(q as i128) as u64;
        acc.add(chi.eval(n));
    }
    let rhs = chi.eval(iv.step % q) * acc.value();
    let tol = 1e-9 * (iv.term_count().max(1) as f64);
    Ok((lhs - rhs).norm() <= tol)
}

fn check_moment_window(iv: &ProgressionInterval, q: u64) -> Result<()> {
    if iv.offset + iv.length > q {
        return Err(domain(format!(
            "moment bounds need K + L <= q, got {} + {} > {q}",
            iv.offset, iv.length
        )));
    }
    if gcd(iv.step % q, q) != 1 {
        return Err(domain(format!(
            "moment bounds need gcd(a, q) = 1, got a = {}, q = {q}",
            iv.step
        )));
    }
    Ok(())
}

/// `sum over all characters of |S(chi)|^2`. Requires `K + L <= q` and
/// `gcd(a, q) = 1`; bounded by [`second_moment_bound`].
pub fn second_moment(g: &CharacterGroup<'_>, iv: &ProgressionInterval) -> Result<f64> {
    check_moment_window(iv, g.modulus().q())?;
    let chars = g.characters();
    Ok(chars
        .par_iter()
        .map(|chi| progression_char_sum(chi, iv).norm_sqr())
        .sum())
}

/// The second-moment bound `phi(q) * (L/a + 1)`.
pub fn second_moment_bound(g: &CharacterGroup<'_>, iv: &ProgressionInterval) -> f64 {
    g.order() as f64 * (iv.length as f64 / iv.step as f64 + 1.0)
}

#[derive(Debug, Clone, Copy)]
pub struct FourthMoment {
    /// `sum over nonprincipal characters of |S(chi)|^4`.
    pub value: f64,
    /// `value / (q * (L/a + 1)^2 * ln(q)^2)`, the reported shape ratio.
    pub bound_ratio: f64,
}

/// Fourth moment over nonprincipal characters; the bound shape it is compared
/// against holds for prime moduli, so composite `q` is rejected.
pub fn fourth_moment_nonprincipal(
    g: &CharacterGroup<'_>,
    iv: &ProgressionInterval,
) -> Result<FourthMoment> {
    let m = g.modulus();
    if !m.is_prime() {
        return Err(domain(format!(
            "fourth-moment bound needs a prime modulus, got {}",
            m.q()
        )));
    }
    check_moment_window(iv, m.q())?;
    let chars = g.characters();
    let value: f64 = chars
        .par_iter()
        .filter(|chi| !chi.is_principal())
        .map(|chi| {
            let s = progression_char_sum(chi, iv).norm_sqr();
            s * s
        })
        .sum();
    let q = m.q() as f64;
    let shape = q * (iv.length as f64 / iv.step as f64 + 1.0).powi(2) * q.ln().powi(2);
    Ok(FourthMoment {
        value,
        bound_ratio: value / shape,
    })
}

/// Outcome of counting units of `q` in a progression interval: the exact
/// count, the main term `phi(q) * L / (a * q)`, and the divisor-count error
/// bound `2^omega(q)`.
#[derive(Debug, Clone, Copy)]
pub struct PrincipalCount {
    pub exact: u64,
    pub main: f64,
    pub error_bound: f64,
    main_num: u128,
    main_den: u128,
    bound_pow: u32,
}

impl PrincipalCount {
    /// `|exact - main| <= 2^omega(q)`, checked in exact integer arithmetic.
    pub fn within_bound(&self) -> bool {
        let lhs = (self.exact as i128 * self.main_den as i128 - self.main_num as i128).abs();
        let rhs = (1i128 << self.bound_pow) * self.main_den as i128;
        lhs <= rhs
    }
}

/// `sum of chi_0(n)` over the progression interval, i.e. the number of its
/// members that are units, against the main term `phi(q) * L / (a * q)`.
/// Requires `K + L <= q` and `gcd(a, q) = 1`.
pub fn principal_progression_count(m: &Modulus, iv: &ProgressionInterval) -> Result<PrincipalCount> {
    check_moment_window(iv, m.q())?;
    let exact = iv.members().filter(|&n| m.is_unit(n)).count() as u64;
    let main_num = m.phi() as u128 * iv.length as u128;
    let main_den = iv.step as u128 * m.q() as u128;
    let bound_pow = m.omega();
    Ok(PrincipalCount {
        exact,
        main: main_num as f64 / main_den as f64,
        error_bound: (1u64 << bound_pow) as f64,
        main_num,
        main_den,
        bound_pow,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct MaxCharSum {
    /// `max over nonprincipal chi of |sum_{U < n <= U+V} chi(n)|`.
    pub max_abs: f64,
    /// `max_abs / (sqrt(q) * ln(q))`, the ratio against the classical
    /// square-root threshold.
    pub pv_ratio: f64,
}

/// Maximal absolute interval sum over nonprincipal characters.
/// Requires `1 <= V <= q` and at least one nonprincipal character.
pub fn max_nonprincipal_sum(g: &CharacterGroup<'_>, start: u64, len: u64) -> Result<MaxCharSum> {
    let q = g.modulus().q();
    if len == 0 || len > q {
        return Err(domain(format!("interval length must satisfy 1 <= V <= q, got {len}")));
    }
    if g.order() < 2 {
        return Err(domain(format!("no nonprincipal characters mod {q}")));
    }
    let iv = ProgressionInterval::new(start, len, 1, 0)?;
    let chars = g.characters();
    let max_abs = chars
        .par_iter()
        .filter(|chi| !chi.is_principal())
        .map(|chi| progression_char_sum(chi, &iv).norm())
        .reduce(|| 0.0, f64::max);
    let qf = q as f64;
    Ok(MaxCharSum {
        max_abs,
        pv_ratio: max_abs / (qf.sqrt() * qf.ln()),
    })
}

/// The interval bound shape `V^(1 - 1/r) * q^((r+1) / (4 r^2))`.
pub fn interval_bound_shape(q: u64, v: u64, r: u32) -> f64 {
    assert!(r >= 1);
    let rf = r as f64;
    (v as f64).powf(1.0 - 1.0 / rf) * (q as f64).powf((rf + 1.0) / (4.0 * rf * rf))
}

/// Ratio of an observed maximal sum against [`interval_bound_shape`].
/// The shape is proven for `r in {1, 2, 3}` at every modulus but only for
/// prime moduli beyond that, so `r >= 4` is rejected for composite `q`.
pub fn interval_bound_ratio(m: &Modulus, v: u64, max_abs: f64, r: u32) -> Result<f64> {
    if r == 0 {
        return Err(domain("bound-shape parameter r must be >= 1"));
    }
    if r >= 4 && !m.is_prime() {
        return Err(domain(format!(
            "bound shape with r = {r} requires a prime modulus, got {}",
            m.q()
        )));
    }
    Ok(max_abs / interval_bound_shape(m.q(), v, r))
}

/// The progression bound shape `q^((4r^2 - 3r + 1) / (4 r^2)) * a^(-(r-1)/r)`.
/// Reported as a ratio only; nothing is asserted against it.
pub fn progression_bound_shape(q: u64, a: u64, r: u32) -> f64 {
    assert!(r >= 1);
    let rf = r as f64;
    (q as f64).powf((4.0 * rf * rf - 3.0 * rf + 1.0) / (4.0 * rf * rf))
        * (a as f64).powf(-(rf - 1.0) / rf)
}
