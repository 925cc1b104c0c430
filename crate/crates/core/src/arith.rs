//! Modular arithmetic context: factorizations, unit-group structure with dense
//! discrete-log tables, and inverse tables.
//!
//! Everything downstream (characters, character sums, tuple counting) works
//! through a [`Modulus`], which bundles the factored modulus `q`, the cyclic
//! decomposition of `(Z/qZ)^*`, a dense dlog table, and a dense inverse table.
//! Tables are sized `O(q)`, so construction is guarded by an explicit limit
//! (default `2^24`).

use crate::error::{capacity, domain, Error, Result};

/// Largest modulus for which dense tables are built by default.
pub const DEFAULT_TABLE_LIMIT: u64 = 1 << 24;

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    if a == 0 || b == 0 {
        return 0;
    }
    a / gcd(a, b) * b
}

/// `a * b mod q` without overflow for any `u64` inputs.
pub fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    if q == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

/// Inverse of `n` modulo `q` by the extended Euclidean algorithm.
///
/// Works without any precomputed tables; the table-backed path is
/// [`Modulus::inverse`].
pub fn mod_inverse(n: u64, q: u64) -> Result<u64> {
    if q < 2 {
        return Err(domain(format!("modulus {q} below 2")));
    }
    let n = n % q;
    let (mut r0, mut r1) = (q as i128, n as i128);
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let d = r0 / r1;
        (r0, r1) = (r1, r0 - d * r1);
        (s0, s1) = (s1, s0 - d * s1);
    }
    if r0 != 1 {
        return Err(Error::NotInvertible { n, q });
    }
    Ok(s0.rem_euclid(q as i128) as u64)
}

pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    if q.is_multiple_of(2) {
        return q == 2;
    }
    if q.is_multiple_of(3) {
        return q == 3;
    }
    let mut d = 5u64;
    while d * d <= q {
        if q.is_multiple_of(d) || q.is_multiple_of(d + 2) {
            return false;
        }
        d += 6;
    }
    true
}

/// Prime factorization of a modulus, with the usual multiplicative companions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    q: u64,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn new(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(domain(format!("cannot factor {q}: argument below 2")));
        }
        let mut factors = Vec::new();
        let mut rest = q;
        let mut p = 2u64;
        while p * p <= rest {
            if rest.is_multiple_of(p) {
                let mut e = 0u32;
                while rest.is_multiple_of(p) {
                    rest /= p;
                    e += 1;
                }
                factors.push((p, e));
            }
            p += if p == 2 { 1 } else { 2 };
        }
        if rest > 1 {
            factors.push((rest, 1));
        }
        Ok(Factorization { q, factors })
    }

    pub fn value(&self) -> u64 {
        self.q
    }

    /// Prime-power factors `(p, e)` in ascending order of `p`.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn phi(&self) -> u64 {
        self.factors
            .iter()
            .map(|&(p, e)| p.pow(e - 1) * (p - 1))
            .product()
    }

    pub fn omega(&self) -> u32 {
        self.factors.len() as u32
    }

    pub fn is_prime(&self) -> bool {
        self.factors.len() == 1 && self.factors[0].1 == 1
    }

    /// All divisors of `q`, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let prev = divs.clone();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                divs.extend(prev.iter().map(|d| d * pk));
            }
        }
        divs.sort_unstable();
        divs
    }

    /// Squarefree divisors paired with their Mobius values.
    pub fn squarefree_divisors(&self) -> Vec<(u64, i32)> {
        let mut out = vec![(1u64, 1i32)];
        for &(p, _) in &self.factors {
            let prev = out.clone();
            out.extend(prev.iter().map(|&(d, mu)| (d * p, -mu)));
        }
        out.sort_unstable();
        out
    }
}

pub fn factorize(q: u64) -> Result<Factorization> {
    Factorization::new(q)
}

pub fn euler_phi(q: u64) -> u64 {
    if q <= 1 {
        return if q == 1 { 1 } else { 0 };
    }
    Factorization::new(q).expect("q >= 2").phi()
}

pub fn mobius(d: u64) -> i32 {
    assert!(d >= 1, "mobius argument must be >= 1");
    if d == 1 {
        return 1;
    }
    let f = Factorization::new(d).expect("d >= 2");
    if f.factors().iter().any(|&(_, e)| e > 1) {
        return 0;
    }
    if f.omega().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

pub fn omega(q: u64) -> u32 {
    assert!(q >= 1, "omega argument must be >= 1");
    if q == 1 {
        return 0;
    }
    Factorization::new(q).expect("q >= 2").omega()
}

/// One cyclic factor of `(Z/qZ)^*`.
///
/// `generator` is lifted via CRT so that `generator^order == 1 (mod q)`
/// globally, not just modulo its own prime power.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CyclicComponent {
    pub prime: u64,
    pub prime_power: u64,
    pub generator: u64,
    pub order: u64,
}

/// Cyclic decomposition of `(Z/qZ)^*` with a dense discrete-log table.
///
/// Components are ordered: odd prime powers ascending, then the components of
/// the 2-part (for `2^e`, `e >= 3`: the order-2 sign component before the
/// order-`2^(e-2)` component). The dlog table maps every unit `n < q` to its
/// exponent tuple along these components.
#[derive(Debug, Clone)]
pub struct UnitGroupStructure {
    q: u64,
    phi: u64,
    exponent: u64,
    components: Vec<CyclicComponent>,
    unit: Vec<bool>,
    dlog: Vec<u32>,
}

/// Smallest primitive root modulo an odd prime power, by exhaustive order
/// checks against the prime factors of `phi(p^e)`.
fn smallest_primitive_root(p: u64, e: u32) -> u64 {
    let pe = p.pow(e);
    let n = pe / p * (p - 1);
    let nf = Factorization::new(n).expect("phi >= 2 for odd prime powers");
    'outer: for g in 2..pe {
        if g % p == 0 {
            continue;
        }
        for &(r, _) in nf.factors() {
            if pow_mod(g, n / r, pe) == 1 {
                continue 'outer;
            }
        }
        return g;
    }
    unreachable!("odd prime powers have primitive roots");
}

/// CRT lift: the residue that is `g mod m1` and `1 mod m2` (coprime moduli).
fn crt_lift(g: u64, m1: u64, m2: u64) -> u64 {
    if m2 == 1 {
        return g % m1;
    }
    let q = m1 * m2;
    let inv_m2 = mod_inverse(m2 % m1, m1).expect("coprime moduli");
    let inv_m1 = mod_inverse(m1 % m2, m2).expect("coprime moduli");
    let t1 = mul_mod(mul_mod(g % q, m2 % q, q), inv_m2, q);
    let t2 = mul_mod(m1 % q, inv_m1, q);
    (t1 + t2) % q
}

impl UnitGroupStructure {
    pub fn new(q: u64) -> Result<Self> {
        Self::with_limit(q, DEFAULT_TABLE_LIMIT)
    }

    pub fn with_limit(q: u64, limit: u64) -> Result<Self> {
        if q < 2 {
            return Err(domain(format!("unit group needs q >= 2, got {q}")));
        }
        if q > limit {
            return Err(capacity(format!(
                "q = {q} exceeds the table limit {limit}"
            )));
        }
        let f = Factorization::new(q)?;
        let mut components = Vec::new();
        for &(p, e) in f.factors().iter().filter(|&&(p, _)| p != 2) {
            let pe = p.pow(e);
            components.push(CyclicComponent {
                prime: p,
                prime_power: pe,
                generator: crt_lift(smallest_primitive_root(p, e), pe, q / pe),
                order: pe / p * (p - 1),
            });
        }
        if let Some(&(_, e)) = f.factors().iter().find(|&&(p, _)| p == 2) {
            let pe = 2u64.pow(e);
            if e == 2 {
                components.push(CyclicComponent {
                    prime: 2,
                    prime_power: 4,
                    generator: crt_lift(3, 4, q / 4),
                    order: 2,
                });
            } else if e >= 3 {
                components.push(CyclicComponent {
                    prime: 2,
                    prime_power: pe,
                    generator: crt_lift(pe - 1, pe, q / pe),
                    order: 2,
                });
                components.push(CyclicComponent {
                    prime: 2,
                    prime_power: pe,
                    generator: crt_lift(5, pe, q / pe),
                    order: 2u64.pow(e - 2),
                });
            }
            // e == 1 contributes nothing: (Z/2Z)^* is trivial.
        }
        let phi = f.phi();
        debug_assert_eq!(components.iter().map(|c| c.order).product::<u64>(), phi);
        let exponent = components.iter().fold(1u64, |acc, c| lcm(acc, c.order));

        let stride = components.len();
        let mut unit = vec![false; q as usize];
        let mut dlog = vec![0u32; q as usize * stride];
        let gens: Vec<u64> = components.iter().map(|c| c.generator).collect();
        let orders: Vec<u64> = components.iter().map(|c| c.order).collect();
        let mut exps = vec![0u32; stride];
        let mut val = 1u64;
        loop {
            unit[val as usize] = true;
            dlog[val as usize * stride..(val as usize + 1) * stride].copy_from_slice(&exps);
            // Odometer step; multiplying a generator `order` times returns val
            // to its previous state, so carries need no division.
            let mut j = 0;
            loop {
                if j == stride {
                    return Ok(UnitGroupStructure {
                        q,
                        phi,
                        exponent,
                        components,
                        unit,
                        dlog,
                    });
                }
                exps[j] += 1;
                val = mul_mod(val, gens[j], q);
                if (exps[j] as u64) < orders[j] {
                    break;
                }
                exps[j] = 0;
                j += 1;
            }
        }
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    /// Exponent of the group: lcm of the component orders.
    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    pub fn components(&self) -> &[CyclicComponent] {
        &self.components
    }

    pub fn is_unit(&self, n: u64) -> bool {
        self.unit[(n % self.q) as usize]
    }

    /// Exponent tuple of `n` along the components, or `None` for non-units.
    /// `n` is reduced mod `q` first.
    pub fn dlog(&self, n: u64) -> Option<&[u32]> {
        let n = (n % self.q) as usize;
        if !self.unit[n] {
            return None;
        }
        let stride = self.components.len();
        Some(&self.dlog[n * stride..(n + 1) * stride])
    }

    /// Rebuild the unit from an exponent tuple. Inverse of [`dlog`](Self::dlog).
    pub fn from_dlog(&self, exps: &[u32]) -> u64 {
        assert_eq!(exps.len(), self.components.len());
        let mut val = 1u64;
        for (c, &e) in self.components.iter().zip(exps) {
            val = mul_mod(val, pow_mod(c.generator, e as u64 % c.order, self.q), self.q);
        }
        val
    }
}

/// Evaluation context for a fixed modulus: factorization, unit-group tables,
/// and a dense inverse table.
#[derive(Debug, Clone)]
pub struct Modulus {
    q: u64,
    factorization: Factorization,
    units: UnitGroupStructure,
    inverse: Vec<u32>,
}

impl Modulus {
    pub fn new(q: u64) -> Result<Self> {
        Self::with_limit(q, DEFAULT_TABLE_LIMIT)
    }

    pub fn with_limit(q: u64, limit: u64) -> Result<Self> {
        let units = UnitGroupStructure::with_limit(q, limit)?;
        let factorization = Factorization::new(q)?;
        // Twin odometer: walk all exponent tuples once, tracking the unit and
        // its inverse together, so the inverse table costs O(phi(q)) multiplies.
        let stride = units.components().len();
        let gens: Vec<u64> = units.components().iter().map(|c| c.generator).collect();
        let ginvs: Vec<u64> = gens
            .iter()
            .map(|&g| mod_inverse(g, q).expect("generators are units"))
            .collect();
        let orders: Vec<u64> = units.components().iter().map(|c| c.order).collect();
        let mut inverse = vec![0u32; q as usize];
        let mut exps = vec![0u64; stride];
        let (mut val, mut ival) = (1u64, 1u64);
        'fill: loop {
            inverse[val as usize] = ival as u32;
            let mut j = 0;
            loop {
                if j == stride {
                    break 'fill;
                }
                exps[j] += 1;
                val = mul_mod(val, gens[j], q);
                ival = mul_mod(ival, ginvs[j], q);
                if exps[j] < orders[j] {
                    break;
                }
                exps[j] = 0;
                j += 1;
            }
        }
        Ok(Modulus {
            q,
            factorization,
            units,
            inverse,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn phi(&self) -> u64 {
        self.units.phi()
    }

    pub fn omega(&self) -> u32 {
        self.factorization.omega()
    }

    pub fn is_prime(&self) -> bool {
        self.factorization.is_prime()
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn units(&self) -> &UnitGroupStructure {
        &self.units
    }

    pub fn is_unit(&self, n: u64) -> bool {
        self.units.is_unit(n)
    }

    /// Table-backed inverse. `n` is reduced mod `q` first.
    pub fn inverse(&self, n: u64) -> Result<u64> {
        let r = n % self.q;
        let inv = self.inverse[r as usize];
        if inv == 0 {
            return Err(Error::NotInvertible { n: r, q: self.q });
        }
        Ok(inv as u64)
    }

    /// Unchecked table lookup: 0 signals a non-unit.
    #[inline]
    pub fn inverse_raw(&self, n: u64) -> u64 {
        self.inverse[(n % self.q) as usize] as u64
    }

    /// Units of `q` in ascending order.
    pub fn unit_values(&self) -> impl Iterator<Item = u64> + '_ {
        (1..self.q).filter(move |&n| self.units.is_unit(n))
    }
}
