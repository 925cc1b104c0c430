//! Tuples of residues in progressions whose product's inverse is itself
//! constrained: exact enumeration over dilated boxes and general regions, the
//! equivalent character-sum count, reported main terms and error shapes,
//! threshold exponents, and the spread and convex-hull statistics of inverse
//! pairs.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::arith::{gcd, mul_mod, Modulus};
use crate::characters::CharacterGroup;
use crate::charsums::{progression_char_sum, ProgressionInterval};
use crate::discrepancy::PointSet;
use crate::error::{capacity, domain, precision, Result};
use crate::rat::{ceil_mul, rat, rat_one, rat_to_f64, rat_zero, Rat};
use crate::region::RegionSpec;

/// Default cap on the number of enumerated tuples per counting call.
pub const DEFAULT_ENUM_BUDGET: u64 = 100_000_000;

/// Half-open box `prod [alpha_j, beta_j)` inside `[0,1]^s` with exact
/// rational endpoints, so dilating by `q` yields well-defined integer ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusBox {
    alpha: Vec<Rat>,
    beta: Vec<Rat>,
}

impl TorusBox {
    pub fn new(alpha: Vec<Rat>, beta: Vec<Rat>) -> Result<Self> {
        if alpha.is_empty() || alpha.len() != beta.len() {
            return Err(domain("box needs matching nonempty endpoint vectors"));
        }
        for (a, b) in alpha.iter().zip(&beta) {
            if *a < rat_zero() || a >= b || *b > rat_one() {
                return Err(domain(format!("box edge [{a}, {b}) is not inside [0, 1]")));
            }
        }
        Ok(TorusBox { alpha, beta })
    }

    /// The whole cube `[0,1)^dim`.
    pub fn unit(dim: usize) -> Self {
        TorusBox {
            alpha: vec![rat_zero(); dim],
            beta: vec![rat_one(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[Rat] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Rat] {
        &self.beta
    }

    pub fn measure(&self) -> Rat {
        self.alpha
            .iter()
            .zip(&self.beta)
            .fold(rat_one(), |acc, (&a, &b)| acc * (b - a))
    }

    pub fn measure_f64(&self) -> f64 {
        rat_to_f64(self.measure())
    }

    /// Integer residues of the dilated edges: `[lo, hi]` holds the n with
    /// `alpha*q <= n < beta*q`, clamped below to 1 (0 is never a unit). Empty
    /// edges come back as `(1, 0)`. Both counting routes share this one
    /// derivation, which is what makes them agree bit for bit.
    fn integer_ranges(&self, q: u64) -> Vec<(u64, u64)> {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(&a, &b)| {
                let lo = ceil_mul(a, q).max(1);
                let hi = ceil_mul(b, q) - 1;
                if hi < lo {
                    (1, 0)
                } else {
                    (lo as u64, hi as u64)
                }
            })
            .collect()
    }
}

/// A counting instance: residues `n_1..n_k`, each a unit with
/// `n_i == b_i (mod a_i)`, whose product's inverse mod `q` must satisfy
/// `inverse == b_{k+1} (mod a_{k+1})`.
#[derive(Debug, Clone)]
pub struct LehmerInstance<'a> {
    m: &'a Modulus,
    a: Vec<u64>,
    b: Vec<u64>,
}

impl<'a> LehmerInstance<'a> {
    /// Requires `k + 1 >= 2` progressions with `1 <= a_i < q` and
    /// `gcd(a_i, q) = 1`. Residues are reduced mod `a_i` up front.
    pub fn new(m: &'a Modulus, a: Vec<u64>, b: Vec<i64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(domain(format!(
                "progression moduli and residues differ in length: {} vs {}",
                a.len(),
                b.len()
            )));
        }
        if a.len() < 2 {
            return Err(domain("an instance needs k + 1 >= 2 progressions"));
        }
        let q = m.q();
        for &ai in &a {
            if ai == 0 || ai >= q {
                return Err(domain(format!(
                    "progression modulus {ai} outside [1, {q})"
                )));
            }
            if gcd(ai, q) != 1 {
                return Err(domain(format!(
                    "progression modulus {ai} shares a factor with q = {q}"
                )));
            }
        }
        let b = a
            .iter()
            .zip(&b)
            .map(|(&ai, &bi)| bi.rem_euclid(ai as i64) as u64)
            .collect();
        Ok(LehmerInstance { m, a, b })
    }

    pub fn modulus(&self) -> &'a Modulus {
        self.m
    }

    /// Number of free coordinates; the instance has `k + 1` progressions.
    pub fn k(&self) -> usize {
        self.a.len() - 1
    }

    pub fn a(&self) -> &[u64] {
        &self.a
    }

    /// Residues after reduction mod the progression moduli.
    pub fn b(&self) -> &[u64] {
        &self.b
    }

    /// Unit members of the progression on `axis` within `[lo, hi]`.
    fn candidates(&self, axis: usize, lo: u64, hi: u64) -> Vec<u64> {
        if lo > hi {
            return Vec::new();
        }
        let (a, b) = (self.a[axis], self.b[axis]);
        let first = lo + (b + a - lo % a) % a;
        if first > hi {
            return Vec::new();
        }
        (first..=hi)
            .step_by(a as usize)
            .filter(|&n| self.m.is_unit(n))
            .collect()
    }

    /// `#N(a, b, q)`: solutions with no box constraint.
    pub fn count_all(&self, budget: u64) -> Result<u64> {
        self.count_in_box(&TorusBox::unit(self.k() + 1), budget)
    }

    /// Exact number of solutions with every dilated coordinate in the box:
    /// `alpha_nu * q <= n_nu < beta_nu * q` for the k free coordinates and
    /// for the inverse of their product.
    pub fn count_in_box(&self, sigma: &TorusBox, budget: u64) -> Result<u64> {
        let k = self.k();
        if sigma.dim() != k + 1 {
            return Err(domain(format!(
                "box dimension {} does not match k + 1 = {}",
                sigma.dim(),
                k + 1
            )));
        }
        let ranges = sigma.integer_ranges(self.m.q());
        let lists: Vec<Vec<u64>> = (0..k)
            .map(|i| self.candidates(i, ranges[i].0, ranges[i].1))
            .collect();
        check_budget(&lists, budget)?;
        if lists.iter().any(|l| l.is_empty()) {
            return Ok(0);
        }
        let (inv_lo, inv_hi) = ranges[k];
        Ok(lists[0]
            .par_iter()
            .map(|&n| self.count_rec(&lists, 1, n, inv_lo, inv_hi))
            .sum())
    }

    fn count_rec(&self, lists: &[Vec<u64>], depth: usize, prod: u64, inv_lo: u64, inv_hi: u64) -> u64 {
        if depth == lists.len() {
            let inv = self.m.inverse_raw(prod);
            let k = self.k();
            return u64::from(inv >= inv_lo && inv <= inv_hi && inv % self.a[k] == self.b[k]);
        }
        let q = self.m.q();
        lists[depth]
            .iter()
            .map(|&n| self.count_rec(lists, depth + 1, mul_mod(prod, n, q), inv_lo, inv_hi))
            .sum()
    }

    /// The same count through the character identity: the number of
    /// solutions is `(1/phi(q)) * sum over chi of prod over nu of S_nu(chi)`,
    /// where `S_nu` is the character sum over the nu-th dilated edge. Both
    /// routes derive integer ranges from the same exact endpoints, so the
    /// results must agree exactly. A rounding residual above 0.1 reports a
    /// precision error rather than a doubtful count.
    pub fn count_in_box_charsum(&self, sigma: &TorusBox) -> Result<u64> {
        let k = self.k();
        if sigma.dim() != k + 1 {
            return Err(domain(format!(
                "box dimension {} does not match k + 1 = {}",
                sigma.dim(),
                k + 1
            )));
        }
        let ranges = sigma.integer_ranges(self.m.q());
        let mut intervals = Vec::with_capacity(k + 1);
        for (nu, &(lo, hi)) in ranges.iter().enumerate() {
            if lo > hi {
                return Ok(0);
            }
            intervals.push(ProgressionInterval::new(
                lo - 1,
                hi - lo + 1,
                self.a[nu],
                self.b[nu] as i64,
            )?);
        }
        let g = CharacterGroup::new(self.m);
        let chars = g.characters();
        let total = chars
            .par_iter()
            .map(|chi| {
                intervals
                    .iter()
                    .map(|iv| progression_char_sum(chi, iv))
                    .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s)
            })
            .reduce(|| Complex64::new(0.0, 0.0), |x, y| x + y);
        let scaled = total / g.order() as f64;
        let rounded = scaled.re.round();
        let residual = scaled.im.abs().max((scaled.re - rounded).abs());
        if residual > 0.1 || rounded < 0.0 {
            return Err(precision(format!(
                "character identity residual {residual:.4} at q = {}",
                self.m.q()
            )));
        }
        Ok(rounded as u64)
    }

    /// Streams every solution in lexicographic order of the candidate lists,
    /// passing the k free coordinates and the inverse of their product.
    pub fn for_each_solution<F>(&self, budget: u64, mut f: F) -> Result<()>
    where
        F: FnMut(&[u64], u64),
    {
        let k = self.k();
        let q = self.m.q();
        let lists: Vec<Vec<u64>> = (0..k).map(|i| self.candidates(i, 1, q - 1)).collect();
        check_budget(&lists, budget)?;
        if lists.iter().any(|l| l.is_empty()) {
            return Ok(());
        }
        let mut tuple = vec![0u64; k];
        self.walk(&lists, 0, 1, &mut tuple, &mut f);
        Ok(())
    }

    fn walk<F>(&self, lists: &[Vec<u64>], depth: usize, prod: u64, tuple: &mut Vec<u64>, f: &mut F)
    where
        F: FnMut(&[u64], u64),
    {
        if depth == lists.len() {
            let inv = self.m.inverse_raw(prod);
            if inv % self.a[depth] == self.b[depth] {
                f(tuple, inv);
            }
            return;
        }
        let q = self.m.q();
        for &n in &lists[depth] {
            tuple[depth] = n;
            self.walk(lists, depth + 1, mul_mod(prod, n, q), tuple, f);
        }
    }

    /// Exact number of solutions landing in a region: joint when the region
    /// has dimension k+1 (inverse coordinate included), marginal at
    /// dimension k.
    pub fn count_in_region(&self, region: &RegionSpec, budget: u64) -> Result<u64> {
        let k = self.k();
        let joint = if region.dim() == k + 1 {
            true
        } else if region.dim() == k {
            false
        } else {
            return Err(domain(format!(
                "region dimension {} matches neither k = {k} nor k + 1",
                region.dim()
            )));
        };
        let q = self.m.q() as f64;
        let mut count = 0u64;
        let mut x = vec![0.0f64; region.dim()];
        self.for_each_solution(budget, |tuple, inv| {
            for (c, &n) in x.iter_mut().zip(tuple.iter()) {
                *c = n as f64 / q;
            }
            if joint {
                x[k] = inv as f64 / q;
            }
            if region.contains(&x) {
                count += 1;
            }
        })?;
        Ok(count)
    }

    /// Solution points normalized to the torus with the inverse coordinate
    /// included (dimension k+1).
    pub fn point_set_joint(&self, budget: u64) -> Result<PointSet> {
        let q = self.m.q() as i128;
        let mut pts = Vec::new();
        self.for_each_solution(budget, |tuple, inv| {
            let mut p: Vec<Rat> = tuple.iter().map(|&n| rat(n as i128, q)).collect();
            p.push(rat(inv as i128, q));
            pts.push(p);
        })?;
        PointSet::new(pts)
    }

    /// The same points without the inverse coordinate (dimension k).
    pub fn point_set_marginal(&self, budget: u64) -> Result<PointSet> {
        let q = self.m.q() as i128;
        let mut pts = Vec::new();
        self.for_each_solution(budget, |tuple, _| {
            pts.push(tuple.iter().map(|&n| rat(n as i128, q)).collect());
        })?;
        PointSet::new(pts)
    }

    /// Spread statistic: the largest over solutions of the smallest distance
    /// from a coordinate to the inverse, `max over tuples of
    /// min_i |n_i - inverse|`.
    pub fn h_statistic(&self, budget: u64) -> Result<u64> {
        let mut best: Option<u64> = None;
        self.for_each_solution(budget, |tuple, inv| {
            let closest = tuple
                .iter()
                .map(|&n| n.abs_diff(inv))
                .min()
                .expect("instances have k >= 1 coordinates");
            best = Some(best.map_or(closest, |b| b.max(closest)));
        })?;
        best.ok_or_else(|| domain("spread statistic needs at least one solution"))
    }

    /// `measure * phi(q)^k / (a_1 ... a_{k+1})`.
    pub fn main_term(&self, measure: f64) -> f64 {
        measure * (self.m.phi() as f64).powi(self.k() as i32) / self.a_product() as f64
    }

    /// `a_1 * ... * a_{k+1}`.
    pub fn a_product(&self) -> u128 {
        self.a.iter().map(|&x| x as u128).product()
    }

    /// Euclidean norm of the progression-modulus vector.
    pub fn a_norm(&self) -> f64 {
        self.a
            .iter()
            .map(|&x| (x as f64) * (x as f64))
            .sum::<f64>()
            .sqrt()
    }

    fn two_term_shape(&self, exponent: Rat, power: Rat) -> f64 {
        let q = self.m.q() as f64;
        let pa = self.a_product() as f64;
        let k = self.k() as i32;
        self.a_norm() * q.powi(k - 1) / pa
            + q.powf(rat_to_f64(exponent)) / pa.powf(rat_to_f64(power))
    }

    /// Two-term error shape valid at every modulus, with sub-polynomial
    /// factors dropped: `|a| q^{k-1} / prod(a) + q^E / prod(a)^P`, `E` and
    /// `P` from [`error_exponent_composite`] and [`product_power_composite`].
    /// Reported, never asserted.
    pub fn error_shape_composite(&self, r: u32) -> Result<f64> {
        let k = self.k() as u32;
        Ok(self.two_term_shape(
            error_exponent_composite(k, r)?,
            product_power_composite(k, r)?,
        ))
    }

    /// Sharper shape available at prime moduli with `k >= 3`, built from
    /// [`error_exponent_prime`] and [`product_power_prime`].
    pub fn error_shape_prime(&self, r: u32) -> Result<f64> {
        self.require_prime()?;
        let k = self.k() as u32;
        Ok(self.two_term_shape(error_exponent_prime(k, r)?, product_power_prime(k, r)?))
    }

    /// Companion to [`error_shape_prime`] using [`error_exponent_prime_alt`];
    /// reports emit both and assert neither.
    pub fn error_shape_prime_alt(&self, r: u32) -> Result<f64> {
        self.require_prime()?;
        let k = self.k() as u32;
        Ok(self.two_term_shape(error_exponent_prime_alt(k, r)?, product_power_prime(k, r)?))
    }

    fn require_prime(&self) -> Result<()> {
        if !self.m.is_prime() {
            return Err(domain(format!(
                "prime-modulus error shape needs a prime q, got {}",
                self.m.q()
            )));
        }
        Ok(())
    }
}

fn check_budget(lists: &[Vec<u64>], budget: u64) -> Result<u64> {
    let mut prod: u128 = 1;
    for l in lists {
        prod = prod.saturating_mul(l.len() as u128);
    }
    if prod > budget as u128 {
        return Err(capacity(format!(
            "enumeration would visit {prod} tuples, budget is {budget}"
        )));
    }
    Ok(prod as u64)
}

/// Exponent `k - (3r-1)(k-1)/(4r^2)` of the second error term at arbitrary
/// moduli; defined for `k >= 2` and `r` in `{1, 2, 3}`. At `r = 1` this is
/// `(k+1)/2`.
pub fn error_exponent_composite(k: u32, r: u32) -> Result<Rat> {
    check_exponent_args(k, 2, r, Some(3))?;
    let (k, r) = (k as i128, r as i128);
    Ok(rat(k, 1) - rat((3 * r - 1) * (k - 1), 4 * r * r))
}

/// Power `1 - (k+r-1)/(r(k+1))` on the progression-modulus product that
/// accompanies [`error_exponent_composite`].
pub fn product_power_composite(k: u32, r: u32) -> Result<Rat> {
    check_exponent_args(k, 2, r, Some(3))?;
    let (k, r) = (k as i128, r as i128);
    Ok(rat_one() - rat(k + r - 1, r * (k + 1)))
}

/// Prime-modulus exponent `k - (3r-1)(k-3)/(4r^2)`, for `k >= 3`, `r >= 1`.
pub fn error_exponent_prime(k: u32, r: u32) -> Result<Rat> {
    check_exponent_args(k, 3, r, None)?;
    let (k, r) = (k as i128, r as i128);
    Ok(rat(k, 1) - rat((3 * r - 1) * (k - 3), 4 * r * r))
}

/// A second circulating form of the prime-modulus exponent,
/// `k - (3r-3)(k-1)/(4r^2)`. The two forms agree only at `(k, r) = (3, 1)`;
/// reports emit both and assert neither.
pub fn error_exponent_prime_alt(k: u32, r: u32) -> Result<Rat> {
    check_exponent_args(k, 3, r, None)?;
    let (k, r) = (k as i128, r as i128);
    Ok(rat(k, 1) - rat((3 * r - 3) * (k - 1), 4 * r * r))
}

/// Power `1 - (k+2r-3)/(r(k+1))` on the progression-modulus product that
/// accompanies both prime-modulus exponents.
pub fn product_power_prime(k: u32, r: u32) -> Result<Rat> {
    check_exponent_args(k, 3, r, None)?;
    let (k, r) = (k as i128, r as i128);
    Ok(rat_one() - rat(k + 2 * r - 3, r * (k + 1)))
}

fn check_exponent_args(k: u32, k_min: u32, r: u32, r_max: Option<u32>) -> Result<()> {
    if k < k_min {
        return Err(domain(format!("error shape needs k >= {k_min}, got {k}")));
    }
    if r < 1 || r_max.is_some_and(|m| r > m) {
        return Err(domain(format!(
            "error shape needs r in {}..={}, got {r}",
            1,
            r_max.map_or("inf".to_string(), |m| m.to_string())
        )));
    }
    Ok(())
}

/// Largest exponent `t(k)` such that the error shape stays below the main
/// term whenever `prod(a) <= q^{t(k) - delta}`: `(k^2-1)/2k` for
/// `2 <= k <= 4`, `5/2` at `k = 5`, and `2(k^2-1)/(3(k+2))` for `k >= 6`.
pub fn threshold_exponent(k: u32) -> Result<Rat> {
    if k < 2 {
        return Err(domain(format!("threshold exponent needs k >= 2, got {k}")));
    }
    let kk = k as i128;
    Ok(match k {
        2..=4 => rat(kk * kk - 1, 2 * kk),
        5 => rat(5, 2),
        _ => rat(2 * (kk * kk - 1), 3 * (kk + 2)),
    })
}

/// A finite set of integer points attached to a modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePointSet {
    q: u64,
    points: Vec<[i64; 2]>,
}

impl LatticePointSet {
    /// `{(n, inverse of n) : n a unit mod q}`, coordinates in `[1, q)`.
    pub fn inverse_pairs(m: &Modulus) -> Self {
        let points = m
            .unit_values()
            .map(|n| [n as i64, m.inverse_raw(n) as i64])
            .collect();
        LatticePointSet { q: m.q(), points }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn points(&self) -> &[[i64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// z-component of `(b - a) x (c - a)`: positive for a left turn.
fn cross(a: [i64; 2], b: [i64; 2], c: [i64; 2]) -> i128 {
    (b[0] - a[0]) as i128 * (c[1] - a[1]) as i128 - (b[1] - a[1]) as i128 * (c[0] - a[0]) as i128
}

/// Convex hull by monotone chain with exact integer orientation tests.
/// Vertices come back counterclockwise from the lexicographically smallest
/// point; collinear boundary points are dropped, so fully collinear input
/// degenerates to its two extreme points.
pub fn convex_hull(points: &[[i64; 2]]) -> Vec<[i64; 2]> {
    let mut pts: Vec<[i64; 2]> = points.to_vec();
    pts.sort_unstable();
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<[i64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[i64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Whether `p` lies inside or on the hull returned by [`convex_hull`].
pub fn hull_contains(hull: &[[i64; 2]], p: [i64; 2]) -> bool {
    match hull.len() {
        0 => false,
        1 => hull[0] == p,
        2 => {
            cross(hull[0], hull[1], p) == 0
                && p[0] >= hull[0][0].min(hull[1][0])
                && p[0] <= hull[0][0].max(hull[1][0])
                && p[1] >= hull[0][1].min(hull[1][1])
                && p[1] <= hull[0][1].max(hull[1][1])
        }
        _ => (0..hull.len()).all(|i| cross(hull[i], hull[(i + 1) % hull.len()], p) >= 0),
    }
}

/// Hull vertices of the inverse-pair set of `q` and their count.
pub fn inverse_pair_hull(m: &Modulus) -> Result<(Vec<[i64; 2]>, usize)> {
    if m.q() < 3 {
        return Err(domain(format!(
            "hull statistics need q >= 3, got {}",
            m.q()
        )));
    }
    let set = LatticePointSet::inverse_pairs(m);
    let hull = convex_hull(set.points());
    let v = hull.len();
    Ok((hull, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::MeasureSpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn inst<'a>(m: &'a Modulus, a: &[u64], b: &[i64]) -> LehmerInstance<'a> {
        LehmerInstance::new(m, a.to_vec(), b.to_vec()).unwrap()
    }

    fn random_coprime(rng: &mut ChaCha8Rng, q: u64, max: u64) -> u64 {
        loop {
            let a = rng.gen_range(1..q.min(max + 1).max(2));
            if gcd(a, q) == 1 {
                return a;
            }
        }
    }

    fn random_box(rng: &mut ChaCha8Rng, dim: usize) -> TorusBox {
        let mut alpha = Vec::with_capacity(dim);
        let mut beta = Vec::with_capacity(dim);
        for _ in 0..dim {
            let den = rng.gen_range(2..=12i128);
            let mut x = rng.gen_range(0..den);
            let mut y = rng.gen_range(0..=den);
            if x == y {
                y += 1;
            }
            if x > y {
                std::mem::swap(&mut x, &mut y);
            }
            alpha.push(rat(x, den));
            beta.push(rat(y, den));
        }
        TorusBox::new(alpha, beta).unwrap()
    }

    #[test]
    fn instance_validation() {
        let m = Modulus::new(12).unwrap();
        assert!(LehmerInstance::new(&m, vec![5], vec![0]).is_err());
        assert!(LehmerInstance::new(&m, vec![5, 7], vec![0]).is_err());
        assert!(LehmerInstance::new(&m, vec![0, 5], vec![0, 0]).is_err());
        assert!(LehmerInstance::new(&m, vec![12, 5], vec![0, 0]).is_err());
        assert!(LehmerInstance::new(&m, vec![4, 5], vec![0, 0]).is_err());
        let i = LehmerInstance::new(&m, vec![5, 7], vec![-1, 9]).unwrap();
        assert_eq!(i.b(), &[4, 2]);
        assert_eq!(i.k(), 1);
    }

    #[test]
    fn box_validation_and_measure() {
        assert!(TorusBox::new(vec![rat(1, 2)], vec![rat(1, 2)]).is_err());
        assert!(TorusBox::new(vec![rat(-1, 2)], vec![rat(1, 2)]).is_err());
        assert!(TorusBox::new(vec![rat(1, 2)], vec![rat(3, 2)]).is_err());
        assert!(TorusBox::new(vec![rat(0, 1)], vec![]).is_err());
        let b = TorusBox::new(
            vec![rat_zero(), rat_zero(), rat_zero()],
            vec![rat(1, 2), rat(1, 2), rat(1, 2)],
        )
        .unwrap();
        assert_eq!(b.measure(), rat(1, 8));
        assert_eq!(TorusBox::unit(3).measure(), rat_one());
        assert_eq!(b.measure_f64(), 0.125);
    }

    #[test]
    fn dilated_ranges() {
        // q = 10: [0, 1/2) -> n in [1, 4]; [1/3, 2/3) -> [4, 6]; [0, 1) -> [1, 9].
        let b = TorusBox::new(
            vec![rat_zero(), rat(1, 3), rat_zero()],
            vec![rat(1, 2), rat(2, 3), rat_one()],
        )
        .unwrap();
        assert_eq!(b.integer_ranges(10), vec![(1, 4), (4, 6), (1, 9)]);
    }

    #[test]
    fn small_counting_example() {
        // q = 7, a = (2, 3), b = (1, 2): of the odd units 1, 3, 5 only n = 3
        // has an inverse (5) that is 2 mod 3.
        let m = Modulus::new(7).unwrap();
        let i = inst(&m, &[2, 3], &[1, 2]);
        assert_eq!(i.count_all(1000).unwrap(), 1);
        assert_eq!(i.count_in_box_charsum(&TorusBox::unit(2)).unwrap(), 1);
        let mut seen = Vec::new();
        i.for_each_solution(1000, |t, inv| seen.push((t.to_vec(), inv)))
            .unwrap();
        assert_eq!(seen, vec![(vec![3], 5)]);
    }

    #[test]
    fn frozen_regression_fixtures() {
        // References computed by independent exhaustive loops.
        let m = Modulus::new(101).unwrap();
        let i = inst(&m, &[2, 3, 5], &[1, 2, 3]);
        assert_eq!(i.count_all(1_000_000).unwrap(), 330);

        let i = inst(&m, &[2, 3, 5], &[1, 1, 1]);
        let half = TorusBox::new(vec![rat_zero(); 3], vec![rat(1, 2); 3]).unwrap();
        assert_eq!(i.count_in_box(&half, 1_000_000).unwrap(), 51);
        assert_eq!(i.count_in_box_charsum(&half).unwrap(), 51);

        let m = Modulus::new(1009).unwrap();
        let i = inst(&m, &[1, 1], &[0, 0]);
        assert_eq!(i.h_statistic(1_000_000).unwrap(), 945);
    }

    #[test]
    fn trivial_progressions_count_phi_powers() {
        for q in [7u64, 12, 36] {
            let m = Modulus::new(q).unwrap();
            for k in 1..=2usize {
                let i = inst(&m, &vec![1; k + 1], &vec![0; k + 1]);
                let expect = m.phi().pow(k as u32);
                assert_eq!(i.count_all(1 << 24).unwrap(), expect, "q = {q}, k = {k}");
                assert_eq!(i.main_term(1.0), expect as f64);
            }
        }
    }

    #[test]
    fn both_counting_routes_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..40 {
            let q = rng.gen_range(3..=60u64);
            let m = Modulus::new(q).unwrap();
            let k = rng.gen_range(1..=2usize);
            let a: Vec<u64> = (0..=k).map(|_| random_coprime(&mut rng, q, 9)).collect();
            let b: Vec<i64> = a.iter().map(|&ai| rng.gen_range(0..ai as i64)).collect();
            let i = inst(&m, &a, &b);
            let sigma = random_box(&mut rng, k + 1);
            let direct = i.count_in_box(&sigma, 1 << 24).unwrap();
            let via_chars = i.count_in_box_charsum(&sigma).unwrap();
            assert_eq!(direct, via_chars, "q = {q}, a = {a:?}, b = {b:?}");
        }
    }

    #[test]
    fn box_splits_add_up() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        for _ in 0..30 {
            let q = rng.gen_range(3..=120u64);
            let m = Modulus::new(q).unwrap();
            let a: Vec<u64> = (0..2).map(|_| random_coprime(&mut rng, q, 9)).collect();
            let b: Vec<i64> = a.iter().map(|&ai| rng.gen_range(0..ai as i64)).collect();
            let i = inst(&m, &a, &b);
            let sigma = random_box(&mut rng, 2);
            let axis = rng.gen_range(0..2usize);
            let (lo, hi) = (sigma.alpha()[axis], sigma.beta()[axis]);
            let mid = (lo + hi) / rat(2, 1);
            let mut beta_left = sigma.beta().to_vec();
            beta_left[axis] = mid;
            let mut alpha_right = sigma.alpha().to_vec();
            alpha_right[axis] = mid;
            let left = TorusBox::new(sigma.alpha().to_vec(), beta_left).unwrap();
            let right = TorusBox::new(alpha_right, sigma.beta().to_vec()).unwrap();
            let whole = i.count_in_box(&sigma, 1 << 24).unwrap();
            let l = i.count_in_box(&left, 1 << 24).unwrap();
            let r = i.count_in_box(&right, 1 << 24).unwrap();
            assert_eq!(whole, l + r, "q = {q}, axis = {axis}");
        }
    }

    #[test]
    fn thin_and_full_boxes() {
        let m = Modulus::new(101).unwrap();
        let i = inst(&m, &[2, 3], &[1, 1]);
        let q3 = 3 * 101;
        let thin = TorusBox::new(
            vec![rat(1, q3), rat_zero()],
            vec![rat(2, q3), rat_one()],
        )
        .unwrap();
        assert_eq!(i.count_in_box(&thin, 1 << 20).unwrap(), 0);
        assert_eq!(i.count_in_box_charsum(&thin).unwrap(), 0);
        let full = TorusBox::unit(2);
        assert_eq!(
            i.count_in_box(&full, 1 << 20).unwrap(),
            i.count_all(1 << 20).unwrap()
        );
        assert!(matches!(
            i.count_in_box(&TorusBox::unit(3), 1 << 20),
            Err(crate::error::Error::Domain(_))
        ));
    }

    #[test]
    fn region_counts_match_direct_loops() {
        let m = Modulus::new(101).unwrap();
        let i = inst(&m, &[1, 1, 1], &[0, 0, 0]);
        let ball = RegionSpec::ball(vec![0.5, 0.5], 0.25).unwrap();
        let got = i.count_in_region(&ball, 1 << 20).unwrap();
        let mut expect = 0u64;
        for n1 in m.unit_values() {
            for n2 in m.unit_values() {
                let dx = n1 as f64 / 101.0 - 0.5;
                let dy = n2 as f64 / 101.0 - 0.5;
                if dx * dx + dy * dy <= 0.0625 {
                    expect += 1;
                }
            }
        }
        assert_eq!(got, expect);
        assert!(got > 0);
        // Extruding to a cylinder moves to the joint count without changing it.
        let cyl = ball.extrude();
        assert_eq!(i.count_in_region(&cyl, 1 << 20).unwrap(), got);
        // A full-measure predicate region counts every solution.
        let all = RegionSpec::predicate(2, |_| true, false, MeasureSpec::Analytic(1.0)).unwrap();
        assert_eq!(
            i.count_in_region(&all, 1 << 20).unwrap(),
            i.count_all(1 << 20).unwrap()
        );
        let bad = RegionSpec::ball(vec![0.5; 4], 0.25).unwrap();
        assert!(i.count_in_region(&bad, 1 << 20).is_err());
    }

    #[test]
    fn normalized_point_sets() {
        let m = Modulus::new(5).unwrap();
        let i = inst(&m, &[1, 1], &[0, 0]);
        let joint = i.point_set_joint(1000).unwrap();
        let expect = [
            vec![rat(1, 5), rat(1, 5)],
            vec![rat(2, 5), rat(3, 5)],
            vec![rat(3, 5), rat(2, 5)],
            vec![rat(4, 5), rat(4, 5)],
        ];
        assert_eq!(joint.points(), &expect[..]);
        let marginal = i.point_set_marginal(1000).unwrap();
        assert_eq!(marginal.dim(), 1);
        assert_eq!(joint.len(), marginal.len());
        assert_eq!(joint.len() as u64, i.count_all(1000).unwrap());
        for (a, b) in joint.points().iter().zip(marginal.points()) {
            assert_eq!(&a[..1], &b[..]);
        }
        // The joint set is symmetric under swapping n with its inverse.
        let mut swapped: Vec<Vec<Rat>> = joint
            .points()
            .iter()
            .map(|p| vec![p[1], p[0]])
            .collect();
        swapped.sort();
        assert_eq!(swapped, joint.points());
    }

    #[test]
    fn spread_statistic() {
        let m7 = Modulus::new(7).unwrap();
        assert_eq!(inst(&m7, &[1, 1], &[0, 0]).h_statistic(100).unwrap(), 2);
        let m2 = Modulus::new(2).unwrap();
        assert_eq!(inst(&m2, &[1, 1], &[0, 0]).h_statistic(100).unwrap(), 0);
        for q in [5u64, 11, 24, 37] {
            let m = Modulus::new(q).unwrap();
            let h = inst(&m, &[1, 1], &[0, 0]).h_statistic(10_000).unwrap();
            assert!(h <= q - 2, "q = {q}: H = {h}");
        }
        // No unit is 1 mod 4 except 1, whose inverse is not 2 mod 4.
        let m5 = Modulus::new(5).unwrap();
        let empty = inst(&m5, &[4, 4], &[1, 2]);
        assert_eq!(empty.count_all(100).unwrap(), 0);
        assert!(empty.h_statistic(100).is_err());
    }

    #[test]
    fn shape_inputs() {
        let m = Modulus::new(101).unwrap();
        let i = inst(&m, &[2, 3, 5, 7], &[1, 1, 1, 1]);
        assert_eq!(i.a_product(), 210);
        assert!((i.a_norm() - (4.0f64 + 9.0 + 25.0 + 49.0).sqrt()).abs() < 1e-15);
        assert!(i.error_shape_composite(2).unwrap() > 0.0);
        assert!(i.error_shape_prime(1).unwrap() > 0.0);
        assert!(i.error_shape_prime_alt(1).unwrap() > 0.0);
        assert!(i.error_shape_composite(0).is_err());
        assert!(i.error_shape_composite(4).is_err());
        let ones = inst(&m, &[1, 1, 1, 1], &[0, 0, 0, 0]);
        let shape = ones.error_shape_composite(1).unwrap();
        let expect = 2.0 * 101.0f64.powi(2) + 101.0f64.powf(2.0);
        assert!((shape - expect).abs() < 1e-9);
        let comp = Modulus::new(100).unwrap();
        let c = inst(&comp, &[3, 7, 9, 11], &[0, 0, 0, 0]);
        assert!(c.error_shape_prime(1).is_err());
        let short = inst(&m, &[2, 3], &[0, 0]);
        assert!(short.error_shape_prime(1).is_err());
    }

    #[test]
    fn exponent_tables() {
        assert_eq!(error_exponent_composite(2, 1).unwrap(), rat(3, 2));
        assert_eq!(error_exponent_composite(3, 1).unwrap(), rat(2, 1));
        assert_eq!(error_exponent_composite(2, 3).unwrap(), rat(16, 9));
        assert_eq!(product_power_composite(2, 1).unwrap(), rat(1, 3));
        assert_eq!(error_exponent_prime(3, 1).unwrap(), rat(3, 1));
        assert_eq!(error_exponent_prime(5, 1).unwrap(), rat(4, 1));
        assert_eq!(error_exponent_prime(5, 2).unwrap(), rat(35, 8));
        assert_eq!(error_exponent_prime_alt(3, 1).unwrap(), rat(3, 1));
        assert_eq!(error_exponent_prime_alt(5, 2).unwrap(), rat(17, 4));
        assert_eq!(product_power_prime(3, 1).unwrap(), rat(1, 2));
        assert!(error_exponent_composite(1, 1).is_err());
        assert!(error_exponent_prime(2, 1).is_err());
        assert!(error_exponent_prime(3, 0).is_err());
        assert_eq!(threshold_exponent(2).unwrap(), rat(3, 4));
        assert_eq!(threshold_exponent(3).unwrap(), rat(4, 3));
        assert_eq!(threshold_exponent(4).unwrap(), rat(15, 8));
        assert_eq!(threshold_exponent(5).unwrap(), rat(5, 2));
        assert_eq!(threshold_exponent(6).unwrap(), rat(35, 12));
        assert!(threshold_exponent(1).is_err());
    }

    #[test]
    fn enumeration_budget() {
        let m = Modulus::new(101).unwrap();
        let i = inst(&m, &[1, 1, 1], &[0, 0, 0]);
        assert!(matches!(
            i.count_all(10),
            Err(crate::error::Error::Capacity(_))
        ));
        assert!(matches!(
            i.h_statistic(10),
            Err(crate::error::Error::Capacity(_))
        ));
    }

    #[test]
    fn hull_examples() {
        let m5 = Modulus::new(5).unwrap();
        let (hull, v) = inverse_pair_hull(&m5).unwrap();
        assert_eq!(v, 4);
        assert_eq!(hull, vec![[1, 1], [3, 2], [4, 4], [2, 3]]);

        let m4 = Modulus::new(4).unwrap();
        let (hull, v) = inverse_pair_hull(&m4).unwrap();
        assert_eq!(v, 2);
        assert_eq!(hull, vec![[1, 1], [3, 3]]);

        // Every unit of 8 is its own inverse, so the points are collinear.
        let m8 = Modulus::new(8).unwrap();
        assert_eq!(inverse_pair_hull(&m8).unwrap().1, 2);

        let m2 = Modulus::new(2).unwrap();
        assert!(inverse_pair_hull(&m2).is_err());
    }

    #[test]
    fn hull_is_idempotent_and_contains_points() {
        for q in [5u64, 8, 37, 101, 120] {
            let m = Modulus::new(q).unwrap();
            let set = LatticePointSet::inverse_pairs(&m);
            let hull = convex_hull(set.points());
            assert_eq!(convex_hull(&hull), hull, "q = {q}");
            for &p in set.points() {
                assert!(hull_contains(&hull, p), "q = {q}, p = {p:?}");
            }
            for v in &hull {
                assert!(set.points().contains(v), "q = {q}");
            }
        }
    }
}
