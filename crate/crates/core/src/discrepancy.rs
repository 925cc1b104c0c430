//! Box and region discrepancy of finite point sets in the unit torus.
//!
//! The exact kernel enumerates, per axis, every interval of coordinate ranks
//! together with the extreme edge placements realizing it, which is a finite
//! family containing the supremum over all half-open boxes (including
//! boundary limits). All comparisons run in integer arithmetic over a common
//! denominator, so results are exact rationals. Larger sets fall back to a
//! sampled lower bound. The transfer bound converts a box discrepancy into a
//! region discrepancy through a linear boundary-shell class.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{capacity, domain, Error, Result};
use crate::rat::{rat, rat_abs, rat_one, rat_to_f64, rat_zero, Rat};
use crate::region::{RegionSpec, Side};

/// Cap on coordinate denominators, so exact candidate evaluation stays well
/// inside `i128`.
pub const MAX_COORDINATE_DENOMINATOR: i128 = 1 << 32;

/// Random boxes drawn by the sampled mode when picked automatically.
pub const DEFAULT_SAMPLED_BOXES: u64 = 100_000;

/// Default cap on exact-mode candidate boxes.
pub const DEFAULT_BOX_BUDGET: u64 = 50_000_000;

/// A nonempty finite list of points in `[0,1)^s` with exact rational
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    points: Vec<Vec<Rat>>,
}

impl PointSet {
    pub fn new(points: Vec<Vec<Rat>>) -> Result<Self> {
        let dim = points.first().map_or(0, |p| p.len());
        if dim == 0 {
            return Err(domain(
                "a point set needs at least one point of positive dimension",
            ));
        }
        for p in &points {
            if p.len() != dim {
                return Err(domain(format!(
                    "point dimension {} differs from {dim}",
                    p.len()
                )));
            }
            for c in p {
                if *c < rat_zero() || *c >= rat_one() {
                    return Err(domain(format!("coordinate {c} outside [0, 1)")));
                }
                if *c.denom() > MAX_COORDINATE_DENOMINATOR {
                    return Err(domain(format!(
                        "coordinate denominator {} exceeds {MAX_COORDINATE_DENOMINATOR}",
                        c.denom()
                    )));
                }
            }
        }
        Ok(PointSet { dim, points })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<Rat>] {
        &self.points
    }
}

/// How to take the supremum over boxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscrepancyMode {
    /// Critical-box enumeration: the true supremum, exactly.
    Exact,
    /// Anchored critical boxes plus seeded random boxes: a lower bound.
    Sampled { boxes: u64, seed: u64 },
}

/// `sup over boxes of |fraction of F inside - volume|`, the box endpoints
/// running over all of `[0,1)^s` without wraparound. Exact mode errors with
/// a capacity error when the candidate family exceeds `budget`.
pub fn box_discrepancy(f: &PointSet, mode: DiscrepancyMode, budget: u64) -> Result<f64> {
    match mode {
        DiscrepancyMode::Exact => {
            let (num, den) = exact_best(f, budget)?;
            Ok(rat_to_f64(rat(num, den)))
        }
        DiscrepancyMode::Sampled { boxes, seed } => Ok(sampled_value(f, boxes, seed)),
    }
}

/// Exact kernel for small sets (at most 64 points in dimension at most 3)
/// when it fits the budget, sampled lower bound with
/// [`DEFAULT_SAMPLED_BOXES`] random boxes otherwise.
pub fn box_discrepancy_auto(f: &PointSet, seed: u64, budget: u64) -> Result<f64> {
    if f.len() <= 64 && f.dim() <= 3 {
        match box_discrepancy(f, DiscrepancyMode::Exact, budget) {
            Err(Error::Capacity(_)) => {}
            other => return other,
        }
    }
    box_discrepancy(
        f,
        DiscrepancyMode::Sampled {
            boxes: DEFAULT_SAMPLED_BOXES,
            seed,
        },
        budget,
    )
}

/// `|fraction of F inside the region - region measure|`.
pub fn region_discrepancy(f: &PointSet, region: &RegionSpec) -> Result<f64> {
    if region.dim() != f.dim() {
        return Err(domain(format!(
            "region dimension {} does not match point dimension {}",
            region.dim(),
            f.dim()
        )));
    }
    let mut x = vec![0.0f64; f.dim()];
    let mut hits = 0usize;
    for p in f.points() {
        for (c, r) in x.iter_mut().zip(p) {
            *c = rat_to_f64(*r);
        }
        if region.contains(&x) {
            hits += 1;
        }
    }
    Ok((hits as f64 / f.len() as f64 - region.measure()).abs())
}

/// Region-discrepancy bound derived from a box discrepancy `d` in dimension
/// `s` through a shell-bound function: `h(sqrt(s) * d^(1/s))`.
pub fn transfer_bound<H: Fn(f64) -> f64>(d: f64, s: usize, h: H) -> Result<f64> {
    if s == 0 {
        return Err(domain("transfer bound needs dimension >= 1"));
    }
    if !(0.0..=1.0).contains(&d) {
        return Err(domain(format!("discrepancy {d} outside [0, 1]")));
    }
    Ok(h((s as f64).sqrt() * d.powf(1.0 / s as f64)))
}

/// A region paired with a linear bound on its boundary shells: shells of
/// width `eps` on either side have measure at most `shell_constant * eps`.
#[derive(Clone)]
pub struct RegionClass {
    region: RegionSpec,
    shell_constant: f64,
}

impl RegionClass {
    /// Wraps a region with a caller-supplied shell constant.
    pub fn with_constant(region: RegionSpec, shell_constant: f64) -> Result<Self> {
        if !shell_constant.is_finite() || shell_constant <= 0.0 {
            return Err(domain("shell constant must be positive"));
        }
        Ok(RegionClass {
            region,
            shell_constant,
        })
    }

    /// Calibrates the constant as the largest shell-measure-to-width ratio
    /// over the dyadic widths `2^-3 .. 2^-10`, both sides of the boundary.
    pub fn calibrated(region: RegionSpec) -> Result<Self> {
        let mut constant = 0.0f64;
        for e in 3..=10 {
            let eps = 0.5f64.powi(e);
            let outer = region.shell_measure(eps, Side::Outer)?;
            let inner = region.shell_measure(eps, Side::Inner)?;
            constant = constant.max(outer / eps).max(inner / eps);
        }
        Self::with_constant(region, constant)
    }

    pub fn region(&self) -> &RegionSpec {
        &self.region
    }

    pub fn shell_constant(&self) -> f64 {
        self.shell_constant
    }

    /// The linear class bound `h(eps) = shell_constant * eps`.
    pub fn shell_bound(&self, eps: f64) -> f64 {
        self.shell_constant * eps
    }

    /// [`transfer_bound`] with this class's linear `h` and the region's
    /// dimension.
    pub fn transfer_bound(&self, d: f64) -> Result<f64> {
        transfer_bound(d, self.region.dim(), |e| self.shell_bound(e))
    }
}

struct ExactAxis {
    /// Sorted distinct coordinate numerators over `den`.
    nums: Vec<i128>,
    den: i128,
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn exact_axes(f: &PointSet) -> Result<Vec<ExactAxis>> {
    let mut axes = Vec::with_capacity(f.dim());
    let mut vd: i128 = 1;
    for t in 0..f.dim() {
        let mut den: i128 = 1;
        for p in f.points() {
            let d = *p[t].denom();
            den = den / gcd_i128(den, d) * d;
            if den > MAX_COORDINATE_DENOMINATOR {
                return Err(capacity(format!(
                    "axis {t} coordinate denominators exceed the exact kernel's range"
                )));
            }
        }
        vd = vd.checked_mul(den).unwrap_or(i128::MAX);
        let mut nums: Vec<i128> = f
            .points()
            .iter()
            .map(|p| p[t].numer() * (den / p[t].denom()))
            .collect();
        nums.sort_unstable();
        nums.dedup();
        axes.push(ExactAxis { nums, den });
    }
    if vd > 1 << 80 {
        return Err(capacity(
            "combined coordinate denominators exceed the exact kernel's range".to_string(),
        ));
    }
    Ok(axes)
}

/// Extreme dilated edge lengths (numerators over the axis denominator) of
/// the boxes realizing the rank interval `[lo, hi)`: the tightest closed
/// placement and the widest placement reaching the neighboring ranks.
fn interval_lengths(ax: &ExactAxis, lo: usize, hi: usize) -> (i128, i128) {
    let m = ax.nums.len();
    let tight = if hi > lo {
        ax.nums[hi - 1] - ax.nums[lo]
    } else {
        0
    };
    let left = if lo == 0 { 0 } else { ax.nums[lo - 1] };
    let right = if hi == m { ax.den } else { ax.nums[hi] };
    (tight, right - left)
}

struct ExactScan<'x> {
    axes: &'x [ExactAxis],
    prefix: &'x [i64],
    strides: &'x [usize],
    n: i128,
    vd: i128,
}

impl ExactScan<'_> {
    fn run(&self, lo0: usize, hi0: usize) -> i128 {
        let (tight, wide) = interval_lengths(&self.axes[0], lo0, hi0);
        let mut corners = vec![(0usize, 0usize); self.axes.len()];
        corners[0] = (lo0, hi0);
        self.descend(1, tight, wide, &mut corners)
    }

    fn descend(&self, t: usize, vmin: i128, vmax: i128, corners: &mut [(usize, usize)]) -> i128 {
        if t == self.axes.len() {
            let c = self.corner_count(corners) as i128 * self.vd;
            return (c - vmin * self.n).abs().max((c - vmax * self.n).abs());
        }
        let ax = &self.axes[t];
        let m = ax.nums.len();
        let mut best = 0i128;
        for lo in 0..=m {
            for hi in lo..=m {
                let (tight, wide) = interval_lengths(ax, lo, hi);
                corners[t] = (lo, hi);
                best = best.max(self.descend(t + 1, vmin * tight, vmax * wide, corners));
            }
        }
        best
    }

    /// Points inside the rank box by inclusion-exclusion over the prefix
    /// array.
    fn corner_count(&self, corners: &[(usize, usize)]) -> i64 {
        let s = corners.len();
        let mut total = 0i64;
        for mask in 0u32..(1 << s) {
            let mut idx = 0usize;
            let mut sign = 1i64;
            for (t, &(lo, hi)) in corners.iter().enumerate() {
                let i = if mask & (1 << t) != 0 {
                    sign = -sign;
                    lo
                } else {
                    hi
                };
                idx += i * self.strides[t];
            }
            total += sign * self.prefix[idx];
        }
        total
    }
}

/// Largest `|count * VD - volume * N|` over the candidate family, returned
/// with its fixed denominator `N * VD`.
fn exact_best(f: &PointSet, budget: u64) -> Result<(i128, i128)> {
    let axes = exact_axes(f)?;
    let mut boxes: u128 = 1;
    let mut cells: u128 = 1;
    for ax in &axes {
        let m = ax.nums.len() as u128;
        boxes = boxes.saturating_mul((m + 1) * (m + 2) / 2);
        cells = cells.saturating_mul(m + 1);
    }
    if boxes > budget as u128 {
        return Err(capacity(format!(
            "exact mode needs {boxes} candidate boxes, budget is {budget}"
        )));
    }
    if cells > 1 << 27 {
        return Err(capacity(format!(
            "exact mode needs a prefix table of {cells} cells"
        )));
    }

    let s = f.dim();
    let dims: Vec<usize> = axes.iter().map(|ax| ax.nums.len() + 1).collect();
    let mut strides = vec![1usize; s];
    for t in (0..s.saturating_sub(1)).rev() {
        strides[t] = strides[t + 1] * dims[t + 1];
    }
    let mut prefix = vec![0i64; dims.iter().product()];
    for p in f.points() {
        let mut idx = 0usize;
        for t in 0..s {
            let num = p[t].numer() * (axes[t].den / p[t].denom());
            let rank = axes[t].nums.binary_search(&num).expect("own coordinate");
            idx += (rank + 1) * strides[t];
        }
        prefix[idx] += 1;
    }
    for t in 0..s {
        for idx in 0..prefix.len() {
            if !(idx / strides[t]).is_multiple_of(dims[t]) {
                prefix[idx] += prefix[idx - strides[t]];
            }
        }
    }

    let vd: i128 = axes.iter().map(|ax| ax.den).product();
    let scan = ExactScan {
        axes: &axes,
        prefix: &prefix,
        strides: &strides,
        n: f.len() as i128,
        vd,
    };
    let m0 = axes[0].nums.len();
    let pairs: Vec<(usize, usize)> = (0..=m0)
        .flat_map(|lo| (lo..=m0).map(move |hi| (lo, hi)))
        .collect();
    let best = pairs
        .par_iter()
        .map(|&(lo, hi)| scan.run(lo, hi))
        .reduce(|| 0, i128::max);
    Ok((best, f.len() as i128 * vd))
}

/// Lower bound: anchored boxes at every point (boundary included and
/// excluded) plus seeded random boxes on a dyadic grid. Candidates are
/// evaluated exactly in dimension at most 3 and in floating point above.
fn sampled_value(f: &PointSet, boxes: u64, seed: u64) -> f64 {
    if f.dim() <= 3 {
        rat_to_f64(sampled_exact(f, boxes, seed))
    } else {
        sampled_float(f, boxes, seed)
    }
}

fn sampled_exact(f: &PointSet, boxes: u64, seed: u64) -> Rat {
    let n = f.len() as i128;
    let mut best = rat_zero();
    for p in f.points() {
        let mut strictly = 0i128;
        let mut weakly = 0i128;
        for x in f.points() {
            if x.iter().zip(p).all(|(xi, pi)| xi < pi) {
                strictly += 1;
            }
            if x.iter().zip(p).all(|(xi, pi)| xi <= pi) {
                weakly += 1;
            }
        }
        let vol = p.iter().fold(rat_one(), |acc, &c| acc * c);
        for c in [strictly, weakly] {
            let cand = rat_abs(rat(c, n) - vol);
            if cand > best {
                best = cand;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    const GRID: i64 = 1 << 20;
    let s = f.dim();
    let mut alpha = vec![rat_zero(); s];
    let mut beta = vec![rat_zero(); s];
    for _ in 0..boxes {
        let mut vol = rat_one();
        for t in 0..s {
            let mut x = rng.gen_range(0..=GRID);
            let mut y = rng.gen_range(0..=GRID);
            if x > y {
                std::mem::swap(&mut x, &mut y);
            }
            alpha[t] = rat(x as i128, GRID as i128);
            beta[t] = rat(y as i128, GRID as i128);
            vol *= rat((y - x) as i128, GRID as i128);
        }
        let mut c = 0i128;
        'pts: for p in f.points() {
            for t in 0..s {
                if p[t] < alpha[t] || p[t] >= beta[t] {
                    continue 'pts;
                }
            }
            c += 1;
        }
        let cand = rat_abs(rat(c, n) - vol);
        if cand > best {
            best = cand;
        }
    }
    best
}

fn sampled_float(f: &PointSet, boxes: u64, seed: u64) -> f64 {
    let n = f.len() as f64;
    let coords: Vec<Vec<f64>> = f
        .points()
        .iter()
        .map(|p| p.iter().map(|&c| rat_to_f64(c)).collect())
        .collect();
    let mut best = 0.0f64;
    for p in &coords {
        let mut strictly = 0u64;
        let mut weakly = 0u64;
        for x in &coords {
            if x.iter().zip(p).all(|(xi, pi)| xi < pi) {
                strictly += 1;
            }
            if x.iter().zip(p).all(|(xi, pi)| xi <= pi) {
                weakly += 1;
            }
        }
        let vol: f64 = p.iter().product();
        best = best
            .max((strictly as f64 / n - vol).abs())
            .max((weakly as f64 / n - vol).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = f.dim();
    let mut alpha = vec![0.0f64; s];
    let mut beta = vec![0.0f64; s];
    for _ in 0..boxes {
        let mut vol = 1.0f64;
        for t in 0..s {
            let mut x = rng.gen::<f64>();
            let mut y = rng.gen::<f64>();
            if x > y {
                std::mem::swap(&mut x, &mut y);
            }
            alpha[t] = x;
            beta[t] = y;
            vol *= y - x;
        }
        let mut c = 0u64;
        'pts: for p in &coords {
            for t in 0..s {
                if p[t] < alpha[t] || p[t] >= beta[t] {
                    continue 'pts;
                }
            }
            c += 1;
        }
        best = best.max((c as f64 / n - vol).abs());
    }
    best
}
