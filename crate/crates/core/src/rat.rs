//! Exact rational scalars used for box endpoints, torus coordinates, and
//! discrepancy values. `i128` leaves ample headroom: coordinate denominators
//! are at most the table limit `2^24` and products of three stay below `2^72`.

use num_rational::Ratio;

use crate::error::{domain, Result};

pub type Rat = Ratio<i128>;

pub fn rat(num: i128, den: i128) -> Rat {
    Ratio::new(num, den)
}

pub fn rat_zero() -> Rat {
    Ratio::from_integer(0)
}

pub fn rat_one() -> Rat {
    Ratio::from_integer(1)
}

pub fn rat_to_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn rat_abs(r: Rat) -> Rat {
    if *r.numer() < 0 {
        -r
    } else {
        r
    }
}

/// `ceil(r * q)` for `r >= 0`.
pub fn ceil_mul(r: Rat, q: u64) -> i128 {
    let num = r.numer() * q as i128;
    let den = *r.denom();
    debug_assert!(den > 0);
    num.div_euclid(den) + if num.rem_euclid(den) > 0 { 1 } else { 0 }
}

/// Parses `"p/q"`, a plain integer, or a decimal string like `"0.25"` into an
/// exact rational (decimals become `num / 10^digits`).
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || domain(format!("cannot parse '{s}' as a rational"));
    if let Some((n, d)) = s.split_once('/') {
        let num: i128 = n.trim().parse().map_err(|_| bad())?;
        let den: i128 = d.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(domain(format!("zero denominator in '{s}'")));
        }
        return Ok(Ratio::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let sign = if int.trim_start().starts_with('-') { -1 } else { 1 };
        let whole: i128 = if int.is_empty() || int == "-" {
            0
        } else {
            int.parse().map_err(|_| bad())?
        };
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        if frac.len() > 27 {
            return Err(domain(format!("too many decimal digits in '{s}'")));
        }
        let num: i128 = frac.parse().map_err(|_| bad())?;
        let den = 10i128.pow(frac.len() as u32);
        return Ok(Ratio::from_integer(whole) + Ratio::new(sign * num, den));
    }
    let whole: i128 = s.parse().map_err(|_| bad())?;
    Ok(Ratio::from_integer(whole))
}
