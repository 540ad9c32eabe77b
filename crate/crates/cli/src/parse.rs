//! Value parsers for clap: integers with an optional `a^b` form, exact rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Signed, ToPrimitive, Zero};

pub fn big_int(s: &str) -> Result<BigInt, String> {
    let s = s.trim();
    match s.split_once('^') {
        Some((base, exp)) => {
            let base: BigInt = base.trim().parse().map_err(|_| format!("bad base in {s:?}"))?;
            let exp: u32 = exp.trim().parse().map_err(|_| format!("bad exponent in {s:?}"))?;
            if exp > 4096 {
                return Err(format!("exponent too large in {s:?}"));
            }
            Ok(Pow::pow(base, exp))
        }
        None => s.parse().map_err(|_| format!("not an integer: {s:?}")),
    }
}

pub fn positive_big(s: &str) -> Result<BigInt, String> {
    let n = big_int(s)?;
    if !n.is_positive() {
        return Err(format!("must be positive, got {n}"));
    }
    Ok(n)
}

pub fn positive_u64(s: &str) -> Result<u64, String> {
    positive_big(s)?.to_u64().ok_or_else(|| format!("{s} does not fit in 64 bits"))
}

/// `p/q`, a decimal like `-0.125`, or an integer; all exact.
pub fn rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = big_int(n)?;
        let d = big_int(d)?;
        if d.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("not a decimal: {s:?}"));
        }
        let neg = int.starts_with('-');
        let int_part: BigInt = match int.trim_start_matches(['-', '+']) {
            "" => BigInt::zero(),
            digits => digits.parse().map_err(|_| format!("not a decimal: {s:?}"))?,
        };
        let scale = Pow::pow(BigInt::from(10), frac.len() as u32);
        let frac_part: BigInt = frac.parse().map_err(|_| format!("not a decimal: {s:?}"))?;
        let mag = BigRational::new(int_part * &scale + frac_part, scale);
        return Ok(if neg { -mag } else { mag });
    }
    Ok(BigRational::from_integer(big_int(s)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn integers() {
        assert_eq!(big_int("10^6").unwrap(), BigInt::from(1_000_000));
        assert_eq!(big_int("-7").unwrap(), BigInt::from(-7));
        assert!(big_int("x").is_err());
        assert!(positive_big("0").is_err());
        assert!(positive_u64("2^64").is_err());
    }

    #[test]
    fn rationals() {
        assert_eq!(rational("0.5").unwrap(), r(1, 2));
        assert_eq!(rational("-0.125").unwrap(), r(-1, 8));
        assert_eq!(rational(".25").unwrap(), r(1, 4));
        assert_eq!(rational("3/9").unwrap(), r(1, 3));
        assert_eq!(rational("1").unwrap(), r(1, 1));
        assert!(rational("1/0").is_err());
        assert!(rational("1.").is_err());
        assert!(rational("1.-2").is_err());
    }
}
