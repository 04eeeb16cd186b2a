//! Exact rationals and p-adic valuations.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// p-adic valuation with `Infinity` for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinity,
}

impl Valuation {
    pub fn is_nonnegative(self) -> bool {
        match self {
            Valuation::Finite(v) => v >= 0,
            Valuation::Infinity => true,
        }
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Infinity, Valuation::Infinity) => Ordering::Equal,
            (Valuation::Infinity, _) => Ordering::Greater,
            (_, Valuation::Infinity) => Ordering::Less,
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
        }
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::ops::Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinity,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => f.write_str("inf"),
        }
    }
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    if p.is_multiple_of(2) {
        return p == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

fn int_valuation(n: &BigInt, p: &BigInt) -> i64 {
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

pub fn p_valuation(r: &Rat, p: u64) -> Result<Valuation> {
    if !is_prime(p) {
        return Err(Error::Usage(format!("{p} is not prime")));
    }
    Ok(valuation_unchecked(r, p))
}

/// Valuation for a prime already known to be prime.
pub(crate) fn valuation_unchecked(r: &Rat, p: u64) -> Valuation {
    if r.is_zero() {
        return Valuation::Infinity;
    }
    let pb = BigInt::from(p);
    Valuation::Finite(int_valuation(r.numer(), &pb) - int_valuation(r.denom(), &pb))
}

/// Primes other than 2 and 3 dividing the denominator. Trial division up to
/// 10^6; a cofactor left over is reported as is.
pub fn denominator_primes_beyond_six(r: &Rat) -> Vec<BigInt> {
    let mut d = r.denom().clone();
    for small in [2u32, 3] {
        let s = BigInt::from(small);
        while (&d % &s).is_zero() {
            d /= &s;
        }
    }
    let mut out = Vec::new();
    let mut f = 5u64;
    while !d.is_one() && f <= 1_000_000 {
        let fb = BigInt::from(f);
        if &fb * &fb > d {
            break;
        }
        if (&d % &fb).is_zero() {
            out.push(fb.clone());
            while (&d % &fb).is_zero() {
                d /= &fb;
            }
        }
        f += 2;
    }
    if !d.is_one() {
        out.push(d);
    }
    out
}

/// True when the only primes in the denominator are 2 and 3.
pub fn integral_away_from_six(r: &Rat) -> bool {
    let mut d = r.denom().clone();
    for small in [2u32, 3] {
        let s = BigInt::from(small);
        while (&d % &s).is_zero() {
            d /= &s;
        }
    }
    d.is_one()
}

pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

/// "num/den" with the denominator omitted when it is 1.
pub fn format_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Usage(format!("cannot parse rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rat::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rat::from_integer(n))
        }
    }
}

pub fn pow_rat(base: &Rat, e: u32) -> Rat {
    let mut acc = Rat::one();
    for _ in 0..e {
        acc *= base;
    }
    acc
}

pub fn to_i64(r: &Rat) -> Option<i64> {
    if r.denom().is_one() {
        r.numer().to_i64()
    } else {
        None
    }
}
