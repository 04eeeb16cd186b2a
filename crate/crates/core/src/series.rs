//! Truncated Laurent series in one or two variables with polynomial
//! coefficients.
//!
//! A series with truncation `n` knows every coefficient of total degree at
//! most `n`; anything above is unknown and asking for it is an error.
//! Exponents may be `-1` in either variable and no lower.

use std::collections::BTreeMap;

use num_traits::One;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::rational::{int, Rat};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vars {
    One,
    Two,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncSeries {
    vars: Vars,
    trunc: i32,
    terms: BTreeMap<(i32, i32), Poly>,
}

fn precision(msg: impl Into<String>) -> Error {
    Error::Precision(msg.into())
}

impl TruncSeries {
    pub fn zero(vars: Vars, trunc: i32) -> TruncSeries {
        TruncSeries { vars, trunc, terms: BTreeMap::new() }
    }

    /// Univariate series from coefficients of x^0, x^1, ...
    pub fn from_coeffs(trunc: i32, coeffs: Vec<Poly>) -> TruncSeries {
        let mut s = TruncSeries::zero(Vars::One, trunc);
        for (i, c) in coeffs.into_iter().enumerate() {
            s.set(i as i32, 0, c);
        }
        s
    }

    pub fn from_terms(vars: Vars, trunc: i32, terms: impl IntoIterator<Item = ((i32, i32), Poly)>) -> Result<TruncSeries> {
        let mut s = TruncSeries::zero(vars, trunc);
        for ((i, j), c) in terms {
            if i < -1 || j < -1 || (vars == Vars::One && j != 0) {
                return Err(Error::Domain(format!("exponent ({i},{j}) outside the pole bound")));
            }
            s.add_at(i, j, &c);
        }
        Ok(s)
    }

    pub fn constant(vars: Vars, trunc: i32, c: Poly) -> TruncSeries {
        let mut s = TruncSeries::zero(vars, trunc);
        s.set(0, 0, c);
        s
    }

    /// The series `x` (or `S` in two variables).
    pub fn var(trunc: i32) -> TruncSeries {
        TruncSeries::monomial(Vars::One, trunc, 1, 0)
    }

    pub fn var_s(trunc: i32) -> TruncSeries {
        TruncSeries::monomial(Vars::Two, trunc, 1, 0)
    }

    pub fn var_t(trunc: i32) -> TruncSeries {
        TruncSeries::monomial(Vars::Two, trunc, 0, 1)
    }

    pub fn monomial(vars: Vars, trunc: i32, i: i32, j: i32) -> TruncSeries {
        let mut s = TruncSeries::zero(vars, trunc);
        s.set(i, j, Poly::one());
        s
    }

    fn set(&mut self, i: i32, j: i32, c: Poly) {
        if i + j > self.trunc || c.is_zero() {
            self.terms.remove(&(i, j));
        } else {
            self.terms.insert((i, j), c);
        }
    }

    fn add_at(&mut self, i: i32, j: i32, c: &Poly) {
        if i + j > self.trunc || c.is_zero() {
            return;
        }
        let slot = self.terms.entry((i, j)).or_default();
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(i, j));
        }
    }

    pub fn vars(&self) -> Vars {
        self.vars
    }

    pub fn trunc(&self) -> i32 {
        self.trunc
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i32, i32), &Poly)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest total degree present, or 0 for the zero series.
    pub fn valuation(&self) -> i32 {
        self.terms.keys().map(|(i, j)| i + j).min().unwrap_or(0)
    }

    fn pole_floor(&self) -> i32 {
        self.valuation().min(0)
    }

    pub fn coefficient(&self, i: i32, j: i32) -> Result<Poly> {
        if self.vars == Vars::One && j != 0 {
            return Err(Error::Usage("univariate series has no second exponent".into()));
        }
        if i + j > self.trunc {
            return Err(precision(format!("coefficient ({i},{j}) beyond truncation {}", self.trunc)));
        }
        Ok(self.terms.get(&(i, j)).cloned().unwrap_or_default())
    }

    /// Coefficient of x^i of a univariate series.
    pub fn coeff(&self, i: i32) -> Result<Poly> {
        self.coefficient(i, 0)
    }

    pub fn truncate(&self, n: i32) -> TruncSeries {
        let n = n.min(self.trunc);
        TruncSeries {
            vars: self.vars,
            trunc: n,
            terms: self.terms.iter().filter(|((i, j), _)| i + j <= n).map(|(k, v)| (*k, v.clone())).collect(),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&Poly) -> Poly) -> TruncSeries {
        let mut out = TruncSeries::zero(self.vars, self.trunc);
        for ((i, j), c) in &self.terms {
            out.set(*i, *j, f(c));
        }
        out
    }

    pub fn try_map_coeffs(&self, f: impl Fn(&Poly) -> Result<Poly>) -> Result<TruncSeries> {
        let mut out = TruncSeries::zero(self.vars, self.trunc);
        for ((i, j), c) in &self.terms {
            out.set(*i, *j, f(c)?);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Poly) -> TruncSeries {
        self.map_coeffs(|p| p * c)
    }

    pub fn scale_rat(&self, c: &Rat) -> TruncSeries {
        self.map_coeffs(|p| p.scale(c))
    }

    fn check_compatible(&self, other: &TruncSeries) -> Result<()> {
        if self.vars != other.vars {
            return Err(Error::Usage("series in different numbers of variables".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &TruncSeries) -> Result<TruncSeries> {
        self.check_compatible(other)?;
        let mut out = self.truncate(other.trunc);
        for ((i, j), c) in &other.terms {
            out.add_at(*i, *j, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &TruncSeries) -> Result<TruncSeries> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TruncSeries {
        self.map_coeffs(|c| -c)
    }

    pub fn mul(&self, other: &TruncSeries) -> Result<TruncSeries> {
        self.check_compatible(other)?;
        let trunc = (self.trunc + other.pole_floor()).min(other.trunc + self.pole_floor());
        let mut out = TruncSeries::zero(self.vars, trunc);
        let mut acc: BTreeMap<(i32, i32), Poly> = BTreeMap::new();
        for ((i1, j1), a) in &self.terms {
            for ((i2, j2), b) in &other.terms {
                let (i, j) = (i1 + i2, j1 + j2);
                if i + j > trunc {
                    continue;
                }
                if i < -1 || j < -1 {
                    return Err(Error::Domain(format!("pole bound exceeded at ({i},{j})")));
                }
                *acc.entry((i, j)).or_default() += &(a * b);
            }
        }
        for ((i, j), c) in acc {
            out.set(i, j, c);
        }
        Ok(out)
    }

    /// a(S) * c(T) as a series in two variables.
    pub fn outer(a: &TruncSeries, c: &TruncSeries) -> Result<TruncSeries> {
        if a.vars != Vars::One || c.vars != Vars::One {
            return Err(Error::Usage("outer product takes univariate factors".into()));
        }
        let s = TruncSeries { vars: Vars::Two, trunc: a.trunc, terms: a.terms.clone() };
        let t = TruncSeries {
            vars: Vars::Two,
            trunc: c.trunc,
            terms: c.terms.iter().map(|((i, _), v)| ((0, *i), v.clone())).collect(),
        };
        s.mul(&t)
    }

    /// Embeds a univariate series as a series in `T`.
    pub fn as_t_series(&self) -> Result<TruncSeries> {
        if self.vars != Vars::One {
            return Err(Error::Usage("expected a univariate series".into()));
        }
        Ok(TruncSeries {
            vars: Vars::Two,
            trunc: self.trunc,
            terms: self.terms.iter().map(|((i, _), v)| ((0, *i), v.clone())).collect(),
        })
    }

    /// Embeds a univariate series as a series in `S`.
    pub fn as_s_series(&self) -> Result<TruncSeries> {
        if self.vars != Vars::One {
            return Err(Error::Usage("expected a univariate series".into()));
        }
        Ok(TruncSeries { vars: Vars::Two, trunc: self.trunc, terms: self.terms.clone() })
    }

    fn dense(&self, n: i32) -> Vec<Poly> {
        (0..=n).map(|i| self.terms.get(&(i, 0)).cloned().unwrap_or_default()).collect()
    }

    fn require_univariate(&self, what: &str) -> Result<()> {
        if self.vars != Vars::One {
            return Err(Error::Usage(format!("{what} needs a univariate series")));
        }
        Ok(())
    }

    fn pole(&self) -> Poly {
        self.terms.get(&(-1, 0)).cloned().unwrap_or_default()
    }

    /// Multiplicative inverse of a univariate series whose leading
    /// coefficient is a nonzero rational, at x^0 or x^1.
    pub fn recip(&self) -> Result<TruncSeries> {
        self.require_univariate("recip")?;
        let lead = self.terms.iter().next().map(|(k, v)| (k.0, v.clone()));
        let Some((v, lead)) = lead else {
            return Err(Error::Domain("inverse of zero series".into()));
        };
        let Some(c) = lead.as_constant() else {
            return Err(Error::Domain("leading coefficient is not a rational constant".into()));
        };
        match v {
            0 => {
                let n = self.trunc;
                let inv = dense_inverse(&self.dense(n), &c, n as usize);
                Ok(TruncSeries::from_coeffs(n, inv))
            }
            1 => {
                let n = self.trunc - 1;
                let shifted: Vec<Poly> = (0..=n).map(|i| self.terms.get(&(i + 1, 0)).cloned().unwrap_or_default()).collect();
                let inv = dense_inverse(&shifted, &c, n as usize);
                let mut out = TruncSeries::zero(Vars::One, n - 1);
                for (i, p) in inv.into_iter().enumerate() {
                    out.set(i as i32 - 1, 0, p);
                }
                Ok(out)
            }
            _ => Err(Error::Domain(format!("inverse of a series of valuation {v} leaves the pole bound"))),
        }
    }

    /// `outer(inner)`. `inner` must have no constant term and no pole. A
    /// simple pole of `outer` is handled through `1/inner`.
    pub fn compose(outer: &TruncSeries, inner: &TruncSeries) -> Result<TruncSeries> {
        outer.require_univariate("compose (outer)")?;
        if inner.terms.keys().any(|(i, j)| i + j <= 0) {
            return Err(Error::Domain("inner series must have positive valuation".into()));
        }
        let n = outer.trunc.min(inner.trunc);
        let pole = outer.pole();
        let mut result = if inner.vars == Vars::One {
            let f = outer.dense(n);
            let g = inner.dense(n);
            TruncSeries::from_coeffs(n, dense_compose(&f, &g, n as usize))
        } else {
            let mut acc = TruncSeries::zero(Vars::Two, n);
            let inner = inner.truncate(n);
            for k in (0..=n).rev() {
                acc = acc.mul(&inner)?;
                let c = outer.terms.get(&(k, 0)).cloned().unwrap_or_default();
                acc.add_at(0, 0, &c);
            }
            acc
        };
        if !pole.is_zero() {
            if inner.vars != Vars::One {
                return Err(Error::Unsupported("pole composed with a bivariate series".into()));
            }
            let inv = inner.recip()?.scale(&pole);
            result = result.add(&inv)?;
        }
        Ok(result)
    }

    /// Compositional inverse of `x + ...`.
    pub fn revert(&self) -> Result<TruncSeries> {
        self.require_univariate("revert")?;
        if self.terms.keys().any(|(i, _)| *i <= 0) {
            return Err(Error::Domain("series to revert must start at x^1".into()));
        }
        if self.coeff(1)? != Poly::one() {
            return Err(Error::Domain("leading coefficient must be 1".into()));
        }
        let n = self.trunc;
        let f = self.dense(n);
        Ok(TruncSeries::from_coeffs(n, dense_revert(&f, n as usize)))
    }

    pub fn derivative(&self) -> Result<TruncSeries> {
        self.require_univariate("derivative")?;
        let mut out = TruncSeries::zero(Vars::One, self.trunc - 1);
        for ((i, _), c) in &self.terms {
            if *i != 0 {
                out.set(i - 1, 0, c.scale(&int(*i as i64)));
            }
        }
        Ok(out)
    }

    /// Antiderivative with zero constant term.
    pub fn integrate(&self) -> Result<TruncSeries> {
        self.require_univariate("integrate")?;
        if !self.pole().is_zero() {
            return Err(Error::Domain("cannot integrate a simple pole".into()));
        }
        let mut out = TruncSeries::zero(Vars::One, self.trunc + 1);
        for ((i, _), c) in &self.terms {
            out.set(i + 1, 0, c.scale(&Rat::new(One::one(), (*i as i64 + 1).into())));
        }
        Ok(out)
    }

    /// Substitutes univariate series for `S` and (optionally) `T`.
    pub fn substitute_vars(&self, s_sub: &TruncSeries, t_sub: Option<&TruncSeries>) -> Result<TruncSeries> {
        if self.vars == Vars::One {
            return TruncSeries::compose(self, s_sub);
        }
        let first = compose_in_first(self, s_sub)?;
        match t_sub {
            None => Ok(first),
            Some(t) => Ok(swap(&compose_in_first(&swap(&first), t)?)),
        }
    }

    /// Coefficients `[S^i T^j]` for `0 <= i, j <= max`, scaled by `i! j!`.
    pub fn factorial_table(&self, max: i32) -> Result<BTreeMap<(i32, i32), Poly>> {
        let mut out = BTreeMap::new();
        for i in 0..=max {
            for j in 0..=max {
                let c = self.coefficient(i, j)?;
                let f = crate::rational::factorial(i as u32) * crate::rational::factorial(j as u32);
                out.insert((i, j), c.scale(&Rat::from_integer(f)));
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let variables = match self.vars {
            Vars::One => json!(["S"]),
            Vars::Two => json!(["S", "T"]),
        };
        let mut keys: Vec<_> = self.terms.keys().copied().collect();
        keys.sort_by_key(|(i, j)| (i + j, std::cmp::Reverse(*i)));
        let terms: Vec<Value> = keys
            .iter()
            .map(|k| json!({"S_exp": k.0, "T_exp": k.1, "coeff": self.terms[k].to_json()}))
            .collect();
        json!({"variables": variables, "truncation": self.trunc, "terms": terms})
    }
}

fn swap(s: &TruncSeries) -> TruncSeries {
    TruncSeries { vars: Vars::Two, trunc: s.trunc, terms: s.terms.iter().map(|((i, j), c)| ((*j, *i), c.clone())).collect() }
}

/// Substitutes `sub(S)` for `S` in a bivariate series, one `T` power at a
/// time.
fn compose_in_first(s: &TruncSeries, sub: &TruncSeries) -> Result<TruncSeries> {
    let mut by_j: BTreeMap<i32, BTreeMap<(i32, i32), Poly>> = BTreeMap::new();
    for ((i, j), c) in &s.terms {
        by_j.entry(*j).or_default().insert((*i, 0), c.clone());
    }
    let mut pieces = Vec::new();
    let mut trunc = s.trunc;
    for j in -1..=s.trunc + 1 {
        let slice = by_j.remove(&j).unwrap_or_default();
        let has_pole = slice.contains_key(&(-1, 0));
        let t_j = (s.trunc - j).min(sub.trunc - if has_pole { 2 } else { 0 });
        trunc = trunc.min(t_j + j);
        if !slice.is_empty() {
            let uni = TruncSeries { vars: Vars::One, trunc: s.trunc - j, terms: slice };
            pieces.push((j, TruncSeries::compose(&uni, sub)?));
        }
    }
    let mut out = TruncSeries::zero(Vars::Two, trunc);
    for (j, piece) in pieces {
        for ((i, _), c) in piece.terms {
            out.add_at(i, j, &c);
        }
    }
    Ok(out)
}

fn dense_mul(a: &[Poly], b: &[Poly], n: usize) -> Vec<Poly> {
    let mut out = vec![Poly::zero(); n + 1];
    for (i, x) in a.iter().enumerate().take(n + 1) {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n + 1 - i) {
            if !y.is_zero() {
                out[i + j] += &(x * y);
            }
        }
    }
    out
}

fn dense_inverse(a: &[Poly], a0: &Rat, n: usize) -> Vec<Poly> {
    let inv0 = a0.recip();
    let mut out: Vec<Poly> = Vec::with_capacity(n + 1);
    out.push(Poly::constant(inv0.clone()));
    for k in 1..=n {
        let mut acc = Poly::zero();
        for i in 1..=k.min(a.len() - 1) {
            if !a[i].is_zero() && !out[k - i].is_zero() {
                acc += &(&a[i] * &out[k - i]);
            }
        }
        out.push(acc.scale(&-inv0.clone()));
    }
    out
}

/// f(g) with g[0] = 0, summing f_k g^k over successive powers. Each g^k has
/// valuation k, so later products are short.
fn dense_compose(f: &[Poly], g: &[Poly], n: usize) -> Vec<Poly> {
    dense_compose_many(&[f], g, n).pop().unwrap()
}

/// Several outer series composed with the same inner series.
fn dense_compose_many(fs: &[&[Poly]], g: &[Poly], n: usize) -> Vec<Vec<Poly>> {
    let mut outs = vec![vec![Poly::zero(); n + 1]; fs.len()];
    let top = fs.iter().map(|f| f.len()).max().unwrap_or(0).min(n + 1);
    let mut power = vec![Poly::zero(); n + 1];
    power[0] = Poly::one();
    for k in 0..top {
        if k > 0 {
            let mut next = vec![Poly::zero(); n + 1];
            for (i, x) in power.iter().enumerate().skip(k - 1) {
                if x.is_zero() {
                    continue;
                }
                for (j, y) in g.iter().enumerate().take(n + 1 - i).skip(1) {
                    if !y.is_zero() {
                        next[i + j] += &(x * y);
                    }
                }
            }
            power = next;
        }
        for (f, out) in fs.iter().zip(outs.iter_mut()) {
            let Some(c) = f.get(k) else { continue };
            if c.is_zero() {
                continue;
            }
            for (i, x) in power.iter().enumerate().skip(k) {
                if !x.is_zero() {
                    out[i] += &(c * x);
                }
            }
        }
    }
    outs
}

fn dense_derivative(f: &[Poly]) -> Vec<Poly> {
    f.iter().enumerate().skip(1).map(|(i, c)| c.scale(&int(i as i64))).collect()
}

/// Newton iteration g <- g - (f(g) - x) / f'(g), doubling the precision.
fn dense_revert(f: &[Poly], n: usize) -> Vec<Poly> {
    let mut g = vec![Poly::zero(); n + 1];
    if n >= 1 {
        g[1] = Poly::one();
    }
    let fp = dense_derivative(f);
    let mut k = 1;
    while k < n {
        k = (2 * k).min(n);
        let gk: Vec<Poly> = g[..=k].to_vec();
        let mut both = dense_compose_many(&[&f[..=k.min(f.len() - 1)], &fp[..(k + 1).min(fp.len())]], &gk, k);
        let dfg = both.pop().unwrap();
        let mut err = both.pop().unwrap();
        err[1] -= &Poly::one();
        let inv = dense_inverse(&dfg, &dfg[0].constant_term(), k);
        let step = dense_mul(&err, &inv, k);
        for i in 0..=k {
            g[i] -= &step[i];
        }
    }
    g
}
