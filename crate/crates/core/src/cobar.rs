//! The pair of logarithms related by the universal strict isomorphism b,
//! the comodule structure of the stunted projective spaces, the transfer
//! cocycles and the low cobar differentials.
//!
//! Conventions. In the universal case the coefficient ring of the left
//! logarithm is Q[m_1, m_2, ...] and b(x) = x + sum b_i x^{i+1}. The right
//! logarithm is log^R = log^L o b^{-1}, so that log^R o b = log^L and
//! eta_R(m_i) = [x^{i+1}] log^R. The coaction on the generating series is
//! psi(beta_n) = sum_j [S^n] b(S)^j (x) beta_j.
//!
//! Elements of Gamma (x) Gamma are written with the generators of the left
//! factor (m_i, b_i) and `bb_i` for the b_i of the right factor; an m_i of the
//! right factor is moved left as eta_R(m_i). The coproduct is
//! Delta b(x) = bb(b(x)).

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fgl::FormalGroupLaw;
use crate::poly::{Gen, Poly};
use crate::rational::{factorial, Rat};
use crate::series::{TruncSeries, Vars};

/// The left logarithm together with a strict isomorphism b to the right one.
#[derive(Debug, Clone)]
pub struct HopfPair {
    prec: u32,
    universal: bool,
    log_l: TruncSeries,
    b: TruncSeries,
    log_r: TruncSeries,
    exp_l: OnceLock<TruncSeries>,
    exp_r: OnceLock<TruncSeries>,
}

impl HopfPair {
    /// Free m_1..m_n and b_1..b_n; everything known through x^{n+1}.
    pub fn universal(n: u32) -> Result<HopfPair> {
        let law = FormalGroupLaw::universal(n)?;
        let mut coeffs = vec![Poly::zero(), Poly::one()];
        coeffs.extend((1..=n).map(|i| Poly::gen(Gen::b(i))));
        let b = TruncSeries::from_coeffs(n as i32 + 1, coeffs);
        let log_r = TruncSeries::compose(law.log(), &b.revert()?)?;
        Ok(HopfPair {
            prec: n,
            universal: true,
            log_l: law.log().clone(),
            b,
            log_r,
            exp_l: OnceLock::new(),
            exp_r: OnceLock::new(),
        })
    }

    /// The pair of two laws over a common ring, b = exp^right o log^left.
    /// Then b^{-1} = exp^left o log^right and log^R is the right logarithm.
    pub fn from_laws(left: &FormalGroupLaw, right: &FormalGroupLaw) -> Result<HopfPair> {
        let b = TruncSeries::compose(right.exp()?, left.log())?;
        let n = left.prec().min(right.prec());
        let exp_l = OnceLock::new();
        let _ = exp_l.set(left.exp()?.clone());
        let exp_r = OnceLock::new();
        let _ = exp_r.set(right.exp()?.clone());
        Ok(HopfPair { prec: n, universal: false, log_l: left.log().clone(), b, log_r: right.log().clone(), exp_l, exp_r })
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn is_universal(&self) -> bool {
        self.universal
    }

    pub fn log_l(&self) -> &TruncSeries {
        &self.log_l
    }

    pub fn b(&self) -> &TruncSeries {
        &self.b
    }

    pub fn right_log(&self) -> &TruncSeries {
        &self.log_r
    }

    pub fn exp_l(&self) -> Result<&TruncSeries> {
        if let Some(e) = self.exp_l.get() {
            return Ok(e);
        }
        let e = self.log_l.revert()?;
        Ok(self.exp_l.get_or_init(|| e))
    }

    pub fn exp_r(&self) -> Result<&TruncSeries> {
        if let Some(e) = self.exp_r.get() {
            return Ok(e);
        }
        let e = self.log_r.revert()?;
        Ok(self.exp_r.get_or_init(|| e))
    }

    /// eta_R(m_i) = [x^{i+1}] log^R.
    pub fn eta_r(&self, i: u32) -> Result<Poly> {
        self.log_r.coeff(i as i32 + 1)
    }

    /// Laws with logarithms log^L and log^R (for Bernoulli numbers).
    pub fn left_law(&self) -> Result<FormalGroupLaw> {
        FormalGroupLaw::custom(self.log_l.clone(), None)
    }

    pub fn right_law(&self) -> Result<FormalGroupLaw> {
        FormalGroupLaw::custom(self.log_r.clone(), None)
    }

    /// The ring map from the universal pair: m_i -> [x^{i+1}] log^L,
    /// b_i -> [x^{i+1}] b.
    pub fn classifying_map(&self) -> Result<BTreeMap<Gen, Poly>> {
        let mut out = BTreeMap::new();
        for i in 1..=self.prec {
            out.insert(Gen::m(i), self.log_l.coeff(i as i32 + 1)?);
            out.insert(Gen::b(i), self.b.coeff(i as i32 + 1)?);
        }
        Ok(out)
    }
}

/// Table c[k - bottom][i - bottom] = [S^i] b(S)^k for bottom <= k, i <= max.
pub fn power_table(b: &TruncSeries, bottom: i32, max: i32) -> Result<Vec<Vec<Poly>>> {
    if bottom < -1 {
        return Err(Error::Domain("comodules start at index -1 or above".into()));
    }
    let width = (max - bottom + 1) as usize;
    let mut table = vec![vec![Poly::zero(); width]; width];
    let mut record = |k: i32, s: &TruncSeries| -> Result<()> {
        for i in k.max(bottom)..=max {
            table[(k - bottom) as usize][(i - bottom) as usize] = s.coeff(i)?;
        }
        Ok(())
    };
    if bottom == -1 {
        record(-1, &b.recip()?)?;
    }
    let mut power = TruncSeries::constant(Vars::One, b.trunc(), Poly::one());
    for k in 0..=max {
        if k > 0 {
            power = power.mul(b)?;
        }
        if k >= bottom {
            record(k, &power)?;
        }
    }
    Ok(table)
}

/// psi(beta_n) for the stunted space with bottom cell `bottom`, as a
/// polynomial linear in the beta symbols.
pub fn comodule_structure(pair: &HopfPair, bottom: i32, n: i32) -> Result<Poly> {
    let table = power_table(&pair.b, bottom, n)?;
    let mut out = Poly::zero();
    for k in bottom..=n {
        out += &(&table[(k - bottom) as usize][(n - bottom) as usize] * &Poly::gen(Gen::beta(k)));
    }
    Ok(out)
}

/// 1/S - 1/b(S).
pub fn cocycle_e_tau(pair: &HopfPair) -> Result<TruncSeries> {
    let inv = pair.b.recip()?;
    TruncSeries::monomial(Vars::One, inv.trunc(), -1, 0).sub(&inv)
}

/// sum_j b(T)^j beta_j with symbolic beta_j, as a series in T.
pub fn coaction_series(b: &TruncSeries, max: i32) -> Result<TruncSeries> {
    let n = b.trunc().min(max);
    let mut acc = TruncSeries::zero(Vars::One, n);
    let mut power = TruncSeries::constant(Vars::One, n, Poly::one());
    for j in 0..=n {
        if j > 0 {
            power = power.mul(b)?.truncate(n);
        }
        acc = acc.add(&power.scale(&Poly::gen(Gen::beta(j))))?;
    }
    Ok(acc)
}

/// (1/S - 1/b(S)) * sum_j b(T)^j beta_j.
pub fn cocycle_big_e_tau(pair: &HopfPair) -> Result<TruncSeries> {
    let e = cocycle_e_tau(pair)?;
    let c = coaction_series(&pair.b, e.trunc())?;
    TruncSeries::outer(&e, &c)
}

/// (1/S - 1/b(S)) (1/log^L T - 1/b(T)).
pub fn cocycle_k(pair: &HopfPair) -> Result<TruncSeries> {
    let e = cocycle_e_tau(pair)?;
    let second = pair.log_l.recip()?.sub(&pair.b.recip()?)?;
    TruncSeries::outer(&e, &second)
}

/// The Thom class values beta_{-1}(S) -> 1/log S and beta_0(S) -> 1/log S - 1/S.
pub fn thom_u_section(log: &TruncSeries) -> Result<(TruncSeries, TruncSeries)> {
    let inv = log.recip()?;
    let reduced = inv.sub(&TruncSeries::monomial(Vars::One, inv.trunc(), -1, 0))?;
    Ok((inv, reduced))
}

/// K obtained from E_tau by applying the Thom section, read through the right
/// unit, in the second factor: beta_j -> [x^j](1/log^R - 1/x).
pub fn cocycle_k_via_e_tau(pair: &HopfPair) -> Result<TruncSeries> {
    let big = cocycle_big_e_tau(pair)?;
    let (_, thom) = thom_u_section(&pair.log_r)?;
    let mut assign = BTreeMap::new();
    for j in 0..=thom.trunc() {
        assign.insert(Gen::beta(j), thom.coeff(j)?);
    }
    let top = big.trunc().min(thom.trunc());
    let s = big.truncate(top).map_coeffs(|c| c.replace(&assign));
    if s.terms().any(|(_, c)| c.generators().iter().any(|g| matches!(g.family(), crate::poly::Family::Beta))) {
        return Err(Error::Precision("Thom section not known far enough".into()));
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CocycleKind {
    ETau,
    BigETau,
    K,
}

impl CocycleKind {
    pub fn parse(s: &str) -> Option<CocycleKind> {
        Some(match s {
            "e_tau" => CocycleKind::ETau,
            "E_tau" => CocycleKind::BigETau,
            "K" => CocycleKind::K,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            CocycleKind::ETau => "e_tau",
            CocycleKind::BigETau => "E_tau",
            CocycleKind::K => "K",
        }
    }

    pub fn evaluate(self, pair: &HopfPair) -> Result<TruncSeries> {
        match self {
            CocycleKind::ETau => cocycle_e_tau(pair),
            CocycleKind::BigETau => cocycle_big_e_tau(pair),
            CocycleKind::K => cocycle_k(pair),
        }
    }
}

/// The cocycle for the pair (left, right): log^L -> log^left and
/// b -> exp^right o log^left throughout its defining formula.
pub fn base_change(kind: CocycleKind, left: &FormalGroupLaw, right: &FormalGroupLaw) -> Result<TruncSeries> {
    kind.evaluate(&HopfPair::from_laws(left, right)?)
}

/// sum_j exp(T)^j beta_j; its coefficients p_n / n! are the primitives.
pub fn primitives_series(law: &FormalGroupLaw, n: i32) -> Result<TruncSeries> {
    coaction_series(law.exp()?, n)
}

/// p_n = n! [T^n] sum_j exp(T)^j beta_j.
pub fn primitive(law: &FormalGroupLaw, n: i32) -> Result<Poly> {
    let s = primitives_series(law, n)?;
    Ok(s.coeff(n)?.scale(&Rat::from_integer(factorial(n as u32))))
}

/// m! n! [S^m T^n] of value(exp S, exp T) for m, n <= max. The substitution
/// is carried out coefficientwise, S first and then T, with [S^m] exp(S)^i
/// tabulated once.
pub fn restrict_primitives(value: &TruncSeries, exp: &TruncSeries, max: i32) -> Result<BTreeMap<(i32, i32), Poly>> {
    if value.vars() != Vars::Two {
        return Err(Error::Usage("restriction needs a series in S and T".into()));
    }
    if 2 * max > value.trunc() {
        return Err(Error::Precision(format!("value known through total degree {}, need {}", value.trunc(), 2 * max)));
    }
    let bottom = value.terms().map(|((i, j), _)| (*i).min(*j)).min().unwrap_or(0).min(0);
    let table = power_table(&exp.truncate(max + 2), bottom, max)?;
    let p = |k: i32, m: i32| -> &Poly { &table[(k - bottom) as usize][(m - bottom) as usize] };
    // partial[(j, m)] = sum_i c_ij [S^m] exp(S)^i
    let mut partial: BTreeMap<(i32, i32), Poly> = BTreeMap::new();
    for ((i, j), c) in value.terms() {
        if *i > max || *j > max {
            continue;
        }
        for m in (*i).max(0)..=max {
            let a = p(*i, m);
            if !a.is_zero() {
                *partial.entry((*j, m)).or_insert_with(Poly::zero) += &(c * a);
            }
        }
    }
    let mut out = BTreeMap::new();
    for m in 0..=max {
        for n in 0..=max {
            let mut acc = Poly::zero();
            for j in bottom..=n {
                let Some(h) = partial.get(&(j, m)) else { continue };
                let b = p(j, n);
                if !b.is_zero() {
                    acc += &(h * b);
                }
            }
            let f = Rat::from_integer(factorial(m as u32) * factorial(n as u32));
            out.insert((m, n), acc.scale(&f));
        }
    }
    Ok(out)
}

/// (Bbar^R_{m+1} - Bbar^L_{m+1}) Bbar^R_{n+1} for m, n <= max, with the
/// Bernoulli numbers of exp^L and of exp^R = revert(log^R).
pub fn restrict_k_closed_form(pair: &HopfPair, max: i32) -> Result<BTreeMap<(i32, i32), Poly>> {
    // B_k only sees the logarithm through x^k.
    let left = FormalGroupLaw::custom(pair.log_l.truncate(max + 2), None)?;
    let right = FormalGroupLaw::custom(pair.log_r.truncate(max + 2), None)?;
    let mut bl = Vec::new();
    let mut br = Vec::new();
    for k in 1..=max as u32 + 1 {
        bl.push(left.reduced_bernoulli(k)?);
        br.push(right.reduced_bernoulli(k)?);
    }
    let mut out = BTreeMap::new();
    for m in 0..=max as usize {
        for n in 0..=max as usize {
            out.insert((m as i32, n as i32), &(&br[m] - &bl[m]) * &br[n]);
        }
    }
    Ok(out)
}

pub fn table_to_json(table: &BTreeMap<(i32, i32), Poly>) -> Value {
    Value::Array(table.iter().map(|((m, n), v)| json!({"m": m, "n": n, "value": v.to_json()})).collect())
}

/// Basis of a smash product of one or two stunted spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    One { bottom: i32 },
    Two { bottom_s: i32, bottom_t: i32 },
}

impl Domain {
    fn indices(self, max: i32) -> Vec<(i32, i32)> {
        match self {
            Domain::One { bottom } => (bottom..=max).map(|i| (i, 0)).collect(),
            Domain::Two { bottom_s, bottom_t } => {
                (bottom_s..=max).flat_map(|i| (bottom_t..=max).map(move |j| (i, j))).collect()
            }
        }
    }
}

/// Comodule receiving the values of a cochain: the unit comodule or a
/// stunted space whose basis is written with the `beta` symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Unit,
    Cp { bottom: i32 },
}

/// Values of a cochain on the basis elements of its domain with index at
/// most `max` in each factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Cochain {
    pub domain: Domain,
    pub target: Target,
    pub max: i32,
    pub values: BTreeMap<(i32, i32), Poly>,
}

impl Cochain {
    pub fn is_zero(&self) -> bool {
        self.values.values().all(Poly::is_zero)
    }

    /// Cochain read off from a generating series in S (and T).
    pub fn from_series(series: &TruncSeries, domain: Domain, target: Target, max: i32) -> Result<Cochain> {
        let mut values = BTreeMap::new();
        for (i, j) in domain.indices(max) {
            let v = match domain {
                Domain::One { .. } => series.coeff(i)?,
                Domain::Two { .. } => series.coefficient(i, j)?,
            };
            values.insert((i, j), v);
        }
        Ok(Cochain { domain, target, max, values })
    }

    /// Applies the projection onto the beta_{-1} coefficient.
    pub fn project_bottom(&self) -> Cochain {
        let mut assign = BTreeMap::new();
        if let Target::Cp { bottom } = self.target {
            for k in bottom..=self.max + 1 {
                assign.insert(Gen::beta(k), if k == -1 { Poly::one() } else { Poly::zero() });
            }
        }
        Cochain {
            domain: self.domain,
            target: Target::Unit,
            max: self.max,
            values: self.values.iter().map(|(k, v)| (*k, v.replace(&assign))).collect(),
        }
    }
}

/// Cobar differentials for the universal pair.
#[derive(Debug, Clone)]
pub struct Cobar {
    pair: HopfPair,
    /// m_i -> eta_R(m_i).
    eta_r: BTreeMap<Gen, Poly>,
    /// b_i -> Delta(b_i) in b and bb.
    delta: BTreeMap<Gen, Poly>,
    /// m_i -> eta_R(m_i), b_i -> bb_i: the embedding x -> 1 (x) x.
    one_tensor: BTreeMap<Gen, Poly>,
    bb: TruncSeries,
}

impl Cobar {
    pub fn new(pair: &HopfPair) -> Result<Cobar> {
        if !pair.universal {
            return Err(Error::Unsupported("cobar differentials are implemented for the universal pair".into()));
        }
        let n = pair.prec;
        let mut coeffs = vec![Poly::zero(), Poly::one()];
        coeffs.extend((1..=n).map(|i| Poly::gen(Gen::b_outer(i))));
        let bb = TruncSeries::from_coeffs(n as i32 + 1, coeffs);
        let db = TruncSeries::compose(&bb, &pair.b)?;
        let mut eta_r = BTreeMap::new();
        let mut delta = BTreeMap::new();
        let mut one_tensor = BTreeMap::new();
        for i in 1..=n {
            let e = pair.eta_r(i)?;
            eta_r.insert(Gen::m(i), e.clone());
            one_tensor.insert(Gen::m(i), e);
            one_tensor.insert(Gen::b(i), Poly::gen(Gen::b_outer(i)));
            delta.insert(Gen::b(i), db.coeff(i as i32 + 1)?);
        }
        Ok(Cobar { pair: pair.clone(), eta_r, delta, one_tensor, bb })
    }

    pub fn pair(&self) -> &HopfPair {
        &self.pair
    }

    fn check_range(&self, max: i32) -> Result<()> {
        if max + 2 > self.pair.prec as i32 + 1 {
            return Err(Error::Precision(format!("index {max} needs b through b_{}", max + 1)));
        }
        Ok(())
    }

    /// Coaction of the domain: pairs (coefficient over b, basis index).
    fn coaction(domain: Domain, table_s: &[Vec<Poly>], table_t: &[Vec<Poly>], idx: (i32, i32)) -> Vec<(Poly, (i32, i32))> {
        let mut out = Vec::new();
        match domain {
            Domain::One { bottom } => {
                for k in bottom..=idx.0 {
                    let c = &table_s[(k - bottom) as usize][(idx.0 - bottom) as usize];
                    if !c.is_zero() {
                        out.push((c.clone(), (k, 0)));
                    }
                }
            }
            Domain::Two { bottom_s, bottom_t } => {
                for k in bottom_s..=idx.0 {
                    let a = &table_s[(k - bottom_s) as usize][(idx.0 - bottom_s) as usize];
                    if a.is_zero() {
                        continue;
                    }
                    for l in bottom_t..=idx.1 {
                        let c = &table_t[(l - bottom_t) as usize][(idx.1 - bottom_t) as usize];
                        if !c.is_zero() {
                            out.push((a * c, (k, l)));
                        }
                    }
                }
            }
        }
        out
    }

    fn domain_tables(&self, domain: Domain, b: &TruncSeries, max: i32) -> Result<(Vec<Vec<Poly>>, Vec<Vec<Poly>>)> {
        match domain {
            Domain::One { bottom } => Ok((power_table(b, bottom, max)?, Vec::new())),
            Domain::Two { bottom_s, bottom_t } => Ok((power_table(b, bottom_s, max)?, power_table(b, bottom_t, max)?)),
        }
    }

    /// beta_k -> sum_l [S^k] c(S)^l beta_l with c = b or bb.
    fn target_coaction(&self, target: Target, b: &TruncSeries, max: i32) -> Result<BTreeMap<Gen, Poly>> {
        let mut out = BTreeMap::new();
        if let Target::Cp { bottom } = target {
            let table = power_table(b, bottom, max)?;
            for k in bottom..=max {
                let mut img = Poly::zero();
                for l in bottom..=k {
                    img += &(&table[(l - bottom) as usize][(k - bottom) as usize] * &Poly::gen(Gen::beta(l)));
                }
                out.insert(Gen::beta(k), img);
            }
        }
        Ok(out)
    }

    /// d^0 g = (Gamma (x) g) psi_X - psi_M g for an A-linear map g whose
    /// values are polynomials in the m_i and the target symbols.
    pub fn d0(&self, g: &Cochain) -> Result<Cochain> {
        self.check_range(g.max)?;
        let (ts, tt) = self.domain_tables(g.domain, &self.pair.b, g.max)?;
        let psi_m = self.target_coaction(g.target, &self.pair.b, g.max)?;
        let mut values = BTreeMap::new();
        for (idx, gv) in &g.values {
            let mut acc = Poly::zero();
            for (c, k) in Cobar::coaction(g.domain, &ts, &tt, *idx) {
                let img = g.values.get(&k).ok_or_else(|| Error::Precision(format!("value at {k:?} missing")))?;
                acc += &(&c * &img.replace(&self.eta_r));
            }
            acc -= &gv.replace(&psi_m);
            values.insert(*idx, acc);
        }
        Ok(Cochain { domain: g.domain, target: g.target, max: g.max, values })
    }

    /// d^1 f = (Gamma (x) f) psi_X - (Delta (x) M) f + (Gamma (x) psi_M) f.
    pub fn d1(&self, f: &Cochain) -> Result<Cochain> {
        self.check_range(f.max)?;
        let (ts, tt) = self.domain_tables(f.domain, &self.pair.b, f.max)?;
        let psi_middle = self.target_coaction(f.target, &self.bb, f.max)?;
        let mut values = BTreeMap::new();
        for (idx, fv) in &f.values {
            let mut acc = Poly::zero();
            for (c, k) in Cobar::coaction(f.domain, &ts, &tt, *idx) {
                let img = f.values.get(&k).ok_or_else(|| Error::Precision(format!("value at {k:?} missing")))?;
                acc += &(&c * &img.replace(&self.one_tensor));
            }
            acc -= &fv.replace(&self.delta);
            acc += &fv.replace(&psi_middle);
            values.insert(*idx, acc);
        }
        Ok(Cochain { domain: f.domain, target: f.target, max: f.max, values })
    }

    /// The A-linear section beta_n -> beta_n of the bottom-cell extension,
    /// on indices 0..=max.
    pub fn splitting_section(max: i32) -> Cochain {
        let values = (0..=max).map(|n| ((n, 0), Poly::gen(Gen::beta(n)))).collect();
        Cochain { domain: Domain::One { bottom: 0 }, target: Target::Cp { bottom: -1 }, max, values }
    }

    /// -(Gamma (x) r) psi sigma, computed as r composed with d^0 sigma.
    pub fn canonical_splitting_cocycle(&self, max: i32) -> Result<Cochain> {
        let d = self.d0(&Cobar::splitting_section(max))?;
        Ok(d.project_bottom())
    }
}

/// Primitive p_n of the two-variable domain: n-th coefficients of
/// sum_j exp(S)^j beta_j (x) sum_k exp(T)^k betaT_k, scaled.
pub fn primitives_series_two(law: &FormalGroupLaw, n: i32) -> Result<TruncSeries> {
    let s = primitives_series(law, n)?;
    let mut to_t = BTreeMap::new();
    for j in 0..=n {
        to_t.insert(Gen::beta(j), Poly::gen(Gen::beta_t(j)));
    }
    let t = s.map_coeffs(|c| c.replace(&to_t));
    TruncSeries::outer(&s, &t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};
    use proptest::prelude::*;

    fn m(i: u32) -> Poly {
        Poly::gen(Gen::m(i))
    }
    fn b(i: u32) -> Poly {
        Poly::gen(Gen::b(i))
    }

    #[test]
    fn right_unit() {
        let pair = HopfPair::universal(5).unwrap();
        assert_eq!(pair.eta_r(1).unwrap(), &m(1) - &b(1));
        // log^L o b^{-1} with b^{-1} = x - b1 x^2 + (2b1^2 - b2) x^3:
        // [x^3] = 2b1^2 - b2 - 2 m1 b1 + m2.
        let expect = &(&(&(&b(1) * &b(1)).scale(&int(2)) - &b(2)) - &(&m(1) * &b(1)).scale(&int(2))) + &m(2);
        assert_eq!(pair.eta_r(2).unwrap(), expect);
        // exp^R o log^L gives back b.
        let back = TruncSeries::compose(pair.exp_r().unwrap(), pair.log_l()).unwrap();
        assert_eq!(back, *pair.b());
    }

    #[test]
    fn identity_iso_collapses() {
        let pair = HopfPair::universal(4).unwrap();
        let mut trivial = BTreeMap::new();
        for i in 1..=4 {
            trivial.insert(Gen::b(i), Poly::zero());
        }
        let log_r = pair.right_log().map_coeffs(|c| c.replace(&trivial));
        assert_eq!(log_r, *pair.log_l());
        assert!(cocycle_e_tau(&pair).unwrap().map_coeffs(|c| c.replace(&trivial)).is_zero());
        assert!(cocycle_k(&pair).unwrap().map_coeffs(|c| c.replace(&trivial)).is_zero());
        let psi = comodule_structure(&pair, 0, 3).unwrap().replace(&trivial);
        assert_eq!(psi, Poly::gen(Gen::beta(3)));
    }

    #[test]
    fn coaction_low_terms() {
        let pair = HopfPair::universal(4).unwrap();
        assert_eq!(comodule_structure(&pair, 0, 1).unwrap(), Poly::gen(Gen::beta(1)));
        assert_eq!(
            comodule_structure(&pair, 0, 2).unwrap(),
            &(&b(1) * &Poly::gen(Gen::beta(1))) + &Poly::gen(Gen::beta(2))
        );
    }

    #[test]
    fn e_tau_values() {
        let pair = HopfPair::universal(5).unwrap();
        let e = cocycle_e_tau(&pair).unwrap();
        // 1/b(S) = S^{-1}(1 - b1 S + (b1^2 - b2) S^2 - ...).
        assert_eq!(e.coeff(0).unwrap(), b(1));
        assert_eq!(e.coeff(1).unwrap(), &b(2) - &(&b(1) * &b(1)));
        assert!(e.coeff(-1).unwrap().is_zero());
    }

    #[test]
    fn k_values_and_two_paths() {
        let pair = HopfPair::universal(6).unwrap();
        let k = cocycle_k(&pair).unwrap();
        assert_eq!(k.coefficient(0, 0).unwrap(), &b(1) * &(&b(1) - &m(1)));
        let second = pair.log_l().recip().unwrap().sub(&pair.b().recip().unwrap()).unwrap();
        assert_eq!(second.coeff(0).unwrap(), &b(1) - &m(1));
        let via = cocycle_k_via_e_tau(&pair).unwrap();
        let top = via.trunc().min(k.trunc());
        assert_eq!(via.truncate(top), k.truncate(top));
    }

    #[test]
    fn big_e_tau_restricts_to_e_tau() {
        let pair = HopfPair::universal(5).unwrap();
        let big = cocycle_big_e_tau(&pair).unwrap();
        let e = cocycle_e_tau(&pair).unwrap();
        // On beta_i (x) beta_0 the coaction of beta_0 is 1 (x) beta_0.
        for i in 0..=3 {
            assert_eq!(big.coefficient(i, 0).unwrap(), &e.coeff(i).unwrap() * &Poly::gen(Gen::beta(0)));
        }
        assert_eq!(big.coefficient(0, 0).unwrap(), &b(1) * &Poly::gen(Gen::beta(0)));
    }

    #[test]
    fn thom_section_values() {
        let ku = FormalGroupLaw::multiplicative(6).unwrap();
        let (inv, reduced) = thom_u_section(ku.log()).unwrap();
        // x / log(1+x) = 1 + x/2 - x^2/12 + x^3/24 - ...
        let u = |c: Rat, e: u32| Poly::term(c, crate::poly::Mono::gen(Gen::U, e));
        assert_eq!(reduced.coeff(0).unwrap(), u(rat(1, 2), 1));
        assert_eq!(reduced.coeff(1).unwrap(), u(rat(-1, 12), 2));
        assert_eq!(reduced.coeff(2).unwrap(), u(rat(1, 24), 3));
        assert_eq!(inv.coeff(-1).unwrap(), Poly::one());
        let add = FormalGroupLaw::additive(4).unwrap();
        assert!(thom_u_section(add.log()).unwrap().1.is_zero());
    }

    #[test]
    fn primitive_expansions() {
        let law = FormalGroupLaw::universal(5).unwrap();
        let beta = |i| Poly::gen(Gen::beta(i));
        assert_eq!(primitive(&law, 0).unwrap(), beta(0));
        assert_eq!(primitive(&law, 1).unwrap(), beta(1));
        assert_eq!(primitive(&law, 2).unwrap(), &beta(2).scale(&int(2)) - &(&m(1) * &beta(1)).scale(&int(2)));
        let add = FormalGroupLaw::additive(5).unwrap();
        for n in 0..=5 {
            assert_eq!(primitive(&add, n).unwrap(), beta(n).scale(&Rat::from_integer(factorial(n as u32))));
        }
    }

    #[test]
    fn primitives_are_primitive() {
        // psi(p_n) = 1 (x) p_n: substitute beta_k by its coaction and move the
        // m's of the coefficients through eta_L (they stay put).
        let pair = HopfPair::universal(6).unwrap();
        let law = pair.left_law().unwrap();
        for n in 0..=4 {
            let p = primitive(&law, n).unwrap();
            let mut psi = BTreeMap::new();
            for k in 0..=n {
                psi.insert(Gen::beta(k), comodule_structure(&pair, 0, k).unwrap());
            }
            // 1 (x) p_n has its m coefficients moved left through eta_R.
            let mut eta = BTreeMap::new();
            for i in 1..=6 {
                eta.insert(Gen::m(i), pair.eta_r(i).unwrap());
            }
            assert_eq!(p.replace(&psi), p.replace(&eta), "n = {n}");
        }
    }

    #[test]
    fn d1_kills_e_tau() {
        let pair = HopfPair::universal(8).unwrap();
        let cobar = Cobar::new(&pair).unwrap();
        let e = Cochain::from_series(&cocycle_e_tau(&pair).unwrap(), Domain::One { bottom: 0 }, Target::Unit, 6).unwrap();
        assert!(cobar.d1(&e).unwrap().is_zero());
        // A perturbed cochain is not closed.
        let mut bad = e.clone();
        bad.values.insert((1, 0), &bad.values[&(1, 0)] + &m(2));
        assert!(!cobar.d1(&bad).unwrap().is_zero());
    }

    #[test]
    fn canonical_splitting_is_e_tau() {
        let pair = HopfPair::universal(7).unwrap();
        let cobar = Cobar::new(&pair).unwrap();
        let split = cobar.canonical_splitting_cocycle(5).unwrap();
        let e = Cochain::from_series(&cocycle_e_tau(&pair).unwrap(), Domain::One { bottom: 0 }, Target::Unit, 5).unwrap();
        assert_eq!(split.values, e.values);
    }

    #[test]
    fn d1_kills_big_e_tau() {
        let pair = HopfPair::universal(8).unwrap();
        let cobar = Cobar::new(&pair).unwrap();
        let big = cocycle_big_e_tau(&pair).unwrap();
        let c = Cochain::from_series(&big, Domain::Two { bottom_s: 0, bottom_t: 0 }, Target::Cp { bottom: 0 }, 3).unwrap();
        assert!(cobar.d1(&c).unwrap().is_zero());
    }

    #[test]
    fn d0_of_constant_on_unit() {
        let pair = HopfPair::universal(4).unwrap();
        let cobar = Cobar::new(&pair).unwrap();
        // The unit map on the bottom cell: beta_0 -> 1 is a comodule map.
        let g = Cochain {
            domain: Domain::One { bottom: 0 },
            target: Target::Unit,
            max: 0,
            values: [((0, 0), Poly::one())].into_iter().collect(),
        };
        assert!(cobar.d0(&g).unwrap().is_zero());
    }

    #[test]
    fn restriction_matches_closed_form_small() {
        let pair = HopfPair::universal(9).unwrap();
        let k = cocycle_k(&pair).unwrap();
        let table = restrict_primitives(&k, pair.exp_l().unwrap(), 3).unwrap();
        let closed = restrict_k_closed_form(&pair, 3).unwrap();
        assert_eq!(table, closed);
        assert_eq!(table[&(0, 0)], &(-&b(1)) * &(&m(1) - &b(1)));
    }

    #[test]
    fn base_change_is_functorial() {
        let n = 6;
        let pair = HopfPair::universal(n).unwrap();
        let ku = FormalGroupLaw::multiplicative(n).unwrap();
        let ell = FormalGroupLaw::elliptic(n).unwrap();
        let special = HopfPair::from_laws(&ku, &ell).unwrap();
        let map = special.classifying_map().unwrap();
        for kind in [CocycleKind::ETau, CocycleKind::K] {
            let universal = kind.evaluate(&pair).unwrap().map_coeffs(|c| c.replace(&map));
            let direct = base_change(kind, &ku, &ell).unwrap();
            let top = universal.trunc().min(direct.trunc());
            assert_eq!(universal.truncate(top), direct.truncate(top), "{}", kind.name());
        }
        // The right logarithm of the specialised pair is log^Ell.
        let generic = TruncSeries::compose(special.log_l(), &special.b().revert().unwrap()).unwrap();
        assert_eq!(generic, *ell.log());
        // Equal laws give b = x and a vanishing K.
        assert!(base_change(CocycleKind::K, &ku, &ku).unwrap().is_zero());
    }

    #[test]
    fn base_change_of_e_tau_to_ku() {
        let mu = FormalGroupLaw::universal(5).unwrap();
        let ku = FormalGroupLaw::multiplicative(5).unwrap();
        let e = base_change(CocycleKind::ETau, &mu, &ku).unwrap();
        let bp = TruncSeries::compose(ku.exp().unwrap(), mu.log()).unwrap();
        let expect = TruncSeries::monomial(Vars::One, bp.trunc() - 2, -1, 0).sub(&bp.recip().unwrap()).unwrap();
        assert_eq!(e, expect);
        // [S^0] = b'_1 = m1 + u/2 (b' = exp^KU(x + m1 x^2 + ...)).
        let u = Poly::gen(Gen::U);
        assert_eq!(e.coeff(0).unwrap(), &m(1) + &u.scale(&rat(1, 2)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn cobar_squares_to_zero(cs in prop::collection::vec((-5i64..5, 1i64..5), 12), bottom in -1i32..1) {
            let pair = HopfPair::universal(6).unwrap();
            let cobar = Cobar::new(&pair).unwrap();
            let max = 3;
            let mut it = cs.into_iter();
            let mut values = BTreeMap::new();
            for n in 0..=max {
                let mut v = Poly::zero();
                for k in bottom..=n {
                    let (a, d) = it.next().unwrap_or((1, 1));
                    let coeff = if k % 2 == 0 { Poly::constant(rat(a, d)) } else { m(1).scale(&rat(a, d)) };
                    v += &(&coeff * &Poly::gen(Gen::beta(k)));
                }
                values.insert((n, 0), v);
            }
            let g = Cochain { domain: Domain::One { bottom: 0 }, target: Target::Cp { bottom }, max, values };
            let dd = cobar.d1(&cobar.d0(&g).unwrap()).unwrap();
            prop_assert!(dd.is_zero());
        }
    }
}
