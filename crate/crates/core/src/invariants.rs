//! The theta series, the f-invariant and the f''-invariant of the primitives
//! p_s (x) p_t, each by two routes, and the Adams-operation integrality of
//! theta.
//!
//! Ell is the elliptic law in c4, c6 and KU the multiplicative law in u; an
//! element of Ell_* KU (x) Q is a polynomial in both, and its divided
//! congruence is read off by dropping u.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::cobar::{base_change, restrict_primitives, CocycleKind};
use crate::error::{Error, Result};
use crate::fgl::FormalGroupLaw;
use crate::modular::{quotient_reduce, rho1_rational, DividedCongruence, QuotientVerdict};
use crate::poly::{Gen, Poly};
use crate::rational::{factorial, format_rat, is_prime, p_valuation, pow_rat, Rat, Valuation};
use crate::series::{TruncSeries, Vars};

/// Primes with a fixed choice of gamma; anything else falls back to the
/// smallest generator.
pub const DEFAULT_GAMMAS: [(u64, u64); 4] = [(5, 2), (7, 3), (11, 2), (13, 2)];

fn pow_mod(b: u64, mut e: u64, m: u64) -> u64 {
    let (mut r, mut b, m) = (1u128, (b % m) as u128, m as u128);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r as u64
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// gamma generates (Z/p^2)^x, hence topologically generates Z_p^x for odd p.
pub fn is_topological_generator(p: u64, gamma: u64) -> bool {
    if p < 3 || !is_prime(p) || gamma.is_multiple_of(p) {
        return false;
    }
    let m = p * p;
    let order = p * (p - 1);
    prime_factors(order).into_iter().all(|q| pow_mod(gamma, order / q, m) != 1)
}

pub fn default_gamma(p: u64) -> Result<u64> {
    if let Some((_, g)) = DEFAULT_GAMMAS.iter().find(|(q, _)| *q == p) {
        return Ok(*g);
    }
    (2..p * p).find(|g| is_topological_generator(p, *g)).ok_or_else(|| Error::Usage(format!("no generator for {p}")))
}

fn check_gamma(p: u64, gamma: u64) -> Result<()> {
    if !is_prime(p) || p < 5 {
        return Err(Error::Usage(format!("{p} is not a prime >= 5")));
    }
    if !is_topological_generator(p, gamma) {
        return Err(Error::Domain(format!("{gamma} does not generate (Z/{p}^2)^x")));
    }
    Ok(())
}

fn gamma_pow_minus_one(gamma: u64, e: u32) -> Rat {
    pow_rat(&Rat::from_integer(BigInt::from(gamma)), e) - Rat::one()
}

/// The eigen-coefficient (gamma^i - 1)/(gamma^{i+j} - 1).
pub fn gamma_ratio(gamma: u64, i: u32, j: u32) -> Result<Rat> {
    let den = gamma_pow_minus_one(gamma, i + j);
    if den.is_zero() {
        return Err(Error::Domain(format!("gamma^{} = 1", i + j)));
    }
    Ok(gamma_pow_minus_one(gamma, i) / den)
}

/// B_n^{KU} / n!, a rational multiple of u^n.
fn ku_divided(ku: &FormalGroupLaw, n: u32) -> Result<Poly> {
    Ok(ku.bernoulli(n)?.scale(&Rat::new(BigInt::one(), factorial(n))))
}

/// [x^a] log(x)^k for 0 <= k, a <= n.
fn log_powers(log: &TruncSeries, n: i32) -> Result<Vec<Vec<Poly>>> {
    if log.trunc() < n {
        return Err(Error::Precision(format!("logarithm known through x^{}, need x^{n}", log.trunc())));
    }
    let log = log.truncate(n);
    let mut out = Vec::new();
    let mut power = TruncSeries::constant(Vars::One, n, Poly::one());
    for k in 0..=n {
        if k > 0 {
            power = power.mul(&log)?;
        }
        out.push((0..=n).map(|a| power.coeff(a)).collect::<Result<Vec<_>>>()?);
    }
    Ok(out)
}

/// sum_{i,j>0} (B_i/i!)(B_j/j!) (gamma^i-1)/(gamma^{i+j}-1) log(S)^{i-1} log(T)^{j-1}
/// with B the KU Bernoulli numbers, through total degree `n`.
pub fn theta_prime(gamma: u64, log: &TruncSeries, n: i32) -> Result<TruncSeries> {
    let ku = FormalGroupLaw::multiplicative(n as u32 + 1)?;
    let powers = log_powers(log, n)?;
    let coeffs: Vec<Poly> = (0..=n as u32 + 1).map(|i| if i == 0 { Ok(Poly::zero()) } else { ku_divided(&ku, i) }).collect::<Result<_>>()?;
    let mut terms: BTreeMap<(i32, i32), Poly> = BTreeMap::new();
    for i in 1..=n + 1 {
        for j in 1..=n + 2 - i {
            let (bi, bj) = (&coeffs[i as usize], &coeffs[j as usize]);
            if bi.is_zero() || bj.is_zero() {
                continue;
            }
            let c = (bi * bj).scale(&gamma_ratio(gamma, i as u32, j as u32)?);
            let (ps, pt) = (&powers[(i - 1) as usize], &powers[(j - 1) as usize]);
            for a in (i - 1)..=n {
                if ps[a as usize].is_zero() {
                    continue;
                }
                let ca = &c * &ps[a as usize];
                for b in (j - 1)..=(n - a) {
                    if pt[b as usize].is_zero() {
                        continue;
                    }
                    *terms.entry((a, b)).or_default() += &(&ca * &pt[b as usize]);
                }
            }
        }
    }
    TruncSeries::from_terms(Vars::Two, n, terms)
}

#[derive(Debug, Clone)]
pub struct ThetaSeries {
    pub p: u64,
    pub gamma: u64,
    /// (1/S)(1/log T - 1/T) + theta'(S, T) for the multiplicative logarithm.
    pub value: TruncSeries,
}

impl ThetaSeries {
    pub fn to_json(&self) -> Value {
        json!({"p": self.p, "gamma": self.gamma, "value": self.value.to_json()})
    }
}

/// Value on beta_{-1}(S) (x) beta_0(T), through total degree `n`.
pub fn theta_series(p: u64, gamma: u64, n: i32) -> Result<ThetaSeries> {
    check_gamma(p, gamma)?;
    if n < 0 {
        return Err(Error::Usage("precision must be non-negative".into()));
    }
    let ku = FormalGroupLaw::multiplicative(n as u32 + 3)?;
    let inv = ku.log().recip()?;
    let mut terms = Vec::new();
    for k in 0..=n + 1 {
        let c = inv.coeff(k)?;
        terms.push(((-1, k), c));
    }
    let product = TruncSeries::from_terms(Vars::Two, n, terms)?;
    let value = product.add(&theta_prime(gamma, ku.log(), n)?)?;
    Ok(ThetaSeries { p, gamma, value })
}

/// theta restricted to the bottom cell beta_{-1} in the first factor with
/// the theta' part dropped: the series 1/log^{KU} T - 1/T.
pub fn theta_bottom_cell(theta: &ThetaSeries) -> Result<TruncSeries> {
    let n = theta.value.trunc() + 1;
    let coeffs = (0..=n).map(|k| theta.value.coefficient(-1, k)).collect::<Result<Vec<_>>>()?;
    Ok(TruncSeries::from_coeffs(n, coeffs))
}

/// (1/b'(S) - 1/S)(1/log T - 1/b'(T)) + theta'(S, T) with the logarithm of
/// `left` and b' = exp^{KU} o log^{left}.
pub fn mu_theta_sigma(left: &FormalGroupLaw, gamma: u64) -> Result<TruncSeries> {
    let n = left.prec();
    let ku = FormalGroupLaw::multiplicative(n)?;
    let bp = TruncSeries::compose(ku.exp()?, left.log())?;
    let inv_bp = bp.recip()?;
    let first = inv_bp.sub(&TruncSeries::monomial(Vars::One, inv_bp.trunc(), -1, 0))?;
    let second = left.log().recip()?.sub(&inv_bp)?;
    let product = TruncSeries::outer(&first, &second)?;
    let tp = theta_prime(gamma, left.log(), product.trunc())?;
    product.add(&tp)
}

/// Reduced Bernoulli numbers Bbar_1 .. Bbar_max of a law.
pub fn reduced_bernoulli_table(law: &FormalGroupLaw, max: u32) -> Result<Vec<Poly>> {
    let mut out = vec![Poly::zero()];
    for n in 1..=max {
        out.push(law.reduced_bernoulli(n)?);
    }
    Ok(out)
}

/// Bernoulli data for the pair (Ell, KU) up to index `max`.
#[derive(Debug, Clone)]
pub struct BernoulliPair {
    pub ell: Vec<Poly>,
    pub ku: Vec<Poly>,
}

impl BernoulliPair {
    pub fn new(max: u32) -> Result<BernoulliPair> {
        let ell = FormalGroupLaw::elliptic(max)?;
        let ku = FormalGroupLaw::multiplicative(max)?;
        Ok(BernoulliPair { ell: reduced_bernoulli_table(&ell, max)?, ku: reduced_bernoulli_table(&ku, max)? })
    }

    fn check(&self, s: u32, t: u32) -> Result<()> {
        let need = s.max(t) as usize + 1;
        if need >= self.ell.len() {
            return Err(Error::Precision(format!("Bernoulli numbers known to {}, need {need}", self.ell.len() - 1)));
        }
        Ok(())
    }

    /// -Bbar^{Ell}_{t+1} Bbar^{KU}_{s+1}.
    pub fn f_representative(&self, s: u32, t: u32) -> Result<Poly> {
        self.check(s, t)?;
        Ok(-(&self.ell[t as usize + 1] * &self.ku[s as usize + 1]))
    }

    /// Bbar^{Ell}_{s+1} Bbar^{KU}_{t+1}.
    pub fn f_symmetric(&self, s: u32, t: u32) -> Result<Poly> {
        self.check(s, t)?;
        Ok(&self.ell[s as usize + 1] * &self.ku[t as usize + 1])
    }

    /// Bbar^{Ell}_{s+1} Bbar^{KU}_{t+1}
    ///   + Bbar^{KU}_{s+1} Bbar^{KU}_{t+1} gamma^{s+1}(1 - gamma^{t+1})/(gamma^{s+t+2} - 1).
    pub fn fprime(&self, s: u32, t: u32, gamma: u64) -> Result<Poly> {
        self.check(s, t)?;
        Ok(self.f_symmetric(s, t)? + self.fprime_correction(s, t, gamma)?)
    }

    /// The second summand of `fprime`, a constant multiple of u^{s+t+2}.
    pub fn fprime_correction(&self, s: u32, t: u32, gamma: u64) -> Result<Poly> {
        self.check(s, t)?;
        let g = Rat::from_integer(BigInt::from(gamma));
        let den = gamma_pow_minus_one(gamma, s + t + 2);
        if den.is_zero() {
            return Err(Error::Domain(format!("gamma^{} = 1", s + t + 2)));
        }
        let ratio = pow_rat(&g, s + 1) * (Rat::one() - pow_rat(&g, t + 1)) / den;
        Ok((&self.ku[s as usize + 1] * &self.ku[t as usize + 1]).scale(&ratio))
    }
}

fn dc_difference_is_zero(a: &DividedCongruence, b: &DividedCongruence) -> bool {
    a.add(&b.scale(&-Rat::one())).is_zero()
}

/// Splits an element of Ell_* KU (x) Q into (u^e, form) pairs.
fn bott_pairs(element: &Poly) -> Vec<(Poly, Poly)> {
    element.split_by(Gen::U).into_iter().map(|(e, part)| (Poly::gen_pow(Gen::U, e), part)).collect()
}

/// m!n![S^m T^n] of K for the pair (KU, Ell) restricted along exp^{KU},
/// for m, n <= max.
pub fn k_table_ku_ell(prec: u32, max: i32) -> Result<BTreeMap<(i32, i32), Poly>> {
    let ku = FormalGroupLaw::multiplicative(prec)?;
    let ell = FormalGroupLaw::elliptic(prec)?;
    let k = base_change(CocycleKind::K, &ku, &ell)?;
    restrict_primitives(&k, ku.exp()?, max)
}

#[derive(Debug, Clone)]
pub struct FClassReport {
    pub s: u32,
    pub t: u32,
    /// -Bbar^{Ell}_{t+1} Bbar^{KU}_{s+1}.
    pub representative: Poly,
    pub symmetric_representative: Poly,
    /// The cocycle route: K restricted to p_s (x) p_t, collapsed by rho1.
    pub cocycle_value: Poly,
    pub cocycle_class: DividedCongruence,
    /// Cocycle route agrees with the representative once the weight s+t+2
    /// component is dropped.
    pub paths_agree: bool,
    pub reduced: BTreeMap<u64, QuotientVerdict>,
    /// Class of representative minus symmetric representative, per prime.
    pub forms_agree: BTreeMap<u64, bool>,
}

impl FClassReport {
    pub fn weight(&self) -> i32 {
        (self.s + self.t + 2) as i32
    }

    pub fn representative_class(&self) -> Result<DividedCongruence> {
        DividedCongruence::from_bott_periodic(&self.representative)
    }

    pub fn symmetric_class(&self) -> Result<DividedCongruence> {
        DividedCongruence::from_bott_periodic(&self.symmetric_representative)
    }

    pub fn to_json(&self) -> Result<Value> {
        Ok(json!({
            "s": self.s,
            "t": self.t,
            "representative": self.representative.to_json(),
            "representative_class": self.representative_class()?.to_json(),
            "symmetric_representative": self.symmetric_representative.to_json(),
            "symmetric_class": self.symmetric_class()?.to_json(),
            "cocycle_path": {
                "value": self.cocycle_value.to_json(),
                "class": self.cocycle_class.to_json(),
                "agrees": self.paths_agree,
            },
            "reduced": self.reduced.iter().map(|(p, v)| (p.to_string(), v.to_json())).collect::<serde_json::Map<_, _>>(),
            "forms_agree": self.forms_agree.iter().map(|(p, v)| (p.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
        }))
    }
}

/// Assembles the report for (s, t) from a precomputed restriction of K.
pub fn f_report(
    bern: &BernoulliPair,
    k_table: &BTreeMap<(i32, i32), Poly>,
    s: u32,
    t: u32,
    primes: &[u64],
    qprec: i64,
) -> Result<FClassReport> {
    let representative = bern.f_representative(s, t)?;
    let symmetric_representative = bern.f_symmetric(s, t)?;
    let cocycle_value = k_table
        .get(&(s as i32, t as i32))
        .cloned()
        .ok_or_else(|| Error::Precision(format!("restriction of K not tabulated at ({s},{t})")))?;
    let weight = (s + t + 2) as i32;
    let cocycle_class = rho1_rational(&bott_pairs(&cocycle_value))?.without_weight(weight);
    let rep_class = DividedCongruence::from_bott_periodic(&representative)?;
    let sym_class = DividedCongruence::from_bott_periodic(&symmetric_representative)?;
    let paths_agree = dc_difference_is_zero(&cocycle_class, &rep_class);
    let mut reduced = BTreeMap::new();
    let mut forms_agree = BTreeMap::new();
    let difference = rep_class.add(&sym_class.scale(&-Rat::one()));
    for &p in primes {
        reduced.insert(p, quotient_reduce(&rep_class, weight, p, None, qprec)?);
        forms_agree.insert(p, quotient_reduce(&difference, weight, p, None, qprec)?.trivial);
    }
    Ok(FClassReport {
        s,
        t,
        representative,
        symmetric_representative,
        cocycle_value,
        cocycle_class,
        paths_agree,
        reduced,
        forms_agree,
    })
}

/// Law precision needed to restrict K and the f'' series at (s, t).
pub fn required_prec(s: u32, t: u32) -> u32 {
    2 * s.max(t) + 2
}

pub fn f_invariant(s: u32, t: u32, prec: u32, qprec: i64, primes: &[u64]) -> Result<FClassReport> {
    let need = required_prec(s, t);
    if prec < need {
        return Err(Error::Precision(format!("precision {prec} below {need} needed at ({s},{t})")));
    }
    let bern = BernoulliPair::new(prec)?;
    let table = k_table_ku_ell(prec, s.max(t) as i32)?;
    f_report(&bern, &table, s, t, primes, qprec)
}

/// f(s, t) + f(t, s) in the quotient of weight s + t + 2.
pub fn antisymmetry_verdict(a: &FClassReport, b: &FClassReport, p: u64, qprec: i64) -> Result<QuotientVerdict> {
    if (a.s, a.t) != (b.t, b.s) {
        return Err(Error::Usage("antisymmetry compares (s,t) with (t,s)".into()));
    }
    let sum = a.representative_class()?.add(&b.representative_class()?);
    quotient_reduce(&sum, a.weight(), p, None, qprec)
}

#[derive(Debug, Clone)]
pub struct FPrimeReport {
    pub s: u32,
    pub t: u32,
    pub p: u64,
    pub gamma: u64,
    pub closed_form: Poly,
    pub substitution: Poly,
}

impl FPrimeReport {
    pub fn agree(&self) -> bool {
        (&self.closed_form - &self.substitution).is_zero()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "s": self.s,
            "t": self.t,
            "p": self.p,
            "gamma": self.gamma,
            "closed_form": self.closed_form.to_json(),
            "substitution": self.substitution.to_json(),
            "agree": self.agree(),
        })
    }
}

pub fn fprime_invariant(s: u32, t: u32, p: u64, gamma: u64, prec: u32) -> Result<Poly> {
    check_gamma(p, gamma)?;
    BernoulliPair::new(prec.max(s.max(t) + 1))?.fprime(s, t, gamma)
}

/// m!n![S^m T^n] of mu_theta_sigma(Ell) after S -> exp^{Ell} S and
/// T -> exp^{Ell} T, for m, n <= max.
pub fn fprime_substitution_table(p: u64, gamma: u64, prec: u32, max: i32) -> Result<BTreeMap<(i32, i32), Poly>> {
    check_gamma(p, gamma)?;
    let ell = FormalGroupLaw::elliptic(prec)?;
    let series = mu_theta_sigma(&ell, gamma)?;
    restrict_primitives(&series, ell.exp()?, max)
}

pub fn fprime_via_substitution(s: u32, t: u32, p: u64, gamma: u64, prec: u32) -> Result<Poly> {
    let table = fprime_substitution_table(p, gamma, prec, s.max(t) as i32)?;
    Ok(table[&(s as i32, t as i32)].clone())
}

/// Both routes to f'' on the grid s, t <= max.
pub fn fprime_grid(p: u64, gamma: u64, prec: u32, max: u32) -> Result<Vec<FPrimeReport>> {
    let table = fprime_substitution_table(p, gamma, prec, max as i32)?;
    let bern = BernoulliPair::new(prec.max(max + 1))?;
    let mut out = Vec::new();
    for s in 0..=max {
        for t in 0..=max {
            out.push(FPrimeReport {
                s,
                t,
                p,
                gamma,
                closed_form: bern.fprime(s, t, gamma)?,
                substitution: table[&(s as i32, t as i32)].clone(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct RelateVerdict {
    pub s: u32,
    pub t: u32,
    pub p: u64,
    pub gamma: u64,
    /// f'' minus the symmetric f representative.
    pub difference: Poly,
    pub difference_constant: bool,
    pub trivial: bool,
    /// f'' minus the unsymmetrised representative, in the same quotient.
    pub other_ordering_trivial: bool,
}

impl RelateVerdict {
    pub fn holds(&self) -> bool {
        self.difference_constant && self.trivial
    }

    pub fn to_json(&self) -> Value {
        json!({
            "s": self.s,
            "t": self.t,
            "p": self.p,
            "gamma": self.gamma,
            "difference": self.difference.to_json(),
            "difference_constant": self.difference_constant,
            "trivial": self.trivial,
            "other_ordering_trivial": self.other_ordering_trivial,
        })
    }
}

pub fn relate_check_with(bern: &BernoulliPair, s: u32, t: u32, p: u64, gamma: u64, qprec: i64) -> Result<RelateVerdict> {
    check_gamma(p, gamma)?;
    let weight = (s + t + 2) as i32;
    let fp = bern.fprime(s, t, gamma)?;
    let difference = &fp - &bern.f_symmetric(s, t)?;
    let dc = DividedCongruence::from_bott_periodic(&difference)?;
    let difference_constant = dc.realize(qprec)?.is_constant();
    let trivial = quotient_reduce(&dc, weight, p, None, qprec)?.trivial;
    let other = DividedCongruence::from_bott_periodic(&(&fp - &bern.f_representative(s, t)?))?;
    let other_ordering_trivial = quotient_reduce(&other, weight, p, None, qprec)?.trivial;
    Ok(RelateVerdict { s, t, p, gamma, difference, difference_constant, trivial, other_ordering_trivial })
}

pub fn relate_check(s: u32, t: u32, p: u64, gamma: u64, qprec: i64) -> Result<RelateVerdict> {
    let bern = BernoulliPair::new(s.max(t) + 1)?;
    relate_check_with(&bern, s, t, p, gamma, qprec)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralityEntry {
    pub i: i32,
    pub j: i32,
    pub value: Rat,
    pub valuation: Valuation,
}

impl IntegralityEntry {
    pub fn pass(&self) -> bool {
        self.valuation.is_nonnegative()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "i": self.i,
            "j": self.j,
            "value": format_rat(&self.value),
            "valuation": self.valuation.to_string(),
            "pass": self.pass(),
        })
    }
}

/// psi^gamma - 1 on an element of KU_* (x) Q: u^n c -> (gamma^n - 1) u^n c.
/// Returns the result with u set to 1.
pub fn adams_minus_one(c: &Poly, gamma: u64) -> Result<Rat> {
    let mut total = Rat::zero();
    for (m, r) in c.terms() {
        let (rest, e) = m.without(Gen::U);
        if !rest.is_one() {
            return Err(Error::Usage(format!("{c} is not a polynomial in u")));
        }
        total += r * gamma_pow_minus_one(gamma, e);
    }
    Ok(total)
}

/// (psi^gamma - 1) theta on beta_i (x) beta_j for i >= -1, j >= 0 and
/// i + j <= max.
pub fn theta_integrality(p: u64, gamma: u64, max: i32) -> Result<Vec<IntegralityEntry>> {
    let theta = theta_series(p, gamma, max)?;
    let mut out = Vec::new();
    for total in -1..=max {
        for i in -1..=total {
            let j = total - i;
            let value = adams_minus_one(&theta.value.coefficient(i, j)?, gamma)?;
            let valuation = p_valuation(&value, p)?;
            out.push(IntegralityEntry { i, j, value, valuation });
        }
    }
    Ok(out)
}

/// v_p((gamma^n - 1) Bbar_n^{KU} / u^n) for 1 <= n <= max.
pub fn kummer_check(p: u64, gamma: u64, max: u32) -> Result<Vec<IntegralityEntry>> {
    check_gamma(p, gamma)?;
    let ku = FormalGroupLaw::multiplicative(max)?;
    let mut out = Vec::new();
    for n in 1..=max {
        let b = ku.reduced_bernoulli(n)?;
        let value = adams_minus_one(&b, gamma)?;
        let valuation = p_valuation(&value, p)?;
        out.push(IntegralityEntry { i: n as i32, j: 0, value, valuation });
    }
    Ok(out)
}

/// Identity between mu_theta_sigma and minus K for (left, KU) plus theta'
/// in the logarithm of `left`. Returns the discrepancy (zero when it holds).
pub fn relate_mu_theta(left: &FormalGroupLaw, gamma: u64) -> Result<TruncSeries> {
    let ku = FormalGroupLaw::multiplicative(left.prec())?;
    let mts = mu_theta_sigma(left, gamma)?;
    let k = base_change(CocycleKind::K, left, &ku)?;
    let n = mts.trunc().min(k.trunc());
    let tp = theta_prime(gamma, left.log(), n)?;
    mts.truncate(n).add(&k.truncate(n))?.sub(&tp)
}
