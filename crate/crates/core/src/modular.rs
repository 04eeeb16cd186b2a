//! Level one modular forms through their q-expansions: Eisenstein series,
//! the discriminant, constant terms, divided congruences and reduction
//! modulo rational forms of weight 0 and k plus p-integral sums.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::poly::{Gen, Homogeneity, Mono, Poly};
use crate::rational::{format_rat, int, is_prime, valuation_unchecked, Rat, Valuation};

/// Laurent series in q with every coefficient of exponent `< prec` known.
#[derive(Debug, Clone, PartialEq)]
pub struct QSeries {
    coeffs: BTreeMap<i64, Rat>,
    prec: i64,
}

impl QSeries {
    pub fn zero(prec: i64) -> QSeries {
        QSeries { coeffs: BTreeMap::new(), prec }
    }

    pub fn from_dense(start: i64, coeffs: &[Rat], prec: i64) -> QSeries {
        let mut s = QSeries::zero(prec);
        for (k, c) in coeffs.iter().enumerate() {
            s.add_at(start + k as i64, c);
        }
        s
    }

    fn add_at(&mut self, e: i64, c: &Rat) {
        if e >= self.prec || c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry(e).or_insert_with(Rat::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&e);
        }
    }

    pub fn prec(&self) -> i64 {
        self.prec
    }

    pub fn coeff(&self, e: i64) -> Result<Rat> {
        if e >= self.prec {
            return Err(Error::Precision(format!("q^{e} beyond q-precision {}", self.prec)));
        }
        Ok(self.coeffs.get(&e).cloned().unwrap_or_else(Rat::zero))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &Rat)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_exponent(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    /// Every known coefficient except the constant one vanishes.
    pub fn is_constant(&self) -> bool {
        self.coeffs.keys().all(|e| *e == 0)
    }

    pub fn add(&self, other: &QSeries) -> QSeries {
        let mut out = QSeries { coeffs: BTreeMap::new(), prec: self.prec.min(other.prec) };
        for (e, c) in self.coeffs.iter().chain(other.coeffs.iter()) {
            out.add_at(*e, c);
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> QSeries {
        let mut out = QSeries::zero(self.prec);
        for (e, v) in &self.coeffs {
            out.add_at(*e, &(v * c));
        }
        out
    }

    pub fn mul(&self, other: &QSeries) -> QSeries {
        let va = self.min_exponent().unwrap_or(0).min(0);
        let vb = other.min_exponent().unwrap_or(0).min(0);
        let prec = (self.prec + vb).min(other.prec + va);
        let mut out = QSeries::zero(prec);
        for (ea, ca) in &self.coeffs {
            for (eb, cb) in &other.coeffs {
                if ea + eb < prec {
                    out.add_at(ea + eb, &(ca * cb));
                }
            }
        }
        out
    }

    pub fn truncate(&self, prec: i64) -> QSeries {
        let prec = prec.min(self.prec);
        QSeries { coeffs: self.coeffs.iter().filter(|(e, _)| **e < prec).map(|(e, c)| (*e, c.clone())).collect(), prec }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "precision": self.prec,
            "terms": self.coeffs.iter().map(|(e, c)| json!({"q_exp": e, "coeff": format_rat(c)})).collect::<Vec<_>>(),
        })
    }
}

/// A q-expansion together with the weight it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct QExpansion {
    pub weight: i32,
    pub series: QSeries,
}

impl QExpansion {
    pub fn to_json(&self) -> Value {
        let mut v = self.series.to_json();
        v["weight"] = json!(self.weight);
        v
    }
}

fn divisor_power_sum(n: u64, k: u32) -> BigInt {
    let mut s = BigInt::zero();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            s += BigInt::from(d).pow(k);
            let e = n / d;
            if e != d {
                s += BigInt::from(e).pow(k);
            }
        }
        d += 1;
    }
    s
}

fn eisenstein_cache() -> &'static Mutex<HashMap<(u32, i64), QSeries>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, i64), QSeries>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// E4 = 1 + 240 sum sigma_3(n) q^n and E6 = 1 - 504 sum sigma_5(n) q^n.
pub fn eisenstein(k: u32, qprec: i64) -> Result<QExpansion> {
    let (scale, power) = match k {
        4 => (240i64, 3u32),
        6 => (-504, 5),
        _ => return Err(Error::Usage(format!("Eisenstein series of weight {k} not provided (use 4 or 6)"))),
    };
    if qprec < 1 {
        return Err(Error::Precision("q-precision must be at least 1".into()));
    }
    if let Some(s) = eisenstein_cache().lock().unwrap().get(&(k, qprec)) {
        return Ok(QExpansion { weight: k as i32, series: s.clone() });
    }
    let mut s = QSeries::zero(qprec);
    s.add_at(0, &Rat::one());
    for n in 1..qprec {
        s.add_at(n, &Rat::from_integer(divisor_power_sum(n as u64, power) * scale));
    }
    eisenstein_cache().lock().unwrap().insert((k, qprec), s.clone());
    Ok(QExpansion { weight: k as i32, series: s })
}

/// q-expansion of the discriminant (c4^3 - c6^2)/1728.
pub fn discriminant(qprec: i64) -> Result<QSeries> {
    let e4 = eisenstein(4, qprec)?.series;
    let e6 = eisenstein(6, qprec)?.series;
    let cube = e4.mul(&e4).mul(&e4);
    let square = e6.mul(&e6);
    Ok(cube.add(&square.scale(&int(-1))).scale(&Rat::new(1.into(), 1728.into())))
}

fn inverse_power_series(a: &[Rat], n: usize) -> Vec<Rat> {
    let inv0 = a[0].recip();
    let mut out = vec![inv0.clone()];
    for k in 1..n {
        let mut acc = Rat::zero();
        for i in 1..=k.min(a.len() - 1) {
            acc += &a[i] * &out[k - i];
        }
        out.push(-acc * &inv0);
    }
    out
}

/// q-expansion of 1/Delta = q^{-1} (Delta/q)^{-1}.
pub fn discriminant_inverse(qprec: i64) -> Result<QSeries> {
    static CACHE: OnceLock<Mutex<HashMap<i64, QSeries>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(s) = cache.lock().unwrap().get(&qprec) {
        return Ok(s.clone());
    }
    let s = discriminant_inverse_uncached(qprec)?;
    cache.lock().unwrap().insert(qprec, s.clone());
    Ok(s)
}

fn discriminant_inverse_uncached(qprec: i64) -> Result<QSeries> {
    let work = qprec + 2;
    let d = discriminant(work)?;
    let dense: Vec<Rat> = (1..work).map(|e| d.coeff(e).unwrap()).collect();
    let inv = inverse_power_series(&dense, dense.len());
    Ok(QSeries::from_dense(-1, &inv, qprec))
}

fn ensure_modular(form: &Poly) -> Result<()> {
    for g in form.generators() {
        if ![Gen::C4, Gen::C6, Gen::DELTA_INV].contains(&g) {
            return Err(Error::Usage(format!("generator {g} is not a modular generator")));
        }
    }
    Ok(())
}

/// Weight of a form in c4, c6, Dinv (half its degree).
pub fn weight_of(form: &Poly) -> Result<Option<i32>> {
    ensure_modular(form)?;
    match form.homogeneity() {
        Homogeneity::Zero => Ok(None),
        Homogeneity::Degree(d) => Ok(Some((d / 2) as i32)),
        Homogeneity::Inhomogeneous => Err(Error::Usage(format!("form {form} is not of a single weight"))),
    }
}

/// Substitutes c4 -> E4, c6 -> -E6, Dinv -> 1/Delta: the invariants of the
/// Tate curve for the model y^2 = x^3 - (c4/48) x - c6/864. The result knows
/// every coefficient below `qprec`.
pub fn qexpand(form: &Poly, weight: i32, qprec: i64) -> Result<QExpansion> {
    type Cache = Mutex<HashMap<(String, i32, i64), QExpansion>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (form.to_string(), weight, qprec);
    if let Some(e) = cache.lock().unwrap().get(&key) {
        return Ok(e.clone());
    }
    let e = qexpand_uncached(form, weight, qprec)?;
    cache.lock().unwrap().insert(key, e.clone());
    Ok(e)
}

fn qexpand_uncached(form: &Poly, weight: i32, qprec: i64) -> Result<QExpansion> {
    if qprec < 1 {
        return Err(Error::Precision("q-precision must be at least 1".into()));
    }
    if let Some(w) = weight_of(form)? {
        if w != weight {
            return Err(Error::Usage(format!("form {form} has weight {w}, not {weight}")));
        }
    }
    let max_pole = form.terms().map(|(m, _)| m.exponent(Gen::DELTA_INV) as i64).max().unwrap_or(0);
    let work = qprec + max_pole + 2;
    let e4 = eisenstein(4, work)?.series;
    let e6 = eisenstein(6, work)?.series.scale(&int(-1));
    let dinv = discriminant_inverse(work)?;
    let mut powers: HashMap<(Gen, u32), QSeries> = HashMap::new();
    let mut power = |g: Gen, e: u32| -> QSeries {
        if let Some(s) = powers.get(&(g, e)) {
            return s.clone();
        }
        let base = match g {
            g if g == Gen::C4 => &e4,
            g if g == Gen::C6 => &e6,
            _ => &dinv,
        };
        let mut acc = QSeries::from_dense(0, &[Rat::one()], work);
        for _ in 0..e {
            acc = acc.mul(base);
        }
        powers.insert((g, e), acc.clone());
        acc
    };
    let mut total = QSeries::zero(work);
    for (m, c) in form.terms() {
        let mut acc = QSeries::from_dense(0, std::slice::from_ref(c), work);
        for &(g, e) in m.exponents() {
            acc = acc.mul(&power(g, e));
        }
        total = total.add(&acc);
    }
    if total.prec < qprec {
        return Err(Error::Precision(format!("could only reach q-precision {}", total.prec)));
    }
    Ok(QExpansion { weight, series: total.truncate(qprec) })
}

/// Constant term, placed in degree `2 * weight` through the Bott class.
pub fn q0(e: &QExpansion) -> Result<Poly> {
    let c = e.series.coeff(0)?;
    if c.is_zero() {
        return Ok(Poly::zero());
    }
    if e.weight < 0 {
        return Err(Error::Unsupported(format!("constant term in negative weight {}", e.weight)));
    }
    Ok(Poly::term(c, Mono::gen(Gen::U, e.weight as u32)))
}

/// A finite sum of meromorphic level one forms of distinct weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DividedCongruence {
    components: BTreeMap<i32, Poly>,
}

impl DividedCongruence {
    pub fn empty() -> DividedCongruence {
        DividedCongruence { components: BTreeMap::new() }
    }

    pub fn new(components: Vec<(i32, Poly)>) -> Result<DividedCongruence> {
        let mut out = BTreeMap::new();
        for (w, f) in components {
            if let Some(actual) = weight_of(&f)? {
                if actual != w {
                    return Err(Error::Usage(format!("component {f} declared weight {w} but has weight {actual}")));
                }
            }
            if out.insert(w, f).is_some() {
                return Err(Error::Usage(format!("weight {w} appears twice")));
            }
        }
        out.retain(|_, f: &mut Poly| !f.is_zero());
        Ok(DividedCongruence { components: out })
    }

    /// Adds a form into the component of its weight.
    pub fn accumulate(&mut self, weight: i32, form: &Poly) {
        let slot = self.components.entry(weight).or_default();
        *slot += form;
        if slot.is_zero() {
            self.components.remove(&weight);
        }
    }

    pub fn add(&self, other: &DividedCongruence) -> DividedCongruence {
        let mut out = self.clone();
        for (w, f) in &other.components {
            out.accumulate(*w, f);
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> DividedCongruence {
        let mut out = DividedCongruence::empty();
        for (w, f) in &self.components {
            out.accumulate(*w, &f.scale(c));
        }
        out
    }

    pub fn components(&self) -> impl Iterator<Item = (&i32, &Poly)> {
        self.components.iter()
    }

    pub fn component(&self, weight: i32) -> Poly {
        self.components.get(&weight).cloned().unwrap_or_default()
    }

    pub fn without_weight(&self, weight: i32) -> DividedCongruence {
        let mut out = self.clone();
        out.components.remove(&weight);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }

    /// Sum of the q-expansions of all components.
    pub fn realize(&self, qprec: i64) -> Result<QSeries> {
        let mut total = QSeries::zero(qprec);
        for (w, f) in &self.components {
            total = total.add(&qexpand(f, *w, qprec)?.series);
        }
        Ok(total)
    }

    /// Reads an element of a ring in `u` (one side) and c4, c6, Dinv (other
    /// side): the power of `u` is dropped and terms are grouped by modular
    /// weight.
    pub fn from_bott_periodic(element: &Poly) -> Result<DividedCongruence> {
        let mut out = DividedCongruence::empty();
        for (_, part) in element.split_by(Gen::U) {
            if let Some(w) = weight_of(&part)? { out.accumulate(w, &part) }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "components": self.components.iter().map(|(w, f)| json!({"weight": w, "form": f.to_json()})).collect::<Vec<_>>(),
        })
    }

    /// Parses `{components: [{weight, form}], qprec}`; returns the optional
    /// q-precision alongside.
    pub fn from_json(v: &Value) -> Result<(DividedCongruence, Option<i64>)> {
        let bad = |what: &str| Error::Usage(format!("malformed divided congruence: {what}"));
        let comps = v.get("components").and_then(Value::as_array).ok_or_else(|| bad("components"))?;
        let mut parsed = Vec::new();
        for c in comps {
            let w = c.get("weight").and_then(Value::as_i64).ok_or_else(|| bad("weight"))?;
            let f = Poly::from_json(c.get("form").ok_or_else(|| bad("form"))?)?;
            parsed.push((w as i32, f));
        }
        let qprec = v.get("qprec").and_then(Value::as_i64);
        Ok((DividedCongruence::new(parsed)?, qprec))
    }
}

fn require_prime_at_least_five(p: u64) -> Result<()> {
    if !is_prime(p) || p < 5 {
        return Err(Error::Usage(format!("{p} is not a prime >= 5")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralityVerdict {
    pub integral: bool,
    /// First q-exponent (with its coefficient) whose p-valuation is negative.
    pub first_violation: Option<(i64, Rat)>,
}

pub fn dc_integral(dc: &DividedCongruence, p: u64, qprec: i64) -> Result<IntegralityVerdict> {
    require_prime_at_least_five(p)?;
    let total = dc.realize(qprec)?;
    Ok(series_integrality(&total, p))
}

pub fn series_integrality(s: &QSeries, p: u64) -> IntegralityVerdict {
    for (e, c) in s.terms() {
        if !valuation_unchecked(c, p).is_nonnegative() {
            return IntegralityVerdict { integral: false, first_violation: Some((*e, c.clone())) };
        }
    }
    IntegralityVerdict { integral: true, first_violation: None }
}

/// Default bound on the pole order at the cusp for weight `k`.
pub fn default_pole_bound(k: i32) -> i64 {
    (k.max(0) as i64 + 11) / 12 + 1
}

/// Smallest q-precision accepted by `quotient_reduce`.
pub fn required_qprec(k: i32, pole_bound: i64) -> i64 {
    pole_bound + (k.max(0) as i64 + 11) / 12 + 2
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuotientVerdict {
    pub trivial: bool,
    pub prime: u64,
    pub pole_bound: i64,
    pub qprec: i64,
    pub basis_size: usize,
    /// Normal form of the class: zero exactly when the class is trivial.
    pub remainder: QSeries,
}

impl QuotientVerdict {
    pub fn to_json(&self) -> Value {
        json!({
            "trivial": self.trivial,
            "prime": self.prime,
            "pole_bound": self.pole_bound,
            "qprec": self.qprec,
            "basis_size": self.basis_size,
            "remainder": self.remainder.to_json(),
        })
    }
}

/// Monomials c4^a c6^b of weight `w` (empty for odd or negative weight).
pub fn holomorphic_basis(w: i64) -> Vec<Poly> {
    let mut out = Vec::new();
    if w < 0 || w % 2 != 0 {
        return out;
    }
    let mut b = 0;
    while 6 * b <= w {
        let rest = w - 6 * b;
        if rest % 4 == 0 {
            let a = rest / 4;
            out.push(Poly::term(Rat::one(), Mono::from_pairs(vec![(Gen::C4, a as u32), (Gen::C6, b as u32)])));
        }
        b += 1;
    }
    out
}

/// Spanning set of rational meromorphic forms of weight 0 and weight `k`
/// with pole order at most `m` at the cusp.
pub fn indeterminacy_basis(k: i32, m: i64) -> Vec<(i32, Poly)> {
    let mut out = Vec::new();
    for a in 0..=m {
        out.push((0, Poly::term(Rat::one(), Mono::from_pairs(vec![(Gen::C4, 3 * a as u32), (Gen::DELTA_INV, a as u32)]))));
    }
    if k != 0 {
        let dinv_m = Poly::gen_pow(Gen::DELTA_INV, m as u32);
        for f in holomorphic_basis(k as i64 + 12 * m) {
            out.push((k, &f * &dinv_m));
        }
    }
    out
}

/// Class of `dc` in D_Q / (D_{Z(p)} + (mf_0)_Q + (mf_k)_Q), with the
/// meromorphic forms limited to pole order `pole_bound`.
pub fn quotient_reduce(
    dc: &DividedCongruence,
    k: i32,
    p: u64,
    pole_bound: Option<i64>,
    qprec: i64,
) -> Result<QuotientVerdict> {
    require_prime_at_least_five(p)?;
    let m = pole_bound.unwrap_or_else(|| default_pole_bound(k));
    let need = required_qprec(k, m);
    if qprec < need {
        return Err(Error::Precision(format!("q-precision {qprec} below {need} needed for weight {k} and pole bound {m}")));
    }
    let x = dc.realize(qprec)?;
    let basis_len = indeterminacy_basis(k, m).len();
    let lo = x.min_exponent().unwrap_or(0).min(-m);
    let reducer = cached_reducer(k, m, p, qprec, lo)?;
    let dense: Vec<Rat> = (0..reducer.width()).map(|i| x.coeff(lo + i as i64).unwrap()).collect();
    let (reduced, member) = reducer.reduce(dense);
    Ok(QuotientVerdict {
        trivial: member,
        prime: p,
        pole_bound: m,
        qprec,
        basis_size: basis_len,
        remainder: QSeries::from_dense(lo, &reduced, qprec),
    })
}

type ReducerKey = (i32, i64, u64, i64, i64);

/// Reducer for the indeterminacy of weight `k` and pole bound `m`, on the
/// window of exponents lo..qprec. Shared across calls.
fn cached_reducer(k: i32, m: i64, p: u64, qprec: i64, lo: i64) -> Result<std::sync::Arc<LatticeReducer>> {
    static CACHE: OnceLock<Mutex<HashMap<ReducerKey, std::sync::Arc<LatticeReducer>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (k, m, p, qprec, lo);
    if let Some(r) = cache.lock().unwrap().get(&key) {
        return Ok(r.clone());
    }
    let width = (qprec - lo) as usize;
    let mut rows = Vec::new();
    for (w, f) in indeterminacy_basis(k, m) {
        let s = qexpand(&f, w, qprec)?.series;
        if s.min_exponent().is_some_and(|e| e < lo) {
            return Err(Error::Domain("basis form has a pole beyond the window".into()));
        }
        rows.push((0..width).map(|i| s.coeff(lo + i as i64).unwrap()).collect::<Vec<_>>());
    }
    let r = std::sync::Arc::new(LatticeReducer::new(&rows, p));
    cache.lock().unwrap().insert(key, r.clone());
    Ok(r)
}

/// Reduces `target` modulo the rational span of `rows` and the lattice of
/// p-integral vectors. Returns the normal form and whether it vanished.
pub fn reduce_modulo_span_and_lattice(rows: &[Vec<Rat>], target: Vec<Rat>, p: u64) -> (Vec<Rat>, bool) {
    LatticeReducer::new(rows, p).reduce(target)
}

/// Echelon form of a rational span together with a Z_(p)-Hermite form of
/// the image of the standard lattice modulo that span.
#[derive(Debug, Clone)]
pub struct LatticeReducer {
    p: u64,
    width: usize,
    echelon: Vec<(usize, Vec<Rat>)>,
    hermite: Vec<(usize, Vec<Rat>)>,
}

impl LatticeReducer {
    pub fn new(rows: &[Vec<Rat>], p: u64) -> LatticeReducer {
        let width = rows.first().map_or(0, Vec::len);
        let mut echelon: Vec<(usize, Vec<Rat>)> = Vec::new();
        for row in rows {
            let mut r = row.clone();
            for (piv, e) in &echelon {
                if !r[*piv].is_zero() {
                    let f = r[*piv].clone();
                    for i in 0..width {
                        r[i] -= &f * &e[i];
                    }
                }
            }
            if let Some(piv) = r.iter().position(|c| !c.is_zero()) {
                let lead = r[piv].clone();
                for c in r.iter_mut() {
                    *c /= &lead;
                }
                for (_, e) in echelon.iter_mut() {
                    if !e[piv].is_zero() {
                        let f = e[piv].clone();
                        for i in 0..width {
                            e[i] -= &f * &r[i];
                        }
                    }
                }
                echelon.push((piv, r));
            }
        }
        let mut out = LatticeReducer { p, width, echelon, hermite: Vec::new() };
        let pivots: Vec<usize> = out.echelon.iter().map(|(p, _)| *p).collect();
        // Images of the standard lattice in the quotient by the span.
        let mut generators: Vec<Vec<Rat>> = Vec::new();
        for i in 0..width {
            let mut unit = vec![Rat::zero(); width];
            unit[i] = Rat::one();
            let img = out.project(unit);
            if img.iter().any(|c| !c.is_zero()) {
                generators.push(img);
            }
        }
        out.hermite = dvr_hermite(generators, p, &pivots);
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    fn project(&self, mut v: Vec<Rat>) -> Vec<Rat> {
        for (piv, e) in &self.echelon {
            if !v[*piv].is_zero() {
                let f = v[*piv].clone();
                for i in 0..self.width {
                    v[i] -= &f * &e[i];
                }
            }
        }
        v
    }

    pub fn reduce(&self, target: Vec<Rat>) -> (Vec<Rat>, bool) {
        let p = self.p;
        let mut t = self.project(target);
        for (col, g) in &self.hermite {
            if t[*col].is_zero() {
                continue;
            }
            let vg = valuation_unchecked(&g[*col], p);
            let vt = valuation_unchecked(&t[*col], p);
            let keep = if vt >= vg { Rat::zero() } else { fractional_representative(&t[*col], vg, p) };
            let f = (&t[*col] - &keep) / &g[*col];
            for i in 0..self.width {
                t[i] -= &f * &g[i];
            }
        }
        let member = t.iter().all(|c| c.is_zero());
        (t, member)
    }
}

/// Hermite form over Z_(p): column by column, the generator of least
/// valuation becomes the pivot and clears that column elsewhere.
fn dvr_hermite(mut gens: Vec<Vec<Rat>>, p: u64, skip: &[usize]) -> Vec<(usize, Vec<Rat>)> {
    let width = gens.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for col in 0..width {
        if skip.contains(&col) {
            continue;
        }
        let best = gens
            .iter()
            .enumerate()
            .filter(|(_, g)| !g[col].is_zero())
            .min_by_key(|(k, g)| (valuation_unchecked(&g[col], p), *k))
            .map(|(k, _)| k);
        let Some(best) = best else { continue };
        let pivot = gens.swap_remove(best);
        for g in gens.iter_mut() {
            if !g[col].is_zero() {
                let f = &g[col] / &pivot[col];
                for i in 0..width {
                    g[i] -= &f * &pivot[i];
                }
            }
        }
        gens.retain(|g| g.iter().any(|c| !c.is_zero()));
        out.push((col, pivot));
    }
    out
}

/// Canonical representative of `x` modulo p^v Z_(p) when v_p(x) < v.
fn fractional_representative(x: &Rat, v: Valuation, p: u64) -> Rat {
    let Valuation::Finite(v) = v else { return x.clone() };
    let Valuation::Finite(w) = valuation_unchecked(x, p) else { return Rat::zero() };
    // x = p^w * a/b with a, b prime to p; keep p^w * (a b^{-1} mod p^{v-w}).
    let pw = Rat::from_integer(BigInt::from(p)).pow(w as i32);
    let unit = x / &pw;
    let modulus = BigInt::from(p).pow((v - w) as u32);
    let a = unit.numer().mod_floor(&modulus);
    let b = unit.denom().mod_floor(&modulus);
    let binv = mod_inverse(&b, &modulus);
    let r = (a * binv).mod_floor(&modulus);
    pw * Rat::from_integer(r)
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    e.x.mod_floor(m)
}

/// Applies the constant term map to the left factor of each pair and keeps
/// the right factor, giving a divided congruence graded by the right weight.
pub fn rho1_rational(elem: &[(Poly, Poly)]) -> Result<DividedCongruence> {
    let mut out = DividedCongruence::empty();
    for (left, right) in elem {
        let collapsed = collapse_left(left)?;
        if collapsed.is_zero() {
            continue;
        }
        for (_, part) in right.split_by(Gen::U) {
            if let Some(w) = weight_of(&part)? {
                out.accumulate(w, &part.scale(&collapsed));
            }
        }
    }
    Ok(out)
}

/// Rational number obtained from a left factor: the constant term of its
/// q-expansion with the Bott class set to 1.
fn collapse_left(left: &Poly) -> Result<Rat> {
    let mut total = Rat::zero();
    for (e, part) in left.split_by(Gen::U) {
        let _ = e;
        if part.is_zero() {
            continue;
        }
        match weight_of(&part)? {
            None => {}
            Some(w) => {
                let exp = qexpand(&part, w, 1)?;
                total += exp.series.coeff(0)?;
            }
        }
    }
    Ok(total)
}

/// p-adic valuation of every coefficient is at least zero.
pub fn is_p_integral(s: &QSeries, p: u64) -> bool {
    s.terms().all(|(_, c)| valuation_unchecked(c, p).is_nonnegative())
}

/// Largest denominator magnitude, for reporting.
pub fn max_abs_denominator(s: &QSeries) -> BigInt {
    s.terms().map(|(_, c)| c.denom().abs()).max().unwrap_or_else(BigInt::one)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use proptest::prelude::*;

    /// Divisor sums by brute force.
    fn sigma(n: i64, k: u32) -> i64 {
        (1..=n).filter(|d| n % d == 0).map(|d| d.pow(k)).sum()
    }

    #[test]
    fn eisenstein_coefficients() {
        assert_eq!(sigma(2, 3), 9);
        assert_eq!(sigma(2, 5), 33);
        let e4 = eisenstein(4, 6).unwrap().series;
        let e6 = eisenstein(6, 6).unwrap().series;
        for n in 1..6 {
            assert_eq!(e4.coeff(n).unwrap(), int(240 * sigma(n, 3)));
            assert_eq!(e6.coeff(n).unwrap(), int(-504 * sigma(n, 5)));
        }
        assert_eq!(e4.coeff(2).unwrap(), int(2160));
        assert_eq!(e6.coeff(2).unwrap(), int(-16632));
        assert_eq!(e4.coeff(0).unwrap(), int(1));
        assert_eq!(e6.coeff(0).unwrap(), int(1));
        assert!(eisenstein(8, 4).is_err());
    }

    #[test]
    fn discriminant_expansion() {
        // Oracle: (E4^3 - E6^2)/1728 from brute-force divisor sums.
        let n = 6usize;
        let e4: Vec<Rat> = (0..n).map(|k| if k == 0 { int(1) } else { int(240 * sigma(k as i64, 3)) }).collect();
        let e6: Vec<Rat> = (0..n).map(|k| if k == 0 { int(1) } else { int(-504 * sigma(k as i64, 5)) }).collect();
        let conv = |a: &[Rat], b: &[Rat]| -> Vec<Rat> {
            (0..n).map(|k| (0..=k).map(|i| &a[i] * &b[k - i]).sum()).collect()
        };
        let cube = conv(&conv(&e4, &e4), &e4);
        let square = conv(&e6, &e6);
        let oracle: Vec<Rat> = (0..n).map(|k| (&cube[k] - &square[k]) / int(1728)).collect();
        assert_eq!(oracle[1..4], [int(1), int(-24), int(252)]);
        let d = qexpand(&Poly::gen(Gen::C4).pow(3).scale(&rat(1, 1728)), 12, n as i64).unwrap();
        let d6 = qexpand(&Poly::gen(Gen::C6).pow(2).scale(&rat(-1, 1728)), 12, n as i64).unwrap();
        let total = d.series.add(&d6.series);
        for k in 0..n {
            assert_eq!(total.coeff(k as i64).unwrap(), oracle[k]);
        }
    }

    #[test]
    fn generator_image_and_inverse() {
        let c4 = qexpand(&Poly::gen(Gen::C4), 4, 5).unwrap();
        assert_eq!(c4.series, eisenstein(4, 5).unwrap().series);
        let delta_form =
            &Poly::gen(Gen::C4).pow(3).scale(&rat(1, 1728)) - &Poly::gen(Gen::C6).pow(2).scale(&rat(1, 1728));
        let one = qexpand(&(&delta_form * &Poly::gen(Gen::DELTA_INV)), 0, 8).unwrap();
        assert_eq!(one.series, QSeries::from_dense(0, &[int(1)], 8));
        let dinv = discriminant_inverse(4).unwrap();
        assert_eq!(dinv.coeff(-1).unwrap(), int(1));
        assert_eq!(dinv.coeff(0).unwrap(), int(24));
    }

    #[test]
    fn constant_terms() {
        let e4u = qexpand(&Poly::gen(Gen::C4), 4, 3).unwrap();
        assert_eq!(q0(&e4u).unwrap(), Poly::gen_pow(Gen::U, 4));
        let delta = discriminant(4).unwrap();
        assert_eq!(q0(&QExpansion { weight: 12, series: delta }).unwrap(), Poly::zero());
    }

    #[test]
    fn divided_congruence_integrality() {
        let dc = DividedCongruence::new(vec![
            (4, Poly::gen(Gen::C4).scale(&rat(1, 240))),
            (0, Poly::constant(rat(-1, 240))),
        ])
        .unwrap();
        for p in [5, 7, 11, 13] {
            assert!(dc_integral(&dc, p, 20).unwrap().integral);
        }
        let bad = DividedCongruence::new(vec![(4, Poly::gen(Gen::C4).scale(&rat(1, 5)))]).unwrap();
        let v = dc_integral(&bad, 5, 20).unwrap();
        assert!(!v.integral);
        assert_eq!(v.first_violation, Some((0, rat(1, 5))));
        assert!(dc_integral(&DividedCongruence::empty(), 5, 10).unwrap().integral);
        assert!(dc_integral(&dc, 3, 10).is_err());
    }

    #[test]
    fn duplicate_or_wrong_weights_rejected() {
        assert!(DividedCongruence::new(vec![(4, Poly::gen(Gen::C4)), (4, Poly::gen(Gen::C4))]).is_err());
        assert!(DividedCongruence::new(vec![(6, Poly::gen(Gen::C4))]).is_err());
    }

    #[test]
    fn quotient_of_single_weight_is_trivial() {
        let k = 6;
        let f = DividedCongruence::new(vec![(6, Poly::gen(Gen::C6).scale(&rat(1, 5 * 7 * 11 * 13)))]).unwrap();
        let c = DividedCongruence::new(vec![(0, Poly::constant(rat(3, 625)))]).unwrap();
        for p in [5, 7, 11, 13] {
            assert!(quotient_reduce(&f, k, p, None, 20).unwrap().trivial);
            assert!(quotient_reduce(&c, k, p, None, 20).unwrap().trivial);
        }
    }

    #[test]
    fn quotient_detects_weight_four_denominators() {
        // (E4 - 1)/5 = 48 sum sigma_3 q^n is 5-integral, so c4/5 is trivial
        // once constants are discarded; c4/25 leaves 48/5 at q^1.
        let fifth = DividedCongruence::new(vec![(4, Poly::gen(Gen::C4).scale(&rat(1, 5)))]).unwrap();
        assert!(quotient_reduce(&fifth, 6, 5, None, 20).unwrap().trivial);
        let sq = DividedCongruence::new(vec![(4, Poly::gen(Gen::C4).scale(&rat(1, 25)))]).unwrap();
        let v = quotient_reduce(&sq, 6, 5, None, 20).unwrap();
        assert!(!v.trivial);
        assert!(!v.remainder.is_zero());
    }

    #[test]
    fn quotient_precision_guard() {
        let f = DividedCongruence::new(vec![(4, Poly::gen(Gen::C4))]).unwrap();
        assert!(matches!(quotient_reduce(&f, 24, 5, None, 5), Err(Error::Precision(_))));
    }

    #[test]
    fn q_expansion_principle_small_weights() {
        // The monomials of each weight <= 24 have independent expansions.
        for w in (4..=24).step_by(2) {
            let basis = holomorphic_basis(w);
            let rows: Vec<Vec<Rat>> = basis
                .iter()
                .map(|f| {
                    let s = qexpand(f, w as i32, 4).unwrap().series;
                    (0..4).map(|e| s.coeff(e).unwrap()).collect()
                })
                .collect();
            assert_eq!(rank(rows), basis.len(), "weight {w}");
        }
    }

    fn rank(mut rows: Vec<Vec<Rat>>) -> usize {
        let mut r = 0;
        let width = rows.first().map_or(0, Vec::len);
        for col in 0..width {
            let Some(pivot) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else { continue };
            rows.swap(r, pivot);
            for i in 0..rows.len() {
                if i != r && !rows[i][col].is_zero() {
                    let f = &rows[i][col] / &rows[r][col];
                    let pr = rows[r].clone();
                    for (x, y) in rows[i].iter_mut().zip(pr) {
                        *x -= &f * y;
                    }
                }
            }
            r += 1;
        }
        r
    }

    #[test]
    fn constant_term_commutes_with_evaluation() {
        for f in holomorphic_basis(24).into_iter().chain(holomorphic_basis(10)) {
            let w = weight_of(&f).unwrap().unwrap();
            let exp = qexpand(&f, w, 2).unwrap();
            let mut a = BTreeMap::new();
            a.insert(Gen::C4, Poly::gen_pow(Gen::U, 4));
            a.insert(Gen::C6, -Poly::gen_pow(Gen::U, 6));
            assert_eq!(q0(&exp).unwrap(), f.substitute(&a).unwrap());
        }
    }

    #[test]
    fn rho1_examples() {
        let g = Poly::gen(Gen::C6);
        let dc = rho1_rational(&[(Poly::gen(Gen::C4), g.clone())]).unwrap();
        assert_eq!(dc.component(6), g);
        let delta = &Poly::gen(Gen::C4).pow(3).scale(&rat(1, 1728)) - &Poly::gen(Gen::C6).pow(2).scale(&rat(1, 1728));
        assert!(rho1_rational(&[(delta, g.clone())]).unwrap().is_zero());
        assert_eq!(rho1_rational(&[(Poly::one(), g.clone())]).unwrap().component(6), g);
    }

    #[test]
    fn json_schema_round_trip() {
        let dc = DividedCongruence::new(vec![(4, Poly::gen(Gen::C4).scale(&rat(1, 240))), (0, Poly::constant(rat(-1, 240)))]).unwrap();
        let mut v = dc.to_json();
        v["qprec"] = json!(12);
        let (back, q) = DividedCongruence::from_json(&v).unwrap();
        assert_eq!(back, dc);
        assert_eq!(q, Some(12));
    }

    fn arb_form(w: i64) -> impl Strategy<Value = Poly> {
        let basis = holomorphic_basis(w);
        prop::collection::vec((-30i64..30, 1i64..50), basis.len()).prop_map(move |cs| {
            let mut f = Poly::zero();
            for ((n, d), b) in cs.into_iter().zip(basis.iter()) {
                f += &b.scale(&rat(n, d));
            }
            f
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn quotient_absorbs_indeterminacy(x4 in arb_form(4), x10 in arb_form(10), c in -50i64..50, d in 1i64..40, f8 in arb_form(8), n in -9i64..9) {
            let k = 8;
            let p = 5;
            let x = DividedCongruence::new(vec![(4, x4), (10, x10.clone())]).unwrap();
            let base = quotient_reduce(&x, k, p, None, 16).unwrap();
            let integral = DividedCongruence::new(vec![(10, Poly::gen(Gen::C4).pow(1).mul_mono(&Mono::gen(Gen::C6, 1), &int(n)))]).unwrap();
            let shifted = x
                .add(&DividedCongruence::new(vec![(0, Poly::constant(rat(c, d))), (k, f8)]).unwrap())
                .add(&integral);
            let moved = quotient_reduce(&shifted, k, p, None, 16).unwrap();
            prop_assert_eq!(base.trivial, moved.trivial);
            prop_assert_eq!(base.remainder, moved.remainder);
        }

        #[test]
        fn integrality_agrees_between_representations(x4 in arb_form(4), x6 in arb_form(6)) {
            let dc = DividedCongruence::new(vec![(4, x4.clone()), (6, x6.clone())]).unwrap();
            let direct = dc_integral(&dc, 7, 12).unwrap().integral;
            let a = qexpand(&x4, 4, 12).unwrap().series;
            let b = qexpand(&x6, 6, 12).unwrap().series;
            prop_assert_eq!(direct, is_p_integral(&a.add(&b), 7));
        }
    }
}
