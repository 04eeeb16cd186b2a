//! Sparse polynomials over exact rationals in a fixed vocabulary of graded
//! generators.
//!
//! Every generator carries an explicit even degree. The vocabulary covers the
//! Lazard generators `m_i`, the strict-isomorphism coefficients `b_i` (and a
//! second copy for the two-fold tensor product), the modular generators
//! `c4`, `c6`, `Dinv`, the Bott class `u`, the comodule basis symbols and two
//! degree-zero auxiliaries (`q` and `t`).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};
use serde_json::{json, Value};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::rational::{format_rat, int, parse_rat, Rat};

const SHIFT: u32 = 16;
const INDEX_MASK: u32 = (1 << SHIFT) - 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    U,
    C4,
    C6,
    DeltaInv,
    Q,
    T,
    C4Left,
    C6Left,
    M,
    B,
    BOuter,
    Beta,
    BetaT,
}

const FAMILIES: [Family; 13] = [
    Family::U,
    Family::C4,
    Family::C6,
    Family::DeltaInv,
    Family::Q,
    Family::T,
    Family::C4Left,
    Family::C6Left,
    Family::M,
    Family::B,
    Family::BOuter,
    Family::Beta,
    Family::BetaT,
];

/// A generator: family in the high bits, index in the low bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gen(u32);

impl Gen {
    pub const U: Gen = Gen(0);
    pub const C4: Gen = Gen(1 << SHIFT);
    pub const C6: Gen = Gen(2 << SHIFT);
    /// Inverse of the discriminant, degree -24.
    pub const DELTA_INV: Gen = Gen(3 << SHIFT);
    /// q-expansion variable, degree 0.
    pub const Q: Gen = Gen(4 << SHIFT);
    /// Auxiliary degree-0 parameter.
    pub const T: Gen = Gen(5 << SHIFT);
    /// c4 in the left tensor factor of a two-sided elliptic ring.
    pub const C4_LEFT: Gen = Gen(6 << SHIFT);
    pub const C6_LEFT: Gen = Gen(7 << SHIFT);

    fn of(family: Family, index: u32) -> Gen {
        let code = FAMILIES.iter().position(|f| *f == family).unwrap() as u32;
        assert!(index <= INDEX_MASK);
        Gen((code << SHIFT) | index)
    }

    /// Lazard generator `m_i`, i >= 1.
    pub fn m(i: u32) -> Gen {
        assert!(i >= 1);
        Gen::of(Family::M, i)
    }

    /// Strict isomorphism coefficient `b_i`, i >= 1.
    pub fn b(i: u32) -> Gen {
        assert!(i >= 1);
        Gen::of(Family::B, i)
    }

    /// `b_i` in the right factor of a two-fold tensor product.
    pub fn b_outer(i: u32) -> Gen {
        assert!(i >= 1);
        Gen::of(Family::BOuter, i)
    }

    /// Comodule basis element `beta_i` (first variable), i >= -1.
    pub fn beta(i: i32) -> Gen {
        assert!(i >= -1);
        Gen::of(Family::Beta, (i + 1) as u32)
    }

    /// Comodule basis element of the second smash factor.
    pub fn beta_t(j: i32) -> Gen {
        assert!(j >= -1);
        Gen::of(Family::BetaT, (j + 1) as u32)
    }

    pub fn family(self) -> Family {
        FAMILIES[(self.0 >> SHIFT) as usize]
    }

    pub fn index(self) -> i64 {
        let raw = (self.0 & INDEX_MASK) as i64;
        match self.family() {
            Family::Beta | Family::BetaT => raw - 1,
            _ => raw,
        }
    }

    pub fn degree(self) -> i64 {
        match self.family() {
            Family::U => 2,
            Family::C4 | Family::C4Left => 8,
            Family::C6 | Family::C6Left => 12,
            Family::DeltaInv => -24,
            Family::Q | Family::T => 0,
            Family::M | Family::B | Family::BOuter | Family::Beta | Family::BetaT => 2 * self.index(),
        }
    }

    pub fn name(self) -> String {
        let i = self.index();
        match self.family() {
            Family::U => "u".into(),
            Family::C4 => "c4".into(),
            Family::C6 => "c6".into(),
            Family::DeltaInv => "Dinv".into(),
            Family::Q => "q".into(),
            Family::T => "t".into(),
            Family::C4Left => "c4L".into(),
            Family::C6Left => "c6L".into(),
            Family::M => format!("m{i}"),
            Family::B => format!("b{i}"),
            Family::BOuter => format!("bb{i}"),
            Family::Beta => format!("beta{i}"),
            Family::BetaT => format!("betaT{i}"),
        }
    }

    pub fn parse(name: &str) -> Option<Gen> {
        let fixed = match name {
            "u" => Some(Gen::U),
            "c4" => Some(Gen::C4),
            "c6" => Some(Gen::C6),
            "Dinv" => Some(Gen::DELTA_INV),
            "q" => Some(Gen::Q),
            "t" => Some(Gen::T),
            "c4L" => Some(Gen::C4_LEFT),
            "c6L" => Some(Gen::C6_LEFT),
            _ => None,
        };
        if fixed.is_some() {
            return fixed;
        }
        let split = |prefix: &str| -> Option<i64> { name.strip_prefix(prefix)?.parse().ok() };
        if let Some(j) = split("betaT") {
            return (j >= -1).then(|| Gen::beta_t(j as i32));
        }
        if let Some(i) = split("beta") {
            return (i >= -1).then(|| Gen::beta(i as i32));
        }
        if let Some(i) = split("bb") {
            return (i >= 1).then(|| Gen::b_outer(i as u32));
        }
        if let Some(i) = split("b") {
            return (i >= 1).then(|| Gen::b(i as u32));
        }
        if let Some(i) = split("m") {
            return (i >= 1).then(|| Gen::m(i as u32));
        }
        None
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Exponent vector, sparse and sorted by generator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Mono(SmallVec<[(Gen, u32); 4]>);

impl Mono {
    pub fn one() -> Mono {
        Mono(SmallVec::new())
    }

    pub fn gen(g: Gen, e: u32) -> Mono {
        let mut v = SmallVec::new();
        if e > 0 {
            v.push((g, e));
        }
        Mono(v)
    }

    pub fn from_pairs(mut pairs: Vec<(Gen, u32)>) -> Mono {
        pairs.sort_by_key(|p| p.0);
        let mut out: SmallVec<[(Gen, u32); 4]> = SmallVec::new();
        for (g, e) in pairs {
            if e == 0 {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.0 == g => last.1 += e,
                _ => out.push((g, e)),
            }
        }
        Mono(out)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponents(&self) -> &[(Gen, u32)] {
        &self.0
    }

    pub fn exponent(&self, g: Gen) -> u32 {
        self.0.iter().find(|p| p.0 == g).map_or(0, |p| p.1)
    }

    pub fn total_exponent(&self) -> u32 {
        self.0.iter().map(|p| p.1).sum()
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|(g, e)| g.degree() * *e as i64).sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            if a[i].0 == b[j].0 {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            } else if a[i].0 < b[j].0 {
                out.push(a[i]);
                i += 1;
            } else {
                out.push(b[j]);
                j += 1;
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Mono(out)
    }

    /// Removes one generator, returning its exponent.
    pub fn without(&self, g: Gen) -> (Mono, u32) {
        let mut e = 0;
        let rest = self
            .0
            .iter()
            .filter(|p| {
                if p.0 == g {
                    e = p.1;
                    false
                } else {
                    true
                }
            })
            .copied()
            .collect();
        (Mono(rest), e)
    }

    pub fn parse(s: &str) -> Option<Mono> {
        let s = s.trim();
        if s == "1" || s.is_empty() {
            return Some(Mono::one());
        }
        let mut pairs = Vec::new();
        for factor in s.split('*') {
            let (name, e) = match factor.split_once('^') {
                Some((n, e)) => (n, e.parse::<u32>().ok()?),
                None => (factor, 1),
            };
            pairs.push((Gen::parse(name.trim())?, e));
        }
        Some(Mono::from_pairs(pairs))
    }
}

/// Graded lexicographic: total exponent first, then the exponent of the
/// earliest generator.
impl Ord for Mono {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering::*;
        let by_total = self.total_exponent().cmp(&other.total_exponent());
        if by_total != Equal {
            return by_total;
        }
        let (a, b) = (&self.0, &other.0);
        for k in 0..a.len().min(b.len()) {
            if a[k].0 != b[k].0 {
                return if a[k].0 < b[k].0 { Greater } else { Less };
            }
            if a[k].1 != b[k].1 {
                return a[k].1.cmp(&b[k].1);
            }
        }
        a.len().cmp(&b.len())
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, (g, e)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{g}")?;
            } else {
                write!(f, "{g}^{e}")?;
            }
        }
        Ok(())
    }
}

/// Homogeneity of a polynomial with respect to generator degrees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Homogeneity {
    Zero,
    Degree(i64),
    Inhomogeneous,
}

/// Sparse polynomial. With `qprec = Some(n)` every power `q^e` with `e >= n`
/// is dropped, so the `q` direction behaves as a truncated power series.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Mono, Rat>,
    qprec: Option<u32>,
}

fn min_prec(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }

    pub fn one() -> Poly {
        Poly::constant(Rat::one())
    }

    pub fn constant(c: Rat) -> Poly {
        Poly::term(c, Mono::one())
    }

    pub fn int(n: i64) -> Poly {
        Poly::constant(int(n))
    }

    pub fn gen(g: Gen) -> Poly {
        Poly::term(Rat::one(), Mono::gen(g, 1))
    }

    pub fn gen_pow(g: Gen, e: u32) -> Poly {
        Poly::term(Rat::one(), Mono::gen(g, e))
    }

    pub fn term(c: Rat, m: Mono) -> Poly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms, qprec: None }
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Mono, Rat)>) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn with_qprec(mut self, qprec: u32) -> Poly {
        self.qprec = min_prec(self.qprec, Some(qprec));
        self.apply_qprec();
        self
    }

    pub fn qprec(&self) -> Option<u32> {
        self.qprec
    }

    fn apply_qprec(&mut self) {
        if let Some(n) = self.qprec {
            self.terms.retain(|m, _| m.exponent(Gen::Q) < n);
        }
    }

    fn admits(&self, m: &Mono) -> bool {
        self.qprec.is_none_or(|n| m.exponent(Gen::Q) < n)
    }

    pub fn add_term(&mut self, m: Mono, c: Rat) {
        if c.is_zero() || !self.admits(&m) {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Mono) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff(&Mono::one())
    }

    /// The polynomial is a rational constant (possibly zero).
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => self.terms.get(&Mono::one()).cloned(),
            _ => None,
        }
    }

    pub fn generators(&self) -> Vec<Gen> {
        let mut gens: Vec<Gen> = self.terms.keys().flat_map(|m| m.0.iter().map(|p| p.0)).collect();
        gens.sort();
        gens.dedup();
        gens
    }

    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly { terms: BTreeMap::new(), qprec: self.qprec };
        }
        Poly { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(), qprec: self.qprec }
    }

    pub fn mul_mono(&self, m: &Mono, c: &Rat) -> Poly {
        let mut out = Poly { terms: BTreeMap::new(), qprec: self.qprec };
        for (k, v) in &self.terms {
            out.add_term(k.mul(m), v * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        acc.qprec = self.qprec;
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn homogeneity(&self) -> Homogeneity {
        let mut deg = None;
        for m in self.terms.keys() {
            let d = m.degree();
            match deg {
                None => deg = Some(d),
                Some(d0) if d0 != d => return Homogeneity::Inhomogeneous,
                _ => {}
            }
        }
        deg.map_or(Homogeneity::Zero, Homogeneity::Degree)
    }

    /// Terms grouped by the exponent of one generator.
    pub fn split_by(&self, g: Gen) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (rest, e) = m.without(g);
            out.entry(e)
                .or_insert_with(|| Poly { terms: BTreeMap::new(), qprec: self.qprec })
                .add_term(rest, c.clone());
        }
        out
    }

    /// Ring homomorphism sending each generator to its assigned image. Every
    /// generator must be assigned an image of the same degree (zero allowed).
    pub fn substitute(&self, assign: &BTreeMap<Gen, Poly>) -> Result<Poly> {
        for g in self.generators() {
            let img = assign.get(&g).ok_or_else(|| Error::MissingAssignment(g.name()))?;
            match img.homogeneity() {
                Homogeneity::Zero => {}
                Homogeneity::Degree(d) if d == g.degree() => {}
                Homogeneity::Degree(d) => {
                    return Err(Error::DegreeMismatch { gen: g.name(), expected: g.degree(), got: d.to_string() })
                }
                Homogeneity::Inhomogeneous => {
                    return Err(Error::DegreeMismatch {
                        gen: g.name(),
                        expected: g.degree(),
                        got: "inhomogeneous".into(),
                    })
                }
            }
        }
        Ok(self.replace(assign))
    }

    /// Like `substitute` but keeps unassigned generators and skips the
    /// degree check (used for specialisations).
    pub fn replace(&self, assign: &BTreeMap<Gen, Poly>) -> Poly {
        let mut powers: HashMap<Gen, Vec<Poly>> = HashMap::new();
        let mut out = Poly { terms: BTreeMap::new(), qprec: self.qprec };
        for img in assign.values() {
            out.qprec = min_prec(out.qprec, img.qprec);
        }
        for (m, c) in &self.terms {
            let mut kept = Mono::one();
            let mut acc = Poly::constant(c.clone());
            acc.qprec = out.qprec;
            for &(g, e) in m.exponents() {
                match assign.get(&g) {
                    Some(img) => {
                        let table = powers.entry(g).or_insert_with(|| vec![Poly::one()]);
                        while table.len() <= e as usize {
                            let next = &table[table.len() - 1] * img;
                            table.push(next);
                        }
                        acc = &acc * &table[e as usize];
                        if acc.is_zero() {
                            break;
                        }
                    }
                    None => kept = kept.mul(&Mono::gen(g, e)),
                }
            }
            if kept.is_one() {
                out += &acc;
            } else {
                out += &acc.mul_mono(&kept, &Rat::one());
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(m, c)| json!({"monomial": m.to_string(), "coeff": format_rat(c)}))
                .collect(),
        )
    }

    /// Parses sums such as `1/240*c4 - 1/240` or `c4^3*Dinv`. A `-` right
    /// after a letter belongs to a generator name (`beta-1`).
    pub fn parse(text: &str) -> Result<Poly> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Usage("empty polynomial".into()));
        }
        let mut pieces = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for (i, &ch) in bytes.iter().enumerate() {
            let sign = ch == b'+' || ch == b'-';
            if sign && i > 0 && !(ch == b'-' && bytes[i - 1].is_ascii_alphabetic()) && !b"^+-*/".contains(&bytes[i - 1]) {
                pieces.push(&s[start..i]);
                start = i;
            }
        }
        pieces.push(&s[start..]);
        let bad = |t: &str| Error::Usage(format!("cannot parse term {t:?}"));
        let mut out = Poly::zero();
        for piece in pieces {
            let (neg, body) = match piece.as_bytes()[0] {
                b'+' => (false, &piece[1..]),
                b'-' => (true, &piece[1..]),
                _ => (false, piece),
            };
            let (c, m) = match body.split_once('*') {
                Some((head, rest)) if parse_rat(head).is_ok() => (parse_rat(head)?, Mono::parse(rest).ok_or_else(|| bad(piece))?),
                _ => match parse_rat(body) {
                    Ok(c) => (c, Mono::one()),
                    Err(_) => (Rat::one(), Mono::parse(body).ok_or_else(|| bad(piece))?),
                },
            };
            out.add_term(m, if neg { -c } else { c });
        }
        Ok(out)
    }

    pub fn from_json(v: &Value) -> Result<Poly> {
        let bad = |what: &str| Error::Usage(format!("malformed polynomial: {what}"));
        let arr = v.as_array().ok_or_else(|| bad("expected array"))?;
        let mut p = Poly::zero();
        for t in arr {
            let m = t.get("monomial").and_then(Value::as_str).ok_or_else(|| bad("monomial"))?;
            let c = t.get("coeff").and_then(Value::as_str).ok_or_else(|| bad("coeff"))?;
            let mono = Mono::parse(m).ok_or_else(|| bad(m))?;
            p.add_term(mono, parse_rat(c)?);
        }
        Ok(p)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            if m.is_one() {
                write!(f, "{}", format_rat(c))?;
            } else if c.is_one() {
                write!(f, "{m}")?;
            } else {
                write!(f, "{}*{m}", format_rat(c))?;
            }
        }
        Ok(())
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        self.qprec = min_prec(self.qprec, rhs.qprec);
        self.apply_qprec();
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        self.qprec = min_prec(self.qprec, rhs.qprec);
        self.apply_qprec();
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self += &rhs;
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        self -= &rhs;
        self
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(), qprec: self.qprec }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let qprec = min_prec(self.qprec, rhs.qprec);
        if self.is_zero() || rhs.is_zero() {
            return Poly { terms: BTreeMap::new(), qprec };
        }
        if let Some(c) = self.as_constant() {
            let mut out = rhs.scale(&c);
            out.qprec = qprec;
            out.apply_qprec();
            return out;
        }
        if let Some(c) = rhs.as_constant() {
            let mut out = self.scale(&c);
            out.qprec = qprec;
            out.apply_qprec();
            return out;
        }
        let mut acc: HashMap<Mono, Rat> = HashMap::with_capacity(self.len() * rhs.len());
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let m = ma.mul(mb);
                if let Some(n) = qprec {
                    if m.exponent(Gen::Q) >= n {
                        continue;
                    }
                }
                let c = ca * cb;
                match acc.entry(m) {
                    std::collections::hash_map::Entry::Occupied(mut e) => *e.get_mut() += c,
                    std::collections::hash_map::Entry::Vacant(e) => {
                        e.insert(c);
                    }
                }
            }
        }
        Poly { terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(), qprec }
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

impl From<Rat> for Poly {
    fn from(c: Rat) -> Poly {
        Poly::constant(c)
    }
}
