use std::collections::BTreeMap;

use serde_json::{json, Map, Value};
use transfer_core::cobar::{restrict_primitives, table_to_json, CocycleKind, HopfPair};
use transfer_core::fgl::{check_axioms, miller_divisibility_check, FormalGroupLaw, LawKind};
use transfer_core::invariants::{
    fprime_invariant, fprime_via_substitution, required_prec, BernoulliPair, FPrimeReport, k_table_ku_ell, f_report,
    relate_check_with,
};
use transfer_core::modular::{dc_integral, quotient_reduce, DividedCongruence};
use transfer_core::rational::{factorial, format_rat, rat};
use transfer_core::{Gen, Poly, Rat, TruncSeries, Vars};

use crate::cache::{Cache, CacheKey};
use crate::config::RunConfig;
use crate::CliError;

/// A JSON artifact and whether every check it carries passed.
pub struct Outcome {
    pub json: Value,
    pub ok: bool,
}

impl Outcome {
    fn ok(json: Value) -> Outcome {
        Outcome { json, ok: true }
    }
}

pub fn build_law(name: &str, prec: u32, qprec: i64) -> Result<FormalGroupLaw, CliError> {
    let kind = LawKind::parse(name).ok_or_else(|| CliError::usage(format!("unknown law {name:?}")))?;
    Ok(match kind {
        LawKind::Universal => FormalGroupLaw::universal(prec)?,
        LawKind::Multiplicative => FormalGroupLaw::multiplicative(prec)?,
        LawKind::Additive => FormalGroupLaw::additive(prec)?,
        LawKind::Elliptic => FormalGroupLaw::elliptic(prec)?,
        LawKind::Tate => {
            let q = u32::try_from(qprec).map_err(|_| CliError::usage("--qprec must be positive"))?;
            FormalGroupLaw::tate(&FormalGroupLaw::elliptic(prec)?, q)?
        }
        LawKind::Custom => return Err(CliError::usage("custom laws have no command line form")),
    })
}

/// q-precision as it enters a cache key: only the Tate law depends on it.
fn law_qprec(law: &str, qprec: i64) -> i64 {
    if law == "tate" {
        qprec
    } else {
        0
    }
}

/// Rational values for m_i, u, c4, c6 used by the axiom checks; every
/// generator a specialised law can contain gets a value.
pub fn axiom_assignment(prec: u32) -> BTreeMap<Gen, Poly> {
    let mut assign = BTreeMap::new();
    for i in 1..=prec {
        assign.insert(Gen::m(i), Poly::constant(rat((i as i64 * 7) % 11 - 5, i as i64 + 1)));
    }
    assign.insert(Gen::U, Poly::constant(rat(-3, 4)));
    assign.insert(Gen::C4, Poly::constant(rat(5, 2)));
    assign.insert(Gen::C6, Poly::constant(rat(-7, 3)));
    assign
}

/// prec + 2 distinct scalars for the associativity check.
pub fn axiom_scalars(prec: u32) -> Vec<Rat> {
    (1..=prec as i64 + 2).map(|k| rat(k, 5)).collect()
}

pub fn fgl(cfg: &RunConfig, cache: &Cache, law: &str, check: bool) -> Result<Outcome, CliError> {
    if law == "tate" {
        cfg.require_modular_qprec()?;
    }
    let key = CacheKey::new("fgl", law, cfg.prec, law_qprec(law, cfg.qprec));
    let series = cache.get_or_compute(&key, || Ok::<_, CliError>(build_law(law, cfg.prec, cfg.qprec)?.to_json()?))?;
    let mut out = json!({"params": {"law": law, "prec": cfg.prec, "qprec": law_qprec(law, cfg.qprec)}, "series": series});
    if !check {
        return Ok(Outcome::ok(out));
    }
    let f = build_law(law, cfg.prec, cfg.qprec)?;
    let r = check_axioms(&f, &axiom_assignment(cfg.prec), &axiom_scalars(cfg.prec))?;
    out["axioms"] = json!({
        "exp_log": r.exp_log,
        "log_exp": r.log_exp,
        "unit": r.unit,
        "commutative": r.commutative,
        "associative": r.associative,
    });
    Ok(Outcome { json: out, ok: r.all() })
}

pub fn bernoulli(cfg: &RunConfig, cache: &Cache, law: &str, max: u32, miller: bool) -> Result<Outcome, CliError> {
    if max < 1 || max > cfg.prec {
        return Err(CliError::usage(format!("--max must lie in 1..={} (the precision)", cfg.prec)));
    }
    if law == "tate" {
        cfg.require_modular_qprec()?;
    }
    let key = CacheKey::new("bernoulli", law, cfg.prec, law_qprec(law, cfg.qprec));
    let table = cache.get_or_compute(&key, || {
        let f = build_law(law, cfg.prec, cfg.qprec)?;
        let mut rows = Vec::new();
        for n in 1..=cfg.prec {
            rows.push(json!({"n": n, "bernoulli": f.bernoulli(n)?.to_json(), "reduced": f.reduced_bernoulli(n)?.to_json()}));
        }
        Ok::<_, CliError>(Value::Array(rows))
    })?;
    let rows: Vec<Value> = table.as_array().map(|a| a[..max as usize].to_vec()).unwrap_or_default();
    let mut out = json!({"params": {"law": law, "prec": cfg.prec, "max": max}, "values": rows});
    if !miller {
        return Ok(Outcome::ok(out));
    }
    let f = build_law(law, cfg.prec, cfg.qprec)?;
    let mut ok = true;
    let mut reports = Vec::new();
    for n in 1..=max {
        let r = miller_divisibility_check(&f, n)?;
        ok &= r.pass;
        reports.push(r.to_json());
    }
    out["miller"] = json!({"integral_form": f.integral_form(), "checks": reports});
    Ok(Outcome { json: out, ok })
}

fn cocycle_kind(name: &str) -> Result<CocycleKind, CliError> {
    match name {
        "e_tau" => Ok(CocycleKind::ETau),
        "E_tau" => Ok(CocycleKind::BigETau),
        "K" => Ok(CocycleKind::K),
        _ => Err(CliError::usage(format!("unknown cocycle {name:?}; expected e_tau, E_tau or K"))),
    }
}

/// m! [S^m] of value(exp S) for 0 <= m <= max.
fn restrict_univariate(value: &TruncSeries, exp: &TruncSeries, max: i32) -> Result<BTreeMap<(i32, i32), Poly>, CliError> {
    let sub = TruncSeries::compose(value, exp)?;
    if sub.trunc() < max {
        return Err(CliError::usage(format!("the image series is known through degree {}, below {max}", sub.trunc())));
    }
    let mut out = BTreeMap::new();
    for m in 0..=max {
        out.insert((m, 0), sub.coeff(m)?.scale(&Rat::from_integer(factorial(m as u32))));
    }
    Ok(out)
}

pub fn transfer(
    cfg: &RunConfig,
    cache: &Cache,
    cocycle: &str,
    pair: Option<(&str, &str)>,
    primitives: Option<i32>,
) -> Result<Outcome, CliError> {
    let kind = cocycle_kind(cocycle)?;
    if let Some((l, r)) = pair {
        if l == "tate" || r == "tate" {
            cfg.require_modular_qprec()?;
        }
    }
    let laws = match pair {
        Some((l, r)) => format!("{l}/{r}"),
        None => "universal".into(),
    };
    let qprec = match pair {
        Some((l, r)) => law_qprec(l, cfg.qprec).max(law_qprec(r, cfg.qprec)),
        None => 0,
    };
    let what = match primitives {
        Some(m) => format!("transfer:{cocycle}:primitives:{m}"),
        None => format!("transfer:{cocycle}"),
    };
    let key = CacheKey::new(&what, &laws, cfg.prec, qprec);
    let payload = cache.get_or_compute(&key, || {
        let (hopf, exp_left) = match pair {
            Some((l, r)) => {
                let left = build_law(l, cfg.prec, cfg.qprec)?;
                let right = build_law(r, cfg.prec, cfg.qprec)?;
                let exp = left.exp()?.clone();
                (HopfPair::from_laws(&left, &right)?, exp)
            }
            None => {
                let h = HopfPair::universal(cfg.prec)?;
                let exp = h.exp_l()?.clone();
                (h, exp)
            }
        };
        let series = kind.evaluate(&hopf)?;
        Ok::<_, CliError>(match primitives {
            None => series.to_json(),
            Some(m) if m < 0 => return Err(CliError::usage("--primitives must be non-negative")),
            Some(m) => {
                let table = if series.vars() == Vars::Two {
                    restrict_primitives(&series, &exp_left, m)?
                } else {
                    restrict_univariate(&series, &exp_left, m)?
                };
                table_to_json(&table)
            }
        })
    })?;
    let field = if primitives.is_some() { "primitives" } else { "series" };
    let mut params = json!({"cocycle": cocycle, "laws": laws, "prec": cfg.prec});
    if let Some(m) = primitives {
        params["primitives"] = json!(m);
    }
    Ok(Outcome::ok(json!({"params": params, field: payload})))
}

/// `W:FORM`, e.g. `4:1/240*c4`.
pub fn parse_component(s: &str) -> Result<(i32, Poly), CliError> {
    let (w, f) = s.split_once(':').ok_or_else(|| CliError::usage(format!("expected WEIGHT:FORM, got {s:?}")))?;
    let w = w.trim().parse().map_err(|_| CliError::usage(format!("bad weight in {s:?}")))?;
    let f = Poly::parse(f.trim()).map_err(|e| CliError::usage(format!("bad form in {s:?}: {e}")))?;
    Ok((w, f))
}

pub struct CongruenceArgs {
    pub input: Option<Value>,
    pub components: Vec<String>,
    pub primes: Vec<u64>,
    pub reduce_weight: Option<i32>,
    pub pole_bound: Option<i64>,
}

pub fn congruence(cfg: &RunConfig, args: CongruenceArgs) -> Result<Outcome, CliError> {
    let (dc, file_qprec) = match (&args.input, args.components.is_empty()) {
        (Some(v), true) => DividedCongruence::from_json(v)?,
        (None, false) => {
            let comps = args.components.iter().map(|c| parse_component(c)).collect::<Result<Vec<_>, _>>()?;
            (DividedCongruence::new(comps)?, None)
        }
        _ => return Err(CliError::usage("give exactly one of --input and --component")),
    };
    let qprec = file_qprec.unwrap_or(cfg.qprec);
    RunConfig { qprec, ..cfg.clone() }.require_modular_qprec()?;
    let primes = if args.primes.is_empty() { cfg.primes.clone() } else { args.primes };
    let mut ok = true;
    let mut integrality = Map::new();
    let mut reduced = Map::new();
    for p in primes {
        let v = dc_integral(&dc, p, qprec)?;
        ok &= v.integral;
        integrality.insert(
            p.to_string(),
            json!({
                "integral": v.integral,
                "first_violation": v.first_violation.map(|(e, c)| json!({"exponent": e, "coeff": format_rat(&c)})),
            }),
        );
        if let Some(k) = args.reduce_weight {
            let r = quotient_reduce(&dc, k, p, args.pole_bound, qprec)?;
            ok &= r.trivial;
            reduced.insert(p.to_string(), r.to_json());
        }
    }
    let mut out = json!({"input": dc.to_json(), "qprec": qprec, "integrality": integrality});
    if args.reduce_weight.is_some() {
        out["reduced"] = Value::Object(reduced);
    }
    Ok(Outcome { json: out, ok })
}

fn check_st(cfg: &RunConfig, s: u32, t: u32) -> Result<(), CliError> {
    let need = required_prec(s, t);
    if cfg.prec < need {
        return Err(CliError::usage(format!("--prec {} is below {need} needed at s={s}, t={t}", cfg.prec)));
    }
    Ok(())
}

fn selected_primes(cfg: &RunConfig, prime: Option<u64>, gamma: Option<u64>) -> Result<Vec<(u64, u64)>, CliError> {
    match (prime, gamma) {
        (Some(p), g) => {
            let cfg = RunConfig { primes: vec![p], gammas: g.map(|g| [(p, g)].into()).unwrap_or_else(|| cfg.gammas.clone()), ..cfg.clone() };
            cfg.validate()?;
            Ok(vec![(p, cfg.gamma(p)?)])
        }
        (None, Some(_)) => Err(CliError::usage("--gamma needs --prime")),
        (None, None) => cfg.primes.iter().map(|&p| Ok((p, cfg.gamma(p)?))).collect(),
    }
}

pub fn finv(cfg: &RunConfig, s: u32, t: u32, prime: Option<u64>, gamma: Option<u64>) -> Result<Outcome, CliError> {
    cfg.require_modular_qprec()?;
    check_st(cfg, s, t)?;
    let pg = selected_primes(cfg, prime, gamma)?;
    let primes: Vec<u64> = pg.iter().map(|(p, _)| *p).collect();
    let prec = required_prec(s, t);
    let bern = BernoulliPair::new(prec)?;
    let table = k_table_ku_ell(prec, s.max(t) as i32)?;
    let report = f_report(&bern, &table, s, t, &primes, cfg.qprec)?;
    let mut fprime = Map::new();
    let mut relate = Map::new();
    let mut difference_constant = true;
    for &(p, g) in &pg {
        let v = relate_check_with(&bern, s, t, p, g, cfg.qprec)?;
        difference_constant &= v.difference_constant;
        fprime.insert(p.to_string(), bern.fprime(s, t, g)?.to_json());
        relate.insert(p.to_string(), v.to_json());
    }
    let out = json!({
        "params": {
            "s": s,
            "t": t,
            "primes": primes,
            "gamma": pg.iter().map(|(p, g)| (p.to_string(), json!(g))).collect::<Map<_, _>>(),
            "prec": prec,
            "qprec": cfg.qprec,
        },
        "representative": report.representative.to_json(),
        "symmetric_representative": report.symmetric_representative.to_json(),
        "fprime": fprime,
        "difference_constant": difference_constant,
        "reduced": report.reduced.iter().map(|(p, v)| (p.to_string(), v.to_json())).collect::<Map<_, _>>(),
        "relate": relate,
        "cocycle_path": {
            "value": report.cocycle_value.to_json(),
            "class": report.cocycle_class.to_json(),
            "agrees": report.paths_agree,
        },
    });
    Ok(Outcome { json: out, ok: report.paths_agree })
}

pub fn fprime(cfg: &RunConfig, s: u32, t: u32, prime: Option<u64>, gamma: Option<u64>) -> Result<Outcome, CliError> {
    check_st(cfg, s, t)?;
    let pg = selected_primes(cfg, prime, gamma)?;
    let prec = required_prec(s, t);
    let mut ok = true;
    let mut reports = Vec::new();
    for (p, g) in pg {
        let r = FPrimeReport {
            s,
            t,
            p,
            gamma: g,
            closed_form: fprime_invariant(s, t, p, g, prec)?,
            substitution: fprime_via_substitution(s, t, p, g, prec)?,
        };
        ok &= r.agree();
        reports.push(r.to_json());
    }
    Ok(Outcome { json: json!({"params": {"s": s, "t": t, "prec": prec}, "reports": reports}), ok })
}

pub fn cache_command(cache: &Cache, action: &str) -> Result<Outcome, CliError> {
    let root = cache.root().map(|p| p.display().to_string());
    match action {
        "path" => Ok(Outcome::ok(json!({"path": root}))),
        "stats" => {
            let (entries, bytes) = cache.stats();
            Ok(Outcome::ok(json!({"path": root, "entries": entries, "bytes": bytes})))
        }
        "clear" => {
            let removed = cache.clear().map_err(|e| CliError::failure(format!("clearing the cache: {e}")))?;
            Ok(Outcome::ok(json!({"path": root, "removed": removed})))
        }
        _ => Err(CliError::usage(format!("unknown cache action {action:?}"))),
    }
}
