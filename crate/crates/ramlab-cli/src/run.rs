//! Command dispatch: turn a parsed request into a rendered report and an
//! exit class. Input problems become `Usage` (exit 2), censoring that
//! blocks the primary verdict becomes `Indeterminate` (exit 3), and broken
//! cross-checks become `Internal` (exit 4).

use std::path::PathBuf;
use std::sync::Arc;

use ramlab_core::censored::CensoredNat;
use ramlab_core::cycles::{
    cycle_report, frobenius_power_report, iterate_okpoly, CycleOptions, CyclesError,
    DEFAULT_DEGREE_CEILING, DEFAULT_EXACT_GCD_MAX_DEG,
};
use ramlab_core::ff::{ff_make, mult_order, FFElem, FieldSpec};
use ramlab_core::normal::{characterize_mr, iterative_residue, normalize, NormalError};
use ramlab_core::ram::{
    is_almost_minimally_ramified, is_minimally_ramified, lower_bound, ram_profile,
};
use ramlab_core::series::{Germ, Series};
use ramlab_core::valued::{bound_valuation, PadicScalar, ValuedError, ValuedScalar};

use crate::parse::{
    parse_expr, parse_ff_poly, parse_map, parse_modulus, parse_scalar, split_scalar_prefix,
    Backend, GermCtx, MapCtx, ScalarKind,
};
use crate::report::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Trunc,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Trunc => "trunc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Order,
    Invariants,
    Mr,
    Resit,
    Normalize,
    Classify,
    Bound,
    Cycles,
    Appendix,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Order => "order",
            CommandKind::Invariants => "invariants",
            CommandKind::Mr => "mr",
            CommandKind::Resit => "resit",
            CommandKind::Normalize => "normalize",
            CommandKind::Classify => "classify",
            CommandKind::Bound => "bound",
            CommandKind::Cycles => "cycles",
            CommandKind::Appendix => "appendix",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Request {
    pub command: CommandKind,
    pub p: Option<u64>,
    pub k: usize,
    pub modulus: Option<String>,
    pub germ: Option<String>,
    pub map: Option<String>,
    pub lambda: Option<String>,
    pub mu: Option<String>,
    pub q: Option<u64>,
    pub nmax: Option<u32>,
    pub trunc: Option<usize>,
    pub mode: Mode,
    pub output: OutputFormat,
    pub seed: u64,
    pub jobs: usize,
    pub degree_ceiling: Option<u64>,
    pub dump_iterate: Option<PathBuf>,
}

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or unparsable input text (exit 2).
    Usage(String),
    /// The computation ran but censoring blocked the verdict (exit 3).
    Indeterminate(String),
    /// A library cross-check failed; a bug, not bad input (exit 4).
    Internal(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Indeterminate(_) => 3,
            Failure::Internal(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Indeterminate(m) | Failure::Internal(m) => m,
        }
    }
}

pub struct Success {
    pub text: String,
    pub indeterminate: bool,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

// ---- shared construction steps ----

fn field_of(req: &Request) -> Result<Arc<FieldSpec>, Failure> {
    let p = req.p.ok_or_else(|| usage("--p is required"))?;
    let modulus: Option<Vec<i64>> = match &req.modulus {
        None => None,
        Some(text) => Some(
            parse_modulus(text).map_err(|e| usage(format!("parse error in --modulus {}", e)))?,
        ),
    };
    ff_make(p, req.k, modulus.as_deref())
        .map_err(|e| usage(format!("cannot build the field: {}", e)))
}

fn germ_of(req: &Request, field: &Arc<FieldSpec>) -> Result<Germ, Failure> {
    let text = req
        .germ
        .as_ref()
        .ok_or_else(|| usage("--germ is required for this command"))?;
    let coeffs = parse_ff_poly(text, field, &[])
        .map_err(|e| usage(format!("parse error in --germ {}", e)))?;
    let g = Germ::new(Series::from_coeffs(coeffs, true))
        .map_err(|e| usage(format!("--germ is not a germ: {}", e)))?;
    check_q(req, g.q())?;
    Ok(g)
}

/// `--q` is validation-only: it must match the computed order.
fn check_q(req: &Request, actual: u64) -> Result<(), Failure> {
    match req.q {
        Some(q) if q != actual => Err(usage(format!(
            "--q {} disagrees with the multiplier order {}; --q is validation-only",
            q, actual
        ))),
        _ => Ok(()),
    }
}

fn config_echo(req: &Request, nmax: Option<u32>, ceiling: Option<u64>) -> ConfigEcho {
    ConfigEcho {
        command: req.command.name().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        p: req.p.unwrap_or(0),
        k: req.k,
        modulus: req.modulus.clone(),
        germ: req.germ.clone(),
        map: req.map.clone(),
        lambda: req.lambda.clone(),
        mu: req.mu.clone(),
        q: req.q,
        nmax,
        trunc: req.trunc,
        mode: req.mode.name().to_string(),
        output: req.output.name().to_string(),
        seed: req.seed,
        jobs: req.jobs,
        degree_ceiling: ceiling,
    }
}

/// Largest precision with p^prec still in a machine word, capped at 40.
fn default_padic_prec(p: u64) -> u32 {
    let mut m: u64 = 1;
    let mut e = 0u32;
    while e < 40 {
        match m.checked_mul(p) {
            Some(nm) => {
                m = nm;
                e += 1;
            }
            None => break,
        }
    }
    e.max(1)
}

const DEFAULT_LAURENT_CUT: i64 = 32;

/// The scalar backend for a run: the `padic:`/`rat:` prefix of the lambda
/// text wins, otherwise `--mode` decides between exact rational functions
/// and cut-off Laurent data.
fn backend_of(req: &Request, field: &Arc<FieldSpec>, lambda_text: &str) -> Result<Backend, Failure> {
    let (kind, _, _) = split_scalar_prefix(lambda_text);
    Ok(match kind {
        ScalarKind::Padic => {
            let p = field.p();
            let prec = match req.trunc {
                Some(t) => {
                    let t = u32::try_from(t).map_err(|_| usage("--trunc is too large"))?;
                    PadicScalar::new(p, t, 0)
                        .map_err(|e| usage(format!("bad p-adic precision: {}", e)))?;
                    t
                }
                None => default_padic_prec(p),
            };
            Backend::Padic { p, prec }
        }
        ScalarKind::Rat => Backend::Rational {
            field: field.clone(),
        },
        ScalarKind::Plain => match req.mode {
            Mode::Exact => Backend::Rational {
                field: field.clone(),
            },
            Mode::Trunc => Backend::Laurent {
                field: field.clone(),
                cut: req.trunc.map(|t| t as i64).unwrap_or(DEFAULT_LAURENT_CUT),
            },
        },
    })
}

fn scalar_of(text: &str, backend: &Backend, flag: &str) -> Result<ValuedScalar, Failure> {
    parse_scalar(text, backend).map_err(|e| usage(format!("parse error in --{} {}", flag, e)))
}

fn classify_cycles_error(e: CyclesError) -> Failure {
    match e {
        CyclesError::Shape(m) => usage(format!("bad map shape: {}", m)),
        CyclesError::NonUnitMultiplier => {
            usage("the coefficient of z must have valuation 0")
        }
        CyclesError::DegreeCeiling { degree, ceiling } => Failure::Indeterminate(format!(
            "iterate degree {} exceeds the ceiling {}; lower --nmax or raise --degree-ceiling",
            degree, ceiling
        )),
        CyclesError::Valued(ValuedError::IndeterminateValuation) => Failure::Indeterminate(
            "a valuation is censored at this truncation; raise --trunc".to_string(),
        ),
        CyclesError::Valued(ValuedError::DegenerateLambda) => {
            usage("the multiplier is a root of unity: the cycle distance is infinite")
        }
        CyclesError::Valued(ValuedError::NotIntegral) => {
            usage("map coefficients must be integral (valuation >= 0)")
        }
        CyclesError::Valued(ValuedError::NonUnitLambda) => {
            usage("the multiplier must have valuation 0")
        }
        CyclesError::Valued(ValuedError::Overflow) => {
            usage("the requested level overflows; lower --nmax")
        }
        CyclesError::Internal(m) => {
            Failure::Internal(format!("internal invariant violated: {}", m))
        }
        other => Failure::Internal(format!("unexpected failure: {}", other)),
    }
}

// ---- commands ----

fn cmd_order(req: &Request) -> Result<OrderReport, Failure> {
    let field = field_of(req)?;
    let text = req
        .germ
        .as_ref()
        .ok_or_else(|| usage("--germ is required: a germ or a bare multiplier"))?;
    let coeffs = parse_ff_poly(text, &field, &[])
        .map_err(|e| usage(format!("parse error in --germ {}", e)))?;
    let gamma = if coeffs.len() == 1 {
        coeffs[0].clone()
    } else {
        if !coeffs[0].is_zero() {
            return Err(usage("a germ must have zero constant term"));
        }
        coeffs[1].clone()
    };
    let order = mult_order(&gamma)
        .map_err(|_| usage("the multiplier is zero; it has no multiplicative order"))?;
    check_q(req, order)?;
    Ok(OrderReport {
        config: config_echo(req, None, None),
        gamma: elem_str(&gamma),
        order,
        field_card: field.card(),
    })
}

fn cmd_invariants(req: &Request) -> Result<InvariantsReport, Failure> {
    let field = field_of(req)?;
    let g = germ_of(req, &field)?;
    let nmax = req.nmax.unwrap_or(2);
    let profile = ram_profile(&g, nmax, req.trunc)
        .map_err(|e| Failure::Internal(format!("profile failed: {}", e)))?;
    let rows = profile
        .entries
        .iter()
        .map(|(n, v)| ProfileRow {
            n: *n,
            bound: lower_bound(profile.q, profile.p, *n),
            index: cnat(v),
        })
        .collect();
    Ok(InvariantsReport {
        config: config_echo(req, Some(nmax), None),
        p: profile.p,
        k: field.k(),
        gamma: elem_str(&profile.gamma),
        q: profile.q,
        rows,
        sen: tribool_str(profile.sen_ok),
        lower_bound: tribool_str(profile.lower_bound_ok),
        keating: tribool_str(profile.keating_ok),
        verdict: profile.verdict.to_string(),
    })
}

fn cmd_mr(req: &Request) -> Result<MrReport, Failure> {
    let field = field_of(req)?;
    let g = germ_of(req, &field)?;
    let bound_path = is_minimally_ramified(&g)
        .map_err(|e| Failure::Internal(format!("bound path failed: {}", e)))?;
    let residue_path = characterize_mr(&g)
        .map_err(|e| Failure::Internal(format!("residue path failed: {}", e)))?;
    let agree = bound_path.verdict == residue_path.verdict;
    if !agree {
        return Err(Failure::Internal(format!(
            "the two minimality characterizations disagree (bound {}, residue {})",
            bound_path.verdict, residue_path.verdict
        )));
    }
    let almost_minimal = if g.p() == 2 {
        let amr = is_almost_minimally_ramified(&g)
            .map_err(|e| Failure::Internal(format!("amr check failed: {}", e)))?;
        Some(AmrJson {
            verdict: amr.verdict,
            rows: amr
                .witness
                .iter()
                .map(|(n, t, v)| MrWitnessRow {
                    n: *n,
                    target: *t,
                    index: cnat(v),
                })
                .collect(),
        })
    } else {
        None
    };
    Ok(MrReport {
        config: config_echo(req, None, None),
        p: g.p(),
        q: g.q(),
        gamma: elem_str(g.gamma()),
        minimal: bound_path.verdict,
        bound_path: bound_path
            .witness
            .iter()
            .map(|(n, t, v)| MrWitnessRow {
                n: *n,
                target: *t,
                index: cnat(v),
            })
            .collect(),
        residue_path: ResiduePathJson {
            verdict: residue_path.verdict,
            i0: cnat(&residue_path.i0),
            resit: residue_path.resit.as_ref().map(elem_str),
            reason: residue_path.reason.to_string(),
        },
        paths_agree: agree,
        almost_minimal,
    })
}

fn cmd_resit(req: &Request) -> Result<ResitReport, Failure> {
    let field = field_of(req)?;
    let g = germ_of(req, &field)?;
    let ch = characterize_mr(&g)
        .map_err(|e| Failure::Internal(format!("residue computation failed: {}", e)))?;
    let resit = match iterative_residue(&g) {
        Ok(r) => Some(r),
        Err(NormalError::ResitUndefined) => None,
        Err(e) => {
            return Err(Failure::Internal(format!(
                "residue computation failed: {}",
                e
            )))
        }
    };
    Ok(ResitReport {
        config: config_echo(req, None, None),
        q: g.q(),
        gamma: elem_str(g.gamma()),
        i0: cnat(&ch.i0),
        defined: resit.is_some(),
        resit: resit.as_ref().map(elem_str),
    })
}

fn cmd_normalize(req: &Request) -> Result<NormalizeReport, Failure> {
    let field = field_of(req)?;
    let g = germ_of(req, &field)?;
    let degree = req.trunc.unwrap_or(2 * g.q() as usize + 1);
    let nf = normalize(&g, degree).map_err(|e| match e {
        NormalError::DegreeTooSmall { need, got } => usage(format!(
            "--trunc {} is below the residue window; need at least {}",
            got, need
        )),
        e => Failure::Internal(format!("normalization failed: {}", e)),
    })?;
    Ok(NormalizeReport {
        config: config_echo(req, None, None),
        q: g.q(),
        degree,
        a1: elem_str(&nf.a1),
        a2: elem_str(&nf.a2),
        resit: nf.resit.as_ref().map(elem_str),
        ghat: series_str(&nf.ghat),
        ghat_coeffs: nf.ghat.coeffs().iter().map(elem_str).collect(),
        conjugator: series_str(&nf.h),
        trace: nf
            .trace
            .iter()
            .map(|(l, a)| TraceRow {
                exponent: *l,
                alpha: elem_str(a),
            })
            .collect(),
    })
}

const CLASSIFY_TEMPLATE: &str = "g*z+z^2";

fn classify_row(
    template: &crate::parse::Ast,
    field: &Arc<FieldSpec>,
    gamma: &FFElem,
) -> Result<ClassifyRow, Failure> {
    let bindings: Vec<(&str, FFElem)> = vec![("g", gamma.clone()), ("gamma", gamma.clone())];
    let ctx = GermCtx { field, bindings: &bindings };
    let coeffs = crate::parse::eval_parsed_ff_poly(template, &ctx)
        .map_err(|e| usage(format!("template evaluation failed {}", e)))?;
    let germ = match Germ::new(Series::from_coeffs(coeffs, true)) {
        Ok(g) => g,
        Err(_) => {
            return Ok(ClassifyRow {
                gamma: elem_str(gamma),
                order: mult_order(gamma).unwrap_or(0),
                i0: cnat(&CensoredNat::Infinite),
                minimal: false,
                resit: None,
                reason: "template is not a germ at this multiplier".to_string(),
            })
        }
    };
    let bound_path = is_minimally_ramified(&germ)
        .map_err(|e| Failure::Internal(format!("bound path failed: {}", e)))?;
    let residue_path = characterize_mr(&germ)
        .map_err(|e| Failure::Internal(format!("residue path failed: {}", e)))?;
    if bound_path.verdict != residue_path.verdict {
        return Err(Failure::Internal(format!(
            "characterizations disagree at gamma = {}",
            elem_str(gamma)
        )));
    }
    Ok(ClassifyRow {
        gamma: elem_str(gamma),
        order: germ.q(),
        i0: cnat(&residue_path.i0),
        minimal: bound_path.verdict,
        resit: residue_path.resit.as_ref().map(elem_str),
        reason: residue_path.reason.to_string(),
    })
}

fn cmd_classify(req: &Request) -> Result<ClassifyReport, Failure> {
    let field = field_of(req)?;
    let template_text = req.germ.clone().unwrap_or_else(|| CLASSIFY_TEMPLATE.to_string());
    let template = parse_expr(&template_text)
        .map_err(|e| usage(format!("parse error in --germ {}", e)))?;
    let gammas: Vec<FFElem> = field.elements().filter(|x| !x.is_zero()).collect();
    let jobs = req.jobs.max(1).min(gammas.len().max(1));

    let mut slots: Vec<Option<Result<ClassifyRow, Failure>>> = Vec::new();
    slots.resize_with(gammas.len(), || None);
    if jobs <= 1 {
        for (slot, gamma) in slots.iter_mut().zip(gammas.iter()) {
            *slot = Some(classify_row(&template, &field, gamma));
        }
    } else {
        let chunk = gammas.len().div_ceil(jobs);
        std::thread::scope(|scope| {
            for (out, input) in slots.chunks_mut(chunk).zip(gammas.chunks(chunk)) {
                let template = &template;
                let field = &field;
                scope.spawn(move || {
                    for (slot, gamma) in out.iter_mut().zip(input.iter()) {
                        *slot = Some(classify_row(template, field, gamma));
                    }
                });
            }
        });
    }

    let mut rows = Vec::with_capacity(slots.len());
    for slot in slots {
        rows.push(slot.expect("every row computed")?);
    }
    Ok(ClassifyReport {
        config: config_echo(req, None, None),
        template: template_text,
        rows,
    })
}

/// Multiplicative order of the residue of a unit scalar; this is the q the
/// level structure runs over.
fn residue_order(lambda: &ValuedScalar) -> Result<(FFElem, u64), Failure> {
    let rf = lambda
        .residue_field()
        .map_err(|e| Failure::Internal(format!("residue field failed: {}", e)))?;
    let res = lambda
        .residue(&rf)
        .map_err(|_| usage("the multiplier must be integral (valuation >= 0)"))?;
    let q = mult_order(&res).map_err(|_| usage("the multiplier reduces to zero"))?;
    Ok((res, q))
}

fn cmd_bound(req: &Request) -> Result<BoundReport, Failure> {
    let field = field_of(req)?;
    let lambda_text = req
        .lambda
        .as_ref()
        .ok_or_else(|| usage("--lambda is required for this command"))?;
    let backend = backend_of(req, &field, lambda_text)?;
    let lambda = scalar_of(lambda_text, &backend, "lambda")?;
    let (_, q) = residue_order(&lambda)?;
    check_q(req, q)?;
    let nmax = req.nmax.unwrap_or(4);
    let mut rows = Vec::new();
    for n in 0..=nmax {
        let v = bound_valuation(&lambda, q, n).map_err(|e| match e {
            ValuedError::DegenerateLambda => usage(
                "the multiplier is a root of unity: the distance valuation is infinite",
            ),
            ValuedError::IndeterminateValuation => Failure::Indeterminate(format!(
                "the valuation at level {} is censored; raise --trunc",
                n
            )),
            ValuedError::NonUnitLambda => usage("the multiplier must have valuation 0"),
            e => Failure::Internal(format!("bound computation failed: {}", e)),
        })?;
        let period = q * u64::pow(field.p(), n);
        rows.push(BoundRow {
            n,
            period,
            valuation: rat_json(v),
            display: rat_str(v),
        });
    }
    Ok(BoundReport {
        config: config_echo(req, Some(nmax), None),
        backend: backend.name().to_string(),
        q,
        rows,
    })
}

/// Polygon work on the multiplicity-law reports caps out earlier than on
/// cycle reports: coefficient degrees grow with the iterate degree, and the
/// reduction-side indices (the law itself) never need the big iterates.
pub const APPENDIX_DEGREE_CEILING: u64 = 2_000;

struct MapInputs {
    map: ramlab_core::cycles::OKPoly,
    backend: Backend,
    opts: CycleOptions,
    nmax: u32,
}

fn map_inputs(
    req: &Request,
    field: &Arc<FieldSpec>,
    default_nmax: u32,
    default_ceiling: u64,
) -> Result<MapInputs, Failure> {
    let lambda_text = req
        .lambda
        .as_ref()
        .ok_or_else(|| usage("--lambda is required for this command"))?;
    let backend = backend_of(req, field, lambda_text)?;
    let lambda = scalar_of(lambda_text, &backend, "lambda")?;
    let mu = match &req.mu {
        None => None,
        Some(t) => Some(scalar_of(t, &backend, "mu")?),
    };
    let map_text = req
        .map
        .as_ref()
        .ok_or_else(|| usage("--map is required for this command"))?;
    let ctx = MapCtx {
        backend: &backend,
        lambda: Some(&lambda),
        mu: mu.as_ref(),
    };
    let map = parse_map(map_text, &ctx)
        .map_err(|e| usage(format!("parse error in --map {}", e)))?;
    let nmax = req.nmax.unwrap_or(default_nmax);
    let opts = CycleOptions {
        nmax,
        degree_ceiling: req.degree_ceiling.unwrap_or(default_ceiling),
        exact_gcd_max_deg: DEFAULT_EXACT_GCD_MAX_DEG,
        seed: req.seed,
    };
    Ok(MapInputs {
        map,
        backend,
        opts,
        nmax,
    })
}

fn cmd_cycles(req: &Request) -> Result<CyclesReport, Failure> {
    let field = field_of(req)?;
    let inputs = map_inputs(req, &field, 2, DEFAULT_DEGREE_CEILING)?;

    // the multiplier is the z coefficient of the parsed map
    if inputs.map.coeffs().len() >= 2 {
        if let Ok((_, q)) = residue_order(&inputs.map.coeff(1)) {
            check_q(req, q)?;
        }
    }

    let rep = cycle_report(&inputs.map, &inputs.opts).map_err(classify_cycles_error)?;

    if let Some(path) = &req.dump_iterate {
        dump_iterate(&inputs, rep.q, path)?;
    }

    let levels = rep
        .levels
        .iter()
        .map(|l| LevelJson {
            n: l.n,
            period: l.period,
            index: cnat(&l.index),
            increment: l.increment.as_ref().map(cnat),
            target_increment: l.target_increment,
            bound_valuation: l.bound_val.map(rat_json),
            polygon: l.polygon.as_ref().map(polygon_json),
            new_mass: l
                .new_mass
                .iter()
                .map(|&(v, c)| MassJson {
                    valuation: rat_json(v),
                    count: c,
                })
                .collect(),
            simplicity: simplicity_json(&l.simplicity),
            verdict: l.verdict.to_string(),
            notes: l.notes.clone(),
        })
        .collect();
    Ok(CyclesReport {
        config: config_echo(req, Some(inputs.nmax), Some(inputs.opts.degree_ceiling)),
        backend: inputs.backend.name().to_string(),
        p: rep.p,
        q: rep.q,
        degenerate_linear: rep.degenerate_linear,
        reduction: poly_str(&rep.reduction, "z"),
        reduction_profile: rep
            .reduction_profile
            .iter()
            .map(|(n, v)| ProfileRow {
                n: *n,
                bound: lower_bound(rep.q, rep.p, *n),
                index: cnat(v),
            })
            .collect(),
        levels,
        warnings: rep.warnings.clone(),
    })
}

fn dump_iterate(inputs: &MapInputs, q: u64, path: &std::path::Path) -> Result<(), Failure> {
    let p = inputs_p(inputs);
    let period = (0..inputs.nmax).fold(q, |acc, _| acc.saturating_mul(p));
    let iter = iterate_okpoly(&inputs.map, period, inputs.opts.degree_ceiling)
        .map_err(classify_cycles_error)?;
    let f = iter.sub_z();
    let dump = IterateDump {
        n: inputs.nmax,
        period,
        degree: f.deg(),
        coeffs: f.coeffs().iter().map(scalar_str).collect(),
        valuations: f.vals().iter().map(censored_val_str).collect(),
    };
    let body = serde_json::to_string_pretty(&dump).expect("dump serializes");
    std::fs::write(path, body + "\n")
        .map_err(|e| usage(format!("cannot write --dump-iterate file: {}", e)))?;
    Ok(())
}

fn inputs_p(inputs: &MapInputs) -> u64 {
    match &inputs.backend {
        Backend::Rational { field } | Backend::Laurent { field, .. } => field.p(),
        Backend::Padic { p, .. } => *p,
    }
}

fn cmd_appendix(req: &Request) -> Result<AppendixReport, Failure> {
    let field = field_of(req)?;
    let inputs = map_inputs(req, &field, 3, APPENDIX_DEGREE_CEILING)?;
    let lambda_text = req.lambda.as_ref().expect("checked in map_inputs");
    let lambda = scalar_of(lambda_text, &inputs.backend, "lambda")?;
    let (_, q) = residue_order(&lambda)?;
    check_q(req, q)?;

    let rep = frobenius_power_report(&inputs.map, &lambda, &inputs.opts)
        .map_err(classify_cycles_error)?;
    Ok(AppendixReport {
        config: config_echo(req, Some(inputs.nmax), Some(inputs.opts.degree_ceiling)),
        backend: inputs.backend.name().to_string(),
        p: rep.p,
        q: rep.q,
        i0: cnat(&rep.i0),
        rows: rep
            .rows
            .iter()
            .map(|r| AppendixRow {
                n: r.n,
                period: rep.q * u64::pow(rep.p, r.n),
                index: cnat(&r.index),
                expected: r.expected,
                matches: r.matches,
                mass_scaled: r.mass_scaled,
                multiple_certified: r.multiple_certified,
            })
            .collect(),
        warnings: rep.warnings.clone(),
    })
}

// ---- entry ----

pub fn execute(req: &Request) -> Result<Success, Failure> {
    let out = req.output;
    macro_rules! done {
        ($rep:expr) => {{
            let rep = $rep?;
            Ok(Success {
                indeterminate: rep.indeterminate(),
                text: rep.render(out),
            })
        }};
    }
    match req.command {
        CommandKind::Order => done!(cmd_order(req)),
        CommandKind::Invariants => done!(cmd_invariants(req)),
        CommandKind::Mr => done!(cmd_mr(req)),
        CommandKind::Resit => done!(cmd_resit(req)),
        CommandKind::Normalize => done!(cmd_normalize(req)),
        CommandKind::Classify => done!(cmd_classify(req)),
        CommandKind::Bound => done!(cmd_bound(req)),
        CommandKind::Cycles => done!(cmd_cycles(req)),
        CommandKind::Appendix => done!(cmd_appendix(req)),
    }
}
