//! Report structures and the three output renderings (json, tsv, pretty).
//!
//! JSON is the machine contract: field order follows declaration order, so
//! identical configs give byte-identical documents. TSV is one fixed header
//! plus data rows, made for diffing sweep outputs. Pretty is for humans.

use serde::Serialize;

use ramlab_core::censored::{CensoredNat, Rat, TriBool};
use ramlab_core::cycles::Simplicity;
use ramlab_core::ff::FFElem;
use ramlab_core::polygon::NewtonPolygon;
use ramlab_core::series::Series;
use ramlab_core::valued::{CensoredVal, FPoly, LaurentScalar, PadicScalar, RatFun, ValuedScalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Tsv,
    Pretty,
}

impl OutputFormat {
    pub fn name(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Tsv => "tsv",
            OutputFormat::Pretty => "pretty",
        }
    }
}

/// Every report embeds the run configuration that produced it.
#[derive(Serialize, Clone, Debug)]
pub struct ConfigEcho {
    pub command: String,
    pub version: String,
    pub p: u64,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub germ: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nmax: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trunc: Option<usize>,
    pub mode: String,
    pub output: String,
    pub seed: u64,
    pub jobs: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree_ceiling: Option<u64>,
}

// ---- printers for core values ----

/// Canonical element string: plain integer in a prime field, polynomial in
/// x (descending powers) in an extension.
pub fn elem_str(v: &FFElem) -> String {
    if v.spec().k() == 1 {
        return v.coords()[0].to_string();
    }
    let mut terms = Vec::new();
    for (i, &c) in v.coords().iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        terms.push(match (i, c) {
            (0, c) => format!("{}", c),
            (1, 1) => "x".to_string(),
            (1, c) => format!("{}*x", c),
            (i, 1) => format!("x^{}", i),
            (i, c) => format!("{}*x^{}", c, i),
        });
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    }
}

fn coeff_term(c: &FFElem, var: &str, i: usize) -> String {
    let cs = elem_str(c);
    let cs = if cs.contains('+') || cs.contains('-') {
        format!("({})", cs)
    } else {
        cs
    };
    match (i, cs.as_str()) {
        (0, _) => cs,
        (1, "1") => var.to_string(),
        (1, _) => format!("{}*{}", cs, var),
        (i, "1") => format!("{}^{}", var, i),
        (i, _) => format!("{}*{}^{}", cs, var, i),
    }
}

pub fn poly_str(coeffs: &[FFElem], var: &str) -> String {
    let mut terms = Vec::new();
    for (i, c) in coeffs.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        terms.push(coeff_term(c, var, i));
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    }
}

/// Ascending-power series string over z; censored tails get an O-term.
pub fn series_str(s: &Series<FFElem>) -> String {
    let body = poly_str(s.coeffs(), "z");
    if s.is_exact() {
        body
    } else {
        format!("{}+O(z^{})", body, s.trunc())
    }
}

pub fn fpoly_str(p: &FPoly) -> String {
    poly_str(p.coeffs(), "t")
}

pub fn ratfun_str(r: &RatFun) -> String {
    if r.den_is_one() {
        fpoly_str(r.num())
    } else {
        format!("({})/({})", fpoly_str(r.num()), fpoly_str(r.den()))
    }
}

pub fn laurent_str(l: &LaurentScalar) -> String {
    let mut terms = Vec::new();
    for (j, c) in l.window().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let e = l.lo() + j as i64;
        let cs = elem_str(c);
        let cs = if cs.contains('+') {
            format!("({})", cs)
        } else {
            cs
        };
        terms.push(match (e, cs.as_str()) {
            (0, _) => cs,
            (1, "1") => "t".to_string(),
            (1, _) => format!("{}*t", cs),
            (e, "1") => format!("t^{}", e),
            (e, _) => format!("{}*t^{}", cs, e),
        });
    }
    let body = if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    };
    match l.cut() {
        Some(k) => format!("{}+O(t^{})", body, k),
        None => body,
    }
}

pub fn padic_str(x: &PadicScalar) -> String {
    format!("{}+O({}^{})", x.value(), x.p(), x.prec())
}

pub fn scalar_str(s: &ValuedScalar) -> String {
    match s {
        ValuedScalar::Rational(r) => ratfun_str(r),
        ValuedScalar::Laurent(l) => laurent_str(l),
        ValuedScalar::Padic(x) => padic_str(x),
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct CNat {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<u64>,
}

pub fn cnat(v: &CensoredNat) -> CNat {
    match v {
        CensoredNat::Exact(x) => CNat {
            kind: "exact",
            value: Some(*x),
        },
        CensoredNat::AtLeast(x) => CNat {
            kind: "at_least",
            value: Some(*x),
        },
        CensoredNat::Infinite => CNat {
            kind: "infinite",
            value: None,
        },
    }
}

pub fn cnat_str(v: &CensoredNat) -> String {
    match v {
        CensoredNat::Exact(x) => x.to_string(),
        CensoredNat::AtLeast(x) => format!(">={}", x),
        CensoredNat::Infinite => "inf".to_string(),
    }
}

pub fn tribool_str(v: TriBool) -> &'static str {
    match v {
        TriBool::True => "true",
        TriBool::False => "false",
        TriBool::Indeterminate => "indeterminate",
    }
}

#[derive(Serialize, Clone, Copy, Debug)]
pub struct RatJson {
    pub num: i64,
    pub den: i64,
}

pub fn rat_json(r: Rat) -> RatJson {
    RatJson {
        num: *r.numer(),
        den: *r.denom(),
    }
}

pub fn rat_str(r: Rat) -> String {
    if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Serialize, Clone, Debug)]
pub struct SegJson {
    pub slope_num: i64,
    pub slope_den: i64,
    pub length: u64,
}

#[derive(Serialize, Clone, Debug)]
pub struct PolygonJson {
    pub source_degree: u64,
    pub z_order: u64,
    pub positive_mass: u64,
    pub segments: Vec<SegJson>,
}

pub fn polygon_json(p: &NewtonPolygon) -> PolygonJson {
    PolygonJson {
        source_degree: p.source_degree(),
        z_order: p.z_order(),
        positive_mass: p.positive_mass(),
        segments: p
            .segments()
            .iter()
            .map(|s| SegJson {
                slope_num: *s.slope.numer(),
                slope_den: *s.slope.denom(),
                length: s.len,
            })
            .collect(),
    }
}

pub fn polygon_str(p: &NewtonPolygon) -> String {
    let segs: Vec<String> = p
        .segments()
        .iter()
        .map(|s| format!("({}, {})", rat_str(s.slope), s.len))
        .collect();
    format!("z^{} * [{}]", p.z_order(), segs.join(" "))
}

#[derive(Serialize, Clone, Debug)]
pub struct SimplicityJson {
    pub status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<&'static str>,
}

pub fn simplicity_json(s: &Simplicity) -> SimplicityJson {
    match s {
        Simplicity::Simple(tag) => SimplicityJson {
            status: "simple",
            certificate: Some(tag),
        },
        Simplicity::Multiple(tag) => SimplicityJson {
            status: "multiple",
            certificate: Some(tag),
        },
        Simplicity::Unknown => SimplicityJson {
            status: "unknown",
            certificate: None,
        },
        Simplicity::Unchecked => SimplicityJson {
            status: "unchecked",
            certificate: None,
        },
    }
}

pub fn censored_val_str(v: &CensoredVal) -> String {
    match v {
        CensoredVal::Exact(x) => x.to_string(),
        CensoredVal::AtLeast(x) => format!(">={}", x),
        CensoredVal::InfiniteZero => "inf".to_string(),
    }
}

// ---- per-command reports ----

pub trait Report: Serialize {
    fn tsv(&self) -> String;
    fn pretty(&self) -> String;
    /// Whether the run's primary verdict stayed undecided (exit code 3).
    fn indeterminate(&self) -> bool {
        false
    }

    fn render(&self, out: OutputFormat) -> String {
        match out {
            OutputFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("report serializes");
                s.push('\n');
                s
            }
            OutputFormat::Tsv => self.tsv(),
            OutputFormat::Pretty => self.pretty(),
        }
    }
}

fn tsv_lines(header: &str, rows: Vec<String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    out
}

fn opt_str<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_else(|| "-".to_string())
}

#[derive(Serialize, Debug)]
pub struct OrderReport {
    pub config: ConfigEcho,
    pub gamma: String,
    pub order: u64,
    pub field_card: u64,
}

impl Report for OrderReport {
    fn tsv(&self) -> String {
        tsv_lines(
            "gamma\torder\tcard",
            vec![format!("{}\t{}\t{}", self.gamma, self.order, self.field_card)],
        )
    }

    fn pretty(&self) -> String {
        format!(
            "multiplier {} over a field of {} elements\nmultiplicative order: {}\n",
            self.gamma, self.field_card, self.order
        )
    }
}

#[derive(Serialize, Debug)]
pub struct ProfileRow {
    pub n: u32,
    pub bound: u64,
    pub index: CNat,
}

#[derive(Serialize, Debug)]
pub struct InvariantsReport {
    pub config: ConfigEcho,
    pub p: u64,
    pub k: usize,
    pub gamma: String,
    pub q: u64,
    pub rows: Vec<ProfileRow>,
    pub sen: &'static str,
    pub lower_bound: &'static str,
    pub keating: &'static str,
    pub verdict: String,
}

impl Report for InvariantsReport {
    fn tsv(&self) -> String {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{}\t{}\t{}\t{}",
                    r.n,
                    r.bound,
                    r.index.kind,
                    opt_str(&r.index.value)
                )
            })
            .collect();
        tsv_lines("n\tbound\tkind\tindex", rows)
    }

    fn pretty(&self) -> String {
        let mut s = format!(
            "germ over F_{}^{} with multiplier {} (order q = {})\n\n  n   bound   index\n",
            self.p, self.k, self.gamma, self.q
        );
        for r in &self.rows {
            let shown = match (r.index.kind, r.index.value) {
                ("exact", Some(v)) => v.to_string(),
                ("at_least", Some(v)) => format!(">={}", v),
                _ => "inf".to_string(),
            };
            s.push_str(&format!("  {:<3} {:<7} {}\n", r.n, r.bound, shown));
        }
        s.push_str(&format!(
            "\nsen: {}   lower bound: {}   keating: {}\nverdict: {}\n",
            self.sen, self.lower_bound, self.keating, self.verdict
        ));
        s
    }

    fn indeterminate(&self) -> bool {
        self.verdict == "Indeterminate"
    }
}

#[derive(Serialize, Debug)]
pub struct MrWitnessRow {
    pub n: u32,
    pub target: u64,
    pub index: CNat,
}

#[derive(Serialize, Debug)]
pub struct ResiduePathJson {
    pub verdict: bool,
    pub i0: CNat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resit: Option<String>,
    pub reason: String,
}

#[derive(Serialize, Debug)]
pub struct AmrJson {
    pub verdict: bool,
    pub rows: Vec<MrWitnessRow>,
}

#[derive(Serialize, Debug)]
pub struct MrReport {
    pub config: ConfigEcho,
    pub p: u64,
    pub q: u64,
    pub gamma: String,
    pub minimal: bool,
    pub bound_path: Vec<MrWitnessRow>,
    pub residue_path: ResiduePathJson,
    pub paths_agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub almost_minimal: Option<AmrJson>,
}

impl Report for MrReport {
    fn tsv(&self) -> String {
        tsv_lines(
            "gamma\tq\tminimal\tresit\treason\tpaths_agree",
            vec![format!(
                "{}\t{}\t{}\t{}\t{}\t{}",
                self.gamma,
                self.q,
                self.minimal,
                opt_str(&self.residue_path.resit),
                self.residue_path.reason,
                self.paths_agree
            )],
        )
    }

    fn pretty(&self) -> String {
        let mut s = format!(
            "multiplier {} of order q = {} over characteristic {}\nminimally ramified: {}\n\nbound path (index vs q(p^(n+1)-1)/(p-1)):\n",
            self.gamma, self.q, self.p, self.minimal
        );
        for r in &self.bound_path {
            s.push_str(&format!(
                "  n={}  target {:<6} got {}\n",
                r.n,
                r.target,
                match (r.index.kind, r.index.value) {
                    ("exact", Some(v)) => v.to_string(),
                    ("at_least", Some(v)) => format!(">={}", v),
                    _ => "inf".to_string(),
                }
            ));
        }
        s.push_str(&format!(
            "\nresidue path: verdict {} ({}), resit {}\npaths agree: {}\n",
            self.residue_path.verdict,
            self.residue_path.reason,
            opt_str(&self.residue_path.resit),
            self.paths_agree
        ));
        if let Some(amr) = &self.almost_minimal {
            s.push_str(&format!("almost minimally ramified: {}\n", amr.verdict));
        }
        s
    }
}

#[derive(Serialize, Debug)]
pub struct ResitReport {
    pub config: ConfigEcho,
    pub q: u64,
    pub gamma: String,
    pub i0: CNat,
    pub defined: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resit: Option<String>,
}

impl Report for ResitReport {
    fn tsv(&self) -> String {
        tsv_lines(
            "gamma\tq\tdefined\tresit",
            vec![format!(
                "{}\t{}\t{}\t{}",
                self.gamma,
                self.q,
                self.defined,
                opt_str(&self.resit)
            )],
        )
    }

    fn pretty(&self) -> String {
        match &self.resit {
            Some(r) => format!(
                "iterative residue of the q = {} germ: {}\n",
                self.q, r
            ),
            None => format!(
                "iterative residue undefined: a_1 = 0, so i_0 exceeds q = {}\n",
                self.q
            ),
        }
    }
}

#[derive(Serialize, Debug)]
pub struct TraceRow {
    pub exponent: u64,
    pub alpha: String,
}

#[derive(Serialize, Debug)]
pub struct NormalizeReport {
    pub config: ConfigEcho,
    pub q: u64,
    pub degree: usize,
    pub a1: String,
    pub a2: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resit: Option<String>,
    pub ghat: String,
    pub ghat_coeffs: Vec<String>,
    pub conjugator: String,
    pub trace: Vec<TraceRow>,
}

impl Report for NormalizeReport {
    fn tsv(&self) -> String {
        let mut rows = vec![
            format!("q\t{}", self.q),
            format!("degree\t{}", self.degree),
            format!("a1\t{}", self.a1),
            format!("a2\t{}", self.a2),
            format!("resit\t{}", opt_str(&self.resit)),
            format!("ghat\t{}", self.ghat),
            format!("conjugator\t{}", self.conjugator),
        ];
        for t in &self.trace {
            rows.push(format!("step_l_{}\t{}", t.exponent, t.alpha));
        }
        tsv_lines("key\tvalue", rows)
    }

    fn pretty(&self) -> String {
        format!(
            "normal form to degree {} (q = {}):\n  ghat = {}\n  a1 = {}, a2 = {}\n  resit = {}\n  conjugator h = {}\n  nontrivial steps: {}\n",
            self.degree,
            self.q,
            self.ghat,
            self.a1,
            self.a2,
            opt_str(&self.resit),
            self.conjugator,
            self.trace.len()
        )
    }
}

#[derive(Serialize, Debug)]
pub struct ClassifyRow {
    pub gamma: String,
    pub order: u64,
    pub i0: CNat,
    pub minimal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resit: Option<String>,
    pub reason: String,
}

#[derive(Serialize, Debug)]
pub struct ClassifyReport {
    pub config: ConfigEcho,
    pub template: String,
    pub rows: Vec<ClassifyRow>,
}

impl Report for ClassifyReport {
    fn tsv(&self) -> String {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{}\t{}\t{}\t{}\t{}\t{}",
                    r.gamma,
                    r.order,
                    cnat_cell(&r.i0),
                    r.minimal,
                    opt_str(&r.resit),
                    r.reason
                )
            })
            .collect();
        tsv_lines("gamma\torder\ti0\tminimal\tresit\treason", rows)
    }

    fn pretty(&self) -> String {
        let mut s = format!(
            "classification of {} over every nonzero multiplier\n\n  gamma      order  i0     minimal  resit\n",
            self.template
        );
        for r in &self.rows {
            s.push_str(&format!(
                "  {:<10} {:<6} {:<6} {:<8} {}\n",
                r.gamma,
                r.order,
                cnat_cell(&r.i0),
                r.minimal,
                opt_str(&r.resit)
            ));
        }
        s
    }
}

fn cnat_cell(v: &CNat) -> String {
    match (v.kind, v.value) {
        ("exact", Some(x)) => x.to_string(),
        ("at_least", Some(x)) => format!(">={}", x),
        _ => "inf".to_string(),
    }
}

#[derive(Serialize, Debug)]
pub struct BoundRow {
    pub n: u32,
    pub period: u64,
    pub valuation: RatJson,
    pub display: String,
}

#[derive(Serialize, Debug)]
pub struct BoundReport {
    pub config: ConfigEcho,
    pub backend: String,
    pub q: u64,
    pub rows: Vec<BoundRow>,
}

impl Report for BoundReport {
    fn tsv(&self) -> String {
        let rows = self
            .rows
            .iter()
            .map(|r| format!("{}\t{}\t{}", r.n, r.period, r.display))
            .collect();
        tsv_lines("n\tperiod\tbound_valuation", rows)
    }

    fn pretty(&self) -> String {
        let mut s = format!(
            "optimal-distance valuation per level (q = {}, {} backend)\n\n  n   period   valuation\n",
            self.q, self.backend
        );
        for r in &self.rows {
            s.push_str(&format!("  {:<3} {:<8} {}\n", r.n, r.period, r.display));
        }
        s
    }
}

#[derive(Serialize, Debug)]
pub struct MassJson {
    pub valuation: RatJson,
    pub count: u64,
}

#[derive(Serialize, Debug)]
pub struct LevelJson {
    pub n: u32,
    pub period: u64,
    pub index: CNat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub increment: Option<CNat>,
    pub target_increment: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_valuation: Option<RatJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub polygon: Option<PolygonJson>,
    pub new_mass: Vec<MassJson>,
    pub simplicity: SimplicityJson,
    pub verdict: String,
    pub notes: Vec<String>,
}

#[derive(Serialize, Debug)]
pub struct CyclesReport {
    pub config: ConfigEcho,
    pub backend: String,
    pub p: u64,
    pub q: u64,
    pub degenerate_linear: bool,
    pub reduction: String,
    pub reduction_profile: Vec<ProfileRow>,
    pub levels: Vec<LevelJson>,
    pub warnings: Vec<String>,
}

fn mass_cell(m: &[MassJson]) -> String {
    if m.is_empty() {
        return "-".to_string();
    }
    m.iter()
        .map(|x| {
            if x.valuation.den == 1 {
                format!("{}:{}", x.valuation.num, x.count)
            } else {
                format!("{}/{}:{}", x.valuation.num, x.valuation.den, x.count)
            }
        })
        .collect::<Vec<_>>()
        .join(";")
}

impl Report for CyclesReport {
    fn tsv(&self) -> String {
        let rows = self
            .levels
            .iter()
            .map(|l| {
                let bound = l
                    .bound_valuation
                    .map(|b| {
                        if b.den == 1 {
                            b.num.to_string()
                        } else {
                            format!("{}/{}", b.num, b.den)
                        }
                    })
                    .unwrap_or_else(|| "-".to_string());
                format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    l.n,
                    l.period,
                    cnat_cell(&l.index),
                    l.increment.as_ref().map(cnat_cell).unwrap_or_else(|| "-".into()),
                    l.target_increment,
                    bound,
                    mass_cell(&l.new_mass),
                    l.simplicity.status,
                    l.verdict
                )
            })
            .collect();
        tsv_lines(
            "n\tperiod\tindex\tincrement\ttarget\tbound\tnew_mass\tsimplicity\tverdict",
            rows,
        )
    }

    fn pretty(&self) -> String {
        let mut s = format!(
            "cycle optimality over the {} backend (p = {}, q = {})\nreduction: {}\n",
            self.backend, self.p, self.q, self.reduction
        );
        if self.degenerate_linear {
            s.push_str("the reduction is linear: every level is degenerate\n");
            return s;
        }
        s.push_str("\n  n  period  index  incr   target  bound  new mass        simplicity           verdict\n");
        for l in &self.levels {
            let bound = l
                .bound_valuation
                .map(|b| {
                    if b.den == 1 {
                        b.num.to_string()
                    } else {
                        format!("{}/{}", b.num, b.den)
                    }
                })
                .unwrap_or_else(|| "-".to_string());
            let simp = match l.simplicity.certificate {
                Some(c) => format!("{} ({})", l.simplicity.status, c),
                None => l.simplicity.status.to_string(),
            };
            s.push_str(&format!(
                "  {:<2} {:<7} {:<6} {:<6} {:<7} {:<6} {:<15} {:<20} {}\n",
                l.n,
                l.period,
                cnat_cell(&l.index),
                l.increment.as_ref().map(cnat_cell).unwrap_or_else(|| "-".into()),
                l.target_increment,
                bound,
                mass_cell(&l.new_mass),
                simp,
                l.verdict
            ));
        }
        if !self.warnings.is_empty() {
            s.push_str("\nwarnings:\n");
            for w in &self.warnings {
                s.push_str(&format!("  - {}\n", w));
            }
        }
        s
    }

    fn indeterminate(&self) -> bool {
        self.levels.iter().any(|l| l.verdict == "indeterminate")
    }
}

#[derive(Serialize, Debug)]
pub struct AppendixRow {
    pub n: u32,
    pub period: u64,
    pub index: CNat,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_scaled: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiple_certified: Option<bool>,
}

#[derive(Serialize, Debug)]
pub struct AppendixReport {
    pub config: ConfigEcho,
    pub backend: String,
    pub p: u64,
    pub q: u64,
    pub i0: CNat,
    pub rows: Vec<AppendixRow>,
    pub warnings: Vec<String>,
}

impl Report for AppendixReport {
    fn tsv(&self) -> String {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                format!(
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    r.n,
                    r.period,
                    cnat_cell(&r.index),
                    opt_str(&r.expected),
                    opt_str(&r.matches),
                    opt_str(&r.mass_scaled),
                    opt_str(&r.multiple_certified)
                )
            })
            .collect();
        tsv_lines(
            "n\tperiod\tindex\texpected\tmatches\tmass_scaled\tmultiple_certified",
            rows,
        )
    }

    fn pretty(&self) -> String {
        let mut s = format!(
            "power-of-Frobenius family (p = {}, q = {}), i_0 = {}\nexpected law: i_n = p^n * i_0\n\n  n   period   i_n     expected  matches  mass_scaled  multiple\n",
            self.p,
            self.q,
            cnat_cell(&self.i0)
        );
        for r in &self.rows {
            s.push_str(&format!(
                "  {:<3} {:<8} {:<7} {:<9} {:<8} {:<12} {}\n",
                r.n,
                r.period,
                cnat_cell(&r.index),
                opt_str(&r.expected),
                opt_str(&r.matches),
                opt_str(&r.mass_scaled),
                opt_str(&r.multiple_certified)
            ));
        }
        if !self.warnings.is_empty() {
            s.push_str("\nwarnings:\n");
            for w in &self.warnings {
                s.push_str(&format!("  - {}\n", w));
            }
        }
        s
    }

    fn indeterminate(&self) -> bool {
        self.rows.iter().any(|r| r.matches.is_none())
    }
}

/// Payload for `--dump-iterate`: the full coefficient array of
/// `F = P^(q p^nmax)(z) - z` for external auditing.
#[derive(Serialize, Debug)]
pub struct IterateDump {
    pub n: u32,
    pub period: u64,
    pub degree: u64,
    pub coeffs: Vec<String>,
    pub valuations: Vec<String>,
}
