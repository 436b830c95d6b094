use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use disclab::discrepancy::{l2_squared_exact, l2_warnock, star_discrepancy};
use disclab::gf2net::{builtin, max_box_count, minimal_t, verify_net_order, DEFAULT_WORK_LIMIT};
use disclab::haar::{coefficient_table, parseval_l2, parseval_squared, HaarCoefficientTable};
use disclab::norms::{
    bmo_proxy, lp_norm_estimate, lp_norm_exact, orlicz_norm_direct, orlicz_norm_proxy, CandidateFamily,
    DiscrepancyFunction, OrliczSpec, QuadratureConfig,
};
use disclab::verify::{bmo_lower_bound, check_empty_boxes, scaling_study, StudyNorm};
use disclab::{digital_points, enumerate_shapes, DigitalNetSpec, Error, NormReport, PointSet};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{CoeffsArgs, Format, GenArgs, NormKind, NormsArgs, Source, StudyArgs, StudyKind, VerifyArgs};
use crate::output::{emit, json_value, Meta};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(Error),
    Io(PathBuf, std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(p, e) if p.as_os_str().is_empty() => write!(f, "standard output: {e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(Error::Resource { .. }) => 3,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Resource,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Resource => 3,
        }
    }
}

pub struct Ctx<'a> {
    pub budget: u128,
    pub out: Option<&'a Path>,
    pub format: Format,
}

impl Ctx<'_> {
    fn write(&self, text: &str) -> Result<(), CliError> {
        emit(self.out, text).map_err(|e| CliError::Io(self.out.map(Path::to_path_buf).unwrap_or_default(), e))
    }
}

struct Loaded {
    spec: Option<DigitalNetSpec>,
    ps: PointSet,
    inputs: Vec<Vec<u8>>,
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::Io(path.to_path_buf(), e))
}

fn utf8(bytes: &[u8], path: &Path) -> Result<String, CliError> {
    String::from_utf8(bytes.to_vec()).map_err(|_| CliError::Usage(format!("{} is not UTF-8 text", path.display())))
}

fn load_spec(src: &Source) -> Result<Option<(DigitalNetSpec, Vec<Vec<u8>>)>, CliError> {
    if let Some(name) = &src.builtin {
        let d = src.d.ok_or_else(|| CliError::Usage("--builtin needs --d".into()))?;
        let n = src.n.ok_or_else(|| CliError::Usage("--builtin needs --n".into()))?;
        return Ok(Some((builtin(name, d, n, src.sigma.unwrap_or(1))?, Vec::new())));
    }
    if let Some(path) = &src.matrices {
        let bytes = read(path)?;
        let spec = DigitalNetSpec::parse(&utf8(&bytes, path)?)?;
        return Ok(Some((spec, vec![bytes])));
    }
    Ok(None)
}

fn load(src: &Source) -> Result<Loaded, CliError> {
    if let Some((spec, inputs)) = load_spec(src)? {
        let ps = digital_points(&spec)?;
        return Ok(Loaded {
            spec: Some(spec),
            ps,
            inputs,
        });
    }
    if let Some(path) = &src.points {
        let bytes = read(path)?;
        let ps = PointSet::parse(&utf8(&bytes, path)?)?;
        return Ok(Loaded {
            spec: None,
            ps,
            inputs: vec![bytes],
        });
    }
    Err(CliError::Usage("one of --builtin, --matrices or --points is required".into()))
}

pub fn gen(args: &GenArgs, config: &impl Serialize, ctx: &Ctx) -> Result<Outcome, CliError> {
    let (ps, spec, inputs, seed) = if let Some(count) = args.random.or(args.clustered) {
        let d = args
            .source
            .d
            .ok_or_else(|| CliError::Usage("random and clustered sets need --d".into()))?;
        let ps = match args.random {
            Some(_) => PointSet::random(d, count, args.precision, args.seed)?,
            None => PointSet::clustered(d, count, args.precision, args.spread, args.seed)?,
        };
        (ps, None, Vec::new(), Some(args.seed))
    } else {
        let (spec, inputs) = load_spec(&args.source)?
            .ok_or_else(|| CliError::Usage("one of --builtin, --matrices, --random or --clustered is required".into()))?;
        (digital_points(&spec)?, Some(spec), inputs, None)
    };
    let meta = Meta::new(config, &inputs, seed);
    ctx.write(&(meta.comment_lines() + &ps.to_text()))?;
    let t = spec
        .as_ref()
        .and_then(|s| minimal_t(s, s.sigma(), ctx.budget.min(DEFAULT_WORK_LIMIT)).ok());
    let t = t.map_or("unknown".to_string(), |t| t.to_string());
    eprintln!("N={} precision_bits={} minimal_t={t}", ps.len(), ps.precision_bits());
    Ok(Outcome::Pass)
}

#[derive(Serialize)]
struct ShapeCount {
    shape: Vec<i32>,
    max_count: u64,
}

pub fn verify(args: &VerifyArgs, config: &impl Serialize, ctx: &Ctx) -> Result<Outcome, CliError> {
    let loaded = load(&args.source)?;
    let ps = &loaded.ps;
    let sigma = loaded
        .spec
        .as_ref()
        .map(|s| s.sigma())
        .or(args.source.sigma)
        .unwrap_or(1);
    let mut partial = false;
    let mut min_t = None;
    let mut declared_pass = None;
    if let Some(spec) = &loaded.spec {
        match minimal_t(spec, sigma, ctx.budget) {
            Ok(t) => min_t = Some(t),
            Err(Error::Resource { .. }) => partial = true,
            Err(e) => return Err(e.into()),
        }
        if let Some(t) = args.t {
            match verify_net_order(spec, sigma, t, ctx.budget) {
                Ok(ok) => declared_pass = Some(ok),
                Err(Error::Resource { .. }) => partial = true,
                Err(e) => return Err(e.into()),
            }
        }
    }
    // box counts over the shapes of order n when N = 2^n
    let t_eff = args.t.or(min_t);
    let mut counts = Vec::new();
    let mut box_bound = None;
    if ps.len().is_power_of_two() {
        let n = ps.len().trailing_zeros();
        for shape in enumerate_shapes(ps.dim(), n) {
            let max_count = max_box_count(ps, &shape)?;
            counts.push(ShapeCount { shape, max_count });
        }
        box_bound = t_eff.map(|t| 1u64 << t.div_ceil(sigma as u32));
    }
    let box_pass = box_bound.map(|b| counts.iter().all(|c| c.max_count <= b));
    let empty = check_empty_boxes(ps)?;
    let pass = declared_pass.unwrap_or(true) && box_pass.unwrap_or(true) && empty.pass;
    let text = match ctx.format {
        Format::Json => {
            let meta = Meta::new(config, &loaded.inputs, None);
            meta.wrap(json!({
                "dim": ps.dim(),
                "points": ps.len(),
                "precision_bits": ps.precision_bits(),
                "sigma": sigma,
                "declared_t": args.t,
                "minimal_t": min_t,
                "declared_t_pass": declared_pass,
                "box_bound": box_bound,
                "box_counts": counts,
                "box_pass": box_pass,
                "empty_boxes": empty,
                "partial": partial,
                "pass": pass,
            }))
        }
        Format::Csv => {
            let meta = Meta::new(config, &loaded.inputs, None);
            let mut s = meta.comment_lines();
            let d = ps.dim();
            let head: Vec<String> = (1..=d).map(|k| format!("j_{k}")).collect();
            writeln!(s, "check,{},count,total", head.join(",")).unwrap();
            let join = |shape: &[i32]| shape.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
            for c in &counts {
                writeln!(s, "max-box-count,{},{},", join(&c.shape), c.max_count).unwrap();
            }
            for e in &empty.shapes {
                writeln!(s, "empty-boxes,{},{},{}", join(&e.shape), e.empty, e.total).unwrap();
            }
            s
        }
    };
    ctx.write(&text)?;
    Ok(if partial {
        Outcome::Resource
    } else if pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn full_table(ps: &PointSet, budget: u128) -> Result<HaarCoefficientTable, Error> {
    coefficient_table(ps, ps.precision_bits() as i32 - 1, budget)
}

pub fn coeffs(args: &CoeffsArgs, config: &impl Serialize, ctx: &Ctx) -> Result<Outcome, CliError> {
    let loaded = load(&args.source)?;
    let ps = &loaded.ps;
    let level = args.max_level.unwrap_or(ps.precision_bits() as i32 - 1);
    let table = coefficient_table(ps, level, ctx.budget)?;
    let meta = Meta::new(config, &loaded.inputs, None);
    let text = match ctx.format {
        Format::Csv => meta.comment_lines() + &table.to_csv(args.all, ctx.budget)?,
        Format::Json => {
            let parseval = parseval_squared(&table).ok();
            let warnock = l2_squared_exact(ps);
            meta.wrap(json!({
                "dim": table.dim(),
                "points": table.point_count(),
                "max_level": table.max_level(),
                "shapes": table.blocks().len(),
                "indices": table.index_count().to_string(),
                "stored_entries": table.stored_entries(),
                "parseval_squared": parseval.as_ref().map(|v| v.to_string()),
                "warnock_squared": warnock.to_string(),
                "parseval_equals_warnock": parseval.map(|v| v == warnock),
            }))
        }
    };
    ctx.write(&text)?;
    Ok(Outcome::Pass)
}

#[derive(Serialize)]
struct NormEntry {
    norm: NormKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<NormReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

fn default_alpha(d: usize) -> f64 {
    if d > 1 {
        2.0 / (d as f64 - 1.0)
    } else {
        2.0
    }
}

pub fn norms(args: &NormsArgs, config: &impl Serialize, ctx: &Ctx) -> Result<Outcome, CliError> {
    if args.norms.is_empty() {
        return Err(CliError::Usage("--norms must name at least one norm".into()));
    }
    let loaded = load(&args.source)?;
    let ps = &loaded.ps;
    let alpha = args.alpha.unwrap_or_else(|| default_alpha(ps.dim()));
    let f = DiscrepancyFunction::with_budget(ps, ctx.budget);
    let needs_table = args
        .norms
        .iter()
        .any(|n| matches!(n, NormKind::L2Parseval | NormKind::BmoProxy));
    let table: Option<Result<HaarCoefficientTable, Error>> = needs_table.then(|| full_table(ps, ctx.budget));
    let table_for = || match table.as_ref().expect("table computed") {
        Ok(t) => Ok(t),
        Err(Error::Resource { what, required, budget }) => Err(Error::Resource {
            what,
            required: *required,
            budget: *budget,
        }),
        Err(e) => Err(Error::Domain(e.to_string())),
    };
    let mut entries = Vec::new();
    let mut resource = false;
    let mut failed = false;
    let mut push = |norm, p, r: Result<NormReport, Error>| {
        let (report, error) = match r {
            Ok(r) => (Some(r), None),
            Err(e) => {
                match e {
                    Error::Resource { .. } => resource = true,
                    _ => failed = true,
                }
                (None, Some(e.to_string()))
            }
        };
        entries.push(NormEntry { norm, p, report, error });
    };
    let mut stochastic = false;
    for &norm in &args.norms {
        match norm {
            NormKind::Star => push(norm, None, star_discrepancy(ps, ctx.budget)),
            NormKind::L2Warnock => push(norm, None, l2_warnock(ps, ctx.budget)),
            NormKind::L2Parseval => {
                let r = table_for().and_then(parseval_l2);
                push(norm, None, r)
            }
            NormKind::LpExact => {
                for &p in &args.p_grid {
                    push(norm, Some(p), lp_norm_exact(ps, p, ctx.budget));
                }
            }
            NormKind::LpEstimate => {
                stochastic = true;
                for &p in &args.p_grid {
                    push(norm, Some(p), lp_norm_estimate(&f, p as f64, args.samples, args.seed));
                }
            }
            NormKind::OrliczDirect => {
                stochastic = true;
                let cfg = QuadratureConfig {
                    samples: args.samples,
                    seed: args.seed,
                    ..QuadratureConfig::default()
                };
                let r = OrliczSpec::new(alpha).and_then(|s| orlicz_norm_direct(&f, &s, &cfg));
                push(norm, None, r)
            }
            NormKind::OrliczProxy => push(norm, None, orlicz_norm_proxy(&f, alpha, &args.p_grid)),
            NormKind::BmoProxy => {
                let r = table_for().and_then(|t| {
                    let mut family = CandidateFamily::for_table(t);
                    if let Some(cap) = args.order_cap {
                        family.order_cap = cap;
                    }
                    family.unions = !args.no_unions;
                    bmo_proxy(t, &family, ctx.budget)
                });
                push(norm, None, r)
            }
            NormKind::BmoLowerBound => push(norm, None, bmo_lower_bound(ps)),
        }
    }
    let value_of = |kind| {
        entries
            .iter()
            .find(|e| e.norm == kind)
            .and_then(|e| e.report.as_ref())
            .map(|r| r.value)
    };
    let delta = match (value_of(NormKind::L2Parseval), value_of(NormKind::L2Warnock)) {
        (Some(a), Some(b)) => Some((a - b).abs()),
        _ => None,
    };
    let meta = Meta::new(config, &loaded.inputs, stochastic.then_some(args.seed));
    let text = match ctx.format {
        Format::Json => meta.wrap(json!({
            "points": ps.len(),
            "dim": ps.dim(),
            "alpha": alpha,
            "reports": entries,
            "parseval_warnock_delta": delta,
        })),
        Format::Csv => {
            let mut s = meta.comment_lines();
            s += "norm,p,method,value,error_bound,error\n";
            let field = |v: Value| v.as_str().map(str::to_string).unwrap_or_default();
            for e in &entries {
                let p = e.p.map(|p| p.to_string()).unwrap_or_default();
                let name = field(json_value(e.norm));
                match &e.report {
                    Some(r) => {
                        let err = r.error_bound.map(|v| v.to_string()).unwrap_or_default();
                        writeln!(s, "{name},{p},{},{},{err},", field(json_value(r.method)), r.value).unwrap();
                    }
                    None => {
                        let msg = e.error.clone().unwrap_or_default().replace(',', ";");
                        writeln!(s, "{name},{p},,,,{msg}").unwrap();
                    }
                }
            }
            if let Some(delta) = delta {
                writeln!(s, "parseval-warnock-delta,,,{delta},,").unwrap();
            }
            s
        }
    };
    ctx.write(&text)?;
    Ok(if resource {
        Outcome::Resource
    } else if failed {
        Outcome::Fail
    } else {
        Outcome::Pass
    })
}

pub fn parse_range(s: &str) -> Result<Vec<u32>, CliError> {
    let bad = || CliError::Usage(format!("invalid n range {s:?}; use a..b or a,b,c"));
    let mut ns: Vec<u32> = if let Some((a, b)) = s.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|v| v.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 4 {
        return Err(CliError::Usage("a study needs at least 4 distinct values of n".into()));
    }
    Ok(ns)
}

/// Default accepted exponent window: the target rate `(d-1)/2` (or `d-1` for the star
/// discrepancy), and only an upper limit for the norms whose lower bound is not claimed.
fn default_window(kind: StudyKind, d: usize) -> (f64, f64) {
    let half = (d as f64 - 1.0) / 2.0;
    match kind {
        StudyKind::L2 | StudyKind::BmoLowerBound => (half - 0.25, half + 0.25),
        StudyKind::Star => (d as f64 - 1.3, d as f64 - 0.7),
        StudyKind::BmoProxy | StudyKind::OrliczProxy => (f64::NEG_INFINITY, half + 0.3),
    }
}

pub fn study(args: &StudyArgs, config: &impl Serialize, ctx: &Ctx) -> Result<Outcome, CliError> {
    let ns = parse_range(&args.n_range)?;
    let norm = match args.norm {
        StudyKind::BmoProxy => StudyNorm::BmoProxy,
        StudyKind::OrliczProxy => StudyNorm::OrliczProxy {
            alpha: args.alpha.unwrap_or_else(|| default_alpha(args.d)),
        },
        StudyKind::Star => StudyNorm::Star,
        StudyKind::L2 => StudyNorm::L2,
        StudyKind::BmoLowerBound => StudyNorm::BmoLowerBound,
    };
    let (lo, hi) = match &args.window {
        Some(w) => *w,
        None => default_window(args.norm, args.d),
    };
    let s = scaling_study(&args.builtin, args.d, args.sigma, &ns, norm, ctx.budget)?;
    let pass = s.exponent >= lo && s.exponent <= hi;
    let meta = Meta::new(config, &[], None);
    let mut csv = meta.comment_lines();
    csv += "n,N,value,method\n";
    for p in &s.points {
        let method = json_value(p.method);
        writeln!(csv, "{},{},{},{}", p.n, p.points, p.value, method.as_str().unwrap_or_default()).unwrap();
    }
    let summary = meta.wrap(json!({
        "study": s,
        "window": [lo, hi],
        "pass": pass,
    }));
    match ctx.out {
        Some(stem) => {
            for (ext, text) in [("csv", &csv), ("json", &summary)] {
                let path = stem.with_extension(ext);
                fs::write(&path, text).map_err(|e| CliError::Io(path.clone(), e))?;
            }
        }
        None => ctx.write(match ctx.format {
            Format::Csv => &csv,
            Format::Json => &summary,
        })?,
    }
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}
