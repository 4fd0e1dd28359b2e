use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use weylcomp_core::busemann::{random_probes, ConjectureReport, RatioReport};
use weylcomp_core::chamber::{default_grid, random_ideal_point};
use weylcomp_core::fundamental::{is_fundamental, k_is_cauchy, limit_of_decomposed};
use weylcomp_core::quotient::class_structure_check;
use weylcomp_core::sample::{random_chamber_vector, random_rotation, random_stab_element, rng_for};
use weylcomp_core::*;

use crate::args::{BusemannCommand, IntersectionArgs, KernelCommand, Property, RefineArgs, Sampling, VerifyArgs};
use crate::config::Config;
use crate::io::{decode, load, load_matrix, num, CliError, CliResult, Output};

fn check_n(n: usize) -> CliResult<()> {
    if (2..=lie::MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--n must be between 2 and {}, got {n}",
            lie::MAX_DIM
        )))
    }
}

fn roots_1based(p: &lie::Partition) -> Vec<Vec<usize>> {
    p.blocks.iter().map(|b| b.clone().map(|i| i + 1).collect()).collect()
}

pub fn decompose(path: &Path) -> CliResult<Output> {
    let p: SpdPoint = load_matrix(path)?;
    let (k, h) = cartan_decompose(&p);
    let face = face_of(h.as_slice(), lie::DEFAULT_TOL);
    Ok(Output::json(&json!({
        "k": k,
        "h": h,
        "face": face,
        "root_values": h.root_values(),
    })))
}

#[derive(Deserialize)]
struct Decomposition {
    k: Rotation,
    h: ChamberVector,
}

pub fn realize_cmd(path: &Path) -> CliResult<Output> {
    let d: Decomposition = load(path)?;
    if d.k.n() != d.h.n() {
        return Err(CliError::Invariant(format!(
            "frame is {}x{} but radius has {} entries",
            d.k.n(),
            d.k.n(),
            d.h.n()
        )));
    }
    Ok(Output::json(&SpdPoint::from_cartan(&d.k, &d.h)))
}

pub fn radius(x: &Path, y: &Path) -> CliResult<Output> {
    let x: SpdPoint = load_matrix(x)?;
    let y: SpdPoint = load_matrix(y)?;
    let r = generalized_radius(&x, &y)?;
    Ok(Output::json(
        &json!({ "r": r, "distance": r.norm(), "root_values": r.root_values() }),
    ))
}

pub fn face(path: &Path) -> CliResult<Output> {
    let v: Value = load(path)?;
    let v = match v {
        Value::Array(h) => json!({ "n": h.len(), "h": h }),
        other => other,
    };
    let h: ChamberVector = decode(path, v)?;
    let face = face_of(h.as_slice(), lie::DEFAULT_TOL);
    Ok(Output::json(&json!({
        "face": face,
        "root_values": h.root_values(),
        "stab_blocks": roots_1based(&face_partition(face, h.n())),
    })))
}

/// Sequence files: matrices (`points`), a decomposition (`k_seq`, `h_seq`) or chamber
/// vectors alone (`h_seq`, frames taken to be the identity).
enum SequenceInput {
    Points(PointSequence),
    Decomposed(FundamentalDecomposition),
}

fn load_sequence(path: &Path, cfg: &Config) -> CliResult<FundamentalDecomposition> {
    let v: Value = load(path)?;
    let input = if v.get("points").is_some() {
        let mut v = v;
        if let Some(Value::Array(points)) = v.get_mut("points") {
            for p in points.iter_mut() {
                if let Value::Array(rows) = p {
                    *p = json!({ "n": rows.len(), "matrix": rows.clone() });
                }
            }
        }
        SequenceInput::Points(decode(path, v)?)
    } else if v.get("k_seq").is_some() {
        SequenceInput::Decomposed(decode(path, v)?)
    } else if let Some(h) = v.get("h_seq") {
        let h_seq: Vec<ChamberVector> = decode(path, h.clone())?;
        let n = h_seq
            .first()
            .map(|h| h.n())
            .ok_or_else(|| CliError::Invariant("empty sequence".into()))?;
        SequenceInput::Decomposed(FundamentalDecomposition {
            k_seq: vec![Rotation::identity(n); h_seq.len()],
            h_seq,
        })
    } else {
        return Err(CliError::Parse {
            path: path.into(),
            message: "expected a sequence with `points`, `k_seq` and `h_seq`, or `h_seq`".into(),
        });
    };
    let d = match input {
        SequenceInput::Points(s) => polar_sequence(&s, cfg.tol)?,
        SequenceInput::Decomposed(d) => d,
    };
    if d.h_seq.is_empty() || d.k_seq.len() != d.h_seq.len() {
        return Err(CliError::Invariant(
            "k_seq and h_seq must be nonempty and of equal length".into(),
        ));
    }
    let n = d.h_seq[0].n();
    if d.k_seq.iter().any(|k| k.n() != n) || d.h_seq.iter().any(|h| h.n() != n) {
        return Err(CliError::Invariant("sequence terms have different sizes".into()));
    }
    Ok(d)
}

fn quotient_limit_json(d: &FundamentalDecomposition, model: Model, cfg: &Config) -> CliResult<Value> {
    match limit_of_decomposed(d, model, &cfg.classify()) {
        Ok(l) => Ok(serde_json::to_value(l).expect("serializable")),
        Err(Error::Inconclusive) => Ok(json!({ "status": "inconclusive", "reason": Error::Inconclusive.to_string() })),
        Err(Error::MaxDepthExceeded(d)) => {
            Ok(json!({ "status": "inconclusive", "reason": Error::MaxDepthExceeded(d).to_string() }))
        }
        Err(e) => Err(e.into()),
    }
}

fn verdict_json(model: Model, h_seq: &[ChamberVector], cfg: &Config) -> CliResult<Value> {
    match classify(model, h_seq, &cfg.classify()) {
        Ok(v) => Ok(serde_json::to_value(v).expect("serializable")),
        Err(Error::MaxDepthExceeded(d)) => Ok(json!({
            "model": model,
            "outcome": { "status": "inconclusive", "reason": Error::MaxDepthExceeded(d).to_string() },
        })),
        Err(e) => Err(e.into()),
    }
}

pub fn classify_cmd(path: &Path, cfg: &Config) -> CliResult<Output> {
    let d = load_sequence(path, cfg)?;
    let verdict = verdict_json(cfg.model, &d.h_seq, cfg)?;
    let quotient = quotient_limit_json(&d, cfg.model, cfg)?;
    let last = d.h_seq.last().expect("nonempty");
    Ok(Output::json(&json!({
        "model": cfg.model,
        "terms": d.len(),
        "verdict": verdict,
        "quotient": quotient,
        "last_root_values": last.root_values(),
    })))
}

pub fn fundamental(path: &Path, cfg: &Config) -> CliResult<Output> {
    let d = load_sequence(path, cfg)?;
    let c = cfg.classify();
    let k_cauchy = k_is_cauchy(&d.k_seq, &c)?;
    let mut models = Vec::new();
    for model in [Model::Visual, Model::DualCell, Model::Martin] {
        models.push(json!({ "model": model, "fundamental": is_fundamental(&d, model, &c)? }));
    }
    let last_k = d.k_seq.last().expect("nonempty");
    let rows: Vec<Vec<String>> = d
        .k_seq
        .iter()
        .zip(&d.h_seq)
        .enumerate()
        .map(|(i, (k, h))| {
            let mut row = vec![i.to_string(), num(k.distance(last_k))];
            row.extend(h.as_slice().iter().map(|v| num(*v)));
            row
        })
        .collect();
    let n = d.h_seq[0].n();
    let mut header = vec!["index".to_string(), "k_distance_to_last".to_string()];
    header.extend((1..=n).map(|i| format!("h{i}")));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    Ok(Output::json(&json!({
        "n": n,
        "terms": d.len(),
        "k_cauchy": k_cauchy,
        "models": models,
        "decomposition": d,
    }))
    .with_csv(&header, rows))
}

pub fn limit(path: &Path, cfg: &Config) -> CliResult<Output> {
    let d = load_sequence(path, cfg)?;
    Ok(Output::json(&quotient_limit_json(&d, cfg.model, cfg)?))
}

fn load_quotient(path: &Path) -> CliResult<QuotientPoint> {
    let q: QuotientPoint = load(path)?;
    QuotientPoint::new(q.k.clone(), q.x.clone(), q.model)?;
    Ok(q)
}

pub fn equiv(p: &Path, q: &Path, cfg: &Config) -> CliResult<Output> {
    let a = load_quotient(p)?;
    let b = load_quotient(q)?;
    let eq = quotient::equivalent_with(&a, &b, cfg.tol, cfg.maxface_rule)?;
    Ok(Output::json(&json!({
        "equivalent": eq,
        "maxface_p": maxface_with(&a.x, cfg.tol, cfg.maxface_rule),
        "maxface_q": maxface_with(&b.x, cfg.tol, cfg.maxface_rule),
    })))
}

pub fn act(rotation: &Path, point: &Path) -> CliResult<Output> {
    let r: Rotation = load_matrix(rotation)?;
    let p = load_quotient(point)?;
    Ok(Output::json(&k_act(&r, &p)?))
}

fn default_r(n: usize) -> Rotation {
    if n >= 3 {
        Rotation::plane(n, 1, 2, 0.7)
    } else {
        Rotation::plane(n, 0, 1, 0.7)
    }
}

pub fn intersections(a: &IntersectionArgs, cfg: &Config) -> CliResult<Output> {
    let samples = a.samples.unwrap_or(cfg.budgets.intersections);
    if a.rank_one {
        return Ok(Output::json(&rank_one_demonstration(samples, cfg.seed)));
    }
    let k: Rotation = match &a.k {
        Some(p) => load_matrix(p)?,
        None => {
            check_n(a.n)?;
            Rotation::identity(a.n)
        }
    };
    let r: Rotation = match &a.r {
        Some(p) => load_matrix(p)?,
        None => default_r(k.n()),
    };
    let rep = intersection_check(&k, &r, cfg.model, samples, &cfg.classify(), cfg.seed)?;
    Ok(Output::json(&rep))
}

fn parse_pair(s: &str) -> CliResult<(Model, Model)> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| CliError::Usage(format!("--pair expects a:b, got '{s}'")))?;
    let m = |x: &str| x.parse::<Model>().map_err(|e| CliError::Usage(e.to_string()));
    Ok((m(a)?, m(b)?))
}

fn refinement_table(r: &fundamental::RefinementReport) -> Vec<Vec<String>> {
    vec![
        vec!["equal".into(), r.table[0][0].to_string(), r.table[0][1].to_string()],
        vec!["different".into(), r.table[1][0].to_string(), r.table[1][1].to_string()],
    ]
}

pub fn refine(a: &RefineArgs, cfg: &Config) -> CliResult<Output> {
    check_n(a.n)?;
    let (ma, mb) = parse_pair(&a.pair)?;
    let pairs = generate_pairs(a.n, a.pairs.unwrap_or(cfg.budgets.refinement_pairs), cfg.seed);
    let rep = refinement_report(ma, mb, &pairs, &default_grid(), &cfg.classify());
    let rows = refinement_table(&rep);
    Ok(Output::json(&rep).with_csv(&[&format!("{ma}\\{mb}"), "equal", "different"], rows))
}

fn kernel_spec(cfg: &Config, n: usize) -> CliResult<KernelSpec> {
    check_n(n)?;
    KernelSpec::family(cfg.kernel, n).map_err(|e| CliError::Usage(e.to_string()))
}

fn ratio_output(rep: &RatioReport) -> Output {
    let bins = rep.histogram.len();
    let rows = rep
        .histogram
        .iter()
        .enumerate()
        .map(|(i, c)| {
            vec![
                num(i as f64 / bins as f64),
                num((i + 1) as f64 / bins as f64),
                c.to_string(),
            ]
        })
        .collect();
    Output::json(rep).with_csv(&["ratio_over_estimate_from", "to", "count"], rows)
}

pub fn kernel(cmd: &KernelCommand, cfg: &Config) -> CliResult<Output> {
    let h = &cfg.harness;
    match cmd {
        KernelCommand::Eval { x, y } => {
            let x: SpdPoint = load_matrix(x)?;
            let y: SpdPoint = load_matrix(y)?;
            let spec = kernel_spec(cfg, x.n())?;
            let v = kernel_eval(&spec, &x, &y)?;
            let rows = spec
                .components
                .iter()
                .zip(&v.0)
                .map(|(c, val)| vec![c.roots.to_string(), num(c.scale), num(*val)])
                .collect();
            Ok(Output::json(&json!({ "kernel": spec, "value": v, "norm": v.norm() }))
                .with_csv(&["roots", "scale", "value"], rows))
        }
        KernelCommand::Lipschitz { n, samples } => {
            let spec = kernel_spec(cfg, *n)?;
            Ok(ratio_output(&check_lipschitz(
                &spec,
                samples.unwrap_or(cfg.budgets.kernel_samples),
                h,
                cfg.seed,
            )))
        }
        KernelCommand::Condition3 { n, samples, literal } => {
            let spec = kernel_spec(cfg, *n)?;
            let form = if *literal {
                Condition3Form::Literal
            } else {
                Condition3Form::SecondArgument
            };
            Ok(ratio_output(&check_condition3(
                &spec,
                samples.unwrap_or(cfg.budgets.kernel_samples),
                form,
                h,
                cfg.seed,
            )))
        }
        KernelCommand::Condition1 {
            n,
            samples,
            sampling,
            center,
        } => {
            let x: SpdPoint = match center {
                Some(p) => load_matrix(p)?,
                None => {
                    check_n(*n)?;
                    SpdPoint::identity(*n)
                }
            };
            let spec = kernel_spec(cfg, x.n())?;
            let sampling = match sampling {
                Sampling::Random => Condition1Sampling::Random,
                Sampling::Ray => Condition1Sampling::Ray,
                Sampling::TwoDirection => Condition1Sampling::TwoDirection,
            };
            let rep = check_condition1(
                &spec,
                &x,
                samples.unwrap_or(cfg.budgets.condition1_samples),
                sampling,
                h,
                cfg.seed,
            )?;
            let rows = rep
                .violations
                .iter()
                .map(|v| {
                    vec![
                        num(v.near_distance),
                        num(v.near_norm),
                        num(v.far_distance),
                        num(v.far_norm),
                    ]
                })
                .collect();
            Ok(Output::json(&rep).with_csv(&["near_distance", "near_norm", "far_distance", "far_norm"], rows))
        }
    }
}

/// A persisted probe set; `seed` and `radius` regenerate it.
#[derive(Debug, Serialize, Deserialize)]
pub struct ProbeSet {
    pub seed: u64,
    pub radius: f64,
    pub probes: Vec<SpdPoint>,
}

fn probe_set(path: Option<&Path>, n: usize, cfg: &Config) -> CliResult<Vec<SpdPoint>> {
    match path {
        Some(p) => {
            let set: ProbeSet = load(p)?;
            if set.probes.is_empty() || set.probes.iter().any(|q| q.n() != n) {
                return Err(CliError::Invariant(format!(
                    "probe set must be nonempty with {n}x{n} points"
                )));
            }
            Ok(set.probes)
        }
        None => Ok(random_probes(n, cfg.budgets.probes.max(1), 1.0, cfg.seed)),
    }
}

fn conjecture_rows(rep: &ConjectureReport) -> Vec<Vec<String>> {
    rep.details
        .iter()
        .map(|d| vec![d.index.to_string(), d.same_model_limit.to_string(), num(d.sup_distance)])
        .collect()
}

pub fn busemann(cmd: &BusemannCommand, cfg: &Config) -> CliResult<Output> {
    match cmd {
        BusemannCommand::Eval { x, probes, base } => {
            let x: SpdPoint = load_matrix(x)?;
            let n = x.n();
            let o: SpdPoint = match base {
                Some(p) => load_matrix(p)?,
                None => SpdPoint::identity(n),
            };
            let spec = kernel_spec(cfg, n)?;
            let probes = probe_set(probes.as_deref(), n, cfg)?;
            let f = busemann_function(&spec, &x, &o, &probes)?;
            let rows = f
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    std::iter::once(i.to_string())
                        .chain(v.iter().map(|c| num(*c)))
                        .collect()
                })
                .collect();
            let header: Vec<String> = std::iter::once("probe".to_string())
                .chain(spec.components.iter().map(|c| c.roots.to_string()))
                .collect();
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            Ok(Output::json(&json!({ "kernel": spec, "function": f })).with_csv(&header, rows))
        }
        BusemannCommand::Probes { n, count } => {
            check_n(*n)?;
            let probes = random_probes(*n, count.unwrap_or(cfg.budgets.probes).max(1), 1.0, cfg.seed);
            Ok(Output::json(&ProbeSet {
                seed: cfg.seed,
                radius: 1.0,
                probes,
            }))
        }
        BusemannCommand::Conjecture { n, pairs, probes } => {
            let spec = kernel_spec(cfg, *n)?;
            let probes = probe_set(probes.as_deref(), *n, cfg)?;
            let pairs = generate_pairs(*n, pairs.unwrap_or(cfg.budgets.conjecture_pairs), cfg.seed);
            let rep = conjecture_experiment(&spec, cfg.model, &pairs, &probes, &cfg.harness)?;
            let rows = conjecture_rows(&rep);
            Ok(Output::json(&rep).with_csv(&["pair", "same_model_limit", "sup_distance"], rows))
        }
    }
}

#[derive(Debug, Serialize)]
struct VerifyReport {
    property: &'static str,
    passed: bool,
    /// Observations that are not invariant failures (for example kernel-condition violations).
    findings: Vec<String>,
    details: Value,
}

fn intersection_pairs(args: &VerifyArgs, cfg: &Config) -> CliResult<Vec<(Rotation, Rotation)>> {
    let mut pairs = Vec::new();
    let k: Rotation = match &args.k {
        Some(p) => load_matrix(p)?,
        None => {
            check_n(args.n)?;
            Rotation::identity(args.n)
        }
    };
    let r: Rotation = match &args.r {
        Some(p) => load_matrix(p)?,
        None => default_r(k.n()),
    };
    let n = k.n();
    pairs.push((k, r));
    let mut rng = rng_for(cfg.seed, u64::MAX);
    let faces: Vec<FaceIndex> = FaceIndex::all_subsets(n - 1).collect();
    for i in 0..cfg.budgets.intersection_pairs {
        let k = random_rotation(n, &mut rng);
        let r = if i % 2 == 0 {
            k.compose(&random_stab_element(faces[(i / 2) % faces.len()], n, &mut rng))
        } else {
            random_rotation(n, &mut rng)
        };
        pairs.push((k, r));
    }
    Ok(pairs)
}

fn expected_refinement(a: Model, b: Model) -> bool {
    a == b
        || matches!(
            (a, b),
            (Model::Martin, Model::Visual | Model::DualCell) | (Model::Iterated, _)
        )
}

pub fn verify(args: &VerifyArgs, cfg: &Config) -> CliResult<(Output, bool)> {
    let c = cfg.classify();
    let ideal = [Model::Visual, Model::DualCell, Model::Martin];
    let report = match args.property {
        Property::Stratified => {
            check_n(args.n)?;
            let mut reports = Vec::new();
            for (i, model) in ideal.into_iter().enumerate() {
                reports.push(stratification_check(
                    model,
                    args.n,
                    cfg.budgets.stratified,
                    &c,
                    cfg.task_seed(i as u64),
                )?);
            }
            VerifyReport {
                property: "stratified",
                passed: reports.iter().all(|r| r.passed()),
                findings: Vec::new(),
                details: serde_json::to_value(reports).expect("serializable"),
            }
        }
        Property::Intersections => {
            let pairs = intersection_pairs(args, cfg)?;
            let mut reports = Vec::new();
            for (i, (k, r)) in pairs.iter().enumerate() {
                for model in ideal {
                    reports.push(intersection_check(
                        k,
                        r,
                        model,
                        cfg.budgets.intersections,
                        &c,
                        cfg.task_seed(i as u64),
                    )?);
                }
            }
            VerifyReport {
                property: "intersections",
                passed: reports.iter().all(|r| r.passed()),
                findings: Vec::new(),
                details: json!({ "i_min": reports[0].i_min, "reports": reports }),
            }
        }
        Property::Refinement => {
            check_n(args.n)?;
            let (a, b) = parse_pair(&args.pair)?;
            let pairs = generate_pairs(args.n, cfg.budgets.refinement_pairs, cfg.seed);
            let rep = refinement_report(a, b, &pairs, &default_grid(), &c);
            let expected = expected_refinement(a, b);
            let mut findings = Vec::new();
            if !expected && !rep.implication_holds {
                findings.push(format!(
                    "{a} does not refine {b}: {} counterexamples",
                    rep.counterexamples.len()
                ));
            }
            VerifyReport {
                property: "refinement",
                passed: rep.label_mismatches == 0 && (!expected || rep.implication_holds),
                findings,
                details: json!({ "expected_refinement": expected, "report": rep }),
            }
        }
        Property::KernelConditions => {
            let spec = kernel_spec(cfg, args.n)?;
            let h = &cfg.harness;
            let o = SpdPoint::identity(args.n);
            let c1 = check_condition1(
                &spec,
                &o,
                cfg.budgets.condition1_samples,
                Condition1Sampling::Random,
                h,
                cfg.seed,
            )?;
            let c1t = check_condition1(
                &spec,
                &o,
                cfg.budgets.condition1_samples,
                Condition1Sampling::TwoDirection,
                h,
                cfg.task_seed(1),
            )?;
            let s = check_lipschitz(&spec, cfg.budgets.kernel_samples, h, cfg.task_seed(2));
            let k = check_condition3(
                &spec,
                cfg.budgets.kernel_samples,
                Condition3Form::SecondArgument,
                h,
                cfg.task_seed(3),
            );
            let mut findings = Vec::new();
            for (name, r) in [("random", &c1), ("two-direction", &c1t)] {
                if r.violation_count > 0 {
                    findings.push(format!(
                        "condition 1 ({name} sampling): {} of {} pairs violate strict growth",
                        r.violation_count, r.pairs_checked
                    ));
                }
            }
            let finite = |r: &RatioReport| r.estimate.is_finite() && r.estimate > 0.0;
            VerifyReport {
                property: "kernel-conditions",
                passed: finite(&s) && finite(&k),
                findings,
                details: json!({ "condition1": [c1, c1t], "lipschitz": s, "condition3": k }),
            }
        }
        Property::ClassStructure => {
            check_n(args.n)?;
            let mut rng = rng_for(cfg.seed, 0);
            let mut reports = Vec::new();
            for j in 0..20 {
                let model = [Model::Visual, Model::DualCell, Model::Martin, Model::Iterated][j % 4];
                let x = if j % 5 == 4 {
                    let h = random_chamber_vector(args.n, 1.0, &mut rng);
                    ChamberPoint::interior(&h)
                } else {
                    random_ideal_point(model, args.n, &mut rng)
                };
                let p = QuotientPoint::new(random_rotation(args.n, &mut rng), x, model)?;
                reports.push(class_structure_check(
                    &p,
                    cfg.budgets.class_structure,
                    cfg.tol,
                    &mut rng,
                ));
            }
            VerifyReport {
                property: "class-structure",
                passed: reports.iter().all(|r| r.passed()),
                findings: Vec::new(),
                details: serde_json::to_value(reports).expect("serializable"),
            }
        }
    };
    let passed = report.passed;
    Ok((Output::json(&report), passed))
}
