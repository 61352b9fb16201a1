use crate::{Cmd, FieldArgs, Failure, Format, HadamardCmd, SearchCmd};
use mubkit::bellproto::{cerf_clone, dense_coding_sim, swap_sim, teleport_sim, BellBasis, PureState};
use mubkit::cnum::CMatrix;
use mubkit::gf::{is_prime, verify_axioms, GfSpec};
use mubkit::hadamard::{self, HMat};
use mubkit::meanking::{grid, mk_protocol_sim, render_grid};
use mubkit::mub::{AlphaTable, MubSet};
use mubkit::numth::{g_table_csv, is_prime_via_g, negative_g_values};
use mubkit::phasespace::{covariance_experiment, reconstruct, tomography, wigner_basis, wigner_criteria};
use mubkit::search::{self, SearchConfig};
use mubkit::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::sync::Arc;

type CMat = DMatrix<Complex64>;
type Outcome = Result<(), Failure>;

pub struct Ctx {
    pub seed: u64,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl Ctx {
    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    pub fn write(&self, text: &str) -> Outcome {
        match &self.out {
            Some(path) => std::fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    pub fn emit(&self, v: &Value) -> Outcome {
        let mut s = serde_json::to_string_pretty(v).expect("serializable");
        s.push('\n');
        self.write(&s)
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

pub fn spec_of(f: &FieldArgs) -> Result<Arc<GfSpec>, Failure> {
    Ok(Arc::new(GfSpec::new(f.p, f.m, f.mu.as_deref())?))
}

pub fn check(ok: bool, msg: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(Failure::Verification(msg()))
    }
}

fn float_json(m: &CMat) -> Value {
    CMatrix::Float(m.clone()).to_json()
}

pub fn random_state(n: usize, rng: &mut ChaCha8Rng) -> PureState {
    let v: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let nrm = v.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
    PureState::qnit(v.into_iter().map(|z| z / nrm).collect()).expect("normalized")
}

pub fn random_density(n: usize, rng: &mut ChaCha8Rng) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

/// Parses `family:p1,p2` or reads a JSON file.
pub fn matrix_of(spec: &str) -> Result<HMat, Failure> {
    if spec.ends_with(".json") {
        let text = std::fs::read_to_string(spec).map_err(|e| Failure::Usage(format!("{spec}: {e}")))?;
        let v: Value = serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{spec}: {e}")))?;
        return Ok(HMat::from_json(&v)?);
    }
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let params = rest
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| s.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("bad parameter {s:?} in {spec:?}"))))
        .collect::<Result<Vec<f64>, _>>()?;
    Ok(hadamard::family(name, &params)?)
}

pub fn run(cmd: &Cmd, ctx: &Ctx) -> Outcome {
    match cmd {
        Cmd::Field(f) => field(f, ctx),
        Cmd::Mub { field, export, basis, nonsymmetric } => mub(field, *export, *basis, *nonsymmetric, ctx),
        Cmd::Verify(f) => verify(f, ctx),
        Cmd::Bell(f) => bell(f, ctx),
        Cmd::Teleport(f) => teleport(f, ctx),
        Cmd::Clone(f) => clone(f, ctx),
        Cmd::Swap { field, bm, bn } => swap(field, *bm, *bn, ctx),
        Cmd::Meanking { n, grids, trials } => meanking(*n, *grids, *trials, ctx),
        Cmd::Wigner { field, twist } => wigner(field, twist.as_deref(), ctx),
        Cmd::Tomo { field, samples } => tomo(field, *samples, ctx),
        Cmd::Hadamard { action } => match action {
            Some(a) => hadamard_cmd(a, ctx),
            None => Err(Failure::Usage("hadamard needs one of list, build, check, equiv, defect, muhm".into())),
        },
        Cmd::Search { action } => match action {
            Some(a) => search_cmd(a, ctx),
            None => Err(Failure::Usage("search needs one of unbiased, constellation, haar".into())),
        },
        Cmd::Gnum { max, csv } => gnum(*max, *csv, ctx),
        Cmd::Export(f) => export(f, ctx),
    }
}

fn field(f: &FieldArgs, ctx: &Ctx) -> Outcome {
    let spec = spec_of(f)?;
    let n = spec.n();
    let table = |op: &dyn Fn(u32, u32) -> u32| -> Vec<Vec<u32>> { (0..n).map(|a| (0..n).map(|b| op(a, b)).collect()).collect() };
    let add = table(&|a, b| spec.add(a, b));
    let mul = table(&|a, b| spec.mul(a, b));
    let axioms = match verify_axioms(spec.as_ref()) {
        Ok(r) => r,
        Err(Error::AxiomViolation(m)) => return Err(Failure::Verification(m)),
        Err(e) => return Err(e.into()),
    };
    if ctx.format_or(Format::Json) == Format::Ascii {
        let render = |t: &[Vec<u32>]| t.iter().map(|r| r.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")).collect::<Vec<_>>().join("\n");
        return ctx.write(&format!("GF({n}), mu = {:?}\naddition:\n{}\nmultiplication:\n{}\n", spec.mu(), render(&add), render(&mul)));
    }
    ctx.emit(&json!({
        "field": spec.to_json(),
        "add": add,
        "mul": mul,
        "axioms": {
            "exhaustive": axioms.exhaustive,
            "triplesChecked": axioms.triples_checked,
            "characterIdentity": axioms.character_identity,
            "tol": "exact",
        },
    }))
}

fn build_mub(f: &FieldArgs, symmetric: bool) -> Result<MubSet, Failure> {
    let spec = spec_of(f)?;
    let alpha = AlphaTable::new(&spec, symmetric);
    Ok(MubSet::new(spec, alpha)?)
}

fn mub(f: &FieldArgs, export: bool, basis: Option<usize>, nonsymmetric: bool, ctx: &Ctx) -> Outcome {
    let m = build_mub(f, !nonsymmetric)?;
    let n = m.n();
    if let Some(i) = basis {
        if i > n {
            return Err(Failure::Usage(format!("basis index {i} exceeds N = {n}")));
        }
        return ctx.emit(&CMatrix::from(m.basis(i)).to_json());
    }
    let mut v = json!({
        "field": m.spec().to_json(),
        "N": n,
        "phaseOrder": m.phase_order(),
        "alphaExps": m.alpha().exps,
    });
    if export {
        v["hadamards"] = (0..n).map(|i| CMatrix::from(m.basis(i)).to_json()).collect();
    }
    ctx.emit(&v)
}

fn verify(f: &FieldArgs, ctx: &Ctx) -> Outcome {
    let m = build_mub(f, true)?;
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    let mut record = |name: &str, r: mubkit::Result<()>| match r {
        Ok(()) => lines.push((name.to_string(), true, String::new())),
        Err(Error::AxiomViolation(msg)) => {
            failed.push(format!("{name}: {msg}"));
            lines.push((name.to_string(), false, msg));
        }
        Err(e) => {
            failed.push(format!("{name}: {e}"));
            lines.push((name.to_string(), false, e.to_string()));
        }
    };
    let counted = m.verify_unbiased();
    let checked = counted.as_ref().map(|c| *c).unwrap_or(0);
    record("all N+1 bases pairwise MU", counted.map(|_| ()));
    record("eigenvalue relations", m.verify_eigenvalues());
    record("shift action", m.verify_shift_action());
    record("trace relation", m.verify_trace_relation());
    if ctx.format_or(Format::Ascii) == Format::Json {
        ctx.emit(&json!({
            "N": m.n(),
            "overlapsChecked": checked,
            "tol": "exact",
            "checks": lines.iter().map(|(k, ok, msg)| json!({"name": k, "pass": ok, "detail": msg})).collect::<Vec<_>>(),
        }))?;
    } else {
        let text: String = lines.iter().map(|(k, ok, _)| format!("{k}: {}\n", if *ok { "PASS" } else { "FAIL" })).collect();
        ctx.write(&text)?;
    }
    check(failed.is_empty(), || failed.join("; "))
}

fn bell(f: &FieldArgs, ctx: &Ctx) -> Outcome {
    const TOL: f64 = 1e-9;
    let b = BellBasis::new(spec_of(f)?);
    let d = b.n() as u32;
    let mut worst: f64 = 0.0;
    let mut wrong = Vec::new();
    for m in 0..d {
        for n in 0..d {
            let r = dense_coding_sim(&b, m, n)?;
            worst = worst.max((r.probability - 1.0).abs());
            if r.decoded != r.sent {
                wrong.push([m, n]);
            }
        }
    }
    let ok = wrong.is_empty() && worst < TOL;
    ctx.emit(&json!({
        "N": d, "messages": d * d, "misdecoded": wrong, "maxProbabilityDeviation": worst, "tol": TOL, "pass": ok,
    }))?;
    check(ok, || format!("dense coding failed for {} messages", wrong.len()))
}

fn teleport(f: &FieldArgs, ctx: &Ctx) -> Outcome {
    const TOL: f64 = 1e-9;
    let b = BellBasis::new(spec_of(f)?);
    let psi = random_state(b.n(), &mut ctx.rng());
    let branches = teleport_sim(&b, &psi)?;
    let want = 1.0 / (b.n() * b.n()) as f64;
    let ok = branches.iter().all(|br| (br.fidelity - 1.0).abs() < TOL && (br.probability - want).abs() < TOL);
    ctx.emit(&json!({
        "N": b.n(),
        "state": psi.amps.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "branches": branches.iter().map(|br| json!({"m": br.m, "n": br.n, "probability": br.probability, "fidelity": br.fidelity})).collect::<Vec<_>>(),
        "tol": TOL,
        "pass": ok,
    }))?;
    check(ok, || "a teleportation branch has fidelity or probability off".into())
}

fn clone(f: &FieldArgs, ctx: &Ctx) -> Outcome {
    const TOL: f64 = 1e-9;
    let b = BellBasis::new(spec_of(f)?);
    let d = b.n();
    let mut rng = ctx.rng();
    let psi = random_state(d, &mut rng);
    let a = CMat::from_fn(d, d, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let a = &a / Complex64::from(a.norm());
    let r = cerf_clone(&b, &a, &psi)?;
    let ok = r.closed_form_residual < TOL && r.dual_route_residual < TOL;
    ctx.emit(&json!({
        "N": d,
        "amplitudes": float_json(&a),
        "b": float_json(&r.b),
        "rho1": float_json(&r.rho1),
        "rho3": float_json(&r.rho3),
        "closedFormResidual": r.closed_form_residual,
        "dualRouteResidual": r.dual_route_residual,
        "tol": TOL,
        "pass": ok,
    }))?;
    check(ok, || format!("clone residuals {:e}, {:e}", r.closed_form_residual, r.dual_route_residual))
}

fn swap(f: &FieldArgs, bm: u32, bn: u32, ctx: &Ctx) -> Outcome {
    const TOL: f64 = 1e-9;
    let b = BellBasis::new(spec_of(f)?);
    let outs = swap_sim(&b, bm, bn)?;
    let ok = outs.iter().all(|o| o.probability < 1e-12 || (o.fidelity - 1.0).abs() < TOL);
    ctx.emit(&json!({
        "N": b.n(),
        "input": [bm, bn],
        "outcomes": outs.iter().map(|o| json!({"m": o.m, "n": o.n, "probability": o.probability, "fidelity": o.fidelity})).collect::<Vec<_>>(),
        "tol": TOL,
        "pass": ok,
    }))?;
    check(ok, || "a swap outcome has fidelity below 1".into())
}

fn meanking(n: u32, grids: bool, trials: usize, ctx: &Ctx) -> Outcome {
    let spec = Arc::new(GfSpec::of_order(n)?);
    if grids {
        let all: Vec<Vec<Vec<u32>>> = (0..=n as usize).map(|i| grid(&spec, i)).collect();
        if ctx.format_or(Format::Ascii) == Format::Json {
            return ctx.emit(&json!({"N": n, "grids": all}));
        }
        let text: String = all.iter().enumerate().map(|(i, g)| format!("i = {i}\n{}\n", render_grid(g))).collect();
        return ctx.write(&text);
    }
    let m = MubSet::standard(spec)?;
    let rep = mk_protocol_sim(&m, trials, ctx.seed)?;
    let mut v = rep.to_json();
    v["tol"] = json!(1e-9);
    ctx.emit(&v)?;
    check(rep.all_exact_correct() && rep.successes == rep.trials, || format!("success rate {}", rep.success_rate()))
}

fn wigner(f: &FieldArgs, twist: Option<&[u32]>, ctx: &Ctx) -> Outcome {
    let spec = spec_of(f)?;
    let mut alpha = AlphaTable::new(&spec, true);
    if let Some(b) = twist {
        if b.len() != spec.n() as usize || b.iter().any(|&x| x >= spec.n()) {
            return Err(Failure::Usage(format!("twist needs {} field elements", spec.n())));
        }
        alpha = alpha.twisted(&spec, b);
    }
    let m = MubSet::new(spec, alpha)?;
    let basis = wigner_basis(&m);
    let rep = wigner_criteria(&m, &basis);
    let d = m.n() as u32;
    let ops: Vec<Value> = (0..d)
        .flat_map(|a| (0..d).map(move |b| (a, b)))
        .map(|(a, b)| json!({"m": a, "n": b, "W": float_json(basis.get(a, b))}))
        .collect();
    // Reported only; the relation is not expected to hold for every choice.
    let cov = covariance_experiment(&m);
    ctx.emit(&json!({
        "N": d,
        "criteria": rep.to_json(),
        "tol": 1e-10,
        "covarianceExperiment": {"residuals": cov.residuals, "holds": cov.holds()},
        "operators": ops,
    }))?;
    check(rep.all_pass(), || format!("Wigner criteria failed: {}", rep.to_json()))
}

fn tomo(f: &FieldArgs, samples: usize, ctx: &Ctx) -> Outcome {
    const TOL: f64 = 1e-9;
    let m = build_mub(f, true)?;
    let mut rng = ctx.rng();
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let rho = random_density(m.n(), &mut rng);
        let back = reconstruct(&m, &tomography(&m, &rho)?)?;
        worst = worst.max((&rho - &back).norm());
    }
    ctx.emit(&json!({"N": m.n(), "samples": samples, "maxFrobeniusError": worst, "tol": TOL, "pass": worst < TOL}))?;
    check(worst < TOL, || format!("round-trip error {worst:e}"))
}

fn hadamard_cmd(a: &HadamardCmd, ctx: &Ctx) -> Outcome {
    match a {
        HadamardCmd::List => {
            if ctx.format_or(Format::Json) == Format::Ascii {
                return ctx.write(&(hadamard::FAMILY_NAMES.join("\n") + "\n"));
            }
            ctx.emit(&json!(hadamard::FAMILY_NAMES))
        }
        HadamardCmd::Build(m) => {
            let h = matrix_of(&m.spec)?;
            let mut v = h.to_json();
            v["residual"] = json!(h.residual());
            ctx.emit(&v)
        }
        HadamardCmd::Check { matrix, tol } => {
            let h = matrix_of(&matrix.spec)?;
            let ok = h.is_hadamard(*tol);
            ctx.emit(&json!({"family": h.family(), "N": h.n(), "residual": h.residual(), "tol": tol, "hadamard": ok}))?;
            check(ok, || format!("residual {:e} exceeds {tol:e}", h.residual()))
        }
        HadamardCmd::Equiv { left, right, budget } => {
            let cert = hadamard::equivalent(&matrix_of(left)?, &matrix_of(right)?, *budget)?;
            let mut v = cert.to_json();
            v["tol"] = json!({"invariants": hadamard::INVARIANT_TOL, "witness": 1e-8});
            ctx.emit(&v)
        }
        HadamardCmd::Defect(m) => {
            let h = matrix_of(&m.spec)?;
            let d = hadamard::defect(&h)?;
            ctx.emit(&json!({"family": h.family(), "params": h.params(), "N": h.n(), "defect": d, "tol": {"rank": [1e-8, 1e-6]}}))
        }
        HadamardCmd::Muhm { n } => {
            let s = hadamard::standard_muhm(*n)?;
            let mut v = s.to_json();
            v["tol"] = json!(1e-10);
            ctx.emit(&v)?;
            check(s.all_mu(), || format!("offsets {:?} give non-Hadamard products", s.failing_offsets))
        }
    }
}

fn search_cmd(a: &SearchCmd, ctx: &Ctx) -> Outcome {
    match a {
        SearchCmd::Unbiased { family, a, b, params, restarts, saturation, probe } => {
            let params = params.clone().unwrap_or_else(|| [*a, *b].into_iter().flatten().collect());
            let h = hadamard::family(family, &params)?;
            let cfg = SearchConfig { max_restarts: *restarts, saturation: *saturation, seed: ctx.seed, ..SearchConfig::default() };
            let cat = search::unbiased_vector_search(&h, &cfg);
            let mut v = cat.to_json();
            v["tol"] = json!({"residual": cfg.tol, "dedup": cfg.dedup_tol});
            v["seed"] = json!(ctx.seed);
            if *probe && !cat.incomplete {
                v["probe"] = search::extendability_probe(&cat).map(|r| r.to_json()).unwrap_or_else(|e| json!(e.to_string()));
            }
            ctx.emit(&v)?;
            check(!cat.incomplete, || format!("no saturation after {} restarts", cat.restarts))
        }
        SearchCmd::Constellation { shape, n, restarts } => {
            let r = search::constellation_search(shape, *n, *restarts, ctx.seed)?;
            let mut v = r.to_json();
            v["tol"] = json!(mubkit::search::ConstellationResult::SUCCESS);
            ctx.emit(&v)
        }
        SearchCmd::Haar { n, samples } => {
            if *n < 1 || *samples < 2 {
                return Err(Failure::Usage("haar needs n >= 1 and samples >= 2".into()));
            }
            let (mean, se) = search::haar_pair_d2_stats(*n, *samples, ctx.seed);
            let want = (n * (n - 1)) as f64 / (n + 1) as f64;
            ctx.emit(&json!({"N": n, "samples": samples, "mean": mean, "stdErr": se, "expected": want, "withinTwoStdErr": (mean - want).abs() <= 2.0 * se}))
        }
    }
}

fn gnum(max: u64, csv: bool, ctx: &Ctx) -> Outcome {
    if max < 2 {
        return Err(Failure::Usage("gnum needs --max >= 2".into()));
    }
    if csv || ctx.format == Some(Format::Csv) {
        return ctx.write(&g_table_csv(max));
    }
    let disagree: Vec<u64> = (1..=max).filter(|&n| is_prime_via_g(n) != is_prime(n)).collect();
    let neg = negative_g_values(max);
    ctx.emit(&json!({
        "max": max,
        "negativeCount": neg.len(),
        "negative": neg,
        "primeTestDisagreements": disagree,
        "tol": "exact",
    }))?;
    check(disagree.is_empty(), || format!("g(N) = 0 test disagrees at {disagree:?}"))
}

fn export(f: &FieldArgs, ctx: &Ctx) -> Outcome {
    let m = build_mub(f, true)?;
    let basis = wigner_basis(&m);
    let d = m.n() as u32;
    let w: Vec<Value> = (0..d)
        .flat_map(|a| (0..d).map(move |b| (a, b)))
        .map(|(a, b)| json!({"m": a, "n": b, "W": float_json(basis.get(a, b))}))
        .collect();
    ctx.emit(&json!({"mub": m.to_json(), "wigner": w}))
}
