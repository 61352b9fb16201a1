use crate::cmds::{check, random_density, random_state, Ctx};
use crate::{Cmd, Failure};
use mubkit::bellproto::{cerf_clone, dense_coding_sim, swap_sim, teleport_sim, BellBasis};
use mubkit::cnum::CMatrix;
use mubkit::gf::{is_prime, verify_axioms, GfSpec};
use mubkit::hadamard::{self, defect};
use mubkit::meanking::{mk_protocol_sim, AffinePlane};
use mubkit::mub::MubSet;
use mubkit::numth::{g_exact, g_float, is_prime_via_g};
use mubkit::phasespace::{reconstruct, tomography, wigner_basis, wigner_criteria};
use mubkit::search::{unbiased_vector_search, SearchConfig};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::sync::Arc;

type Checks = Vec<(String, bool)>;

fn spec(n: u32) -> Arc<GfSpec> {
    Arc::new(GfSpec::of_order(n).expect("prime power"))
}

fn mub(n: u32) -> MubSet {
    MubSet::standard(spec(n)).expect("standard set")
}

const ORDERS: [u32; 6] = [2, 3, 4, 5, 8, 9];

fn field_suite() -> Checks {
    ORDERS.iter().map(|&n| (format!("axioms GF({n})"), verify_axioms(spec(n).as_ref()).is_ok())).collect()
}

fn mub_suite() -> Checks {
    ORDERS
        .iter()
        .map(|&n| {
            let m = mub(n);
            let ok = m.verify_unbiased().is_ok()
                && m.verify_eigenvalues().is_ok()
                && m.verify_shift_action().is_ok()
                && m.verify_trace_relation().is_ok();
            (format!("MUB N={n}"), ok)
        })
        .collect()
}

fn protocol_suite() -> Checks {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut out = Vec::new();
    for n in [2u32, 3, 4, 5] {
        let b = BellBasis::new(spec(n));
        let dense = (0..n).all(|m| (0..n).all(|k| dense_coding_sim(&b, m, k).is_ok_and(|r| r.decoded == r.sent)));
        out.push((format!("dense coding N={n}"), dense));
        let psi = random_state(n as usize, &mut rng);
        let tele = teleport_sim(&b, &psi).is_ok_and(|br| br.iter().all(|x| (x.fidelity - 1.0).abs() < 1e-9));
        out.push((format!("teleport N={n}"), tele));
        let sw = swap_sim(&b, 1 % n, 0).is_ok_and(|o| o.iter().all(|x| x.probability < 1e-12 || (x.fidelity - 1.0).abs() < 1e-9));
        out.push((format!("swap N={n}"), sw));
        let d = n as usize;
        let a = DMatrix::from_element(d, d, Complex64::from(1.0 / d as f64));
        let cl = cerf_clone(&b, &a, &psi).is_ok_and(|r| r.closed_form_residual < 1e-9 && r.dual_route_residual < 1e-9);
        out.push((format!("clone N={n}"), cl));
    }
    out
}

fn meanking_suite() -> Checks {
    let mut out: Checks = [2u32, 3, 4, 5]
        .iter()
        .map(|&n| (format!("protocol N={n}"), mk_protocol_sim(&mub(n), 100, 1).is_ok_and(|r| r.all_exact_correct())))
        .collect();
    out.extend(ORDERS.iter().map(|&n| (format!("affine plane N={n}"), AffinePlane::new(&spec(n)).verify().is_ok())));
    out
}

fn wigner_suite() -> Checks {
    [2u32, 3, 4, 5, 9]
        .iter()
        .map(|&n| {
            let m = mub(n);
            (format!("W1-W5 N={n}"), wigner_criteria(&m, &wigner_basis(&m)).all_pass())
        })
        .collect()
}

fn tomo_suite() -> Checks {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    [3u32, 4, 5]
        .iter()
        .map(|&n| {
            let m = mub(n);
            let ok = (0..10).all(|_| {
                let rho = random_density(n as usize, &mut rng);
                tomography(&m, &rho).and_then(|p| reconstruct(&m, &p)).is_ok_and(|back| (&rho - &back).norm() < 1e-9)
            });
            (format!("round trip N={n}"), ok)
        })
        .collect()
}

fn hadamard_suite() -> Checks {
    let mut out: Checks = [("F6", vec![0.1, 0.2]), ("dita", vec![0.05]), ("tao_s6", vec![]), ("F4", vec![0.3]), ("bjorck_c6", vec![])]
        .into_iter()
        .map(|(name, p)| (format!("{name} is Hadamard"), hadamard::family(name, &p).is_ok_and(|h| h.is_hadamard(1e-10))))
        .collect();
    out.push(("defect F4 = 1".into(), hadamard::fourier(4).and_then(|h| defect(&h)).is_ok_and(|d| d == 1)));
    out.push(("defect F5 = 0".into(), hadamard::fourier(5).and_then(|h| defect(&h)).is_ok_and(|d| d == 0)));
    out.push(("standard MUHM N=7".into(), hadamard::standard_muhm(7).is_ok_and(|s| s.all_mu())));
    out
}

fn search_suite() -> Checks {
    let cat = unbiased_vector_search(&hadamard::fourier(3).expect("F3"), &SearchConfig::default());
    vec![("F3 catalog 6 vectors, 2 bases".into(), !cat.incomplete && cat.n_v() == 6 && cat.n_t() == 2)]
}

fn gnum_suite() -> Checks {
    vec![
        ("g(N) = 0 iff prime, N <= 300".into(), (1..=300u64).all(|n| is_prime_via_g(n) == is_prime(n))),
        ("exact vs float, N <= 60".into(), (2..=60u64).all(|n| (g_exact(n).to_f64() - g_float(n)).abs() < 1e-6)),
    ]
}

fn export_suite() -> Checks {
    [2u32, 3, 4]
        .iter()
        .map(|&n| {
            let b = CMatrix::from(mub(n).basis(1));
            let ok = CMatrix::from_json(&b.to_json()).is_ok_and(|back| back.to_json() == b.to_json());
            (format!("exact JSON round trip N={n}"), ok)
        })
        .collect()
}

pub fn run(cmd: &Cmd, ctx: &Ctx) -> Result<(), Failure> {
    let (name, checks) = match cmd {
        Cmd::Field(_) => ("field", field_suite()),
        Cmd::Mub { .. } | Cmd::Verify(_) => ("mub", mub_suite()),
        Cmd::Bell(_) | Cmd::Teleport(_) | Cmd::Clone(_) | Cmd::Swap { .. } => ("bellproto", protocol_suite()),
        Cmd::Meanking { .. } => ("meanking", meanking_suite()),
        Cmd::Wigner { .. } => ("phasespace", wigner_suite()),
        Cmd::Tomo { .. } => ("tomography", tomo_suite()),
        Cmd::Hadamard { .. } => ("hadamard", hadamard_suite()),
        Cmd::Search { .. } => ("search", search_suite()),
        Cmd::Gnum { .. } => ("numth", gnum_suite()),
        Cmd::Export(_) => ("export", export_suite()),
    };
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0.as_str()).collect();
    ctx.emit(&json!({
        "selftest": name,
        "checks": checks.iter().map(|(k, ok)| json!({"name": k, "pass": ok})).collect::<Vec<_>>(),
        "pass": failed.is_empty(),
    }))?;
    check(failed.is_empty(), || format!("{name} selftest: {}", failed.join(", ")))
}
