use mubkit::hadamard::f6;
use mubkit::search::{extendability_probe, unbiased_vector_search, SearchConfig};

#[test]
fn fourier6_catalog_counts_and_probe() {
    let cat = unbiased_vector_search(&f6(0.0, 0.0).unwrap(), &SearchConfig::default());
    assert!(!cat.incomplete);
    assert_eq!(cat.n_v(), 48);
    assert_eq!(cat.n_t(), 16);
    let rep = extendability_probe(&cat).unwrap();
    println!("raw {} normalized {}", rep.max_d2_raw, rep.max_d2_normalized);
    assert!(rep.max_d2_normalized < 1.0 - 1e-3);
    assert!((rep.max_d2_normalized - 0.93).abs() <= 0.01);
}

#[test]
fn dita_catalog_counts() {
    let cat = unbiased_vector_search(&mubkit::hadamard::dita(0.0).unwrap(), &SearchConfig::default());
    println!("dita: nv {} nt {} restarts {}", cat.n_v(), cat.n_t(), cat.restarts);
    assert!(!cat.incomplete);
    assert_eq!(cat.n_v(), 120);
    assert_eq!(cat.n_t(), 10);
}
