use mcl_core::binomial;
use mcl_core::concentration::{
    chernoff_okamoto_bound, halfcube_alpha_exact, hamming_grid, neighborhood_measure,
    nn_radius_stats, HalfCube,
};
use mcl_core::DomainSpec;

#[test]
fn exact_halfcube_sits_below_the_bound() {
    for d in [10usize, 50, 200] {
        for eps in hamming_grid(d, d / 3) {
            assert!(
                halfcube_alpha_exact(d, eps).unwrap()
                    <= chernoff_okamoto_bound(eps, d).unwrap() + 1e-15
            );
        }
    }
}

#[test]
fn halfcube_matches_direct_binomial_sum() {
    // 1 - P(Bin(50, 1/2) <= 30)
    let direct = 1.0 - binomial::cdf_le(50, 30);
    assert!((halfcube_alpha_exact(50, 0.1).unwrap() - direct).abs() < 1e-12);
}

#[test]
fn neighbourhood_of_the_halfcube() {
    let spec = DomainSpec::hamming(50);
    let m = neighborhood_measure(&spec, &HalfCube, 0.1, 20_000, 3).unwrap();
    let want = 1.0 - halfcube_alpha_exact(50, 0.1).unwrap();
    assert!((m.value - want).abs() < 4.0 * m.stderr.max(1e-3));
}

#[test]
fn nn_radius_concentrates() {
    let a = nn_radius_stats(&DomainSpec::hamming(32), 64, 200, 1).unwrap();
    let b = nn_radius_stats(&DomainSpec::hamming(128), 64, 200, 1).unwrap();
    assert!(b.median > a.median);
    assert!(b.p90 - b.p10 < a.p90 - a.p10);
}
