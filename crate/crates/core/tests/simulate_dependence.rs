use extremal_core::bvpp::{DependenceFamily, FamilyTag};
use extremal_core::simulate::sim_bvevd;

// 2 - V(1,1) from componentwise maxima of blocks of 100. For a unit-Fréchet
// max-stable pair, 100/max(Mx, My) is exponential with rate V(1, 1) while
// 100/Mx and 100/My have rate 1; the ratio cancels most sampling noise.
fn block_chi(sample: &[(f64, f64)]) -> f64 {
    let (mut joint, mut margins) = (0.0, 0.0);
    for b in sample.chunks_exact(100) {
        let mx = b.iter().map(|p| p.0).fold(f64::MIN, f64::max);
        let my = b.iter().map(|p| p.1).fold(f64::MIN, f64::max);
        joint += 1.0 / mx.max(my);
        margins += 0.5 * (1.0 / mx + 1.0 / my);
    }
    2.0 - margins / joint
}

#[test]
fn block_maxima_match_analytic_chi() {
    let cases: [(FamilyTag, &[f64]); 6] = [
        (FamilyTag::Logistic, &[0.5]),
        (FamilyTag::NegLogistic, &[1.0]),
        (FamilyTag::HuslerReiss, &[1.3]),
        (FamilyTag::Bilogistic, &[0.4, 0.7]),
        (FamilyTag::NegBilogistic, &[1.0, 3.0]),
        (FamilyTag::ColesTawn, &[0.8, 2.0]),
    ];
    for (k, (tag, p)) in cases.into_iter().enumerate() {
        let fam = DependenceFamily::new(tag, p).unwrap();
        let sample = sim_bvevd(&fam, 200_000, 100 + k as u64).unwrap();
        let est = block_chi(&sample);
        assert!((est - fam.chi()).abs() < 0.05, "{tag}: {est} vs {}", fam.chi());
    }
}
