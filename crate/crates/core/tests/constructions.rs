use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shadowlab_core::constructions::{extract_horseshoe, proximal_subshift, HorseshoeParams};
use shadowlab_core::measures::{classify_point, orbit_signatures};
use shadowlab_core::{Shift, TargetMeasure, Verdict};

#[test]
fn proximal_points_through_a_horseshoe_carry_two_measures() {
    let sh = Shift::full(2).unwrap();
    let hs = extract_horseshoe(
        &sh,
        &TargetMeasure::uniform_bernoulli(2),
        0.3,
        0.05,
        &HorseshoeParams { checks: 50, ..Default::default() },
    )
    .unwrap();
    let spec = proximal_subshift(2, 0.5).unwrap();
    let code = [0usize, hs.r / 2, hs.r - 1];

    let fixed = hs.section(&[], &[code[0]]).unwrap();
    let c = classify_point(&sh, &fixed, &[1000, 2000, 4000, 8000], 20, 0.02).unwrap();
    assert_eq!(c.verdict, Verdict::QuasiRegularCandidate);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let xi: Vec<usize> = spec.sample_word(0, 2 * 640, &mut rng).iter().map(|&s| code[s as usize]).collect();
    let typical = hs.section(&xi, &[]).unwrap();
    let n = 10 * 1200;
    let a = orbit_signatures(&sh, &typical, &[n], 20).unwrap().pop().unwrap();
    let b = orbit_signatures(&sh, &fixed, &[n], 20).unwrap().pop().unwrap();
    let d = a.rho(&b).unwrap();
    assert!(d.value > 0.02 + 2.0 * d.tail_bound, "{d:?}");

    // the fixed orbit lies in the closure of the typical one
    let run = xi.windows(4).position(|w| w.iter().all(|&s| s == code[0])).expect("a 0^4 block");
    let near = typical.shifted(run * hs.k);
    let d = near.distance(&fixed).unwrap();
    assert!(d <= (-39f64).exp2(), "{d}");
}
