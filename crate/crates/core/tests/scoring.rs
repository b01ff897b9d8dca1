use facesym_core::regions::Mask;
use facesym_core::synthetic::SyntheticFace;
use facesym_core::{
    movement_score, score_sequence, symmetry_score, synthesize_asymmetric, threshold_magnitudes,
    FlowParams, MagnitudeMap, Plane, Region, RegionConfig, ScoreConfig, Side, SynthConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent Eq.-4-style summation: pixel-major double loop.
fn brute_force_movement(mags: &[MagnitudeMap], mask: &Mask) -> f64 {
    let (w, h) = (mask.width(), mask.height());
    let mut total = 0.0;
    let mut m = 0usize;
    for y in 0..h {
        for x in 0..w {
            if mask.contains(x, y) {
                m += 1;
                for mag in mags {
                    total += mag.get(x, y);
                }
            }
        }
    }
    total / (m as f64 * mags.len() as f64)
}

fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<MagnitudeMap>, Mask) {
    let (w, h) = (rng.gen_range(4..40), rng.gen_range(4..40));
    let pairs = rng.gen_range(1..8);
    let mags = (0..pairs)
        .map(|_| {
            MagnitudeMap::new(Plane::from_fn(w, h, |_, _| rng.gen_range(0.0..3.0))).unwrap()
        })
        .collect();
    let mut bits: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(0.3)).collect();
    bits[rng.gen_range(0..w * h)] = true;
    (mags, Mask::new(w, h, bits))
}

#[test]
fn movement_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let (mags, mask) = random_instance(&mut rng);
        let fast = movement_score(&mags, &mask, mags.len() + 1).unwrap();
        let slow = brute_force_movement(&mags, &mask);
        assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }
}

fn mags_strategy() -> impl Strategy<Value = (usize, usize, Vec<Vec<f64>>, Vec<bool>)> {
    (2usize..12, 2usize..12, 1usize..5).prop_flat_map(|(w, h, n)| {
        (
            Just(w),
            Just(h),
            proptest::collection::vec(proptest::collection::vec(0.0f64..5.0, w * h), n),
            proptest::collection::vec(any::<bool>(), w * h),
        )
    })
}

fn build(w: usize, h: usize, maps: &[Vec<f64>]) -> Vec<MagnitudeMap> {
    maps.iter()
        .map(|d| MagnitudeMap::new(Plane::new(w, h, d.clone())).unwrap())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn symmetry_score_bounds_and_commutes(a in 0.0f64..10.0, b in 0.0f64..10.0, lambda in 0.01f64..20.0) {
        let s = symmetry_score(a, b, lambda);
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s, symmetry_score(b, a, lambda));
        prop_assert_eq!(s == 1.0, a == b);
    }

    #[test]
    fn threshold_never_increases((w, h, maps, bits) in mags_strategy(), factor in 0.0f64..10.0) {
        let mags = build(w, h, &maps);
        let mut mask_bits = bits;
        mask_bits[0] = true;
        let mask = Mask::new(w, h, mask_bits);
        let thresholded: Vec<MagnitudeMap> = mags.iter().map(|m| threshold_magnitudes(m, factor)).collect();
        for (t, m) in thresholded.iter().zip(&mags) {
            for (a, b) in t.values().iter().zip(m.values()) {
                prop_assert!(*a == 0.0 || a == b);
                prop_assert!(a <= b);
            }
        }
        let n = mags.len() + 1;
        prop_assert!(movement_score(&thresholded, &mask, n).unwrap() <= movement_score(&mags, &mask, n).unwrap());
    }

    #[test]
    fn movement_linear_and_permutation_invariant((w, h, maps, bits) in mags_strategy(), k in 0.1f64..10.0, shift in 0usize..1000) {
        let mut mask_bits = bits;
        mask_bits[0] = true;
        let mags = build(w, h, &maps);
        let mask = Mask::new(w, h, mask_bits.clone());
        let n = mags.len() + 1;
        let base = movement_score(&mags, &mask, n).unwrap();

        let scaled: Vec<Vec<f64>> = maps.iter().map(|d| d.iter().map(|v| v * k).collect()).collect();
        let s = movement_score(&build(w, h, &scaled), &mask, n).unwrap();
        prop_assert!((s - k * base).abs() <= 1e-9 * (1.0 + k * base));

        // rotate pixel order of both maps and mask together
        let len = w * h;
        let r = shift % len;
        let rot = |v: &Vec<f64>| { let mut v = v.clone(); v.rotate_left(r); v };
        let rotated: Vec<Vec<f64>> = maps.iter().map(rot).collect();
        let mut rb = mask_bits;
        rb.rotate_left(r);
        let p = movement_score(&build(w, h, &rotated), &Mask::new(w, h, rb), n).unwrap();
        prop_assert!((p - base).abs() <= 1e-12 * (1.0 + base));
    }
}

fn params() -> (FlowParams, ScoreConfig, RegionConfig) {
    (FlowParams::default(), ScoreConfig::default(), RegionConfig::default())
}

#[test]
fn static_sequence_is_perfectly_symmetric() {
    let (fp, sc, rc) = params();
    for frames in [2, 4] {
        let face = SyntheticFace {
            frames,
            ..Default::default()
        };
        let report = score_sequence(&face.sequence(), &face.landmarks(), &fp, &sc, &rc).unwrap();
        for r in &report.regions {
            assert!(r.v_left < 1e-3 && r.v_right < 1e-3);
            assert_eq!(r.s_s, 1.0);
        }
        assert_eq!(report.frames, frames);
    }
}

#[test]
fn symmetric_motion_scores_high_and_synthesis_lowers_it() {
    let (fp, sc, rc) = params();
    for region in Region::ALL {
        let face = SyntheticFace {
            motion: Some(region),
            ..Default::default()
        };
        let seq = face.sequence();
        let lm = face.landmarks();
        let orig = score_sequence(&seq, &lm, &fp, &sc, &rc).unwrap();
        let asym_seq = synthesize_asymmetric(&seq, &lm, &SynthConfig::default(), &rc).unwrap();
        let asym = score_sequence(&asym_seq, &lm, &fp, &sc, &rc).unwrap();
        for r in Region::ALL {
            let (o, a) = (orig.region(r), asym.region(r));
            println!(
                "motion {region}: {r} orig S_S {:.3} (V {:.4}/{:.4}) asym S_S {:.3} (V {:.4}/{:.4})",
                o.s_s, o.v_left, o.v_right, a.s_s, a.v_left, a.v_right
            );
            assert!(o.s_s >= 0.95);
            assert!(a.s_s <= o.s_s + 0.02);
        }
        assert!(orig.region(region).v_left > 0.0);
        assert!(asym.region(region).s_s < orig.region(region).s_s);
    }
}

#[test]
fn mirrored_sequence_swaps_sides() {
    let (fp, sc, rc) = params();
    let face = SyntheticFace {
        motion: Some(Region::Cheek),
        motion_side: Some(Side::Left),
        ..Default::default()
    };
    let seq = face.sequence();
    let lm = face.landmarks();
    let report = score_sequence(&seq, &lm, &fp, &sc, &rc).unwrap();
    let mirrored = score_sequence(&seq.flipped_horizontal(), &lm.mirrored(face.width), &fp, &sc, &rc)
        .unwrap();
    for (a, b) in report.regions.iter().zip(&mirrored.regions) {
        assert!((a.s_s - b.s_s).abs() <= 0.02);
        assert!((a.v_left - b.v_right).abs() < 5e-3, "{a:?} vs {b:?}");
        assert!((a.v_right - b.v_left).abs() < 5e-3);
    }
    assert!(report.region(Region::Cheek).v_left > report.region(Region::Cheek).v_right);
}

#[test]
fn scoring_is_bit_deterministic() {
    let (fp, sc, rc) = params();
    let face = SyntheticFace {
        motion: Some(Region::Eye),
        ..Default::default()
    };
    let (seq, lm) = (face.sequence(), face.landmarks());
    let a = score_sequence(&seq, &lm, &fp, &sc, &rc).unwrap();
    let b = score_sequence(&seq, &lm, &fp, &sc, &rc).unwrap();
    for (x, y) in a.regions.iter().zip(&b.regions) {
        assert_eq!(x.v_left.to_bits(), y.v_left.to_bits());
        assert_eq!(x.v_right.to_bits(), y.v_right.to_bits());
        assert_eq!(x.s_s.to_bits(), y.s_s.to_bits());
    }
}

#[test]
fn stage_labels_propagate() {
    let (fp, sc, rc) = params();
    let face = SyntheticFace::default();
    // landmarks of a face larger than the frame
    let lm = face.landmarks().scaled(3.0);
    let err = score_sequence(&face.sequence(), &lm, &fp, &sc, &rc).unwrap_err();
    assert_eq!(err.stage(), Some(facesym_core::Stage::Crop));
    assert!(err.to_string().starts_with("[crop] LandmarkOutOfBounds"));

    let bad = FlowParams {
        poly_n: 4,
        ..fp
    };
    let err = score_sequence(&face.sequence(), &face.landmarks(), &bad, &sc, &rc).unwrap_err();
    assert!(err.to_string().contains("[flow] InvalidParams"));
}
