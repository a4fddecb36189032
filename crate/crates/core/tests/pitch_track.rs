use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sori_core::f0::{filter_track, hz_to_cents, F0Frame, F0Track, FilterConfig};
use sori_core::yin::{estimate_f0_yin, YinConfig};

const SR: u32 = 44_100;

fn sine(hz: f64, secs: f64) -> Vec<f64> {
    let n = (f64::from(SR) * secs) as usize;
    (0..n)
        .map(|i| (2.0 * PI * hz * i as f64 / f64::from(SR)).sin())
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

#[test]
fn pure_tone_sweep_350_to_1000() {
    let cfg = YinConfig::new(SR);
    for step in 0..=13 {
        let hz = 350.0 + 50.0 * f64::from(step);
        let track = estimate_f0_yin(&sine(hz, 1.0), &cfg).unwrap();
        let voiced: Vec<f64> = track.frames().iter().filter_map(|f| f.f0_hz).collect();
        assert!(voiced.len() * 100 >= track.len() * 95, "{hz} Hz voicing");
        for v in voiced {
            let err = hz_to_cents(v, hz).unwrap();
            assert!(err.abs() <= 5.0, "{hz} Hz estimated {v} ({err:.2} cents)");
        }
    }
}

#[test]
fn noisy_sawtooth_c5() {
    let hz = 523.25;
    let n = 2 * SR as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let saw: Vec<f64> = (0..n)
        .map(|i| {
            let phase = (hz * i as f64 / f64::from(SR)).fract();
            2.0 * phase - 1.0
        })
        .collect();
    let signal_rms = (saw.iter().map(|x| x * x).sum::<f64>() / n as f64).sqrt();
    // -20 dB: noise RMS is a tenth of the signal RMS. Uniform noise on
    // [-a, a] has RMS a / sqrt(3).
    let a = 0.1 * signal_rms * 3f64.sqrt();
    let noisy: Vec<f64> = saw.iter().map(|x| x + rng.gen_range(-a..a)).collect();

    let track = estimate_f0_yin(&noisy, &YinConfig::new(SR)).unwrap();
    let voiced: Vec<f64> = track.frames().iter().filter_map(|f| f.f0_hz).collect();
    assert!(!voiced.is_empty());
    let err = hz_to_cents(median(voiced), hz).unwrap();
    assert!(err.abs() <= 10.0, "median off by {err:.2} cents");
}

#[test]
fn eight_kilohertz_input() {
    let sr = 8000u32;
    let hz = 600.0;
    let samples: Vec<f64> = (0..sr as usize)
        .map(|i| (2.0 * PI * hz * i as f64 / f64::from(sr)).sin())
        .collect();
    let track = estimate_f0_yin(&samples, &YinConfig::new(sr)).unwrap();
    let m = median(track.frames().iter().filter_map(|f| f.f0_hz).collect());
    assert!(hz_to_cents(m, hz).unwrap().abs() < 10.0);
}

fn arb_frame() -> impl Strategy<Value = (Option<f64>, f64)> {
    (
        prop_oneof![Just(None), (100.0f64..1500.0).prop_map(Some)],
        0.0f64..=1.0,
    )
}

fn arb_track() -> impl Strategy<Value = F0Track> {
    prop::collection::vec(arb_frame(), 0..60).prop_map(|v| {
        let frames = v
            .into_iter()
            .enumerate()
            .map(|(i, (hz, c))| F0Frame {
                time_s: i as f64 * 0.01,
                f0_hz: hz,
                confidence: c,
            })
            .collect();
        F0Track::new(frames, 0.01).unwrap()
    })
}

proptest! {
    #[test]
    fn filter_is_idempotent(track in arb_track()) {
        let cfg = FilterConfig::default();
        let once = filter_track(&track, &cfg);
        prop_assert_eq!(filter_track(&once, &cfg), once);
    }

    #[test]
    fn filter_preserves_time_base(track in arb_track(), min_conf in 0.0f64..1.0) {
        let cfg = FilterConfig { min_confidence: min_conf, ..FilterConfig::default() };
        let out = filter_track(&track, &cfg);
        prop_assert_eq!(out.len(), track.len());
        prop_assert_eq!(out.hop_s(), track.hop_s());
        for (a, b) in out.frames().iter().zip(track.frames()) {
            prop_assert_eq!(a.time_s, b.time_s);
            prop_assert!(a.f0_hz.is_none() || a.f0_hz == b.f0_hz);
        }
    }

    #[test]
    fn confidence_and_range_filters_commute(track in arb_track()) {
        let conf_only = FilterConfig { min_confidence: 0.6, min_hz: 1e-9, max_hz: f64::MAX };
        let range_only = FilterConfig { min_confidence: 0.0, ..FilterConfig::default() };
        let a = filter_track(&filter_track(&track, &conf_only), &range_only);
        let b = filter_track(&filter_track(&track, &range_only), &conf_only);
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a, filter_track(&track, &FilterConfig::default()));
    }

    #[test]
    fn cents_antisymmetric_and_additive(a in 20.0f64..5000.0, b in 20.0f64..5000.0, c in 20.0f64..5000.0) {
        let ab = hz_to_cents(a, b).unwrap();
        prop_assert!((ab + hz_to_cents(b, a).unwrap()).abs() < 1e-9);
        let sum = ab + hz_to_cents(b, c).unwrap();
        prop_assert!((hz_to_cents(a, c).unwrap() - sum).abs() < 1e-9);
    }
}

#[test]
fn cents_closed_form() {
    // 1200 * log2(466.16 / 440), evaluated independently with std.
    let expected = 1200.0 * (466.16f64 / 440.0).ln() / std::f64::consts::LN_2;
    assert!((expected - 100.0).abs() < 0.1);
    assert!((hz_to_cents(466.16, 440.0).unwrap() - expected).abs() < 1e-9);
}

#[test]
fn random_tones_across_the_vocal_range() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = YinConfig::new(SR);
    for _ in 0..6 {
        let hz: f64 = rng.gen_range(350.0..1000.0);
        let track = estimate_f0_yin(&sine(hz, 0.3), &cfg).unwrap();
        for f in track.frames() {
            let v = f.f0_hz.expect("voiced");
            assert!(hz_to_cents(v, hz).unwrap().abs() <= 5.0);
        }
    }
}
