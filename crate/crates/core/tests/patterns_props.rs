use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sori_core::beats::{BeatAnnotation, BeatGrid, JangdanSpec};
use sori_core::f0::{F0Frame, F0Track};
use sori_core::patterns::{
    cents_series, detokenize, mine_ngrams, occurrence_contours, occurrence_segment, onset_glide,
    tokenize, vibrato_metrics, CentsSeries, ContourConfig, MiningConfig, NGramPattern,
    NoteToken, TokenSequence,
};
use sori_core::pitch::Pitch;
use sori_core::score::NoteKind;
use sori_core::Beats;

const VOCAB: [&str; 6] = ["D5:1/1", "F5:1/2", "G5:1/1", "A5:3/2", "C6:1/1", "R:1/1"];

fn random_tokens(rng: &mut ChaCha8Rng, len: usize) -> Vec<NoteToken> {
    (0..len)
        .map(|_| VOCAB[rng.gen_range(0..VOCAB.len())].parse().unwrap())
        .collect()
}

/// Sliding-window recount keyed by token text.
fn naive_counts(seqs: &[Vec<NoteToken>], n: usize) -> HashMap<String, usize> {
    let mut out = HashMap::new();
    for s in seqs {
        if s.len() < n {
            continue;
        }
        for i in 0..=s.len() - n {
            let key: Vec<String> = s[i..i + n].iter().map(|t| t.text()).collect();
            *out.entry(key.join(" ")).or_insert(0) += 1;
        }
    }
    out
}

#[test]
fn mining_matches_naive_recount() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..20 {
        let seqs: Vec<Vec<NoteToken>> = (0..3)
            .map(|_| {
                let len = rng.gen_range(1..200);
                random_tokens(&mut rng, len)
            })
            .collect();
        let input: BTreeMap<String, TokenSequence> = seqs
            .iter()
            .enumerate()
            .map(|(i, s)| (format!("d{i}"), TokenSequence::from_tokens(s.clone())))
            .collect();
        for n in [2, 3, 4, 6] {
            let cfg = MiningConfig {
                n_values: vec![n],
                min_support: 1,
                ..MiningConfig::default()
            };
            let idx = mine_ngrams(&input, &cfg).unwrap();
            let got: HashMap<String, usize> = idx
                .entries
                .iter()
                .map(|e| (e.pattern.text(), e.support()))
                .collect();
            assert_eq!(got, naive_counts(&seqs, n));

            let total: usize = got.values().sum();
            let windows: usize = seqs.iter().map(|s| (s.len() + 1).saturating_sub(n)).sum();
            assert_eq!(total, windows);
        }
    }
}

#[test]
fn index_ordering_and_support_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let input: BTreeMap<String, TokenSequence> = (0..4)
        .map(|i| (format!("d{i}"), TokenSequence::from_tokens(random_tokens(&mut rng, 80))))
        .collect();
    let idx = mine_ngrams(&input, &MiningConfig::default()).unwrap();
    assert!(!idx.is_empty());
    for w in idx.entries.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        assert!(
            a.support() > b.support()
                || (a.support() == b.support() && a.pattern.text() < b.pattern.text())
        );
    }
    for e in &idx.entries {
        assert!(e.support() >= 2);
        assert_eq!(e.support_by_daemok.values().sum::<usize>(), e.support());
        let keys: Vec<_> = e
            .occurrences
            .iter()
            .map(|o| (o.daemok_id.clone(), o.onset_beats))
            .collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        for o in &e.occurrences {
            assert_eq!(o.span_beats, e.pattern.span_beats());
        }
    }
}

proptest! {
    #[test]
    fn mining_is_order_independent(seed in 0u64..500, perm in Just((0..4usize).collect::<Vec<_>>()).prop_shuffle()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let seqs: Vec<(String, TokenSequence)> = (0..4)
            .map(|i| (format!("d{i}"), TokenSequence::from_tokens(random_tokens(&mut rng, 30))))
            .collect();
        let a: BTreeMap<_, _> = seqs.iter().cloned().collect();
        let mut b = BTreeMap::new();
        for &i in &perm {
            b.insert(seqs[i].0.clone(), seqs[i].1.clone());
        }
        let cfg = MiningConfig::default();
        prop_assert_eq!(mine_ngrams(&a, &cfg).unwrap(), mine_ngrams(&b, &cfg).unwrap());
    }

    #[test]
    fn detokenize_inverts_tokenize(spec in prop::collection::vec(
        (prop::option::of(12u8..128), 1i64..16, 1i64..9), 0..50)) {
        let tokens: Vec<NoteToken> = spec.iter().map(|&(m, n, d)| {
            let kind = m.map_or(NoteKind::Rest, |m| NoteKind::Note(Pitch::from_midi(m).unwrap()));
            NoteToken::new(kind, Beats::new(n, d)).unwrap()
        }).collect();
        let events = detokenize(&tokens);
        prop_assert_eq!(detokenize(&tokenize(&events)), events.clone());
        for t in tokenize(&events) {
            let back: NoteToken = t.text().parse().unwrap();
            prop_assert_eq!(back, t);
            prop_assert_eq!(back.text(), t.text());
        }
    }
}

// ---------------------------------------------------------------------------
// Contours
// ---------------------------------------------------------------------------

fn grid(measures: usize, beat_s: f64) -> BeatGrid {
    let rows = (0..measures * 12)
        .map(|g| BeatAnnotation {
            measure_index: g / 12,
            beat_in_measure: g % 12,
            time_s: g as f64 * beat_s,
        })
        .collect();
    BeatGrid::new(JangdanSpec::joongmori(), rows).unwrap()
}

fn track_from(secs: f64, hz: impl Fn(f64) -> Option<f64>) -> F0Track {
    let n = (secs / 0.01) as usize;
    let frames = (0..n)
        .map(|i| {
            let t = i as f64 * 0.01;
            match hz(t) {
                Some(h) => F0Frame::voiced(t, h, 0.9),
                None => F0Frame::unvoiced(t, 0.0),
            }
        })
        .collect();
    F0Track::new(frames, 0.01).unwrap()
}

/// Two daemok, each `[D5:1 F5:1 G5:2]` repeated; the pattern spans 4 beats.
fn contour_setup(track: F0Track) -> (
    sori_core::patterns::PatternIndex,
    NGramPattern,
    BTreeMap<String, BeatGrid>,
    BTreeMap<String, F0Track>,
) {
    let seq: Vec<NoteToken> = ["D5:1/1", "F5:1/1", "G5:2/1"]
        .iter()
        .cycle()
        .take(9)
        .map(|t| t.parse().unwrap())
        .collect();
    let input = BTreeMap::from([
        ("a".to_string(), TokenSequence::from_tokens(seq.clone())),
        ("b".to_string(), TokenSequence::from_tokens(seq)),
    ]);
    let idx = mine_ngrams(
        &input,
        &MiningConfig {
            n_values: vec![3],
            ..MiningConfig::default()
        },
    )
    .unwrap();
    let pattern = NGramPattern::parse("D5:1/1 F5:1/1 G5:2/1").unwrap();
    let grids = BTreeMap::from([("a".into(), grid(2, 0.5)), ("b".into(), grid(2, 0.4))]);
    let tracks = BTreeMap::from([("a".into(), track.clone()), ("b".into(), track)]);
    (idx, pattern, grids, tracks)
}

#[test]
fn pure_tone_contours_are_flat() {
    let (idx, pattern, grids, tracks) = contour_setup(track_from(13.0, |_| Some(440.0)));
    let contours =
        occurrence_contours(&idx, &pattern, &grids, &tracks, &ContourConfig::default()).unwrap();
    assert_eq!(contours.len(), 6);
    for c in &contours {
        assert_eq!(c.values.len(), 200);
        for v in &c.values {
            assert!(v.expect("fully voiced").abs() < 1e-6);
        }
    }
}

#[test]
fn ramp_contour_is_linear() {
    // Occurrence at beats 4..8 of a 0.5 s grid is 2.0..4.0 s; ramp 0 -> 100 cents over it.
    let ramp = |t: f64| Some(440.0 * 2f64.powf((100.0 * (t - 2.0) / 2.0) / 1200.0));
    let (idx, pattern, grids, tracks) = contour_setup(track_from(13.0, ramp));
    let contours =
        occurrence_contours(&idx, &pattern, &grids, &tracks, &ContourConfig::default()).unwrap();
    let c = contours
        .iter()
        .find(|c| c.daemok_id == "a" && c.onset_beats == Beats::from_integer(4))
        .unwrap();
    for (j, v) in c.values.iter().enumerate() {
        let x = j as f64 / 199.0;
        assert!((v.unwrap() - 100.0 * x).abs() < 1.0, "sample {j}");
    }
}

#[test]
fn unvoiced_occurrence_is_kept_and_flagged() {
    // Daemok "a" is silent between 2.0 and 4.0 s, which is its second occurrence.
    let (idx, pattern, grids, mut tracks) = contour_setup(track_from(13.0, |_| Some(440.0)));
    tracks.insert(
        "a".into(),
        track_from(13.0, |t| (!(1.99..4.01).contains(&t)).then_some(440.0)),
    );
    let contours =
        occurrence_contours(&idx, &pattern, &grids, &tracks, &ContourConfig::default()).unwrap();
    assert_eq!(contours.len(), 6);
    let silent: Vec<_> = contours.iter().filter(|c| c.all_missing()).collect();
    assert_eq!(silent.len(), 1);
    assert_eq!(silent[0].daemok_id, "a");
    assert_eq!(silent[0].onset_beats, Beats::from_integer(4));
}

#[test]
fn gaps_are_not_bridged() {
    let (idx, pattern, grids, mut tracks) = contour_setup(track_from(13.0, |_| Some(440.0)));
    tracks.insert(
        "a".into(),
        track_from(13.0, |t| (!(0.8..1.2).contains(&t)).then_some(440.0)),
    );
    let contours =
        occurrence_contours(&idx, &pattern, &grids, &tracks, &ContourConfig::default()).unwrap();
    let first = &contours[0];
    assert_eq!(first.daemok_id, "a");
    let missing = first.values.iter().filter(|v| v.is_none()).count();
    // 0.4 s of 2.0 s is missing: roughly a fifth of the samples.
    assert!((35..=45).contains(&missing), "{missing}");
}

#[test]
fn missing_dependency_names_daemok() {
    let (idx, pattern, mut grids, tracks) = contour_setup(track_from(13.0, |_| Some(440.0)));
    grids.remove("b");
    let err = occurrence_contours(&idx, &pattern, &grids, &tracks, &ContourConfig::default())
        .unwrap_err();
    assert!(err.to_string().contains("`b`"), "{err}");
}

#[test]
fn unindexed_pattern_yields_nothing() {
    let (idx, _, grids, tracks) = contour_setup(track_from(13.0, |_| Some(440.0)));
    let other = NGramPattern::parse("C6:1/1 C6:1/1").unwrap();
    let out = occurrence_contours(&idx, &other, &grids, &tracks, &ContourConfig::default()).unwrap();
    assert!(out.is_empty());
}

#[test]
fn occurrence_segment_feeds_vibrato() {
    let vib = |t: f64| Some(600.0 * 2f64.powf(40.0 * (2.0 * PI * 5.5 * t).sin() / 1200.0));
    let (idx, pattern, grids, tracks) = contour_setup(track_from(13.0, vib));
    let occ = &idx.get(&pattern).unwrap().occurrences[0];
    let seg = occurrence_segment(occ, &grids, &tracks).unwrap();
    let m = vibrato_metrics(&cents_series(&seg, 440.0).unwrap()).unwrap();
    assert!((m.rate_hz - 5.5).abs() <= 0.3, "{m:?}");
    assert!((m.depth_cents - 40.0).abs() <= 4.0, "{m:?}");
}

// ---------------------------------------------------------------------------
// Vibrato and glide
// ---------------------------------------------------------------------------

/// f0(t) = 440 * 2^((depth / 1200) * sin(2 pi rate t)), expressed in cents.
fn vibrato_series(rate: f64, depth: f64, secs: f64, offset: f64) -> CentsSeries {
    let n = (secs / 0.01) as usize;
    let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.01).collect();
    let cents = times
        .iter()
        .map(|&t| {
            let hz = 440.0 * 2f64.powf(depth / 1200.0 * (2.0 * PI * rate * t).sin());
            Some(1200.0 * (hz / 440.0).log2() + offset)
        })
        .collect();
    CentsSeries {
        hop_s: 0.01,
        times,
        cents,
    }
}

#[test]
fn doubling_depth_doubles_estimate() {
    let a = vibrato_metrics(&vibrato_series(6.0, 50.0, 2.0, 0.0)).unwrap();
    let b = vibrato_metrics(&vibrato_series(6.0, 100.0, 2.0, 0.0)).unwrap();
    assert!((b.depth_cents / a.depth_cents - 2.0).abs() <= 0.2);
    assert!((b.rate_hz - a.rate_hz).abs() <= 0.3);
}

proptest! {
    #[test]
    fn vibrato_transposition_invariant(rate in 4.0f64..8.0, depth in 20.0f64..80.0, shift in -2400.0f64..2400.0) {
        let a = vibrato_metrics(&vibrato_series(rate, depth, 2.0, 0.0)).unwrap();
        let b = vibrato_metrics(&vibrato_series(rate, depth, 2.0, shift)).unwrap();
        prop_assert!((a.rate_hz - b.rate_hz).abs() < 1e-6);
        prop_assert!((a.depth_cents - b.depth_cents).abs() < 1e-6);
    }

    #[test]
    fn glide_recovers_ramp(rise in -200.0f64..200.0, lead in 0usize..20) {
        let n = 80;
        let times: Vec<f64> = (0..n).map(|i| i as f64 * 0.01).collect();
        let t0 = lead as f64 * 0.01;
        let cents = times.iter().map(|&t| (t >= t0 - 1e-12).then(|| rise * (t - t0) / 0.3)).collect();
        let s = CentsSeries { hop_s: 0.01, times, cents };
        prop_assert!((onset_glide(&s, 0.3).unwrap() - rise).abs() < 1e-6);
    }
}

#[test]
fn empty_token_sequence_from_events() {
    let seq = TokenSequence::from_events(&[], false);
    assert!(seq.is_empty());
    assert_eq!(seq.onsets.len(), 0);
}
