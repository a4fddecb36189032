use std::collections::BTreeMap;

use num_traits::Zero;
use proptest::prelude::*;
use sori_core::f0::{F0Frame, F0Track};
use sori_core::histogram::{
    f0_histogram, mode_affinity, score_duration_histogram, BinKind, ModeTemplate,
};
use sori_core::pitch::Pitch;
use sori_core::score::{sounding_duration, NoteEvent, NoteKind};
use sori_core::Beats;

fn events(spec: &[(Option<u8>, i64, i64)]) -> Vec<NoteEvent> {
    let mut onset = Beats::zero();
    spec.iter()
        .map(|&(midi, n, d)| {
            let dur = Beats::new(n, d);
            let e = NoteEvent {
                onset_beats: onset,
                duration_beats: dur,
                kind: midi.map_or(NoteKind::Rest, |m| NoteKind::Note(Pitch::from_midi(m).unwrap())),
                measure_index: 0,
                tied_from_previous: false,
                ties_to_next: false,
            };
            onset += dur;
            e
        })
        .collect()
}

fn arb_events() -> impl Strategy<Value = Vec<NoteEvent>> {
    prop::collection::vec(
        (prop::option::weighted(0.85, 48u8..96), 1i64..13, prop_oneof![Just(1i64), Just(2), Just(3), Just(4)]),
        1..40,
    )
    .prop_map(|v| events(&v))
}

proptest! {
    #[test]
    fn score_mass_is_sounding_duration(evs in arb_events()) {
        let h = score_duration_histogram(&evs, BinKind::Semitone);
        prop_assert_eq!(h.exact_total().unwrap(), sounding_duration(&evs));

        // Brute-force accumulation per MIDI number.
        let mut naive: BTreeMap<i32, Beats> = BTreeMap::new();
        for e in &evs {
            if let Some(p) = e.pitch() {
                let slot = naive.entry(i32::from(p.midi())).or_insert_with(Beats::zero);
                *slot += e.duration_beats;
            }
        }
        prop_assert_eq!(h.exact.as_ref().unwrap(), &naive);
    }

    #[test]
    fn pitch_class_reduction_keeps_mass(evs in arb_events()) {
        let h = score_duration_histogram(&evs, BinKind::Semitone);
        let pc = h.to_pitch_classes();
        prop_assert_eq!(pc.exact_total(), h.exact_total());
        prop_assert!(pc.masses.keys().all(|k| (0..12).contains(k)));
        prop_assert_eq!(pc, score_duration_histogram(&evs, BinKind::PitchClass));
    }

    #[test]
    fn f0_mass_is_voiced_count(hz in prop::collection::vec(prop::option::of(350.0f64..1000.0), 1..200)) {
        let frames = hz.iter().enumerate()
            .map(|(i, h)| F0Frame { time_s: i as f64 * 0.01, f0_hz: *h, confidence: 0.9 })
            .collect();
        let track = F0Track::new(frames, 0.01).unwrap();
        let h = f0_histogram(&track, 440.0, BinKind::Semitone).unwrap();
        prop_assert_eq!(h.total(), track.voiced_count() as f64);
    }

    #[test]
    fn affinity_scale_invariant(evs in arb_events(), k in 1i64..7) {
        let h = score_duration_histogram(&evs, BinKind::Semitone);
        prop_assume!(h.total() > 0.0);
        let mut scaled = h.clone();
        scaled.masses.values_mut().for_each(|m| *m *= k as f64);
        let a = mode_affinity(&h, &ModeTemplate::ujo()).unwrap();
        let b = mode_affinity(&scaled, &ModeTemplate::ujo()).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn affinity_transposition_equivariant(evs in arb_events(), shift in -12i32..12) {
        let h = score_duration_histogram(&evs, BinKind::Semitone);
        prop_assume!(h.total() > 0.0);
        let moved: Vec<NoteEvent> = evs.iter().map(|e| {
            let mut e = e.clone();
            if let Some(p) = e.pitch() {
                let m = (i32::from(p.midi()) + shift) as u8;
                e.kind = NoteKind::Note(Pitch::from_midi(m).unwrap());
            }
            e
        }).collect();
        let hm = score_duration_histogram(&moved, BinKind::Semitone);
        for t in [ModeTemplate::ujo(), ModeTemplate::gyemyeonjo()] {
            let a = mode_affinity(&h, &t).unwrap();
            let b = mode_affinity(&hm, &t.transposed(shift)).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn hand_built_affinities() {
    let ujo = ModeTemplate::ujo();
    let all_d = score_duration_histogram(&events(&[(Some(62), 4, 1)]), BinKind::Semitone);
    assert_eq!(mode_affinity(&all_d, &ujo).unwrap(), 1.0);
    let all_ds = score_duration_histogram(&events(&[(Some(63), 4, 1)]), BinKind::Semitone);
    assert_eq!(mode_affinity(&all_ds, &ujo).unwrap(), 0.0);
    let d3_e1 = score_duration_histogram(
        &events(&[(Some(74), 3, 1), (Some(76), 1, 1)]),
        BinKind::Semitone,
    );
    assert_eq!(mode_affinity(&d3_e1, &ujo).unwrap(), 0.75);
    assert_eq!(mode_affinity(&d3_e1, &ModeTemplate::gyemyeonjo()).unwrap(), 1.0);
}
