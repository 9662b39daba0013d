use proptest::prelude::*;
use vocalis_core::dataset::emg_csv::write_emg_csv;
use vocalis_core::dataset::pitch::{format_spn, is_white_key, midi_to_hz, parse_spn, PitchLabel};
use vocalis_core::dataset::schedule::{scale_schedule, EventSource, PitchEvent};
use vocalis_core::dataset::{load_session, segment_by_pitch, SessionManifest};
use vocalis_core::synth::SyntheticSession;
use vocalis_core::{DatasetError, SampledSignal};

fn small_session(dir: &std::path::Path) -> std::path::PathBuf {
    let s = SyntheticSession::new("P01", parse_spn("C4").unwrap(), parse_spn("E4").unwrap());
    s.write(dir).unwrap()
}

#[test]
fn synthetic_session_loads() {
    let dir = tempfile::tempdir().unwrap();
    let session = load_session(&small_session(dir.path())).unwrap();
    let emg = session.emg().unwrap();
    assert_eq!(emg.channel_count(), 2);
    assert_eq!(emg.rate_hz(), 2000.0);
    assert_eq!(emg.len(), 12_000);
    assert_eq!(session.audio().unwrap().rate_hz(), 48_000.0);
    assert_eq!(session.landmarks().unwrap().len(), 15);
    assert_eq!(session.manifest().pitch_events.len(), 3);
}

#[test]
fn missing_file_reported() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_session(dir.path());
    std::fs::remove_file(dir.path().join("audio.wav")).unwrap();
    match load_session(&manifest) {
        Err(DatasetError::MissingModalityFile { modality, .. }) => assert_eq!(modality, "audio"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn header_rate_must_match_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_session(dir.path());
    let mut manifest = SessionManifest::read(&path).unwrap();
    manifest.emg_rate_hz = Some(4370.0);
    manifest.write(&path).unwrap();
    match load_session(&path) {
        Err(DatasetError::RateMismatch { declared, found, .. }) => assert_eq!((declared, found), (4370.0, 2000.0)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn malformed_csv_surfaces_on_access() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_session(dir.path());
    std::fs::write(dir.path().join("emg.csv"), "# rate_hz=2000 channels=2\n1.0,abc\n").unwrap();
    let session = load_session(&path).unwrap();
    assert!(matches!(session.emg(), Err(DatasetError::MalformedCsv { .. })));
}

#[test]
fn stereo_audio_mixed_down_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let path = small_session(dir.path());
    let n = 48_000 * 6;
    let stereo = SampledSignal::new(vec![vec![0.5; n], vec![0.1; n]], 48_000.0, 0.0).unwrap();
    vocalis_core::dataset::wav::write_wav(&dir.path().join("audio.wav"), &stereo, vocalis_core::dataset::wav::WavEncoding::Float32).unwrap();
    let session = load_session(&path).unwrap();
    assert_eq!(session.warnings().len(), 1);
    let audio = session.audio().unwrap();
    assert_eq!(audio.channel_count(), 1);
    assert!((audio.channel(0)[0] - 0.3).abs() < 1e-6);
    let _ = write_emg_csv;
}

#[test]
fn full_white_key_range() {
    let s = scale_schedule(&parse_spn("G2").unwrap(), &parse_spn("E6").unwrap(), 80.0, 2.0, true).unwrap();
    assert_eq!(s.events.len(), 27);
    assert!(s.events.iter().all(|e| e.duration_s() == 2.0));
    assert!(s.events.windows(2).all(|w| w[0].end_s == w[1].start_s));
}

#[test]
fn spn_round_trip_all_midi() {
    for midi in 0..=127 {
        let label = parse_spn(&format_spn(midi)).unwrap();
        assert_eq!(label.midi(), midi);
        assert_eq!(PitchLabel::from_midi(midi).unwrap().spn(), format_spn(midi));
    }
}

proptest! {
    #[test]
    fn octave_law(midi in 0i32..=115) {
        let ratio = midi_to_hz(midi + 12) / midi_to_hz(midi);
        prop_assert!((ratio - 2.0).abs() < 2e-9);
    }

    #[test]
    fn white_key_count_matches_brute_force(a in 0i32..=127, b in 0i32..=127) {
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assume!(is_white_key(lo) && is_white_key(hi));
        let s = scale_schedule(&PitchLabel::from_midi(lo).unwrap(), &PitchLabel::from_midi(hi).unwrap(), 80.0, 2.0, true).unwrap();
        let brute = (lo..=hi).filter(|m| [0, 2, 4, 5, 7, 9, 11].contains(&(m % 12))).count();
        prop_assert_eq!(s.events.len(), brute);
    }

    #[test]
    fn segments_cover_span_exactly(bounds in prop::collection::vec(0.05f64..1.0, 1..8)) {
        let rate = 2000.0;
        let mut t = 0.0;
        let mut events = Vec::new();
        for d in &bounds {
            events.push(PitchEvent::new(parse_spn("C4").unwrap(), t, t + d, EventSource::SongSegment).unwrap());
            t += d;
        }
        let n = (t * rate).round() as usize + 10;
        let signal = SampledSignal::mono(vec![0.0; n], rate).unwrap();
        let seg = segment_by_pitch(&signal, &events);
        let total: usize = seg.segments.iter().map(|s| s.signal.len()).sum();
        prop_assert_eq!(total, (t * rate).round() as usize);
    }
}
