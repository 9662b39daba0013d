//! Every operation sequence up to length 6 is replayed against the session and
//! checked against the allowed transition graph.

use std::sync::Arc;

use vocalis_core::dsp::MvcCalibration;
use vocalis_engine::metrics::MetricsConfig;
use vocalis_engine::reference::{REFERENCE_FORMAT, REFERENCE_VERSION};
use vocalis_engine::{Chunk, EngineError, Phase, ReferenceTrace, SessionConfig, SessionState};

#[derive(Debug, Clone, Copy)]
enum Op {
    StartCalibration,
    SetCalibration,
    StartPractice,
    End,
    Chunk,
}

const OPS: [Op; 5] = [Op::StartCalibration, Op::SetCalibration, Op::StartPractice, Op::End, Op::Chunk];

fn allowed(from: Phase, to: Phase) -> bool {
    use Phase::*;
    from == to || matches!((from, to), (Idle, Calibrating) | (Calibrating, Practicing) | (Practicing, Review) | (Review, Idle))
}

fn reference() -> Arc<ReferenceTrace> {
    Arc::new(ReferenceTrace {
        format: REFERENCE_FORMAT.into(),
        version: REFERENCE_VERSION,
        id: "r".into(),
        participant_id: "E".into(),
        session_id: None,
        gender: None,
        voice_type: None,
        grid_ms: 200.0,
        metrics: MetricsConfig::default(),
        calibration: MvcCalibration::from_values(1.0, 0.0).unwrap(),
        schedule: Vec::new(),
        bins: Vec::new(),
    })
}

fn apply(state: &mut SessionState, op: Op, reference: &Arc<ReferenceTrace>) -> Result<(), EngineError> {
    match op {
        Op::StartCalibration => state.start_calibration(),
        Op::SetCalibration => state.set_calibration(MvcCalibration::from_values(1.0, 0.1).unwrap()),
        Op::StartPractice => state.start_practice(reference.clone(), Vec::new()),
        Op::End => state.end_session(),
        Op::Chunk => state.process_chunk(&Chunk::default()).map(|_| ()),
    }
}

fn explore(config: SessionConfig, emg_active: bool) -> (usize, [bool; 4]) {
    let reference = reference();
    let mut visited = [false; 4];
    let mut sequences = 0;
    for len in 0..=6u32 {
        for code in 0..5usize.pow(len) {
            let mut state = SessionState::new(config.clone()).unwrap();
            let mut c = code;
            for _ in 0..len {
                let op = OPS[c % 5];
                c /= 5;
                let before = state.phase();
                let result = apply(&mut state, op, &reference);
                let after = state.phase();
                assert!(allowed(before, after), "{op:?}: {before} -> {after}");
                if result.is_err() {
                    assert_eq!(before, after, "failed {op:?} changed phase");
                }
                if let Err(EngineError::IllegalTransition { phase, .. }) = result {
                    assert_eq!(phase, before);
                }
                if after == Phase::Practicing && emg_active {
                    assert!(state.calibration().is_some());
                }
                visited[after as usize] = true;
            }
            sequences += 1;
        }
    }
    (sequences, visited)
}

#[test]
fn transitions_follow_the_cycle_with_emg() {
    let (n, visited) = explore(SessionConfig::new(Some(2000.0), Some(48_000.0)), true);
    assert_eq!(n, (0..=6).map(|l| 5usize.pow(l)).sum::<usize>());
    assert_eq!(visited, [true; 4]);
}

#[test]
fn transitions_follow_the_cycle_audio_only() {
    let (_, visited) = explore(SessionConfig::new(None, Some(48_000.0)), false);
    assert_eq!(visited, [true; 4]);
}

#[test]
fn practice_without_calibration_rejected() {
    let mut state = SessionState::new(SessionConfig::new(Some(2000.0), None)).unwrap();
    state.start_calibration().unwrap();
    assert!(matches!(state.start_practice(reference(), Vec::new()), Err(EngineError::CalibrationRequired)));
    assert_eq!(state.phase(), Phase::Calibrating);
}

#[test]
fn illegal_transition_names_phase() {
    let mut state = SessionState::new(SessionConfig::new(Some(2000.0), None)).unwrap();
    let err = state.end_session().unwrap_err();
    assert_eq!(err.to_string(), "cannot end session while Idle");
    assert!(matches!(state.process_chunk(&Chunk::default()), Err(EngineError::NotAccepting(Phase::Idle))));
}
