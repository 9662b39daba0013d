#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use vocalis_core::dataset::{load_session, parse_spn, Session};
use vocalis_core::dsp::MvcProtocol;
use vocalis_core::synth::SyntheticSession;
use vocalis_core::SampledSignal;
use vocalis_engine::{build_reference, Chunk, FeedbackFrame, MetricsConfig, ReferenceTrace, ReplaySource, SessionConfig, SessionState};

pub fn expert(low: &str, high: &str) -> SyntheticSession {
    let mut s = SyntheticSession::new("E01", parse_spn(low).unwrap(), parse_spn(high).unwrap());
    s.session_id = Some("ref".into());
    s.gender = Some("female".into());
    s.with_landmarks = false;
    s
}

pub fn load(synth: &SyntheticSession, dir: &Path) -> Session {
    load_session(&synth.write(dir).unwrap()).unwrap()
}

pub fn reference_of(session: &Session) -> Arc<ReferenceTrace> {
    Arc::new(build_reference(session, &MetricsConfig::default(), &MvcProtocol::default()).unwrap())
}

/// Practicing session calibrated like the reference.
pub fn practicing(reference: &Arc<ReferenceTrace>) -> SessionState {
    let mut state = SessionState::new(SessionConfig::new(Some(2000.0), Some(48_000.0))).unwrap();
    state.start_calibration().unwrap();
    state.set_calibration(reference.calibration).unwrap();
    state.start_practice(reference.clone(), reference.schedule.clone()).unwrap();
    state
}

pub fn replay(state: &mut SessionState, emg: &SampledSignal, audio: &SampledSignal, chunk_ms: f64) -> Vec<FeedbackFrame> {
    let mut frames = Vec::new();
    for chunk in ReplaySource::new(Some(emg.clone()), Some(audio.clone()), chunk_ms) {
        frames.extend(state.process_chunk(&chunk.unwrap()).unwrap());
    }
    frames
}

pub fn chunk(emg: Option<SampledSignal>, audio: Option<SampledSignal>) -> Chunk {
    Chunk { emg, audio }
}
