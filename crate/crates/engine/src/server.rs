//! HTTP and WebSocket service over live sessions.
//!
//! `POST /sessions` creates a session from a learner manifest, `GET /references`
//! lists the expert library, `GET /sessions/{id}/summary` reports the review
//! aggregate and `/session/{id}/stream` upgrades to a socket carrying control
//! commands and binary signal blocks in, newline-delimited frames out.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::ws::{CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures_util::{SinkExt, StreamExt};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::mpsc;
use vocalis_core::dataset::manifest::Modality;
use vocalis_core::dataset::schedule::{DEFAULT_BPM, DEFAULT_HOLD_S};
use vocalis_core::dataset::{parse_spn, scale_schedule, PitchEvent, SessionManifest};
use vocalis_core::dsp::MvcCalibration;

use crate::broadcast::Broadcaster;
use crate::error::{EngineError, Result};
use crate::metrics::MetricsConfig;
use crate::reference::{load_library, ReferenceTrace};
use crate::session::{SessionConfig, SessionState, DEFAULT_TICK_HZ};
use crate::source::BlockDecoder;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerConfig {
    pub bind: String,
    pub port: u16,
    pub reference_dir: Option<PathBuf>,
    pub tick_hz: f64,
    pub metrics: MetricsConfig,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1".into(),
            port: 8080,
            reference_dir: None,
            tick_hz: DEFAULT_TICK_HZ,
            metrics: MetricsConfig::default(),
        }
    }
}

struct Pipeline {
    state: SessionState,
    decoder: BlockDecoder,
}

pub struct LiveSession {
    pipeline: Mutex<Pipeline>,
    broadcaster: Broadcaster,
}

pub struct AppState {
    references: RwLock<BTreeMap<String, Arc<ReferenceTrace>>>,
    sessions: RwLock<BTreeMap<String, Arc<LiveSession>>>,
    next_id: AtomicU64,
    tick_hz: f64,
    metrics: MetricsConfig,
}

impl AppState {
    pub fn new(config: &ServerConfig, references: Vec<ReferenceTrace>) -> Arc<Self> {
        Arc::new(Self {
            references: RwLock::new(references.into_iter().map(|r| (r.id.clone(), Arc::new(r))).collect()),
            sessions: RwLock::new(BTreeMap::new()),
            next_id: AtomicU64::new(1),
            tick_hz: config.tick_hz,
            metrics: config.metrics,
        })
    }

    pub fn from_config(config: &ServerConfig) -> Result<Arc<Self>> {
        let refs = match &config.reference_dir {
            Some(dir) => load_library(dir)?,
            None => Vec::new(),
        };
        Ok(Self::new(config, refs))
    }

    pub fn add_reference(&self, reference: ReferenceTrace) {
        self.references.write().expect("lock").insert(reference.id.clone(), Arc::new(reference));
    }

    fn reference(&self, id: &str) -> Result<Arc<ReferenceTrace>> {
        self.references.read().expect("lock").get(id).cloned().ok_or_else(|| EngineError::UnknownReference(id.into()))
    }

    fn session(&self, id: &str) -> Option<Arc<LiveSession>> {
        self.sessions.read().expect("lock").get(id).cloned()
    }

    /// Create a session for a learner described by `manifest`. File entries
    /// are ignored; only declared modalities, rates and gender matter.
    pub fn create_session(&self, manifest: &SessionManifest) -> Result<String> {
        let rate = |m: Modality, r: Option<f64>| -> Result<Option<f64>> {
            if !manifest.has(m) {
                return Ok(None);
            }
            r.map(Some).ok_or_else(|| EngineError::InvalidConfig(format!("modality {} declared without a rate", m.name())))
        };
        let mut config = SessionConfig::new(rate(Modality::Emg, manifest.emg_rate_hz)?, rate(Modality::Audio, manifest.audio_rate_hz)?);
        config.tick_hz = self.tick_hz;
        config.metrics = self.metrics;
        config.gender = manifest.gender.clone();
        let decoder = BlockDecoder::new(config.emg_rate_hz, config.audio_rate_hz);
        let state = SessionState::new(config)?;
        let id = format!("s{}", self.next_id.fetch_add(1, Ordering::Relaxed));
        let live = LiveSession { pipeline: Mutex::new(Pipeline { state, decoder }), broadcaster: Broadcaster::default() };
        self.sessions.write().expect("lock").insert(id.clone(), Arc::new(live));
        Ok(id)
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/references", get(list_references))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/summary", get(summary))
        .route("/session/{id}/stream", get(stream))
        .with_state(state)
}

/// Serve on an already bound listener until the process ends.
pub async fn serve_listener(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}

pub async fn serve(config: ServerConfig) -> Result<()> {
    let state = AppState::from_config(&config)?;
    let listener = tokio::net::TcpListener::bind((config.bind.as_str(), config.port)).await?;
    serve_listener(listener, state).await?;
    Ok(())
}

fn error_response(status: StatusCode, err: impl std::fmt::Display) -> Response {
    (status, Json(json!({ "error": err.to_string() }))).into_response()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceInfo {
    pub id: String,
    pub participant_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub session_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gender: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voice_type: Option<String>,
    pub grid_ms: f64,
    pub bins: usize,
    pub duration_s: f64,
    pub pitches: Vec<String>,
}

async fn list_references(State(app): State<Arc<AppState>>) -> Json<Vec<ReferenceInfo>> {
    let refs = app.references.read().expect("lock");
    Json(
        refs.values()
            .map(|r| ReferenceInfo {
                id: r.id.clone(),
                participant_id: r.participant_id.clone(),
                session_id: r.session_id.clone(),
                gender: r.gender.clone(),
                voice_type: r.voice_type.clone(),
                grid_ms: r.grid_ms,
                bins: r.bins.len(),
                duration_s: r.duration_s(),
                pitches: r.schedule.iter().map(|e| e.label.spn().to_string()).collect(),
            })
            .collect(),
    )
}

async fn create_session(State(app): State<Arc<AppState>>, body: axum::body::Bytes) -> Response {
    let manifest: SessionManifest = match serde_json::from_slice(&body) {
        Ok(m) => m,
        Err(e) => return error_response(StatusCode::BAD_REQUEST, e),
    };
    match app.create_session(&manifest) {
        Ok(id) => (StatusCode::CREATED, Json(json!({ "id": id, "phase": "Idle" }))).into_response(),
        Err(e) => error_response(StatusCode::BAD_REQUEST, e),
    }
}

async fn summary(State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match app.session(&id) {
        Some(s) => Json(s.pipeline.lock().expect("lock").state.summary()).into_response(),
        None => error_response(StatusCode::NOT_FOUND, format!("no session {id}")),
    }
}

async fn stream(ws: WebSocketUpgrade, State(app): State<Arc<AppState>>, Path(id): Path<String>) -> Response {
    match app.session(&id) {
        Some(session) => ws.on_upgrade(move |socket| connection(socket, app, session)),
        None => error_response(StatusCode::NOT_FOUND, format!("no session {id}")),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum Command {
    StartCalibration,
    SetCalibration { mvc_amplitude: f64, baseline_noise: f64 },
    /// `schedule` is `"reference"` (the default) for the reference's own
    /// schedule, or a white-key range such as `"C4-G4"`.
    StartPractice { reference: String, #[serde(default)] schedule: Option<String> },
    End,
}

fn resolve_schedule(spec: Option<&str>, reference: &ReferenceTrace) -> Result<Vec<PitchEvent>> {
    match spec {
        None | Some("reference") => Ok(reference.schedule.clone()),
        Some(range) => {
            let (lo, hi) = range.split_once('-').ok_or_else(|| EngineError::UnknownSchedule(range.into()))?;
            let (lo, hi) = (parse_spn(lo)?, parse_spn(hi)?);
            Ok(scale_schedule(&lo, &hi, DEFAULT_BPM, DEFAULT_HOLD_S, true)?.events)
        }
    }
}

fn apply_command(app: &AppState, session: &LiveSession, text: &str) -> Result<serde_json::Value> {
    let cmd: Command = serde_json::from_str(text)?;
    let mut p = session.pipeline.lock().expect("lock");
    match cmd {
        Command::StartCalibration => {
            p.state.start_calibration()?;
            p.decoder.reset();
        }
        Command::SetCalibration { mvc_amplitude, baseline_noise } => {
            p.state.set_calibration(MvcCalibration::from_values(mvc_amplitude, baseline_noise)?)?;
        }
        Command::StartPractice { reference, schedule } => {
            let reference = app.reference(&reference)?;
            let events = resolve_schedule(schedule.as_deref(), &reference)?;
            p.state.start_practice(reference, events)?;
            p.decoder.reset();
        }
        Command::End => p.state.end_session()?,
    }
    Ok(json!({ "event": "phase", "phase": p.state.phase(), "warnings": p.state.warnings() }))
}

fn apply_block(session: &LiveSession, block: &[u8]) -> Result<()> {
    let frames = {
        let mut p = session.pipeline.lock().expect("lock");
        let chunk = p.decoder.decode(block)?;
        p.state.process_chunk(&chunk)?
    };
    session.broadcaster.publish(&frames);
    Ok(())
}

async fn connection(socket: WebSocket, app: Arc<AppState>, session: Arc<LiveSession>) {
    let (mut sink, mut incoming) = socket.split();
    let mut sub = session.broadcaster.subscribe();
    let (reply_tx, mut reply_rx) = mpsc::unbounded_channel::<String>();

    let writer = tokio::spawn(async move {
        loop {
            let text = tokio::select! {
                biased;
                reply = reply_rx.recv() => match reply {
                    Some(r) => r + "\n",
                    None => break,
                },
                frame = sub.frames.recv() => match frame {
                    Some(f) => {
                        let mut text = f.to_json_line() + "\n";
                        while let Ok(f) = sub.frames.try_recv() {
                            text.push_str(&f.to_json_line());
                            text.push('\n');
                        }
                        text
                    }
                    None => {
                        let close = CloseFrame { code: 1008, reason: "subscriber buffer overflow".into() };
                        let _ = sink.send(Message::Close(Some(close))).await;
                        break;
                    }
                },
            };
            if sink.send(Message::Text(text.into())).await.is_err() {
                break;
            }
        }
    });

    while let Some(Ok(msg)) = incoming.next().await {
        let outcome = match msg {
            Message::Text(t) => apply_command(&app, &session, t.as_str()).map(Some),
            Message::Binary(b) => apply_block(&session, &b).map(|_| None),
            Message::Close(_) => break,
            _ => Ok(None),
        };
        let reply = match outcome {
            Ok(Some(v)) => v.to_string(),
            Ok(None) => continue,
            Err(e) => json!({ "event": "error", "message": e.to_string() }).to_string(),
        };
        if reply_tx.send(reply).is_err() {
            break;
        }
    }
    drop(reply_tx);
    let _ = writer.await;
}
