//! Live feedback sessions.
//!
//! A session calibrates the learner's EMG, then compares streamed EMG and
//! audio against an expert [`ReferenceTrace`] on a 200 ms grid and emits
//! [`FeedbackFrame`]s at a fixed tick rate. The same per-bin computation
//! builds references from recordings, so a replayed expert matches itself.

pub mod broadcast;
pub mod error;
pub mod frame;
pub mod metrics;
pub mod reference;
pub mod server;
pub mod session;
pub mod source;

pub use broadcast::{Broadcaster, PublishReport, Subscription};
pub use error::{EngineError, Result};
pub use frame::{Deviation, FeedbackFrame, MetricSet};
pub use metrics::{grid_metrics, BinMetrics, GridBin, MetricsConfig};
pub use reference::{build_reference, ReferenceTrace};
pub use server::{router, serve, AppState, ServerConfig};
pub use session::{Chunk, Phase, SessionConfig, SessionState, SessionSummary};
pub use source::{ByteStreamSource, ChunkSource, ReplaySource};
