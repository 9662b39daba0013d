use tokio::sync::mpsc::error::TryRecvError;
use vocalis_engine::frame::MetricSet;
use vocalis_engine::{Broadcaster, FeedbackFrame, Phase};

fn frames(n: usize) -> Vec<FeedbackFrame> {
    (1..=n)
        .map(|i| FeedbackFrame::new(i as f64 / 30.0, None, MetricSet::default(), MetricSet::default(), Phase::Practicing))
        .collect()
}

fn drain(rx: &mut tokio::sync::mpsc::Receiver<FeedbackFrame>) -> Vec<FeedbackFrame> {
    let mut out = Vec::new();
    while let Ok(f) = rx.try_recv() {
        out.push(f);
    }
    out
}

#[test]
fn no_subscribers() {
    let b = Broadcaster::default();
    let report = b.publish(&frames(10));
    assert_eq!(report.delivered, 0);
    assert!(report.disconnected.is_empty());
}

#[test]
fn subscribers_see_identical_sequences() {
    let b = Broadcaster::default();
    let mut s1 = b.subscribe();
    let mut s2 = b.subscribe();
    let all = frames(100);
    for chunk in all.chunks(7) {
        b.publish(chunk);
    }
    let got1 = drain(&mut s1.frames);
    assert_eq!(got1, all);
    assert_eq!(drain(&mut s2.frames), got1);
}

#[test]
fn stalled_subscriber_is_dropped() {
    let b = Broadcaster::new(1024);
    let mut stalled = b.subscribe();
    let mut live = b.subscribe();
    let all = frames(1100);
    let mut received = Vec::new();
    let mut dropped_at = None;
    for (i, f) in all.iter().enumerate() {
        let report = b.publish(std::slice::from_ref(f));
        if report.disconnected.contains(&stalled.id) {
            dropped_at = Some(i);
        }
        received.extend(drain(&mut live.frames));
    }
    assert_eq!(dropped_at, Some(1024));
    assert_eq!(received, all);
    assert_eq!(b.subscriber_count(), 1);
    assert_eq!(drain(&mut stalled.frames).len(), 1024);
    assert_eq!(stalled.frames.try_recv(), Err(TryRecvError::Disconnected));
}
