//! Fan-out of frames to subscribers without ever blocking the producer.

use std::sync::Mutex;

use tokio::sync::mpsc;

use crate::frame::FeedbackFrame;

pub const DEFAULT_SUBSCRIBER_BUFFER: usize = 1024;

pub struct Subscription {
    pub id: u64,
    pub frames: mpsc::Receiver<FeedbackFrame>,
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct PublishReport {
    pub delivered: usize,
    /// Subscribers dropped during this publish, either full or gone.
    pub disconnected: Vec<u64>,
}

pub struct Broadcaster {
    capacity: usize,
    inner: Mutex<Inner>,
}

#[derive(Default)]
struct Inner {
    next_id: u64,
    subscribers: Vec<(u64, mpsc::Sender<FeedbackFrame>)>,
}

impl Default for Broadcaster {
    fn default() -> Self {
        Self::new(DEFAULT_SUBSCRIBER_BUFFER)
    }
}

impl Broadcaster {
    pub fn new(capacity: usize) -> Self {
        Self { capacity: capacity.max(1), inner: Mutex::new(Inner::default()) }
    }

    pub fn subscribe(&self) -> Subscription {
        let (tx, rx) = mpsc::channel(self.capacity);
        let mut inner = self.inner.lock().expect("broadcaster lock");
        let id = inner.next_id;
        inner.next_id += 1;
        inner.subscribers.push((id, tx));
        Subscription { id, frames: rx }
    }

    pub fn subscriber_count(&self) -> usize {
        self.inner.lock().expect("broadcaster lock").subscribers.len()
    }

    /// Offer every frame to every subscriber. A subscriber whose buffer is
    /// full is dropped; its receiver drains what it already has, then ends.
    pub fn publish(&self, frames: &[FeedbackFrame]) -> PublishReport {
        let mut report = PublishReport::default();
        let mut inner = self.inner.lock().expect("broadcaster lock");
        inner.subscribers.retain(|(id, tx)| {
            for f in frames {
                if tx.try_send(f.clone()).is_err() {
                    report.disconnected.push(*id);
                    return false;
                }
                report.delivered += 1;
            }
            true
        });
        report
    }
}
