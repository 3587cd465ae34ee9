//! Shared session store and the per-session clock.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::Duration;

use dronecine_protocol::{Clock, ServerMessage};
use tokio::sync::{broadcast, Mutex, RwLock};
use tokio::task::AbortHandle;
use tokio::time::MissedTickBehavior;
use uuid::Uuid;

use crate::error::ApiError;
use crate::model::{SessionModel, TickOutput};

/// Messages buffered per stream subscriber before it starts lagging.
const STREAM_BUFFER: usize = 1024;

/// Sent on the session channel to end open streams.
#[derive(Debug, Clone)]
pub enum Broadcast {
    Message(ServerMessage),
    Close(String),
}

pub struct Session {
    pub model: SessionModel,
    tx: broadcast::Sender<Broadcast>,
    ticker: Option<AbortHandle>,
}

pub type SessionHandle = Arc<Mutex<Session>>;

impl Session {
    pub fn new(model: SessionModel) -> Self {
        let (tx, _) = broadcast::channel(STREAM_BUFFER);
        Session {
            model,
            tx,
            ticker: None,
        }
    }

    pub fn subscribe(&self) -> broadcast::Receiver<Broadcast> {
        self.tx.subscribe()
    }

    pub fn publish(&self, out: &TickOutput) {
        let tick = out.state.tick;
        for event in &out.events {
            let _ = self.tx.send(Broadcast::Message(ServerMessage::Event {
                tick,
                event: event.clone(),
            }));
        }
        let _ = self.tx.send(Broadcast::Message(ServerMessage::State {
            tick,
            state: out.state.clone(),
        }));
    }

    pub fn close_streams(&self, reason: &str) {
        let _ = self.tx.send(Broadcast::Close(reason.to_string()));
    }

    /// Advances `ticks` ticks, publishing each one. Stops at the first error.
    pub fn step(&mut self, ticks: u64) -> Result<Option<TickOutput>, ApiError> {
        let mut last = None;
        let mut events = Vec::new();
        for _ in 0..ticks {
            let out = self.model.advance()?;
            self.publish(&out);
            events.extend(out.events.iter().cloned());
            last = Some(out);
        }
        Ok(last.map(|mut out| {
            out.events = events;
            out
        }))
    }

    fn stop_clock(&mut self) {
        if let Some(h) = self.ticker.take() {
            h.abort();
        }
    }

    /// Starts or stops the realtime clock to match the run state. Must be
    /// called after every run-state transition.
    pub fn sync_clock(&mut self, handle: &SessionHandle) {
        self.stop_clock();
        if self.model.clock() == Clock::Realtime && self.model.is_live() {
            let tick = Duration::from_secs_f64(self.model.settings().tick);
            let task = tokio::spawn(run_clock(handle.clone(), tick));
            self.ticker = Some(task.abort_handle());
        }
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        self.stop_clock();
    }
}

async fn run_clock(handle: SessionHandle, tick: Duration) {
    let mut interval = tokio::time::interval(tick);
    interval.set_missed_tick_behavior(MissedTickBehavior::Delay);
    interval.tick().await;
    loop {
        interval.tick().await;
        let mut session = handle.lock().await;
        if !session.model.is_live() {
            break;
        }
        if let Err(e) = session.step(1) {
            tracing::warn!(session = %session.model.id(), error = %e, "clock stopped");
            let tick = session.model.tick();
            let _ = session
                .tx
                .send(Broadcast::Message(ServerMessage::Error { tick, error: e.0 }));
            break;
        }
    }
}

#[derive(Clone, Default)]
pub struct SessionStore {
    inner: Arc<RwLock<HashMap<Uuid, SessionHandle>>>,
}

impl SessionStore {
    pub async fn insert(&self, model: SessionModel) -> SessionHandle {
        let id = model.id();
        let handle = Arc::new(Mutex::new(Session::new(model)));
        self.inner.write().await.insert(id, handle.clone());
        handle
    }

    pub async fn get(&self, id: Uuid) -> Result<SessionHandle, ApiError> {
        self.inner
            .read()
            .await
            .get(&id)
            .cloned()
            .ok_or_else(|| ApiError::not_found("session_id", format!("no session {id}")))
    }

    pub async fn remove(&self, id: Uuid) -> Result<SessionHandle, ApiError> {
        self.inner
            .write()
            .await
            .remove(&id)
            .ok_or_else(|| ApiError::not_found("session_id", format!("no session {id}")))
    }

    pub async fn ids(&self) -> Vec<Uuid> {
        let mut ids: Vec<Uuid> = self.inner.read().await.keys().copied().collect();
        ids.sort();
        ids
    }
}
