//! Bidirectional session stream.
//!
//! The server sends a full `state` snapshot after every tick, preceded by
//! that tick's `event` messages. Clients send `control` messages (applied on
//! the next tick, last writer wins) and, on manual-clock sessions, `step`
//! messages. A malformed or rejected message gets an `error` reply and the
//! stream stays open. The server closes the stream with a reason when the
//! run ends.

use axum::extract::ws::{close_code, CloseFrame, Message, WebSocket, WebSocketUpgrade};
use axum::extract::State;
use axum::response::Response;
use dronecine_protocol::{ClientMessage, RunState, ServerMessage};
use tokio::sync::broadcast::error::RecvError;
use uuid::Uuid;

use crate::api::step_session;
use crate::error::ApiError;
use crate::extract::{parse_json, ApiPath};
use crate::session::{Broadcast, SessionHandle};
use crate::AppState;

pub(crate) async fn stream_handler(
    State(state): State<AppState>,
    ApiPath(id): ApiPath<Uuid>,
    ws: WebSocketUpgrade,
) -> Result<Response, ApiError> {
    let handle = state.sessions.get(id).await?;
    Ok(ws.on_upgrade(move |socket| serve_stream(socket, handle)))
}

fn text(msg: &ServerMessage) -> Message {
    Message::Text(serde_json::to_string(msg).expect("server messages serialize").into())
}

async fn close(socket: &mut WebSocket, reason: &str) {
    let frame = CloseFrame {
        code: close_code::NORMAL,
        reason: reason.into(),
    };
    let _ = socket.send(Message::Close(Some(frame))).await;
}

async fn serve_stream(mut socket: WebSocket, handle: SessionHandle) {
    let (mut rx, initial) = {
        let session = handle.lock().await;
        if session.model.run_state() == RunState::Editing {
            drop(session);
            close(&mut socket, "no simulation is running").await;
            return;
        }
        let snap = session.model.snapshot().expect("world exists outside editing");
        (
            session.subscribe(),
            ServerMessage::State {
                tick: snap.tick,
                state: snap,
            },
        )
    };
    if socket.send(text(&initial)).await.is_err() {
        return;
    }
    loop {
        tokio::select! {
            msg = rx.recv() => match msg {
                Ok(Broadcast::Message(m)) => {
                    if socket.send(text(&m)).await.is_err() {
                        return;
                    }
                }
                Ok(Broadcast::Close(reason)) => {
                    close(&mut socket, &reason).await;
                    return;
                }
                Err(RecvError::Lagged(n)) => {
                    // Slow consumer: drop stale snapshots, keep the newest.
                    tracing::debug!(skipped = n, "stream subscriber lagged");
                }
                Err(RecvError::Closed) => {
                    close(&mut socket, "session ended").await;
                    return;
                }
            },
            incoming = socket.recv() => match incoming {
                Some(Ok(Message::Text(body))) => {
                    if let Some(reply) = handle_client_message(&handle, body.as_bytes()).await {
                        if socket.send(text(&reply)).await.is_err() {
                            return;
                        }
                    }
                }
                Some(Ok(Message::Binary(_))) => {
                    let tick = handle.lock().await.model.tick();
                    let reply = error_message(tick, ApiError::new(
                        dronecine_protocol::ErrorCode::Parse,
                        None,
                        "binary frames are not supported; send JSON text",
                    ));
                    if socket.send(text(&reply)).await.is_err() {
                        return;
                    }
                }
                Some(Ok(Message::Close(_))) | None | Some(Err(_)) => return,
                Some(Ok(_)) => {}
            },
        }
    }
}

fn error_message(tick: u64, e: ApiError) -> ServerMessage {
    ServerMessage::Error { tick, error: e.0 }
}

/// Applies one client message; returns the error reply, if any.
async fn handle_client_message(handle: &SessionHandle, body: &[u8]) -> Option<ServerMessage> {
    let mut session = handle.lock().await;
    let result = parse_json::<ClientMessage>(body).and_then(|msg| match msg {
        ClientMessage::Control { drone_id, input } => session.model.control(drone_id, input),
        ClientMessage::Step { ticks } => step_session(&mut session, ticks).map(|_| ()),
    });
    result.err().map(|e| error_message(session.model.tick(), e))
}
