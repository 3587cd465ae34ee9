//! Session-oriented HTTP/JSON service over the dronecine core.
//!
//! Every session owns a project and, while simulating, a world. Commands
//! and clock ticks for one session are serialized through its lock; many
//! sessions run concurrently. Routes live under `/v1/`.

pub mod api;
pub mod error;
pub mod extract;
pub mod model;
pub mod session;
mod stream;

use std::net::SocketAddr;

use axum::serve::ListenerExt;
use axum::Router;
use tokio::net::TcpListener;

pub use error::ApiError;
pub use model::SessionModel;
pub use session::SessionStore;

#[derive(Clone, Default)]
pub struct AppState {
    pub sessions: SessionStore,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .nest(dronecine_protocol::API_PREFIX, api::routes())
        .with_state(state)
}

/// Serves on an already bound listener until the process ends.
pub async fn serve_on(listener: TcpListener) -> std::io::Result<()> {
    // Stream frames are small and latency-sensitive.
    let listener = listener.tap_io(|tcp| {
        let _ = tcp.set_nodelay(true);
    });
    axum::serve(listener, router(AppState::default())).await
}

pub async fn serve(addr: SocketAddr) -> std::io::Result<()> {
    let listener = TcpListener::bind(addr).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    serve_on(listener).await
}
