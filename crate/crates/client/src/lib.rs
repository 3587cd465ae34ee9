//! Async client for the dronecine service.
//!
//! ```no_run
//! # async fn demo() -> Result<(), dronecine_client::ClientError> {
//! use dronecine_client::Client;
//! let client = Client::new("http://127.0.0.1:8080");
//! let session = client.create_session(&Default::default()).await?;
//! let project = client.project(session.id).await?;
//! # Ok(()) }
//! ```

use dronecine_core::flightplan::{FlightPlan, Waypoint};
use dronecine_core::project::{load_project, DroneConfig, Project, ScanEntry};
use dronecine_core::scan::{OverlapMode, OverlapReport, ScanPlan};
use dronecine_core::shot::Trajectory;
use dronecine_core::sim::{Actor, ControlInput, WorldSnapshot};
use dronecine_protocol::{
    ActorDraft, ActorPatch, ApiErrorBody, ClientMessage, ControlRequest, CreateSessionRequest, DroneDraft, DronePatch,
    EnvironmentPatch, ExportQuery, FreeplayEnter, FreeplayExit, OverlapRequest, RunRequest, RunSummary, ScanDraft,
    ServerMessage, SessionInfo, ShotRequest, StepRequest, StepResponse, WaypointsUpdate, API_PREFIX,
};
use futures::{SinkExt, StreamExt};
use reqwest::{Method, RequestBuilder, Response};
use serde::de::DeserializeOwned;
use serde::Serialize;
use tokio_tungstenite::tungstenite::Message;
use uuid::Uuid;

#[derive(Debug, thiserror::Error)]
pub enum ClientError {
    /// The service answered with a structured error.
    #[error("{body} (HTTP {status})")]
    Api { status: u16, body: ApiErrorBody },
    #[error("request failed: {0}")]
    Http(#[from] reqwest::Error),
    #[error("stream failed: {0}")]
    Stream(#[from] tokio_tungstenite::tungstenite::Error),
    #[error("could not decode response: {0}")]
    Decode(String),
}

impl ClientError {
    /// The structured error body, if the service produced one.
    pub fn api(&self) -> Option<&ApiErrorBody> {
        match self {
            ClientError::Api { body, .. } => Some(body),
            _ => None,
        }
    }
}

pub type Result<T, E = ClientError> = std::result::Result<T, E>;

/// Exported file contents with the content type the service reported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportedFile {
    pub content_type: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Client {
    base: String,
    http: reqwest::Client,
}

impl Client {
    /// `base` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base: impl Into<String>) -> Self {
        Client {
            base: base.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::new(),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base
    }

    fn url(&self, path: &str) -> String {
        format!("{}{API_PREFIX}{path}", self.base)
    }

    fn session_url(&self, id: Uuid, path: &str) -> String {
        self.url(&format!("/sessions/{id}{path}"))
    }

    async fn send(&self, req: RequestBuilder) -> Result<Response> {
        let resp = req.send().await?;
        if resp.status().is_success() {
            return Ok(resp);
        }
        let status = resp.status().as_u16();
        let bytes = resp.bytes().await?;
        let body = serde_json::from_slice(&bytes).unwrap_or_else(|_| ApiErrorBody {
            code: dronecine_protocol::ErrorCode::Internal,
            field: None,
            reason: String::from_utf8_lossy(&bytes).into_owned(),
        });
        Err(ClientError::Api { status, body })
    }

    async fn decode<T: DeserializeOwned>(resp: Response) -> Result<T> {
        let bytes = resp.bytes().await?;
        serde_json::from_slice(&bytes).map_err(|e| ClientError::Decode(e.to_string()))
    }

    async fn call<B: Serialize, T: DeserializeOwned>(
        &self,
        method: Method,
        url: String,
        body: Option<&B>,
    ) -> Result<T> {
        let mut req = self.http.request(method, url);
        if let Some(body) = body {
            req = req.json(body);
        }
        Self::decode(self.send(req).await?).await
    }

    async fn call_empty<B: Serialize>(&self, method: Method, url: String, body: Option<&B>) -> Result<()> {
        let mut req = self.http.request(method, url);
        if let Some(body) = body {
            req = req.json(body);
        }
        self.send(req).await.map(|_| ())
    }

    pub async fn health(&self) -> Result<serde_json::Value> {
        self.call::<(), _>(Method::GET, self.url("/health"), None).await
    }

    pub async fn create_session(&self, req: &CreateSessionRequest) -> Result<SessionInfo> {
        self.call(Method::POST, self.url("/sessions"), Some(req)).await
    }

    pub async fn sessions(&self) -> Result<Vec<Uuid>> {
        self.call::<(), _>(Method::GET, self.url("/sessions"), None).await
    }

    pub async fn session(&self, id: Uuid) -> Result<SessionInfo> {
        self.call::<(), _>(Method::GET, self.session_url(id, ""), None).await
    }

    pub async fn delete_session(&self, id: Uuid) -> Result<()> {
        self.call_empty::<()>(Method::DELETE, self.session_url(id, ""), None)
            .await
    }

    /// The saved project document, byte for byte.
    pub async fn project_document(&self, id: Uuid) -> Result<Vec<u8>> {
        let resp = self.send(self.http.get(self.session_url(id, "/project"))).await?;
        Ok(resp.bytes().await?.to_vec())
    }

    pub async fn project(&self, id: Uuid) -> Result<Project> {
        let doc = self.project_document(id).await?;
        load_project(&doc).map_err(|e| ClientError::Decode(e.to_string()))
    }

    /// Replaces the session's project with a project document.
    pub async fn load_project(&self, id: Uuid, document: Vec<u8>) -> Result<()> {
        let req = self
            .http
            .put(self.session_url(id, "/project"))
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(document);
        self.send(req).await.map(|_| ())
    }

    pub async fn update_environment(&self, id: Uuid, patch: &EnvironmentPatch) -> Result<()> {
        self.call_empty(Method::PATCH, self.session_url(id, "/environment"), Some(patch))
            .await
    }

    pub async fn add_actor(&self, id: Uuid, draft: &ActorDraft) -> Result<Actor> {
        self.call(Method::POST, self.session_url(id, "/actors"), Some(draft))
            .await
    }

    pub async fn update_actor(&self, id: Uuid, actor_id: u32, patch: &ActorPatch) -> Result<Actor> {
        self.call(
            Method::PATCH,
            self.session_url(id, &format!("/actors/{actor_id}")),
            Some(patch),
        )
        .await
    }

    pub async fn delete_actor(&self, id: Uuid, actor_id: u32) -> Result<()> {
        self.call_empty::<()>(
            Method::DELETE,
            self.session_url(id, &format!("/actors/{actor_id}")),
            None,
        )
        .await
    }

    pub async fn add_drone(&self, id: Uuid, draft: &DroneDraft) -> Result<DroneConfig> {
        self.call(Method::POST, self.session_url(id, "/drones"), Some(draft))
            .await
    }

    pub async fn update_drone(&self, id: Uuid, drone_id: u32, patch: &DronePatch) -> Result<DroneConfig> {
        self.call(
            Method::PATCH,
            self.session_url(id, &format!("/drones/{drone_id}")),
            Some(patch),
        )
        .await
    }

    pub async fn delete_drone(&self, id: Uuid, drone_id: u32) -> Result<()> {
        self.call_empty::<()>(
            Method::DELETE,
            self.session_url(id, &format!("/drones/{drone_id}")),
            None,
        )
        .await
    }

    pub async fn set_waypoints(&self, id: Uuid, drone_id: u32, waypoints: Vec<Waypoint>) -> Result<FlightPlan> {
        let body = WaypointsUpdate { waypoints };
        self.call(
            Method::PUT,
            self.session_url(id, &format!("/drones/{drone_id}/waypoints")),
            Some(&body),
        )
        .await
    }

    pub async fn generate_shot(&self, id: Uuid, drone_id: u32, dt: Option<f64>) -> Result<Trajectory> {
        let body = ShotRequest { dt };
        self.call(
            Method::POST,
            self.session_url(id, &format!("/drones/{drone_id}/shot")),
            Some(&body),
        )
        .await
    }

    pub async fn add_scan(&self, id: Uuid, draft: &ScanDraft) -> Result<ScanEntry> {
        self.call(Method::POST, self.session_url(id, "/scans"), Some(draft))
            .await
    }

    pub async fn delete_scan(&self, id: Uuid, scan_id: u32) -> Result<()> {
        self.call_empty::<()>(Method::DELETE, self.session_url(id, &format!("/scans/{scan_id}")), None)
            .await
    }

    pub async fn generate_scan(&self, id: Uuid, scan_id: u32) -> Result<ScanPlan> {
        self.call::<(), _>(
            Method::POST,
            self.session_url(id, &format!("/scans/{scan_id}/plan")),
            None,
        )
        .await
    }

    pub async fn verify_overlap(&self, id: Uuid, scan_id: u32, mode: OverlapMode) -> Result<OverlapReport> {
        let body = OverlapRequest { mode };
        self.call(
            Method::POST,
            self.session_url(id, &format!("/scans/{scan_id}/overlap")),
            Some(&body),
        )
        .await
    }

    pub async fn start(&self, id: Uuid) -> Result<SessionInfo> {
        self.call::<(), _>(Method::POST, self.session_url(id, "/sim/start"), None)
            .await
    }

    pub async fn pause(&self, id: Uuid) -> Result<SessionInfo> {
        self.call::<(), _>(Method::POST, self.session_url(id, "/sim/pause"), None)
            .await
    }

    pub async fn reset(&self, id: Uuid) -> Result<SessionInfo> {
        self.call::<(), _>(Method::POST, self.session_url(id, "/sim/reset"), None)
            .await
    }

    pub async fn step(&self, id: Uuid, ticks: u64) -> Result<StepResponse> {
        self.call(
            Method::POST,
            self.session_url(id, "/sim/step"),
            Some(&StepRequest { ticks }),
        )
        .await
    }

    pub async fn run(&self, id: Uuid, seconds: f64) -> Result<RunSummary> {
        self.call(
            Method::POST,
            self.session_url(id, "/sim/run"),
            Some(&RunRequest { seconds }),
        )
        .await
    }

    pub async fn state(&self, id: Uuid) -> Result<WorldSnapshot> {
        self.call::<(), _>(Method::GET, self.session_url(id, "/sim/state"), None)
            .await
    }

    pub async fn enter_freeplay(&self, id: Uuid, drone_id: u32) -> Result<SessionInfo> {
        self.call(
            Method::POST,
            self.session_url(id, "/freeplay/enter"),
            Some(&FreeplayEnter { drone_id }),
        )
        .await
    }

    pub async fn exit_freeplay(&self, id: Uuid) -> Result<FreeplayExit> {
        self.call::<(), _>(Method::POST, self.session_url(id, "/freeplay/exit"), None)
            .await
    }

    pub async fn control(&self, id: Uuid, drone_id: u32, input: ControlInput) -> Result<()> {
        let body = ControlRequest { drone_id, input };
        self.call_empty(Method::POST, self.session_url(id, "/freeplay/control"), Some(&body))
            .await
    }

    pub async fn export(&self, id: Uuid, query: &ExportQuery) -> Result<ExportedFile> {
        let resp = self
            .send(self.http.get(self.session_url(id, &export_query(query))))
            .await?;
        let content_type = resp
            .headers()
            .get(reqwest::header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .unwrap_or_default()
            .to_string();
        Ok(ExportedFile {
            content_type,
            bytes: resp.bytes().await?.to_vec(),
        })
    }

    /// Opens the session stream.
    pub async fn stream(&self, id: Uuid) -> Result<SessionStream> {
        let url = self.session_url(id, "/stream");
        let url = match url.strip_prefix("http") {
            Some(rest) => format!("ws{rest}"),
            None => url,
        };
        let (ws, _) = tokio_tungstenite::connect_async_with_config(url, None, true).await?;
        Ok(SessionStream { ws })
    }
}

fn plain<T: Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(serde_json::Value::String(s)) => s,
        Ok(other) => other.to_string(),
        Err(_) => String::new(),
    }
}

fn export_query(q: &ExportQuery) -> String {
    let mut s = format!("/export?format={}&source={}", plain(&q.format), plain(&q.source));
    if let Some(d) = q.drone_id {
        s.push_str(&format!("&drone_id={d}"));
    }
    if let Some(sc) = q.scan_id {
        s.push_str(&format!("&scan_id={sc}"));
    }
    if let Some(i) = q.interval {
        s.push_str(&format!("&interval={i}"));
    }
    s
}

/// Something received on a session stream.
#[derive(Debug, Clone, PartialEq)]
pub enum StreamItem {
    Message(ServerMessage),
    /// The server closed the stream, with its reason.
    Closed(String),
}

pub struct SessionStream {
    ws: tokio_tungstenite::WebSocketStream<tokio_tungstenite::MaybeTlsStream<tokio::net::TcpStream>>,
}

impl SessionStream {
    pub async fn send(&mut self, msg: &ClientMessage) -> Result<()> {
        let text = serde_json::to_string(msg).map_err(|e| ClientError::Decode(e.to_string()))?;
        self.ws.send(Message::Text(text.into())).await?;
        Ok(())
    }

    /// Sends a raw text frame, bypassing message typing.
    pub async fn send_raw(&mut self, text: &str) -> Result<()> {
        self.ws.send(Message::Text(text.to_string().into())).await?;
        Ok(())
    }

    pub async fn control(&mut self, drone_id: u32, input: ControlInput) -> Result<()> {
        self.send(&ClientMessage::Control { drone_id, input }).await
    }

    pub async fn step(&mut self, ticks: u64) -> Result<()> {
        self.send(&ClientMessage::Step { ticks }).await
    }

    /// Next message; `None` once the connection is gone.
    pub async fn next(&mut self) -> Result<Option<StreamItem>> {
        while let Some(frame) = self.ws.next().await {
            match frame? {
                Message::Text(t) => {
                    let msg = serde_json::from_str(t.as_str()).map_err(|e| ClientError::Decode(e.to_string()))?;
                    return Ok(Some(StreamItem::Message(msg)));
                }
                Message::Close(frame) => {
                    let reason = frame.map(|f| f.reason.to_string()).unwrap_or_default();
                    return Ok(Some(StreamItem::Closed(reason)));
                }
                _ => continue,
            }
        }
        Ok(None)
    }

    /// Reads until the next `state` message, collecting any messages seen
    /// on the way.
    pub async fn next_state(&mut self, seen: &mut Vec<ServerMessage>) -> Result<Option<WorldSnapshot>> {
        loop {
            match self.next().await? {
                Some(StreamItem::Message(ServerMessage::State { state, .. })) => return Ok(Some(state)),
                Some(StreamItem::Message(other)) => seen.push(other),
                Some(StreamItem::Closed(_)) | None => return Ok(None),
            }
        }
    }

    pub async fn close(mut self) -> Result<()> {
        self.ws.close(None).await?;
        Ok(())
    }
}
