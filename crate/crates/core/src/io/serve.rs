use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};

use crate::net::{Diagram, EventId};
use crate::query::causal_past;

const INDEX: &str = include_str!("index.html");

struct Served {
    diagram: Diagram,
    bytes: Vec<u8>,
}

/// Read-only routes over one immutable diagram.
pub fn router(diagram: Diagram) -> Router {
    let bytes = super::serialize(&diagram);
    let state = Arc::new(Served { diagram, bytes });
    Router::new()
        .route("/", get(|| async { Html(INDEX) }))
        .route("/api/diagram", get(document))
        .route("/api/causal-past", get(past))
        .with_state(state)
}

async fn document(State(s): State<Arc<Served>>) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], s.bytes.clone()).into_response()
}

async fn past(State(s): State<Arc<Served>>, Query(q): Query<BTreeMap<String, String>>) -> Response {
    let Some(Ok(id)) = q.get("event").map(|v| v.parse::<u32>()) else {
        return (StatusCode::BAD_REQUEST, "expected ?event=ID").into_response();
    };
    match causal_past(&s.diagram, EventId(id)) {
        Ok(set) => Json(set.into_iter().collect::<Vec<_>>()).into_response(),
        Err(e) => (StatusCode::NOT_FOUND, e.to_string()).into_response(),
    }
}

pub async fn serve(diagram: Diagram, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(diagram)).await
}
