//! JSON-over-HTTP front end. Every endpoint parses its body into the same
//! input type the CLI builds from files and returns the same bytes.

use std::net::SocketAddr;
use std::path::PathBuf;

use axum::body::Bytes;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use rdot::{Catalog, ReportFormat};
use serde::de::DeserializeOwned;
use tower_http::services::ServeDir;

use crate::ops::{self, ApiError, ApiResult};

pub const DEFAULT_PORT: u16 = 8080;
pub const PORT_ENV: &str = "RDOT_PORT";
pub const UI_DIR_ENV: &str = "RDOT_UI_DIR";
pub const DEFAULT_UI_DIR: &str = "webui/dist";

fn respond(result: ApiResult) -> Response {
    let json = [(header::CONTENT_TYPE, "application/json")];
    match result {
        Ok(body) => (json, body).into_response(),
        Err(e) => {
            let status = StatusCode::from_u16(e.status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            (status, json, e.to_json()).into_response()
        }
    }
}

async fn run<I, F>(body: Bytes, op: F) -> Response
where
    I: DeserializeOwned + Send + 'static,
    F: FnOnce(&I) -> ApiResult + Send + 'static,
{
    let result = tokio::task::spawn_blocking(move || {
        let text = std::str::from_utf8(&body).map_err(|e| ApiError::validation("parse", e.to_string()))?;
        op(&ops::parse::<I>(text)?)
    })
    .await
    .unwrap_or_else(|e| Err(ApiError::internal(format!("solver task failed: {e}"))));
    respond(result)
}

/// The API routes, plus static files from `ui_dir` at `/` when given.
pub fn router(ui_dir: Option<PathBuf>) -> Router {
    let api = Router::new()
        .route("/healthz", get(|| async { "ok" }))
        .route("/api/catalog", get(|| async { respond(Ok(ops::catalog(&Catalog::seed()))) }))
        .route("/api/filter", post(|b: Bytes| run(b, ops::filter)))
        .route("/api/suggest", post(|b: Bytes| run(b, ops::suggest)))
        .route("/api/cover", post(|b: Bytes| run(b, ops::cover)))
        .route("/api/moo", post(|b: Bytes| run(b, ops::moo)))
        .route("/api/ahp", post(|b: Bytes| run(b, ops::ahp)))
        .route(
            "/api/plan",
            post(|b: Bytes| run(b, |i: &ops::PlanInput| ops::plan_report(i, ReportFormat::Structured))),
        )
        .route(
            "/api/replan",
            post(|b: Bytes| run(b, |i: &ops::ReplanInput| ops::replan_report(i, ReportFormat::Structured))),
        );
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Port from the flag, then `RDOT_PORT`, then 8080.
pub fn resolve_port(flag: Option<u16>, env: Option<&str>) -> Result<u16, ApiError> {
    if let Some(p) = flag {
        return Ok(p);
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map_err(|_| ApiError::validation("bad_port", format!("{PORT_ENV}={v} is not a port number"))),
        None => Ok(DEFAULT_PORT),
    }
}

pub async fn serve(port: u16, ui_dir: Option<PathBuf>) -> std::io::Result<()> {
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("rdot: listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(ui_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn port_precedence() {
        assert_eq!(resolve_port(Some(9000), Some("7000")).unwrap(), 9000);
        assert_eq!(resolve_port(None, Some("7000")).unwrap(), 7000);
        assert_eq!(resolve_port(None, None).unwrap(), DEFAULT_PORT);
        assert!(resolve_port(None, Some("nope")).is_err());
    }
}
