//! HTTP transport for the `/v1` API.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::{header, StatusCode, Uri};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::Serialize;
use serde::de::DeserializeOwned;
use tokio::net::TcpListener;

use crate::api::{self, ApiError, EstimateRequest, ErrorCode, ParseRequest};
use crate::catalog::{load_catalog, Catalog, CatalogError};

pub const BIND_ENV: &str = "IMPACT_BIND_ADDR";
pub const CATALOG_ENV: &str = "IMPACT_CATALOG_DIR";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

/// Shared, swappable catalog. Each request clones the `Arc` once and sees a
/// single snapshot for its whole lifetime.
#[derive(Clone)]
pub struct AppState {
    catalog: Arc<RwLock<Arc<Catalog>>>,
}

impl AppState {
    pub fn new(catalog: Catalog) -> Self {
        AppState {
            catalog: Arc::new(RwLock::new(Arc::new(catalog))),
        }
    }

    pub fn current(&self) -> Arc<Catalog> {
        self.catalog.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn replace(&self, catalog: Catalog) {
        *self.catalog.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(catalog);
    }

    /// Loads and validates `dir`, swapping it in only on success.
    pub fn reload_from(&self, dir: &Path) -> Result<(), CatalogError> {
        let catalog = load_catalog(dir)?;
        self.replace(catalog);
        Ok(())
    }
}

fn json_response<T: Serialize>(catalog: &Catalog, status: StatusCode, body: T) -> Response {
    (
        status,
        [(header::CONTENT_TYPE, "application/json")],
        api::to_json(catalog, body),
    )
        .into_response()
}

fn error_response(catalog: &Catalog, error: ApiError) -> Response {
    let status = StatusCode::from_u16(error.code.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    json_response(catalog, status, api::ErrorBody { error })
}

fn respond<T: Serialize>(catalog: &Catalog, result: Result<T, ApiError>) -> Response {
    match result {
        Ok(body) => json_response(catalog, StatusCode::OK, body),
        Err(e) => error_response(catalog, e),
    }
}

fn read_json<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    if body.iter().all(u8::is_ascii_whitespace) {
        return Err(ApiError::new(ErrorCode::BadRequest, "request body is empty"));
    }
    serde_json::from_slice(body)
        .map_err(|e| ApiError::new(ErrorCode::BadRequest, format!("invalid JSON body: {e}")))
}

async fn models(State(state): State<AppState>) -> Response {
    let catalog = state.current();
    json_response(&catalog, StatusCode::OK, api::list_models(&catalog))
}

async fn parse(State(state): State<AppState>, body: Bytes) -> Response {
    let catalog = state.current();
    let result = read_json::<ParseRequest>(&body).and_then(|req| api::parse(&catalog, &req));
    respond(&catalog, result)
}

async fn estimate(State(state): State<AppState>, body: Bytes) -> Response {
    let catalog = state.current();
    let result = read_json::<EstimateRequest>(&body)
        .and_then(|req| api::estimate(&catalog, &req))
        .map(|(_, response)| response);
    respond(&catalog, result)
}

async fn observatory(
    State(state): State<AppState>,
    Query(query): Query<HashMap<String, String>>,
) -> Response {
    let catalog = state.current();
    match api::observatory(&catalog, query.get("format").map(String::as_str)) {
        Ok((body, media)) => (StatusCode::OK, [(header::CONTENT_TYPE, media)], body).into_response(),
        Err(e) => error_response(&catalog, e),
    }
}

async fn training(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Query(query): Query<HashMap<String, String>>,
) -> Response {
    let catalog = state.current();
    let result = api::training(&catalog, &id, query.get("country").map(String::as_str));
    respond(&catalog, result)
}

/// `/vN/...` with N other than 1 is an unknown version; anything else is not found.
async fn fallback(State(state): State<AppState>, uri: Uri) -> Response {
    let catalog = state.current();
    let first = uri.path().trim_start_matches('/').split('/').next().unwrap_or("");
    let versioned = first
        .strip_prefix('v')
        .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()));
    let error = if versioned && first != "v1" {
        ApiError::new(
            ErrorCode::UnknownVersion,
            format!("API version `{first}` is not served; use /v1"),
        )
    } else {
        ApiError::new(ErrorCode::NotFound, format!("no route for `{}`", uri.path()))
    };
    error_response(&catalog, error)
}

async fn wrong_method(State(state): State<AppState>, uri: Uri) -> Response {
    let catalog = state.current();
    let error = ApiError::new(
        ErrorCode::BadRequest,
        format!("method not allowed on `{}`", uri.path()),
    );
    let mut response = error_response(&catalog, error);
    *response.status_mut() = StatusCode::METHOD_NOT_ALLOWED;
    response
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/v1/models", get(models))
        .route("/v1/models/{id}/training", get(training))
        .route("/v1/parse", post(parse))
        .route("/v1/estimate", post(estimate))
        .route("/v1/observatory", get(observatory))
        .fallback(fallback)
        .method_not_allowed_fallback(wrong_method)
        .with_state(state)
}

/// Serves until ctrl-c.
pub async fn serve(listener: TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
