use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use fdenvelope_core::{fdx_select, Method, MethodInfo};
use serde::{Deserialize, Serialize};

use crate::error::{ApiError, ApiResult};
use crate::state::{AppState, Dataset};
use crate::upload::{from_value, parse_family, parse_json};

type SharedState = State<Arc<AppState>>;

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Created {
    pub id: String,
    pub m: usize,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct DatasetSummary {
    pub id: String,
    pub m: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct BoundResponse {
    pub size: usize,
    pub vhat: usize,
    pub dhat: usize,
    pub fdp_bound: f64,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct M0Response {
    pub method: Method,
    pub alpha: f64,
    /// Plug-in estimate of adaptive methods.
    pub m0_hat: Option<usize>,
    /// `m0_hat` when available, otherwise the bound on all hypotheses.
    pub m0_estimate: usize,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct SelectResponse {
    pub k: usize,
    pub selection: Vec<usize>,
    pub vhat: usize,
    pub fdp_bound: f64,
}

#[derive(Debug, Deserialize)]
pub struct FitParams {
    method: Option<String>,
    alpha: Option<String>,
    gamma: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundRequest {
    selection: Vec<usize>,
    method: String,
    alpha: f64,
}

fn parse_method(raw: Option<&str>) -> ApiResult<Method> {
    let raw = raw.ok_or_else(|| ApiError::unprocessable("method", "missing method"))?;
    raw.parse().map_err(|e: fdenvelope_core::Error| ApiError::unprocessable("method", e.to_string()))
}

fn parse_unit(field: &str, raw: Option<&str>) -> ApiResult<f64> {
    let raw = raw.ok_or_else(|| ApiError::unprocessable(field, format!("missing {field}")))?;
    raw.parse::<f64>().map_err(|_| ApiError::unprocessable(field, format!("`{raw}` is not a number")))
}

fn dataset(state: &AppState, id: &str) -> ApiResult<Arc<Dataset>> {
    state.get(id).ok_or_else(|| ApiError::not_found(id))
}

/// Runs CPU-bound work off the async executor.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(format!("worker failed: {e}")))?
}

fn json_text(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

pub async fn methods() -> Json<Vec<MethodInfo>> {
    Json(Method::ALL.into_iter().map(Method::info).collect())
}

pub async fn create_dataset(State(state): SharedState, body: Bytes) -> ApiResult<Response> {
    let max_m = state.config.max_m;
    let family = blocking(move || parse_family(&body, max_m)).await?;
    let m = family.m();
    let (ds, fresh) = state.insert(family).map_err(|e| ApiError::internal(format!("cannot store dataset: {e}")))?;
    let status = if fresh { StatusCode::CREATED } else { StatusCode::OK };
    Ok((status, Json(Created { id: ds.id.clone(), m })).into_response())
}

pub async fn get_dataset(State(state): SharedState, Path(id): Path<String>) -> ApiResult<Json<DatasetSummary>> {
    let ds = dataset(&state, &id)?;
    let labels = ds.family.labels().map(<[String]>::to_vec);
    Ok(Json(DatasetSummary { id: ds.id.clone(), m: ds.family.m(), labels }))
}

pub async fn envelope(
    State(state): SharedState,
    Path(id): Path<String>,
    Query(params): Query<FitParams>,
) -> ApiResult<Response> {
    let ds = dataset(&state, &id)?;
    let method = parse_method(params.method.as_deref())?;
    let alpha = parse_unit("alpha", params.alpha.as_deref())?;
    let curve = blocking(move || {
        let fitted = ds.fitted(method, alpha).map_err(ApiError::from_query)?;
        ds.curve(&fitted).map_err(ApiError::from_query)
    })
    .await?;
    Ok(json_text(curve.json.clone()))
}

pub async fn m0(
    State(state): SharedState,
    Path(id): Path<String>,
    Query(params): Query<FitParams>,
) -> ApiResult<Json<M0Response>> {
    let ds = dataset(&state, &id)?;
    let method = parse_method(params.method.as_deref())?;
    let alpha = parse_unit("alpha", params.alpha.as_deref())?;
    let fitted = blocking(move || ds.fitted(method, alpha).map_err(ApiError::from_query)).await?;
    Ok(Json(M0Response { method, alpha, m0_hat: fitted.m0_hat, m0_estimate: fitted.m0_estimate }))
}

pub async fn bound(State(state): SharedState, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<BoundResponse>> {
    let ds = dataset(&state, &id)?;
    let req: BoundRequest = from_value(parse_json(&body)?)?;
    let method: Method = parse_method(Some(&req.method))?;
    let m = ds.family.m();
    if let Some(pos) = req.selection.iter().position(|&i| i >= m) {
        return Err(ApiError::unprocessable(
            format!("selection[{pos}]"),
            format!("index {} out of range for m = {m}", req.selection[pos]),
        ));
    }
    let mut selection = req.selection;
    selection.sort_unstable();
    selection.dedup();
    let alpha = req.alpha;
    blocking(move || {
        let fitted = ds.fitted(method, alpha).map_err(ApiError::from_query)?;
        let vhat = ds.bound(&fitted, &selection).map_err(ApiError::from_query)?;
        let size = selection.len();
        Ok(Json(BoundResponse { size, vhat, dhat: size - vhat, fdp_bound: vhat as f64 / size.max(1) as f64 }))
    })
    .await
}

pub async fn select(
    State(state): SharedState,
    Path(id): Path<String>,
    Query(params): Query<FitParams>,
) -> ApiResult<Json<SelectResponse>> {
    let ds = dataset(&state, &id)?;
    let method = parse_method(params.method.as_deref())?;
    let alpha = parse_unit("alpha", params.alpha.as_deref())?;
    let gamma = parse_unit("gamma", params.gamma.as_deref())?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(ApiError::unprocessable("gamma", format!("gamma must lie in [0, 1], got {gamma}")));
    }
    let curve = blocking(move || {
        let fitted = ds.fitted(method, alpha).map_err(ApiError::from_query)?;
        ds.curve(&fitted).map_err(ApiError::from_query)
    })
    .await?;
    let vhat = curve.curve.vhat();
    let k = fdx_select(&vhat, gamma);
    let v = if k == 0 { 0 } else { vhat[k - 1] };
    Ok(Json(SelectResponse {
        k,
        selection: curve.curve.order[..k].to_vec(),
        vhat: v,
        fdp_bound: v as f64 / k.max(1) as f64,
    }))
}
