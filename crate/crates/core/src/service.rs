//! Stateless JSON endpoints backing the planner front end.
//!
//! Each endpoint is a plain function over its request type; the axum
//! router only adds decoding and status codes.

use axum::body::Bytes;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{Duration, NaiveDate};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::audit::{classify, ZoneScheme};
use crate::error::Error;
use crate::io::RunConfig;
use crate::planner::{max_safe_acute, project_schedule, PlanRequest, PlanResult};
use crate::ratio::{compute_series, lambda_from_n, MethodSpec, RatioMethod, RatioPoint};
use crate::series::WorkloadSeries;
use crate::study::fixtures;

pub const BIND_ENV: &str = "ACWR_BIND";
pub const DEFAULT_BIND: &str = "127.0.0.1:8080";

pub const FIXTURE_IDS: [&str; 4] = ["constant", "zero-history", "worked-injured", "worked-uninjured"];

/// Preloaded series addressable by id instead of inline loads.
pub fn fixture(id: &str) -> Option<WorkloadSeries> {
    let start = fixtures::example_start();
    match id {
        "constant" => WorkloadSeries::from_daily("constant", start, &[10.0; 28]).ok(),
        "zero-history" => WorkloadSeries::from_daily("zero-history", start, &[0.0; 21]).ok(),
        "worked-injured" => Some(fixtures::two_athlete_example().0.realized),
        "worked-uninjured" => Some(fixtures::two_athlete_example().1.realized),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: u16,
    pub kind: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
}

impl ApiError {
    fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            status: 422,
            kind: "invalid_field",
            message: message.into(),
            field: Some(field.into()),
        }
    }

    fn from_error(e: Error, prefix: &str) -> Self {
        let field = match &e {
            Error::InvalidParameter { name, .. } => Some(format!("{prefix}{name}")),
            Error::InvalidLoad { .. } => Some(format!("{prefix}loads")),
            Error::DiscontinuousPlan { .. } => Some("plan.start".to_string()),
            _ => None,
        };
        Self {
            status: 422,
            kind: "computation",
            message: e.to_string(),
            field,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.status).unwrap_or(StatusCode::BAD_REQUEST);
        (status, Json(serde_json::json!({ "error": self }))).into_response()
    }
}

/// Either inline daily loads or a fixture id.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesInput {
    #[serde(default)]
    pub athlete_id: Option<String>,
    #[serde(default)]
    pub start: Option<NaiveDate>,
    #[serde(default)]
    pub loads: Option<Vec<f64>>,
    #[serde(default)]
    pub fixture: Option<String>,
}

impl SeriesInput {
    pub fn inline(start: NaiveDate, loads: Vec<f64>) -> Self {
        Self {
            start: Some(start),
            loads: Some(loads),
            ..Self::default()
        }
    }

    pub fn fixture(id: &str) -> Self {
        Self {
            fixture: Some(id.to_string()),
            ..Self::default()
        }
    }

    fn resolve(&self, field: &str) -> Result<WorkloadSeries, ApiError> {
        match (&self.fixture, &self.loads) {
            (Some(_), Some(_)) => Err(ApiError::invalid(field, "give either `fixture` or `loads`, not both")),
            (Some(id), None) => {
                let s = fixture(id).ok_or_else(|| {
                    ApiError::invalid(
                        format!("{field}.fixture"),
                        format!("unknown fixture `{id}`; known: {}", FIXTURE_IDS.join(", ")),
                    )
                })?;
                Ok(match &self.athlete_id {
                    Some(a) => s.with_athlete_id(a.clone()),
                    None => s,
                })
            }
            (None, Some(loads)) => {
                let start = self
                    .start
                    .ok_or_else(|| ApiError::invalid(format!("{field}.start"), "required with inline loads"))?;
                if let Some(i) = loads.iter().position(|l| !(l.is_finite() && *l >= 0.0)) {
                    return Err(ApiError::invalid(
                        format!("{field}.loads[{i}]"),
                        "loads must be finite and nonnegative",
                    ));
                }
                let id = self.athlete_id.clone().unwrap_or_else(|| "athlete".into());
                WorkloadSeries::from_daily(id, start, loads).map_err(|e| ApiError::from_error(e, ""))
            }
            (None, None) => Err(ApiError::invalid(field, "one of `fixture` or `loads` is required")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZonedPoint {
    #[serde(flatten)]
    pub point: RatioPoint,
    pub zone: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioResponse {
    pub athlete_id: String,
    pub method: RatioMethod,
    pub method_spec: MethodSpec,
    pub points: Vec<ZonedPoint>,
}

fn zoned(points: Vec<RatioPoint>, zones: &ZoneScheme) -> Vec<ZonedPoint> {
    points
        .into_iter()
        .map(|point| ZonedPoint {
            zone: classify(&point, zones).to_string(),
            point,
        })
        .collect()
}

fn method_and_zones(
    method: &Option<MethodSpec>,
    zones: &Option<ZoneScheme>,
) -> Result<(MethodSpec, ZoneScheme), ApiError> {
    let method = method.clone().unwrap_or_else(|| RunConfig::default().method);
    method.validate().map_err(|e| ApiError::from_error(e, "method."))?;
    let zones = zones.clone().unwrap_or_default();
    zones.validate().map_err(|e| ApiError::from_error(e, ""))?;
    Ok((method, zones))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatioRequest {
    pub series: SeriesInput,
    #[serde(default)]
    pub method: Option<MethodSpec>,
    #[serde(default)]
    pub zones: Option<ZoneScheme>,
}

pub fn ratio(req: &RatioRequest) -> Result<RatioResponse, ApiError> {
    let series = req.series.resolve("series")?;
    let (method, zones) = method_and_zones(&req.method, &req.zones)?;
    let points = compute_series(&series, &method).map_err(|e| ApiError::from_error(e, "method."))?;
    Ok(RatioResponse {
        athlete_id: series.athlete_id().to_string(),
        method: method.method(),
        points: zoned(points, &zones),
        method_spec: method,
    })
}

pub fn plan(req: &PlanRequest) -> Result<PlanResult, ApiError> {
    max_safe_acute(req).map_err(|e| ApiError::from_error(e, ""))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanInput {
    pub loads: Vec<f64>,
    /// Required only when the history is empty.
    #[serde(default)]
    pub start: Option<NaiveDate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectRequest {
    pub history: SeriesInput,
    pub plan: PlanInput,
    #[serde(default)]
    pub method: Option<MethodSpec>,
    #[serde(default)]
    pub zones: Option<ZoneScheme>,
}

/// Ratios over the planned days only.
pub fn project(req: &ProjectRequest) -> Result<RatioResponse, ApiError> {
    let history = req.history.resolve("history")?;
    let (method, zones) = method_and_zones(&req.method, &req.zones)?;
    let start = match (history.end(), req.plan.start) {
        (Some(end), _) => end + Duration::days(1),
        (None, Some(s)) => s,
        (None, None) => req
            .history
            .start
            .ok_or_else(|| ApiError::invalid("plan.start", "required when the history is empty"))?,
    };
    if let Some(i) = req.plan.loads.iter().position(|l| !(l.is_finite() && *l >= 0.0)) {
        return Err(ApiError::invalid(
            format!("plan.loads[{i}]"),
            "loads must be finite and nonnegative",
        ));
    }
    let planned = WorkloadSeries::from_daily(history.athlete_id(), start, &req.plan.loads)
        .map_err(|e| ApiError::from_error(e, "plan."))?;
    if let Some(given) = req.plan.start.filter(|s| *s != start) {
        return Err(ApiError::from_error(
            Error::DiscontinuousPlan {
                expected: start,
                got: given,
            },
            "",
        ));
    }
    let points = project_schedule(&history, &planned, &method).map_err(|e| ApiError::from_error(e, "method."))?;
    Ok(RatioResponse {
        athlete_id: history.athlete_id().to_string(),
        method: method.method(),
        points: zoned(points, &zones),
        method_spec: method,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Defaults {
    pub config: RunConfig,
    pub acute_lambda: f64,
    pub chronic_lambda: f64,
    pub fixtures: Vec<&'static str>,
    pub undefined_encoding: serde_json::Value,
}

pub fn defaults() -> Defaults {
    Defaults {
        config: RunConfig::default(),
        acute_lambda: lambda_from_n(7),
        chronic_lambda: lambda_from_n(28),
        fixtures: FIXTURE_IDS.to_vec(),
        undefined_encoding: serde_json::json!({ "status": "undefined" }),
    }
}

fn decode<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    let de = &mut serde_json::Deserializer::from_slice(body);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let syntax = inner.is_syntax() || inner.is_eof();
        ApiError {
            status: if syntax { 400 } else { 422 },
            kind: if syntax { "malformed_json" } else { "invalid_field" },
            message: inner.to_string(),
            field: (!syntax && path != ".").then_some(path),
        }
    })
}

fn respond<Req, Res, F>(body: Bytes, f: F) -> Response
where
    Req: DeserializeOwned,
    Res: Serialize,
    F: FnOnce(&Req) -> Result<Res, ApiError>,
{
    match decode::<Req>(&body).and_then(|req| f(&req)) {
        Ok(res) => Json(res).into_response(),
        Err(e) => e.into_response(),
    }
}

pub fn router() -> Router {
    Router::new()
        .route("/api/ratio", post(|body: Bytes| async move { respond(body, ratio) }))
        .route("/api/plan", post(|body: Bytes| async move { respond(body, plan) }))
        .route(
            "/api/project",
            post(|body: Bytes| async move { respond(body, project) }),
        )
        .route("/api/defaults", get(|| async { Json(defaults()) }))
}

/// Address from `ACWR_BIND`, falling back to the default.
pub fn bind_address() -> String {
    std::env::var(BIND_ENV).unwrap_or_else(|_| DEFAULT_BIND.to_string())
}

pub async fn serve(addr: &str) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router()).await
}
