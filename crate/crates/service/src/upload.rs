//! Parsing of dataset uploads.

use fdenvelope_core::{fisher_test, Error as CoreError, PValueFamily, StepCdf, Table2x2};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

use crate::error::{ApiError, ApiResult};

/// A family given directly as p-values and null cdfs.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyUpload {
    pvalues: Vec<f64>,
    cdfs: Vec<StepCdf>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

/// Raw 2x2 count tables, each turned into a two-sided Fisher exact test.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TablesUpload {
    tables: Vec<TableUpload>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableUpload {
    a: u64,
    b: u64,
    c: u64,
    d: u64,
}

/// Deserializes `value` into `T`, reporting the JSON path of the first violation.
pub(crate) fn from_value<T: DeserializeOwned>(value: Value) -> ApiResult<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "body".to_string() } else { path };
        ApiError::bad_request(field, e.into_inner().to_string())
    })
}

pub(crate) fn parse_json(bytes: &[u8]) -> ApiResult<Value> {
    serde_json::from_slice(bytes).map_err(|e| ApiError::bad_request("body", format!("malformed JSON: {e}")))
}

/// Builds a family from an upload body, rejecting more than `max_m` hypotheses.
pub fn parse_family(bytes: &[u8], max_m: usize) -> ApiResult<PValueFamily> {
    let value = parse_json(bytes)?;
    let too_many = |field: &str, m: usize| {
        ApiError::new(axum::http::StatusCode::PAYLOAD_TOO_LARGE, format!("{m} hypotheses exceed the limit of {max_m}"))
            .with_field(field)
    };
    let invalid = |e: CoreError| match e {
        CoreError::InvalidInput { field, reason } => ApiError::bad_request(field, reason),
        other => ApiError::bad_request("body", other.to_string()),
    };
    if value.get("tables").is_some() {
        let upload: TablesUpload = from_value(value)?;
        if upload.tables.len() > max_m {
            return Err(too_many("tables", upload.tables.len()));
        }
        let mut pvalues = Vec::with_capacity(upload.tables.len());
        let mut cdfs = Vec::with_capacity(upload.tables.len());
        for (i, t) in upload.tables.iter().enumerate() {
            let test = fisher_test(Table2x2::new(t.a, t.b, t.c, t.d))
                .map_err(|e| ApiError::bad_request(format!("tables[{i}]"), e.to_string()))?;
            pvalues.push(test.pvalue);
            cdfs.push(test.cdf);
        }
        PValueFamily::with_labels(pvalues, cdfs, upload.labels).map_err(invalid)
    } else {
        let upload: FamilyUpload = from_value(value)?;
        if upload.pvalues.len() > max_m {
            return Err(too_many("pvalues", upload.pvalues.len()));
        }
        PValueFamily::with_labels(upload.pvalues, upload.cdfs, upload.labels).map_err(invalid)
    }
}
