//! Newline-delimited JSON over TCP.
//!
//! Every request and reply is one JSON object on one line. Requests name an
//! operation (`create`, `evaluate`, `sample`, `pareto_front`, `settings`,
//! `close`); every operation except `create` refers to a session by its
//! integer-string id. Replies always carry `v`, `id`, `status` and, on
//! failure, `error_code` and `message`. See `docs/formats.md` for the full
//! schema.

mod client;
mod server;
mod service;

pub use client::Client;
pub use server::{Server, ServerHandle};
pub use service::{session_streams, Service};

use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;
pub const DEFAULT_PORT: u16 = 9911;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Request {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<u32>,
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl Request {
    fn op(op: &str) -> Self {
        Request {
            v: Some(PROTOCOL_VERSION),
            op: op.into(),
            ..Default::default()
        }
    }

    pub fn create(suite: &str, index: usize, seed: u64) -> Self {
        Request {
            suite: Some(suite.into()),
            index: Some(index),
            seed: Some(seed),
            ..Self::op("create")
        }
    }

    pub fn evaluate(id: &str, x: Vec<Vec<i64>>) -> Self {
        Request {
            id: Some(id.into()),
            x: Some(x),
            ..Self::op("evaluate")
        }
    }

    pub fn sample(id: &str, n: usize) -> Self {
        Request {
            id: Some(id.into()),
            n: Some(n),
            ..Self::op("sample")
        }
    }

    /// `pareto_front`, `settings` or `close`.
    pub fn session(op: &str, id: &str) -> Self {
        Request {
            id: Some(id.into()),
            ..Self::op(op)
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Reply {
    pub v: u32,
    pub id: String,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_code: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<Vec<f64>>>,
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<Vec<u32>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_var: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_obj: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unavailable: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objectives: Option<Vec<String>>,
}

impl Reply {
    pub fn ok(id: impl Into<String>) -> Self {
        Reply {
            v: PROTOCOL_VERSION,
            id: id.into(),
            status: "ok".into(),
            ..Default::default()
        }
    }

    pub fn error(id: impl Into<String>, code: &str, message: impl Into<String>) -> Self {
        Reply {
            v: PROTOCOL_VERSION,
            id: id.into(),
            status: "error".into(),
            error_code: Some(code.into()),
            message: Some(message.into()),
            ..Default::default()
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// Wire error code for a library error.
pub fn error_code(e: &crate::Error) -> &'static str {
    use crate::Error::*;
    match e.root() {
        Dimension { .. } => "shape",
        OutOfRange { .. } | InvalidSolution(_) | Parse { .. } | Parameter(_) => "invalid",
        UnknownSolution(_) => "unknown-solution",
        Unsupported(_) => "unsupported",
        MissingData(_) | MissingKey(_) | Schema(_) | Format { .. } | Json(_) => "data",
        Index(_) => "index",
        Unavailable => "unavailable",
        Sampling { .. } | Io(_) | Batch { .. } => "internal",
    }
}
