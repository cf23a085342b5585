use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use blocklot_core::beacon::BeaconError;
use blocklot_core::ledger::LedgerError;
use blocklot_core::lottery::LotteryError;
use blocklot_core::verification::{FairnessError, VerificationError};
use serde_json::json;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ApiError {
    #[error("{0}")]
    InvalidParameter(String),
    #[error("event {0} not found")]
    NotFound(String),
    #[error("participant already registered")]
    DuplicateMember,
    #[error("event has already been drawn")]
    AlreadyDrawn,
    #[error("event has not been drawn yet")]
    NotDrawn,
    #[error("subscription deadline has passed")]
    PastDeadline,
    #[error("organizer token does not match")]
    BadToken,
    #[error("announcement date has not arrived")]
    TooEarlyDate,
    #[error("target block {target} needs tip {required}, beacon reports {tip}")]
    TooEarlyBlock { target: u64, required: u64, tip: u64 },
    #[error("{0}")]
    BeaconUnavailable(String),
    #[error("{0}")]
    LedgerUnavailable(String),
    #[error("{0}")]
    Internal(String),
}

impl ApiError {
    pub fn status(&self) -> StatusCode {
        match self {
            ApiError::InvalidParameter(_) => StatusCode::BAD_REQUEST,
            ApiError::NotFound(_) => StatusCode::NOT_FOUND,
            ApiError::DuplicateMember | ApiError::AlreadyDrawn | ApiError::NotDrawn => {
                StatusCode::CONFLICT
            }
            ApiError::PastDeadline => StatusCode::GONE,
            ApiError::BadToken => StatusCode::FORBIDDEN,
            ApiError::TooEarlyDate | ApiError::TooEarlyBlock { .. } => StatusCode::TOO_EARLY,
            ApiError::BeaconUnavailable(_) => StatusCode::BAD_GATEWAY,
            ApiError::LedgerUnavailable(_) => StatusCode::SERVICE_UNAVAILABLE,
            ApiError::Internal(_) => StatusCode::INTERNAL_SERVER_ERROR,
        }
    }

    /// Stable machine-readable error name.
    pub fn code(&self) -> &'static str {
        match self {
            ApiError::InvalidParameter(_) => "InvalidParameter",
            ApiError::NotFound(_) => "NotFound",
            ApiError::DuplicateMember => "DuplicateMember",
            ApiError::AlreadyDrawn => "AlreadyDrawn",
            ApiError::NotDrawn => "NotDrawn",
            ApiError::PastDeadline => "PastDeadline",
            ApiError::BadToken => "BadToken",
            ApiError::TooEarlyDate => "TooEarly",
            ApiError::TooEarlyBlock { .. } => "TooEarly",
            ApiError::BeaconUnavailable(_) => "BeaconUnavailable",
            ApiError::LedgerUnavailable(_) => "LedgerUnavailable",
            ApiError::Internal(_) => "Internal",
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": self.code(), "message": self.to_string() });
        (self.status(), Json(body)).into_response()
    }
}

impl From<LotteryError> for ApiError {
    fn from(e: LotteryError) -> Self {
        match e {
            LotteryError::InvalidParameter(m) => ApiError::InvalidParameter(m),
            LotteryError::AlreadyDrawn => ApiError::AlreadyDrawn,
            LotteryError::PastDeadline => ApiError::PastDeadline,
            LotteryError::DuplicateMember => ApiError::DuplicateMember,
            LotteryError::NotDrawn => ApiError::NotDrawn,
            LotteryError::BadToken => ApiError::BadToken,
            LotteryError::TooEarly => ApiError::TooEarlyDate,
            e @ (LotteryError::TooManyWinners { .. } | LotteryError::EmptyEvent) => {
                ApiError::InvalidParameter(e.to_string())
            }
        }
    }
}

impl From<BeaconError> for ApiError {
    fn from(e: BeaconError) -> Self {
        ApiError::BeaconUnavailable(e.to_string())
    }
}

impl From<LedgerError> for ApiError {
    fn from(e: LedgerError) -> Self {
        match e {
            LedgerError::KeyNotFound(k) => ApiError::NotFound(k),
            e @ (LedgerError::ReplicationFailure { .. }
            | LedgerError::PeerUnavailable(_)
            | LedgerError::NoMajority(_)) => ApiError::LedgerUnavailable(e.to_string()),
            e => ApiError::Internal(e.to_string()),
        }
    }
}

impl From<VerificationError> for ApiError {
    fn from(e: VerificationError) -> Self {
        match e {
            VerificationError::NotDrawn => ApiError::NotDrawn,
        }
    }
}

impl From<FairnessError> for ApiError {
    fn from(e: FairnessError) -> Self {
        ApiError::InvalidParameter(e.to_string())
    }
}
