//! HTTP JSON front end for the lottery: the single write path to the ledger.
//!
//! [`Service`] holds the transaction logic and is usable without HTTP;
//! [`routes::router`] wraps it in axum handlers.

pub mod clock;
pub mod config;
pub mod error;
pub mod routes;
pub mod service;
pub mod views;

pub use clock::{Clock, ManualClock, SystemClock};
pub use config::ApiConfig;
pub use error::ApiError;
pub use routes::router;
pub use service::Service;
