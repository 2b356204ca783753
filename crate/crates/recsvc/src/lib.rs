//! Session-keeping HTTP service and batch CLI around `nextview-core`.
//!
//! The service holds uploaded datasets and per-user sessions (current view,
//! category toggles, starred charts, interaction log) and answers the
//! explorer UI's requests. All ranking happens in the core crate.

pub mod cli;
pub mod error;
pub mod http;
pub mod session;
pub mod store;
pub mod wire;

pub use error::ServiceError;
pub use session::{Event, RecQuery, SessionContext};
pub use store::Store;
