//! Human-vs-agent play sessions behind a JSON HTTP API.

pub mod http;
pub mod session;
pub mod view;

pub use http::{router, serve};
pub use session::{CreateSession, ServiceError, SessionManager, Status};
pub use view::SessionView;
