//! HTTP sessions in which a person, or any remote program, answers the
//! preference queries of an elicitation procedure.

pub mod api;
pub mod error;
pub mod store;

use std::future::Future;
use std::path::PathBuf;
use std::sync::Arc;

use tokio::net::TcpListener;

pub use api::router;
pub use error::{ServiceError, ServiceResult};
pub use store::{Manifest, Session, SessionState, SessionStore};

/// Serves the API on `listener` until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    store: Arc<SessionStore>,
    ui_dir: Option<PathBuf>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    tracing::info!(addr = %listener.local_addr()?, data = %store.root().display(), "serving");
    axum::serve(listener, router(store, ui_dir)).with_graceful_shutdown(shutdown).await
}
