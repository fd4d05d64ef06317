use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::Parser;
use framing_core::store::JsonlStore;
use framing_service::{router, AppState};

#[derive(Parser)]
#[command(
    name = "framing-service",
    version,
    about = "Serve the framing questionnaire game API"
)]
struct Args {
    /// Line-delimited response store; created if missing.
    #[arg(long, env = "FRAMING_STORE", default_value = "responses.jsonl")]
    store: PathBuf,
    #[arg(long, env = "FRAMING_LISTEN", default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Directory holding the browser bundle, served at `/`.
    #[arg(long, env = "FRAMING_STATIC_DIR")]
    static_dir: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .init();
    let args = Args::parse();
    let state = match JsonlStore::open(&args.store) {
        Ok(store) => {
            tracing::info!(path = %args.store.display(), records = store.len(), "store opened");
            AppState::new(Box::new(store))
        }
        Err(e) => {
            // keep serving so clients get a clear 503 instead of a dead port
            tracing::error!(path = %args.store.display(), error = %e, "store unavailable; refusing new sessions");
            AppState::without_store()
        }
    };
    let listener = tokio::net::TcpListener::bind(args.listen).await?;
    tracing::info!(addr = %args.listen, "listening");
    axum::serve(listener, router(Arc::new(state), args.static_dir)).await
}
