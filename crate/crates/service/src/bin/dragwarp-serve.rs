use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use clap::Parser;
use dragwarp_service::router;
use dragwarp_service::store::Store;

/// Serve the drag-editing HTTP API.
#[derive(Debug, Parser)]
#[command(name = "dragwarp-serve", version)]
struct Args {
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: SocketAddr,
    /// Directory where finished jobs are kept across restarts.
    #[arg(long)]
    persist: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args = Args::parse();
    let store = match args.persist {
        Some(dir) => Store::persistent(dir)?,
        None => Store::new(),
    };
    let app = router(Arc::new(Mutex::new(store)));
    let listener = tokio::net::TcpListener::bind(args.addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
