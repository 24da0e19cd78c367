use std::time::Duration;

use anyhow::Context;
use clap::Parser;
use quadratik_service::Config;

/// HTTP service for quadratik.
#[derive(Parser)]
#[command(version)]
struct Args {
    #[arg(long, default_value = "127.0.0.1:8080", env = "QUADRATIK_BIND")]
    bind: String,
    /// Compute tasks allowed at once (default: available cores).
    #[arg(long)]
    max_concurrent: Option<usize>,
    /// Idle lifetime of uploads, fits and jobs, in seconds.
    #[arg(long, default_value_t = 3600)]
    ttl: u64,
    /// Allowed browser origin (default: any).
    #[arg(long, env = "QUADRATIK_CORS_ORIGIN")]
    cors_origin: Option<String>,
    /// Worker threads for the numeric routines (default: available cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info,tower_http=info".into()),
        )
        .init();
    let args = Args::parse();
    if let Some(t) = args.threads {
        rayon_threads(t)?;
    }
    let mut config = Config { ttl: Duration::from_secs(args.ttl), cors_origin: args.cors_origin, ..Config::default() };
    if let Some(m) = args.max_concurrent {
        config.max_concurrent = m;
    }
    let listener = tokio::net::TcpListener::bind(&args.bind).await.with_context(|| format!("binding {}", args.bind))?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    quadratik_service::serve(listener, &config, async {
        let _ = tokio::signal::ctrl_c().await;
    })
    .await?;
    Ok(())
}

fn rayon_threads(n: usize) -> anyhow::Result<()> {
    quadratik_core::set_threads(n).context("configuring worker threads")
}
