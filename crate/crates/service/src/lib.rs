//! Journal-backed service around the snapshot hub domain model.
//!
//! [`Hub`] applies [`Command`]s to the in-memory [`State`] and appends each
//! successful one to the journal; [`api::router`] exposes it over HTTP.

pub mod api;
pub mod clock;
pub mod command;
pub mod config;
mod error;
pub mod hub;
pub mod journal;

use std::sync::{Arc, Mutex};

pub use clock::{Clock, ClockMode};
pub use command::{Command, Outcome, TickReport};
pub use config::Config;
pub use error::{ErrorClass, HubError};
pub use hub::{Hub, HubOptions, State};

/// Opens the data directory, recovers the journal and serves until Ctrl-C.
///
/// With a wall clock the scheduler runs once a minute; a virtual clock only
/// moves through `POST /admin/tick`.
pub async fn serve(config: Config) -> Result<(), HubError> {
    config.validate()?;
    let hub = Hub::open(&config.data_dir, config.hub_options())?;
    tracing::info!(seq = hub.seq(), state_hash = %hub.state_hash(), "journal recovered");
    let shared = Arc::new(Mutex::new(hub));
    if config.clock == ClockMode::Wall {
        let s = shared.clone();
        tokio::spawn(async move {
            let mut every = tokio::time::interval(std::time::Duration::from_secs(60));
            loop {
                every.tick().await;
                let mut hub = s.lock().unwrap_or_else(|p| p.into_inner());
                match hub.run_scheduler() {
                    Ok(Some(r)) => tracing::info!(performed = r.performed.len(), skipped = r.skipped.len(), "scheduler ran"),
                    Ok(None) => {}
                    Err(e) => tracing::error!(error = %e, "scheduler failed"),
                }
            }
        });
    }
    let listener = tokio::net::TcpListener::bind(("0.0.0.0", config.port)).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, api::router(shared))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
