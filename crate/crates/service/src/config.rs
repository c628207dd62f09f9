use std::path::PathBuf;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::clock::{Clock, ClockMode};
use crate::error::HubError;
use crate::hub::HubOptions;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Config {
    pub port: u16,
    pub data_dir: PathBuf,
    pub clock: ClockMode,
    /// First day of a virtual clock; ignored by the wall clock.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_date: Option<NaiveDate>,
    #[serde(default)]
    pub expose_viewer_names: bool,
}

impl Config {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Config { port: 8080, data_dir: data_dir.into(), clock: ClockMode::Virtual, start_date: None, expose_viewer_names: false }
    }

    /// Reads `SNAPSHOT_HUB_PORT`, `SNAPSHOT_HUB_DATA_DIR`, `SNAPSHOT_HUB_CLOCK`,
    /// `SNAPSHOT_HUB_START_DATE` and `SNAPSHOT_HUB_EXPOSE_VIEWER_NAMES`.
    pub fn from_env() -> Result<Self, HubError> {
        let var = |k: &str| std::env::var(k).ok().filter(|v| !v.is_empty());
        let bad = |k: &str, v: &str| HubError::ConfigInvalid(format!("{k}={v}"));
        let mut c = Config::new(var("SNAPSHOT_HUB_DATA_DIR").unwrap_or_else(|| "data".into()));
        if let Some(v) = var("SNAPSHOT_HUB_PORT") {
            c.port = v.parse().map_err(|_| bad("SNAPSHOT_HUB_PORT", &v))?;
        }
        if let Some(v) = var("SNAPSHOT_HUB_CLOCK") {
            c.clock = v.parse().map_err(|_| bad("SNAPSHOT_HUB_CLOCK", &v))?;
        }
        if let Some(v) = var("SNAPSHOT_HUB_START_DATE") {
            c.start_date = Some(v.parse().map_err(|_| bad("SNAPSHOT_HUB_START_DATE", &v))?);
        }
        if let Some(v) = var("SNAPSHOT_HUB_EXPOSE_VIEWER_NAMES") {
            c.expose_viewer_names = match v.as_str() {
                "1" | "true" | "yes" => true,
                "0" | "false" | "no" => false,
                _ => return Err(bad("SNAPSHOT_HUB_EXPOSE_VIEWER_NAMES", &v)),
            };
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), HubError> {
        if self.data_dir.as_os_str().is_empty() {
            return Err(HubError::ConfigInvalid("data directory is empty".into()));
        }
        if self.data_dir.exists() && !self.data_dir.is_dir() {
            return Err(HubError::ConfigInvalid(format!("{} is not a directory", self.data_dir.display())));
        }
        if self.clock == ClockMode::Wall && self.start_date.is_some() {
            return Err(HubError::ConfigInvalid("a start date only applies to the virtual clock".into()));
        }
        Ok(())
    }

    pub fn hub_options(&self) -> HubOptions {
        let clock = match self.clock {
            ClockMode::Wall => Clock::wall(),
            ClockMode::Virtual => Clock::virtual_at(self.start_date.unwrap_or_else(|| chrono::Local::now().date_naive())),
        };
        HubOptions { clock, expose_viewer_names: self.expose_viewer_names }
    }
}
