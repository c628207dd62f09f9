use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClockMode {
    Wall,
    Virtual,
}

impl std::str::FromStr for ClockMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wall" => Ok(ClockMode::Wall),
            "virtual" => Ok(ClockMode::Virtual),
            other => Err(format!("unknown clock mode `{other}`, expected `wall` or `virtual`")),
        }
    }
}

/// Source of "today".
///
/// A virtual clock starts at `start` and moves only when a tick is applied; the
/// date it has reached is part of the hub state so it survives restarts. A wall
/// clock reads the local date but never goes behind the last applied command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Clock {
    pub mode: ClockMode,
    pub start: NaiveDate,
}

impl Clock {
    pub fn virtual_at(start: NaiveDate) -> Self {
        Self { mode: ClockMode::Virtual, start }
    }

    pub fn wall() -> Self {
        Self { mode: ClockMode::Wall, start: chrono::Local::now().date_naive() }
    }

    pub fn now(&self, reached: Option<NaiveDate>) -> NaiveDate {
        match self.mode {
            ClockMode::Virtual => reached.unwrap_or(self.start),
            ClockMode::Wall => {
                let today = chrono::Local::now().date_naive();
                reached.map_or(today, |r| r.max(today))
            }
        }
    }
}
