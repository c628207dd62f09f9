use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::dashboard::Dashboard;
use super::dataset::Dataset;
use super::DataError;

/// Loaded datasets and dashboard definitions.
///
/// Datasets are immutable after load and shared by reference count.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Catalog {
    pub datasets: BTreeMap<String, Arc<Dataset>>,
    pub dashboards: BTreeMap<String, Dashboard>,
}

impl Catalog {
    pub fn dataset(&self, id: &str) -> Result<&Dataset, DataError> {
        self.datasets.get(id).map(Arc::as_ref).ok_or_else(|| DataError::UnknownDataset(id.to_owned()))
    }

    pub fn dashboard(&self, id: &str) -> Result<&Dashboard, DataError> {
        self.dashboards.get(id).ok_or_else(|| DataError::UnknownDashboard(id.to_owned()))
    }

    pub fn insert_dataset(&mut self, ds: Dataset) {
        self.datasets.insert(ds.id.clone(), Arc::new(ds));
    }

    /// Validates and stores a dashboard.
    pub fn insert_dashboard(&mut self, dashboard: Dashboard) -> Result<(), DataError> {
        dashboard.validate(self)?;
        self.dashboards.insert(dashboard.id.clone(), dashboard);
        Ok(())
    }
}
