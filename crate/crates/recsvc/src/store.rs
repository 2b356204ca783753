//! Loaded datasets and live sessions.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};

use sha2::{Digest, Sha256};

use nextview_core::{load_csv, Dataset, LoadOptions};

use crate::error::ServiceError;
use crate::session::{Event, SessionContext};

/// Content-addressed id: the first 16 hex digits of the CSV's SHA-256.
pub fn dataset_id(bytes: &[u8]) -> String {
    hex::encode(&Sha256::digest(bytes)[..8])
}

/// Append-only JSON-lines sink for interaction events.
pub struct EventLog {
    file: Mutex<File>,
}

impl EventLog {
    pub fn open(path: &Path) -> std::io::Result<Self> {
        Ok(EventLog { file: Mutex::new(OpenOptions::new().create(true).append(true).open(path)?) })
    }

    pub fn append(&self, event: &Event) {
        let line = serde_json::to_string(event).expect("events serialize");
        let mut f = self.file.lock().expect("log lock");
        // Logging is best effort and must not fail the request.
        let _ = writeln!(f, "{line}");
    }
}

type SessionSlot = Arc<tokio::sync::Mutex<SessionContext>>;

/// Shared server state. Datasets are immutable once stored; each session has
/// its own lock so requests on one session run one at a time while different
/// sessions proceed in parallel.
#[derive(Default)]
pub struct Store {
    datasets: RwLock<HashMap<String, Arc<Dataset>>>,
    sessions: RwLock<HashMap<String, SessionSlot>>,
    log: Option<EventLog>,
    snapshot: Option<PathBuf>,
}

impl Store {
    pub fn new(log: Option<EventLog>, snapshot: Option<PathBuf>) -> Self {
        Store { log, snapshot, ..Store::default() }
    }

    pub fn add_dataset(&self, bytes: &[u8], options: &LoadOptions) -> Result<(String, Arc<Dataset>), ServiceError> {
        let id = dataset_id(bytes);
        if let Some(ds) = self.datasets.read().expect("dataset lock").get(&id) {
            return Ok((id, ds.clone()));
        }
        let ds = Arc::new(load_csv(bytes, options).map_err(ServiceError::Dataset)?);
        self.datasets.write().expect("dataset lock").insert(id.clone(), ds.clone());
        Ok((id, ds))
    }

    pub fn dataset(&self, id: &str) -> Result<Arc<Dataset>, ServiceError> {
        self.datasets.read().expect("dataset lock").get(id).cloned().ok_or_else(|| ServiceError::UnknownDataset(id.into()))
    }

    pub fn create_session(&self, dataset_id: &str) -> Result<String, ServiceError> {
        self.dataset(dataset_id)?;
        let id = uuid::Uuid::new_v4().simple().to_string();
        let ctx = SessionContext::new(id.clone(), dataset_id.into());
        self.record(ctx.interaction_log.last());
        self.sessions.write().expect("session lock").insert(id.clone(), Arc::new(tokio::sync::Mutex::new(ctx)));
        Ok(id)
    }

    pub fn session(&self, id: &str) -> Result<SessionSlot, ServiceError> {
        self.sessions.read().expect("session lock").get(id).cloned().ok_or_else(|| ServiceError::UnknownSession(id.into()))
    }

    /// Forwards an event to the JSON-lines log, if one is configured.
    pub fn record(&self, event: Option<&Event>) {
        if let (Some(log), Some(e)) = (&self.log, event) {
            log.append(e);
        }
    }

    /// Writes every session to the snapshot file, if one is configured.
    pub async fn save_snapshot(&self) -> std::io::Result<()> {
        let Some(path) = &self.snapshot else { return Ok(()) };
        let slots: Vec<SessionSlot> = self.sessions.read().expect("session lock").values().cloned().collect();
        let mut all = Vec::with_capacity(slots.len());
        for s in slots {
            all.push(s.lock().await.clone());
        }
        all.sort_by(|a, b| a.session_id.cmp(&b.session_id));
        std::fs::write(path, serde_json::to_vec_pretty(&all)?)
    }
}
