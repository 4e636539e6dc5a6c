//! In-memory images and jobs, optionally mirrored to a directory.

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::Arc;

use dragwarp_core::LatentGrid;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Failed,
}

impl JobState {
    pub fn is_final(self) -> bool {
        matches!(self, JobState::Done | JobState::Failed)
    }
}

/// Job record as returned by `GET /api/edits/{id}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JobView {
    pub job_id: String,
    pub state: JobState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_png: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum StoreError {
    #[error("job {0} already exists")]
    Duplicate(String),
    #[error("job {0} not found")]
    NotFound(String),
    #[error("job {id} cannot move from {from:?} to {to:?}")]
    Backwards { id: String, from: JobState, to: JobState },
}

#[derive(Debug, Default)]
pub struct Store {
    images: HashMap<String, Arc<LatentGrid>>,
    jobs: HashMap<String, JobView>,
    next_job: u64,
    persist: Option<PathBuf>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    /// Store that writes finished jobs to `dir` and reloads them on start.
    pub fn persistent(dir: PathBuf) -> std::io::Result<Self> {
        std::fs::create_dir_all(&dir)?;
        let mut store = Self::default();
        for entry in std::fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                let text = std::fs::read_to_string(&path)?;
                if let Ok(job) = serde_json::from_str::<JobView>(&text) {
                    store.jobs.insert(job.job_id.clone(), job);
                }
            }
        }
        store.persist = Some(dir);
        Ok(store)
    }

    pub fn insert_image(&mut self, id: String, image: LatentGrid) {
        self.images.entry(id).or_insert_with(|| Arc::new(image));
    }

    pub fn image(&self, id: &str) -> Option<Arc<LatentGrid>> {
        self.images.get(id).cloned()
    }

    /// Registers a queued job under `id`, or a fresh id when `None`.
    pub fn create_job(&mut self, id: Option<String>) -> Result<String, StoreError> {
        let id = match id {
            Some(id) if self.jobs.contains_key(&id) => return Err(StoreError::Duplicate(id)),
            Some(id) => id,
            None => loop {
                self.next_job += 1;
                let candidate = format!("job-{:06}", self.next_job);
                if !self.jobs.contains_key(&candidate) {
                    break candidate;
                }
            },
        };
        self.jobs.insert(
            id.clone(),
            JobView {
                job_id: id.clone(),
                state: JobState::Queued,
                image_png: None,
                diagnostics: None,
                error: None,
            },
        );
        Ok(id)
    }

    pub fn job(&self, id: &str) -> Option<JobView> {
        self.jobs.get(id).cloned()
    }

    /// Moves a job forward. Finished jobs never change again.
    pub fn update(&mut self, view: JobView) -> Result<(), StoreError> {
        let current = self
            .jobs
            .get(&view.job_id)
            .ok_or_else(|| StoreError::NotFound(view.job_id.clone()))?;
        if view.state <= current.state || current.state.is_final() {
            return Err(StoreError::Backwards {
                id: view.job_id.clone(),
                from: current.state,
                to: view.state,
            });
        }
        if view.state.is_final() {
            if let Some(dir) = &self.persist {
                let text = serde_json::to_string(&view).expect("job views serialize");
                let _ = std::fs::write(dir.join(format!("{}.json", view.job_id)), text);
            }
        }
        self.jobs.insert(view.job_id.clone(), view);
        Ok(())
    }
}
