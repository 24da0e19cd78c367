//! Session store, job table and the shared compute pool.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use quadratik_api::http::{ErrorBody, JobRecord, JobStatus};
use quadratik_api::{ApiError, Envelope, Table};
use quadratik_core::clustering::MixtureFit;
use quadratik_core::{DataMatrix, GroupLabels};
use tokio::sync::Semaphore;

use crate::error::ServiceError;

/// Fits of a finished clustering job, with the rows they were fitted on.
#[derive(Debug)]
pub struct FitRecord {
    pub x: DataMatrix,
    pub labels: Option<GroupLabels>,
    pub fits: Vec<MixtureFit>,
}

struct Stamped<T> {
    value: Arc<T>,
    touched: Instant,
}

#[derive(Default)]
struct Store {
    datasets: HashMap<String, Stamped<Table>>,
    fits: HashMap<String, Stamped<FitRecord>>,
}

struct Job {
    record: JobRecord,
    cancel: Arc<AtomicBool>,
    touched: Instant,
}

/// Entries unused for `ttl` are evicted.
pub struct AppState {
    store: Mutex<Store>,
    jobs: Mutex<HashMap<String, Job>>,
    pool: Semaphore,
    ttl: Duration,
}

pub type Shared = Arc<AppState>;

/// A job body: returns the envelope and, for clustering, the fits to keep.
pub type JobWork = Box<dyn FnOnce(&AtomicBool) -> Result<(Envelope, Option<FitRecord>), ApiError> + Send>;

fn new_id() -> String {
    uuid::Uuid::new_v4().to_string()
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    // A panic while holding the lock leaves plain maps; keep serving.
    m.lock().unwrap_or_else(|e| e.into_inner())
}

fn lookup<T>(map: &mut HashMap<String, Stamped<T>>, id: &str, ttl: Duration) -> Option<Arc<T>> {
    let e = map.get_mut(id)?;
    if e.touched.elapsed() > ttl {
        map.remove(id);
        return None;
    }
    e.touched = Instant::now();
    Some(e.value.clone())
}

impl AppState {
    pub fn new(max_concurrent: usize, ttl: Duration) -> Shared {
        Arc::new(Self {
            store: Mutex::default(),
            jobs: Mutex::default(),
            pool: Semaphore::new(max_concurrent.max(1)),
            ttl,
        })
    }

    pub fn insert_dataset(&self, table: Table) -> String {
        let id = new_id();
        lock(&self.store).datasets.insert(id.clone(), Stamped { value: Arc::new(table), touched: Instant::now() });
        id
    }

    pub fn dataset(&self, id: &str) -> Result<Arc<Table>, ServiceError> {
        lookup(&mut lock(&self.store).datasets, id, self.ttl).ok_or_else(|| ServiceError::NotFound(format!("dataset {id}")))
    }

    pub fn fit(&self, id: &str) -> Result<Arc<FitRecord>, ServiceError> {
        lookup(&mut lock(&self.store).fits, id, self.ttl).ok_or_else(|| ServiceError::NotFound(format!("fit {id}")))
    }

    pub fn job(&self, id: &str) -> Result<JobRecord, ServiceError> {
        let mut jobs = lock(&self.jobs);
        match jobs.get_mut(id) {
            Some(j) if j.touched.elapsed() <= self.ttl => {
                j.touched = Instant::now();
                Ok(j.record.clone())
            }
            Some(_) => {
                jobs.remove(id);
                Err(ServiceError::NotFound(format!("job {id}")))
            }
            None => Err(ServiceError::NotFound(format!("job {id}"))),
        }
    }

    /// Cancel a queued or running job. Cancelling twice is a no-op;
    /// finished jobs cannot be cancelled.
    pub fn cancel(&self, id: &str) -> Result<JobRecord, ServiceError> {
        let mut jobs = lock(&self.jobs);
        let j = jobs.get_mut(id).ok_or_else(|| ServiceError::NotFound(format!("job {id}")))?;
        match j.record.status {
            JobStatus::Queued | JobStatus::Running => {
                j.cancel.store(true, Ordering::Relaxed);
                j.record.status = JobStatus::Cancelled;
                j.touched = Instant::now();
                Ok(j.record.clone())
            }
            JobStatus::Cancelled => Ok(j.record.clone()),
            s => Err(ServiceError::Conflict(format!("job {id} already finished ({s:?})").to_lowercase())),
        }
    }

    /// Number of stored fits.
    pub fn stored_fits(&self) -> usize {
        lock(&self.store).fits.len()
    }

    /// Drop everything unused for longer than the TTL.
    pub fn evict_expired(&self) {
        let ttl = self.ttl;
        {
            let mut s = lock(&self.store);
            s.datasets.retain(|_, e| e.touched.elapsed() <= ttl);
            s.fits.retain(|_, e| e.touched.elapsed() <= ttl);
        }
        lock(&self.jobs).retain(|_, j| j.touched.elapsed() <= ttl);
    }

    /// Run blocking work on the compute pool.
    pub async fn compute<T, F>(&self, f: F) -> Result<T, ServiceError>
    where
        T: Send + 'static,
        F: FnOnce() -> Result<T, ApiError> + Send + 'static,
    {
        let _permit = self.pool.acquire().await.map_err(|e| ServiceError::Internal(e.to_string()))?;
        tokio::task::spawn_blocking(f).await.map_err(|e| ServiceError::Internal(e.to_string()))?.map_err(Into::into)
    }

    /// Queue `work` and return its record immediately.
    pub fn submit(self: &Arc<Self>, kind: &str, work: JobWork) -> JobRecord {
        let id = new_id();
        let cancel = Arc::new(AtomicBool::new(false));
        let record = JobRecord {
            job_id: id.clone(),
            kind: kind.to_string(),
            status: JobStatus::Queued,
            result: None,
            error: None,
            fit_id: None,
        };
        lock(&self.jobs).insert(id.clone(), Job { record: record.clone(), cancel: cancel.clone(), touched: Instant::now() });
        let state = self.clone();
        tokio::spawn(async move { state.drive(id, cancel, work).await });
        record
    }

    async fn drive(self: Arc<Self>, id: String, cancel: Arc<AtomicBool>, work: JobWork) {
        let Ok(_permit) = self.pool.acquire().await else { return };
        if !self.transition(&id, JobStatus::Queued, JobStatus::Running) {
            return;
        }
        let flag = cancel.clone();
        let outcome = tokio::task::spawn_blocking(move || work(&flag)).await;
        let mut jobs = lock(&self.jobs);
        let Some(job) = jobs.get_mut(&id) else { return };
        // Cancelled (or evicted) while running: the result is discarded.
        if job.record.status != JobStatus::Running {
            return;
        }
        job.touched = Instant::now();
        match outcome {
            Ok(Ok((env, fit))) => {
                if let Some(fit) = fit {
                    let fit_id = new_id();
                    lock(&self.store).fits.insert(fit_id.clone(), Stamped { value: Arc::new(fit), touched: Instant::now() });
                    job.record.fit_id = Some(fit_id);
                }
                job.record.result = Some(env);
                job.record.status = JobStatus::Done;
            }
            Ok(Err(ApiError::Cancelled)) => job.record.status = JobStatus::Cancelled,
            Ok(Err(e)) => {
                job.record.error = Some(ErrorBody::from(&e));
                job.record.status = JobStatus::Failed;
            }
            Err(e) => {
                job.record.error =
                    Some(ErrorBody { code: "internal".into(), message: format!("job panicked: {e}"), detail: None });
                job.record.status = JobStatus::Failed;
            }
        }
    }

    fn transition(&self, id: &str, from: JobStatus, to: JobStatus) -> bool {
        let mut jobs = lock(&self.jobs);
        match jobs.get_mut(id) {
            Some(j) if j.record.status == from => {
                j.record.status = to;
                true
            }
            _ => false,
        }
    }
}
