//! Submit/await over channels. A fixed set of worker threads pulls tasks
//! from a shared queue; each task carries its own reply channel.

use std::collections::HashMap;
use std::panic::{self, AssertUnwindSafe};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Instant;

use crossbeam_channel::{bounded, unbounded, Receiver, Sender, TryRecvError};
use rand::rngs::OsRng;
use rand::RngCore;

use super::backend::{Backend, BackendDescriptor, Execution};
use super::divergence::{empirical, total_variation, total_variation_keyed};
use super::registry::{Entry, Registry};
use super::{check_job, JobConfig, JobId, JobResult, JobStatus, RuntimeError};
use crate::circuit::{emit_qasm, CircuitIR};

/// The held program and its meta information.
struct Task {
    id: JobId,
    ir: Arc<CircuitIR>,
    config: JobConfig,
    entry: Arc<Entry>,
    reply: Sender<JobResult>,
}

pub struct Runtime {
    registry: Arc<Registry>,
    queue: Option<Sender<Task>>,
    workers: Vec<JoinHandle<()>>,
    pending: Mutex<HashMap<JobId, Receiver<JobResult>>>,
    next_id: AtomicU64,
}

/// Two executions of one circuit and the distance between them.
#[derive(Debug, Clone, PartialEq)]
pub struct DualResult {
    pub a: JobResult,
    pub b: JobResult,
    /// `None` if either job failed.
    pub divergence: Option<f64>,
}

impl Runtime {
    /// Default registry, one job worker per core (at least two, so dual
    /// executions overlap).
    pub fn new() -> Self {
        let n = thread::available_parallelism().map_or(2, |n| n.get()).max(2);
        Self::with_registry(Arc::new(Registry::with_defaults()), n)
    }

    pub fn with_registry(registry: Arc<Registry>, job_workers: usize) -> Self {
        let (tx, rx) = unbounded::<Task>();
        let workers = (0..job_workers.max(1))
            .map(|i| {
                let rx = rx.clone();
                thread::Builder::new()
                    .name(format!("vqpu-job-{i}"))
                    .spawn(move || {
                        for task in rx {
                            let result = run_task(&task);
                            // the submitter may have dropped its handle
                            let _ = task.reply.send(result);
                        }
                    })
                    .expect("spawn job worker")
            })
            .collect();
        Self {
            registry,
            queue: Some(tx),
            workers,
            pending: Mutex::new(HashMap::new()),
            next_id: AtomicU64::new(1),
        }
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn register_backend(&self, backend: Arc<dyn Backend>) -> Result<(), RuntimeError> {
        self.registry.register_backend(backend)
    }

    pub fn list_backends(&self) -> Vec<BackendDescriptor> {
        self.registry.list_backends()
    }

    /// Checks the job and queues it. Nothing reaches a backend unless the
    /// circuit validates and the backend can satisfy the config.
    pub fn submit(&self, ir: CircuitIR, config: JobConfig) -> Result<JobId, RuntimeError> {
        let entry = self
            .registry
            .entry(&config.backend_id)
            .ok_or_else(|| RuntimeError::UnknownBackend(config.backend_id.clone()))?;
        check_job(entry.backend.descriptor(), &ir, &config)?;
        let id = JobId(self.next_id.fetch_add(1, Ordering::Relaxed));
        let (reply, rx) = bounded(1);
        self.pending.lock().unwrap_or_else(|e| e.into_inner()).insert(id, rx);
        let task = Task {
            id,
            ir: Arc::new(ir),
            config,
            entry,
            reply,
        };
        self.queue
            .as_ref()
            .ok_or(RuntimeError::Disconnected)?
            .send(task)
            .map_err(|_| RuntimeError::Disconnected)?;
        Ok(id)
    }

    /// Blocks until the job finishes. Each result can be collected once.
    pub fn await_result(&self, id: JobId) -> Result<JobResult, RuntimeError> {
        let rx = self
            .pending
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .remove(&id)
            .ok_or(RuntimeError::UnknownJob(id))?;
        rx.recv().map_err(|_| RuntimeError::Disconnected)
    }

    /// Non-blocking poll: `Ok(None)` while the job is still running.
    pub fn try_result(&self, id: JobId) -> Result<Option<JobResult>, RuntimeError> {
        let mut pending = self.pending.lock().unwrap_or_else(|e| e.into_inner());
        let rx = pending.get(&id).ok_or(RuntimeError::UnknownJob(id))?;
        match rx.try_recv() {
            Ok(r) => {
                pending.remove(&id);
                Ok(Some(r))
            }
            Err(TryRecvError::Empty) => Ok(None),
            Err(TryRecvError::Disconnected) => {
                pending.remove(&id);
                Err(RuntimeError::Disconnected)
            }
        }
    }

    /// `submit` then `await_result`.
    pub fn run(&self, ir: CircuitIR, config: JobConfig) -> Result<JobResult, RuntimeError> {
        let id = self.submit(ir, config)?;
        self.await_result(id)
    }

    /// Runs `config` on two backends at once. An unseeded sampling config
    /// gets one fresh seed shared by both sides.
    pub fn dual_execute(
        &self,
        ir: &CircuitIR,
        config: &JobConfig,
        backend_a: &str,
        backend_b: &str,
    ) -> Result<DualResult, RuntimeError> {
        let mut a = config.clone();
        if a.seed.is_none() && a.mode.wants_sampling() {
            a.seed = Some(OsRng.next_u64());
        }
        let mut b = a.clone();
        a.backend_id = backend_a.to_owned();
        b.backend_id = backend_b.to_owned();
        self.dual_execute_configs(ir, a, b)
    }

    /// Like [`Runtime::dual_execute`] with independent configs, e.g. to
    /// compare precisions on one backend.
    pub fn dual_execute_configs(
        &self,
        ir: &CircuitIR,
        a: JobConfig,
        b: JobConfig,
    ) -> Result<DualResult, RuntimeError> {
        // check both before queueing either
        for c in [&a, &b] {
            let d = self
                .registry
                .descriptor(&c.backend_id)
                .ok_or_else(|| RuntimeError::UnknownBackend(c.backend_id.clone()))?;
            check_job(&d, ir, c)?;
        }
        let ia = self.submit(ir.clone(), a)?;
        let ib = self.submit(ir.clone(), b)?;
        let ra = self.await_result(ia)?;
        let rb = self.await_result(ib)?;
        let divergence = pair_divergence(&ra, &rb);
        Ok(DualResult {
            a: ra,
            b: rb,
            divergence,
        })
    }
}

impl Default for Runtime {
    fn default() -> Self {
        Self::new()
    }
}

impl Drop for Runtime {
    fn drop(&mut self) {
        self.queue.take();
        for w in self.workers.drain(..) {
            let _ = w.join();
        }
    }
}

/// Exact-vs-exact when both sides have state readouts, else exact-vs-
/// empirical, else empirical-vs-empirical.
fn pair_divergence(a: &JobResult, b: &JobResult) -> Option<f64> {
    if !a.is_completed() || !b.is_completed() {
        return None;
    }
    if let (Some(p), Some(q)) = (&a.exact_distribution, &b.exact_distribution) {
        return Some(total_variation(p, q));
    }
    match (&a.outcome_distribution, &b.outcome_distribution, &a.histogram, &b.histogram) {
        (Some(p), _, _, Some(h)) | (_, Some(p), Some(h), _) => {
            Some(total_variation_keyed(p, &empirical(h)))
        }
        (_, _, Some(x), Some(y)) => Some(total_variation_keyed(&empirical(x), &empirical(y))),
        _ => None,
    }
}

fn run_task(task: &Task) -> JobResult {
    let start = Instant::now();
    let config = &task.config;
    let cacheable = !config.mode.wants_sampling() || config.seed.is_some();
    let key = cacheable.then(|| config.cache_key(&emit_qasm(&task.ir)));

    let hit = key.as_deref().and_then(|k| task.entry.cached(k));
    let cached = hit.is_some();
    let outcome = match hit {
        Some(exec) => Ok(exec),
        None => {
            let backend = &task.entry.backend;
            match panic::catch_unwind(AssertUnwindSafe(|| backend.execute(&task.ir, config))) {
                Ok(Ok(exec)) => {
                    let exec = Arc::new(exec);
                    if let Some(k) = key {
                        task.entry.store(k, exec.clone());
                    }
                    Ok(exec)
                }
                Ok(Err(e)) => Err(e.to_string()),
                Err(payload) => Err(panic_message(&payload)),
            }
        }
    };

    let mut result = JobResult {
        job_id: task.id,
        backend_id: config.backend_id.clone(),
        mode: config.mode,
        shots: config.mode.wants_sampling().then_some(config.shots),
        histogram: None,
        exact_distribution: None,
        outcome_distribution: None,
        expectation_values: None,
        divergence: None,
        seed_used: config.seed,
        wall_time: start.elapsed(),
        status: JobStatus::Completed,
        cached,
    };
    match outcome {
        Ok(exec) => {
            let Execution {
                histogram,
                exact_distribution,
                outcome_distribution,
                expectation_values,
            } = (*exec).clone();
            if let (Some(p), Some(h)) = (&outcome_distribution, &histogram) {
                result.divergence = Some(total_variation_keyed(p, &empirical(h)));
            }
            result.histogram = histogram;
            result.exact_distribution = exact_distribution;
            result.outcome_distribution = outcome_distribution;
            result.expectation_values = expectation_values;
        }
        Err(reason) => result.status = JobStatus::Failed(reason),
    }
    result.wall_time = start.elapsed();
    result
}

fn panic_message(payload: &Box<dyn std::any::Any + Send>) -> String {
    let msg = payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".to_owned());
    format!("backend panicked: {msg}")
}
