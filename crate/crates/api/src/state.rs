use std::collections::HashMap;
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use esid_core::ensemble::{run_ensemble, SimulationResult};
use esid_store::{RunStatus, Store};
use tokio::sync::mpsc;

use crate::error::{ApiError, ApiResult};

pub(crate) struct Shared {
    store: RwLock<Store>,
    /// Completed results are immutable, so they are loaded once.
    results: RwLock<HashMap<String, Arc<SimulationResult>>>,
}

/// Handle shared by all request handlers. Cloning is cheap.
#[derive(Clone)]
pub struct AppState {
    shared: Arc<Shared>,
    queue: mpsc::UnboundedSender<String>,
}

impl AppState {
    /// Wraps `store` and starts the run worker. Must be called inside a
    /// tokio runtime. The worker stops once every handle is dropped.
    pub fn new(store: Store) -> Self {
        let shared = Arc::new(Shared {
            store: RwLock::new(store),
            results: RwLock::new(HashMap::new()),
        });
        let (queue, rx) = mpsc::unbounded_channel();
        tokio::spawn(worker(shared.clone(), rx));
        Self { shared, queue }
    }

    pub fn store(&self) -> RwLockReadGuard<'_, Store> {
        self.shared.store.read().expect("store lock poisoned")
    }

    pub(crate) fn store_mut(&self) -> RwLockWriteGuard<'_, Store> {
        self.shared.store.write().expect("store lock poisoned")
    }

    pub(crate) fn enqueue(&self, run_id: String) -> ApiResult<()> {
        self.queue
            .send(run_id)
            .map_err(|_| ApiError::internal("run worker stopped"))
    }

    /// Loads a completed run, from cache when possible.
    pub(crate) async fn result(&self, run_id: &str) -> ApiResult<Arc<SimulationResult>> {
        if let Some(r) = self.shared.results.read().expect("cache lock poisoned").get(run_id) {
            return Ok(r.clone());
        }
        let shared = self.shared.clone();
        let id = run_id.to_string();
        let loaded = tokio::task::spawn_blocking(move || {
            shared.store.read().expect("store lock poisoned").load_run(&id)
        })
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
        let loaded = Arc::new(loaded);
        self.shared
            .results
            .write()
            .expect("cache lock poisoned")
            .entry(run_id.to_string())
            .or_insert_with(|| loaded.clone());
        Ok(loaded)
    }
}

/// Runs queued jobs one at a time, in submission order.
async fn worker(shared: Arc<Shared>, mut rx: mpsc::UnboundedReceiver<String>) {
    while let Some(run_id) = rx.recv().await {
        let shared = shared.clone();
        let done = tokio::task::spawn_blocking(move || execute(&shared, &run_id)).await;
        if let Err(e) = done {
            log::error!("run worker task failed: {e}");
        }
    }
}

fn execute(shared: &Shared, run_id: &str) {
    let prepared = {
        let mut store = shared.store.write().expect("store lock poisoned");
        let prepared = store
            .run(run_id)
            .map(|r| r.scenario_id.clone())
            .and_then(|id| store.scenario(&id).map(|s| s.definition.clone()))
            .ok_or_else(|| format!("run {run_id} has no scenario"))
            .and_then(|def| store.load_graph(&def.graph).map(|g| (def, g)).map_err(|e| e.to_string()));
        if let Err(e) = store.set_run_status(run_id, RunStatus::Running, None) {
            log::error!("{run_id}: {e}");
        }
        prepared
    };
    let outcome = prepared.and_then(|(def, graph)| {
        log::info!("{run_id}: running {} ({} members)", def.id, def.members);
        run_ensemble(&def, &graph).map_err(|e| e.to_string())
    });
    let mut store = shared.store.write().expect("store lock poisoned");
    let saved = match outcome {
        Ok(result) => store.save_run(run_id, &result).map_err(|e| e.to_string()),
        Err(e) => Err(e),
    };
    if let Err(message) = saved {
        log::warn!("{run_id} failed: {message}");
        if let Err(e) = store.set_run_status(run_id, RunStatus::Failed, Some(message)) {
            log::error!("{run_id}: {e}");
        }
    }
}
