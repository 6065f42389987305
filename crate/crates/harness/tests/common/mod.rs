#![allow(dead_code)]

use std::sync::Arc;

use tempfile::TempDir;
use traitlens::gateway::Gateway;
use traitlens::mock::{MockBehavior, MockTransport};
use traitlens::store::{RunManifest, RunStore};

/// Quadratic-weighted kappa straight from its definition over the 5x5 table:
/// 1 - sum(w * observed) / sum(w * expected), with w = (i - j)^2.
pub fn kappa_oracle(x: &[u8], y: &[u8]) -> f64 {
    let n = x.len() as f64;
    let mut observed = [[0.0f64; 5]; 5];
    for (&a, &b) in x.iter().zip(y) {
        observed[usize::from(a) - 1][usize::from(b) - 1] += 1.0 / n;
    }
    let rows: Vec<f64> = (0..5).map(|i| observed[i].iter().sum()).collect();
    let cols: Vec<f64> = (0..5).map(|j| (0..5).map(|i| observed[i][j]).sum()).collect();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..5 {
        for j in 0..5 {
            let w = ((i as f64) - (j as f64)).powi(2);
            num += w * observed[i][j];
            den += w * rows[i] * cols[j];
        }
    }
    1.0 - num / den
}

pub fn mock_gateway(behavior: impl MockBehavior + 'static) -> Gateway {
    Gateway::new(Arc::new(MockTransport::new(Arc::new(behavior))))
}

pub struct StoredGateway {
    pub dir: TempDir,
    pub store: Arc<RunStore>,
    pub run_id: String,
    pub gateway: Gateway,
}

/// A mock gateway recording into a fresh run of a fresh store.
pub fn stored_gateway(behavior: Arc<dyn MockBehavior>) -> StoredGateway {
    let dir = tempfile::tempdir().unwrap();
    let store = Arc::new(RunStore::open(dir.path()).unwrap());
    let run_id = new_run(&store, "test");
    let gateway = Gateway::new(Arc::new(MockTransport::new(behavior))).with_store(Arc::clone(&store), run_id.clone());
    StoredGateway {
        dir,
        store,
        run_id,
        gateway,
    }
}

pub fn new_run(store: &RunStore, experiment: &str) -> String {
    let id = store.new_run_id(experiment);
    store.create_run(&RunManifest::new(id.clone(), experiment, vec![])).unwrap();
    id
}
