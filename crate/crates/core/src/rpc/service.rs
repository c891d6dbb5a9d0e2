use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::SystemTime;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::eval::evaluate_batch;
use crate::problem::{clamp_genotype, BenchmarkInstance};
use crate::spaces;
use crate::suite::{self, Suite};

use super::{error_code, Reply, Request, PROTOCOL_VERSION};

/// Evaluation and sampling streams of a session created with `seed`.
pub fn session_streams(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let eval = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = ChaCha8Rng::seed_from_u64(seed);
    sample.set_stream(1);
    (eval, sample)
}

struct Streams {
    eval: ChaCha8Rng,
    sample: ChaCha8Rng,
}

struct Session {
    instance: Arc<BenchmarkInstance>,
    streams: Mutex<Streams>,
    #[allow(dead_code)]
    created: SystemTime,
}

/// Session registry plus request dispatch, independent of the transport.
pub struct Service {
    data_root: PathBuf,
    next_id: AtomicU64,
    sessions: Mutex<HashMap<String, Arc<Session>>>,
    instances: Mutex<HashMap<(Suite, usize), Arc<BenchmarkInstance>>>,
}

type Outcome = std::result::Result<Reply, Reply>;

fn fail(id: &str, e: &Error) -> Reply {
    Reply::error(id, error_code(e), e.to_string())
}

#[allow(clippy::result_large_err)]
impl Service {
    pub fn new(data_root: impl Into<PathBuf>) -> Self {
        Service {
            data_root: data_root.into(),
            next_id: AtomicU64::new(1),
            sessions: Mutex::new(HashMap::new()),
            instances: Mutex::new(HashMap::new()),
        }
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().expect("registry lock").len()
    }

    /// Handles one request line and returns one reply line (no newline).
    pub fn handle_line(&self, line: &str) -> String {
        let reply = match serde_json::from_str::<Request>(line) {
            Ok(request) => self.handle(&request),
            Err(e) => Reply::error("", "parse", e.to_string()),
        };
        serde_json::to_string(&reply).expect("replies serialize")
    }

    pub fn handle(&self, request: &Request) -> Reply {
        let id = request.id.clone().unwrap_or_default();
        if let Some(v) = request.v {
            if v != PROTOCOL_VERSION {
                return Reply::error(
                    id,
                    "unsupported",
                    format!("protocol version {v} is not supported"),
                );
            }
        }
        let outcome = match request.op.as_str() {
            "create" => self.create(request),
            "evaluate" => self.evaluate(&id, request),
            "sample" => self.sample(&id, request),
            "pareto_front" => self.pareto_front(&id),
            "settings" => self.settings(&id),
            "close" => self.close(&id),
            other => Err(Reply::error(
                id,
                "unsupported",
                format!("unknown op `{other}`"),
            )),
        };
        outcome.unwrap_or_else(|e| e)
    }

    fn instance(&self, suite: Suite, index: usize) -> Result<Arc<BenchmarkInstance>, Error> {
        if let Some(i) = self
            .instances
            .lock()
            .expect("cache lock")
            .get(&(suite, index))
        {
            return Ok(i.clone());
        }
        // built outside the lock; a concurrent duplicate build is harmless
        let built = Arc::new(suite::instantiate(suite, index, &self.data_root)?);
        let mut cache = self.instances.lock().expect("cache lock");
        Ok(cache.entry((suite, index)).or_insert(built).clone())
    }

    fn session(&self, id: &str) -> Result<Arc<Session>, Reply> {
        self.sessions
            .lock()
            .expect("registry lock")
            .get(id)
            .cloned()
            .ok_or_else(|| Reply::error(id, "no-session", format!("no open session `{id}`")))
    }

    fn create(&self, request: &Request) -> Outcome {
        let (Some(suite), Some(index)) = (&request.suite, request.index) else {
            return Err(Reply::error(
                "",
                "shape",
                "create needs `suite` and `index`",
            ));
        };
        let suite: Suite = suite.parse().map_err(|e| fail("", &e))?;
        let instance = self.instance(suite, index).map_err(|e| fail("", &e))?;
        let (eval, sample) = session_streams(request.seed.unwrap_or(0));
        let id = self.next_id.fetch_add(1, Ordering::SeqCst).to_string();
        let session = Session {
            instance: instance.clone(),
            streams: Mutex::new(Streams { eval, sample }),
            created: SystemTime::now(),
        };
        self.sessions
            .lock()
            .expect("registry lock")
            .insert(id.clone(), Arc::new(session));
        Ok(describe(Reply::ok(id), &instance))
    }

    fn evaluate(&self, id: &str, request: &Request) -> Outcome {
        let session = self.session(id)?;
        let Some(rows) = &request.x else {
            return Err(Reply::error(id, "shape", "evaluate needs `X`"));
        };
        let instance = &session.instance;
        let space = instance.space();
        let d = space.descriptor().dim();
        let mut xs = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Reply::error(
                    id,
                    "shape",
                    format!("row {i} has {} values, expected {d}", row.len()),
                ));
            }
            let clamped = clamp_genotype(space.descriptor(), row).map_err(|e| fail(id, &e))?;
            xs.push(space.repair(clamped));
        }
        let mut streams = session.streams.lock().expect("session lock");
        let f = evaluate_batch(instance, &xs, &mut streams.eval).map_err(|e| fail(id, &e))?;
        Ok(Reply {
            f: Some(f),
            x: Some(xs.into_iter().map(|g| g.into_inner()).collect()),
            ..Reply::ok(id)
        })
    }

    fn sample(&self, id: &str, request: &Request) -> Outcome {
        let session = self.session(id)?;
        let n = request.n.unwrap_or(1);
        if n == 0 {
            return Err(Reply::error(id, "shape", "`n` must be at least 1"));
        }
        let mut streams = session.streams.lock().expect("session lock");
        let xs = spaces::sample(session.instance.space(), &mut streams.sample, n)
            .map_err(|e| fail(id, &e))?;
        Ok(Reply {
            x: Some(xs.into_iter().map(|g| g.into_inner()).collect()),
            ..Reply::ok(id)
        })
    }

    fn pareto_front(&self, id: &str) -> Outcome {
        let session = self.session(id)?;
        match suite::true_pareto_front(&session.instance) {
            Ok(f) => Ok(Reply {
                f: Some(f),
                ..Reply::ok(id)
            }),
            Err(Error::Unavailable) => Ok(Reply {
                unavailable: Some(true),
                ..Reply::ok(id)
            }),
            Err(e) => Err(fail(id, &e)),
        }
    }

    fn settings(&self, id: &str) -> Outcome {
        let session = self.session(id)?;
        Ok(describe(Reply::ok(id), &session.instance))
    }

    fn close(&self, id: &str) -> Outcome {
        match self.sessions.lock().expect("registry lock").remove(id) {
            Some(_) => Ok(Reply {
                ok: Some(true),
                ..Reply::ok(id)
            }),
            None => Err(Reply::error(
                id,
                "no-session",
                format!("no open session `{id}`"),
            )),
        }
    }
}

fn describe(reply: Reply, instance: &BenchmarkInstance) -> Reply {
    let desc = instance.descriptor();
    Reply {
        n_var: Some(desc.dim()),
        n_obj: Some(instance.objectives().len()),
        lower: Some(vec![0; desc.dim()]),
        upper: Some(desc.cardinalities.iter().map(|c| c - 1).collect()),
        ref_point: Some(instance.reference_point().to_vec()),
        label: Some(instance.label().into()),
        space: Some(desc.name.clone()),
        objectives: Some(instance.objectives().iter().map(|o| o.key()).collect()),
        ..reply
    }
}
