//! Star-topology master/worker simulation over in-process channels.
//!
//! Each worker is a thread that owns its block and cached factorization for
//! the whole run. Rounds are barrier-synchronous: the master broadcasts its
//! vector, waits for all `m` responses and reduces them in block order, so the
//! trace is bit-identical to the sequential engine's.

use std::io::Write;
use std::sync::mpsc;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::{Block, PartitionedSystem};
use crate::solvers::{
    drive, init_worker, initial_estimate, worker_round, working_blocks, Budget, IterationTrace, Kernel, RunOptions,
};
use crate::spectral::MethodParams;

/// Width of one transmitted scalar.
pub const SCALAR_BYTES: usize = 8;

/// Master-to-worker traffic.
#[derive(Clone, Debug)]
pub enum RoundMessage {
    Broadcast { round: usize, payload: Arc<Vec<f64>> },
    Halt,
}

/// Worker-to-master traffic.
#[derive(Debug)]
enum Reply {
    /// Initial block solution `x_i(0)`.
    Ready {
        worker: usize,
        payload: Vec<f64>,
    },
    Response {
        worker: usize,
        round: usize,
        payload: Vec<f64>,
    },
    Failed {
        worker: usize,
        error: Error,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct MessageStats {
    pub rounds: usize,
    pub messages: usize,
    pub bytes: usize,
}

/// Traffic of `rounds` completed rounds: one broadcast and one response of
/// `n` scalars per worker per round.
pub fn message_stats(rounds: usize, m: usize, n: usize) -> MessageStats {
    MessageStats {
        rounds,
        messages: rounds * 2 * m,
        bytes: rounds * 2 * m * n * SCALAR_BYTES,
    }
}

#[derive(Clone, Debug)]
pub struct SimulatedRun {
    pub trace: IterationTrace,
    pub stats: MessageStats,
}

#[derive(Serialize)]
struct LogLine {
    kind: &'static str,
    round: usize,
    worker: usize,
    payload_len: usize,
}

struct Logger<'a> {
    out: Option<&'a mut dyn Write>,
}

impl Logger<'_> {
    fn line(&mut self, kind: &'static str, round: usize, worker: usize, payload_len: usize) -> Result<()> {
        if let Some(out) = self.out.as_mut() {
            let l = LogLine {
                kind,
                round,
                worker,
                payload_len,
            };
            let mut s = serde_json::to_string(&l)?;
            s.push('\n');
            out.write_all(s.as_bytes()).map_err(|e| Error::io("<message log>", e))?;
        }
        Ok(())
    }
}

fn worker_loop(
    index: usize,
    block: &Block,
    kernel: Kernel,
    inbox: mpsc::Receiver<RoundMessage>,
    outbox: mpsc::Sender<Reply>,
) {
    let state = init_worker(index, &block.a, &block.b).and_then(|mut w| {
        w.prepare(&kernel)?;
        Ok(w)
    });
    let mut w = match state {
        Ok(w) => w,
        Err(error) => {
            let _ = outbox.send(Reply::Failed { worker: index, error });
            return;
        }
    };
    if outbox
        .send(Reply::Ready {
            worker: index,
            payload: w.x.clone(),
        })
        .is_err()
    {
        return;
    }
    while let Ok(RoundMessage::Broadcast { round, payload }) = inbox.recv() {
        let response = worker_round(&kernel, &mut w, &payload);
        if outbox
            .send(Reply::Response {
                worker: index,
                round,
                payload: response,
            })
            .is_err()
        {
            return;
        }
    }
}

fn hung_up() -> Error {
    Error::NotConverged("simulated worker exited unexpectedly".into())
}

/// Runs `params.method` over one thread per worker.
///
/// With `log` set, every broadcast and response is written as a JSON line
/// `{kind, round, worker, payload_len}`.
pub fn run_simulated(
    sys: &PartitionedSystem,
    params: &MethodParams,
    budget: &Budget,
    opts: &RunOptions,
    log: Option<&mut dyn Write>,
) -> Result<SimulatedRun> {
    let kernel = Kernel::from_params(params, opts.admm_dual)?;
    let blocks = working_blocks(sys, params.method)?;
    let m = blocks.len();
    let n = sys.n();
    let mut logger = Logger { out: log };

    std::thread::scope(|scope| {
        let (reply_tx, reply_rx) = mpsc::channel::<Reply>();
        let mut inboxes = Vec::with_capacity(m);
        for (i, block) in blocks.iter().enumerate() {
            let (tx, rx) = mpsc::channel::<RoundMessage>();
            inboxes.push(tx);
            let out = reply_tx.clone();
            scope.spawn(move || worker_loop(i, block, kernel, rx, out));
        }
        drop(reply_tx);

        let result = (|| {
            let mut ready: Vec<Option<Vec<f64>>> = vec![None; m];
            let mut failures: Vec<(usize, Error)> = Vec::new();
            for _ in 0..m {
                match reply_rx.recv().map_err(|_| hung_up())? {
                    Reply::Ready { worker, payload } => ready[worker] = Some(payload),
                    Reply::Failed { worker, error } => failures.push((worker, error)),
                    Reply::Response { .. } => return Err(hung_up()),
                }
            }
            if let Some((_, e)) = failures.into_iter().min_by_key(|(w, _)| *w) {
                return Err(e);
            }
            let sols: Vec<Vec<f64>> = ready.into_iter().map(|v| v.expect("every worker reported")).collect();
            let x0 = initial_estimate(opts, &sols, n)?;

            drive(sys, *params, &kernel, budget, opts, x0, |round, x_bar| {
                let payload = Arc::new(x_bar.to_vec());
                for (i, tx) in inboxes.iter().enumerate() {
                    tx.send(RoundMessage::Broadcast {
                        round,
                        payload: Arc::clone(&payload),
                    })
                    .map_err(|_| hung_up())?;
                    logger.line("broadcast", round, i, payload.len())?;
                }
                let mut slots: Vec<Option<Vec<f64>>> = vec![None; m];
                for _ in 0..m {
                    match reply_rx.recv().map_err(|_| hung_up())? {
                        Reply::Response {
                            worker,
                            round: r,
                            payload,
                        } if r == round && slots[worker].is_none() => slots[worker] = Some(payload),
                        _ => return Err(hung_up()),
                    }
                }
                // barrier reached: reduce and log in block order
                let mut responses = Vec::with_capacity(m);
                for (i, s) in slots.into_iter().enumerate() {
                    let p = s.expect("barrier collected every worker");
                    logger.line("response", round, i, p.len())?;
                    responses.push(p);
                }
                Ok(responses)
            })
        })();

        for tx in &inboxes {
            let _ = tx.send(RoundMessage::Halt);
        }
        let trace = result?;
        let stats = message_stats(trace.rounds(), m, n);
        Ok(SimulatedRun { trace, stats })
    })
}
