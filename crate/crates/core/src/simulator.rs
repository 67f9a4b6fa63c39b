//! Discrete-event simulation of the replicated queue.
//!
//! [`SimMode::ReducedMinService`] runs a single FCFS server whose service time
//! is drawn from the min-service law. [`SimMode::LiteralTwoQueue`] runs two
//! FCFS servers, each task joining both queues; when one copy finishes, the
//! other copy is cancelled, in service or still queued. The literal mode draws
//! the service pair jointly, which is only possible where the bound copula is
//! a proper copula: `theta` in `{-1, 0, 1}`.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::queueing::{min_law, ServiceModel, SystemSpec, Variant};
use crate::sampling::MinServiceSampler;

/// Normal quantile used for the replication confidence intervals.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimMode {
    ReducedMinService,
    LiteralTwoQueue,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub system: SystemSpec,
    /// Arrivals generated per replication, warm-up included.
    pub arrivals: usize,
    /// Leading arrivals excluded from the statistics.
    pub warmup: usize,
    pub replications: usize,
    pub seed: u64,
    pub mode: SimMode,
}

impl SimConfig {
    /// Defaults the warm-up to a tenth of the arrivals.
    pub fn new(system: SystemSpec, arrivals: usize, replications: usize, seed: u64, mode: SimMode) -> Self {
        Self {
            system,
            arrivals,
            warmup: arrivals / 10,
            replications,
            seed,
            mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.arrivals == 0 {
            return Err(Error::InvalidConfig("arrivals must be positive".into()));
        }
        if self.warmup >= self.arrivals {
            return Err(Error::InvalidConfig(format!(
                "warm-up ({}) must be smaller than arrivals ({})",
                self.warmup, self.arrivals
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be positive".into()));
        }
        if self.mode == SimMode::LiteralTwoQueue && coupling(self.system.theta.get()).is_none() {
            return Err(Error::InvalidConfig(format!(
                "literal two-queue mode needs theta in {{-1, 0, 1}}, got {}",
                self.system.theta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplicationResult {
    pub replication: usize,
    pub mean_wait: f64,
    pub mean_service_effort: f64,
    pub utilization: f64,
    pub arrivals_counted: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub mean_wait: f64,
    pub mean_wait_ci_halfwidth: f64,
    pub mean_service_effort: f64,
    pub mean_service_ci_halfwidth: f64,
    pub utilization_estimate: f64,
    pub arrivals_counted: usize,
}

/// Joint law of the two service draws in literal mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Coupling {
    Independent,
    Comonotone,
    Countermonotone,
}

fn coupling(theta: f64) -> Option<Coupling> {
    if theta == 0.0 {
        Some(Coupling::Independent)
    } else if theta == 1.0 {
        Some(Coupling::Comonotone)
    } else if theta == -1.0 {
        Some(Coupling::Countermonotone)
    } else {
        None
    }
}

/// Uniform on the open interval `(0, 1)`.
fn open_unit<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

fn exponential<R: RngCore>(rng: &mut R, rate: f64) -> f64 {
    -open_unit(rng).ln() / rate
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EventKind {
    Arrival,
    Departure { server: usize, task: usize, epoch: u64 },
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    // reversed so the max-heap pops the earliest event; ties go to the older one
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.seq.cmp(&self.seq))
    }
}

#[derive(Default)]
struct Calendar {
    heap: BinaryHeap<Event>,
    seq: u64,
}

impl Calendar {
    fn push(&mut self, time: f64, kind: EventKind) {
        self.heap.push(Event {
            time,
            seq: self.seq,
            kind,
        });
        self.seq += 1;
    }

    fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }
}

struct Tally {
    warmup: usize,
    wait_sum: f64,
    effort_sum: f64,
    counted: usize,
}

impl Tally {
    fn new(warmup: usize) -> Self {
        Self {
            warmup,
            wait_sum: 0.0,
            effort_sum: 0.0,
            counted: 0,
        }
    }

    fn record(&mut self, index: usize, wait: f64, effort: f64) {
        if index >= self.warmup {
            self.wait_sum += wait;
            self.effort_sum += effort;
            self.counted += 1;
        }
    }

    fn finish(self, replication: usize, busy: f64, horizon: f64) -> ReplicationResult {
        let n = self.counted as f64;
        ReplicationResult {
            replication,
            mean_wait: self.wait_sum / n,
            mean_service_effort: self.effort_sum / n,
            utilization: if horizon > 0.0 { busy / horizon } else { 0.0 },
            arrivals_counted: self.counted,
        }
    }
}

fn replication_rng(seed: u64, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64);
    rng
}

fn run_reduced(cfg: &SimConfig, sampler: &MinServiceSampler, replication: usize) -> ReplicationResult {
    let mut rng = replication_rng(cfg.seed, replication);
    let lambda = cfg.system.arrival_rate;
    let mut cal = Calendar::default();
    let mut arrival_time = Vec::with_capacity(cfg.arrivals);
    let mut service = Vec::with_capacity(cfg.arrivals);
    let mut queue = VecDeque::new();
    let mut busy_with: Option<usize> = None;
    let mut tally = Tally::new(cfg.warmup);
    let mut busy = 0.0;
    let mut now = 0.0;

    cal.push(exponential(&mut rng, lambda), EventKind::Arrival);
    while let Some(ev) = cal.pop() {
        now = ev.time;
        match ev.kind {
            EventKind::Arrival => {
                let task = arrival_time.len();
                arrival_time.push(now);
                service.push(sampler.sample(open_unit(&mut rng)));
                if task + 1 < cfg.arrivals {
                    cal.push(now + exponential(&mut rng, lambda), EventKind::Arrival);
                }
                if busy_with.is_none() {
                    busy_with = Some(task);
                    tally.record(task, 0.0, 2.0 * service[task]);
                    cal.push(
                        now + service[task],
                        EventKind::Departure {
                            server: 0,
                            task,
                            epoch: 0,
                        },
                    );
                } else {
                    queue.push_back(task);
                }
            }
            EventKind::Departure { task, .. } => {
                busy += service[task];
                busy_with = queue.pop_front();
                if let Some(next) = busy_with {
                    tally.record(next, now - arrival_time[next], 2.0 * service[next]);
                    cal.push(
                        now + service[next],
                        EventKind::Departure {
                            server: 0,
                            task: next,
                            epoch: 0,
                        },
                    );
                }
            }
        }
    }
    tally.finish(replication, busy, now)
}

struct Copy2 {
    task: usize,
    start: f64,
    epoch: u64,
}

struct Server {
    queue: VecDeque<usize>,
    current: Option<Copy2>,
    epoch: u64,
    busy: f64,
}

impl Server {
    fn new() -> Self {
        Self {
            queue: VecDeque::new(),
            current: None,
            epoch: 0,
            busy: 0.0,
        }
    }
}

struct Task {
    arrival: f64,
    service: [f64; 2],
    first_start: Option<f64>,
    effort: f64,
    done: bool,
}

fn run_literal(
    cfg: &SimConfig,
    service_model: &ServiceModel,
    joint: Coupling,
    replication: usize,
) -> ReplicationResult {
    let mut rng = replication_rng(cfg.seed, replication);
    let lambda = cfg.system.arrival_rate;
    let mut cal = Calendar::default();
    let mut tasks: Vec<Task> = Vec::with_capacity(cfg.arrivals);
    let mut servers = [Server::new(), Server::new()];
    let mut tally = Tally::new(cfg.warmup);
    let mut now = 0.0;

    fn try_start(s: usize, now: f64, servers: &mut [Server; 2], tasks: &mut [Task], cal: &mut Calendar) {
        if servers[s].current.is_some() {
            return;
        }
        while let Some(task) = servers[s].queue.pop_front() {
            if tasks[task].done {
                continue;
            }
            servers[s].epoch += 1;
            let epoch = servers[s].epoch;
            servers[s].current = Some(Copy2 {
                task,
                start: now,
                epoch,
            });
            let t = &mut tasks[task];
            t.first_start = Some(t.first_start.map_or(now, |f: f64| f.min(now)));
            cal.push(now + t.service[s], EventKind::Departure { server: s, task, epoch });
            return;
        }
    }

    cal.push(exponential(&mut rng, lambda), EventKind::Arrival);
    while let Some(ev) = cal.pop() {
        now = ev.time;
        match ev.kind {
            EventKind::Arrival => {
                let p = open_unit(&mut rng);
                let q = match joint {
                    Coupling::Independent => open_unit(&mut rng),
                    Coupling::Comonotone => p,
                    Coupling::Countermonotone => 1.0 - p,
                };
                let id = tasks.len();
                tasks.push(Task {
                    arrival: now,
                    service: [service_model.quantile(p), service_model.quantile(q)],
                    first_start: None,
                    effort: 0.0,
                    done: false,
                });
                if id + 1 < cfg.arrivals {
                    cal.push(now + exponential(&mut rng, lambda), EventKind::Arrival);
                }
                for s in 0..2 {
                    servers[s].queue.push_back(id);
                    try_start(s, now, &mut servers, &mut tasks, &mut cal);
                }
            }
            EventKind::Departure { server, task, epoch } => {
                let live = servers[server].current.as_ref().is_some_and(|c| c.epoch == epoch);
                if !live {
                    continue;
                }
                let finished = servers[server].current.take().expect("live copy");
                let spent = now - finished.start;
                servers[server].busy += spent;
                tasks[task].effort += spent;
                tasks[task].done = true;

                let other = 1 - server;
                if servers[other].current.as_ref().is_some_and(|c| c.task == task) {
                    let cancelled = servers[other].current.take().expect("copy in service");
                    let spent = now - cancelled.start;
                    servers[other].busy += spent;
                    tasks[task].effort += spent;
                    try_start(other, now, &mut servers, &mut tasks, &mut cal);
                }
                let t = &tasks[task];
                tally.record(task, t.first_start.expect("started") - t.arrival, t.effort);
                try_start(server, now, &mut servers, &mut tasks, &mut cal);
            }
        }
    }
    let busy = 0.5 * (servers[0].busy + servers[1].busy);
    tally.finish(replication, busy, now)
}

fn mean_and_halfwidth(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Z_95 * (var / n).sqrt())
}

/// Aggregate of the replications, plus each replication's own summary.
pub fn run_des_detailed(cfg: &SimConfig) -> Result<(SimulationResult, Vec<ReplicationResult>)> {
    cfg.validate()?;
    let sys = &cfg.system;
    let reps: Vec<ReplicationResult> = match cfg.mode {
        SimMode::ReducedMinService => {
            let law = sys.min_law();
            let utilization = sys.arrival_rate * law.m1;
            if utilization.is_nan() || utilization >= 1.0 {
                return Err(Error::Unstable { utilization });
            }
            let sampler = MinServiceSampler::new(law)?;
            (0..cfg.replications)
                .into_par_iter()
                .map(|r| run_reduced(cfg, &sampler, r))
                .collect()
        }
        SimMode::LiteralTwoQueue => {
            let joint = coupling(sys.theta.get()).expect("validated");
            let law = min_law(sys.service, sys.theta, Variant::ExactPiecewise);
            let utilization = sys.arrival_rate * law.m1;
            if utilization.is_nan() || utilization >= 1.0 {
                return Err(Error::Unstable { utilization });
            }
            (0..cfg.replications)
                .into_par_iter()
                .map(|r| run_literal(cfg, &sys.service, joint, r))
                .collect()
        }
    };
    let waits: Vec<f64> = reps.iter().map(|r| r.mean_wait).collect();
    let efforts: Vec<f64> = reps.iter().map(|r| r.mean_service_effort).collect();
    let (mean_wait, wait_hw) = mean_and_halfwidth(&waits);
    let (mean_effort, effort_hw) = mean_and_halfwidth(&efforts);
    let utilization = reps.iter().map(|r| r.utilization).sum::<f64>() / reps.len() as f64;
    let result = SimulationResult {
        mean_wait,
        mean_wait_ci_halfwidth: wait_hw,
        mean_service_effort: mean_effort,
        mean_service_ci_halfwidth: effort_hw,
        utilization_estimate: utilization,
        arrivals_counted: reps.iter().map(|r| r.arrivals_counted).sum(),
    };
    Ok((result, reps))
}

pub fn run_des(cfg: &SimConfig) -> Result<SimulationResult> {
    run_des_detailed(cfg).map(|(r, _)| r)
}

/// Draws of the same stream `run_des` uses, for checking a replication by
/// an independent recursion.
#[doc(hidden)]
pub fn reduced_inputs(cfg: &SimConfig, replication: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let sampler = MinServiceSampler::new(cfg.system.min_law())?;
    let mut rng = replication_rng(cfg.seed, replication);
    let lambda = cfg.system.arrival_rate;
    let mut gaps = Vec::with_capacity(cfg.arrivals);
    let mut services = Vec::with_capacity(cfg.arrivals);
    gaps.push(exponential(&mut rng, lambda));
    for k in 0..cfg.arrivals {
        services.push(sampler.sample(open_unit(&mut rng)));
        if k + 1 < cfg.arrivals {
            gaps.push(exponential(&mut rng, lambda));
        }
    }
    Ok((gaps, services))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::queueing::pk_waiting;

    fn system(t: f64, lambda: f64) -> SystemSpec {
        SystemSpec::new(
            lambda,
            ServiceModel::shifted_exponential(0.5, 1.0).unwrap(),
            t,
            Variant::ExactPiecewise,
        )
        .unwrap()
    }

    #[test]
    fn event_order_is_time_then_sequence() {
        let mut cal = Calendar::default();
        cal.push(2.0, EventKind::Arrival);
        cal.push(1.0, EventKind::Arrival);
        cal.push(
            1.0,
            EventKind::Departure {
                server: 0,
                task: 0,
                epoch: 0,
            },
        );
        assert_eq!(cal.pop().unwrap().kind, EventKind::Arrival);
        assert!(matches!(cal.pop().unwrap().kind, EventKind::Departure { .. }));
        assert_eq!(cal.pop().unwrap().time, 2.0);
    }

    #[test]
    fn reduced_matches_lindley_recursion() {
        let cfg = SimConfig {
            warmup: 50,
            ..SimConfig::new(system(0.3, 0.25), 2_000, 2, 9, SimMode::ReducedMinService)
        };
        let (_, reps) = run_des_detailed(&cfg).unwrap();
        for (r, rep) in reps.iter().enumerate() {
            let (gaps, services) = reduced_inputs(&cfg, r).unwrap();
            let mut wait: f64 = 0.0;
            let mut sum = 0.0;
            for k in 0..cfg.arrivals {
                if k > 0 {
                    wait = (wait + services[k - 1] - gaps[k]).max(0.0);
                }
                if k >= cfg.warmup {
                    sum += wait;
                }
            }
            let lindley = sum / (cfg.arrivals - cfg.warmup) as f64;
            assert!(
                (lindley - rep.mean_wait).abs() < 1e-9 * lindley.max(1.0),
                "{lindley} vs {}",
                rep.mean_wait
            );
        }
    }

    #[test]
    fn reduced_simulation_tracks_the_formula() {
        let cfg = SimConfig::new(system(0.2, 0.25), 50_000, 4, 3, SimMode::ReducedMinService);
        let res = run_des(&cfg).unwrap();
        let law = cfg.system.min_law();
        let ew = pk_waiting(0.25, law.m1, law.m2).unwrap();
        assert!((res.mean_wait - ew).abs() < 0.15 * ew, "{} vs {ew}", res.mean_wait);
        assert!((res.utilization_estimate - 0.25 * law.m1).abs() < 0.03);
        assert_eq!(res.arrivals_counted, 4 * 45_000);
    }

    #[test]
    fn literal_mode_rejects_interior_theta() {
        let cfg = SimConfig::new(system(0.5, 0.25), 100, 1, 1, SimMode::LiteralTwoQueue);
        assert!(matches!(run_des(&cfg), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn comonotone_literal_effort_is_twice_the_service() {
        let cfg = SimConfig::new(system(1.0, 0.2), 5_000, 1, 5, SimMode::LiteralTwoQueue);
        let res = run_des(&cfg).unwrap();
        assert!(
            (res.mean_service_effort - 6.0).abs() < 0.3,
            "{}",
            res.mean_service_effort
        );
    }

    #[test]
    fn unstable_and_invalid_configs() {
        let cfg = SimConfig::new(system(1.0, 0.4), 100, 1, 1, SimMode::ReducedMinService);
        assert!(matches!(run_des(&cfg), Err(Error::Unstable { .. })));
        let bad = SimConfig {
            warmup: 100,
            ..SimConfig::new(system(0.0, 0.2), 100, 1, 1, SimMode::ReducedMinService)
        };
        assert!(matches!(run_des(&bad), Err(Error::InvalidConfig(_))));
        let bad = SimConfig::new(system(0.0, 0.2), 100, 0, 1, SimMode::ReducedMinService);
        assert!(matches!(run_des(&bad), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn same_seed_same_result() {
        let cfg = SimConfig::new(system(0.5, 0.25), 3_000, 3, 11, SimMode::ReducedMinService);
        assert_eq!(run_des(&cfg).unwrap(), run_des(&cfg).unwrap());
        let other = SimConfig { seed: 12, ..cfg };
        assert_ne!(run_des(&cfg).unwrap(), run_des(&other).unwrap());
    }
}
