use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dist::Sampler;
use crate::params::SystemParams;

/// Raw totals from one replication, measured after the warm-up.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ReplicationStats {
    /// Length of the observation window.
    pub observed_time: f64,
    /// Integral of the job count over the window.
    pub job_area: f64,
    /// Integral of (active + in-setup dynamic instances) over the window.
    pub instance_area: f64,
    pub accepted: u64,
    pub blocked: u64,
    /// Waiting times summed over jobs that arrived in the window and
    /// reached a server before the horizon.
    pub wait_sum: f64,
    pub wait_count: u64,
    /// Sojourn times of jobs that arrived in the window and left before
    /// the horizon.
    pub sojourn_sum: f64,
    pub sojourn_count: u64,
    pub events: u64,
}

impl ReplicationStats {
    pub fn l(&self) -> f64 {
        ratio(self.job_area, self.observed_time)
    }

    pub fn s(&self) -> f64 {
        ratio(self.instance_area, self.observed_time)
    }

    pub fn pb(&self) -> f64 {
        ratio(self.blocked as f64, (self.accepted + self.blocked) as f64)
    }

    pub fn wq(&self) -> f64 {
        ratio(self.wait_sum, self.wait_count as f64)
    }

    pub fn w(&self) -> f64 {
        ratio(self.sojourn_sum, self.sojourn_count as f64)
    }

    pub(crate) fn merge(&mut self, o: &ReplicationStats) {
        self.observed_time += o.observed_time;
        self.job_area += o.job_area;
        self.instance_area += o.instance_area;
        self.accepted += o.accepted;
        self.blocked += o.blocked;
        self.wait_sum += o.wait_sum;
        self.wait_count += o.wait_count;
        self.sojourn_sum += o.sojourn_sum;
        self.sojourn_count += o.sojourn_count;
        self.events += o.events;
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy)]
struct Departure {
    time: f64,
    seq: u64,
    arrived: f64,
}

impl PartialEq for Departure {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Departure {}

impl PartialOrd for Departure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Departure {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.seq.cmp(&other.seq))
    }
}

#[derive(Debug, Clone, Copy)]
struct Setup {
    done: f64,
    seq: u64,
}

#[derive(Clone, Copy)]
enum Event {
    Departure,
    SetupDone(usize),
    Arrival,
}

pub(crate) struct Samplers {
    pub interarrival: Sampler,
    pub service: Sampler,
    pub setup: Sampler,
}

pub(crate) struct Engine<'a, R> {
    n0: usize,
    k: usize,
    cap: usize,
    warmup: f64,
    horizon: f64,
    samplers: &'a Samplers,
    rng: R,

    now: f64,
    level: usize,
    jobs: usize,
    waiting: VecDeque<f64>,
    in_service: BinaryHeap<Reverse<Departure>>,
    /// In start order, so cancelling the newest setup is a pop.
    setups: Vec<Setup>,
    /// Index into `setups` of the earliest completion.
    next_setup: Option<usize>,
    next_arrival: f64,
    seq: u64,
    stats: ReplicationStats,
}

impl<'a, R: Rng> Engine<'a, R> {
    pub fn new(params: &SystemParams, samplers: &'a Samplers, warmup: f64, horizon: f64, mut rng: R) -> Self {
        let first = samplers.interarrival.sample(&mut rng);
        Engine {
            n0: params.n0(),
            k: params.k(),
            cap: params.capacity(),
            warmup,
            horizon,
            samplers,
            rng,
            now: 0.0,
            level: 0,
            jobs: 0,
            waiting: VecDeque::new(),
            in_service: BinaryHeap::with_capacity(params.servers()),
            setups: Vec::with_capacity(params.k()),
            next_setup: None,
            next_arrival: first,
            seq: 0,
            stats: ReplicationStats::default(),
        }
    }

    pub fn run(mut self) -> ReplicationStats {
        loop {
            let (t, event) = self.next_event();
            if t > self.horizon {
                break;
            }
            self.advance(t);
            match event {
                Event::Departure => self.depart(),
                Event::SetupDone(idx) => self.finish_setup(idx),
                Event::Arrival => self.arrive(),
            }
            self.stats.events += 1;
            debug_assert!(self.consistent());
        }
        self.advance(self.horizon);
        self.stats.observed_time = self.horizon - self.warmup;
        self.stats
    }

    /// Earliest pending event; on equal times a departure goes first, then
    /// a setup completion, then an arrival.
    fn next_event(&self) -> (f64, Event) {
        let mut best = (self.next_arrival, Event::Arrival);
        if let Some(idx) = self.next_setup {
            if self.setups[idx].done <= best.0 {
                best = (self.setups[idx].done, Event::SetupDone(idx));
            }
        }
        if let Some(Reverse(d)) = self.in_service.peek() {
            if d.time <= best.0 {
                best = (d.time, Event::Departure);
            }
        }
        best
    }

    fn advance(&mut self, t: f64) {
        let from = self.now.max(self.warmup);
        if t > from {
            let dt = t - from;
            self.stats.job_area += dt * self.jobs as f64;
            self.stats.instance_area += dt * (self.level + self.setups.len()) as f64;
        }
        self.now = t;
    }

    fn in_window(&self, arrived: f64) -> bool {
        arrived >= self.warmup
    }

    fn start_service(&mut self, arrived: f64) {
        if self.in_window(arrived) {
            self.stats.wait_sum += self.now - arrived;
            self.stats.wait_count += 1;
        }
        let time = self.now + self.samplers.service.sample(&mut self.rng);
        self.seq += 1;
        self.in_service.push(Reverse(Departure { time, seq: self.seq, arrived }));
    }

    fn arrive(&mut self) {
        let t = self.now;
        self.next_arrival = t + self.samplers.interarrival.sample(&mut self.rng);
        let counted = self.in_window(t);
        if self.jobs == self.cap {
            if counted {
                self.stats.blocked += 1;
            }
            return;
        }
        if counted {
            self.stats.accepted += 1;
        }
        self.jobs += 1;
        if self.in_service.len() < self.n0 + self.level {
            self.start_service(t);
        } else {
            self.waiting.push_back(t);
        }
        if self.setups_needed() > self.setups.len() {
            let done = t + self.samplers.setup.sample(&mut self.rng);
            self.seq += 1;
            self.setups.push(Setup { done, seq: self.seq });
            if self.next_setup.is_none_or(|i| earlier(&self.setups[self.setups.len() - 1], &self.setups[i])) {
                self.next_setup = Some(self.setups.len() - 1);
            }
        }
    }

    fn depart(&mut self) {
        let Reverse(d) = self.in_service.pop().expect("departure scheduled");
        if self.in_window(d.arrived) {
            self.stats.sojourn_sum += self.now - d.arrived;
            self.stats.sojourn_count += 1;
        }
        self.jobs -= 1;
        if self.level > 0 && self.jobs < self.n0 + self.level {
            // A dynamic instance went idle with nobody waiting: power it off.
            self.level -= 1;
        } else if let Some(arrived) = self.waiting.pop_front() {
            self.start_service(arrived);
        }
        let need = self.setups_needed();
        if self.setups.len() > need {
            self.setups.truncate(need);
            self.refresh_next_setup();
        }
    }

    fn finish_setup(&mut self, idx: usize) {
        self.setups.remove(idx);
        self.level += 1;
        let arrived = self.waiting.pop_front().expect("a setup implies a waiting job");
        self.start_service(arrived);
        self.refresh_next_setup();
    }

    fn refresh_next_setup(&mut self) {
        self.next_setup = (0..self.setups.len()).reduce(|a, b| {
            if earlier(&self.setups[b], &self.setups[a]) {
                b
            } else {
                a
            }
        });
    }

    fn setups_needed(&self) -> usize {
        self.jobs.saturating_sub(self.n0 + self.level).min(self.k - self.level)
    }

    fn consistent(&self) -> bool {
        let n = self.n0 + self.level;
        self.jobs <= self.cap
            && self.level <= self.k
            && (self.level == 0 || self.jobs >= n)
            && self.in_service.len() == self.jobs.min(n)
            && self.waiting.len() == self.jobs - self.in_service.len()
            && self.setups.len() == self.setups_needed()
    }
}

fn earlier(a: &Setup, b: &Setup) -> bool {
    a.done.total_cmp(&b.done).then(a.seq.cmp(&b.seq)) == Ordering::Less
}
