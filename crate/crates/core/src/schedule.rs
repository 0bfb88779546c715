//! Static step schedules for the extension-engine / product-lane datapath.
//!
//! A term of degree `d` runs as a chain of nodes. The first node consumes up
//! to `E` factor slots; each later node consumes the temporary buffer plus up
//! to `E - 1` fresh slots. Repeated factors take one slot per occurrence.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gates::CompositePoly;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScheduleError {
    #[error("infeasible shape: {0}")]
    InfeasibleShape(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HwShape {
    pub num_pes: usize,
    /// Extension engines per PE (`E`).
    pub ees_per_pe: usize,
    /// Product lanes per PE (`P`).
    pub pls_per_pe: usize,
    pub scratch_buffers: usize,
    pub accum_registers: usize,
}

impl Default for HwShape {
    fn default() -> Self {
        Self {
            num_pes: 1,
            ees_per_pe: 6,
            pls_per_pe: 5,
            scratch_buffers: 16,
            accum_registers: 32,
        }
    }
}

impl HwShape {
    pub fn new(ees: usize, pls: usize) -> Self {
        Self {
            ees_per_pe: ees,
            pls_per_pe: pls,
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<(), ScheduleError> {
        let e = self.ees_per_pe;
        if e < 2 {
            return Err(ScheduleError::InfeasibleShape(format!(
                "E = {e}, need at least 2"
            )));
        }
        if self.pls_per_pe < 1 || self.num_pes < 1 {
            return Err(ScheduleError::InfeasibleShape(
                "need at least one PE and one product lane".into(),
            ));
        }
        if self.scratch_buffers < e + 1 {
            return Err(ScheduleError::InfeasibleShape(format!(
                "{} scratch buffers cannot hold {e} inputs plus the temporary",
                self.scratch_buffers
            )));
        }
        Ok(())
    }
}

/// Nodes needed for one term of degree `d` on `E` engines.
pub fn node_count(d: usize, e: usize) -> usize {
    match d {
        0 => 0,
        d if d <= e => 1,
        d => 1 + (d - e).div_ceil(e - 1),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Operand {
    Mle(String),
    Tmp,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub term: usize,
    /// Extension points this term is evaluated at (`d_t + 1`).
    pub points: usize,
    pub operands: Vec<Operand>,
    pub writes_tmp: bool,
    /// MLEs fetched when this step starts because they could not be prefetched.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub demand: Vec<String>,
    /// MLEs dropped from scratch during this step.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub evict: Vec<String>,
    /// MLEs fetched while this step runs, for use by later steps.
    pub prefetch: Vec<String>,
}

impl Step {
    pub fn mles(&self) -> impl Iterator<Item = &str> {
        self.operands.iter().filter_map(|o| match o {
            Operand::Mle(id) => Some(id.as_str()),
            Operand::Tmp => None,
        })
    }

    /// Distinct MLE ids consumed, in first-use order.
    pub fn distinct_mles(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for id in self.mles() {
            if !out.contains(&id) {
                out.push(id);
            }
        }
        out
    }

    /// Multiplications per extension point.
    pub fn muls_per_point(&self) -> usize {
        self.operands.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrefetchPolicy {
    /// Fetch exactly what the next step is missing.
    #[default]
    NextStep,
    /// Also pull later-step MLEs into light steps to even out fetch volume.
    Balanced,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub gate: String,
    pub shape: HwShape,
    pub degree: usize,
    pub steps: Vec<Step>,
    pub tmp_buffers_used: usize,
    /// Set when `degree + 1` extension partials exceed the accumulator registers.
    pub register_spill: bool,
    /// MLEs fetched before the first step.
    pub warmup: Vec<String>,
    pub policy: PrefetchPolicy,
    /// Elements per MLE tile used when sizing prefetch volume.
    pub tile_elems: usize,
}

impl Schedule {
    pub fn node_count(&self) -> usize {
        self.steps.len()
    }

    /// Largest per-term node count.
    pub fn max_term_nodes(&self) -> usize {
        let mut best = 0;
        let mut run = 0;
        let mut last = usize::MAX;
        for s in &self.steps {
            run = if s.term == last { run + 1 } else { 1 };
            last = s.term;
            best = best.max(run);
        }
        best
    }

    /// Total MLE tile fetches: warmup, demand and prefetch sets.
    pub fn fetches(&self) -> usize {
        self.warmup.len()
            + self
                .steps
                .iter()
                .map(|s| s.prefetch.len() + s.demand.len())
                .sum::<usize>()
    }

    pub fn distinct_mles(&self) -> usize {
        let mut ids: Vec<&str> = self.steps.iter().flat_map(Step::mles).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

/// Factor order within a term: factors needed by later terms go last, so they
/// are still resident when the next term starts.
fn ordered_factors(poly: &CompositePoly, t: usize) -> Vec<usize> {
    let later_uses = |f: usize| {
        poly.terms[t + 1..]
            .iter()
            .filter(|u| u.factors.contains(&f))
            .count()
    };
    let mut counts = poly.terms[t].factor_counts();
    counts.sort_by(|a, b| {
        later_uses(a.0)
            .cmp(&later_uses(b.0))
            .then_with(|| poly.inputs[a.0].id.cmp(&poly.inputs[b.0].id))
    });
    counts
        .into_iter()
        .flat_map(|(f, k)| std::iter::repeat_n(f, k))
        .collect()
}

/// Decomposes every term into engine-sized nodes and fills the prefetch plan.
pub fn build_schedule(poly: &CompositePoly, shape: HwShape) -> Result<Schedule, ScheduleError> {
    build_schedule_with(poly, shape, PrefetchPolicy::NextStep, 1)
}

pub fn build_schedule_with(
    poly: &CompositePoly,
    shape: HwShape,
    policy: PrefetchPolicy,
    tile_elems: usize,
) -> Result<Schedule, ScheduleError> {
    shape.check()?;
    let e = shape.ees_per_pe;
    let mut steps = Vec::new();
    for (t, term) in poly.terms.iter().enumerate() {
        let factors = ordered_factors(poly, t);
        if factors.is_empty() {
            continue;
        }
        let points = term.degree() + 1;
        let mut rest = &factors[..];
        let mut first = true;
        while !rest.is_empty() {
            let take = if first { e } else { e - 1 }.min(rest.len());
            let (now, later) = rest.split_at(take);
            let mut operands = Vec::with_capacity(take + 1);
            if !first {
                operands.push(Operand::Tmp);
            }
            operands.extend(now.iter().map(|&f| Operand::Mle(poly.inputs[f].id.clone())));
            steps.push(Step {
                term: t,
                points,
                operands,
                writes_tmp: !later.is_empty(),
                demand: Vec::new(),
                evict: Vec::new(),
                prefetch: Vec::new(),
            });
            rest = later;
            first = false;
        }
    }
    let tmp_buffers_used = usize::from(steps.iter().any(|s| s.writes_tmp));
    let degree = poly.degree();
    let mut s = Schedule {
        gate: poly.name.clone(),
        shape,
        degree,
        steps,
        tmp_buffers_used,
        register_spill: degree + 1 > shape.accum_registers,
        warmup: Vec::new(),
        policy,
        tile_elems,
    };
    plan_prefetch(&mut s, policy, tile_elems);
    Ok(s)
}

/// Fills warmup, demand and prefetch sets under the scratch-buffer budget.
///
/// Residency follows Belady's rule: when space is needed, the resident MLE
/// whose next use is furthest away is dropped.
pub fn plan_prefetch(s: &mut Schedule, policy: PrefetchPolicy, tile_elems: usize) {
    s.policy = policy;
    s.tile_elems = tile_elems;
    let capacity = s.shape.scratch_buffers - s.tmp_buffers_used;
    let needs: Vec<Vec<String>> = s
        .steps
        .iter()
        .map(|st| st.distinct_mles().into_iter().map(str::to_string).collect())
        .collect();
    let mut r = Residency {
        needs: &needs,
        capacity,
        resident: Vec::new(),
    };
    let n = needs.len();
    let mut plan = vec![StepIo::default(); n];

    let mut warmup = Vec::new();
    if let Some(first) = needs.first() {
        for id in first {
            r.fetch(id, &[0], &mut warmup, &mut Vec::new());
        }
    }
    let distinct = {
        let mut all: Vec<&String> = needs.iter().flatten().collect();
        all.sort_unstable();
        all.dedup();
        all.len()
    };
    let target = distinct.div_ceil(n.max(1)).max(1);

    for j in 0..n {
        let io = &mut plan[j];
        for id in &needs[j] {
            if !r.is_resident(id) {
                r.fetch(id, &[j], &mut io.demand, &mut io.evict);
            }
        }
        if let Some(next) = needs.get(j + 1) {
            for id in next {
                r.fetch(id, &[j, j + 1], &mut io.prefetch, &mut io.evict);
            }
        }
        if policy == PrefetchPolicy::Balanced {
            'ahead: for later in needs.iter().skip(j + 2) {
                for id in later {
                    if io.prefetch.len() >= target || r.resident.len() >= capacity {
                        break 'ahead;
                    }
                    if !r.is_resident(id) {
                        r.fetch(id, &[j, j + 1], &mut io.prefetch, &mut io.evict);
                    }
                }
            }
        }
    }
    s.warmup = warmup;
    for (st, io) in s.steps.iter_mut().zip(plan) {
        st.demand = io.demand;
        st.evict = io.evict;
        st.prefetch = io.prefetch;
    }
}

#[derive(Debug, Clone, Default)]
struct StepIo {
    demand: Vec<String>,
    evict: Vec<String>,
    prefetch: Vec<String>,
}

struct Residency<'a> {
    needs: &'a [Vec<String>],
    capacity: usize,
    resident: Vec<String>,
}

impl Residency<'_> {
    fn is_resident(&self, id: &str) -> bool {
        self.resident.iter().any(|r| r == id)
    }

    fn next_use(&self, id: &str, from: usize) -> usize {
        self.needs[from..]
            .iter()
            .position(|n| n.iter().any(|m| m == id))
            .map_or(usize::MAX, |p| p + from)
    }

    /// Makes `id` resident, evicting a table not needed by `pinned` steps.
    fn fetch(
        &mut self,
        id: &str,
        pinned: &[usize],
        fetched: &mut Vec<String>,
        evicted: &mut Vec<String>,
    ) -> bool {
        if self.is_resident(id) {
            return true;
        }
        if self.resident.len() >= self.capacity {
            let from = pinned[0];
            let victim = self
                .resident
                .iter()
                .enumerate()
                .filter(|(_, r)| {
                    !pinned
                        .iter()
                        .any(|&p| self.needs.get(p).is_some_and(|n| n.contains(r)))
                })
                .max_by_key(|(_, r)| self.next_use(r, from))
                .map(|(i, _)| i);
            match victim {
                Some(i) => evicted.push(self.resident.swap_remove(i)),
                None => return false,
            }
        }
        self.resident.push(id.to_string());
        fetched.push(id.to_string());
        true
    }
}

/// Checks coverage, residency and buffer capacity of a schedule.
pub fn validate(s: &Schedule, poly: &CompositePoly) -> Result<(), String> {
    for (t, term) in poly.terms.iter().enumerate() {
        let mut want: Vec<&str> = term
            .factors
            .iter()
            .map(|&f| poly.inputs[f].id.as_str())
            .collect();
        let mut got: Vec<&str> = s
            .steps
            .iter()
            .filter(|st| st.term == t)
            .flat_map(Step::mles)
            .collect();
        want.sort_unstable();
        got.sort_unstable();
        if want != got {
            return Err(format!("term {t} covered as {got:?}, expected {want:?}"));
        }
    }
    let capacity = s.shape.scratch_buffers - s.tmp_buffers_used;
    let mut resident: Vec<&str> = s.warmup.iter().map(String::as_str).collect();
    let add = |resident: &mut Vec<&'_ str>, id: &str, j: usize| -> Result<(), String> {
        if resident.contains(&id) {
            return Err(format!("step {j} fetches resident `{id}`"));
        }
        Ok(())
    };
    for (j, st) in s.steps.iter().enumerate() {
        if st.operands.len() > s.shape.ees_per_pe {
            return Err(format!("step {j} uses {} slots", st.operands.len()));
        }
        for id in &st.evict {
            let pos = resident
                .iter()
                .position(|r| r == id)
                .ok_or(format!("step {j} evicts absent `{id}`"))?;
            if st.mles().any(|m| m == id) {
                return Err(format!("step {j} evicts its own input `{id}`"));
            }
            resident.swap_remove(pos);
        }
        for id in &st.demand {
            add(&mut resident, id, j)?;
            resident.push(id);
        }
        if let Some(missing) = st.mles().find(|m| !resident.contains(m)) {
            return Err(format!(
                "step {j} consumes `{missing}` which is not resident"
            ));
        }
        for id in &st.prefetch {
            add(&mut resident, id, j)?;
            resident.push(id);
        }
        if resident.len() > capacity {
            return Err(format!(
                "step {j} holds {} tables, capacity {capacity}",
                resident.len()
            ));
        }
    }
    Ok(())
}

/// Cyclic assignment of extension indices to product lanes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LanePlan {
    pub k: usize,
    pub p: usize,
    /// Steady-state cycles per pair as a reduced fraction.
    pub ii_num: usize,
    pub ii_den: usize,
    /// `cycles[c]` lists `(pair offset, extension index)` per busy lane.
    pub cycles: Vec<Vec<(usize, usize)>>,
}

impl LanePlan {
    pub fn cycles_per_pair(&self) -> f64 {
        self.ii_num as f64 / self.ii_den as f64
    }

    pub fn pairs_per_window(&self) -> usize {
        self.cycles
            .iter()
            .flatten()
            .filter(|(_, e)| *e == 0)
            .count()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Lane plan for `K` extensions per pair over `P` lanes.
///
/// With `K > P` extension slots stream through the lanes back to back, so a
/// pair issues every `K / P` cycles. With `K ≤ P` one pair issues per cycle,
/// limited by the engines producing one pair per cycle.
pub fn build_lane_plan(k: usize, p: usize) -> LanePlan {
    assert!(k >= 1 && p >= 1, "K and P must be positive");
    if k <= p {
        return LanePlan {
            k,
            p,
            ii_num: 1,
            ii_den: 1,
            cycles: vec![(0..k).map(|e| (0, e)).collect()],
        };
    }
    let g = gcd(k, p);
    let window = k / g; // lcm(K, P) / P
    let cycles = (0..window)
        .map(|c| {
            (c * p..(c + 1) * p)
                .map(|slot| (slot / k, slot % k))
                .collect()
        })
        .collect();
    LanePlan {
        k,
        p,
        ii_num: k / g,
        ii_den: p / g,
        cycles,
    }
}

/// Queue simulation: each cycle the engines push one pair's `K` extensions
/// if fewer than `P` are waiting, then the lanes issue up to `P`.
pub fn simulate_lanes(k: usize, p: usize, pairs: usize) -> usize {
    let mut queued = 0usize;
    let mut pushed = 0usize;
    let mut issued = 0usize;
    let total = k * pairs;
    let mut cycles = 0;
    while issued < total {
        if pushed < pairs && queued < p {
            queued += k;
            pushed += 1;
        }
        let n = queued.min(p);
        queued -= n;
        issued += n;
        cycles += 1;
    }
    cycles
}
