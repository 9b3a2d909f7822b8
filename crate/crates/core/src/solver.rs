//! Propagate-and-backtrack search for labellings with a given magic constant.
//!
//! Variable order: the unassigned vertex whose emptiest hexagon has the fewest
//! unassigned vertices, then highest membership, then lowest index. A hexagon
//! with one unassigned vertex forces it to `M - (sum of the other five)`.
//! Every hexagon with `k` open vertices and partial sum `s` must satisfy
//! `s + (k smallest unused) <= M <= s + (k largest unused)`.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{bounds_for, complement_magic, BoundsError};
use crate::hexgrid::{complement_solution, verify_solution, Assignment, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ValueOrder {
    #[default]
    Ascending,
    Descending,
    SeededShuffle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    #[default]
    FirstSolution,
    /// Count every labelling; stop early once `cap` solutions are seen.
    CountAll(Option<u64>),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolverConfig {
    pub seed: u64,
    pub node_limit: Option<u64>,
    pub time_budget: Option<Duration>,
    pub mode: SearchMode,
    pub value_order: ValueOrder,
}

impl SolverConfig {
    pub fn counting() -> Self {
        SolverConfig { mode: SearchMode::CountAll(None), ..Default::default() }
    }

    pub fn with_time_budget(mut self, budget: Duration) -> Self {
        self.time_budget = Some(budget);
        self
    }

    pub fn with_node_limit(mut self, limit: u64) -> Self {
        self.node_limit = Some(limit);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub forced_assignments: u64,
    pub prunes: u64,
    pub elapsed: Duration,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitReason {
    NodeLimit,
    TimeBudget,
    CountCap,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(Assignment, SearchStats),
    Unsolvable(SearchStats),
    Inconclusive(SearchStats, LimitReason),
}

impl SearchOutcome {
    pub fn stats(&self) -> &SearchStats {
        match self {
            SearchOutcome::Found(_, s) | SearchOutcome::Unsolvable(s) | SearchOutcome::Inconclusive(s, _) => s,
        }
    }

    pub fn assignment(&self) -> Option<&Assignment> {
        match self {
            SearchOutcome::Found(a, _) => Some(a),
            _ => None,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found(..))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountOutcome {
    Exact(u64, SearchStats),
    Inconclusive { at_least: u64, stats: SearchStats, reason: LimitReason },
}

impl CountOutcome {
    pub fn exact(&self) -> Option<u64> {
        match self {
            CountOutcome::Exact(c, _) => Some(*c),
            CountOutcome::Inconclusive { .. } => None,
        }
    }
}

/// Pairwise vertex-disjoint hexagons covering every vertex exactly once, if any.
///
/// When such a cover of `k` hexagons exists, every magic labelling has
/// `k * M = n(n + 1) / 2`.
pub fn exact_hexagon_cover(shape: &Shape) -> Option<Vec<usize>> {
    let n = shape.vertex_count();
    if n % 6 != 0 {
        return None;
    }
    fn fill(shape: &Shape, covered: &mut [bool], chosen: &mut Vec<usize>) -> bool {
        let Some(first) = covered.iter().position(|c| !c) else {
            return true;
        };
        for &h in shape.hexagons_of(first) {
            let hex = shape.hexagons()[h];
            if hex.iter().any(|&v| covered[v]) {
                continue;
            }
            hex.iter().for_each(|&v| covered[v] = true);
            chosen.push(h);
            if fill(shape, covered, chosen) {
                return true;
            }
            chosen.pop();
            hex.iter().for_each(|&v| covered[v] = false);
        }
        false
    }
    let mut covered = vec![false; n];
    let mut chosen = Vec::new();
    fill(shape, &mut covered, &mut chosen).then(|| {
        chosen.sort_unstable();
        chosen
    })
}

/// Whether `magic` can be excluded without search.
fn rejected_upfront(shape: &Shape, magic: i64) -> bool {
    if magic < 21 || magic > shape.max_hexagon_sum() {
        return true;
    }
    match exact_hexagon_cover(shape) {
        Some(cover) => cover.len() as i64 * magic != shape.total() as i64,
        None => false,
    }
}

/// Linear identity `weight * M = sum(coef[v] * x[v])` from an integer
/// weighting of the hexagons. Over the still-open vertices the right-hand side
/// is bounded by pairing coefficients with unused values in (anti-)sorted order.
struct Identity {
    weight: i64,
    /// Distinct coefficients, ascending; always contains 0.
    levels: Vec<i64>,
}

impl Identity {
    fn coefficients(shape: &Shape, weights: &[i64]) -> Vec<i64> {
        let mut coef = vec![0i64; shape.vertex_count()];
        for (h, &w) in weights.iter().enumerate() {
            for &v in &shape.hexagons()[h] {
                coef[v] += w;
            }
        }
        coef
    }

    /// Distance of `weight * magic` from the nearer end of its feasible range
    /// with nothing assigned, relative to the range width. Negative means the
    /// identity alone rules `magic` out.
    fn root_slack(shape: &Shape, weights: &[i64], magic: i64) -> f64 {
        let mut coef = Identity::coefficients(shape, weights);
        coef.sort_unstable();
        let lo: i64 = coef.iter().rev().zip(1..).map(|(c, x)| c * x).sum();
        let hi: i64 = coef.iter().zip(1..).map(|(c, x)| c * x).sum();
        let rest = weights.iter().sum::<i64>() * magic;
        if hi == lo {
            return if rest == lo { f64::INFINITY } else { -1.0 };
        }
        (rest - lo).min(hi - rest) as f64 / (hi - lo) as f64
    }
}

/// Maximal sets of pairwise vertex-disjoint hexagons, at most `cap` of them.
fn maximal_disjoint_sets(shape: &Shape, cap: usize) -> Vec<Vec<usize>> {
    let h = shape.hexagon_count();
    let adjacent = |a: usize, b: usize| shape.centers()[a].distance(shape.centers()[b]) <= 1;
    fn grow(
        next: usize,
        h: usize,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        cap: usize,
        adjacent: &dyn Fn(usize, usize) -> bool,
    ) {
        if out.len() >= cap {
            return;
        }
        if next == h {
            let maximal = (0..h).all(|x| chosen.iter().any(|&c| adjacent(c, x)));
            if maximal {
                out.push(chosen.clone());
            }
            return;
        }
        if chosen.iter().all(|&c| !adjacent(c, next)) {
            chosen.push(next);
            grow(next + 1, h, chosen, out, cap, adjacent);
            chosen.pop();
        }
        grow(next + 1, h, chosen, out, cap, adjacent);
    }
    let mut out = Vec::new();
    grow(0, h, &mut Vec::new(), &mut out, cap, &adjacent);
    out
}

struct Relaxation {
    identities: Vec<Identity>,
    /// Per vertex: (identity, level index, coefficient) for non-zero coefficients.
    touches: Vec<Vec<(usize, usize, i64)>>,
}

impl Relaxation {
    const MAX_DISJOINT_SETS: usize = 128;
    const MIXED_IDENTITIES: usize = 32;

    /// Always uses all hexagons, all but one, and adjacent pairs. Adds the
    /// tightest (at the root, for `magic`) of the maximal disjoint sets and
    /// their sums and differences with the large sets.
    fn new(shape: &Shape, magic: i64) -> Self {
        let h = shape.hexagon_count();
        let indicator = |set: &[usize]| -> Vec<i64> {
            let mut w = vec![0; h];
            set.iter().for_each(|&x| w[x] = 1);
            w
        };
        let mut fixed: Vec<Vec<i64>> = Vec::new();
        if h > 1 {
            let mut large = vec![vec![1; h]];
            if h > 2 {
                large.extend((0..h).map(|skip| (0..h).map(|x| i64::from(x != skip)).collect()));
            }
            fixed.extend(large.iter().cloned());
            for a in 0..h {
                for b in a + 1..h {
                    if shape.centers()[a].distance(shape.centers()[b]) == 1 {
                        fixed.push(indicator(&[a, b]));
                    }
                }
            }
            let mut mixed: Vec<(f64, Vec<i64>)> = Vec::new();
            for set in maximal_disjoint_sets(shape, Self::MAX_DISJOINT_SETS) {
                let d = indicator(&set);
                if set.len() > 1 {
                    mixed.push((Identity::root_slack(shape, &d, magic), d.clone()));
                }
                for l in &large {
                    for sign in [1, -1] {
                        let w: Vec<i64> = l.iter().zip(&d).map(|(a, b)| a + sign * b).collect();
                        if w.iter().any(|&x| x != 0) {
                            mixed.push((Identity::root_slack(shape, &w, magic), w));
                        }
                    }
                }
            }
            mixed.sort_by(|a, b| a.0.total_cmp(&b.0));
            fixed.extend(mixed.into_iter().take(Self::MIXED_IDENTITIES).map(|(_, w)| w));
        }

        let mut identities = Vec::with_capacity(fixed.len());
        let mut touches = vec![Vec::new(); shape.vertex_count()];
        for (i, weights) in fixed.iter().enumerate() {
            let coef = Identity::coefficients(shape, weights);
            let mut levels: Vec<i64> = coef.iter().copied().chain([0]).collect();
            levels.sort_unstable();
            levels.dedup();
            for (v, &c) in coef.iter().enumerate() {
                if c != 0 {
                    let level = levels.binary_search(&c).expect("level present");
                    touches[v].push((i, level, c));
                }
            }
            identities.push(Identity { weight: weights.iter().sum(), levels });
        }
        Relaxation { identities, touches }
    }
}

/// Open-vertex counts per coefficient level and assigned weighted sum, per identity.
#[derive(Clone)]
struct RelaxState {
    counts: Vec<Vec<u32>>,
    assigned: Vec<i64>,
}

impl RelaxState {
    fn new(relax: &Relaxation) -> Self {
        let mut counts: Vec<Vec<u32>> = relax.identities.iter().map(|id| vec![0; id.levels.len()]).collect();
        for touches in &relax.touches {
            for &(i, level, _) in touches {
                counts[i][level] += 1;
            }
        }
        RelaxState { counts, assigned: vec![0; relax.identities.len()] }
    }
}

enum Stop {
    Found,
    Limit(LimitReason),
}

struct Search<'a> {
    shape: &'a Shape,
    n: usize,
    magic: i64,
    config: &'a SolverConfig,
    start: Instant,
    rng: ChaCha8Rng,
    values: Vec<u32>,
    used: Vec<bool>,
    hex_sum: Vec<i64>,
    hex_open: Vec<u8>,
    trail: Vec<usize>,
    stats: SearchStats,
    solutions: u64,
    first: Option<Vec<u32>>,
    stop: Option<Stop>,
    small: [i64; 7],
    large: [i64; 7],
    relax: &'a Relaxation,
    relax_state: RelaxState,
    /// Prefix sums of the unused values in ascending order.
    unused_prefix: Vec<i64>,
}

impl<'a> Search<'a> {
    fn new(shape: &'a Shape, magic: i64, config: &'a SolverConfig, relax: &'a Relaxation) -> Self {
        let n = shape.vertex_count();
        Search {
            shape,
            n,
            magic,
            config,
            start: Instant::now(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            values: vec![0; n],
            used: vec![false; n + 1],
            hex_sum: vec![0; shape.hexagon_count()],
            hex_open: vec![6; shape.hexagon_count()],
            trail: Vec::with_capacity(n),
            stats: SearchStats { seed: config.seed, ..Default::default() },
            solutions: 0,
            first: None,
            stop: None,
            small: [0; 7],
            large: [0; 7],
            relax,
            relax_state: RelaxState::new(relax),
            unused_prefix: Vec::with_capacity(n + 1),
        }
    }

    /// Places `x` on `v`; false if a hexagon closes off target.
    fn assign(&mut self, v: usize, x: u32) -> bool {
        self.values[v] = x;
        self.used[x as usize] = true;
        self.trail.push(v);
        for &(i, level, c) in &self.relax.touches[v] {
            self.relax_state.counts[i][level] -= 1;
            self.relax_state.assigned[i] += c * i64::from(x);
        }
        let mut ok = true;
        for &h in self.shape.hexagons_of(v) {
            self.hex_open[h] -= 1;
            self.hex_sum[h] += i64::from(x);
            if self.hex_open[h] == 0 && self.hex_sum[h] != self.magic {
                ok = false;
            }
        }
        ok
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let v = self.trail.pop().expect("trail above mark");
            let x = self.values[v];
            self.values[v] = 0;
            self.used[x as usize] = false;
            for &(i, level, c) in &self.relax.touches[v] {
                self.relax_state.counts[i][level] += 1;
                self.relax_state.assigned[i] -= c * i64::from(x);
            }
            for &h in self.shape.hexagons_of(v) {
                self.hex_open[h] += 1;
                self.hex_sum[h] -= i64::from(x);
            }
        }
    }

    fn propagate(&mut self) -> bool {
        loop {
            let Some(h) = (0..self.hex_open.len()).find(|&h| self.hex_open[h] == 1) else {
                return true;
            };
            let forced = self.magic - self.hex_sum[h];
            if forced < 1 || forced > self.n as i64 || self.used[forced as usize] {
                return false;
            }
            let v = self.shape.hexagons()[h]
                .into_iter()
                .find(|&v| self.values[v] == 0)
                .expect("open hexagon has an unassigned vertex");
            self.stats.forced_assignments += 1;
            if !self.assign(v, forced as u32) {
                return false;
            }
        }
    }

    /// Refreshes the sums of the k smallest and k largest unused values (k <= 6).
    fn refresh_extremes(&mut self) {
        let mut k = 0;
        for x in 1..=self.n {
            if k == 6 {
                break;
            }
            if !self.used[x] {
                self.small[k + 1] = self.small[k] + x as i64;
                k += 1;
            }
        }
        for j in k..6 {
            self.small[j + 1] = i64::MAX / 4;
        }
        k = 0;
        for x in (1..=self.n).rev() {
            if k == 6 {
                break;
            }
            if !self.used[x] {
                self.large[k + 1] = self.large[k] + x as i64;
                k += 1;
            }
        }
        for j in k..6 {
            self.large[j + 1] = i64::MIN / 4;
        }
    }

    fn sums_reachable(&self) -> bool {
        self.hex_open.iter().zip(&self.hex_sum).all(|(&k, &s)| {
            k == 0 || (s + self.small[k as usize] <= self.magic && self.magic <= s + self.large[k as usize])
        })
    }

    fn identities_hold(&mut self) -> bool {
        self.unused_prefix.clear();
        self.unused_prefix.push(0);
        let mut acc = 0;
        for x in 1..=self.n {
            if !self.used[x] {
                acc += x as i64;
                self.unused_prefix.push(acc);
            }
        }
        let open = self.unused_prefix.len() - 1;
        let prefix = &self.unused_prefix;
        for (i, id) in self.relax.identities.iter().enumerate() {
            let counts = &self.relax_state.counts[i];
            let zero = id.levels.binary_search(&0).expect("zero level");
            let tracked: u32 = counts.iter().sum();
            let level_count = |l: usize| if l == zero { open - tracked as usize } else { counts[l] as usize };
            let rest = id.weight * self.magic - self.relax_state.assigned[i];
            // largest coefficients take the largest values for the maximum
            let (mut lo, mut hi) = (0i64, 0i64);
            let (mut from_small, mut from_large) = (0usize, open);
            for l in (0..id.levels.len()).rev() {
                let k = level_count(l);
                let c = id.levels[l];
                lo += c * (prefix[from_small + k] - prefix[from_small]);
                hi += c * (prefix[from_large] - prefix[from_large - k]);
                from_small += k;
                from_large -= k;
            }
            if rest < lo || rest > hi {
                return false;
            }
        }
        true
    }

    fn choose_vertex(&self) -> usize {
        let mut best = usize::MAX;
        let mut best_key = (u8::MAX, 0u8);
        for v in 0..self.n {
            if self.values[v] != 0 {
                continue;
            }
            let open = self.shape.hexagons_of(v).iter().map(|&h| self.hex_open[h]).min().unwrap_or(u8::MAX);
            let key = (open, u8::MAX - self.shape.membership()[v]);
            if key < best_key {
                best_key = key;
                best = v;
            }
        }
        best
    }

    /// Values for `v` compatible with every hexagon around it.
    fn candidates(&mut self, v: usize) -> Vec<u32> {
        let mut lo = 1i64;
        let mut hi = self.n as i64;
        let mut pair_rests = [0i64; 3];
        let mut pairs = 0;
        for &h in self.shape.hexagons_of(v) {
            let k = self.hex_open[h] as usize;
            let rest = self.magic - self.hex_sum[h];
            lo = lo.max(rest - self.large[k - 1]);
            hi = hi.min(rest - self.small[k - 1]);
            if k == 2 {
                pair_rests[pairs] = rest;
                pairs += 1;
            }
        }
        let mut out: Vec<u32> = (lo.max(1)..=hi)
            .filter(|&x| {
                !self.used[x as usize]
                    && pair_rests[..pairs].iter().all(|&rest| {
                        let other = rest - x;
                        other >= 1 && other <= self.n as i64 && other != x && !self.used[other as usize]
                    })
            })
            .map(|x| x as u32)
            .collect();
        match self.config.value_order {
            ValueOrder::Ascending => {}
            ValueOrder::Descending => out.reverse(),
            ValueOrder::SeededShuffle => out.shuffle(&mut self.rng),
        }
        out
    }

    fn limit_hit(&mut self) -> Option<LimitReason> {
        if self.config.node_limit.is_some_and(|limit| self.stats.nodes_expanded >= limit) {
            return Some(LimitReason::NodeLimit);
        }
        if let Some(budget) = self.config.time_budget {
            if self.stats.nodes_expanded % 1024 == 0 && self.start.elapsed() >= budget {
                return Some(LimitReason::TimeBudget);
            }
        }
        None
    }

    fn record_solution(&mut self) -> bool {
        let assignment = Assignment::new(self.shape, self.values.clone());
        debug_assert_eq!(verify_solution(self.shape, &assignment), Ok(self.magic as u64));
        self.solutions += 1;
        match self.config.mode {
            SearchMode::FirstSolution => {
                self.first = Some(assignment.values);
                self.stop = Some(Stop::Found);
                true
            }
            SearchMode::CountAll(cap) => {
                if cap.is_some_and(|c| self.solutions >= c) {
                    self.stop = Some(Stop::Limit(LimitReason::CountCap));
                    true
                } else {
                    false
                }
            }
        }
    }

    /// Returns true when the whole search must stop.
    fn descend(&mut self) -> bool {
        if let Some(reason) = self.limit_hit() {
            self.stop = Some(Stop::Limit(reason));
            return true;
        }
        self.stats.nodes_expanded += 1;
        let mark = self.trail.len();
        if !self.propagate() {
            self.stats.prunes += 1;
            self.undo_to(mark);
            return false;
        }
        if self.trail.len() == self.n {
            let stop = self.record_solution();
            self.undo_to(mark);
            return stop;
        }
        self.refresh_extremes();
        if !self.sums_reachable() || !self.identities_hold() {
            self.stats.prunes += 1;
            self.undo_to(mark);
            return false;
        }
        let v = self.choose_vertex();
        for x in self.candidates(v) {
            let child = self.trail.len();
            if self.assign(v, x) {
                if self.descend() {
                    self.undo_to(mark);
                    return true;
                }
            } else {
                self.stats.prunes += 1;
            }
            self.undo_to(child);
        }
        self.undo_to(mark);
        false
    }

    fn run(&mut self) {
        if !rejected_upfront(self.shape, self.magic) {
            self.descend();
        }
        self.stats.elapsed = self.start.elapsed();
    }
}

/// Searches for one labelling of `shape` with magic constant `magic`.
pub fn solve_one(shape: &Shape, magic: i64, config: &SolverConfig) -> SearchOutcome {
    let config = SolverConfig { mode: SearchMode::FirstSolution, ..config.clone() };
    let relax = Relaxation::new(shape, magic);
    let mut search = Search::new(shape, magic, &config, &relax);
    search.run();
    match (search.stop, search.first) {
        (Some(Stop::Found), Some(values)) => SearchOutcome::Found(Assignment::new(shape, values), search.stats),
        (Some(Stop::Limit(reason)), _) => SearchOutcome::Inconclusive(search.stats, reason),
        _ => SearchOutcome::Unsolvable(search.stats),
    }
}

/// Counts every labelling with magic constant `magic` (no symmetry reduction).
pub fn count_solutions(shape: &Shape, magic: i64, config: &SolverConfig) -> CountOutcome {
    let mode = match config.mode {
        SearchMode::CountAll(cap) => SearchMode::CountAll(cap),
        SearchMode::FirstSolution => SearchMode::CountAll(None),
    };
    let config = SolverConfig { mode, ..config.clone() };
    let relax = Relaxation::new(shape, magic);
    let mut search = Search::new(shape, magic, &config, &relax);
    search.run();
    match search.stop {
        Some(Stop::Limit(reason)) => CountOutcome::Inconclusive { at_least: search.solutions, stats: search.stats, reason },
        _ => CountOutcome::Exact(search.solutions, search.stats),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepStatus {
    Found,
    /// Obtained by complementing the solution found for `6n + 6 - M`.
    FoundComplement,
    Unsolvable,
    Inconclusive(LimitReason),
}

impl SweepStatus {
    pub fn is_found(self) -> bool {
        matches!(self, SweepStatus::Found | SweepStatus::FoundComplement)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepEntry {
    pub magic: i64,
    pub status: SweepStatus,
    pub assignment: Option<Assignment>,
    pub stats: SearchStats,
}

fn entry_from(magic: i64, outcome: SearchOutcome) -> SweepEntry {
    match outcome {
        SearchOutcome::Found(a, stats) => SweepEntry { magic, status: SweepStatus::Found, assignment: Some(a), stats },
        SearchOutcome::Unsolvable(stats) => SweepEntry { magic, status: SweepStatus::Unsolvable, assignment: None, stats },
        SearchOutcome::Inconclusive(stats, reason) => {
            SweepEntry { magic, status: SweepStatus::Inconclusive(reason), assignment: None, stats }
        }
    }
}

/// Runs [`solve_one`] for every magic constant in `range` (default: the shape's
/// bounds). Constants whose complement was already found are filled in by
/// complementing that solution instead of searching again.
///
/// Per-constant runs execute on the current rayon pool; results are keyed by
/// the constant, so completion order does not matter.
pub fn sweep(shape: &Shape, range: Option<(i64, i64)>, config: &SolverConfig) -> Result<BTreeMap<i64, SweepEntry>, BoundsError> {
    let (lo, hi) = match range {
        Some(r) => r,
        None => {
            let (b, _) = bounds_for(shape.family(), shape.order())?;
            (b.lower, b.upper)
        }
    };
    let n = shape.vertex_count();
    let mirrored = |m: i64| {
        let c = complement_magic(m, n);
        c < m && (lo..=hi).contains(&c)
    };
    let run = |m: i64| entry_from(m, solve_one(shape, m, config));

    let first: Vec<i64> = (lo..=hi).filter(|&m| !mirrored(m)).collect();
    let mut results: BTreeMap<i64, SweepEntry> = first.par_iter().map(|&m| (m, run(m))).collect();

    let mut pending = Vec::new();
    for m in (lo..=hi).filter(|&m| mirrored(m)) {
        let source = &results[&complement_magic(m, n)];
        match &source.assignment {
            Some(a) => {
                let image = complement_solution(a).expect("found assignments are permutations");
                debug_assert_eq!(verify_solution(shape, &image), Ok(m as u64));
                let stats = SearchStats { seed: config.seed, ..Default::default() };
                results.insert(m, SweepEntry { magic: m, status: SweepStatus::FoundComplement, assignment: Some(image), stats });
            }
            None => pending.push(m),
        }
    }
    let rest: Vec<(i64, SweepEntry)> = pending.par_iter().map(|&m| (m, run(m))).collect();
    results.extend(rest);
    Ok(results)
}
