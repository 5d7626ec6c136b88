//! Exact maximum clique search on class-union graphs.
//!
//! Every clique of a Cayley graph can be translated to one through the
//! identity, so the search runs inside the connection set. Two further
//! vertices are pinned to orbit representatives: the second under the
//! automorphisms fixing the identity, the third under the maps fixing the
//! pinned pair setwise. Each remaining subproblem is solved by a bitset
//! branch and bound with greedy-coloring bounds.

use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::graphs::{class_label, graph_from_descriptor, ClassKind, ClassUnionGraph, GraphDescriptor};
use crate::group::{Automorphism, Elem, Group};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub max_time: Option<Duration>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: Some(1_000_000_000),
            max_time: Some(Duration::from_secs(30 * 60)),
        }
    }
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget { max_nodes: None, max_time: None }
    }

    /// Applies `DIAGSYNC_BUDGET_SECS` and `DIAGSYNC_BUDGET_NODES` if set.
    pub fn with_env_overrides(mut self) -> Self {
        if let Some(s) = std::env::var("DIAGSYNC_BUDGET_SECS").ok().and_then(|v| v.parse::<u64>().ok()) {
            self.max_time = Some(Duration::from_secs(s));
        }
        if let Some(n) = std::env::var("DIAGSYNC_BUDGET_NODES").ok().and_then(|v| v.parse::<u64>().ok()) {
            self.max_nodes = Some(n);
        }
        self
    }
}

#[derive(Clone, Debug, Default)]
pub struct SearchOptions {
    pub budget: Budget,
    /// Worker threads; `Some(1)` gives reproducible node counts.
    pub threads: Option<usize>,
    /// Disable orbit pinning beyond the identity (for cross-checks).
    pub no_symmetry: bool,
    /// Seed for randomized heuristics; searches themselves are deterministic.
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    Clique,
    Coclique,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CliqueCertificate {
    pub graph: GraphDescriptor,
    pub objective: Objective,
    pub vertices: Vec<Elem>,
    pub size: usize,
    /// True iff the search proved `size` optimal.
    pub exhaustive: bool,
    pub upper_bound: usize,
    pub elapsed_ms: u64,
    pub nodes_explored: u64,
}

pub type CocliqueCertificate = CliqueCertificate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecisionOutcome {
    Found,
    None,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecisionCertificate {
    pub graph: GraphDescriptor,
    pub objective: Objective,
    pub target: usize,
    /// Required unordered pair counts per relation label, if prescribed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair_counts: Option<Vec<(String, u64)>>,
    pub outcome: DecisionOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Elem>>,
    pub elapsed_ms: u64,
    pub nodes_explored: u64,
}

/// Prescribed number of unordered pairs of the clique in each fused class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCounts {
    pub by_fused_class: Vec<u64>,
}

impl PairCounts {
    /// From an integral inner distribution `a` over fused classes of a set
    /// of size `k`: `k a_i / 2` pairs in class `i`.
    pub fn from_distribution(a: &[crate::linalg::Rational]) -> Option<PairCounts> {
        let k: crate::linalg::Rational = a.iter().sum();
        let mut out = Vec::with_capacity(a.len());
        for (i, ai) in a.iter().enumerate() {
            let c = if i == 0 { crate::linalg::rat(0) } else { &k * ai / crate::linalg::rat(2) };
            out.push(crate::linalg::to_i64(&c)? as u64);
        }
        Some(PairCounts { by_fused_class: out })
    }
}

struct Shared {
    best: AtomicUsize,
    nodes: AtomicU64,
    stop: AtomicBool,
    aborted: AtomicBool,
    start: Instant,
    budget: Budget,
    witness: Mutex<Vec<Elem>>,
    open_bound: AtomicUsize,
    stop_at: Option<usize>,
}

impl Shared {
    fn offer(&self, clique: &[Elem]) {
        let mut w = self.witness.lock().expect("witness lock");
        if clique.len() > w.len() {
            *w = clique.to_vec();
            self.best.fetch_max(clique.len(), Ordering::SeqCst);
            if self.stop_at.is_some_and(|k| clique.len() >= k) {
                self.stop.store(true, Ordering::SeqCst);
            }
        }
    }

    fn over_budget(&self) -> bool {
        let nodes = self.nodes.load(Ordering::Relaxed);
        let over = self.budget.max_nodes.is_some_and(|m| nodes > m)
            || self.budget.max_time.is_some_and(|t| self.start.elapsed() > t);
        if over {
            self.aborted.store(true, Ordering::SeqCst);
            self.stop.store(true, Ordering::SeqCst);
        }
        over
    }
}

/// Adjacency of a Cayley graph as packed rows.
pub(crate) struct Adjacency {
    words: usize,
    rows: Vec<u64>,
}

impl Adjacency {
    pub(crate) fn new(group: &Group, conn: &[Elem]) -> Adjacency {
        let n = group.order();
        let words = n.div_ceil(64);
        let mut rows = vec![0u64; n * words];
        for u in group.elements() {
            for &s in conn {
                let v = group.mul(s, u) as usize;
                rows[u as usize * words + (v >> 6)] |= 1 << (v & 63);
            }
        }
        Adjacency { words, rows }
    }

    #[inline]
    pub(crate) fn has(&self, u: Elem, v: Elem) -> bool {
        self.rows[u as usize * self.words + (v as usize >> 6)] >> (v & 63) & 1 == 1
    }
}

pub(crate) struct Limits {
    /// Fused class of each element.
    class_of: Vec<u8>,
    limits: Vec<u64>,
}

/// Pinned vertices plus the vertices that may extend them.
pub(crate) struct Subproblem {
    pub(crate) pinned: Vec<Elem>,
    pub(crate) candidates: Vec<Elem>,
}

/// A graph map fixing the identity, or the pair swap `t -> s t^-1`.
#[derive(Clone, Copy)]
enum Symmetry {
    Aut(Automorphism),
    Swap(Elem),
}

fn apply_symmetry(g: &Group, m: &Symmetry, t: Elem) -> Elem {
    match m {
        Symmetry::Aut(a) => g.apply(a, t),
        Symmetry::Swap(s) => g.div(*s, t),
    }
}

/// Orbits of the group generated by `maps` on `set`, each sorted, ordered by
/// their smallest element.
fn orbits(g: &Group, maps: &[Symmetry], set: &[Elem]) -> Vec<Vec<Elem>> {
    let n = g.order();
    let mut pos = vec![usize::MAX; n];
    for (i, &x) in set.iter().enumerate() {
        pos[x as usize] = i;
    }
    let mut parent: Vec<usize> = (0..set.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for m in maps {
        for (i, &x) in set.iter().enumerate() {
            let y = apply_symmetry(g, m, x);
            let j = pos[y as usize];
            debug_assert!(j != usize::MAX, "map does not preserve the set");
            if j == usize::MAX {
                continue;
            }
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<Elem>> = Default::default();
    for (i, &x) in set.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(x);
    }
    let mut out: Vec<Vec<Elem>> = groups.into_values().collect();
    for o in &mut out {
        o.sort_unstable();
    }
    out.sort_by_key(|o| o[0]);
    out
}

/// Automorphisms of `T` (with inversion) mapping each of `sets` onto itself,
/// and each fused class onto itself if `fused`. Every set must be a union of
/// conjugacy classes.
pub(crate) fn invariant_automorphisms(group: &Group, sets: &[&Bitset], fused: bool) -> Vec<Automorphism> {
    let reps: Vec<Elem> = group.classes().iter().skip(1).map(|c| c.representative).collect();
    group
        .automorphisms(true)
        .into_iter()
        .filter(|a| {
            reps.iter().all(|&r| {
                let x = group.apply(a, r);
                (!fused || group.fusion_of(x) == group.fusion_of(r))
                    && sets.iter().all(|s| s.contains(x as usize) == s.contains(r as usize))
            })
        })
        .collect()
}

/// Maps generating the same group as `auts`: the small generating set when
/// `auts` is the whole automorphism group, else `auts` itself.
fn generating_maps(g: &Group, auts: &[Automorphism]) -> Vec<Symmetry> {
    let q = g.q() as usize;
    let full = q * (q * q - 1) * g.field().degree() as usize * 2;
    if auts.len() == full {
        g.automorphism_generators().into_iter().map(Symmetry::Aut).collect()
    } else {
        auts.iter().map(|&a| Symmetry::Aut(a)).collect()
    }
}

fn graph_automorphisms(graph: &ClassUnionGraph) -> Vec<Automorphism> {
    invariant_automorphisms(graph.group(), &[graph.connection_set()], true)
}

/// Splits the search for cliques of the Cayley graph on `conn` into
/// subproblems whose pinned prefixes are orbit representatives under `auts`
/// (which must fix the identity and preserve `conn`) and pair swaps.
pub(crate) fn build_subproblems(group: &Group, conn: &[Elem], adj: &Adjacency, auts: &[Automorphism], symmetric: bool) -> Vec<Subproblem> {
    let g = group;
    let one = g.identity();
    if conn.is_empty() {
        return vec![Subproblem { pinned: vec![one], candidates: vec![] }];
    }
    if !symmetric {
        return vec![Subproblem { pinned: vec![one], candidates: conn.to_vec() }];
    }
    let first = orbits(g, &generating_maps(g, auts), conn);
    let mut excluded = Bitset::new(g.order());
    let mut subs = Vec::new();
    for orbit in &first {
        let s = orbit[0];
        let common: Vec<Elem> = conn.iter().copied().filter(|&t| adj.has(s, t)).collect();
        if common.is_empty() {
            subs.push(Subproblem { pinned: vec![one, s], candidates: vec![] });
        } else {
            let mut maps: Vec<Symmetry> = auts
                .iter()
                .filter(|a| g.apply(a, s) == s)
                .map(|&a| Symmetry::Aut(a))
                .collect();
            maps.push(Symmetry::Swap(s));
            let second = orbits(g, &maps, &common);
            let mut seen = Bitset::new(g.order());
            for r in &second {
                let t = r[0];
                if !excluded.contains(t as usize) {
                    let candidates = common
                        .iter()
                        .copied()
                        .filter(|&x| {
                            adj.has(t, x) && !seen.contains(x as usize) && !excluded.contains(x as usize)
                        })
                        .collect();
                    subs.push(Subproblem { pinned: vec![one, s, t], candidates });
                }
                for &x in r {
                    seen.insert(x as usize);
                }
            }
        }
        for &x in orbit {
            excluded.insert(x as usize);
        }
    }
    subs
}

/// Branch and bound over one subproblem.
struct Local<'a> {
    w: usize,
    adj: Vec<u64>,
    verts: Vec<Elem>,
    pinned: &'a [Elem],
    shared: &'a Shared,
    cur: Vec<usize>,
    nodes: u64,
    // pair-count bookkeeping
    limits: Option<&'a Limits>,
    rel: Vec<u8>,
    counts: Vec<u64>,
}

impl<'a> Local<'a> {
    fn new(
        group: &Group,
        adj: &Adjacency,
        sub: &'a Subproblem,
        shared: &'a Shared,
        limits: Option<&'a Limits>,
    ) -> Local<'a> {
        let order = degeneracy_order(adj, &sub.candidates);
        let verts: Vec<Elem> = order.iter().map(|&i| sub.candidates[i]).collect();
        let m = verts.len();
        let w = m.div_ceil(64).max(1);
        let mut a = vec![0u64; m * w];
        for i in 0..m {
            for j in 0..m {
                if i != j && adj.has(verts[i], verts[j]) {
                    a[i * w + (j >> 6)] |= 1 << (j & 63);
                }
            }
        }
        let (rel, counts) = match limits {
            Some(l) => {
                let mut rel = vec![0u8; m * (m + sub.pinned.len())];
                let stride = m + sub.pinned.len();
                for i in 0..m {
                    for j in 0..m {
                        rel[i * stride + j] = l.class_of[group.div(verts[i], verts[j]) as usize];
                    }
                    for (k, &p) in sub.pinned.iter().enumerate() {
                        rel[i * stride + m + k] = l.class_of[group.div(verts[i], p) as usize];
                    }
                }
                let mut counts = vec![0u64; l.limits.len()];
                for (x, &p) in sub.pinned.iter().enumerate() {
                    for &r in &sub.pinned[x + 1..] {
                        counts[l.class_of[group.div(p, r) as usize] as usize] += 1;
                    }
                }
                (rel, counts)
            }
            None => (Vec::new(), Vec::new()),
        };
        Local {
            w,
            adj: a,
            verts,
            pinned: &sub.pinned,
            shared,
            cur: Vec::new(),
            nodes: 0,
            limits,
            rel,
            counts,
        }
    }

    fn pinned_ok(&self) -> bool {
        match self.limits {
            Some(l) => self.counts.iter().zip(&l.limits).all(|(c, m)| c <= m),
            None => true,
        }
    }

    fn full_set(&self) -> Vec<u64> {
        let m = self.verts.len();
        let mut p = vec![0u64; self.w];
        for i in 0..m {
            p[i >> 6] |= 1 << (i & 63);
        }
        p
    }

    /// Greedy sequential coloring; returns `(vertex, color)` for colors at
    /// least `kmin`, in nondecreasing color order, plus the color count.
    fn color(&self, p: &[u64], kmin: usize) -> (Vec<(usize, usize)>, usize) {
        let w = self.w;
        let mut u = p.to_vec();
        let mut q = vec![0u64; w];
        let mut out = Vec::new();
        let mut k = 0;
        while u.iter().any(|&x| x != 0) {
            k += 1;
            q.copy_from_slice(&u);
            let mut wi = 0;
            while wi < w {
                if q[wi] == 0 {
                    wi += 1;
                    continue;
                }
                let v = wi * 64 + q[wi].trailing_zeros() as usize;
                u[wi] &= !(1 << (v & 63));
                q[wi] &= !(1 << (v & 63));
                let row = &self.adj[v * w..(v + 1) * w];
                for (qq, r) in q.iter_mut().zip(row).skip(wi) {
                    *qq &= !r;
                }
                if k >= kmin {
                    out.push((v, k));
                }
            }
        }
        (out, k)
    }

    fn record(&self) {
        let mut c: Vec<Elem> = self.pinned.to_vec();
        c.extend(self.cur.iter().map(|&i| self.verts[i]));
        c.sort_unstable();
        self.shared.offer(&c);
    }

    /// Adds the pair counts of `v` against the current clique; false (and
    /// no change) if a limit would be exceeded.
    fn push_counts(&mut self, v: usize) -> bool {
        let Some(l) = self.limits else { return true };
        let m = self.verts.len();
        let stride = m + self.pinned.len();
        let mut delta = vec![0u64; self.counts.len()];
        for &u in &self.cur {
            delta[self.rel[v * stride + u] as usize] += 1;
        }
        for k in 0..self.pinned.len() {
            delta[self.rel[v * stride + m + k] as usize] += 1;
        }
        if self
            .counts
            .iter()
            .zip(&delta)
            .zip(&l.limits)
            .any(|((c, d), lim)| c + d > *lim)
        {
            return false;
        }
        for (c, d) in self.counts.iter_mut().zip(&delta) {
            *c += d;
        }
        true
    }

    fn pop_counts(&mut self, v: usize) {
        if self.limits.is_none() {
            return;
        }
        let m = self.verts.len();
        let stride = m + self.pinned.len();
        for &u in &self.cur {
            self.counts[self.rel[v * stride + u] as usize] -= 1;
        }
        for k in 0..self.pinned.len() {
            self.counts[self.rel[v * stride + m + k] as usize] -= 1;
        }
    }

    fn expand(&mut self, p: &mut [u64]) {
        self.nodes += 1;
        if self.nodes & 0x3ff == 0 {
            self.shared.nodes.fetch_add(0x400, Ordering::Relaxed);
            self.shared.over_budget();
        }
        if self.shared.stop.load(Ordering::Relaxed) {
            return;
        }
        let size = self.pinned.len() + self.cur.len();
        let best = self.shared.best.load(Ordering::Relaxed);
        let kmin = (best + 1).saturating_sub(size).max(1);
        let (order, _) = self.color(p, kmin);
        for &(v, c) in order.iter().rev() {
            if size + c <= self.shared.best.load(Ordering::Relaxed) || self.shared.stop.load(Ordering::Relaxed) {
                return;
            }
            if self.push_counts(v) {
                let row = &self.adj[v * self.w..(v + 1) * self.w];
                let mut np: Vec<u64> = p.iter().zip(row).map(|(a, b)| a & b).collect();
                self.cur.push(v);
                if np.iter().all(|&x| x == 0) {
                    if size + 1 > self.shared.best.load(Ordering::Relaxed) {
                        self.record();
                    }
                } else {
                    self.expand(&mut np);
                }
                self.cur.pop();
                self.pop_counts(v);
            }
            p[v >> 6] &= !(1 << (v & 63));
        }
    }

    /// Solves the subproblem; returns its coloring bound.
    fn run(&mut self) -> usize {
        if !self.pinned_ok() {
            return 0;
        }
        let mut p = self.full_set();
        let bound = self.pinned.len() + if self.verts.is_empty() { 0 } else { self.color(&p, 1).1 };
        if self.shared.best.load(Ordering::Relaxed) < self.pinned.len() {
            self.record();
        }
        if !self.verts.is_empty() {
            self.expand(&mut p);
        }
        self.shared.nodes.fetch_add(self.nodes & 0x3ff, Ordering::Relaxed);
        bound
    }
}

/// Vertex order: repeatedly remove a minimum-degree vertex (ties by index)
/// and place it last.
fn degeneracy_order(adj: &Adjacency, verts: &[Elem]) -> Vec<usize> {
    let m = verts.len();
    let mut deg: Vec<usize> = (0..m)
        .map(|i| (0..m).filter(|&j| j != i && adj.has(verts[i], verts[j])).count())
        .collect();
    let mut removed = vec![false; m];
    let mut order = vec![0; m];
    for slot in (0..m).rev() {
        let v = (0..m)
            .filter(|&i| !removed[i])
            .min_by_key(|&i| (deg[i], i))
            .expect("vertex left");
        removed[v] = true;
        order[slot] = v;
        for j in 0..m {
            if !removed[j] && adj.has(verts[v], verts[j]) {
                deg[j] -= 1;
            }
        }
    }
    order
}

pub(crate) struct RunOutcome {
    pub(crate) witness: Vec<Elem>,
    pub(crate) exhaustive: bool,
    pub(crate) upper_bound: usize,
    pub(crate) nodes: u64,
    pub(crate) elapsed: Duration,
}

/// Clique search in the Cayley graph on `conn`, pinning under `auts`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_cayley_search(
    g: &Group,
    conn: &[Elem],
    auts: &[Automorphism],
    opts: &SearchOptions,
    initial: Vec<Elem>,
    stop_at: Option<usize>,
    floor: usize,
    limits: Option<&Limits>,
) -> RunOutcome {
    let adj = Adjacency::new(g, conn);
    let subs = build_subproblems(g, conn, &adj, auts, !opts.no_symmetry);
    let shared = Shared {
        best: AtomicUsize::new(initial.len().max(floor)),
        nodes: AtomicU64::new(0),
        stop: AtomicBool::new(false),
        aborted: AtomicBool::new(false),
        start: Instant::now(),
        budget: opts.budget,
        witness: Mutex::new(initial),
        open_bound: AtomicUsize::new(0),
        stop_at,
    };
    let work = |sub: &Subproblem| {
        if shared.stop.load(Ordering::Relaxed) {
            shared.open_bound.fetch_max(sub.pinned.len() + sub.candidates.len(), Ordering::Relaxed);
            return;
        }
        let mut local = Local::new(g, &adj, sub, &shared, limits);
        let bound = local.run();
        if std::env::var_os("DIAGSYNC_TRACE").is_some() {
            eprintln!(
                "sub pinned={:?} cands={} bound={} nodes={} best={} t={:?}",
                sub.pinned,
                sub.candidates.len(),
                bound,
                local.nodes,
                shared.best.load(Ordering::Relaxed),
                shared.start.elapsed()
            );
        }
        if shared.aborted.load(Ordering::Relaxed) {
            shared.open_bound.fetch_max(bound, Ordering::Relaxed);
        }
    };
    match opts.threads {
        Some(1) => subs.iter().for_each(work),
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| subs.par_iter().for_each(work)),
            Err(_) => subs.iter().for_each(work),
        },
        None => subs.par_iter().for_each(work),
    }
    let witness = shared.witness.into_inner().expect("witness lock");
    let aborted = shared.aborted.load(Ordering::SeqCst);
    let best = witness.len();
    RunOutcome {
        exhaustive: !aborted,
        upper_bound: if aborted { shared.open_bound.load(Ordering::SeqCst).max(best) } else { best },
        witness,
        nodes: shared.nodes.load(Ordering::SeqCst),
        elapsed: shared.start.elapsed(),
    }
}

/// Largest subgroup whose nonidentity elements all lie in the connection
/// set, among subgroups generated by one orbit representative and at most
/// one further connection-set element.
pub fn subgroup_clique(graph: &ClassUnionGraph) -> Vec<Elem> {
    let g = graph.group();
    let conn = graph.connection_list();
    if conn.is_empty() {
        return vec![g.identity()];
    }
    let mut allowed = graph.connection_set().clone();
    allowed.insert(g.identity() as usize);
    let limit = conn.len() + 1;
    let auts = generating_maps(g, &graph_automorphisms(graph));
    let reps: Vec<Elem> = orbits(g, &auts, conn).iter().map(|o| o[0]).collect();
    let mut best = Bitset::from_indices(g.order(), [g.identity() as usize]);
    for &s in &reps {
        if let Some(h) = g.generate_within(&[s], &allowed, limit) {
            if h.count() > best.count() {
                best = h;
            }
        }
        for &t in conn {
            if let Some(h) = g.generate_within(&[s, t], &allowed, limit) {
                if h.count() > best.count() {
                    best = h;
                }
            }
        }
    }
    best.iter().map(|x| x as Elem).collect()
}

fn run_search(
    graph: &ClassUnionGraph,
    opts: &SearchOptions,
    initial: Vec<Elem>,
    stop_at: Option<usize>,
    floor: usize,
    limits: Option<&Limits>,
) -> RunOutcome {
    let auts = if opts.no_symmetry { Vec::new() } else { graph_automorphisms(graph) };
    run_cayley_search(graph.group(), graph.connection_list(), &auts, opts, initial, stop_at, floor, limits)
}

fn certificate(graph: &ClassUnionGraph, objective: Objective, out: RunOutcome, descriptor: GraphDescriptor) -> CliqueCertificate {
    let _ = graph;
    CliqueCertificate {
        graph: descriptor,
        objective,
        size: out.witness.len(),
        vertices: out.witness,
        exhaustive: out.exhaustive,
        upper_bound: out.upper_bound,
        elapsed_ms: out.elapsed.as_millis() as u64,
        nodes_explored: out.nodes,
    }
}

pub fn max_clique(graph: &ClassUnionGraph, opts: &SearchOptions) -> Result<CliqueCertificate> {
    let seed = subgroup_clique(graph);
    let out = run_search(graph, opts, seed, None, 0, None);
    let cert = certificate(graph, Objective::Clique, out, graph.descriptor());
    verify_certificate(graph.group(), &cert)?;
    Ok(cert)
}

/// Maximum coclique via the complementary class-union graph.
pub fn max_coclique(graph: &ClassUnionGraph, opts: &SearchOptions) -> Result<CocliqueCertificate> {
    let comp = graph.complement()?;
    let seed = subgroup_clique(&comp);
    let out = run_search(&comp, opts, seed, None, 0, None);
    let cert = certificate(graph, Objective::Coclique, out, graph.descriptor());
    verify_certificate(graph.group(), &cert)?;
    Ok(cert)
}

/// Decides whether a clique (or coclique) of size `k` exists, optionally
/// with prescribed pair counts per fused class.
pub fn find_clique_of_size(
    graph: &ClassUnionGraph,
    objective: Objective,
    k: usize,
    pairs: Option<&PairCounts>,
    opts: &SearchOptions,
) -> Result<DecisionCertificate> {
    let g = graph.group();
    if k == 0 || k > g.order() {
        return Err(Error::Degenerate(format!("clique size {k} out of range")));
    }
    let target_graph = match objective {
        Objective::Clique => graph.clone(),
        Objective::Coclique => graph.complement()?,
    };
    let limits = pairs.map(|p| Limits {
        class_of: g.elements().map(|t| g.fusion_of(t) as u8).collect(),
        limits: p.by_fused_class.clone(),
    });
    let seed = subgroup_clique(&target_graph);
    let seed_ok = |c: &[Elem]| -> bool {
        c.len() == k
            && limits.as_ref().is_none_or(|l| {
                let mut counts = vec![0u64; l.limits.len()];
                for (i, &u) in c.iter().enumerate() {
                    for &v in &c[i + 1..] {
                        counts[l.class_of[g.div(u, v) as usize] as usize] += 1;
                    }
                }
                counts == l.limits
            })
    };
    let start = Instant::now();
    let (outcome, vertices, nodes) = if seed_ok(&seed) {
        (DecisionOutcome::Found, Some(seed), 0)
    } else {
        let out = run_search(&target_graph, opts, Vec::new(), Some(k), k - 1, limits.as_ref());
        if out.witness.len() >= k {
            let mut w = out.witness;
            w.truncate(k);
            (DecisionOutcome::Found, Some(w), out.nodes)
        } else if out.exhaustive {
            (DecisionOutcome::None, None, out.nodes)
        } else {
            (DecisionOutcome::Unknown, None, out.nodes)
        }
    };
    let labels = g.fusion_classes().iter().map(|f| f.label.clone());
    let cert = DecisionCertificate {
        graph: graph.descriptor(),
        objective,
        target: k,
        pair_counts: pairs.map(|p| labels.zip(p.by_fused_class.iter().copied()).collect()),
        outcome,
        vertices,
        elapsed_ms: start.elapsed().as_millis() as u64,
        nodes_explored: nodes,
    };
    if let Some(v) = &cert.vertices {
        check_set(g, &cert.graph, objective, v)?;
    }
    Ok(cert)
}

/// Pairwise check of `vertices` against the descriptor's class labels,
/// written independently of [`ClassUnionGraph`].
pub fn check_set(group: &Group, d: &GraphDescriptor, objective: Objective, vertices: &[Elem]) -> Result<()> {
    if d.q != group.q() {
        return Err(Error::CertificateRejected("field order mismatch".into()));
    }
    if vertices.is_empty() {
        return Err(Error::EmptySet);
    }
    if vertices.windows(2).any(|w| w[0] >= w[1]) || *vertices.last().expect("nonempty") as usize >= group.order() {
        return Err(Error::CertificateRejected("vertices not sorted, distinct and in range".into()));
    }
    for (i, &u) in vertices.iter().enumerate() {
        for &v in &vertices[i + 1..] {
            let x = group.mul(u, group.inv(v));
            let label = match d.kind {
                ClassKind::Fused => class_label(group, ClassKind::Fused, group.fusion_of(x)),
                ClassKind::Unfused => class_label(group, ClassKind::Unfused, group.class_of(x)),
            };
            let adjacent = d.classes.iter().any(|c| c == label);
            let ok = match objective {
                Objective::Clique => adjacent,
                Objective::Coclique => !adjacent,
            };
            if !ok {
                return Err(Error::NotAClique(format!(
                    "elements {u} and {v} differ by class {label}, violating the {objective:?} condition"
                )));
            }
        }
    }
    Ok(())
}

/// Independent re-verification of a certificate's witness and bookkeeping.
pub fn verify_certificate(group: &Group, cert: &CliqueCertificate) -> Result<()> {
    graph_from_descriptor(group, &cert.graph)?;
    if cert.size != cert.vertices.len() {
        return Err(Error::CertificateRejected("size does not match vertex count".into()));
    }
    if cert.upper_bound < cert.size || (cert.exhaustive && cert.upper_bound != cert.size) {
        return Err(Error::CertificateRejected("inconsistent upper bound".into()));
    }
    check_set(group, &cert.graph, cert.objective, &cert.vertices)
}
