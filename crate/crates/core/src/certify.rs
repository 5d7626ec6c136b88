//! Coclique upper bounds from systems of clique translates.
//!
//! A coclique meets every clique in at most one vertex, so the rows of a
//! translate system give a set-packing relaxation of the coclique problem.
//! When `|S||C| = |Ω|` the coclique must meet every translate exactly once,
//! which turns the question into an exact hitting problem.

use std::collections::{BTreeSet, HashSet};
use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::graphs::{ClassUnionGraph, GraphDescriptor};
use crate::group::{Elem, Group};
use crate::search::{build_subproblems, invariant_automorphisms, run_cayley_search, Adjacency, Budget, SearchOptions};

/// Which maps generate the images of the base clique.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowGenerators {
    /// `t -> x^-1 t y`.
    pub translations: bool,
    /// `t -> t^-1`.
    pub inversion: bool,
    /// Field and diagonal outer automorphisms.
    pub automorphisms: bool,
}

impl Default for RowGenerators {
    fn default() -> Self {
        RowGenerators { translations: true, inversion: true, automorphisms: true }
    }
}

impl RowGenerators {
    pub fn none() -> Self {
        RowGenerators { translations: false, inversion: false, automorphisms: false }
    }

    fn describe(&self) -> String {
        let mut parts = Vec::new();
        if self.translations {
            parts.push("two-sided translations");
        }
        if self.inversion {
            parts.push("inversion");
        }
        if self.automorphisms {
            parts.push("field and diagonal automorphisms");
        }
        if parts.is_empty() {
            "identity".into()
        } else {
            parts.join(", ")
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TranslateRowSystem {
    pub graph: GraphDescriptor,
    pub base_clique: Vec<Elem>,
    pub rows: Vec<Vec<Elem>>,
    pub generator_description: String,
    /// Rows are closed under right translation, so sharing a row is a
    /// Cayley relation.
    pub translation_closed: bool,
}

pub fn generate_translate_rows(graph: &ClassUnionGraph, clique: &[Elem]) -> Result<TranslateRowSystem> {
    generate_rows_with(graph, clique, RowGenerators::default())
}

pub fn generate_rows_with(graph: &ClassUnionGraph, clique: &[Elem], gens: RowGenerators) -> Result<TranslateRowSystem> {
    let g = graph.group();
    let mut base = clique.to_vec();
    base.sort_unstable();
    base.dedup();
    if base.is_empty() {
        return Err(Error::EmptySet);
    }
    if !graph.is_clique(&base) {
        return Err(Error::NotAClique("base of the row system".into()));
    }
    let mut perms: Vec<Vec<Elem>> = Vec::new();
    if gens.translations {
        for x in g.generators() {
            perms.push(g.elements().map(|t| g.mul(x, t)).collect());
            perms.push(g.elements().map(|t| g.mul(t, x)).collect());
        }
    }
    if gens.inversion {
        perms.push(g.elements().map(|t| g.inv(t)).collect());
    }
    if gens.automorphisms {
        for a in g.automorphism_generators().iter().filter(|a| !a.invert) {
            perms.push(g.automorphism_permutation(a));
        }
    }
    let mut seen: HashSet<Vec<Elem>> = HashSet::new();
    let mut rows = vec![base.clone()];
    seen.insert(base.clone());
    let mut i = 0;
    while i < rows.len() {
        for p in &perms {
            let mut img: Vec<Elem> = rows[i].iter().map(|&t| p[t as usize]).collect();
            img.sort_unstable();
            if seen.insert(img.clone()) {
                rows.push(img);
            }
        }
        i += 1;
    }
    rows.sort();
    for r in &rows {
        if !graph.is_clique(r) {
            return Err(Error::NotAClique("generated row".into()));
        }
    }
    Ok(TranslateRowSystem {
        graph: graph.descriptor(),
        base_clique: base,
        rows,
        generator_description: gens.describe(),
        translation_closed: gens.translations,
    })
}

impl TranslateRowSystem {
    /// Number of rows through each element, if constant.
    pub fn rows_per_variable(&self, variables: usize) -> Option<usize> {
        let mut count = vec![0usize; variables];
        for r in &self.rows {
            for &t in r {
                count[t as usize] += 1;
            }
        }
        let r = count[0];
        count.iter().all(|&c| c == r).then_some(r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Sense {
    AtMostOne,
    ExactlyOne,
}

/// `maximize Σ v_t` subject to `Σ_{t ∈ R} v_t ◦ 1` for every row, `v` binary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IlpInstance {
    pub variables: usize,
    pub rows: Vec<Vec<Elem>>,
    pub sense: Sense,
}

impl IlpInstance {
    pub fn new(variables: usize, rows: Vec<Vec<Elem>>, sense: Sense) -> Result<IlpInstance> {
        if rows.is_empty() {
            return Err(Error::Degenerate("no rows".into()));
        }
        let mut used = Bitset::new(variables);
        for r in &rows {
            for &t in r {
                if t as usize >= variables {
                    return Err(Error::Degenerate(format!("variable {t} out of range")));
                }
                used.insert(t as usize);
            }
        }
        if used.count() != variables {
            return Err(Error::Degenerate("some variable appears in no row".into()));
        }
        Ok(IlpInstance { variables, rows, sense })
    }

    pub fn from_system(sys: &TranslateRowSystem, variables: usize, sense: Sense) -> Result<IlpInstance> {
        IlpInstance::new(variables, sys.rows.clone(), sense)
    }
}

fn write_terms<W: Write>(out: &mut W, terms: impl Iterator<Item = Elem>) -> std::io::Result<()> {
    for (i, t) in terms.enumerate() {
        if i > 0 {
            if i % 16 == 0 {
                write!(out, "\n   ")?;
            }
            write!(out, " +")?;
        }
        write!(out, " v{t}")?;
    }
    Ok(())
}

/// Writes the instance in LP file format.
pub fn export_lp<W: Write>(inst: &IlpInstance, out: &mut W) -> Result<()> {
    let op = match inst.sense {
        Sense::AtMostOne => "<=",
        Sense::ExactlyOne => "=",
    };
    writeln!(out, "\\ set packing over {} rows", inst.rows.len())?;
    writeln!(out, "Maximize")?;
    write!(out, " obj:")?;
    write_terms(out, 0..inst.variables as Elem)?;
    writeln!(out)?;
    writeln!(out, "Subject To")?;
    for (i, r) in inst.rows.iter().enumerate() {
        write!(out, " r{i}:")?;
        write_terms(out, r.iter().copied())?;
        writeln!(out, " {op} 1")?;
    }
    writeln!(out, "Binary")?;
    for chunk in (0..inst.variables).collect::<Vec<_>>().chunks(16) {
        let names: Vec<String> = chunk.iter().map(|v| format!("v{v}")).collect();
        writeln!(out, " {}", names.join(" "))?;
    }
    writeln!(out, "End")?;
    Ok(())
}

pub fn export_lp_bytes(inst: &IlpInstance) -> Vec<u8> {
    let mut buf = Vec::new();
    export_lp(inst, &mut buf).expect("writing to memory");
    buf
}

/// Reads back files produced by [`export_lp`].
pub fn parse_lp(text: &str) -> Result<IlpInstance> {
    let bad = |m: &str| Error::Degenerate(format!("lp parse: {m}"));
    let mut section = "";
    let mut rows = Vec::new();
    let mut current: Option<(Vec<Elem>, bool)> = None;
    let mut sense = None;
    let mut binaries = BTreeSet::new();
    let mut objective = Vec::new();
    let var = |tok: &str| -> Result<Elem> {
        tok.strip_prefix('v').and_then(|n| n.parse().ok()).ok_or_else(|| bad(tok))
    };
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('\\') {
            continue;
        }
        match line {
            "Maximize" | "Subject To" | "Binary" | "End" => {
                section = match line {
                    "Maximize" => "obj",
                    "Subject To" => "st",
                    "Binary" => "bin",
                    _ => "end",
                };
                continue;
            }
            _ => {}
        }
        let mut toks = line.split_whitespace().peekable();
        if toks.peek().is_some_and(|t| t.ends_with(':')) {
            toks.next();
            if section == "st" {
                current = Some((Vec::new(), false));
            }
        }
        while let Some(tok) = toks.next() {
            match (section, tok) {
                (_, "+") => {}
                ("obj", t) => objective.push(var(t)?),
                ("st", "<=") | ("st", "=") => {
                    let s = if tok == "<=" { Sense::AtMostOne } else { Sense::ExactlyOne };
                    if sense.is_some_and(|x| x != s) {
                        return Err(bad("mixed senses"));
                    }
                    sense = Some(s);
                    if toks.next() != Some("1") {
                        return Err(bad("right-hand side"));
                    }
                    let (r, _) = current.take().ok_or_else(|| bad("constraint without name"))?;
                    rows.push(r);
                }
                ("st", t) => current.as_mut().ok_or_else(|| bad("term outside constraint"))?.0.push(var(t)?),
                ("bin", t) => {
                    binaries.insert(var(t)?);
                }
                _ => return Err(bad(line)),
            }
        }
    }
    let n = objective.len();
    if binaries.len() != n || objective.iter().enumerate().any(|(i, &v)| v as usize != i) {
        return Err(bad("variables"));
    }
    IlpInstance::new(n, rows, sense.ok_or_else(|| bad("no constraints"))?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverStatus {
    /// `lowerBound = upperBound` is the proven optimum.
    Optimal,
    /// No solution of the requested size exists.
    Infeasible,
    /// A solution of the requested size was found.
    Feasible,
    /// Budget exhausted; the bracket is still certified.
    Bracket,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoverCertificate {
    pub graph: GraphDescriptor,
    pub sense: Sense,
    pub variable_count: usize,
    pub row_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows_per_variable: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<usize>,
    pub status: CoverStatus,
    pub lower_bound: usize,
    pub upper_bound: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<Vec<Elem>>,
    /// Adjacent pairs excluded after they appeared together in a leaf.
    pub cuts: Vec<(Elem, Elem)>,
    pub nodes_explored: u64,
    pub elapsed_ms: u64,
}

enum Hit {
    Found(Vec<Elem>),
    None,
    Aborted,
}

/// Exact hitting set search over the rows, with lazy adjacency cuts.
struct ExactHit<'a> {
    graph: &'a ClassUnionGraph<'a>,
    words: usize,
    /// Rows as bitsets over variables.
    columns: Vec<Vec<u64>>,
    /// Rows through each variable.
    rows_of: Vec<Vec<usize>>,
    /// Variables sharing a row with each variable (itself included), plus cuts.
    conflict: Vec<Vec<u64>>,
    cuts: Vec<(Elem, Elem)>,
    target: Option<usize>,
    nodes: u64,
    budget: Budget,
    start: Instant,
    aborted: bool,
}

impl<'a> ExactHit<'a> {
    fn new(graph: &'a ClassUnionGraph<'a>, inst: &IlpInstance, target: Option<usize>, budget: Budget) -> Self {
        let n = inst.variables;
        let words = n.div_ceil(64);
        let mut columns = Vec::with_capacity(inst.rows.len());
        let mut rows_of = vec![Vec::new(); n];
        let mut conflict = vec![vec![0u64; words]; n];
        for (i, r) in inst.rows.iter().enumerate() {
            let mut bits = vec![0u64; words];
            for &t in r {
                bits[t as usize >> 6] |= 1 << (t & 63);
                rows_of[t as usize].push(i);
            }
            for &t in r {
                for (c, b) in conflict[t as usize].iter_mut().zip(&bits) {
                    *c |= b;
                }
            }
            columns.push(bits);
        }
        ExactHit {
            graph,
            words,
            columns,
            rows_of,
            conflict,
            cuts: Vec::new(),
            target,
            nodes: 0,
            budget,
            start: Instant::now(),
            aborted: false,
        }
    }

    fn over_budget(&mut self) -> bool {
        if self.budget.max_nodes.is_some_and(|m| self.nodes > m)
            || self.budget.max_time.is_some_and(|t| self.start.elapsed() > t)
        {
            self.aborted = true;
        }
        self.aborted
    }

    /// Adds a cut for the first adjacent pair, if any.
    fn independent(&mut self, sol: &[Elem]) -> bool {
        for (i, &u) in sol.iter().enumerate() {
            for &v in &sol[i + 1..] {
                if self.graph.adjacent(u, v) {
                    self.conflict[u as usize][v as usize >> 6] |= 1 << (v & 63);
                    self.conflict[v as usize][u as usize >> 6] |= 1 << (u & 63);
                    self.cuts.push((u.min(v), u.max(v)));
                    return false;
                }
            }
        }
        true
    }

    fn rec(&mut self, alive: &[u64], chosen: &mut Vec<Elem>, covered: &mut [bool], left: usize) -> Option<Vec<Elem>> {
        self.nodes += 1;
        if self.nodes & 0xfff == 0 && self.over_budget() {
            return None;
        }
        if self.aborted {
            return None;
        }
        if left == 0 {
            if self.target.is_some_and(|k| chosen.len() != k) {
                return None;
            }
            let mut sol = chosen.clone();
            sol.sort_unstable();
            return self.independent(&sol).then_some(sol);
        }
        if self.target.is_some_and(|k| chosen.len() >= k) {
            return None;
        }
        let mut best: Option<(usize, usize)> = None;
        for (c, col) in self.columns.iter().enumerate() {
            if covered[c] {
                continue;
            }
            let n: usize = col.iter().zip(alive).map(|(a, b)| (a & b).count_ones() as usize).sum();
            if best.is_none_or(|(_, m)| n < m) {
                best = Some((c, n));
                if n <= 1 {
                    break;
                }
            }
        }
        let (c, n) = best.expect("an uncovered row");
        if n == 0 {
            return None;
        }
        let options: Vec<u64> = self.columns[c].iter().zip(alive).map(|(a, b)| a & b).collect();
        for (wi, &word) in options.iter().enumerate() {
            let mut w = word;
            while w != 0 {
                let x = wi * 64 + w.trailing_zeros() as usize;
                w &= w - 1;
                let next: Vec<u64> = alive.iter().zip(&self.conflict[x]).map(|(a, cf)| a & !cf).collect();
                // alive excludes everything conflicting with the chosen
                // elements, so all rows of x are still uncovered
                let rows = std::mem::take(&mut self.rows_of[x]);
                for &r in &rows {
                    debug_assert!(!covered[r]);
                    covered[r] = true;
                }
                chosen.push(x as Elem);
                let found = self.rec(&next, chosen, covered, left - rows.len());
                chosen.pop();
                for &r in &rows {
                    covered[r] = false;
                }
                self.rows_of[x] = rows;
                if found.is_some() || self.aborted {
                    return found;
                }
            }
        }
        None
    }

    /// Searches for an exact hitting set containing `pinned`, drawing the
    /// rest from `candidates`.
    fn solve(&mut self, pinned: &[Elem], candidates: &[Elem]) -> Hit {
        let mut covered = vec![false; self.columns.len()];
        for &p in pinned {
            for &r in &self.rows_of[p as usize] {
                if covered[r] {
                    return Hit::None;
                }
                covered[r] = true;
            }
        }
        let mut alive = vec![0u64; self.words];
        for &c in candidates {
            if pinned.iter().all(|&p| self.conflict[p as usize][c as usize >> 6] >> (c & 63) & 1 == 0) {
                alive[c as usize >> 6] |= 1 << (c & 63);
            }
        }
        let left = covered.iter().filter(|&&c| !c).count();
        let mut chosen = pinned.to_vec();
        match self.rec(&alive, &mut chosen, &mut covered, left) {
            Some(s) => Hit::Found(s),
            None if self.aborted => Hit::Aborted,
            None => Hit::None,
        }
    }
}

/// Union of the rows through the identity, minus the identity: the set of
/// quotients of elements sharing a row, when rows are translation closed.
fn row_quotients(g: &Group, inst: &IlpInstance) -> Bitset {
    let one = g.identity();
    let mut d = Bitset::new(g.order());
    for r in inst.rows.iter().filter(|r| r.contains(&one)) {
        for &t in r {
            d.insert(t as usize);
        }
    }
    d.remove(one as usize);
    d
}

fn exact_hit(
    graph: &ClassUnionGraph,
    sys: &TranslateRowSystem,
    inst: &IlpInstance,
    target: Option<usize>,
    opts: &SearchOptions,
) -> (Hit, u64, Vec<(Elem, Elem)>) {
    let g = graph.group();
    let mut solver = ExactHit::new(graph, inst, target, opts.budget);
    let all: Vec<Elem> = g.elements().collect();
    let subs = if sys.translation_closed && !opts.no_symmetry {
        // Any solution translates to one through the identity.
        let d = row_quotients(g, inst);
        let mut compat = Bitset::full(g.order());
        compat.difference_with(&d);
        compat.remove(g.identity() as usize);
        let conn: Vec<Elem> = compat.iter().map(|x| x as Elem).collect();
        let adj = Adjacency::new(g, &conn);
        let auts = invariant_automorphisms(g, &[&d, graph.connection_set()], false);
        build_subproblems(g, &conn, &adj, &auts, true)
    } else {
        vec![crate::search::Subproblem { pinned: vec![], candidates: all }]
    };
    let mut result = Hit::None;
    for sub in &subs {
        let independent = sub
            .pinned
            .iter()
            .enumerate()
            .all(|(i, &u)| sub.pinned[i + 1..].iter().all(|&v| !graph.adjacent(u, v)));
        if !independent {
            continue;
        }
        let cands: Vec<Elem> = sub
            .candidates
            .iter()
            .copied()
            .filter(|&c| sub.pinned.iter().all(|&p| !graph.adjacent(p, c)))
            .collect();
        match solver.solve(&sub.pinned, &cands) {
            Hit::None => {}
            other => {
                result = other;
                break;
            }
        }
    }
    (result, solver.nodes, solver.cuts)
}

/// Deterministic greedy packing that respects rows and adjacency.
/// Best of an index-order greedy and a few randomized min-conflict greedy
/// runs.
fn greedy_packing(graph: &ClassUnionGraph, inst: &IlpInstance, seed: u64) -> Vec<Elem> {
    let n = inst.variables;
    let mut conflicts: Vec<Bitset> = (0..n as Elem)
        .map(|x| {
            let mut b = Bitset::new(n);
            for y in graph.neighbors(x) {
                b.insert(y as usize);
            }
            b
        })
        .collect();
    for r in &inst.rows {
        for &t in r {
            for &u in r {
                conflicts[t as usize].insert(u as usize);
            }
        }
    }
    let pick = |order: &mut dyn FnMut(&Bitset) -> Option<usize>| {
        let mut avail = Bitset::full(n);
        let mut sol = Vec::new();
        while let Some(x) = order(&avail) {
            sol.push(x as Elem);
            avail.difference_with(&conflicts[x]);
            avail.remove(x);
        }
        sol.sort_unstable();
        sol
    };
    let mut best = pick(&mut |avail| avail.iter().next());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..GREEDY_RESTARTS {
        let sol = pick(&mut |avail| {
            let mut choice = None;
            let mut ties = 0u32;
            for x in avail.iter() {
                let d = conflicts[x].intersection_count(avail);
                match choice {
                    Some((bd, _)) if d > bd => {}
                    Some((bd, _)) if d == bd => {
                        ties += 1;
                        if rng.gen_range(0..ties) == 0 {
                            choice = Some((d, x));
                        }
                    }
                    _ => {
                        ties = 1;
                        choice = Some((d, x));
                    }
                }
            }
            choice.map(|(_, x)| x)
        });
        if sol.len() > best.len() {
            best = sol;
        }
    }
    best
}

const GREEDY_RESTARTS: usize = 8;

/// Size of a greedy cover of all variables by rows.
fn cover_bound(inst: &IlpInstance) -> usize {
    let mut covered = Bitset::new(inst.variables);
    let mut count = 0;
    while covered.count() < inst.variables {
        let best = inst
            .rows
            .iter()
            .max_by_key(|r| (r.iter().filter(|&&t| !covered.contains(t as usize)).count(), std::cmp::Reverse(r[0])))
            .expect("rows");
        for &t in best {
            covered.insert(t as usize);
        }
        count += 1;
    }
    count
}

/// Solves the cover ILP of a translate system, with `v` also required to be
/// independent in `graph`.
pub fn solve_cover_ilp(
    graph: &ClassUnionGraph,
    sys: &TranslateRowSystem,
    sense: Sense,
    target: Option<usize>,
    opts: &SearchOptions,
) -> Result<CoverCertificate> {
    let g = graph.group();
    let start = Instant::now();
    let inst = IlpInstance::from_system(sys, g.order(), sense)?;
    let per = sys.rows_per_variable(g.order());
    let m = inst.rows.len();
    let mut cert = CoverCertificate {
        graph: graph.descriptor(),
        sense,
        variable_count: inst.variables,
        row_count: m,
        rows_per_variable: per,
        target,
        status: CoverStatus::Bracket,
        lower_bound: 0,
        upper_bound: inst.variables,
        solution: None,
        cuts: Vec::new(),
        nodes_explored: 0,
        elapsed_ms: 0,
    };
    match sense {
        Sense::ExactlyOne => {
            let (hit, nodes, cuts) = exact_hit(graph, sys, &inst, target, opts);
            cert.nodes_explored = nodes;
            cert.cuts = cuts;
            match hit {
                Hit::Found(s) => {
                    cert.status = CoverStatus::Feasible;
                    cert.lower_bound = s.len();
                    cert.upper_bound = s.len();
                    cert.solution = Some(s);
                }
                Hit::None => {
                    cert.status = CoverStatus::Infeasible;
                }
                Hit::Aborted => {
                    cert.status = CoverStatus::Bracket;
                }
            }
        }
        Sense::AtMostOne => {
            // Each row is hit at most once: r |v| <= m for r-regular rows.
            let mut upper = match per {
                Some(r) => m / r,
                None => cover_bound(&inst),
            };
            let greedy = greedy_packing(graph, &inst, opts.seed);
            let mut best = greedy;
            if let Some(r) = per {
                if m % r == 0 && best.len() < upper {
                    // A packing of size m/r is an exact hitting set.
                    let (hit, nodes, cuts) = exact_hit(graph, sys, &inst, Some(m / r), opts);
                    cert.nodes_explored += nodes;
                    cert.cuts = cuts;
                    match hit {
                        Hit::Found(s) => best = s,
                        Hit::None => upper -= 1,
                        Hit::Aborted => {}
                    }
                }
            }
            // with a target, only `optimum >= target` matters
            let wanted = target.map_or(upper, |k| k.min(upper));
            if best.len() < wanted && target.is_none_or(|k| upper >= k) && sys.translation_closed {
                // Clique search in the compatibility graph.
                let d = row_quotients(g, &inst);
                let mut compat = Bitset::full(g.order());
                compat.difference_with(&d);
                compat.difference_with(graph.connection_set());
                compat.remove(g.identity() as usize);
                let conn: Vec<Elem> = compat.iter().map(|x| x as Elem).collect();
                let auts = if opts.no_symmetry {
                    Vec::new()
                } else {
                    invariant_automorphisms(g, &[&d, graph.connection_set()], false)
                };
                let mut seed = best.clone();
                if let Some(&first) = seed.first() {
                    // translate so the seed passes through the identity
                    seed = seed.iter().map(|&t| g.div(t, first)).collect();
                    seed.sort_unstable();
                }
                let out = run_cayley_search(g, &conn, &auts, opts, seed, Some(wanted), 0, None);
                cert.nodes_explored += out.nodes;
                if out.witness.len() > best.len() {
                    best = out.witness;
                }
                if out.exhaustive {
                    upper = upper.min(best.len().max(out.upper_bound));
                }
            }
            cert.lower_bound = best.len();
            cert.upper_bound = upper;
            cert.status = if best.len() == upper { CoverStatus::Optimal } else { CoverStatus::Bracket };
            cert.solution = Some(best);
        }
    }
    cert.elapsed_ms = start.elapsed().as_millis() as u64;
    if let Some(s) = &cert.solution {
        check_packing(graph, &inst, s)?;
    }
    Ok(cert)
}

/// Independent check that `sol` is a coclique meeting each row at most once
/// (exactly once for [`Sense::ExactlyOne`]).
pub fn check_packing(graph: &ClassUnionGraph, inst: &IlpInstance, sol: &[Elem]) -> Result<()> {
    let set: HashSet<Elem> = sol.iter().copied().collect();
    for (i, r) in inst.rows.iter().enumerate() {
        let hits = r.iter().filter(|t| set.contains(t)).count();
        let ok = match inst.sense {
            Sense::AtMostOne => hits <= 1,
            Sense::ExactlyOne => hits == 1,
        };
        if !ok {
            return Err(Error::CertificateRejected(format!("row {i} is hit {hits} times")));
        }
    }
    if !graph.is_coclique(sol) {
        return Err(Error::CertificateRejected("solution is not a coclique".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sylow13(g: &Group) -> Vec<Elem> {
        let x = g.elements().find(|&t| g.element_order(t) == 13).unwrap();
        g.generate(&[x]).iter().map(|t| t as Elem).collect()
    }

    #[test]
    fn sylow_rows_q13() {
        let g = Group::new(13).unwrap();
        let gamma = ClassUnionGraph::from_labels(&g, &["13"]).unwrap();
        let c = sylow13(&g);
        let sys = generate_translate_rows(&gamma, &c).unwrap();
        // oracle: right cosets of the 14 conjugates of C
        let mut expected: BTreeSet<Vec<Elem>> = BTreeSet::new();
        for x in g.elements() {
            for y in g.elements() {
                let mut r: Vec<Elem> = c.iter().map(|&t| g.mul(g.mul(g.inv(x), t), y)).collect();
                r.sort_unstable();
                expected.insert(r);
            }
        }
        assert_eq!(expected.len(), 1176);
        assert_eq!(sys.rows.len(), 1176);
        assert_eq!(sys.rows.iter().cloned().collect::<BTreeSet<_>>(), expected);
        assert!(sys.rows.iter().all(|r| r.len() == 13));
        assert_eq!(sys.rows_per_variable(g.order()), Some(14));
        let only = generate_rows_with(&gamma, &c, RowGenerators::none()).unwrap();
        assert_eq!(only.rows, vec![c.clone()]);
    }

    #[test]
    fn single_row_packing() {
        let g = Group::new(5).unwrap();
        let gamma = ClassUnionGraph::from_labels(&g, &["5"]).unwrap();
        let x = g.elements().find(|&t| g.element_order(t) == 5).unwrap();
        let c: Vec<Elem> = g.generate(&[x]).iter().map(|t| t as Elem).collect();
        let sys = generate_rows_with(&gamma, &c, RowGenerators::none()).unwrap();
        // every other variable is unconstrained, so the instance is degenerate
        assert!(IlpInstance::from_system(&sys, g.order(), Sense::AtMostOne).is_err());
        let inst = IlpInstance::new(5, vec![vec![0, 1, 2, 3, 4]], Sense::AtMostOne).unwrap();
        assert_eq!(inst.rows.len(), 1);
    }

    #[test]
    fn lp_round_trip_and_determinism() {
        let inst = IlpInstance::new(2, vec![vec![0, 1]], Sense::AtMostOne).unwrap();
        let text = String::from_utf8(export_lp_bytes(&inst)).unwrap();
        assert!(text.contains("r0: v0 + v1 <= 1"));
        assert_eq!(parse_lp(&text).unwrap(), inst);
        let g = Group::new(13).unwrap();
        let gamma = ClassUnionGraph::from_labels(&g, &["13"]).unwrap();
        let sys = generate_translate_rows(&gamma, &sylow13(&g)).unwrap();
        let inst = IlpInstance::from_system(&sys, g.order(), Sense::ExactlyOne).unwrap();
        assert_eq!(inst.variables, 1092);
        let a = export_lp_bytes(&inst);
        assert_eq!(a, export_lp_bytes(&inst));
        assert_eq!(parse_lp(std::str::from_utf8(&a).unwrap()).unwrap(), inst);
    }

    #[test]
    fn exact_hit_small() {
        // q = 5: cosets of the conjugates of a Sylow-5 in A5; an exact hit of
        // size 12 is a coclique of Γ_5 of size |Ω|/5.
        let g = Group::new(5).unwrap();
        let gamma = ClassUnionGraph::from_labels(&g, &["5"]).unwrap();
        let x = g.elements().find(|&t| g.element_order(t) == 5).unwrap();
        let c: Vec<Elem> = g.generate(&[x]).iter().map(|t| t as Elem).collect();
        let sys = generate_translate_rows(&gamma, &c).unwrap();
        let opts = SearchOptions { threads: Some(1), ..Default::default() };
        let exact = solve_cover_ilp(&gamma, &sys, Sense::ExactlyOne, Some(12), &opts).unwrap();
        let packing = solve_cover_ilp(&gamma, &sys, Sense::AtMostOne, None, &opts).unwrap();
        assert_eq!(packing.status, CoverStatus::Optimal);
        let alpha = crate::search::max_coclique(&gamma, &opts).unwrap().size;
        assert_eq!(packing.upper_bound, alpha);
        assert_eq!(exact.status == CoverStatus::Feasible, alpha == 12);
    }
}
