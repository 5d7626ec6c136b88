//! End-to-end classification for one field order, and replay of reports.
//!
//! Stages run in order: witnesses for non-synchronisation, the rational
//! scheme, feasibility, then per-pair resolution by realization, inference,
//! search, covers and exact hits. The report carries every certificate so
//! that [`verify_report`] can re-check it without trusting this module.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::certify::{generate_translate_rows, solve_cover_ilp, CoverCertificate, CoverStatus, Sense};
use crate::feasibility::{enumerate_all, putative_table, CandidatePair, Family, FeasibilityOptions, FeasiblePair};
use crate::graphs::{class_label, complement_classes, graph_from_descriptor, ClassKind, ClassUnionGraph};
use crate::group::{Elem, Group};
use crate::linalg::{format_rational, Matrix};
use crate::scheme::{rational_scheme, AssociationScheme};
use crate::search::{
    check_set, find_clique_of_size, max_clique, max_coclique, subgroup_clique, verify_certificate, Budget,
    CliqueCertificate, DecisionCertificate, DecisionOutcome, Objective, SearchOptions,
};
use crate::witnesses::{
    build_spreading_witness, check_half_intersection, find_exact_factorisation, sharply_transitive_q9,
    verify_sharply_transitive_set, verify_spreading_witness, ExactFactorisation, HalfIntersectionReport,
    SharplyTransitiveSet, SpreadingWitness,
};
use crate::bitset::Bitset;
use crate::error::{Error, Result};

pub const REPORT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug)]
pub struct AnalyzeConfig {
    /// Budget of each full search, cover solve and witness search.
    pub budget: Budget,
    /// Node cap for the cheap first passes over every graph.
    pub probe_nodes: u64,
    pub threads: Option<usize>,
    /// Seed for randomized packing restarts.
    pub seed: u64,
    /// Keep wall-clock fields; off by default so reports are byte-stable.
    pub timings: bool,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        AnalyzeConfig {
            budget: Budget::default().with_env_overrides(),
            probe_nodes: 1_000_000,
            threads: Some(1),
            seed: 0,
            timings: false,
        }
    }
}

impl AnalyzeConfig {
    fn full(&self) -> SearchOptions {
        SearchOptions { budget: self.budget, threads: self.threads, no_symmetry: false, seed: self.seed }
    }

    fn probe(&self) -> SearchOptions {
        let nodes = self.budget.max_nodes.map_or(self.probe_nodes, |n| n.min(self.probe_nodes));
        SearchOptions {
            budget: Budget { max_nodes: Some(nodes), max_time: self.budget.max_time },
            threads: Some(1),
            no_symmetry: false,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GraphStatus {
    EliminatedFeasibility,
    SeparatingBySearch,
    SeparatingByIlp,
    SeparatingByCsp,
    SeparatingByInference,
    SeparatingByNonexistence,
    Unresolved,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Answer {
    Yes,
    No,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Omega,
    Alpha,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum BoundKind {
    AtMost,
    AtLeast,
}

/// Where a borrowed bound was established.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum BoundSource {
    /// Certificates of `graphs[index]` in the same report.
    Verdict { index: usize },
    /// A clique of the `via` graph (coclique when `viaQuantity` is alpha).
    Witness { vertices: Vec<Elem> },
}

/// A bound on this graph's omega or alpha borrowed from another class set.
///
/// For `I ⊆ K`, ω(Γ_I) ≤ ω(Γ_K) and α(Γ_I) ≥ α(Γ_K); with ω(Γ_I) = α(Γ_{I^c})
/// this moves bounds along inclusions. A lower bound above the target
/// rules out the pair through the clique-coclique bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InferenceEdge {
    pub quantity: Quantity,
    pub kind: BoundKind,
    pub bound: usize,
    pub target: u64,
    pub via: Vec<String>,
    pub via_quantity: Quantity,
    pub source: BoundSource,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind")]
pub enum Evidence {
    MaxSearch(CliqueCertificate),
    Decision(DecisionCertificate),
    /// Cover bound over the translates of `baseClique`, a clique of the
    /// certificate's graph.
    Cover {
        #[serde(rename = "baseClique")]
        base_clique: Vec<Elem>,
        certificate: CoverCertificate,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GraphVerdict {
    pub classes: Vec<String>,
    pub complement: Vec<String>,
    /// Absent for class sets eliminated by feasibility.
    pub omega_target: Option<u64>,
    pub alpha_target: Option<u64>,
    pub status: GraphStatus,
    pub reason: String,
    pub certificates: Vec<Evidence>,
    pub inference_edge: Option<InferenceEdge>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Meta {
    pub q: u32,
    pub characteristic: u32,
    pub degree: u32,
    /// Low-to-high coefficients of the defining polynomial.
    pub modulus: Vec<u32>,
    pub group_order: usize,
    /// Fused class labels in relation order.
    pub relation_order: Vec<String>,
    pub element_encoding: String,
    pub version: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SchemeSummary {
    pub labels: Vec<String>,
    pub sizes: Vec<usize>,
    pub multiplicities: Vec<u64>,
    pub p: Vec<Vec<String>>,
    pub q: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FamilySummary {
    pub support: Vec<String>,
    pub dual_zeros: Vec<usize>,
    pub dimension: usize,
    pub vertices: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairSummary {
    pub classes: Vec<String>,
    pub complement: Vec<String>,
    pub omega_target: u64,
    pub alpha_target: u64,
    pub clique_family: FamilySummary,
    pub coclique_family: FamilySummary,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TableRow {
    pub graph: Vec<String>,
    pub omega_target: u64,
    pub alpha_target: u64,
    pub covers: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FeasibilitySummary {
    pub candidate_class_sets: usize,
    pub surviving_class_sets: usize,
    pub pairs: Vec<PairSummary>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WitnessSummary {
    pub factorisation: Option<ExactFactorisation>,
    pub sharply_transitive: Option<SharplyTransitiveSet>,
    pub spreading: Option<SpreadingWitness>,
    pub half_intersection: Option<HalfIntersectionReport>,
}

/// Separating and synchronising coincide for diagonal type, so one answer
/// is reported under both names.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GroupVerdict {
    pub q: u32,
    pub spreading: Answer,
    pub separating: Answer,
    pub synchronising: Answer,
    pub basis: Vec<String>,
    /// Class sets left unresolved.
    pub residue: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub meta: Meta,
    pub scheme: Option<SchemeSummary>,
    pub feasibility: Option<FeasibilitySummary>,
    pub table: Vec<TableRow>,
    pub graphs: Vec<GraphVerdict>,
    pub witnesses: WitnessSummary,
    pub verdict: GroupVerdict,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Report> {
        Ok(serde_json::from_str(text)?)
    }

    /// Whether the verdict is definitive (no UNKNOWN field).
    pub fn is_definitive(&self) -> bool {
        let v = &self.verdict;
        v.spreading != Answer::Unknown && v.separating != Answer::Unknown
    }

    /// Plain-text table of the non-eliminated graphs.
    pub fn render_table(&self) -> String {
        let mut out = format!("{:<28} {:>7} {:>7}  {}\n", "I", "omega", "alpha", "status");
        for v in self.graphs.iter().filter(|v| v.status != GraphStatus::EliminatedFeasibility) {
            out += &format!(
                "{:<28} {:>7} {:>7}  {:?}: {}\n",
                v.classes.join(","),
                v.omega_target.unwrap_or(0),
                v.alpha_target.unwrap_or(0),
                v.status,
                v.reason
            );
        }
        out
    }
}

fn labels(g: &Group, ids: &[usize]) -> Vec<String> {
    ids.iter().map(|&i| class_label(g, ClassKind::Fused, i).to_string()).collect()
}

fn matrix_strings(m: &Matrix) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(format_rational).collect()).collect()
}

fn family_summary(g: &Group, f: &Family) -> FamilySummary {
    FamilySummary {
        support: labels(g, &f.support),
        dual_zeros: f.dual_zeros.clone(),
        dimension: f.dimension(),
        vertices: f.vertices.iter().map(|v| v.iter().map(format_rational).collect()).collect(),
    }
}

/// A fact about ω(Γ_K).
#[derive(Clone, Debug)]
struct Fact {
    value: usize,
    source: BoundSource,
}

/// Known bounds on ω(Γ_K) keyed by sorted class ids.
#[derive(Clone, Debug, Default)]
pub struct Knowledge {
    upper: BTreeMap<Vec<usize>, Fact>,
    lower: BTreeMap<Vec<usize>, Fact>,
}

impl Knowledge {
    pub fn is_empty(&self) -> bool {
        self.upper.is_empty() && self.lower.is_empty()
    }

    /// Records ω(Γ_K) ≤ value, established by `graphs[index]`.
    pub fn record_upper(&mut self, classes: &[usize], value: usize, index: usize) {
        let key = sorted(classes);
        if self.upper.get(&key).is_none_or(|f| value < f.value) {
            self.upper.insert(key, Fact { value, source: BoundSource::Verdict { index } });
        }
    }

    /// Records a clique of Γ_K.
    pub fn record_clique(&mut self, classes: &[usize], vertices: &[Elem]) {
        let key = sorted(classes);
        if self.lower.get(&key).is_none_or(|f| vertices.len() > f.value) {
            let fact = Fact { value: vertices.len(), source: BoundSource::Witness { vertices: vertices.to_vec() } };
            self.lower.insert(key, fact);
        }
    }

    pub fn omega_upper(&self, classes: &[usize]) -> Option<usize> {
        let key = sorted(classes);
        self.upper.iter().filter(|(k, _)| is_subset(&key, k)).map(|(_, f)| f.value).min()
    }

    pub fn omega_lower(&self, classes: &[usize]) -> Option<usize> {
        let key = sorted(classes);
        self.lower.iter().filter(|(k, _)| is_subset(k, &key)).map(|(_, f)| f.value).max()
    }
}

fn sorted(v: &[usize]) -> Vec<usize> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.contains(x))
}

/// A putative pair awaiting resolution.
#[derive(Clone, Debug)]
pub struct PendingPair {
    pub classes: Vec<usize>,
    pub complement: Vec<usize>,
    pub omega_target: u64,
    pub alpha_target: u64,
}

/// First inference edge that rules out `p`, if any.
pub fn infer_pair(g: &Group, kb: &Knowledge, p: &PendingPair) -> Option<InferenceEdge> {
    let (i, j) = (sorted(&p.classes), sorted(&p.complement));
    let best_upper = |side: &[usize], target: u64| {
        kb.upper
            .iter()
            .filter(|(k, f)| is_subset(side, k) && (f.value as u64) < target)
            .min_by_key(|(_, f)| f.value)
            .map(|(k, f)| (k.clone(), f.clone()))
    };
    let best_lower = |side: &[usize], target: u64| {
        kb.lower
            .iter()
            .filter(|(k, f)| is_subset(k, side) && (f.value as u64) > target)
            .max_by_key(|(_, f)| f.value)
            .map(|(k, f)| (k.clone(), f.clone()))
    };
    let via_alpha = |k: &[usize]| labels(g, &complement_classes(g, ClassKind::Fused, k));
    let edge = |quantity, kind, target, via, via_quantity, f: Fact| InferenceEdge {
        quantity,
        kind,
        bound: f.value,
        target,
        via,
        via_quantity,
        source: f.source,
    };
    if let Some((k, f)) = best_upper(&i, p.omega_target) {
        return Some(edge(Quantity::Omega, BoundKind::AtMost, p.omega_target, labels(g, &k), Quantity::Omega, f));
    }
    if let Some((k, f)) = best_upper(&j, p.alpha_target) {
        return Some(edge(Quantity::Alpha, BoundKind::AtMost, p.alpha_target, via_alpha(&k), Quantity::Alpha, f));
    }
    if let Some((k, f)) = best_lower(&i, p.omega_target) {
        return Some(edge(Quantity::Omega, BoundKind::AtLeast, p.omega_target, labels(g, &k), Quantity::Omega, f));
    }
    if let Some((k, f)) = best_lower(&j, p.alpha_target) {
        return Some(edge(Quantity::Alpha, BoundKind::AtLeast, p.alpha_target, via_alpha(&k), Quantity::Alpha, f));
    }
    None
}

/// Applies [`infer_pair`] to every pending pair.
pub fn infer_by_monotonicity(g: &Group, kb: &Knowledge, pending: &[PendingPair]) -> Vec<(usize, InferenceEdge)> {
    pending
        .iter()
        .enumerate()
        .filter_map(|(n, p)| infer_pair(g, kb, p).map(|e| (n, e)))
        .collect()
}

struct PairState {
    pending: PendingPair,
    index: usize,
    /// Clique of size omegaTarget.
    clique: Option<Vec<Elem>>,
    /// Coclique of size alphaTarget.
    coclique: Option<Vec<Elem>>,
    searched: [bool; 2],
    decided: [bool; 2],
    covered: bool,
}

impl PairState {
    fn target(&self, obj: Objective) -> usize {
        match obj {
            Objective::Clique => self.pending.omega_target as usize,
            Objective::Coclique => self.pending.alpha_target as usize,
        }
    }

    /// Class set whose omega equals the objective's value.
    fn omega_side(&self, obj: Objective) -> &[usize] {
        match obj {
            Objective::Clique => &self.pending.classes,
            Objective::Coclique => &self.pending.complement,
        }
    }

    fn found(&self, obj: Objective) -> bool {
        match obj {
            Objective::Clique => self.clique.is_some(),
            Objective::Coclique => self.coclique.is_some(),
        }
    }

    /// Objectives, smaller target first.
    fn sides(&self) -> [Objective; 2] {
        if self.pending.omega_target <= self.pending.alpha_target {
            [Objective::Clique, Objective::Coclique]
        } else {
            [Objective::Coclique, Objective::Clique]
        }
    }
}

fn slot(obj: Objective) -> usize {
    match obj {
        Objective::Clique => 0,
        Objective::Coclique => 1,
    }
}

struct Resolver<'g> {
    g: &'g Group,
    config: &'g AnalyzeConfig,
    kb: Knowledge,
    verdicts: Vec<GraphVerdict>,
}

impl<'g> Resolver<'g> {
    fn graph(&self, ids: &[usize]) -> Result<ClassUnionGraph<'g>> {
        ClassUnionGraph::new(self.g, ClassKind::Fused, ids)
    }

    fn open(&self, st: &PairState) -> bool {
        self.verdicts[st.index].status == GraphStatus::Unresolved
    }

    fn settle(&mut self, st: &PairState, status: GraphStatus, reason: String) {
        let v = &mut self.verdicts[st.index];
        v.status = status;
        v.reason = reason;
    }

    fn try_infer(&mut self, st: &PairState) {
        if !self.open(st) {
            return;
        }
        if let Some(e) = infer_pair(self.g, &self.kb, &st.pending) {
            let q = |x: Quantity| match x {
                Quantity::Omega => "omega",
                Quantity::Alpha => "alpha",
            };
            let via = format!("{}({})", q(e.via_quantity), e.via.join(","));
            let reason = match e.kind {
                BoundKind::AtMost => format!("{} <= {via} <= {} < {}", q(e.quantity), e.bound, e.target),
                BoundKind::AtLeast => format!("{} >= {via} >= {} > {}", q(e.quantity), e.bound, e.target),
            };
            self.verdicts[st.index].inference_edge = Some(e);
            self.settle(st, GraphStatus::SeparatingByInference, reason);
        }
    }

    fn set_found(&mut self, st: &mut PairState, obj: Objective, vertices: &[Elem]) {
        self.kb.record_clique(st.omega_side(obj), vertices);
        let k = st.target(obj);
        if vertices.len() >= k {
            let w = vertices[..k].to_vec();
            match obj {
                Objective::Clique => st.clique = Some(w),
                Objective::Coclique => st.coclique = Some(w),
            }
        }
    }

    fn realize(&mut self, st: &mut PairState) -> Result<()> {
        for obj in st.sides() {
            let gamma = self.graph(st.omega_side(obj))?;
            let mut c = subgroup_clique(&gamma);
            c.sort_unstable();
            self.set_found(st, obj, &c);
        }
        Ok(())
    }

    fn max_search(&mut self, st: &mut PairState, obj: Objective) -> Result<()> {
        if !self.open(st) || st.found(obj) || st.searched[slot(obj)] {
            return Ok(());
        }
        st.searched[slot(obj)] = true;
        let gamma = self.graph(&st.pending.classes)?;
        let opts = self.config.probe();
        let cert = match obj {
            Objective::Clique => max_clique(&gamma, &opts)?,
            Objective::Coclique => max_coclique(&gamma, &opts)?,
        };
        let k = st.target(obj);
        if cert.exhaustive {
            self.kb.record_upper(st.omega_side(obj), cert.size, st.index);
        }
        self.set_found(st, obj, &cert.vertices);
        let (size, exhaustive) = (cert.size, cert.exhaustive);
        self.verdicts[st.index].certificates.push(Evidence::MaxSearch(cert));
        let name = quantity_name(obj);
        if exhaustive && size < k {
            self.settle(st, GraphStatus::SeparatingBySearch, format!("{name} = {size} < {k}"));
        } else if size > k {
            self.settle(st, GraphStatus::SeparatingBySearch, format!("{name} >= {size} > {k}"));
        }
        Ok(())
    }

    fn decide(&mut self, st: &mut PairState, obj: Objective, opts: &SearchOptions) -> Result<()> {
        if !self.open(st) || st.found(obj) || st.decided[slot(obj)] {
            return Ok(());
        }
        let gamma = self.graph(&st.pending.classes)?;
        let k = st.target(obj);
        let cert = find_clique_of_size(&gamma, obj, k, None, opts)?;
        match cert.outcome {
            DecisionOutcome::Found => {
                let v = cert.vertices.clone().expect("found");
                self.set_found(st, obj, &v);
                self.verdicts[st.index].certificates.push(Evidence::Decision(cert));
            }
            DecisionOutcome::None => {
                st.decided[slot(obj)] = true;
                self.kb.record_upper(st.omega_side(obj), k - 1, st.index);
                self.verdicts[st.index].certificates.push(Evidence::Decision(cert));
                let reason = format!("no {} of size {k}", objective_name(obj));
                self.settle(st, GraphStatus::SeparatingByNonexistence, reason);
            }
            DecisionOutcome::Unknown => {}
        }
        Ok(())
    }

    /// Cover bounds from translates of a realized target-size set.
    fn cover(&mut self, st: &mut PairState) -> Result<()> {
        if !self.open(st) || st.covered {
            return Ok(());
        }
        st.covered = true;
        // the set found is a clique of `host`; its cocliques are bounded
        let mut bases = Vec::new();
        if let Some(c) = &st.clique {
            bases.push((st.pending.classes.clone(), c.clone(), Objective::Coclique));
        }
        if let Some(s) = &st.coclique {
            bases.push((st.pending.complement.clone(), s.clone(), Objective::Clique));
        }
        let opts = self.config.full();
        for (host, base, bounded) in bases {
            let gamma = self.graph(&host)?;
            let sys = generate_translate_rows(&gamma, &base)?;
            let k = st.target(bounded);
            for sense in [Sense::AtMostOne, Sense::ExactlyOne] {
                if !self.open(st) {
                    return Ok(());
                }
                if sense == Sense::ExactlyOne && base.len() * k != self.g.order() {
                    continue;
                }
                let cert = solve_cover_ilp(&gamma, &sys, sense, Some(k), &opts)?;
                let bound = match (sense, cert.status) {
                    (Sense::AtMostOne, CoverStatus::Optimal | CoverStatus::Bracket) if cert.upper_bound < k => {
                        Some((cert.upper_bound, GraphStatus::SeparatingByIlp))
                    }
                    (Sense::ExactlyOne, CoverStatus::Infeasible) => Some((k - 1, GraphStatus::SeparatingByCsp)),
                    _ => None,
                };
                let useful = bound.is_some() || cert.status == CoverStatus::Feasible;
                if let Some(s) = cert.solution.clone().filter(|s| !s.is_empty()) {
                    let mut s = s;
                    s.sort_unstable();
                    // a coclique of `host` is a clique of its complement
                    self.set_found(st, bounded, &s);
                }
                if useful {
                    self.verdicts[st.index].certificates.push(Evidence::Cover { base_clique: base.clone(), certificate: cert });
                }
                if let Some((u, status)) = bound {
                    self.kb.record_upper(st.omega_side(bounded), u, st.index);
                    let name = quantity_name(bounded);
                    let how = if status == GraphStatus::SeparatingByIlp { "translate packing" } else { "no exact hit" };
                    self.settle(st, status, format!("{name} <= {u} < {k} by {how}"));
                }
            }
        }
        Ok(())
    }
}

fn quantity_name(obj: Objective) -> &'static str {
    match obj {
        Objective::Clique => "omega",
        Objective::Coclique => "alpha",
    }
}

fn objective_name(obj: Objective) -> &'static str {
    match obj {
        Objective::Clique => "clique",
        Objective::Coclique => "coclique",
    }
}

/// Resolves every pair, returning verdicts in `pairs` order.
pub fn resolve_pairs(g: &Group, pairs: &[PendingPair], config: &AnalyzeConfig) -> Result<Vec<GraphVerdict>> {
    let mut r = Resolver { g, config, kb: Knowledge::default(), verdicts: Vec::new() };
    let mut states = Vec::new();
    for (index, p) in pairs.iter().enumerate() {
        r.verdicts.push(GraphVerdict {
            classes: labels(g, &p.classes),
            complement: labels(g, &p.complement),
            omega_target: Some(p.omega_target),
            alpha_target: Some(p.alpha_target),
            status: GraphStatus::Unresolved,
            reason: "budget exhausted".into(),
            certificates: Vec::new(),
            inference_edge: None,
        });
        states.push(PairState {
            pending: p.clone(),
            index,
            clique: None,
            coclique: None,
            searched: [false; 2],
            decided: [false; 2],
            covered: false,
        });
    }
    for st in states.iter_mut() {
        r.realize(st)?;
    }
    let infer_all = |r: &mut Resolver, states: &[PairState]| {
        for st in states {
            r.try_infer(st);
        }
    };
    infer_all(&mut r, &states);
    let probe = config.probe();
    for st in states.iter_mut() {
        for obj in st.sides() {
            r.try_infer(st);
            r.max_search(st, obj)?;
        }
    }
    infer_all(&mut r, &states);
    for st in states.iter_mut() {
        for obj in st.sides() {
            r.try_infer(st);
            r.decide(st, obj, &probe)?;
        }
    }
    for st in states.iter_mut() {
        r.try_infer(st);
        r.cover(st)?;
    }
    infer_all(&mut r, &states);
    let full = config.full();
    for st in states.iter_mut() {
        for obj in st.sides() {
            r.try_infer(st);
            r.decide(st, obj, &full)?;
        }
        r.try_infer(st);
        // a late find may enable covers
        r.cover(st)?;
    }
    infer_all(&mut r, &states);
    Ok(r.verdicts)
}

fn pending_from(p: &FeasiblePair) -> Result<PendingPair> {
    let (Some(w), Some(a)) = (p.clique_target(), p.coclique_target()) else {
        return Err(Error::Degenerate("non-integral target".into()));
    };
    let (i, j) = (&p.clique_classes, &p.coclique_classes);
    // name the pair by its smaller side, as in the putative table
    if j.len() < i.len() || (j.len() == i.len() && j.first() < i.first()) {
        Ok(PendingPair { classes: j.clone(), complement: i.clone(), omega_target: a, alpha_target: w })
    } else {
        Ok(PendingPair { classes: i.clone(), complement: j.clone(), omega_target: w, alpha_target: a })
    }
}

pub fn summarize_scheme(s: &AssociationScheme) -> Result<SchemeSummary> {
    let eig = s.eigenmatrices().ok_or(Error::MissingEigenmatrix)?;
    Ok(SchemeSummary {
        labels: s.labels(),
        sizes: s.sizes(),
        multiplicities: eig.multiplicities.clone(),
        p: matrix_strings(&eig.p),
        q: matrix_strings(&eig.q),
    })
}

/// Per-pair families and the merged putative table.
pub fn summarize_feasibility(
    g: &Group,
    s: &AssociationScheme,
    all: &[(CandidatePair, Vec<FeasiblePair>)],
) -> Result<(FeasibilitySummary, Vec<TableRow>)> {
    let pairs = all
        .iter()
        .flat_map(|(_, ps)| ps.iter())
        .map(|p| PairSummary {
            classes: labels(g, &p.clique_classes),
            complement: labels(g, &p.coclique_classes),
            omega_target: p.clique_target().unwrap_or(0),
            alpha_target: p.coclique_target().unwrap_or(0),
            clique_family: family_summary(g, &p.a),
            coclique_family: family_summary(g, &p.b),
        })
        .collect();
    let summary = FeasibilitySummary {
        candidate_class_sets: all.len(),
        surviving_class_sets: all.iter().filter(|(_, ps)| !ps.is_empty()).count(),
        pairs,
    };
    let table = putative_table(s, all)?
        .iter()
        .map(|row| TableRow {
            graph: labels(g, &row.graph),
            omega_target: row.omega_target(),
            alpha_target: row.alpha_target(),
            covers: row.covers.iter().map(|c| labels(g, &c.clique_classes)).collect(),
        })
        .collect();
    Ok((summary, table))
}

/// Runs every stage for `q`.
pub fn analyze(q: u64, config: &AnalyzeConfig) -> Result<Report> {
    let g = Group::new(q)?;
    let f = g.field();
    let meta = Meta {
        q: g.q(),
        characteristic: f.characteristic(),
        degree: f.degree(),
        modulus: f.modulus().to_vec(),
        group_order: g.order(),
        relation_order: g.fusion_classes().iter().map(|c| c.label.clone()).collect(),
        element_encoding: "index of the canonical matrix representative".into(),
        version: REPORT_VERSION.into(),
    };
    let mut witnesses = WitnessSummary { factorisation: find_exact_factorisation(&g, config.budget)?, ..Default::default() };
    if witnesses.factorisation.is_none() && q == 9 {
        witnesses.sharply_transitive = Some(sharply_transitive_q9(&g)?);
    }
    let mut basis = Vec::new();
    let non_separating = if let Some(w) = &witnesses.factorisation {
        basis.push(format!("exact factorisation: {}", w.description));
        true
    } else if witnesses.sharply_transitive.is_some() {
        basis.push("sharply transitive set of a coset action".into());
        true
    } else {
        false
    };
    if q % 4 == 1 {
        witnesses.spreading = Some(build_spreading_witness(&g)?);
        witnesses.half_intersection = Some(check_half_intersection(&g)?);
    }

    let (mut scheme_summary, mut feasibility, mut table, mut graphs) = (None, None, Vec::new(), Vec::new());
    let separating = if non_separating {
        Answer::No
    } else {
        match rational_scheme(&g) {
            Err(e) => {
                basis.push(format!("rational scheme unavailable: {e}"));
                Answer::Unknown
            }
            Ok(s) => {
                scheme_summary = Some(summarize_scheme(&s)?);
                let all = enumerate_all(&s, FeasibilityOptions::default())?;
                let (summary, rows) = summarize_feasibility(&g, &s, &all)?;
                let pairs = all
                    .iter()
                    .flat_map(|(_, ps)| ps.iter().map(pending_from))
                    .collect::<Result<Vec<_>>>()?;
                feasibility = Some(summary);
                table = rows;
                graphs = resolve_pairs(&g, &pairs, config)?;
                for (c, ps) in &all {
                    if ps.is_empty() {
                        graphs.push(GraphVerdict {
                            classes: labels(&g, &c.side),
                            complement: labels(&g, &c.complement),
                            omega_target: None,
                            alpha_target: None,
                            status: GraphStatus::EliminatedFeasibility,
                            reason: "no design-orthogonal pair with integral sizes".into(),
                            certificates: Vec::new(),
                            inference_edge: None,
                        });
                    }
                }
                if graphs.iter().all(|v| v.status != GraphStatus::Unresolved) {
                    basis.push("every feasible clique-coclique pair is ruled out".into());
                    Answer::Yes
                } else {
                    Answer::Unknown
                }
            }
        }
    };
    let spreading = if witnesses.spreading.is_some() {
        basis.push("spreading witness with constant translate intersections".into());
        Answer::No
    } else if separating == Answer::No {
        Answer::No
    } else {
        Answer::Unknown
    };
    let residue = graphs.iter().filter(|v| v.status == GraphStatus::Unresolved).map(|v| v.classes.clone()).collect();
    let mut report = Report {
        meta,
        scheme: scheme_summary,
        feasibility,
        table,
        graphs,
        witnesses,
        verdict: GroupVerdict { q: g.q(), spreading, separating, synchronising: separating, basis, residue },
    };
    if !config.timings {
        strip_timings(&mut report);
    }
    Ok(report)
}

/// Zeroes wall-clock fields.
pub fn strip_timings(report: &mut Report) {
    for v in &mut report.graphs {
        for e in &mut v.certificates {
            match e {
                Evidence::MaxSearch(c) => c.elapsed_ms = 0,
                Evidence::Decision(d) => d.elapsed_ms = 0,
                Evidence::Cover { certificate, .. } => certificate.elapsed_ms = 0,
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReplaySummary {
    pub certificates_checked: usize,
    pub searches_replayed: usize,
    pub witnesses_checked: usize,
}

fn reject(msg: String) -> Error {
    Error::CertificateRejected(msg)
}

fn check_evidence(
    g: &Group,
    expected: Option<&[String]>,
    e: &Evidence,
    deep: Option<&SearchOptions>,
    summary: &mut ReplaySummary,
) -> Result<()> {
    let same_graph = |classes: &[String]| {
        expected.is_none_or(|want| {
            let (mut a, mut b) = (classes.to_vec(), want.to_vec());
            a.sort();
            b.sort();
            a == b
        })
    };
    match e {
        Evidence::MaxSearch(c) => {
            if !same_graph(&c.graph.classes) {
                return Err(reject("search certificate is for another graph".into()));
            }
            verify_certificate(g, c)?;
            if let Some(opts) = deep.filter(|_| c.exhaustive) {
                let gamma = graph_from_descriptor(g, &c.graph)?;
                let again = match c.objective {
                    Objective::Clique => max_clique(&gamma, opts)?,
                    Objective::Coclique => max_coclique(&gamma, opts)?,
                };
                if !again.exhaustive || again.size != c.size {
                    return Err(reject(format!("replayed search gave {} instead of {}", again.size, c.size)));
                }
                summary.searches_replayed += 1;
            }
        }
        Evidence::Decision(d) => {
            if !same_graph(&d.graph.classes) {
                return Err(reject("decision certificate is for another graph".into()));
            }
            match (&d.outcome, &d.vertices) {
                (DecisionOutcome::Found, Some(vs)) if vs.len() == d.target => check_set(g, &d.graph, d.objective, vs)?,
                (DecisionOutcome::Found, _) => return Err(reject("found decision without a witness of the target size".into())),
                (_, Some(_)) => return Err(reject("witness attached to a negative decision".into())),
                (DecisionOutcome::None, None) => {
                    if let Some(opts) = deep {
                        let gamma = graph_from_descriptor(g, &d.graph)?;
                        let again = find_clique_of_size(&gamma, d.objective, d.target, None, opts)?;
                        if again.outcome != DecisionOutcome::None {
                            return Err(reject(format!("replayed decision gave {:?}", again.outcome)));
                        }
                        summary.searches_replayed += 1;
                    }
                }
                (DecisionOutcome::Unknown, None) => {}
            }
        }
        Evidence::Cover { base_clique, certificate } => {
            let gamma = graph_from_descriptor(g, &certificate.graph)?;
            let sys = generate_translate_rows(&gamma, base_clique)?;
            if sys.rows.len() != certificate.row_count {
                return Err(reject(format!("row count {} differs from {}", sys.rows.len(), certificate.row_count)));
            }
            if let Some(s) = &certificate.solution {
                if !s.is_empty() && !gamma.is_coclique(s) {
                    return Err(reject("cover solution is not a coclique".into()));
                }
            }
            if let Some(r) = sys.rows_per_variable(g.order()) {
                let counting = certificate.row_count / r;
                if certificate.sense == Sense::AtMostOne && certificate.upper_bound > counting {
                    return Err(reject("cover bound above the counting bound".into()));
                }
            }
            if let Some(opts) = deep {
                let again = solve_cover_ilp(&gamma, &sys, certificate.sense, certificate.target, opts)?;
                if again.status != certificate.status || again.upper_bound > certificate.upper_bound {
                    return Err(reject(format!(
                        "replayed cover gave {:?} <= {} instead of {:?} <= {}",
                        again.status, again.upper_bound, certificate.status, certificate.upper_bound
                    )));
                }
                summary.searches_replayed += 1;
            }
        }
    }
    summary.certificates_checked += 1;
    Ok(())
}

/// Upper bound on omega of `classes` established by a resolved verdict.
fn established_upper(g: &Group, v: &GraphVerdict, classes: &[String]) -> Option<usize> {
    let mut best: Option<usize> = None;
    let mut note = |x: usize| best = Some(best.map_or(x, |b| b.min(x)));
    let target = |c: &[String]| {
        let mut a = c.to_vec();
        a.sort();
        a
    };
    let want = target(classes);
    let _ = g;
    for e in &v.certificates {
        let (graph_classes, omega_of_graph, value) = match e {
            Evidence::MaxSearch(c) if c.exhaustive => (&c.graph.classes, c.objective == Objective::Clique, c.size),
            Evidence::Decision(d) if d.outcome == DecisionOutcome::None => {
                (&d.graph.classes, d.objective == Objective::Clique, d.target - 1)
            }
            Evidence::Cover { certificate: c, .. } => {
                let k = c.target.unwrap_or(usize::MAX);
                let u = match (c.sense, c.status) {
                    (Sense::ExactlyOne, CoverStatus::Infeasible) => k.saturating_sub(1),
                    (Sense::AtMostOne, CoverStatus::Optimal | CoverStatus::Bracket) => c.upper_bound,
                    _ => continue,
                };
                (&c.graph.classes, false, u)
            }
            _ => continue,
        };
        let omega_classes = if omega_of_graph {
            target(graph_classes)
        } else {
            let mut comp: Vec<String> = v.classes.iter().chain(v.complement.iter()).cloned().collect();
            comp.retain(|c| !graph_classes.contains(c));
            target(&comp)
        };
        if omega_classes == want {
            note(value);
        }
    }
    best
}

fn check_edge(g: &Group, report: &Report, v: &GraphVerdict, e: &InferenceEdge) -> Result<()> {
    let all: Vec<String> = v.classes.iter().chain(v.complement.iter()).cloned().collect();
    let complement_of = |c: &[String]| -> Vec<String> { all.iter().filter(|x| !c.contains(x)).cloned().collect() };
    // omega side of the borrowed bound
    let via_omega = match e.via_quantity {
        Quantity::Omega => e.via.clone(),
        Quantity::Alpha => complement_of(&e.via),
    };
    let own_omega = match e.quantity {
        Quantity::Omega => v.classes.clone(),
        Quantity::Alpha => v.complement.clone(),
    };
    let target = match e.quantity {
        Quantity::Omega => v.omega_target,
        Quantity::Alpha => v.alpha_target,
    };
    if Some(e.target) != target {
        return Err(reject("inference target mismatch".into()));
    }
    let subset = |a: &[String], b: &[String]| a.iter().all(|x| b.contains(x));
    match e.kind {
        BoundKind::AtMost => {
            if !subset(&own_omega, &via_omega) || e.bound as u64 >= e.target {
                return Err(reject("inference edge does not apply".into()));
            }
        }
        BoundKind::AtLeast => {
            if !subset(&via_omega, &own_omega) || e.bound as u64 <= e.target {
                return Err(reject("inference edge does not apply".into()));
            }
        }
    }
    match (&e.source, e.kind) {
        (BoundSource::Witness { vertices }, BoundKind::AtLeast) => {
            if vertices.len() != e.bound {
                return Err(reject("witness size differs from the bound".into()));
            }
            let ids = crate::graphs::parse_class_labels(g, ClassKind::Fused, &via_omega)?;
            let d = ClassUnionGraph::new(g, ClassKind::Fused, &ids)?.descriptor();
            check_set(g, &d, Objective::Clique, vertices)?;
        }
        (BoundSource::Verdict { index }, BoundKind::AtMost) => {
            let src = report.graphs.get(*index).ok_or_else(|| reject("inference source out of range".into()))?;
            if matches!(src.status, GraphStatus::Unresolved | GraphStatus::EliminatedFeasibility) {
                return Err(reject("inference source is not resolved".into()));
            }
            match established_upper(g, src, &via_omega) {
                Some(u) if u <= e.bound => {}
                _ => return Err(reject(format!("source graphs[{index}] does not establish the bound"))),
            }
        }
        _ => return Err(reject("inference source does not match the bound kind".into())),
    }
    Ok(())
}

fn check_resolution(g: &Group, report: &Report, v: &GraphVerdict) -> Result<()> {
    if matches!(v.status, GraphStatus::EliminatedFeasibility | GraphStatus::Unresolved) {
        return Ok(());
    }
    let (Some(w), Some(a)) = (v.omega_target, v.alpha_target) else {
        return Err(reject("resolved graph without targets".into()));
    };
    let target_of = |c: &[String], omega_of_graph: bool| -> Option<u64> {
        let same = |x: &[String], y: &[String]| {
            let (mut x, mut y) = (x.to_vec(), y.to_vec());
            x.sort();
            y.sort();
            x == y
        };
        match (same(c, &v.classes), omega_of_graph) {
            (true, true) => Some(w),
            (true, false) => Some(a),
            (false, true) if same(c, &v.complement) => Some(a),
            (false, false) if same(c, &v.complement) => Some(w),
            _ => None,
        }
    };
    let ok = match v.status {
        GraphStatus::SeparatingByInference => {
            let e = v.inference_edge.as_ref().ok_or_else(|| reject("inference without an edge".into()))?;
            check_edge(g, report, v, e)?;
            true
        }
        GraphStatus::SeparatingBySearch => v.certificates.iter().any(|e| match e {
            Evidence::MaxSearch(c) => {
                let t = target_of(&c.graph.classes, c.objective == Objective::Clique);
                t.is_some_and(|t| (c.exhaustive && (c.size as u64) < t) || c.size as u64 > t)
            }
            _ => false,
        }),
        GraphStatus::SeparatingByNonexistence => v.certificates.iter().any(|e| match e {
            Evidence::Decision(d) => {
                d.outcome == DecisionOutcome::None
                    && target_of(&d.graph.classes, d.objective == Objective::Clique) == Some(d.target as u64)
            }
            _ => false,
        }),
        GraphStatus::SeparatingByIlp => v.certificates.iter().any(|e| match e {
            Evidence::Cover { certificate: c, .. } => {
                c.sense == Sense::AtMostOne
                    && target_of(&c.graph.classes, false).is_some_and(|t| (c.upper_bound as u64) < t)
            }
            _ => false,
        }),
        GraphStatus::SeparatingByCsp => v.certificates.iter().any(|e| match e {
            Evidence::Cover { base_clique, certificate: c } => {
                let t = target_of(&c.graph.classes, false);
                c.sense == Sense::ExactlyOne
                    && c.status == CoverStatus::Infeasible
                    && t.is_some_and(|t| Some(t as usize) == c.target && base_clique.len() as u64 * t == g.order() as u64)
            }
            _ => false,
        }),
        GraphStatus::EliminatedFeasibility | GraphStatus::Unresolved => true,
    };
    if !ok {
        return Err(reject(format!("no certificate supports {:?} for {}", v.status, v.classes.join(","))));
    }
    Ok(())
}

/// Replays one certificate on its own.
pub fn verify_evidence(e: &Evidence, deep: Option<&SearchOptions>) -> Result<ReplaySummary> {
    let q = match e {
        Evidence::MaxSearch(c) => c.graph.q,
        Evidence::Decision(d) => d.graph.q,
        Evidence::Cover { certificate, .. } => certificate.graph.q,
    };
    let g = Group::new(q as u64)?;
    let mut summary = ReplaySummary::default();
    check_evidence(&g, None, e, deep, &mut summary)?;
    Ok(summary)
}

/// Replays a report. Light mode re-checks every witness, certificate and
/// inference edge; `deep` also re-runs each exhaustive search and cover.
pub fn verify_report(report: &Report, deep: Option<&SearchOptions>) -> Result<ReplaySummary> {
    let g = Group::new(report.meta.q as u64)?;
    if g.field().modulus() != report.meta.modulus.as_slice() {
        return Err(reject("field modulus differs".into()));
    }
    let mut summary = ReplaySummary::default();
    let w = &report.witnesses;
    if let Some(f) = &w.factorisation {
        let a = Bitset::from_indices(g.order(), f.a.iter().map(|&x| x as usize));
        let b = Bitset::from_indices(g.order(), f.b.iter().map(|&x| x as usize));
        crate::witnesses::verify_exact_factorisation(&g, &a, &b)?;
        summary.witnesses_checked += 1;
    }
    if let Some(s) = &w.sharply_transitive {
        verify_sharply_transitive_set(&g, s)?;
        summary.witnesses_checked += 1;
    }
    if let Some(s) = &w.spreading {
        verify_spreading_witness(&g, s)?;
        summary.witnesses_checked += 1;
    }
    for v in &report.graphs {
        for e in &v.certificates {
            check_evidence(&g, Some(&v.classes), e, deep, &mut summary)?;
        }
        check_resolution(&g, report, v)?;
    }
    let verdict = &report.verdict;
    if verdict.separating != verdict.synchronising {
        return Err(reject("separating and synchronising disagree".into()));
    }
    match verdict.separating {
        Answer::No if w.factorisation.is_none() && w.sharply_transitive.is_none() => {
            return Err(reject("NO without a non-synchronising witness".into()))
        }
        Answer::Yes
            if w.factorisation.is_some()
                || report.graphs.is_empty()
                || report.graphs.iter().any(|v| v.status == GraphStatus::Unresolved) =>
        {
            return Err(reject("YES with unresolved graphs".into()))
        }
        _ => {}
    }
    if verdict.spreading == Answer::No && w.spreading.is_none() && verdict.separating != Answer::No {
        return Err(reject("spreading NO without a witness".into()));
    }
    Ok(summary)
}
