//! Acceptance criteria 1 to 11, run in order by one test so that each
//! prints a single PASS/FAIL line and its runtime limit is measured alone.
//!
//! Criteria 2 and 3 cannot hold as stated; they print FAIL and assert the
//! exact, analysed discrepancy instead, so any other deviation still fails
//! the test.

use std::collections::BTreeSet;
use std::io::Write;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use diagsync::certify::{generate_translate_rows, solve_cover_ilp, CoverStatus, Sense};
use diagsync::feasibility::{enumerate_all, putative_table, FeasibilityOptions};
use diagsync::graphs::{ClassKind, ClassUnionGraph};
use diagsync::group::{Elem, Group};
use diagsync::linalg::{format_rational, mat_mul, rat, Rational};
use diagsync::pipeline::{analyze, verify_evidence, verify_report, AnalyzeConfig, Answer, Evidence, Report};
use diagsync::scheme::rational_scheme;
use diagsync::search::{
    find_clique_of_size, max_clique, max_coclique, Budget, DecisionOutcome, Objective, SearchOptions,
};
use diagsync::witnesses::{
    build_spreading_witness, check_half_intersection, squares_of_stabilizer, two_stabilizers,
    verify_spreading_witness,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LIMIT_SCHEME: Duration = Duration::from_secs(10);
const LIMIT_FEAS_13: Duration = Duration::from_secs(10);
const LIMIT_FEAS_17: Duration = Duration::from_secs(30);
const BUDGET_SEARCH_13: Duration = Duration::from_secs(3600);
const BUDGET_NONEXISTENCE: Duration = Duration::from_secs(2 * 3600);
const BUDGET_COVER: Duration = Duration::from_secs(4 * 3600);
const BUDGET_SPOT_17: Duration = Duration::from_secs(2 * 3600);
const LIMIT_WITNESS: Duration = Duration::from_secs(5 * 60);
const LIMIT_SPREADING: Duration = Duration::from_secs(10 * 60);
const RANDOM_PAIRS: usize = 1000;

type Outcome = Result<String, String>;

fn report(n: usize, outcome: &Outcome) {
    let line = match outcome {
        Ok(msg) => format!("criterion {n} PASS: {msg}\n"),
        Err(msg) => format!("criterion {n} FAIL: {msg}\n"),
    };
    // written to the raw handle so the line survives output capture
    std::io::stdout().lock().write_all(line.as_bytes()).unwrap();
}

fn opts(secs: Duration) -> SearchOptions {
    SearchOptions { budget: Budget { max_nodes: None, max_time: Some(secs) }, threads: Some(1), ..Default::default() }
}

fn gamma<'g>(g: &'g Group, labels: &[&str]) -> ClassUnionGraph<'g> {
    ClassUnionGraph::from_labels(g, labels).unwrap()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    ensure(start.elapsed() < limit, format!("took {:?}, limit {limit:?}", start.elapsed()))
}

/// Sorted labels of a class set.
fn key(labels: &[String]) -> Vec<String> {
    let mut v = labels.to_vec();
    v.sort_by_key(|l| l.parse::<u32>().unwrap_or(u32::MAX));
    v
}

fn names(g: &Group, ids: &[usize]) -> Vec<String> {
    key(&ids.iter().map(|&i| g.fusion_classes()[i].label.clone()).collect::<Vec<_>>())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let g = Group::new(13).unwrap();
    let s = rational_scheme(&g).unwrap();
    let q = s.q_matrix().unwrap();
    // reference Q, rows in relation order (1, 6, 2, 3, 7, 13)
    let reference: [[i64; 6]; 6] = [
        [1, 98, 432, 169, 196, 196],
        [1, -14, 0, 13, -14, 14],
        [1, -14, 0, 13, 28, -28],
        [1, 14, 0, 13, -14, -14],
        [1, 0, 12, -13, 0, 0],
        [1, 7, -36, 0, 14, 14],
    ];
    let rows = ["1", "6", "2", "3", "7", "13"].map(|l| s.relation_by_label(l).unwrap());
    // column permutation between the two eigenspace orders
    let cols = [0, 2, 3, 4, 5, 1];
    for (pi, &r) in rows.iter().enumerate() {
        for (pj, &c) in cols.iter().enumerate() {
            let ours = &q[r][c];
            if *ours != rat(reference[pi][pj]) {
                return Err(format!("Q[{r}][{c}] = {} but reference has {}", format_rational(ours), reference[pi][pj]));
            }
        }
    }
    within(start, LIMIT_SCHEME)?;
    Ok(format!("fused Q equals the reference Q under the recorded permutation ({:?})", start.elapsed()))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let g = Group::new(13).unwrap();
    let s = rational_scheme(&g).unwrap();
    let all = enumerate_all(&s, FeasibilityOptions::default()).unwrap();
    ensure(all.len() == 15, format!("{} candidate pairs", all.len()))?;
    let table = putative_table(&s, &all).unwrap();
    within(start, LIMIT_FEAS_13)?;
    let ours: BTreeSet<(Vec<String>, u64, u64)> =
        table.iter().map(|r| (names(&g, &r.graph), r.omega_target(), r.alpha_target())).collect();
    let reference: BTreeSet<(Vec<String>, u64, u64)> = [
        (vec!["13"], 13, 84),
        (vec!["7"], 14, 78),
        (vec!["3", "13"], 39, 28),
        (vec!["3", "7"], 42, 26),
        (vec!["6", "13"], 26, 42),
        (vec!["6", "7"], 28, 39),
    ]
    .into_iter()
    .map(|(l, w, a)| (l.into_iter().map(String::from).collect(), w, a))
    .collect();
    // every reference class set survives as a per-pair survivor
    let pairs: BTreeSet<(Vec<String>, u64, u64)> = all
        .iter()
        .flat_map(|(_, ps)| ps.iter())
        .flat_map(|p| {
            let (w, a) = (p.clique_target().unwrap(), p.coclique_target().unwrap());
            [(names(&g, &p.clique_classes), w, a), (names(&g, &p.coclique_classes), a, w)]
        })
        .collect();
    ensure(reference.is_subset(&pairs), "a reference graph is missing from the survivors")?;
    ensure(table.len() == 6, format!("{} putative rows", table.len()))?;
    // parameter ranges of the one-dimensional families
    let mut ranges: Vec<(Vec<String>, String, String)> = Vec::new();
    for r in &table {
        for f in [&r.pair.a, &r.pair.b] {
            if let Some(seg) = f.segment() {
                ranges.push((names(&g, &r.graph), format_rational(&seg.lo), format_rational(&seg.hi)));
            }
        }
    }
    ranges.sort();
    let expected_ranges: Vec<(Vec<String>, String, String)> = [
        (vec!["2", "13"], "7/2", "14"),
        (vec!["2", "7"], "13/2", "26"),
        (vec!["3", "13"], "0", "7"),
        (vec!["3", "7"], "0", "13"),
    ]
    .into_iter()
    .map(|(l, lo, hi)| (l.into_iter().map(String::from).collect(), lo.to_string(), hi.to_string()))
    .collect();
    let swapped: BTreeSet<_> = ours.symmetric_difference(&reference).cloned().collect();
    let expected_swap: BTreeSet<(Vec<String>, u64, u64)> = [
        (vec!["2", "13"], 26, 42),
        (vec!["2", "7"], 28, 39),
        (vec!["6", "13"], 26, 42),
        (vec!["6", "7"], 28, 39),
    ]
    .into_iter()
    .map(|(l, w, a)| (l.into_iter().map(String::from).collect(), w, a))
    .collect();
    // Known discrepancy: the rows the reference labels {6,13} and {6,7} come
    // out as {2,13} and {2,7} from the reference Q, and two parameter ranges are
    // cut by the nonnegativity of (bQ)_1 (t >= 7/2 and t >= 13/2).
    if swapped == expected_swap && ranges == expected_ranges {
        return Err(format!(
            "six rows with the reference targets, but labelled {{2,13}},{{2,7}} where the reference has {{6,13}},{{6,7}}; \
             ranges 0..7, 0..13, 7/2..14, 13/2..26 for 0..7, 0..13, 0..14, 0..26 ({:?}); \
             analysed discrepancy, asserted exactly",
            start.elapsed()
        ));
    }
    panic!("unexpected table {ours:?} ranges {ranges:?}")
}

/// Reference q=17 class sets as (class set, alpha target, omega target).
const REFERENCE_17: [(&[&str], u64, u64); 23] = [
    (&["2", "4", "8", "9", "17"], 9, 272),
    (&["2", "3", "4", "8", "9"], 17, 144),
    (&["2", "3", "4", "8", "17"], 18, 136),
    (&["2", "8", "9", "17"], 18, 136),
    (&["2", "3", "8", "9"], 34, 72),
    (&["2", "3", "8", "17"], 36, 68),
    (&["2", "4", "9", "17"], 18, 136),
    (&["4", "8", "9", "17"], 18, 136),
    (&["2", "4", "8", "17"], 18, 136),
    (&["2", "3", "4", "9"], 34, 72),
    (&["2", "3", "4", "17"], 36, 68),
    (&["3", "4", "8", "9"], 34, 72),
    (&["2", "3", "4", "8"], 34, 72),
    (&["3", "4", "8", "17"], 36, 68),
    (&["2", "9", "17"], 36, 68),
    (&["8", "9", "17"], 36, 68),
    (&["2", "8", "17"], 36, 68),
    (&["2", "3", "9"], 68, 36),
    (&["2", "3", "17"], 72, 34),
    (&["3", "8", "9"], 68, 36),
    (&["2", "3", "8"], 68, 36),
    (&["3", "8", "17"], 72, 34),
    (&["3", "4", "17"], 72, 34),
];

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let g = Group::new(17).unwrap();
    let s = rational_scheme(&g).unwrap();
    let all = enumerate_all(&s, FeasibilityOptions::default()).unwrap();
    within(start, LIMIT_FEAS_17)?;
    let all_labels: Vec<String> = names(&g, &(1..g.fusion_classes().len()).collect::<Vec<_>>());
    // unordered pairs {I, I^c} with the omega target of the first listed side
    let normal = |i: Vec<String>, w: u64, a: u64| {
        let c: Vec<String> = all_labels.iter().filter(|l| !i.contains(l)).cloned().collect();
        if i < c {
            (i, c, w, a)
        } else {
            (c, i, a, w)
        }
    };
    let ours: BTreeSet<_> = all
        .iter()
        .flat_map(|(_, ps)| ps.iter())
        .map(|p| normal(names(&g, &p.clique_classes), p.clique_target().unwrap(), p.coclique_target().unwrap()))
        .collect();
    let reference: BTreeSet<_> = REFERENCE_17
        .iter()
        .map(|(i, a, w)| normal(key(&i.iter().map(|s| s.to_string()).collect::<Vec<_>>()), *w, *a))
        .collect();
    let missing: Vec<_> = reference.difference(&ours).collect();
    let extra: Vec<_> = ours.difference(&reference).collect();
    assert!(missing.is_empty(), "reference entries missing: {missing:?}");
    let expected_extra = normal(vec!["2".into(), "4".into(), "8".into(), "9".into()], 144, 17);
    if extra.len() == 1 && *extra[0] == expected_extra && ours.len() == 24 {
        // Known discrepancy: {2,4,8,9} with (omega, alpha) = (144, 17) passes
        // every feasibility condition; the pipeline rules it out by search.
        return Err(format!(
            "all 23 reference pairs found with matching targets plus one more, {{2,4,8,9}} (144, 17) \
             ({:?}); analysed discrepancy, asserted exactly",
            start.elapsed()
        ));
    }
    panic!("unexpected extra pairs {extra:?}");
}

fn criterion_4() -> Outcome {
    let g = Group::new(13).unwrap();
    let mut msgs = Vec::new();
    for (labels, expected) in [(&["6", "13"][..], 25), (&["3", "13"][..], 22)] {
        let start = Instant::now();
        let c = max_coclique(&gamma(&g, labels), &opts(BUDGET_SEARCH_13)).unwrap();
        ensure(c.exhaustive, format!("alpha({labels:?}) search not exhaustive"))?;
        ensure(c.size == expected, format!("alpha({labels:?}) = {}, expected {expected}", c.size))?;
        msgs.push(format!("alpha({}) = {} exhaustive in {:?}", labels.join(","), c.size, start.elapsed()));
    }
    Ok(msgs.join("; "))
}

fn criterion_5() -> Outcome {
    let g = Group::new(13).unwrap();
    let start = Instant::now();
    let d = find_clique_of_size(&gamma(&g, &["7"]), Objective::Clique, 14, None, &opts(BUDGET_NONEXISTENCE)).unwrap();
    ensure(d.outcome == DecisionOutcome::None, format!("14-clique decision: {:?}", d.outcome))?;
    let omega = max_clique(&gamma(&g, &["7"]), &opts(BUDGET_NONEXISTENCE)).unwrap();
    ensure(omega.exhaustive && omega.size < 14, "omega(7) not below 14")?;
    Ok(format!("no 14-clique in Gamma_7 (omega = {}) in {:?}", omega.size, start.elapsed()))
}

fn criterion_6() -> Outcome {
    let g = Group::new(13).unwrap();
    let start = Instant::now();
    let gm = gamma(&g, &["13"]);
    let sys = generate_translate_rows(&gm, &g.unipotent_subgroup()).unwrap();
    let at_most = solve_cover_ilp(&gm, &sys, Sense::AtMostOne, Some(84), &opts(BUDGET_COVER)).unwrap();
    ensure(at_most.upper_bound <= 83, format!("cover bound {}", at_most.upper_bound))?;
    let exact = solve_cover_ilp(&gm, &sys, Sense::ExactlyOne, Some(84), &opts(BUDGET_COVER)).unwrap();
    ensure(exact.status == CoverStatus::Infeasible, format!("exact hit at 84: {:?}", exact.status))?;
    ensure(at_most.upper_bound * 13 != 1092, "alpha * 13 = 1092 not excluded")?;
    Ok(format!(
        "{} rows; {} <= alpha(13) <= {} ({:?}); no exact hit of size 84, so 13 * alpha != 1092 ({:?})",
        sys.rows.len(),
        at_most.lower_bound,
        at_most.upper_bound,
        at_most.status,
        start.elapsed()
    ))
}

fn criterion_7() -> Outcome {
    let g = Group::new(17).unwrap();
    let start = Instant::now();
    let spots: [(&[&str], Objective, usize); 5] = [
        (&["2", "4", "8", "9", "17"], Objective::Coclique, 3),
        (&["2", "8", "9", "17"], Objective::Coclique, 6),
        (&["2", "3", "8", "17"], Objective::Coclique, 18),
        (&["2", "3", "9"], Objective::Clique, 18),
        (&["2", "3", "8"], Objective::Clique, 13),
    ];
    let mut msgs = Vec::new();
    for (labels, obj, expected) in spots {
        let remaining = BUDGET_SPOT_17.saturating_sub(start.elapsed());
        let gm = gamma(&g, labels);
        let c = match obj {
            Objective::Clique => max_clique(&gm, &opts(remaining)).unwrap(),
            Objective::Coclique => max_coclique(&gm, &opts(remaining)).unwrap(),
        };
        let name = if obj == Objective::Clique { "omega" } else { "alpha" };
        ensure(c.exhaustive && c.size == expected, format!("{name}({labels:?}) = {} ({})", c.size, c.exhaustive))?;
        msgs.push(format!("{name}({}) = {}", labels.join(","), c.size));
    }
    within(start, BUDGET_SPOT_17)?;
    Ok(format!("{} exhaustive ({:?})", msgs.join(", "), start.elapsed()))
}

fn quick_config() -> AnalyzeConfig {
    AnalyzeConfig { budget: Budget { max_nodes: None, max_time: Some(LIMIT_WITNESS) }, ..AnalyzeConfig::default() }
}

fn criterion_8() -> Outcome {
    let mut msgs = Vec::new();
    for q in [9u64, 7, 8, 11, 29] {
        let start = Instant::now();
        let r = analyze(q, &quick_config()).map_err(|e| e.to_string())?;
        verify_report(&r, None).map_err(|e| format!("q={q}: {e}"))?;
        ensure(r.verdict.synchronising == Answer::No, format!("q={q} verdict {:?}", r.verdict.synchronising))?;
        if q == 9 {
            ensure(r.witnesses.sharply_transitive.is_some(), "q=9 without a sharply transitive witness")?;
        } else {
            let f = r.witnesses.factorisation.as_ref().ok_or(format!("q={q} without a factorisation"))?;
            ensure(f.a.len() * f.b.len() == g_order(q), "factorisation sizes")?;
        }
        within(start, LIMIT_WITNESS)?;
        msgs.push(format!("q={q} NO ({:?})", start.elapsed()));
    }
    Ok(msgs.join(", "))
}

fn g_order(q: u64) -> usize {
    diagsync::group::psl_order(q) as usize
}

fn criterion_9() -> Outcome {
    let mut msgs = Vec::new();
    for (q, lambda) in [(13u64, 78u64), (17, 136), (25, 300), (29, 406)] {
        let start = Instant::now();
        let g = Group::new(q).unwrap();
        let h = check_half_intersection(&g).unwrap();
        ensure(h.holds && h.values_as_claimed, format!("q={q}: half-intersection {h:?}"))?;
        // independent pass over every t rather than one per coset
        let (t1, t2) = two_stabilizers(&g);
        let sq = squares_of_stabilizer(&g, &t1).unwrap();
        let t2v: Vec<Elem> = t2.iter().map(|x| x as Elem).collect();
        for t in g.elements() {
            let (mut a, mut b) = (0, 0);
            for &x in &t2v {
                let y = g.mul(x, t) as usize;
                a += usize::from(t1.contains(y));
                b += usize::from(sq.contains(y));
            }
            ensure(2 * b == a, format!("q={q}: t={t} gives {b} of {a}"))?;
        }
        let w = build_spreading_witness(&g).unwrap();
        ensure(w.lambda == lambda, format!("q={q}: lambda {}", w.lambda))?;
        let images = verify_spreading_witness(&g, &w).map_err(|e| e.to_string())?;
        within(start, LIMIT_SPREADING)?;
        msgs.push(format!("q={q} lambda={lambda} over {images} images ({:?})", start.elapsed()));
    }
    Ok(msgs.join(", "))
}

fn run_cli(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_diagsync")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let dir = std::env::temp_dir().join(format!("diagsync-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("q13.json");
    let p = path.to_str().unwrap();
    let (code, _) = run_cli(&["analyze", "--q", "13", "--out", p]);
    ensure(code == 0, format!("analyze --q 13 exit {code}"))?;
    let r = Report::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    REPORT_13.set(r.clone()).ok();
    ensure(r.verdict.separating == Answer::Yes && r.verdict.synchronising == Answer::Yes, "q=13 not YES")?;
    ensure(r.verdict.spreading == Answer::No, "q=13 spreading not NO")?;
    let (code, out) = run_cli(&["verify", p, "--deep"]);
    ensure(code == 0, format!("verify --deep exit {code}: {out}"))?;
    let mut msgs = vec![format!("q=13 YES, deep replay ok ({:?})", start.elapsed())];
    for q in ["9", "29"] {
        let (code, out) = run_cli(&["analyze", "--q", q]);
        let r = Report::from_json(&out).unwrap();
        ensure(code == 0 && r.verdict.synchronising == Answer::No, format!("q={q}: exit {code}"))?;
        msgs.push(format!("q={q} NO"));
    }
    let (code, out) =
        run_cli(&["analyze", "--q", "17", "--budget-nodes", "2000", "--budget-secs", "20", "--probe-nodes", "2000"]);
    let r = Report::from_json(&out).unwrap();
    ensure(code == 2 && r.verdict.separating == Answer::Unknown, format!("starved q=17: exit {code}"))?;
    ensure(!r.verdict.residue.is_empty(), "starved q=17 without residue")?;
    verify_report(&r, None).map_err(|e| e.to_string())?;
    msgs.push(format!("starved q=17 UNKNOWN with {} unresolved, exit 2", r.verdict.residue.len()));
    std::fs::remove_dir_all(&dir).ok();
    Ok(msgs.join(", "))
}

/// Random maximal clique of `gm` grown from a random vertex.
fn random_clique(gm: &ClassUnionGraph, rng: &mut ChaCha8Rng) -> Vec<Elem> {
    let n = gm.vertex_count() as Elem;
    let mut c: Vec<Elem> = Vec::new();
    let mut cand: Vec<Elem> = (0..n).collect();
    while !cand.is_empty() {
        let v = cand.swap_remove(rng.gen_range(0..cand.len()));
        c.push(v);
        cand.retain(|&u| gm.adjacent(u, v));
    }
    c.sort_unstable();
    c
}

/// The q=13 report written by criterion 10, reused for tampering.
static REPORT_13: OnceLock<Report> = OnceLock::new();

fn rejected(r: &Report, what: &str) -> Result<(), String> {
    ensure(verify_report(r, None).is_err(), format!("tampered {what} accepted"))
}

fn tamper_checks() -> Result<usize, String> {
    let g = Group::new(13).unwrap();
    let base = REPORT_13.get().ok_or("no q=13 report from criterion 10")?;
    verify_report(base, None).map_err(|e| e.to_string())?;
    let mut count = 0;

    let mut r = base.clone();
    let w = r.witnesses.spreading.as_mut().ok_or("no spreading witness")?;
    let i = w.weights.iter().position(|&x| x > 0).unwrap();
    w.weights[i] += 1;
    rejected(&r, "spreading weight")?;
    count += 1;

    let mut r = base.clone();
    let edge = r.graphs.iter_mut().find_map(|v| v.inference_edge.as_mut()).ok_or("no inference edge")?;
    edge.bound -= 2;
    rejected(&r, "inference bound")?;
    count += 1;

    let mut r = base.clone();
    let cert = r
        .graphs
        .iter_mut()
        .flat_map(|v| v.certificates.iter_mut())
        .find_map(|e| match e {
            Evidence::MaxSearch(c) => Some(c),
            _ => None,
        })
        .ok_or("no search certificate")?;
    let v = cert.vertices[1];
    cert.vertices[1] = (0..g.order() as Elem).find(|x| !cert.vertices.contains(x) && *x > v).unwrap();
    cert.vertices.sort_unstable();
    ensure(diagsync::search::verify_certificate(&g, cert).is_err(), "tampered clique accepted")?;
    rejected(&r, "clique certificate")?;
    count += 1;

    // a negative decision with a lowered target is refuted on replay
    let decision = base
        .graphs
        .iter()
        .flat_map(|v| v.certificates.iter())
        .find_map(|e| match e {
            Evidence::Decision(d) if d.outcome == DecisionOutcome::None => Some(d.clone()),
            _ => None,
        })
        .ok_or("no decision certificate")?;
    let mut d = decision.clone();
    d.target = 2;
    let deep = opts(Duration::from_secs(600));
    ensure(verify_evidence(&Evidence::Decision(d), Some(&deep)).is_err(), "tampered decision accepted")?;
    count += 1;

    let mut r = base.clone();
    r.verdict.synchronising = Answer::No;
    rejected(&r, "verdict")?;
    count += 1;

    let mut r = analyze(7, &quick_config()).map_err(|e| e.to_string())?;
    let g7 = Group::new(7).unwrap();
    let f = r.witnesses.factorisation.as_mut().ok_or("no q=7 factorisation")?;
    let x = (0..g7.order() as Elem).find(|x| !f.b.contains(x)).unwrap();
    f.b[0] = x;
    f.b.sort_unstable();
    rejected(&r, "factorisation")?;
    count += 1;
    Ok(count)
}

fn criterion_11() -> Outcome {
    let start = Instant::now();
    let mut checks = 0usize;
    for q in [5u64, 7, 8, 9, 11, 13, 17] {
        let g = Group::new(q).unwrap();
        let s = rational_scheme(&g).unwrap();
        s.check_axioms().map_err(|e| format!("q={q}: {e}"))?;
        let e = s.eigenmatrices().unwrap();
        let pq = mat_mul(&e.p, &e.q);
        let n = rat(g.order() as i64);
        for (i, row) in pq.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                ensure(*x == if i == j { n.clone() } else { rat(0) }, format!("q={q}: PQ[{i}][{j}]"))?;
            }
        }
        checks += 1;
    }
    // clique-coclique inequality and MacWilliams nonnegativity on random pairs
    let g = Group::new(13).unwrap();
    let s = rational_scheme(&g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let all = enumerate_all(&s, FeasibilityOptions { divisibility_filter: false }).unwrap();
    let mut pairs_checked = 0usize;
    for (c, _) in &all {
        let gm = ClassUnionGraph::new(&g, ClassKind::Fused, &c.side).unwrap();
        let comp = gm.complement().unwrap();
        for _ in 0..RANDOM_PAIRS {
            let cl = random_clique(&gm, &mut rng);
            let co = random_clique(&comp, &mut rng);
            ensure(cl.len() * co.len() <= g.order(), format!("{:?}: {} * {}", c.side, cl.len(), co.len()))?;
            pairs_checked += 1;
        }
        for set in [random_clique(&gm, &mut rng), random_clique(&comp, &mut rng)] {
            let a = s.inner_distribution(&g, &set).unwrap();
            let t = s.macwilliams_transform(&a).unwrap();
            ensure(t.iter().all(|x: &Rational| *x >= rat(0)), "negative MacWilliams transform")?;
        }
    }
    // |C ∩ x^-1 S y| = 1 on equality pairs from exact factorisations
    let mut equality = 0;
    for q in [5u64, 7, 8, 11] {
        let g = Group::new(q).unwrap();
        let f = diagsync::witnesses::find_exact_factorisation(&g, Budget::default()).unwrap().unwrap();
        let a: BTreeSet<Elem> = f.a.iter().copied().collect();
        for x in g.elements() {
            for y in g.elements() {
                let hits = f.b.iter().filter(|&&b| a.contains(&g.mul(g.mul(g.inv(x), b), y))).count();
                ensure(hits == 1, format!("q={q}: translate ({x},{y}) meets {hits} times"))?;
            }
        }
        equality += 1;
    }
    let tampers = tamper_checks()?;
    Ok(format!(
        "scheme axioms and PQ = nI for {checks} fields; {pairs_checked} random clique/coclique pairs; \
         exact translate hits for {equality} factorisations; {tampers} tampered artefacts rejected ({:?})",
        start.elapsed()
    ))
}

#[test]
fn acceptance_criteria() {
    type Criterion = fn() -> Outcome;
    let criteria: [(usize, Criterion, bool); 11] = [
        (1, criterion_1, false),
        (2, criterion_2, true),
        (3, criterion_3, true),
        (4, criterion_4, false),
        (5, criterion_5, false),
        (6, criterion_6, false),
        (7, criterion_7, false),
        (8, criterion_8, false),
        (9, criterion_9, false),
        (10, criterion_10, false),
        (11, criterion_11, false),
    ];
    let mut unexpected = Vec::new();
    for (n, f, known_failure) in criteria {
        let outcome = f();
        report(n, &outcome);
        if outcome.is_err() != known_failure {
            unexpected.push(n);
        }
    }
    assert!(unexpected.is_empty(), "criteria with unexpected outcome: {unexpected:?}");
}

/// Full q=17 classification; about five minutes single-threaded.
#[test]
#[ignore]
fn q17_is_synchronising() {
    let r = analyze(17, &AnalyzeConfig::default()).unwrap();
    assert_eq!(r.verdict.synchronising, Answer::Yes, "residue {:?}", r.verdict.residue);
    assert_eq!(r.verdict.spreading, Answer::No);
    verify_report(&r, None).unwrap();
}
