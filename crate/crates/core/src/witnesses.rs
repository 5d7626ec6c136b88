//! Group-theoretic witnesses: exact factorisations and sharply transitive
//! sets (non-synchronising), and the weighted multiset showing the action is
//! not spreading.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::group::{Elem, Group, ProjectivePoint};
use crate::search::Budget;

fn sorted(set: &Bitset) -> Vec<Elem> {
    set.iter().map(|x| x as Elem).collect()
}

fn bitset_of(g: &Group, xs: &[Elem]) -> Bitset {
    Bitset::from_indices(g.order(), xs.iter().map(|&x| x as usize))
}

/// `T = AB` with `A ∩ B = 1`, or more generally `A` a subgroup and `B` a set
/// with every element of `T` uniquely `ab`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExactFactorisation {
    pub q: u32,
    pub a: Vec<Elem>,
    pub b: Vec<Elem>,
    /// Whether `B` is itself a subgroup.
    pub b_is_subgroup: bool,
    pub description: String,
    /// `B` meets every right coset of every conjugate of `A` exactly once;
    /// checked for all conjugates when `exhaustive`, else for a sample.
    pub transversal_checked: bool,
    pub transversal_exhaustive: bool,
}

/// Checks that every product `ab` is distinct and they cover `T`.
fn products_bijective(g: &Group, a: &[Elem], b: &[Elem]) -> bool {
    if a.len() * b.len() != g.order() {
        return false;
    }
    let mut seen = Bitset::new(g.order());
    for &x in a {
        for &y in b {
            let p = g.mul(x, y) as usize;
            if seen.contains(p) {
                return false;
            }
            seen.insert(p);
        }
    }
    true
}

/// `|B ∩ A^x t| = 1` for all `t`, i.e. no quotient `b1 b2^-1` of distinct
/// members lies in `A^x` and `|A||B| = |T|`.
fn transversal_for_conjugate(g: &Group, a: &Bitset, b: &[Elem], x: Elem) -> bool {
    let ax = g.conjugate_set(a, x);
    b.iter()
        .enumerate()
        .all(|(i, &u)| b[i + 1..].iter().all(|&v| !ax.contains(g.div(u, v) as usize)))
}

fn check_transversal(g: &Group, a: &Bitset, b: &[Elem], seed: u64) -> (bool, bool) {
    let exhaustive = g.q() <= 11;
    let ok = if exhaustive {
        g.elements().all(|x| transversal_for_conjugate(g, a, b, x))
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..8).all(|_| transversal_for_conjugate(g, a, b, rng.gen_range(0..g.order()) as Elem))
    };
    (ok, exhaustive)
}

/// Verifies a factorisation by two nontrivial proper subgroups.
pub fn verify_exact_factorisation(g: &Group, a: &Bitset, b: &Bitset) -> Result<ExactFactorisation> {
    for (name, s) in [("A", a), ("B", b)] {
        if !g.is_subgroup(s) {
            return Err(Error::NotASubgroup(name.into()));
        }
        if s.count() <= 1 || s.count() >= g.order() {
            return Err(Error::WitnessFailed(format!("{name} must be nontrivial and proper")));
        }
    }
    let (av, bv) = (sorted(a), sorted(b));
    if !products_bijective(g, &av, &bv) {
        return Err(Error::WitnessFailed(format!(
            "|A||B| = {}·{} with A ∩ B of size {}, not an exact factorisation of {}",
            av.len(),
            bv.len(),
            a.intersection_count(b),
            g.order()
        )));
    }
    let (ok, exhaustive) = check_transversal(g, a, &bv, 0);
    if !ok {
        return Err(Error::WitnessFailed("B is not a transversal for a conjugate of A".into()));
    }
    Ok(ExactFactorisation {
        q: g.q(),
        description: format!("subgroups of orders {} and {}", av.len(), bv.len()),
        a: av,
        b: bv,
        b_is_subgroup: true,
        transversal_checked: true,
        transversal_exhaustive: exhaustive,
    })
}

/// Verifies `T = AB` uniquely for a subgroup `A` and a set `B`.
pub fn verify_set_factorisation(g: &Group, a: &Bitset, b: &[Elem]) -> Result<ExactFactorisation> {
    if !g.is_subgroup(a) {
        return Err(Error::NotASubgroup("A".into()));
    }
    let mut bv = b.to_vec();
    bv.sort_unstable();
    bv.dedup();
    let av = sorted(a);
    if bv.len() != b.len() || !products_bijective(g, &av, &bv) {
        return Err(Error::WitnessFailed("products AB are not all distinct".into()));
    }
    let (ok, exhaustive) = check_transversal(g, a, &bv, 0);
    if !ok {
        return Err(Error::WitnessFailed("B is not a transversal for a conjugate of A".into()));
    }
    Ok(ExactFactorisation {
        q: g.q(),
        description: format!("subgroup of order {} and a sharply transitive set of size {}", av.len(), bv.len()),
        a: av,
        b_is_subgroup: g.is_subgroup(&bitset_of(g, &bv)),
        b: bv,
        transversal_checked: true,
        transversal_exhaustive: exhaustive,
    })
}

fn divisors(n: usize) -> Vec<usize> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// Unipotent radical of the stabiliser of infinity (order `q`) and a
/// generator of its diagonal complement.
fn borel_parts(g: &Group) -> (Bitset, Bitset, Elem) {
    let inf = ProjectivePoint(g.q());
    let t1 = g.point_stabilizer(inf);
    let p = g.field().characteristic();
    let mut u = Bitset::new(g.order());
    let mut d = g.identity();
    let m = t1.count() / g.q() as usize;
    for x in t1.iter() {
        let o = g.element_order(x as Elem);
        if o == 1 || o == p {
            u.insert(x);
        } else if o as usize == m && d == g.identity() {
            d = x as Elem;
        }
    }
    if m > 1 && d == g.identity() {
        d = t1.iter().map(|x| x as Elem).max_by_key(|&x| g.element_order(x)).unwrap_or(d);
    }
    (t1, u, d)
}

/// Subgroups of shape `[q]:C_k` inside the stabiliser of infinity.
fn borel_subgroups(g: &Group) -> Vec<Bitset> {
    let (t1, u, d) = borel_parts(g);
    let m = t1.count() / g.q() as usize;
    let mut gens: Vec<Elem> = u.iter().map(|x| x as Elem).collect();
    let mut out = Vec::new();
    for k in divisors(m) {
        gens.push(g.pow(d, (m / k) as u64));
        out.push(g.generate(&gens));
        gens.pop();
    }
    out
}

/// A dihedral group of order `2|x|` containing `x`, if an inverting
/// involution exists.
fn dihedral_over(g: &Group, x: Elem, involutions: &[Elem]) -> Option<Bitset> {
    let xi = g.inv(x);
    let y = involutions.iter().copied().find(|&y| g.conjugate(x, y) == xi)?;
    Some(g.generate(&[x, y]))
}

/// Subgroups `<x, y>` with `x` an involution, `y` of order 3 and `xy` of
/// order 3, 4 or 5 (A4, S4, A5).
fn polyhedral(g: &Group, involutions: &[Elem]) -> Vec<Bitset> {
    let Some(&x) = involutions.first() else { return Vec::new() };
    let mut found: HashMap<u32, Bitset> = HashMap::new();
    for y in g.elements().filter(|&y| g.element_order(y) == 3) {
        let o = g.element_order(g.mul(x, y));
        if (3..=5).contains(&o) && !found.contains_key(&o) {
            let h = g.generate(&[x, y]);
            let expect = match o {
                3 => 12,
                4 => 24,
                _ => 60,
            };
            if h.count() == expect {
                found.insert(o, h);
            }
        }
        if found.len() == 3 {
            break;
        }
    }
    let mut v: Vec<(u32, Bitset)> = found.into_iter().collect();
    v.sort_by_key(|(o, _)| *o);
    v.into_iter().map(|(_, h)| h).collect()
}

/// Point stabilisers and their `[q]:C_k` subgroups, cyclic and dihedral
/// subgroups over each class, and A4, S4, A5 where present. Deduplicated,
/// largest first.
pub fn candidate_subgroups(g: &Group) -> Vec<Bitset> {
    let involutions: Vec<Elem> = g.elements().filter(|&t| g.element_order(t) == 2).collect();
    let mut out: Vec<Bitset> = borel_subgroups(g);
    for c in g.classes().iter().skip(1) {
        let x = c.representative;
        out.push(g.generate(&[x]));
        if g.element_order(x) > 2 {
            if let Some(d) = dihedral_over(g, x, &involutions) {
                out.push(d);
            }
        }
    }
    out.extend(polyhedral(g, &involutions));
    let mut seen = HashSet::new();
    out.retain(|h| h.count() > 1 && h.count() < g.order() && seen.insert(h.to_vec()));
    out.sort_by(|a, b| b.count().cmp(&a.count()).then_with(|| a.to_vec().cmp(&b.to_vec())));
    out
}

/// Searches candidate pairs `(A, B^x)`. `None` means none was found within
/// the budget, not that none exists.
pub fn find_exact_factorisation(g: &Group, budget: Budget) -> Result<Option<ExactFactorisation>> {
    let start = Instant::now();
    let cands = candidate_subgroups(g);
    let n = g.order();
    for a in &cands {
        for b in cands.iter().filter(|b| a.count() * b.count() == n) {
            let bv = sorted(b);
            for x in g.elements() {
                if budget.max_time.is_some_and(|t| start.elapsed() > t) {
                    return Ok(None);
                }
                let meets = bv.iter().any(|&y| y != g.identity() && a.contains(g.conjugate(y, x) as usize));
                if !meets {
                    let bx = g.conjugate_set(b, x);
                    return verify_exact_factorisation(g, a, &bx).map(Some);
                }
            }
        }
    }
    Ok(None)
}

/// Outcome of a sharp transitivity check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "result")]
pub enum SharpnessCheck {
    Sharp,
    WrongCardinality { expected: usize, found: usize },
    /// Members `first` and `second` agree on `point`.
    Collision { first: usize, second: usize, point: usize },
}

/// Checks that exactly one permutation maps each point to each point.
pub fn check_sharply_transitive(perms: &[Vec<usize>], n: usize) -> SharpnessCheck {
    if perms.len() != n {
        return SharpnessCheck::WrongCardinality { expected: n, found: perms.len() };
    }
    for (i, p) in perms.iter().enumerate() {
        for (j, r) in perms.iter().enumerate().skip(i + 1) {
            if let Some(point) = (0..n).find(|&x| p[x] == r[x]) {
                return SharpnessCheck::Collision { first: i, second: j, point };
            }
        }
    }
    SharpnessCheck::Sharp
}

/// Right coset action of `T` on a subgroup `A`: point `i` is the coset with
/// the `i`-th smallest minimum element.
pub struct CosetAction {
    pub coset_of: Vec<usize>,
    pub reps: Vec<Elem>,
}

impl CosetAction {
    pub fn new(g: &Group, a: &Bitset) -> CosetAction {
        let mut coset_of = vec![usize::MAX; g.order()];
        let mut reps = Vec::new();
        let av = sorted(a);
        for t in g.elements() {
            if coset_of[t as usize] == usize::MAX {
                let id = reps.len();
                reps.push(t);
                for &x in &av {
                    coset_of[g.mul(x, t) as usize] = id;
                }
            }
        }
        CosetAction { coset_of, reps }
    }

    pub fn degree(&self) -> usize {
        self.reps.len()
    }

    pub fn permutation(&self, g: &Group, t: Elem) -> Vec<usize> {
        self.reps.iter().map(|&r| self.coset_of[g.mul(r, t) as usize]).collect()
    }
}

/// Parses cycle notation such as `(12)(3456)` on points `1..=n`.
pub fn parse_cycles(s: &str, n: usize) -> Result<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    for cyc in s.split(')').map(|c| c.trim().trim_start_matches('(')).filter(|c| !c.is_empty()) {
        let pts: Vec<usize> = cyc
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize).filter(|&d| d >= 1 && d <= n))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Degenerate(format!("bad cycle {cyc}")))?;
        for (i, &p) in pts.iter().enumerate() {
            perm[p - 1] = pts[(i + 1) % pts.len()] - 1;
        }
    }
    Ok(perm)
}

/// The classical sharply transitive set of six even permutations of six points.
pub const A6_SHARP_SET: [&str; 6] = ["()", "(12)(3456)", "(13)(2465)", "(14)(2536)", "(15)(2643)", "(16)(2354)"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SharplyTransitiveSet {
    pub q: u32,
    /// Subgroup whose right cosets are the points.
    pub point_stabilizer: Vec<Elem>,
    pub elements: Vec<Elem>,
    pub degree: usize,
    pub factorisation: ExactFactorisation,
}

/// For `q = 9`: realises the six-point sharply transitive set inside
/// PSL(2,9) acting on the cosets of an A5.
pub fn sharply_transitive_q9(g: &Group) -> Result<SharplyTransitiveSet> {
    if g.q() != 9 {
        return Err(Error::Degenerate("the six-point set lives in PSL(2,9)".into()));
    }
    let involutions: Vec<Elem> = g.elements().filter(|&t| g.element_order(t) == 2).collect();
    let a5 = polyhedral(g, &involutions)
        .into_iter()
        .find(|h| h.count() == 60)
        .ok_or_else(|| Error::WitnessFailed("no subgroup of order 60".into()))?;
    let action = CosetAction::new(g, &a5);
    if action.degree() != 6 {
        return Err(Error::WitnessFailed("coset action is not on six points".into()));
    }
    // The action is faithful with image A6, so each even permutation has a
    // unique preimage.
    let mut preimage: HashMap<Vec<usize>, Elem> = HashMap::new();
    for t in g.elements() {
        if preimage.insert(action.permutation(g, t), t).is_some() {
            return Err(Error::WitnessFailed("coset action is not faithful".into()));
        }
    }
    let mut elements = Vec::new();
    for s in A6_SHARP_SET {
        let p = parse_cycles(s, 6)?;
        let t = *preimage
            .get(&p)
            .ok_or_else(|| Error::WitnessFailed(format!("{s} is not in the image")))?;
        elements.push(t);
    }
    let perms: Vec<Vec<usize>> = elements.iter().map(|&t| action.permutation(g, t)).collect();
    match check_sharply_transitive(&perms, 6) {
        SharpnessCheck::Sharp => {}
        other => return Err(Error::WitnessFailed(format!("{other:?}"))),
    }
    let factorisation = verify_set_factorisation(g, &a5, &elements)?;
    elements.sort_unstable();
    Ok(SharplyTransitiveSet {
        q: 9,
        point_stabilizer: sorted(&a5),
        elements,
        degree: 6,
        factorisation,
    })
}

/// Re-verifies a stored sharply transitive set.
pub fn verify_sharply_transitive_set(g: &Group, w: &SharplyTransitiveSet) -> Result<()> {
    let a = bitset_of(g, &w.point_stabilizer);
    if !g.is_subgroup(&a) {
        return Err(Error::NotASubgroup("point stabiliser".into()));
    }
    let action = CosetAction::new(g, &a);
    let perms: Vec<Vec<usize>> = w.elements.iter().map(|&t| action.permutation(g, t)).collect();
    match check_sharply_transitive(&perms, action.degree()) {
        SharpnessCheck::Sharp => {}
        other => return Err(Error::WitnessFailed(format!("{other:?}"))),
    }
    verify_set_factorisation(g, &a, &w.elements).map(|_| ())
}

fn require_one_mod_four(g: &Group) -> Result<()> {
    if g.q() % 4 != 1 {
        return Err(Error::Degenerate(format!("q = {} is not 1 mod 4", g.q())));
    }
    Ok(())
}

/// Stabiliser of infinity and stabiliser of zero.
pub fn two_stabilizers(g: &Group) -> (Bitset, Bitset) {
    (g.point_stabilizer(ProjectivePoint(g.q())), g.point_stabilizer(ProjectivePoint(0)))
}

/// `{t^2 : t ∈ T_1}` for the stabiliser `T_1` of infinity, checked to be a
/// subgroup of index 2 in `T_1`.
pub fn squares_of_stabilizer(g: &Group, t1: &Bitset) -> Result<Bitset> {
    require_one_mod_four(g)?;
    let sq = Bitset::from_indices(g.order(), t1.iter().map(|t| g.mul(t as Elem, t as Elem) as usize));
    if !g.is_subgroup(&sq) || 2 * sq.count() != t1.count() || !sq.is_subset(t1) {
        return Err(Error::WitnessFailed(format!(
            "squares of the stabiliser form a set of size {} that is not an index-2 subgroup",
            sq.count()
        )));
    }
    Ok(sq)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HalfIntersectionReport {
    pub q: u32,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Elem>,
    /// Observed `|T_1 ∩ T_2 t|`.
    pub stabilizer_sizes: BTreeSet<usize>,
    /// Observed `|T_1^2 ∩ T_2 t|`.
    pub square_sizes: BTreeSet<usize>,
    /// Whether the first sizes lie in `{0, (q-1)/2}`.
    pub values_as_claimed: bool,
}

/// Checks `|T_1^2 ∩ T_2 t| = |T_1 ∩ T_2 t| / 2` for every `t`.
pub fn check_half_intersection(g: &Group) -> Result<HalfIntersectionReport> {
    require_one_mod_four(g)?;
    let (t1, t2) = two_stabilizers(g);
    let sq = squares_of_stabilizer(g, &t1)?;
    let t2v = sorted(&t2);
    let mut report = HalfIntersectionReport {
        q: g.q(),
        holds: true,
        counterexample: None,
        stabilizer_sizes: BTreeSet::new(),
        square_sizes: BTreeSet::new(),
        values_as_claimed: true,
    };
    // T_2 t depends only on the coset, so one t per coset suffices
    let action = CosetAction::new(g, &t2);
    for &t in &action.reps {
        let (mut a, mut b) = (0, 0);
        for &x in &t2v {
            let y = g.mul(x, t) as usize;
            if t1.contains(y) {
                a += 1;
                if sq.contains(y) {
                    b += 1;
                }
            }
        }
        report.stabilizer_sizes.insert(a);
        report.square_sizes.insert(b);
        if 2 * b != a && report.holds {
            report.holds = false;
            report.counterexample = Some(t);
        }
    }
    let half = (g.q() as usize - 1) / 2;
    report.values_as_claimed = report.stabilizer_sizes.iter().all(|&s| s == 0 || s == half);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SpreadingWitness {
    pub q: u32,
    /// Multiplicity of each element in the multiset.
    pub weights: Vec<u8>,
    /// The set whose images all meet the multiset in `lambda`.
    pub set: Vec<Elem>,
    pub lambda: u64,
    pub multiset_size: u64,
    pub images_checked: usize,
}

/// Distinct sets `x^-1 S y`.
pub fn translate_images(g: &Group, set: &[Elem]) -> Vec<Vec<Elem>> {
    let gens = g.generators();
    let mut base = set.to_vec();
    base.sort_unstable();
    let mut seen: HashSet<Vec<Elem>> = HashSet::new();
    seen.insert(base.clone());
    let mut out = vec![base];
    let mut i = 0;
    while i < out.len() {
        for &x in &gens {
            for left in [true, false] {
                let mut img: Vec<Elem> = out[i].iter().map(|&t| if left { g.mul(x, t) } else { g.mul(t, x) }).collect();
                img.sort_unstable();
                if seen.insert(img.clone()) {
                    out.push(img);
                }
            }
        }
        i += 1;
    }
    out.sort();
    out
}

/// Weight 2 on `T_1^2`, 1 off `T_1`, 0 elsewhere.
pub fn build_spreading_witness(g: &Group) -> Result<SpreadingWitness> {
    let report = check_half_intersection(g)?;
    if !report.holds {
        return Err(Error::WitnessFailed(format!(
            "half-intersection identity fails at t = {:?}",
            report.counterexample
        )));
    }
    let (t1, _) = two_stabilizers(g);
    let sq = squares_of_stabilizer(g, &t1)?;
    let weights: Vec<u8> = g
        .elements()
        .map(|t| {
            if sq.contains(t as usize) {
                2
            } else if t1.contains(t as usize) {
                0
            } else {
                1
            }
        })
        .collect();
    let mut w = SpreadingWitness {
        q: g.q(),
        weights,
        set: sorted(&t1),
        lambda: t1.count() as u64,
        multiset_size: 0,
        images_checked: 0,
    };
    w.multiset_size = w.weights.iter().map(|&x| x as u64).sum();
    w.images_checked = verify_spreading_witness(g, &w)?;
    Ok(w)
}

/// Checks the multiset size and every image sum; returns the image count.
pub fn verify_spreading_witness(g: &Group, w: &SpreadingWitness) -> Result<usize> {
    if w.weights.len() != g.order() {
        return Err(Error::WitnessFailed("weight vector length".into()));
    }
    let total: u64 = w.weights.iter().map(|&x| x as u64).sum();
    if total != w.multiset_size || g.order() as u64 % total != 0 {
        return Err(Error::WitnessFailed(format!("multiset size {total} does not divide {}", g.order())));
    }
    let images = translate_images(g, &w.set);
    for img in &images {
        let s: u64 = img.iter().map(|&t| w.weights[t as usize] as u64).sum();
        if s != w.lambda {
            return Err(Error::WitnessFailed(format!(
                "image with smallest element {} has weight {s}, expected {}",
                img[0], w.lambda
            )));
        }
    }
    Ok(images.len())
}
