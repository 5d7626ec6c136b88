//! Inner-distribution feasibility for clique/coclique pairs meeting the
//! clique-coclique bound with equality.
//!
//! For a complementary pair `{I, I^c}` of fused class-sets, a maximum clique
//! `C` of `Gamma_I` and maximum coclique `S` with `|C||S| = |Omega|` have inner
//! distributions `a` (supported on `{0} u I`) and `b` (on `{0} u I^c`) with
//! disjoint dual degree sets. Each side ranges over a polytope cut out by
//! `a >= 0`, `aQ >= 0` and a zero pattern on `aQ`; faces of these polytopes
//! are enumerated exactly from their vertices.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::linalg::{self, rat, Rational};
use crate::scheme::AssociationScheme;

/// Unordered pair `{I, I^c}`; `side` is the half containing relation 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct CandidatePair {
    pub side: Vec<usize>,
    pub complement: Vec<usize>,
}

/// A segment `base + t * direction`, `lo <= t <= hi`, where `t` equals the
/// entry at `coordinate`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub coordinate: usize,
    pub base: Vec<Rational>,
    pub direction: Vec<Rational>,
    pub lo: Rational,
    pub hi: Rational,
}

/// A face of the feasible polytope of one side.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Family {
    /// Relations allowed in the support.
    pub support: Vec<usize>,
    /// Eigenspaces `j >= 1` on which the transform vanishes identically.
    pub dual_zeros: Vec<usize>,
    /// Sorted vertices of the face.
    pub vertices: Vec<Vec<Rational>>,
}

impl Family {
    pub fn dimension(&self) -> usize {
        if self.vertices.len() <= 1 {
            return 0;
        }
        let base = &self.vertices[0];
        let diffs: Vec<Vec<Rational>> = self.vertices[1..]
            .iter()
            .map(|v| v.iter().zip(base).map(|(x, y)| x - y).collect())
            .collect();
        linalg::rank(&diffs)
    }

    /// Entry sum, constant over the face.
    pub fn size(&self) -> Rational {
        self.vertices[0].iter().sum()
    }

    /// Relations with a nonzero entry somewhere on the face.
    pub fn effective_support(&self) -> Vec<usize> {
        let r = self.vertices[0].len();
        (1..r)
            .filter(|&i| self.vertices.iter().any(|v| !v[i].is_zero()))
            .collect()
    }

    pub fn segment(&self) -> Option<Segment> {
        if self.vertices.len() != 2 {
            return None;
        }
        let (v0, v1) = (&self.vertices[0], &self.vertices[1]);
        let coordinate = (0..v0.len()).find(|&i| v0[i] != v1[i])?;
        let span = &v1[coordinate] - &v0[coordinate];
        let direction: Vec<Rational> = v1.iter().zip(v0).map(|(x, y)| (x - y) / &span).collect();
        let t0 = v0[coordinate].clone();
        let base: Vec<Rational> = v0.iter().zip(&direction).map(|(x, d)| x - d * &t0).collect();
        let (lo, hi) = if v0[coordinate] < v1[coordinate] {
            (v0[coordinate].clone(), v1[coordinate].clone())
        } else {
            (v1[coordinate].clone(), v0[coordinate].clone())
        };
        Some(Segment { coordinate, base, direction, lo, hi })
    }

    /// Membership of `x` in the face's defining polytope.
    pub fn contains(&self, s: &AssociationScheme, x: &[Rational]) -> Result<bool> {
        if x[0] != rat(1) || x.iter().any(|v| v.is_negative()) {
            return Ok(false);
        }
        if (1..x.len()).any(|i| !x[i].is_zero() && !self.support.contains(&i)) {
            return Ok(false);
        }
        let t = s.macwilliams_transform(x)?;
        Ok(t.iter().all(|v| !v.is_negative()) && self.dual_zeros.iter().all(|&j| t[j].is_zero()))
    }
}

/// Clique-side family `a` on `I` and coclique-side family `b` on `I^c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasiblePair {
    pub clique_classes: Vec<usize>,
    pub coclique_classes: Vec<usize>,
    pub a: Family,
    pub b: Family,
    pub clique_size: Rational,
    pub coclique_size: Rational,
}

impl FeasiblePair {
    /// Whether both sizes are integers with product `|Omega|`.
    pub fn sizes_admissible(&self, omega: usize) -> bool {
        self.clique_size.is_integer()
            && self.coclique_size.is_integer()
            && self.clique_size.is_positive()
            && self.clique_size.clone() * &self.coclique_size == rat(omega as i64)
    }

    pub fn clique_target(&self) -> Option<u64> {
        linalg::to_i64(&self.clique_size).map(|v| v as u64)
    }

    pub fn coclique_target(&self) -> Option<u64> {
        linalg::to_i64(&self.coclique_size).map(|v| v as u64)
    }

    fn swapped(&self) -> FeasiblePair {
        FeasiblePair {
            clique_classes: self.coclique_classes.clone(),
            coclique_classes: self.clique_classes.clone(),
            a: self.b.clone(),
            b: self.a.clone(),
            clique_size: self.coclique_size.clone(),
            coclique_size: self.clique_size.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct FeasibilityOptions {
    /// Drop pairs whose sizes are not integers dividing `|Omega|`.
    pub divisibility_filter: bool,
}

impl Default for FeasibilityOptions {
    fn default() -> Self {
        FeasibilityOptions { divisibility_filter: true }
    }
}

/// All unordered pairs of nonempty complementary subsets of relations `1..=d`.
pub fn candidate_class_sets(s: &AssociationScheme) -> Vec<CandidatePair> {
    let d = s.rank() - 1;
    if d < 2 {
        return Vec::new();
    }
    let mut out = Vec::new();
    // bit 0 (relation 1) always on the first side
    for mask in 0u64..(1 << (d - 1)) {
        let full = (mask << 1) | 1;
        if full == (1 << d) - 1 {
            continue;
        }
        let side: Vec<usize> = (0..d).filter(|b| full >> b & 1 == 1).map(|b| b + 1).collect();
        let complement: Vec<usize> = (0..d).filter(|b| full >> b & 1 == 0).map(|b| b + 1).collect();
        out.push(CandidatePair { side, complement });
    }
    out.sort();
    out
}

struct SidePolytope {
    support: Vec<usize>,
    vertices: Vec<Vec<Rational>>,
    zero_sets: Vec<BTreeSet<usize>>,
}

fn transform_ok(t: &[Rational]) -> bool {
    t.iter().all(|v| !v.is_negative())
}

/// Vertices of `{a : a_0 = 1, supp a in {0} u support, a >= 0, aQ >= 0}`.
fn side_polytope(s: &AssociationScheme, support: &[usize]) -> Result<SidePolytope> {
    let q = s.q_matrix()?;
    let r = s.rank();
    let k = support.len();
    // Constraint rows over the free coordinates: c . x + c0 >= 0.
    let mut cons: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for i in 0..k {
        let mut c = vec![rat(0); k];
        c[i] = rat(1);
        cons.push((c, rat(0)));
    }
    for j in 1..r {
        let c: Vec<Rational> = support.iter().map(|&i| q[i][j].clone()).collect();
        cons.push((c, q[0][j].clone()));
    }
    let mut vertices: BTreeSet<Vec<Rational>> = BTreeSet::new();
    for combo in combinations(cons.len(), k) {
        let m: Vec<Vec<Rational>> = combo.iter().map(|&c| cons[c].0.clone()).collect();
        let rhs: Vec<Rational> = combo.iter().map(|&c| -cons[c].1.clone()).collect();
        let Some((x, null)) = linalg::solve_affine(&m, &rhs, k) else {
            continue;
        };
        if !null.is_empty() {
            continue;
        }
        let mut a = vec![rat(0); r];
        a[0] = rat(1);
        for (idx, &i) in support.iter().enumerate() {
            a[i] = x[idx].clone();
        }
        if a.iter().any(|v| v.is_negative()) {
            continue;
        }
        if !transform_ok(&s.macwilliams_transform(&a)?) {
            continue;
        }
        vertices.insert(a);
    }
    let vertices: Vec<Vec<Rational>> = vertices.into_iter().collect();
    let zero_sets = vertices
        .iter()
        .map(|v| {
            let t = s.macwilliams_transform(v)?;
            Ok((1..r).filter(|&j| t[j].is_zero()).collect())
        })
        .collect::<Result<Vec<BTreeSet<usize>>>>()?;
    Ok(SidePolytope { support: support.to_vec(), vertices, zero_sets })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

impl SidePolytope {
    /// Closed zero patterns: intersections of vertex zero sets.
    fn closed_patterns(&self) -> Vec<BTreeSet<usize>> {
        let mut pats: BTreeSet<BTreeSet<usize>> = self.zero_sets.iter().cloned().collect();
        loop {
            let cur: Vec<_> = pats.iter().cloned().collect();
            let mut grew = false;
            for x in &cur {
                for y in &cur {
                    let z: BTreeSet<usize> = x.intersection(y).cloned().collect();
                    grew |= pats.insert(z);
                }
            }
            if !grew {
                break;
            }
        }
        pats.into_iter().collect()
    }

    fn face(&self, zeros: &BTreeSet<usize>) -> Family {
        Family {
            support: self.support.clone(),
            dual_zeros: zeros.iter().cloned().collect(),
            vertices: self
                .vertices
                .iter()
                .zip(&self.zero_sets)
                .filter(|(_, z)| zeros.is_subset(z))
                .map(|(v, _)| v.clone())
                .collect(),
        }
    }
}

/// Maximal feasible families for `Gamma_I` with `I = clique_classes`.
pub fn enumerate_feasible_pairs(
    s: &AssociationScheme,
    clique_classes: &[usize],
    opts: FeasibilityOptions,
) -> Result<Vec<FeasiblePair>> {
    let d = s.rank() - 1;
    let coclique_classes: Vec<usize> = (1..=d).filter(|i| !clique_classes.contains(i)).collect();
    let pa = side_polytope(s, clique_classes)?;
    let pb = side_polytope(s, &coclique_classes)?;
    let za = pa.closed_patterns();
    let zb = pb.closed_patterns();
    let all: BTreeSet<usize> = (1..=d).collect();
    let mut valid: Vec<(&BTreeSet<usize>, &BTreeSet<usize>)> = Vec::new();
    for x in &za {
        for y in &zb {
            if x.union(y).cloned().collect::<BTreeSet<_>>() == all {
                valid.push((x, y));
            }
        }
    }
    let maximal: Vec<_> = valid
        .iter()
        .filter(|(x, y)| {
            !valid
                .iter()
                .any(|(x2, y2)| (x2, y2) != (x, y) && x2.is_subset(x) && y2.is_subset(y))
        })
        .collect();
    let omega = rat(s.order() as i64);
    let mut out = Vec::new();
    for (x, y) in maximal {
        let a = pa.face(x);
        let b = pb.face(y);
        let ca = a.size();
        let cb = b.size();
        debug_assert!(a.vertices.iter().all(|v| v.iter().sum::<Rational>() == ca));
        debug_assert!(b.vertices.iter().all(|v| v.iter().sum::<Rational>() == cb));
        debug_assert_eq!(&ca * &cb, omega);
        let pair = FeasiblePair {
            clique_classes: clique_classes.to_vec(),
            coclique_classes: coclique_classes.clone(),
            a,
            b,
            clique_size: ca,
            coclique_size: cb,
        };
        if opts.divisibility_filter && !pair.sizes_admissible(s.order()) {
            continue;
        }
        out.push(pair);
    }
    out.sort_by(|p, q| (&p.clique_size, &p.a.vertices).cmp(&(&q.clique_size, &q.a.vertices)));
    Ok(out)
}

/// Verifies the defining identities of a pair at every vertex combination.
pub fn check_pair(s: &AssociationScheme, p: &FeasiblePair) -> Result<bool> {
    let omega = rat(s.order() as i64);
    for a in &p.a.vertices {
        for b in &p.b.vertices {
            let ab_ok = (1..a.len()).all(|i| (a[i].clone() * &b[i]).is_zero());
            let ta = s.macwilliams_transform(a)?;
            let tb = s.macwilliams_transform(b)?;
            let prod_ok = (1..ta.len()).all(|j| (ta[j].clone() * &tb[j]).is_zero()) && ta[0].clone() * &tb[0] == omega;
            if !ab_ok || !prod_ok || !transform_ok(&ta) || !transform_ok(&tb) {
                return Ok(false);
            }
            if !p.a.contains(s, a)? || !p.b.contains(s, b)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Every feasible pair over all candidate class-sets, for the graph on the
/// `side` half of each candidate.
pub fn enumerate_all(s: &AssociationScheme, opts: FeasibilityOptions) -> Result<Vec<(CandidatePair, Vec<FeasiblePair>)>> {
    candidate_class_sets(s)
        .into_par_iter()
        .map(|c| {
            let pairs = enumerate_feasible_pairs(s, &c.side, opts)?;
            Ok((c, pairs))
        })
        .collect()
}

/// One row of the putative table: a feasible family not contained (up to
/// complementation) in another.
#[derive(Clone, Debug)]
pub struct PutativeRow {
    /// Named graph; the side with fewer classes (ties: the side with relation 1).
    pub graph: Vec<usize>,
    pub pair: FeasiblePair,
    /// Other per-graph pairs lying inside this family.
    pub covers: Vec<FeasiblePair>,
}

impl PutativeRow {
    pub fn omega_target(&self) -> u64 {
        self.pair.clique_target().expect("admissible")
    }

    pub fn alpha_target(&self) -> u64 {
        self.pair.coclique_target().expect("admissible")
    }
}

fn face_within(s: &AssociationScheme, inner: &Family, outer: &Family) -> Result<bool> {
    for v in &inner.vertices {
        if !outer.contains(s, v)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn pair_within(s: &AssociationScheme, inner: &FeasiblePair, outer: &FeasiblePair) -> Result<bool> {
    Ok(face_within(s, &inner.a, &outer.a)? && face_within(s, &inner.b, &outer.b)?)
}

fn orient(p: &FeasiblePair) -> FeasiblePair {
    let (x, y) = (p.clique_classes.len(), p.coclique_classes.len());
    if y < x || (x == y && p.coclique_classes.first() < p.clique_classes.first()) {
        p.swapped()
    } else {
        p.clone()
    }
}

/// Merges per-graph pairs into maximal families up to complementation.
pub fn putative_table(s: &AssociationScheme, all: &[(CandidatePair, Vec<FeasiblePair>)]) -> Result<Vec<PutativeRow>> {
    let pairs: Vec<FeasiblePair> = all.iter().flat_map(|(_, ps)| ps.iter().cloned()).collect();
    let mut rows: Vec<PutativeRow> = Vec::new();
    let contained = |i: usize, j: usize| -> Result<bool> {
        Ok(pair_within(s, &pairs[i], &pairs[j])? || pair_within(s, &pairs[i].swapped(), &pairs[j])?)
    };
    let mut top = Vec::new();
    for i in 0..pairs.len() {
        let mut dominated = false;
        for j in 0..pairs.len() {
            if i != j && contained(i, j)? && !(contained(j, i)? && j > i) {
                dominated = true;
                break;
            }
        }
        if !dominated {
            top.push(i);
        }
    }
    for &t in &top {
        let mut covers = Vec::new();
        for i in 0..pairs.len() {
            if i != t && contained(i, t)? {
                covers.push(orient(&pairs[i]));
            }
        }
        let pair = orient(&pairs[t]);
        rows.push(PutativeRow { graph: pair.clique_classes.clone(), pair, covers });
    }
    rows.sort_by(|x, y| {
        (x.graph.len(), x.omega_target(), &x.graph).cmp(&(y.graph.len(), y.omega_target(), &y.graph))
    });
    Ok(rows)
}
