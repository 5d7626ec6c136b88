//! Group association schemes, their fusions and exact eigenmatrices.
//!
//! Relation `j` of the group scheme of `T` is `{(x, y) : x y^-1 in C_j}` for a
//! conjugacy class `C_j`. Rows of `Q` are indexed by relations and columns by
//! eigenspaces; rows of `P` by eigenspaces and columns by relations.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Elem, Group};
use crate::linalg::{self, rat, Matrix, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Relation {
    pub label: String,
    /// Conjugacy class ids merged into this relation.
    pub classes: Vec<usize>,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenmatrices {
    pub p: Matrix,
    pub q: Matrix,
    pub multiplicities: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct AssociationScheme {
    order: usize,
    relations: Vec<Relation>,
    relation_of_class: Vec<usize>,
    intersection: Vec<Vec<Vec<u64>>>,
    eigen: Option<Eigenmatrices>,
    diagnostic: Option<String>,
}

/// Inner distribution `a`, indexed by relations.
pub type InnerDistribution = Vec<Rational>;

impl AssociationScheme {
    /// Number of points `|Omega|`.
    pub fn order(&self) -> usize {
        self.order
    }

    /// `d + 1`, counting the identity relation.
    pub fn rank(&self) -> usize {
        self.relations.len()
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn labels(&self) -> Vec<String> {
        self.relations.iter().map(|r| r.label.clone()).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.relations.iter().map(|r| r.size).collect()
    }

    pub fn relation_by_label(&self, label: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.label == label)
    }

    /// Relation containing conjugacy class `c`.
    pub fn relation_of_class(&self, c: usize) -> usize {
        self.relation_of_class[c]
    }

    /// Relation containing the pair `(x, y)`.
    pub fn relation_of_pair(&self, group: &Group, x: Elem, y: Elem) -> usize {
        self.relation_of_class[group.class_of(group.div(x, y))]
    }

    /// `p_ij^k`.
    pub fn p(&self, i: usize, j: usize, k: usize) -> u64 {
        self.intersection[i][j][k]
    }

    pub fn intersection_numbers(&self) -> &Vec<Vec<Vec<u64>>> {
        &self.intersection
    }

    /// `(B_i)_{jk} = p_ij^k`.
    pub fn intersection_matrix(&self, i: usize) -> Matrix {
        let r = self.rank();
        (0..r)
            .map(|j| (0..r).map(|k| rat(self.intersection[i][j][k] as i64)).collect())
            .collect()
    }

    pub fn eigenmatrices(&self) -> Option<&Eigenmatrices> {
        self.eigen.as_ref()
    }

    /// Why eigenmatrices are absent, if they are.
    pub fn diagnostic(&self) -> Option<&str> {
        self.diagnostic.as_deref()
    }

    pub fn q_matrix(&self) -> Result<&Matrix> {
        self.eigen.as_ref().map(|e| &e.q).ok_or(Error::MissingEigenmatrix)
    }

    pub fn p_matrix(&self) -> Result<&Matrix> {
        self.eigen.as_ref().map(|e| &e.p).ok_or(Error::MissingEigenmatrix)
    }

    /// Verifies the scheme axioms on the intersection numbers.
    pub fn check_axioms(&self) -> Result<()> {
        let r = self.rank();
        let n = self.sizes();
        let fail = |msg: String| Err(Error::FusionNotAScheme(msg));
        if n.iter().sum::<usize>() != self.order || n[0] != 1 {
            return fail("relation sizes do not partition the points".into());
        }
        for i in 0..r {
            for j in 0..r {
                let row_sum: u64 = (0..r).map(|l| self.p(i, l, j)).sum();
                if row_sum != n[i] as u64 {
                    return fail(format!("row {j} of B_{i} does not sum to n_{i}"));
                }
                for k in 0..r {
                    let pijk = self.p(i, j, k);
                    if self.p(0, j, k) != u64::from(j == k) {
                        return fail(format!("p_0{j}^{k} is not a delta"));
                    }
                    if pijk != self.p(j, i, k) {
                        return fail(format!("p_{i}{j}^{k} != p_{j}{i}^{k}"));
                    }
                    if pijk * n[k] as u64 != self.p(i, k, j) * n[j] as u64 {
                        return fail(format!("n_{k} p_{i}{j}^{k} != n_{j} p_{i}{k}^{j}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Inner distribution of the list `c`; repeated entries are counted
    /// with multiplicity.
    pub fn inner_distribution(&self, group: &Group, c: &[Elem]) -> Result<InnerDistribution> {
        if c.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut counts = vec![0u64; self.rank()];
        for &u in c {
            for &v in c {
                counts[self.relation_of_pair(group, u, v)] += 1;
            }
        }
        let len = rat(c.len() as i64);
        Ok(counts.into_iter().map(|x| rat(x as i64) / &len).collect())
    }

    /// `aQ`.
    pub fn macwilliams_transform(&self, a: &[Rational]) -> Result<Vec<Rational>> {
        Ok(linalg::vec_mat(a, self.q_matrix()?))
    }

    /// Indices `j >= 1` with `(aQ)_j != 0`.
    pub fn dual_degree_set(&self, a: &[Rational]) -> Result<Vec<usize>> {
        let t = self.macwilliams_transform(a)?;
        Ok((1..t.len()).filter(|&j| !t[j].is_zero()).collect())
    }

    pub fn design_orthogonal(&self, a: &[Rational], b: &[Rational]) -> Result<bool> {
        let x = self.dual_degree_set(a)?;
        let y = self.dual_degree_set(b)?;
        Ok(x.iter().all(|j| !y.contains(j)))
    }

    pub fn design_orthogonal_sets(&self, group: &Group, c: &[Elem], s: &[Elem]) -> Result<bool> {
        let a = self.inner_distribution(group, c)?;
        let b = self.inner_distribution(group, s)?;
        self.design_orthogonal(&a, &b)
    }
}

/// The scheme of conjugacy classes of `group`.
pub fn group_scheme(group: &Group) -> Result<AssociationScheme> {
    let classes = group.classes();
    if let Some(c) = classes.iter().find(|c| c.inverse_class != c.id) {
        return Err(Error::NonSymmetricScheme(format!(
            "class {} is not closed under inversion",
            c.label
        )));
    }
    let r = classes.len();
    let mut intersection = vec![vec![vec![0u64; r]; r]; r];
    // p_ij^k = #{w in C_j : v_k w^-1 in C_i} for a representative v_k of C_k.
    for (k, ck) in classes.iter().enumerate() {
        let v = ck.representative;
        for w in group.elements() {
            let j = group.class_of(w);
            let i = group.class_of(group.div(v, w));
            intersection[i][j][k] += 1;
        }
    }
    let relations = classes
        .iter()
        .map(|c| Relation {
            label: c.label.clone(),
            classes: vec![c.id],
            size: c.size,
        })
        .collect();
    let mut scheme = AssociationScheme {
        order: group.order(),
        relations,
        relation_of_class: (0..r).collect(),
        intersection,
        eigen: None,
        diagnostic: None,
    };
    scheme.check_axioms()?;
    match compute_eigenmatrices(&scheme) {
        Ok(e) => scheme.eigen = Some(e),
        Err(e) => scheme.diagnostic = Some(e.to_string()),
    }
    Ok(scheme)
}

/// Merges relations of `s` according to `parts`; `parts[0]` must be `[0]`.
/// Labels are given per part.
pub fn fuse_scheme(s: &AssociationScheme, parts: &[Vec<usize>], labels: &[String]) -> Result<AssociationScheme> {
    let r = s.rank();
    let fail = |m: String| Err(Error::FusionNotAScheme(m));
    if parts.first().map(|p| p.as_slice()) != Some(&[0][..]) {
        return fail("identity relation must form its own part".into());
    }
    if labels.len() != parts.len() {
        return fail("one label per part required".into());
    }
    let mut part_of = vec![usize::MAX; r];
    for (pi, part) in parts.iter().enumerate() {
        if part.is_empty() {
            return fail("empty part".into());
        }
        for &x in part {
            if x >= r || part_of[x] != usize::MAX {
                return fail(format!("relation {x} missing or repeated"));
            }
            part_of[x] = pi;
        }
    }
    if part_of.contains(&usize::MAX) {
        return fail("parts do not cover all relations".into());
    }
    let f = parts.len();
    let mut intersection = vec![vec![vec![0u64; f]; f]; f];
    for (ki, kpart) in parts.iter().enumerate() {
        for (ii, ipart) in parts.iter().enumerate() {
            for (ji, jpart) in parts.iter().enumerate() {
                let sum_for = |k: usize| -> u64 {
                    ipart
                        .iter()
                        .flat_map(|&i| jpart.iter().map(move |&j| (i, j)))
                        .map(|(i, j)| s.p(i, j, k))
                        .sum()
                };
                let v = sum_for(kpart[0]);
                if kpart.iter().any(|&k| sum_for(k) != v) {
                    return fail(format!("fused p_{ii}{ji}^{ki} depends on the representative"));
                }
                intersection[ii][ji][ki] = v;
            }
        }
    }
    let relations = parts
        .iter()
        .zip(labels)
        .map(|(part, label)| {
            let mut classes: Vec<usize> = part.iter().flat_map(|&x| s.relations[x].classes.clone()).collect();
            classes.sort_unstable();
            Relation {
                label: label.clone(),
                classes,
                size: part.iter().map(|&x| s.relations[x].size).sum(),
            }
        })
        .collect();
    let relation_of_class = s.relation_of_class.iter().map(|&x| part_of[x]).collect();
    let mut fused = AssociationScheme {
        order: s.order,
        relations,
        relation_of_class,
        intersection,
        eigen: None,
        diagnostic: None,
    };
    fused.check_axioms()?;
    fused.eigen = Some(compute_eigenmatrices(&fused)?);
    Ok(fused)
}

/// Fusion of the group scheme by power maps (rational classes).
pub fn rational_scheme(group: &Group) -> Result<AssociationScheme> {
    let parts: Vec<Vec<usize>> = group.fusion_classes().iter().map(|f| f.classes.clone()).collect();
    let labels: Vec<String> = group.fusion_classes().iter().map(|f| f.label.clone()).collect();
    match group_scheme(group) {
        Ok(base) => fuse_scheme(&base, &parts, &labels),
        // the classes are not real, but their rational unions are
        Err(Error::NonSymmetricScheme(_)) => fused_by_counting(group, &labels),
        Err(e) => Err(e),
    }
}

/// The rational fusion scheme counted directly on the fusion classes.
fn fused_by_counting(group: &Group, labels: &[String]) -> Result<AssociationScheme> {
    let fused = group.fusion_classes();
    let r = fused.len();
    let mut intersection = vec![vec![vec![0u64; r]; r]; r];
    for (k, fk) in fused.iter().enumerate() {
        let v = fk.members.iter().next().unwrap() as Elem;
        for w in group.elements() {
            intersection[group.fusion_of(group.div(v, w))][group.fusion_of(w)][k] += 1;
        }
    }
    let relations = fused
        .iter()
        .zip(labels)
        .map(|(f, label)| Relation { label: label.clone(), classes: f.classes.clone(), size: f.size })
        .collect();
    let mut scheme = AssociationScheme {
        order: group.order(),
        relations,
        relation_of_class: (0..group.classes().len()).map(|c| fused.iter().position(|f| f.classes.contains(&c)).unwrap()).collect(),
        intersection,
        eigen: None,
        diagnostic: None,
    };
    scheme.check_axioms()?;
    scheme.eigen = Some(compute_eigenmatrices(&scheme)?);
    Ok(scheme)
}

/// Exact `P`, `Q` and multiplicities from the intersection matrices.
pub fn compute_eigenmatrices(s: &AssociationScheme) -> Result<Eigenmatrices> {
    let r = s.rank();
    let sizes = s.sizes();
    let mut spaces: Vec<Vec<Vec<Rational>>> = vec![linalg::identity(r)];
    for i in 1..r {
        if spaces.iter().all(|sp| sp.len() == 1) {
            break;
        }
        let b = s.intersection_matrix(i);
        let poly = linalg::char_poly(&b);
        let (roots, rest) = linalg::integer_roots(&poly, sizes[i] as i64);
        if rest.len() > 1 {
            return Err(Error::IrrationalEigenvalue { relation: s.relations[i].label.clone() });
        }
        let mut next = Vec::new();
        for space in &spaces {
            if space.len() == 1 {
                next.push(space.clone());
                continue;
            }
            let mut found = 0;
            for &(lambda, _) in &roots {
                // (B - lambda) W c = 0
                let mut shifted = b.clone();
                for (d, row) in shifted.iter_mut().enumerate() {
                    row[d] -= rat(lambda);
                }
                let bw: Matrix = shifted
                    .iter()
                    .map(|row| space.iter().map(|w| row.iter().zip(w).map(|(x, y)| x * y).sum()).collect())
                    .collect();
                let coeffs = linalg::nullspace(&bw, space.len());
                if coeffs.is_empty() {
                    continue;
                }
                found += coeffs.len();
                next.push(
                    coeffs
                        .iter()
                        .map(|c| {
                            (0..r)
                                .map(|t| space.iter().zip(c).map(|(w, ci)| &w[t] * ci).sum())
                                .collect()
                        })
                        .collect(),
                );
            }
            if found != space.len() {
                return Err(Error::IrrationalEigenvalue { relation: s.relations[i].label.clone() });
            }
        }
        spaces = next;
    }
    if spaces.iter().any(|sp| sp.len() != 1) {
        return Err(Error::FusionNotAScheme("eigenspaces do not separate".into()));
    }
    let mut rows: Vec<Vec<Rational>> = spaces
        .into_iter()
        .map(|mut sp| {
            let x = sp.pop().expect("one vector");
            let x0 = x[0].clone();
            x.into_iter().map(|v| v / &x0).collect()
        })
        .collect();
    let trivial: Vec<Rational> = sizes.iter().map(|&n| rat(n as i64)).collect();
    rows.sort_by(|a, b| {
        (a != &trivial)
            .cmp(&(b != &trivial))
            .then_with(|| a.cmp(b))
    });
    if rows[0] != trivial {
        return Err(Error::FusionNotAScheme("no trivial eigenspace".into()));
    }
    let omega = rat(s.order as i64);
    let mut multiplicities = Vec::with_capacity(r);
    for row in &rows {
        let denom: Rational = row
            .iter()
            .zip(&sizes)
            .map(|(p, &n)| p * p / rat(n as i64))
            .sum();
        let m = &omega / denom;
        let mi = linalg::to_i64(&m)
            .filter(|&v| v > 0)
            .ok_or_else(|| Error::FusionNotAScheme(format!("non-integral multiplicity {m}")))?;
        multiplicities.push(mi as u64);
    }
    let q: Matrix = (0..r)
        .map(|j| {
            (0..r)
                .map(|i| rat(multiplicities[i] as i64) * &rows[i][j] / rat(sizes[j] as i64))
                .collect()
        })
        .collect();
    let pq = linalg::mat_mul(&rows, &q);
    for (i, row) in pq.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let want = if i == j { omega.clone() } else { rat(0) };
            if *x != want {
                return Err(Error::FusionNotAScheme("PQ != |Omega| I".into()));
            }
        }
    }
    debug_assert!(q.iter().all(|row| !row[0].is_negative()));
    Ok(Eigenmatrices { p: rows, q, multiplicities })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitset::Bitset;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn q13_unfused_and_fused() {
        let g = Group::new(13).unwrap();
        let s = group_scheme(&g).unwrap();
        assert_eq!(s.rank(), 9);
        assert_eq!(s.sizes().iter().sum::<usize>(), 1092);
        assert!(s.eigenmatrices().is_none());
        assert!(s.diagnostic().is_some());
        for j in 0..s.rank() {
            for k in 0..s.rank() {
                assert_eq!(s.p(0, j, k), u64::from(j == k));
            }
        }
        let f = rational_scheme(&g).unwrap();
        assert_eq!(f.labels(), vec!["1", "2", "3", "6", "7", "13"]);
        assert_eq!(f.sizes(), vec![1, 91, 182, 182, 468, 168]);
        let e = f.eigenmatrices().unwrap();
        assert_eq!(e.multiplicities.iter().sum::<u64>(), 1092);
        assert!(e.q.iter().flatten().all(|x| x.is_integer()));
        for row in &e.q {
            assert_eq!(row[0], rat(1));
        }
        let m: Vec<Rational> = e.multiplicities.iter().map(|&m| rat(m as i64)).collect();
        assert_eq!(e.q[0], m);
    }

    #[test]
    fn q17_fused_is_rational() {
        let g = Group::new(17).unwrap();
        let f = rational_scheme(&g).unwrap();
        assert_eq!(f.rank(), 7);
        let e = f.eigenmatrices().unwrap();
        let pq = linalg::mat_mul(&e.p, &e.q);
        for (i, row) in pq.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                assert_eq!(*x, if i == j { rat(2448) } else { rat(0) });
            }
        }
    }

    #[test]
    fn single_relation_scheme() {
        let s = AssociationScheme {
            order: 1,
            relations: vec![Relation { label: "1".into(), classes: vec![0], size: 1 }],
            relation_of_class: vec![0],
            intersection: vec![vec![vec![1]]],
            eigen: None,
            diagnostic: None,
        };
        let e = compute_eigenmatrices(&s).unwrap();
        assert_eq!(e.q, vec![vec![rat(1)]]);
    }

    #[test]
    fn bad_fusion_rejected() {
        let g = Group::new(13).unwrap();
        let s = group_scheme(&g).unwrap();
        // merge 7A alone with the identity class set split wrongly: 13A with 2
        let a13 = g.class_by_label("13A").unwrap();
        let c2 = g.class_by_label("2").unwrap();
        let mut parts: Vec<Vec<usize>> = vec![vec![0], vec![a13, c2]];
        for c in 1..s.rank() {
            if c != a13 && c != c2 {
                parts.push(vec![c]);
            }
        }
        let labels: Vec<String> = (0..parts.len()).map(|i| i.to_string()).collect();
        assert!(matches!(fuse_scheme(&s, &parts, &labels), Err(Error::FusionNotAScheme(_))));
    }

    #[test]
    fn inner_distributions() {
        let g = Group::new(13).unwrap();
        let f = rational_scheme(&g).unwrap();
        let a = f.inner_distribution(&g, &[g.identity()]).unwrap();
        assert_eq!(a, ints(&[1, 0, 0, 0, 0, 0]));
        let all: Vec<Elem> = g.elements().collect();
        let a = f.inner_distribution(&g, &all).unwrap();
        assert_eq!(a, ints(&[1, 91, 182, 182, 468, 168]));
        let x = g.fusion_classes()[5].members.iter().next().unwrap() as Elem;
        let sub: Vec<Elem> = g.generate(&[x]).iter().map(|e| e as Elem).collect();
        let a = f.inner_distribution(&g, &sub).unwrap();
        assert_eq!(a, ints(&[1, 0, 0, 0, 0, 12]));
        let t = f.macwilliams_transform(&a).unwrap();
        assert_eq!(t[0], rat(13));
        assert!(t.iter().all(|v| !v.is_negative()));
        assert!(f.design_orthogonal(&ints(&[1, 0, 0, 0, 0, 0]), &f.inner_distribution(&g, &all).unwrap()).unwrap());
        assert!(f.inner_distribution(&g, &[]).is_err());
    }

    fn relation_rows(g: &Group, s: &AssociationScheme) -> Vec<Vec<Bitset>> {
        (0..s.rank())
            .map(|r| {
                g.elements()
                    .map(|u| {
                        Bitset::from_indices(
                            g.order(),
                            g.elements().filter(|&w| s.relation_of_pair(g, u, w) == r).map(|w| w as usize),
                        )
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn q9_axioms_exhaustive() {
        let g = Group::new(9).unwrap();
        for s in [group_scheme(&g).unwrap(), rational_scheme(&g).unwrap()] {
            let rows = relation_rows(&g, &s);
            let r = s.rank();
            for u in g.elements() {
                for v in g.elements() {
                    let k = s.relation_of_pair(&g, u, v);
                    for i in 0..r {
                        for j in 0..r {
                            let c = rows[i][u as usize].intersection_count(&rows[j][v as usize]);
                            assert_eq!(c as u64, s.p(i, j, k));
                        }
                    }
                }
            }
        }
    }

    // F_i = |Omega|^-1 sum_j Q_ji A_j applied to v.
    fn apply_f(g: &Group, s: &AssociationScheme, i: usize, v: &[Rational]) -> Vec<Rational> {
        let q = s.q_matrix().unwrap();
        let omega = rat(g.order() as i64);
        let mut out = vec![rat(0); v.len()];
        for u in g.elements() {
            let mut acc = rat(0);
            for w in g.elements() {
                let j = s.relation_of_pair(g, u, w);
                if !q[j][i].is_zero() && !v[w as usize].is_zero() {
                    acc += &q[j][i] * &v[w as usize];
                }
            }
            out[u as usize] = acc / &omega;
        }
        out
    }

    fn check_projections(g: &Group, s: &AssociationScheme, v: &[Rational]) {
        let r = s.rank();
        let fv: Vec<_> = (0..r).map(|i| apply_f(g, s, i, v)).collect();
        let mut total = vec![rat(0); v.len()];
        for i in 0..r {
            for (t, x) in total.iter_mut().zip(&fv[i]) {
                *t += x;
            }
            for j in 0..r {
                let ffv = apply_f(g, s, i, &fv[j]);
                if i == j {
                    assert_eq!(ffv, fv[i]);
                } else {
                    assert!(ffv.iter().all(|x| x.is_zero()));
                }
            }
        }
        assert_eq!(total, v);
    }

    // The A_j commute with right translations, so checking on the point
    // indicators of one orbit representative covers every basis vector.
    #[test]
    fn projections_q9() {
        let g = Group::new(9).unwrap();
        let s = rational_scheme(&g).unwrap();
        for e in [g.identity(), 17, 200] {
            let mut v = vec![rat(0); g.order()];
            v[e as usize] = rat(1);
            check_projections(&g, &s, &v);
        }
    }

    #[test]
    fn projections_q13_random() {
        use rand::{Rng, SeedableRng};
        let g = Group::new(13).unwrap();
        let s = rational_scheme(&g).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let v: Vec<Rational> = (0..g.order()).map(|_| rat(rng.gen_range(-3..4))).collect();
        check_projections(&g, &s, &v);
    }
}
