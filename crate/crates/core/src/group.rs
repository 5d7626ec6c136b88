//! PSL(2,q): element enumeration, multiplication, conjugacy classes and their
//! rational (power-map) fusion, the projective-line action, and the
//! automorphisms used to exploit symmetry elsewhere.
//!
//! Elements are 2x2 determinant-one matrices modulo sign. Of `{M, -M}` the
//! stored representative is the one whose first nonzero entry in the scan
//! order `(a, b, c, d)` lies in the canonical half of GF(q)* (see
//! [`Field::is_canonical_sign`]). Canonical matrices are sorted
//! lexicographically by entry encodings; an element's index is its rank in
//! that order. Certificates refer to elements by these indices.

use std::collections::{HashMap, VecDeque};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::field::{prime_power, Field};

/// Dense element index in `[0, |T|)`.
pub type Elem = u32;

/// Matrix entries `[a, b, c, d]` as field encodings.
pub type Matrix = [u32; 4];

const MUL_TABLE_LIMIT: usize = 4096;
const DENSE_LOOKUP_LIMIT: u64 = 1 << 24;

enum Lookup {
    Dense(Vec<u32>),
    Sparse(HashMap<Matrix, u32>),
}

/// A point of the projective line: `0..q` is `(x:1)`, `q` is `(1:0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjectivePoint(pub u32);

#[derive(Clone, Debug)]
pub struct ConjugacyClass {
    pub id: usize,
    pub label: String,
    pub order: u32,
    pub representative: Elem,
    pub members: Bitset,
    pub size: usize,
    pub inverse_class: usize,
    pub fusion_orbit: usize,
}

/// A rational class: the union of the conjugacy classes of `x^k` over `k`
/// coprime to the order of `x`.
#[derive(Clone, Debug)]
pub struct FusionClass {
    pub id: usize,
    pub label: String,
    pub order: u32,
    pub classes: Vec<usize>,
    pub members: Bitset,
    pub size: usize,
}

pub struct Group {
    field: Field,
    matrices: Vec<Matrix>,
    lookup: Lookup,
    identity: Elem,
    inverse: Vec<Elem>,
    orders: Vec<u32>,
    mul_table: Option<Vec<u16>>,
    generators: [Elem; 2],
    classes: Vec<ConjugacyClass>,
    class_of: Vec<u16>,
    fusion: Vec<FusionClass>,
}

impl std::fmt::Debug for Group {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Group")
            .field("q", &self.q())
            .field("order", &self.order())
            .finish()
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `q(q^2-1)/gcd(2,q-1)`
pub fn psl_order(q: u64) -> u64 {
    q * (q * q - 1) / gcd(2, q - 1)
}

impl Group {
    pub fn new(q: u64) -> Result<Self> {
        if q < 4 {
            return Err(Error::GroupTooSmall(q));
        }
        if prime_power(q).is_none() {
            return Err(Error::NotPrimePower(q));
        }
        let field = Field::of_order(q)?;
        let qq = field.order();

        let mut matrices = Vec::with_capacity(psl_order(q) as usize);
        for a in 0..qq {
            for c in 0..qq {
                if a == 0 && c == 0 {
                    continue;
                }
                for x in 0..qq {
                    let (b, d) = if a != 0 {
                        // d = (1 + x c) / a
                        (x, field.mul(field.add(1, field.mul(x, c)), field.inv(a)))
                    } else {
                        (field.neg(field.inv(c)), x)
                    };
                    let m = [a, b, c, d];
                    if canonical_form(&field, m) == m {
                        matrices.push(m);
                    }
                }
            }
        }
        matrices.sort_unstable();
        debug_assert_eq!(matrices.len() as u64, psl_order(q));

        let lookup = if (qq as u64).pow(4) <= DENSE_LOOKUP_LIMIT {
            let mut dense = vec![u32::MAX; (qq as usize).pow(4)];
            for (i, m) in matrices.iter().enumerate() {
                dense[dense_key(qq, m)] = i as u32;
            }
            Lookup::Dense(dense)
        } else {
            Lookup::Sparse(
                matrices
                    .iter()
                    .enumerate()
                    .map(|(i, m)| (*m, i as u32))
                    .collect(),
            )
        };

        let mut group = Group {
            field,
            matrices,
            lookup,
            identity: 0,
            inverse: Vec::new(),
            orders: Vec::new(),
            mul_table: None,
            generators: [0, 0],
            classes: Vec::new(),
            class_of: Vec::new(),
            fusion: Vec::new(),
        };
        group.identity = group.index_of([1, 0, 0, 1]).expect("identity");
        group.inverse = (0..group.order() as u32)
            .map(|i| {
                let [a, b, c, d] = group.matrices[i as usize];
                let f = &group.field;
                group.index_of([d, f.neg(b), f.neg(c), a]).expect("inverse")
            })
            .collect();
        if group.order() <= MUL_TABLE_LIMIT {
            let n = group.order();
            let mut table = vec![0u16; n * n];
            for i in 0..n {
                for j in 0..n {
                    table[i * n + j] = group.mul_slow(i as Elem, j as Elem) as u16;
                }
            }
            group.mul_table = Some(table);
        }
        group.orders = (0..group.order() as u32)
            .map(|x| group.compute_order(x))
            .collect();
        group.generators = group.choose_generators();
        group.build_classes();
        Ok(group)
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.order()
    }

    /// `|T|`
    pub fn order(&self) -> usize {
        self.matrices.len()
    }

    pub fn identity(&self) -> Elem {
        self.identity
    }

    pub fn matrix(&self, x: Elem) -> Matrix {
        self.matrices[x as usize]
    }

    pub fn generators(&self) -> [Elem; 2] {
        self.generators
    }

    /// Index of the element represented by `m` (either sign), if `det m = 1`.
    pub fn index_of(&self, m: Matrix) -> Option<Elem> {
        let f = &self.field;
        let det = f.sub(f.mul(m[0], m[3]), f.mul(m[1], m[2]));
        if det != 1 {
            return None;
        }
        let m = canonical_form(f, m);
        match &self.lookup {
            Lookup::Dense(d) => Some(d[dense_key(f.order(), &m)]),
            Lookup::Sparse(h) => h.get(&m).copied(),
        }
    }

    /// Upper unitriangular elements: a Sylow subgroup for the characteristic,
    /// of order q.
    pub fn unipotent_subgroup(&self) -> Vec<Elem> {
        let mut v: Vec<Elem> = (0..self.q())
            .map(|b| self.index_of([1, b, 0, 1]).expect("determinant one"))
            .collect();
        v.sort_unstable();
        v
    }

    fn mat_mul(&self, x: Matrix, y: Matrix) -> Matrix {
        let f = &self.field;
        let [a, b, c, d] = x;
        let [e, g, h, k] = y;
        [
            f.add(f.mul(a, e), f.mul(b, h)),
            f.add(f.mul(a, g), f.mul(b, k)),
            f.add(f.mul(c, e), f.mul(d, h)),
            f.add(f.mul(c, g), f.mul(d, k)),
        ]
    }

    fn mul_slow(&self, x: Elem, y: Elem) -> Elem {
        let m = self.mat_mul(self.matrices[x as usize], self.matrices[y as usize]);
        self.index_of(m).expect("closed under multiplication")
    }

    #[inline]
    pub fn mul(&self, x: Elem, y: Elem) -> Elem {
        match &self.mul_table {
            Some(t) => t[x as usize * self.matrices.len() + y as usize] as Elem,
            None => self.mul_slow(x, y),
        }
    }

    #[inline]
    pub fn inv(&self, x: Elem) -> Elem {
        self.inverse[x as usize]
    }

    /// `x * y^-1`
    #[inline]
    pub fn div(&self, x: Elem, y: Elem) -> Elem {
        self.mul(x, self.inv(y))
    }

    /// `g^-1 x g`
    pub fn conjugate(&self, x: Elem, g: Elem) -> Elem {
        self.mul(self.mul(self.inv(g), x), g)
    }

    pub fn pow(&self, x: Elem, mut k: u64) -> Elem {
        let mut acc = self.identity;
        let mut base = x;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            k >>= 1;
        }
        acc
    }

    fn compute_order(&self, x: Elem) -> u32 {
        let mut y = x;
        let mut n = 1;
        while y != self.identity {
            y = self.mul(y, x);
            n += 1;
        }
        n
    }

    pub fn element_order(&self, x: Elem) -> u32 {
        self.orders[x as usize]
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.order() as Elem
    }

    /// Subgroup generated by `gens`, as a bitmap.
    pub fn generate(&self, gens: &[Elem]) -> Bitset {
        let mut seen = Bitset::new(self.order());
        let mut queue = VecDeque::new();
        seen.insert(self.identity as usize);
        queue.push_back(self.identity);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen.contains(y as usize) {
                    seen.insert(y as usize);
                    queue.push_back(y);
                }
            }
        }
        seen
    }

    /// Subgroup generated by `gens` if it lies inside `allowed` and has at
    /// most `limit` elements; `None` as soon as either fails.
    pub fn generate_within(&self, gens: &[Elem], allowed: &Bitset, limit: usize) -> Option<Bitset> {
        let mut seen = Bitset::new(self.order());
        let mut queue = VecDeque::new();
        let mut count = 1;
        seen.insert(self.identity as usize);
        queue.push_back(self.identity);
        while let Some(x) = queue.pop_front() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen.contains(y as usize) {
                    count += 1;
                    if count > limit || !allowed.contains(y as usize) {
                        return None;
                    }
                    seen.insert(y as usize);
                    queue.push_back(y);
                }
            }
        }
        Some(seen)
    }

    pub fn is_subgroup(&self, set: &Bitset) -> bool {
        if !set.contains(self.identity as usize) {
            return false;
        }
        let members = set.to_vec();
        members.iter().all(|&x| {
            set.contains(self.inv(x as Elem) as usize)
                && members
                    .iter()
                    .all(|&y| set.contains(self.mul(x as Elem, y as Elem) as usize))
        })
    }

    fn choose_generators(&self) -> [Elem; 2] {
        let f = &self.field;
        let u = self.index_of([1, 1, 0, 1]).expect("unipotent");
        let l = self.index_of([1, 0, 1, 1]).expect("unipotent");
        let n = self.order();
        std::iter::once(l)
            .chain(self.elements())
            .find(|&y| y != self.identity && self.generate(&[u, y]).count() == n)
            .map(|y| [u, y])
            .unwrap_or_else(|| panic!("no two-element generating set found for q={}", f.order()))
    }

    fn build_classes(&mut self) {
        let n = self.order();
        let mut class_of = vec![u16::MAX; n];
        let mut raw: Vec<(u32, Elem, Vec<Elem>)> = Vec::new();
        for x in self.elements() {
            if class_of[x as usize] != u16::MAX {
                continue;
            }
            let id = raw.len() as u16;
            let mut members = vec![x];
            class_of[x as usize] = id;
            let mut i = 0;
            while i < members.len() {
                let y = members[i];
                for g in self.generators {
                    let z = self.conjugate(y, g);
                    if class_of[z as usize] == u16::MAX {
                        class_of[z as usize] = id;
                        members.push(z);
                    }
                }
                i += 1;
            }
            raw.push((self.orders[x as usize], x, members));
        }
        // (order, minimal member); the minimal member is the discovering element
        let mut perm: Vec<usize> = (0..raw.len()).collect();
        perm.sort_by_key(|&i| (raw[i].0, raw[i].1));
        let mut new_id = vec![0usize; raw.len()];
        for (new, &old) in perm.iter().enumerate() {
            new_id[old] = new;
        }
        for c in class_of.iter_mut() {
            *c = new_id[*c as usize] as u16;
        }

        let mut classes: Vec<ConjugacyClass> = perm
            .iter()
            .enumerate()
            .map(|(id, &old)| {
                let (order, rep, ref members) = raw[old];
                ConjugacyClass {
                    id,
                    label: String::new(),
                    order,
                    representative: rep,
                    members: Bitset::from_indices(n, members.iter().map(|&m| m as usize)),
                    size: members.len(),
                    inverse_class: class_of[self.inv(rep) as usize] as usize,
                    fusion_orbit: 0,
                }
            })
            .collect();
        let orders: Vec<u32> = classes.iter().map(|c| c.order).collect();
        for (i, l) in order_labels(&orders).into_iter().enumerate() {
            classes[i].label = l;
        }

        // union-find over power maps
        let mut parent: Vec<usize> = (0..classes.len()).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            p[i] = r;
            r
        }
        for c in &classes {
            let ord = c.order as u64;
            for k in 2..ord {
                if gcd(k, ord) == 1 {
                    let other = class_of[self.pow(c.representative, k) as usize] as usize;
                    let (a, b) = (find(&mut parent, c.id), find(&mut parent, other));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut roots: Vec<usize> = (0..classes.len())
            .filter(|&i| find(&mut parent, i) == i)
            .collect();
        roots.sort_by_key(|&r| (classes[r].order, r));
        let mut fusion: Vec<FusionClass> = roots
            .iter()
            .enumerate()
            .map(|(id, &r)| {
                let members_ids: Vec<usize> = (0..classes.len())
                    .filter(|&i| find(&mut parent, i) == r)
                    .collect();
                let mut members = Bitset::new(n);
                for &i in &members_ids {
                    members.union_with(&classes[i].members);
                }
                FusionClass {
                    id,
                    label: String::new(),
                    order: classes[r].order,
                    size: members.count(),
                    classes: members_ids,
                    members,
                }
            })
            .collect();
        let orders: Vec<u32> = fusion.iter().map(|c| c.order).collect();
        for (i, l) in order_labels(&orders).into_iter().enumerate() {
            fusion[i].label = l;
        }
        for fc in &fusion {
            for &c in &fc.classes {
                classes[c].fusion_orbit = fc.id;
            }
        }
        self.class_of = class_of;
        self.classes = classes;
        self.fusion = fusion;
    }

    pub fn classes(&self) -> &[ConjugacyClass] {
        &self.classes
    }

    pub fn fusion_classes(&self) -> &[FusionClass] {
        &self.fusion
    }

    pub fn class_of(&self, x: Elem) -> usize {
        self.class_of[x as usize] as usize
    }

    pub fn fusion_of(&self, x: Elem) -> usize {
        self.classes[self.class_of(x)].fusion_orbit
    }

    /// Fusion-class id by label (e.g. `"13"`, `"3A"`).
    pub fn fusion_by_label(&self, label: &str) -> Option<usize> {
        self.fusion.iter().position(|c| c.label == label)
    }

    pub fn class_by_label(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.label == label)
    }

    pub fn projective_points(&self) -> impl Iterator<Item = ProjectivePoint> {
        (0..=self.q()).map(ProjectivePoint)
    }

    /// Homogeneous coordinates `(x, y)` of a point.
    pub fn point_coordinates(&self, p: ProjectivePoint) -> (u32, u32) {
        if p.0 == self.q() {
            (1, 0)
        } else {
            (p.0, 1)
        }
    }

    /// `p^t`: the row vector of `p` times the matrix of `t`.
    pub fn act(&self, p: ProjectivePoint, t: Elem) -> ProjectivePoint {
        let f = &self.field;
        let (x, y) = self.point_coordinates(p);
        let [a, b, c, d] = self.matrices[t as usize];
        let u = f.add(f.mul(x, a), f.mul(y, c));
        let v = f.add(f.mul(x, b), f.mul(y, d));
        if v == 0 {
            ProjectivePoint(self.q())
        } else {
            ProjectivePoint(f.mul(u, f.inv(v)))
        }
    }

    pub fn point_stabilizer(&self, p: ProjectivePoint) -> Bitset {
        Bitset::from_indices(
            self.order(),
            self.elements()
                .filter(|&t| self.act(p, t) == p)
                .map(|t| t as usize),
        )
    }

    /// `{g^-1 s g : s in set}`
    pub fn conjugate_set(&self, set: &Bitset, g: Elem) -> Bitset {
        Bitset::from_indices(
            self.order(),
            set.iter().map(|s| self.conjugate(s as Elem, g) as usize),
        )
    }

    /// Union of the listed fusion classes.
    pub fn fusion_union(&self, ids: &[usize]) -> Bitset {
        let mut out = Bitset::new(self.order());
        for &i in ids {
            out.union_with(&self.fusion[i].members);
        }
        out
    }

    /// Every automorphism of T (conjugation by PGL(2,q) composed with field
    /// automorphisms), each optionally composed with inversion.
    pub fn automorphisms(&self, with_inversion: bool) -> Vec<Automorphism> {
        let f = &self.field;
        let q = f.order();
        let mut out = Vec::new();
        for a in 0..q {
            for b in 0..q {
                for c in 0..q {
                    for d in 0..q {
                        let m = [a, b, c, d];
                        let det = f.sub(f.mul(a, d), f.mul(b, c));
                        // first nonzero entry normalised to 1 picks one per scalar class
                        let lead = m.iter().copied().find(|&x| x != 0);
                        if det == 0 || lead != Some(1) {
                            continue;
                        }
                        for frob in 0..f.degree() {
                            out.push(Automorphism { conj: m, frob, invert: false });
                            if with_inversion {
                                out.push(Automorphism { conj: m, frob, invert: true });
                            }
                        }
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, aut: &Automorphism, t: Elem) -> Elem {
        let f = &self.field;
        let [a, b, c, d] = aut.conj;
        let det_inv = f.inv(f.sub(f.mul(a, d), f.mul(b, c)));
        let g_inv = [
            f.mul(d, det_inv),
            f.mul(f.neg(b), det_inv),
            f.mul(f.neg(c), det_inv),
            f.mul(a, det_inv),
        ];
        let mut m = self.mat_mul(self.mat_mul(g_inv, self.matrices[t as usize]), aut.conj);
        for _ in 0..aut.frob {
            for x in m.iter_mut() {
                *x = f.frobenius(*x);
            }
        }
        let y = self.index_of(m).expect("automorphism image");
        if aut.invert {
            self.inv(y)
        } else {
            y
        }
    }

    /// The automorphism as a permutation of element indices.
    pub fn automorphism_permutation(&self, aut: &Automorphism) -> Vec<Elem> {
        self.elements().map(|t| self.apply(aut, t)).collect()
    }

    /// A small generating set for the automorphism group of T (with
    /// inversion): conjugation by the two group generators, by a diagonal
    /// outer element, the Frobenius map, and inversion.
    pub fn automorphism_generators(&self) -> Vec<Automorphism> {
        let f = &self.field;
        let mut gens: Vec<Automorphism> = self
            .generators
            .iter()
            .map(|&g| Automorphism {
                conj: self.matrices[g as usize],
                frob: 0,
                invert: false,
            })
            .collect();
        if let Some(nonsquare) = (1..f.order()).find(|&x| !f.is_square(x)) {
            gens.push(Automorphism {
                conj: [nonsquare, 0, 0, 1],
                frob: 0,
                invert: false,
            });
        }
        if f.degree() > 1 {
            gens.push(Automorphism {
                conj: [1, 0, 0, 1],
                frob: 1,
                invert: false,
            });
        }
        gens.push(Automorphism {
            conj: [1, 0, 0, 1],
            frob: 0,
            invert: true,
        });
        gens
    }
}

/// `t -> frob^k(g^-1 t g)`, then optionally inverted. All of these fix the
/// identity and map conjugacy classes to conjugacy classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Automorphism {
    pub conj: Matrix,
    pub frob: u32,
    pub invert: bool,
}

fn dense_key(q: u32, m: &Matrix) -> usize {
    let q = q as usize;
    ((m[0] as usize * q + m[1] as usize) * q + m[2] as usize) * q + m[3] as usize
}

fn canonical_form(f: &Field, m: Matrix) -> Matrix {
    if f.characteristic() == 2 {
        return m;
    }
    let lead = m.iter().copied().find(|&x| x != 0).expect("nonzero matrix");
    if f.is_canonical_sign(lead) {
        m
    } else {
        m.map(|x| f.neg(x))
    }
}

/// Order label, plus A, B, C.. when several items share an order.
fn order_labels(orders: &[u32]) -> Vec<String> {
    let mut seen: HashMap<u32, usize> = HashMap::new();
    let mut out = Vec::with_capacity(orders.len());
    for &o in orders {
        let total = orders.iter().filter(|&&x| x == o).count();
        let k = seen.entry(o).or_insert(0);
        let label = if total == 1 {
            o.to_string()
        } else {
            format!("{}{}", o, (b'A' + *k as u8) as char)
        };
        *k += 1;
        out.push(label);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nontrivial_orders(g: &Group) -> Vec<u32> {
        g.classes().iter().skip(1).map(|c| c.order).collect()
    }

    #[test]
    fn group_orders() {
        for (q, n) in [(4, 60), (5, 60), (7, 168), (8, 504), (9, 360), (13, 1092), (17, 2448)] {
            assert_eq!(Group::new(q).unwrap().order(), n, "q={q}");
        }
        assert!(matches!(Group::new(3), Err(Error::GroupTooSmall(3))));
        assert!(matches!(Group::new(12), Err(Error::NotPrimePower(12))));
    }

    #[test]
    fn q13_class_census() {
        let g = Group::new(13).unwrap();
        assert_eq!(g.classes().len(), 9);
        assert_eq!(nontrivial_orders(&g), vec![2, 3, 6, 7, 7, 7, 13, 13]);
        let labels: Vec<&str> = g.fusion_classes().iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, vec!["1", "2", "3", "6", "7", "13"]);
        let seven = &g.fusion_classes()[g.fusion_by_label("7").unwrap()];
        assert_eq!(seven.classes.len(), 3);
        assert_eq!(seven.size, 468);
        let thirteen = &g.fusion_classes()[g.fusion_by_label("13").unwrap()];
        assert_eq!(thirteen.classes.len(), 2);
        for c in g.classes().iter().filter(|c| c.order == 13) {
            assert_eq!(c.size, 84);
        }
    }

    #[test]
    fn q13_order13_classes_by_brute_force() {
        // bucket by order, then split by full conjugation closure
        let g = Group::new(13).unwrap();
        let mut seen = Bitset::new(g.order());
        let mut sizes = Vec::new();
        for x in g.elements().filter(|&x| g.element_order(x) == 13) {
            if seen.contains(x as usize) {
                continue;
            }
            let class: std::collections::BTreeSet<Elem> =
                g.elements().map(|h| g.conjugate(x, h)).collect();
            for &y in &class {
                seen.insert(y as usize);
            }
            sizes.push(class.len());
        }
        assert_eq!(sizes, vec![84, 84]);
    }

    #[test]
    fn q17_fused_orders() {
        let g = Group::new(17).unwrap();
        let orders: Vec<u32> = g.fusion_classes().iter().skip(1).map(|c| c.order).collect();
        assert_eq!(orders, vec![2, 3, 4, 8, 9, 17]);
        assert_eq!(g.classes().len(), 11);
    }

    #[test]
    fn class_invariants() {
        for q in [4, 5, 7, 8, 9, 11, 13, 16, 17] {
            let g = Group::new(q).unwrap();
            let total: usize = g.classes().iter().map(|c| c.size).sum();
            assert_eq!(total, g.order());
            for c in g.classes() {
                assert_eq!(g.order() % c.size, 0);
                assert_eq!(c.members.count(), c.size);
                let inv = Bitset::from_indices(
                    g.order(),
                    c.members.iter().map(|x| g.inv(x as Elem) as usize),
                );
                assert_eq!(inv, g.classes()[c.inverse_class].members);
                for x in c.members.iter() {
                    for h in g.generators() {
                        assert!(c.members.contains(g.conjugate(x as Elem, h) as usize));
                    }
                }
            }
        }
    }

    #[test]
    fn classes_self_inverse_for_q_1_mod_4() {
        for q in [5, 9, 13, 17] {
            let g = Group::new(q).unwrap();
            assert!(g.classes().iter().all(|c| c.inverse_class == c.id), "q={q}");
        }
    }

    #[test]
    fn sign_canonicalisation_respects_products() {
        let g = Group::new(9).unwrap();
        for x in g.elements().step_by(7) {
            for y in g.elements().step_by(11) {
                let m = g.mat_mul(g.matrix(x), g.matrix(y));
                assert_eq!(g.index_of(m), Some(g.mul_slow(x, y)));
                let neg = m.map(|v| g.field().neg(v));
                assert_eq!(g.index_of(neg), Some(g.mul(x, y)));
            }
        }
    }

    #[test]
    fn point_stabilizers() {
        for (q, n) in [(13, 78), (17, 136), (8, 56)] {
            let g = Group::new(q).unwrap();
            let s = g.point_stabilizer(ProjectivePoint(0));
            assert_eq!(s.count(), n);
            assert!(g.is_subgroup(&s));
        }
    }

    #[test]
    fn projective_action_is_two_transitive() {
        let g = Group::new(7).unwrap();
        let mut pairs = std::collections::HashSet::new();
        for t in g.elements() {
            pairs.insert((g.act(ProjectivePoint(0), t), g.act(ProjectivePoint(7), t)));
        }
        assert_eq!(pairs.len(), 8 * 7);
        for t in g.elements() {
            for u in g.elements().step_by(13) {
                for p in g.projective_points() {
                    assert_eq!(g.act(g.act(p, t), u), g.act(p, g.mul(t, u)));
                }
            }
        }
    }

    #[test]
    fn automorphisms_preserve_multiplication() {
        let g = Group::new(9).unwrap();
        for aut in g.automorphism_generators() {
            let perm = g.automorphism_permutation(&aut);
            for x in g.elements().step_by(5) {
                for y in g.elements().step_by(7) {
                    let lhs = perm[g.mul(x, y) as usize];
                    let rhs = if aut.invert {
                        g.mul(perm[y as usize], perm[x as usize])
                    } else {
                        g.mul(perm[x as usize], perm[y as usize])
                    };
                    assert_eq!(lhs, rhs);
                }
            }
        }
        // |PGL(2,9)| * 2 field automorphisms
        assert_eq!(g.automorphisms(false).len(), 720 * 2);
    }
}
