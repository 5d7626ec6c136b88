//! Cayley graphs on T whose connection set is a union of classes.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::group::{Elem, Group};

/// Whether class ids refer to rational (fused) classes or conjugacy classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    #[default]
    Fused,
    Unfused,
}

/// Portable description of a class-union graph, embedded in certificates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDescriptor {
    pub q: u32,
    pub kind: ClassKind,
    pub classes: Vec<String>,
    pub degree: usize,
    #[serde(rename = "vertexCount")]
    pub vertex_count: usize,
}

#[derive(Clone, Debug)]
pub struct ClassUnionGraph<'g> {
    group: &'g Group,
    kind: ClassKind,
    ids: Vec<usize>,
    connection: Bitset,
    connection_list: Vec<Elem>,
}

/// Ids of all nontrivial classes of the given kind.
pub fn nontrivial_ids(group: &Group, kind: ClassKind) -> Vec<usize> {
    match kind {
        ClassKind::Fused => (1..group.fusion_classes().len()).collect(),
        ClassKind::Unfused => (1..group.classes().len()).collect(),
    }
}

pub fn class_label(group: &Group, kind: ClassKind, id: usize) -> &str {
    match kind {
        ClassKind::Fused => &group.fusion_classes()[id].label,
        ClassKind::Unfused => &group.classes()[id].label,
    }
}

/// Resolves labels such as `["3", "13"]` to class ids.
pub fn parse_class_labels(group: &Group, kind: ClassKind, labels: &[String]) -> Result<Vec<usize>> {
    labels
        .iter()
        .map(|l| {
            let l = l.trim();
            let found = match kind {
                ClassKind::Fused => group.fusion_by_label(l),
                ClassKind::Unfused => group.class_by_label(l),
            };
            found.ok_or_else(|| Error::InvalidClassSet(format!("unknown class label {l:?}")))
        })
        .collect()
}

/// `I' = (all nontrivial classes) \ I`, sorted.
pub fn complement_classes(group: &Group, kind: ClassKind, ids: &[usize]) -> Vec<usize> {
    nontrivial_ids(group, kind)
        .into_iter()
        .filter(|i| !ids.contains(i))
        .collect()
}

impl<'g> ClassUnionGraph<'g> {
    pub fn new(group: &'g Group, kind: ClassKind, ids: &[usize]) -> Result<Self> {
        let mut ids = ids.to_vec();
        ids.sort_unstable();
        ids.dedup();
        let all = nontrivial_ids(group, kind);
        if ids.is_empty() {
            return Err(Error::InvalidClassSet("empty class set".into()));
        }
        if ids.contains(&0) {
            return Err(Error::InvalidClassSet("class set contains the identity".into()));
        }
        if let Some(bad) = ids.iter().find(|i| !all.contains(i)) {
            return Err(Error::InvalidClassSet(format!("unknown class id {bad}")));
        }
        if ids.len() == all.len() {
            return Err(Error::InvalidClassSet(
                "class set contains every nontrivial class (complete graph)".into(),
            ));
        }
        let mut connection = Bitset::new(group.order());
        for &i in &ids {
            match kind {
                ClassKind::Fused => connection.union_with(&group.fusion_classes()[i].members),
                ClassKind::Unfused => connection.union_with(&group.classes()[i].members),
            }
        }
        let connection_list = connection.iter().map(|x| x as Elem).collect();
        Ok(ClassUnionGraph {
            group,
            kind,
            ids,
            connection,
            connection_list,
        })
    }

    /// Builds from fused-class labels.
    pub fn from_labels(group: &'g Group, labels: &[&str]) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let ids = parse_class_labels(group, ClassKind::Fused, &labels)?;
        Self::new(group, ClassKind::Fused, &ids)
    }

    pub fn group(&self) -> &'g Group {
        self.group
    }

    pub fn kind(&self) -> ClassKind {
        self.kind
    }

    pub fn class_ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn labels(&self) -> Vec<String> {
        self.ids
            .iter()
            .map(|&i| class_label(self.group, self.kind, i).to_string())
            .collect()
    }

    pub fn connection_set(&self) -> &Bitset {
        &self.connection
    }

    pub fn connection_list(&self) -> &[Elem] {
        &self.connection_list
    }

    pub fn vertex_count(&self) -> usize {
        self.group.order()
    }

    pub fn degree(&self) -> usize {
        self.connection_list.len()
    }

    pub fn edge_count(&self) -> usize {
        self.vertex_count() * self.degree() / 2
    }

    #[inline]
    pub fn adjacent(&self, u: Elem, v: Elem) -> bool {
        u != v && self.connection.contains(self.group.div(u, v) as usize)
    }

    /// `{s u : s in S}`, sorted.
    pub fn neighbors(&self, u: Elem) -> Vec<Elem> {
        let mut out: Vec<Elem> = self
            .connection_list
            .iter()
            .map(|&s| self.group.mul(s, u))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn complement(&self) -> Result<ClassUnionGraph<'g>> {
        ClassUnionGraph::new(
            self.group,
            self.kind,
            &complement_classes(self.group, self.kind, &self.ids),
        )
    }

    pub fn descriptor(&self) -> GraphDescriptor {
        GraphDescriptor {
            q: self.group.q(),
            kind: self.kind,
            classes: self.labels(),
            degree: self.degree(),
            vertex_count: self.vertex_count(),
        }
    }

    pub fn is_clique(&self, vertices: &[Elem]) -> bool {
        vertices
            .iter()
            .enumerate()
            .all(|(i, &u)| vertices[i + 1..].iter().all(|&v| self.adjacent(u, v)))
    }

    pub fn is_coclique(&self, vertices: &[Elem]) -> bool {
        vertices.iter().enumerate().all(|(i, &u)| {
            vertices[i + 1..]
                .iter()
                .all(|&v| u != v && !self.adjacent(u, v))
        })
    }

    /// DIMACS edge format, vertices numbered `index + 1`, each edge once
    /// with the lower endpoint first.
    pub fn write_dimacs<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "p edge {} {}", self.vertex_count(), self.edge_count())?;
        for u in self.group.elements() {
            for v in self.neighbors(u) {
                if v > u {
                    writeln!(out, "e {} {}", u + 1, v + 1)?;
                }
            }
        }
        Ok(())
    }

    pub fn dimacs_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_dimacs(&mut buf).expect("writing to memory");
        buf
    }
}

/// Resolves a descriptor back to a graph on `group`.
pub fn graph_from_descriptor<'g>(group: &'g Group, d: &GraphDescriptor) -> Result<ClassUnionGraph<'g>> {
    if d.q != group.q() {
        return Err(Error::CertificateRejected(format!(
            "descriptor is for q={} but group has q={}",
            d.q,
            group.q()
        )));
    }
    let ids = parse_class_labels(group, d.kind, &d.classes)?;
    let g = ClassUnionGraph::new(group, d.kind, &ids)?;
    if g.degree() != d.degree || g.vertex_count() != d.vertex_count {
        return Err(Error::CertificateRejected("descriptor degree mismatch".into()));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn census(g: &Group, order: u32) -> usize {
        g.elements().filter(|&x| g.element_order(x) == order).count()
    }

    #[test]
    fn q13_degrees() {
        let g = Group::new(13).unwrap();
        let gamma13 = ClassUnionGraph::from_labels(&g, &["13"]).unwrap();
        assert_eq!(gamma13.degree(), census(&g, 13));
        assert_eq!(gamma13.degree(), 168);
        let gamma7 = ClassUnionGraph::from_labels(&g, &["7"]).unwrap();
        let nbrs = gamma7.neighbors(g.identity());
        assert_eq!(nbrs.len(), 468);
        assert!(nbrs.iter().all(|&x| g.element_order(x) == 7));
    }

    #[test]
    fn rejects_degenerate_sets() {
        let g = Group::new(13).unwrap();
        assert!(ClassUnionGraph::from_labels(&g, &["2", "3", "6", "7", "13"]).is_err());
        assert!(ClassUnionGraph::from_labels(&g, &[]).is_err());
        assert!(ClassUnionGraph::from_labels(&g, &["1", "2"]).is_err());
        assert!(ClassUnionGraph::from_labels(&g, &["5"]).is_err());
    }

    #[test]
    fn complements() {
        let g = Group::new(13).unwrap();
        let ids = parse_class_labels(&g, ClassKind::Fused, &["3".into(), "7".into()]).unwrap();
        let comp = complement_classes(&g, ClassKind::Fused, &ids);
        let labels: Vec<&str> = comp.iter().map(|&i| class_label(&g, ClassKind::Fused, i)).collect();
        assert_eq!(labels, vec!["2", "6", "13"]);
        assert_eq!(complement_classes(&g, ClassKind::Fused, &comp), ids);
    }

    #[test]
    fn dimacs_header_and_determinism() {
        let g = Group::new(13).unwrap();
        let gamma = ClassUnionGraph::from_labels(&g, &["13"]).unwrap();
        let bytes = gamma.dimacs_bytes();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(text.lines().next(), Some("p edge 1092 91728"));
        assert_eq!(text.lines().count(), 1 + 91728);
        assert_eq!(bytes, gamma.dimacs_bytes());
    }

    #[test]
    fn symmetry_translation_and_partition() {
        let g = Group::new(9).unwrap();
        let gamma = ClassUnionGraph::new(&g, ClassKind::Fused, &[1, 2]).unwrap();
        let comp = gamma.complement().unwrap();
        for u in g.elements() {
            for v in g.elements() {
                assert_eq!(gamma.adjacent(u, v), gamma.adjacent(v, u));
                if u != v {
                    assert_ne!(gamma.adjacent(u, v), comp.adjacent(u, v));
                }
            }
        }
        let g13 = Group::new(13).unwrap();
        let gamma = ClassUnionGraph::from_labels(&g13, &["3", "13"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = g13.order() as u32;
        for _ in 0..2000 {
            let (u, v, x, y) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
            let tu = g13.mul(g13.mul(g13.inv(x), u), y);
            let tv = g13.mul(g13.mul(g13.inv(x), v), y);
            assert_eq!(gamma.adjacent(u, v), gamma.adjacent(tu, tv));
            assert_eq!(gamma.adjacent(u, v), gamma.adjacent(v, u));
        }
    }
}
