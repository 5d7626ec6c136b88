use std::sync::OnceLock;

use diagsync::certify::{export_lp_bytes, parse_lp, IlpInstance, Sense};
use diagsync::field::Field;
use diagsync::graphs::{ClassKind, ClassUnionGraph};
use diagsync::group::{Elem, Group};
use diagsync::linalg::rat;
use diagsync::pipeline::{analyze, AnalyzeConfig};
use diagsync::scheme::{rational_scheme, AssociationScheme};
use diagsync::search::{check_set, Objective};
use proptest::prelude::*;

const ORDERS: [u64; 6] = [4, 5, 8, 9, 13, 25];

fn fields() -> &'static Vec<Field> {
    static F: OnceLock<Vec<Field>> = OnceLock::new();
    F.get_or_init(|| ORDERS.iter().map(|&q| Field::of_order(q).unwrap()).collect())
}

fn groups() -> &'static Vec<(Group, AssociationScheme)> {
    static G: OnceLock<Vec<(Group, AssociationScheme)>> = OnceLock::new();
    G.get_or_init(|| {
        [5u64, 7, 8, 9]
            .iter()
            .map(|&q| {
                let g = Group::new(q).unwrap();
                let s = rational_scheme(&g).unwrap();
                (g, s)
            })
            .collect()
    })
}

prop_compose! {
    fn field_triple()(i in 0..ORDERS.len(), a in any::<u32>(), b in any::<u32>(), c in any::<u32>())
        -> (usize, u32, u32, u32) {
        let q = ORDERS[i] as u32;
        (i, a % q, b % q, c % q)
    }
}

prop_compose! {
    fn group_triple()(i in 0..4usize, a in any::<u32>(), b in any::<u32>(), c in any::<u32>())
        -> (usize, Elem, Elem, Elem) {
        let n = groups()[i].0.order() as u32;
        (i, (a % n) as Elem, (b % n) as Elem, (c % n) as Elem)
    }
}

proptest! {
    #[test]
    fn field_axioms((i, a, b, c) in field_triple()) {
        let f = &fields()[i];
        prop_assert_eq!(f.add(a, b), f.add(b, a));
        prop_assert_eq!(f.mul(a, b), f.mul(b, a));
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        prop_assert_eq!(f.add(a, f.neg(a)), 0);
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a)), 1);
        }
        prop_assert_eq!(f.pow(a, f.order() as u64), a);
    }

    #[test]
    fn group_axioms((i, x, y, z) in group_triple()) {
        let g = &groups()[i].0;
        prop_assert_eq!(g.mul(g.mul(x, y), z), g.mul(x, g.mul(y, z)));
        prop_assert_eq!(g.mul(x, g.inv(x)), g.identity());
        prop_assert_eq!(g.mul(g.identity(), x), x);
        prop_assert_eq!(g.fusion_of(x), g.fusion_of(g.conjugate(x, y)));
        prop_assert_eq!(g.index_of(g.matrix(x)), Some(x));
    }

    #[test]
    fn class_union_graphs_are_translation_invariant(
        (i, x, y, z) in group_triple(),
        mask in 1u32..u32::MAX,
    ) {
        let (g, _) = &groups()[i];
        let k = g.fusion_classes().len();
        let ids: Vec<usize> = (1..k).filter(|c| mask >> c & 1 == 1).collect();
        prop_assume!(!ids.is_empty() && ids.len() < k - 1);
        let gm = ClassUnionGraph::new(g, ClassKind::Fused, &ids).unwrap();
        let adj = gm.adjacent(x, y);
        prop_assert_eq!(adj, gm.adjacent(g.mul(z, x), g.mul(z, y)));
        prop_assert_eq!(adj, gm.adjacent(g.mul(x, z), g.mul(y, z)));
        prop_assert_eq!(adj, gm.adjacent(y, x));
    }

    #[test]
    fn inner_distribution_sums_to_size(
        i in 0..4usize,
        picks in proptest::collection::vec(any::<u32>(), 1..40),
    ) {
        let (g, s) = &groups()[i];
        let mut set: Vec<Elem> = picks.iter().map(|p| (*p as usize % g.order()) as Elem).collect();
        set.sort_unstable();
        set.dedup();
        let a = s.inner_distribution(g, &set).unwrap();
        let total = a.iter().fold(rat(0), |acc, x| acc + x);
        prop_assert_eq!(total, rat(set.len() as i64));
        prop_assert_eq!(a[0].clone(), rat(1));
        let t = s.macwilliams_transform(&a).unwrap();
        prop_assert!(t.iter().all(|x| *x >= rat(0)));
    }

    #[test]
    fn lp_round_trip(
        variables in 1usize..40,
        raw in proptest::collection::vec(proptest::collection::vec(any::<u32>(), 1..6), 1..12),
        exact in any::<bool>(),
    ) {
        // the last row uses every variable, which the instance requires
        let mut rows: Vec<Vec<Elem>> = raw
            .iter()
            .map(|r| {
                let mut r: Vec<Elem> = r.iter().map(|x| (*x as usize % variables) as Elem).collect();
                r.sort_unstable();
                r.dedup();
                r
            })
            .collect();
        rows.push((0..variables as Elem).collect());
        let sense = if exact { Sense::ExactlyOne } else { Sense::AtMostOne };
        let inst = IlpInstance::new(variables, rows, sense).unwrap();
        let text = String::from_utf8(export_lp_bytes(&inst)).unwrap();
        prop_assert_eq!(parse_lp(&text).unwrap(), inst);
    }

    #[test]
    fn check_set_rejects_a_swapped_vertex((i, x, y, _) in group_triple(), pick in any::<usize>()) {
        let (g, _) = &groups()[i];
        let k = g.fusion_classes().len();
        let gm = ClassUnionGraph::new(g, ClassKind::Fused, &[1 + pick % (k - 1)]).unwrap();
        // grow a maximal clique through x
        let mut clique = vec![x];
        for v in g.elements() {
            if clique.iter().all(|&u| gm.adjacent(u, v)) {
                clique.push(v);
            }
        }
        clique.sort_unstable();
        let d = gm.descriptor();
        prop_assert!(check_set(g, &d, Objective::Clique, &clique).is_ok());
        prop_assume!(!clique.contains(&y));
        let mut bad = clique.clone();
        bad[pick % clique.len()] = y;
        bad.sort_unstable();
        let fits = bad.iter().enumerate().all(|(a, &u)| bad[a + 1..].iter().all(|&v| gm.adjacent(u, v)));
        prop_assert_eq!(check_set(g, &d, Objective::Clique, &bad).is_ok(), fits);
    }
}

#[test]
fn analyze_is_byte_deterministic() {
    for q in [5u64, 7, 13] {
        let a = analyze(q, &AnalyzeConfig::default()).unwrap().to_json().unwrap();
        let b = analyze(q, &AnalyzeConfig::default()).unwrap().to_json().unwrap();
        assert_eq!(a, b, "q={q}");
    }
}
