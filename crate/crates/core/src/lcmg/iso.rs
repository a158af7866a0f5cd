//! Basepoint-preserving labelled isomorphism by backtracking.
//!
//! Vertices of the first graph are matched in breadth-first order over the
//! underlying undirected graph, so every vertex after the basepoint has an
//! already-matched parent; its candidates are the neighbours of the parent's
//! image along an edge with the same direction and label. Candidates are
//! pruned by per-vertex invariants (directed distance from the basepoint,
//! degrees, self-loop label, sorted incident labels) before the incremental
//! edge-consistency check.

use std::cmp::Ordering;
use std::collections::VecDeque;

use num_complex::Complex64;

use super::{labels_match, Lcmg};

#[derive(Clone, Debug)]
struct Invariant {
    dist: Option<usize>,
    loop_label: Option<Complex64>,
    out_labels: Vec<Complex64>,
    in_labels: Vec<Complex64>,
}

fn cmp_label(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn invariants(g: &Lcmg) -> Vec<Invariant> {
    let dist = g.distances();
    (0..g.vertex_count())
        .map(|v| {
            let mut out_labels: Vec<Complex64> = g.out_edges(v).iter().map(|e| e.1).collect();
            let mut in_labels: Vec<Complex64> = g.in_edges(v).iter().map(|e| e.1).collect();
            out_labels.sort_by(cmp_label);
            in_labels.sort_by(cmp_label);
            Invariant { dist: dist[v], loop_label: g.label(v, v), out_labels, in_labels }
        })
        .collect()
}

fn compatible(a: &Invariant, b: &Invariant) -> bool {
    let same_labels = |x: &[Complex64], y: &[Complex64]| {
        x.len() == y.len() && x.iter().zip(y).all(|(p, q)| labels_match(*p, *q))
    };
    a.dist == b.dist
        && match (a.loop_label, b.loop_label) {
            (None, None) => true,
            (Some(p), Some(q)) => labels_match(p, q),
            _ => false,
        }
        && same_labels(&a.out_labels, &b.out_labels)
        && same_labels(&a.in_labels, &b.in_labels)
}

/// How a vertex hangs off its matching parent.
#[derive(Clone, Copy)]
enum Link {
    Root,
    /// Edge parent -> v with this label.
    Out(usize, Complex64),
    /// Edge v -> parent with this label.
    In(usize, Complex64),
}

/// Returns a witness bijection `f` (indexed by vertices of `a`) when the
/// graphs are lcmg isomorphic.
pub fn isomorphism(a: &Lcmg, b: &Lcmg) -> Option<Vec<usize>> {
    let n = a.vertex_count();
    if n != b.vertex_count() || a.edge_count() != b.edge_count() {
        return None;
    }
    let inv_a = invariants(a);
    let inv_b = invariants(b);
    if !compatible(&inv_a[a.basepoint()], &inv_b[b.basepoint()]) {
        return None;
    }

    // matching order with parent links
    let mut order = Vec::with_capacity(n);
    let mut link = vec![Link::Root; n];
    let mut seen = vec![false; n];
    seen[a.basepoint()] = true;
    let mut queue = VecDeque::from([a.basepoint()]);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &(v, l) in a.out_edges(u) {
            if !seen[v] {
                seen[v] = true;
                link[v] = Link::Out(u, l);
                queue.push_back(v);
            }
        }
        for &(v, l) in a.in_edges(u) {
            if !seen[v] {
                seen[v] = true;
                link[v] = Link::In(u, l);
                queue.push_back(v);
            }
        }
    }
    debug_assert_eq!(order.len(), n, "lcmg is connected");

    let mut map = vec![usize::MAX; n];
    let mut preimage = vec![usize::MAX; n];
    // candidate lists and cursor per depth
    let mut stack: Vec<(Vec<usize>, usize)> = Vec::with_capacity(n);

    let candidates = |v: usize, map: &[usize], preimage: &[usize]| -> Vec<usize> {
        let raw: Vec<usize> = match link[v] {
            Link::Root => vec![b.basepoint()],
            Link::Out(p, l) => b
                .out_edges(map[p])
                .iter()
                .filter(|(_, m)| labels_match(*m, l))
                .map(|e| e.0)
                .collect(),
            Link::In(p, l) => b
                .in_edges(map[p])
                .iter()
                .filter(|(_, m)| labels_match(*m, l))
                .map(|e| e.0)
                .collect(),
        };
        raw.into_iter()
            .filter(|&c| preimage[c] == usize::MAX && compatible(&inv_a[v], &inv_b[c]))
            .collect()
    };

    // edges between v and already-matched vertices must correspond exactly
    let consistent = |v: usize, c: usize, map: &[usize], preimage: &[usize]| -> bool {
        let mut out_count = 0;
        for &(w, l) in a.out_edges(v) {
            if w != v && map[w] != usize::MAX {
                out_count += 1;
                match b.label(c, map[w]) {
                    Some(m) if labels_match(l, m) => {}
                    _ => return false,
                }
            }
        }
        let mut in_count = 0;
        for &(w, l) in a.in_edges(v) {
            if w != v && map[w] != usize::MAX {
                in_count += 1;
                match b.label(map[w], c) {
                    Some(m) if labels_match(l, m) => {}
                    _ => return false,
                }
            }
        }
        let b_out = b.out_edges(c).iter().filter(|(w, _)| *w != c && preimage[*w] != usize::MAX).count();
        let b_in = b.in_edges(c).iter().filter(|(w, _)| *w != c && preimage[*w] != usize::MAX).count();
        out_count == b_out && in_count == b_in
    };

    let first = order[0];
    stack.push((candidates(first, &map, &preimage), 0));
    loop {
        let depth = stack.len() - 1;
        let v = order[depth];
        if map[v] != usize::MAX {
            // returning to this level after a failed deeper branch
            preimage[map[v]] = usize::MAX;
            map[v] = usize::MAX;
        }
        let (cands, cursor) = stack.last_mut().expect("non-empty");
        let mut chosen = None;
        while *cursor < cands.len() {
            let c = cands[*cursor];
            *cursor += 1;
            if preimage[c] == usize::MAX && consistent(v, c, &map, &preimage) {
                chosen = Some(c);
                break;
            }
        }
        match chosen {
            Some(c) => {
                map[v] = c;
                preimage[c] = v;
                if depth + 1 == n {
                    return Some(map);
                }
                let next = order[depth + 1];
                let list = candidates(next, &map, &preimage);
                stack.push((list, 0));
            }
            None => {
                stack.pop();
                if stack.is_empty() {
                    return None;
                }
            }
        }
    }
}

pub fn lcmg_isomorphic(a: &Lcmg, b: &Lcmg) -> bool {
    isomorphism(a, b).is_some()
}

/// Checks the three isomorphism conditions for a proposed bijection.
pub fn is_witness(a: &Lcmg, b: &Lcmg, f: &[usize]) -> bool {
    let n = a.vertex_count();
    if f.len() != n || b.vertex_count() != n || a.edge_count() != b.edge_count() || f[a.basepoint()] != b.basepoint() {
        return false;
    }
    let mut hit = vec![false; n];
    for &x in f {
        if x >= n || hit[x] {
            return false;
        }
        hit[x] = true;
    }
    a.edges().all(|(u, v, l)| matches!(b.label(f[u], f[v]), Some(m) if labels_match(l, m)))
}

#[cfg(test)]
mod tests {
    use super::super::tests::cycle;
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn coords(n: usize) -> Vec<Vec<BigInt>> {
        (0..n).map(|i| vec![BigInt::from(i)]).collect()
    }

    #[test]
    fn reflexive_with_identity_witness() {
        let g = cycle(6, 2.0, -1.0);
        let f = isomorphism(&g, &g).unwrap();
        assert!(is_witness(&g, &g, &f));
        // the search tries candidates in order, so the first hit is the identity
        assert_eq!(f, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn label_perturbation_breaks_isomorphism() {
        let g = cycle(4, 2.0, -1.0);
        let mut edges: Vec<_> = g.edges().collect();
        let idx = edges.iter().position(|e| e.0 == 2 && e.1 == 3).unwrap();
        edges[idx].2 = Complex64::new(-1.0 + 1e-6, 0.0);
        let h = Lcmg::new(coords(4), 0, edges.clone()).unwrap();
        assert!(!lcmg_isomorphic(&g, &h));
        // drift within tolerance is ignored
        edges[idx].2 = Complex64::new(-1.0 + 1e-13, 0.0);
        let h = Lcmg::new(coords(4), 0, edges).unwrap();
        assert!(lcmg_isomorphic(&g, &h));
    }

    #[test]
    fn basepoint_is_pinned() {
        // path 0 - 1 - 2 marked at an end vs marked at the middle
        let edges = vec![(0, 1, c(1.0)), (1, 0, c(1.0)), (1, 2, c(1.0)), (2, 1, c(1.0))];
        let end = Lcmg::new(coords(3), 0, edges.clone()).unwrap();
        let mid = Lcmg::new(coords(3), 1, edges).unwrap();
        assert!(!lcmg_isomorphic(&end, &mid));
    }

    #[test]
    fn relabelled_vertices_are_found() {
        let g = cycle(7, 3.0, -1.0);
        // rotate/reflect vertex names: x -> 3 - x mod 7, basepoint 3
        let perm = |x: usize| (3 + 7 - x) % 7;
        let edges: Vec<_> = g.edges().map(|(u, v, l)| (perm(u), perm(v), l)).collect();
        let h = Lcmg::new(coords(7), perm(0), edges).unwrap();
        let f = isomorphism(&g, &h).unwrap();
        assert!(is_witness(&g, &h, &f));
    }

    #[test]
    fn zero_labelled_edges_distinguish_graphs() {
        let with = Lcmg::new(coords(2), 0, vec![(0, 1, c(0.0)), (1, 0, c(0.0))]).unwrap();
        let loops = Lcmg::new(coords(2), 0, vec![(0, 1, c(0.0)), (1, 0, c(0.0)), (1, 1, c(0.0))]).unwrap();
        assert!(!lcmg_isomorphic(&with, &loops));
    }

    /// Random symmetric labelled graph on `n` vertices, connected through a path.
    fn arb_graph() -> impl Strategy<Value = Lcmg> {
        (3usize..9)
            .prop_flat_map(|n| {
                let pairs = prop::collection::vec((0..n, 0..n, 0u8..3), 0..(2 * n));
                (Just(n), pairs)
            })
            .prop_map(|(n, pairs)| {
                let mut labels = std::collections::BTreeMap::new();
                for i in 0..n - 1 {
                    labels.insert((i, i + 1), 1.0);
                    labels.insert((i + 1, i), 1.0);
                }
                for (u, v, l) in pairs {
                    labels.insert((u, v), l as f64);
                }
                let edges: Vec<_> = labels.into_iter().map(|((u, v), l)| (u, v, c(l))).collect();
                Lcmg::new(coords(n), 0, edges).unwrap()
            })
    }

    fn relabel(g: &Lcmg, perm: &[usize]) -> Lcmg {
        let edges: Vec<_> = g.edges().map(|(u, v, l)| (perm[u], perm[v], l)).collect();
        Lcmg::new(coords(g.vertex_count()), perm[g.basepoint()], edges).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn equivalence_relation(g in arb_graph(), seed1 in any::<u64>(), seed2 in any::<u64>()) {
            let n = g.vertex_count();
            let shuffle = |seed: u64| {
                let mut p: Vec<usize> = (0..n).collect();
                let mut s = seed | 1;
                for i in (1..n).rev() {
                    s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                    p.swap(i, (s % (i as u64 + 1)) as usize);
                }
                p
            };
            let h = relabel(&g, &shuffle(seed1));
            let k = relabel(&h, &shuffle(seed2));

            let fg = isomorphism(&g, &g).unwrap();
            prop_assert!(is_witness(&g, &g, &fg));

            let f = isomorphism(&g, &h).unwrap();
            prop_assert!(is_witness(&g, &h, &f));
            // symmetry through the inverse witness
            let mut inverse = vec![0; n];
            for (i, &x) in f.iter().enumerate() { inverse[x] = i; }
            prop_assert!(is_witness(&h, &g, &inverse));
            prop_assert!(lcmg_isomorphic(&h, &g));

            // transitivity through composition
            let f2 = isomorphism(&h, &k).unwrap();
            let composed: Vec<usize> = f.iter().map(|&x| f2[x]).collect();
            prop_assert!(is_witness(&g, &k, &composed));
            prop_assert!(lcmg_isomorphic(&g, &k));
        }

        #[test]
        fn involution_is_an_involution(g in arb_graph()) {
            prop_assert!(g.involution().involution().same_as(&g));
        }
    }
}
