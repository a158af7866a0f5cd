//! Cayley lcmgs: vertex `x` has an edge `x -> x·s` labelled `λ_s` for every
//! generator `s` of a symmetric support, and the identity is the basepoint.

use std::collections::{HashMap, HashSet};

use num_bigint::BigInt;

use super::metric::BallSource;
use super::{Ball, Edge, Lcmg};
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement, GroupModel, QuotientChain, QuotientElement};
use crate::ring::SymmetrizedSupport;

/// Largest ball (in vertices) the infinite construction will build.
const BALL_VERTEX_CAP: usize = 500_000;

/// Cayley lcmg of a quotient `G/K_n`.
#[derive(Clone, Debug)]
pub struct CayleyLcmg {
    pub graph: Lcmg,
    /// Coset of each vertex, in vertex order.
    pub elements: Vec<QuotientElement>,
    /// Vertices outside the basepoint component (nonzero when the support
    /// does not generate the quotient).
    pub dropped: usize,
}

impl CayleyLcmg {
    pub fn warning(&self) -> Option<String> {
        (self.dropped > 0).then(|| {
            format!(
                "support does not generate the quotient: kept the {} vertices reachable from the identity, dropped {}",
                self.graph.vertex_count(),
                self.dropped
            )
        })
    }
}

/// Builds `Γ_{z_n, π_n(S)}` on the level-`n` quotient. Generators whose cosets
/// merge contribute one edge whose label is the sum of their labels.
pub fn cayley_lcmg_finite(
    chain: &QuotientChain,
    level: usize,
    sym: &SymmetrizedSupport<GroupElement>,
    order_cap: usize,
) -> Result<CayleyLcmg> {
    let quotient = chain.quotient(level)?;
    let elements = quotient.enumerate(order_cap)?;
    let projected = sym.project(chain, level)?;
    let index: HashMap<&QuotientElement, usize> = elements.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut edges: Vec<Edge> = Vec::with_capacity(elements.len() * projected.len());
    for (i, x) in elements.iter().enumerate() {
        for (s, l) in projected.generators() {
            let y = quotient.multiply(x, s)?;
            edges.push((i, index[&y], *l));
        }
    }
    let vertices: Vec<Vec<BigInt>> = elements.iter().map(|e| quotient.coordinates(e)).collect();
    let (graph, dropped) = Lcmg::component_of_basepoint(vertices, 0, edges)?;
    let elements = if dropped == 0 {
        elements
    } else {
        let kept: HashSet<&Vec<BigInt>> = graph.vertices().iter().collect();
        elements.into_iter().filter(|e| kept.contains(&quotient.coordinates(e))).collect()
    };
    Ok(CayleyLcmg { graph, elements, dropped })
}

/// Exact ball of radius `r` around the identity in `Γ_{z,S}` over the full group.
///
/// Vertices are ordered by breadth-first layer, then by canonical element order.
pub fn cayley_ball_infinite(
    model: &GroupModel,
    sym: &SymmetrizedSupport<GroupElement>,
    r: usize,
    radius_cap: usize,
) -> Result<Ball> {
    if r > radius_cap {
        return Err(Error::Resource { what: "ball radius", requested: r, cap: radius_cap });
    }
    let layers = bfs_layers(model, sym, r, |_| false)?.0;
    let elements: Vec<GroupElement> = layers.into_iter().flatten().collect();
    let index: HashMap<&GroupElement, usize> = elements.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut edges: Vec<Edge> = Vec::new();
    for (i, x) in elements.iter().enumerate() {
        for (s, l) in sym.generators() {
            let y = model.multiply(x, s)?;
            if let Some(&j) = index.get(&y) {
                edges.push((i, j, *l));
            }
        }
    }
    let vertices = elements.iter().map(|e| model.coordinates(e)).collect();
    let graph = Lcmg::new(vertices, 0, edges)?;
    Ok(Ball { graph, radius: r, center: model.coordinates(&model.identity()) })
}

/// Breadth-first layers of the word metric up to radius `r`, each layer in
/// canonical order. Stops early at the first layer containing an element
/// accepted by `stop`, returning that layer's index.
fn bfs_layers<F: Fn(&GroupElement) -> bool>(
    model: &GroupModel,
    sym: &SymmetrizedSupport<GroupElement>,
    r: usize,
    stop: F,
) -> Result<(Vec<Vec<GroupElement>>, Option<usize>)> {
    let identity = model.identity();
    let mut seen: HashSet<GroupElement> = HashSet::from([identity.clone()]);
    let mut layers = vec![vec![identity]];
    for depth in 1..=r {
        let mut next = Vec::new();
        for x in layers.last().expect("non-empty") {
            for (s, _) in sym.generators() {
                let y = model.multiply(x, s)?;
                if seen.insert(y.clone()) {
                    next.push(y);
                }
            }
        }
        if seen.len() > BALL_VERTEX_CAP {
            return Err(Error::Resource { what: "ball size", requested: seen.len(), cap: BALL_VERTEX_CAP });
        }
        if next.is_empty() {
            break;
        }
        next.sort();
        let hit = next.iter().any(&stop);
        layers.push(next);
        if hit {
            return Ok((layers, Some(depth)));
        }
    }
    Ok((layers, None))
}

/// Length of the shortest word in `S` representing a nonidentity element of
/// `K_n`, searched up to `max_len`.
pub fn shortest_kernel_word(
    chain: &QuotientChain,
    level: usize,
    sym: &SymmetrizedSupport<GroupElement>,
    max_len: usize,
) -> Result<Option<usize>> {
    let model = chain.model();
    let identity = chain.quotient(level)?.identity();
    let (_, hit) = bfs_layers(model, sym, max_len, |g| {
        chain.project(level, g).map(|p| p == identity).unwrap_or(false)
    })?;
    Ok(hit)
}

/// Largest `r ≤ r_max` such that no nonidentity element of `K_n` is a word
/// of length at most `2r + 1` in `S`; `None` if even `r = 0` fails.
///
/// Beyond this radius the quotient ball has either fewer vertices or more
/// edges than the ball in the full group, so it bounds ball isomorphism.
pub fn word_length_radius(
    chain: &QuotientChain,
    level: usize,
    sym: &SymmetrizedSupport<GroupElement>,
    r_max: usize,
) -> Result<Option<usize>> {
    match shortest_kernel_word(chain, level, sym, 2 * r_max + 1)? {
        None => Ok(Some(r_max)),
        Some(len) if len >= 2 => Ok(Some((len - 2) / 2)),
        Some(_) => Ok(None),
    }
}

/// The infinite Cayley lcmg `Γ_{z,S}`, accessed only through its balls.
#[derive(Clone, Debug)]
pub struct InfiniteCayley {
    pub model: GroupModel,
    pub sym: SymmetrizedSupport<GroupElement>,
    pub radius_cap: usize,
}

impl InfiniteCayley {
    pub fn new(model: GroupModel, sym: SymmetrizedSupport<GroupElement>) -> Self {
        Self { model, sym, radius_cap: crate::DEFAULT_RADIUS_CAP }
    }
}

impl BallSource for InfiniteCayley {
    fn ball(&self, r: usize) -> Result<Lcmg> {
        Ok(cayley_ball_infinite(&self.model, &self.sym, r, self.radius_cap)?.graph)
    }
}

impl BallSource for CayleyLcmg {
    fn ball(&self, r: usize) -> Result<Lcmg> {
        Ok(self.graph.extract_ball(r).graph)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Schedule;
    use crate::lcmg::{isomorphism, metric_d};
    use crate::ring::RingElement;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn z1() -> GroupModel {
        GroupModel::lattice(1)
    }

    fn laplacian_sym() -> SymmetrizedSupport<GroupElement> {
        let g = z1();
        let t = |k| g.element_i64(&[k]).unwrap();
        let z = RingElement::from_terms([(t(0), c(2.0)), (t(1), c(-1.0)), (t(-1), c(-1.0))]);
        SymmetrizedSupport::from_element(&z, &g).unwrap()
    }

    #[test]
    fn four_cycle_from_laplacian() {
        let chain = QuotientChain::new(z1(), Schedule::Moduli(vec![2, 4])).unwrap();
        let cay = cayley_lcmg_finite(&chain, 1, &laplacian_sym(), 100).unwrap();
        let g = &cay.graph;
        assert_eq!((g.vertex_count(), g.edge_count(), cay.dropped), (4, 12, 0));
        for x in 0..4 {
            assert_eq!(g.label(x, x), Some(c(2.0)));
            assert_eq!(g.label(x, (x + 1) % 4), Some(c(-1.0)));
            assert_eq!(g.label(x, (x + 3) % 4), Some(c(-1.0)));
        }
        assert!(g.is_self_involutive());
    }

    #[test]
    fn merged_generators_sum_their_labels() {
        let chain = QuotientChain::new(z1(), Schedule::Moduli(vec![2])).unwrap();
        let cay = cayley_lcmg_finite(&chain, 0, &laplacian_sym(), 100).unwrap();
        let g = &cay.graph;
        assert_eq!((g.vertex_count(), g.edge_count()), (2, 4));
        assert_eq!(g.label(0, 1), Some(c(-2.0)));
        assert_eq!(g.label(1, 0), Some(c(-2.0)));
        assert_eq!(g.label(0, 0), Some(c(2.0)));
    }

    #[test]
    fn identity_support_restricts_to_basepoint() {
        let g = z1();
        let unit = RingElement::monomial(g.identity(), c(1.0));
        let sym = SymmetrizedSupport::from_element(&unit, &g).unwrap();
        let chain = QuotientChain::powers(g, 2, 3).unwrap();
        let cay = cayley_lcmg_finite(&chain, 2, &sym, 100).unwrap();
        assert_eq!(cay.graph.vertex_count(), 1);
        assert_eq!(cay.graph.label(0, 0), Some(c(1.0)));
        assert_eq!(cay.dropped, 7);
        assert!(cay.warning().is_some());
    }

    #[test]
    fn infinite_ball_examples() {
        let ball = cayley_ball_infinite(&z1(), &laplacian_sym(), 2, 16).unwrap();
        let coords: Vec<i64> = ball.graph.vertices().iter().map(|v| i64::try_from(&v[0]).unwrap()).collect();
        assert_eq!(coords, vec![0, -1, 1, -2, 2]);

        let h = GroupModel::Heisenberg;
        let e = |a, b, cc| h.element_i64(&[a, b, cc]).unwrap();
        let gens = vec![(e(1, 0, 0), c(1.0)), (e(-1, 0, 0), c(1.0)), (e(0, 1, 0), c(2.0)), (e(0, -1, 0), c(2.0))];
        let sym = SymmetrizedSupport::new(&h, gens).unwrap();
        assert_eq!(cayley_ball_infinite(&h, &sym, 1, 16).unwrap().graph.vertex_count(), 5);

        let r0 = cayley_ball_infinite(&z1(), &laplacian_sym(), 0, 16).unwrap();
        assert_eq!((r0.graph.vertex_count(), r0.graph.label(0, 0)), (1, Some(c(2.0))));
        let r0 = cayley_ball_infinite(&h, &sym, 0, 16).unwrap();
        assert_eq!((r0.graph.vertex_count(), r0.graph.edge_count()), (1, 0));

        assert!(matches!(cayley_ball_infinite(&z1(), &laplacian_sym(), 17, 16), Err(Error::Resource { .. })));
    }

    #[test]
    fn quotient_ball_matches_infinite_ball_below_word_bound() {
        let chain = QuotientChain::powers(z1(), 2, 4).unwrap();
        let sym = laplacian_sym();
        let cay = cayley_lcmg_finite(&chain, 3, &sym, 100).unwrap();
        let inf = cayley_ball_infinite(&z1(), &sym, 3, 16).unwrap();
        let quo = cay.graph.extract_ball(3);
        assert!(isomorphism(&inf.graph, &quo.graph).is_some());
    }

    #[test]
    fn metric_against_small_quotient() {
        let chain = QuotientChain::new(z1(), Schedule::Moduli(vec![4])).unwrap();
        let sym = laplacian_sym();
        let cay = cayley_lcmg_finite(&chain, 0, &sym, 100).unwrap();
        let inf = InfiniteCayley::new(z1(), sym);
        let d = metric_d(&cay, &inf, 4).unwrap();
        assert_eq!(d.agree_through, Some(1));
        assert_eq!(d.value, 0.5);
    }

    #[test]
    fn word_bound_on_cyclic_chain() {
        let chain = QuotientChain::powers(z1(), 2, 5).unwrap();
        let sym = laplacian_sym();
        // K_n = 2^n Z, shortest kernel word has length 2^n
        for level in 0..5 {
            let m = 1usize << (level + 1);
            assert_eq!(shortest_kernel_word(&chain, level, &sym, 40).unwrap(), Some(m));
        }
        assert_eq!(word_length_radius(&chain, 0, &sym, 6).unwrap(), Some(0));
        assert_eq!(word_length_radius(&chain, 1, &sym, 6).unwrap(), Some(1));
        assert_eq!(word_length_radius(&chain, 3, &sym, 6).unwrap(), Some(6));
    }
}
