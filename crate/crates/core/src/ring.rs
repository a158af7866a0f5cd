//! Complex group rings `C[G]` and `C[G/K_n]`.

use std::collections::BTreeMap;
use std::fmt::Debug;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::group::{Group, GroupElement, GroupModel, QuotientChain, QuotientElement};

/// A finitely supported formal sum `Σ λ_g g` with complex coefficients.
///
/// Zero coefficients are pruned on every construction, using exact `0.0`
/// comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct RingElement<E: Ord> {
    terms: BTreeMap<E, Complex64>,
}

impl<E: Ord + Clone + Debug> Default for RingElement<E> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<E: Ord + Clone + Debug> RingElement<E> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn monomial(g: E, coefficient: Complex64) -> Self {
        Self::from_terms([(g, coefficient)])
    }

    /// Sums repeated keys and drops zero coefficients.
    pub fn from_terms<I: IntoIterator<Item = (E, Complex64)>>(terms: I) -> Self {
        let mut map: BTreeMap<E, Complex64> = BTreeMap::new();
        for (g, c) in terms {
            *map.entry(g).or_insert_with(Complex64::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        Self { terms: map }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&E, &Complex64)> {
        self.terms.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &E> {
        self.terms.keys()
    }

    pub fn coefficient(&self, g: &E) -> Complex64 {
        self.terms.get(g).copied().unwrap_or_else(Complex64::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_terms(self.terms.iter().chain(&other.terms).map(|(g, c)| (g.clone(), *c)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_terms(self.terms.iter().map(|(g, c)| (g.clone(), c * s)))
    }

    /// Largest coefficient-wise absolute difference, per real/imaginary part.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let diff = self.sub(other);
        diff.terms.values().fold(0.0f64, |m, c| m.max(c.re.abs()).max(c.im.abs()))
    }

    /// `(Σ λ_g g)* = Σ conj(λ_g) g⁻¹`.
    pub fn involution<G: Group<Elem = E>>(&self, group: &G) -> Result<Self> {
        let mut out = Vec::with_capacity(self.terms.len());
        for (g, c) in &self.terms {
            out.push((group.inverse(g)?, c.conj()));
        }
        Ok(Self::from_terms(out))
    }

    /// Convolution product: the coefficient of `g` is `Σ_{hk=g} x_h y_k`.
    pub fn multiply<G: Group<Elem = E>>(&self, other: &Self, group: &G) -> Result<Self> {
        let mut acc: BTreeMap<E, Complex64> = BTreeMap::new();
        for (h, a) in &self.terms {
            for (k, b) in &other.terms {
                *acc.entry(group.multiply(h, k)?).or_insert_with(Complex64::zero) += a * b;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(Self { terms: acc })
    }

    /// Exact check `x* = x` on the canonical support.
    pub fn is_self_adjoint<G: Group<Elem = E>>(&self, group: &G) -> Result<bool> {
        Ok(self.first_adjoint_violation(group)?.is_none())
    }

    fn first_adjoint_violation<G: Group<Elem = E>>(
        &self,
        group: &G,
    ) -> Result<Option<(E, Complex64, E, Complex64)>> {
        for (g, c) in &self.terms {
            let inv = group.inverse(g)?;
            let partner = self.coefficient(&inv);
            if *c != partner.conj() {
                return Ok(Some((g.clone(), *c, inv, partner)));
            }
        }
        Ok(None)
    }

    /// `(x + x*)/2`, which is self-adjoint in exact floating-point terms.
    pub fn hermitian_part<G: Group<Elem = E>>(&self, group: &G) -> Result<Self> {
        Ok(self.add(&self.involution(group)?).scale(Complex64::new(0.5, 0.0)))
    }

    /// `x·x*`, symmetrized so that rounding in the convolution sums cannot
    /// break exact self-adjointness.
    pub fn times_adjoint<G: Group<Elem = E>>(&self, group: &G) -> Result<Self> {
        self.multiply(&self.involution(group)?, group)?.hermitian_part(group)
    }

    /// `x^k`, with `x^0` the identity.
    pub fn power<G: Group<Elem = E>>(&self, k: usize, group: &G) -> Result<Self> {
        let mut acc = Self::monomial(group.identity(), Complex64::new(1.0, 0.0));
        for _ in 0..k {
            acc = acc.multiply(self, group)?;
        }
        Ok(acc)
    }

    /// Coefficient of the identity in `x^k`, i.e. `<x^k·1, 1>`; this is the
    /// `k`-th moment of the spectral measure of right multiplication by `x`.
    pub fn power_trace<G: Group<Elem = E>>(&self, k: usize, group: &G, cap: usize) -> Result<Complex64> {
        if k > cap {
            return Err(Error::Resource { what: "moment exponent", requested: k, cap });
        }
        Ok(self.power(k, group)?.coefficient(&group.identity()))
    }

    /// Serializes to the term-list literal `[{"re":..,"im":..,"g":[..]}, ...]`.
    pub fn to_json<G: Group<Elem = E>>(&self, group: &G) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(g, c)| {
                    let coords: Vec<Value> = group.coordinates(g).iter().map(bigint_to_json).collect();
                    json!({ "re": c.re, "im": c.im, "g": coords })
                })
                .collect(),
        )
    }
}

impl RingElement<GroupElement> {
    /// Canonical projection `C[G] -> C[G/K_n]`; coefficients of merged cosets add up.
    pub fn project(&self, chain: &QuotientChain, level: usize) -> Result<RingElement<QuotientElement>> {
        let mut out = Vec::with_capacity(self.terms.len());
        for (g, c) in &self.terms {
            out.push((chain.project(level, g)?, *c));
        }
        Ok(RingElement::from_terms(out))
    }

    /// Parses the term-list literal. Coordinates may be JSON integers or
    /// decimal strings (for values beyond 64 bits).
    pub fn from_json(model: &GroupModel, value: &Value) -> Result<Self> {
        let terms = value
            .as_array()
            .ok_or_else(|| Error::Config("ring element must be a JSON array of terms".into()))?;
        let mut out = Vec::with_capacity(terms.len());
        for (i, t) in terms.iter().enumerate() {
            let num = |key: &str| -> Result<f64> {
                match t.get(key) {
                    None => Ok(0.0),
                    Some(v) => v
                        .as_f64()
                        .ok_or_else(|| Error::Config(format!("term {i}: \"{key}\" must be a number"))),
                }
            };
            let coords = t
                .get("g")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Config(format!("term {i}: missing coordinate array \"g\"")))?
                .iter()
                .map(|v| json_to_bigint(v).ok_or_else(|| Error::Config(format!("term {i}: bad coordinate {v}"))))
                .collect::<Result<Vec<_>>>()?;
            let g = model.element(&coords)?;
            out.push((g, Complex64::new(num("re")?, num("im")?)));
        }
        Ok(Self::from_terms(out))
    }
}

pub(crate) fn bigint_to_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => Value::from(v),
        None => Value::from(x.to_string()),
    }
}

pub(crate) fn json_to_bigint(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

/// A self-adjoint element written over a symmetric support `S`:
/// `z = Σ_{s∈S} λ_s s` with `s ∈ S ⇒ s⁻¹ ∈ S`.
///
/// Inverses missing from the support of `z` are kept with label zero; the
/// corresponding Cayley graph edges are kept too.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetrizedSupport<E> {
    /// Pairwise distinct generators in canonical order, each with its coefficient.
    generators: Vec<(E, Complex64)>,
}

impl<E: Ord + Clone + Debug> SymmetrizedSupport<E> {
    /// Builds a support from explicit generator/label pairs, checking that the
    /// generators are distinct and closed under inverse.
    pub fn new<G: Group<Elem = E>>(group: &G, pairs: Vec<(E, Complex64)>) -> Result<Self> {
        let mut generators = pairs;
        generators.sort_by(|a, b| a.0.cmp(&b.0));
        if generators.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Domain("generators must be pairwise distinct".into()));
        }
        let sym = Self { generators };
        for (s, _) in &sym.generators {
            let inv = group.inverse(s)?;
            if sym.index_of(&inv).is_none() {
                return Err(Error::Domain(format!("support not symmetric: {s:?} has no inverse {inv:?}")));
            }
        }
        Ok(sym)
    }

    /// Symmetric support of a self-adjoint `z`.
    pub fn from_element<G: Group<Elem = E>>(z: &RingElement<E>, group: &G) -> Result<Self> {
        if let Some((g, c, inv, d)) = z.first_adjoint_violation(group)? {
            return Err(Error::Domain(format!(
                "element is not self-adjoint: coefficient {c} at {g:?} but {d} at its inverse {inv:?}"
            )));
        }
        let mut generators: BTreeMap<E, Complex64> = z.terms.clone();
        for g in z.terms.keys() {
            generators.entry(group.inverse(g)?).or_insert_with(Complex64::zero);
        }
        Ok(Self { generators: generators.into_iter().collect() })
    }

    pub fn generators(&self) -> &[(E, Complex64)] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn index_of(&self, g: &E) -> Option<usize> {
        self.generators.binary_search_by(|(s, _)| s.cmp(g)).ok()
    }

    pub fn label(&self, g: &E) -> Option<Complex64> {
        self.index_of(g).map(|i| self.generators[i].1)
    }

    /// Checks `λ_s = conj(λ_{s⁻¹})` for every generator.
    pub fn is_self_adjoint<G: Group<Elem = E>>(&self, group: &G) -> Result<bool> {
        for (s, l) in &self.generators {
            let inv = group.inverse(s)?;
            match self.label(&inv) {
                Some(m) if *l == m.conj() => {}
                _ => return Ok(false),
            }
        }
        Ok(true)
    }

    pub fn to_element(&self) -> RingElement<E> {
        RingElement::from_terms(self.generators.iter().cloned())
    }

    /// Largest `|λ_s|` sum, an upper bound on the norm of right multiplication.
    pub fn label_l1_norm(&self) -> f64 {
        self.generators.iter().map(|(_, l)| l.norm()).sum()
    }
}

impl SymmetrizedSupport<GroupElement> {
    /// Image `π_n(S)` without repetition; labels of generators whose cosets
    /// merge are summed, so the support still represents `π_n(z)`.
    ///
    /// Merged sums are averaged with the conjugate of their inverse's sum so
    /// that summation order cannot break `λ_s = conj(λ_{s⁻¹})`.
    pub fn project(&self, chain: &QuotientChain, level: usize) -> Result<SymmetrizedSupport<QuotientElement>> {
        let quotient = chain.quotient(level)?;
        let mut merged: BTreeMap<QuotientElement, Complex64> = BTreeMap::new();
        for (s, l) in &self.generators {
            *merged.entry(chain.project(level, s)?).or_insert_with(Complex64::zero) += l;
        }
        let mut generators = Vec::with_capacity(merged.len());
        for (s, l) in &merged {
            let partner = merged[&quotient.inverse(s)?];
            let label = if *l == partner.conj() { *l } else { (l + partner.conj()) * 0.5 };
            generators.push((s.clone(), label));
        }
        Ok(SymmetrizedSupport { generators })
    }
}
