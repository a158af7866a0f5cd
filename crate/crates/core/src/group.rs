//! Exact group models and nested chains of finite-index normal subgroups.
//!
//! Three model families are built in: free abelian lattices `Z^d`, the
//! integer Heisenberg group of upper unitriangular 3x3 matrices, and finite
//! groups given by a multiplication table. Lattice and Heisenberg chains are
//! the congruence kernels `K_n = ker(G -> G(Z/m_n))` for a divisibility
//! schedule of moduli; finite chains list their normal subgroups explicitly.

use std::fmt::{self, Debug};
use std::hash::Hash;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A group with exact arithmetic and canonical element representations.
pub trait Group {
    type Elem: Clone + Eq + Ord + Hash + Debug;

    fn identity(&self) -> Self::Elem;
    fn multiply(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn inverse(&self, a: &Self::Elem) -> Result<Self::Elem>;
    /// Model-specific coordinate vector, used for display and serialization.
    fn coordinates(&self, a: &Self::Elem) -> Vec<BigInt>;
}

/// Finite group given by a multiplication table with the identity at index 0.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
}

impl Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroup(order {})", self.table.len())
    }
}

impl FiniteGroup {
    /// Validates the table: square, identity at index 0, Latin square rows and
    /// columns, associative.
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::Config("empty multiplication table".into()));
        }
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Config(format!(
                    "multiplication table row {i} has length {}, expected {n}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|&&x| x >= n) {
                return Err(Error::Config(format!("table entry {bad} out of range")));
            }
        }
        for i in 0..n {
            if table[0][i] != i || table[i][0] != i {
                return Err(Error::Config("index 0 is not a two-sided identity".into()));
            }
        }
        for i in 0..n {
            let mut row_seen = vec![false; n];
            let mut col_seen = vec![false; n];
            for j in 0..n {
                row_seen[table[i][j]] = true;
                col_seen[table[j][i]] = true;
            }
            if row_seen.contains(&false) || col_seen.contains(&false) {
                return Err(Error::Config(format!("table is not a Latin square at {i}")));
            }
        }
        for a in 0..n {
            for b in 0..n {
                let ab = table[a][b];
                for c in 0..n {
                    if table[ab][c] != table[a][table[b][c]] {
                        return Err(Error::Config(format!(
                            "table is not associative at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        let inverse = (0..n)
            .map(|a| (0..n).find(|&b| table[a][b] == 0).expect("latin square"))
            .collect();
        Ok(Self { table, inverse })
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    fn check_normal_subgroup(&self, sub: &[usize]) -> Result<Vec<bool>> {
        let n = self.order();
        let mut member = vec![false; n];
        for &h in sub {
            if h >= n {
                return Err(Error::Config(format!("subgroup element {h} out of range")));
            }
            member[h] = true;
        }
        if !member[0] {
            return Err(Error::Config("subgroup does not contain the identity".into()));
        }
        for a in (0..n).filter(|&a| member[a]) {
            if !member[self.inv(a)] {
                return Err(Error::Config(format!("subgroup not closed under inverse at {a}")));
            }
            for b in (0..n).filter(|&b| member[b]) {
                if !member[self.mul(a, b)] {
                    return Err(Error::Config(format!(
                        "subgroup not closed under multiplication at ({a}, {b})"
                    )));
                }
            }
            for g in 0..n {
                if !member[self.mul(self.mul(g, a), self.inv(g))] {
                    return Err(Error::Config(format!("subgroup not normal: {g}·{a}·{g}⁻¹")));
                }
            }
        }
        Ok(member)
    }
}

/// The closed set of built-in group models.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupModel {
    /// Free abelian group `Z^dim` under componentwise addition.
    Lattice { dim: usize },
    /// Integer Heisenberg group; `(a, b, c)` is `[[1,a,c],[0,1,b],[0,0,1]]`.
    Heisenberg,
    Finite(Arc<FiniteGroup>),
}

/// Canonical representation of an element of one of the built-in models.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroupElement {
    Lattice(Vec<BigInt>),
    Heisenberg([BigInt; 3]),
    Finite(usize),
}

impl GroupModel {
    pub fn lattice(dim: usize) -> Self {
        GroupModel::Lattice { dim }
    }

    pub fn finite(table: Vec<Vec<usize>>) -> Result<Self> {
        Ok(GroupModel::Finite(Arc::new(FiniteGroup::new(table)?)))
    }

    pub fn name(&self) -> String {
        match self {
            GroupModel::Lattice { dim } => format!("lattice:{dim}"),
            GroupModel::Heisenberg => "heisenberg".into(),
            GroupModel::Finite(g) => format!("finite:{}", g.order()),
        }
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, GroupModel::Lattice { .. })
    }

    /// Number of coordinates in an element's canonical representation.
    pub fn arity(&self) -> usize {
        match self {
            GroupModel::Lattice { dim } => *dim,
            GroupModel::Heisenberg => 3,
            GroupModel::Finite(_) => 1,
        }
    }

    pub fn element(&self, coords: &[BigInt]) -> Result<GroupElement> {
        if coords.len() != self.arity() {
            return Err(Error::Structural(format!(
                "{} expects {} coordinates, got {}",
                self.name(),
                self.arity(),
                coords.len()
            )));
        }
        match self {
            GroupModel::Lattice { .. } => Ok(GroupElement::Lattice(coords.to_vec())),
            GroupModel::Heisenberg => Ok(GroupElement::Heisenberg([
                coords[0].clone(),
                coords[1].clone(),
                coords[2].clone(),
            ])),
            GroupModel::Finite(g) => {
                let idx = coords[0]
                    .to_usize()
                    .filter(|&i| i < g.order())
                    .ok_or_else(|| {
                        Error::Structural(format!(
                            "finite group element {} out of range (order {})",
                            coords[0],
                            g.order()
                        ))
                    })?;
                Ok(GroupElement::Finite(idx))
            }
        }
    }

    pub fn element_i64(&self, coords: &[i64]) -> Result<GroupElement> {
        let big: Vec<BigInt> = coords.iter().map(|&c| BigInt::from(c)).collect();
        self.element(&big)
    }

    /// Checks that `g` belongs to this model.
    pub fn check(&self, g: &GroupElement) -> Result<()> {
        let ok = match (self, g) {
            (GroupModel::Lattice { dim }, GroupElement::Lattice(v)) => v.len() == *dim,
            (GroupModel::Heisenberg, GroupElement::Heisenberg(_)) => true,
            (GroupModel::Finite(f), GroupElement::Finite(i)) => *i < f.order(),
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Structural(format!("{g:?} is not an element of {}", self.name())))
        }
    }
}

impl Group for GroupModel {
    type Elem = GroupElement;

    fn identity(&self) -> GroupElement {
        match self {
            GroupModel::Lattice { dim } => GroupElement::Lattice(vec![BigInt::zero(); *dim]),
            GroupModel::Heisenberg => {
                GroupElement::Heisenberg([BigInt::zero(), BigInt::zero(), BigInt::zero()])
            }
            GroupModel::Finite(_) => GroupElement::Finite(0),
        }
    }

    fn multiply(&self, a: &GroupElement, b: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (self, a, b) {
            (_, GroupElement::Lattice(x), GroupElement::Lattice(y)) => {
                GroupElement::Lattice(x.iter().zip(y).map(|(p, q)| p + q).collect())
            }
            (_, GroupElement::Heisenberg([a1, b1, c1]), GroupElement::Heisenberg([a2, b2, c2])) => {
                GroupElement::Heisenberg([a1 + a2, b1 + b2, c1 + c2 + a1 * b2])
            }
            (GroupModel::Finite(f), GroupElement::Finite(x), GroupElement::Finite(y)) => {
                GroupElement::Finite(f.mul(*x, *y))
            }
            _ => unreachable!("checked above"),
        })
    }

    fn inverse(&self, a: &GroupElement) -> Result<GroupElement> {
        self.check(a)?;
        Ok(match (self, a) {
            (_, GroupElement::Lattice(x)) => GroupElement::Lattice(x.iter().map(|p| -p).collect()),
            (_, GroupElement::Heisenberg([a, b, c])) => {
                GroupElement::Heisenberg([-a, -b, a * b - c])
            }
            (GroupModel::Finite(f), GroupElement::Finite(x)) => GroupElement::Finite(f.inv(*x)),
            _ => unreachable!("checked above"),
        })
    }

    fn coordinates(&self, a: &GroupElement) -> Vec<BigInt> {
        match a {
            GroupElement::Lattice(v) => v.clone(),
            GroupElement::Heisenberg(v) => v.to_vec(),
            GroupElement::Finite(i) => vec![BigInt::from(*i)],
        }
    }
}

/// How the nested normal subgroups of a chain are given.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Schedule {
    /// Congruence moduli `m_1 | m_2 | ...`, strictly increasing.
    Moduli(Vec<u64>),
    /// Explicit normal subgroups of a finite group, each contained in the previous one.
    Subgroups(Vec<Vec<usize>>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Level {
    Modulus(u64),
    Cosets {
        /// Smallest element index of the coset of each element.
        rep_of: Vec<usize>,
        /// Coset representatives in increasing order.
        reps: Vec<usize>,
    },
}

/// A group model with a nested sequence of finite-index normal subgroups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientChain {
    model: GroupModel,
    levels: Vec<Level>,
}

/// A coset `gK_n`, stored as its canonical representative at level `n`.
///
/// Lattice and Heisenberg representatives are coordinate residues in
/// `[0, m_n)`; finite-group representatives hold the smallest element index
/// of the coset.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuotientElement {
    pub level: usize,
    pub rep: Vec<u64>,
}

impl QuotientChain {
    pub fn new(model: GroupModel, schedule: Schedule) -> Result<Self> {
        let levels = match (&model, schedule) {
            (GroupModel::Finite(_), Schedule::Moduli(_)) => {
                return Err(Error::Config(
                    "finite models take an explicit subgroup schedule".into(),
                ))
            }
            (GroupModel::Finite(f), Schedule::Subgroups(subs)) => {
                let mut levels = Vec::with_capacity(subs.len());
                let mut prev: Option<Vec<bool>> = None;
                for (i, sub) in subs.iter().enumerate() {
                    let member = f.check_normal_subgroup(sub)?;
                    if let Some(p) = &prev {
                        if member.iter().zip(p).any(|(&m, &q)| m && !q) {
                            return Err(Error::Config(format!(
                                "subgroup {i} is not contained in subgroup {}",
                                i - 1
                            )));
                        }
                    }
                    let n = f.order();
                    let mut rep_of = vec![usize::MAX; n];
                    for g in 0..n {
                        if rep_of[g] != usize::MAX {
                            continue;
                        }
                        for h in (0..n).filter(|&h| member[h]) {
                            rep_of[f.mul(g, h)] = g;
                        }
                    }
                    let mut reps: Vec<usize> = rep_of.clone();
                    reps.sort_unstable();
                    reps.dedup();
                    levels.push(Level::Cosets { rep_of, reps });
                    prev = Some(member);
                }
                levels
            }
            (_, Schedule::Subgroups(_)) => {
                return Err(Error::Config(
                    "lattice and Heisenberg models take a moduli schedule".into(),
                ))
            }
            (_, Schedule::Moduli(moduli)) => {
                for (i, &m) in moduli.iter().enumerate() {
                    if m == 0 {
                        return Err(Error::Config("modulus must be positive".into()));
                    }
                    if i > 0 {
                        let p = moduli[i - 1];
                        if m <= p || m % p != 0 {
                            return Err(Error::Config(format!(
                                "moduli must be strictly increasing with each dividing the next: {p} then {m}"
                            )));
                        }
                    }
                }
                moduli.into_iter().map(Level::Modulus).collect()
            }
        };
        if levels.is_empty() {
            return Err(Error::Config("quotient chain has no levels".into()));
        }
        Ok(Self { model, levels })
    }

    /// Chain with moduli `base^1, ..., base^levels`.
    pub fn powers(model: GroupModel, base: u64, levels: usize) -> Result<Self> {
        if base < 2 {
            return Err(Error::Config(format!("schedule base must be at least 2, got {base}")));
        }
        let mut moduli = Vec::with_capacity(levels);
        let mut m: u64 = 1;
        for _ in 0..levels {
            m = m
                .checked_mul(base)
                .ok_or_else(|| Error::Config("modulus overflows u64".into()))?;
            moduli.push(m);
        }
        Self::new(model, Schedule::Moduli(moduli))
    }

    pub fn model(&self) -> &GroupModel {
        &self.model
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    fn level(&self, level: usize) -> Result<&Level> {
        self.levels.get(level).ok_or(Error::Range {
            what: "quotient level",
            index: level,
            len: self.levels.len(),
        })
    }

    /// Modulus `m_n` of a congruence level, `None` for finite-group chains.
    pub fn modulus(&self, level: usize) -> Result<Option<u64>> {
        Ok(match self.level(level)? {
            Level::Modulus(m) => Some(*m),
            Level::Cosets { .. } => None,
        })
    }

    /// Order of `G/K_n`, computed without overflow.
    pub fn order(&self, level: usize) -> Result<u128> {
        Ok(match self.level(level)? {
            Level::Modulus(m) => {
                let m = *m as u128;
                let exp = self.model.arity() as u32;
                m.checked_pow(exp).unwrap_or(u128::MAX)
            }
            Level::Cosets { reps, .. } => reps.len() as u128,
        })
    }

    /// Canonical projection `G -> G/K_n`.
    pub fn project(&self, level: usize, g: &GroupElement) -> Result<QuotientElement> {
        self.model.check(g)?;
        let rep = match (self.level(level)?, g) {
            (Level::Modulus(m), GroupElement::Lattice(v)) => v.iter().map(|x| residue(x, *m)).collect(),
            (Level::Modulus(m), GroupElement::Heisenberg(v)) => {
                v.iter().map(|x| residue(x, *m)).collect()
            }
            (Level::Cosets { rep_of, .. }, GroupElement::Finite(i)) => vec![rep_of[*i] as u64],
            _ => unreachable!("model checked"),
        };
        Ok(QuotientElement { level, rep })
    }

    /// All cosets at `level` in lexicographic order of representatives;
    /// the identity coset comes first.
    pub fn enumerate(&self, level: usize, cap: usize) -> Result<Vec<QuotientElement>> {
        let order = self.order(level)?;
        if order > cap as u128 {
            return Err(Error::Resource {
                what: "quotient order",
                requested: order.min(usize::MAX as u128) as usize,
                cap,
            });
        }
        Ok(match self.level(level)? {
            Level::Modulus(m) => {
                let arity = self.model.arity();
                let mut out = Vec::with_capacity(order as usize);
                let mut digits = vec![0u64; arity];
                loop {
                    out.push(QuotientElement { level, rep: digits.clone() });
                    // odometer increment, last coordinate fastest
                    let mut i = arity;
                    loop {
                        if i == 0 {
                            return Ok(out);
                        }
                        i -= 1;
                        digits[i] += 1;
                        if digits[i] < *m {
                            break;
                        }
                        digits[i] = 0;
                    }
                }
            }
            Level::Cosets { reps, .. } => reps
                .iter()
                .map(|&r| QuotientElement { level, rep: vec![r as u64] })
                .collect(),
        })
    }

    pub fn quotient(&self, level: usize) -> Result<Quotient<'_>> {
        self.level(level)?;
        Ok(Quotient { chain: self, level })
    }
}

fn residue(x: &BigInt, m: u64) -> u64 {
    x.mod_floor(&BigInt::from(m))
        .to_u64()
        .expect("residue lies in [0, m)")
}

/// The finite group `G/K_n` at one level of a chain.
#[derive(Clone, Copy, Debug)]
pub struct Quotient<'a> {
    chain: &'a QuotientChain,
    level: usize,
}

impl<'a> Quotient<'a> {
    pub fn chain(&self) -> &'a QuotientChain {
        self.chain
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn enumerate(&self, cap: usize) -> Result<Vec<QuotientElement>> {
        self.chain.enumerate(self.level, cap)
    }

    fn check(&self, a: &QuotientElement) -> Result<()> {
        if a.level != self.level || a.rep.len() != self.chain.model.arity() {
            return Err(Error::Structural(format!(
                "{a:?} is not an element of the level-{} quotient",
                self.level
            )));
        }
        Ok(())
    }
}

impl Group for Quotient<'_> {
    type Elem = QuotientElement;

    fn identity(&self) -> QuotientElement {
        QuotientElement {
            level: self.level,
            rep: vec![0; self.chain.model.arity()],
        }
    }

    fn multiply(&self, a: &QuotientElement, b: &QuotientElement) -> Result<QuotientElement> {
        self.check(a)?;
        self.check(b)?;
        let rep = match (&self.chain.levels[self.level], &self.chain.model) {
            (Level::Modulus(m), GroupModel::Lattice { .. }) => {
                let m = *m as u128;
                a.rep
                    .iter()
                    .zip(&b.rep)
                    .map(|(&x, &y)| ((x as u128 + y as u128) % m) as u64)
                    .collect()
            }
            (Level::Modulus(m), GroupModel::Heisenberg) => {
                let m = *m as u128;
                let (a1, b1, c1) = (a.rep[0] as u128, a.rep[1] as u128, a.rep[2] as u128);
                let (a2, b2, c2) = (b.rep[0] as u128, b.rep[1] as u128, b.rep[2] as u128);
                vec![
                    ((a1 + a2) % m) as u64,
                    ((b1 + b2) % m) as u64,
                    ((c1 + c2 + (a1 * b2) % m) % m) as u64,
                ]
            }
            (Level::Cosets { rep_of, .. }, GroupModel::Finite(f)) => {
                vec![rep_of[f.mul(a.rep[0] as usize, b.rep[0] as usize)] as u64]
            }
            _ => unreachable!("chain levels match the model"),
        };
        Ok(QuotientElement { level: self.level, rep })
    }

    fn inverse(&self, a: &QuotientElement) -> Result<QuotientElement> {
        self.check(a)?;
        let rep = match (&self.chain.levels[self.level], &self.chain.model) {
            (Level::Modulus(m), GroupModel::Lattice { .. }) => {
                a.rep.iter().map(|&x| (m - x) % m).collect()
            }
            (Level::Modulus(m), GroupModel::Heisenberg) => {
                let mm = *m as u128;
                let (x, y, c) = (a.rep[0] as u128, a.rep[1] as u128, a.rep[2] as u128);
                let neg = |v: u128| ((mm - v % mm) % mm) as u64;
                // (-a, -b, ab - c)
                vec![neg(x), neg(y), (((x * y) % mm + mm - c) % mm) as u64]
            }
            (Level::Cosets { rep_of, .. }, GroupModel::Finite(f)) => {
                vec![rep_of[f.inv(a.rep[0] as usize)] as u64]
            }
            _ => unreachable!("chain levels match the model"),
        };
        Ok(QuotientElement { level: self.level, rep })
    }

    fn coordinates(&self, a: &QuotientElement) -> Vec<BigInt> {
        a.rep.iter().map(|&x| BigInt::from(x)).collect()
    }
}
