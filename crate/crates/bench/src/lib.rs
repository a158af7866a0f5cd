//! Fixtures shared by the criterion benches in `benches/`.

use lcmg_spectra::group::Group;
use lcmg_spectra::{Complex64, GroupElement, GroupModel, QuotientChain, RingElement, SymmetrizedSupport};

pub fn one_minus_t() -> (GroupModel, RingElement<GroupElement>) {
    let g = GroupModel::lattice(1);
    let w = RingElement::from_terms([
        (g.identity(), Complex64::new(1.0, 0.0)),
        (g.element_i64(&[1]).expect("rank 1"), Complex64::new(-1.0, 0.0)),
    ]);
    (g, w)
}

/// `1 + 2x + 3y` on the Heisenberg group.
pub fn heisenberg_w() -> (GroupModel, RingElement<GroupElement>) {
    let h = GroupModel::Heisenberg;
    let w = RingElement::from_terms([
        (h.identity(), Complex64::new(1.0, 0.0)),
        (h.element_i64(&[1, 0, 0]).expect("arity 3"), Complex64::new(2.0, 0.0)),
        (h.element_i64(&[0, 1, 0]).expect("arity 3"), Complex64::new(3.0, 0.0)),
    ]);
    (h, w)
}

pub fn support(model: &GroupModel, w: &RingElement<GroupElement>) -> SymmetrizedSupport<GroupElement> {
    let z = w.times_adjoint(model).expect("model elements");
    SymmetrizedSupport::from_element(&z, model).expect("w w* is self-adjoint")
}

pub fn chain(model: GroupModel, levels: usize) -> QuotientChain {
    QuotientChain::powers(model, 2, levels).expect("valid schedule")
}
