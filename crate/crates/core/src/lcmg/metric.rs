use serde::Serialize;

use super::iso::lcmg_isomorphic;
use super::Lcmg;
use crate::error::Result;

/// Anything that can produce its ball of radius `r` around the basepoint.
pub trait BallSource {
    fn ball(&self, r: usize) -> Result<Lcmg>;
}

impl BallSource for Lcmg {
    fn ball(&self, r: usize) -> Result<Lcmg> {
        Ok(self.extract_ball(r).graph)
    }
}

/// The ball metric restricted to radii `0..=r_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricValue {
    /// `1/(n+1)` for the largest agreeing radius `n`, or 1 if radius 0 already differs.
    pub value: f64,
    /// Largest radius through which the balls are isomorphic.
    pub agree_through: Option<usize>,
    /// True when the balls agree at every radius up to `r_max`, so `value`
    /// is only an upper bound.
    pub capped: bool,
}

impl MetricValue {
    /// Denominator `n+1` of the value, or 1.
    pub fn denominator(&self) -> usize {
        self.agree_through.map_or(1, |n| n + 1)
    }
}

/// Balls agree at radius `n` only if they agree at every smaller radius, so
/// the scan stops at the first disagreement.
pub fn metric_d<A: BallSource + ?Sized, B: BallSource + ?Sized>(a: &A, b: &B, r_max: usize) -> Result<MetricValue> {
    let mut agree_through = None;
    for r in 0..=r_max {
        if !lcmg_isomorphic(&a.ball(r)?, &b.ball(r)?) {
            break;
        }
        agree_through = Some(r);
    }
    let value = match agree_through {
        Some(n) => 1.0 / (n as f64 + 1.0),
        None => 1.0,
    };
    Ok(MetricValue { value, agree_through, capped: agree_through == Some(r_max) })
}

#[cfg(test)]
mod tests {
    use super::super::tests::cycle;
    use super::*;

    #[test]
    fn identical_graphs_are_capped() {
        let g = cycle(12, 2.0, -1.0);
        let d = metric_d(&g, &g, 5).unwrap();
        assert_eq!(d, MetricValue { value: 1.0 / 6.0, agree_through: Some(5), capped: true });
    }

    #[test]
    fn differing_basepoint_loop_gives_one() {
        let g = cycle(5, 2.0, -1.0);
        let h = cycle(5, 3.0, -1.0);
        let d = metric_d(&g, &h, 5).unwrap();
        assert_eq!(d.value, 1.0);
        assert_eq!(d.agree_through, None);
        assert!(!d.capped);
    }

    #[test]
    fn cycles_of_different_length() {
        // C_4 and C_9 agree through radius 1 (4 > 2·1+1) but not radius 2
        let d = metric_d(&cycle(4, 2.0, -1.0), &cycle(9, 2.0, -1.0), 6).unwrap();
        assert_eq!(d.agree_through, Some(1));
        assert_eq!(d.value, 0.5);
    }
}
