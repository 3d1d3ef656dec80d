use std::collections::HashMap;

use serde::Serialize;

use crate::algebra::FreeWord;
use crate::error::{Error, Result};
use crate::marked::ball::{Ball, DEFAULT_BALL_CAP};
use crate::marked::group::{split_pair_key, MarkedGroup};

/// Default relation length up to which quotient maps are verified.
pub const DEFAULT_QUOTIENT_HORIZON: usize = 8;

/// Relation-length agreement of two marked groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Agreement {
    /// Largest `L <= cap` such that both groups have the same relations of
    /// length at most `L` (or a verified lower bound if `!exact`).
    pub value: usize,
    pub exact: bool,
    pub cap: usize,
    /// A shortest word that is a relation in exactly one of the groups,
    /// when one of length `<= cap` exists.
    pub discrepancy: Option<FreeWord>,
}

impl Agreement {
    /// Radius of the coinciding identity-centred marked balls.
    pub fn ball_radius(&self) -> usize {
        self.value / 2
    }
}

#[derive(Clone, Copy)]
enum Side {
    Left,
    Right,
}

struct Scan {
    /// Shortest discrepancy found; minimal whenever its length is `<= checked`.
    found: Option<FreeWord>,
    /// Every discrepancy of length `<= checked` has been examined.
    checked: usize,
}

/// Breadth-first search of the diagonal product for two distinct elements
/// that share a component on one of `sides`. Such a pair `x, y` yields the
/// discrepancy `w_x w_y^{-1}` of length `|x| + |y|`, and conversely every
/// discrepancy of length `m` splits into a pair of lengths `<= ceil(m/2)`.
fn scan(left: &MarkedGroup, right: &MarkedGroup, max_len: usize, ball_cap: usize, sides: &[Side]) -> Result<Scan> {
    let diag = MarkedGroup::diagonal(left.clone(), right.clone())?;
    let mut ball = Ball::new(&diag)?;
    let mut classes: Vec<HashMap<Vec<u8>, usize>> = vec![HashMap::new(); sides.len()];
    let mut best: Option<(usize, usize, usize)> = None;
    let mut r = 0;
    loop {
        let offset = ball.len() - ball.sphere(r).len();
        for (j, e) in ball.sphere(r).iter().enumerate() {
            let (kl, kr) = split_pair_key(&e.key).expect("diagonal keys are pairs");
            for (side, map) in sides.iter().zip(classes.iter_mut()) {
                let k = match side {
                    Side::Left => kl,
                    Side::Right => kr,
                };
                match map.get(k) {
                    Some(&i) => {
                        let len = ball.entries()[i].distance as usize + r;
                        if best.is_none_or(|(b, _, _)| len < b) {
                            best = Some((len, offset + j, i));
                        }
                    }
                    None => {
                        map.insert(k.to_vec(), offset + j);
                    }
                }
            }
        }
        let checked = 2 * r;
        if best.is_some() || checked >= max_len || !ball.grow(&diag, ball_cap)? {
            let found = best.map(|(_, x, y)| {
                let e = ball.entries();
                e[x].witness.mul(&e[y].witness.inverse())
            });
            return Ok(Scan { found, checked });
        }
        r += 1;
    }
}

pub fn agreement_radius(left: &MarkedGroup, right: &MarkedGroup, cap: usize) -> Result<Agreement> {
    agreement_radius_with_budget(left, right, cap, DEFAULT_BALL_CAP)
}

/// Agreement radius via the ball of `left ⊗ right` of radius `ceil(cap/2)`.
/// If the ball budget runs out first, returns the verified lower bound with
/// `exact = false`.
pub fn agreement_radius_with_budget(
    left: &MarkedGroup,
    right: &MarkedGroup,
    cap: usize,
    ball_cap: usize,
) -> Result<Agreement> {
    let s = scan(left, right, cap, ball_cap, &[Side::Left, Side::Right])?;
    Ok(match s.found {
        Some(w) => Agreement { value: (w.len() - 1).min(cap), exact: true, cap, discrepancy: Some(w).filter(|w| w.len() <= cap) },
        None if s.checked >= cap => Agreement { value: cap, exact: true, cap, discrepancy: None },
        None => Agreement { value: s.checked, exact: false, cap, discrepancy: None },
    })
}

/// Checks that every relation of `src` of length `<= horizon` holds in `quo`.
/// Fails with [`Error::NotAQuotient`] carrying the shortest offending length.
pub fn verify_quotient(src: &MarkedGroup, quo: &MarkedGroup, horizon: usize, ball_cap: usize) -> Result<()> {
    let s = scan(src, quo, horizon, ball_cap, &[Side::Left])?;
    match s.found {
        Some(w) if w.len() <= horizon => Err(Error::NotAQuotient { length: w.len() }),
        _ if s.checked < horizon => Err(Error::BudgetExceeded { what: "quotient verification ball", limit: ball_cap as u64 }),
        _ => Ok(()),
    }
}

/// `(G1 ⊗ G2, S)`, the subgroup of `G1 × G2` generated by paired generators.
pub fn diagonal_product(left: MarkedGroup, right: MarkedGroup) -> Result<MarkedGroup> {
    MarkedGroup::diagonal(left, right)
}
