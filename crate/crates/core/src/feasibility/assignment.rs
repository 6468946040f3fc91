//! Maximum-weight perfect matching on a square rational matrix.

use num_traits::Zero;

use crate::market::{Matching, Matrix};
use crate::rational::Rational;

/// Sizes up to this bound are solved by trying every permutation.
pub const EXHAUSTIVE_LIMIT: usize = 8;

pub fn assignment_value(weight: &Matrix, matching: &Matching) -> Rational {
    (0..matching.n())
        .map(|i| weight[i][matching.partner_of_man(i)].clone())
        .sum()
}

/// Returns a maximizing permutation and its value. Exhaustive for small
/// sizes, Hungarian method otherwise.
pub fn max_weight_assignment(weight: &Matrix) -> (Matching, Rational) {
    if weight.len() <= EXHAUSTIVE_LIMIT {
        max_weight_exhaustive(weight)
    } else {
        max_weight_hungarian(weight)
    }
}

/// First maximizer in lexicographic order.
pub fn max_weight_exhaustive(weight: &Matrix) -> (Matching, Rational) {
    let n = weight.len();
    let mut best: Option<(Matching, Rational)> = None;
    for m in Matching::all(n) {
        let value = assignment_value(weight, &m);
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((m, value));
        }
    }
    best.expect("at least one permutation")
}

/// O(n³) Hungarian method with row/column potentials, run on negated
/// weights so that it minimizes.
pub fn max_weight_hungarian(weight: &Matrix) -> (Matching, Rational) {
    let n = weight.len();
    let cost = |i: usize, j: usize| -weight[i - 1][j - 1].clone();
    // 1-based arrays; column 0 is a sentinel.
    let mut u = vec![Rational::zero(); n + 1];
    let mut v = vec![Rational::zero(); n + 1];
    let mut way = vec![0usize; n + 1];
    let mut owner = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0;
        let mut minv: Vec<Option<Rational>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta: Option<Rational> = None;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0, j) - &u[i0] - &v[j];
                if minv[j].as_ref().is_none_or(|m| reduced < *m) {
                    minv[j] = Some(reduced);
                    way[j] = j0;
                }
                let mj = minv[j].as_ref().expect("set above");
                if delta.as_ref().is_none_or(|d| mj < d) {
                    delta = Some(mj.clone());
                    j1 = j;
                }
            }
            let delta = delta.expect("an unused column remains");
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += &delta;
                    v[j] -= &delta;
                } else if let Some(m) = minv[j].as_mut() {
                    *m -= &delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut partner = vec![0; n];
    for j in 1..=n {
        partner[owner[j] - 1] = j - 1;
    }
    let m = Matching::new(partner).expect("hungarian yields a permutation");
    let value = assignment_value(weight, &m);
    (m, value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn mat(w: &[&[i64]]) -> Matrix {
        w.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
    }

    #[test]
    fn transfer_example_surplus() {
        let (m, v) = max_weight_assignment(&mat(&[&[2, 3, 1], &[2, 4, 0], &[1, 1, 4]]));
        assert_eq!(m, Matching::identity(3));
        assert_eq!(v, int(10));
    }

    #[test]
    fn identity_dominant() {
        for n in 1..=4 {
            let w: Matrix = (0..n).map(|i| (0..n).map(|j| int((i == j) as i64)).collect()).collect();
            assert_eq!(max_weight_assignment(&w), (Matching::identity(n), int(n as i64)));
            assert_eq!(max_weight_hungarian(&w).1, int(n as i64));
        }
    }

    #[test]
    fn swap_example_prefers_identity() {
        let (m, v) = max_weight_assignment(&mat(&[&[0, -4], &[2, 0]]));
        assert_eq!(m, Matching::identity(2));
        assert_eq!(v, int(0));
    }

    #[test]
    fn hungarian_matches_exhaustive_on_a_fixed_matrix() {
        let w = mat(&[
            &[7, 53, 183, 439],
            &[497, 383, 563, 79],
            &[627, 343, 773, 959],
            &[447, 283, 463, 29],
        ]);
        assert_eq!(max_weight_hungarian(&w).1, max_weight_exhaustive(&w).1);
    }
}
