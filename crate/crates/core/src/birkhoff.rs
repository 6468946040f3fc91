//! Greedy Birkhoff–von Neumann decomposition of a bistochastic matrix.

use num_traits::{Signed, Zero};

use crate::market::{FractionalMatching, Matching};
use crate::rational::Rational;

/// Perfect matching inside the support of `pi`, by augmenting paths.
fn support_matching(pi: &[Vec<Rational>]) -> Option<Matching> {
    let n = pi.len();
    let mut husband: Vec<Option<usize>> = vec![None; n];
    fn augment(i: usize, pi: &[Vec<Rational>], seen: &mut [bool], husband: &mut [Option<usize>]) -> bool {
        for j in 0..pi.len() {
            if pi[i][j].is_positive() && !seen[j] {
                seen[j] = true;
                if husband[j].is_none_or(|h| augment(h, pi, seen, husband)) {
                    husband[j] = Some(i);
                    return true;
                }
            }
        }
        false
    }
    for i in 0..n {
        if !augment(i, pi, &mut vec![false; n], &mut husband) {
            return None;
        }
    }
    let mut partner = vec![0; n];
    for (j, h) in husband.iter().enumerate() {
        partner[h.expect("perfect")] = j;
    }
    Matching::new(partner).ok()
}

/// Writes `pi` as `Σ w_k · σ_k` with positive weights summing to one. Each
/// step peels the largest multiple of some permutation in the support, so
/// at least one entry drops to zero and at most `n² - n + 1` terms appear.
///
/// ```
/// use matchcert::birkhoff::decompose;
/// use matchcert::market::{FractionalMatching, Matching};
///
/// let a = Matching::identity(3);
/// let b = Matching::new(vec![1, 2, 0]).unwrap();
/// let terms = decompose(&FractionalMatching::uniform_over(&[a, b]).unwrap());
/// assert_eq!(terms.len(), 2);
/// ```
pub fn decompose(lottery: &FractionalMatching) -> Vec<(Rational, Matching)> {
    let mut rest = lottery.matrix().clone();
    let mut terms = Vec::new();
    while rest.iter().flatten().any(|x| !x.is_zero()) {
        let sigma = support_matching(&rest).expect("a scaled bistochastic matrix has a perfect support matching");
        let w = (0..rest.len())
            .map(|i| rest[i][sigma.partner_of_man(i)].clone())
            .min()
            .expect("nonempty");
        for i in 0..rest.len() {
            rest[i][sigma.partner_of_man(i)] -= &w;
        }
        terms.push((w, sigma));
    }
    terms
}

/// Recombines a decomposition into a matrix.
pub fn recompose(terms: &[(Rational, Matching)], n: usize) -> Vec<Vec<Rational>> {
    let mut pi = vec![vec![Rational::zero(); n]; n];
    for (w, sigma) in terms {
        for (i, row) in pi.iter_mut().enumerate() {
            row[sigma.partner_of_man(i)] += w;
        }
    }
    pi
}
