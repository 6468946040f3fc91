//! Strictly positive solutions of `A·x ≥ 0` and their Motzkin alternative.
//!
//! The system is homogeneous, so a solution with `x ≫ 0` exists iff one with
//! `x ≥ 1` does. That normalized system goes to the simplex; when it is
//! infeasible its Farkas multipliers `y` on the rows of `A` give the
//! alternative `y ≥ 0, z = -yA ≥ 0, z ≠ 0`, i.e. `y·A + z·I = 0`.

use num_traits::{One, Signed, Zero};

use super::lp::{lp_feasible, FeasibilityVerdict, LinearSystem, Relation};
use crate::market::Matrix;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PositiveSolution {
    Feasible(Vec<Rational>),
    Infeasible { y: Vec<Rational>, z: Vec<Rational> },
}

/// Decides whether some `x` with every entry positive has `A·x ≥ 0`.
/// Rows of `a` must all have `num_cols` entries.
pub fn positive_solution_exists(a: &Matrix, num_cols: usize) -> PositiveSolution {
    let mut system = LinearSystem::new(num_cols);
    for k in 0..num_cols {
        system.set_lower_bound(k, Rational::one());
    }
    for row in a {
        system.add_row(row.clone(), Relation::Ge, Rational::zero());
    }
    match lp_feasible(&system) {
        FeasibilityVerdict::Feasible(x) => PositiveSolution::Feasible(x),
        FeasibilityVerdict::Infeasible(cert) => {
            let mut y = cert.multipliers;
            let mut z: Vec<Rational> = (0..num_cols)
                .map(|k| -(a.iter().zip(&y).map(|(row, yr)| &row[k] * yr).sum::<Rational>()))
                .collect();
            // Scale so the largest multiplier is 1.
            if let Some(top) = y.iter().filter(|v| v.is_positive()).max().cloned() {
                for v in y.iter_mut().chain(z.iter_mut()) {
                    *v /= &top;
                }
            }
            PositiveSolution::Infeasible { y, z }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::verify::{verify_motzkin, verify_positive_solution};

    #[test]
    fn identity_has_the_uniform_solution() {
        let a = vec![vec![int(1), int(0)], vec![int(0), int(1)]];
        match positive_solution_exists(&a, 2) {
            PositiveSolution::Feasible(x) => {
                assert_eq!(x, vec![int(1), int(1)]);
                assert!(verify_positive_solution(&a, &x));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn negative_scalar_is_refuted() {
        let a = vec![vec![int(-1)]];
        assert_eq!(
            positive_solution_exists(&a, 1),
            PositiveSolution::Infeasible {
                y: vec![int(1)],
                z: vec![int(1)]
            }
        );
        assert!(verify_motzkin(&a, &[int(1)], &[int(1)]));
    }

    #[test]
    fn mixed_signs_need_a_weighting() {
        // -x + 3y >= 0 and 2x - y >= 0: x = y = 1 works.
        let a = vec![vec![int(-1), int(3)], vec![int(2), int(-1)]];
        match positive_solution_exists(&a, 2) {
            PositiveSolution::Feasible(x) => assert!(verify_positive_solution(&a, &x)),
            other => panic!("{other:?}"),
        }
    }
}
