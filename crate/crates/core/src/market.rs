//! Markets, matchings and the surplus differences every certifier consumes.
//!
//! Indices are 0-based throughout the library. Man `i`'s utility for woman
//! `j` is `u[i][j]`; woman `j`'s utility for man `i` is `v[i][j]`, so a
//! woman's preferences live in a *column* of `v`.

use num_traits::Zero;

use crate::error::{Agent, Error, Result};
use crate::rational::Rational;

pub type Matrix = Vec<Vec<Rational>>;

fn check_square(name: &str, m: &Matrix, n: usize) -> Result<()> {
    if m.len() != n || m.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidMarket(format!("{name} must be {n}x{n}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardinalMarket {
    u: Matrix,
    v: Matrix,
}

impl CardinalMarket {
    pub fn new(u: Matrix, v: Matrix) -> Result<Self> {
        let n = u.len();
        if n == 0 {
            return Err(Error::InvalidMarket("a market needs at least one couple".into()));
        }
        check_square("U", &u, n)?;
        check_square("V", &v, n)?;
        Ok(Self { u, v })
    }

    /// Builds a market from integer matrices; handy for tests and examples.
    pub fn from_integers(u: &[&[i64]], v: &[&[i64]]) -> Result<Self> {
        let conv = |m: &[&[i64]]| -> Matrix {
            m.iter()
                .map(|row| row.iter().map(|&x| crate::rational::int(x)).collect())
                .collect()
        };
        Self::new(conv(u), conv(v))
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn u(&self, man: usize, woman: usize) -> &Rational {
        &self.u[man][woman]
    }

    pub fn v(&self, man: usize, woman: usize) -> &Rational {
        &self.v[man][woman]
    }

    pub fn u_matrix(&self) -> &Matrix {
        &self.u
    }

    pub fn v_matrix(&self) -> &Matrix {
        &self.v
    }

    /// Joint surplus `U + V` of every pair.
    pub fn surplus(&self) -> Matrix {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| &self.u[i][j] + &self.v[i][j]).collect())
            .collect()
    }

    /// First pair of equal utilities found in a man's row or a woman's
    /// column, scanning men then women.
    pub fn first_tie(&self) -> Option<(Agent, (usize, usize))> {
        let n = self.n();
        for i in 0..n {
            for a in 0..n {
                for b in a + 1..n {
                    if self.u[i][a] == self.u[i][b] {
                        return Some((Agent::Man(i), (a, b)));
                    }
                }
            }
        }
        for j in 0..n {
            for a in 0..n {
                for b in a + 1..n {
                    if self.v[a][j] == self.v[b][j] {
                        return Some((Agent::Woman(j), (a, b)));
                    }
                }
            }
        }
        None
    }

    pub fn is_strict(&self) -> bool {
        self.first_tie().is_none()
    }

    /// Returns a copy with `U` and `V` rows/columns permuted so that
    /// `matching` becomes the identity: new woman `k` is old woman
    /// `matching(k)`.
    pub fn relabeled(&self, matching: &Matching) -> CardinalMarket {
        let n = self.n();
        let pick = |m: &Matrix| -> Matrix {
            (0..n)
                .map(|i| (0..n).map(|k| m[i][matching.partner_of_man(k)].clone()).collect())
                .collect()
        };
        CardinalMarket {
            u: pick(&self.u),
            v: pick(&self.v),
        }
    }
}

/// Strict preference lists, best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinalMarket {
    men_prefs: Vec<Vec<usize>>,
    women_prefs: Vec<Vec<usize>>,
    // man_rank[i][j]: position of woman j in man i's list (0 = best).
    man_rank: Vec<Vec<usize>>,
    woman_rank: Vec<Vec<usize>>,
}

fn is_permutation(list: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    list.len() == n && list.iter().all(|&x| x < n && !std::mem::replace(&mut seen[x], true))
}

fn ranks_of(prefs: &[Vec<usize>]) -> Vec<Vec<usize>> {
    prefs
        .iter()
        .map(|list| {
            let mut rank = vec![0; list.len()];
            for (pos, &who) in list.iter().enumerate() {
                rank[who] = pos;
            }
            rank
        })
        .collect()
}

impl OrdinalMarket {
    pub fn new(men_prefs: Vec<Vec<usize>>, women_prefs: Vec<Vec<usize>>) -> Result<Self> {
        let n = men_prefs.len();
        if n == 0 {
            return Err(Error::InvalidMarket("a market needs at least one couple".into()));
        }
        if women_prefs.len() != n {
            return Err(Error::InvalidMarket(format!(
                "{} men but {} women",
                n,
                women_prefs.len()
            )));
        }
        for (i, list) in men_prefs.iter().enumerate() {
            if !is_permutation(list, n) {
                return Err(Error::InvalidMarket(format!(
                    "preference list of man {} is not a permutation of 1..{n}",
                    i + 1
                )));
            }
        }
        for (j, list) in women_prefs.iter().enumerate() {
            if !is_permutation(list, n) {
                return Err(Error::InvalidMarket(format!(
                    "preference list of woman {} is not a permutation of 1..{n}",
                    j + 1
                )));
            }
        }
        let man_rank = ranks_of(&men_prefs);
        let woman_rank = ranks_of(&women_prefs);
        Ok(Self {
            men_prefs,
            women_prefs,
            man_rank,
            woman_rank,
        })
    }

    pub fn n(&self) -> usize {
        self.men_prefs.len()
    }

    pub fn men_prefs(&self) -> &[Vec<usize>] {
        &self.men_prefs
    }

    pub fn women_prefs(&self) -> &[Vec<usize>] {
        &self.women_prefs
    }

    /// Position of `woman` in `man`'s list, 0 for his favourite.
    pub fn man_rank(&self, man: usize, woman: usize) -> usize {
        self.man_rank[man][woman]
    }

    pub fn woman_rank(&self, woman: usize, man: usize) -> usize {
        self.woman_rank[woman][man]
    }

    pub fn man_prefers(&self, man: usize, a: usize, b: usize) -> bool {
        self.man_rank[man][a] < self.man_rank[man][b]
    }

    pub fn woman_prefers(&self, woman: usize, a: usize, b: usize) -> bool {
        self.woman_rank[woman][a] < self.woman_rank[woman][b]
    }

    /// The rank-based cardinal market `utility = n - 1 - rank`, which
    /// represents this ordinal market.
    pub fn rank_utilities(&self) -> CardinalMarket {
        let n = self.n();
        let top = n as i64 - 1;
        let u = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| crate::rational::int(top - self.man_rank[i][j] as i64))
                    .collect()
            })
            .collect();
        let v = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| crate::rational::int(top - self.woman_rank[j][i] as i64))
                    .collect()
            })
            .collect();
        CardinalMarket { u, v }
    }
}

/// A perfect matching: `partner[i]` is the woman married to man `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    partner: Vec<usize>,
}

impl Matching {
    pub fn new(partner: Vec<usize>) -> Result<Self> {
        let n = partner.len();
        if n == 0 || !is_permutation(&partner, n) {
            return Err(Error::InvalidMatching(format!(
                "{partner:?} is not a permutation of 0..{n}"
            )));
        }
        Ok(Self { partner })
    }

    /// Parses 1-based partner indices, e.g. `[2, 1, 3]`.
    pub fn from_one_based(partner: &[usize]) -> Result<Self> {
        if partner.contains(&0) {
            return Err(Error::InvalidMatching("indices are 1-based".into()));
        }
        Self::new(partner.iter().map(|&j| j - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Self {
            partner: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.partner.len()
    }

    pub fn partner_of_man(&self, man: usize) -> usize {
        self.partner[man]
    }

    pub fn partner_of_woman(&self, woman: usize) -> usize {
        self.partner.iter().position(|&j| j == woman).expect("perfect matching")
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.partner
    }

    /// Inverse permutation: `result[j]` is the man married to woman `j`.
    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.n()];
        for (i, &j) in self.partner.iter().enumerate() {
            inv[j] = i;
        }
        inv
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.partner.iter().map(|j| j + 1).collect()
    }

    pub fn to_fractional(&self) -> FractionalMatching {
        let n = self.n();
        let mut pi = vec![vec![Rational::zero(); n]; n];
        for (i, &j) in self.partner.iter().enumerate() {
            pi[i][j] = crate::rational::int(1);
        }
        FractionalMatching { pi }
    }

    /// Iterates over every matching of size `n` in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Matching> {
        let mut next = Some((0..n).collect::<Vec<_>>());
        std::iter::from_fn(move || {
            let current = next.take()?;
            let mut perm = current.clone();
            if next_permutation(&mut perm) {
                next = Some(perm);
            }
            Some(Matching { partner: current })
        })
    }
}

pub(crate) fn next_permutation(perm: &mut [usize]) -> bool {
    if perm.len() < 2 {
        return false;
    }
    let mut i = perm.len() - 1;
    while i > 0 && perm[i - 1] >= perm[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = perm.len() - 1;
    while perm[j] <= perm[i - 1] {
        j -= 1;
    }
    perm.swap(i - 1, j);
    perm[i..].reverse();
    true
}

/// A bistochastic matrix: a lottery over matchings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalMatching {
    pi: Matrix,
}

impl FractionalMatching {
    pub fn new(pi: Matrix) -> Result<Self> {
        let n = pi.len();
        let one = crate::rational::int(1);
        if n == 0 || pi.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidMatching(
                "lottery must be a non-empty square matrix".into(),
            ));
        }
        if pi.iter().flatten().any(|x| x < &Rational::zero()) {
            return Err(Error::InvalidMatching("lottery has a negative entry".into()));
        }
        for k in 0..n {
            let row: Rational = pi[k].iter().sum();
            let col: Rational = pi.iter().map(|r| &r[k]).sum();
            if row != one || col != one {
                return Err(Error::InvalidMatching(format!(
                    "row or column {} of the lottery does not sum to 1",
                    k + 1
                )));
            }
        }
        Ok(Self { pi })
    }

    /// Equal-weight mixture of the given matchings.
    pub fn uniform_over(matchings: &[Matching]) -> Result<Self> {
        let first = matchings
            .first()
            .ok_or_else(|| Error::InvalidMatching("empty lottery".into()))?;
        let n = first.n();
        let weight = crate::rational::frac(1, matchings.len() as i64);
        let mut pi = vec![vec![Rational::zero(); n]; n];
        for m in matchings {
            for i in 0..n {
                pi[i][m.partner_of_man(i)] += &weight;
            }
        }
        Self::new(pi)
    }

    pub fn n(&self) -> usize {
        self.pi.len()
    }

    pub fn get(&self, man: usize, woman: usize) -> &Rational {
        &self.pi[man][woman]
    }

    pub fn matrix(&self) -> &Matrix {
        &self.pi
    }

    /// Convex combination `t * self + (1 - t) * other`.
    pub fn mix(&self, other: &FractionalMatching, t: &Rational) -> FractionalMatching {
        let s = crate::rational::int(1) - t;
        let pi = self
            .pi
            .iter()
            .zip(&other.pi)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| t * x + &s * y).collect())
            .collect();
        FractionalMatching { pi }
    }
}

/// How much each agent prefers their current partner to an alternative,
/// relative to a fixed matching.
///
/// Stored in original labels: `r[i][j] = U(i, σ(i)) - U(i, j)` and
/// `s[i][j] = V(σ⁻¹(j), j) - V(i, j)`. The `rel_*` accessors present the
/// same numbers after relabeling women so that σ is the identity, where
/// column `k` stands for the woman married to man `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurplusDeltas {
    r: Matrix,
    s: Matrix,
    matching: Matching,
}

impl SurplusDeltas {
    pub fn n(&self) -> usize {
        self.r.len()
    }

    pub fn matching(&self) -> &Matching {
        &self.matching
    }

    pub fn r(&self, man: usize, woman: usize) -> &Rational {
        &self.r[man][woman]
    }

    pub fn s(&self, man: usize, woman: usize) -> &Rational {
        &self.s[man][woman]
    }

    pub fn r_matrix(&self) -> &Matrix {
        &self.r
    }

    pub fn s_matrix(&self) -> &Matrix {
        &self.s
    }

    /// `R` in identity coordinates: man `i` against the wife of man `k`.
    pub fn rel_r(&self, i: usize, k: usize) -> &Rational {
        &self.r[i][self.matching.partner_of_man(k)]
    }

    pub fn rel_s(&self, i: usize, k: usize) -> &Rational {
        &self.s[i][self.matching.partner_of_man(k)]
    }
}

/// Reads the ordinal market a strict cardinal market represents.
pub fn ordinal_of(market: &CardinalMarket) -> Result<OrdinalMarket> {
    if let Some((agent, pair)) = market.first_tie() {
        return Err(Error::TiesPresent { agent, pair });
    }
    Ok(tie_broken_ordinal(market))
}

/// Ordinal reading in which ties are broken in favour of the lower index.
/// Agrees with [`ordinal_of`] on strict markets.
pub fn tie_broken_ordinal(market: &CardinalMarket) -> OrdinalMarket {
    let n = market.n();
    let men = (0..n)
        .map(|i| {
            let mut list: Vec<usize> = (0..n).collect();
            // Stable sort keeps lower indices first among equals.
            list.sort_by(|&a, &b| market.u(i, b).cmp(market.u(i, a)));
            list
        })
        .collect();
    let women = (0..n)
        .map(|j| {
            let mut list: Vec<usize> = (0..n).collect();
            list.sort_by(|&a, &b| market.v(b, j).cmp(market.v(a, j)));
            list
        })
        .collect();
    OrdinalMarket::new(men, women).expect("sorted index lists are permutations")
}

/// Returns a strict copy of `market`: within each tie group of a man's row
/// (or woman's column), the k-th member by index loses `k * epsilon`.
/// `epsilon` must be smaller than the gap between distinct values in every
/// row and column so the strict order of the rest is preserved; this is
/// checked and `InvalidConfig` returned otherwise.
pub fn break_ties(market: &CardinalMarket, epsilon: &Rational) -> Result<CardinalMarket> {
    let n = market.n();
    let mut u = market.u_matrix().clone();
    let mut v = market.v_matrix().clone();
    for i in 0..n {
        for b in 0..n {
            let earlier = (0..b).filter(|&a| market.u(i, a) == market.u(i, b)).count();
            u[i][b] -= epsilon * crate::rational::int(earlier as i64);
        }
    }
    for j in 0..n {
        for b in 0..n {
            let earlier = (0..b).filter(|&a| market.v(a, j) == market.v(b, j)).count();
            v[b][j] -= epsilon * crate::rational::int(earlier as i64);
        }
    }
    let out = CardinalMarket::new(u, v)?;
    let expected = tie_broken_ordinal(market);
    match ordinal_of(&out) {
        Ok(ord) if ord == expected => Ok(out),
        _ => Err(Error::InvalidConfig(format!(
            "perturbation {epsilon} is too large to break ties without reordering"
        ))),
    }
}

/// Whether `cardinal` induces exactly the rankings of `ordinal`.
pub fn represents(cardinal: &CardinalMarket, ordinal: &OrdinalMarket) -> bool {
    let n = cardinal.n();
    if ordinal.n() != n {
        return false;
    }
    for i in 0..n {
        for a in 0..n {
            for b in 0..n {
                if (cardinal.u(i, a) > cardinal.u(i, b)) != ordinal.man_prefers(i, a, b) {
                    return false;
                }
                // a, b are men here; i plays the woman.
                if (cardinal.v(a, i) > cardinal.v(b, i)) != ordinal.woman_prefers(i, a, b) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn surplus_deltas(market: &CardinalMarket, matching: &Matching) -> Result<SurplusDeltas> {
    let n = market.n();
    if matching.n() != n {
        return Err(Error::InvalidMatching(format!(
            "matching has {} couples but the market has {n}",
            matching.n()
        )));
    }
    let husband = matching.inverse();
    let r = (0..n)
        .map(|i| {
            let own = market.u(i, matching.partner_of_man(i));
            (0..n).map(|j| own - market.u(i, j)).collect()
        })
        .collect();
    let s = (0..n)
        .map(|i| (0..n).map(|j| market.v(husband[j], j) - market.v(i, j)).collect())
        .collect();
    Ok(SurplusDeltas {
        r,
        s,
        matching: matching.clone(),
    })
}

/// Expected utilities under a lottery: `(men, women)`.
pub fn lottery_payoffs(market: &CardinalMarket, pi: &FractionalMatching) -> (Vec<Rational>, Vec<Rational>) {
    let n = market.n();
    let men = (0..n)
        .map(|i| (0..n).map(|j| pi.get(i, j) * market.u(i, j)).sum())
        .collect();
    let women = (0..n)
        .map(|j| (0..n).map(|i| pi.get(i, j) * market.v(i, j)).sum())
        .collect();
    (men, women)
}

/// Utilities of every agent under a deterministic matching: `(men, women)`.
pub fn matched_payoffs(market: &CardinalMarket, matching: &Matching) -> (Vec<Rational>, Vec<Rational>) {
    let n = market.n();
    let husband = matching.inverse();
    let men = (0..n)
        .map(|i| market.u(i, matching.partner_of_man(i)).clone())
        .collect();
    let women = (0..n).map(|j| market.v(husband[j], j).clone()).collect();
    (men, women)
}
