//! Exact certification of stability and efficiency concepts for one-to-one
//! cardinal marriage markets.
//!
//! Given utilities `U` (men) and `V` (women) and a matching, the
//! [`certify`] module decides no-trade stability, NTU and TU stability, and
//! ex-ante / ex-post Pareto efficiency, attaching to every verdict a
//! certificate that [`verify`] re-checks by substitution. Everything is
//! computed over [`rational::Rational`]; no floating point enters a verdict.
//!
//! ```
//! use matchcert::certify::certify_all;
//! use matchcert::examples::tu_not_ntu;
//! use matchcert::market::Matching;
//!
//! let report = certify_all(&tu_not_ntu(), &Matching::identity(2)).unwrap();
//! assert_eq!(report.pattern.code(), "FFTTT");
//! ```

// Matrix code reads better with explicit indices.
#![allow(clippy::needless_range_loop)]

pub mod audit;
pub mod birkhoff;
pub mod certify;
pub mod error;
pub mod examples;
pub mod feasibility;
pub mod io;
pub mod market;
pub mod poa;
pub mod random;
pub mod rational;
pub mod report;
pub mod represent;
pub mod stable;
pub mod verify;

pub use error::{Agent, Error, Result};
pub use market::{CardinalMarket, FractionalMatching, Matching, OrdinalMarket};
pub use rational::Rational;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/markets.md")]
    mod markets {}
    #[doc = include_str!("../../../book/src/concepts.md")]
    mod concepts {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/stable.md")]
    mod stable {}
    #[doc = include_str!("../../../book/src/representations.md")]
    mod representations {}
    #[doc = include_str!("../../../book/src/price-of-no-transfers.md")]
    mod price_of_no_transfers {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
