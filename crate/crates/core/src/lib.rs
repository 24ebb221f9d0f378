//! Finite left braces of prime-power order, their ideal filtrations, the
//! quotient pre-Lie rings they induce, and the group-of-flows passage back.

pub mod brace;
pub mod check;
pub mod error;
pub mod filtration;
pub mod flows;
pub mod group;
pub mod lattice;
pub mod padic;
pub mod prelie;
pub mod workbench;

pub use brace::{Brace, Ideal, QuotientBrace};
pub use check::{CheckMode, ClauseReport, ModeMeta, Report, Verdict, Witness};
pub use error::{Error, Result};
pub use group::{AdditiveMap, GroupElement, PrimePowerGroup};
pub use lattice::{QuotientMap, Subgroup, SubgroupTag};
pub use padic::EngelUnit;
