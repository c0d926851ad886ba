//! Complete exponential sums twisted by Dirichlet characters, central values
//! L(1/2, χ) and moment audits for squarefree moduli.
//!
//! * [`arith`]: squarefree moduli, smooth-number families, factorization plans.
//! * [`characters`]: characters as exponent vectors over primitive roots.
//! * [`expsums`]: K_χ, K° and their Fourier and correlation tables.
//! * [`incomplete`]: incomplete sums of K° and their bound shapes.
//! * [`lfunc`]: Hurwitz zeta and central values by two methods.
//! * [`moments`]: moment scans, large-value counts and exponent fits.
//! * [`cli`]: the `kmoments` command line.

pub mod arith;
pub mod characters;
pub mod cli;
pub mod error;
pub mod expsums;
pub mod incomplete;
pub mod lfunc;
pub mod moments;

pub use arith::{choose_factorization, enumerate_smooth_squarefree, factor_squarefree, FactorMode, Factorization, Modulus};
pub use characters::{character_group, primitive_characters, CharacterPair, DirichletCharacter};
pub use error::{Error, Result};
pub use expsums::{ExpSumTable, TableKind};
pub use incomplete::{incomplete_sum, vdc_audit, IncompleteSumReport, SumMethod, VdcAudit};
pub use lfunc::{central_values, l_half, CentralValue, LMethod, LTable};
pub use moments::{audit_bound, exponent_fit, large_value_set, moment_scan, AuditParams, BoundAudit, BoundKind, LargeValueSet, MomentReport};
