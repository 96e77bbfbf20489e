//! Approximation characteristics of coefficient-sequence spaces with
//! weighted multiplier systems: exact widths and best-approximation
//! quantities, smoothness moduli, direct and inverse estimates, and
//! classical linear summation methods expressed as multiplier transforms.

pub mod classes;
pub mod element;
pub mod extremal;
pub mod identities;
pub mod jackson;
pub mod error;
pub mod index;
pub mod kahan;
pub mod linmethods;
pub mod oracle;
pub mod psi;
pub mod quad;
pub mod rules;
pub mod special;
pub mod tails;
pub mod zeta;

pub use element::{Domain, SpElement};
pub use error::{Error, Result};
pub use index::{Index, IndexSet, NormExponent};
pub use psi::{char_sequences, rearrangement, CharSequences, Group, PsiSystem, SystemKind, SystemSpec};
pub use rules::DecayRule;
