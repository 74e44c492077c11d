//! Magnetic polarizability tensors for small objects at the onset of the
//! quasi-static and full Maxwell regimes.

pub mod assembly;
pub mod domain;
pub mod error;
pub mod field;
pub mod fem;
pub mod greens;
pub mod mesh;
pub mod oracle;
pub mod tensor;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/contrasts.md")]
    mod contrasts {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/transmission.md")]
    mod transmission {}
    #[doc = include_str!("../../../book/src/tensors.md")]
    mod tensors {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
