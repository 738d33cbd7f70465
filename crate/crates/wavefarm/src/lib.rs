pub mod climate;
pub mod error;
pub mod farm;
pub mod harness;
pub mod hydro;
pub mod objective;
pub mod opt;
pub mod simplex;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/power-model.md")]
    mod power_model {}
    #[doc = include_str!("../../../book/src/climates.md")]
    mod climates {}
    #[doc = include_str!("../../../book/src/constraints.md")]
    mod constraints {}
    #[doc = include_str!("../../../book/src/optimizers.md")]
    mod optimizers {}
    #[doc = include_str!("../../../book/src/multi-strategy.md")]
    mod multi_strategy {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
