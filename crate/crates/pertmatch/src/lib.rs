//! Perturbed greedy and water-filling algorithms for online bipartite
//! allocation, with the adversarial instance families that pin down their
//! limits, exact small-scale oracles, and numerical verification of the
//! inequalities a perturbation function must satisfy to be worst-case
//! optimal.
//!
//! Start with [`perturb::PerturbationFunction`] and [`instance::Instance`],
//! run algorithms from [`algorithms`], generate families from [`generators`],
//! measure ratios with [`oracle`], and scan inequalities with [`bounds`].

pub mod algorithms;
pub mod allocation;
pub mod bounds;
pub mod error;
pub mod generators;
pub mod instance;
pub mod oracle;
pub mod perturb;

pub use error::{Error, Result};
