//! Classification of the diagonal action of PSL(2,q) x PSL(2,q) on PSL(2,q)
//! in the synchronisation hierarchy, with checkable certificates.

pub mod bitset;
pub mod certify;
pub mod error;
pub mod feasibility;
pub mod field;
pub mod graphs;
pub mod group;
pub mod linalg;
pub mod pipeline;
pub mod scheme;
pub mod search;
pub mod witnesses;

pub use error::{Error, Result};
