//! Exact tools for substitute (gross-substitute) valuations on a small
//! number of discrete goods: representation, verification, generation,
//! explicit families and geometric classification.

pub mod assignment;
pub mod auction;
pub mod bundle;
pub mod checks;
pub mod error;
pub mod generator;
pub mod geometry;
pub mod io;
pub mod rank;
pub mod speckled;
pub mod valuation;
pub mod value;

pub use bundle::{Bundle, MAX_DENSE_GOODS, MAX_GOODS};
pub use error::{Error, Result};
pub use valuation::{InteractionFunction, LazyValuation, PriceVector, SetFunction, Valuation};
pub use value::Value;
