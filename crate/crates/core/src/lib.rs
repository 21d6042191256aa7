pub mod conetensor;
pub mod error;
pub mod opsys;
pub mod polycone;
pub mod random;
pub mod ratlin;
pub mod selfdual;
pub mod tpfactory;

pub use conetensor::TensorKind;
pub use error::{Error, Result};
pub use opsys::{HermElement, OperatorSystem, SystemElement, Tag, Verdict, Witness};
pub use polycone::PolyCone;
pub use ratlin::{IntVec, Rational, RationalMatrix};
pub use tpfactory::{ConstructedProduct, FamilyEntry, Stem, TensorFamily};
