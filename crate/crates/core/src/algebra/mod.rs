//! Exact graded commutative algebra over the rationals.

pub mod complex;
pub mod gb;
pub mod linalg;
pub mod map;
pub mod mixed;
pub mod module;
pub mod poly;
pub mod ring;

pub use map::{hom_degree, hom_window, pullback, submodule, IsoReport, ModMap};
pub use module::{DegreeWindow, Elem, Module, Slice};
pub use poly::{q, qfrac, Mono, Poly, Q};
pub use ring::{Ring, RingMap, Universe};
