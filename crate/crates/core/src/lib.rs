//! Operator algebras of directed graphs, their free probability, and exact
//! checks of the Catalan moment law for the generating operator.

pub mod algebra;
pub mod fock;
pub mod freeprob;
pub mod graph;
pub mod nc;
pub mod scalar;

pub use algebra::{AlgebraError, DiagonalElement, Element, Flavor, Monomial, Support};
pub use fock::{FockError, FockRep};
pub use freeprob::{FreeProbError, PowerSeries, Scale, SemicircularSystem, State};
pub use graph::{Diagram, EdgeIx, EdgeSpec, Graph, GraphError, PathWord, VertexIx};
pub use nc::{NcError, NcPartition};
pub use scalar::Rational;
