//! Static analysis for MiniLang (a small Python-subset language) organized
//! as Cech cohomology of a semantic presheaf over the program's site
//! category.
//!
//! The pipeline runs Parse -> Harvest -> Cover -> Solve -> Synthesize ->
//! Render. Local refinement sections are computed per observation site,
//! disagreements on overlaps form a 1-cochain, and the F2 rank of the
//! obstruction classes counts the minimum number of independent fixes.
//! Three front-ends build on the same machinery: bug finding, program
//! equivalence via descent, and specification checking via product covers.

pub mod frontend;
pub mod lattice;

pub use frontend::{parse_module, Module};
