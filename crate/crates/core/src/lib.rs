pub mod cayley;
pub mod combiner;
pub mod ends;
pub mod filling;
pub mod hyperbolic;
pub mod error;
pub mod model;
pub mod presentation;
pub mod rewriting;
pub mod word;
pub mod zoo;
