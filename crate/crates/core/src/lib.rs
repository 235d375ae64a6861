pub mod field;
pub mod linalg;
pub mod projective;
pub mod poly;
pub mod cubic;
pub mod chord_tangent;
pub mod reconstruction;
pub mod combinatorial;
pub mod mw;
pub mod cli;
