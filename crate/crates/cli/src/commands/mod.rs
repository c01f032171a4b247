pub mod check;
pub mod cut;
pub mod dirichlet;
pub mod evolve;
pub mod generate;
pub mod metric;
