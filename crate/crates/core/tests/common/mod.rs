pub mod equivalence;
pub mod gauss_legendre;
pub mod oracle;
