//! Spin quasiprobability distributions (W, P, Q, F) for spin-j and
//! multi-qubit states under open-system noise, plus the nonclassical
//! volume measure.

pub mod angular;
pub mod channels;
pub mod cli;
pub mod dicke;
pub mod fixtures;
pub mod measures;
pub mod multipole;
pub mod qd_eval;
pub mod quadrature;
