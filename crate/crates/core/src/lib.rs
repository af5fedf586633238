pub mod balance;
pub mod error;
pub mod field;
pub mod lamb;
pub mod numerics;
pub mod sedsim;
pub mod spectra;
pub mod transitions;
pub mod units;
