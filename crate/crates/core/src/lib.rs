pub mod compress;
pub mod frontend;
pub mod lp;
pub mod scalar;
pub mod solver;
pub mod xadd;

pub use scalar::Scalar;

pub type Store = xadd::DiagramStore<f64>;
pub type Store32 = xadd::DiagramStore<f32>;
pub type HmdpSolver = solver::Solver<f64>;
pub type HmdpSolver32 = solver::Solver<f32>;
