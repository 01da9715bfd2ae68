//! Data-driven reachability and one-step control for unknown control-affine systems
//! `x' = f(x) + G(x) u`.

pub mod control;
pub mod interval;
pub mod io;
pub mod knowledge;
pub mod linalg;
pub mod qpsolve;
pub mod reach;
pub mod scalar;
pub mod selfcheck;
pub mod systems;

pub use control::{
    assemble_idealistic, assemble_optimistic, datacontrol_step, idealistic_coeffs, linearize, subopt_bound,
    AffineOverApprox, ControlConfig, ControlDiagnostics, ControlError, ControlMode, IdealisticQP, OptimisticQP,
    QuadraticCost,
};
pub use interval::{IMatrix, ITensor3, IVector, Interval, IntervalError};
pub use knowledge::{
    build_knowledge, contract_fg, Decoupling, GradientBounds, KnowledgeBase, KnowledgeConfig, KnowledgeError,
    LinearKnown, LipschitzBounds, PartialDynamics, Sample, SideInfoSet, VectorFieldBounds,
};
pub use linalg::Mat;
pub use qpsolve::{adares, admm_qp, solve_idealistic, solve_optimistic, AdaResConfig, AdmmConfig, BoxQP, QpError};
pub use reach::{
    beta_of, datareach, datareach_step, max_step_size, rough_enclosure, ConstantControl, ControlClass,
    CosineComponent, CosineFamily, EnclosureMode, PiecewiseConstant, ReachConfig, ReachError, ReachTube,
};
pub use scalar::Scalar;
pub use systems::{
    aircraft, excite, quadrotor, rk4_step, run_closed_loop, simulate, unicycle, ExperimentConfig, RunReport, SystemSpec,
};

pub type Interval64 = Interval<f64>;
pub type IVector64 = IVector<f64>;
pub type IMatrix64 = IMatrix<f64>;
pub type Mat64 = Mat<f64>;
pub type KnowledgeBase64 = KnowledgeBase<f64>;
pub type LipschitzBounds64 = LipschitzBounds<f64>;
pub type ReachTube64 = ReachTube<f64>;
pub type QuadraticCost64 = QuadraticCost<f64>;

pub type Interval32 = Interval<f32>;
pub type IVector32 = IVector<f32>;
pub type IMatrix32 = IMatrix<f32>;
pub type Mat32 = Mat<f32>;
pub type KnowledgeBase32 = KnowledgeBase<f32>;
pub type LipschitzBounds32 = LipschitzBounds<f32>;
pub type ReachTube32 = ReachTube<f32>;
pub type QuadraticCost32 = QuadraticCost<f32>;
