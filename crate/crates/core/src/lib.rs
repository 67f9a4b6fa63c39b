//! Bound and perturbed copulas, their dependence measures, a copula-property
//! validator, and the mean-latency analysis of an M/G/1 queue whose tasks are
//! replicated on two servers with cancel-on-finish.
//!
//! ```
//! use boundcop::{CopulaSpec, UnitPoint};
//!
//! let c: CopulaSpec = "bound(theta=0.5)".parse().unwrap();
//! let p = UnitPoint::new(0.3, 0.7).unwrap();
//! assert!((boundcop::eval_copula(&c, p) - 0.241875).abs() < 1e-12);
//! ```

pub mod copula;
pub mod error;
pub mod measures;
pub mod quadrature;
pub mod queueing;
pub mod sampling;
pub mod simulator;
mod spec_text;
pub mod validate;

pub use copula::{
    c_volume, diagonal_sections, eval_copula, eval_frechet_lower, eval_frechet_upper, eval_survival, frechet_diff,
    CopulaSpec, DependenceParam, PerturbParam, Rectangle, UnitPoint,
};
pub use error::{Error, Result};
pub use measures::{
    measures_bound_closed, measures_closed, measures_numeric, measures_perturbed_closed, tail_bound_closed,
    tail_closed, tail_numeric, tail_perturbed_closed, tau_cross_integral, MeasureReport, Method, TailCoefficients,
    Unconverged,
};
pub use queueing::{
    mean_total_service, min_law, pk_waiting, round_half_up, sweep_theta, MinServiceLaw, ServiceModel, SweepRow,
    SystemSpec, Variant,
};
pub use sampling::{sample_min_service, MinServiceSampler};
pub use simulator::{run_des, run_des_detailed, ReplicationResult, SimConfig, SimMode, SimulationResult};
pub use validate::{check_boundaries, check_volumes, validate, ValidationOptions, ValidationReport, Verdict};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/bound-copula.md")]
    mod bound_copula {}
    #[doc = include_str!("../../../book/src/perturbed-copula.md")]
    mod perturbed_copula {}
    #[doc = include_str!("../../../book/src/dependence-measures.md")]
    mod dependence_measures {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
    #[doc = include_str!("../../../book/src/replicated-queue.md")]
    mod replicated_queue {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
