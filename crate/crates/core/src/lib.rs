//! Simulator for the truncated thermo-visco-plastic Norton-Hoff system.
//!
//! The flow rule is regularized by its Yosida approximation and every time
//! step is solved by two nested fixed-point iterations: an inner
//! visco-elastic loop on the strain and an outer loop on the temperature.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod constitutive;
pub mod diagnostics;
pub mod error;
pub mod lifting;
pub mod linalg;
pub mod mesh;
pub mod oracle0d;
pub mod output;
pub mod scenario;
pub mod stepper;
pub mod tensor;

pub use constitutive::{MaterialParams, ThermalCoupling};
pub use error::{ConstitutiveError, LinearError, ParamError, ScenarioError, StepError};
pub use tensor::{ElasticityTensor, SymTensor3};
