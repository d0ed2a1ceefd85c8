//! Lorentz and Hardy–Lorentz quasinorms of step signals, atomic
//! decompositions, real interpolation and a model singular integral.

pub mod atom;
pub mod cz;
pub mod decomposition;
pub mod dyadic;
pub mod error;
pub mod interpolation;
pub mod lorentz;
pub mod maximal;
pub mod moments;
pub mod report;
pub mod sequence;
pub mod signal;

pub use atom::{make_atom, Atom, AtomCheck, Interval};
pub use cz::{apply_cz, HilbertKernel, Kernel};
pub use decomposition::{decompose, reconstruct, AtomicDecomposition, Grid, Level, Term, WhitneyCover};
pub use error::{Error, Result};
pub use lorentz::{
    distribution_function, lorentz_quasinorm, lorentz_quasinorm_levels, rearrangement, Exponent, LorentzIndex,
    StepCurve,
};
pub use maximal::{hardy_lorentz_quasinorm, MaximalConfig, MaximalKind, Mollifier};
pub use report::Report;
pub use sequence::{mixed_norm, Coefficient, CoefficientFamily};
pub use signal::Signal;
