use thiserror::Error;

use crate::cpp::CppError;
use crate::document::DocumentError;
use crate::finite_horizon::FhError;
use crate::graph::GraphError;
use crate::pebble::PebbleError;
use crate::periodic::PeriodicError;
use crate::reductions::ReductionError;

/// Any failure raised by the crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Periodic(#[from] PeriodicError),
    #[error(transparent)]
    Cpp(#[from] CppError),
    #[error(transparent)]
    Pebble(#[from] PebbleError),
    #[error(transparent)]
    FiniteHorizon(#[from] FhError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Document(#[from] DocumentError),
}
