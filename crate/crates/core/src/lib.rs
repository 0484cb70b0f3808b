#![doc = include_str!("../README.md")]

pub mod bits;
pub mod circuit;
pub mod classes;
pub mod dense;
pub mod error;
pub mod gadgets;
pub mod pauli;
pub mod pbc;
pub mod pipeline;
pub mod random;
pub mod synth;
pub mod tableau;

#[cfg(test)]
mod testutil;

/// Guide chapters, compiled as doc-tests so the snippets stay current.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/paulis.md")]
    mod paulis {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/gadgets.md")]
    mod gadgets {}
    #[doc = include_str!("../../../book/src/pbc.md")]
    mod pbc {}
    #[doc = include_str!("../../../book/src/cm-circuits.md")]
    mod cm_circuits {}
    #[doc = include_str!("../../../book/src/dense.md")]
    mod dense {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

pub use error::{Error, Result};
pub use pauli::{MeasurementKind, Pauli, PauliOperator, Phase, RecordedMeasurement, Sign};
pub use circuit::{Circuit, GateKind, InputKind, OutputSpec, ParityControl, Step};
pub use tableau::{BasicGate, Direction, StabilizerTableau};
