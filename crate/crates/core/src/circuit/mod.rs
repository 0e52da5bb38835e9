//! Gate and circuit intermediate representation.

pub mod counts;
pub mod gate;
pub mod ir;
pub mod kernel;
pub mod layout;
pub mod text;

pub use counts::GateCounts;
pub use gate::{unitarity_error, Condition, Control, DenseGate, Gate, GateKind, Polarity};
pub use ir::{Circuit, UNITARY_QUBIT_CAP};
pub use layout::{Layout, QubitRef, Register};
pub use text::{from_text, to_text};
