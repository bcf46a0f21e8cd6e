//! Single-redundancy-bit encoders and decoders for multidimensional
//! parametric constraints on binary arrays.
//!
//! An `n^d` array carries `n^d - 1` message bits. The encoder repeatedly
//! removes the first violation of the constraint and records where it was,
//! marking each step in the last cell; the decoder replays the steps
//! backwards. See [`codec`] for the loop and [`constraints`] for the four
//! supported constraints.

pub mod array;
pub mod bound;
pub mod codec;
pub mod constraints;
pub mod container;
pub mod error;
pub mod oracle;

pub use array::{BitArray, CompactedArray, PartialArray, Position, Region, Shape};
pub use codec::{
    check_feasibility, decode, decode_with, encode, encode_with, AlmostArray, Constraint, ConstraintCodec,
    ConstraintConfig, ConstraintKind, DecodeOptions, Decoded, EncodeOptions, Encoded, PayloadLayout,
};
pub use constraints::{find_violation, minimal_shape_set, Codec, MinimalShapeSet, Violation};
pub use error::{Error, Result};
