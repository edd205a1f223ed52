//! Dense tensors with reverse-mode automatic differentiation.

mod graph;
pub mod linalg;
mod ops;
#[allow(clippy::module_inception)]
mod tensor;

pub use graph::{Backward, Gradients, Graph, ParamId, Var};
pub use ops::{reverse_axis, slice_axis, softmax_rows, Mode, ReshapeSpec};
pub use tensor::{shape_string, Real, Tensor};
