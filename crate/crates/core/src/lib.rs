//! One-step drag editing on feature grids.
//!
//! A drag edit turns a set of handle → target instructions and an editable
//! mask into a per-cell displacement field ([`warpage`]), moves mask cells
//! along it in a single pass ([`relocation`]), and fills the holes that the
//! move leaves behind ([`bnni`]). The same steps run either on image pixels
//! or on the noisy latent of a small deterministic diffusion model
//! ([`diffusion`]), orchestrated by [`pipeline`].

pub mod bnni;
pub mod config;
pub mod diffusion;
pub mod drag;
pub mod grid;
pub mod io;
pub mod mask;
pub mod pipeline;
pub mod relocation;
pub mod synthetic;
pub mod validate;
pub mod warpage;

pub use config::{Backend, EditConfig, NullFill, ResampleFrom};
pub use drag::{DragInstruction, DragMode, DragSet};
pub use grid::{Cell, LatentGrid, Point};
pub use mask::{build_mask_point_set, MaskBitmap, MaskPointSet, ReferenceCircle};
pub use validate::{validate_edit_request, ValidationError, ValidationErrors};
