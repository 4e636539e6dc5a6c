//! File formats for edit inputs and outputs.

mod image;
pub mod spec;

use serde::Serialize;
use thiserror::Error;

pub use self::image::{
    decode_image, decode_mask, differing_pixels, encode_mask_png, encode_png, grid_to_rgb, load_image, load_mask,
    quantize_grid, save_image, MASK_THRESHOLD,
};
pub use spec::{
    check_document, parse_drag_spec, serialize_drag_spec, DragSpecDocument, InstructionSpec, MaskSpec, RleMask,
    SpecError,
};

use crate::config::EditConfig;
use crate::pipeline::{Diagnostics, EditOutcome};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("image codec: {0}")]
    Image(#[from] ::image::ImageError),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("image has no pixels")]
    EmptyImage,
    #[error("expected 3 channels, got {0}")]
    Channels(usize),
    #[error("invalid mask: {0}")]
    Mask(String),
}

/// What gets written next to an edited image.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagnosticsRecord<'a> {
    pub width: usize,
    pub height: usize,
    pub diagnostics: &'a Diagnostics,
    pub config: &'a EditConfig,
}

pub fn diagnostics_json(outcome: &EditOutcome) -> String {
    let record = DiagnosticsRecord {
        width: outcome.output.width(),
        height: outcome.output.height(),
        diagnostics: &outcome.diagnostics,
        config: &outcome.config,
    };
    serde_json::to_string_pretty(&record).expect("diagnostics always serialize")
}
