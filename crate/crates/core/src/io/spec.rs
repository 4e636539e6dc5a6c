//! JSON drag specification documents.
//!
//! ```json
//! {
//!   "image": "scene.png",
//!   "mask": { "path": "mask.png" },
//!   "instructions": [{ "handle": [40, 32], "target": [52, 30] }],
//!   "mode": "stretch",
//!   "config": { "nullFill": "bnni" }
//! }
//! ```
//!
//! The mask may instead be inline run lengths:
//! `{ "rle": { "width": 4, "height": 2, "counts": [1, 2, 5] } }`. Runs
//! alternate unmasked, masked, unmasked, ... starting with unmasked, over
//! cells in row-major order.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{load_image, load_mask, IoError};
use crate::config::EditConfig;
use crate::drag::{DragInstruction, DragMode, DragSet};
use crate::grid::{LatentGrid, Point};
use crate::mask::MaskBitmap;
use crate::validate::{validate_config, ValidationError, ValidationErrors, Violation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstructionSpec {
    pub handle: [f64; 2],
    pub target: [f64; 2],
}

impl From<&InstructionSpec> for DragInstruction {
    fn from(i: &InstructionSpec) -> Self {
        DragInstruction::new(
            Point::new(i.handle[0], i.handle[1]),
            Point::new(i.target[0], i.target[1]),
        )
    }
}

impl From<&DragInstruction> for InstructionSpec {
    fn from(d: &DragInstruction) -> Self {
        Self {
            handle: [d.handle.x, d.handle.y],
            target: [d.target.x, d.target.y],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RleMask {
    pub width: usize,
    pub height: usize,
    pub counts: Vec<usize>,
}

impl RleMask {
    pub fn encode(mask: &MaskBitmap) -> Self {
        let mut counts = Vec::new();
        let mut current = false;
        let mut run = 0;
        for &b in mask.bits() {
            if b != current {
                counts.push(run);
                current = b;
                run = 0;
            }
            run += 1;
        }
        counts.push(run);
        Self {
            width: mask.width(),
            height: mask.height(),
            counts,
        }
    }

    pub fn decode(&self) -> Result<MaskBitmap, String> {
        let total: usize = self.counts.iter().sum();
        if total != self.width * self.height {
            return Err(format!(
                "run lengths sum to {total}, expected {}",
                self.width * self.height
            ));
        }
        let mut bits = Vec::with_capacity(total);
        for (i, &n) in self.counts.iter().enumerate() {
            bits.extend(std::iter::repeat_n(i % 2 == 1, n));
        }
        MaskBitmap::new(self.width, self.height, bits).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum MaskSpec {
    Path(PathBuf),
    Rle(RleMask),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DragSpecDocument {
    pub image: PathBuf,
    pub mask: MaskSpec,
    pub instructions: Vec<InstructionSpec>,
    #[serde(default)]
    pub mode: DragMode,
    #[serde(default)]
    pub config: EditConfig,
}

/// Why a spec document was rejected.
#[derive(Debug, Clone, PartialEq)]
pub enum SpecError {
    /// Malformed JSON or a field of the wrong shape.
    Syntax { path: String, message: String },
    /// Well-formed but semantically invalid.
    Invalid(ValidationErrors),
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecError::Syntax { path, message } if path.is_empty() || path == "." => f.write_str(message),
            SpecError::Syntax { path, message } => write!(f, "{path}: {message}"),
            SpecError::Invalid(errs) => write!(f, "{errs}"),
        }
    }
}

impl std::error::Error for SpecError {}

impl SpecError {
    /// Field-located errors, one per violation.
    pub fn errors(&self) -> Vec<ValidationError> {
        match self {
            SpecError::Syntax { path, message } => {
                vec![ValidationError::new(path.clone(), Violation::Malformed(message.clone()))]
            }
            SpecError::Invalid(errs) => errs.0.clone(),
        }
    }
}

/// Checks that need no image, such as coordinate signs and config ranges.
pub fn check_document(doc: &DragSpecDocument) -> Result<(), ValidationErrors> {
    let mut errors = Vec::new();
    if doc.instructions.is_empty() {
        errors.push(ValidationError::new("instructions", Violation::NoInstructions));
    }
    if doc.mode.is_object_mode() && doc.instructions.len() > 1 {
        errors.push(ValidationError::new(
            "instructions",
            Violation::ObjectModeRequiresOne(doc.instructions.len()),
        ));
    }
    for (i, ins) in doc.instructions.iter().enumerate() {
        for (name, p, violation) in [
            ("handle", ins.handle, Violation::HandleOutOfBounds),
            ("target", ins.target, Violation::TargetOutOfBounds),
        ] {
            if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
                errors.push(ValidationError::new(format!("instructions[{i}].{name}"), violation));
            }
        }
    }
    if let MaskSpec::Rle(rle) = &doc.mask {
        match rle.decode() {
            Ok(m) if m.is_empty() => errors.push(ValidationError::new("mask", Violation::EmptyMask)),
            Ok(_) => {}
            Err(message) => errors.push(ValidationError::new("mask.rle.counts", Violation::Malformed(message))),
        }
    }
    errors.extend(validate_config(&doc.config));
    if errors.is_empty() {
        Ok(())
    } else {
        Err(ValidationErrors(errors))
    }
}

pub fn parse_drag_spec(text: &str) -> Result<DragSpecDocument, SpecError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: DragSpecDocument = serde_path_to_error::deserialize(de).map_err(|e| SpecError::Syntax {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    check_document(&doc).map_err(SpecError::Invalid)?;
    Ok(doc)
}

pub fn serialize_drag_spec(doc: &DragSpecDocument) -> String {
    serde_json::to_string_pretty(doc).expect("spec documents always serialize")
}

impl DragSpecDocument {
    pub fn drag_set(&self) -> DragSet {
        DragSet::new(self.instructions.iter().map(Into::into).collect(), self.mode)
    }

    /// Loads the image and mask; relative paths resolve against `base`.
    pub fn load(&self, base: &Path) -> Result<(LatentGrid, MaskBitmap), IoError> {
        let image = load_image(&base.join(&self.image))?;
        let mask = match &self.mask {
            MaskSpec::Path(p) => load_mask(&base.join(p))?,
            MaskSpec::Rle(rle) => rle.decode().map_err(IoError::Mask)?,
        };
        Ok((image, mask))
    }
}
