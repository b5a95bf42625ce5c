use serde::{Deserialize, Serialize};

use crate::error::BioVarError;

/// Pixel coordinates; y grows downward as in image files.
pub type Point = (f64, f64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FacialLandmarks {
    pub left_zygion: Point,
    pub right_zygion: Point,
    pub upper_lip_midpoint: Point,
    pub brow_midpoint: Point,
}

fn distance(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

impl FacialLandmarks {
    /// Checks the orientation of an upright face image: distinct zygion
    /// x-coordinates and the brow above (smaller y than) the upper lip.
    pub fn validate(&self) -> Result<(), BioVarError> {
        let coords = [self.left_zygion, self.right_zygion, self.upper_lip_midpoint, self.brow_midpoint];
        if coords.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(BioVarError::DegenerateGeometry("non-finite coordinate".into()));
        }
        if self.left_zygion.0 == self.right_zygion.0 {
            return Err(BioVarError::DegenerateGeometry("zygion x-coordinates coincide".into()));
        }
        if self.brow_midpoint.1 >= self.upper_lip_midpoint.1 {
            return Err(BioVarError::DegenerateGeometry("brow is not above the upper lip".into()));
        }
        Ok(())
    }
}

/// Facial width-to-height ratio: bizygomatic width over the distance from
/// brow midpoint to upper-lip midpoint. Depends only on distances, so it is
/// unchanged by rotation, translation and uniform scaling.
pub fn fwhr(landmarks: &FacialLandmarks) -> Result<f64, BioVarError> {
    let width = distance(landmarks.left_zygion, landmarks.right_zygion);
    let height = distance(landmarks.brow_midpoint, landmarks.upper_lip_midpoint);
    if !(height > 0.0) || !height.is_finite() {
        return Err(BioVarError::DegenerateGeometry("zero upper-face height".into()));
    }
    if !(width > 0.0) || !width.is_finite() {
        return Err(BioVarError::DegenerateGeometry("zero bizygomatic width".into()));
    }
    Ok(width / height)
}
