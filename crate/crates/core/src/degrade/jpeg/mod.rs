//! JPEG round trip used as a degradation stage.

mod dct;
mod decoder;
mod encoder;
pub mod tables;

pub use decoder::decode;
pub use encoder::encode;

use crate::error::{Error, Result};
use crate::image::PlanarImage;

/// Largest dimension a baseline frame header can describe.
pub const MAX_DIMENSION: usize = 65_535;

/// Encodes at IJG `quality` and immediately decodes back to `[0, 1]`.
pub fn jpeg_compress(image: &PlanarImage, quality: u8) -> Result<PlanarImage> {
    if !(1..=100).contains(&quality) {
        return Err(Error::param(format!(
            "jpeg quality must be in 1..=100, got {quality}"
        )));
    }
    if image.width() > MAX_DIMENSION || image.height() > MAX_DIMENSION {
        return Err(Error::Dimension(format!(
            "{}x{} exceeds the jpeg frame limit",
            image.width(),
            image.height()
        )));
    }
    decode(&encode(image, quality))
}
