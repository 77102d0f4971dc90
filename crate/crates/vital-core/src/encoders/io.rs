//! Raster image loading and encoding.

use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat, ImageReader};

use crate::encoders::Image;
use crate::error::{CoreError, Result};

/// Load an 8-bit raster file (PNG, PGM/PPM, ...). Grayscale sources map
/// to a 1-channel image, everything else to 3-channel RGB; values are
/// scaled by 1/255.
pub fn load_image(path: &Path) -> Result<Image> {
    let reader = ImageReader::open(path)
        .map_err(|e| CoreError::Input(format!("cannot open image {}: {e}", path.display())))?;
    let decoded = reader
        .decode()
        .map_err(|e| CoreError::Input(format!("cannot decode image {}: {e}", path.display())))?;
    dynamic_to_image(decoded)
}

fn dynamic_to_image(decoded: DynamicImage) -> Result<Image> {
    match decoded {
        DynamicImage::ImageLuma8(g) => {
            let (w, h) = (g.width() as usize, g.height() as usize);
            let pixels = g.into_raw().iter().map(|&b| f64::from(b) / 255.0).collect();
            Image::new(w, h, 1, pixels)
        }
        other => {
            let rgb = other.to_rgb8();
            let (w, h) = (rgb.width() as usize, rgb.height() as usize);
            let pixels = rgb.into_raw().iter().map(|&b| f64::from(b) / 255.0).collect();
            Image::new(w, h, 3, pixels)
        }
    }
}

/// Encode an [`Image`] as PNG bytes (used for remote attachments).
pub fn image_to_png_bytes(img: &Image) -> Result<Vec<u8>> {
    let bytes: Vec<u8> = img
        .pixels()
        .iter()
        .map(|&v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    let dynamic = match img.channels() {
        1 => image::GrayImage::from_raw(img.width() as u32, img.height() as u32, bytes)
            .map(DynamicImage::ImageLuma8),
        3 => image::RgbImage::from_raw(img.width() as u32, img.height() as u32, bytes)
            .map(DynamicImage::ImageRgb8),
        _ => None,
    }
    .ok_or_else(|| CoreError::Shape("pixel buffer does not match image dims".into()))?;
    let mut out = Cursor::new(Vec::new());
    dynamic
        .write_to(&mut out, ImageFormat::Png)
        .map_err(|e| CoreError::Input(format!("png encode failed: {e}")))?;
    Ok(out.into_inner())
}
