use std::io::Cursor;
use std::path::Path;

use image::codecs::jpeg::JpegEncoder;
use image::ImageReader;

/// Longest edge of served thumbnails.
pub const THUMBNAIL_MAX: u32 = 256;

/// JPEG re-encode of the image at `path`, downscaled so that neither side
/// exceeds [`THUMBNAIL_MAX`].
pub fn thumbnail_jpeg(path: &Path) -> Result<Vec<u8>, image::ImageError> {
    let img = ImageReader::open(path)?.with_guessed_format()?.decode()?;
    let img = if img.width() > THUMBNAIL_MAX || img.height() > THUMBNAIL_MAX {
        img.thumbnail(THUMBNAIL_MAX, THUMBNAIL_MAX)
    } else {
        img
    };
    let mut out = Vec::new();
    img.to_rgb8().write_with_encoder(JpegEncoder::new_with_quality(Cursor::new(&mut out), 85))?;
    Ok(out)
}
