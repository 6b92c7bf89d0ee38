//! Contact sheets pairing each pedestrian with its composite, side by side.

use std::path::{Path, PathBuf};

use image::imageops::{self, FilterType};
use image::RgbImage;

use crate::error::{Error, Result};
use crate::pipeline::{SynthesisManifest, IMAGES_DIR, MANIFEST_FILE};
use crate::raster::ImageBuffer;

pub const PREVIEW_FILE: &str = "preview.png";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SheetLayout {
    /// Pairs per row.
    pub columns: u32,
    pub rows: u32,
    pub cell_width: u32,
    pub cell_height: u32,
    pub padding: u32,
}

impl SheetLayout {
    pub fn new(columns: u32, rows: u32) -> Self {
        SheetLayout {
            columns,
            rows,
            cell_width: 64,
            cell_height: 128,
            padding: 4,
        }
    }

    pub fn sheet_size(&self) -> (u32, u32) {
        let pair_w = 2 * self.cell_width + self.padding;
        (
            self.columns * (pair_w + self.padding * 2) + self.padding,
            self.rows * (self.cell_height + self.padding) + self.padding,
        )
    }

    /// Top-left corner of cell `side` (0 = original, 1 = composite) of pair
    /// `index`.
    pub fn cell_origin(&self, index: u32, side: u32) -> (u32, u32) {
        let pair_w = 2 * self.cell_width + self.padding;
        let (col, row) = (index % self.columns, index / self.columns);
        (
            self.padding + col * (pair_w + self.padding * 2) + side * (self.cell_width + self.padding),
            self.padding + row * (self.cell_height + self.padding),
        )
    }
}

/// Parses `WxH` (pairs per row × rows).
pub fn parse_grid(text: &str) -> Result<(u32, u32)> {
    let bad = || Error::InvalidParameter(format!("expected WxH with positive integers, got {text:?}"));
    let (w, h) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let w: u32 = w.trim().parse().map_err(|_| bad())?;
    let h: u32 = h.trim().parse().map_err(|_| bad())?;
    if w == 0 || h == 0 {
        return Err(bad());
    }
    Ok((w, h))
}

/// Lays out up to `columns × rows` pairs; extra pairs are dropped.
pub fn contact_sheet(pairs: &[(ImageBuffer, ImageBuffer)], layout: SheetLayout) -> Result<ImageBuffer> {
    let (w, h) = layout.sheet_size();
    let mut sheet = RgbImage::from_pixel(w, h, image::Rgb([48, 48, 48]));
    let capacity = (layout.columns * layout.rows) as usize;
    for (i, (original, fake)) in pairs.iter().take(capacity).enumerate() {
        for (side, img) in [original, fake].into_iter().enumerate() {
            let thumb = imageops::resize(&img.to_rgb_image(), layout.cell_width, layout.cell_height, FilterType::Triangle);
            let (x, y) = layout.cell_origin(i as u32, side as u32);
            imageops::replace(&mut sheet, &thumb, x as i64, y as i64);
        }
    }
    ImageBuffer::from_rgb_image(sheet)
}

/// Renders `<out>/preview.png` from the manifest in `out`. Originals are read
/// from `<out>/images` when present, otherwise from `persons_dir`.
pub fn render_preview(out: &Path, persons_dir: Option<&Path>, layout: SheetLayout) -> Result<PathBuf> {
    let manifest = SynthesisManifest::load(out.join(MANIFEST_FILE))?;
    let capacity = (layout.columns * layout.rows) as usize;
    let mut pairs = Vec::new();
    for row in manifest.fakes().take(capacity) {
        let Some(fake_rel) = &row.output_path else { continue };
        let copied = out.join(IMAGES_DIR).join(&row.pedestrian_path);
        let original = match (copied.is_file(), persons_dir) {
            (true, _) => copied,
            (false, Some(dir)) => dir.join(&row.pedestrian_path),
            (false, None) => {
                return Err(Error::Config(format!(
                    "original {} not in output; pass the persons directory",
                    row.pedestrian_path
                )))
            }
        };
        pairs.push((ImageBuffer::load(&original)?, ImageBuffer::load(out.join(fake_rel))?));
    }
    let sheet = contact_sheet(&pairs, layout)?;
    let path = out.join(PREVIEW_FILE);
    sheet.save(&path)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("4x3").unwrap(), (4, 3));
        assert_eq!(parse_grid("2X5").unwrap(), (2, 5));
        assert!(parse_grid("0x3").is_err());
        assert!(parse_grid("4by3").is_err());
    }

    #[test]
    fn pairs_sit_side_by_side() {
        let layout = SheetLayout {
            columns: 2,
            rows: 1,
            cell_width: 4,
            cell_height: 6,
            padding: 1,
        };
        let red = ImageBuffer::filled(8, 12, [255, 0, 0]).unwrap();
        let blue = ImageBuffer::filled(8, 12, [0, 0, 255]).unwrap();
        let sheet = contact_sheet(&[(red.clone(), blue.clone()), (red, blue)], layout).unwrap();
        assert_eq!(sheet.dimensions(), layout.sheet_size());
        for pair in 0..2 {
            let (x, y) = layout.cell_origin(pair, 0);
            assert_eq!(sheet.get(x + 1, y + 1), [255, 0, 0]);
            let (x, y) = layout.cell_origin(pair, 1);
            assert_eq!(sheet.get(x + 1, y + 1), [0, 0, 255]);
        }
    }
}
