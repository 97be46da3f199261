use polarcut::Volume;

use crate::error::CliResult;

/// Maps intensity `v` through the window `[lo, hi]` onto 0..=255. A
/// degenerate window (`hi <= lo`) becomes a step: 255 from `lo` upwards,
/// 0 below.
pub fn window(v: f64, lo: f64, hi: f64) -> u8 {
    if hi <= lo {
        return if v >= lo { 255 } else { 0 };
    }
    ((v - lo) / (hi - lo) * 255.0).round().clamp(0.0, 255.0) as u8
}

/// Axial slice `z` as an 8-bit grayscale PNG, x along columns and y along
/// rows.
pub fn slice_png(volume: &Volume, z: usize, lo: f64, hi: f64) -> CliResult<Vec<u8>> {
    let [nx, ny, _] = volume.dims();
    let mut pixels = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            pixels.push(window(volume.get(i, j, z) as f64, lo, hi));
        }
    }
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, nx as u32, ny as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header()?;
        w.write_image_data(&pixels)?;
    }
    Ok(out)
}
