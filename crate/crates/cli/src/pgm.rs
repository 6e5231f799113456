//! 8-bit binary PGM heatmaps. CSV stays the authoritative output; the
//! image is a quick look with a linear [min, max] -> [0, 255] scale that
//! the manifest records.

use std::io::Write;
use std::path::Path;

use ndarray::Array2;

/// Write `values` (indexed [x, y]) as P5; rows run from the top (largest y)
/// down so the image matches plot orientation. Returns (min, max).
pub fn write_pgm(path: &Path, values: &Array2<f64>) -> anyhow::Result<(f64, f64)> {
    let (nx, ny) = values.dim();
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if max > min { max - min } else { 1.0 };
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(f, "P5\n{} {}\n255\n", nx, ny)?;
    let mut row = vec![0u8; nx];
    for y_rev in 0..ny {
        let j = ny - 1 - y_rev;
        for (i, px) in row.iter_mut().enumerate() {
            let v = (values[(i, j)] - min) / span;
            *px = (v * 255.0).round().clamp(0.0, 255.0) as u8;
        }
        f.write_all(&row)?;
    }
    Ok((min, max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_header_and_payload_size() {
        let dir = std::env::temp_dir().join(format!("vibronic-pgm-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("t.pgm");
        let mut v = Array2::zeros((7, 5));
        v[(0, 0)] = -1.0;
        v[(6, 4)] = 3.0;
        let (min, max) = write_pgm(&path, &v).unwrap();
        assert_eq!((min, max), (-1.0, 3.0));
        let bytes = std::fs::read(&path).unwrap();
        let header = b"P5\n7 5\n255\n";
        assert!(bytes.starts_with(header));
        assert_eq!(bytes.len(), header.len() + 35);
        std::fs::remove_dir_all(&dir).ok();
    }
}
