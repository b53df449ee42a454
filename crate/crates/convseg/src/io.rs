//! File formats: PNG/PPM images, CSV and PGM label maps, and palette files.

use std::fs;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::image::{Image, Palette};

fn read_err(path: &Path, reason: impl ToString) -> Error {
    Error::FileRead {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

fn write_err(path: &Path, reason: impl ToString) -> Error {
    Error::FileWrite {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    }
}

/// Loads a PNG or binary PPM image and normalizes it to [0, 1] doubles.
pub fn load_image(path: &Path) -> Result<Image> {
    let decoded = image::open(path).map_err(|e| read_err(path, e))?;
    let rgb = decoded.to_rgb8();
    let (w, h) = rgb.dimensions();
    let data: Vec<f64> = rgb.as_raw().iter().map(|&b| b as f64 / 255.0).collect();
    Image::new(h as usize, w as usize, data)
}

/// Saves an image as 8-bit RGB; the format follows the extension
/// (`.png`, `.ppm`, or `.pnm`).
pub fn save_image(path: &Path, img: &Image) -> Result<()> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    if !matches!(ext.as_str(), "png" | "ppm" | "pnm") {
        return Err(write_err(path, format!("unsupported image extension {ext:?}")));
    }
    let bytes: Vec<u8> = img
        .data()
        .iter()
        .map(|&v| (v * 255.0).round() as u8)
        .collect();
    image::save_buffer(
        path,
        &bytes,
        img.width() as u32,
        img.height() as u32,
        image::ColorType::Rgb8,
    )
    .map_err(|e| write_err(path, e))
}

/// Writes a label map as CSV: one row per image row, comma-separated indices.
pub fn save_labels_csv(path: &Path, labels: &Array2<usize>) -> Result<()> {
    let mut out = String::new();
    for row in labels.rows() {
        let line: Vec<String> = row.iter().map(|l| l.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| write_err(path, e))
}

/// Reads a CSV label map written by [`save_labels_csv`].
pub fn load_labels_csv(path: &Path) -> Result<Array2<usize>> {
    let text = fs::read_to_string(path).map_err(|e| read_err(path, e))?;
    let mut rows: Vec<Vec<usize>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<usize>, _> =
            line.split(',').map(|t| t.trim().parse::<usize>()).collect();
        let row = row.map_err(|e| read_err(path, format!("line {}: {e}", ln + 1)))?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(read_err(path, "no label rows"));
    }
    let w = rows[0].len();
    if rows.iter().any(|r| r.len() != w) {
        return Err(read_err(path, "ragged rows"));
    }
    let h = rows.len();
    Ok(Array2::from_shape_fn((h, w), |(i, j)| rows[i][j]))
}

/// Writes a label map as an 8-bit graymap (raw label values, so it
/// round-trips; stretch externally for viewing). Labels must fit in a byte.
pub fn save_labels_pgm(path: &Path, labels: &Array2<usize>) -> Result<()> {
    let (h, w) = labels.dim();
    let mut bytes = Vec::with_capacity(h * w);
    for &l in labels.iter() {
        if l > 255 {
            return Err(write_err(path, format!("label {l} does not fit in 8 bits")));
        }
        bytes.push(l as u8);
    }
    image::save_buffer(path, &bytes, w as u32, h as u32, image::ColorType::L8)
        .map_err(|e| write_err(path, e))
}

/// Reads a graymap label map (raw gray values are the labels).
pub fn load_labels_pgm(path: &Path) -> Result<Array2<usize>> {
    let decoded = image::open(path).map_err(|e| read_err(path, e))?;
    let gray = decoded.to_luma8();
    let (w, h) = gray.dimensions();
    let raw = gray.as_raw();
    Ok(Array2::from_shape_fn((h as usize, w as usize), |(i, j)| {
        raw[i * w as usize + j] as usize
    }))
}

/// Reads a label map, dispatching on extension: `.csv` or a graymap.
pub fn load_labels(path: &Path) -> Result<Array2<usize>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => load_labels_csv(path),
        _ => load_labels_pgm(path),
    }
}

/// Reads a palette file: one `r,g,b` line per color, values in [0, 1];
/// `#` starts a comment, blank lines are skipped.
pub fn load_palette(path: &Path) -> Result<Palette> {
    let text = fs::read_to_string(path).map_err(|e| read_err(path, e))?;
    let mut colors = Vec::new();
    for (ln, raw_line) in text.lines().enumerate() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 3 {
            return Err(read_err(
                path,
                format!("line {}: expected three comma-separated values", ln + 1),
            ));
        }
        let mut c = [0.0; 3];
        for (slot, part) in c.iter_mut().zip(&parts) {
            *slot = part
                .trim()
                .parse::<f64>()
                .map_err(|e| read_err(path, format!("line {}: {e}", ln + 1)))?;
        }
        colors.push(c);
    }
    Palette::new(colors)
}

/// Writes a palette file in the format [`load_palette`] reads.
pub fn save_palette(path: &Path, palette: &Palette) -> Result<()> {
    let mut out = String::from("# r,g,b per line, values in [0,1]\n");
    for c in palette.colors() {
        out.push_str(&format!("{:.3},{:.3},{:.3}\n", c[0], c[1], c[2]));
    }
    fs::write(path, out).map_err(|e| write_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{make_phantom, PhantomKind};

    fn tmpdir(tag: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("convseg-io-{tag}-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn png_round_trip() {
        let dir = tmpdir("png");
        let (img, _, _) = make_phantom(PhantomKind::ThreePhase, 32).unwrap();
        let path = dir.join("img.png");
        save_image(&path, &img).unwrap();
        let back = load_image(&path).unwrap();
        // Phantom colors are exact multiples of 1/255 = 0 or 1, so the 8-bit
        // round trip is lossless.
        assert_eq!(back, img);
    }

    #[test]
    fn ppm_round_trip() {
        let dir = tmpdir("ppm");
        let (img, _, _) = make_phantom(PhantomKind::SixPhase, 24).unwrap();
        let path = dir.join("img.ppm");
        save_image(&path, &img).unwrap();
        let back = load_image(&path).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn unsupported_extension_rejected() {
        let (img, _, _) = make_phantom(PhantomKind::ThreePhase, 16).unwrap();
        assert!(save_image(Path::new("/tmp/x.bmp"), &img).is_err());
    }

    #[test]
    fn missing_file_is_read_error() {
        let err = load_image(Path::new("/nonexistent/nope.png")).unwrap_err();
        assert!(matches!(err, Error::FileRead { .. }));
    }

    #[test]
    fn labels_csv_round_trip() {
        let dir = tmpdir("csv");
        let labels = Array2::from_shape_fn((3, 4), |(i, j)| (i * 4 + j) % 5);
        let path = dir.join("labels.csv");
        save_labels_csv(&path, &labels).unwrap();
        assert_eq!(load_labels_csv(&path).unwrap(), labels);
        assert_eq!(load_labels(&path).unwrap(), labels);
    }

    #[test]
    fn labels_pgm_round_trip() {
        let dir = tmpdir("pgm");
        let labels = Array2::from_shape_fn((5, 3), |(i, j)| (i + j) % 6);
        let path = dir.join("labels.pgm");
        save_labels_pgm(&path, &labels).unwrap();
        assert_eq!(load_labels_pgm(&path).unwrap(), labels);
        assert_eq!(load_labels(&path).unwrap(), labels);
    }

    #[test]
    fn palette_file_round_trip() {
        let dir = tmpdir("pal");
        let palette = Palette::new(vec![
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.25, 0.5, 0.75],
        ])
        .unwrap();
        let path = dir.join("palette.txt");
        save_palette(&path, &palette).unwrap();
        let back = load_palette(&path).unwrap();
        assert_eq!(back.k(), 3);
        for (a, b) in back.colors().iter().zip(palette.colors()) {
            for ch in 0..3 {
                assert!((a[ch] - b[ch]).abs() <= 0.0005); // three decimals
            }
        }
    }

    #[test]
    fn palette_comments_and_blanks_skipped() {
        let dir = tmpdir("palc");
        let path = dir.join("palette.txt");
        fs::write(
            &path,
            "# header\n1.0, 0.0, 0.0\n\n0.0, 1.0, 0.0  # green\n",
        )
        .unwrap();
        let p = load_palette(&path).unwrap();
        assert_eq!(p.k(), 2);
        assert_eq!(p.color(1), [0.0, 1.0, 0.0]);
    }

    #[test]
    fn palette_bad_line_rejected() {
        let dir = tmpdir("palbad");
        let path = dir.join("palette.txt");
        fs::write(&path, "1.0, 0.0\n").unwrap();
        assert!(matches!(
            load_palette(&path).unwrap_err(),
            Error::FileRead { .. }
        ));
    }

    #[test]
    fn csv_bad_value_rejected() {
        let dir = tmpdir("csvbad");
        let path = dir.join("labels.csv");
        fs::write(&path, "0,1,x\n").unwrap();
        assert!(load_labels_csv(&path).is_err());
    }
}
