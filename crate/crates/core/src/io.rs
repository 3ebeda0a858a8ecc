//! File formats: 8-bit grayscale PNG/PGM images, and the CSV schemas used by
//! the pipeline (detection records, per-frame results, truth, waveform,
//! evaluation rows).
//!
//! Masks are binarized at intensity >= 128 on read and written as {0,255}.
//! All numeric output uses shortest round-trip float formatting, so reruns
//! are byte-identical.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::backends::Detection;
use crate::bbox::BBox;
use crate::error::{Error, Result};
use crate::frame::{BinaryMask, Frame};
use crate::metrics::EvalRow;
use crate::pipeline::{FrameResult, FrameStatus};

pub const MASK_BINARIZE_LEVEL: u8 = 128;

// ---------------------------------------------------------------------------
// Images
// ---------------------------------------------------------------------------

/// Read an 8-bit grayscale image, PNG or PGM by extension.
pub fn read_frame(path: &Path) -> Result<Frame> {
    let (w, h, data) = read_gray(path)?;
    Frame::new(w, h, data)
}

/// Read a mask image: intensity >= 128 is true.
pub fn read_mask(path: &Path) -> Result<BinaryMask> {
    let (w, h, data) = read_gray(path)?;
    BinaryMask::new(
        w,
        h,
        data.iter().map(|&v| v >= MASK_BINARIZE_LEVEL).collect(),
    )
}

pub fn write_frame(path: &Path, frame: &Frame) -> Result<()> {
    write_gray(path, frame.width(), frame.height(), frame.pixels())
}

/// Write a mask as {0,255}.
pub fn write_mask(path: &Path, mask: &BinaryMask) -> Result<()> {
    let data: Vec<u8> = mask
        .bits()
        .iter()
        .map(|&b| if b { 255 } else { 0 })
        .collect();
    write_gray(path, mask.width(), mask.height(), &data)
}

fn is_pgm(path: &Path) -> bool {
    path.extension()
        .map(|e| e.eq_ignore_ascii_case("pgm"))
        .unwrap_or(false)
}

fn read_gray(path: &Path) -> Result<(u32, u32, Vec<u8>)> {
    if is_pgm(path) {
        read_pgm(path)
    } else {
        read_png(path)
    }
}

fn write_gray(path: &Path, w: u32, h: u32, data: &[u8]) -> Result<()> {
    if is_pgm(path) {
        write_pgm(path, w, h, data)
    } else {
        write_png(path, w, h, data)
    }
}

fn read_png(path: &Path) -> Result<(u32, u32, Vec<u8>)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let decoder = png::Decoder::new(BufReader::new(file));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::format(path, format!("png: {e}")))?;
    let mut buf = vec![0u8; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::format(path, format!("png: {e}")))?;
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
        return Err(Error::format(
            path,
            format!(
                "expected 8-bit grayscale png, got {:?}/{:?}",
                info.color_type, info.bit_depth
            ),
        ));
    }
    buf.truncate(info.buffer_size());
    Ok((info.width, info.height, buf))
}

fn write_png(path: &Path, w: u32, h: u32, data: &[u8]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), w, h);
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder
        .write_header()
        .map_err(|e| Error::format(path, format!("png: {e}")))?;
    writer
        .write_image_data(data)
        .map_err(|e| Error::format(path, format!("png: {e}")))?;
    Ok(())
}

fn read_pgm(path: &Path) -> Result<(u32, u32, Vec<u8>)> {
    let mut raw = Vec::new();
    File::open(path)
        .map_err(|e| Error::io(path, e))?
        .read_to_end(&mut raw)
        .map_err(|e| Error::io(path, e))?;
    if !raw.starts_with(b"P5") {
        return Err(Error::format(path, "expected binary PGM (P5)"));
    }
    // Header: magic, width, height, maxval as whitespace-separated tokens
    // with '#' comments, then a single whitespace byte before pixel data.
    let mut pos = 2usize;
    let mut fields = [0u64; 3];
    for field in fields.iter_mut() {
        while pos < raw.len() {
            match raw[pos] {
                b' ' | b'\t' | b'\r' | b'\n' => pos += 1,
                b'#' => {
                    while pos < raw.len() && raw[pos] != b'\n' {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while pos < raw.len() && raw[pos].is_ascii_digit() {
            pos += 1;
        }
        *field = std::str::from_utf8(&raw[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(path, "bad PGM header"))?;
    }
    pos += 1; // single whitespace after maxval
    let [w, h, maxval] = fields;
    if maxval != 255 {
        return Err(Error::format(path, "PGM maxval must be 255"));
    }
    let n = (w * h) as usize;
    if raw.len() < pos + n {
        return Err(Error::format(path, "truncated PGM data"));
    }
    Ok((w as u32, h as u32, raw[pos..pos + n].to_vec()))
}

fn write_pgm(path: &Path, w: u32, h: u32, data: &[u8]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    write!(out, "P5\n{w} {h}\n255\n").map_err(|e| Error::io(path, e))?;
    out.write_all(data).map_err(|e| Error::io(path, e))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Image directories
// ---------------------------------------------------------------------------

/// List image files in a directory as `(frame_id, path)` sorted by id.
/// File stems must parse as integers (`000012.png` is frame 12).
pub fn list_image_dir(dir: &Path) -> Result<Vec<(u64, PathBuf)>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let ext_ok = path
            .extension()
            .map(|e| e.eq_ignore_ascii_case("png") || e.eq_ignore_ascii_case("pgm"))
            .unwrap_or(false);
        if !path.is_file() || !ext_ok {
            continue;
        }
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default();
        let id: u64 = stem.parse().map_err(|_| {
            Error::format(&path, "image stem must be a frame number (e.g. 000012.png)")
        })?;
        out.push((id, path));
    }
    if out.is_empty() {
        return Err(Error::format(dir, "no .png/.pgm images found"));
    }
    out.sort();
    Ok(out)
}

/// Zero-padded canonical image file name for a frame id.
pub fn frame_file_name(frame_id: u64) -> String {
    format!("{frame_id:06}.png")
}

// ---------------------------------------------------------------------------
// Detection records CSV: frame_id,x0,y0,x1,y1,confidence
// ---------------------------------------------------------------------------

pub const DETECTIONS_HEADER: &str = "frame_id,x0,y0,x1,y1,confidence";

/// Read detection records; absent rows mean no detection on that frame.
/// Detections per frame are sorted by confidence descending.
pub fn read_detections(path: &Path) -> Result<BTreeMap<u64, Vec<Detection>>> {
    let lines = read_csv_lines(path, DETECTIONS_HEADER)?;
    let mut map: BTreeMap<u64, Vec<Detection>> = BTreeMap::new();
    for (lineno, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::format(
                path,
                format!("line {lineno}: expected 6 fields"),
            ));
        }
        let frame_id = parse_field::<u64>(path, lineno, f[0])?;
        let coords: [f64; 4] = [
            parse_field(path, lineno, f[1])?,
            parse_field(path, lineno, f[2])?,
            parse_field(path, lineno, f[3])?,
            parse_field(path, lineno, f[4])?,
        ];
        let confidence: f64 = parse_field(path, lineno, f[5])?;
        let bbox = BBox::new(
            coords[0].round().max(0.0) as u32,
            coords[1].round().max(0.0) as u32,
            coords[2].round().max(0.0) as u32,
            coords[3].round().max(0.0) as u32,
        )
        .map_err(|e| Error::format(path, format!("line {lineno}: {e}")))?;
        let det = Detection::new(bbox, confidence)
            .map_err(|e| Error::format(path, format!("line {lineno}: {e}")))?;
        map.entry(frame_id).or_default().push(det);
    }
    for dets in map.values_mut() {
        dets.sort_by(|a, b| b.confidence.total_cmp(&a.confidence));
    }
    Ok(map)
}

pub fn write_detections<'a>(
    path: &Path,
    rows: impl IntoIterator<Item = (u64, &'a Detection)>,
) -> Result<()> {
    let mut out = String::from(DETECTIONS_HEADER);
    out.push('\n');
    for (frame_id, d) in rows {
        let b = &d.bbox;
        out.push_str(&format!(
            "{frame_id},{},{},{},{},{}\n",
            b.x0, b.y0, b.x1, b.y1, d.confidence
        ));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Per-frame results CSV: frame_id,area_px2,status,conf,x0,y0,x1,y1
// ---------------------------------------------------------------------------

pub const FRAME_RESULTS_HEADER: &str = "frame_id,area_px2,status,conf,x0,y0,x1,y1";

/// One row per frame; box and confidence fields are empty when the detector
/// produced nothing. Masks are stored separately.
pub fn write_frame_results(path: &Path, results: &[FrameResult]) -> Result<()> {
    let mut out = String::from(FRAME_RESULTS_HEADER);
    out.push('\n');
    for r in results {
        match &r.detection {
            Some(d) => out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.frame_id,
                r.area_px2,
                r.status,
                d.confidence,
                d.bbox.x0,
                d.bbox.y0,
                d.bbox.x1,
                d.bbox.y1
            )),
            None => out.push_str(&format!(
                "{},{},{},,,,,\n",
                r.frame_id, r.area_px2, r.status
            )),
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// A frame-results row without its mask.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRow {
    pub frame_id: u64,
    pub area_px2: u64,
    pub status: FrameStatus,
    pub detection: Option<Detection>,
}

pub fn read_frame_results(path: &Path) -> Result<Vec<FrameRow>> {
    let lines = read_csv_lines(path, FRAME_RESULTS_HEADER)?;
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(Error::format(
                path,
                format!("line {lineno}: expected 8 fields"),
            ));
        }
        let detection = if f[3].is_empty() {
            None
        } else {
            let bbox = BBox::new(
                parse_field(path, lineno, f[4])?,
                parse_field(path, lineno, f[5])?,
                parse_field(path, lineno, f[6])?,
                parse_field(path, lineno, f[7])?,
            )
            .map_err(|e| Error::format(path, format!("line {lineno}: {e}")))?;
            Some(
                Detection::new(bbox, parse_field(path, lineno, f[3])?)
                    .map_err(|e| Error::format(path, format!("line {lineno}: {e}")))?,
            )
        };
        rows.push(FrameRow {
            frame_id: parse_field(path, lineno, f[0])?,
            area_px2: parse_field(path, lineno, f[1])?,
            status: f[2]
                .parse()
                .map_err(|e: Error| Error::format(path, format!("line {lineno}: {e}")))?,
            detection,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Waveform CSV: frame_id,area_px2
// ---------------------------------------------------------------------------

pub const GAW_HEADER: &str = "frame_id,area_px2";

pub fn write_gaw(path: &Path, areas: &[f64]) -> Result<()> {
    let mut out = String::from(GAW_HEADER);
    out.push('\n');
    for (i, a) in areas.iter().enumerate() {
        out.push_str(&format!("{i},{a}\n"));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_gaw(path: &Path) -> Result<Vec<f64>> {
    let lines = read_csv_lines(path, GAW_HEADER)?;
    let mut areas = Vec::new();
    for (lineno, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 2 {
            return Err(Error::format(
                path,
                format!("line {lineno}: expected 2 fields"),
            ));
        }
        let idx: usize = parse_field(path, lineno, f[0])?;
        if idx != areas.len() {
            return Err(Error::format(
                path,
                format!("line {lineno}: frame ids must be dense from 0"),
            ));
        }
        areas.push(parse_field(path, lineno, f[1])?);
    }
    Ok(areas)
}

// ---------------------------------------------------------------------------
// Truth CSV: frame_id,area,occluded,x0,y0,x1,y1
// ---------------------------------------------------------------------------

pub const TRUTH_HEADER: &str = "frame_id,area,occluded,x0,y0,x1,y1";

#[derive(Debug, Clone, PartialEq)]
pub struct TruthRow {
    pub frame_id: u64,
    pub area: u64,
    pub occluded: bool,
    pub bbox: Option<BBox>,
}

pub fn write_truth(path: &Path, rows: &[TruthRow]) -> Result<()> {
    let mut out = String::from(TRUTH_HEADER);
    out.push('\n');
    for r in rows {
        let occ = if r.occluded { 1 } else { 0 };
        match &r.bbox {
            Some(b) => out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.frame_id, r.area, occ, b.x0, b.y0, b.x1, b.y1
            )),
            None => out.push_str(&format!("{},{},{},,,,\n", r.frame_id, r.area, occ)),
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_truth(path: &Path) -> Result<Vec<TruthRow>> {
    let lines = read_csv_lines(path, TRUTH_HEADER)?;
    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(Error::format(
                path,
                format!("line {lineno}: expected 7 fields"),
            ));
        }
        let bbox = if f[3].is_empty() {
            None
        } else {
            Some(
                BBox::new(
                    parse_field(path, lineno, f[3])?,
                    parse_field(path, lineno, f[4])?,
                    parse_field(path, lineno, f[5])?,
                    parse_field(path, lineno, f[6])?,
                )
                .map_err(|e| Error::format(path, format!("line {lineno}: {e}")))?,
            )
        };
        rows.push(TruthRow {
            frame_id: parse_field(path, lineno, f[0])?,
            area: parse_field(path, lineno, f[1])?,
            occluded: f[2] == "1",
            bbox,
        });
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Evaluation rows
// ---------------------------------------------------------------------------

pub const EVAL_HEADER: &str =
    "method,det_recall,mean_dsc,mean_iou,pass_rate_dsc_ge_05,n_frames,n_excluded";

/// Render evaluation rows as CSV. When `key` is given, each row is prefixed
/// with its key value (used by the sweep outputs).
pub fn eval_rows_csv<'a>(
    rows: impl IntoIterator<Item = (Option<String>, &'a EvalRow)>,
    key: Option<&str>,
) -> String {
    let mut out = String::new();
    match key {
        Some(k) => out.push_str(&format!("{k},{EVAL_HEADER}\n")),
        None => {
            out.push_str(EVAL_HEADER);
            out.push('\n');
        }
    }
    for (prefix, r) in rows {
        if let Some(p) = prefix {
            out.push_str(&p);
            out.push(',');
        }
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.method,
            r.det_recall,
            r.mean_dsc,
            r.mean_iou,
            r.pass_rate_dsc_ge_05,
            r.n_frames,
            r.n_excluded
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

fn read_csv_lines(path: &Path, expected_header: &str) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h.trim_end() == expected_header => {}
        Some((_, Ok(h))) => {
            return Err(Error::format(
                path,
                format!("expected header '{expected_header}', got '{h}'"),
            ));
        }
        Some((_, Err(e))) => return Err(Error::io(path, e)),
        None => return Err(Error::format(path, "empty file")),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            out.push((i + 1, line));
        }
    }
    Ok(out)
}

fn parse_field<T: std::str::FromStr>(path: &Path, lineno: usize, s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::format(path, format!("line {lineno}: bad field '{s}'")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmpdir(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("gg-io-{name}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }

    #[test]
    fn png_roundtrip_frame_and_mask() {
        let dir = tmpdir("png");
        let mut f = Frame::filled(17, 9, 0).unwrap();
        for (i, p) in f.pixels_mut().iter_mut().enumerate() {
            *p = (i * 7 % 256) as u8;
        }
        let p = dir.join("000003.png");
        write_frame(&p, &f).unwrap();
        assert_eq!(read_frame(&p).unwrap(), f);

        let m = BinaryMask::from_fn(17, 9, |x, y| (x + y) % 3 == 0).unwrap();
        let pm = dir.join("m.png");
        write_mask(&pm, &m).unwrap();
        assert_eq!(read_mask(&pm).unwrap(), m);
    }

    #[test]
    fn pgm_roundtrip() {
        let dir = tmpdir("pgm");
        let mut f = Frame::filled(5, 4, 0).unwrap();
        for (i, p) in f.pixels_mut().iter_mut().enumerate() {
            *p = (i * 13 % 256) as u8;
        }
        let p = dir.join("000000.pgm");
        write_frame(&p, &f).unwrap();
        assert_eq!(read_frame(&p).unwrap(), f);
    }

    #[test]
    fn mask_binarizes_at_128() {
        let dir = tmpdir("bin");
        let p = dir.join("g.pgm");
        write_pgm(&p, 4, 1, &[0, 127, 128, 255]).unwrap();
        let m = read_mask(&p).unwrap();
        assert_eq!(m.bits(), &[false, false, true, true]);
    }

    #[test]
    fn detections_roundtrip_sorted_by_confidence() {
        let dir = tmpdir("det");
        let p = dir.join("records.csv");
        let d1 = Detection::new(BBox::new(1, 2, 3, 4).unwrap(), 0.25).unwrap();
        let d2 = Detection::new(BBox::new(5, 6, 9, 9).unwrap(), 0.75).unwrap();
        write_detections(&p, [(0u64, &d1), (0u64, &d2), (4u64, &d1)]).unwrap();
        let map = read_detections(&p).unwrap();
        assert_eq!(map[&0].len(), 2);
        assert_eq!(map[&0][0].confidence, 0.75);
        assert_eq!(map[&4], vec![d1]);
        assert!(!map.contains_key(&1));
    }

    #[test]
    fn truth_roundtrip_with_and_without_box() {
        let dir = tmpdir("truth");
        let p = dir.join("truth.csv");
        let rows = vec![
            TruthRow {
                frame_id: 0,
                area: 0,
                occluded: true,
                bbox: None,
            },
            TruthRow {
                frame_id: 1,
                area: 120,
                occluded: false,
                bbox: Some(BBox::new(10, 12, 30, 40).unwrap()),
            },
        ];
        write_truth(&p, &rows).unwrap();
        assert_eq!(read_truth(&p).unwrap(), rows);
    }

    #[test]
    fn gaw_roundtrip_exact_floats() {
        let dir = tmpdir("gaw");
        let p = dir.join("gaw.csv");
        let areas = vec![0.0, 120.0, 3.0625, 1e-3];
        write_gaw(&p, &areas).unwrap();
        assert_eq!(read_gaw(&p).unwrap(), areas);
    }

    #[test]
    fn header_mismatch_is_format_error() {
        let dir = tmpdir("hdr");
        let p = dir.join("bad.csv");
        std::fs::write(&p, "a,b,c\n1,2,3\n").unwrap();
        assert!(matches!(read_gaw(&p), Err(Error::Format { .. })));
    }
}
