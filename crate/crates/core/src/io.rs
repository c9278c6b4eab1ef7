//! On-disk formats: binary label and float maps, JSON boundary tables and
//! hierarchies, orientation records, PGM input, TSV curves, and manifests.
//!
//! Binary payloads are little-endian with a four-byte magic and a version
//! word. Every writer goes through a temp-file-and-rename so readers never
//! observe a half-written file. JSON is emitted compactly with a fixed
//! field order, so identical values produce identical bytes.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curves::PRCurve;
use crate::error::{Error, Result};
use crate::grid::{BoundaryGrid, Edgel, FloatMap, LabelMap};
use crate::hierarchy::{Hierarchy, Merge};
use crate::orientation::{OrientationCurve, OrientationField, OrientationRecord};
use crate::partition::{BoundaryEntry, SparseBoundaries};
use crate::scalar::Scalar;

const LMAP_MAGIC: &[u8; 4] = b"COBL";
const FMAP_MAGIC: &[u8; 4] = b"COBF";
const FORMAT_VERSION: u32 = 1;

fn malformed(path: &Path, reason: impl Into<String>) -> Error {
    Error::MalformedFile { path: path.to_path_buf(), reason: reason.into() }
}

/// Writes bytes to a sibling temp file, then renames over the target.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| malformed(path, "path has no file name"))?
        .to_string_lossy()
        .into_owned();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

struct Cursor<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(malformed(self.path, "truncated payload"));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(malformed(self.path, "trailing bytes after payload"));
        }
        Ok(())
    }
}

fn open_binary<'a>(path: &'a Path, bytes: &'a [u8], magic: &[u8; 4]) -> Result<Cursor<'a>> {
    let mut cur = Cursor { path, bytes, pos: 0 };
    if cur.take(4)? != magic {
        return Err(malformed(path, "wrong magic"));
    }
    let version = cur.u32()?;
    if version != FORMAT_VERSION {
        return Err(malformed(path, format!("unsupported version {version}")));
    }
    Ok(cur)
}

pub fn write_label_map(path: &Path, map: &LabelMap) -> Result<()> {
    let mut bytes = Vec::with_capacity(20 + 4 * map.labels().len());
    bytes.extend_from_slice(LMAP_MAGIC);
    bytes.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(map.height() as u32).to_le_bytes());
    bytes.extend_from_slice(&(map.width() as u32).to_le_bytes());
    for &l in map.labels() {
        bytes.extend_from_slice(&l.to_le_bytes());
    }
    atomic_write(path, &bytes)
}

pub fn read_label_map(path: &Path) -> Result<LabelMap> {
    let bytes = fs::read(path)?;
    let mut cur = open_binary(path, &bytes, LMAP_MAGIC)?;
    let height = cur.u32()? as usize;
    let width = cur.u32()? as usize;
    let n = height
        .checked_mul(width)
        .ok_or_else(|| malformed(path, "dimensions overflow"))?;
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        labels.push(cur.u32()?);
    }
    cur.finish()?;
    LabelMap::new(height, width, labels)
        .map_err(|e| malformed(path, format!("invalid label map: {e}")))
}

pub fn write_float_map<S: Scalar>(path: &Path, map: &FloatMap<S>) -> Result<()> {
    let mut bytes = Vec::with_capacity(24 + 4 * map.values().len());
    bytes.extend_from_slice(FMAP_MAGIC);
    bytes.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(map.height() as u32).to_le_bytes());
    bytes.extend_from_slice(&(map.width() as u32).to_le_bytes());
    bytes.extend_from_slice(&(map.channels() as u32).to_le_bytes());
    for &v in map.values() {
        bytes.extend_from_slice(&(v.as_f64() as f32).to_le_bytes());
    }
    atomic_write(path, &bytes)
}

pub fn read_float_map<S: Scalar>(path: &Path) -> Result<FloatMap<S>> {
    let bytes = fs::read(path)?;
    let mut cur = open_binary(path, &bytes, FMAP_MAGIC)?;
    let height = cur.u32()? as usize;
    let width = cur.u32()? as usize;
    let channels = cur.u32()? as usize;
    let n = height
        .checked_mul(width)
        .and_then(|p| p.checked_mul(channels))
        .ok_or_else(|| malformed(path, "dimensions overflow"))?;
    let mut data = Vec::with_capacity(n);
    for _ in 0..n {
        let raw = f32::from_le_bytes(cur.take(4)?.try_into().unwrap());
        data.push(S::of_f64(raw as f64));
    }
    cur.finish()?;
    FloatMap::from_vec(height, width, channels, data)
        .map_err(|e| malformed(path, format!("invalid float map: {e}")))
}

/// Dense boundary-grid export: a 1-channel float map of the grid itself,
/// so the stored height/width are odd (2H-1 by 2W-1).
pub fn write_boundary_grid<S: Scalar>(path: &Path, grid: &BoundaryGrid<S>) -> Result<()> {
    let map = FloatMap::from_vec(
        grid.grid_height(),
        grid.grid_width(),
        1,
        grid.values().to_vec(),
    )?;
    write_float_map(path, &map)
}

pub fn read_boundary_grid<S: Scalar>(path: &Path) -> Result<BoundaryGrid<S>> {
    let map: FloatMap<S> = read_float_map(path)?;
    if map.channels() != 1 {
        return Err(malformed(path, "boundary grid must be single-channel"));
    }
    if map.height() % 2 == 0 || map.width() % 2 == 0 {
        return Err(malformed(path, "boundary grid dimensions must be odd"));
    }
    BoundaryGrid::from_vec(
        (map.height() + 1) / 2,
        (map.width() + 1) / 2,
        map.values().to_vec(),
    )
    .map_err(|e| malformed(path, format!("invalid boundary grid: {e}")))
}

#[derive(Serialize, Deserialize)]
struct SparseEntryFile {
    a: u32,
    b: u32,
    strength: f64,
    coords: Vec<(u32, u32)>,
}

#[derive(Serialize, Deserialize)]
struct SparseFile {
    height: usize,
    width: usize,
    region_count: u32,
    entries: Vec<SparseEntryFile>,
}

pub fn write_sparse<S: Scalar>(path: &Path, sb: &SparseBoundaries<S>) -> Result<()> {
    let entries = sb
        .entries()
        .map(|(&(a, b), entry)| SparseEntryFile {
            a,
            b,
            strength: entry.strength.as_f64(),
            coords: entry.coords.iter().map(|e| (e.row, e.col)).collect(),
        })
        .collect();
    let file = SparseFile {
        height: sb.height(),
        width: sb.width(),
        region_count: sb.region_count(),
        entries,
    };
    atomic_write(path, serde_json::to_string(&file)?.as_bytes())
}

pub fn read_sparse<S: Scalar>(path: &Path) -> Result<SparseBoundaries<S>> {
    let file: SparseFile = serde_json::from_slice(&fs::read(path)?)?;
    let mut entries = BTreeMap::new();
    for e in file.entries {
        let coords = e.coords.iter().map(|&(r, c)| Edgel::new(r, c)).collect();
        let entry = BoundaryEntry { strength: S::of_f64(e.strength), coords };
        if entries.insert((e.a, e.b), entry).is_some() {
            return Err(malformed(path, format!("duplicate entry ({}, {})", e.a, e.b)));
        }
    }
    SparseBoundaries::from_entries(file.height, file.width, file.region_count, entries)
        .map_err(|e| malformed(path, format!("invalid boundary table: {e}")))
}

#[derive(Serialize, Deserialize)]
struct MergeFile {
    a: u32,
    b: u32,
    parent: u32,
    level: f64,
}

#[derive(Serialize, Deserialize)]
struct HierarchyFile {
    height: usize,
    width: usize,
    region_count: u32,
    finest: String,
    merges: Vec<MergeFile>,
}

/// The stem a hierarchy file's sibling label map is named after: the file
/// name with `.json` and `.ucm` suffixes peeled off.
fn hierarchy_stem(path: &Path) -> Result<String> {
    let name = path
        .file_name()
        .ok_or_else(|| malformed(path, "path has no file name"))?
        .to_string_lossy()
        .into_owned();
    let name = name.strip_suffix(".json").unwrap_or(&name);
    let name = name.strip_suffix(".ucm").unwrap_or(name);
    Ok(name.to_string())
}

/// Writes the hierarchy as JSON plus a sibling `<stem>.finest.lmap`
/// holding the finest partition; the JSON references it by file name.
pub fn write_hierarchy<S: Scalar>(path: &Path, hierarchy: &Hierarchy<S>) -> Result<()> {
    let finest_name = format!("{}.finest.lmap", hierarchy_stem(path)?);
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    write_label_map(&dir.join(&finest_name), hierarchy.finest())?;
    let file = HierarchyFile {
        height: hierarchy.height(),
        width: hierarchy.width(),
        region_count: hierarchy.region_count(),
        finest: finest_name,
        merges: hierarchy
            .merges()
            .iter()
            .map(|m| MergeFile { a: m.a, b: m.b, parent: m.parent, level: m.level.as_f64() })
            .collect(),
    };
    atomic_write(path, serde_json::to_string(&file)?.as_bytes())
}

pub fn read_hierarchy<S: Scalar>(path: &Path) -> Result<Hierarchy<S>> {
    let file: HierarchyFile = serde_json::from_slice(&fs::read(path)?)?;
    let finest_path = {
        let referenced = PathBuf::from(&file.finest);
        if referenced.is_absolute() {
            referenced
        } else {
            match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p.join(referenced),
                _ => referenced,
            }
        }
    };
    let finest = read_label_map(&finest_path)?;
    if finest.height() != file.height
        || finest.width() != file.width
        || finest.region_count() != file.region_count
    {
        return Err(malformed(path, "finest partition disagrees with the header"));
    }
    let merges = file
        .merges
        .iter()
        .map(|m| Merge { a: m.a, b: m.b, parent: m.parent, level: S::of_f64(m.level) })
        .collect();
    Hierarchy::new(finest, merges)
        .map_err(|e| malformed(path, format!("invalid hierarchy: {e}")))
}

#[derive(Serialize, Deserialize)]
struct OrientRecordFile {
    row: u32,
    col: u32,
    bin: u32,
    confidence: f64,
}

#[derive(Serialize, Deserialize)]
struct OrientFile {
    height: usize,
    width: usize,
    records: Vec<OrientRecordFile>,
}

pub fn write_orientation_field<S: Scalar>(
    path: &Path,
    field: &OrientationField<S>,
) -> Result<()> {
    let file = OrientFile {
        height: field.height(),
        width: field.width(),
        records: field
            .records()
            .iter()
            .map(|r| OrientRecordFile {
                row: r.row,
                col: r.col,
                bin: r.bin,
                confidence: r.confidence.as_f64(),
            })
            .collect(),
    };
    atomic_write(path, serde_json::to_string(&file)?.as_bytes())
}

pub fn read_orientation_field<S: Scalar>(path: &Path) -> Result<OrientationField<S>> {
    let file: OrientFile = serde_json::from_slice(&fs::read(path)?)?;
    let records = file
        .records
        .iter()
        .map(|r| OrientationRecord {
            row: r.row,
            col: r.col,
            bin: r.bin,
            confidence: S::of_f64(r.confidence),
        })
        .collect();
    OrientationField::new(file.height, file.width, records)
        .map_err(|e| malformed(path, format!("invalid orientation field: {e}")))
}

/// Reads a binary 8-bit PGM into a single-channel map scaled to [0, 1].
pub fn read_pgm<S: Scalar>(path: &Path) -> Result<FloatMap<S>> {
    let bytes = fs::read(path)?;
    let mut pos = 0usize;

    // Header tokens may be separated by whitespace and '#' comments.
    let mut token = |bytes: &[u8]| -> Result<Vec<u8>> {
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
                continue;
            }
            break;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(malformed(path, "truncated header"));
        }
        Ok(bytes[start..pos].to_vec())
    };

    if token(&bytes)? != b"P5" {
        return Err(malformed(path, "not a binary PGM (expected P5)"));
    }
    let mut number = |bytes: &[u8]| -> Result<usize> {
        let t = token(bytes)?;
        std::str::from_utf8(&t)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed(path, "bad numeric header field"))
    };
    let width = number(&bytes)?;
    let height = number(&bytes)?;
    let maxval = number(&bytes)?;
    if maxval == 0 || maxval > 255 {
        return Err(malformed(path, format!("unsupported maxval {maxval}")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    pos += 1;
    let n = height
        .checked_mul(width)
        .ok_or_else(|| malformed(path, "dimensions overflow"))?;
    if pos + n != bytes.len() {
        return Err(malformed(path, "raster size disagrees with header"));
    }
    let data = bytes[pos..]
        .iter()
        .map(|&b| S::of_f64(b as f64 / maxval as f64))
        .collect();
    FloatMap::from_vec(height, width, 1, data)
        .map_err(|e| malformed(path, format!("invalid image: {e}")))
}

/// One line of an evaluation manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub id: String,
    pub prediction: PathBuf,
    pub ground_truths: Vec<PathBuf>,
}

/// Parses a manifest: one image per line, tab-separated id, prediction
/// path, and semicolon-separated ground-truth paths. Blank lines are
/// skipped; relative paths are resolved against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let text = fs::read_to_string(path)?;
    let base = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let resolve = |s: &str| {
        let p = PathBuf::from(s);
        if p.is_absolute() {
            p
        } else {
            base.join(p)
        }
    };
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(malformed(
                path,
                format!("line {}: expected 3 tab-separated fields", lineno + 1),
            ));
        }
        if fields[0].is_empty() {
            return Err(malformed(path, format!("line {}: empty image id", lineno + 1)));
        }
        let ground_truths: Vec<PathBuf> = fields[2]
            .split(';')
            .filter(|s| !s.is_empty())
            .map(resolve)
            .collect();
        if ground_truths.is_empty() {
            return Err(malformed(
                path,
                format!("line {}: no ground-truth paths", lineno + 1),
            ));
        }
        entries.push(ManifestEntry {
            id: fields[0].to_string(),
            prediction: resolve(fields[1]),
            ground_truths,
        });
    }
    if entries.is_empty() {
        return Err(malformed(path, "no entries"));
    }
    Ok(entries)
}

/// Serializes a PR sweep as TSV: header line, then one row per point.
pub fn pr_curve_tsv(curve: &PRCurve) -> String {
    let mut out = String::from("threshold\tprecision\trecall\tf\n");
    for p in &curve.points {
        out.push_str(&format!("{}\t{}\t{}\t{}\n", p.threshold, p.precision, p.recall, p.f));
    }
    out
}

/// The scalar summary next to a PR curve.
#[derive(Serialize, Deserialize)]
pub struct CurveSummary {
    pub ods_f: f64,
    pub ois_f: f64,
    pub ap: f64,
}

pub fn write_pr_curve(path: &Path, curve: &PRCurve) -> Result<()> {
    atomic_write(path, pr_curve_tsv(curve).as_bytes())
}

/// Writes the `{"ods_f","ois_f","ap"}` summary JSON.
pub fn write_curve_summary(path: &Path, curve: &PRCurve) -> Result<()> {
    let summary = CurveSummary { ods_f: curve.ods_f, ois_f: curve.ois_f, ap: curve.ap };
    atomic_write(path, serde_json::to_string(&summary)?.as_bytes())
}

/// Serializes an orientation accuracy curve as TSV (percentile, accuracy).
pub fn orientation_curve_tsv(curve: &OrientationCurve) -> String {
    let mut out = String::from("percentile\taccuracy\n");
    for &(percentile, accuracy) in &curve.points {
        out.push_str(&format!("{percentile}\t{accuracy}\n"));
    }
    out
}

pub fn write_orientation_curve(path: &Path, curve: &OrientationCurve) -> Result<()> {
    atomic_write(path, orientation_curve_tsv(curve).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::build_ucm;
    use crate::partition::sparse_from_labels;
    use tempfile::TempDir;

    fn map(h: usize, w: usize, labels: &[u32]) -> LabelMap {
        LabelMap::new(h, w, labels.to_vec()).unwrap()
    }

    #[test]
    fn label_map_round_trips() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("m.lmap");
        let m = map(2, 3, &[0, 0, 1, 2, 2, 1]);
        write_label_map(&path, &m).unwrap();
        let back = read_label_map(&path).unwrap();
        assert_eq!(back.labels(), m.labels());
        assert_eq!((back.height(), back.width()), (2, 3));

        // Byte-identical rewrite.
        let first = fs::read(&path).unwrap();
        write_label_map(&path, &m).unwrap();
        assert_eq!(fs::read(&path).unwrap(), first);
    }

    #[test]
    fn label_map_reader_rejects_corruption() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("m.lmap");
        let m = map(1, 4, &[0, 0, 1, 1]);
        write_label_map(&path, &m).unwrap();
        let good = fs::read(&path).unwrap();

        fs::write(&path, &good[..good.len() - 2]).unwrap();
        assert!(matches!(read_label_map(&path), Err(Error::MalformedFile { .. })));

        let mut wrong_magic = good.clone();
        wrong_magic[0] = b'X';
        fs::write(&path, &wrong_magic).unwrap();
        assert!(read_label_map(&path).is_err());

        let mut wrong_version = good.clone();
        wrong_version[4] = 9;
        fs::write(&path, &wrong_version).unwrap();
        assert!(read_label_map(&path).is_err());

        // Structurally valid bytes, semantically broken labels (a gap).
        let mut bad = good.clone();
        bad[16..20].copy_from_slice(&3u32.to_le_bytes());
        fs::write(&path, &bad).unwrap();
        assert!(read_label_map(&path).is_err());
    }

    #[test]
    fn float_map_round_trips_exactly_at_f32() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("m.fmap");
        let m: FloatMap<f32> =
            FloatMap::from_vec(2, 2, 2, vec![0.0, 0.25, 0.5, 1.0, 0.125, 0.375, 0.625, 0.875])
                .unwrap();
        write_float_map(&path, &m).unwrap();
        let back: FloatMap<f32> = read_float_map(&path).unwrap();
        assert_eq!(back.values(), m.values());
        assert_eq!(back.channels(), 2);

        // f64 maps pass through the f32 container with quantization only.
        let path64 = dir.path().join("m64.fmap");
        let m64: FloatMap<f64> = FloatMap::from_vec(1, 3, 1, vec![0.1, 0.7, 0.3]).unwrap();
        write_float_map(&path64, &m64).unwrap();
        let back64: FloatMap<f64> = read_float_map(&path64).unwrap();
        for (a, b) in back64.values().iter().zip(m64.values()) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn boundary_grid_round_trips() {
        let m = map(2, 3, &[0, 0, 1, 2, 2, 1]);
        let sb = sparse_from_labels::<f64>(&m)
            .with_strengths(|&(a, _), _| if a == 0 { 0.25 } else { 0.75 });
        let grid = build_ucm(&sb).unwrap().ucm_grid().unwrap();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("g.fmap");
        write_boundary_grid(&path, &grid).unwrap();
        let back: BoundaryGrid<f64> = read_boundary_grid(&path).unwrap();
        assert_eq!(back.grid_height(), grid.grid_height());
        for (a, b) in back.values().iter().zip(grid.values()) {
            assert!((a - b).abs() < 1e-7);
        }

        // Even dimensions cannot be a boundary grid.
        let flat: FloatMap<f64> = FloatMap::zeros(2, 3, 1).unwrap();
        let flat_path = dir.path().join("flat.fmap");
        write_float_map(&flat_path, &flat).unwrap();
        assert!(read_boundary_grid::<f64>(&flat_path).is_err());
    }

    #[test]
    fn sparse_table_round_trips_through_json() {
        let m = map(2, 3, &[0, 0, 1, 2, 2, 1]);
        let sb = sparse_from_labels::<f64>(&m)
            .with_strengths(|&(a, b), _| 0.1 * (a + b) as f64 + 0.05);
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("t.sb.json");
        write_sparse(&path, &sb).unwrap();
        let back: SparseBoundaries<f64> = read_sparse(&path).unwrap();
        assert_eq!(back.height(), sb.height());
        assert_eq!(back.region_count(), sb.region_count());
        assert_eq!(back.entry_count(), sb.entry_count());
        for ((ka, ea), (kb, eb)) in back.entries().zip(sb.entries()) {
            assert_eq!(ka, kb);
            assert_eq!(ea.strength, eb.strength);
            assert_eq!(ea.coords, eb.coords);
        }
        assert_eq!(back.finest().labels(), sb.finest().labels());

        // Entries land in the file sorted by (a, b).
        let text = fs::read_to_string(&path).unwrap();
        let a0 = text.find("\"a\":0").unwrap();
        let a1 = text.find("\"a\":1").unwrap();
        assert!(a0 < a1);
    }

    #[test]
    fn hierarchy_round_trips_with_sibling_finest() {
        let m = map(2, 3, &[0, 0, 1, 2, 2, 1]);
        let sb = sparse_from_labels::<f64>(&m)
            .with_strengths(|&(a, b), _| 0.2 * (a + b) as f64);
        let hier = build_ucm(&sb).unwrap();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("h.ucm.json");
        write_hierarchy(&path, &hier).unwrap();
        assert!(dir.path().join("h.finest.lmap").exists());
        let back: Hierarchy<f64> = read_hierarchy(&path).unwrap();
        assert_eq!(back, hier);

        // A header that disagrees with the sibling file is caught.
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replace("\"region_count\":3", "\"region_count\":4")).unwrap();
        assert!(read_hierarchy::<f64>(&path).is_err());
    }

    #[test]
    fn orientation_field_round_trips() {
        let records = vec![
            OrientationRecord { row: 0, col: 1, bin: 3, confidence: 0.5 },
            OrientationRecord { row: 2, col: 2, bin: 7, confidence: 1.0 },
        ];
        let field = OrientationField::new(3, 3, records).unwrap();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("f.orient.json");
        write_orientation_field(&path, &field).unwrap();
        let back: OrientationField<f64> = read_orientation_field(&path).unwrap();
        assert_eq!(back.records(), field.records());
        assert_eq!(back.height(), 3);
    }

    #[test]
    fn pgm_reads_binary_gray() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("img.pgm");
        let mut bytes = b"P5 # comment\n3 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 51, 102, 153, 204, 255]);
        fs::write(&path, &bytes).unwrap();
        let img: FloatMap<f64> = read_pgm(&path).unwrap();
        assert_eq!((img.height(), img.width(), img.channels()), (2, 3, 1));
        assert_eq!(img.get(0, 0, 0), 0.0);
        assert_eq!(img.get(0, 1, 2), 1.0);
        assert!((img.get(0, 0, 1) - 0.2).abs() < 1e-12);

        fs::write(&path, b"P2\n1 1\n255\n0").unwrap();
        assert!(read_pgm::<f64>(&path).is_err());
        fs::write(&path, b"P5\n2 2\n255\nab").unwrap();
        assert!(read_pgm::<f64>(&path).is_err());
    }

    #[test]
    fn manifest_parses_and_resolves() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("m.txt");
        fs::write(&path, "img1\tpred/a.fmap\tgt/a1.lmap;gt/a2.lmap\n\nimg2\t/abs/b.fmap\tgt/b.lmap\n")
            .unwrap();
        let entries = read_manifest(&path).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].id, "img1");
        assert_eq!(entries[0].prediction, dir.path().join("pred/a.fmap"));
        assert_eq!(entries[0].ground_truths.len(), 2);
        assert_eq!(entries[1].prediction, PathBuf::from("/abs/b.fmap"));

        fs::write(&path, "only-two-fields\tx\n").unwrap();
        assert!(read_manifest(&path).is_err());
        fs::write(&path, "img\tp\t\n").unwrap();
        assert!(read_manifest(&path).is_err());
        fs::write(&path, "\n").unwrap();
        assert!(read_manifest(&path).is_err());
    }

    #[test]
    fn curve_outputs_are_stable_text() {
        let curve = PRCurve {
            points: vec![crate::curves::PRPoint {
                threshold: 0.5,
                precision: 0.75,
                recall: 1.0,
                f: crate::curves::f_measure(0.75, 1.0),
            }],
            ods_f: 0.8571428571428571,
            ois_f: 0.8571428571428571,
            ap: 0.75,
        };
        assert_eq!(
            pr_curve_tsv(&curve),
            "threshold\tprecision\trecall\tf\n0.5\t0.75\t1\t0.8571428571428571\n"
        );
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("s.json");
        write_curve_summary(&path, &curve).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            "{\"ods_f\":0.8571428571428571,\"ois_f\":0.8571428571428571,\"ap\":0.75}"
        );

        let oc = OrientationCurve { points: vec![(1, 0.5), (100, 1.0)], auc: 0.75 };
        assert_eq!(orientation_curve_tsv(&oc), "percentile\taccuracy\n1\t0.5\n100\t1\n");
    }

    #[test]
    fn atomic_write_replaces_existing_content() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("out.txt");
        atomic_write(&path, b"first").unwrap();
        atomic_write(&path, b"second").unwrap();
        assert_eq!(fs::read(&path).unwrap(), b"second");
        // No temp droppings left behind.
        let names: Vec<_> = fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names.len(), 1);
    }
}
