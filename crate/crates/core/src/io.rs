//! Text formats: scans (xyz, csv, ASCII PLY), basket tables, manifests,
//! prediction tables and score reports.
//!
//! All parsers fail on the first malformed row and report its 1-based line
//! number. Blank lines are ignored in xyz and csv files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::basket::ProductBasket;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::geometry::{Point3, PointCloud};
use crate::metrics::ScoreReport;
use crate::predictor::{LogRecord, PredictionOutcome};

fn perr(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanFormat {
    Xyz,
    Csv,
    PlyAscii,
}

impl ScanFormat {
    /// Guesses the format from the file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .unwrap_or_default();
        match ext.as_str() {
            "xyz" | "txt" => Ok(ScanFormat::Xyz),
            "csv" => Ok(ScanFormat::Csv),
            "ply" => Ok(ScanFormat::PlyAscii),
            _ => Err(Error::invalid(format!(
                "cannot infer scan format of {}",
                path.display()
            ))),
        }
    }
}

impl FromStr for ScanFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xyz" => Ok(ScanFormat::Xyz),
            "csv" => Ok(ScanFormat::Csv),
            "ply" | "ply-ascii" => Ok(ScanFormat::PlyAscii),
            other => Err(Error::invalid(format!("unknown scan format '{other}'"))),
        }
    }
}

fn parse_coord(tok: &str, path: &Path, line: usize) -> Result<f64> {
    let v: f64 = tok
        .trim()
        .parse()
        .map_err(|_| perr(path, line, format!("'{tok}' is not a number")))?;
    if !v.is_finite() {
        return Err(perr(path, line, format!("non-finite value '{tok}'")));
    }
    Ok(v)
}

fn finish_cloud(
    points: Vec<Point3<f64>>,
    path: &Path,
    last_line: usize,
) -> Result<PointCloud<f64>> {
    if points.is_empty() {
        return Err(perr(path, last_line, "file contains no points"));
    }
    PointCloud::new(points)
}

/// Parses scan text; `path` is only used in error messages.
pub fn parse_scan(text: &str, format: ScanFormat, path: &Path) -> Result<PointCloud<f64>> {
    match format {
        ScanFormat::Xyz => parse_xyz(text, path),
        ScanFormat::Csv => parse_csv_scan(text, path),
        ScanFormat::PlyAscii => parse_ply(text, path),
    }
}

pub fn load_scan(path: &Path, format: ScanFormat) -> Result<PointCloud<f64>> {
    parse_scan(&read_text(path)?, format, path)
}

/// Loads a scan, inferring the format from the extension.
pub fn load_scan_auto(path: &Path) -> Result<PointCloud<f64>> {
    load_scan(path, ScanFormat::from_path(path)?)
}

fn parse_xyz(text: &str, path: &Path) -> Result<PointCloud<f64>> {
    let mut pts = Vec::new();
    let mut last = 0;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last = line;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(perr(
                path,
                line,
                format!("expected 3 values, found {}", toks.len()),
            ));
        }
        pts.push(Point3::new(
            parse_coord(toks[0], path, line)?,
            parse_coord(toks[1], path, line)?,
            parse_coord(toks[2], path, line)?,
        ));
    }
    finish_cloud(pts, path, last)
}

fn parse_csv_scan(text: &str, path: &Path) -> Result<PointCloud<f64>> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| perr(path, 1, "missing header"))?;
    let cols: Vec<String> = header
        .1
        .split(',')
        .map(|c| c.trim().to_ascii_lowercase())
        .collect();
    if cols != ["x", "y", "z"] {
        return Err(perr(
            path,
            header.0 + 1,
            format!("expected header 'x,y,z', got '{}'", header.1.trim()),
        ));
    }
    let mut pts = Vec::new();
    let mut last = header.0 + 1;
    for (i, raw) in lines {
        let line = i + 1;
        last = line;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        let toks: Vec<&str> = l.split(',').collect();
        if toks.len() != 3 {
            return Err(perr(
                path,
                line,
                format!("expected 3 fields, found {}", toks.len()),
            ));
        }
        pts.push(Point3::new(
            parse_coord(toks[0], path, line)?,
            parse_coord(toks[1], path, line)?,
            parse_coord(toks[2], path, line)?,
        ));
    }
    finish_cloud(pts, path, last)
}

struct PlyElement {
    name: String,
    count: usize,
    properties: Vec<String>,
    has_list: bool,
}

fn parse_ply(text: &str, path: &Path) -> Result<PointCloud<f64>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ply")) => {}
        _ => return Err(perr(path, 1, "missing 'ply' magic line")),
    }

    let mut elements: Vec<PlyElement> = Vec::new();
    let mut saw_format = false;
    let mut header_done = false;
    let mut line_no = 1;
    for (n, l) in lines.by_ref() {
        line_no = n;
        let toks: Vec<&str> = l.split_whitespace().collect();
        match toks.as_slice() {
            [] => continue,
            ["format", "ascii", _] => saw_format = true,
            ["format", other, ..] => {
                return Err(perr(
                    path,
                    n,
                    format!("unsupported PLY format '{other}', only ascii"),
                ))
            }
            ["comment", ..] | ["obj_info", ..] => {}
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| perr(path, n, format!("bad element count '{count}'")))?;
                elements.push(PlyElement {
                    name: name.to_string(),
                    count,
                    properties: Vec::new(),
                    has_list: false,
                });
            }
            ["property", "list", ..] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| perr(path, n, "property before any element"))?;
                el.has_list = true;
                el.properties.push(toks.last().unwrap_or(&"").to_string());
            }
            ["property", _ty, name] => {
                let el = elements
                    .last_mut()
                    .ok_or_else(|| perr(path, n, "property before any element"))?;
                el.properties.push(name.to_string());
            }
            ["end_header"] => {
                header_done = true;
                break;
            }
            _ => return Err(perr(path, n, format!("unrecognized header line '{l}'"))),
        }
    }
    if !header_done {
        return Err(perr(path, line_no, "missing end_header"));
    }
    if !saw_format {
        return Err(perr(path, line_no, "missing format line"));
    }
    let vertex_pos = elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| perr(path, line_no, "no vertex element"))?;
    let vertex = &elements[vertex_pos];
    if vertex.has_list {
        return Err(perr(
            path,
            line_no,
            "list properties on vertices are not supported",
        ));
    }
    let col = |axis: &str| {
        vertex
            .properties
            .iter()
            .position(|p| p == axis)
            .ok_or_else(|| perr(path, line_no, format!("vertex has no '{axis}' property")))
    };
    let (cx, cy, cz) = (col("x")?, col("y")?, col("z")?);

    let mut body = lines.filter(|(_, l)| !l.is_empty());
    let mut last = line_no;
    let mut pts = Vec::with_capacity(vertex.count);
    for (ei, el) in elements.iter().enumerate() {
        for k in 0..el.count {
            let (n, l) = body.next().ok_or_else(|| {
                perr(
                    path,
                    last,
                    format!("expected {} '{}' rows, found {k}", el.count, el.name),
                )
            })?;
            last = n;
            if ei != vertex_pos {
                continue;
            }
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != el.properties.len() {
                return Err(perr(
                    path,
                    n,
                    format!(
                        "expected {} values, found {}",
                        el.properties.len(),
                        toks.len()
                    ),
                ));
            }
            for t in &toks {
                parse_coord(t, path, n)?;
            }
            pts.push(Point3::new(
                parse_coord(toks[cx], path, n)?,
                parse_coord(toks[cy], path, n)?,
                parse_coord(toks[cz], path, n)?,
            ));
        }
    }
    if let Some((n, _)) = body.next() {
        return Err(perr(path, n, "more rows than declared by the header"));
    }
    finish_cloud(pts, path, last)
}

/// Serializes a cloud using the shortest representation that round-trips.
pub fn format_scan(cloud: &PointCloud<f64>, format: ScanFormat) -> String {
    let mut out = String::with_capacity(cloud.len() * 32);
    match format {
        ScanFormat::Xyz => {}
        ScanFormat::Csv => out.push_str("x,y,z\n"),
        ScanFormat::PlyAscii => {
            let _ = write!(
                out,
                "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
                cloud.len()
            );
        }
    }
    let sep = if format == ScanFormat::Csv { ',' } else { ' ' };
    for p in cloud {
        let _ = writeln!(out, "{}{sep}{}{sep}{}", p.x, p.y, p.z);
    }
    out
}

pub fn write_scan(cloud: &PointCloud<f64>, path: &Path, format: ScanFormat) -> Result<()> {
    write_text(path, &format_scan(cloud, format))
}

/// Baskets keyed by log id, in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct BasketTable {
    pub product_names: Vec<String>,
    pub rows: IndexMap<String, ProductBasket>,
}

impl BasketTable {
    pub fn product_count(&self) -> usize {
        self.product_names.len()
    }

    pub fn get(&self, id: &str) -> Option<&ProductBasket> {
        self.rows.get(id)
    }
}

/// Default product column names `p1..pP`.
pub fn default_product_names(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("p{i}")).collect()
}

fn parse_quantity(tok: &str, path: &Path, line: usize) -> Result<u32> {
    let t = tok.trim();
    if t.starts_with('-') && t.len() > 1 && t[1..].chars().all(|c| c.is_ascii_digit() || c == '.') {
        return Err(perr(path, line, format!("negative quantity '{t}'")));
    }
    t.parse::<u32>()
        .map_err(|_| perr(path, line, format!("'{t}' is not a non-negative integer")))
}

pub fn parse_baskets(text: &str, path: &Path) -> Result<BasketTable> {
    let mut lines = text.lines().enumerate();
    let (hi, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| perr(path, 1, "missing header"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.first() != Some(&"id") || cols.len() < 2 {
        return Err(perr(path, hi + 1, "header must be 'id,<product columns>'"));
    }
    let product_names: Vec<String> = cols[1..].iter().map(|s| s.to_string()).collect();
    let mut rows = IndexMap::new();
    for (i, raw) in lines {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = raw.split(',').collect();
        if toks.len() != cols.len() {
            return Err(perr(
                path,
                line,
                format!("expected {} fields, found {}", cols.len(), toks.len()),
            ));
        }
        let id = toks[0].trim().to_string();
        if id.is_empty() {
            return Err(perr(path, line, "empty id"));
        }
        let q = toks[1..]
            .iter()
            .map(|t| parse_quantity(t, path, line))
            .collect::<Result<Vec<_>>>()?;
        if rows.insert(id.clone(), ProductBasket::new(q)).is_some() {
            return Err(perr(path, line, format!("duplicate id '{id}'")));
        }
    }
    Ok(BasketTable {
        product_names,
        rows,
    })
}

pub fn load_baskets(path: &Path) -> Result<BasketTable> {
    parse_baskets(&read_text(path)?, path)
}

pub fn format_baskets<'a, I>(product_names: &[String], rows: I) -> String
where
    I: IntoIterator<Item = (&'a str, &'a ProductBasket)>,
{
    let mut out = format!("id,{}\n", product_names.join(","));
    for (id, b) in rows {
        let _ = writeln!(out, "{id},{b}");
    }
    out
}

pub fn write_baskets<'a, I>(path: &Path, product_names: &[String], rows: I) -> Result<()>
where
    I: IntoIterator<Item = (&'a str, &'a ProductBasket)>,
{
    write_text(path, &format_baskets(product_names, rows))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ManifestEntry {
    pub id: String,
    /// Resolved against the manifest's directory.
    pub scan_path: PathBuf,
}

/// `id,scan_path` rows plus the basket table that holds each id's row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
    pub baskets_path: PathBuf,
}

pub const DEFAULT_BASKETS_FILE: &str = "baskets.csv";

/// Reads a manifest. Without `baskets`, the table is `baskets.csv` next to it.
/// Every scan must exist; the basket table is only read by [`load_dataset`].
pub fn load_manifest(path: &Path, baskets: Option<&Path>) -> Result<Manifest> {
    let text = read_text(path)?;
    let dir = path.parent().unwrap_or(Path::new(""));
    let mut lines = text.lines().enumerate();
    let (hi, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| perr(path, 1, "missing header"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["id", "scan_path"] {
        return Err(perr(path, hi + 1, "header must be 'id,scan_path'"));
    }
    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, raw) in lines {
        let line = i + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = raw.splitn(2, ',').map(str::trim).collect();
        if toks.len() != 2 || toks[0].is_empty() || toks[1].is_empty() {
            return Err(perr(path, line, "expected 'id,scan_path'"));
        }
        if !seen.insert(toks[0].to_string()) {
            return Err(perr(path, line, format!("duplicate id '{}'", toks[0])));
        }
        let scan_path = dir.join(toks[1]);
        if !scan_path.is_file() {
            return Err(perr(
                path,
                line,
                format!("scan file {} does not exist", scan_path.display()),
            ));
        }
        entries.push(ManifestEntry {
            id: toks[0].to_string(),
            scan_path,
        });
    }
    let baskets_path = baskets
        .map(Path::to_path_buf)
        .unwrap_or_else(|| dir.join(DEFAULT_BASKETS_FILE));
    Ok(Manifest {
        entries,
        baskets_path,
    })
}

/// Writes a manifest with scan paths relative to its own directory when possible.
pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new(""));
    let mut out = String::from("id,scan_path\n");
    for e in entries {
        let rel = e.scan_path.strip_prefix(dir).unwrap_or(&e.scan_path);
        let _ = writeln!(out, "{},{}", e.id, rel.display());
    }
    write_text(path, &out)
}

/// Loads every scan and basket referenced by a manifest.
pub fn load_dataset(manifest: &Manifest) -> Result<Dataset<f64>> {
    if !manifest.baskets_path.is_file() {
        return Err(Error::invalid(format!(
            "basket table {} does not exist",
            manifest.baskets_path.display()
        )));
    }
    let table = load_baskets(&manifest.baskets_path)?;
    let mut records = Vec::with_capacity(manifest.entries.len());
    for e in &manifest.entries {
        let basket = table.get(&e.id).ok_or_else(|| {
            Error::invalid(format!(
                "log '{}' has no row in {}",
                e.id,
                manifest.baskets_path.display()
            ))
        })?;
        records.push(LogRecord::new(
            e.id.clone(),
            load_scan_auto(&e.scan_path)?,
            basket.clone(),
        ));
    }
    Dataset::new(records, table.product_count(), Some(table.product_names))
}

/// Loads only the scans of a manifest, in manifest order.
pub fn load_scans(manifest: &Manifest) -> Result<Vec<(String, PointCloud<f64>)>> {
    manifest
        .entries
        .iter()
        .map(|e| Ok((e.id.clone(), load_scan_auto(&e.scan_path)?)))
        .collect()
}

/// Prediction table header: `id,neighbor_id,distance,<products>`.
pub fn format_predictions(
    product_names: &[String],
    rows: &[(String, PredictionOutcome)],
) -> String {
    let mut out = format!("id,neighbor_id,distance,{}\n", product_names.join(","));
    for (id, o) in rows {
        let nb = o.neighbor_id.as_deref().unwrap_or("");
        let d = o.distance.map(|d| d.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{id},{nb},{d},{}", o.predicted);
    }
    out
}

pub fn write_predictions(
    path: &Path,
    product_names: &[String],
    rows: &[(String, PredictionOutcome)],
) -> Result<()> {
    write_text(path, &format_predictions(product_names, rows))
}

/// Reads a prediction table back as a basket table keyed by id.
pub fn load_predictions(path: &Path) -> Result<BasketTable> {
    let text = read_text(path)?;
    let mut lines = text.lines().enumerate();
    let (hi, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| perr(path, 1, "missing header"))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 4 || cols[..3] != ["id", "neighbor_id", "distance"] {
        return Err(perr(
            path,
            hi + 1,
            "header must be 'id,neighbor_id,distance,<product columns>'",
        ));
    }
    // Reuse the basket parser on the id + product columns.
    let mut reduced = format!("id,{}\n", cols[3..].join(","));
    let mut line_map = vec![hi + 1];
    for (i, raw) in lines {
        if raw.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = raw.split(',').collect();
        if toks.len() != cols.len() {
            return Err(perr(
                path,
                i + 1,
                format!("expected {} fields, found {}", cols.len(), toks.len()),
            ));
        }
        let _ = writeln!(reduced, "{},{}", toks[0], toks[3..].join(","));
        line_map.push(i + 1);
    }
    parse_baskets(&reduced, path).map_err(|e| match e {
        Error::Parse { path, line, msg } => Error::Parse {
            path,
            line: line_map.get(line - 1).copied().unwrap_or(line),
            msg,
        },
        other => other,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::invalid(format!("unknown report format '{other}'"))),
        }
    }
}

/// A score report tagged with the predictor (and run) it belongs to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledReport {
    pub predictor: String,
    #[serde(flatten)]
    pub report: ScoreReport,
}

pub const REPORT_CSV_HEADER: &str =
    "predictor,s_z,one_minus_dH,one_minus_dHplus,s_pre,s_pro,s_pro_x_pre,n";

pub fn format_report(reports: &[LabeledReport], format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Csv => {
            let mut out = format!("{REPORT_CSV_HEADER}\n");
            for r in reports {
                out.push_str(&r.predictor);
                for v in r.report.values() {
                    let _ = write!(out, ",{v:.4}");
                }
                let _ = writeln!(out, ",{}", r.report.n_evaluated);
            }
            Ok(out)
        }
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(reports)
                .map_err(|e| Error::invalid(format!("cannot serialize report: {e}")))?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub fn write_report(reports: &[LabeledReport], path: &Path, format: ReportFormat) -> Result<()> {
    write_text(path, &format_report(reports, format)?)
}

pub fn load_report_json(path: &Path) -> Result<Vec<LabeledReport>> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| perr(path, e.line(), e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("mem")
    }

    fn line_of(e: Error) -> usize {
        match e {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn xyz_single_point() {
        let c = parse_scan("1.0 2.0 3.0\n", ScanFormat::Xyz, p()).unwrap();
        assert_eq!(c.points(), &[Point3::new(1.0, 2.0, 3.0)]);
    }

    #[test]
    fn xyz_errors_name_lines() {
        assert_eq!(
            line_of(parse_scan("1 2 3\n1 2\n", ScanFormat::Xyz, p()).unwrap_err()),
            2
        );
        assert_eq!(
            line_of(parse_scan("1 2 3\n\n1 a 3\n", ScanFormat::Xyz, p()).unwrap_err()),
            3
        );
        assert_eq!(
            line_of(parse_scan("1 2 inf\n", ScanFormat::Xyz, p()).unwrap_err()),
            1
        );
        assert_eq!(
            line_of(parse_scan("1 2 NaN\n", ScanFormat::Xyz, p()).unwrap_err()),
            1
        );
        assert!(parse_scan("\n\n", ScanFormat::Xyz, p()).is_err());
    }

    #[test]
    fn csv_scan() {
        let c = parse_scan("x,y,z\n1,2,3\n4,5,6\n", ScanFormat::Csv, p()).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.points()[1], Point3::new(4.0, 5.0, 6.0));
        assert!(parse_scan("a,b,c\n1,2,3\n", ScanFormat::Csv, p()).is_err());
        assert_eq!(
            line_of(parse_scan("x,y,z\n1,2,3,4\n", ScanFormat::Csv, p()).unwrap_err()),
            2
        );
        assert!(parse_scan("x,y,z\n", ScanFormat::Csv, p()).is_err());
    }

    const PLY: &str = "ply\nformat ascii 1.0\ncomment test\nelement vertex 4\n\
        property float x\nproperty float y\nproperty float z\nproperty uchar red\n\
        element face 1\nproperty list uchar int vertex_indices\nend_header\n\
        0 0 0 255\n1 0 0 255\n0 1 0 255\n0 0 1 255\n3 0 1 2\n";

    #[test]
    fn ply_ascii() {
        let c = parse_scan(PLY, ScanFormat::PlyAscii, p()).unwrap();
        assert_eq!(c.len(), 4);
        assert_eq!(c.points()[3], Point3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn ply_count_mismatch() {
        let short = PLY.replace("element vertex 4", "element vertex 5");
        assert!(parse_scan(&short, ScanFormat::PlyAscii, p()).is_err());
        let long = PLY.replace("element vertex 4", "element vertex 3");
        assert!(parse_scan(&long, ScanFormat::PlyAscii, p()).is_err());
        let binary = PLY.replace("format ascii 1.0", "format binary_little_endian 1.0");
        assert!(parse_scan(&binary, ScanFormat::PlyAscii, p()).is_err());
    }

    #[test]
    fn baskets() {
        let t = parse_baskets("id,p1,p2\nA,1,0\n", p()).unwrap();
        assert_eq!(t.get("A").unwrap().quantities(), &[1, 0]);
        assert_eq!(t.product_names, vec!["p1", "p2"]);
        assert_eq!(
            line_of(parse_baskets("id,p1\nA,1\nA,2\n", p()).unwrap_err()),
            3
        );
        let e = parse_baskets("id,p1\nA,-1\n", p()).unwrap_err();
        assert!(e.to_string().contains("negative"), "{e}");
        assert!(parse_baskets("id,p1\nA,1.5\n", p()).is_err());
        assert!(parse_baskets("id,p1,p2\nA,1\n", p()).is_err());
        assert!(parse_baskets("name,p1\nA,1\n", p()).is_err());
    }

    #[test]
    fn report_csv_formatting() {
        let ones = ScoreReport {
            s_z: 1.0,
            one_minus_dh: 1.0,
            one_minus_dh_plus: 1.0,
            s_pre: 1.0,
            s_pro: 1.0,
            s_pro_x_pre: 1.0,
            n_evaluated: 3,
        };
        let half = ScoreReport { s_z: 0.5, ..ones };
        let rows = vec![
            LabeledReport {
                predictor: "icp".into(),
                report: ones,
            },
            LabeledReport {
                predictor: "mean".into(),
                report: half,
            },
        ];
        let s = format_report(&rows, ReportFormat::Csv).unwrap();
        assert_eq!(
            s,
            format!(
                "{REPORT_CSV_HEADER}\nicp,1.0000,1.0000,1.0000,1.0000,1.0000,1.0000,3\n\
                 mean,0.5000,1.0000,1.0000,1.0000,1.0000,1.0000,3\n"
            )
        );
        let j = format_report(&rows, ReportFormat::Json).unwrap();
        assert!(j.contains("\"one_minus_dHplus\""));
        assert!(j.contains("\"n\": 3"));
        let back: Vec<LabeledReport> = serde_json::from_str(&j).unwrap();
        assert_eq!(back, rows);
    }
}
