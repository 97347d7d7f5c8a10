//! CSV series, JSON documents and atomic file output.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sagnac_core::signal::{Polarity, PolarizationSeries, Provenance as SeriesProvenance, SeriesRow};

use crate::error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Stamp carried by every output file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
}

impl Provenance {
    pub fn new(config_sha256: &str, seed: Option<u64>) -> Self {
        Self {
            tool: "sagnac".into(),
            version: VERSION.into(),
            config_sha256: config_sha256.into(),
            seed,
        }
    }

    /// `# key: value` lines placed above a CSV header.
    pub fn csv_header(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# tool: {} {}\n# config_sha256: {}\n# seed: {}\n",
            self.tool, self.version, self.config_sha256, seed
        )
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let wrap = |source| Error::Output { path: path.to_path_buf(), source };
    std::fs::create_dir_all(dir).map_err(wrap)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(wrap)?;
    tmp.write_all(bytes).map_err(wrap)?;
    tmp.as_file().sync_all().map_err(wrap)?;
    tmp.persist(path).map_err(|e| wrap(e.error))?;
    Ok(())
}

/// JSON object `{"provenance": …, <fields of body>}`.
pub fn write_json<T: Serialize>(path: &Path, provenance: &Provenance, body: &T) -> Result<()> {
    let mut value = serde_json::to_value(body).map_err(|e| Error::Config(e.to_string()))?;
    let object = value
        .as_object_mut()
        .ok_or_else(|| Error::Config("JSON body must be an object".into()))?;
    let mut out = serde_json::Map::new();
    out.insert("provenance".into(), serde_json::to_value(provenance).expect("plain struct"));
    out.append(object);
    let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(out)).expect("valid JSON value");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// CSV with the provenance block, a header row and one record per row.
pub fn write_csv<R: Serialize>(path: &Path, provenance: &Provenance, rows: &[R]) -> Result<()> {
    let mut buf = provenance.csv_header().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in rows {
            w.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Output { path: path.to_path_buf(), source: e })?;
    }
    write_atomic(path, &buf)
}

/// One line of a polarisation series file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub lambda_ang: f64,
    pub value: f64,
    pub variance: f64,
    pub n_up: Option<f64>,
    pub n_down: Option<f64>,
    pub polarity: i8,
}

pub fn write_series(path: &Path, provenance: &Provenance, series: &PolarizationSeries) -> Result<()> {
    let polarity = series.polarity().as_i8();
    let rows: Vec<SeriesRecord> = series
        .rows()
        .iter()
        .map(|r| SeriesRecord {
            lambda_ang: r.lambda_ang,
            value: r.value,
            variance: r.variance,
            n_up: r.n_up,
            n_down: r.n_down,
            polarity,
        })
        .collect();
    write_csv(path, provenance, &rows)
}

/// Reads a series file; a `# seed:` line marks it synthetic.
pub fn read_series(path: &Path) -> Result<PolarizationSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::input(path, e))?;
    let seed = text
        .lines()
        .take_while(|l| l.starts_with('#'))
        .find_map(|l| l.strip_prefix("# seed:").and_then(|s| s.trim().parse::<u64>().ok()));
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut polarity = None;
    for (i, rec) in reader.deserialize::<SeriesRecord>().enumerate() {
        let rec = rec.map_err(|e| Error::input(path, e))?;
        let p = Polarity::from_i8(rec.polarity)
            .ok_or_else(|| Error::input(path, format!("row {}: polarity must be -1, 0 or 1", i + 1)))?;
        if *polarity.get_or_insert(p) != p {
            return Err(Error::input(path, "mixed polarities in one series"));
        }
        rows.push(SeriesRow {
            lambda_ang: rec.lambda_ang,
            value: rec.value,
            variance: rec.variance,
            n_up: rec.n_up,
            n_down: rec.n_down,
        });
    }
    let provenance = seed.map_or(SeriesProvenance::Measured, |seed| SeriesProvenance::Synthetic { seed });
    PolarizationSeries::new(rows, polarity.unwrap_or_default(), provenance).map_err(|e| Error::input(path, e))
}

/// Restricts a series to `[min, max]` Å.
pub fn window_series(series: &PolarizationSeries, window: Option<[f64; 2]>) -> Result<PolarizationSeries> {
    let Some([lo, hi]) = window else {
        return Ok(series.clone());
    };
    let rows: Vec<SeriesRow> = series
        .rows()
        .iter()
        .filter(|r| r.lambda_ang >= lo && r.lambda_ang <= hi)
        .copied()
        .collect();
    PolarizationSeries::new(rows, series.polarity(), series.provenance())
        .map_err(|e| Error::Config(format!("analysis window: {e}")))
}

/// `dir/name`
pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
