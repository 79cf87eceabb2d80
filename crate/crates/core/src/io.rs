//! On-disk formats: zero catalogs, solution specs and reports as JSON,
//! residual sweeps as CSV. Files are written to a temporary sibling and then
//! renamed into place.

use crate::error::{Error, Result};
use crate::meanvalue::ResidualReport;
use crate::synthesis::SolutionSpec;
use crate::zeroscan::{Certificate, Zero, ZeroCatalog};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance block embedded in every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
}

impl Meta {
    pub fn new(config: &impl Serialize, seed: Option<u64>) -> Result<Self> {
        Ok(Self {
            tool: TOOL_NAME.to_string(),
            tool_version: TOOL_VERSION.to_string(),
            seed,
            config: serde_json::to_value(config)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroRecord {
    pub re: f64,
    pub im: f64,
    pub mult: u32,
    pub abs_g: f64,
    pub abs_gprime: f64,
    pub isolation_radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogDoc {
    pub schema: u32,
    pub m: u32,
    pub s: u32,
    pub lambda_max: f64,
    pub strip_height: f64,
    pub origin_multiplicity: u32,
    pub origin_isolation_radius: f64,
    pub outer_winding: i32,
    pub zeros: Vec<ZeroRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl CatalogDoc {
    pub fn new(cat: &ZeroCatalog, meta: Option<Meta>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            m: cat.m,
            s: cat.s,
            lambda_max: cat.lambda_max,
            strip_height: cat.strip_height,
            origin_multiplicity: cat.origin_multiplicity,
            origin_isolation_radius: cat.origin_isolation_radius,
            outer_winding: cat.outer_winding,
            zeros: cat
                .zeros
                .iter()
                .map(|z| ZeroRecord {
                    re: z.lambda.re,
                    im: z.lambda.im,
                    mult: z.multiplicity,
                    abs_g: z.certificate.abs_g,
                    abs_gprime: z.certificate.abs_gprime,
                    isolation_radius: z.certificate.isolation_radius,
                })
                .collect(),
            meta,
        }
    }

    pub fn into_catalog(self) -> Result<ZeroCatalog> {
        check_schema(self.schema)?;
        Ok(ZeroCatalog {
            m: self.m,
            s: self.s,
            lambda_max: self.lambda_max,
            strip_height: self.strip_height,
            origin_multiplicity: self.origin_multiplicity,
            origin_isolation_radius: self.origin_isolation_radius,
            outer_winding: self.outer_winding,
            zeros: self
                .zeros
                .into_iter()
                .map(|z| Zero {
                    lambda: Complex64::new(z.re, z.im),
                    multiplicity: z.mult,
                    certificate: Certificate {
                        winding: z.mult as i32,
                        abs_g: z.abs_g,
                        abs_gprime: z.abs_gprime,
                        isolation_radius: z.isolation_radius,
                    },
                })
                .collect(),
        })
    }
}

/// Any serializable body with the schema version and provenance alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub schema: u32,
    #[serde(flatten)]
    pub body: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
}

impl<T> Document<T> {
    pub fn new(body: T, meta: Option<Meta>) -> Self {
        Self { schema: SCHEMA_VERSION, body, meta }
    }
}

fn check_schema(schema: u32) -> Result<()> {
    if schema != SCHEMA_VERSION {
        return Err(Error::Format(format!("unsupported schema version {schema}, expected {SCHEMA_VERSION}")));
    }
    Ok(())
}

/// Writes `bytes` to a temporary file next to `path`, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}

pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json_string(value)?.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_catalog(path: &Path, cat: &ZeroCatalog, meta: Option<Meta>) -> Result<()> {
    write_json(path, &CatalogDoc::new(cat, meta))
}

pub fn read_catalog(path: &Path) -> Result<ZeroCatalog> {
    read_json::<CatalogDoc>(path)?.into_catalog()
}

pub fn write_spec(path: &Path, spec: &SolutionSpec, meta: Option<Meta>) -> Result<()> {
    write_json(path, &Document::new(spec, meta))
}

pub fn read_spec(path: &Path) -> Result<SolutionSpec> {
    let doc: Document<SolutionSpec> = read_json(path)?;
    check_schema(doc.schema)?;
    Ok(doc.body)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub z_re: f64,
    pub z_im: f64,
    pub res_re: f64,
    pub res_im: f64,
    pub abs_res: f64,
    pub quad_err: f64,
}

impl From<&ResidualReport> for ResidualRow {
    fn from(r: &ResidualReport) -> Self {
        Self {
            z_re: r.z.re,
            z_im: r.z.im,
            res_re: r.residual.re,
            res_im: r.residual.im,
            abs_res: r.residual.norm(),
            quad_err: r.quad_error_estimate,
        }
    }
}

/// CSV with `#`-prefixed provenance lines ahead of the header.
pub fn residual_csv(rows: &[ResidualReport], meta: &Meta) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    writeln!(out, "# schema={SCHEMA_VERSION} tool={} version={}", meta.tool, meta.tool_version)?;
    match meta.seed {
        Some(seed) => writeln!(out, "# seed={seed}")?,
        None => writeln!(out, "# seed=none")?,
    }
    writeln!(out, "# config={}", serde_json::to_string(&meta.config)?)?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(ResidualRow::from(r))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_residual_csv(path: &Path, rows: &[ResidualReport], meta: &Meta) -> Result<()> {
    write_atomic(path, &residual_csv(rows, meta)?)
}

pub fn read_residual_csv(path: &Path) -> Result<Vec<ResidualRow>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let mut rows = Vec::new();
    for r in rdr.deserialize() {
        rows.push(r?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chareq::CharacteristicFn;
    use crate::zeroscan::find_zeros;

    #[test]
    fn catalog_round_trip() {
        let cat = find_zeros(&CharacteristicFn::new(2, 1).unwrap(), 15.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cat.json");
        let meta = Meta::new(&serde_json::json!({"m": 2, "s": 1}), Some(9)).unwrap();
        write_catalog(&path, &cat, Some(meta)).unwrap();
        let v: serde_json::Value = read_json(&path).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["meta"]["seed"], 9);
        for key in ["re", "im", "mult", "abs_g", "abs_gprime", "isolation_radius"] {
            assert!(v["zeros"][0].get(key).is_some());
        }
        assert_eq!(read_catalog(&path).unwrap(), cat);
    }

    #[test]
    fn wrong_schema_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(
            &path,
            r#"{"schema":2,"m":1,"s":0,"lambda_max":10,"strip_height":5,"origin_multiplicity":2,
               "origin_isolation_radius":0.5,"outer_winding":2,"zeros":[]}"#,
        )
        .unwrap();
        assert!(matches!(read_catalog(&path), Err(Error::Format(_))));
    }

    #[test]
    fn csv_columns_and_comments() {
        let rep = ResidualReport {
            z: Complex64::new(0.5, -0.25),
            lhs: Complex64::new(1.0, 0.0),
            rhs: Complex64::new(1.0, 1e-12),
            residual: Complex64::new(0.0, -1e-12),
            quad_error_estimate: 3e-13,
            scale: 1.0,
        };
        let meta = Meta::new(&serde_json::json!({"command": "verify"}), Some(1)).unwrap();
        let bytes = residual_csv(&[rep], &meta).unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.starts_with("# schema=1"));
        assert!(text.contains("z_re,z_im,res_re,res_im,abs_res,quad_err"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_residual_csv(&path, &[rep], &meta).unwrap();
        let rows = read_residual_csv(&path).unwrap();
        assert_eq!(rows, vec![ResidualRow::from(&rep)]);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        write_atomic(&path, b"first").unwrap();
        write_atomic(&path, b"second").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"second");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
