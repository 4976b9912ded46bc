//! JSON file formats. Every file carries `"schema": "convforge/v1"`; loads
//! reject anything else before touching the payload. Writes are atomic
//! (temp file next to the destination, then rename) and end with a newline.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::approx::ErrorReport;
use crate::error::{Error, Result};
use crate::network::{DeepCnn, Layer, NetworkConfig, RidgeExpansion};
use crate::signal::FiniteSequence;
use crate::symbolic::FactorizationResult;

pub const SCHEMA: &str = "convforge/v1";

fn check_schema(found: &str) -> Result<()> {
    if found == SCHEMA {
        Ok(())
    } else {
        Err(Error::SchemaMismatch { found: found.to_string() })
    }
}

/// A finite sequence on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceFile {
    pub schema: String,
    #[serde(flatten)]
    pub sequence: FiniteSequence<f64>,
}

/// A factorization and the filter length it was computed for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationFile {
    pub schema: String,
    pub s: usize,
    #[serde(flatten)]
    pub result: FactorizationResult<f64>,
}

/// A ridge expansion on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeFile {
    pub schema: String,
    #[serde(flatten)]
    pub ridge: RidgeExpansion<f64>,
}

/// A full network on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkFile {
    pub schema: String,
    pub config: NetworkConfig,
    pub layers: Vec<Layer<f64>>,
    pub output_coeffs: Vec<f64>,
    #[serde(rename = "B_ledger")]
    pub b_ledger: Vec<f64>,
}

/// Evaluation inputs: one point per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointsFile {
    pub schema: String,
    pub points: Vec<Vec<f64>>,
}

/// Evaluation outputs, aligned with the input points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationsFile {
    pub schema: String,
    pub values: Vec<f64>,
}

/// Rate-study report: the study inputs and one row per depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReportFile {
    pub schema: String,
    pub target: String,
    pub d: usize,
    pub s: usize,
    pub seed: u64,
    pub rows: Vec<ErrorReport<f64>>,
}

/// Realization check: the largest deviation found and the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReportFile {
    pub schema: String,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub scale: f64,
    pub max_abs_deviation: f64,
    pub pass: bool,
}

pub fn read_json<V: DeserializeOwned>(path: &Path) -> Result<V> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Serializes pretty-printed with a trailing newline, writing through a
/// sibling temp file so readers never observe a half-written file.
pub fn write_json<V: Serialize>(path: &Path, value: &V) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    let mut tmp_name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{}: not a file path", path.display())))?
        .to_os_string();
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, &bytes).map_err(|e| Error::Io(format!("{}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

pub fn load_sequence(path: &Path) -> Result<FiniteSequence<f64>> {
    let file: SequenceFile = read_json(path)?;
    check_schema(&file.schema)?;
    Ok(file.sequence)
}

pub fn save_sequence(path: &Path, sequence: &FiniteSequence<f64>) -> Result<()> {
    write_json(path, &SequenceFile { schema: SCHEMA.into(), sequence: sequence.clone() })
}

pub fn load_factorization(path: &Path) -> Result<FactorizationFile> {
    let file: FactorizationFile = read_json(path)?;
    check_schema(&file.schema)?;
    Ok(file)
}

pub fn save_factorization(path: &Path, s: usize, result: &FactorizationResult<f64>) -> Result<()> {
    write_json(path, &FactorizationFile { schema: SCHEMA.into(), s, result: result.clone() })
}

/// Loads and validates a ridge expansion.
pub fn load_ridge(path: &Path) -> Result<RidgeExpansion<f64>> {
    let file: RidgeFile = read_json(path)?;
    check_schema(&file.schema)?;
    file.ridge.validate()?;
    Ok(file.ridge)
}

pub fn save_ridge(path: &Path, ridge: &RidgeExpansion<f64>) -> Result<()> {
    write_json(path, &RidgeFile { schema: SCHEMA.into(), ridge: ridge.clone() })
}

/// Loads a network and re-runs the structural validation.
pub fn load_network(path: &Path) -> Result<DeepCnn<f64>> {
    let file: NetworkFile = read_json(path)?;
    check_schema(&file.schema)?;
    DeepCnn::new(file.config, file.layers, file.output_coeffs, file.b_ledger)
}

pub fn save_network(path: &Path, net: &DeepCnn<f64>) -> Result<()> {
    let file = NetworkFile {
        schema: SCHEMA.into(),
        config: net.config().clone(),
        layers: net.layers().to_vec(),
        output_coeffs: net.output_coeffs().to_vec(),
        b_ledger: net.b_ledger().to_vec(),
    };
    write_json(path, &file)
}

pub fn load_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let file: PointsFile = read_json(path)?;
    check_schema(&file.schema)?;
    Ok(file.points)
}

pub fn save_points(path: &Path, points: &[Vec<f64>]) -> Result<()> {
    write_json(path, &PointsFile { schema: SCHEMA.into(), points: points.to_vec() })
}

pub fn save_evaluations(path: &Path, values: &[f64]) -> Result<()> {
    write_json(path, &EvaluationsFile { schema: SCHEMA.into(), values: values.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::build_network;
    use crate::symbolic::factorize_mask;

    fn tmp_path(name: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("convforge-io-{}-{name}", std::process::id()));
        p
    }

    #[test]
    fn sequence_file_roundtrip() {
        let path = tmp_path("seq.json");
        let seq = FiniteSequence::new(vec![1.0, -0.5, 0.0, 2.0]);
        save_sequence(&path, &seq).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"schema\": \"convforge/v1\""));
        assert!(text.ends_with('\n'));
        assert_eq!(load_sequence(&path).unwrap(), seq);
        fs::remove_file(&path).unwrap();
    }

    #[test]
    fn schema_mismatch_is_rejected() {
        let path = tmp_path("bad-schema.json");
        fs::write(&path, r#"{"schema":"other/v2","coeffs":[1.0],"support_hint":0}"#).unwrap();
        assert_eq!(
            load_sequence(&path).unwrap_err(),
            Error::SchemaMismatch { found: "other/v2".into() }
        );
        fs::remove_file(&path).unwrap();
    }

    #[test]
    fn factorization_file_roundtrip() {
        let path = tmp_path("fact.json");
        let w = FiniteSequence::new(vec![1.0, 3.0, 3.0, 1.0]);
        let fact = factorize_mask(&w, 2, 1e-10).unwrap();
        save_factorization(&path, 2, &fact).unwrap();
        let back = load_factorization(&path).unwrap();
        assert_eq!(back.s, 2);
        assert_eq!(back.result.depth, fact.depth);
        assert_eq!(back.result.masks, fact.masks);
        fs::remove_file(&path).unwrap();
    }

    #[test]
    fn network_file_roundtrip_revalidates() {
        let ridge = RidgeExpansion::new(
            0.1,
            vec![0.5, -0.25],
            1.0,
            vec![crate::network::RidgeTerm { beta: 1.0, alpha: vec![0.5, 0.5], t: 0.5 }],
        )
        .unwrap();
        let net = build_network(&ridge, 2, 4, 1.0).unwrap();
        let path = tmp_path("net.json");
        save_network(&path, &net).unwrap();
        let back = load_network(&path).unwrap();
        assert_eq!(back, net);

        // Corrupt a width and confirm the load fails.
        let mut file: NetworkFile = read_json(&path).unwrap();
        file.config.widths[1] += 1;
        write_json(&path, &file).unwrap();
        assert!(load_network(&path).is_err());
        fs::remove_file(&path).unwrap();
    }

    #[test]
    fn ridge_file_load_validates_norms() {
        let path = tmp_path("ridge.json");
        fs::write(
            &path,
            r#"{"schema":"convforge/v1","beta0":0.0,"alpha0":[1.0],"v":1.0,
               "terms":[{"beta":0.5,"alpha":[0.9],"t":0.5}]}"#,
        )
        .unwrap();
        assert!(matches!(load_ridge(&path).unwrap_err(), Error::InvalidExpansion(_)));
        fs::remove_file(&path).unwrap();
    }

    #[test]
    fn missing_file_reports_io_error() {
        let err = load_sequence(Path::new("/nonexistent/conv.json")).unwrap_err();
        assert!(matches!(err, Error::Io(_)));
    }
}
