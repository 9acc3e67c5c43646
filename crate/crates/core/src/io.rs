//! Matrix files, JSON reports, and on-disk layouts of tasks and models.
//!
//! Binary matrix layout (all integers little endian):
//!
//! | offset | size | content                                  |
//! |--------|------|------------------------------------------|
//! | 0      | 4    | magic `OODM` (`4F 4F 44 4D`)             |
//! | 4      | 1    | version, currently 1                     |
//! | 5      | 1    | dtype: 0 = f32, 1 = f64                  |
//! | 6      | 2    | reserved, written as zero                |
//! | 8      | 8    | rows (u64)                               |
//! | 16     | 8    | cols (u64)                               |
//! | 24     | ...  | row-major payload, `rows * cols` values  |
//!
//! CSV files carry a `c0,c1,...` header and one line per row, with values
//! printed in shortest round-trip form.
//!
//! Files whose extension is `csv` are CSV; everything else is binary. All
//! writes go to a temporary file in the target directory and are renamed
//! into place, so a failed write never leaves a partial file behind.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::baselines::MahalanobisModel;
use crate::error::{Error, Result};
use crate::harness::{LinearModel, ToyConfig, ToyTask};
use crate::matrix::{LabeledDataset, Matrix};

pub const MAGIC: [u8; 4] = *b"OODM";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    fn byte(self) -> u8 {
        match self {
            Dtype::F32 => 0,
            Dtype::F64 => 1,
        }
    }

    fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv,
    Binary(Dtype),
}

impl MatrixFormat {
    /// CSV for `.csv` paths, f64 binary otherwise.
    pub fn for_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => MatrixFormat::Csv,
            _ => MatrixFormat::Binary(Dtype::F64),
        }
    }
}

pub fn encode_binary(m: &Matrix, dtype: Dtype) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + m.as_slice().len() * dtype.size());
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(dtype.byte());
    out.extend_from_slice(&[0, 0]);
    out.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    out.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for &v in m.as_slice() {
        match dtype {
            Dtype::F32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
            Dtype::F64 => out.extend_from_slice(&v.to_le_bytes()),
        }
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<Matrix> {
    if bytes.len() < HEADER_LEN {
        if bytes.len() >= 4 && bytes[..4] != MAGIC {
            return Err(Error::BadMagic(bytes[..4].try_into().expect("4 bytes")));
        }
        return Err(Error::TruncatedPayload {
            expected: HEADER_LEN,
            found: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().expect("4 bytes");
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if bytes[4] != VERSION {
        return Err(Error::UnsupportedVersion(bytes[4]));
    }
    let dtype = match bytes[5] {
        0 => Dtype::F32,
        1 => Dtype::F64,
        other => return Err(Error::UnsupportedDtype(other)),
    };
    let rows = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
    let cols = u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes"));
    let payload = &bytes[HEADER_LEN..];
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(dtype.size() as u64))
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| Error::DimensionMismatch(format!("{rows} x {cols} is too large")))?;
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: payload.len(),
        });
    }
    if payload.len() > expected {
        return Err(Error::TrailingBytes(payload.len() - expected));
    }
    let data = match dtype {
        Dtype::F32 => payload
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
            .collect(),
        Dtype::F64 => payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect(),
    };
    Matrix::new(rows as usize, cols as usize, data)
}

pub fn encode_csv(m: &Matrix) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::MalformedCsv(e.to_string());
    w.write_record((0..m.cols()).map(|c| format!("c{c}"))).map_err(csv_err)?;
    for r in m.iter_rows() {
        w.write_record(r.iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    w.into_inner().map_err(|e| Error::MalformedCsv(e.to_string()))
}

pub fn decode_csv(bytes: &[u8]) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = rdr.headers().map_err(|e| Error::MalformedCsv(e.to_string()))?.clone();
    for (i, name) in header.iter().enumerate() {
        if name != format!("c{i}") {
            return Err(Error::MalformedCsv(format!("header field {i} is `{name}`, expected `c{i}`")));
        }
    }
    let cols = header.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::MalformedCsv(e.to_string()))?;
        if rec.len() != cols {
            return Err(Error::MalformedCsv(format!(
                "row {line} has {} fields, header has {cols}",
                rec.len()
            )));
        }
        for field in rec.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| Error::MalformedCsv(format!("row {line}: `{field}` is not a number")))?;
            data.push(v);
        }
        rows += 1;
    }
    Matrix::new(rows, cols, data)
}

/// Writes `bytes` to a temporary sibling of `path`, then renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingArtifact(path.display().to_string()),
        _ => Error::Io(e),
    })
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let bytes = read_bytes(path)?;
    match MatrixFormat::for_path(path) {
        MatrixFormat::Csv => decode_csv(&bytes),
        MatrixFormat::Binary(_) => decode_binary(&bytes),
    }
}

pub fn write_matrix(path: &Path, m: &Matrix, format: MatrixFormat) -> Result<()> {
    let bytes = match format {
        MatrixFormat::Csv => encode_csv(m)?,
        MatrixFormat::Binary(dtype) => encode_binary(m, dtype),
    };
    write_atomic(path, &bytes)
}

/// Writes with the format implied by the file extension.
pub fn save_matrix(path: &Path, m: &Matrix) -> Result<()> {
    write_matrix(path, m, MatrixFormat::for_path(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_slice(&read_bytes(path)?)?)
}

pub const TASK_FILES: [&str; 7] = [
    "train_inputs.bin",
    "train_labels.bin",
    "test_in_inputs.bin",
    "test_in_labels.bin",
    "test_ood_inputs.bin",
    "prototypes_in.bin",
    "prototypes_ood.bin",
];
pub const TASK_SIDECAR: &str = "task.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSidecar {
    pub config: ToyConfig,
    /// Smallest angle (radians) between an OOD and an in-distribution prototype.
    pub min_ood_angle: f64,
}

pub fn save_task(dir: &Path, task: &ToyTask) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mats = [
        task.train.inputs(),
        task.train.labels(),
        task.test_in.inputs(),
        task.test_in.labels(),
        &task.test_ood_inputs,
        &task.prototypes_in,
        &task.prototypes_ood,
    ];
    for (name, m) in TASK_FILES.iter().zip(mats) {
        write_matrix(&dir.join(name), m, MatrixFormat::Binary(Dtype::F64))?;
    }
    write_json(
        &dir.join(TASK_SIDECAR),
        &TaskSidecar {
            config: task.config.clone(),
            min_ood_angle: task.min_ood_angle(),
        },
    )
}

pub fn load_task(dir: &Path) -> Result<ToyTask> {
    let sidecar: TaskSidecar = read_json(&dir.join(TASK_SIDECAR))?;
    let mut mats = TASK_FILES
        .iter()
        .map(|f| read_matrix(&dir.join(f)))
        .collect::<Result<Vec<_>>>()?
        .into_iter();
    let mut next = || mats.next().expect("seven task files");
    let train = LabeledDataset::new(next(), next())?;
    let test_in = LabeledDataset::new(next(), next())?;
    Ok(ToyTask {
        train,
        test_in,
        test_ood_inputs: next(),
        prototypes_in: next(),
        prototypes_ood: next(),
        config: sidecar.config,
    })
}

pub fn save_model(path: &Path, model: &LinearModel) -> Result<()> {
    write_matrix(path, &model.to_matrix(), MatrixFormat::Binary(Dtype::F64))
}

pub fn load_model(path: &Path) -> Result<LinearModel> {
    LinearModel::from_matrix(&read_matrix(path)?)
}

/// Stores a fitted Mahalanobis model as `means.bin`, `precision.bin`, and a
/// 1 x 1 `reg.bin` inside `dir`.
pub fn save_mahalanobis(dir: &Path, model: &MahalanobisModel) -> Result<()> {
    fs::create_dir_all(dir)?;
    let bin = MatrixFormat::Binary(Dtype::F64);
    write_matrix(&dir.join("means.bin"), model.means(), bin)?;
    write_matrix(&dir.join("precision.bin"), model.precision(), bin)?;
    write_matrix(&dir.join("reg.bin"), &Matrix::new(1, 1, vec![model.reg()])?, bin)
}

pub fn load_mahalanobis(dir: &Path) -> Result<MahalanobisModel> {
    let reg = read_matrix(&dir.join("reg.bin"))?;
    if reg.shape() != (1, 1) {
        return Err(Error::DimensionMismatch("reg.bin must be 1 x 1".into()));
    }
    MahalanobisModel::from_parts(
        read_matrix(&dir.join("means.bin"))?,
        read_matrix(&dir.join("precision.bin"))?,
        reg.get(0, 0),
    )
}
