//! Matrix JSON and cloud CSV formats, hashing and atomic writes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use pseudospec_core::approx::{CloudKind, CloudPoint, EtaMode, PointCloud};
use pseudospec_core::numkernel::{Complex64, DenseMatrix};
use pseudospec_core::structures::{is_member, StructurePattern};
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorInfo {
    pub family: String,
    pub seed: u64,
    pub parameters: BTreeMap<String, Value>,
}

/// On-disk matrix: `n`, row-major `[re, im]` entries, optional metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    pub n: usize,
    pub entries: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructurePattern>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorInfo>,
}

impl MatrixFile {
    pub fn from_matrix(
        a: &DenseMatrix,
        structure: Option<StructurePattern>,
        generator: Option<GeneratorInfo>,
    ) -> Self {
        Self {
            n: a.dim(),
            entries: a.row_major().into_iter().map(|z| [z.re, z.im]).collect(),
            structure,
            generator,
        }
    }

    /// Checks the entry count and any declared structure, then builds the matrix.
    pub fn to_matrix(&self) -> Result<DenseMatrix> {
        if self.entries.len() != self.n * self.n {
            return Err(CliError::Validation(format!(
                "expected {} entries for n = {}, found {}",
                self.n * self.n,
                self.n,
                self.entries.len()
            )));
        }
        let values: Vec<Complex64> = self
            .entries
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        let a = DenseMatrix::from_row_major(self.n, &values)?;
        if let Some(s) = &self.structure {
            if s.dim() != self.n {
                return Err(CliError::Validation(format!(
                    "structure {} has dimension {}, matrix has {}",
                    s.describe(),
                    s.dim(),
                    self.n
                )));
            }
            if !is_member(&a, s)? {
                return Err(CliError::Validation(format!(
                    "matrix is not a member of its declared structure {}",
                    s.describe()
                )));
            }
            if s.is_real() && !a.is_real(0.0) {
                return Err(CliError::Validation(format!(
                    "structure {} is declared real but entries are complex",
                    s.describe()
                )));
            }
        }
        Ok(a)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        to_json_bytes(self)
    }
}

/// A matrix file as read from disk.
#[derive(Clone, Debug)]
pub struct LoadedMatrix {
    pub file: MatrixFile,
    pub matrix: DenseMatrix,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn load_matrix(path: &Path) -> Result<LoadedMatrix> {
    let bytes = read_bytes(path)?;
    let file: MatrixFile = serde_json::from_slice(&bytes).map_err(|e| CliError::parse(path, e))?;
    let matrix = file.to_matrix().map_err(|e| match e {
        CliError::Validation(m) => CliError::parse(path, m),
        other => other,
    })?;
    Ok(LoadedMatrix {
        file,
        matrix,
        sha256: sha256_hex(&bytes),
    })
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Float text with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Indented JSON with 17-digit floats. Arrays nested in arrays, and arrays
/// below the top-level object, stay on one line.
#[derive(Default)]
struct SigFormatter {
    // (is_array, inline, has_value)
    stack: Vec<(bool, bool, bool)>,
}

impl SigFormatter {
    fn indent(&self) -> usize {
        self.stack.iter().filter(|f| !f.1).count()
    }

    fn begin<W: ?Sized + io::Write>(&mut self, w: &mut W, array: bool) -> io::Result<()> {
        let inline = match self.stack.last() {
            Some(&(parent_array, parent_inline, _)) => {
                parent_inline || (array && (parent_array || self.stack.len() >= 2))
            }
            None => false,
        };
        self.stack.push((array, inline, false));
        w.write_all(if array { b"[" } else { b"{" })
    }

    fn end<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        let (array, inline, has_value) = self.stack.pop().unwrap_or_default();
        if has_value && !inline {
            w.write_all(b"\n")?;
            w.write_all("  ".repeat(self.indent()).as_bytes())?;
        }
        w.write_all(if array { b"]" } else { b"}" })
    }

    fn item<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        let indent = self.indent();
        let Some(top) = self.stack.last_mut() else {
            return Ok(());
        };
        top.2 = true;
        if top.1 {
            if !first {
                w.write_all(b", ")?;
            }
            return Ok(());
        }
        w.write_all(if first { b"\n" } else { b",\n" })?;
        w.write_all("  ".repeat(indent).as_bytes())
    }
}

impl Formatter for SigFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.begin(w, true)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.end(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.item(w, first)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.begin(w, false)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.end(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.item(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        w.write_all(b": ")
    }
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFormatter::default());
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::Validation(format!("serialization failed: {e}")))?;
    out.push(b'\n');
    Ok(out)
}

pub const CLOUD_COLUMNS: [&str; 5] = ["re", "im", "source_eigen", "angle_index", "sample_index"];

/// Cloud CSV: `# key=value` header lines, a column header, one row per point.
#[derive(Clone, Debug, PartialEq)]
pub struct CloudFile {
    pub cloud: PointCloud,
    pub seed: u64,
    pub eta: EtaMode,
    pub matrix_sha256: String,
}

fn eta_tag(eta: EtaMode) -> &'static str {
    match eta {
        EtaMode::Unimodular => "unimodular",
        EtaMode::Real => "real",
    }
}

fn parse_kind(s: &str) -> Option<CloudKind> {
    [
        CloudKind::WilkinsonSweep,
        CloudKind::RandomBaseline,
        CloudKind::Trajectory,
    ]
    .into_iter()
    .find(|k| k.tag() == s)
}

impl CloudFile {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let c = &self.cloud;
        let pattern = serde_json::to_string(&c.pattern)
            .map_err(|e| CliError::Validation(format!("serialization failed: {e}")))?;
        let mut head = String::new();
        let _ = writeln!(head, "# kind={}", c.kind.tag());
        let _ = writeln!(head, "# epsilon={}", fmt_f64(c.epsilon));
        let _ = writeln!(head, "# pattern={pattern}");
        let _ = writeln!(head, "# angles={}", c.angles);
        let _ = writeln!(head, "# samples={}", c.samples);
        let _ = writeln!(head, "# seed={}", self.seed);
        let _ = writeln!(head, "# eta={}", eta_tag(self.eta));
        let _ = writeln!(head, "# points={}", c.len());
        let _ = writeln!(head, "# matrix_sha256={}", self.matrix_sha256);
        let mut w = csv::WriterBuilder::new().from_writer(head.into_bytes());
        let csv_err = |e: csv::Error| CliError::Validation(format!("csv: {e}"));
        w.write_record(CLOUD_COLUMNS).map_err(csv_err)?;
        for p in &c.points {
            w.write_record([
                fmt_f64(p.z.re),
                fmt_f64(p.z.im),
                p.source_eigen.to_string(),
                p.angle_index.to_string(),
                p.sample_index.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.into_inner()
            .map_err(|e| CliError::Validation(format!("csv: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes()?)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = read_bytes(path)?;
        Self::parse(&bytes).map_err(|m| CliError::parse(path, m))
    }

    fn parse(bytes: &[u8]) -> std::result::Result<Self, String> {
        let text = std::str::from_utf8(bytes).map_err(|e| e.to_string())?;
        let mut header = BTreeMap::new();
        for line in text.lines().take_while(|l| l.starts_with('#')) {
            let body = line.trim_start_matches('#').trim();
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| format!("malformed header line '{line}'"))?;
            header.insert(k.trim().to_string(), v.trim().to_string());
        }
        let get = |k: &str| {
            header
                .get(k)
                .map(String::as_str)
                .ok_or_else(|| format!("missing header '{k}'"))
        };
        let num = |k: &str| -> std::result::Result<usize, String> {
            get(k)?.parse().map_err(|e| format!("header '{k}': {e}"))
        };
        let kind = parse_kind(get("kind")?).ok_or("unknown cloud kind")?;
        let epsilon: f64 = get("epsilon")?.parse().map_err(|e| format!("header 'epsilon': {e}"))?;
        let pattern: StructurePattern =
            serde_json::from_str(get("pattern")?).map_err(|e| format!("header 'pattern': {e}"))?;
        let angles = num("angles")?;
        let samples = num("samples")?;
        let points_declared = num("points")?;
        let seed: u64 = get("seed")?.parse().map_err(|e| format!("header 'seed': {e}"))?;
        let eta = match get("eta")? {
            "unimodular" => EtaMode::Unimodular,
            "real" => EtaMode::Real,
            other => return Err(format!("unknown eta mode '{other}'")),
        };
        let matrix_sha256 = get("matrix_sha256")?.to_string();

        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(bytes);
        let cols = reader.headers().map_err(|e| e.to_string())?;
        if cols.iter().ne(CLOUD_COLUMNS) {
            return Err(format!("expected columns {}", CLOUD_COLUMNS.join(",")));
        }
        let mut points = Vec::with_capacity(points_declared);
        for (row, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| e.to_string())?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let f = |i: usize| -> std::result::Result<f64, String> {
                field(i).parse().map_err(|e| format!("row {row}: {e}"))
            };
            let u = |i: usize| -> std::result::Result<usize, String> {
                field(i).parse().map_err(|e| format!("row {row}: {e}"))
            };
            points.push(CloudPoint {
                z: Complex64::new(f(0)?, f(1)?),
                source_eigen: u(2)?,
                angle_index: u(3)?,
                sample_index: u(4)?,
            });
        }
        if points.len() != points_declared {
            return Err(format!(
                "header declares {points_declared} points, found {} rows",
                points.len()
            ));
        }
        let n = pattern.dim();
        let per_run = n * angles;
        let consistent = match kind {
            CloudKind::WilkinsonSweep => per_run > 0 && points.len() % per_run == 0,
            CloudKind::RandomBaseline | CloudKind::Trajectory => points.len() == per_run * samples,
        };
        if !consistent {
            return Err(format!(
                "{} rows do not fit n = {n}, angles = {angles}, samples = {samples}",
                points.len()
            ));
        }
        Ok(Self {
            cloud: PointCloud {
                points,
                epsilon,
                pattern,
                kind,
                angles,
                samples,
            },
            seed,
            eta,
            matrix_sha256,
        })
    }
}
