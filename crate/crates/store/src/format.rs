//! Result directory format.
//!
//! A result is a directory holding two UTF-8 files:
//!
//! * `metadata.json`: scenario id, seed, member count, creation time, start
//!   date, horizon and the dimension labels (percentiles, districts, age
//!   groups, compartments).
//! * `results.ndjson`: one JSON object per line and per
//!   `(percentile, district, day)`, in that nesting order, with the national
//!   aggregate `00000` after the districts:
//!   `{"percentile":5,"district":"05315","day":0,"values":[[..8..],..],"total":[..8..]}`.
//!   `values` has one row per age group, `total` is the all-ages row; the
//!   eight entries follow the compartment order of the metadata.
//!
//! Numbers are written in shortest round-trip form and lines end with `\n`.
//! `FORMAT.md` at the repository root is the normative description.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use esid_core::ensemble::{ResultMetadata, SimulationResult, PERCENTILES};
use esid_core::graph::{is_district_key, NATIONAL_ID};
use esid_core::model::{Compartment, NUM_COMPARTMENTS};
use serde::{Deserialize, Serialize};

use crate::error::{Result, StoreError};

pub const METADATA_FILE: &str = "metadata.json";
pub const RESULTS_FILE: &str = "results.ndjson";
pub const FORMAT_NAME: &str = "esid-result";
pub const FORMAT_VERSION: u32 = 1;
pub const DIMENSIONS: [&str; 5] = ["percentile", "district", "day", "age_group", "compartment"];

#[derive(Serialize, Deserialize)]
struct MetadataFile {
    format: String,
    version: u32,
    dimensions: Vec<String>,
    #[serde(flatten)]
    metadata: ResultMetadata,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    percentile: u8,
    district: &'a str,
    day: usize,
    values: Vec<&'a [f64]>,
    total: &'a [f64],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordIn {
    percentile: u8,
    district: String,
    day: usize,
    values: Vec<Vec<f64>>,
    total: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    MissingMetadata,
    Schema,
    Truncated,
    Shape,
    MissingRecord,
    DuplicateRecord,
    Negative,
    PercentileOrder,
    InitialMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl Violation {
    fn new(kind: ViolationKind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub records: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Writes `result` into directory `dest`, creating it if needed.
pub fn save_result(result: &SimulationResult, dest: &Path) -> Result<()> {
    let meta = &result.metadata;
    let present = vec![true; meta.district_slots() * meta.days() * PERCENTILES.len()];
    let problems = check_values(meta, result.values(), &present);
    if !problems.is_empty() {
        return Err(StoreError::Validation(problems));
    }

    fs::create_dir_all(dest).map_err(|e| StoreError::io(dest, e))?;
    let meta_path = dest.join(METADATA_FILE);
    let file = MetadataFile {
        format: FORMAT_NAME.into(),
        version: FORMAT_VERSION,
        dimensions: DIMENSIONS.iter().map(|d| d.to_string()).collect(),
        metadata: meta.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| StoreError::json(&meta_path, e))?;
    text.push('\n');
    fs::write(&meta_path, text).map_err(|e| StoreError::io(&meta_path, e))?;

    let path = dest.join(RESULTS_FILE);
    let f = File::create(&path).map_err(|e| StoreError::io(&path, e))?;
    let mut w = BufWriter::new(f);
    let groups = meta.age_groups.len();
    for (p, &percentile) in PERCENTILES.iter().enumerate() {
        for d in 0..meta.district_slots() {
            for day in 0..meta.days() {
                let block = result.block(p, d, day);
                let record = RecordOut {
                    percentile,
                    district: meta.district_id(d),
                    day,
                    values: block[..groups * NUM_COMPARTMENTS].chunks(NUM_COMPARTMENTS).collect(),
                    total: &block[groups * NUM_COMPARTMENTS..],
                };
                serde_json::to_writer(&mut w, &record).map_err(|e| StoreError::json(&path, e))?;
                w.write_all(b"\n").map_err(|e| StoreError::io(&path, e))?;
            }
        }
    }
    w.flush().map_err(|e| StoreError::io(&path, e))?;
    Ok(())
}

/// Reads a result directory, rejecting anything [`validate_format`] would flag.
pub fn load_result(src: &Path) -> Result<SimulationResult> {
    let scan = scan(src);
    let Some(meta) = scan.metadata else {
        return Err(match scan.violations.first() {
            Some(v) if v.kind == ViolationKind::MissingMetadata => StoreError::Format("missing metadata".into()),
            Some(v) => StoreError::Format(v.message.clone()),
            None => StoreError::Format("missing metadata".into()),
        });
    };
    if let Some(v) = scan.violations.iter().find(|v| v.kind == ViolationKind::Schema) {
        return Err(StoreError::Format(v.message.clone()));
    }
    if let Some(v) = scan.violations.iter().find(|v| v.kind == ViolationKind::Shape) {
        return Err(StoreError::LengthMismatch {
            what: "values in a record",
            expected: meta.block_len(),
            actual: v.actual.unwrap_or(0),
        });
    }
    if scan.violations.iter().any(|v| {
        matches!(
            v.kind,
            ViolationKind::Truncated | ViolationKind::MissingRecord | ViolationKind::DuplicateRecord
        )
    }) {
        return Err(StoreError::LengthMismatch {
            what: "records",
            expected: scan.expected_records,
            actual: scan.records,
        });
    }
    if !scan.violations.is_empty() {
        return Err(StoreError::Validation(scan.violations.into_iter().map(|v| v.violation).collect()));
    }
    Ok(SimulationResult::from_parts(meta, scan.values)?)
}

/// Checks a result directory and lists every violation found.
pub fn validate_format(src: &Path) -> ValidationReport {
    let scan = scan(src);
    ValidationReport {
        records: scan.records,
        violations: scan.violations.into_iter().map(|v| v.violation).collect(),
    }
}

struct Found {
    violation: Violation,
    actual: Option<usize>,
}

impl std::ops::Deref for Found {
    type Target = Violation;
    fn deref(&self) -> &Violation {
        &self.violation
    }
}

impl From<Violation> for Found {
    fn from(v: Violation) -> Self {
        Found { violation: v, actual: None }
    }
}

struct Scan {
    metadata: Option<ResultMetadata>,
    values: Vec<f64>,
    records: usize,
    expected_records: usize,
    violations: Vec<Found>,
}

fn read_metadata(src: &Path) -> std::result::Result<ResultMetadata, Violation> {
    let path = src.join(METADATA_FILE);
    let text = fs::read_to_string(&path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            Violation::new(ViolationKind::MissingMetadata, format!("missing metadata: {} not found", path.display()))
        } else {
            Violation::new(ViolationKind::MissingMetadata, format!("missing metadata: {}: {e}", path.display()))
        }
    })?;
    let file: MetadataFile = serde_json::from_str(&text)
        .map_err(|e| Violation::new(ViolationKind::Schema, format!("{METADATA_FILE}: {e}")))?;
    let schema = |msg: String| Violation::new(ViolationKind::Schema, format!("{METADATA_FILE}: {msg}"));
    if file.format != FORMAT_NAME || file.version != FORMAT_VERSION {
        return Err(schema(format!(
            "unsupported format '{}' version {}",
            file.format, file.version
        )));
    }
    if file.dimensions != DIMENSIONS {
        return Err(schema(format!("dimensions must be {DIMENSIONS:?}")));
    }
    let m = file.metadata;
    if m.percentiles != PERCENTILES {
        return Err(schema(format!("percentiles must be {PERCENTILES:?}")));
    }
    if m.compartments != Compartment::ALL {
        return Err(schema("compartments must be S, E, C, I, H, U, R, D".into()));
    }
    if m.num_days < 1 || m.members < 1 {
        return Err(schema("num_days and members must be at least 1".into()));
    }
    let mut ids = BTreeSet::new();
    for d in &m.districts {
        if !is_district_key(&d.id) || d.id == NATIONAL_ID || !ids.insert(d.id.as_str()) {
            return Err(schema(format!("invalid or duplicate district id '{}'", d.id)));
        }
    }
    let labels: BTreeSet<&str> = m.age_groups.iter().map(String::as_str).collect();
    if m.age_groups.is_empty() || labels.len() != m.age_groups.len() || labels.contains("total") {
        return Err(schema("age group labels must be non-empty, unique and not 'total'".into()));
    }
    Ok(m)
}

fn scan(src: &Path) -> Scan {
    let mut out = Scan {
        metadata: None,
        values: Vec::new(),
        records: 0,
        expected_records: 0,
        violations: Vec::new(),
    };
    let meta = match read_metadata(src) {
        Ok(m) => m,
        Err(v) => {
            out.violations.push(v.into());
            return out;
        }
    };
    let groups = meta.age_groups.len();
    let slots = PERCENTILES.len() * meta.district_slots() * meta.days();
    out.expected_records = slots;
    out.values = vec![0.0; meta.len()];
    let mut present = vec![false; slots];

    let path = src.join(RESULTS_FILE);
    let file = match File::open(&path) {
        Ok(f) => f,
        Err(e) => {
            out.violations.push(Violation::new(ViolationKind::Schema, format!("{RESULTS_FILE}: {e}")).into());
            out.metadata = Some(meta);
            return out;
        }
    };
    let mut reader = BufReader::new(file);
    let mut line = String::new();
    let mut line_no = 0usize;
    loop {
        line.clear();
        match reader.read_line(&mut line) {
            Ok(0) => break,
            Ok(_) => {}
            Err(e) => {
                out.violations.push(
                    Violation::new(ViolationKind::Schema, format!("{RESULTS_FILE} line {}: {e}", line_no + 1)).into(),
                );
                break;
            }
        }
        line_no += 1;
        let complete = line.ends_with('\n');
        let text = line.trim_end_matches(['\n', '\r']);
        if text.is_empty() {
            continue;
        }
        let rec: RecordIn = match serde_json::from_str(text) {
            Ok(r) => r,
            Err(e) => {
                let kind = if complete { ViolationKind::Schema } else { ViolationKind::Truncated };
                out.violations.push(Violation::new(kind, format!("{RESULTS_FILE} line {line_no}: {e}")).into());
                continue;
            }
        };
        out.records += 1;
        let Some(p) = PERCENTILES.iter().position(|q| *q == rec.percentile) else {
            out.violations.push(
                Violation::new(
                    ViolationKind::Schema,
                    format!("line {line_no}: unknown percentile {}", rec.percentile),
                )
                .into(),
            );
            continue;
        };
        let Some(d) = meta.district_slot(&rec.district) else {
            out.violations.push(
                Violation::new(ViolationKind::Schema, format!("line {line_no}: unknown district '{}'", rec.district))
                    .into(),
            );
            continue;
        };
        if rec.day >= meta.days() {
            out.violations.push(
                Violation::new(
                    ViolationKind::Schema,
                    format!("line {line_no}: day {} outside 0..={}", rec.day, meta.num_days),
                )
                .into(),
            );
            continue;
        }
        let actual = rec.values.iter().map(Vec::len).sum::<usize>() + rec.total.len();
        if rec.values.len() != groups
            || rec.values.iter().any(|r| r.len() != NUM_COMPARTMENTS)
            || rec.total.len() != NUM_COMPARTMENTS
        {
            out.violations.push(Found {
                violation: Violation::new(
                    ViolationKind::Shape,
                    format!(
                        "line {line_no}: block for percentile {}, district {}, day {} has shape {:?}+{}, expected {groups}x{NUM_COMPARTMENTS}+{NUM_COMPARTMENTS}",
                        rec.percentile,
                        rec.district,
                        rec.day,
                        rec.values.iter().map(Vec::len).collect::<Vec<_>>(),
                        rec.total.len()
                    ),
                ),
                actual: Some(actual),
            });
            continue;
        }
        let slot = (p * meta.district_slots() + d) * meta.days() + rec.day;
        if present[slot] {
            out.violations.push(
                Violation::new(
                    ViolationKind::DuplicateRecord,
                    format!(
                        "line {line_no}: duplicate record for percentile {}, district {}, day {}",
                        rec.percentile, rec.district, rec.day
                    ),
                )
                .into(),
            );
            continue;
        }
        present[slot] = true;
        let off = slot * meta.block_len();
        let block = &mut out.values[off..off + meta.block_len()];
        for (row, dst) in rec.values.iter().chain(std::iter::once(&rec.total)).zip(block.chunks_mut(NUM_COMPARTMENTS)) {
            dst.copy_from_slice(row);
        }
    }

    // missing slices, reported once per (district, day)
    for d in 0..meta.district_slots() {
        for day in 0..meta.days() {
            let missing: Vec<u8> = PERCENTILES
                .iter()
                .enumerate()
                .filter(|(p, _)| !present[(p * meta.district_slots() + d) * meta.days() + day])
                .map(|(_, q)| *q)
                .collect();
            if !missing.is_empty() {
                out.violations.push(
                    Violation::new(
                        ViolationKind::MissingRecord,
                        format!(
                            "missing day slice: district {}, day {day} (percentiles {missing:?})",
                            meta.district_id(d)
                        ),
                    )
                    .into(),
                );
            }
        }
    }

    out.violations.extend(check_values(&meta, &out.values, &present).into_iter().map(Found::from));
    out.metadata = Some(meta);
    out
}

fn cell_name(meta: &ResultMetadata, d: usize, day: usize, k: usize) -> String {
    format!(
        "district {}, day {day}, group {}, compartment {}",
        meta.district_id(d),
        meta.group_label(k / NUM_COMPARTMENTS),
        Compartment::ALL[k % NUM_COMPARTMENTS]
    )
}

/// Value-level invariants over the blocks marked present.
fn check_values(meta: &ResultMetadata, values: &[f64], present: &[bool]) -> Vec<Violation> {
    let mut out = Vec::new();
    let block = meta.block_len();
    let slot = |p: usize, d: usize, day: usize| (p * meta.district_slots() + d) * meta.days() + day;
    for d in 0..meta.district_slots() {
        for day in 0..meta.days() {
            for (p, q) in PERCENTILES.iter().enumerate() {
                let s = slot(p, d, day);
                if !present[s] {
                    continue;
                }
                for k in 0..block {
                    let v = values[s * block + k];
                    if !(v >= 0.0 && v.is_finite()) {
                        out.push(Violation::new(
                            ViolationKind::Negative,
                            format!("value {v} at percentile {q}, {} is not a finite nonnegative number", cell_name(meta, d, day, k)),
                        ));
                    }
                }
            }
            for p in 1..PERCENTILES.len() {
                let (lo, hi) = (slot(p - 1, d, day), slot(p, d, day));
                if !(present[lo] && present[hi]) {
                    continue;
                }
                for k in 0..block {
                    let (a, b) = (values[lo * block + k], values[hi * block + k]);
                    if a > b {
                        out.push(Violation::new(
                            ViolationKind::PercentileOrder,
                            format!(
                                "p{} ({b}) < p{} ({a}) at {}",
                                PERCENTILES[p],
                                PERCENTILES[p - 1],
                                cell_name(meta, d, day, k)
                            ),
                        ));
                    }
                }
            }
        }
        let s0 = slot(0, d, 0);
        for p in 1..PERCENTILES.len() {
            let s = slot(p, d, 0);
            if !(present[s0] && present[s]) {
                continue;
            }
            for k in 0..block {
                if values[s * block + k] != values[s0 * block + k] {
                    out.push(Violation::new(
                        ViolationKind::InitialMismatch,
                        format!(
                            "day-0 value of p{} differs from p{} at {}",
                            PERCENTILES[p],
                            PERCENTILES[0],
                            cell_name(meta, d, 0, k)
                        ),
                    ));
                }
            }
        }
    }
    out
}
