//! Score tables exported by the offline classifier tooling.
//!
//! Layout on disk: a JSON manifest plus one CSV per (classifier, BER grid
//! point).
//!
//! ```text
//! {
//!   "n_classes": 10,
//!   "classifiers": ["primary", "helper"],
//!   "grid": [
//!     {"ber": 0.0, "clean": true,
//!      "files": {"primary": "primary_clean.csv", "helper": "helper_clean.csv"}},
//!     {"ber": 0.001,
//!      "files": {"primary": "primary_1e-3.csv", "helper": "helper_1e-3.csv"}}
//!   ]
//! }
//! ```
//!
//! Each CSV has the header `sample_id,true_label,s0,...,s{C-1}`, rows sorted
//! by `sample_id`, and the same sample ids in every file. The first listed
//! classifier serves the primary MEH and the second the helper. At one grid
//! point both classifiers scored the same corrupted realization of a sample.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::InferenceDraw;
use crate::error::{Result, SimError};

const ROW_SUM_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    n_classes: usize,
    classifiers: Vec<String>,
    grid: Vec<ManifestGridEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestGridEntry {
    ber: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    clean: bool,
    files: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub ber: f64,
    pub clean: bool,
}

/// One classifier's scores over the whole BER grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    pub classifier_id: String,
    /// Row-major `n_samples × n_classes` matrix per grid point.
    pub scores: Vec<Vec<f64>>,
}

impl ScoreTable {
    pub fn row(&self, grid: usize, sample: usize, n_classes: usize) -> &[f64] {
        &self.scores[grid][sample * n_classes..(sample + 1) * n_classes]
    }
}

/// The two classifiers' score tables on a shared grid and sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSet {
    pub n_classes: usize,
    pub grid: Vec<GridPoint>,
    pub sample_ids: Vec<u64>,
    pub true_labels: Vec<usize>,
    pub primary: ScoreTable,
    pub helper: ScoreTable,
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

fn argmax_sum(a: &[f64], b: &[f64]) -> usize {
    let mut best = 0;
    let mut best_score = a[0] + b[0];
    for i in 1..a.len() {
        let s = a[i] + b[i];
        if s > best_score {
            best = i;
            best_score = s;
        }
    }
    best
}

impl ScoreSet {
    pub fn n_samples(&self) -> usize {
        self.true_labels.len()
    }

    /// Grid index used for a BER query: the nearest non-clean point in
    /// `log10` distance (ties to the lower BER). The clean point is only
    /// used when the grid has nothing else.
    pub fn grid_index(&self, ber: f64) -> usize {
        let target = ber.log10();
        self.grid
            .iter()
            .enumerate()
            .filter(|(_, g)| !g.clean && g.ber > 0.0)
            .min_by(|(_, a), (_, b)| {
                let da = (a.ber.log10() - target).abs();
                let db = (b.ber.log10() - target).abs();
                da.total_cmp(&db).then(a.ber.total_cmp(&b.ber))
            })
            .map(|(i, _)| i)
            .unwrap_or_else(|| self.grid.iter().position(|g| g.clean).unwrap_or(0))
    }

    /// Outcome of one specific sample at one grid point.
    pub fn outcome_at(&self, grid: usize, sample: usize) -> InferenceDraw {
        let c = self.n_classes;
        let label = self.true_labels[sample];
        let sp = self.primary.row(grid, sample, c);
        let sh = self.helper.row(grid, sample, c);
        InferenceDraw {
            theta_p: argmax(sp) == label,
            theta_h: argmax(sh) == label,
            theta_coop: argmax_sum(sp, sh) == label,
            clamped: false,
        }
    }

    /// Draws one sample uniformly at the grid point nearest to `ber`.
    pub fn sample(&self, rng: &mut dyn RngCore, ber: f64) -> InferenceDraw {
        let grid = self.grid_index(ber);
        let sample = rng.random_range(0..self.n_samples());
        self.outcome_at(grid, sample)
    }

    /// Fraction of samples classified correctly at a grid point:
    /// `(primary, helper, score-sum ensemble)`.
    pub fn accuracies(&self, grid: usize) -> (f64, f64, f64) {
        let n = self.n_samples();
        let (mut p, mut h, mut c) = (0usize, 0usize, 0usize);
        for s in 0..n {
            let d = self.outcome_at(grid, s);
            p += usize::from(d.theta_p);
            h += usize::from(d.theta_h);
            c += usize::from(d.theta_coop);
        }
        let n = n as f64;
        (p as f64 / n, h as f64 / n, c as f64 / n)
    }
}

fn table_err(path: &Path, message: impl Into<String>) -> SimError {
    SimError::ScoreTable {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

struct CsvTable {
    sample_ids: Vec<u64>,
    labels: Vec<usize>,
    scores: Vec<f64>,
}

fn read_csv_table(path: &Path, n_classes: usize) -> Result<CsvTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| table_err(path, e.to_string()))?;
    let headers = reader.headers().map_err(|e| table_err(path, e.to_string()))?.clone();
    let expected: Vec<String> = ["sample_id".to_string(), "true_label".to_string()]
        .into_iter()
        .chain((0..n_classes).map(|i| format!("s{i}")))
        .collect();
    if headers.iter().ne(expected.iter().map(String::as_str)) {
        return Err(table_err(
            path,
            format!("header must be `{}`", expected.join(",")),
        ));
    }
    let mut table = CsvTable {
        sample_ids: Vec::new(),
        labels: Vec::new(),
        scores: Vec::new(),
    };
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| table_err(path, e.to_string()))?;
        let row = line + 2;
        let field = |i: usize| record.get(i).unwrap_or("").trim();
        let id: u64 = field(0)
            .parse()
            .map_err(|_| table_err(path, format!("row {row}: bad sample_id `{}`", field(0))))?;
        let label: usize = field(1)
            .parse()
            .map_err(|_| table_err(path, format!("row {row}: bad true_label `{}`", field(1))))?;
        if label >= n_classes {
            return Err(table_err(path, format!("row {row}: label {label} out of range")));
        }
        if let Some(&prev) = table.sample_ids.last() {
            if id <= prev {
                return Err(table_err(path, format!("row {row}: sample ids must be strictly increasing")));
            }
        }
        let mut sum = 0.0;
        for i in 0..n_classes {
            let s: f64 = field(i + 2)
                .parse()
                .map_err(|_| table_err(path, format!("row {row}: bad score `{}`", field(i + 2))))?;
            if !(s.is_finite() && s >= 0.0) {
                return Err(table_err(path, format!("row {row}: score {s} is not a probability")));
            }
            sum += s;
            table.scores.push(s);
        }
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            return Err(table_err(path, format!("row {row}: scores sum to {sum}, expected 1")));
        }
        table.sample_ids.push(id);
        table.labels.push(label);
    }
    if table.sample_ids.is_empty() {
        return Err(table_err(path, "no samples"));
    }
    Ok(table)
}

/// Loads and cross-checks a manifest and all its CSV files.
pub fn load_score_set(manifest_path: &Path) -> Result<ScoreSet> {
    let text = std::fs::read_to_string(manifest_path).map_err(|source| SimError::Io {
        path: manifest_path.to_path_buf(),
        source,
    })?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| table_err(manifest_path, e.to_string()))?;
    if manifest.n_classes < 2 {
        return Err(table_err(manifest_path, "n_classes must be at least 2"));
    }
    if manifest.classifiers.len() != 2 {
        return Err(table_err(manifest_path, "exactly two classifiers (primary, helper) are required"));
    }
    if manifest.grid.is_empty() {
        return Err(table_err(manifest_path, "empty BER grid"));
    }
    if manifest.grid.iter().filter(|g| g.clean).count() != 1 {
        return Err(table_err(manifest_path, "the grid must designate exactly one clean entry"));
    }
    for g in &manifest.grid {
        let ok = if g.clean { g.ber == 0.0 } else { g.ber > 0.0 && g.ber <= 1.0 };
        if !ok {
            return Err(table_err(manifest_path, format!("invalid grid BER {}", g.ber)));
        }
    }
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let c = manifest.n_classes;

    let mut sample_ids: Option<Vec<u64>> = None;
    let mut labels: Option<Vec<usize>> = None;
    let mut tables: Vec<ScoreTable> = manifest
        .classifiers
        .iter()
        .map(|id| ScoreTable {
            classifier_id: id.clone(),
            scores: Vec::with_capacity(manifest.grid.len()),
        })
        .collect();

    for entry in &manifest.grid {
        for table in tables.iter_mut() {
            let rel = entry.files.get(&table.classifier_id).ok_or_else(|| {
                table_err(
                    manifest_path,
                    format!("grid point {} lists no file for `{}`", entry.ber, table.classifier_id),
                )
            })?;
            let path: PathBuf = base.join(rel);
            let csv = read_csv_table(&path, c)?;
            match &sample_ids {
                None => sample_ids = Some(csv.sample_ids),
                Some(ids) if *ids != csv.sample_ids => {
                    return Err(table_err(&path, "sample ids differ from the other files"));
                }
                Some(_) => {}
            }
            match &labels {
                None => labels = Some(csv.labels),
                Some(l) if *l != csv.labels => {
                    return Err(table_err(&path, "true labels differ from the other files"));
                }
                Some(_) => {}
            }
            table.scores.push(csv.scores);
        }
    }
    let helper = tables.pop().expect("two tables");
    let primary = tables.pop().expect("two tables");
    Ok(ScoreSet {
        n_classes: c,
        grid: manifest
            .grid
            .iter()
            .map(|g| GridPoint {
                ber: g.ber,
                clean: g.clean,
            })
            .collect(),
        sample_ids: sample_ids.unwrap_or_default(),
        true_labels: labels.unwrap_or_default(),
        primary,
        helper,
    })
}

fn grid_file_stem(g: &GridPoint) -> String {
    if g.clean {
        "clean".to_string()
    } else {
        format!("ber{:e}", g.ber)
    }
}

fn io_err(path: &Path, source: std::io::Error) -> SimError {
    SimError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes a score set in the on-disk layout; returns the manifest path.
pub fn write_score_set(set: &ScoreSet, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let c = set.n_classes;
    let mut grid = Vec::new();
    for (gi, g) in set.grid.iter().enumerate() {
        let mut files = BTreeMap::new();
        for table in [&set.primary, &set.helper] {
            let name = format!("{}_{}.csv", table.classifier_id, grid_file_stem(g));
            let path = dir.join(&name);
            let file = File::create(&path).map_err(|e| io_err(&path, e))?;
            let mut w = BufWriter::new(file);
            let header: Vec<String> = ["sample_id".to_string(), "true_label".to_string()]
                .into_iter()
                .chain((0..c).map(|i| format!("s{i}")))
                .collect();
            writeln!(w, "{}", header.join(",")).map_err(|e| io_err(&path, e))?;
            for (s, (&id, &label)) in set.sample_ids.iter().zip(&set.true_labels).enumerate() {
                let scores: Vec<String> = table.row(gi, s, c).iter().map(|v| format!("{v:.9e}")).collect();
                writeln!(w, "{id},{label},{}", scores.join(",")).map_err(|e| io_err(&path, e))?;
            }
            w.flush().map_err(|e| io_err(&path, e))?;
            files.insert(table.classifier_id.clone(), name);
        }
        grid.push(ManifestGridEntry {
            ber: g.ber,
            clean: g.clean,
            files,
        });
    }
    let manifest = Manifest {
        n_classes: c,
        classifiers: vec![set.primary.classifier_id.clone(), set.helper.classifier_id.clone()],
        grid,
    };
    let path = dir.join("manifest.json");
    std::fs::write(&path, serde_json::to_string_pretty(&manifest).expect("manifest serializes"))
        .map_err(|e| io_err(&path, e))?;
    Ok(path)
}
