//! Corpus files, raster sidecars and the external attribute format.
//!
//! A corpus is UTF-8 JSON Lines, one problem per line with keys in sorted
//! order: `annotations`, `candidates`, `config`, `context`, `id`,
//! `truth_index`. Next to `corpus.jsonl` sits `corpus.jsonl.manifest`, which
//! records the generating spec, per-configuration counts, a SHA-256 of the
//! whole file and a short digest per record.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::domain::{config_counts, validate_problem, Code, ComponentValues, Configuration, Panel, Problem};
use crate::generator::GenSpec;
use crate::render::{render_problem, RenderOptions};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {reason}")]
    Io { path: String, reason: std::io::Error },
    #[error("{path}: manifest format version {found} is newer than the supported version {supported}")]
    UnsupportedVersion { path: String, found: u64, supported: u32 },
    #[error("{path}: malformed manifest: {detail}")]
    Manifest { path: String, detail: String },
    #[error("{path}: checksum mismatch at record {record}: {detail}")]
    Checksum { path: String, record: usize, detail: String },
    #[error("{path}:{line}: {detail}")]
    Parse { path: String, line: usize, detail: String },
    #[error("{path}:{line}: problem {id} is invalid: {detail}")]
    Validation { path: String, line: usize, id: String, detail: String },
    #[error("rendering problem {id}: {detail}")]
    Render { id: String, detail: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |reason| CorpusError::Io { path: path.display().to_string(), reason }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub checksum: String,
    pub counts: BTreeMap<String, usize>,
    pub format_version: u32,
    pub gen_spec: Option<GenSpec>,
    /// First 16 hex digits of each record line's SHA-256.
    pub record_digests: Vec<String>,
    pub total: usize,
}

pub fn manifest_path(corpus: &Path) -> PathBuf {
    let mut name = corpus.as_os_str().to_owned();
    name.push(".manifest");
    PathBuf::from(name)
}

fn record_digest(line: &str) -> String {
    hex::encode(&Sha256::digest(line.as_bytes())[..8])
}

/// One problem as a line of sorted-key JSON (no trailing newline).
pub fn problem_line(p: &Problem) -> String {
    // serde_json's map is ordered, so going through Value sorts every key.
    let v = serde_json::to_value(p).expect("problems always serialize");
    serde_json::to_string(&v).expect("values always serialize")
}

/// Serialize a value as sorted-key JSON.
pub fn sorted_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable value");
    serde_json::to_string(&v).expect("values always serialize")
}

/// Corpus text and its manifest, without touching the file system.
pub fn encode_corpus(problems: &[Problem], gen_spec: Option<&GenSpec>) -> (String, CorpusManifest) {
    let lines: Vec<String> = problems.par_iter().map(problem_line).collect();
    let mut text = String::new();
    for l in &lines {
        text.push_str(l);
        text.push('\n');
    }
    let manifest = CorpusManifest {
        checksum: hex::encode(Sha256::digest(text.as_bytes())),
        counts: config_counts(problems).into_iter().map(|(c, n)| (c.name().to_string(), n)).collect(),
        format_version: FORMAT_VERSION,
        gen_spec: gen_spec.cloned(),
        record_digests: lines.iter().map(|l| record_digest(l)).collect(),
        total: problems.len(),
    };
    (text, manifest)
}

/// Write `path` and its sibling manifest. Equal inputs give equal bytes.
pub fn write_corpus(
    problems: &[Problem],
    path: &Path,
    gen_spec: Option<&GenSpec>,
) -> Result<CorpusManifest, CorpusError> {
    let (text, manifest) = encode_corpus(problems, gen_spec);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))?;
    let mpath = manifest_path(path);
    let mut mtext = serde_json::to_string_pretty(&serde_json::to_value(&manifest).expect("manifest serializes"))
        .expect("manifest serializes");
    mtext.push('\n');
    fs::write(&mpath, mtext).map_err(io_err(&mpath))?;
    Ok(manifest)
}

fn read_manifest(path: &Path) -> Result<CorpusManifest, CorpusError> {
    let mpath = manifest_path(path);
    let shown = mpath.display().to_string();
    let text = fs::read_to_string(&mpath).map_err(io_err(&mpath))?;
    let raw: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CorpusError::Manifest { path: shown.clone(), detail: e.to_string() })?;
    // Check the version before the schema so newer files fail clearly.
    let version = raw
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| CorpusError::Manifest { path: shown.clone(), detail: "missing format_version".into() })?;
    if version > u64::from(FORMAT_VERSION) {
        return Err(CorpusError::UnsupportedVersion { path: shown, found: version, supported: FORMAT_VERSION });
    }
    let manifest: CorpusManifest = serde_json::from_value(raw)
        .map_err(|e| CorpusError::Manifest { path: shown.clone(), detail: e.to_string() })?;
    if manifest.counts.values().sum::<usize>() != manifest.total || manifest.record_digests.len() != manifest.total {
        return Err(CorpusError::Manifest { path: shown, detail: "counts do not add up to the total".into() });
    }
    Ok(manifest)
}

/// Read and verify a corpus: manifest version, per-record digests, the
/// whole-file checksum, then every record's structural validity.
pub fn read_corpus(path: &Path) -> Result<(Vec<Problem>, CorpusManifest), CorpusError> {
    let manifest = read_manifest(path)?;
    let shown = path.display().to_string();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let lines: Vec<&str> = text.lines().collect();
    for (i, expected) in manifest.record_digests.iter().enumerate() {
        match lines.get(i) {
            None => {
                return Err(CorpusError::Checksum {
                    path: shown,
                    record: i,
                    detail: format!("file ends after {} of {} records", lines.len(), manifest.total),
                })
            }
            Some(l) if record_digest(l) != *expected => {
                return Err(CorpusError::Checksum { path: shown, record: i, detail: "record digest differs".into() })
            }
            _ => {}
        }
    }
    if lines.len() > manifest.total {
        return Err(CorpusError::Checksum {
            path: shown,
            record: manifest.total,
            detail: format!("{} records beyond the manifest's {}", lines.len() - manifest.total, manifest.total),
        });
    }
    if hex::encode(Sha256::digest(text.as_bytes())) != manifest.checksum {
        return Err(CorpusError::Checksum {
            path: shown,
            record: manifest.total,
            detail: "file checksum differs".into(),
        });
    }
    let problems = lines
        .par_iter()
        .enumerate()
        .map(|(i, l)| {
            let p: Problem = serde_json::from_str(l).map_err(|e| CorpusError::Parse {
                path: shown.clone(),
                line: i + 1,
                detail: e.to_string(),
            })?;
            let report = validate_problem(&p);
            if !report.is_ok() {
                return Err(CorpusError::Validation {
                    path: shown.clone(),
                    line: i + 1,
                    id: p.id,
                    detail: report.to_string(),
                });
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((problems, manifest))
}

/// Render every problem's sixteen panels into `dir` as
/// `{id}_{q0..q7|c0..c7}.png`.
pub fn write_rasters(problems: &[Problem], dir: &Path, opts: RenderOptions) -> Result<usize, CorpusError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let counts = problems
        .par_iter()
        .map(|p| {
            let rasters =
                render_problem(p, opts).map_err(|e| CorpusError::Render { id: p.id.clone(), detail: e.to_string() })?;
            for (name, r) in &rasters {
                let path = dir.join(format!("{name}.png"));
                r.write_png(&path).map_err(io_err(&path))?;
            }
            Ok(rasters.len())
        })
        .collect::<Result<Vec<usize>, CorpusError>>()?;
    Ok(counts.into_iter().sum())
}

/// Three rows of one attribute; the third row may omit or null its last
/// cell.
type ExternalRows = Vec<Vec<Option<Code>>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalComponent {
    pub color: ExternalRows,
    pub number: ExternalRows,
    pub position: ExternalRows,
    pub size: ExternalRows,
    #[serde(rename = "type")]
    pub shape: ExternalRows,
}

/// A problem described only by attribute values, as produced by an outside
/// perception front end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalAttributeRecord {
    pub id: String,
    pub config: Configuration,
    /// Query matrices per layout component.
    pub components: Vec<ExternalComponent>,
    /// Eight candidates, each with one tuple per component.
    pub candidates: Vec<Vec<ComponentValues>>,
    #[serde(default)]
    pub truth_index: Option<usize>,
}

fn external_cell(rows: &ExternalRows, cell: usize, name: &str) -> Result<Code, String> {
    let (r, c) = (cell / 3, cell % 3);
    if rows.len() != 3 {
        return Err(format!("{name} has {} rows, expected 3", rows.len()));
    }
    for (i, row) in rows.iter().enumerate() {
        let ok = if i < 2 { row.len() == 3 && row.iter().all(Option::is_some) } else { (2..=3).contains(&row.len()) };
        if !ok {
            return Err(format!("{name} row {} is malformed", i + 1));
        }
    }
    rows[r].get(c).copied().flatten().ok_or_else(|| format!("{name} is missing cell ({}, {})", r + 1, c + 1))
}

impl ExternalAttributeRecord {
    pub fn into_problem(self) -> Result<Problem, String> {
        let ncomp = self.config.layout().components.len();
        if self.components.len() != ncomp {
            return Err(format!("{} components given, {} has {ncomp}", self.components.len(), self.config));
        }
        if self.candidates.len() != 8 {
            return Err(format!("{} candidates given, 8 are required", self.candidates.len()));
        }
        let mut context = Vec::with_capacity(8);
        for cell in 0..8 {
            let values = self
                .components
                .iter()
                .map(|c| {
                    Ok(ComponentValues {
                        color: external_cell(&c.color, cell, "color")?,
                        number: external_cell(&c.number, cell, "number")?,
                        position: external_cell(&c.position, cell, "position")?,
                        size: external_cell(&c.size, cell, "size")?,
                        shape: external_cell(&c.shape, cell, "type")?,
                    })
                })
                .collect::<Result<Vec<_>, String>>()?;
            context.push(Panel(values));
        }
        Ok(Problem {
            annotations: Vec::new(),
            candidates: self.candidates.into_iter().map(Panel).collect(),
            config: self.config,
            context,
            id: self.id,
            truth_index: self.truth_index,
        })
    }
}

/// Parse external attribute records, one JSON object per non-blank line.
/// Each becomes a problem that passes the same validation as generated ones.
pub fn import_external_text(text: &str, source: &str) -> Result<Vec<Problem>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parse = |detail: String| CorpusError::Parse { path: source.to_string(), line: i + 1, detail };
        let record: ExternalAttributeRecord = serde_json::from_str(line).map_err(|e| parse(e.to_string()))?;
        let p = record.into_problem().map_err(parse)?;
        let report = validate_problem(&p);
        if !report.is_ok() {
            return Err(CorpusError::Validation {
                path: source.to_string(),
                line: i + 1,
                id: p.id,
                detail: report.to_string(),
            });
        }
        out.push(p);
    }
    Ok(out)
}

pub fn import_external_attributes(path: &Path) -> Result<Vec<Problem>, CorpusError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    import_external_text(&text, &path.display().to_string())
}

/// The external record describing `p` (the inverse of import).
pub fn to_external(p: &Problem) -> ExternalAttributeRecord {
    let layout = p.layout();
    let components = (0..layout.components.len())
        .map(|ci| {
            let rows = |kind| -> ExternalRows {
                let m = p.query_matrix(ci, kind);
                (0..3).map(|r| m.cells[r].iter().take(if r == 2 { 2 } else { 3 }).copied().collect()).collect()
            };
            use crate::domain::AttributeKind as K;
            ExternalComponent {
                color: rows(K::Color),
                number: rows(K::Number),
                position: rows(K::Position),
                size: rows(K::Size),
                shape: rows(K::Type),
            }
        })
        .collect();
    ExternalAttributeRecord {
        id: p.id.clone(),
        config: p.config,
        components,
        candidates: p.candidates.iter().map(|c| c.0.clone()).collect(),
        truth_index: p.truth_index,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{generate_corpus, Scheme};

    fn sample(count: usize) -> (GenSpec, Vec<Problem>) {
        let spec = GenSpec::new(Configuration::ALL.to_vec(), Scheme::Raven, 0.3, 42, count);
        let problems = generate_corpus(&spec).unwrap();
        (spec, problems)
    }

    #[test]
    fn round_trip_and_manifest() {
        let (spec, problems) = sample(100);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let written = write_corpus(&problems, &path, Some(&spec)).unwrap();
        assert_eq!(written.total, 100);
        assert_eq!(written.counts.values().sum::<usize>(), 100);
        let (back, manifest) = read_corpus(&path).unwrap();
        assert_eq!(back, problems);
        assert_eq!(manifest, written);
        assert_eq!(manifest.gen_spec, Some(spec));
    }

    #[test]
    fn records_have_sorted_keys() {
        let (_, problems) = sample(1);
        let line = problem_line(&problems[0]);
        let keys = ["\"annotations\"", "\"candidates\"", "\"config\"", "\"context\"", "\"id\"", "\"truth_index\""];
        let pos: Vec<usize> = keys.iter().map(|k| line.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
        assert!(line.contains("{\"color\":"));
    }

    #[test]
    fn equal_input_gives_equal_bytes() {
        let (spec, problems) = sample(30);
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.jsonl"), dir.path().join("b.jsonl"));
        write_corpus(&problems, &a, Some(&spec)).unwrap();
        write_corpus(&generate_corpus(&spec).unwrap(), &b, Some(&spec)).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        assert_eq!(fs::read(manifest_path(&a)).unwrap(), fs::read(manifest_path(&b)).unwrap());
    }

    #[test]
    fn truncation_names_the_record() {
        let (spec, problems) = sample(10);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        write_corpus(&problems, &path, Some(&spec)).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let cut: String =
            text.lines().take(6).map(|l| format!("{l}\n")).collect::<String>() + &text.lines().nth(6).unwrap()[..20];
        fs::write(&path, cut).unwrap();
        match read_corpus(&path) {
            Err(CorpusError::Checksum { record, .. }) => assert_eq!(record, 6),
            other => panic!("expected checksum error, got {other:?}"),
        }
    }

    #[test]
    fn newer_version_is_reported() {
        let (spec, problems) = sample(3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.jsonl");
        write_corpus(&problems, &path, Some(&spec)).unwrap();
        let mpath = manifest_path(&path);
        let text = fs::read_to_string(&mpath).unwrap().replace("\"format_version\": 1", "\"format_version\": 7");
        fs::write(&mpath, text).unwrap();
        assert!(matches!(read_corpus(&path), Err(CorpusError::UnsupportedVersion { found: 7, .. })));
    }

    #[test]
    fn out_of_range_color_fails_validation_at_its_line() {
        let (spec, mut problems) = sample(5);
        problems[3].candidates[0].0[0].color = 12;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        // Written through the normal path, so digests match and only validation fails.
        write_corpus(&problems, &path, Some(&spec)).unwrap();
        match read_corpus(&path) {
            Err(CorpusError::Validation { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_error_names_the_path() {
        let err = read_corpus(Path::new("/nonexistent/x.jsonl")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/x.jsonl.manifest"));
    }

    #[test]
    fn external_round_trip() {
        let (_, problems) = sample(14);
        let text: String = problems.iter().map(|p| sorted_json(&to_external(p)) + "\n").collect();
        let back = import_external_text(&text, "mem").unwrap();
        for (a, b) in back.iter().zip(&problems) {
            assert_eq!(a.context, b.context);
            assert_eq!(a.candidates, b.candidates);
            assert_eq!(a.truth_index, b.truth_index);
            assert!(a.annotations.is_empty());
        }
    }

    #[test]
    fn external_empty_and_malformed() {
        assert!(import_external_text("", "mem").unwrap().is_empty());
        assert!(import_external_text("\n\n", "mem").unwrap().is_empty());
        let (_, problems) = sample(1);
        let mut rec = to_external(&problems[0]);
        rec.candidates.truncate(5);
        let text = format!("\n{}\n", sorted_json(&rec));
        match import_external_text(&text, "mem") {
            Err(CorpusError::Parse { line, detail, .. }) => {
                assert_eq!(line, 2);
                assert!(detail.contains("8 are required"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(import_external_text("{not json", "mem"), Err(CorpusError::Parse { line: 1, .. })));
    }

    #[test]
    fn external_popcount_mismatch_is_rejected() {
        let spec = GenSpec::new(vec![Configuration::Grid2x2], Scheme::Raven, 0.0, 1, 1);
        let p = &generate_corpus(&spec).unwrap()[0];
        let mut rec = to_external(p);
        let n = rec.components[0].number[0][0].unwrap();
        rec.components[0].number[0][0] = Some(if n == 4 { 3 } else { n + 1 });
        let err = import_external_text(&sorted_json(&rec), "mem").unwrap_err();
        assert!(matches!(err, CorpusError::Validation { line: 1, .. }), "{err}");
        assert!(err.to_string().contains("popcount") || err.to_string().contains("number"), "{err}");
    }
}
