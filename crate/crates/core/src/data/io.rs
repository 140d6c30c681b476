//! Dataset files: UTF-8, one example per line, segments separated by single
//! ASCII spaces. LF and CRLF are both accepted, blank lines are skipped and
//! lines starting with `#` are comments.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::data::example::{Casing, Origin, SegExample};
use crate::error::{Error, Result};
use crate::segmentation::Segmentation;

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn parse_line(path: &Path, line_no: usize, line: &str) -> Result<Segmentation> {
    if line.contains("  ") || line.starts_with(' ') || line.ends_with(' ') {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: "segments must be separated by exactly one space".into(),
        });
    }
    if line.chars().any(|c| c.is_whitespace() && c != ' ') {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: "unexpected whitespace inside a segment".into(),
        });
    }
    Segmentation::parse(line).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: line_no,
        message: e.to_string(),
    })
}

/// Parses dataset text; `path` is only used in error messages.
pub fn parse_dataset(text: &str, path: &Path, casing: Casing, origin: Origin) -> Result<Vec<SegExample>> {
    lines(text)
        .map(|(n, l)| parse_line(path, n, l).map(|s| SegExample::new(s, casing, origin)))
        .collect()
}

pub fn load_dataset(path: impl AsRef<Path>, casing: Casing, origin: Origin) -> Result<Vec<SegExample>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_dataset(&text, path, casing, origin)
}

pub fn format_dataset(examples: &[SegExample]) -> String {
    let mut out = String::new();
    for ex in examples {
        out.push_str(&ex.segments.to_string());
        out.push('\n');
    }
    out
}

pub fn save_dataset(examples: &[SegExample], path: impl AsRef<Path>) -> Result<()> {
    write_atomic(path.as_ref(), format_dataset(examples).as_bytes())
}

/// Reads the public Common Crawl domain-name data. A line with a tab is read
/// as `raw<TAB>segmented` (the segmented column must concatenate to the raw
/// column); a line without a tab is read in dataset format. Examples are
/// labelled camel case.
pub fn load_common_crawl(path: impl AsRef<Path>) -> Result<Vec<SegExample>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    lines(&text)
        .map(|(n, l)| {
            let seg = match l.split_once('\t') {
                Some((raw, segmented)) => {
                    let seg = parse_line(path, n, segmented.trim_end())?;
                    if seg.raw() != raw.trim() {
                        return Err(Error::Parse {
                            path: path.to_path_buf(),
                            line: n,
                            message: format!("segmentation {seg} does not spell {raw:?}"),
                        });
                    }
                    seg
                }
                None => parse_line(path, n, l)?,
            };
            Ok(SegExample::new(seg, Casing::Camel, Origin::Crawl))
        })
        .collect()
}

/// Non-blank lines of an entity-name file, trimmed, in file order.
pub fn load_entity_names(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::contract(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        name.to_string_lossy(),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        e.into()
    })
}
