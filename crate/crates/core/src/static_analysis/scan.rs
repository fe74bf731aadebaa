use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use walkdir::WalkDir;

use super::StaticError;
use crate::model::QualifiedName;

pub const SOURCE_SUFFIX: &str = ".py";
const PACKAGE_INIT: &str = "__init__.py";

/// One Python source file and the module name derived from its path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceFile {
    /// Path relative to the project root, `/`-separated.
    pub path: PathBuf,
    pub module: QualifiedName,
    /// `true` for `__init__.py` files; the module then names the package itself.
    pub is_package: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceSet {
    pub root: PathBuf,
    /// Sorted by module name.
    pub files: Vec<SourceFile>,
    pub warnings: Vec<String>,
}

impl SourceSet {
    pub fn modules(&self) -> impl Iterator<Item = &QualifiedName> {
        self.files.iter().map(|f| &f.module)
    }
}

fn glob_set(patterns: &[String]) -> Result<GlobSet, StaticError> {
    let mut builder = GlobSetBuilder::new();
    for p in patterns {
        let glob = Glob::new(p).map_err(|e| StaticError::Glob {
            pattern: p.clone(),
            message: e.to_string(),
        })?;
        builder.add(glob);
    }
    builder.build().map_err(|e| StaticError::Glob {
        pattern: patterns.join(","),
        message: e.to_string(),
    })
}

/// Module name for a relative source path, or a warning when the path does not
/// map onto Python identifiers.
fn module_for(rel: &Path) -> Result<(QualifiedName, bool), String> {
    let mut segments: Vec<String> = rel
        .iter()
        .map(|s| s.to_string_lossy().into_owned())
        .collect();
    let file = segments.pop().unwrap_or_default();
    let is_package = file == PACKAGE_INIT;
    if !is_package {
        let stem = file.strip_suffix(SOURCE_SUFFIX).unwrap_or(&file).to_string();
        segments.push(stem);
    }
    if segments.is_empty() {
        return Err(format!(
            "{}: package initializer at the project root has no module name; skipped",
            rel.display()
        ));
    }
    QualifiedName::from_segments(&segments)
        .map(|name| (name, is_package))
        .map_err(|e| format!("{}: not an importable module path ({e}); skipped", rel.display()))
}

/// Lists the Python sources below `root`.
///
/// `include` defaults to every `.py` file when empty. Glob patterns match the
/// `/`-separated path relative to `root`.
pub fn scan_project(root: &Path, include: &[String], exclude: &[String]) -> Result<SourceSet, StaticError> {
    let meta = std::fs::metadata(root).map_err(|e| StaticError::Io {
        path: root.to_path_buf(),
        source: e,
    })?;
    if !meta.is_dir() {
        return Err(StaticError::NotADirectory(root.to_path_buf()));
    }
    let include = if include.is_empty() {
        glob_set(&["**/*.py".to_string()])?
    } else {
        glob_set(include)?
    };
    let exclude = glob_set(exclude)?;

    let mut warnings = Vec::new();
    let mut by_module: BTreeMap<QualifiedName, SourceFile> = BTreeMap::new();
    let walker = WalkDir::new(root).follow_links(false).sort_by_file_name();
    for entry in walker {
        let entry = entry.map_err(|e| {
            let path = e.path().map(Path::to_path_buf).unwrap_or_else(|| root.to_path_buf());
            StaticError::Io {
                path,
                source: e.into_io_error().unwrap_or_else(|| std::io::Error::other("walk error")),
            }
        })?;
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = match entry.path().strip_prefix(root) {
            Ok(rel) => rel.to_path_buf(),
            Err(_) => continue,
        };
        let rel_text = rel
            .iter()
            .map(|s| s.to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        if !rel_text.ends_with(SOURCE_SUFFIX) || !include.is_match(&rel_text) || exclude.is_match(&rel_text) {
            continue;
        }
        match module_for(&rel) {
            Ok((module, is_package)) => {
                let file = SourceFile {
                    path: PathBuf::from(&rel_text),
                    module: module.clone(),
                    is_package,
                };
                if let Some(existing) = by_module.get(&module) {
                    warnings.push(format!(
                        "{rel_text}: module {module} already provided by {}; skipped",
                        existing.path.display()
                    ));
                } else {
                    by_module.insert(module, file);
                }
            }
            Err(w) => warnings.push(w),
        }
    }
    if by_module.is_empty() {
        warnings.push(format!("no Python sources matched under {}", root.display()));
    }
    Ok(SourceSet {
        root: root.to_path_buf(),
        files: by_module.into_values().collect(),
        warnings,
    })
}
