use std::fmt;
use std::path::{Path, PathBuf};

use rustpython_parser::{ast, Parse};
use serde::Serialize;

use super::scan::SourceFile;

/// Syntax tree of one source file.
#[derive(Debug, Clone)]
pub struct ParsedModule {
    pub file: SourceFile,
    pub suite: ast::Suite,
    /// Byte offset at which each line starts.
    pub line_starts: Vec<usize>,
}

/// Why a file could not be turned into a syntax tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyntaxDiagnostic {
    pub path: PathBuf,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for SyntaxDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.path.display(), self.line, self.column, self.message)
    }
}

/// 1-based line and column of a byte offset.
pub(crate) fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(source.len());
    let before = &source[..offset];
    let line = before.bytes().filter(|&b| b == b'\n').count() + 1;
    let col = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
    (line, col)
}

fn line_starts(source: &str) -> Vec<usize> {
    std::iter::once(0)
        .chain(source.match_indices('\n').map(|(i, _)| i + 1))
        .collect()
}

/// Parses source text. Side-effect free.
pub fn parse_text(file: SourceFile, source: &str) -> Result<ParsedModule, SyntaxDiagnostic> {
    let display = file.path.to_string_lossy().into_owned();
    match ast::Suite::parse(source, &display) {
        Ok(suite) => Ok(ParsedModule {
            file,
            suite,
            line_starts: line_starts(source),
        }),
        Err(err) => {
            let (line, column) = line_col(source, u32::from(err.offset) as usize);
            Err(SyntaxDiagnostic {
                path: file.path,
                line,
                column,
                message: err.error.to_string(),
            })
        }
    }
}

/// Reads and parses `root/file.path`.
pub fn parse_source(root: &Path, file: SourceFile) -> Result<ParsedModule, SyntaxDiagnostic> {
    let full = root.join(&file.path);
    match std::fs::read_to_string(&full) {
        Ok(text) => parse_text(file, &text),
        Err(e) => Err(SyntaxDiagnostic {
            path: file.path,
            line: 0,
            column: 0,
            message: format!("cannot read source: {e}"),
        }),
    }
}
