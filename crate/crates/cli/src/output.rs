//! Deferred, atomic output: everything is rendered before the first byte is written.

use std::io::Write;
use std::path::PathBuf;

use crate::error::CliError;

#[derive(Debug, Default)]
pub struct Outputs {
    /// `None` targets stdout.
    items: Vec<(Option<PathBuf>, String)>,
}

impl Outputs {
    pub fn push(&mut self, path: Option<PathBuf>, content: String) {
        self.items.push((path, content));
    }

    /// Writes regular files through a temporary sibling and a rename, then
    /// devices and pipes in place, then stdout. `-` names stdout.
    pub fn commit(self) -> Result<(), CliError> {
        let mut staged = Vec::new();
        let mut direct = Vec::new();
        let mut stdout = Vec::new();
        for (path, content) in self.items {
            match path {
                Some(p) if p.as_os_str() == "-" => stdout.push(content),
                // Renaming over a device node or a symlink to one would replace it.
                Some(p) if std::fs::metadata(&p).is_ok_and(|m| !m.is_file()) || is_symlink(&p) => {
                    direct.push((p, content))
                }
                Some(p) => {
                    let dir = p.parent().filter(|d| !d.as_os_str().is_empty()).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
                    let mut tmp = tempfile::NamedTempFile::new_in(&dir)
                        .map_err(|e| CliError::internal(format!("cannot create file in {}: {e}", dir.display())))?;
                    tmp.write_all(content.as_bytes())
                        .map_err(|e| CliError::internal(format!("write failed: {e}")))?;
                    staged.push((tmp, p));
                }
                None => stdout.push(content),
            }
        }
        for (tmp, p) in staged {
            tmp.persist(&p)
                .map_err(|e| CliError::internal(format!("cannot write {}: {e}", p.display())))?;
        }
        for (p, content) in direct {
            std::fs::write(&p, content).map_err(|e| CliError::internal(format!("cannot write {}: {e}", p.display())))?;
        }
        let mut out = std::io::stdout().lock();
        for content in stdout {
            out.write_all(content.as_bytes())
                .map_err(|e| CliError::internal(format!("stdout: {e}")))?;
        }
        Ok(())
    }
}

fn is_symlink(p: &std::path::Path) -> bool {
    std::fs::symlink_metadata(p).is_ok_and(|m| m.file_type().is_symlink())
}
