//! Result directories are written under `<out>.partial` and renamed into
//! place only once everything succeeded.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub struct Staging {
    target: PathBuf,
    partial: PathBuf,
    done: bool,
}

impl Staging {
    pub fn begin(target: &Path) -> Result<Self> {
        let mut name = OsString::from(target.as_os_str());
        name.push(".partial");
        let partial = PathBuf::from(name);
        if partial.exists() {
            fs::remove_dir_all(&partial).map_err(|e| Error::write(&partial, e))?;
        }
        fs::create_dir_all(&partial).map_err(|e| Error::write(&partial, e))?;
        Ok(Self { target: target.to_path_buf(), partial, done: false })
    }

    pub fn partial_dir(&self) -> &Path {
        &self.partial
    }

    /// Writes `contents` to `relative` inside the staged directory.
    pub fn write(&self, relative: &str, contents: &str) -> Result<()> {
        let path = self.partial.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::write(parent, e))?;
        }
        fs::write(&path, contents).map_err(|e| Error::write(&path, e))
    }

    /// Replaces the target directory with the staged one.
    pub fn commit(mut self) -> Result<PathBuf> {
        if self.target.exists() {
            fs::remove_dir_all(&self.target).map_err(|e| Error::write(&self.target, e))?;
        }
        fs::rename(&self.partial, &self.target).map_err(|e| Error::write(&self.target, e))?;
        self.done = true;
        Ok(self.target.clone())
    }
}

impl Drop for Staging {
    fn drop(&mut self) {
        if !self.done {
            let _ = fs::remove_dir_all(&self.partial);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_replaces_and_drop_cleans_up() {
        let tmp = tempfile::tempdir().unwrap();
        let out = tmp.path().join("res");
        fs::create_dir_all(&out).unwrap();
        fs::write(out.join("stale.txt"), "x").unwrap();

        let s = Staging::begin(&out).unwrap();
        s.write("a/b.csv", "1\n").unwrap();
        s.commit().unwrap();
        assert!(!out.join("stale.txt").exists());
        assert_eq!(fs::read_to_string(out.join("a/b.csv")).unwrap(), "1\n");

        let s = Staging::begin(&out).unwrap();
        s.write("c.csv", "2\n").unwrap();
        let partial = s.partial_dir().to_path_buf();
        assert!(partial.exists());
        drop(s);
        assert!(!partial.exists());
        assert!(out.join("a/b.csv").exists());
    }
}
