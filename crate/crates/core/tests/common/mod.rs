use std::path::{Path, PathBuf};

use coop_core::Scenario;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Every scenario fixture, sorted by path.
pub fn scenario_paths() -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut dirs = vec![fixtures_dir()];
    while let Some(dir) = dirs.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                dirs.push(path);
            } else if path.extension().is_some_and(|e| e == "coop") {
                out.push(path);
            }
        }
    }
    out.sort();
    out
}

pub fn load(path: &Path) -> Scenario {
    let text = std::fs::read_to_string(path).unwrap();
    Scenario::load(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
