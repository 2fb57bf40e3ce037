//! Atomic file output and CSV formatting.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lieorbit::orbit::OrbitSample;

use crate::error::CliError;

/// Writes `contents` to `dir/name` through a temporary file in the same directory and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Output { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(io(&tmp))?;
    f.write_all(contents)
        .and_then(|_| f.sync_all())
        .map_err(io(&tmp))?;
    drop(f);
    fs::rename(&tmp, &target).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        io(&target)(e)
    })?;
    Ok(target)
}

pub fn json_bytes<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s.into_bytes()
}

/// `r,base_tag,fiber_tag,c1..cN` followed by one row per sample.
pub fn samples_csv(r_label: &str, samples: &[OrbitSample], dim: usize) -> String {
    let mut out = String::from("r,base_tag,fiber_tag");
    for i in 1..=dim {
        out.push_str(&format!(",c{i}"));
    }
    out.push('\n');
    for s in samples {
        let (b, f) = s
            .tag
            .as_ref()
            .map(|t| (t.base_index, t.fiber_index))
            .unwrap_or((0, 0));
        out.push_str(&format!("{r_label},{b},{f}"));
        for c in s.point.iter() {
            out.push_str(&format!(",{c:e}"));
        }
        out.push('\n');
    }
    out
}

/// File-name friendly form of a parameter value.
pub fn slug(label: &str) -> String {
    label.replace('.', "p").replace('-', "m")
}
