// SPDX-License-Identifier: Apache-2.0
//! Library lookup: explicit files, an override directory, then built-ins.

use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::metrics::cost::{default_cost_library, CostLibrary};
use crate::metrics::timing::{timing_preset, TimingLibrary, PRESETS};

/// Directory whose `cost.toml` and `<preset>.toml` replace the built-ins.
pub const ENV_DEFAULT_LIBS: &str = "MVL_DEFAULT_LIBS";

#[derive(Clone, Debug, Default)]
pub struct LibrarySource {
    pub dir: Option<PathBuf>,
}

impl LibrarySource {
    pub fn from_env() -> Self {
        LibrarySource {
            dir: std::env::var_os(ENV_DEFAULT_LIBS)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from),
        }
    }

    fn override_file(&self, name: &str) -> Option<PathBuf> {
        self.dir
            .as_ref()
            .map(|d| d.join(format!("{name}.toml")))
            .filter(|p| p.is_file())
    }

    /// `path` if given, else the override directory's `cost.toml`, else the default library.
    pub fn cost(&self, path: Option<&Path>) -> Result<CostLibrary> {
        match path
            .map(Path::to_path_buf)
            .or_else(|| self.override_file("cost"))
        {
            Some(p) => CostLibrary::load(&p),
            None => Ok(default_cost_library()),
        }
    }

    /// A preset name (possibly overridden) or a path to a timing file.
    pub fn timing(&self, spec: &str) -> Result<TimingLibrary> {
        if PRESETS.contains(&spec) {
            match self.override_file(spec) {
                Some(p) => TimingLibrary::load(&p),
                None => timing_preset(spec),
            }
        } else {
            TimingLibrary::load(Path::new(spec))
        }
    }
}
