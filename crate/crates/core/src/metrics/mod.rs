// SPDX-License-Identifier: Apache-2.0
//! Area, timing and comparison of generated multipliers.

pub mod compare;
pub mod cost;
pub mod libs;
pub mod path;
pub mod timing;

pub use compare::{compare, ComparisonReport};
pub use cost::{area_estimate, default_cost_library, CostLibrary};
pub use path::{critical_path, critical_path_scoped, CriticalPath, PathScope};
pub use timing::{calibrate_timing, timing_preset, TimingLibrary};
