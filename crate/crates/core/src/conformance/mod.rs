//! Checks that a compiled program behaves like its machine.

mod bisim;
mod canon;
mod determinism;
mod extract;
mod races;

pub use bisim::{bisimulate, bisimulate_with, BisimError, BisimReport, BisimVerdict};
pub use canon::{canonicalize, CanonicalState};
pub use determinism::{check_determinism, DeterminismError, DeterminismReport, Verdict};
pub use extract::{config_equal, extract_config, ExtractError, ImplConfig};
pub use races::{detect_races, Advisory, Race, RaceKind, RaceReport};
