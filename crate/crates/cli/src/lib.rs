//! Configuration, scenario presets, file formats and run drivers for the
//! `poro-hdg` command-line tool.

pub mod config;
pub mod meshfile;
pub mod mtx;
pub mod presets;
pub mod pulse;
pub mod run;
pub mod units;
pub mod vtk;
