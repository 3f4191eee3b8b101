//! On-disk formats and the command-line front end for the tactile pipeline.

pub mod calib_io;
pub mod cli;
pub mod dataset_io;
pub mod model_io;
pub mod report_io;
