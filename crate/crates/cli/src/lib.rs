//! Library surface of the `sim` command-line runner: configuration
//! parsing, experiment orchestration, and reproducible artifact output.

pub mod config;
pub mod manifest;
pub mod pgm;
pub mod runner;

pub use config::ExperimentConfig;
pub use runner::StudyKind;

/// Cap the rayon worker pool from the SIM_THREADS environment variable;
/// call once at startup.
pub fn init_thread_pool() {
    if let Ok(v) = std::env::var("SIM_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .ok();
            }
        }
    }
}
