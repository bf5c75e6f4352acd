//! Synthetic network environment: user request traces, per-band channel
//! rates and end-to-end bandwidth, plus per-agent dataset assembly.

mod config;
mod dataset;
mod generate;
mod io;

pub use config::{Ar1Params, BandConfig, TraceConfig};
pub use dataset::{build_datasets, AgentDatasets, DatasetParams};
pub use generate::{
    generate_band_rate_traces, generate_bandwidth_trace, generate_traces, generate_user_requests,
    Trace, TraceSet,
};
pub use io::{read_trace_csv, write_trace_csv, write_trace_set, DatasetManifest};

/// Resolution ladder offered to users.
pub const DEFAULT_LEVELS: [&str; 5] = ["360p", "480p", "640p", "720p", "1080p"];

/// 5G NR bands sensed by the physical layer.
pub const DEFAULT_BANDS: [&str; 5] = ["n1", "n2", "n3", "n5", "n7"];
