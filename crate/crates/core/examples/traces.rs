//! Generates the request, band-rate and bandwidth traces, writes them as
//! CSV and cuts per-agent datasets from them.
use xlayer::simenv::{build_datasets, generate_traces, read_trace_csv, write_trace_set, DatasetParams, TraceConfig};

fn main() -> xlayer::Result<()> {
    let cfg = TraceConfig::default().with_seed(7).with_duration(1200);
    let set = generate_traces(&cfg)?;
    for t in set.all() {
        let mean = t.values.iter().sum::<f64>() / t.len() as f64;
        println!("{:>10}: {} samples every {} s, mean {mean:.2} {}", t.signal, t.len(), t.period_s, t.unit);
    }

    let params = DatasetParams::default();
    let data = build_datasets(&set, &params, 7)?;
    for (name, split) in [("application", &data.application), ("physical", &data.physical), ("network", &data.network)] {
        println!("{name:>11}: {} train / {} holdout windows", split.train.len(), split.holdout.len());
    }

    let dir = std::env::temp_dir().join("xlayer-traces-example");
    let files = write_trace_set(&set, &params, 7, &dir)?;
    let back = read_trace_csv(&files[0])?;
    assert_eq!(back, set.requests);
    println!("wrote {} files to {}", files.len(), dir.display());
    Ok(())
}
