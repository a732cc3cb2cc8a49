//! Write a stream file, replay it through the benchmark runner twice, and
//! show the outputs match byte for byte (timing columns disabled).

use kcenter::bench::{run, RunConfig, StreamSource};
use kcenter::pipeline::Mode;
use kcenter::stream::{read_stream, write_stream, GeneratorKind, StreamSpec};

fn main() -> kcenter::Result<()> {
    let dir = std::env::temp_dir().join("kcenter-example");
    std::fs::create_dir_all(&dir)?;
    let stream_path = dir.join("window.txt");

    // A sliding window: after warmup every insert evicts the oldest point.
    let spec = StreamSpec::new(GeneratorKind::SlidingWindow { window: 200 }, 200, 3_000, 77);
    let events = spec.events()?;
    write_stream(&stream_path, spec.bounds(), spec.dim, &events)?;
    println!("wrote {} updates to {}", events.len(), stream_path.display());

    let parsed = read_stream(&stream_path)?;
    let b = parsed.bounds.unwrap();
    println!("declared bounds from the header: dmin={} dmax={:.3}", b.d_min, b.d_max);

    let mut digests = Vec::new();
    for pass in 0..2 {
        let csv = dir.join(format!("pass{pass}.csv"));
        let json = dir.join(format!("pass{pass}.json"));
        let mut cfg = RunConfig::new(Mode::Sparsified, 6, 12345);
        cfg.out_csv = Some(csv.clone());
        cfg.out_json = Some(json.clone());
        cfg.include_timing = false;
        cfg.cost_every = 100;
        let summary = run(&cfg, StreamSource::File(stream_path.clone()))?;
        println!(
            "pass {pass}: amortized recourse {:.4}, final |U| {}",
            summary.aggregate.amortized_recourse, summary.aggregate.final_u_size
        );
        digests.push((std::fs::read(&csv)?, std::fs::read(&json)?));
    }
    assert_eq!(digests[0], digests[1], "same seed, same stream, same bytes");
    println!("replays are byte-identical");
    Ok(())
}
