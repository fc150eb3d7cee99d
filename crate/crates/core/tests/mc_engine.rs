mod common;

use common::mean_se;
use distfix::metrics::{ks_one_sample, ks_two_sample};
use distfix::{parallel_sample, parallel_sample_with, sample, stream, DistSpec, Error, SamplingOptions};
use rand::RngCore;

#[test]
fn same_seed_and_stream_repeat() {
    let mut a = stream(7, 0);
    let mut b = stream(7, 0);
    let xa: Vec<u64> = (0..1000).map(|_| a.next_u64()).collect();
    let xb: Vec<u64> = (0..1000).map(|_| b.next_u64()).collect();
    assert_eq!(xa, xb);
}

#[test]
fn neighbouring_streams_look_independent() {
    let mut a = stream(7, 0);
    let mut b = stream(7, 1);
    let xa: Vec<f64> = (0..10_000).map(|_| a.uniform()).collect();
    let xb: Vec<f64> = (0..10_000).map(|_| b.uniform()).collect();
    assert_ne!(xa[..10], xb[..10]);
    assert!(ks_two_sample(&xa, &xb, 1e-3).unwrap().pass());
    // lag-zero correlation between the streams
    let (ma, mb) = (common::mean(&xa), common::mean(&xb));
    let cov: f64 = xa.iter().zip(&xb).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / 10_000.0;
    let corr = cov / (1.0 / 12.0);
    assert!(corr.abs() < 4.0 / 100.0, "{corr}");
}

#[test]
fn uniform_mean_within_four_standard_errors() {
    let mut s = stream(7, 0);
    let x: Vec<f64> = (0..100_000).map(|_| s.uniform()).collect();
    assert!(x.iter().all(|v| (0.0..1.0).contains(v)));
    let (m, se) = mean_se(&x);
    assert!((m - 0.5).abs() < 4.0 * se);
}

#[test]
fn one_chunk_equals_single_stream_sampling() {
    let d = DistSpec::gamma(0.7, 2.0).unwrap();
    let batch = parallel_sample(&d, 42, 5000, 1).unwrap();
    let direct = sample(&d, &mut stream(42, 0), 5000).unwrap();
    assert_eq!(batch.values, direct);
    assert_eq!(batch.seed, 42);
    assert_eq!(batch.chunks, 1);
}

#[test]
fn output_does_not_depend_on_worker_count() {
    let d = DistSpec::biased(
        DistSpec::shifted(DistSpec::exponential(1.0).unwrap(), -1.0).unwrap(),
        2.0,
    )
    .unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| parallel_sample(&d, 3, 40_000, 4).unwrap().values)
    };
    let one = run(1);
    assert_eq!(one, run(2));
    assert_eq!(one, run(7));
}

#[test]
fn chunk_layout_changes_the_stream_but_not_the_law() {
    let d = DistSpec::standard_normal();
    let a = parallel_sample(&d, 1, 100_000, 4).unwrap().values;
    let b = parallel_sample(&d, 1, 100_000, 3).unwrap().values;
    assert_ne!(a, b);
    assert_eq!(a.len(), 100_000);
    assert!(ks_one_sample(&a, &d, 1e-3).unwrap().pass());
    assert!(ks_two_sample(&a, &b, 1e-3).unwrap().pass());
}

#[test]
fn sampler_failure_reports_chunk() {
    let d = DistSpec::biased(DistSpec::exponential(1.0).unwrap(), 1.0).unwrap();
    let opts = SamplingOptions {
        max_iterations: 1,
        ..Default::default()
    };
    match parallel_sample_with(&d, 1, 10_000, 3, &opts) {
        Err(Error::Chunk { chunk, source }) => {
            assert!(chunk < 3);
            assert!(matches!(*source, Error::RejectionCapExceeded { .. }));
        }
        other => panic!("expected chunk error, got {other:?}"),
    }
}
