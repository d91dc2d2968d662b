use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twinslice::allocators::{AllocatorKind, PfAllocator, StaticAllocator};
use twinslice::config::{FadingModel, ScenarioConfig};
use twinslice::ddpg::{Checkpoint, DdpgAgent};
use twinslice::harness::record::{read_records, write_records};
use twinslice::harness::{compare, simulate, staleness_sweep, write_csv, MetricsRecord};
use twinslice::par::Execution;

fn small() -> ScenarioConfig {
    ScenarioConfig {
        num_ues: 5,
        hidden_units: 8,
        eval_steps: 300,
        final_window: 100,
        jitter_window: 20,
        ..Default::default()
    }
}

fn checkpoint(cfg: &ScenarioConfig) -> Checkpoint {
    Checkpoint::from_agent(&DdpgAgent::new(cfg, 99))
}

#[test]
fn paired_seeds_share_demand_traces() {
    let cfg = small();
    let trace = |alloc: &mut dyn twinslice::allocators::Allocator| {
        let mut demands = Vec::new();
        let mut gains = Vec::new();
        simulate(&cfg, alloc, 17, 200, |t| {
            demands.push(t.obs.demands.clone());
            gains.push(t.obs.gain_sq.clone());
        })
        .unwrap();
        (demands, gains)
    };
    let a = trace(&mut StaticAllocator::new(&cfg));
    let b = trace(&mut PfAllocator::new(&cfg));
    assert_eq!(a.0, b.0);
    // The FBS path does not depend on the allocation either.
    assert_eq!(a.1, b.1);
}

#[test]
fn compare_is_byte_identical_across_runs_and_modes() {
    let cfg = small();
    let ck = checkpoint(&cfg);
    let bytes = |exec| {
        let runs = compare(&cfg, Some(&ck), 4, exec).unwrap();
        let rows: Vec<MetricsRecord> = runs.iter().flat_map(|r| r.records.clone()).collect();
        let mut buf = Vec::new();
        write_records(&rows, &mut buf).unwrap();
        buf
    };
    let first = bytes(Execution::Parallel);
    assert_eq!(first, bytes(Execution::Parallel));
    assert_eq!(first, bytes(Execution::Sequential));
}

#[test]
fn csv_round_trip_is_field_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let rows: Vec<MetricsRecord> = (0..50)
        .map(|k| MetricsRecord {
            time: rng.random::<f64>() * 50.0,
            allocator: AllocatorKind::ALL[k % 3],
            avg_latency: rng.random::<f64>() * 1e-2,
            utilization: rng.random(),
            jitter: rng.random::<f64>() / 3.0,
            mean_sync_error: rng.random::<f64>() * 1e5,
            reward: -rng.random::<f64>(),
            seed: rng.random(),
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    write_csv(&rows[..3], &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 4);

    let mut buf = Vec::new();
    write_records(&rows, &mut buf).unwrap();
    let back: Vec<MetricsRecord> = read_records(buf.as_slice()).unwrap();
    assert_eq!(back, rows);
}

#[test]
fn exact_twin_matches_physical_latencies() {
    let cfg = ScenarioConfig {
        sync_period: 1,
        ema_alpha: 1.0,
        fading: FadingModel::Frozen,
        ntn_interference_std: 0.0,
        ..small()
    };
    for alloc in [&mut StaticAllocator::new(&cfg) as &mut dyn twinslice::allocators::Allocator, &mut PfAllocator::new(&cfg)] {
        simulate(&cfg, alloc, 8, 200, |t| {
            assert_eq!(t.estimated, t.outcome.latencies.as_slice(), "tick {}", t.tick);
        })
        .unwrap();
    }
}

#[test]
fn stale_twin_drifts_further() {
    // Past the fading coherence time a stale tick is about as wrong as it
    // gets, so the gap between long periods is small: average many ticks.
    let cfg = ScenarioConfig {
        eval_steps: 4000,
        ..small()
    };
    let sweep = staleness_sweep(&cfg, AllocatorKind::Static, None, &[1, 5, 10, 50], &[1, 2, 3, 4, 5, 6], Execution::Parallel).unwrap();
    for pair in sweep.windows(2) {
        assert!(pair[1].1 > pair[0].1, "{sweep:?}");
    }
}
