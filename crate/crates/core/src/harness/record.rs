//! CSV output. Floats are written in shortest round-trip form, so reading a
//! file back reproduces every field bit for bit.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::allocators::AllocatorKind;
use crate::error::{Error, Result};

/// Bumped whenever a column is added, removed or reordered.
pub const METRICS_SCHEMA_VERSION: u32 = 1;

/// Column order of the metrics CSV, schema version 1.
pub const METRICS_HEADER: [&str; 8] = [
    "time",
    "allocator",
    "avg_latency",
    "utilization",
    "jitter",
    "mean_sync_error",
    "reward",
    "seed",
];

/// One row per recording interval, averaged over the interval's ticks
/// except `jitter`, which is the windowed value at the interval's end.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    /// End of the interval, s.
    pub time: f64,
    pub allocator: AllocatorKind,
    /// s.
    pub avg_latency: f64,
    pub utilization: f64,
    /// s.
    pub jitter: f64,
    /// bits.
    pub mean_sync_error: f64,
    pub reward: f64,
    pub seed: u64,
}

/// One row per training episode.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub mean_reward: f64,
    pub mean_latency: f64,
    pub sandbox_error: f64,
    pub critic_loss: f64,
    pub noise_std: f64,
}

impl From<&crate::ddpg::EpisodeStats> for EpisodeRecord {
    fn from(s: &crate::ddpg::EpisodeStats) -> Self {
        Self {
            episode: s.episode,
            mean_reward: s.mean_reward,
            mean_latency: s.mean_latency,
            sandbox_error: s.sandbox_error,
            critic_loss: s.critic_loss,
            noise_std: s.noise_std,
        }
    }
}

fn header_of<T: Serialize + Default>() -> Vec<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.serialize(T::default()).expect("serializable default");
    let bytes = w.into_inner().expect("in-memory writer");
    let text = String::from_utf8(bytes).expect("utf-8 csv");
    text.lines().next().unwrap_or("").split(',').map(str::to_owned).collect()
}

/// Writes a header and one row per record. An empty slice still gets the
/// header, which is why the row type must provide a `Default` to name its
/// columns.
pub fn write_records<T: Serialize + Default>(records: &[T], out: impl Write) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header_of::<T>())?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn read_records<T: DeserializeOwned>(input: impl Read) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_csv<T: Serialize + Default>(records: &[T], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_records(records, std::io::BufWriter::new(file))
}

pub fn read_csv<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_records(file)
}
