//! Binary checkpoint of the four DDPG networks.
//!
//! Layout, all integers `u32` and all floats `f64`, little-endian:
//!
//! ```text
//! magic  b"TSCK"
//! version            (currently 1)
//! network count      (4: actor, critic, target actor, target critic)
//! per network:
//!     number of sizes n, then n layer sizes
//!     head: 0 linear, 1 bounded tanh; then the bound as f64 (0 if linear)
//!     parameters, layer by layer: weights row-major (in, out), then bias
//! ```

use std::fs;
use std::path::Path;

use crate::config::ScenarioConfig;
use crate::ddpg::agent::DdpgAgent;
use crate::ddpg::mlp::{Head, Mlp};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"TSCK";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub actor: Mlp,
    pub critic: Mlp,
    pub target_actor: Mlp,
    pub target_critic: Mlp,
}

impl Checkpoint {
    pub fn from_agent(agent: &DdpgAgent) -> Self {
        Self {
            actor: agent.actor.clone(),
            critic: agent.critic.clone(),
            target_actor: agent.target_actor.clone(),
            target_critic: agent.target_critic.clone(),
        }
    }

    /// Fails unless the actor fits the scenario's observation and action sizes.
    pub fn check_dims(&self, cfg: &ScenarioConfig) -> Result<()> {
        if self.actor.input_dim() != cfg.obs_dim() {
            return Err(Error::Checkpoint(format!(
                "actor expects {} inputs, scenario observes {}",
                self.actor.input_dim(),
                cfg.obs_dim()
            )));
        }
        if self.actor.output_dim() != cfg.action_dim() {
            return Err(Error::Checkpoint(format!(
                "actor emits {} logits, scenario needs {}",
                self.actor.output_dim(),
                cfg.action_dim()
            )));
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&4u32.to_le_bytes());
        for net in [&self.actor, &self.critic, &self.target_actor, &self.target_critic] {
            let sizes = net.sizes();
            out.extend_from_slice(&(sizes.len() as u32).to_le_bytes());
            for s in sizes {
                out.extend_from_slice(&(s as u32).to_le_bytes());
            }
            let (tag, bound) = match net.head() {
                Head::Linear => (0u32, 0.0),
                Head::Tanh(b) => (1u32, b),
            };
            out.extend_from_slice(&tag.to_le_bytes());
            out.extend_from_slice(&bound.to_le_bytes());
            for p in net.params() {
                out.extend_from_slice(&p.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Checkpoint("not a checkpoint file".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let count = r.u32()?;
        if count != 4 {
            return Err(Error::Checkpoint(format!("expected 4 networks, found {count}")));
        }
        let mut nets = Vec::with_capacity(4);
        for _ in 0..4 {
            let n = r.u32()? as usize;
            if !(2..=64).contains(&n) {
                return Err(Error::Checkpoint(format!("implausible layer count {n}")));
            }
            let sizes = (0..n).map(|_| r.u32().map(|s| s as usize)).collect::<Result<Vec<_>>>()?;
            let head = match (r.u32()?, r.f64()?) {
                (0, _) => Head::Linear,
                (1, b) if b.is_finite() && b > 0.0 => Head::Tanh(b),
                (tag, b) => return Err(Error::Checkpoint(format!("bad output head {tag} with bound {b}"))),
            };
            let mut net = Mlp::zeros(&sizes).with_head(head);
            let params = (0..net.num_params()).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
            net.set_params(&params)?;
            nets.push(net);
        }
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        let mut it = nets.into_iter();
        let mut next = || it.next().expect("four networks");
        Ok(Self {
            actor: next(),
            critic: next(),
            target_actor: next(),
            target_critic: next(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Checkpoint("file is truncated".into()))?;
        self.pos = end;
        Ok(chunk)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}
