use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::{EmbeddingMode, PolicyInput, TrainConfig};
use crate::error::{Error, Result};
use crate::graphnet::{neighbor_sum, observation_dim, SageParams, EMBED_DIM};
use crate::policy::{ActionDistribution, Dense, Mlp, MlpParams, MlpTrace};
use crate::rng::{stream, Purpose};

/// Checkpoint format version.
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub embedding: EmbeddingMode,
    pub policy_input: PolicyInput,
}

impl Architecture {
    pub fn from_config(config: &TrainConfig) -> Self {
        Architecture {
            embedding: config.embedding,
            policy_input: config.policy_input,
        }
    }

    pub fn net_input_dim(&self, m_tasks: usize) -> usize {
        match self.policy_input {
            PolicyInput::Embedding => EMBED_DIM,
            PolicyInput::Concat => observation_dim(m_tasks) + EMBED_DIM,
        }
    }
}

/// Parameters owned by one agent.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentModel {
    pub sage: SageParams,
    pub nets: MlpParams,
}

/// Everything computed by one forward pass, kept for the reverse pass.
#[derive(Clone, Debug)]
pub struct AgentForward {
    pub z: Vec<f64>,
    pub policy: MlpTrace,
    pub value: MlpTrace,
    pub dist: ActionDistribution,
}

impl AgentForward {
    pub fn value(&self) -> f64 {
        self.value.output()[0]
    }
}

impl AgentModel {
    /// Fresh parameters for one member of an `n_agents` team.
    pub fn init<R: Rng + ?Sized>(arch: Architecture, n_agents: usize, m_tasks: usize, hidden: usize, rng: &mut R) -> Self {
        AgentModel {
            sage: SageParams::init_for_neighbors(EMBED_DIM, observation_dim(m_tasks), n_agents.saturating_sub(1), rng),
            nets: MlpParams::init(arch.net_input_dim(m_tasks), hidden, m_tasks + 1, rng),
        }
    }

    pub fn zeros_like(&self) -> Self {
        AgentModel {
            sage: SageParams::zeros(self.sage.out_dim, self.sage.in_dim),
            nets: MlpParams {
                policy: Mlp::zeros(&self.nets.policy.sizes()),
                value: Mlp::zeros(&self.nets.value.sizes()),
            },
        }
    }

    pub fn embed(&self, arch: Architecture, own: &[f64], neighbors: &[f64]) -> Vec<f64> {
        match arch.embedding {
            EmbeddingMode::Sage => self.sage.embed(own, Some(neighbors)),
            EmbeddingMode::Local => self.sage.embed(own, None),
        }
    }

    fn net_input(arch: Architecture, own: &[f64], z: &[f64]) -> Vec<f64> {
        match arch.policy_input {
            PolicyInput::Embedding => z.to_vec(),
            PolicyInput::Concat => own.iter().chain(z).copied().collect(),
        }
    }

    /// Action distribution only.
    pub fn policy(&self, arch: Architecture, own: &[f64], neighbors: &[f64]) -> ActionDistribution {
        let z = self.embed(arch, own, neighbors);
        ActionDistribution::from_logits(self.nets.policy.eval(&Self::net_input(arch, own, &z)))
    }

    /// Action distribution and value estimate.
    pub fn policy_and_value(&self, arch: Architecture, own: &[f64], neighbors: &[f64]) -> (ActionDistribution, f64) {
        let z = self.embed(arch, own, neighbors);
        let input = Self::net_input(arch, own, &z);
        let dist = ActionDistribution::from_logits(self.nets.policy.eval(&input));
        (dist, self.nets.value.eval(&input)[0])
    }

    pub fn forward(&self, arch: Architecture, own: &[f64], neighbors: &[f64]) -> AgentForward {
        let z = self.embed(arch, own, neighbors);
        let input = Self::net_input(arch, own, &z);
        let policy = self.nets.policy.forward(&input);
        let value = self.nets.value.forward(&input);
        let dist = ActionDistribution::from_logits(policy.output().to_vec());
        AgentForward { z, policy, value, dist }
    }

    /// Accumulates into `grads` the gradient of a loss whose derivatives with
    /// respect to the logits and the value estimate are given.
    pub fn backward(
        &self,
        arch: Architecture,
        own: &[f64],
        neighbors: &[f64],
        fwd: &AgentForward,
        d_logits: &[f64],
        d_value: f64,
        grads: &mut AgentModel,
    ) {
        let mut d_input = self.nets.policy.backward(&fwd.policy, d_logits, &mut grads.nets.policy);
        let d_from_value = self.nets.value.backward(&fwd.value, &[d_value], &mut grads.nets.value);
        for (a, b) in d_input.iter_mut().zip(&d_from_value) {
            *a += b;
        }
        let dz = match arch.policy_input {
            PolicyInput::Embedding => &d_input[..],
            PolicyInput::Concat => &d_input[own.len()..],
        };
        let nb = match arch.embedding {
            EmbeddingMode::Sage => Some(neighbors),
            EmbeddingMode::Local => None,
        };
        self.sage.backward(own, nb, &fwd.z, dz, &mut grads.sage);
    }

    pub fn tensors(&self) -> Vec<&[f64]> {
        let mut t: Vec<&[f64]> = self.sage.tensors().to_vec();
        t.extend(self.nets.policy.tensors());
        t.extend(self.nets.value.tensors());
        t
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let AgentModel { sage, nets } = self;
        let mut t: Vec<&mut [f64]> = sage.tensors_mut().into_iter().collect();
        t.extend(nets.policy.tensors_mut());
        t.extend(nets.value.tensors_mut());
        t
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}

/// The independent models of every agent in a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub n_agents: usize,
    pub m_tasks: usize,
    pub arch: Architecture,
    pub agents: Vec<AgentModel>,
}

impl TrainedModel {
    /// Fresh parameters; agent `i` draws from its own stream.
    pub fn init(n_agents: usize, m_tasks: usize, config: &TrainConfig, seed: u64) -> Self {
        let arch = Architecture::from_config(config);
        let agents = (0..n_agents)
            .map(|i| AgentModel::init(arch, n_agents, m_tasks, config.hidden, &mut stream(seed, Purpose::Init, i as u64)))
            .collect();
        TrainedModel {
            n_agents,
            m_tasks,
            arch,
            agents,
        }
    }

    pub fn check_shape(&self, n_agents: usize, m_tasks: usize) -> Result<()> {
        if self.n_agents != n_agents || self.m_tasks != m_tasks {
            return Err(Error::Shape(format!(
                "model was trained for {} agents and {} tasks, scenario has {} and {}",
                self.n_agents, self.m_tasks, n_agents, m_tasks
            )));
        }
        Ok(())
    }

    /// Greedy action of agent `i` given every agent's raw observation.
    pub fn greedy_action(&self, i: usize, all: &[Vec<f64>]) -> usize {
        let nb = neighbor_sum(all, i);
        self.agents[i].policy(self.arch, &all[i], &nb).argmax()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&Checkpoint::from_model(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Checkpoint = serde_json::from_str(text)?;
        doc.into_model()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Checkpoint {
    version: u32,
    n_agents: usize,
    m_tasks: usize,
    embed_dim: usize,
    embedding: EmbeddingMode,
    policy_input: PolicyInput,
    agents: Vec<AgentDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AgentDoc {
    sage: SageDoc,
    policy: MlpDoc,
    value: MlpDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SageDoc {
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
    #[serde(rename = "W_prime")]
    w_prime: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MlpDoc {
    layers: Vec<LayerDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerDoc {
    weight: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

fn rows(flat: &[f64], cols: usize) -> Vec<Vec<f64>> {
    flat.chunks(cols).map(<[f64]>::to_vec).collect()
}

fn flatten(rows: Vec<Vec<f64>>, expect_rows: usize, cols: usize, what: &str) -> Result<Vec<f64>> {
    if rows.len() != expect_rows || rows.iter().any(|r| r.len() != cols) {
        return Err(Error::Shape(format!("{what}: expected {expect_rows}x{cols} matrix")));
    }
    Ok(rows.concat())
}

impl MlpDoc {
    fn from_mlp(mlp: &Mlp) -> Self {
        MlpDoc {
            layers: mlp
                .layers
                .iter()
                .map(|l| LayerDoc {
                    weight: rows(&l.weight, l.inputs),
                    bias: l.bias.clone(),
                })
                .collect(),
        }
    }

    fn into_mlp(self, what: &str) -> Result<Mlp> {
        let mut layers = Vec::with_capacity(self.layers.len());
        for (k, l) in self.layers.into_iter().enumerate() {
            let outputs = l.bias.len();
            let inputs = l.weight.first().map_or(0, Vec::len);
            if let Some(prev) = layers.last().map(|p: &Dense| p.outputs) {
                if prev != inputs {
                    return Err(Error::Shape(format!("{what} layer {k}: input width {inputs} != {prev}")));
                }
            }
            let weight = flatten(l.weight, outputs, inputs, what)?;
            layers.push(Dense {
                inputs,
                outputs,
                weight,
                bias: l.bias,
            });
        }
        if layers.is_empty() {
            return Err(Error::Shape(format!("{what}: no layers")));
        }
        Ok(Mlp { layers })
    }
}

impl Checkpoint {
    fn from_model(model: &TrainedModel) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            n_agents: model.n_agents,
            m_tasks: model.m_tasks,
            embed_dim: EMBED_DIM,
            embedding: model.arch.embedding,
            policy_input: model.arch.policy_input,
            agents: model
                .agents
                .iter()
                .map(|a| AgentDoc {
                    sage: SageDoc {
                        w: rows(&a.sage.w, a.sage.in_dim),
                        w_prime: rows(&a.sage.w_neighbor, a.sage.in_dim),
                    },
                    policy: MlpDoc::from_mlp(&a.nets.policy),
                    value: MlpDoc::from_mlp(&a.nets.value),
                })
                .collect(),
        }
    }

    fn into_model(self) -> Result<TrainedModel> {
        if self.version != CHECKPOINT_VERSION {
            return Err(Error::Shape(format!("unsupported checkpoint version {}", self.version)));
        }
        if self.embed_dim != EMBED_DIM {
            return Err(Error::Shape(format!(
                "checkpoint embedding width {} != {EMBED_DIM}",
                self.embed_dim
            )));
        }
        if self.agents.len() != self.n_agents {
            return Err(Error::Shape("agent count does not match n_agents".into()));
        }
        let arch = Architecture {
            embedding: self.embedding,
            policy_input: self.policy_input,
        };
        let in_dim = observation_dim(self.m_tasks);
        let net_in = arch.net_input_dim(self.m_tasks);
        let mut agents = Vec::with_capacity(self.n_agents);
        for (i, a) in self.agents.into_iter().enumerate() {
            let sage = SageParams {
                out_dim: EMBED_DIM,
                in_dim,
                w: flatten(a.sage.w, EMBED_DIM, in_dim, "sage W")?,
                w_neighbor: flatten(a.sage.w_prime, EMBED_DIM, in_dim, "sage W_prime")?,
            };
            let policy = a.policy.into_mlp("policy")?;
            let value = a.value.into_mlp("value")?;
            if policy.input_dim() != net_in || value.input_dim() != net_in {
                return Err(Error::Shape(format!("agent {i}: network input width != {net_in}")));
            }
            if policy.output_dim() != self.m_tasks + 1 || value.output_dim() != 1 {
                return Err(Error::Shape(format!("agent {i}: network output width mismatch")));
            }
            agents.push(AgentModel {
                sage,
                nets: MlpParams { policy, value },
            });
        }
        Ok(TrainedModel {
            n_agents: self.n_agents,
            m_tasks: self.m_tasks,
            arch,
            agents,
        })
    }
}
