//! JSON instance documents.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use ncgg_core::{Agent, GameInstance, Good, UtilityFunction};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoodEntry {
    pub id: String,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityEntry {
    pub kind: String,
    pub param: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentEntry {
    pub id: String,
    pub budget: f64,
    pub utility: UtilityEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub goods: Vec<GoodEntry>,
    pub agents: Vec<AgentEntry>,
    /// `[good id, agent id]` pairs.
    pub edges: Vec<(String, String)>,
}

impl InstanceFile {
    pub fn from_instance(inst: &GameInstance) -> Self {
        InstanceFile {
            goods: inst.goods().iter().map(|g| GoodEntry { id: g.id.clone(), alpha: g.alpha }).collect(),
            agents: inst
                .agents()
                .iter()
                .map(|a| AgentEntry {
                    id: a.id.clone(),
                    budget: a.budget,
                    utility: UtilityEntry { kind: a.utility.kind().to_string(), param: a.utility.param() },
                })
                .collect(),
            edges: inst
                .edges()
                .iter()
                .map(|e| (inst.goods()[e.good].id.clone(), inst.agents()[e.agent].id.clone()))
                .collect(),
        }
    }

    pub fn to_instance(&self) -> Result<GameInstance> {
        let goods = self.goods.iter().map(|g| Good::new(g.id.clone(), g.alpha)).collect();
        let agents = self
            .agents
            .iter()
            .map(|a| {
                let u = UtilityFunction::from_kind(&a.utility.kind, a.utility.param)
                    .with_context(|| format!("agent {:?}", a.id))?;
                Ok(Agent::new(a.id.clone(), u).with_budget(a.budget))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GameInstance::from_named_edges(goods, agents, &self.edges)?)
    }
}

pub fn parse_instance(text: &str) -> Result<GameInstance> {
    let file: InstanceFile = serde_json::from_str(text).context("malformed instance document")?;
    file.to_instance()
}

/// Pretty-printed JSON with a trailing newline.
pub fn serialize_instance(inst: &GameInstance) -> String {
    let mut s = serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("instance serializes");
    s.push('\n');
    s
}

pub fn read_instance(path: &Path) -> Result<GameInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("in {}", path.display()))
}
