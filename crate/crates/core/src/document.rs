//! The instance document: a JSON file holding `v`, `mu`, 1-based
//! `tie_priority` rows and the incentive `mode`, plus optional smooth
//! `model` blocks (one per agent type), an `arrival` block and a `menu`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{GreedyInstance, IncentiveMode};
use crate::error::{invalid, Result};
use crate::harness::Environment;
use crate::instances::ArrivalDoc;
use crate::menu::{Menu, MenuRecord};
use crate::smooth::{ModelSpec, SmoothChoiceModel, SmoothInstance};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub v: Vec<f64>,
    #[serde(default)]
    pub mu: Vec<Vec<f64>>,
    #[serde(default)]
    pub tie_priority: Vec<Vec<usize>>,
    pub mode: IncentiveMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<Vec<ModelSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrival: Option<ArrivalDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub menu: Option<Vec<MenuRecord>>,
}

impl InstanceDocument {
    pub fn from_greedy(instance: &GreedyInstance, mode: IncentiveMode) -> Self {
        Self {
            name: None,
            v: instance.rewards().to_vec(),
            mu: instance.preferences().to_vec(),
            tie_priority: instance.tie_priority().to_vec(),
            mode,
            model: None,
            arrival: None,
            menu: None,
        }
    }

    /// Fails for models built from closures, which have no document form.
    pub fn from_smooth(instance: &SmoothInstance, mode: IncentiveMode) -> Result<Self> {
        let model = instance
            .types()
            .iter()
            .map(|m| m.spec().cloned())
            .collect::<Option<Vec<_>>>();
        let Some(model) = model else {
            return invalid("custom choice models cannot be serialized");
        };
        Ok(Self {
            name: None,
            v: instance.rewards().to_vec(),
            mu: Vec::new(),
            tie_priority: Vec::new(),
            mode,
            model: Some(model),
            arrival: None,
            menu: None,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_arrival(mut self, arrival: ArrivalDoc) -> Self {
        self.arrival = Some(arrival);
        self
    }

    pub fn with_menu(mut self, menu: &Menu) -> Self {
        self.menu = Some(menu.to_records());
        self
    }

    pub fn is_smooth(&self) -> bool {
        self.model.is_some()
    }

    pub fn greedy(&self) -> Result<GreedyInstance> {
        if self.model.is_some() {
            return invalid("document describes smooth agents");
        }
        GreedyInstance::new(self.v.clone(), self.mu.clone(), self.tie_priority.clone())
    }

    pub fn environment(&self) -> Result<Environment> {
        match &self.model {
            None => Ok(Environment::Greedy(self.greedy()?)),
            Some(specs) => {
                let types = specs
                    .iter()
                    .cloned()
                    .map(SmoothChoiceModel::from_spec)
                    .collect::<Result<Vec<_>>>()?;
                Ok(Environment::Smooth(SmoothInstance::new(self.v.clone(), types)?))
            }
        }
    }

    pub fn menu(&self) -> Result<Option<Menu>> {
        self.menu
            .as_ref()
            .map(|r| Menu::from_records(r, self.v.len()))
            .transpose()
    }

    /// Checks every block, including the arrival process against the number
    /// of agent types.
    pub fn validate(&self) -> Result<()> {
        let env = self.environment()?;
        if let Some(a) = &self.arrival {
            a.spec.validate(env.num_agents())?;
        }
        self.menu()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        doc.validate()?;
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}
