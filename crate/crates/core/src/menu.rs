//! Finite incentive menus shared by every discretization.

use serde::{Deserialize, Serialize};

use crate::domain::{IncentiveMode, IncentiveVector};
use crate::error::{invalid, Result};

/// Two menu items closer than this in the sup norm are the same item.
pub const DEDUP_TOL: f64 = 1e-15;

/// Where a menu item came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Zero,
    /// Minimum incentive that entices `agent` onto `arm`; `agent == None`
    /// marks the zero level of that arm (only meaningful when perturbed).
    Threshold {
        arm: usize,
        agent: Option<usize>,
        perturbed: bool,
    },
    /// Interior representative of a vertex of a best-response polytope.
    Vertex {
        profile: Vec<usize>,
    },
    Grid,
    Manual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MenuItem {
    pub incentive: IncentiveVector,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Menu {
    items: Vec<MenuItem>,
}

impl Menu {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a menu from items already known to be distinct.
    pub fn from_distinct(items: Vec<MenuItem>) -> Self {
        Self { items }
    }

    /// Appends unless an existing item matches within [`DEDUP_TOL`].
    /// Returns whether the item was added.
    pub fn push_dedup(&mut self, item: MenuItem) -> bool {
        if self
            .items
            .iter()
            .any(|it| it.incentive.linf_distance(&item.incentive) <= DEDUP_TOL)
        {
            return false;
        }
        self.items.push(item);
        true
    }

    pub fn items(&self) -> &[MenuItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn get(&self, idx: usize) -> Option<&IncentiveVector> {
        self.items.get(idx).map(|it| &it.incentive)
    }

    pub fn incentives(&self) -> impl Iterator<Item = &IncentiveVector> {
        self.items.iter().map(|it| &it.incentive)
    }

    pub fn num_arms(&self) -> Option<usize> {
        self.items.first().map(|it| it.incentive.len())
    }

    pub fn to_records(&self) -> Vec<MenuRecord> {
        self.items.iter().map(MenuRecord::from_item).collect()
    }

    pub fn from_records(records: &[MenuRecord], num_arms: usize) -> Result<Self> {
        let mut items = Vec::with_capacity(records.len());
        for r in records {
            items.push(r.to_item(num_arms)?);
        }
        Ok(Self { items })
    }
}

/// Serialized form of one menu item. Single-arm items use
/// `support_arm`/`value`; general items carry the full `values` vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MenuRecord {
    pub support_arm: Option<usize>,
    pub value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    pub provenance: Provenance,
}

impl MenuRecord {
    fn from_item(item: &MenuItem) -> Self {
        let inc = &item.incentive;
        match inc.mode() {
            IncentiveMode::Single => {
                let arm = inc.top_arm();
                Self {
                    support_arm: arm,
                    value: arm.map_or(0.0, |a| inc.values()[a]),
                    values: None,
                    provenance: item.provenance.clone(),
                }
            }
            IncentiveMode::General => Self {
                support_arm: None,
                value: 0.0,
                values: Some(inc.values().to_vec()),
                provenance: item.provenance.clone(),
            },
        }
    }

    fn to_item(&self, num_arms: usize) -> Result<MenuItem> {
        let incentive = match (&self.values, self.support_arm) {
            (Some(vals), _) => {
                if vals.len() != num_arms {
                    return invalid("menu record length does not match the instance");
                }
                IncentiveVector::new(vals.clone(), IncentiveMode::General)?
            }
            (None, Some(arm)) => IncentiveVector::single(num_arms, arm, self.value)?,
            (None, None) => IncentiveVector::zero(num_arms, IncentiveMode::Single),
        };
        Ok(MenuItem {
            incentive,
            provenance: self.provenance.clone(),
        })
    }
}
