use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::rules::EntityKind;

/// Why a detector decided the way it did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    /// Entity kinds that passed both thresholds, with their hit counts.
    Entities(BTreeMap<EntityKind, usize>),
    /// Raw model reply the verdict was parsed from.
    Reply(String),
}

/// One column's binary prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnVerdict {
    pub column: String,
    pub position: usize,
    pub personal: bool,
    pub evidence: Evidence,
}
