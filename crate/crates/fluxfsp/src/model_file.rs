//! JSON model definitions.
//!
//! ```json
//! {
//!   "species": ["A", "B"],
//!   "reactions": [
//!     {"label": "A -> B", "stoichiometry": [-1, 1],
//!      "rate_law": {"type": "mass_action", "k": 0.5, "reactant_counts": [1, 0]}}
//!   ],
//!   "initial_state": [10, 0]
//! }
//! ```

use std::fs;
use std::path::Path;

use fluxfsp_core::{RateLaw, Reaction, ReactionNetwork, State};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub species: Vec<String>,
    pub reactions: Vec<ReactionDef>,
    pub initial_state: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReactionDef {
    #[serde(default)]
    pub label: String,
    pub stoichiometry: Vec<i32>,
    pub rate_law: RateLawDef,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RateLawDef {
    MassAction {
        k: f64,
        reactant_counts: Vec<u32>,
    },
    HillProduction {
        #[serde(default = "one")]
        eta: f64,
        base: f64,
        amplitude: f64,
        threshold: f64,
        exponent: f64,
        repressor: usize,
    },
}

fn one() -> f64 {
    1.0
}

impl From<&RateLaw> for RateLawDef {
    fn from(law: &RateLaw) -> Self {
        match law {
            RateLaw::MassAction { rate, reactants } => {
                RateLawDef::MassAction { k: *rate, reactant_counts: reactants.clone() }
            }
            RateLaw::HillProduction { eta, base, amplitude, threshold, exponent, repressor } => {
                RateLawDef::HillProduction {
                    eta: *eta,
                    base: *base,
                    amplitude: *amplitude,
                    threshold: *threshold,
                    exponent: *exponent,
                    repressor: *repressor,
                }
            }
        }
    }
}

impl From<RateLawDef> for RateLaw {
    fn from(def: RateLawDef) -> Self {
        match def {
            RateLawDef::MassAction { k, reactant_counts } => RateLaw::mass_action(k, reactant_counts),
            RateLawDef::HillProduction { eta, base, amplitude, threshold, exponent, repressor } => {
                RateLaw::HillProduction { eta, base, amplitude, threshold, exponent, repressor }
            }
        }
    }
}

impl ModelFile {
    pub fn from_network(net: &ReactionNetwork, x0: &State) -> Self {
        Self {
            species: net.species().to_vec(),
            reactions: net
                .reactions()
                .iter()
                .map(|r| ReactionDef {
                    label: r.label.clone(),
                    stoichiometry: r.stoichiometry.clone(),
                    rate_law: (&r.rate_law).into(),
                })
                .collect(),
            initial_state: x0.to_vec(),
        }
    }

    /// Validated network and initial state.
    pub fn into_network(self) -> CliResult<(ReactionNetwork, State)> {
        let reactions = self
            .reactions
            .into_iter()
            .map(|r| Reaction::new(r.label, r.stoichiometry, r.rate_law.into()))
            .collect();
        let net = ReactionNetwork::new(self.species, reactions).map_err(|e| CliError::config(format!("invalid model: {e}")))?;
        net.check_state(&self.initial_state)
            .map_err(|e| CliError::config(format!("invalid initial_state: {e}")))?;
        Ok((net, State::from(self.initial_state)))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fluxfsp_core::BuiltinModel;

    #[test]
    fn builtins_round_trip_through_json() {
        for model in BuiltinModel::ALL {
            let (net, x0) = model.build();
            let text = serde_json::to_string(&ModelFile::from_network(&net, &x0)).unwrap();
            let (back, y0) = serde_json::from_str::<ModelFile>(&text).unwrap().into_network().unwrap();
            assert_eq!(back, net);
            assert_eq!(y0, x0);
        }
    }

    #[test]
    fn parses_documented_format() {
        let text = r#"{
            "species": ["U", "V"],
            "reactions": [
                {"stoichiometry": [1, 0], "label": "0 -> U",
                 "rate_law": {"type": "hill_production", "base": 20, "amplitude": 400,
                              "threshold": 100, "exponent": 3, "repressor": 1}},
                {"stoichiometry": [-1, 0], "rate_law": {"type": "mass_action", "k": 1.0, "reactant_counts": [1, 0]}}
            ],
            "initial_state": [0, 0]
        }"#;
        let (net, _) = serde_json::from_str::<ModelFile>(text).unwrap().into_network().unwrap();
        assert_eq!(net.propensity(0, &[0, 0]).unwrap(), 420.0);
        assert_eq!(net.reactions()[1].label, "");
    }

    #[test]
    fn rejects_bad_models() {
        let unknown = r#"{"species": ["A"], "reactions": [{"stoichiometry": [1],
            "rate_law": {"type": "michaelis_menten", "k": 1}}], "initial_state": [0]}"#;
        assert!(serde_json::from_str::<ModelFile>(unknown).is_err());

        let mismatch = ModelFile {
            species: vec!["A".into()],
            reactions: vec![ReactionDef {
                label: "bad".into(),
                stoichiometry: vec![1, 0],
                rate_law: RateLawDef::MassAction { k: 1.0, reactant_counts: vec![0] },
            }],
            initial_state: vec![0],
        };
        assert_eq!(mismatch.into_network().unwrap_err().exit_code(), 2);

        let bad_state = ModelFile {
            species: vec!["A".into()],
            reactions: vec![ReactionDef {
                label: String::new(),
                stoichiometry: vec![1],
                rate_law: RateLawDef::MassAction { k: 1.0, reactant_counts: vec![0] },
            }],
            initial_state: vec![0, 0],
        };
        assert!(bad_state.into_network().is_err());
    }
}
