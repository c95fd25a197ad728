//! Built-in benchmark networks.

use alloc::{string::ToString, vec, vec::Vec};
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::network::{RateLaw, Reaction, ReactionNetwork, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinModel {
    /// `A -> B` (slow gateway) followed by `B -> B + C` (fast production).
    Bottleneck,
    /// Mutually repressing genes `U`, `V` with Hill-type production.
    Toggle,
    /// Three-species Oregonator (Belousov-Zhabotinsky reduction).
    Oregonator,
    /// Robertson's stiff autocatalytic system.
    Robertson,
}

impl BuiltinModel {
    pub const ALL: [BuiltinModel; 4] =
        [Self::Bottleneck, Self::Toggle, Self::Oregonator, Self::Robertson];

    pub fn name(self) -> &'static str {
        match self {
            Self::Bottleneck => "bottleneck",
            Self::Toggle => "toggle",
            Self::Oregonator => "oregonator",
            Self::Robertson => "robertson",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::Bottleneck => "A -> B (k1 = 1e-6), B -> B + C (k2 = 1); x0 = (1, 0, 0)",
            Self::Toggle => "toggle switch with Hill repression (n = 3, eta = 1); x0 = (85, 5)",
            Self::Oregonator => "Oregonator, steady state (500, 1000, 2000); x0 = steady state",
            Self::Robertson => "Robertson, k = (0.04, 3e7, 1e4); x0 = (10000, 0, 0)",
        }
    }

    pub fn build(self) -> (ReactionNetwork, State) {
        match self {
            Self::Bottleneck => bottleneck(),
            Self::Toggle => (toggle_switch(1.0), State::from([85, 5])),
            Self::Oregonator => oregonator(),
            Self::Robertson => robertson(),
        }
    }
}

impl fmt::Display for BuiltinModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BuiltinModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// Network and initial state of a built-in model, looked up by name.
pub fn builtin_model(name: &str) -> Result<(ReactionNetwork, State)> {
    Ok(name.parse::<BuiltinModel>()?.build())
}

fn species(names: &[&str]) -> Vec<alloc::string::String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn bottleneck() -> (ReactionNetwork, State) {
    let reactions = vec![
        Reaction::new("A -> B", [-1, 1, 0], RateLaw::mass_action(1e-6, [1, 0, 0])),
        Reaction::new("B -> B + C", [0, 0, 1], RateLaw::mass_action(1.0, [0, 1, 0])),
    ];
    let net = ReactionNetwork::new(species(&["A", "B", "C"]), reactions).expect("valid model");
    (net, State::from([1, 0, 0]))
}

/// Toggle switch with volume scaling `eta` applied to both production channels.
pub fn toggle_switch(eta: f64) -> ReactionNetwork {
    let hill = |repressor| RateLaw::HillProduction {
        eta,
        base: 20.0,
        amplitude: 400.0,
        threshold: 100.0,
        exponent: 3.0,
        repressor,
    };
    // d1 + s*gamma/(1+s) has no state dependence, so U decay is first order.
    let (d1, s, gamma) = (1.0, 0.1, 1.0);
    let u_decay = d1 + s * gamma / (1.0 + s);
    let reactions = vec![
        Reaction::new("0 -> U", [1, 0], hill(1)),
        Reaction::new("U -> 0", [-1, 0], RateLaw::mass_action(u_decay, [1, 0])),
        Reaction::new("0 -> V", [0, 1], hill(0)),
        Reaction::new("V -> 0", [0, -1], RateLaw::mass_action(1.0, [0, 1])),
    ];
    ReactionNetwork::new(species(&["U", "V"]), reactions).expect("valid model")
}

fn oregonator() -> (ReactionNetwork, State) {
    let reactions = vec![
        Reaction::new("Y -> X", [1, -1, 0], RateLaw::mass_action(2.0, [0, 1, 0])),
        Reaction::new("X + Y -> 0", [-1, -1, 0], RateLaw::mass_action(0.1, [1, 1, 0])),
        Reaction::new("X -> 2X + Z", [1, 0, 1], RateLaw::mass_action(104.0, [1, 0, 0])),
        Reaction::new("2X -> 0", [-2, 0, 0], RateLaw::mass_action(0.016, [2, 0, 0])),
        Reaction::new("Z -> Y", [0, 1, -1], RateLaw::mass_action(26.0, [0, 0, 1])),
    ];
    let net = ReactionNetwork::new(species(&["X", "Y", "Z"]), reactions).expect("valid model");
    (net, State::from([500, 1000, 2000]))
}

fn robertson() -> (ReactionNetwork, State) {
    let reactions = vec![
        Reaction::new("A -> B", [-1, 1, 0], RateLaw::mass_action(0.04, [1, 0, 0])),
        Reaction::new("2B -> B + C", [0, -1, 1], RateLaw::mass_action(3e7, [0, 2, 0])),
        Reaction::new("B + C -> A + C", [1, -1, 0], RateLaw::mass_action(1e4, [0, 1, 1])),
    ];
    let net = ReactionNetwork::new(species(&["A", "B", "C"]), reactions).expect("valid model");
    (net, State::from([10000, 0, 0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Kinetics;

    fn mass_action_rates(net: &ReactionNetwork) -> Vec<f64> {
        net.reactions()
            .iter()
            .map(|r| match &r.rate_law {
                RateLaw::MassAction { rate, .. } => *rate,
                _ => f64::NAN,
            })
            .collect()
    }

    #[test]
    fn bottleneck_parameters() {
        let (net, x0) = builtin_model("bottleneck").unwrap();
        assert_eq!(net.n_species(), 3);
        assert_eq!(net.n_reactions(), 2);
        assert_eq!(mass_action_rates(&net), vec![1e-6, 1.0]);
        assert_eq!(x0.counts(), &[1, 0, 0]);
    }

    #[test]
    fn robertson_parameters() {
        let (net, x0) = builtin_model("robertson").unwrap();
        assert_eq!(mass_action_rates(&net), vec![0.04, 3e7, 1e4]);
        assert_eq!(x0.counts(), &[10000, 0, 0]);
    }

    #[test]
    fn oregonator_parameters() {
        let (net, x0) = builtin_model("oregonator").unwrap();
        assert_eq!(net.n_reactions(), 5);
        assert_eq!(mass_action_rates(&net), vec![2.0, 0.1, 104.0, 0.016, 26.0]);
        assert_eq!(x0.counts(), &[500, 1000, 2000]);
    }

    #[test]
    fn toggle_parameters() {
        let (net, x0) = builtin_model("toggle").unwrap();
        assert_eq!(x0.counts(), &[85, 5]);
        let decay = net.rate(1, &[1, 0]);
        assert!((decay - (1.0 + 0.1 / 1.1)).abs() < 1e-15);
        assert_eq!(net.rate(3, &[0, 1]), 1.0);
        let scaled = toggle_switch(100.0);
        assert_eq!(scaled.rate(0, &[0, 0]), 42_000.0);
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!("Robertson".parse::<BuiltinModel>().unwrap(), BuiltinModel::Robertson);
        assert_eq!(
            builtin_model("brusselator").unwrap_err(),
            Error::UnknownModel("brusselator".into())
        );
    }
}
