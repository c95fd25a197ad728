//! Reaction networks: species, stoichiometry vectors and rate laws.
//!
//! A network maps a population state `x` (one non-negative copy number per
//! species) to the propensity of each reaction channel. Rate laws are a closed
//! set of named forms; this keeps propensity evaluation branch-light and lets the
//! model file format stay declarative.

use alloc::{format, string::String, vec::Vec};
use core::ops::Deref;

use crate::error::{Error, Result};
use crate::math;

/// Copy numbers, one per species.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(Vec<u32>);

impl State {
    pub fn new(counts: Vec<u32>) -> Self {
        Self(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<u32> {
        self.0
    }
}

impl Deref for State {
    type Target = [u32];

    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for State {
    fn from(counts: Vec<u32>) -> Self {
        Self(counts)
    }
}

impl<const N: usize> From<[u32; N]> for State {
    fn from(counts: [u32; N]) -> Self {
        Self(counts.to_vec())
    }
}

/// Propensity law of a single reaction channel.
#[derive(Debug, Clone, PartialEq)]
pub enum RateLaw {
    /// `k * prod_i C(x_i, r_i)`: falling factorials divided by the permutation
    /// factor of identical reactants, so `2B` contributes `x_B (x_B - 1) / 2`.
    MassAction { rate: f64, reactants: Vec<u32> },
    /// Zeroth-order production repressed by one species:
    /// `eta * (base + amplitude * K^n / (K^n + x_rep^n))`.
    HillProduction {
        eta: f64,
        base: f64,
        amplitude: f64,
        threshold: f64,
        exponent: f64,
        repressor: usize,
    },
}

impl RateLaw {
    pub fn mass_action(rate: f64, reactants: impl Into<Vec<u32>>) -> Self {
        Self::MassAction { rate, reactants: reactants.into() }
    }

    /// Propensity at `x`. The caller guarantees `x` has the network's dimension.
    #[inline]
    pub fn evaluate(&self, x: &[u32]) -> f64 {
        match self {
            RateLaw::MassAction { rate, reactants } => {
                let mut combos = 1.0;
                for (&count, &needed) in x.iter().zip(reactants) {
                    if needed == 0 {
                        continue;
                    }
                    if count < needed {
                        return 0.0;
                    }
                    let mut falling = 1.0;
                    let mut factorial = 1.0;
                    for j in 0..needed {
                        falling *= f64::from(count - j);
                        factorial *= f64::from(j + 1);
                    }
                    combos *= falling / factorial;
                }
                rate * combos
            }
            RateLaw::HillProduction { eta, base, amplitude, threshold, exponent, repressor } => {
                let level = f64::from(x[*repressor]);
                let repression = if *threshold == 0.0 {
                    if level == 0.0 { 1.0 } else { 0.0 }
                } else {
                    let ratio = level / threshold;
                    let scaled = if math::floor(*exponent) == *exponent && *exponent <= 64.0 {
                        math::powi(ratio, *exponent as u32)
                    } else {
                        math::powf(ratio, *exponent)
                    };
                    1.0 / (1.0 + scaled)
                };
                eta * (base + amplitude * repression)
            }
        }
    }

    fn validate(&self, n_species: usize, stoichiometry: &[i32], label: &str) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidModel(format!("reaction `{label}`: {what}")));
        match self {
            RateLaw::MassAction { rate, reactants } => {
                if !(rate.is_finite() && *rate >= 0.0) {
                    return bad("mass-action rate must be finite and non-negative");
                }
                if reactants.len() != n_species {
                    return bad("reactant count vector length differs from the species count");
                }
                // Consumption beyond the declared reactants would let a positive
                // propensity fire into a negative count.
                for (nu, &r) in stoichiometry.iter().zip(reactants) {
                    if *nu < 0 && nu.unsigned_abs() > r {
                        return bad("stoichiometry consumes more copies than the reactant counts");
                    }
                }
            }
            RateLaw::HillProduction { eta, base, amplitude, threshold, exponent, repressor } => {
                for (name, v) in [
                    ("eta", eta),
                    ("base", base),
                    ("amplitude", amplitude),
                    ("threshold", threshold),
                ] {
                    if !(v.is_finite() && *v >= 0.0) {
                        return bad(&format!("Hill parameter `{name}` must be finite and non-negative"));
                    }
                }
                if !(exponent.is_finite() && *exponent >= 1.0) {
                    return bad("Hill exponent must be at least 1");
                }
                if *repressor >= n_species {
                    return bad("Hill repressor index out of range");
                }
                if stoichiometry.iter().any(|&nu| nu < 0) {
                    return bad("zeroth-order production cannot consume species");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    pub stoichiometry: Vec<i32>,
    pub rate_law: RateLaw,
    pub label: String,
}

impl Reaction {
    pub fn new(label: impl Into<String>, stoichiometry: impl Into<Vec<i32>>, rate_law: RateLaw) -> Self {
        Self { stoichiometry: stoichiometry.into(), rate_law, label: label.into() }
    }
}

/// Anything that can supply stoichiometry vectors and propensities.
///
/// [`ReactionNetwork`] is the canonical implementation; wrappers (for example an
/// evaluation counter) can implement it to instrument assembly.
pub trait Kinetics {
    fn n_species(&self) -> usize;
    fn n_reactions(&self) -> usize;
    fn stoichiometry(&self, k: usize) -> &[i32];
    /// Propensity of reaction `k` at `x`; unchecked.
    fn rate(&self, k: usize, x: &[u32]) -> f64;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionNetwork {
    species: Vec<String>,
    reactions: Vec<Reaction>,
}

impl ReactionNetwork {
    pub fn new(species: Vec<String>, reactions: Vec<Reaction>) -> Result<Self> {
        if species.is_empty() {
            return Err(Error::InvalidModel("a network needs at least one species".into()));
        }
        if reactions.is_empty() {
            return Err(Error::InvalidModel("a network needs at least one reaction".into()));
        }
        let d = species.len();
        for r in &reactions {
            if r.stoichiometry.len() != d {
                return Err(Error::InvalidModel(format!(
                    "reaction `{}` has {} stoichiometry entries for {} species",
                    r.label,
                    r.stoichiometry.len(),
                    d
                )));
            }
            if r.stoichiometry.iter().all(|&nu| nu == 0) {
                return Err(Error::InvalidModel(format!(
                    "reaction `{}` does not change the state",
                    r.label
                )));
            }
            r.rate_law.validate(d, &r.stoichiometry, &r.label)?;
        }
        Ok(Self { species, reactions })
    }

    pub fn species(&self) -> &[String] {
        &self.species
    }

    pub fn reactions(&self) -> &[Reaction] {
        &self.reactions
    }

    pub fn reaction(&self, k: usize) -> Result<&Reaction> {
        self.reactions
            .get(k)
            .ok_or(Error::ReactionOutOfRange { index: k, count: self.reactions.len() })
    }

    /// Checked propensity `alpha_k(x)`.
    pub fn propensity(&self, k: usize, x: &[u32]) -> Result<f64> {
        let reaction = self.reaction(k)?;
        self.check_state(x)?;
        Ok(reaction.rate_law.evaluate(x))
    }

    pub fn check_state(&self, x: &[u32]) -> Result<()> {
        if x.len() != self.species.len() {
            return Err(Error::DimensionMismatch { expected: self.species.len(), found: x.len() });
        }
        Ok(())
    }

    /// Total exit rate `w(x) = sum_k alpha_k(x)`.
    pub fn exit_rate(&self, x: &[u32]) -> f64 {
        self.reactions.iter().map(|r| r.rate_law.evaluate(x)).sum()
    }
}

impl Kinetics for ReactionNetwork {
    #[inline]
    fn n_species(&self) -> usize {
        self.species.len()
    }

    #[inline]
    fn n_reactions(&self) -> usize {
        self.reactions.len()
    }

    #[inline]
    fn stoichiometry(&self, k: usize) -> &[i32] {
        &self.reactions[k].stoichiometry
    }

    #[inline]
    fn rate(&self, k: usize, x: &[u32]) -> f64 {
        self.reactions[k].rate_law.evaluate(x)
    }
}

/// `x + nu`, or `None` when a count would go negative (or overflow).
pub fn apply(x: &[u32], nu: &[i32]) -> Option<State> {
    if x.len() != nu.len() {
        return None;
    }
    let mut out = alloc::vec![0; x.len()];
    apply_into(x, nu, &mut out).then(|| State(out))
}

/// Writes `x + nu` into `out`; returns `false` if infeasible (contents unspecified).
#[inline]
pub fn apply_into(x: &[u32], nu: &[i32], out: &mut [u32]) -> bool {
    for ((o, &xi), &d) in out.iter_mut().zip(x).zip(nu) {
        let v = i64::from(xi) + i64::from(d);
        if v < 0 || v > i64::from(u32::MAX) {
            return false;
        }
        *o = v as u32;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{builtin_model, BuiltinModel};
    use alloc::vec;

    #[test]
    fn robertson_first_reaction_at_initial_state() {
        let (net, x0) = builtin_model("robertson").unwrap();
        let a = net.propensity(0, &x0).unwrap();
        assert!((a - 400.0).abs() < 1e-9, "{a}");
    }

    #[test]
    fn dimerisation_needs_two_copies() {
        let (net, _) = builtin_model("robertson").unwrap();
        assert_eq!(net.propensity(1, &[9999, 1, 0]).unwrap(), 0.0);
        // k2 * 2 * 1 / 2
        assert_eq!(net.propensity(1, &[9998, 2, 0]).unwrap(), 3e7);
        assert_eq!(net.propensity(1, &[0, 5, 0]).unwrap(), 3e7 * 10.0);
    }

    #[test]
    fn toggle_production_without_repressor() {
        let (net, _) = builtin_model("toggle").unwrap();
        // 1.0 * (20 + 400 * 100^3 / (100^3 + 0^3))
        assert_eq!(net.propensity(0, &[0, 0]).unwrap(), 420.0);
        // half-repressed at V = K
        assert!((net.propensity(0, &[0, 100]).unwrap() - 220.0).abs() < 1e-12);
    }

    #[test]
    fn propensity_errors() {
        let (net, _) = builtin_model("bottleneck").unwrap();
        assert_eq!(
            net.propensity(2, &[1, 0, 0]),
            Err(Error::ReactionOutOfRange { index: 2, count: 2 })
        );
        assert_eq!(
            net.propensity(0, &[1, 0]),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        );
    }

    #[test]
    fn apply_examples() {
        assert_eq!(apply(&[1, 0, 0], &[-1, 1, 0]), Some(State::from([0, 1, 0])));
        assert_eq!(apply(&[0, 1, 5], &[0, 0, 1]), Some(State::from([0, 1, 6])));
        assert_eq!(apply(&[0, 0, 0], &[-1, 1, 0]), None);
        assert_eq!(apply(&[u32::MAX], &[1]), None);
    }

    #[test]
    fn oregonator_steady_state_fluxes() {
        let (net, x) = builtin_model("oregonator").unwrap();
        let rates: Vec<f64> = (0..5).map(|k| net.propensity(k, &x).unwrap()).collect();
        assert!((rates[0] - 2000.0).abs() < 1e-9);
        assert!((rates[1] - 50000.0).abs() < 1e-6);
        assert!((rates[2] - 52000.0).abs() < 1e-9);
        assert!((rates[3] - 1996.0).abs() < 1e-9);
        assert!((rates[4] - 52000.0).abs() < 1e-9);
        assert!((net.exit_rate(&x) - 157_996.0).abs() < 1e-6);
    }

    #[test]
    fn robertson_reactions_conserve_total_mass() {
        let (net, _) = builtin_model("robertson").unwrap();
        for r in net.reactions() {
            assert_eq!(r.stoichiometry.iter().sum::<i32>(), 0, "{}", r.label);
        }
    }

    #[test]
    fn validation_rejects_inconsistent_models() {
        let species = vec!["A".into()];
        let over_consuming = Reaction::new("r", [-2], RateLaw::mass_action(1.0, [1]));
        assert!(ReactionNetwork::new(species.clone(), vec![over_consuming]).is_err());
        let no_op = Reaction::new("r", [0], RateLaw::mass_action(1.0, [1]));
        assert!(ReactionNetwork::new(species.clone(), vec![no_op]).is_err());
        let negative = Reaction::new("r", [-1], RateLaw::mass_action(-1.0, [1]));
        assert!(ReactionNetwork::new(species.clone(), vec![negative]).is_err());
        let hill = RateLaw::HillProduction {
            eta: 1.0,
            base: 1.0,
            amplitude: 1.0,
            threshold: 1.0,
            exponent: 0.5,
            repressor: 0,
        };
        assert!(ReactionNetwork::new(species.clone(), vec![Reaction::new("h", [1], hill)]).is_err());
        assert!(ReactionNetwork::new(species, vec![]).is_err());
    }

    #[test]
    fn every_builtin_has_consistent_dimensions() {
        for model in BuiltinModel::ALL {
            let (net, x0) = model.build();
            assert_eq!(x0.len(), net.n_species());
            for r in net.reactions() {
                assert_eq!(r.stoichiometry.len(), net.n_species());
            }
        }
    }
}
