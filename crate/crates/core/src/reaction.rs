//! Reaction network description: stoichiometry, rates, displacement kernels,
//! product placement, and the detailed-balance acceptance form each reaction
//! uses.

use crate::error::CoreError;
use crate::kernel::KernelSpec;
use crate::species::{SpeciesId, SpeciesSpec};

/// Which Metropolis-style exponent a reaction pairs with its reverse.
///
/// The three forms differ only in which within-reactant pair terms the
/// exponent keeps, and are chosen so that a forward/backward pair satisfies
/// detailed balance in the presence of interaction potentials.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AcceptanceForm {
    /// Two substrates fuse into one product; the substrate-substrate pair
    /// energy is left out of the pre-state potential.
    Binding,
    /// One substrate splits into two products; the product-product pair
    /// energy is left out of the post-state potential.
    Unbinding,
    /// Equal substrate and product counts; both within-set pair energies
    /// are kept.
    Swap,
}

/// How products are positioned given the substrate positions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlacementRule {
    /// Single product lands on one of the substrate positions, equal odds.
    SplitDelta,
    /// Two products: one sits at the substrate position, the partner is
    /// drawn from the kernel reweighted by the Boltzmann factor of the
    /// product pair potential.
    BoltzmannBackward,
    /// Products reuse the substrate positions in order.
    IdentityPair,
}

#[derive(Clone, Debug)]
pub struct ReactionSpec {
    pub name: String,
    pub substrates: Vec<SpeciesId>,
    pub products: Vec<SpeciesId>,
    /// Macroscopic rate constant (reactions per unit time at unit activity).
    pub rate: f64,
    /// Displacement kernel for bimolecular encounters or dissociation.
    pub kernel: Option<KernelSpec>,
    pub placement: PlacementRule,
    pub form: AcceptanceForm,
}

#[derive(Clone, Debug)]
pub struct ReactionNetwork {
    pub species: Vec<SpeciesSpec>,
    pub reactions: Vec<ReactionSpec>,
}

impl ReactionNetwork {
    pub fn new(
        species: Vec<SpeciesSpec>,
        reactions: Vec<ReactionSpec>,
    ) -> Result<Self, CoreError> {
        let network = ReactionNetwork { species, reactions };
        network.validate()?;
        Ok(network)
    }

    pub fn species_id(&self, name: &str) -> Option<SpeciesId> {
        self.species
            .iter()
            .position(|s| s.name == name)
            .map(SpeciesId)
    }

    pub fn validate(&self) -> Result<(), CoreError> {
        if self.species.is_empty() {
            return Err(CoreError::InvalidNetwork("no species declared".into()));
        }
        for (i, s) in self.species.iter().enumerate() {
            if s.name.is_empty() {
                return Err(CoreError::InvalidNetwork(format!(
                    "species {i} has an empty name"
                )));
            }
            if self.species[..i].iter().any(|t| t.name == s.name) {
                return Err(CoreError::InvalidNetwork(format!(
                    "duplicate species name {:?}",
                    s.name
                )));
            }
            if !(s.diffusivity.is_finite() && s.diffusivity > 0.0) {
                return Err(CoreError::InvalidNetwork(format!(
                    "species {:?} needs a positive diffusivity, got {}",
                    s.name, s.diffusivity
                )));
            }
            if !(s.radius.is_finite() && s.radius >= 0.0) {
                return Err(CoreError::InvalidNetwork(format!(
                    "species {:?} needs a nonnegative radius, got {}",
                    s.name, s.radius
                )));
            }
        }
        for r in &self.reactions {
            self.validate_reaction(r)?;
        }
        Ok(())
    }

    fn validate_reaction(&self, r: &ReactionSpec) -> Result<(), CoreError> {
        let bad = |msg: String| Err(CoreError::InvalidNetwork(msg));
        for side in [&r.substrates, &r.products] {
            if side.is_empty() || side.len() > 2 {
                return bad(format!(
                    "reaction {:?} must have one or two species on each side",
                    r.name
                ));
            }
            if let Some(s) = side.iter().find(|s| s.0 >= self.species.len()) {
                return bad(format!(
                    "reaction {:?} references unknown species index {}",
                    r.name, s.0
                ));
            }
        }
        if !(r.rate.is_finite() && r.rate >= 0.0) {
            return bad(format!(
                "reaction {:?} needs a finite nonnegative rate, got {}",
                r.name, r.rate
            ));
        }
        let shape_ok = match r.form {
            AcceptanceForm::Binding => r.substrates.len() == 2 && r.products.len() == 1,
            AcceptanceForm::Unbinding => r.substrates.len() == 1 && r.products.len() == 2,
            AcceptanceForm::Swap => r.substrates.len() == r.products.len(),
        };
        if !shape_ok {
            return bad(format!(
                "reaction {:?}: stoichiometry {} -> {} does not match acceptance form {:?}",
                r.name,
                r.substrates.len(),
                r.products.len(),
                r.form
            ));
        }
        let placement_ok = match r.placement {
            PlacementRule::SplitDelta => r.products.len() == 1 && r.substrates.len() == 2,
            PlacementRule::BoltzmannBackward => r.products.len() == 2 && r.substrates.len() == 1,
            PlacementRule::IdentityPair => r.products.len() == r.substrates.len(),
        };
        if !placement_ok {
            return bad(format!(
                "reaction {:?}: placement rule {:?} does not match its stoichiometry",
                r.name, r.placement
            ));
        }
        if (r.substrates.len() == 2 || r.products.len() == 2) && r.kernel.is_none() {
            return bad(format!(
                "reaction {:?} involves a particle pair and needs a displacement kernel",
                r.name
            ));
        }
        Ok(())
    }
}
