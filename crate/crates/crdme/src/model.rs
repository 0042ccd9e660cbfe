//! The reversible pair instance `A + B <-> C` the simulator runs.

use rdd_core::{
    AcceptanceForm, KernelSpec, Mesh, PlacementRule, PotentialTable, ReactionNetwork,
    ReactionSpec, SpeciesId, SpeciesSpec, SystemScale,
};

use crate::error::CrdmeError;

/// Everything fixed over a simulation: geometry, species, potentials,
/// kernels, rate constants, and the scale parameter.
#[derive(Clone, Debug)]
pub struct PairModel {
    pub mesh: Mesh,
    pub species: Vec<SpeciesSpec>,
    pub table: PotentialTable,
    pub kernel: KernelSpec,
    pub a: SpeciesId,
    pub b: SpeciesId,
    pub c: SpeciesId,
    pub lambda: f64,
    pub mu: f64,
    pub gamma: usize,
}

impl PairModel {
    /// Extracts the reversible pair from a validated network holding exactly
    /// one binding and one unbinding reaction that are inverses.
    pub fn from_network(
        mesh: Mesh,
        network: &ReactionNetwork,
        table: PotentialTable,
        gamma: usize,
    ) -> Result<Self, CrdmeError> {
        network.validate().map_err(CrdmeError::Core)?;
        if table.n_species() != network.species.len() {
            return Err(CrdmeError::InvalidInput(format!(
                "potential table covers {} species, network has {}",
                table.n_species(),
                network.species.len()
            )));
        }
        let binding = single_reaction(network, AcceptanceForm::Binding)?;
        let unbinding = single_reaction(network, AcceptanceForm::Unbinding)?;
        let (a, b) = (binding.substrates[0], binding.substrates[1]);
        let c = binding.products[0];
        let inverse_matches = unbinding.substrates[0] == c
            && sorted(unbinding.products[0], unbinding.products[1]) == sorted(a, b);
        if !inverse_matches {
            return Err(CrdmeError::InvalidInput(
                "binding and unbinding reactions are not inverses of each other".into(),
            ));
        }
        let kernel = binding
            .kernel
            .clone()
            .expect("validated binding reaction has a kernel");
        Ok(PairModel {
            mesh,
            species: network.species.clone(),
            table,
            kernel,
            a,
            b,
            c,
            lambda: binding.rate,
            mu: unbinding.rate,
            gamma,
        })
    }

    /// Builds the canonical network for given species and rates and wraps it.
    pub fn reversible(
        mesh: Mesh,
        species: Vec<SpeciesSpec>,
        table: PotentialTable,
        kernel: KernelSpec,
        lambda: f64,
        mu: f64,
        gamma: usize,
    ) -> Result<Self, CrdmeError> {
        let (a, b, c) = (SpeciesId(0), SpeciesId(1), SpeciesId(2));
        let network = ReactionNetwork::new(
            species,
            vec![
                ReactionSpec {
                    name: "binding".into(),
                    substrates: vec![a, b],
                    products: vec![c],
                    rate: lambda,
                    kernel: Some(kernel.clone()),
                    placement: PlacementRule::SplitDelta,
                    form: AcceptanceForm::Binding,
                },
                ReactionSpec {
                    name: "unbinding".into(),
                    substrates: vec![c],
                    products: vec![a, b],
                    rate: mu,
                    kernel: Some(kernel),
                    placement: PlacementRule::BoltzmannBackward,
                    form: AcceptanceForm::Unbinding,
                },
            ],
        )
        .map_err(CrdmeError::Core)?;
        PairModel::from_network(mesh, &network, table, gamma)
    }

    pub fn scale(&self) -> SystemScale {
        SystemScale::new(self.gamma as f64)
    }

    pub fn diffusivity(&self, s: SpeciesId) -> f64 {
        self.species[s.0].diffusivity
    }

    pub fn n_species(&self) -> usize {
        self.species.len()
    }
}

fn single_reaction(
    network: &ReactionNetwork,
    form: AcceptanceForm,
) -> Result<&ReactionSpec, CrdmeError> {
    let mut found = network.reactions.iter().filter(|r| r.form == form);
    match (found.next(), found.next()) {
        (Some(r), None) => Ok(r),
        _ => Err(CrdmeError::InvalidInput(format!(
            "the lattice simulator needs exactly one {form:?} reaction"
        ))),
    }
}

fn sorted(x: SpeciesId, y: SpeciesId) -> (SpeciesId, SpeciesId) {
    if x <= y {
        (x, y)
    } else {
        (y, x)
    }
}

/// The species table used throughout the experiments in this repository.
pub fn default_species() -> Vec<SpeciesSpec> {
    vec![
        SpeciesSpec::new("A", 0.25, 0.05),
        SpeciesSpec::new("B", 0.25, 0.05),
        SpeciesSpec::new("C", 0.5, 0.1),
    ]
}
