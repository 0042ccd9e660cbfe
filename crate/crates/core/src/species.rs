/// Index of a species in its [`crate::ReactionNetwork`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpeciesId(pub usize);

#[derive(Clone, Debug)]
pub struct SpeciesSpec {
    pub name: String,
    /// Diffusion coefficient; also scales the drift response to potentials.
    pub diffusivity: f64,
    /// Interaction radius entering the pair potential reach.
    pub radius: f64,
}

impl SpeciesSpec {
    pub fn new(name: impl Into<String>, diffusivity: f64, radius: f64) -> Self {
        SpeciesSpec {
            name: name.into(),
            diffusivity,
            radius,
        }
    }
}

/// Scaling parameter of the particle model: particle `k` carries weight
/// `1/gamma` in the concentration measure, and pair potentials act as
/// `u / gamma`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemScale {
    pub gamma: f64,
}

impl SystemScale {
    pub fn new(gamma: f64) -> Self {
        SystemScale { gamma }
    }
}
