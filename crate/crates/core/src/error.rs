use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An exclusion list asked to remove more mass of a species at a position
    /// than the state actually carries there.
    #[error("inconsistent exclusion: species {species} at x = {position} (excluded {excluded} of {available} particles)")]
    InconsistentExclusion {
        species: usize,
        position: f64,
        excluded: usize,
        available: usize,
    },

    /// Exclusions are only meaningful against particle (atomic) measures.
    #[error("exclusions are not supported for continuum states")]
    ContinuumExclusion,

    #[error("invalid reaction network: {0}")]
    InvalidNetwork(String),

    #[error("placement rule not applicable: {0}")]
    InvalidPlacement(String),

    /// All backward-placement weights vanished, so no partner can be drawn.
    #[error("empty backward placement distribution around z = {0}")]
    EmptyPlacement(f64),
}
