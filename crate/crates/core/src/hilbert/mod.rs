//! Fock spaces for hardcore-boson (spin-1/2), spinless-fermion and boson
//! chains, second-quantized operators, the A<->B exchange operator, and
//! reduced density matrices.

mod basis;
mod density;
mod ops;

pub use basis::{
    BasisRef, FockBasis, MappedOperator, Occupation, Operator, ParticleKind, Sector, StateVector, NORM_TOL,
};
pub use density::{
    embed_local_state, product_state,
    entanglement_entropy, processor_block, reduced_density, uhlmann_fidelity, DensityMatrix, ENTROPY_CLAMP,
};
pub use ops::{
    add_hopping, annihilate, create, exchange_operator, hop, mode_operator, relabeling_operator, ExchangePolicy,
    ModeAction, RegionPartition,
};
