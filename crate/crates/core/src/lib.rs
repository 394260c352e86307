//! Numerical toolkit for microwave-driven trapped-ion logic in a static
//! magnetic field gradient.
//!
//! The pipeline runs bottom-up:
//!
//! * [`config`] and [`species`]: trap parameters and ion data,
//! * [`crystal`]: equilibrium positions and axial normal modes of the chain,
//! * [`zeeman`]: Breit–Rabi level energies and their field derivatives,
//! * [`addressing`]: gradient-induced spin–phonon coupling, Lamb–Dicke
//!   parameters, resonance spectra and the minimum addressing gradient,
//! * [`fidelity`]: Monte-Carlo spread of qubit frequencies over internal-state
//!   configurations and the resulting gate error,
//! * [`dynamics`]: driven spin–phonon evolution in the polaron frame,
//! * [`report`]: JSON/CSV reports consumed by the CLI and the C ABI.

pub mod addressing;
pub mod config;
pub mod constants;
pub mod crystal;
pub mod dynamics;
pub mod error;
pub mod fidelity;
pub mod report;
pub mod species;
pub mod zeeman;

pub use addressing::{CouplingReport, DriveField};
pub use config::{check_linearity, load_config, Linearity, TrapConfig};
pub use crystal::{ChainSolution, ExtraForces};
pub use error::{Error, Result};
pub use species::IonSpecies;
pub use zeeman::{Level, QubitLevels};
