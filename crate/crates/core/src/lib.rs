//! Direct measurement of bipartite pure states through modular values.
//!
//! The crate simulates a two-part qubit meter coupled to a pre- and
//! postselected bipartite system, reads the meter out with Franson-type
//! detectors, and rebuilds the complex amplitude matrix `Ψ_{j,l}` from the
//! resulting modular values. Shot noise is modelled by binomial counting and
//! propagated by Monte Carlo; linear-inversion tomography serves as the
//! comparison baseline.
//!
//! ```
//! use directwf::{pipeline, presets, protocol::ProtocolConfig, reconstruction::EstimationMethod};
//!
//! let cfg = ProtocolConfig::new(presets::bell(), presets::uniform_postselection(2, 2), 0.2)?;
//! let out = pipeline::run_pipeline(&cfg, pipeline::PipelineOptions::new(EstimationMethod::ExactInversion))?;
//! assert!((out.result.amplitude(1, 1).re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
//! # Ok::<(), directwf::Error>(())
//! ```

pub mod error;
pub mod hilbert;
pub mod pipeline;
pub mod presets;
pub mod protocol;
pub mod reconstruction;
pub mod shot_noise;
pub mod tomography;

pub use error::{Error, Result};
pub use hilbert::{ComplexValue, LinearOperator, PureState, Tolerances, TOLERANCES};
