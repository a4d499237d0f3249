//! Concentration of `X = sum a_i xi_i` with `xi_i ~ Ber(p)`: exact binomial
//! difference laws, brute-force oracles, subset-profile decompositions,
//! Fourier cross-checks and the maximizing split `ell*`.

pub mod error;
pub mod exact;
pub mod fourier;
pub mod lstar;
pub mod oracle;
pub mod prob;
pub mod pure;
pub mod quad;

pub use error::{Error, Result};
pub use exact::{BinDiffDist, LStarResult};
pub use fourier::{FourierParams, Identity, LocalizationReport};
pub use lstar::{LStarOutcome, LStarPrediction, NRange, PCase, PValue, PeriodicityReport, Predicted, Prob, ScanRow};
pub use oracle::{AtomDist, CoefficientVector, Strategy, VerificationReport};
pub use prob::{precision_bits, ProbInput};
pub use pure::{ConvexDecomposition, PureMaxReport, PureProfile, SubsetProfile};
pub use quad::{QuadResult, Tolerance};
