//! Kinematic model and design synthesis for the 2-U<u>P</u>S + 1-U remote-center-of-motion
//! parallel mechanism used as an endoscope holder.
//!
//! Two prismatic-actuated legs (universal joint at the base, spherical joint at the
//! platform) drive a platform that is tied to the base by a passive central universal
//! joint. The central joint is the remote center of motion: the platform can only
//! tilt about its two axes.
//!
//! * [`kinematics`]: tilt parameterization, inverse/forward kinematics, Jacobian and
//!   dexterity.
//! * [`design`]: full 13-scalar and reduced 4-scalar geometric descriptions.
//! * [`workspace`]: required tilt cone, dexterous coverage, actuator bracket search and
//!   singularity maps.
//! * [`optimizer`]: Nelder-Mead simplex minimizer and the design objective.

pub mod design;
pub mod error;
pub mod kinematics;
pub mod optimizer;
pub mod workspace;

pub use design::{DesignParameters, ReducedDesignParameters, Vec3};
pub use error::{MechError, Result};
pub use kinematics::{Jacobian2, LegLengths, TiltOrientation};
