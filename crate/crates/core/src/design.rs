//! Geometric description of one mechanism instance.
//!
//! The base frame has its origin on the base plane (z = 0) directly below the central
//! universal joint, which sits at `(0, 0, h)`. Platform attachment points are given in
//! the platform frame, whose origin is the universal-joint center.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{MechError, Result};
use crate::kinematics::DEGENERATE_LEG_LENGTH;

pub type Vec3 = Vector3<f64>;

/// Number of free scalars in [`DesignParameters`].
pub const FULL_DIM: usize = 13;
/// Number of free scalars in [`ReducedDesignParameters`].
pub const REDUCED_DIM: usize = 4;

/// Full geometric description: two base points, two platform points and the height of
/// the central universal joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignParameters {
    /// Base attachment point of leg 1 (base frame).
    pub a1: Vec3,
    /// Base attachment point of leg 2 (base frame).
    pub a2: Vec3,
    /// Platform attachment point of leg 1 (platform frame).
    pub b1: Vec3,
    /// Platform attachment point of leg 2 (platform frame).
    pub b2: Vec3,
    /// Height of the universal-joint center above the base plane.
    pub h: f64,
}

impl DesignParameters {
    /// Builds a design and checks its invariants.
    pub fn new(a1: Vec3, a2: Vec3, b1: Vec3, b2: Vec3, h: f64) -> Result<Self> {
        let d = Self { a1, a2, b1, b2, h };
        d.validate()?;
        Ok(d)
    }

    /// Checks finiteness, `h > 0` and that neither leg is degenerate at zero tilt.
    pub fn validate(&self) -> Result<()> {
        let all_finite = [self.a1, self.a2, self.b1, self.b2]
            .iter()
            .all(|v| v.iter().all(|c| c.is_finite()))
            && self.h.is_finite();
        if !all_finite {
            return Err(MechError::Domain("design has non-finite coordinates".into()));
        }
        if self.h <= 0.0 {
            return Err(MechError::Domain(format!(
                "universal joint height must be positive, got {}",
                self.h
            )));
        }
        let center = Vec3::new(0.0, 0.0, self.h);
        for (leg, (a, b)) in self.legs().into_iter().enumerate() {
            let length = (center + b - a).norm();
            if length <= DEGENERATE_LEG_LENGTH {
                return Err(MechError::DegenerateLeg { leg: leg + 1, length });
            }
        }
        Ok(())
    }

    /// `(a_i, b_i)` pairs in leg order.
    pub fn legs(&self) -> [(Vec3, Vec3); 2] {
        [(self.a1, self.b1), (self.a2, self.b2)]
    }

    /// Largest distance of any attachment point from its frame origin.
    pub fn max_radius(&self) -> f64 {
        [self.a1, self.a2, self.b1, self.b2]
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    /// Uniformly scales every length of the design.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        scale_design(self, s)
    }

    /// Flattens the design into the 13-scalar layout
    /// `(a1, a2, b1, b2, h)` with each point as `x, y, z`.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(FULL_DIM);
        for p in [self.a1, self.a2, self.b1, self.b2] {
            x.extend_from_slice(p.as_slice());
        }
        x.push(self.h);
        x
    }

    /// Inverse of [`DesignParameters::to_vector`]. Does not validate.
    pub fn from_vector(x: &[f64]) -> Result<Self> {
        if x.len() != FULL_DIM {
            return Err(MechError::DimensionMismatch {
                expected: FULL_DIM,
                found: x.len(),
            });
        }
        let p = |i: usize| Vec3::new(x[i], x[i + 1], x[i + 2]);
        Ok(Self {
            a1: p(0),
            a2: p(3),
            b1: p(6),
            b2: p(9),
            h: x[12],
        })
    }
}

/// Symmetric four-scalar design family: both legs sit at the same radius, mirrored
/// about the xz-plane, with platform points in the platform plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedDesignParameters {
    pub r_a: f64,
    pub r_b: f64,
    /// Half-angle between the legs about the z-axis, radians.
    pub gamma: f64,
    pub h: f64,
}

impl ReducedDesignParameters {
    pub fn new(r_a: f64, r_b: f64, gamma: f64, h: f64) -> Result<Self> {
        let r = Self { r_a, r_b, gamma, h };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { r_a, r_b, gamma, h } = *self;
        if ![r_a, r_b, gamma, h].iter().all(|v| v.is_finite()) {
            return Err(MechError::Domain("reduced design has non-finite values".into()));
        }
        if r_a <= 0.0 || r_b <= 0.0 || h <= 0.0 {
            return Err(MechError::Domain(format!(
                "r_a, r_b and h must be positive (got {r_a}, {r_b}, {h})"
            )));
        }
        if gamma <= 0.0 || gamma >= std::f64::consts::FRAC_PI_2 {
            return Err(MechError::Domain(format!(
                "gamma must lie in (0, pi/2), got {gamma}"
            )));
        }
        Ok(())
    }

    pub fn to_vector(&self) -> Vec<f64> {
        vec![self.r_a, self.r_b, self.gamma, self.h]
    }

    pub fn from_vector(x: &[f64]) -> Result<Self> {
        match *x {
            [r_a, r_b, gamma, h] => Ok(Self { r_a, r_b, gamma, h }),
            _ => Err(MechError::DimensionMismatch {
                expected: REDUCED_DIM,
                found: x.len(),
            }),
        }
    }

    pub fn expand(&self) -> Result<DesignParameters> {
        expand_reduced(self)
    }
}

/// Maps the reduced family onto full design parameters.
pub fn expand_reduced(r: &ReducedDesignParameters) -> Result<DesignParameters> {
    r.validate()?;
    let (s, c) = r.gamma.sin_cos();
    let d = DesignParameters {
        a1: Vec3::new(r.r_a * c, r.r_a * s, 0.0),
        a2: Vec3::new(r.r_a * c, -r.r_a * s, 0.0),
        b1: Vec3::new(r.r_b * c, r.r_b * s, 0.0),
        b2: Vec3::new(r.r_b * c, -r.r_b * s, 0.0),
        h: r.h,
    };
    d.validate()?;
    Ok(d)
}

pub fn scale_design(d: &DesignParameters, s: f64) -> Result<DesignParameters> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(MechError::Domain(format!(
            "scale factor must be positive and finite, got {s}"
        )));
    }
    Ok(DesignParameters {
        a1: d.a1 * s,
        a2: d.a2 * s,
        b1: d.b1 * s,
        b2: d.b2 * s,
        h: d.h * s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reduced_example() -> ReducedDesignParameters {
        ReducedDesignParameters::new(0.06, 0.03, 30f64.to_radians(), 0.10).unwrap()
    }

    #[test]
    fn expand_reduced_example() {
        let d = expand_reduced(&reduced_example()).unwrap();
        let eps = 1e-7;
        assert_relative_eq!(d.a1, Vec3::new(0.0519615, 0.03, 0.0), epsilon = eps);
        assert_relative_eq!(d.a2, Vec3::new(0.0519615, -0.03, 0.0), epsilon = eps);
        assert_relative_eq!(d.b1, Vec3::new(0.0259808, 0.015, 0.0), epsilon = eps);
        assert_relative_eq!(d.b2, Vec3::new(0.0259808, -0.015, 0.0), epsilon = eps);
        assert_eq!(d.h, 0.10);
    }

    #[test]
    fn expanded_design_is_mirror_symmetric() {
        let d = expand_reduced(&reduced_example()).unwrap();
        let mirror = |v: Vec3| Vec3::new(v.x, -v.y, v.z);
        assert_eq!(d.a2, mirror(d.a1));
        assert_eq!(d.b2, mirror(d.b1));
    }

    #[test]
    fn reduced_invariants() {
        assert!(ReducedDesignParameters::new(0.0, 0.03, 0.5, 0.1).is_err());
        assert!(ReducedDesignParameters::new(0.06, -0.03, 0.5, 0.1).is_err());
        assert!(ReducedDesignParameters::new(0.06, 0.03, 0.0, 0.1).is_err());
        assert!(ReducedDesignParameters::new(0.06, 0.03, std::f64::consts::FRAC_PI_2, 0.1).is_err());
        assert!(ReducedDesignParameters::new(0.06, 0.03, 0.5, 0.0).is_err());
        assert!(ReducedDesignParameters::from_vector(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn design_invariants() {
        let z = Vec3::zeros();
        let a = Vec3::new(0.05, 0.0, 0.0);
        assert!(DesignParameters::new(a, a, z, z, -1.0).is_err());
        assert!(DesignParameters::new(a, a, z, z, f64::NAN).is_err());
        // b1 placed exactly on a1 at zero tilt
        let b = Vec3::new(0.05, 0.0, -0.1);
        assert!(matches!(
            DesignParameters::new(a, -a, b, z, 0.1),
            Err(MechError::DegenerateLeg { leg: 1, .. })
        ));
        assert!(DesignParameters::new(a, -a, z, z, 0.1).is_ok());
    }

    #[test]
    fn scale_identity_and_inverse() {
        let d = expand_reduced(&reduced_example()).unwrap();
        assert_eq!(scale_design(&d, 1.0).unwrap(), d);
        let back = scale_design(&scale_design(&d, 2.0).unwrap(), 0.5).unwrap();
        assert_eq!(back, d);
        assert!(scale_design(&d, 0.0).is_err());
        assert!(scale_design(&d, -2.0).is_err());
    }

    #[test]
    fn full_vector_layout() {
        let d = DesignParameters {
            a1: Vec3::new(1.0, 2.0, 3.0),
            a2: Vec3::new(4.0, 5.0, 6.0),
            b1: Vec3::new(7.0, 8.0, 9.0),
            b2: Vec3::new(10.0, 11.0, 12.0),
            h: 13.0,
        };
        let x = d.to_vector();
        assert_eq!(x, (1..=13).map(f64::from).collect::<Vec<_>>());
        assert_eq!(DesignParameters::from_vector(&x).unwrap(), d);
        assert!(DesignParameters::from_vector(&x[..12]).is_err());
    }

    #[test]
    fn max_radius_picks_largest_point() {
        let d = expand_reduced(&reduced_example()).unwrap();
        assert_relative_eq!(d.max_radius(), 0.06, epsilon = 1e-15);
    }
}
