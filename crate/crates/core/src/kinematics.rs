//! Orientation kinematics of the two-leg remote-center-of-motion mechanism.
//!
//! The platform orientation is `R(alpha, beta) = Rot(x, alpha) * Rot(y, beta)`: the first
//! universal-joint axis is fixed to the base along x, the second follows the platform
//! along y. Leg `i` runs from base point `a_i` to `p_i = (0, 0, h) + R * b_i`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Matrix2, Matrix3, Rotation3, Vector2};
use serde::{Deserialize, Serialize};

use crate::design::{DesignParameters, Vec3};
use crate::error::{MechError, Result};

/// Legs at or below this length (meters) are treated as degenerate.
pub const DEGENERATE_LEG_LENGTH: f64 = 1e-9;

/// `J[i][j] = d rho_i / d q_j` with `q = (alpha, beta)`, in meters per radian.
pub type Jacobian2 = Matrix2<f64>;

/// Two universal-joint tilt angles, radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TiltOrientation {
    pub alpha: f64,
    pub beta: f64,
}

impl TiltOrientation {
    pub const ZERO: Self = Self {
        alpha: 0.0,
        beta: 0.0,
    };

    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let q = Self { alpha, beta };
        q.check()?;
        Ok(q)
    }

    pub fn from_degrees(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha.to_radians(), beta.to_radians())
    }

    /// Both angles must be finite with magnitude at most pi/2.
    pub fn check(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v.abs() <= FRAC_PI_2;
        if ok(self.alpha) && ok(self.beta) {
            Ok(())
        } else {
            Err(MechError::TiltOutOfRange {
                alpha: self.alpha,
                beta: self.beta,
            })
        }
    }

    fn as_vector(&self) -> Vector2<f64> {
        Vector2::new(self.alpha, self.beta)
    }
}

/// Prismatic joint lengths, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegLengths {
    pub rho1: f64,
    pub rho2: f64,
}

impl LegLengths {
    pub fn new(rho1: f64, rho2: f64) -> Self {
        Self { rho1, rho2 }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.rho1, self.rho2]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.rho1 * s, self.rho2 * s)
    }
}

/// Rotation matrix together with its partial derivatives in alpha and beta.
struct TiltFrame {
    rot: Matrix3<f64>,
    d_alpha: Matrix3<f64>,
    d_beta: Matrix3<f64>,
}

impl TiltFrame {
    fn new(q: &TiltOrientation) -> Self {
        let (sa, ca) = q.alpha.sin_cos();
        let (sb, cb) = q.beta.sin_cos();
        #[rustfmt::skip]
        let rot = Matrix3::new(
            cb,       0.0, sb,
            sa * sb,  ca,  -sa * cb,
            -ca * sb, sa,  ca * cb,
        );
        #[rustfmt::skip]
        let d_alpha = Matrix3::new(
            0.0,     0.0, 0.0,
            ca * sb, -sa, -ca * cb,
            sa * sb, ca,  -sa * cb,
        );
        #[rustfmt::skip]
        let d_beta = Matrix3::new(
            -sb,      0.0, cb,
            sa * cb,  0.0, sa * sb,
            -ca * cb, 0.0, -ca * sb,
        );
        Self {
            rot,
            d_alpha,
            d_beta,
        }
    }
}

/// Leg vector `p_i - a_i`, its length and the platform-point velocities per tilt axis.
struct LegState {
    leg: Vec3,
    length: f64,
    dp: [Vec3; 2],
}

fn leg_states(d: &DesignParameters, q: &TiltOrientation) -> [LegState; 2] {
    let frame = TiltFrame::new(q);
    let center = Vec3::new(0.0, 0.0, d.h);
    d.legs().map(|(a, b)| {
        let leg = center + frame.rot * b - a;
        LegState {
            leg,
            length: leg.norm(),
            dp: [frame.d_alpha * b, frame.d_beta * b],
        }
    })
}

fn check_degenerate(states: &[LegState; 2]) -> Result<()> {
    for (i, s) in states.iter().enumerate() {
        if !(s.length > DEGENERATE_LEG_LENGTH) {
            return Err(MechError::DegenerateLeg {
                leg: i + 1,
                length: s.length,
            });
        }
    }
    Ok(())
}

/// Platform orientation for the given tilt.
pub fn rotation_from_tilt(q: &TiltOrientation) -> Result<Rotation3<f64>> {
    q.check()?;
    Ok(Rotation3::from_matrix_unchecked(TiltFrame::new(q).rot))
}

pub fn inverse_kinematics(d: &DesignParameters, q: &TiltOrientation) -> Result<LegLengths> {
    q.check()?;
    let states = leg_states(d, q);
    check_degenerate(&states)?;
    Ok(LegLengths::new(states[0].length, states[1].length))
}

/// Analytic Jacobian of the leg lengths with respect to the tilt angles.
pub fn jacobian(d: &DesignParameters, q: &TiltOrientation) -> Result<Jacobian2> {
    q.check()?;
    let states = leg_states(d, q);
    check_degenerate(&states)?;
    Ok(Jacobian2::from_fn(|i, j| {
        let s = &states[i];
        s.leg.dot(&s.dp[j]) / s.length
    }))
}

/// `sigma_min / sigma_max` of a 2x2 matrix, in `[0, 1]`. The zero matrix maps to 0.
pub fn inverse_condition_number(j: &Jacobian2) -> f64 {
    // sigma_max +- sigma_min = sqrt(|J|_F^2 +- 2 |det J|)
    let frob_sq = j.iter().map(|v| v * v).sum::<f64>();
    let det = (j[(0, 0)] * j[(1, 1)] - j[(0, 1)] * j[(1, 0)]).abs();
    let sum = (frob_sq + 2.0 * det).sqrt();
    let diff = (frob_sq - 2.0 * det).max(0.0).sqrt();
    if !(sum > 0.0) {
        return 0.0;
    }
    ((sum - diff) / (sum + diff)).clamp(0.0, 1.0)
}

/// Inverse condition number of the Jacobian at `q`.
pub fn dexterity(d: &DesignParameters, q: &TiltOrientation) -> Result<f64> {
    jacobian(d, q).map(|j| inverse_condition_number(&j))
}

/// Settings for the Newton solve in [`forward_kinematics_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    /// Convergence bound on `max_i |rho_i(q)^2 - target_i^2|`, square meters.
    pub residual_tol: f64,
    /// A converged iterate must also have moved less than this (radians) on its last step.
    pub step_tol: f64,
    pub max_iterations: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            residual_tol: 1e-10,
            step_tol: 1e-12,
            max_iterations: 100,
        }
    }
}

/// Solves for the tilt that produces `lengths`, starting from `seed`.
pub fn forward_kinematics(
    d: &DesignParameters,
    lengths: &LegLengths,
    seed: &TiltOrientation,
) -> Result<TiltOrientation> {
    forward_kinematics_with(d, lengths, seed, &NewtonOptions::default())
}

/// Newton iteration on the squared-length residuals. Returns the assembly mode the
/// iteration reaches from `seed`.
pub fn forward_kinematics_with(
    d: &DesignParameters,
    lengths: &LegLengths,
    seed: &TiltOrientation,
    opts: &NewtonOptions,
) -> Result<TiltOrientation> {
    seed.check()?;
    let targets = lengths.as_array();
    if !targets.iter().all(|t| t.is_finite() && *t > 0.0) {
        return Err(MechError::Domain(format!(
            "target leg lengths must be positive, got {targets:?}"
        )));
    }
    let target_sq = targets.map(|t| t * t);

    let residual_at = |q: &Vector2<f64>| -> (Vector2<f64>, [LegState; 2]) {
        let states = leg_states(d, &TiltOrientation { alpha: q.x, beta: q.y });
        let r = Vector2::new(
            states[0].length.powi(2) - target_sq[0],
            states[1].length.powi(2) - target_sq[1],
        );
        (r, states)
    };

    let mut q = seed.as_vector();
    let (mut r, mut states) = residual_at(&q);
    let mut last_step = f64::INFINITY;
    for _ in 0..opts.max_iterations {
        let residual = r.amax();
        if residual <= opts.residual_tol && last_step <= opts.step_tol {
            return Ok(TiltOrientation { alpha: q.x, beta: q.y });
        }
        let jr = Matrix2::from_fn(|i, j| 2.0 * states[i].leg.dot(&states[i].dp[j]));
        let det = jr.determinant();
        if !(det.abs() > 1e-12 * jr.norm_squared()) {
            if residual <= opts.residual_tol {
                return Ok(TiltOrientation { alpha: q.x, beta: q.y });
            }
            return Err(MechError::Singular);
        }
        let inv = Matrix2::new(jr[(1, 1)], -jr[(0, 1)], -jr[(1, 0)], jr[(0, 0)]) / det;
        let full_step = -(inv * r);

        // Backtrack until the residual norm stops growing; the full step is always
        // taken near a solution, so convergence stays quadratic there.
        let mut t = 1.0;
        let (mut next_q, mut next) = (q + full_step, residual_at(&(q + full_step)));
        while next.0.norm() > r.norm() && t > 1e-4 {
            t *= 0.5;
            next_q = q + full_step * t;
            next = residual_at(&next_q);
        }
        last_step = (full_step * t).amax();
        q = next_q;
        (r, states) = next;
        if !(q.x.abs() <= FRAC_PI_2 && q.y.abs() <= FRAC_PI_2) {
            // left the universal-joint range; no admissible solution along this path
            return Err(MechError::NoConvergence {
                iterations: opts.max_iterations,
                residual: r.amax(),
            });
        }
    }
    Err(MechError::NoConvergence {
        iterations: opts.max_iterations,
        residual: r.amax(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{expand_reduced, scale_design, ReducedDesignParameters};
    use approx::assert_relative_eq;
    use nalgebra::Vector3;
    use proptest::prelude::*;

    fn ik_example_design() -> DesignParameters {
        DesignParameters {
            a1: Vec3::new(0.06, 0.04, 0.0),
            a2: Vec3::new(-0.06, 0.04, 0.0),
            b1: Vec3::new(0.03, 0.02, 0.0),
            b2: Vec3::new(-0.03, 0.02, 0.0),
            h: 0.10,
        }
    }

    fn symmetric_design() -> DesignParameters {
        expand_reduced(&ReducedDesignParameters::new(0.06, 0.03, 30f64.to_radians(), 0.10).unwrap())
            .unwrap()
    }

    // Oracle: elementary rotations composed independently through nalgebra.
    fn rotation_oracle(alpha: f64, beta: f64) -> Matrix3<f64> {
        let rx = Rotation3::from_axis_angle(&Vector3::x_axis(), alpha);
        let ry = Rotation3::from_axis_angle(&Vector3::y_axis(), beta);
        (rx * ry).into_inner()
    }

    // Oracle: central differences of inverse kinematics.
    fn fd_jacobian(d: &DesignParameters, q: &TiltOrientation, step: f64) -> Matrix2<f64> {
        let mut out = Matrix2::zeros();
        for j in 0..2 {
            let mut plus = *q;
            let mut minus = *q;
            if j == 0 {
                plus.alpha += step;
                minus.alpha -= step;
            } else {
                plus.beta += step;
                minus.beta -= step;
            }
            let lp = inverse_kinematics(d, &plus).unwrap().as_array();
            let lm = inverse_kinematics(d, &minus).unwrap().as_array();
            for i in 0..2 {
                out[(i, j)] = (lp[i] - lm[i]) / (2.0 * step);
            }
        }
        out
    }

    #[test]
    fn zero_tilt_is_identity() {
        let r = rotation_from_tilt(&TiltOrientation::ZERO).unwrap();
        assert_eq!(r.into_inner(), Matrix3::identity());
    }

    #[test]
    fn quarter_turn_about_x() {
        let r = rotation_from_tilt(&TiltOrientation::new(FRAC_PI_2, 0.0).unwrap()).unwrap();
        let v = r * Vec3::z();
        assert_relative_eq!(v, Vec3::new(0.0, -1.0, 0.0), epsilon = 1e-15);
    }

    #[test]
    fn rotation_matches_elementary_product() {
        let q = TiltOrientation::new(0.3, 0.2).unwrap();
        let r = rotation_from_tilt(&q).unwrap().into_inner();
        assert_relative_eq!(r, rotation_oracle(0.3, 0.2), epsilon = 1e-15);
        assert_relative_eq!(r.transpose() * r, Matrix3::identity(), epsilon = 1e-12);
        assert_relative_eq!(r.determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn tilt_range_is_enforced() {
        assert!(TiltOrientation::new(1.6, 0.0).is_err());
        assert!(TiltOrientation::new(0.0, -1.6).is_err());
        assert!(TiltOrientation::new(f64::NAN, 0.0).is_err());
        let bad = TiltOrientation {
            alpha: 2.0,
            beta: 0.0,
        };
        assert!(matches!(
            rotation_from_tilt(&bad),
            Err(MechError::TiltOutOfRange { .. })
        ));
        assert!(inverse_kinematics(&symmetric_design(), &bad).is_err());
    }

    #[test]
    fn ik_zero_tilt_closed_form() {
        let l = inverse_kinematics(&ik_example_design(), &TiltOrientation::ZERO).unwrap();
        let expected = (0.03f64.powi(2) + 0.02f64.powi(2) + 0.10f64.powi(2)).sqrt();
        assert_relative_eq!(l.rho1, expected, epsilon = 1e-15);
        assert_relative_eq!(l.rho1, 0.1063015, epsilon = 1e-7);
    }

    #[test]
    fn ik_thirty_degree_tilt() {
        // Hand evaluation: R b1 = (0.03, 0.02 cos30, 0.02 sin30), p1 = R b1 + (0, 0, 0.1).
        let (s, c) = 30f64.to_radians().sin_cos();
        let leg = Vec3::new(0.03 - 0.06, 0.02 * c - 0.04, 0.02 * s + 0.10);
        let expected = leg.norm();
        let q = TiltOrientation::from_degrees(30.0, 0.0).unwrap();
        let l = inverse_kinematics(&ik_example_design(), &q).unwrap();
        assert_relative_eq!(l.rho1, expected, epsilon = 1e-15);
        assert_relative_eq!(l.rho1, 0.1162513, epsilon = 1e-7);
    }

    #[test]
    fn ik_vertical_leg_has_length_h() {
        for r in [0.01, 0.05, 0.2] {
            let d = DesignParameters {
                a1: Vec3::new(r, 0.0, 0.0),
                a2: Vec3::new(-r, 0.0, 0.0),
                b1: Vec3::new(r, 0.0, 0.0),
                b2: Vec3::new(-r, 0.0, 0.0),
                h: 0.10,
            };
            let l = inverse_kinematics(&d, &TiltOrientation::ZERO).unwrap();
            assert_relative_eq!(l.rho1, 0.10, epsilon = 1e-15);
        }
    }

    #[test]
    fn ik_degenerate_leg() {
        let mut d = ik_example_design();
        d.b1 = Vec3::new(0.06, 0.04, -0.10);
        assert!(matches!(
            inverse_kinematics(&d, &TiltOrientation::ZERO),
            Err(MechError::DegenerateLeg { leg: 1, .. })
        ));
        assert!(jacobian(&d, &TiltOrientation::ZERO).is_err());
    }

    #[test]
    fn fk_fixed_point_at_home() {
        let d = ik_example_design();
        let l = inverse_kinematics(&d, &TiltOrientation::ZERO).unwrap();
        let q = forward_kinematics(&d, &l, &TiltOrientation::ZERO).unwrap();
        assert!(q.alpha.abs() < 1e-12 && q.beta.abs() < 1e-12);
    }

    #[test]
    fn fk_recovers_thirty_degrees() {
        let d = ik_example_design();
        let target = TiltOrientation::from_degrees(30.0, 0.0).unwrap();
        let l = inverse_kinematics(&d, &target).unwrap();
        let q = forward_kinematics(&d, &l, &TiltOrientation::ZERO).unwrap();
        assert!((q.alpha - target.alpha).abs() < 1e-8);
        assert!(q.beta.abs() < 1e-8);
        let back = inverse_kinematics(&d, &q).unwrap();
        assert!((back.rho1 - l.rho1).abs() < 1e-9 && (back.rho2 - l.rho2).abs() < 1e-9);
    }

    #[test]
    fn fk_unreachable_lengths_fail() {
        let d = symmetric_design();
        let l = LegLengths::new(10.0 * d.h, 10.0 * d.h);
        let err = forward_kinematics(&d, &l, &TiltOrientation::ZERO).unwrap_err();
        assert!(
            matches!(err, MechError::NoConvergence { .. }),
            "unexpected error {err:?}"
        );
    }

    #[test]
    fn fk_rejects_nonpositive_targets() {
        let d = symmetric_design();
        let l = LegLengths::new(0.0, 0.1);
        assert!(matches!(
            forward_kinematics(&d, &l, &TiltOrientation::ZERO),
            Err(MechError::Domain(_))
        ));
    }

    #[test]
    fn fk_singular_when_platform_points_at_center() {
        let mut d = symmetric_design();
        d.b1 = Vec3::zeros();
        d.b2 = Vec3::zeros();
        let l = LegLengths::new(0.2, 0.2);
        assert_eq!(
            forward_kinematics(&d, &l, &TiltOrientation::ZERO),
            Err(MechError::Singular)
        );
    }

    #[test]
    fn jacobian_zero_for_central_platform_points() {
        let mut d = symmetric_design();
        d.b1 = Vec3::zeros();
        d.b2 = Vec3::zeros();
        let q = TiltOrientation::from_degrees(10.0, -5.0).unwrap();
        assert_eq!(jacobian(&d, &q).unwrap(), Matrix2::zeros());
        assert_eq!(dexterity(&d, &q).unwrap(), 0.0);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let d = ik_example_design();
        let q = TiltOrientation::new(0.3, -0.2).unwrap();
        let j = jacobian(&d, &q).unwrap();
        let fd = fd_jacobian(&d, &q, 1e-6);
        let scale = j.amax();
        assert!((j - fd).amax() / scale < 1e-5);
    }

    #[test]
    fn symmetric_home_pose_is_nonsingular() {
        let d = symmetric_design();
        let j = jacobian(&d, &TiltOrientation::ZERO).unwrap();
        assert!(j.determinant().abs() > 1e-6);
        // Columns of J are orthogonal at home with norms proportional to sin and cos
        // of gamma, so the dexterity there is tan(30 deg).
        let dex = dexterity(&d, &TiltOrientation::ZERO).unwrap();
        assert_relative_eq!(dex, 30f64.to_radians().tan(), epsilon = 1e-12);
    }

    #[test]
    fn inverse_condition_number_examples() {
        assert_eq!(inverse_condition_number(&Matrix2::new(2.0, 0.0, 0.0, 1.0)), 0.5);
        assert_eq!(inverse_condition_number(&Matrix2::new(3.0, 0.0, 0.0, 3.0)), 1.0);
        assert_eq!(inverse_condition_number(&Matrix2::new(1.0, 1.0, 1.0, 1.0)), 0.0);
        assert_eq!(inverse_condition_number(&Matrix2::zeros()), 0.0);
    }

    #[test]
    fn mirror_symmetry_of_reduced_designs() {
        // Mirroring about the xz-plane flips the sign of alpha only, so
        // rho2(alpha, beta) = rho1(-alpha, beta); legs pair up under pure beta tilts.
        let d = symmetric_design();
        for (a, b) in [(0.2, 0.0), (-0.4, 0.1), (0.0, 0.3), (0.5, -0.5)] {
            let l = inverse_kinematics(&d, &TiltOrientation::new(a, b).unwrap()).unwrap();
            let m = inverse_kinematics(&d, &TiltOrientation::new(-a, b).unwrap()).unwrap();
            assert_relative_eq!(l.rho2, m.rho1, epsilon = 1e-15);
        }
        let l = inverse_kinematics(&d, &TiltOrientation::new(0.0, 0.4).unwrap()).unwrap();
        assert_relative_eq!(l.rho1, l.rho2, epsilon = 1e-15);
        let l = inverse_kinematics(&d, &TiltOrientation::new(0.4, 0.0).unwrap()).unwrap();
        assert!((l.rho1 - l.rho2).abs() > 1e-3);
    }

    fn small_angle() -> impl Strategy<Value = f64> {
        -1.2f64..1.2
    }

    proptest! {
        #[test]
        fn rotation_is_orthonormal(a in -FRAC_PI_2..FRAC_PI_2, b in -FRAC_PI_2..FRAC_PI_2) {
            let r = rotation_from_tilt(&TiltOrientation::new(a, b).unwrap()).unwrap().into_inner();
            prop_assert!((r.transpose() * r - Matrix3::identity()).amax() < 1e-12);
            prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
            prop_assert!((r - rotation_oracle(a, b)).amax() < 1e-14);
        }

        #[test]
        fn inverse_condition_number_in_unit_range(
            m in proptest::array::uniform4(-1e3f64..1e3)
        ) {
            let j = Matrix2::new(m[0], m[1], m[2], m[3]);
            let k = inverse_condition_number(&j);
            prop_assert!((0.0..=1.0).contains(&k));
        }

        #[test]
        fn rank_one_has_zero_index(u in proptest::array::uniform2(-10f64..10.0), t in -5f64..5.0) {
            let j = Matrix2::new(u[0], u[1], t * u[0], t * u[1]);
            prop_assume!(j.determinant() == 0.0 && j.amax() > 0.0);
            prop_assert_eq!(inverse_condition_number(&j), 0.0);
        }

        #[test]
        fn ik_is_homogeneous(s in 0.01f64..100.0, a in small_angle(), b in small_angle()) {
            let d = symmetric_design();
            let q = TiltOrientation::new(a, b).unwrap();
            let base = inverse_kinematics(&d, &q).unwrap();
            let scaled = inverse_kinematics(&scale_design(&d, s).unwrap(), &q).unwrap();
            prop_assert!((scaled.rho1 - s * base.rho1).abs() <= 1e-12 * s * base.rho1);
            prop_assert!((scaled.rho2 - s * base.rho2).abs() <= 1e-12 * s * base.rho2);
        }
    }
}
