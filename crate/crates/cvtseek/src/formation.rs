//! Robot formations on a sphere of radius D around a common center: the
//! two-ring symmetric arrangement and formations built from converged Voronoi
//! generators, plus their moment diagnostics.

use crate::cvt::GeneratorSet;
use crate::error::{Error, Result};
use crate::geometry::{Mat3, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormationKind {
    Symmetric,
    Cvt,
}

/// N robot positions at distance `radius` from `center`.
#[derive(Debug, Clone, PartialEq)]
pub struct Formation {
    pub kind: FormationKind,
    pub positions: Vec<Vec3>,
    pub center: Vec3,
    pub radius: f64,
}

impl Formation {
    pub fn n(&self) -> usize {
        self.positions.len()
    }

    /// Offsets r_i - c.
    pub fn offsets(&self) -> impl Iterator<Item = Vec3> + '_ {
        self.positions.iter().map(move |r| r - self.center)
    }
}

/// First and second moments of the robot offsets, with the diagnostics used
/// by the estimation error bounds.
#[derive(Debug, Clone)]
pub struct FormationMoments {
    /// Σ (r_i - c)
    pub r_bar: Vec3,
    /// Σ (r_i - c)(r_i - c)ᵀ
    pub m: Mat3,
    /// M - (N D²/3) I, the deviation from perfect isotropy.
    pub m_alpha: Mat3,
    /// ‖(N D²/3) M⁻¹‖ in the spectral norm; 1 for a perfectly isotropic set.
    pub iso_norm: f64,
    /// Spectral condition number of M.
    pub cond_m: f64,
}

pub const SIN_THETA_F: f64 = 0.816496580927726; // sqrt(2/3)
pub const COS_THETA_F: f64 = 0.5773502691896258; // sqrt(1/3)

/// Two interleaved rings of N/2 robots each at heights ±D·cos(θ_F), ring
/// radius D·sin(θ_F), azimuth step 2π/N, with sin(θ_F) = sqrt(2/3). This is
/// the arrangement whose offset moments satisfy Σr̃ = 0 and Σr̃r̃ᵀ = (ND²/3)I
/// exactly for every even N ≥ 4.
pub fn build_symmetric(n: usize, center: Vec3, d: f64) -> Result<Formation> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "symmetric formation needs an even robot count >= 4, got {n}"
        )));
    }
    if !d.is_finite() || d <= 0.0 {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {d}")));
    }
    let mut positions = Vec::with_capacity(n);
    for i in 1..=n {
        let phi = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        let z = if i % 2 == 1 { COS_THETA_F } else { -COS_THETA_F };
        positions.push(
            center + d * Vec3::new(SIN_THETA_F * phi.cos(), SIN_THETA_F * phi.sin(), z),
        );
    }
    Ok(Formation {
        kind: FormationKind::Symmetric,
        positions,
        center,
        radius: d,
    })
}

/// Places one robot per generator: r_i = c + D·p_i.
pub fn build_cvt_formation(gens: &GeneratorSet, center: Vec3, d: f64) -> Result<Formation> {
    if !d.is_finite() || d <= 0.0 {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {d}")));
    }
    if gens.n() < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 generators, got {}",
            gens.n()
        )));
    }
    Ok(Formation {
        kind: FormationKind::Cvt,
        positions: gens.generators.iter().map(|p| center + d * p).collect(),
        center,
        radius: d,
    })
}

pub fn formation_moments(f: &Formation) -> Result<FormationMoments> {
    let n = f.n();
    let d = f.radius;
    let mut r_bar = Vec3::zeros();
    let mut m = Mat3::zeros();
    for o in f.offsets() {
        r_bar += o;
        m += o * o.transpose();
    }
    let iso_scale = n as f64 * d * d / 3.0;
    let m_alpha = m - iso_scale * Mat3::identity();

    // M is a sum of outer products, so it is symmetric PSD; eigenvalues tell
    // us both the condition number and ‖M⁻¹‖ without forming the inverse.
    let eig = m.symmetric_eigen();
    let lambda_max = eig.eigenvalues.max();
    let lambda_min = eig.eigenvalues.min();
    if lambda_min <= 1e-12 * lambda_max.max(1.0) {
        return Err(Error::DegenerateFormation(format!(
            "second moment is singular (eigenvalues {:?})",
            eig.eigenvalues.as_slice()
        )));
    }
    Ok(FormationMoments {
        r_bar,
        m,
        m_alpha,
        iso_norm: iso_scale / lambda_min,
        cond_m: lambda_max / lambda_min,
    })
}

/// Exhaustive minimum inter-robot distance.
pub fn min_pairwise_distance(f: &Formation) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..f.positions.len() {
        for j in (i + 1)..f.positions.len() {
            best = best.min((f.positions[i] - f.positions[j]).norm());
        }
    }
    best
}

/// Closed-form ring-gap distance 2D·cos(θ_F)·sin(2π/N) used by the distance
/// table for the symmetric formation. Note this is the conventional tabulated
/// quantity, not the exhaustive pairwise minimum of the built arrangement
/// (see `min_pairwise_distance` for that).
pub fn symmetric_dmin(n: usize, d: f64) -> Result<f64> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "symmetric formation needs an even robot count >= 4, got {n}"
        )));
    }
    Ok(2.0 * d * COS_THETA_F * (2.0 * std::f64::consts::PI / n as f64).sin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cvt::{compute_cvt, LloydConfig};
    use proptest::prelude::*;

    #[test]
    fn ring_constants_are_consistent() {
        assert!((SIN_THETA_F - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((COS_THETA_F - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((SIN_THETA_F * SIN_THETA_F + COS_THETA_F * COS_THETA_F - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_moment_identities_hold_exactly() {
        for n in (4..=40).step_by(2) {
            let f = build_symmetric(n, Vec3::zeros(), 1.0).unwrap();
            let mom = formation_moments(&f).unwrap();
            let nd = n as f64;
            assert!(
                mom.r_bar.norm() <= 1e-12 * nd,
                "N={n}: r_bar {:?}",
                mom.r_bar
            );
            assert!(
                mom.m_alpha.norm() <= 1e-12 * nd,
                "N={n}: M_alpha norm {}",
                mom.m_alpha.norm()
            );
        }
    }

    #[test]
    fn six_robots_give_twice_identity() {
        let f = build_symmetric(6, Vec3::zeros(), 1.0).unwrap();
        let mom = formation_moments(&f).unwrap();
        assert!((mom.m - 2.0 * Mat3::identity()).norm() <= 1e-12);
        assert!(mom.r_bar.norm() <= 1e-12);
    }

    #[test]
    fn eight_robots_radius_one() {
        let f = build_symmetric(8, Vec3::zeros(), 1.0).unwrap();
        let mom = formation_moments(&f).unwrap();
        assert!((mom.m - (8.0 / 3.0) * Mat3::identity()).norm() <= 1e-12);
        assert!((mom.iso_norm - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn odd_or_small_counts_are_rejected() {
        assert!(build_symmetric(5, Vec3::zeros(), 1.0).is_err());
        assert!(build_symmetric(2, Vec3::zeros(), 1.0).is_err());
        assert!(build_symmetric(4, Vec3::zeros(), 1.0).is_ok());
        assert!(symmetric_dmin(5, 1.0).is_err());
    }

    #[test]
    fn all_robots_sit_on_the_formation_sphere() {
        let c = Vec3::new(10.0, -3.0, 2.0);
        let f = build_symmetric(10, c, 4.0).unwrap();
        for r in &f.positions {
            assert!(((r - c).norm() - 4.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn cvt_formation_scales_and_translates_generators() {
        let res = compute_cvt(6, 1, &LloydConfig {
            max_iters: 500,
            displacement_tol: 1e-9,
            mesh_size: 2000,
        })
        .unwrap();
        let c = Vec3::new(10.0, 0.0, 0.0);
        let f = build_cvt_formation(&res.generators, c, 4.0).unwrap();
        for r in &f.positions {
            assert!(((r - c).norm() - 4.0).abs() <= 1e-9);
        }
        let id = build_cvt_formation(&res.generators, Vec3::zeros(), 1.0).unwrap();
        for (p, g) in id.positions.iter().zip(&res.generators.generators) {
            assert_eq!(p, g);
        }
    }

    #[test]
    fn moments_ignore_translation() {
        let res = compute_cvt(7, 2, &LloydConfig {
            max_iters: 500,
            displacement_tol: 1e-9,
            mesh_size: 2000,
        })
        .unwrap();
        let a = formation_moments(
            &build_cvt_formation(&res.generators, Vec3::zeros(), 2.0).unwrap(),
        )
        .unwrap();
        let b = formation_moments(
            &build_cvt_formation(&res.generators, Vec3::new(50.0, -20.0, 5.0), 2.0).unwrap(),
        )
        .unwrap();
        assert!((a.r_bar - b.r_bar).norm() <= 1e-9);
        assert!((a.m - b.m).norm() <= 1e-9);
    }

    #[test]
    fn moments_scale_with_radius() {
        let f1 = build_symmetric(6, Vec3::zeros(), 1.0).unwrap();
        let base = formation_moments(&f1).unwrap();
        for d in [1.0, 4.0, 7.0] {
            let fd = build_symmetric(6, Vec3::zeros(), d).unwrap();
            let mom = formation_moments(&fd).unwrap();
            assert!((mom.r_bar - d * base.r_bar).norm() <= 1e-9 * d);
            assert!((mom.m - d * d * base.m).norm() <= 1e-9 * d * d);
        }
    }

    #[test]
    fn degenerate_positions_are_rejected() {
        // All robots in the z=0 plane: M has a zero eigenvalue.
        let f = Formation {
            kind: FormationKind::Cvt,
            positions: vec![
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(-1.0, 0.0, 0.0),
                Vec3::new(0.0, 1.0, 0.0),
                Vec3::new(0.0, -1.0, 0.0),
            ],
            center: Vec3::zeros(),
            radius: 1.0,
        };
        assert!(matches!(
            formation_moments(&f),
            Err(Error::DegenerateFormation(_))
        ));
    }

    #[test]
    fn ring_gap_formula_values() {
        assert!((symmetric_dmin(6, 1.0).unwrap() - 1.0).abs() <= 1e-12);
        assert!((symmetric_dmin(8, 1.0).unwrap() - 0.8164965809277261).abs() <= 1e-12);
        let d20 = symmetric_dmin(20, 1.0).unwrap();
        assert!((d20 - 0.3568220897730899).abs() <= 1e-12, "{d20}");
        // The tabulated reference values.
        for (n, printed) in [(6, 1.00), (8, 0.81), (10, 0.68), (20, 0.37)] {
            let v = symmetric_dmin(n, 1.0).unwrap();
            assert!((v - printed).abs() <= 0.02, "N={n}: {v} vs {printed}");
        }
    }

    #[test]
    fn exhaustive_dmin_matches_the_two_ring_geometry() {
        // Independent analytic minimum for the built arrangement: same-ring
        // chords 2·D·sinθ_F·sin(2πk/N) for ring steps k, against cross-ring
        // distances at azimuth offsets (2j+1)·2π/N with height gap 2D·cosθ_F.
        for n in [4usize, 6, 8, 10, 14, 20, 34] {
            for d in [1.0, 3.5] {
                let half = n / 2;
                let mut expect = f64::INFINITY;
                for k in 1..half {
                    let ang = 2.0 * std::f64::consts::PI * (2 * k) as f64 / n as f64;
                    expect = expect.min(2.0 * d * SIN_THETA_F * (ang / 2.0).sin());
                }
                for j in 0..half {
                    let ang = 2.0 * std::f64::consts::PI * (2 * j + 1) as f64 / n as f64;
                    let ring = 2.0 * d * SIN_THETA_F * (ang / 2.0).sin();
                    let cross =
                        (ring * ring + 4.0 * d * d * COS_THETA_F * COS_THETA_F).sqrt();
                    expect = expect.min(cross);
                }
                let f = build_symmetric(n, Vec3::new(3.0, 1.0, -2.0), d).unwrap();
                let got = min_pairwise_distance(&f);
                assert!(
                    (got - expect).abs() <= 1e-9,
                    "N={n} D={d}: exhaustive {got} vs analytic {expect}"
                );
            }
        }
    }

    #[test]
    fn six_robot_arrangement_is_a_regular_octahedron() {
        // With sinθ_F = sqrt(2/3) the N=6 two-ring arrangement is a rotated
        // regular octahedron, so every nearest-neighbor distance is D·sqrt(2).
        let f = build_symmetric(6, Vec3::zeros(), 1.0).unwrap();
        let got = min_pairwise_distance(&f);
        assert!((got - 2.0f64.sqrt()).abs() <= 1e-12, "{got}");
    }

    proptest! {
        #[test]
        fn radius_invariant_holds_everywhere(
            n in (2usize..12).prop_map(|k| 2 * k),
            cx in -50.0..50.0f64,
            cy in -50.0..50.0f64,
            cz in -50.0..50.0f64,
            d in 0.1..10.0f64,
        ) {
            let c = Vec3::new(cx, cy, cz);
            let f = build_symmetric(n, c, d).unwrap();
            for r in &f.positions {
                prop_assert!(((r - c).norm() - d).abs() <= 1e-9);
            }
        }

        #[test]
        fn moment_identities_hold_for_random_centers(
            n in (2usize..20).prop_map(|k| 2 * k),
            cx in -100.0..100.0f64,
            d in 0.5..8.0f64,
        ) {
            let f = build_symmetric(n, Vec3::new(cx, -cx / 2.0, 3.0), d).unwrap();
            let mom = formation_moments(&f).unwrap();
            let scale = n as f64 * d * d;
            prop_assert!(mom.r_bar.norm() <= 1e-12 * scale.max(n as f64 * d));
            prop_assert!(mom.m_alpha.norm() <= 1e-12 * scale);
        }
    }
}
