//! Discrete constrained centroidal Voronoi tessellation of the unit sphere:
//! Lloyd iteration over a fixed mesh, with cell centroids projected back to
//! the surface along the radial line.

use crate::error::{Error, Result};
use crate::geometry::{
    fibonacci_sphere_mesh, radial_project, sample_unit_sphere, SphericalMesh, Vec3,
};

/// Voronoi generators on the unit sphere. Unit norm to 1e-12, pairwise
/// distinct by at least 1e-9.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSet {
    pub generators: Vec<Vec3>,
}

impl GeneratorSet {
    pub fn new(generators: Vec<Vec3>) -> Result<Self> {
        if generators.is_empty() {
            return Err(Error::InvalidArgument("empty generator set".into()));
        }
        for (i, g) in generators.iter().enumerate() {
            if (g.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "generator {i} not on the unit sphere (norm {})",
                    g.norm()
                )));
            }
        }
        for i in 0..generators.len() {
            for j in (i + 1)..generators.len() {
                if (generators[i] - generators[j]).norm() <= 1e-9 {
                    return Err(Error::InvalidArgument(format!(
                        "generators {i} and {j} coincide"
                    )));
                }
            }
        }
        Ok(Self { generators })
    }

    pub fn n(&self) -> usize {
        self.generators.len()
    }
}

/// Assignment of every mesh point to its nearest generator.
#[derive(Debug, Clone, PartialEq)]
pub struct VoronoiPartition {
    /// mesh point index -> generator index
    pub assignment: Vec<usize>,
    pub cell_sizes: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
pub struct LloydConfig {
    pub max_iters: usize,
    pub displacement_tol: f64,
    pub mesh_size: usize,
}

impl LloydConfig {
    /// Defaults sized so the converged tessellation's first moment and
    /// minimum-distance statistics are resolution-limited well below the
    /// tolerances used in the diagnostics, while a single computation stays
    /// in the seconds range.
    pub fn for_n(n: usize) -> Self {
        Self {
            max_iters: 1000,
            displacement_tol: 1e-9,
            mesh_size: 20_000.max(2_000 * n),
        }
    }
}

/// Nearest-generator assignment by Euclidean distance; ties go to the lowest
/// generator index. For unit vectors ||u-g||^2 = 2 - 2 u.g, so the argmin is
/// the argmax of the dot product.
pub fn assign_cells(mesh: &SphericalMesh, gens: &GeneratorSet) -> Result<VoronoiPartition> {
    if gens.generators.is_empty() {
        return Err(Error::InvalidArgument("empty generator set".into()));
    }
    let n = gens.n();
    let mut assignment = vec![0usize; mesh.count()];
    let mut cell_sizes = vec![0usize; n];
    for (idx, u) in mesh.points.iter().enumerate() {
        let mut best = 0usize;
        let mut best_dot = u.dot(&gens.generators[0]);
        for (j, g) in gens.generators.iter().enumerate().skip(1) {
            let d = u.dot(g);
            if d > best_dot {
                best_dot = d;
                best = j;
            }
        }
        assignment[idx] = best;
        cell_sizes[best] += 1;
    }
    Ok(VoronoiPartition {
        assignment,
        cell_sizes,
    })
}

/// Per-cell unweighted means of the assigned mesh points, radially projected
/// back to the sphere.
pub fn constrained_centroids(
    mesh: &SphericalMesh,
    part: &VoronoiPartition,
) -> Result<GeneratorSet> {
    let n = part.cell_sizes.len();
    if let Some(cell) = part.cell_sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyCell { cell });
    }
    let mut sums = vec![Vec3::zeros(); n];
    for (u, &j) in mesh.points.iter().zip(&part.assignment) {
        sums[j] += u;
    }
    let mut out = Vec::with_capacity(n);
    for (j, s) in sums.iter().enumerate() {
        let mean = s / part.cell_sizes[j] as f64;
        if mean.norm() <= 1e-12 {
            return Err(Error::DegeneratePoint { norm: mean.norm() });
        }
        out.push(radial_project(&mean)?);
    }
    GeneratorSet::new(out)
}

/// Discrete coverage energy: sum of squared point-to-generator distances,
/// weighted by the equal-area share 4π/m of each mesh point.
pub fn coverage_energy(mesh: &SphericalMesh, gens: &GeneratorSet, part: &VoronoiPartition) -> f64 {
    let w = mesh.point_weight();
    let mut total = 0.0;
    for (u, &j) in mesh.points.iter().zip(&part.assignment) {
        total += (u - gens.generators[j]).norm_squared();
    }
    total * w
}

/// One assign -> centroid -> project cycle. Returns the relocated generators,
/// the partition of the incoming configuration, its energy, and the largest
/// generator displacement.
pub fn lloyd_step(
    mesh: &SphericalMesh,
    gens: &GeneratorSet,
) -> Result<(GeneratorSet, VoronoiPartition, f64, f64)> {
    let part = assign_cells(mesh, gens)?;
    let energy = coverage_energy(mesh, gens, &part);
    let next = constrained_centroids(mesh, &part)?;
    let max_displacement = gens
        .generators
        .iter()
        .zip(&next.generators)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok((next, part, energy, max_displacement))
}

/// Mesh point maximizing the minimum distance to all generators except
/// `exclude`; used to re-seed a generator whose cell came up empty.
pub(crate) fn farthest_mesh_point(
    mesh: &SphericalMesh,
    gens: &GeneratorSet,
    exclude: usize,
) -> Vec3 {
    let mut best = mesh.points[0];
    let mut best_score = f64::NEG_INFINITY;
    for u in &mesh.points {
        let mut nearest = f64::INFINITY;
        for (j, g) in gens.generators.iter().enumerate() {
            if j != exclude {
                nearest = nearest.min((u - g).norm_squared());
            }
        }
        if nearest > best_score {
            best_score = nearest;
            best = *u;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct CvtResult {
    pub generators: GeneratorSet,
    pub iterations: usize,
    pub final_displacement: f64,
    /// Coverage energy of the final configuration.
    pub energy: f64,
    /// False when max_iters ran out before the displacement tolerance was met.
    pub converged: bool,
}

/// Runs Lloyd's algorithm from a seeded random initialization until the
/// largest generator displacement drops to the tolerance or the iteration
/// budget runs out. Deterministic in (n, seed, cfg). Non-convergence is
/// reported through the flag, not as an error.
pub fn compute_cvt(n: usize, seed: u64, cfg: &LloydConfig) -> Result<CvtResult> {
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "need at least 4 generators, got {n}"
        )));
    }
    if cfg.displacement_tol <= 0.0 || cfg.max_iters == 0 {
        return Err(Error::InvalidArgument("invalid Lloyd config".into()));
    }
    if cfg.mesh_size < 200 * n {
        return Err(Error::InvalidArgument(format!(
            "mesh of {} points is too coarse for {n} generators (need >= {})",
            cfg.mesh_size,
            200 * n
        )));
    }

    let mesh = fibonacci_sphere_mesh(cfg.mesh_size)?;
    let mut gens = GeneratorSet::new(sample_unit_sphere(n, seed)?)?;
    let mut iterations = 0;
    let mut displacement = f64::INFINITY;
    let mut converged = false;

    while iterations < cfg.max_iters {
        match lloyd_step(&mesh, &gens) {
            Ok((next, _part, _energy, disp)) => {
                gens = next;
                displacement = disp;
                iterations += 1;
                if disp <= cfg.displacement_tol {
                    converged = true;
                    break;
                }
            }
            Err(Error::EmptyCell { cell }) => {
                // Pathological initialization: drop the starving generator at
                // the point farthest from everyone else and keep iterating.
                gens.generators[cell] = farthest_mesh_point(&mesh, &gens, cell);
                displacement = f64::INFINITY;
                iterations += 1;
            }
            Err(e) => return Err(e),
        }
    }

    let part = assign_cells(&mesh, &gens)?;
    let energy = coverage_energy(&mesh, &gens, &part);
    Ok(CvtResult {
        generators: gens,
        iterations,
        final_displacement: displacement,
        energy,
        converged,
    })
}
