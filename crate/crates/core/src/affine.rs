//! Affine actions on the convex hull of linearly independent vectors.
//!
//! With vertices `v₁…vₙ` linearly independent, `λ ↦ Σ λᵢvᵢ` identifies
//! measures on the vertex set with points of the hull. An affine map that
//! sends vertices to vertices is then the pushforward of a vertex map, and
//! the hull action can be analyzed as the lifted vertex action.

use std::fmt;

use num::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::actions::{pushforward, ActionSystem, StochasticMatrix, Transformation};
use crate::lift::{lift_system, Outcome};
use crate::proximality::{contracting_word, is_proximal, strongly_proximal, Budget, Claim, Status, Verdict};
use crate::spaces::{FiniteSpace, Measure};
use crate::{linalg, sample, Error, Result, Q};

/// Linearly independent vertices spanning a simplex in `ℚ^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplexModel {
    vertices: Vec<Vec<Q>>,
}

impl SimplexModel {
    pub fn new(vertices: Vec<Vec<Q>>) -> Result<Self> {
        let Some(d) = vertices.first().map(Vec::len) else {
            return Err(Error::InvalidArgument("simplex needs at least one vertex".into()));
        };
        if let Some(v) = vertices.iter().find(|v| v.len() != d) {
            return Err(Error::Dimension { expected: d, found: v.len() });
        }
        if linalg::rank(&vertices) != vertices.len() {
            return Err(Error::InvalidArgument("vertices are not linearly independent".into()));
        }
        Ok(SimplexModel { vertices })
    }

    /// The standard basis of `ℚⁿ`.
    pub fn standard(n: usize) -> Self {
        SimplexModel { vertices: linalg::identity(n) }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn dimension(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn vertices(&self) -> &[Vec<Q>] {
        &self.vertices
    }

    /// Largest squared distance between two vertices; `‖embed λ − embed μ‖²`
    /// never exceeds this times `tv(λ, μ)²`.
    pub fn squared_diameter(&self) -> Q {
        let mut best = Q::zero();
        for a in &self.vertices {
            for b in &self.vertices {
                let d = squared_norm(&sub(a, b));
                if d > best {
                    best = d;
                }
            }
        }
        best
    }
}

pub fn sub(a: &[Q], b: &[Q]) -> Vec<Q> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn squared_norm(v: &[Q]) -> Q {
    v.iter().map(|x| x * x).sum()
}

/// An affine self-map of the hull, given by where it sends each vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AffineVertexMap {
    /// Vertex `i` goes to vertex `image[i]`.
    Vertex(Transformation),
    /// Vertex `i` goes to the convex combination given by row `i`.
    Convex(StochasticMatrix),
}

impl AffineVertexMap {
    pub fn len(&self) -> usize {
        match self {
            AffineVertexMap::Vertex(t) => t.len(),
            AffineVertexMap::Convex(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Surjective onto the hull iff the vertex images are a permutation of
    /// the vertices (the hull's extreme points must all be hit).
    pub fn is_surjective(&self) -> bool {
        match self {
            AffineVertexMap::Vertex(t) => t.is_bijective(),
            AffineVertexMap::Convex(s) => s.as_transformation().is_some_and(|t| t.is_bijective()),
        }
    }

    pub fn as_vertex_map(&self) -> Option<Transformation> {
        match self {
            AffineVertexMap::Vertex(t) => Some(t.clone()),
            AffineVertexMap::Convex(s) => s.as_transformation(),
        }
    }

    pub fn coefficients(&self) -> StochasticMatrix {
        match self {
            AffineVertexMap::Vertex(t) => t.to_matrix(),
            AffineVertexMap::Convex(s) => s.clone(),
        }
    }

    /// The `d×d` matrix acting on the span of the vertices: `L vᵢ` is the
    /// image of vertex `i`. Computed as `W (VᵀV)⁻¹ Vᵀ` with `V` the vertex
    /// matrix and `W` the matrix of images.
    pub fn linear_matrix(&self, model: &SimplexModel) -> Result<Vec<Vec<Q>>> {
        if self.len() != model.vertex_count() {
            return Err(Error::Dimension { expected: model.vertex_count(), found: self.len() });
        }
        let rows = model.vertices();
        let coeffs = self.coefficients();
        // images as rows: image_i = Σ_j c_ij v_j
        let images = linalg::mat_mul(coeffs.rows(), rows);
        let v = linalg::transpose(rows);
        let w = linalg::transpose(&images);
        let gram = linalg::mat_mul(rows, &v);
        let gram_inv = linalg::inverse(&gram).expect("independent vertices have an invertible Gram matrix");
        Ok(linalg::mat_mul(&linalg::mat_mul(&w, &gram_inv), rows))
    }
}

/// `Σ λᵢ vᵢ`.
pub fn embed(model: &SimplexModel, lam: &Measure) -> Result<Vec<Q>> {
    if lam.len() != model.vertex_count() {
        return Err(Error::Dimension { expected: model.vertex_count(), found: lam.len() });
    }
    let mut x = vec![Q::zero(); model.dimension()];
    for (w, v) in lam.weights().iter().zip(model.vertices()) {
        for (xi, vi) in x.iter_mut().zip(v) {
            *xi += w * vi;
        }
    }
    Ok(x)
}

/// The barycentric coordinates of a hull point: inverse of [`embed`].
pub fn extract(model: &SimplexModel, x: &[Q]) -> Result<Measure> {
    if x.len() != model.dimension() {
        return Err(Error::Dimension { expected: model.dimension(), found: x.len() });
    }
    let columns = linalg::transpose(model.vertices());
    let lam = linalg::solve(&columns, x)
        .ok_or_else(|| Error::Containment("point is not in the span of the vertices".into()))?;
    if let Some(i) = lam.iter().position(Signed::is_negative) {
        return Err(Error::Containment(format!("coordinate {i} is negative ({})", lam[i])));
    }
    let total: Q = lam.iter().sum();
    if !total.is_one() {
        return Err(Error::Containment(format!("coordinates sum to {total}, not 1")));
    }
    Measure::new(lam)
}

/// The action on the vertex set `F` (discrete metric) generated by vertex maps.
pub fn vertex_system(maps: &[AffineVertexMap]) -> Result<ActionSystem> {
    let n = maps.first().map(AffineVertexMap::len).unwrap_or(0);
    let transformations = maps
        .iter()
        .enumerate()
        .map(|(index, m)| {
            m.as_vertex_map().ok_or_else(|| Error::InvalidGenerator {
                index,
                reason: "general convex maps do not act on the vertex set".into(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ActionSystem::deterministic(FiniteSpace::discrete(n), transformations)
}

/// General affine maps as a stochastic system on `F`, acting on `P(F)` by
/// their coefficient matrices.
pub fn stochastic_system(maps: &[AffineVertexMap]) -> Result<ActionSystem> {
    let n = maps.first().map(AffineVertexMap::len).unwrap_or(0);
    ActionSystem::stochastic(
        FiniteSpace::discrete(n),
        maps.iter().map(AffineVertexMap::coefficients).collect(),
    )
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EquivarianceReport {
    pub trials: usize,
    pub violations: Vec<String>,
}

impl EquivarianceReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `embed(wλ) = w·embed(λ)` exactly, where the right side applies the
/// linear matrices of the affine maps to the embedded point.
pub fn f_equivariance_check(model: &SimplexModel, maps: &[AffineVertexMap], trials: usize, seed: u64) -> Result<EquivarianceReport> {
    let sys = vertex_system(maps)?;
    if sys.points() != model.vertex_count() {
        return Err(Error::Dimension { expected: model.vertex_count(), found: sys.points() });
    }
    let linear = maps
        .iter()
        .map(|m| m.linear_matrix(model))
        .collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = EquivarianceReport { trials, violations: Vec::new() };
    for trial in 0..trials {
        let lam = sample::random_measure(&mut rng, model.vertex_count());
        let w = sample::random_word(&mut rng, maps.len(), 6);
        let lhs = embed(model, &pushforward(&sys, &w, &lam)?)?;
        let rhs = w
            .letters()
            .iter()
            .fold(embed(model, &lam)?, |x, &l| linalg::mat_vec(&linear[l], &x));
        if lhs != rhs {
            report.violations.push(format!("trial {trial}: word {w} on {lam} breaks equivariance"));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypothesisLabel {
    /// Every map is surjective, as the equivalence assumes.
    Standard,
    /// Some map is not surjective; the run goes beyond those hypotheses.
    Extended,
}

impl fmt::Display for HypothesisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HypothesisLabel::Standard => "STANDARD",
            HypothesisLabel::Extended => "EXTENDED",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CorollaryReport {
    pub label: HypothesisLabel,
    /// Grid resolution of the lift, or `None` when the hull is decided
    /// directly from the coefficient matrices.
    pub resolution: Option<usize>,
    pub proximal: Verdict,
    pub strongly_proximal: Verdict,
    pub outcome: Outcome,
}

/// Compares proximality and strong proximality of the hull action, realized
/// as the vertex action lifted to the resolution-`q` grid.
pub fn corollary_harness(model: &SimplexModel, maps: &[AffineVertexMap], q: usize, b: &Budget) -> Result<CorollaryReport> {
    let sys = vertex_system(maps)?;
    if sys.points() != model.vertex_count() {
        return Err(Error::Dimension { expected: model.vertex_count(), found: sys.points() });
    }
    let label = hypothesis_label(maps);
    let lifted = lift_system(&sys, q)?;
    let proximal = is_proximal(lifted.system(), b)?;
    let strong = strongly_proximal(lifted.system(), b)?;
    let outcome = Outcome::compare(proximal.status, strong.status);
    Ok(CorollaryReport { label, resolution: Some(q), proximal, strongly_proximal: strong, outcome })
}

fn hypothesis_label(maps: &[AffineVertexMap]) -> HypothesisLabel {
    if maps.iter().all(AffineVertexMap::is_surjective) {
        HypothesisLabel::Standard
    } else {
        HypothesisLabel::Extended
    }
}

/// The harness for general affine maps, decided on the coefficient matrices
/// without a grid.
///
/// Proximality is the pairwise verdict of the stochastic engine. The hull
/// action is strongly proximal iff some word has Dobrushin coefficient below
/// one: its powers shrink the image of the hull to a point, while two
/// vertices whose rows never share support keep `½(δ_vi + δ_vj)` spread.
pub fn convex_hull_harness(model: &SimplexModel, maps: &[AffineVertexMap], b: &Budget) -> Result<CorollaryReport> {
    let sys = stochastic_system(maps)?;
    if sys.points() != model.vertex_count() {
        return Err(Error::Dimension { expected: model.vertex_count(), found: sys.points() });
    }
    let proximal = is_proximal(&sys, b)?;
    let strong = match contracting_word(&sys, b)? {
        Ok(w) => {
            let delta = crate::actions::dobrushin(&sys.word_matrix(&w)?);
            Verdict {
                status: Status::Yes,
                witness: Some(w),
                claim: Some(Claim::Contract),
                certificate: Some(format!("word with dobrushin coefficient {delta} shrinks the hull under powers")),
            }
        }
        Err((x, y)) => Verdict {
            status: Status::No,
            witness: None,
            claim: None,
            certificate: Some(format!(
                "vertices {x} and {y} never share support, so the midpoint measure of the two stays spread"
            )),
        },
    };
    let outcome = Outcome::compare(proximal.status, strong.status);
    Ok(CorollaryReport { label: hypothesis_label(maps), resolution: None, proximal, strongly_proximal: strong, outcome })
}
