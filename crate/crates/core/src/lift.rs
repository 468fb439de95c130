//! The action lifted to the resolution-`q` grid of probability measures.
//!
//! Deterministic pushforward maps grid atoms to grid atoms, so the lifted
//! action is itself a finite deterministic system and every procedure in
//! [`crate::proximality`] runs on it unchanged. Meta-measures (probability
//! vectors over atoms) and the barycenter map connect the two levels.

use std::fmt;

use num::{BigInt, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::actions::{convolution, ActionKind, ActionSystem, SemigroupTable, Transformation, Word};
use crate::proximality::{is_proximal, strongly_proximal, Budget, Status, Verdict};
use crate::spaces::{w1_distance, FiniteSpace, GridSimplex, Measure};
use crate::{linalg, sample, Error, Result, Q};

/// The lifted action on grid atoms, with the Wasserstein-1 metric between
/// atoms as the lifted space's metric.
#[derive(Debug, Clone)]
pub struct LiftedSystem {
    grid: GridSimplex,
    system: ActionSystem,
}

impl LiftedSystem {
    pub fn grid(&self) -> &GridSimplex {
        &self.grid
    }

    /// The lifted action as an ordinary deterministic system on atoms.
    pub fn system(&self) -> &ActionSystem {
        &self.system
    }

    pub fn metric(&self) -> &[Vec<Q>] {
        self.system.space().metric()
    }

    pub fn atom_maps(&self) -> &[Transformation] {
        self.system.maps().expect("lifted systems are deterministic")
    }

    pub fn word_map(&self, w: &Word) -> Result<Transformation> {
        self.system.word_transformation(w)
    }
}

pub fn lift_system(sys: &ActionSystem, q: usize) -> Result<LiftedSystem> {
    let maps = sys.maps()?;
    let grid = GridSimplex::new(sys.points(), q)?;
    let atom_maps = maps
        .iter()
        .map(|g| {
            let image = grid
                .atoms()
                .iter()
                .map(|a| {
                    let pushed = g.push(a)?;
                    Ok(grid.index_of(&pushed).expect("pushforward preserves the grid"))
                })
                .collect::<Result<Vec<_>>>()?;
            Transformation::new(image)
        })
        .collect::<Result<Vec<_>>>()?;

    let n = grid.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect();
    let distances = pairs
        .par_iter()
        .map(|&(i, j)| w1_distance(sys.space(), grid.atom(i), grid.atom(j)))
        .collect::<Result<Vec<_>>>()?;
    let mut metric = vec![vec![Q::zero(); n]; n];
    for (&(i, j), d) in pairs.iter().zip(distances) {
        metric[i][j] = d.clone();
        metric[j][i] = d;
    }
    let labels = grid.atoms().iter().map(ToString::to_string).collect();
    let space = FiniteSpace::new(labels, metric)?;
    let system = ActionSystem::deterministic(space, atom_maps)?;
    Ok(LiftedSystem { grid, system })
}

/// A probability vector over the atoms of a grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MetaMeasure {
    weights: Vec<Q>,
}

impl MetaMeasure {
    pub fn new(weights: Vec<Q>) -> Result<Self> {
        Measure::new(weights.clone())?;
        Ok(MetaMeasure { weights })
    }

    pub fn point_mass(atoms: usize, atom: usize) -> Self {
        MetaMeasure { weights: Measure::dirac(atoms, atom).weights().to_vec() }
    }

    pub fn weights(&self) -> &[Q] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `Some(i)` when all mass sits on atom `i`.
    pub fn point_mass_atom(&self) -> Option<usize> {
        self.weights.iter().position(One::is_one)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.weights[i].is_zero()).collect()
    }

    pub fn mix(&self, a: &Q, other: &MetaMeasure) -> Result<MetaMeasure> {
        let mixed = Measure::from_weights_unchecked(self.weights.clone())
            .mix(a, &Measure::from_weights_unchecked(other.weights.clone()))?;
        Ok(MetaMeasure { weights: mixed.weights().to_vec() })
    }
}

impl fmt::Display for MetaMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .support()
            .into_iter()
            .map(|i| format!("{}@{}", self.weights[i], i))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// The barycenter `Σᵢ ρ(atomᵢ)·atomᵢ`.
pub fn barycenter(grid: &GridSimplex, rho: &MetaMeasure) -> Result<Measure> {
    if rho.len() != grid.len() {
        return Err(Error::Dimension { expected: grid.len(), found: rho.len() });
    }
    let mut out = vec![Q::zero(); grid.points()];
    for i in rho.support() {
        for (o, w) in out.iter_mut().zip(grid.atom(i).weights()) {
            *o += &rho.weights[i] * w;
        }
    }
    Ok(Measure::from_weights_unchecked(out))
}

/// Pushforward of a meta-measure along the lifted atom map of `w`.
pub fn push_meta(lifted: &LiftedSystem, w: &Word, rho: &MetaMeasure) -> Result<MetaMeasure> {
    let t = lifted.word_map(w)?;
    if rho.len() != t.len() {
        return Err(Error::Dimension { expected: t.len(), found: rho.len() });
    }
    let mut out = vec![Q::zero(); rho.len()];
    for i in rho.support() {
        out[t.apply(i)] += &rho.weights[i];
    }
    Ok(MetaMeasure { weights: out })
}

/// Random meta-measure on at most four atoms with small integer weights.
pub fn random_meta<R: Rng + ?Sized>(rng: &mut R, atoms: usize) -> MetaMeasure {
    let support = rng.gen_range(1..=atoms.min(4));
    let mut raw = vec![0i64; atoms];
    for _ in 0..support {
        raw[rng.gen_range(0..atoms)] += rng.gen_range(1..=9);
    }
    MetaMeasure { weights: sample::normalize(&raw).weights().to_vec() }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PsiReport {
    pub trials: usize,
    pub equivariance_checks: usize,
    pub section_checks: usize,
    pub pullback_checks: usize,
    /// Pullback checks whose barycenter actually was a point mass.
    pub pullback_hits: usize,
    pub violations: Vec<String>,
}

impl PsiReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks equivariance `Ψ(wρ) = wΨ(ρ)`, the section law `Ψ(δ_y) = y` and
/// point-mass pullback `Ψ(ρ) = δ_x ⇔ ρ = δ_{δ_x}` exactly on random inputs.
pub fn psi_checks(sys: &ActionSystem, q: usize, trials: usize, seed: u64) -> Result<PsiReport> {
    let lifted = lift_system(sys, q)?;
    let grid = lifted.grid();
    let mut report = PsiReport { trials, ..PsiReport::default() };

    for (i, atom) in grid.atoms().iter().enumerate() {
        report.section_checks += 1;
        if barycenter(grid, &MetaMeasure::point_mass(grid.len(), i))? != *atom {
            report.violations.push(format!("section law fails at atom {i} = {atom}"));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for trial in 0..trials {
        let rho = if rng.gen_bool(0.2) {
            let x = rng.gen_range(0..grid.points());
            MetaMeasure::point_mass(grid.len(), grid.vertex(x))
        } else {
            random_meta(&mut rng, grid.len())
        };
        let w = sample::random_word(&mut rng, sys.generator_count(), 6);

        report.equivariance_checks += 1;
        let pushed = push_meta(&lifted, &w, &rho)?;
        let lhs = barycenter(grid, &pushed)?;
        let rhs = crate::actions::pushforward(sys, &w, &barycenter(grid, &rho)?)?;
        if lhs != rhs {
            report
                .violations
                .push(format!("trial {trial}: equivariance fails for word {w}: {lhs} != {rhs}"));
        }

        for candidate in [&rho, &pushed] {
            report.pullback_checks += 1;
            let bary = barycenter(grid, candidate)?;
            let on_vertex = bary.point_mass();
            let at_vertex_atom = candidate
                .point_mass_atom()
                .and_then(|a| grid.atom(a).point_mass());
            if on_vertex.is_some() {
                report.pullback_hits += 1;
            }
            if on_vertex != at_vertex_atom {
                report.violations.push(format!(
                    "trial {trial}: barycenter {bary} of {candidate} breaks point-mass pullback"
                ));
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HomomorphismReport {
    pub trials: usize,
    pub violations: Vec<String>,
}

impl HomomorphismReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Meta-level convolution `ρ₁ ⋆ ρ₂`: the image of `ρ₁ ⊗ ρ₂` under
/// `(μ, ν) ↦ μ*ν`, expressed over the resolution-`q²` grid.
pub fn meta_convolution(
    table: &SemigroupTable,
    grid: &GridSimplex,
    fine: &GridSimplex,
    rho1: &MetaMeasure,
    rho2: &MetaMeasure,
) -> Result<MetaMeasure> {
    let mut out = vec![Q::zero(); fine.len()];
    for i in rho1.support() {
        for j in rho2.support() {
            let product = convolution(table, grid.atom(i), grid.atom(j))?;
            let k = fine.index_of(&product).ok_or_else(|| {
                Error::InvalidArgument(format!("convolution {product} is not on the fine grid"))
            })?;
            out[k] += &rho1.weights[i] * &rho2.weights[j];
        }
    }
    Ok(MetaMeasure { weights: out })
}

/// Checks `Ψ(ρ₁ ⋆ ρ₂) = Ψ(ρ₁) * Ψ(ρ₂)` exactly on random meta-measures, plus
/// the unit law when the table has an identity element.
pub fn psi_homomorphism_check(table: &SemigroupTable, q: usize, trials: usize, seed: u64) -> Result<HomomorphismReport> {
    let grid = GridSimplex::new(table.len(), q)?;
    let fine = GridSimplex::new(table.len(), q * q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = HomomorphismReport { trials, violations: Vec::new() };
    let unit = table.identity().map(|e| MetaMeasure::point_mass(grid.len(), grid.vertex(e)));
    for trial in 0..trials {
        let rho1 = random_meta(&mut rng, grid.len());
        let rho2 = match &unit {
            Some(u) if trial % 10 == 0 => u.clone(),
            _ => random_meta(&mut rng, grid.len()),
        };
        let lhs = barycenter(&fine, &meta_convolution(table, &grid, &fine, &rho1, &rho2)?)?;
        let rhs = convolution(table, &barycenter(&grid, &rho1)?, &barycenter(&grid, &rho2)?)?;
        if lhs != rhs {
            report
                .violations
                .push(format!("trial {trial}: Ψ(ρ₁⋆ρ₂) = {lhs} but Ψ(ρ₁)*Ψ(ρ₂) = {rhs}"));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HarnessMode {
    /// Base strongly proximal ⇔ lifted action proximal.
    Prop1,
    /// Base strongly proximal ⇔ lifted action strongly proximal.
    Thm,
}

impl fmt::Display for HarnessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HarnessMode::Prop1 => "prop1",
            HarnessMode::Thm => "thm",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    /// PASS iff decided verdicts agree; any UNKNOWN makes it inconclusive.
    pub fn compare(a: Status, b: Status) -> Outcome {
        match (a, b) {
            (Status::Unknown, _) | (_, Status::Unknown) => Outcome::Inconclusive,
            (x, y) if x == y => Outcome::Pass,
            _ => Outcome::Fail,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone)]
pub struct HarnessReport {
    pub mode: HarnessMode,
    pub resolution: usize,
    pub base: Verdict,
    pub lifted: Verdict,
    pub outcome: Outcome,
    pub lifted_system: LiftedSystem,
}

pub fn equivalence_harness(sys: &ActionSystem, q: usize, b: &Budget, mode: HarnessMode) -> Result<HarnessReport> {
    if sys.kind() != ActionKind::Deterministic {
        return Err(Error::UnsupportedKind("deterministic"));
    }
    let base = strongly_proximal(sys, b)?;
    let lifted_system = lift_system(sys, q)?;
    let lifted = match mode {
        HarnessMode::Prop1 => is_proximal(lifted_system.system(), b)?,
        HarnessMode::Thm => strongly_proximal(lifted_system.system(), b)?,
    };
    let outcome = Outcome::compare(base.status, lifted.status);
    Ok(HarnessReport { mode, resolution: q, base, lifted, outcome, lifted_system })
}

#[derive(Debug, Clone)]
pub struct ResolutionSweep {
    pub reports: Vec<HarnessReport>,
    /// Set when decided lifted verdicts differ between resolutions.
    pub disagreement: bool,
}

/// Runs the harness at each resolution and flags cross-resolution
/// disagreement of the lifted verdicts.
pub fn resolution_sweep(sys: &ActionSystem, resolutions: &[usize], b: &Budget, mode: HarnessMode) -> Result<ResolutionSweep> {
    let reports = resolutions
        .iter()
        .map(|&q| equivalence_harness(sys, q, b, mode))
        .collect::<Result<Vec<_>>>()?;
    let decided: Vec<Status> = reports
        .iter()
        .map(|r| r.lifted.status)
        .filter(|s| *s != Status::Unknown)
        .collect();
    let disagreement = decided.windows(2).any(|w| w[0] != w[1]);
    Ok(ResolutionSweep { reports, disagreement })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BatchSummary {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    /// Indices of failing instances.
    pub failures: Vec<usize>,
}

impl BatchSummary {
    pub fn total(&self) -> usize {
        self.pass + self.fail + self.inconclusive
    }

    pub fn record(&mut self, index: usize, outcome: Outcome) {
        match outcome {
            Outcome::Pass => self.pass += 1,
            Outcome::Fail => {
                self.fail += 1;
                self.failures.push(index);
            }
            Outcome::Inconclusive => self.inconclusive += 1,
        }
    }
}

/// The harness over many systems, in parallel.
pub fn equivalence_batch(systems: &[ActionSystem], q: usize, b: &Budget, mode: HarnessMode) -> Result<BatchSummary> {
    let outcomes = systems
        .par_iter()
        .map(|s| equivalence_harness(s, q, b, mode).map(|r| r.outcome))
        .collect::<Result<Vec<_>>>()?;
    let mut summary = BatchSummary::default();
    for (i, o) in outcomes.into_iter().enumerate() {
        summary.record(i, o);
    }
    Ok(summary)
}

/// `true` when `ρ` is fixed by every lifted generator.
pub fn is_invariant(lifted: &LiftedSystem, rho: &MetaMeasure) -> Result<bool> {
    for g in 0..lifted.atom_maps().len() {
        if push_meta(lifted, &Word(vec![g]), rho)? != *rho {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Extreme points of the polytope of meta-measures invariant under every
/// lifted generator.
///
/// An invariant `ρ` has a support that every generator maps bijectively onto
/// itself, and `ρ` is constant along generator orbits there. So the extreme
/// points are the uniform measures on the orbits inside the largest such
/// support, which is found as a shrinking fixpoint.
pub fn invariant_metas(sys: &ActionSystem, q: usize) -> Result<Vec<MetaMeasure>> {
    let lifted = lift_system(sys, q)?;
    Ok(invariant_extremes(&lifted))
}

pub fn invariant_extremes(lifted: &LiftedSystem) -> Vec<MetaMeasure> {
    let maps = lifted.atom_maps();
    let n = lifted.grid().len();
    let mut alive = vec![true; n];
    loop {
        let mut next = alive.clone();
        for g in maps {
            let mut hit = vec![false; n];
            for a in (0..n).filter(|&a| alive[a]) {
                hit[g.apply(a)] = true;
            }
            for a in 0..n {
                // keep a only if it stays alive under g and is the image of an alive atom
                if next[a] && (!alive[g.apply(a)] || !hit[a]) {
                    next[a] = false;
                }
            }
        }
        if next == alive {
            break;
        }
        alive = next;
    }

    // Orbits: connected components of the generator graph on the alive set.
    let mut component = vec![usize::MAX; n];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for start in (0..n).filter(|&a| alive[a]) {
        if component[start] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let mut members = vec![start];
        component[start] = id;
        let mut i = 0;
        while i < members.len() {
            let a = members[i];
            for g in maps {
                let b = g.apply(a);
                if component[b] == usize::MAX {
                    component[b] = id;
                    members.push(b);
                }
            }
            i += 1;
        }
        members.sort_unstable();
        orbits.push(members);
    }

    orbits
        .into_iter()
        .map(|orbit| {
            let w = Q::new(BigInt::one(), BigInt::from(orbit.len()));
            let mut weights = vec![Q::zero(); n];
            for a in orbit {
                weights[a] = w.clone();
            }
            MetaMeasure { weights }
        })
        .collect()
}

/// Dimension of the space of signed invariant vectors `{ρ : g_*ρ = ρ ∀g}`,
/// from an exact nullspace computation. Equals the number of extreme
/// invariant meta-measures.
pub fn invariant_dimension(lifted: &LiftedSystem) -> usize {
    let n = lifted.grid().len();
    let mut system: Vec<Vec<Q>> = Vec::new();
    for g in lifted.atom_maps() {
        let mut block = vec![vec![Q::zero(); n]; n];
        for a in 0..n {
            block[g.apply(a)][a] += Q::one();
            block[a][a] -= Q::one();
        }
        system.extend(block);
    }
    linalg::nullspace(&system, n).len()
}
