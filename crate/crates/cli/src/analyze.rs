//! The `analyze` subcommand: runs the engines selected by a mode and
//! assembles a [`Report`].

use std::time::Instant;

use anyhow::{bail, Context, Result};
use proxilift::actions::{closure, ActionKind, ActionSystem, Generators};
use proxilift::affine::{self, AffineVertexMap, HypothesisLabel};
use proxilift::lift::{self, HarnessMode, Outcome};
use proxilift::proximality::{self, Budget, Status, Verdict};
use proxilift::Q;

use crate::report::{
    sha256_hex, CheckEntry, HarnessEntry, InvariantEntry, Report, Settings, SystemSummary, Tallies,
    Timing, VerdictEntry, Verification,
};
use crate::spec::{load_str, LoadedSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Base,
    Prop1,
    Thm,
    Psi,
    Invariant,
    Affine,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Base => "base",
            Mode::Prop1 => "prop1",
            Mode::Thm => "thm",
            Mode::Psi => "psi",
            Mode::Invariant => "invariant",
            Mode::Affine => "affine",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub mode: Mode,
    pub grid: usize,
    pub budget: Budget,
    pub seed: u64,
    pub trials: usize,
    pub verify: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { mode: Mode::Base, grid: 2, budget: Budget::default(), seed: 0, trials: 200, verify: false }
    }
}

/// Pairwise verdicts are listed only for spaces up to this size.
const PAIR_LIMIT: usize = 10;

/// Process exit status implied by a report.
pub fn exit_code(report: &Report) -> i32 {
    let t = &report.tallies;
    let unverified = report.verification.as_ref().is_some_and(|v| !v.failed.is_empty());
    if t.fail > 0 || t.violations > 0 || unverified {
        3
    } else if t.inconclusive > 0 || t.unknown_verdicts > 0 {
        2
    } else {
        0
    }
}

struct Builder {
    verdicts: Vec<VerdictEntry>,
    harness: Vec<HarnessEntry>,
    checks: Vec<CheckEntry>,
    invariant: Option<InvariantEntry>,
    notes: Vec<String>,
    tallies: Tallies,
    verify: Option<Verification>,
}

impl Builder {
    fn verdict(&mut self, name: &str, target: &str, v: &Verdict, sys: &ActionSystem) -> Result<()> {
        if v.status == Status::Unknown {
            self.tallies.unknown_verdicts += 1;
        }
        if let (Some(ver), Some(w)) = (self.verify.as_mut(), &v.witness) {
            ver.replayed += 1;
            if !v.replay(sys)? {
                ver.failed.push(format!("{name} [{target}] witness {w}"));
            }
        }
        self.verdicts.push(VerdictEntry::new(name, target, v));
        Ok(())
    }

    fn outcome(&mut self, entry: HarnessEntry, outcome: Outcome) {
        match outcome {
            Outcome::Pass => self.tallies.pass += 1,
            Outcome::Fail => self.tallies.fail += 1,
            Outcome::Inconclusive => self.tallies.inconclusive += 1,
        }
        self.harness.push(entry);
    }

    fn check(&mut self, name: &str, checks: usize, violations: Vec<String>) {
        self.tallies.violations += violations.len();
        self.checks.push(CheckEntry { name: name.into(), checks, violations });
    }
}

/// Parses `spec_text` and runs the analysis; errors are input errors.
pub fn analyze(spec_text: &str, opts: &Options) -> Result<Report> {
    let started = Instant::now();
    let loaded = load_str(spec_text)?;
    if opts.grid == 0 {
        bail!("--grid must be at least 1");
    }
    let sys = &loaded.system;
    let mut b = Builder {
        verdicts: Vec::new(),
        harness: Vec::new(),
        checks: Vec::new(),
        invariant: None,
        notes: Vec::new(),
        tallies: Tallies::default(),
        verify: opts.verify.then(|| Verification { replayed: 0, failed: Vec::new() }),
    };
    let mut summary = SystemSummary {
        points: sys.points(),
        kind: match sys.kind() {
            ActionKind::Deterministic => "deterministic".into(),
            ActionKind::Stochastic => "stochastic".into(),
        },
        generators: sys.generator_count(),
        monoid_size: None,
        monoid_truncated: None,
    };
    match opts.mode {
        Mode::Base => base(sys, opts, &mut b, &mut summary)?,
        Mode::Prop1 => harness(&deterministic(sys, opts.mode)?, opts, HarnessMode::Prop1, &mut b)?,
        Mode::Thm => harness(&deterministic(sys, opts.mode)?, opts, HarnessMode::Thm, &mut b)?,
        Mode::Psi => psi(&deterministic(sys, opts.mode)?, &loaded, opts, &mut b)?,
        Mode::Invariant => invariant(&deterministic(sys, opts.mode)?, opts, &mut b)?,
        Mode::Affine => affine_mode(&loaded, opts, &mut b)?,
    }
    let mut report = Report {
        tool: "proxilift",
        version: env!("CARGO_PKG_VERSION"),
        input_digest: sha256_hex(spec_text.as_bytes()),
        mode: opts.mode.name().into(),
        settings: Settings {
            grid: opts.grid,
            max_word_len: opts.budget.max_word_len,
            max_closure: opts.budget.max_closure,
            epsilon: opts.budget.epsilon.to_string(),
            seed: opts.seed,
            trials: opts.trials,
        },
        system: summary,
        verdicts: b.verdicts,
        harness: b.harness,
        checks: b.checks,
        invariant_metas: b.invariant,
        notes: b.notes,
        tallies: b.tallies,
        verification: b.verify,
        report_digest: String::new(),
        timing: Timing { elapsed_ms: started.elapsed().as_millis() },
    };
    report.seal();
    Ok(report)
}

/// The system itself if deterministic, or its exact deterministic form when
/// every stochastic generator is a 0/1 matrix.
fn deterministic(sys: &ActionSystem, mode: Mode) -> Result<ActionSystem> {
    match sys.kind() {
        ActionKind::Deterministic => Ok(sys.clone()),
        ActionKind::Stochastic => sys.deterministic_embedding().with_context(|| {
            format!("mode {} needs a deterministic action (or 0/1 stochastic matrices)", mode.name())
        }),
    }
}

fn base(sys: &ActionSystem, opts: &Options, b: &mut Builder, summary: &mut SystemSummary) -> Result<()> {
    let budget = &opts.budget;
    b.verdict("proximal", "base", &proximality::is_proximal(sys, budget)?, sys)?;
    b.verdict("strongly_proximal", "base", &proximality::strongly_proximal(sys, budget)?, sys)?;
    if sys.kind() == ActionKind::Deterministic {
        b.verdict("reset_word", "base", &proximality::reset_word(sys, budget)?, sys)?;
        let monoid = closure(sys, budget.max_closure)?;
        summary.monoid_size = Some(monoid.len());
        summary.monoid_truncated = Some(monoid.truncated);
    }
    let m = sys.points();
    if m <= PAIR_LIMIT {
        for x in 0..m {
            for y in x + 1..m {
                let v = proximality::proximal_pair(sys, x, y, budget)?;
                b.verdict(&format!("proximal_pair({x},{y})"), "base", &v, sys)?;
            }
        }
    } else {
        b.notes.push(format!("pairwise verdicts omitted for more than {PAIR_LIMIT} points"));
    }
    Ok(())
}

fn resolutions(grid: usize) -> Vec<usize> {
    let mut qs = vec![1, 2, 3, grid];
    qs.sort_unstable();
    qs.dedup();
    qs
}

fn harness(sys: &ActionSystem, opts: &Options, mode: HarnessMode, b: &mut Builder) -> Result<()> {
    let sweep = lift::resolution_sweep(sys, &resolutions(opts.grid), &opts.budget, mode)?;
    let lifted_name = match mode {
        HarnessMode::Prop1 => "proximal",
        HarnessMode::Thm => "strongly_proximal",
    };
    if let Some(first) = sweep.reports.first() {
        b.verdict("strongly_proximal", "base", &first.base, sys)?;
    }
    for r in &sweep.reports {
        let target = format!("lift q={}", r.resolution);
        b.verdict(lifted_name, &target, &r.lifted, r.lifted_system.system())?;
        let entry = HarnessEntry::new(&mode.to_string(), Some(r.resolution), r.base.status, r.lifted.status, r.outcome);
        b.outcome(entry, r.outcome);
    }
    if sweep.disagreement {
        b.notes.push("lifted verdicts disagree across resolutions".into());
    }
    Ok(())
}

fn psi(sys: &ActionSystem, loaded: &LoadedSpec, opts: &Options, b: &mut Builder) -> Result<()> {
    let r = lift::psi_checks(sys, opts.grid, opts.trials, opts.seed)?;
    let total = r.equivariance_checks + r.section_checks + r.pullback_checks;
    b.check("psi_laws", total, r.violations);
    b.notes.push(format!(
        "psi_laws: {} equivariance, {} section, {} pullback checks ({} point-mass barycenters)",
        r.equivariance_checks, r.section_checks, r.pullback_checks, r.pullback_hits
    ));
    if let Some(table) = &loaded.semigroup {
        let h = lift::psi_homomorphism_check(table, opts.grid, opts.trials, opts.seed)?;
        b.check("psi_homomorphism", h.trials, h.violations);
    }
    Ok(())
}

fn invariant(sys: &ActionSystem, opts: &Options, b: &mut Builder) -> Result<()> {
    let strong = proximality::strongly_proximal(sys, &opts.budget)?;
    b.verdict("strongly_proximal", "base", &strong, sys)?;
    let lifted = lift::lift_system(sys, opts.grid)?;
    let grid = lifted.grid();
    let extremes = lift::invariant_extremes(&lifted);
    let vertices: Vec<usize> = (0..sys.points()).map(|x| grid.vertex(x)).collect();
    let is_vertex_mass =
        |rho: &lift::MetaMeasure| rho.point_mass_atom().is_some_and(|a| vertices.contains(&a));
    let all_vertex = extremes.iter().all(is_vertex_mass);
    let mut violations = Vec::new();
    if strong.status == Status::Yes {
        for rho in extremes.iter().filter(|r| !is_vertex_mass(r)) {
            violations.push(format!("strongly proximal but {rho} is invariant"));
        }
    }
    if strong.status == Status::No && all_vertex {
        b.notes.push("not strongly proximal, yet every invariant meta-measure is a vertex point mass".into());
    }
    b.check("invariant_point_masses", extremes.len(), violations);
    b.invariant = Some(InvariantEntry {
        resolution: opts.grid,
        extremes: extremes
            .iter()
            .map(|rho| {
                rho.support()
                    .into_iter()
                    .map(|a| (grid.atom(a).to_string(), rho.weights()[a].to_string()))
                    .collect()
            })
            .collect(),
        all_vertex_point_masses: all_vertex,
    });
    Ok(())
}

fn affine_mode(loaded: &LoadedSpec, opts: &Options, b: &mut Builder) -> Result<()> {
    let model = loaded
        .simplex
        .as_ref()
        .context("mode affine needs a `simplex` section")?;
    let sys = &loaded.system;
    let vertex = deterministic(sys, Mode::Affine).ok();
    if let Some(vsys) = vertex {
        let maps: Vec<AffineVertexMap> =
            vsys.maps()?.iter().cloned().map(AffineVertexMap::Vertex).collect();
        let eq = affine::f_equivariance_check(model, &maps, opts.trials, opts.seed)?;
        b.check("f_equivariance", eq.trials, eq.violations);
        let c = affine::corollary_harness(model, &maps, opts.grid, &opts.budget)?;
        let lifted = lift::lift_system(&vsys, opts.grid)?;
        let target = format!("hull q={}", opts.grid);
        b.verdict("proximal", &target, &c.proximal, lifted.system())?;
        b.verdict("strongly_proximal", &target, &c.strongly_proximal, lifted.system())?;
        let mut entry =
            HarnessEntry::new("affine", c.resolution, c.proximal.status, c.strongly_proximal.status, c.outcome);
        entry.label = Some(c.label.to_string());
        b.outcome(entry, c.outcome);
        if c.label == HypothesisLabel::Extended {
            b.notes.push("some vertex map is not surjective; outcome lies outside the standard hypotheses".into());
        }
    } else {
        let Generators::Stochastic(ms) = sys.generators() else { unreachable!() };
        let maps: Vec<AffineVertexMap> = ms.iter().cloned().map(AffineVertexMap::Convex).collect();
        let c = affine::convex_hull_harness(model, &maps, &opts.budget)?;
        let ssys = affine::stochastic_system(&maps)?;
        b.verdict("proximal", "hull", &c.proximal, &ssys)?;
        b.verdict("strongly_proximal", "hull", &c.strongly_proximal, &ssys)?;
        let mut entry =
            HarnessEntry::new("affine", None, c.proximal.status, c.strongly_proximal.status, c.outcome);
        entry.label = Some(c.label.to_string());
        b.outcome(entry, c.outcome);
        b.notes.push("general affine maps: hull decided from the coefficient matrices, no grid".into());
    }
    Ok(())
}

/// Parses a rational flag value such as `1/1000`.
pub fn parse_epsilon(text: &str) -> Result<Q> {
    crate::spec::parse_rational(text, "--epsilon")
}
