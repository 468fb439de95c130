//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

#[path = "../../core/tests/common/mod.rs"]
mod oracle;

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use proxilift::actions::{dobrushin, ActionSystem, SemigroupTable, StochasticMatrix};
use proxilift::affine::{corollary_harness, f_equivariance_check, AffineVertexMap, SimplexModel};
use proxilift::lift::{
    equivalence_batch, invariant_metas, psi_checks, psi_homomorphism_check, HarnessMode, MetaMeasure,
};
use proxilift::proximality::{is_proximal, reset_word, strongly_proximal, Budget, Status};
use proxilift::sample::{
    cerny, random_deterministic, random_metric, random_permutation, random_stochastic, random_transformation,
    swap,
};
use proxilift::spaces::{tv_distance, w1_distance, GridSimplex, Measure};
use proxilift::{int, Q};
use proxilift_cli::demo::{ball_volume, demo_sl, DemoConfig, DENSITY, ESCAPE_LEVEL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const CORPUS_SIZE: usize = 250;

fn corpus() -> Vec<ActionSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    (0..CORPUS_SIZE).map(|_| random_deterministic(&mut rng, 5, 3)).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn harness(mode: HarnessMode, systems: &[ActionSystem]) -> Outcome {
    let start = Instant::now();
    let summary = equivalence_batch(systems, 2, &Budget::default(), mode).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let detail = format!(
        "{} systems: {} PASS, {} FAIL, {} INCONCLUSIVE in {:.1}s",
        summary.total(),
        summary.pass,
        summary.fail,
        summary.inconclusive,
        elapsed.as_secs_f64()
    );
    ensure(summary.total() >= 200, || format!("corpus too small; {detail}"))?;
    ensure(summary.fail == 0, || format!("failures at {:?}; {detail}", summary.failures))?;
    ensure(summary.inconclusive * 100 <= summary.total(), || format!("too many inconclusive; {detail}"))?;
    ensure(elapsed < Duration::from_secs(300), || format!("too slow; {detail}"))?;
    Ok(detail)
}

fn psi_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut trials = 0;
    let mut hits = 0;
    for q in 1..=3 {
        for i in 0..4 {
            let sys = random_deterministic(&mut rng, 4, 3);
            let r = psi_checks(&sys, q, 500, 100 * q as u64 + i).map_err(|e| e.to_string())?;
            ensure(r.is_clean(), || format!("q={q}: {:?}", r.violations))?;
            trials += r.trials;
            hits += r.pullback_hits;
        }
    }
    ensure(hits > 0, || "pullback law never exercised on a point-mass barycenter".into())?;
    let tables = [
        ("Z2", SemigroupTable::cyclic(2)),
        ("Z3", SemigroupTable::cyclic(3)),
        ("left-zero", SemigroupTable::left_zero(3)),
    ];
    for (name, table) in &tables {
        for q in 1..=3 {
            let h = psi_homomorphism_check(table, q, 200, 7).map_err(|e| e.to_string())?;
            ensure(h.is_clean(), || format!("{name} q={q}: {:?}", h.violations))?;
        }
    }
    Ok(format!("{trials} law trials over 12 systems, homomorphism clean on Z2, Z3, left-zero (200 trials, q=1..3)"))
}

fn is_vertex_mass(grid: &GridSimplex, rho: &MetaMeasure) -> bool {
    rho.point_mass_atom().is_some_and(|a| grid.atom(a).point_mass().is_some())
}

fn invariant_point_masses(systems: &[ActionSystem]) -> Outcome {
    let b = Budget::default();
    let mut strong = 0;
    for (i, sys) in systems.iter().enumerate() {
        if strongly_proximal(sys, &b).map_err(|e| e.to_string())?.status != Status::Yes {
            continue;
        }
        strong += 1;
        let grid = GridSimplex::new(sys.points(), 2).unwrap();
        let metas = invariant_metas(sys, 2).map_err(|e| e.to_string())?;
        ensure(metas.iter().all(|r| is_vertex_mass(&grid, r)), || {
            format!("system {i} is strongly proximal but has a spread invariant meta-measure")
        })?;
    }
    let s = swap();
    let grid = GridSimplex::new(2, 2).unwrap();
    let metas = invariant_metas(&s, 2).map_err(|e| e.to_string())?;
    ensure(metas.iter().any(|r| !is_vertex_mass(&grid, r)), || "swap has only vertex point masses".into())?;
    ensure(strong > 0, || "corpus has no strongly proximal system".into())?;
    Ok(format!("{strong} strongly proximal systems checked; swap has {} invariant extremes", metas.len()))
}

fn synchronization(systems: &[ActionSystem]) -> Outcome {
    let b = Budget::default();
    let c4 = cerny(4);
    let v = reset_word(&c4, &b).map_err(|e| e.to_string())?;
    let len = v.witness.as_ref().map(|w| w.len());
    let expect = oracle::subset_bfs_reset_len(&c4);
    ensure(len == Some(9) && expect == Some(9), || format!("C4 reset length {len:?}, oracle {expect:?}"))?;
    ensure(v.replay(&c4).unwrap_or(false), || "C4 witness does not replay".into())?;
    let mut yes = 0;
    for (i, sys) in systems.iter().enumerate() {
        let p = is_proximal(sys, &b).map_err(|e| e.to_string())?.status;
        let r = reset_word(sys, &b).map_err(|e| e.to_string())?;
        ensure((p == Status::Yes) == (r.status == Status::Yes), || format!("system {i}: proximal {p}, reset {}", r.status))?;
        let oracle_len = oracle::subset_bfs_reset_len(sys);
        ensure(r.witness.as_ref().map(|w| w.len()) == oracle_len, || format!("system {i}: reset length differs from oracle"))?;
        yes += (p == Status::Yes) as usize;
    }
    Ok(format!("C4 length 9 = oracle; {} systems agree ({yes} synchronizing)", systems.len()))
}

fn random_grid_measure(rng: &mut ChaCha8Rng, m: usize, q: usize) -> Measure {
    let grid = GridSimplex::new(m, q).unwrap();
    grid.atom(rng.gen_range(0..grid.len())).clone()
}

fn metric_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..100 {
        let m = rng.gen_range(2..=4);
        let q = rng.gen_range(1..=4);
        let space = random_metric(&mut rng, m);
        let (mu, nu) = (random_grid_measure(&mut rng, m, q), random_grid_measure(&mut rng, m, q));
        let fast = w1_distance(&space, &mu, &nu).map_err(|e| e.to_string())?;
        let slow = oracle::brute_w1(&space, &mu, &nu);
        ensure(fast == slow, || format!("instance {i}: w1 {fast} vs coupling optimum {slow}"))?;
    }
    let zero = int(0);
    for i in 0..1000 {
        let m = rng.gen_range(2..=4);
        let q = rng.gen_range(1..=4);
        let space = random_metric(&mut rng, m);
        let [a, b, c] = [0; 3].map(|_| random_grid_measure(&mut rng, m, q));
        type Dist<'a> = Box<dyn Fn(&Measure, &Measure) -> Q + 'a>;
        let dists: [(&str, Dist); 2] = [
            ("tv", Box::new(|x: &Measure, y: &Measure| tv_distance(x, y).unwrap())),
            ("w1", Box::new(|x: &Measure, y: &Measure| w1_distance(&space, x, y).unwrap())),
        ];
        for (name, d) in &dists {
            let (ab, bc, ac) = (d(&a, &b), d(&b, &c), d(&a, &c));
            ensure(d(&a, &a) == zero, || format!("triple {i}: {name}(a,a) != 0"))?;
            ensure(ab == d(&b, &a), || format!("triple {i}: {name} not symmetric"))?;
            ensure((ab == zero) == (a == b), || format!("triple {i}: {name} separation"))?;
            ensure(ac <= &ab + &bc, || format!("triple {i}: {name} triangle"))?;
        }
    }
    Ok("w1 = coupling optimum on 100 instances; tv and w1 axioms on 1000 triples".into())
}

fn dobrushin_laws() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..1000 {
        let m = rng.gen_range(2..=4);
        let a = random_stochastic(&mut rng, m);
        let b = random_stochastic(&mut rng, m);
        let mu = proxilift::sample::random_measure(&mut rng, m);
        let nu = proxilift::sample::random_measure(&mut rng, m);
        let lhs = tv_distance(&a.push(&mu).unwrap(), &a.push(&nu).unwrap()).unwrap();
        let rhs = dobrushin(&a) * tv_distance(&mu, &nu).unwrap();
        ensure(lhs <= rhs, || format!("instance {i}: contraction {lhs} > {rhs}"))?;
        let ab: StochasticMatrix = a.then(&b);
        ensure(dobrushin(&ab) <= dobrushin(&a) * dobrushin(&b), || format!("instance {i}: submultiplicativity"))?;
    }
    Ok("contraction and submultiplicativity on 1000 instances".into())
}

fn random_model(rng: &mut ChaCha8Rng, n: usize) -> SimplexModel {
    loop {
        let d = n + rng.gen_range(0..=1);
        let vertices = (0..n)
            .map(|_| (0..d).map(|_| int(rng.gen_range(-3..=3))).collect())
            .collect();
        if let Ok(m) = SimplexModel::new(vertices) {
            return m;
        }
    }
}

fn affine_hull() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let b = Budget::default();
    let mut extended = 0;
    let mut equivariance_trials = 0;
    for i in 0..100 {
        let n = rng.gen_range(2..=4);
        let model = random_model(&mut rng, n);
        let k = rng.gen_range(1..=3);
        let maps: Vec<AffineVertexMap> = (0..k)
            .map(|_| {
                let t = if rng.gen_bool(0.5) { random_permutation(&mut rng, n) } else { random_transformation(&mut rng, n) };
                AffineVertexMap::Vertex(t)
            })
            .collect();
        let r = corollary_harness(&model, &maps, 2, &b).map_err(|e| e.to_string())?;
        ensure(r.outcome == proxilift::lift::Outcome::Pass, || format!("system {i}: {}", r.outcome))?;
        extended += (r.label == proxilift::affine::HypothesisLabel::Extended) as usize;
        if i % 20 == 0 {
            let eq = f_equivariance_check(&model, &maps, 500, i as u64).map_err(|e| e.to_string())?;
            ensure(eq.is_clean(), || format!("system {i}: {:?}", eq.violations))?;
            equivariance_trials += eq.trials;
        }
    }
    Ok(format!("100 systems PASS ({extended} extended); equivariance clean over {equivariance_trials} trials"))
}

fn sl_demo() -> Outcome {
    let start = Instant::now();
    let cfg = DemoConfig::default();
    let (rows, summary) = demo_sl(&cfg);
    let elapsed = start.elapsed();
    let g1 = summary.initial_gap;
    for r in &rows {
        ensure((r.pair_gap * r.n as f64 - g1).abs() <= 1e-12 * g1, || format!("gap at n={} is not gap/n", r.n))?;
    }
    let at_2000 = rows.iter().find(|r| r.n == 2000).ok_or("demo stops before n = 2000")?;
    ensure(at_2000.pair_gap < 1e-3 * g1, || format!("gap ratio {} at n=2000", at_2000.pair_gap / g1))?;
    let bound = DENSITY * ball_volume(cfg.radius) * 1.05;
    ensure(rows.iter().all(|r| r.max_ball_mass <= bound), || "ball mass above bound".into())?;
    let escape = summary.escape_step.ok_or("mass never escapes the cubes")?;
    ensure(
        rows.iter().filter(|r| r.n >= escape).all(|r| r.cube_masses.iter().all(|&m| m < ESCAPE_LEVEL)),
        || "escape step is not final".into(),
    )?;
    ensure(elapsed < Duration::from_secs(60), || format!("took {:.1}s", elapsed.as_secs_f64()))?;
    Ok(format!(
        "gap ratio {:.2e} at n=2000, ball ratio {:.6}, cubes below {ESCAPE_LEVEL} from n={escape}, {:.1}s",
        at_2000.pair_gap / g1,
        summary.ball_ratio,
        elapsed.as_secs_f64()
    ))
}

fn run_cli(args: &[&str]) -> Result<(i32, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_proxilift"))
        .args(args)
        .env_remove("PROXILIFT_MODE")
        .output()
        .map_err(|e| e.to_string())?;
    let code = out.status.code().unwrap_or(-1);
    if code == 1 {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok((code, String::from_utf8(out.stdout).map_err(|e| e.to_string())?))
}

fn without_timing(json: &str) -> String {
    json.lines().filter(|l| !l.contains("\"elapsed_ms\"")).collect::<Vec<_>>().join("\n")
}

fn determinism() -> Outcome {
    let specs = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("specs");
    let cases: &[(&str, &str)] = &[
        ("cerny4.json", "base"),
        ("cerny4.json", "thm"),
        ("constant.json", "prop1"),
        ("swap.json", "psi"),
        ("swap.json", "invariant"),
        ("stochastic.json", "base"),
        ("affine.json", "affine"),
        ("affine-convex.json", "affine"),
    ];
    let mut replayed = 0;
    for (file, mode) in cases {
        let path = specs.join(file);
        let path = path.to_str().unwrap();
        let args = ["analyze", path, "--mode", mode, "--seed", "11", "--verify"];
        let (c1, r1) = run_cli(&args)?;
        let (c2, r2) = run_cli(&args)?;
        ensure(c1 == c2 && without_timing(&r1) == without_timing(&r2), || format!("{file} {mode}: reports differ"))?;
        ensure(c1 != 3, || format!("{file} {mode}: exit code 3"))?;
        let report: serde_json::Value = serde_json::from_str(&r1).map_err(|e| e.to_string())?;
        let verification = &report["verification"];
        ensure(verification["failed"].as_array().is_some_and(|f| f.is_empty()), || {
            format!("{file} {mode}: replay failures {}", verification["failed"])
        })?;
        replayed += verification["replayed"].as_u64().unwrap_or(0);
    }
    ensure(replayed > 0, || "no witness was replayed".into())?;
    Ok(format!("{} spec/mode pairs byte-identical; {replayed} witnesses replayed", cases.len()))
}

fn main() -> ExitCode {
    let systems = corpus();
    let criteria: Vec<Criterion> = vec![
        ("proximal lift harness", Box::new(|| harness(HarnessMode::Prop1, &systems))),
        ("strongly proximal lift harness", Box::new(|| harness(HarnessMode::Thm, &systems))),
        ("barycenter laws", Box::new(psi_laws)),
        ("invariant meta-measures", Box::new(|| invariant_point_masses(&systems))),
        ("synchronization cross-check", Box::new(|| synchronization(&systems))),
        ("metric correctness", Box::new(metric_correctness)),
        ("dobrushin laws", Box::new(dobrushin_laws)),
        ("affine hull harness", Box::new(affine_hull)),
        ("special linear demo", Box::new(sl_demo)),
        ("determinism and replay", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {reason}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
