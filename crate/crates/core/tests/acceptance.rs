//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use prioplan::planning::search::apply_primitive;
use prioplan::planning::{
    build_mpa, plan, trajectory_cost, ConvexPolygon, MpaConfig, PlanError, PlannerConfig, Point2, ReferencePath,
    VehicleParams, VehicleState,
};
use prioplan::sim::{run_experiment, Scenario, Simulation};
use prioplan::{
    chromatic_number, color_to_priority, enumerate_prioritizations, greedy_color, orient_edges, CouplingGraph,
    PriorityAssignment, Strategy,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SCENARIO: &str = include_str!("../scenarios/intersection.json");

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn er_graphs(count_per_cell: usize, sizes: std::ops::RangeInclusive<usize>, seed: u64) -> Vec<CouplingGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for n in sizes {
        for k in 1..=9 {
            let p = k as f64 / 10.0;
            for _ in 0..count_per_cell {
                out.push(CouplingGraph::random(n, p, &mut rng).unwrap());
            }
        }
    }
    out
}

fn levels_of(g: &CouplingGraph, p: &PriorityAssignment) -> usize {
    orient_edges(g, p).unwrap().compute_levels().unwrap().n_levels()
}

fn colors_equal_levels() -> Outcome {
    let start = Instant::now();
    let graphs = er_graphs(12, 2..=12, 1);
    for g in &graphs {
        let c = greedy_color(g);
        let levels = levels_of(g, &color_to_priority(g, &c).unwrap());
        ensure(c.n_colors() == levels, || {
            format!("{} colors but {levels} levels on {:?}", c.n_colors(), g.edges())
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{} graphs in {elapsed:.2?}", graphs.len()))
}

fn orientations_acyclic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cases = 12_000;
    for case in 0..cases {
        let n = rng.gen_range(1..=14);
        let g = CouplingGraph::random(n, rng.gen_range(0.05..0.95), &mut rng).unwrap();
        let p = if case % 2 == 0 {
            let mut order: Vec<usize> = (1..=n).collect();
            for i in (1..n).rev() {
                order.swap(i, rng.gen_range(0..=i));
            }
            PriorityAssignment::from_order(&order).unwrap()
        } else {
            // arbitrary positive values, redrawn until neighbors differ
            loop {
                let values = (0..n).map(|_| rng.gen_range(1..=2 * n)).collect();
                let p = PriorityAssignment::new(values).unwrap();
                if p.validate(&g).is_ok() {
                    break p;
                }
            }
        };
        let d = orient_edges(&g, &p).unwrap();
        ensure(d.is_acyclic() && d.is_orientation_of(&g), || {
            format!("cycle for {:?} with {:?}", g.edges(), p)
        })?;
    }
    Ok(format!("{cases} graph/priority pairs"))
}

fn degree_and_chromatic_bounds() -> Outcome {
    let graphs = er_graphs(12, 1..=12, 3);
    let mut exact = 0;
    for g in &graphs {
        let k = greedy_color(g).n_colors();
        ensure(k <= g.max_degree() + 1, || {
            format!("{k} colors, max degree {}", g.max_degree())
        })?;
        if g.n_vertices() <= 9 {
            let chi = chromatic_number(g).unwrap();
            ensure(chi <= k, || format!("chromatic number {chi} above greedy {k}"))?;
            exact += 1;
        }
    }
    Ok(format!(
        "{} graphs, {exact} checked against the exact chromatic number",
        graphs.len()
    ))
}

fn enumeration_oracle() -> Outcome {
    let mut checked = 0;
    let mut slowest = Duration::ZERO;
    let mut check = |g: &CouplingGraph| -> Result<(), String> {
        let start = Instant::now();
        let hist = enumerate_prioritizations(g).unwrap();
        let elapsed = start.elapsed();
        slowest = slowest.max(elapsed);
        ensure(elapsed < Duration::from_secs(60), || {
            format!("enumeration took {elapsed:?}")
        })?;
        let min = *hist.keys().next().unwrap();
        let chi = chromatic_number(g).unwrap();
        ensure(min == chi, || {
            format!("min levels {min} but chromatic number {chi} on {:?}", g.edges())
        })?;
        let total: u64 = hist.values().sum();
        let expected: u64 = (1..=g.n_vertices() as u64).product();
        ensure(total == expected, || {
            format!("histogram totals {total}, expected {expected}")
        })?;
        checked += 1;
        Ok(())
    };
    // every labeled graph on up to five vertices
    for n in 1..=5usize {
        let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect();
        for mask in 0u32..(1 << pairs.len()) {
            let edges: Vec<_> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            check(&CouplingGraph::new(n, &edges).unwrap())?;
        }
    }
    for g in &er_graphs(3, 6..=8, 4) {
        check(g)?;
    }
    for g in [
        CouplingGraph::path(8).unwrap(),
        CouplingGraph::complete(8).unwrap(),
        CouplingGraph::edgeless(8).unwrap(),
    ] {
        check(&g)?;
    }
    Ok(format!("{checked} graphs, slowest enumeration {slowest:.2?}"))
}

fn path_levels() -> Outcome {
    let g = CouplingGraph::path(8).unwrap();
    let constant = levels_of(&g, &prioplan::prioritize(Strategy::Constant, &g, None).unwrap());
    let coloring = levels_of(&g, &prioplan::prioritize(Strategy::Coloring, &g, None).unwrap());
    ensure(constant == 8 && coloring == 2, || {
        format!("constant {constant}, coloring {coloring}")
    })?;
    Ok(format!("constant {constant} levels, coloring {coloring}"))
}

fn intersection() -> Outcome {
    let start = Instant::now();
    let mut sc = Scenario::from_json(SCENARIO).map_err(|e| e.to_string())?;
    sc.planner.n_expansions = 500;
    let runs: Vec<_> = Strategy::all(sc.seed)
        .into_iter()
        .map(|s| run_experiment(&sc, s, false).map(|e| (s, e)))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let find = |s: Strategy| &runs.iter().find(|(k, _)| *k == s).unwrap().1;
    let (constant, coloring) = (find(Strategy::Constant), find(Strategy::Coloring));

    let (c0, k0) = (constant.records[0].n_levels, coloring.records[0].n_levels);
    ensure(
        coloring.summary.max_levels <= constant.summary.max_levels && k0 < c0,
        || {
            format!(
                "max levels coloring {} constant {}, step 0 coloring {k0} constant {c0}",
                coloring.summary.max_levels, constant.summary.max_levels
            )
        },
    )?;
    for (a, b) in constant.records.iter().zip(&coloring.records) {
        if a.n_levels != b.n_levels {
            ensure(b.t_ncs_modeled_ms < a.t_ncs_modeled_ms, || {
                format!(
                    "step {}: coloring {} ms, constant {} ms",
                    a.step, b.t_ncs_modeled_ms, a.t_ncs_modeled_ms
                )
            })?;
        }
    }
    for (s, e) in &runs {
        let m = &e.summary;
        ensure(m.executed_collisions == 0 && m.consistency_violations == 0, || {
            format!(
                "{}: {} collisions, {} consistency violations",
                s.name(),
                m.executed_collisions,
                m.consistency_violations
            )
        })?;
        ensure(m.all_reached_end, || {
            format!("{}: reached {:?}", s.name(), m.reached_end)
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(300), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "levels at step 0 constant {c0} coloring {k0}, max {} vs {}, {elapsed:.2?}",
        constant.summary.max_levels, coloring.summary.max_levels
    ))
}

fn planner_audit() -> Outcome {
    let config = MpaConfig {
        speed_levels: vec![0.0, 0.2, 0.4, 0.6],
        steering_levels: vec![-0.35, -0.175, 0.0, 0.175, 0.35],
        max_speed_change: 0.2,
        max_steering_change: 0.175,
        dt: 0.2,
        samples: 10,
    };
    let mpa = build_mpa(&config, &VehicleParams::default()).unwrap();
    let horizon = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut ok, mut infeasible) = (0, 0);
    for case in 0..200u64 {
        let automaton = rng.gen_range(0..mpa.states.len());
        let speed = mpa.states[automaton].speed;
        let state = VehicleState::new(0.0, rng.gen_range(-0.1..0.1), rng.gen_range(-0.3..0.3), speed);
        let path = ReferencePath::new(vec![Point2::new(0.0, 0.0), Point2::new(5.0, 0.0)]).unwrap();
        let reference = path.trajectory(state.position(), 0.6, 0.2, horizon);
        let mut obstacles = vec![Vec::new(); horizon];
        for _ in 0..rng.gen_range(0..4) {
            let (x, y) = (rng.gen_range(0.3..2.0), rng.gen_range(-0.4..0.4));
            let block = ConvexPolygon::rectangle(x, y, x + 0.15, y + 0.15).unwrap();
            let from = rng.gen_range(0..horizon);
            for step in obstacles.iter_mut().skip(from) {
                step.push(block.clone());
            }
        }
        let cfg = PlannerConfig {
            horizon,
            n_expansions: 300,
            seed: case,
        };
        match plan(&state, automaton, &reference, &obstacles, &mpa, &cfg) {
            Ok(p) => {
                let mut s = state;
                for (l, pref) in p.primitives.iter().enumerate() {
                    let (next, swept) = apply_primitive(&mpa, &s, *pref);
                    ensure(swept == p.occupancies[l] && next == p.poses[l], || {
                        format!("case {case}: replay differs at {l}")
                    })?;
                    ensure(obstacles[l].iter().all(|o| !o.intersects(&swept)), || {
                        format!("case {case}: collision at {l}")
                    })?;
                    s = next;
                }
                let cost = trajectory_cost(&p.poses, &reference);
                ensure(cost == p.cost, || {
                    format!("case {case}: cost {} recomputed {cost}", p.cost)
                })?;
                ok += 1;
            }
            Err(PlanError::Infeasible { .. }) => infeasible += 1,
            Err(e) => return Err(format!("case {case}: {e}")),
        }
    }
    ensure(ok > 0, || "no feasible plans to audit".into())?;
    Ok(format!("{ok} plans audited, {infeasible} infeasible"))
}

fn decentralized_determinism() -> Outcome {
    let sc = Scenario::from_json(SCENARIO).map_err(|e| e.to_string())?;
    let g = Simulation::new(&sc, Strategy::Coloring)
        .map_err(|e| e.to_string())?
        .coupling();
    let mut serialized = Vec::new();
    let mut slowest = Duration::ZERO;
    for _ in 0..8 {
        let start = Instant::now();
        let c = greedy_color(&g);
        slowest = slowest.max(start.elapsed());
        serialized.push(serde_json::to_string(&c).unwrap());
    }
    ensure(serialized.iter().all(|s| *s == serialized[0]), || {
        "colorings differ".into()
    })?;
    ensure(slowest < Duration::from_millis(5), || {
        format!("slowest coloring {slowest:?}")
    })?;
    Ok(format!("{} edges, slowest coloring {slowest:.2?}", g.n_edges()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("colors equal levels", colors_equal_levels),
        ("orientations are acyclic", orientations_acyclic),
        ("degree and chromatic bounds", degree_and_chromatic_bounds),
        ("enumeration oracle", enumeration_oracle),
        ("path levels", path_levels),
        ("intersection experiment", intersection),
        ("planner audit", planner_audit),
        ("decentralized determinism", decentralized_determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] {} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {} {name}: {detail}", k + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
