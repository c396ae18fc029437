//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{brute_edges, reference_mie_q, rayleigh_q, scene_grid, subsample};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config as ProptestConfig, TestCaseError, TestRunner};
use weathervis::core::attenuation::{
    contrast_ratio, fog_extinction_with, koschmieder_distance, mie_extinction_efficiency,
    sigma_fog, sigma_rain, sigma_snow, FogProfile, SnowKind, FOG_UNIT_FACTOR,
};
use weathervis::core::quadrature::{integrate, QuadratureOptions};
use weathervis::core::visgraph::{weight_edges, AverageNormalization, GraphOptions};
use weathervis::core::{
    build_visibility_graph, resolve_condition, AttenuationCoefficient, Bvh, Node, ScoreField,
    TriangleMesh, Vec3, WeatherCondition,
};
use weathervis::{parallel, query_points, scenes, RunConfig};

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, message: String) -> std::result::Result<(), String> {
    if ok { Ok(()) } else { Err(message) }
}

fn within(value: f64, target: f64, tolerance: f64, what: &str) -> std::result::Result<(), String> {
    ensure(
        (value - target).abs() <= tolerance,
        format!("{what} = {value}, expected {target} ± {tolerance}"),
    )
}

fn within_relative(value: f64, target: f64, relative: f64, what: &str) -> std::result::Result<(), String> {
    within(value, target, relative * target.abs(), what)
}

fn in_time(start: Instant, limit: Duration, what: &str) -> std::result::Result<Duration, String> {
    let spent = start.elapsed();
    ensure(spent < limit, format!("{what} took {spent:.2?}, limit {limit:?}"))?;
    Ok(spent)
}

fn golden_sigmas() -> Check {
    let start = Instant::now();
    let rain = sigma_rain(8.0).map_err(|e| e.to_string())?.sigma;
    let snow = sigma_snow(4.0, SnowKind::Dry, 550.0).map_err(|e| e.to_string())?.sigma;
    let clear = resolve_condition(&WeatherCondition::clear()).map_err(|e| e.to_string())?.sigma;
    within(rain, 0.0045, 1e-4, "rain 8 mm/h")?;
    within(snow, 0.0374, 1e-4, "dry snow 4 mm/h")?;
    ensure(clear == 0.00015, format!("clear = {clear}, expected exactly 0.00015"))?;
    let spent = in_time(start, Duration::from_millis(100), "resolution")?;
    Ok(format!("rain {rain:.6}, snow {snow:.6}, clear {clear} in {spent:.2?}"))
}

fn fog_pipeline() -> Check {
    let start = Instant::now();
    let ha = sigma_fog(&FogProfile::HEAVY_ADVECTION, 550.0).map_err(|e| e.to_string())?.sigma;
    let mr = sigma_fog(&FogProfile::MODERATE_RADIATION, 550.0).map_err(|e| e.to_string())?.sigma;
    let spent = in_time(start, Duration::from_secs(5), "fog")?;
    within_relative(ha, 0.02874, 0.03, "heavy advection")?;
    within_relative(mr, 0.00864, 0.03, "moderate radiation")?;
    let p = FogProfile::HEAVY_ADVECTION;
    let closed = 2.0 * std::f64::consts::PI * p.moment(2.0) * FOG_UNIT_FACTOR;
    let numeric = fog_extinction_with(&p, 550.0, &QuadratureOptions::default(), |_| 2.0)
        .map_err(|e| e.to_string())?;
    within_relative(closed, 0.0279, 0.01, "Q = 2 bound, closed form")?;
    within_relative(numeric, 0.0279, 0.01, "Q = 2 bound, quadrature")?;
    Ok(format!("HA {ha:.7}, MR {mr:.7}, Q = 2 bound {closed:.7} in {spent:.2?}"))
}

fn droplet_concentrations() -> Check {
    let mut report = Vec::new();
    for (p, n) in [(FogProfile::HEAVY_ADVECTION, 20.0), (FogProfile::MODERATE_RADIATION, 200.0)] {
        let closed = p.total_concentration();
        let numeric = integrate(|r| p.density(r), 0.0, p.integration_cutoff(), &QuadratureOptions::default())
            .map_err(|e| e.to_string())?
            .value;
        within_relative(closed, n, 1e-3, "closed-form concentration")?;
        within_relative(numeric, n, 1e-3, "integrated concentration")?;
        report.push(format!("{closed:.4}/{numeric:.4}"));
    }
    Ok(format!("N (closed/quadrature): {}", report.join(", ")))
}

fn koschmieder() -> Check {
    let cases = [(0.0015, 2608.0), (0.03, 130.4), (0.06, 65.2), (0.2, 19.56)];
    let mut worst: f64 = 0.0;
    for (sigma, distance) in cases {
        let v = koschmieder_distance(sigma).map_err(|e| e.to_string())?;
        within(v, distance, 0.1, &format!("visibility at sigma {sigma}"))?;
        let c = contrast_ratio(sigma, v).map_err(|e| e.to_string())?;
        within(c, 0.02, 1e-9, &format!("contrast at sigma {sigma}"))?;
        worst = worst.max((v - distance).abs());
    }
    Ok(format!("largest distance error {worst:.4} m"))
}

fn clear_tracks_degree() -> Check {
    let start = Instant::now();
    let (_, bvh, nodes) = scene_grid(&scenes::single_box(), 1.0);
    let graph = parallel::build_visibility_graph(&nodes, &bvh, &GraphOptions::default())
        .map_err(|e| e.to_string())?;
    let k = AttenuationCoefficient::from_sigma(0.00015).map_err(|e| e.to_string())?;
    let field = ScoreField::compute(&graph, &weight_edges(&graph, &k), AverageNormalization::Neighbors)
        .map_err(|e| e.to_string())?;
    let spent = in_time(start, Duration::from_secs(120), "graph and scores")?;
    let d_max = graph.distance_array().iter().copied().fold(0.0, f64::max);
    let floor = (-k.sigma * d_max).exp();
    for i in 0..field.len() {
        if field.degree[i] == 0 {
            continue;
        }
        let ratio = field.sum[i] / field.degree[i] as f64;
        ensure(
            ratio >= floor && ratio <= 1.0,
            format!("node {i}: S_S/degree = {ratio} outside [{floor}, 1]"),
        )?;
    }
    let max_sum = field.sum.iter().copied().fold(0.0, f64::max);
    let max_degree = *field.degree.iter().max().unwrap_or(&0) as f64;
    within_relative(max_sum, max_degree, 0.01, "max S_S against max degree")?;
    Ok(format!(
        "{} nodes, {} edges, max S_S {max_sum:.1} vs max degree {max_degree} in {spent:.2?}",
        nodes.len(),
        graph.edge_count()
    ))
}

fn brute_force_graphs() -> Check {
    let mut checked = Vec::new();
    for scene in scenes::all() {
        let (_, bvh, nodes) = scene_grid(&scene, 1.0);
        let nodes = subsample(&nodes, 200);
        let graph = build_visibility_graph(&nodes, &bvh).map_err(|e| e.to_string())?;
        let ours: Vec<(u32, u32, f64)> = graph.edges().collect();
        let brute = brute_edges(bvh.mesh(), &nodes);
        ensure(
            ours == brute,
            format!("{}: {} edges from the hierarchy, {} by brute force", scene.name, ours.len(), brute.len()),
        )?;
        checked.push(format!("{} {}/{}", scene.name, nodes.len(), ours.len()));
    }
    Ok(format!("nodes/edges: {}", checked.join(", ")))
}

fn rank_flip() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mesh = dir.path().join("city.obj");
    std::fs::write(&mesh, scenes::city().to_obj_string()).map_err(|e| e.to_string())?;
    let mut config = RunConfig::new(&mesh);
    config.grid.spacing = 1.0;
    config.conditions = vec![WeatherCondition::clear(), WeatherCondition::snow(SnowKind::Dry, 4.0)];
    let points: Vec<(String, Vec<f64>)> = scenes::CITY_POINTS
        .iter()
        .map(|&(name, x, y)| (name.to_string(), vec![x, y]))
        .collect();
    let result = query_points(&config, &points).map_err(|e| e.to_string())?;
    let leaders: Vec<&str> = result.report.conditions.iter().map(|c| c.ranking[0].point.as_str()).collect();
    let describe = |k: usize| {
        result.report.conditions[k]
            .ranking
            .iter()
            .map(|e| format!("{} {:.1}", e.point, e.sum))
            .collect::<Vec<_>>()
            .join(" > ")
    };
    ensure(
        leaders[0] != leaders[1],
        format!("same leader under both conditions: clear {} / snow {}", describe(0), describe(1)),
    )?;
    Ok(format!("clear {} | snow {}", describe(0), describe(1)))
}

/// Ground plane with up to five random boxes, and a few nodes at eye height.
fn random_scene() -> impl Strategy<Value = (TriangleMesh, Vec<Node>)> {
    let boxes = prop::collection::vec((0.0..16.0f64, 0.0..16.0f64, 0.5..4.0f64, 0.5..4.0f64, 0.5..6.0f64), 0..5);
    let points = prop::collection::vec((0.0..20.0f64, 0.0..20.0f64, 0.2..3.0f64), 2..25);
    (boxes, points).prop_map(|(boxes, points)| {
        let mut v = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(20.0, 0.0, 0.0),
            Vec3::new(20.0, 20.0, 0.0),
            Vec3::new(0.0, 20.0, 0.0),
        ];
        let mut t = vec![[0, 1, 2], [0, 2, 3]];
        for (x, y, w, d, h) in boxes {
            let ring = [(x, y), (x + w, y), (x + w, y + d), (x, y + d)];
            for k in 0..4 {
                let (x0, y0) = ring[k];
                let (x1, y1) = ring[(k + 1) % 4];
                let b = v.len() as u32;
                v.extend([
                    Vec3::new(x0, y0, 0.0),
                    Vec3::new(x1, y1, 0.0),
                    Vec3::new(x1, y1, h),
                    Vec3::new(x0, y0, h),
                ]);
                t.extend([[b, b + 1, b + 2], [b, b + 2, b + 3]]);
            }
        }
        let nodes = points
            .into_iter()
            .enumerate()
            .map(|(id, (x, y, z))| Node { id: id as u32, position: Vec3::new(x, y, z) })
            .collect();
        (TriangleMesh::new(v, t).expect("boxes are not degenerate"), nodes)
    })
}

fn monotonicity_suite() -> Check {
    let mut runner = TestRunner::new(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() });
    let sigmas = (0.0..0.05f64, 0.0..0.05f64);
    runner
        .run(&(random_scene(), sigmas), |((mesh, nodes), (s1, s2))| {
            let bvh = Bvh::build(mesh).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let options = GraphOptions::default();
            let one = parallel::with_threads(Some(1), || parallel::build_visibility_graph(&nodes, &bvh, &options))
                .and_then(|g| g)
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            let three = parallel::with_threads(Some(3), || parallel::build_visibility_graph(&nodes, &bvh, &options))
                .and_then(|g| g)
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(&one, &three, "worker count changed the graph");

            for a in &nodes {
                for b in &nodes {
                    prop_assert_eq!(bvh.occluded(a.position, b.position), bvh.occluded(b.position, a.position));
                }
            }

            let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
            let field = |s: f64| {
                let k = AttenuationCoefficient::from_sigma(s).unwrap();
                let w = weight_edges(&one, &k);
                (w.as_slice().to_vec(), ScoreField::compute(&one, &w, AverageNormalization::Neighbors).unwrap())
            };
            let (w_lo, f_lo) = field(lo);
            let (_, f_hi) = field(hi);
            prop_assert!(w_lo.iter().all(|&w| w > 0.0 && w <= 1.0), "weight outside (0, 1]");
            for i in 0..nodes.len() {
                prop_assert!(f_hi.sum[i] <= f_lo.sum[i], "S_S rose with sigma at node {}", i);
                prop_assert!(f_lo.sum[i] <= f_lo.degree[i] as f64);
                prop_assert!((0.0..=1.0).contains(&f_lo.avg[i]));
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok("64 random scenes: monotone S_S, bounded weights, symmetric occlusion, thread-independent graphs".into())
}

fn mie_oracle() -> Check {
    let m = Complex64::new(1.333, 0.0);
    let mut worst_rayleigh: f64 = 0.0;
    for x in [1e-4, 1e-3, 5e-3, 0.01] {
        let q = mie_extinction_efficiency(x, 1.333).map_err(|e| e.to_string())?;
        let r = rayleigh_q(x, 1.333);
        within_relative(q, r, 0.01, &format!("Rayleigh limit at x = {x}"))?;
        worst_rayleigh = worst_rayleigh.max((q / r - 1.0).abs());
    }
    let mut worst: f64 = 0.0;
    for x in [0.5, 1.0, 5.0, 10.0, 50.0] {
        let q = mie_extinction_efficiency(x, 1.333).map_err(|e| e.to_string())?;
        let reference = reference_mie_q(x, m);
        within(q, reference, 1e-6, &format!("Q at x = {x}"))?;
        worst = worst.max((q - reference).abs());
    }
    Ok(format!("Rayleigh relative error ≤ {worst_rayleigh:.1e}, reference difference ≤ {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("attenuation coefficients", golden_sigmas),
        ("fog extinction", fog_pipeline),
        ("droplet concentrations", droplet_concentrations),
        ("visibility distance round trip", koschmieder),
        ("clear-air sums track degree", clear_tracks_degree),
        ("graph against brute force", brute_force_graphs),
        ("rank flip", rank_flip),
        ("monotonicity suite", monotonicity_suite),
        ("Mie engine", mie_oracle),
    ];
    // failures are reported on the criterion's line, not as a backtrace
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into());
            Err(format!("panic: {message}"))
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", k + 1);
            }
        }
    }
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
