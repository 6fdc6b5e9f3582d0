//! The cross-module invariant suite behind the `verify` command: one
//! deterministic, seeded run of every module's property checks, reported
//! as a flat pass/fail list. Reports carry no timestamps so identical
//! seeds produce identical bytes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::hyperbolic::{AnosovMap, EigenChart, HyperCoord, LinearModel};
use crate::perturbation::{ChartBoxes, PerturbedMap, PerturbedTorusMap, RegionSpec, TwistParams};
use crate::quotient::{cone_points, cw_evidence_sphere, SphereMap};
use crate::shadowing::{make_pseudo_orbit, shadow_solve, shadow_verify, sphere_shadow};
use crate::spaces::{hausdorff_dist, sphere_canon, Chain, PlanePoint, Point, SpherePoint, TorusPoint};
use crate::stability::{
    dist3_combine, escape_experiment, half_cw_m_finder, join_chain_family, sphere_arc_family,
    torus_segment_family, xi_stability_test, Verdict,
};
use crate::Dynamics;

#[derive(Debug, Clone, Serialize)]
pub struct VerifyParams {
    pub lambda: f64,
    pub xi: f64,
    pub delta: f64,
    pub r0: f64,
    pub squeeze: f64,
    pub eta: f64,
    pub horizon: u32,
    pub seed: u64,
    pub n0_override: Option<u32>,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self {
            lambda: AnosovMap::standard().lambda(),
            xi: ChartBoxes::DEFAULT_XI,
            delta: ChartBoxes::DEFAULT_DELTA,
            r0: TwistParams::DEFAULT_R0,
            squeeze: 1.0,
            eta: crate::stability::DEFAULT_ETA,
            horizon: crate::stability::DEFAULT_HORIZON,
            seed: 0,
            n0_override: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl CheckResult {
    fn measured(name: &str, observed: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            pass: observed <= bound,
            observed: Some(observed),
            bound: Some(bound),
            note: None,
        }
    }

    fn flag(name: &str, pass: bool, note: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            pass,
            observed: None,
            bound: None,
            note: Some(note.into()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub params: VerifyParams,
    pub checks: Vec<CheckResult>,
    pub all_pass: bool,
}

fn sub_rng(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9e3779b97f4a7c15))
}

fn rand_torus(rng: &mut ChaCha8Rng) -> TorusPoint {
    TorusPoint::new(rng.gen(), rng.gen())
}

/// Run the full suite. Construction failures (geometry gates) become
/// failed checks; the remaining independent checks still run.
pub fn run_suite(params: &VerifyParams) -> SuiteReport {
    let mut checks = Vec::new();
    let seed = params.seed;

    checks.push(metric_axioms(seed));
    checks.push(canon_idempotent(seed));
    checks.push(quotient_lipschitz(seed));
    checks.push(hausdorff_metric(seed));
    checks.push(openness_modulus_check(seed));

    let anosov = AnosovMap::standard();
    checks.push(CheckResult::measured("hyperbolic/eigen-residuals", anosov.eigen_residual(), 1e-12));
    checks.push(uv_jacobian(seed));
    checks.push(chart_conjugacy(&anosov, seed));

    // Perturbation tower; a gate failure reports and skips the dependents.
    let built = build_perturbed(params);
    match built {
        Err(msg) => {
            checks.push(CheckResult::flag("perturbation/geometry-gate", false, msg));
        }
        Ok((plane, torus_map)) => {
            checks.push(CheckResult::flag(
                "perturbation/geometry-gate",
                true,
                format!("n0 = {}", plane.n0()),
            ));
            checks.push(fixed_point_ladder(&plane, &torus_map));
            checks.push(boundary_agreement(&plane, seed));
            checks.push(bijectivity(&plane, seed));
            checks.push(area_jacobian(&plane, seed));
            checks.push(area_mass(&plane, seed));
            checks.push(level_c0_bound(&plane, seed));
            checks.push(gpert_c0_size(&torus_map, seed));
            checks.push(gpert_support(&torus_map, seed));
            checks.push(escape_certificates(&plane, params, seed));
            checks.push(half_cw_window(&anosov, params, seed));
        }
    }

    checks.push(xi_instability_evidence(&anosov, params, seed));
    checks.push(dist3_metric(params, seed));
    checks.push(shadow_torus_batch(&anosov, seed));
    checks.push(shadow_sphere_batch(&anosov, seed));
    checks.push(shadow_oracle_agreement(&anosov, seed));
    checks.push(quotient_conjugacy(&anosov, seed));
    checks.push(cone_point_permutation());
    checks.push(grid_bijectivity());
    checks.push(cw_evidence(params, seed));

    let all_pass = checks.iter().all(|c| c.pass);
    SuiteReport {
        params: params.clone(),
        checks,
        all_pass,
    }
}

fn build_perturbed(params: &VerifyParams) -> std::result::Result<(PerturbedMap, PerturbedTorusMap), String> {
    let anosov = AnosovMap::standard();
    if (params.lambda - anosov.lambda()).abs() > 1e-12 {
        return Err(format!(
            "lambda = {} does not match the (2,1;1,1) eigenvalue",
            params.lambda
        ));
    }
    let linear = LinearModel::new(params.lambda).map_err(|e| e.to_string())?;
    let twist = TwistParams::new(params.lambda, params.r0, params.squeeze).map_err(|e| e.to_string())?;
    let boxes = ChartBoxes::new(params.xi, params.delta).map_err(|e| e.to_string())?;
    let plane = PerturbedMap::new(linear, twist, boxes, params.n0_override).map_err(|e| e.to_string())?;
    let chart = EigenChart::standard(&anosov);
    let torus = PerturbedTorusMap::new(anosov, chart, plane).map_err(|e| e.to_string())?;
    Ok((plane, torus))
}

fn metric_axioms(seed: u64) -> CheckResult {
    let mut rng = sub_rng(seed, 1);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let (a, b, c) = (rand_torus(&mut rng), rand_torus(&mut rng), rand_torus(&mut rng));
        worst = worst.max((a.dist(b) - b.dist(a)).abs());
        worst = worst.max(a.dist(c) - (a.dist(b) + b.dist(c)));
    }
    CheckResult::measured("spaces/metric-axioms", worst, 1e-12)
}

fn canon_idempotent(seed: u64) -> CheckResult {
    let mut rng = sub_rng(seed, 2);
    let mut ok = true;
    for _ in 0..10_000 {
        let p = rand_torus(&mut rng);
        let s = sphere_canon(p);
        ok &= sphere_canon(s.rep()) == s && sphere_canon(p.antipode()) == s;
    }
    CheckResult::flag("spaces/canon-idempotent", ok, "10000 samples, exact")
}

fn quotient_lipschitz(seed: u64) -> CheckResult {
    let mut rng = sub_rng(seed, 3);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let (a, b) = (rand_torus(&mut rng), rand_torus(&mut rng));
        worst = worst.max(sphere_canon(a).dist(sphere_canon(b)) - a.dist(b));
    }
    CheckResult::measured("spaces/quotient-lipschitz", worst, 0.0)
}

fn hausdorff_metric(seed: u64) -> CheckResult {
    let mut rng = sub_rng(seed, 4);
    let mut worst = 0.0f64;
    let sample_set = |rng: &mut ChaCha8Rng| -> Vec<TorusPoint> {
        let n = rng.gen_range(1..6);
        (0..n).map(|_| rand_torus(rng)).collect()
    };
    for _ in 0..300 {
        let a = sample_set(&mut rng);
        let b = sample_set(&mut rng);
        let c = sample_set(&mut rng);
        let dab = hausdorff_dist(&a, &b).unwrap();
        let dba = hausdorff_dist(&b, &a).unwrap();
        let dac = hausdorff_dist(&a, &c).unwrap();
        let dcb = hausdorff_dist(&c, &b).unwrap();
        let daa = hausdorff_dist(&a, &a).unwrap();
        worst = worst.max((dab - dba).abs()).max(daa).max(dab - (dac + dcb));
    }
    CheckResult::measured("spaces/hausdorff-metric", worst, 1e-12)
}

fn openness_modulus_check(seed: u64) -> CheckResult {
    let mut rng = sub_rng(seed, 5);
    let rho = 0.1;
    let nu = crate::shadowing::openness_modulus(rho);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let x = rand_torus(&mut rng);
        let y = sphere_canon(rand_torus(&mut rng));
        if sphere_canon(x).dist(y) < nu {
            let best = y.lifts().iter().map(|l| x.dist(*l)).fold(f64::INFINITY, f64::min);
            worst = worst.max(best - rho);
        }
    }
    CheckResult::measured("spaces/openness-modulus", worst, 1e-12)
}

fn uv_jacobian(seed: u64) -> CheckResult {
    let mut rng = sub_rng(seed, 6);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let x: f64 = rng.gen_range(0.05..3.0);
        let y: f64 = rng.gen_range(0.05..3.0);
        let h = 1e-6 * x.max(y).max(1.0);
        let f = |x: f64, y: f64| HyperCoord::from_plane(PlanePoint::new(x, y)).unwrap();
        let ux = (f(x + h, y).u - f(x - h, y).u) / (2.0 * h);
        let uy = (f(x, y + h).u - f(x, y - h).u) / (2.0 * h);
        let vx = (f(x + h, y).v - f(x - h, y).v) / (2.0 * h);
        let vy = (f(x, y + h).v - f(x, y - h).v) / (2.0 * h);
        worst = worst.max(((ux * vy - uy * vx) - 1.0).abs());
    }
    CheckResult::measured("hyperbolic/uv-jacobian", worst, 1e-6)
}

fn chart_conjugacy(anosov: &AnosovMap, seed: u64) -> CheckResult {
    let chart = EigenChart::standard(anosov);
    let model = LinearModel::standard();
    let mut rng = sub_rng(seed, 7);
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 10_000 {
        let p = PlanePoint::new(rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2));
        if p.norm() >= chart.r_v() || model.apply(p).norm() >= chart.r_v() {
            continue;
        }
        let lhs = anosov.apply(chart.chart_to_torus(p).unwrap());
        let rhs = chart.chart_to_torus(model.apply(p)).unwrap();
        worst = worst.max(lhs.dist(rhs));
        checked += 1;
    }
    CheckResult::measured("hyperbolic/chart-conjugacy", worst, 1e-12)
}

fn fixed_point_ladder(plane: &PerturbedMap, torus: &PerturbedTorusMap) -> CheckResult {
    let mut worst = 0.0f64;
    for n in plane.n0()..plane.n0() + 9 {
        let u_n = PerturbedMap::fixed_point(n);
        worst = worst.max(plane.apply(u_n).dist(u_n));
        let p_n = torus.torus_fixed_point(n);
        worst = worst.max(torus.apply(p_n).dist(p_n));
    }
    CheckResult::measured("perturbation/fixed-point-ladder", worst, 1e-12)
}

fn boundary_agreement(plane: &PerturbedMap, seed: u64) -> CheckResult {
    let lin = *plane.linear();
    let (v_lo, v_hi) = plane.regions().v_band();
    let mut rng = sub_rng(seed, 8);
    let mut worst = 0.0f64;
    let n = plane.n0();
    let scale = f64::powi(2.0, -(n as i32));
    for _ in 0..5_000 {
        // v-band edges of D_n.
        let u = rng.gen_range(0.5..2.0) * scale * scale;
        let v = if rng.gen::<bool>() { v_lo } else { v_hi };
        let p = HyperCoord { u, v }.to_plane();
        worst = worst.max(plane.apply(p).dist(lin.apply(p)));
    }
    for m in n..n + 3 {
        let u = RegionSpec::hyperbola_u(m);
        for _ in 0..2_000 {
            let v: f64 = rng.gen_range(-2.0..2.0);
            let p = HyperCoord { u, v }.to_plane();
            worst = worst.max(plane.apply(p).dist(lin.apply(p)));
        }
    }
    CheckResult::measured("perturbation/boundary-agreement", worst, 1e-12)
}

fn bijectivity(plane: &PerturbedMap, seed: u64) -> CheckResult {
    let mut rng = sub_rng(seed, 9);
    let xi = plane.boxes().xi;
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let p = PlanePoint::new(rng.gen_range(-xi..xi), rng.gen_range(-xi..xi));
        worst = worst.max(plane.apply_inv(plane.apply(p)).dist(p));
    }
    CheckResult::measured("perturbation/bijectivity", worst, 1e-10)
}

fn area_jacobian(plane: &PerturbedMap, seed: u64) -> CheckResult {
    let stats = plane.jacobian_check(10_000, seed ^ 10);
    CheckResult::measured("perturbation/area-jacobian", stats.max_abs_dev, 1e-6)
}

fn area_mass(plane: &PerturbedMap, seed: u64) -> CheckResult {
    let report = plane.verify_area(1_000, 100_000, seed ^ 11);
    let worst = report
        .masses
        .iter()
        .map(|m| (m.est_mass - m.true_mass).abs() / m.sigma)
        .fold(0.0f64, f64::max);
    CheckResult::measured("perturbation/area-mass-sigmas", worst, 3.0)
}

fn level_c0_bound(plane: &PerturbedMap, seed: u64) -> CheckResult {
    let lin = *plane.linear();
    let (v_lo, v_hi) = plane.regions().v_band();
    let mut rng = sub_rng(seed, 12);
    let mut worst_ratio = 0.0f64;
    for n in plane.n0()..plane.n0() + 5 {
        let bound = plane.c0_level_distance(n);
        let scale = f64::powi(2.0, -(n as i32));
        let mut sup = 0.0f64;
        for _ in 0..2_000 {
            let h = HyperCoord {
                u: rng.gen_range(0.5..2.0),
                v: rng.gen_range(v_lo..v_hi),
            };
            let p = h.to_plane().scale(scale);
            sup = sup.max(plane.apply(p).dist(lin.apply(p)));
        }
        worst_ratio = worst_ratio.max(sup / bound);
    }
    CheckResult::measured("perturbation/level-c0-bound", worst_ratio, 1.0)
}

fn gpert_c0_size(torus: &PerturbedTorusMap, seed: u64) -> CheckResult {
    let f = *torus.anosov();
    let delta = torus.plane().boxes().delta;
    let mut rng = sub_rng(seed, 13);
    let mut sup = 0.0f64;
    for _ in 0..10_000 {
        let t = rand_torus(&mut rng);
        sup = sup.max(torus.apply(t).dist(f.apply(t)));
    }
    for n in torus.plane().n0()..torus.plane().n0() + 4 {
        let scale = f64::powi(2.0, -(n as i32));
        for _ in 0..2_000 {
            let h = HyperCoord {
                u: rng.gen_range(0.5..2.0),
                v: rng.gen_range(-0.48..1.44),
            };
            let t = torus.chart().chart_to_torus(h.to_plane().scale(scale)).unwrap();
            sup = sup.max(torus.apply(t).dist(f.apply(t)));
        }
    }
    CheckResult::measured("perturbation/gpert-c0-size", sup, delta)
}

fn gpert_support(torus: &PerturbedTorusMap, seed: u64) -> CheckResult {
    let f = *torus.anosov();
    let mut rng = sub_rng(seed, 14);
    let mut ok = true;
    let mut seen = 0;
    while seen < 10_000 {
        let t = rand_torus(&mut rng);
        let modified = match torus.chart().torus_to_chart(t) {
            Ok(p) => torus
                .plane()
                .regions()
                .d_interior_level(p)
                .is_some_and(|n| n >= torus.plane().n0()),
            Err(_) => false,
        };
        if modified {
            continue;
        }
        ok &= torus.apply(t) == f.apply(t);
        seen += 1;
    }
    CheckResult::flag("perturbation/gpert-support", ok, "exact equality off the modified levels")
}

fn escape_certificates(plane: &PerturbedMap, params: &VerifyParams, seed: u64) -> CheckResult {
    let n = plane.n0();
    let m = n + 1;
    let family = match join_chain_family(n, m, 20, params.eta, seed ^ 15) {
        Ok(f) => f,
        Err(e) => return CheckResult::flag("stability/escape-certificates", false, e.to_string()),
    };
    let mut worst_exit = 0u32;
    for chain in &family {
        match escape_experiment(plane, n, m, chain, params.eta, 1_000_000) {
            Ok(cert) => worst_exit = worst_exit.max(cert.n_exit),
            Err(e) => {
                return CheckResult::flag("stability/escape-certificates", false, e.to_string())
            }
        }
    }
    CheckResult::flag(
        "stability/escape-certificates",
        true,
        format!("20 chains, max exit step {worst_exit}"),
    )
}

fn half_cw_window(anosov: &AnosovMap, params: &VerifyParams, seed: u64) -> CheckResult {
    let epsilon = 2.0 * params.xi;
    let alpha = epsilon * 1.0001;
    let mut rng = sub_rng(seed, 16);
    let mut family = Vec::new();
    for _ in 0..5 {
        let len = 0.2500005 * epsilon * rng.gen_range(1.0..1.2);
        let a = TorusPoint::new(anosov.e_u().x * len, anosov.e_u().y * len);
        let b = TorusPoint::new(-anosov.e_u().x * len, -anosov.e_u().y * len);
        family.push(Chain::from_path(&[a, b], params.eta).expect("valid segment"));
    }
    match half_cw_m_finder(anosov, params.xi, alpha, epsilon, &family, 8, params.eta, 1_000_000) {
        Ok(probe) => CheckResult::flag(
            "stability/half-cw-finder",
            probe.m_found == Some(1),
            format!("m_found = {:?}", probe.m_found),
        ),
        Err(e) => CheckResult::flag("stability/half-cw-finder", false, e.to_string()),
    }
}

fn xi_instability_evidence(anosov: &AnosovMap, params: &VerifyParams, seed: u64) -> CheckResult {
    let floor = 1e-3;
    let horizon = ((params.xi / floor).ln() / anosov.lambda().ln()).ceil() as u32 + 2;
    let family = match torus_segment_family(30, floor, params.eta, seed ^ 17) {
        Ok(f) => f,
        Err(e) => return CheckResult::flag("stability/xi-instability", false, e.to_string()),
    };
    for chain in &family {
        match xi_stability_test(anosov, chain, params.xi, horizon, params.eta, 1_000_000) {
            Ok(report) => {
                if report.verdict != Verdict::Violated {
                    return CheckResult::flag(
                        "stability/xi-instability",
                        false,
                        "a sampled chain stayed below xi over the window",
                    );
                }
            }
            Err(e) => return CheckResult::flag("stability/xi-instability", false, e.to_string()),
        }
    }
    CheckResult::flag(
        "stability/xi-instability",
        true,
        format!("30 chains violated within |n| <= {horizon}"),
    )
}

fn dist3_metric(params: &VerifyParams, seed: u64) -> CheckResult {
    let d1_max = 0.5f64.sqrt();
    let k = params.xi / (1.0 + 2.0 * d1_max);
    let d3 = dist3_combine(
        k,
        |a: &TorusPoint, b: &TorusPoint| a.dist(*b),
        |p: &TorusPoint| sphere_canon(*p),
        |a: &SpherePoint, b: &SpherePoint| a.dist(*b),
    );
    let mut rng = sub_rng(seed, 18);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let x = rand_torus(&mut rng);
        let y = rand_torus(&mut rng);
        let z = rand_torus(&mut rng);
        worst = worst.max((d3(&x, &y) - d3(&y, &x)).abs());
        worst = worst.max(d3(&x, &z) - (d3(&x, &y) + d3(&y, &z)));
        // Same-class pairs reduce to K·dist1 exactly.
        let ax = x.antipode();
        worst = worst.max((d3(&x, &ax) - k * x.dist(ax)).abs());
    }
    CheckResult::measured("stability/dist3-metric", worst, 1e-12)
}

fn shadow_torus_batch(anosov: &AnosovMap, seed: u64) -> CheckResult {
    let delta = 1e-4;
    let bound = 2.0 * delta / (anosov.lambda() - 1.0);
    let mut rng = sub_rng(seed, 19);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let x0 = rand_torus(&mut rng);
        let po = match make_pseudo_orbit(anosov, x0, 200, delta, seed ^ (1000 + i)) {
            Ok(po) => po,
            Err(e) => return CheckResult::flag("shadow/torus-batch", false, e.to_string()),
        };
        match shadow_solve(anosov, &po) {
            Ok(res) => worst = worst.max(res.eps_achieved),
            Err(e) => return CheckResult::flag("shadow/torus-batch", false, e.to_string()),
        }
    }
    CheckResult::measured("shadow/torus-batch", worst, bound)
}

fn shadow_sphere_batch(anosov: &AnosovMap, seed: u64) -> CheckResult {
    let g = SphereMap::new(*anosov);
    let delta = 1e-4;
    let bound = 2.0 * delta / (anosov.lambda() - 1.0);
    let mut rng = sub_rng(seed, 20);
    let mut worst = 0.0f64;
    for i in 0..10 {
        let x0 = sphere_canon(rand_torus(&mut rng));
        let po = match make_pseudo_orbit(&g, x0, 200, delta, seed ^ (2000 + i)) {
            Ok(po) => po,
            Err(e) => return CheckResult::flag("shadow/sphere-batch", false, e.to_string()),
        };
        match sphere_shadow(&g, &po) {
            Ok(res) => {
                worst = worst.max(res.eps_achieved);
                let (ok, _) = shadow_verify(&g, &po, res.point, bound);
                if !ok {
                    return CheckResult::flag("shadow/sphere-batch", false, "verification failed");
                }
            }
            Err(e) => return CheckResult::flag("shadow/sphere-batch", false, e.to_string()),
        }
    }
    CheckResult::measured("shadow/sphere-batch", worst, bound)
}

/// Brute-force minimizer of the max plane deviation over a grid of
/// candidate corrections around the first lift; independent of the
/// geometric-series route.
pub fn brute_force_shadow(
    anosov: &AnosovMap,
    pts: &[TorusPoint],
    span: f64,
    step: f64,
) -> TorusPoint {
    let x0 = PlanePoint::new(pts[0].x(), pts[0].y());
    // Unwrap by nearest lifts for the deviation targets.
    let mut lifts = vec![x0];
    for k in 1..pts.len() {
        let predicted = anosov.apply_plane(lifts[k - 1]);
        lifts.push(pts[k].lift_near(predicted));
    }
    let cells = (span / step).round() as i64;
    let mut best = (f64::INFINITY, x0);
    for i in -cells..=cells {
        for j in -cells..=cells {
            let candidate = PlanePoint::new(x0.x + i as f64 * step, x0.y + j as f64 * step);
            let mut q = candidate;
            let mut dev = 0.0f64;
            for (k, lift) in lifts.iter().enumerate() {
                if k > 0 {
                    q = anosov.apply_plane(q);
                }
                dev = dev.max(q.dist(*lift));
                if dev >= best.0 {
                    break;
                }
            }
            if dev < best.0 {
                best = (dev, candidate);
            }
        }
    }
    TorusPoint::new(best.1.x, best.1.y)
}

fn shadow_oracle_agreement(anosov: &AnosovMap, seed: u64) -> CheckResult {
    let delta = 1e-3;
    let mut rng = sub_rng(seed, 21);
    let mut worst = 0.0f64;
    for i in 0..10 {
        let x0 = rand_torus(&mut rng);
        let length = 2 + (i as usize % 5);
        let po = match make_pseudo_orbit(anosov, x0, length, delta, seed ^ (3000 + i)) {
            Ok(po) => po,
            Err(e) => return CheckResult::flag("shadow/oracle-agreement", false, e.to_string()),
        };
        let solved = match shadow_solve(anosov, &po) {
            Ok(r) => r,
            Err(e) => return CheckResult::flag("shadow/oracle-agreement", false, e.to_string()),
        };
        let oracle = brute_force_shadow(anosov, po.pts(), 3e-3, 1e-4);
        worst = worst.max(solved.point.dist(oracle));
    }
    CheckResult::measured("shadow/oracle-agreement", worst, 1e-3)
}

fn quotient_conjugacy(anosov: &AnosovMap, seed: u64) -> CheckResult {
    let g = SphereMap::new(*anosov);
    let mut rng = sub_rng(seed, 22);
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let p = rand_torus(&mut rng);
        worst = worst.max(sphere_canon(anosov.apply(p)).dist(g.apply(sphere_canon(p))));
    }
    CheckResult::measured("quotient/conjugacy", worst, 1e-12)
}

fn cone_point_permutation() -> CheckResult {
    let g = SphereMap::standard();
    let cones = cone_points();
    let ok = cones.iter().all(|c| {
        let image = g.apply(*c);
        cones.iter().any(|d| *d == image) && c.rep().antipode() == c.rep()
    });
    CheckResult::flag("quotient/cone-points", ok, "4 classes, g-invariant")
}

fn grid_bijectivity() -> CheckResult {
    let g = SphereMap::standard();
    let n = 512;
    let mut seen = std::collections::HashSet::with_capacity(n * n / 2 + 4);
    let mut count = 0usize;
    let mut ok = true;
    for i in 0..n {
        for j in 0..n {
            let p = TorusPoint::new(i as f64 / n as f64, j as f64 / n as f64);
            let s = sphere_canon(p);
            if s.rep() != p {
                continue;
            }
            count += 1;
            let image = g.apply(s);
            ok &= seen.insert((image.rep().x().to_bits(), image.rep().y().to_bits()));
            ok &= g.apply_inv(image) == s;
        }
    }
    ok &= seen.len() == count;
    CheckResult::flag("quotient/grid-bijectivity", ok, format!("{count} classes on a 512×512 grid"))
}

fn cw_evidence(params: &VerifyParams, seed: u64) -> CheckResult {
    let g = SphereMap::standard();
    let floor = 1e-3;
    let horizon = ((params.xi / floor).ln() / g.base().lambda().ln()).ceil() as u32 + 2;
    let family = match sphere_arc_family(30, floor, params.eta, seed ^ 23) {
        Ok(f) => f,
        Err(e) => return CheckResult::flag("quotient/cw-evidence", false, e.to_string()),
    };
    match cw_evidence_sphere(&g, params.xi, &family, horizon, floor, params.eta, 1_000_000) {
        Ok(report) => CheckResult::flag(
            "quotient/cw-evidence",
            report.all_violated,
            format!(
                "30 chains, max |first violation| = {:?} within horizon {horizon}",
                report.max_first_violation
            ),
        ),
        Err(e) => CheckResult::flag("quotient/cw-evidence", false, e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_suite_passes() {
        let report = run_suite(&VerifyParams::default());
        for c in &report.checks {
            assert!(c.pass, "check {} failed: {:?}", c.name, c.note);
        }
        assert!(report.all_pass);
    }

    #[test]
    fn bad_twist_radius_reports_gate_failure() {
        let params = VerifyParams {
            r0: 0.4,
            ..VerifyParams::default()
        };
        let report = run_suite(&params);
        assert!(!report.all_pass);
        let gate = report
            .checks
            .iter()
            .find(|c| c.name == "perturbation/geometry-gate")
            .unwrap();
        assert!(!gate.pass);
    }

    #[test]
    fn identical_seeds_identical_reports() {
        let params = VerifyParams::default();
        let a = serde_json::to_string(&run_suite(&params)).unwrap();
        let b = serde_json::to_string(&run_suite(&params)).unwrap();
        assert_eq!(a, b);
    }
}
