//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use halfdisk_core::continuation::{census, follow_path, parity_count, ridge_amplitude_path, bump_seeds, FollowOptions};
use halfdisk_core::corner_analysis::{eval_singular, local_polar, singular_exponents};
use halfdisk_core::deformation::corner_deformation;
use halfdisk_core::domain::{make_half_disk, make_sector, BcKind, Point, SECTOR_ARC, SECTOR_LEFT, SECTOR_RIGHT};
use halfdisk_core::extension_ops::{
    halfplane_extension, quadrant_extension, reflection_coeffs, t_x_extend, t_y_extend, Data1d, EdgeCondition,
    ExtensionField, Jet2,
};
use halfdisk_core::grid_solver::{
    build_halfdisk_grid, build_sector_grid, manufactured_mixed, max_error, observed_orders, solve_bvp,
    solve_with_singular_subtraction, MixedBVP,
};
use halfdisk_core::minimal_disk::{
    contact_angle_residual, first_variation_check, greens_symmetry_check, mean_curvature_residual, newton_solve,
    BoundaryCurve, Embedding, HalfDiskMesh, MetricField, TransversalField, Vec3,
};
use halfdisk_core::smooth::ramp_down;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn exponent_tables() -> Outcome {
    let hd = make_half_disk();
    let mut found = Vec::new();
    for id in [1, 2] {
        match singular_exponents(&hd, id, (-2.5, 0.0)) {
            Ok(s) => found.push(s.lambdas()),
            Err(e) => return outcome(false, format!("corner {id}: {e}")),
        }
    }
    let pass = found.iter().all(|l| l.len() == 1 && (l[0] + 1.0).abs() < 1e-12);
    outcome(pass, format!("window (-2.5, 0): corner 1 {:?}, corner 2 {:?}", found[0], found[1]))
}

fn smooth_convergence() -> Outcome {
    let (bvp, u) = manufactured_mixed();
    let mut errors = Vec::new();
    for n in [32, 64, 128] {
        let g = build_halfdisk_grid(n).unwrap();
        errors.push(max_error(&g, &solve_bvp(&bvp, &g).unwrap(), u));
    }
    let o = observed_orders(&errors);
    let pass = o.iter().all(|v| (v - 2.0).abs() <= 0.2);
    outcome(pass, format!("errors [{}], orders {o:.3?}", sci(&errors)))
}

fn corner_signature() -> Outcome {
    let om = 1.5 * PI;
    let (mut plain, mut sub) = (Vec::new(), Vec::new());
    for n in [32, 64, 128] {
        let d = make_sector(om, BcKind::Dirichlet, BcKind::Dirichlet).unwrap();
        let mut term = singular_exponents(&d, 0, (-1.0, 0.0)).unwrap().terms[0].clone();
        term.cutoff_radius = f64::INFINITY;
        let g = build_sector_grid(d, om, n).unwrap();
        let t = term.clone();
        let exact = move |p: Point| {
            let (r, th) = local_polar(&t, p);
            eval_singular(&t, r, th).unwrap()
        };
        let mut bvp = MixedBVP::laplace();
        for e in [SECTOR_RIGHT, SECTOR_ARC, SECTOR_LEFT] {
            let ex = exact.clone();
            bvp = bvp.with_edge_data(e, move |p, _| ex(p) + p[0] * p[1]);
        }
        let full = |p: Point| exact(p) + p[0] * p[1];
        plain.push(max_error(&g, &solve_bvp(&bvp, &g).unwrap(), full));
        let (u, _) = solve_with_singular_subtraction(&bvp, &g, &[(term, 1.0)]).unwrap();
        sub.push(max_error(&g, &u, full));
    }
    let (op, os) = (observed_orders(&plain), observed_orders(&sub));
    let pass = op.iter().all(|o| (0.6..=1.1).contains(o)) && os.iter().all(|o| (o - 2.0).abs() <= 0.2);
    outcome(pass, format!("plain orders {op:.3?}, subtracted orders {os:.3?}"))
}

fn solve3(m: [[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
    let det = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let d = det(m);
    std::array::from_fn(|c| {
        let mut a = m;
        for r in 0..3 {
            a[r][c] = b[r];
        }
        det(a) / d
    })
}

fn reflection() -> Outcome {
    let rc = reflection_coeffs();
    let exact = rc.c == [Ratio::from_integer(6), Ratio::from_integer(-8), Ratio::from_integer(3)];
    let m: [[f64; 3]; 3] = std::array::from_fn(|l| std::array::from_fn(|j| (-(j as f64 + 1.0)).powi(l as i32)));
    let oracle = solve3(m, [1.0; 3]);
    let agree = (0..3).all(|j| (oracle[j] - rc.as_f64()[j]).abs() < 1e-12);
    outcome(exact && agree, format!("coefficients ({}), oracle {oracle:.12?}", rc.c.map(|c| c.to_string()).join(", ")))
}

fn richardson(f: impl Fn(f64) -> f64) -> f64 {
    let d = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    let h = 1e-3;
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

fn random_u(rng: &mut ChaCha8Rng) -> ExtensionField {
    let c: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let e = |t: f64| ramp_down(t.abs(), 0.5, 1.5);
    ExtensionField::from_fn([-1.5, 1.5, -1.5, 1.5], move |p| {
        let (x, y) = (p[0], p[1]);
        let mut poly = Jet2::ZERO;
        for k in 0..3i32 {
            for l in 0..3i32 {
                let xk = [x.powi(k), k as f64 * x.powi((k - 1).max(0)), (k * (k - 1)) as f64 * x.powi((k - 2).max(0))];
                let yl = [y.powi(l), l as f64 * y.powi((l - 1).max(0)), (l * (l - 1)) as f64 * y.powi((l - 2).max(0))];
                poly += Jet2::of_x(xk).mul(Jet2::of_y(yl)) * c[(3 * k + l) as usize];
            }
        }
        let (ex, ey) = (e(x), e(y));
        let (sx, sy) = (x.signum(), y.signum());
        poly.mul(Jet2::of_x([ex[0], sx * ex[1], ex[2]])).mul(Jet2::of_y([ey[0], sy * ey[1], ey[2]]))
    })
}

fn bottom_defect(w: &ExtensionField, bc: &EdgeCondition, xs: &[f64]) -> f64 {
    xs.iter()
        .map(|&x| {
            let j = w.jet([x, 0.0]);
            match bc {
                EdgeCondition::Dirichlet(g) => (j.v - g.value(x)).abs(),
                EdgeCondition::Oblique { coef, data } => (-j.g[1] + coef * j.g[0] - data.value(x)).abs(),
            }
        })
        .fold(0.0, f64::max)
}

fn bottom_condition(u: &ExtensionField, coef: Option<f64>) -> EdgeCondition {
    match coef {
        None => EdgeCondition::Dirichlet(Data1d::bottom_value(u)),
        Some(b) => EdgeCondition::Oblique { coef: b, data: Data1d::bottom_trace(u, [b, -1.0]) },
    }
}

fn extension_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut value, mut deriv) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let coeffs: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let plateau = rng.gen_range(0.2..0.6);
        let g = Data1d::plateau_poly(&coeffs, plateau, plateau + rng.gen_range(0.3..1.0));
        let (wx, wy) = (t_x_extend(&g), t_y_extend(&g));
        for k in 0..41 {
            let s = -2.0 + 0.1 * k as f64;
            value = value.max(wx.value([s, 0.0]).abs()).max(wy.value([0.0, s]).abs());
            deriv = deriv
                .max((-richardson(|h| wx.value([s, h])) - g.value(s)).abs())
                .max((-richardson(|h| wy.value([h, s])) - g.value(s)).abs());
        }
    }
    let pos: Vec<f64> = (0..25).map(|k| 0.01 + 0.06 * k as f64).collect();
    let neg: Vec<f64> = pos.iter().map(|x| -x).collect();
    let mut traces = 0.0f64;
    let quadrant_cases = [
        (None, None),
        (Some(0.0), None),
        (Some(1.0), None),
        (None, Some(0.7)),
        (Some(2.0), Some(3.0)),
        (Some(2.0), Some(0.5)),
        (Some(0.0), Some(1.5)),
        (Some(0.0), Some(0.0)),
        (Some(-1.3), Some(0.0)),
    ];
    for (beta, alpha) in quadrant_cases {
        let u = random_u(&mut rng);
        let bottom = bottom_condition(&u, beta);
        let left = bottom_condition(&u.swap_xy(), alpha);
        let w = match quadrant_extension(&bottom, &left) {
            Ok(w) => w,
            Err(e) => return outcome(false, format!("quadrant β={beta:?} α={alpha:?}: {e}")),
        };
        traces = traces.max(bottom_defect(&w, &bottom, &pos)).max(bottom_defect(&w.swap_xy(), &left, &pos));
    }
    let halfplane_cases = [
        (None, None),
        (None, Some(0.8)),
        (Some(-0.4), None),
        (Some(1.2), Some(1.2)),
        (Some(0.0), Some(2.0)),
        (Some(2.0), Some(-0.5)),
        (Some(0.0), Some(0.0)),
    ];
    for (alpha, beta) in halfplane_cases {
        let u = random_u(&mut rng);
        let (l, r) = (bottom_condition(&u, alpha), bottom_condition(&u, beta));
        let w = match halfplane_extension(&l, &r) {
            Ok(w) => w,
            Err(e) => return outcome(false, format!("half-plane α={alpha:?} β={beta:?}: {e}")),
        };
        traces = traces.max(bottom_defect(&w, &l, &neg)).max(bottom_defect(&w, &r, &pos));
    }
    let pass = value <= 1e-12 && deriv <= 1e-6 && traces <= 1e-6;
    outcome(pass, format!("T value {value:.2e}, T derivative {deriv:.2e}, operator traces {traces:.2e}"))
}

fn deformation() -> Outcome {
    let d = make_half_disk();
    let eps = 0.2;
    let phi = corner_deformation(&d, &[[[0.5, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, 1.0]]], eps).unwrap();
    let s = d.corners[0].position;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut min_det = f64::INFINITY;
    let mut moved_outside = 0usize;
    for _ in 0..10_000 {
        let r = 2.5 * eps * rng.gen::<f64>().sqrt();
        let th = rng.gen_range(0.0..2.0 * PI);
        let p = [s[0] + r * th.cos(), s[1] + r * th.sin()];
        min_det = min_det.min(phi.jacobian_det(p));
        if r >= 2.0 * eps && phi.apply(p) != p {
            moved_outside += 1;
        }
    }
    for _ in 0..1000 {
        let p = [rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0)];
        let far = d.corners.iter().all(|c| (p[0] - c.position[0]).hypot(p[1] - c.position[1]) >= 2.0 * eps);
        if far && phi.apply(p) != p {
            moved_outside += 1;
        }
    }
    let pass = min_det >= 0.5 - 1e-9 && moved_outside == 0;
    outcome(pass, format!("min det DΦ {min_det:.12}, points moved outside the 2ε balls {moved_outside}"))
}

fn flat_disk() -> Outcome {
    let g = MetricField::euclidean();
    let mut worst = 0.0f64;
    for n in [8, 16, 32, 64] {
        let f = Embedding::flat(HalfDiskMesh::new(n).unwrap());
        let p = TransversalField::constant(&f, &g, [0.0, 1.0, 0.0]);
        worst = worst.max(mean_curvature_residual(&f, &g, &p).unwrap().max_abs());
        worst = worst.max(contact_angle_residual(&f, &g, &p).unwrap().max_abs());
    }
    outcome(worst <= 1e-12, format!("max |H|, |Θ| over n ∈ {{8, 16, 32, 64}}: {worst:.2e}"))
}

fn generic_pair(n: usize) -> (Embedding, Vec<Vec3>) {
    let mesh = HalfDiskMesh::new(n).unwrap();
    let f = Embedding::from_fn(mesh.clone(), |q| {
        let b = 1.0 - q[0] * q[0] - q[1] * q[1];
        [q[0] + 0.1 * q[1] * q[1], 0.1 * b * (1.0 + 0.5 * q[0]) + 0.05 * q[1], q[1] * (1.0 + 0.1 * q[0])]
    });
    let x = mesh.grid.points.iter().map(|q| [0.3 + q[0] * q[1], 0.5 * q[0] + q[1] * q[1], q[1] * (1.0 + q[0])]).collect();
    (f, x)
}

fn first_variation() -> Outcome {
    let g = MetricField::bump(0.2, [0.2, 0.1, 0.3], 0.8);
    let rel: Vec<f64> = [32, 64]
        .iter()
        .map(|&n| {
            let (f, x) = generic_pair(n);
            let (l, r) = first_variation_check(&f, &g, &x).unwrap();
            ((l - r) / l).abs()
        })
        .collect();
    let order = (rel[0] / rel[1]).log2();
    outcome(rel[1] <= 1e-3 && order >= 1.0, format!("relative error n=32 {:.2e}, n=64 {:.2e}, order {order:.2}", rel[0], rel[1]))
}

fn newton_quadratic() -> Outcome {
    let n = 16;
    let mesh = HalfDiskMesh::new(n).unwrap();
    let flat = Embedding::flat(mesh.clone());
    let g = MetricField::bump(0.05, [0.1, 0.3, 0.4], 0.8);
    let p = TransversalField::constant(&flat, &g, [0.0, 1.0, 0.0]);
    let start = Embedding::from_fn(mesh, |q| [q[0], 0.05 * (1.0 - q[0] * q[0] - q[1] * q[1]), q[1]]);
    let out = match newton_solve(&BoundaryCurve::semicircle(1.0, [0.0; 3]), &g, &p, &start) {
        Ok(o) => o,
        Err(e) => return outcome(false, format!("{e}")),
    };
    let h = &out.history;
    let ratios: Vec<f64> = h.windows(2).map(|w| w[1] / (w[0] * w[0])).collect();
    let c = ratios.iter().fold(0.0, |m: f64, r| m.max(*r));
    let pass = out.iterations >= 3 && c.is_finite() && c <= 10.0;
    outcome(pass, format!("residuals [{}], max r_(k+1)/r_k² = {c:.3e} over {} iterations", sci(h), out.iterations))
}

fn green_symmetry() -> Outcome {
    let g = MetricField::euclidean();
    let c: Vec<f64> = [32, 64]
        .iter()
        .map(|&n| {
            let f = Embedding::flat(HalfDiskMesh::new(n).unwrap());
            let p = TransversalField::constant(&f, &g, [0.0, 1.0, 0.0]);
            let pts = &f.mesh().grid.points;
            let mut rng = ChaCha8Rng::seed_from_u64(10);
            let a: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let h1: Vec<f64> = pts.iter().map(|q| (1.3 * q[0] + a[0]).sin() * (2.0 * q[1]).cos() + a[1] * q[0] * q[1] + a[2]).collect();
            let h2: Vec<f64> = pts.iter().map(|q| q[0] * q[0] + a[3] * q[1] + (3.0 * q[0] * q[1] + a[4]).sin() + a[5]).collect();
            greens_symmetry_check(&f, &g, &p, &h1, &h2).unwrap() * n as f64
        })
        .collect();
    outcome(c[1] <= 1.25 * c[0], format!("defect/h: n=32 {:.3}, n=64 {:.3}", c[0], c[1]))
}

fn parity() -> Outcome {
    let opts = FollowOptions::default();
    let fold_free = ridge_amplitude_path(0.15, 1.0, 0.6, 0.25);
    let g0 = fold_free.metric(0.0, &MetricField::euclidean());
    let mesh = HalfDiskMesh::new(10).unwrap();
    let f = Embedding::flat(mesh.clone());
    let p = TransversalField::constant(&f, &g0, [0.0, 1.0, 0.0]);
    let seeds = bump_seeds(&mesh, &[-0.6, -0.4, -0.25, -0.1, 0.0, 0.1, 0.25, 0.4, 0.6]);
    let ends: Vec<u8> = [0.0, 1.0]
        .iter()
        .map(|&t| parity_count(&fold_free.curve(t), &fold_free.metric(t, &g0), &p, &seeds).map(|r| r.parity))
        .collect::<Result<_, _>>()
        .unwrap_or_default();
    let parity_ok = ends.len() == 2 && ends[0] == ends[1];

    let path = ridge_amplitude_path(0.05, 1.5, 0.8, 0.25);
    let g0 = path.metric(0.0, &g0);
    let mesh = HalfDiskMesh::new(12).unwrap();
    let seeds = bump_seeds(&mesh, &[-0.6, -0.4, -0.25, -0.1, 0.0, 0.1, 0.25, 0.4, 0.6]);
    let p = TransversalField::constant(&Embedding::flat(mesh), &g0, [0.0, 1.0, 0.0]);
    let branches = follow_path(&path, &g0, &p, &seeds, 10).unwrap();
    let folds: Vec<_> = branches.iter().filter_map(|b| b.fold()).collect();
    if folds.is_empty() {
        return outcome(false, format!("fold-free parities {ends:?}; no fold bracketed"));
    }
    let lo = folds.iter().map(|f| f.t_lo).fold(1.0, f64::min);
    let hi = folds.iter().map(|f| f.t_hi).fold(0.0, f64::max);
    let mut all = seeds;
    all.extend(branches.iter().map(|b| b.last().embedding.clone()));
    let count = |t: f64| census(&path.curve(t), &path.metric(t, &g0), &p, &all, opts.newton, opts.dedup).map(|c| c.count()).unwrap_or(0);
    let (before, after) = (count(lo), count(hi));
    let even = before.abs_diff(after) % 2 == 0 && before != after;
    outcome(
        parity_ok && even,
        format!("fold-free parities {ends:?}; fold bracket [{lo:.5}, {hi:.5}], counts {before} → {after}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("exponent tables", exponent_tables, Some(Duration::from_secs(1))),
        ("smooth-problem convergence", smooth_convergence, Some(Duration::from_secs(30))),
        ("corner-singularity signature", corner_signature, None),
        ("reflection coefficients", reflection, None),
        ("extension identities", extension_identities, Some(Duration::from_secs(10))),
        ("deformation", deformation, None),
        ("flat minimal disk", flat_disk, None),
        ("first variation", first_variation, None),
        ("Newton quadratic convergence", newton_quadratic, None),
        ("Green symmetry", green_symmetry, None),
        ("parity constancy", parity, None),
    ];
    let mut failures = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= b);
        let pass = out.pass && in_time;
        if !pass {
            failures += 1;
        }
        let limit = budget.map(|b| format!(" (limit {}s)", b.as_secs())).unwrap_or_default();
        println!(
            "{} {:>2}. {name}: {} [{:.2}s{limit}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
