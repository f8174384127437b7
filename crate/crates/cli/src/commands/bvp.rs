use std::f64::consts::PI;
use std::sync::Arc;

use halfdisk_core::corner_analysis::{eval_singular, local_polar, singular_exponents, SingularTerm};
use halfdisk_core::domain::{make_sector, BcKind, DomainSpec, Point, SECTOR_ARC, SECTOR_LEFT, SECTOR_RIGHT};
use halfdisk_core::grid_solver::{
    build_halfdisk_grid_on, build_sector_grid, manufactured_mixed, max_error, observed_orders, solve_bvp,
    solve_with_singular_subtraction, CurvGrid, GridField, MixedBVP,
};
use serde::{Deserialize, Serialize};

use crate::config::{DomainDesc, Poly2};
use crate::error::{CliError, CliResult};
use crate::output::{LinePlot, Series};
use crate::{override_problem, Context};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDataDesc {
    pub edge: usize,
    pub value: Poly2,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
#[allow(clippy::large_enum_variant)]
pub enum BvpProblem {
    /// `u = x² − y²` on the half disk.
    #[default]
    ManufacturedMixed,
    /// `S + xy` on a Dirichlet sector, `S` the leading singular function.
    SectorSingular {
        #[serde(default = "three_half_pi")]
        omega: f64,
        #[serde(default)]
        subtract: bool,
    },
    /// `a:∇²u + b·∇u + c u = f` with polynomial coefficients on the
    /// configured domain.
    Custom {
        a: Option<[Poly2; 3]>,
        b: Option<[Poly2; 2]>,
        c: Option<Poly2>,
        f: Option<Poly2>,
        #[serde(default)]
        data: Vec<EdgeDataDesc>,
        exact: Option<Poly2>,
    },
}

fn three_half_pi() -> f64 {
    1.5 * PI
}

type Exact = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

struct Setup {
    name: &'static str,
    bvp: MixedBVP,
    domain: DomainSpec,
    sector_angle: Option<f64>,
    exact: Option<Exact>,
    subtract: Vec<(SingularTerm, f64)>,
}

impl Setup {
    fn grid(&self, n: usize) -> CliResult<CurvGrid> {
        Ok(match self.sector_angle {
            Some(om) => build_sector_grid(self.domain.clone(), om, n)?,
            None => build_halfdisk_grid_on(self.domain.clone(), n)?,
        })
    }

    fn solve(&self, grid: &CurvGrid) -> CliResult<GridField> {
        if self.subtract.is_empty() {
            Ok(solve_bvp(&self.bvp, grid)?)
        } else {
            Ok(solve_with_singular_subtraction(&self.bvp, grid, &self.subtract)?.0)
        }
    }
}

fn is_half_disk(d: &DomainSpec) -> bool {
    d.name == "half_disk"
}

fn setup(ctx: &Context) -> CliResult<Setup> {
    let problem: BvpProblem = ctx.config.problem()?;
    match problem {
        BvpProblem::ManufacturedMixed => {
            let d = DomainDesc::Name("half_disk".into()).build()?;
            if let Some(desc) = &ctx.config.domain {
                if !is_half_disk(&desc.build()?.spec) {
                    return Err(CliError::schema("manufactured_mixed is posed on the half disk"));
                }
            }
            let (bvp, u) = manufactured_mixed();
            Ok(Setup { name: "manufactured_mixed", bvp, domain: d.spec, sector_angle: None, exact: Some(Arc::new(u)), subtract: Vec::new() })
        }
        BvpProblem::SectorSingular { omega, subtract } => {
            let d = make_sector(omega, BcKind::Dirichlet, BcKind::Dirichlet)?;
            let spectrum = singular_exponents(&d, 0, (-1.0, 0.0))?;
            let term = spectrum.terms.first().cloned().map(|mut t| {
                t.cutoff_radius = f64::INFINITY;
                t
            });
            let t = term.clone();
            let exact: Exact = Arc::new(move |p: Point| {
                let s = t.as_ref().map_or(0.0, |t| {
                    let (r, th) = local_polar(t, p);
                    eval_singular(t, r, th).unwrap_or(f64::NAN)
                });
                s + p[0] * p[1]
            });
            let mut bvp = MixedBVP::laplace();
            for e in [SECTOR_RIGHT, SECTOR_ARC, SECTOR_LEFT] {
                let ex = exact.clone();
                bvp = bvp.with_edge_data(e, move |p, _| ex(p));
            }
            let subtract = match (subtract, term) {
                (true, Some(t)) => vec![(t, 1.0)],
                _ => Vec::new(),
            };
            Ok(Setup { name: "sector_singular", bvp, domain: d, sector_angle: Some(omega), exact: Some(exact), subtract })
        }
        BvpProblem::Custom { a, b, c, f, data, exact } => {
            let built = ctx.config.domain.clone().unwrap_or(DomainDesc::Name("half_disk".into())).build()?;
            if built.sector_angle.is_none() && !is_half_disk(&built.spec) {
                return Err(CliError::schema("grids exist for the half_disk and sector built-in domains"));
            }
            let mut bvp = MixedBVP::laplace();
            if let Some([a11, a12, a22]) = a {
                bvp.a = Arc::new(move |p| [a11.eval(p), a12.eval(p), a22.eval(p)]);
            }
            if let Some([b1, b2]) = b {
                bvp.b = Arc::new(move |p| [b1.eval(p), b2.eval(p)]);
            }
            if let Some(c) = c {
                bvp = bvp.with_c(move |p| c.eval(p));
            }
            if let Some(f) = f {
                bvp = bvp.with_rhs(move |p| f.eval(p));
            }
            for e in data {
                if built.spec.edge(e.edge).is_err() {
                    return Err(CliError::schema(format!("no edge with id {}", e.edge)));
                }
                let v = e.value;
                bvp = bvp.with_edge_data(e.edge, move |p, _| v.eval(p));
            }
            let exact = exact.map(|u| Arc::new(move |p: Point| u.eval(p)) as Exact);
            Ok(Setup { name: "custom", bvp, domain: built.spec, sector_angle: built.sector_angle, exact, subtract: Vec::new() })
        }
    }
}

#[derive(Debug, Serialize)]
struct FieldRow {
    x: f64,
    y: f64,
    value: f64,
    exact: Option<f64>,
    error: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SolveReport {
    problem: &'static str,
    domain: String,
    n: usize,
    nodes: usize,
    max_abs: f64,
    max_error: Option<f64>,
}

pub fn solve(ctx: &mut Context, problem: Option<&str>, n: Option<usize>) -> CliResult<()> {
    if let Some(p) = problem {
        override_problem(&mut ctx.config, "kind", p);
    }
    let n = match n {
        Some(n) => n,
        None => ctx.config.single_size(32)?,
    };
    let s = setup(ctx)?;
    let grid = s.grid(n)?;
    let u = s.solve(&grid)?;
    let rows: Vec<FieldRow> = grid
        .points
        .iter()
        .zip(&u.values)
        .map(|(p, v)| {
            let e = s.exact.as_ref().map(|f| f(*p));
            FieldRow { x: p[0], y: p[1], value: *v, exact: e, error: e.map(|e| (v - e).abs()) }
        })
        .collect();
    let report = SolveReport {
        problem: s.name,
        domain: s.domain.name.clone(),
        n,
        nodes: grid.len(),
        max_abs: u.max_abs(),
        max_error: s.exact.as_ref().map(|f| max_error(&grid, &u, |p| f(p))),
    };
    ctx.sink.csv("field.csv", &rows)?;
    ctx.sink.json("report.json", &report)
}

#[derive(Debug, Serialize)]
struct ConvergenceRow {
    n: usize,
    h: f64,
    error: f64,
}

#[derive(Debug, Serialize)]
struct ConvergenceReport {
    problem: &'static str,
    domain: String,
    singular_subtraction: bool,
    runs: Vec<ConvergenceRow>,
    orders: Vec<f64>,
    estimated_order: Option<f64>,
}

pub fn convergence(ctx: &mut Context, problem: Option<&str>, n: Option<Vec<usize>>) -> CliResult<()> {
    if let Some(p) = problem {
        override_problem(&mut ctx.config, "kind", p);
    }
    let sizes = n.or_else(|| ctx.config.sizes()).unwrap_or_else(|| vec![32, 64, 128]);
    if sizes.len() < 2 {
        return Err(CliError::schema("a convergence study needs at least two grid sizes"));
    }
    let s = setup(ctx)?;
    let exact = s.exact.clone().ok_or_else(|| CliError::schema("convergence needs an exact solution"))?;
    let mut runs = Vec::with_capacity(sizes.len());
    for &n in &sizes {
        let grid = s.grid(n)?;
        let u = s.solve(&grid)?;
        runs.push(ConvergenceRow { n, h: 1.0 / n as f64, error: max_error(&grid, &u, |p| exact(p)) });
    }
    let errors: Vec<f64> = runs.iter().map(|r| r.error).collect();
    let orders: Vec<f64> = observed_orders(&errors)
        .into_iter()
        .zip(sizes.windows(2))
        .map(|(o, w)| o / (w[1] as f64 / w[0] as f64).log2())
        .collect();
    let plot = LinePlot {
        title: format!("{} convergence", s.name),
        x_label: "n".into(),
        y_label: "max error".into(),
        log_x: true,
        log_y: true,
        series: vec![
            Series { label: "max error".into(), points: runs.iter().map(|r| (r.n as f64, r.error)).collect() },
            Series {
                label: "slope 2".into(),
                points: sizes.iter().map(|&n| (n as f64, errors[0] * (sizes[0] as f64 / n as f64).powi(2))).collect(),
            },
        ],
    };
    let report = ConvergenceReport {
        problem: s.name,
        domain: s.domain.name.clone(),
        singular_subtraction: !s.subtract.is_empty(),
        estimated_order: orders.last().copied(),
        runs,
        orders,
    };
    ctx.sink.csv("convergence.csv", &report.runs)?;
    ctx.sink.json("convergence.json", &report)?;
    ctx.sink.svg("convergence.svg", &plot)
}
