use std::collections::BTreeMap;
use std::fmt::Write;

use anyhow::Context;
use ctqw::asymptotics::{qclt_amplitude, uniform_grid, y_cdf_table, CDF_GRID_END};
use ctqw::evolution::ExactWalk;
use ctqw::kesten::{auto_order, InfiniteTreeAmplitudes, KestenMeasure};
use ctqw::spectral::{spectral_measure, FiniteTreeSpectrum, SzegoJacobiParams};
use ctqw::tree::{
    build_adjacency, build_mb_hamiltonian, diagonal_shift, stratum_sizes, Stratification,
    TreeParams,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{HamiltonianChoice, IndexKind, Method};
use crate::svg::{Chart, Series};

/// Everything a command produces before it is written anywhere.
pub struct Products {
    pub csv: Option<String>,
    pub results: Value,
    pub max_errors: BTreeMap<String, f64>,
    pub plot: Option<String>,
    pub summary: String,
    pub status: u8,
}

/// Lossless float formatting for CSV: 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

enum Engine {
    Exact(ExactWalk<f64>),
    Spectral(FiniteTreeSpectrum<f64>),
    Kesten(InfiniteTreeAmplitudes<f64>),
}

struct Slice {
    t: f64,
    // per method: (site, stratum)
    dists: Vec<(Vec<f64>, Vec<f64>)>,
}

struct Setup {
    strat: Stratification,
    engines: Vec<(Method, Engine)>,
}

fn setup(
    p: usize,
    m: usize,
    methods: &[Method],
    hamiltonian: HamiltonianChoice,
    shift: f64,
    order: Option<usize>,
    t_max: f64,
) -> anyhow::Result<Setup> {
    let params = TreeParams::new(p, m)?;
    let strat = stratum_sizes(params)?;
    let engines = methods
        .iter()
        .map(|&method| {
            let engine = match method {
                Method::Exact => {
                    let h = match hamiltonian {
                        HamiltonianChoice::Adjacency => build_adjacency::<f64>(params)?,
                        HamiltonianChoice::Mb => build_mb_hamiltonian::<f64>(params)?,
                    };
                    let h = if shift != 0.0 { diagonal_shift(&h, shift) } else { h };
                    Engine::Exact(ExactWalk::new(&h)?)
                }
                Method::Spectral => Engine::Spectral(FiniteTreeSpectrum::new(params)?),
                Method::Kesten => {
                    let order = order.unwrap_or_else(|| auto_order(p, t_max.abs()));
                    Engine::Kesten(InfiniteTreeAmplitudes::new(p, m, order)?)
                }
            };
            Ok((method, engine))
        })
        .collect::<ctqw::Result<Vec<_>>>()?;
    Ok(Setup { strat, engines })
}

fn spread(strat: &Stratification, shells: &[f64]) -> Vec<f64> {
    let mut site = vec![0.0; strat.total()];
    for (k, &v) in shells.iter().enumerate() {
        let range = strat.range(k);
        let share = v / range.len() as f64;
        site[range].iter_mut().for_each(|x| *x = share);
    }
    site
}

fn evaluate(setup: &Setup, t_grid: &[f64], need_sites: bool) -> anyhow::Result<Vec<Slice>> {
    t_grid
        .par_iter()
        .map(|&t| {
            let dists = setup
                .engines
                .iter()
                .map(|(_, engine)| -> ctqw::Result<(Vec<f64>, Vec<f64>)> {
                    let strat = &setup.strat;
                    Ok(match engine {
                        Engine::Exact(walk) => {
                            let site = walk.site_probabilities(t)?.probs;
                            let shells = strat
                                .sizes()
                                .iter()
                                .enumerate()
                                .map(|(k, _)| site[strat.range(k)].iter().sum())
                                .collect();
                            (if need_sites { site } else { Vec::new() }, shells)
                        }
                        Engine::Spectral(spec) => {
                            let shells = spec.stratum_probabilities(t).probs;
                            let site = if need_sites { spec.site_probabilities(t).probs } else { Vec::new() };
                            (site, shells)
                        }
                        Engine::Kesten(amps) => {
                            let shells: Vec<f64> = amps.amplitudes(t).iter().map(|a| a.norm_sqr()).collect();
                            let site = if need_sites { spread(strat, &shells) } else { Vec::new() };
                            (site, shells)
                        }
                    })
                })
                .collect::<ctqw::Result<Vec<_>>>()?;
            Ok(Slice { t, dists })
        })
        .collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn pick(d: &(Vec<f64>, Vec<f64>), kind: IndexKind) -> &[f64] {
    match kind {
        IndexKind::Site => &d.0,
        IndexKind::Stratum => &d.1,
    }
}

fn kind_str(kind: IndexKind) -> &'static str {
    match kind {
        IndexKind::Site => "site",
        IndexKind::Stratum => "stratum",
    }
}

fn pair_errors(methods: &[Method], slices: &[Slice], kinds: &[IndexKind]) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for (i, a) in methods.iter().enumerate() {
        for (j, b) in methods.iter().enumerate().skip(i + 1) {
            for &kind in kinds {
                let worst = slices
                    .iter()
                    .map(|s| max_diff(pick(&s.dists[i], kind), pick(&s.dists[j], kind)))
                    .fold(0.0, f64::max);
                out.insert(format!("{}-vs-{}:{}", a.as_str(), b.as_str(), kind_str(kind)), worst);
            }
        }
    }
    out
}

fn distribution_csv(methods: &[Method], slices: &[Slice], kinds: &[IndexKind]) -> String {
    let mut csv = String::from("t,index,indexing,method,probability\n");
    for s in slices {
        let t = num(s.t);
        for &kind in kinds {
            let label = kind_str(kind);
            for (mi, method) in methods.iter().enumerate() {
                for (n, &v) in pick(&s.dists[mi], kind).iter().enumerate() {
                    let _ = writeln!(csv, "{t},{n},{label},{},{}", method.as_str(), num(v));
                }
            }
            for (i, a) in methods.iter().enumerate() {
                for (j, b) in methods.iter().enumerate().skip(i + 1) {
                    let (pa, pb) = (pick(&s.dists[i], kind), pick(&s.dists[j], kind));
                    for (n, (x, y)) in pa.iter().zip(pb).enumerate() {
                        let _ = writeln!(
                            csv,
                            "{t},{n},{label},{}-vs-{},{}",
                            a.as_str(),
                            b.as_str(),
                            num((x - y).abs())
                        );
                    }
                }
            }
        }
    }
    csv
}

fn distribution_json(methods: &[Method], slices: &[Slice], kinds: &[IndexKind]) -> Value {
    Value::Array(
        slices
            .iter()
            .map(|s| {
                let mut per_method = serde_json::Map::new();
                for (mi, method) in methods.iter().enumerate() {
                    let mut entry = serde_json::Map::new();
                    for &kind in kinds {
                        entry.insert(kind_str(kind).into(), json!(pick(&s.dists[mi], kind)));
                    }
                    per_method.insert(method.as_str().into(), Value::Object(entry));
                }
                json!({ "t": s.t, "methods": per_method })
            })
            .collect(),
    )
}

const MAX_PLOTTED_SHELLS: usize = 10;

fn shell_plot(method: Method, slices: &[Slice]) -> String {
    let shells = slices.first().map_or(0, |s| s.dists[0].1.len()).min(MAX_PLOTTED_SHELLS);
    let series: Vec<Series> = (0..shells)
        .map(|k| Series {
            label: format!("shell {k}"),
            points: slices.iter().map(|s| (s.t, s.dists[0].1[k])).collect(),
        })
        .collect();
    Chart {
        title: &format!("Shell probabilities ({})", method.as_str()),
        x_label: "t",
        y_label: "probability",
        log_y: false,
    }
    .render(&series)
}

#[allow(clippy::too_many_arguments)]
pub fn simulate(
    p: usize,
    m: usize,
    t_grid: &[f64],
    methods: &[Method],
    indexing: &[IndexKind],
    hamiltonian: HamiltonianChoice,
    shift: f64,
    order: Option<usize>,
    want_plot: bool,
) -> anyhow::Result<Products> {
    let t_max = t_grid.iter().fold(0.0f64, |a, &t| a.max(t.abs()));
    let setup = setup(p, m, methods, hamiltonian, shift, order, t_max)?;
    let slices = evaluate(&setup, t_grid, indexing.contains(&IndexKind::Site))?;
    let max_errors = pair_errors(methods, &slices, indexing);
    let mut summary = format!(
        "simulate p={p} M={m}: {} time points, {} vertices, methods {}",
        t_grid.len(),
        setup.strat.total(),
        methods.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(",")
    );
    for (key, v) in &max_errors {
        let _ = write!(summary, "\n  max |{key}| = {v:.3e}");
    }
    Ok(Products {
        csv: Some(distribution_csv(methods, &slices, indexing)),
        results: distribution_json(methods, &slices, indexing),
        max_errors,
        plot: want_plot.then(|| shell_plot(methods[0], &slices)),
        summary,
        status: 0,
    })
}

pub fn compare(
    p: usize,
    m: usize,
    t_grid: &[f64],
    methods: &[Method],
    tol: f64,
    want_plot: bool,
) -> anyhow::Result<Products> {
    let t_max = t_grid.iter().fold(0.0f64, |a, &t| a.max(t.abs()));
    let setup = setup(p, m, methods, HamiltonianChoice::Adjacency, 0.0, None, t_max)?;
    let kinds = [IndexKind::Site, IndexKind::Stratum];
    let slices = evaluate(&setup, t_grid, true)?;
    let max_errors = pair_errors(methods, &slices, &kinds);
    let worst = max_errors.values().copied().fold(0.0, f64::max);
    let pass = max_errors.values().all(|&v| v <= tol);
    let mut csv = String::from("t,pair,indexing,max_abs_diff\n");
    let mut per_t = Vec::with_capacity(slices.len());
    for s in &slices {
        let mut row = serde_json::Map::new();
        for (i, a) in methods.iter().enumerate() {
            for (j, b) in methods.iter().enumerate().skip(i + 1) {
                for &kind in &kinds {
                    let d = max_diff(pick(&s.dists[i], kind), pick(&s.dists[j], kind));
                    let pair = format!("{}-vs-{}", a.as_str(), b.as_str());
                    let _ = writeln!(csv, "{},{pair},{},{}", num(s.t), kind_str(kind), num(d));
                    row.insert(format!("{pair}:{}", kind_str(kind)), json!(d));
                }
            }
        }
        per_t.push(json!({ "t": s.t, "max_abs_diff": row }));
    }
    let plot = want_plot.then(|| {
        let series: Vec<Series> = max_errors
            .keys()
            .map(|key| {
                let points = per_t
                    .iter()
                    .map(|r| (r["t"].as_f64().unwrap_or(0.0), r["max_abs_diff"][key].as_f64().unwrap_or(0.0)))
                    .collect();
                Series { label: key.clone(), points }
            })
            .collect();
        Chart { title: "Cross-method differences", x_label: "t", y_label: "max |difference|", log_y: true }
            .render(&series)
    });
    let verdict = if pass { "PASS" } else { "FAIL" };
    Ok(Products {
        csv: Some(csv),
        results: json!({ "tol": tol, "pass": pass, "per_t": per_t }),
        max_errors,
        plot,
        summary: format!("compare p={p} M={m}: max difference {worst:.3e}, tol {tol:.1e}: {verdict}"),
        status: if pass { 0 } else { 3 },
    })
}

pub fn measure(p: usize, m: Option<usize>, samples: usize, want_plot: bool) -> anyhow::Result<Products> {
    match m {
        Some(m) => {
            let params = TreeParams::new(p, m)?;
            let measure = spectral_measure(&SzegoJacobiParams::<f64>::finite_tree(params), m)?;
            let mut csv = String::from("node,weight\n");
            for (x, w) in measure.nodes.iter().zip(&measure.weights) {
                let _ = writeln!(csv, "{},{}", num(*x), num(*w));
            }
            let mass_error = (measure.total_mass() - 1.0).abs();
            let plot = want_plot.then(|| {
                let series: Vec<Series> = measure
                    .nodes
                    .iter()
                    .zip(&measure.weights)
                    .map(|(&x, &w)| Series { label: format!("{x:.4}"), points: vec![(x, 0.0), (x, w)] })
                    .collect();
                Chart { title: &format!("Spectral measure, p={p} M={m}"), x_label: "x", y_label: "weight", log_y: false }
                    .render(&series)
            });
            Ok(Products {
                csv: Some(csv),
                results: json!({ "nodes": measure.nodes, "weights": measure.weights }),
                max_errors: BTreeMap::from([("total_mass".to_string(), mass_error)]),
                plot,
                summary: format!("measure p={p} M={m}: {} atoms, |mass - 1| = {mass_error:.1e}", measure.len()),
                status: 0,
            })
        }
        None => {
            let kesten = KestenMeasure::new(p)?;
            let c: f64 = kesten.edge();
            let xs = uniform_grid(-c, c, samples);
            let density: Vec<f64> = xs.iter().map(|&x| kesten.density(x)).collect();
            let mass: f64 = kesten.integrate(|_: f64| 1.0, ctqw::special::DEFAULT_QUADRATURE_ORDER)?;
            let mut csv = String::from("x,density\n");
            for (x, d) in xs.iter().zip(&density) {
                let _ = writeln!(csv, "{},{}", num(*x), num(*d));
            }
            let plot = want_plot.then(|| {
                Chart { title: &format!("Kesten density, p={p}"), x_label: "x", y_label: "density", log_y: false }.render(&[
                    Series { label: format!("p={p}"), points: xs.iter().copied().zip(density.iter().copied()).collect() },
                ])
            });
            Ok(Products {
                csv: Some(csv),
                results: json!({ "x": xs, "density": density, "edge": c }),
                max_errors: BTreeMap::from([("total_mass".to_string(), (mass - 1.0).abs())]),
                plot,
                summary: format!("measure p={p} (infinite tree): support [-{c:.6}, {c:.6}], mass {mass:.12}"),
                status: 0,
            })
        }
    }
}

pub fn qclt(ks: &[usize], p_ladder: &[usize], t_grid: &[f64], order: usize, want_plot: bool) -> anyhow::Result<Products> {
    let kmax = ks.iter().copied().max().unwrap_or(0);
    let tables = p_ladder
        .par_iter()
        .map(|&p| InfiniteTreeAmplitudes::<f64>::new(p, kmax, order))
        .collect::<ctqw::Result<Vec<_>>>()?;
    let mut csv = String::from("k,t,p,abs_error\n");
    let mut rows = Vec::new();
    let mut max_errors = BTreeMap::new();
    let mut curves = Vec::new();
    for &k in ks {
        for &t in t_grid {
            let limit = qclt_amplitude(k, t)?;
            let mut curve = Vec::with_capacity(p_ladder.len());
            for (&p, table) in p_ladder.iter().zip(&tables) {
                let err = (table.amplitude(k, t / (p as f64).sqrt())? - limit).norm();
                let _ = writeln!(csv, "{k},{},{p},{}", num(t), num(err));
                rows.push(json!({ "k": k, "t": t, "p": p, "abs_error": err }));
                let slot = max_errors.entry(format!("p={p}")).or_insert(0.0f64);
                *slot = slot.max(err);
                curve.push(((p as f64).log2(), err));
            }
            curves.push(Series { label: format!("k={k} t={t}"), points: curve });
        }
    }
    let plot = want_plot.then(|| {
        Chart { title: "Distance to the large-degree limit", x_label: "log2 p", y_label: "abs error", log_y: true }
            .render(&curves)
    });
    let mut summary = format!("qclt: {} k values, {} times, order {order}", ks.len(), t_grid.len());
    for (key, v) in &max_errors {
        let _ = write!(summary, "\n  {key}: max error {v:.3e}");
    }
    Ok(Products { csv: Some(csv), results: Value::Array(rows), max_errors, plot, summary, status: 0 })
}

pub fn ylimit(t_grid: &[f64], grid_points: usize, want_plot: bool) -> anyhow::Result<Products> {
    let grid = uniform_grid(0.0, CDF_GRID_END, grid_points);
    let tables = t_grid
        .par_iter()
        .map(|&t| y_cdf_table(t, &grid))
        .collect::<ctqw::Result<Vec<_>>>()?;
    let mut csv = String::from("t,x,y_cdf,z_cdf\n");
    let mut results = Vec::new();
    let mut max_errors = BTreeMap::new();
    let mut summary = String::from("ylimit:");
    for (&t, table) in t_grid.iter().zip(&tables) {
        let sup = table.iter().map(|(_, a, b)| (a - b).abs()).fold(0.0, f64::max);
        for (x, a, b) in table {
            let _ = writeln!(csv, "{},{},{},{}", num(t), num(*x), num(*a), num(*b));
        }
        results.push(json!({ "t": t, "sup_distance": sup }));
        max_errors.insert(format!("t={t}"), sup);
        let _ = write!(summary, "\n  t={t}: sup |F_Y(t)/t - F_Z| = {sup:.4}");
    }
    let plot = want_plot.then(|| {
        let last = tables.last().context("empty time grid").ok()?;
        let t = t_grid[t_grid.len() - 1];
        Some(
            Chart { title: &format!("CDF of Y(t)/t at t={t}"), x_label: "x", y_label: "CDF", log_y: false }.render(&[
                Series { label: "Y(t)/t".into(), points: last.iter().map(|r| (r.0, r.1)).collect() },
                Series { label: "limit".into(), points: last.iter().map(|r| (r.0, r.2)).collect() },
            ]),
        )
    });
    Ok(Products {
        csv: Some(csv),
        results: Value::Array(results),
        max_errors,
        plot: plot.flatten(),
        summary,
        status: 0,
    })
}
