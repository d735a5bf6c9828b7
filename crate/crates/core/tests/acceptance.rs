//! Acceptance checks. Prints one `criterion N: PASS|FAIL` line each and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use ctqw::asymptotics::{
    default_cdf_grid, qclt_amplitude, semicircle_amplitude, y_charfn, y_limit_sup_distance,
    z_moment, CharfnMethod, YWalkDistribution,
};
use ctqw::evolution::ExactWalk;
use ctqw::kesten::{windowed_maxima, InfiniteTreeAmplitudes};
use ctqw::special::{bessel_j, bessel_j_sequence, integrate_singular, SingularWeight};
use ctqw::spectral::{spectral_measure, FiniteTreeSpectrum, SzegoJacobiParams};
use ctqw::tree::{build_adjacency, build_mb_hamiltonian, diagonal_shift, stratum_sizes, TreeParams};
use num_complex::Complex64;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(",")
}

fn budget(elapsed: Duration, limit: f64, detail: String) -> Outcome {
    let secs = elapsed.as_secs_f64();
    check(secs < limit, format!("{detail}; {secs:.3}s (budget {limit}s)"))
}

fn worked_example() -> Outcome {
    let start = Instant::now();
    let params = TreeParams::new(3, 2).map_err(|e| e.to_string())?;
    let measure = spectral_measure(&SzegoJacobiParams::<f64>::finite_tree(params), 2)
        .map_err(|e| e.to_string())?;
    let r5 = 5f64.sqrt();
    let want = [(-r5, 0.3), (0.0, 0.4), (r5, 0.3)];
    let atom_err = measure
        .nodes
        .iter()
        .zip(&measure.weights)
        .zip(want)
        .map(|((x, w), (wx, ww))| (x - wx).abs().max((w - ww).abs()))
        .fold(0.0, f64::max);
    if measure.len() != 3 || atom_err > 1e-12 {
        return Err(format!("atoms off by {atom_err:.3e}"));
    }
    let spec = FiniteTreeSpectrum::<f64>::new(params).map_err(|e| e.to_string())?;
    let mut amp_err = 0.0f64;
    for i in 0..=1000 {
        let t = i as f64 * 0.01;
        let (s, c) = (r5 * t).sin_cos();
        let want = [
            Complex64::new((2.0 + 3.0 * c) / 5.0, 0.0),
            Complex64::new(0.0, 3f64.sqrt() / r5 * s),
            Complex64::new(6f64.sqrt() / 5.0 * (c - 1.0), 0.0),
        ];
        for (k, w) in want.iter().enumerate() {
            let a = spec.stratum_amplitude(k, t).map_err(|e| e.to_string())?;
            amp_err = amp_err.max((a - w).norm());
        }
    }
    if amp_err > 1e-10 {
        return Err(format!("amplitude error {amp_err:.3e}"));
    }
    budget(
        start.elapsed(),
        1.0,
        format!("atoms {atom_err:.1e}, amplitudes {amp_err:.1e}"),
    )
}

fn cross_method() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for p in 2..=5 {
        for m in 1..=8 {
            let params = TreeParams::new(p, m).map_err(|e| e.to_string())?;
            let h = build_adjacency::<f64>(params).map_err(|e| e.to_string())?;
            let strat = stratum_sizes(params).map_err(|e| e.to_string())?;
            let walk = ExactWalk::new(&h).map_err(|e| e.to_string())?;
            let spec = FiniteTreeSpectrum::<f64>::new(params).map_err(|e| e.to_string())?;
            for &t in &[0.25, 1.0, 3.0, 7.0] {
                let exact = walk.stratum_probabilities(t, &strat).map_err(|e| e.to_string())?;
                let d = exact.max_abs_diff(&spec.stratum_probabilities(t));
                worst = worst.max(d);
            }
        }
    }
    if worst > 1e-10 {
        return Err(format!("max difference {worst:.3e}"));
    }
    budget(start.elapsed(), 30.0, format!("max difference {worst:.1e}"))
}

fn scalar_shift() -> Outcome {
    let params = TreeParams::new(3, 2).map_err(|e| e.to_string())?;
    let h = build_adjacency::<f64>(params).map_err(|e| e.to_string())?;
    let base = ExactWalk::new(&h).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for &c in &[-5.0, 1.0, 3.7] {
        let shifted = ExactWalk::new(&diagonal_shift(&h, c)).map_err(|e| e.to_string())?;
        for i in 0..=40 {
            let t = i as f64 * 0.25;
            let a = base.site_probabilities(t).map_err(|e| e.to_string())?;
            let b = shifted.site_probabilities(t).map_err(|e| e.to_string())?;
            worst = worst.max(a.max_abs_diff(&b));
        }
    }
    let star = TreeParams::new(3, 1).map_err(|e| e.to_string())?;
    let adj = ExactWalk::new(&build_adjacency::<f64>(star).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mb = ExactWalk::new(&build_mb_hamiltonian::<f64>(star).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let gap = adj
        .site_probabilities(1.0)
        .map_err(|e| e.to_string())?
        .max_abs_diff(&mb.site_probabilities(1.0).map_err(|e| e.to_string())?);
    check(
        worst <= 1e-12 && gap > 1e-3,
        format!("shift difference {worst:.1e}, adjacency vs MB gap {gap:.3e}"),
    )
}

fn line_quadrature() -> Outcome {
    let amps = InfiniteTreeAmplitudes::<f64>::new(2, 10, 512).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    let mut norm_worst = 0.0f64;
    for i in 0..=80 {
        let t = i as f64 * 0.25;
        let j = bessel_j_sequence(60, 2.0 * t).map_err(|e| e.to_string())?;
        for k in 0..=10 {
            let a = amps.amplitude(k, t).map_err(|e| e.to_string())?;
            let phase = Complex64::i().powu(k as u32);
            let want = if k == 0 { Complex64::new(j[0], 0.0) } else { phase * 2f64.sqrt() * j[k] };
            worst = worst.max((a - want).norm());
        }
        let total = j[0] * j[0] + 2.0 * j[1..].iter().map(|v| v * v).sum::<f64>();
        norm_worst = norm_worst.max((total - 1.0).abs());
    }
    check(
        worst <= 1e-8 && norm_worst <= 1e-10,
        format!("amplitude error {worst:.1e}, normalization {norm_worst:.1e}"),
    )
}

fn finite_to_line() -> Outcome {
    let params = TreeParams::new(2, 60).map_err(|e| e.to_string())?;
    let h = build_adjacency::<f64>(params).map_err(|e| e.to_string())?;
    let strat = stratum_sizes(params).map_err(|e| e.to_string())?;
    let walk = ExactWalk::new(&h).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for i in 0..=100 {
        let t = i as f64 * 0.1;
        let probs = walk.stratum_probabilities(t, &strat).map_err(|e| e.to_string())?;
        let j = bessel_j_sequence(25, 2.0 * t).map_err(|e| e.to_string())?;
        for k in 0..=25 {
            let want = if k == 0 { j[0] * j[0] } else { 2.0 * j[k] * j[k] };
            worst = worst.max((probs.probs[k] - want).abs());
        }
    }
    check(worst <= 1e-8, format!("max difference {worst:.1e}"))
}

fn quantum_clt() -> Outcome {
    let start = Instant::now();
    let times = [0.5, 1.0, 2.0, 5.0, 10.0];
    let mut semi = 0.0f64;
    for k in 0..=8 {
        for &t in &times {
            let a = semicircle_amplitude(k, t, 512).map_err(|e| e.to_string())?;
            let b = qclt_amplitude(k, t).map_err(|e| e.to_string())?;
            semi = semi.max((a - b).norm());
        }
    }
    let ladder = [16usize, 64, 256, 1024];
    let tables: Vec<InfiniteTreeAmplitudes<f64>> = ladder
        .iter()
        .map(|&p| InfiniteTreeAmplitudes::new(p, 5, 512))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut violations = Vec::new();
    let mut last_worst = 0.0f64;
    for k in 0..=5 {
        for &t in &times {
            let limit = qclt_amplitude(k, t).map_err(|e| e.to_string())?;
            let errs: Vec<f64> = ladder
                .iter()
                .zip(&tables)
                .map(|(&p, tab)| tab.amplitude(k, t / (p as f64).sqrt()).map(|a| (a - limit).norm()))
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            if errs.windows(2).any(|w| w[1] > w[0] + 1e-12) {
                violations.push(format!("k={k} t={t} {}", sci(&errs)));
            }
            last_worst = last_worst.max(errs[3]);
        }
    }
    let detail = format!(
        "semicircle {semi:.1e}, p=1024 error {last_worst:.2e}, ladder violations {}",
        if violations.is_empty() { "none".to_string() } else { violations.join("; ") }
    );
    if semi > 1e-8 || last_worst >= 1e-2 || !violations.is_empty() {
        return Err(detail);
    }
    budget(start.elapsed(), 60.0, detail)
}

fn y_normalization() -> Outcome {
    let mut worst = 0.0f64;
    for &t in &[0.5, 1.0, 5.0, 20.0, 100.0, 200.0] {
        let law = YWalkDistribution::<f64>::new(t).map_err(|e| e.to_string())?;
        worst = worst.max((law.total() - 1.0).abs());
    }
    check(worst <= 1e-10, format!("max |mass - 1| {worst:.1e}"))
}

fn charfn_closed_form() -> Outcome {
    let mut worst = 0.0f64;
    let mut at = (0.0, 0.0);
    for &xi in &[0.5, 1.0, 2.0, 5.0] {
        for &t in &[1.0, 10.0, 40.0] {
            let a = y_charfn(xi, t, CharfnMethod::DirectSum).map_err(|e| e.to_string())?;
            let b = y_charfn(xi, t, CharfnMethod::ClosedForm).map_err(|e| e.to_string())?;
            let d = (a - b).norm();
            if d > worst {
                worst = d;
                at = (xi, t);
            }
        }
    }
    check(
        worst <= 1e-8,
        format!("max |direct - closed| {worst:.3e} at xi={}, t={}", at.0, at.1),
    )
}

fn weak_convergence() -> Outcome {
    let grid = default_cdf_grid::<f64>();
    let d: Vec<f64> = [25.0, 50.0, 100.0]
        .iter()
        .map(|&t| y_limit_sup_distance(t, &grid))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let m1 = (z_moment::<f64>(1).map_err(|e| e.to_string())? - 16.0 / (3.0 * PI)).abs();
    let m2 = (z_moment::<f64>(2).map_err(|e| e.to_string())? - 3.0).abs();
    let decreasing = d[0] > d[1] && d[1] > d[2];
    check(
        decreasing && d[2] < 0.05 && m1 <= 1e-9 && m2 <= 1e-9,
        format!(
            "sup-distances {:.4} {:.4} {:.4} (decreasing: {decreasing}, cap 0.05), moment errors {m1:.1e} {m2:.1e}",
            d[0], d[1], d[2]
        ),
    )
}

fn riemann_lebesgue() -> Outcome {
    let mut bad = Vec::new();
    for p in [2, 3] {
        for k in 0..=2 {
            let maxima = windowed_maxima::<f64>(p, k, 2..=7, 4001).map_err(|e| e.to_string())?;
            if maxima.windows(2).any(|w| w[1] >= w[0]) {
                bad.push(format!("p={p} k={k} {}", sci(&maxima)));
            }
        }
    }
    check(bad.is_empty(), if bad.is_empty() { "all windows decreasing".into() } else { bad.join("; ") })
}

fn bessel_identities() -> Outcome {
    let mut rec = 0.0f64;
    let mut norm = 0.0f64;
    for i in 1..=80 {
        let x = i as f64 * 0.5;
        let j = bessel_j_sequence(51, x).map_err(|e| e.to_string())?;
        for n in 1..=50 {
            rec = rec.max((j[n - 1] + j[n + 1] - 2.0 * n as f64 / x * j[n]).abs());
        }
        let kmax = (2.0 * x).ceil() as usize + 40;
        let s = bessel_j_sequence(kmax, x).map_err(|e| e.to_string())?;
        let total = s[0] * s[0] + 2.0 * s[1..].iter().map(|v| v * v).sum::<f64>();
        norm = norm.max((total - 1.0).abs());
    }
    let mut integral = 0.0f64;
    for &s in &[0.1, 1.0, 5.0, 20.0] {
        let f = |x: f64| Complex64::from_polar(1.0, s * x);
        let v0: Complex64 =
            integrate_singular(f, 1.0, SingularWeight::InverseSqrt, 256).map_err(|e| e.to_string())?;
        let v1: Complex64 =
            integrate_singular(f, 1.0, SingularWeight::Sqrt, 256).map_err(|e| e.to_string())?;
        let j0 = bessel_j(0, s).map_err(|e| e.to_string())?;
        let j1 = bessel_j(1, s).map_err(|e| e.to_string())?;
        integral = integral.max((v0 - PI * j0).norm()).max((v1 - PI * j1 / s).norm());
    }
    check(
        rec <= 1e-10 && norm <= 1e-10 && integral <= 1e-9,
        format!("recurrence {rec:.1e}, normalization {norm:.1e}, integral {integral:.1e}"),
    )
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "worked example", worked_example),
        (2, "cross-method equivalence", cross_method),
        (3, "scalar-shift invariance", scalar_shift),
        (4, "line quadrature", line_quadrature),
        (5, "finite tree to line", finite_to_line),
        (6, "quantum central limit", quantum_clt),
        (7, "Y-walk normalization", y_normalization),
        (8, "characteristic function closed form", charfn_closed_form),
        (9, "weak convergence of Y(t)/t", weak_convergence),
        (10, "Riemann-Lebesgue decay", riemann_lebesgue),
        (11, "Bessel identities", bessel_identities),
    ];
    let mut failed = 0;
    for (n, name, run) in criteria {
        match run() {
            Ok(detail) => println!("criterion {n}: PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n}: FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
