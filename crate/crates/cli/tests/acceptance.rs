//! End-to-end acceptance checks. Runs without the libtest harness so that
//! every criterion prints exactly one PASS/FAIL line, even on success.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use kerrcat::fock::{self, default_dim, StateVector};
use kerrcat::ion::{self, JointState, PhysicalSchedule, ScheduleMode, TargetSpec, TimingConvention};
use kerrcat::kerr::{self, CoherentSuperposition, KerrParams, RevivalFraction, SuperpositionTerm, VarianceCurve};
use kerrcat::wigner::{self, PhaseSpacePoint, WignerGrid, Window};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn cis(phi: f64) -> C64 {
    C64::from_polar(1.0, phi)
}

/// Best of a few runs, to keep one-off scheduler hiccups out of the timing.
fn best_time<T>(runs: usize, mut f: impl FnMut() -> T) -> (T, Duration) {
    let mut best = Duration::MAX;
    let mut last = None;
    for _ in 0..runs {
        let t0 = Instant::now();
        let v = f();
        best = best.min(t0.elapsed());
        last = Some(v);
    }
    (last.expect("at least one run"), best)
}

fn criterion_01_full_revival() -> Outcome {
    let (f, elapsed) = best_time(20, || {
        let p = KerrParams::new(re(2.0), TAU);
        let dim = p.default_dim();
        let evolved = kerr::kerr_evolve(p, dim).unwrap();
        fock::fidelity(&evolved, &StateVector::coherent(re(2.0), dim).unwrap()).unwrap()
    });
    check((f - 1.0).abs() <= 1e-12, || format!("fidelity {f:.17}"))?;
    check(elapsed < Duration::from_millis(1), || format!("took {elapsed:?}"))?;
    Ok(format!("|1 - F| = {:.1e}, {elapsed:?}", (f - 1.0).abs()))
}

/// Coefficients and angles exactly as printed for the five kittens.
fn printed_kittens() -> Vec<(RevivalFraction, CoherentSuperposition)> {
    let sup = |terms: Vec<(f64, C64)>| CoherentSuperposition {
        alpha: re(2.0),
        terms: terms.into_iter().map(|(angle, coefficient)| SuperpositionTerm { coefficient, angle }).collect(),
    };
    let one = re(1.0);
    let i = C64::i();

    let six = {
        let c1 = (2.0 * one + 2.0 * i + cis(-PI / 6.0) + cis(-2.0 * PI / 3.0)) / 6.0;
        let c2 = (2.0 * one - 2.0 * i + cis(5.0 * PI / 6.0) + cis(-2.0 * PI / 3.0)) / 6.0;
        let c3 = (one + i + 2.0 * cis(-5.0 * PI / 6.0) + 2.0 * cis(2.0 * PI / 3.0)) / 6.0;
        let c4 = (one - i + 2.0 * cis(PI / 6.0) + 2.0 * cis(2.0 * PI / 3.0)) / 6.0;
        let a = |k: f64| k * PI / 6.0;
        sup(vec![(a(1.0), c1), (a(3.0), c2), (a(5.0), c3), (a(7.0), c2), (a(9.0), c1), (a(11.0), c4)])
    };
    let five = {
        let c1 = (2.0 + 2.0 * cis(2.0 * PI / 5.0) + cis(-4.0 * PI / 5.0)) / 5.0;
        let c2 = (2.0 + 2.0 * cis(-2.0 * PI / 5.0) + cis(4.0 * PI / 5.0)) / 5.0;
        let c3 = (1.0 + 2.0 * cis(4.0 * PI / 5.0) + 2.0 * cis(-4.0 * PI / 5.0)) / 5.0;
        let a = |k: f64| k * TAU / 5.0;
        sup(vec![(a(0.0), c1), (a(1.0), c2), (a(2.0), c3), (a(3.0), c2), (a(4.0), c1)])
    };
    let four = {
        let c1 = (2.0 + cis(-PI / 4.0) + cis(3.0 * PI / 4.0)) / 4.0;
        let c2 = 0.5 * cis(-3.0 * PI / 4.0);
        let a = |k: f64| k * PI / 4.0;
        sup(vec![(a(1.0), c1), (a(3.0), c2), (a(5.0), c1), (a(7.0), -c2)])
    };
    let three = {
        let c1 = (2.0 + cis(2.0 * PI / 3.0)) / 3.0;
        let c2 = (1.0 + 2.0 * cis(-2.0 * PI / 3.0)) / 3.0;
        sup(vec![(0.0, c1), (TAU / 3.0, c2), (2.0 * TAU / 3.0, c1)])
    };
    let two = sup(vec![(FRAC_PI_2, C64::new(0.5, -0.5)), (1.5 * PI, C64::new(0.5, 0.5))]);

    let frac = |n, d| RevivalFraction::new(n, d).unwrap();
    vec![(frac(1, 6), six), (frac(1, 5), five), (frac(1, 4), four), (frac(1, 3), three), (frac(1, 2), two)]
}

fn criterion_02_golden_kittens() -> Outcome {
    let t0 = Instant::now();
    let mut worst_fid: f64 = 0.0;
    let mut worst_coeff: f64 = 0.0;
    for (frac, printed) in printed_kittens() {
        let direct = kerr::kerr_evolve(KerrParams::new(re(2.0), frac.tau()), 40).unwrap();
        let rebuilt = kerr::reconstruct_superposition(&printed, 40).unwrap();
        let f = fock::fidelity(&direct, &rebuilt.state).unwrap();
        worst_fid = worst_fid.max(1.0 - f);
        check(f >= 1.0 - 1e-9, || format!("tau = {}: fidelity {f}", frac.tau()))?;

        let found = kerr::revival_decompose(re(2.0), frac).map_err(|e| e.to_string())?;
        check(found.terms.len() == printed.terms.len(), || {
            format!("tau = {}: {} terms, expected {}", frac.tau(), found.terms.len(), printed.terms.len())
        })?;
        // Align the global phase on the largest printed coefficient.
        let (k, _) = printed
            .terms
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.coefficient.norm().total_cmp(&b.1.coefficient.norm()))
            .unwrap();
        let phase = printed.terms[k].coefficient / found.terms[k].coefficient;
        let phase = phase / phase.norm();
        for (p, q) in printed.terms.iter().zip(&found.terms) {
            check((p.angle - q.angle).abs() < 1e-12, || format!("angle {} vs {}", p.angle, q.angle))?;
            let d = q.coefficient * phase - p.coefficient;
            let dev = d.re.abs().max(d.im.abs());
            worst_coeff = worst_coeff.max(dev);
            check(dev <= 1e-8, || format!("tau = {}: coefficient off by {dev:e}", frac.tau()))?;
        }
    }
    let elapsed = t0.elapsed();
    check(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("worst 1 - F = {worst_fid:.1e}, worst coefficient deviation {worst_coeff:.1e}, {elapsed:?}"))
}

fn criterion_03_quadrature_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut at_zero: f64 = 0.0;
    for alpha in [0.5, 1.0, 2.0] {
        let z = re(alpha);
        let num = VarianceCurve::numerical(z, 0.0, TAU, 100, default_dim(z)).unwrap();
        let closed = VarianceCurve::closed_form(z, 0.0, TAU, 100).unwrap();
        for (a, b) in num.rows.iter().zip(&closed.rows) {
            worst = worst.max((a.1 - b.1).abs()).max((a.2 - b.2).abs());
        }
        for row in [num.rows[0], closed.rows[0]] {
            at_zero = at_zero.max((row.1 - 1.0).abs()).max((row.2 - 1.0).abs());
        }
    }
    check(worst < 1e-8, || format!("max deviation {worst:e}"))?;
    check(at_zero <= 1e-10, || format!("tau = 0 variance off by {at_zero:e}"))?;
    Ok(format!("max |closed - numeric| = {worst:.1e}, |var(tau=0) - 1| = {at_zero:.1e}"))
}

fn figure_pairs() -> [(f64, f64); 7] {
    [(5.0, 0.01), (5.0, 0.08), (2.0, PI / 3.0), (2.0, 2.0 * PI / 5.0), (2.0, FRAC_PI_2), (2.0, 2.0 * PI / 3.0), (2.0, PI)]
}

fn criterion_04_wigner_dual_method() -> Outcome {
    let t0 = Instant::now();
    let fixed = Window::square(3.5);
    let mut worst_diff: f64 = 0.0;
    let mut worst_integral: f64 = 0.0;
    let mut worst_parity: f64 = 0.0;
    for (alpha, tau) in figure_pairs() {
        let p = KerrParams::new(re(alpha), tau);
        let state = kerr::kerr_evolve(p, p.default_dim()).unwrap();
        let fg = wigner::wigner_grid(&state, fixed, 21, 21).unwrap();
        let sg = wigner::wigner_grid_kerr_series(p, fixed, 21, 21, 1e-12).map_err(|e| e.to_string())?;
        let d = fg.max_abs_diff(&sg).unwrap();
        worst_diff = worst_diff.max(d);
        check(d < 1e-7, || format!("alpha {alpha}, tau {tau}: max diff {d:e}"))?;
        // alpha = 5 lies mostly outside [-3.5, 3.5]^2, so its normalization is
        // checked on the window that contains it.
        let integral_grid = if alpha > 3.5 {
            wigner::wigner_grid(&state, Window::auto(re(alpha)), 121, 121).unwrap()
        } else {
            fg
        };
        let dev = (integral_grid.integral() - 1.0).abs();
        worst_integral = worst_integral.max(dev);
        check(dev <= 5e-3, || format!("alpha {alpha}, tau {tau}: integral {}", integral_grid.integral()))?;

        let origin = PhaseSpacePoint::new(0.0, 0.0);
        let expected = 2.0 / PI * fock::parity_expectation(&state);
        let w_fock = wigner::wigner_fock(&state, origin);
        let w_series = wigner::wigner_kerr_series(p, origin, 1e-12).map_err(|e| e.to_string())?;
        let dev = (w_fock - expected).abs().max((w_series - expected).abs());
        worst_parity = worst_parity.max(dev);
        check(dev <= 1e-10, || format!("alpha {alpha}, tau {tau}: parity identity off by {dev:e}"))?;
    }
    let elapsed = t0.elapsed();
    check(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "max diff {worst_diff:.1e}, worst |integral - 1| {worst_integral:.1e}, parity {worst_parity:.1e}, {elapsed:?}"
    ))
}

/// Negativity volumes on the auto window at 121 x 121, D = 85, recorded on
/// the first verified run.
const NEGATIVITY_BASELINE_SQUEEZED: f64 = 9.524475325024148e-10;
const NEGATIVITY_BASELINE_BANANA: f64 = 3.777253113103118e-1;

fn negativity_at(tau: f64) -> f64 {
    let alpha = re(5.0);
    let state = kerr::kerr_evolve(KerrParams::new(alpha, tau), 85).unwrap();
    let g = wigner::wigner_grid(&state, Window::auto(alpha), 121, 121).unwrap();
    wigner::negativity_volume(&g).unwrap()
}

fn matches_baseline(value: f64, baseline: f64) -> bool {
    (value - baseline).abs() <= 1e-9 + 1e-6 * baseline.abs()
}

fn criterion_05_negativity() -> Outcome {
    let squeezed = negativity_at(0.01);
    let banana = negativity_at(0.08);
    check(squeezed < 1e-4, || format!("tau = 0.01 negativity {squeezed:e}"))?;
    check(banana > 1e-3, || format!("tau = 0.08 negativity {banana:e}"))?;
    check(matches_baseline(squeezed, NEGATIVITY_BASELINE_SQUEEZED), || format!("{squeezed:e} drifted from baseline"))?;
    check(matches_baseline(banana, NEGATIVITY_BASELINE_BANANA), || format!("{banana:e} drifted from baseline"))?;
    Ok(format!("negativity {squeezed:.16e} at tau 0.01, {banana:.16e} at tau 0.08"))
}

/// `sum_{n <= m} e^{-mean} mean^n / n!` by straightforward accumulation.
fn poisson_cdf(mean: f64, m: usize) -> f64 {
    let mut term = (-mean).exp();
    let mut sum = term;
    for n in 1..=m {
        term *= mean / n as f64;
        sum += term;
    }
    sum
}

/// Max-abs grid differences against M = 30 on the auto window at 101 x 101.
const TRUNCATION_BASELINE_M10: f64 = 2.8808074582860846e-2;
const TRUNCATION_BASELINE_M5: f64 = 3.191669111225931e-1;

fn criterion_06_truncation() -> Outcome {
    let p = KerrParams::new(re(2.0), FRAC_PI_2);
    let full = kerr::kerr_evolve(p, 60).unwrap();
    let (_, report) = fock::truncate(&full, 10).unwrap();
    let oracle = poisson_cdf(4.0, 10) / poisson_cdf(4.0, 59);
    check((report.kept_probability - oracle).abs() < 1e-13, || {
        format!("kept {} vs Poisson {}", report.kept_probability, oracle)
    })?;

    let window = Window::auto(p.alpha);
    let grid_at = |m: usize| -> WignerGrid {
        let (s, _) = fock::truncate(&full, m).unwrap();
        wigner::wigner_grid(&s, window, 101, 101).unwrap()
    };
    let g30 = grid_at(30);
    let d10 = grid_at(10).max_abs_diff(&g30).unwrap();
    let d5 = grid_at(5).max_abs_diff(&g30).unwrap();
    check(10.0 * d10 <= d5, || format!("M=10 diff {d10:e} vs M=5 diff {d5:e}"))?;
    check(matches_baseline(d10, TRUNCATION_BASELINE_M10), || format!("{d10:e} drifted from baseline"))?;
    check(matches_baseline(d5, TRUNCATION_BASELINE_M5), || format!("{d5:e} drifted from baseline"))?;
    Ok(format!("kept(M=10) = {:.12}, grid diff M=10 {d10:.16e}, M=5 {d5:.16e}", report.kept_probability))
}

/// Synthesizes, simulates from `u |0,g>` and returns (pulses, 1 - fidelity, excited population).
fn round_trip(target: &TargetSpec, eta: f64) -> Result<(usize, f64, f64), String> {
    let syn = ion::synthesize(target, eta).map_err(|e| e.to_string())?;
    let dim = syn.top_level + 5;
    let init = JointState::ground(dim).unwrap().scaled(syn.global_phase);
    let end = ion::simulate_pulses(&syn.pulses, &init, eta).map_err(|e| e.to_string())?;
    Ok((syn.pulses.len(), 1.0 - end.fidelity_with(&target.as_state()), end.excited_population()))
}

fn criterion_07_synthesis_round_trip() -> Outcome {
    let t0 = Instant::now();
    let target = TargetSpec::truncated_kerr(KerrParams::new(re(2.0), FRAC_PI_2), 10).unwrap();
    let (count, loss, leak) = round_trip(&target, 0.02)?;
    check(count == 20, || format!("{count} pulses"))?;
    check(loss <= 1e-9, || format!("1 - F = {loss:e}"))?;
    check(leak < 1e-12, || format!("excited leakage {leak:e}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_loss, mut worst_leak) = (loss, leak);
    for trial in 0..50 {
        let m = rng.random_range(1..=12usize);
        let raw: Vec<C64> = (0..=m).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let norm = raw.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let target = TargetSpec::new(raw.iter().map(|c| c / norm).collect()).unwrap();
        let (_, loss, leak) = round_trip(&target, 0.02)?;
        check(loss <= 1e-9 && leak < 1e-12, || format!("random target {trial} (M={m}): 1 - F = {loss:e}, leak {leak:e}"))?;
        worst_loss = worst_loss.max(loss);
        worst_leak = worst_leak.max(leak);
    }
    let elapsed = t0.elapsed();
    check(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("20 pulses; over 51 targets worst 1 - F = {worst_loss:.1e}, worst leakage {worst_leak:.1e}, {elapsed:?}"))
}

fn criterion_08_mode_equivalence() -> Outcome {
    let target = TargetSpec::truncated_kerr(KerrParams::new(re(2.0), FRAC_PI_2), 10).unwrap();
    let syn = ion::synthesize(&target, 0.02).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for factor in [1.0, 2.0] {
        let conv = TimingConvention { factor };
        let build = |mode| {
            PhysicalSchedule::new(&syn.pulses, mode, 1e6, 1e5, 1e-6, 0.02, conv, syn.global_phase).unwrap()
        };
        let rabi = build(ScheduleMode::FixedRabi);
        let dur = build(ScheduleMode::FixedDuration);
        let phases = |s: &PhysicalSchedule| s.pulses.iter().map(|p| p.phase_rad.to_bits()).collect::<Vec<_>>();
        check(phases(&rabi) == phases(&dur), || "phase columns differ".into())?;
        let fid = |s: &PhysicalSchedule| s.simulate_from_ground(15).unwrap().fidelity_with(&target.as_state());
        let d = (fid(&rabi) - fid(&dur)).abs();
        worst = worst.max(d);
        check(d < 1e-12, || format!("factor {factor}: fidelity difference {d:e}"))?;
    }
    Ok(format!("identical phases, max fidelity difference {worst:.1e}"))
}

fn run_cli(args: &[&str], config: &Path, out_dir: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_kerrcat"))
        .args(args)
        .arg("--config")
        .arg(config)
        .env("KERRCAT_OUT_DIR", out_dir)
        .output()
        .map_err(|e| e.to_string())?;
    check(out.status.success(), || format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)))
}

fn criterion_09_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = tmp.path().join("run.conf");
    std::fs::write(&config, "alpha = 2\ntau = 1/2 pi\nnx = 31\nny = 31\nm = 10\nalphas = 1,2,5\nm-max = 40\npoints = 50\n")
        .map_err(|e| e.to_string())?;
    let commands: [&[&str]; 8] = [
        &["kerr-evolve"],
        &["quadratures"],
        &["wigner-grid", "--both-methods", "--format", "json"],
        &["wigner-grid", "--format", "gnuplot"],
        &["decompose"],
        &["truncation-scan"],
        &["synth"],
        &["synth", "--mode", "fixed-duration", "--out"],
    ];
    let mut files = 0;
    let dirs = [tmp.path().join("a"), tmp.path().join("b")];
    for dir in &dirs {
        for cmd in commands {
            let mut args: Vec<String> = cmd.iter().map(|s| s.to_string()).collect();
            if args.last().map(String::as_str) == Some("--out") {
                args.push(dir.join("duration.json").display().to_string());
            }
            let refs: Vec<&str> = args.iter().map(String::as_str).collect();
            run_cli(&refs, &config, dir)?;
        }
        let schedule = dir.join("schedule.json").display().to_string();
        run_cli(&["simulate", "--schedule", &schedule], &config, dir)?;
    }
    let mut names: Vec<_> = std::fs::read_dir(&dirs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    for name in &names {
        let a = std::fs::read(dirs[0].join(name)).unwrap();
        let b = std::fs::read(dirs[1].join(name)).map_err(|_| format!("{name:?} missing in second run"))?;
        check(a == b, || format!("{name:?} differs between runs"))?;
        files += 1;
    }
    check(files >= 10, || format!("only {files} files produced"))?;
    Ok(format!("{files} payload files byte-identical across two runs"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("criterion_01_full_revival", criterion_01_full_revival),
        ("criterion_02_golden_kittens", criterion_02_golden_kittens),
        ("criterion_03_quadrature_oracle", criterion_03_quadrature_oracle),
        ("criterion_04_wigner_dual_method", criterion_04_wigner_dual_method),
        ("criterion_05_negativity", criterion_05_negativity),
        ("criterion_06_truncation", criterion_06_truncation),
        ("criterion_07_synthesis_round_trip", criterion_07_synthesis_round_trip),
        ("criterion_08_mode_equivalence", criterion_08_mode_equivalence),
        ("criterion_09_determinism", criterion_09_determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
