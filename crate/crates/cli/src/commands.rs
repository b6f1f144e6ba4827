use std::path::Path;

use anyhow::{anyhow, bail, ensure, Context, Result};
use kerrcat::fock::{self, default_dim, StateVector};
use kerrcat::ion::{self, JointState, PhysicalSchedule, ScheduleMode, TargetSpec, TimingConvention};
use kerrcat::kerr::{self, KerrParams, VarianceCurve};
use kerrcat::wigner::{self, WignerGrid, Window};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::config::Config;
use crate::output::{sibling, write_file, Sink};
use crate::tau::Tau;
use crate::{
    Amplitude, DecomposeArgs, GridFormat, KerrEvolveArgs, ModeArg, QuadraturesArgs, SimulateArgs, SynthArgs,
    TruncationScanArgs, VarianceMethod, WignerGridArgs,
};

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).context("out: serialization failed")?;
    s.push('\n');
    Ok(s)
}

fn read_state(path: &Path, key: &str) -> Result<StateVector> {
    let text = std::fs::read_to_string(path).with_context(|| format!("{key}: cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("{key}: {} is not a state file", path.display()))
}

fn read_normalized_state(path: &Path, key: &str) -> Result<StateVector> {
    let s = read_state(path, key)?;
    ensure!(s.is_normalized(), "{key}: state in {} has norm {} (expected 1)", path.display(), s.norm());
    Ok(s)
}

fn alpha_and_tau(alpha: Option<Amplitude>, tau: Option<Tau>, cfg: &Config) -> Result<(C64, Tau)> {
    let alpha = cfg.require(alpha, "alpha")?.0;
    let tau = cfg.pick_or(tau, "tau", Tau::Float(0.0))?;
    Ok((alpha, tau))
}

fn dim_for(alpha: C64, dim: Option<usize>, cfg: &Config) -> Result<usize> {
    let d = cfg.pick_or(dim, "dim", default_dim(alpha))?;
    ensure!(d > 0, "dim: must be positive");
    Ok(d)
}

/// Kerr state, optionally cut off at level `truncate` and renormalized.
fn kerr_state(alpha: C64, tau: f64, dim: usize, truncate: Option<usize>) -> Result<StateVector> {
    let full = kerr::kerr_evolve(KerrParams::new(alpha, tau), dim).map_err(|e| anyhow!("alpha/tau: {e}"))?;
    match truncate {
        None => Ok(full),
        Some(m) => {
            let (t, report) = fock::truncate(&full, m).map_err(|e| anyhow!("truncate: {e}"))?;
            eprintln!(
                "truncated at M={}: kept probability {:.4}, fidelity to full {:.4}",
                report.cutoff, report.kept_probability, report.fidelity_to_full
            );
            Ok(t)
        }
    }
}

pub fn kerr_evolve(a: &KerrEvolveArgs, cfg: &Config) -> Result<()> {
    let (alpha, tau) = alpha_and_tau(a.alpha, a.tau, cfg)?;
    let dim = dim_for(alpha, a.dim, cfg)?;
    let truncate = cfg.pick(a.truncate, "truncate")?;
    let state = kerr_state(alpha, tau.value(), dim, truncate)?;

    Sink::resolve(cfg.pick(a.out.clone(), "out")?, "state.json").write(&to_json(&state)?)?;

    let mut pops: Vec<(usize, f64)> = state.populations().into_iter().enumerate().collect();
    pops.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    eprintln!("norm {:.4}, dim {}", state.norm(), state.dim());
    for (n, p) in pops.iter().take(5) {
        eprintln!("  P({n}) = {p:.4}");
    }
    Ok(())
}

pub fn quadratures(a: &QuadraturesArgs, cfg: &Config) -> Result<()> {
    let alpha = cfg.require(a.alpha, "alpha")?.0;
    let tau_min = cfg.pick_or(a.tau_min, "tau-min", Tau::Float(0.0))?.value();
    let tau_max = cfg.pick_or(a.tau_max, "tau-max", Tau::PiRational { num: 2, den: 1 })?.value();
    let points = cfg.pick_or(a.points, "points", 100)?;
    ensure!(points > 0, "points: must be positive");
    ensure!(tau_max >= tau_min, "tau-max: must not be below tau-min");
    let method = cfg.pick_or(a.method, "method", VarianceMethod::Numeric)?;
    let curve = match method {
        VarianceMethod::Numeric => {
            let dim = dim_for(alpha, a.dim, cfg)?;
            VarianceCurve::numerical(alpha, tau_min, tau_max, points, dim)
        }
        VarianceMethod::ClosedForm => VarianceCurve::closed_form(alpha, tau_min, tau_max, points),
    }
    .map_err(|e| anyhow!("alpha: {e}"))?;
    Sink::resolve(cfg.pick(a.out.clone(), "out")?, "quadratures.csv").write(&curve.to_csv())?;

    let min1 = curve.rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let min2 = curve.rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min);
    eprintln!("{} points, min var X1 {:.4}, min var X2 {:.4}", curve.rows.len(), min1, min2);
    Ok(())
}

fn parse_window(s: &str) -> Result<Window> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| anyhow!("window: expected x_min,x_max,y_min,y_max, got {s:?}"))?;
    let [x_min, x_max, y_min, y_max] = v[..] else {
        bail!("window: expected four numbers, got {}", v.len());
    };
    Ok(Window { x_min, x_max, y_min, y_max })
}

#[derive(Serialize)]
struct GridJson<'a> {
    integral: f64,
    negativity_volume: Option<f64>,
    #[serde(flatten)]
    grid: &'a WignerGrid,
}

fn grid_stats_line(g: &WignerGrid) -> (String, Option<f64>) {
    let integral = g.integral();
    let neg = wigner::negativity_volume(g).ok();
    let neg_text = neg.map_or_else(|| "unavailable".to_string(), |v| format!("{v:.16e}"));
    (format!("integral={integral:.16e} negativity_volume={neg_text}"), neg)
}

fn render_grid(g: &WignerGrid, format: GridFormat) -> Result<String> {
    let (stats, neg) = grid_stats_line(g);
    Ok(match format {
        GridFormat::Csv => format!("# method {} {stats}\n{}", g.method.label(), g.to_csv()),
        GridFormat::Gnuplot => {
            // Fold the stats into the method line so the header stays three lines.
            let body = g.to_gnuplot();
            let mut lines = body.splitn(4, '\n');
            let (l1, l2, l3, rest) =
                (lines.next().unwrap_or(""), lines.next().unwrap_or(""), lines.next().unwrap_or(""), lines.next().unwrap_or(""));
            format!("{l1}\n{l2}\n{l3} {stats}\n{rest}")
        }
        GridFormat::Json => to_json(&GridJson { integral: g.integral(), negativity_volume: neg, grid: g })?,
    })
}

fn report_grid(g: &WignerGrid) {
    let neg = wigner::negativity_volume(g);
    match neg {
        Ok(v) => eprintln!(
            "{}: {}x{} integral {:.4}, negativity volume {:.4e}, W in [{:.4}, {:.4}]",
            g.method.label(),
            g.nx,
            g.ny,
            g.integral(),
            v,
            g.min(),
            g.max()
        ),
        Err(e) => eprintln!("{}: warning: {e}", g.method.label()),
    }
}

pub fn wigner_grid(a: &WignerGridArgs, cfg: &Config) -> Result<()> {
    let state_path = cfg.pick(a.state.clone(), "state")?;
    let both = cfg.flag(a.both_methods, "both-methods")?;
    let nx = cfg.pick_or(a.nx, "nx", 101)?;
    let ny = cfg.pick_or(a.ny, "ny", 101)?;
    let format = cfg.pick_or(a.format, "format", GridFormat::Csv)?;
    let tol = cfg.pick_or(a.tol, "tol", 1e-12)?;
    let window_text = cfg.pick(a.window.clone(), "window")?;

    let (state, params) = match state_path {
        Some(p) => {
            ensure!(!both, "both-methods: needs alpha/tau, not a state file");
            (read_normalized_state(&p, "state")?, None)
        }
        None => {
            let (alpha, tau) = alpha_and_tau(a.alpha, a.tau, cfg)?;
            let dim = dim_for(alpha, a.dim, cfg)?;
            let truncate = cfg.pick(a.truncate, "truncate")?;
            ensure!(!(both && truncate.is_some()), "both-methods: the series describes the untruncated state; drop truncate");
            (kerr_state(alpha, tau.value(), dim, truncate)?, Some(KerrParams::new(alpha, tau.value())))
        }
    };
    let window = match (&window_text, params) {
        (Some(w), _) => parse_window(w)?,
        (None, Some(p)) => Window::auto(p.alpha),
        (None, None) => {
            let mean = state.amps().windows(2).enumerate().map(|(n, w)| w[0].conj() * w[1] * ((n + 1) as f64).sqrt()).sum::<C64>();
            Window::auto(mean)
        }
    };

    let grid = wigner::wigner_grid(&state, window, nx, ny).map_err(|e| anyhow!("window: {e}"))?;
    let sink = Sink::resolve(cfg.pick(a.out.clone(), "out")?, &format!("wigner.{}", extension(format)));
    sink.write(&render_grid(&grid, format)?)?;
    report_grid(&grid);

    if let Some(p) = params.filter(|_| both) {
        let series = wigner::wigner_grid_kerr_series(p, window, nx, ny, tol).map_err(|e| anyhow!("tol: {e}"))?;
        let diff = grid.max_abs_diff(&series).expect("same shape");
        match sink.path() {
            Some(path) => write_file(&sibling(path, ".series"), &render_grid(&series, format)?)?,
            None => eprintln!("series grid not written: pass --out to keep it"),
        }
        report_grid(&series);
        eprintln!("max |W_fock - W_series| = {diff:.4e}");
    }
    Ok(())
}

fn extension(format: GridFormat) -> &'static str {
    match format {
        GridFormat::Csv => "csv",
        GridFormat::Json => "json",
        GridFormat::Gnuplot => "dat",
    }
}

pub fn decompose(a: &DecomposeArgs, cfg: &Config) -> Result<()> {
    let alpha = cfg.require(a.alpha, "alpha")?.0;
    let tau: Tau = cfg.require(a.tau, "tau")?;
    let fraction = tau.revival_fraction()?;
    let format = cfg.pick_or(a.format, "format", GridFormat::Csv)?;
    let sup = kerr::revival_decompose(alpha, fraction).map_err(|e| anyhow!("tau: {e}"))?;
    let payload = match format {
        GridFormat::Csv => sup.to_csv(),
        GridFormat::Json => to_json(&sup)?,
        GridFormat::Gnuplot => bail!("format: decompose writes csv or json"),
    };
    Sink::resolve(cfg.pick(a.out.clone(), "out")?, &format!("superposition.{}", extension(format))).write(&payload)?;

    let dim = default_dim(alpha);
    let direct = kerr::kerr_evolve(KerrParams::new(alpha, fraction.tau()), dim).map_err(|e| anyhow!("alpha: {e}"))?;
    let rebuilt = kerr::reconstruct_superposition(&sup, dim).map_err(|e| anyhow!("alpha: {e}"))?;
    let f = fock::fidelity(&direct, &rebuilt.state).map_err(|e| anyhow!("dim: {e}"))?;
    eprintln!("{} coherent terms at tau = {}; reconstruction fidelity {:.4}", sup.terms.len(), tau, f);
    for t in &sup.terms {
        eprintln!("  angle {:.4}  coeff {:+.4} {:+.4}i", t.angle, t.coefficient.re, t.coefficient.im);
    }
    Ok(())
}

fn parse_alpha_list(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect::<Option<_>>()
        .ok_or_else(|| anyhow!("alphas: expected comma-separated numbers, got {s:?}"))?;
    ensure!(!v.is_empty(), "alphas: empty list");
    Ok(v)
}

pub fn truncation_scan(a: &TruncationScanArgs, cfg: &Config) -> Result<()> {
    let alphas = parse_alpha_list(&cfg.require(a.alphas.clone(), "alphas")?)?;
    let m_min = cfg.pick_or(a.m_min, "m-min", 0)?;
    let m_max = cfg.require(a.m_max, "m-max")?;
    ensure!(m_max >= m_min, "m-max: empty range {m_min}..={m_max}");
    let threshold = cfg.pick_or(a.threshold, "threshold", 0.999)?;
    ensure!(threshold > 0.0 && threshold < 1.0, "threshold: must lie in (0, 1)");

    let mut csv = String::from("alpha,M,kept_probability,fidelity_to_full\n");
    let mut summary = Vec::new();
    for &alpha in &alphas {
        let z = C64::new(alpha, 0.0);
        let full = StateVector::coherent(z, default_dim(z).max(m_max + 1)).map_err(|e| anyhow!("alphas: {e}"))?;
        let mut first = None;
        for m in m_min..=m_max {
            let (_, r) = fock::truncate(&full, m).map_err(|e| anyhow!("m-max: {e}"))?;
            csv.push_str(&format!("{alpha:.16e},{m},{:.16e},{:.16e}\n", r.kept_probability, r.fidelity_to_full));
            if first.is_none() && r.kept_probability > threshold {
                first = Some(m);
            }
        }
        summary.push((alpha, first));
    }
    Sink::resolve(cfg.pick(a.out.clone(), "out")?, "truncation.csv").write(&csv)?;
    for (alpha, first) in summary {
        match first {
            Some(m) => eprintln!("alpha {alpha:.4}: smallest M with kept probability > {threshold} is {m}"),
            None => eprintln!("alpha {alpha:.4}: threshold {threshold} not reached by M = {m_max}"),
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SynthReport {
    fidelity: f64,
    pulse_count: usize,
    excited_leakage: f64,
    leakage_above_top: f64,
    max_amplitude_error: f64,
    global_phase: [f64; 2],
}

pub fn synth(a: &SynthArgs, cfg: &Config) -> Result<()> {
    let eta = cfg.pick_or(a.eta, "eta", 0.02)?;
    let mode = match cfg.pick_or(a.mode, "mode", ModeArg::FixedRabi)? {
        ModeArg::FixedRabi => ScheduleMode::FixedRabi,
        ModeArg::FixedDuration => ScheduleMode::FixedDuration,
    };
    let carrier = cfg.pick_or(a.carrier_rabi, "carrier-rabi", 1e6)?;
    let red = cfg.pick_or(a.red_rabi, "red-rabi", 1e5)?;
    let duration = cfg.pick_or(a.duration, "duration", 1e-6)?;
    let factor = cfg.pick_or(a.convention_factor, "convention-factor", 1)?;
    ensure!(factor == 1 || factor == 2, "convention-factor: must be 1 or 2, got {factor}");

    let target = match cfg.pick(a.state.clone(), "state")? {
        Some(p) => {
            let s = read_normalized_state(&p, "state")?;
            TargetSpec::new(s.into_amps()).map_err(|e| anyhow!("state: {e}"))?
        }
        None => {
            let (alpha, tau) = alpha_and_tau(a.alpha, a.tau, cfg)?;
            let m = cfg.pick_or(a.m, "m", 10)?;
            TargetSpec::truncated_kerr(KerrParams::new(alpha, tau.value()), m).map_err(|e| anyhow!("m: {e}"))?
        }
    };

    let syn = ion::synthesize(&target, eta).map_err(|e| anyhow!("eta: {e}"))?;
    let schedule = PhysicalSchedule::new(
        &syn.pulses,
        mode,
        carrier,
        red,
        duration,
        eta,
        TimingConvention { factor: factor as f64 },
        syn.global_phase,
    )
    .map_err(|e| anyhow!("mode: {e}"))?;

    let top = syn.top_level;
    let final_state = schedule.simulate_from_ground(top + 5).map_err(|e| anyhow!("eta: {e}"))?;
    let mut amps = vec![C64::new(0.0, 0.0); top + 5];
    for (slot, c) in amps.iter_mut().zip(target.coeffs()) {
        *slot = *c;
    }
    let wanted = StateVector::from_amps(amps)?;
    let max_err = wanted
        .amps()
        .iter()
        .zip(final_state.ground_amps())
        .map(|(w, g)| (w - g).norm())
        .fold(0.0, f64::max);
    let report = SynthReport {
        fidelity: final_state.fidelity_with(&wanted),
        pulse_count: schedule.pulses.len(),
        excited_leakage: final_state.excited_population(),
        leakage_above_top: final_state.leakage_above(top),
        max_amplitude_error: max_err,
        global_phase: schedule.header.global_phase,
    };

    let path = Sink::resolve_file(cfg.pick(a.out.clone(), "out")?, "schedule.json");
    write_file(&path, &to_json(&schedule)?)?;
    write_file(&sibling(&path, ".table").with_extension("txt"), &schedule.to_table())?;
    write_file(&sibling(&path, ".report"), &to_json(&report)?)?;

    eprintln!(
        "{} pulses to level {top}; fidelity {:.4} (1 - {:.1e}), excited leakage {:.1e}; wrote {}",
        report.pulse_count,
        report.fidelity,
        1.0 - report.fidelity,
        report.excited_leakage,
        path.display()
    );
    Ok(())
}

pub fn simulate(a: &SimulateArgs, cfg: &Config) -> Result<()> {
    let path = cfg.require(a.schedule.clone(), "schedule")?;
    let text = std::fs::read_to_string(&path).with_context(|| format!("schedule: cannot read {}", path.display()))?;
    let schedule: PhysicalSchedule =
        serde_json::from_str(&text).with_context(|| format!("schedule: {} is not a schedule file", path.display()))?;
    let top = schedule.top_level();
    let dim = cfg.pick_or(a.dim, "dim", top + 5)?;
    let joint: JointState = schedule.simulate_from_ground(dim).map_err(|e| anyhow!("dim: {e}"))?;
    let ground = joint.motional_ground();
    Sink::resolve(cfg.pick(a.out.clone(), "out")?, "simulated.json").write(&to_json(&ground)?)?;

    eprintln!(
        "{} pulses, dim {dim}: ground norm {:.4}, excited population {:.1e}",
        schedule.pulses.len(),
        ground.norm(),
        joint.excited_population()
    );
    if let Some(t) = cfg.pick(a.target.clone(), "target")? {
        let target = read_normalized_state(&t, "target")?;
        // Levels beyond the simulation space count as missing overlap.
        let f = joint.fidelity_with(&target);
        eprintln!("fidelity to target {f:.4} (1 - {:.1e})", 1.0 - f);
    }
    Ok(())
}
