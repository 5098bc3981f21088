use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, Context};
use zeno_steer::bounds::{epsilon, required_measurement_rate, steps_for_rate, success_bound, BoundInputs};
use zeno_steer::ergodic::{analytic_phase_sum, lemma1_limit, phase_power_sum, AnalyticWeight, ConvergenceFit};
use zeno_steer::measure::{run_measurement_study, MeasureError, MonteCarloConfig};
use zeno_steer::pulse::{run_pulse_study, PulseError};
use zeno_steer::scenario::{parse_scenario, Mode, SteeringScenario};
use zeno_steer::verify::{run_suite, SuiteConfig};

use crate::format::{csv_float, csv_opt, significant};
use crate::manifest::{sha256_hex, write_outputs, Input};
use crate::Failure;

/// Digest list shipped with a scenario corpus, in `sha256sum` format.
pub const DIGEST_FILE: &str = "SHA256SUMS";

fn load(path: &Path) -> anyhow::Result<(Vec<u8>, SteeringScenario)> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let text = std::str::from_utf8(&bytes).with_context(|| format!("{} is not UTF-8", path.display()))?;
    let scenario = parse_scenario(text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    Ok((bytes, scenario))
}

pub fn steer_measure(
    argv: &[String],
    path: &Path,
    steps: &[u64],
    traj: Option<u64>,
    seed: u64,
    out: &Path,
) -> Result<(), Failure> {
    let (bytes, scenario) = load(path)?;
    if scenario.mode() != Mode::Measure {
        return Err(anyhow!("{}: mode must be \"measure\" for steer-measure", path.display()).into());
    }
    let mc = traj.map(|n_traj| MonteCarloConfig { n_traj, seed });
    let rows = run_measurement_study(&scenario, steps, mc).map_err(|e| match e {
        MeasureError::Invariant { .. } => Failure::Invariant(e.to_string()),
        other => Failure::Input(anyhow!(other)),
    })?;
    let mut csv = String::from("N,p_all,p_final,epsilon,bound,mc_estimate,mc_stderr,seed\n");
    for r in &rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{}",
            r.n_steps,
            csv_float(r.p_all_success),
            csv_float(r.p_final_in_target),
            csv_float(r.epsilon),
            csv_float(r.bound),
            csv_opt(r.mc_estimate),
            csv_opt(r.mc_stderr),
            r.seed
        );
    }
    write_outputs(argv, Some(Input { path, bytes: &bytes }), Some(seed), out, &csv)?;
    Ok(())
}

fn fit_line(label: &str, fit: Option<&ConvergenceFit>) -> String {
    match fit {
        Some(f) => format!(
            "# {label}: slope={},intercept={},r_squared={}\n",
            csv_float(f.slope),
            csv_float(f.intercept),
            csv_float(f.r_squared)
        ),
        None => format!("# {label}: none (values at roundoff)\n"),
    }
}

pub fn steer_pulse(argv: &[String], path: &Path, steps: &[u64], out: &Path) -> Result<(), Failure> {
    let (bytes, scenario) = load(path)?;
    let study = run_pulse_study(&scenario, steps).map_err(|e| match e {
        PulseError::Invariant { .. } => Failure::Invariant(e.to_string()),
        other => Failure::Input(anyhow!("{}: {other}", path.display())),
    })?;
    let mut csv = String::from("N,weight,one_minus_weight,residual_norm,m,min_phase_gap\n");
    for r in &study.rows {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.n_steps,
            csv_float(r.weight),
            csv_float(r.one_minus_weight),
            csv_float(r.residual_norm),
            r.m,
            csv_float(r.min_phase_gap)
        );
    }
    csv.push_str(&fit_line("fit one_minus_weight", study.weight_fit.as_ref()));
    csv.push_str(&fit_line("fit residual_norm", study.residual_fit.as_ref()));
    if study.non_analytic {
        csv.push_str("# non-analytic schedule: fits are not covered by the convergence rate\n");
    }
    write_outputs(argv, Some(Input { path, bytes: &bytes }), None, out, &csv)?;
    Ok(())
}

pub fn bounds(delta: f64, k_norm: f64, h_norm: f64, tau: f64) -> Result<(), Failure> {
    let rate = required_measurement_rate(delta, k_norm, h_norm, tau).map_err(|e| anyhow!(e))?;
    let n = steps_for_rate(rate, tau);
    let eps = epsilon(&BoundInputs::new(k_norm, h_norm, tau, n).map_err(|e| anyhow!(e))?);
    let excess = eps * eps.exp();
    println!("lambda = {}", significant(rate, 12));
    println!("N = {n}");
    println!("epsilon(N) = {}", significant(eps, 12));
    println!("success bound = {}", significant(success_bound(eps), 12));
    if excess <= delta + 1e-9 {
        println!("round trip: epsilon * exp(epsilon) = {} <= delta = {}", significant(excess, 12), significant(delta, 12));
        Ok(())
    } else {
        Err(Failure::Invariant(format!(
            "epsilon * exp(epsilon) = {} exceeds delta = {}",
            significant(excess, 12),
            significant(delta, 12)
        )))
    }
}

pub fn ergodic(
    argv: &[String],
    phi: f64,
    k: Option<u32>,
    fn_name: Option<&str>,
    steps: &[u64],
    out: Option<&Path>,
) -> Result<(), Failure> {
    let weight = fn_name.map(AnalyticWeight::from_name).transpose().map_err(|e| anyhow!(e))?;
    let label = match (k, fn_name) {
        (Some(k), _) => k.to_string(),
        (None, Some(name)) => name.to_string(),
        (None, None) => return Err(anyhow!("one of --k or --fn is required").into()),
    };
    let predicted = match k {
        Some(k) if k >= 1 => lemma1_limit(phi).ok(),
        _ => None,
    };
    let mut csv = String::from("k_or_fn,phi,N,re,im,magnitude,predicted_limit\n");
    for &n in steps {
        let value = match (&weight, k) {
            (Some(w), _) => {
                analytic_phase_sum(w, phi, 0, n.saturating_sub(1), n).map_err(|e| anyhow!("N = {n}: {e}"))?
            }
            (None, Some(k)) => phase_power_sum(k, phi, n).map_err(|e| anyhow!("N = {n}: {e}"))?,
            (None, None) => unreachable!("checked above"),
        };
        let _ = writeln!(
            csv,
            "{label},{},{n},{},{},{},{}",
            csv_float(phi),
            csv_float(value.re),
            csv_float(value.im),
            csv_float(value.norm()),
            csv_opt(predicted)
        );
    }
    match out {
        Some(out) => write_outputs(argv, None, None, out, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

/// Loads every `*.json` in `dir` as a measurement scenario, checking digests when listed.
pub fn load_corpus(dir: &Path) -> anyhow::Result<Vec<SteeringScenario>> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("reading corpus directory {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    files.retain(|p| p.extension().is_some_and(|x| x == "json"));
    files.sort();
    if files.is_empty() {
        return Err(anyhow!("{} contains no scenario files", dir.display()));
    }
    let digests = match std::fs::read_to_string(dir.join(DIGEST_FILE)) {
        Ok(text) => Some(parse_digests(&text)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(e).context(DIGEST_FILE),
    };
    let mut corpus = Vec::with_capacity(files.len());
    for path in &files {
        let (bytes, scenario) = load(path)?;
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if let Some(digests) = &digests {
            let listed = digests
                .iter()
                .find(|(_, f)| f == name)
                .ok_or_else(|| anyhow!("{name} is not listed in {DIGEST_FILE}"))?;
            let actual = sha256_hex(&bytes);
            if listed.0 != actual {
                return Err(anyhow!("{name}: digest {actual} does not match {DIGEST_FILE} entry {}", listed.0));
            }
        }
        if scenario.mode() != Mode::Measure {
            return Err(anyhow!("{name}: corpus scenarios must use mode \"measure\""));
        }
        corpus.push(scenario);
    }
    if let Some(digests) = &digests {
        if let Some((_, missing)) = digests.iter().find(|(_, f)| !dir.join(f).is_file()) {
            return Err(anyhow!("{missing} is listed in {DIGEST_FILE} but missing"));
        }
    }
    Ok(corpus)
}

fn parse_digests(text: &str) -> anyhow::Result<Vec<(String, String)>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let (digest, file) = l.split_once(char::is_whitespace).ok_or_else(|| anyhow!("malformed line {l:?}"))?;
            Ok((digest.to_lowercase(), file.trim_start().trim_start_matches('*').to_string()))
        })
        .collect::<anyhow::Result<_>>()
        .context(DIGEST_FILE)
}

pub fn verify(corpus: Option<&Path>, epsilon_prefactor: f64) -> Result<(), Failure> {
    let mut config = SuiteConfig::default();
    if let Some(dir) = corpus {
        config.corpus = load_corpus(dir)?;
        println!("corpus: {} scenarios from {}", config.corpus.len(), dir.display());
    }
    if epsilon_prefactor != 4.0 {
        config = config.with_epsilon_prefactor(epsilon_prefactor);
        println!("bound formula prefactor: {epsilon_prefactor}");
    }
    let results = run_suite(&config);
    for r in &results {
        println!("{r}");
    }
    let failed: Vec<u8> = results.iter().filter(|r| !r.passed()).map(|r| r.id).collect();
    if failed.is_empty() {
        println!("all {} criteria passed", results.len());
        Ok(())
    } else {
        Err(Failure::Invariant(format!("criteria {failed:?} failed")))
    }
}
