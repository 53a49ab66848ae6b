//! `simulate`, `analyze`, `model` and `plan`.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use super::config::{
    resolve_sim, AnalyzeSection, FeedbackSection, ModelKind, ModelSection, PendulumSection,
    PlanSection, RunConfig, SeriesFormat, SimSetup,
};
use crate::error::{Error, Result};
use crate::pendulum::feedback::{
    feedback_angle_psd, feedback_angle_variance, feedback_force_autocorr, feedback_force_psd,
    feedback_rms_force_noise,
};
use crate::pendulum::free::{free_angle_autocorr, free_angle_psd, sample_mean_variance};
use crate::pendulum::{derive_feedback, NoiseSpectrum, SpectrumKind};
use crate::planner::{damping_table, feasibility_report};
use crate::sim::{
    member_config, run_ensemble, simulate_feedback, simulate_free, Channel, SimConfig, TimeSeries,
    RNG_ALGORITHM,
};
use crate::sim::series::BINARY_MAGIC;
use crate::spectral::{
    columns_to_text, compare_psd, decade_bands, default_segment_len, estimate_autocorr,
    estimate_psd, window_mean, ComparisonReport, MeanVariance, PsdEstimate,
};

/// Files written by a command and whether its checks passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub passed: bool,
    pub summary: String,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn create_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

fn keep_sections(cfg: &RunConfig, names: &[&str]) -> RunConfig {
    let mut kept = cfg.clone();
    for s in super::config::SECTIONS {
        if !names.contains(s) {
            kept.remove_section(s);
        }
    }
    kept
}

/// File name of a channel's record: `angle.txt`, or `angle_0007.txt` in an ensemble.
pub fn series_file_name(channel: Channel, record: Option<usize>, format: SeriesFormat) -> String {
    match record {
        None => format!("{}.{}", channel.as_str(), format.extension()),
        Some(i) => format!("{}_{i:04}.{}", channel.as_str(), format.extension()),
    }
}

fn write_series(ts: &TimeSeries, path: &Path, format: SeriesFormat) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    match format {
        SeriesFormat::Text => ts.write_text(&mut w),
        SeriesFormat::Binary => ts.write_binary(&mut w),
    }
    .and_then(|_| w.flush())
    .map_err(|e| Error::io(path, e))
}

/// Reads a series in either format, sniffing the binary magic.
pub fn read_series(path: &Path) -> Result<TimeSeries> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|f| BufReader::new(f).read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(BINARY_MAGIC) {
        TimeSeries::read_binary(bytes.as_slice())
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::Parse { line: 1, message: "file is neither text nor binary series".into() })?;
        TimeSeries::from_text(&text)
    }
}

struct RecordFiles {
    files: Vec<PathBuf>,
    warnings: Vec<String>,
}

fn simulate_record(
    cfg: &SimConfig,
    record: Option<usize>,
    setup: &SimSetup,
    header: &[String],
    out: &Path,
) -> Result<RecordFiles> {
    let mut notes = header.to_vec();
    if let Some(i) = record {
        notes.push(format!("record = {i}"));
    }
    let mut series = Vec::new();
    let mut warnings = Vec::new();
    if cfg.feedback.is_some() {
        let run = simulate_feedback(cfg)?;
        warnings = run.warnings;
        series.push(run.angle);
        series.push(run.integrator_torque);
    } else {
        series.push(simulate_free(cfg)?.angle);
    }
    let mut files = Vec::new();
    for ts in series {
        let path = out.join(series_file_name(ts.channel(), record, setup.format));
        write_series(&ts.with_notes(notes.clone()), &path, setup.format)?;
        files.push(path);
    }
    Ok(RecordFiles { files, warnings })
}

/// Runs the configured simulation and writes one series file per channel
/// and record, plus `run.toml` holding the resolved configuration.
pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let mut cfg = keep_sections(cfg, &["pendulum", "feedback", "sim", "hooks"]);
    let setup = resolve_sim(&mut cfg)?;
    create_dir(out)?;
    let header = cfg.header_lines();
    let fingerprint = setup.sim.fingerprint();

    let records = if setup.n_records == 1 {
        vec![simulate_record(&setup.sim, None, &setup, &header, out)?]
    } else {
        run_ensemble(&setup.sim, setup.n_records, setup.workers, |i, member| {
            simulate_record(member, Some(i), &setup, &header, out)
        })?
    };
    let mut files: Vec<PathBuf> = records.iter().flat_map(|r| r.files.clone()).collect();
    let mut warnings: Vec<String> = records.into_iter().flat_map(|r| r.warnings).collect();
    warnings.dedup();

    let mut sidecar = cfg.clone();
    sidecar.set(&format!("run.fingerprint=\"{fingerprint}\""))?;
    sidecar.set(&format!("run.rng=\"{RNG_ALGORITHM}\""))?;
    sidecar.set(&format!("run.seed={}", setup.sim.seed))?;
    sidecar.set(&format!("run.n_records={}", setup.n_records))?;
    if let Some(w) = warnings.first() {
        sidecar.set(&format!("run.warning={}", toml::Value::String(w.clone())))?;
    }
    let path = out.join("run.toml");
    write_file(&path, sidecar.to_toml().as_bytes())?;
    files.push(path);

    let mut summary = format!(
        "simulated {} record(s) of {} steps, dt = {:e} s, fingerprint {fingerprint}\n",
        setup.n_records, setup.sim.n_steps, setup.sim.dt
    );
    for w in &warnings {
        summary.push_str(&format!("warning: {w}\n"));
    }
    Ok(Outcome {
        files,
        passed: true,
        summary,
    })
}

#[derive(Debug, Serialize)]
struct VarianceCheck {
    estimate: f64,
    model: Option<f64>,
}

#[derive(Debug, Serialize)]
struct EnsembleCheck {
    averaging_time: f64,
    mean_variance: MeanVariance,
    model: Option<f64>,
}

#[derive(Debug, Serialize)]
struct AnalysisReport<'a> {
    fingerprint: String,
    channel: Channel,
    n_records: usize,
    comparison: &'a ComparisonReport,
    variance: VarianceCheck,
    ensemble: Option<EnsembleCheck>,
}

/// Closed-form model of one channel of the configured system. Integrator
/// torque is compared as force at `arm`.
struct ChannelModel<'a> {
    sim: &'a SimConfig,
    channel: Channel,
    arm: f64,
}

impl ChannelModel<'_> {
    fn density(&self, f: f64) -> Result<f64> {
        let p = &self.sim.pendulum;
        match (self.channel, &self.sim.feedback) {
            (Channel::Angle, None) => free_angle_psd(p, f),
            (Channel::Angle, Some(fb)) => feedback_angle_psd(p, fb, f),
            (Channel::IntegratorTorque, Some(fb)) => feedback_force_psd(p, fb, self.arm, f),
            _ => Err(self.unsupported()),
        }
    }

    fn kind(&self) -> SpectrumKind {
        match self.channel {
            Channel::IntegratorTorque => SpectrumKind::ForceDensity,
            _ => SpectrumKind::AngleDensity,
        }
    }

    fn autocorr(&self, t: f64) -> Option<Result<f64>> {
        let p = &self.sim.pendulum;
        match (self.channel, &self.sim.feedback) {
            (Channel::Angle, None) => Some(free_angle_autocorr(p, t)),
            (Channel::IntegratorTorque, Some(fb)) => {
                Some(feedback_force_autocorr(p, fb, self.arm, t))
            }
            _ => None,
        }
    }

    fn variance(&self) -> f64 {
        let p = &self.sim.pendulum;
        match &self.sim.feedback {
            None => p.thermal_energy() / p.stiffness(),
            Some(fb) => feedback_angle_variance(p, fb),
        }
    }

    fn mean_variance(&self, window: f64) -> Result<Option<f64>> {
        let p = &self.sim.pendulum;
        match (self.channel, &self.sim.feedback) {
            (Channel::Angle, None) => sample_mean_variance(p, window).map(Some),
            (Channel::IntegratorTorque, Some(fb)) => {
                feedback_rms_force_noise(p, fb, self.arm, window).map(|s| Some(s * s))
            }
            _ => Ok(None),
        }
    }

    fn unsupported(&self) -> Error {
        Error::Config(format!(
            "[analyze] no closed-form model for channel `{}` in {} operation",
            self.channel.as_str(),
            if self.sim.feedback.is_some() { "feedback" } else { "free" }
        ))
    }
}

fn input_files(a: &AnalyzeSection, setup: &SimSetup, out: &Path) -> Result<Vec<PathBuf>> {
    let input = a.input.as_deref().map(PathBuf::from).unwrap_or_else(|| out.to_path_buf());
    if !input.is_dir() {
        return if setup.n_records == 1 {
            Ok(vec![input])
        } else {
            Err(Error::Config(
                "[analyze] an ensemble is read from a directory; set analyze.input to it".into(),
            ))
        };
    }
    let pick = |record: Option<usize>| -> Result<PathBuf> {
        [setup.format, SeriesFormat::Text, SeriesFormat::Binary]
            .iter()
            .map(|f| input.join(series_file_name(a.channel, record, *f)))
            .find(|p| p.is_file())
            .ok_or_else(|| {
                let p = input.join(series_file_name(a.channel, record, setup.format));
                Error::io(&p, std::io::Error::from(std::io::ErrorKind::NotFound))
            })
    };
    if setup.n_records == 1 {
        Ok(vec![pick(None)?])
    } else {
        (0..setup.n_records).map(|i| pick(Some(i))).collect()
    }
}

fn average_into(acc: &mut Option<Vec<f64>>, values: &[f64]) -> Result<()> {
    match acc {
        None => *acc = Some(values.to_vec()),
        Some(sum) if sum.len() == values.len() => {
            sum.iter_mut().zip(values).for_each(|(s, v)| *s += v);
        }
        Some(_) => {
            return Err(Error::InvalidParameter {
                name: "records",
                reason: "ensemble records differ in length".into(),
            })
        }
    }
    Ok(())
}

/// Estimates PSD and autocorrelation of the configured series, compares
/// them with the matching closed form, and writes `psd.tsv`,
/// `autocorr.tsv` and `report.json`. Fails the outcome when any comparison
/// band exceeds the tolerance.
pub fn analyze(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let mut cfg = keep_sections(cfg, &["pendulum", "feedback", "sim", "hooks", "analyze"]);
    let setup = resolve_sim(&mut cfg)?;
    let mut a: AnalyzeSection = cfg.section("analyze")?;
    let model = ChannelModel {
        sim: &setup.sim,
        channel: a.channel,
        arm: a.arm,
    };
    model.density(1.0)?;
    let files = input_files(&a, &setup, out)?;

    let f0 = setup.sim.characteristic_frequency() / (2.0 * PI);
    let mut psd_sum: Option<Vec<f64>> = None;
    let mut acf_sum: Option<Vec<f64>> = None;
    let mut first: Option<PsdEstimate> = None;
    let mut means = Vec::new();
    let mut variance_sum = 0.0;
    let mut samples = 0;
    for (i, path) in files.iter().enumerate() {
        let ts = read_series(path)?;
        let expected = if setup.n_records == 1 {
            setup.sim.clone()
        } else {
            member_config(&setup.sim, i)
        }
        .fingerprint();
        if ts.fingerprint() != expected {
            return Err(Error::FingerprintMismatch {
                expected,
                found: ts.fingerprint().to_string(),
            });
        }
        if ts.channel() != a.channel {
            return Err(Error::Config(format!(
                "{} holds channel `{}`, analysis expects `{}`",
                path.display(),
                ts.channel().as_str(),
                a.channel.as_str()
            )));
        }
        let ts = match a.channel {
            Channel::IntegratorTorque => ts.scaled(1.0 / a.arm),
            _ => ts,
        };
        let seg = *a.segment_len.get_or_insert(default_segment_len(ts.len())?);
        let est = estimate_psd(&ts, seg, a.overlap, a.window)?;
        average_into(&mut psd_sum, &est.values)?;
        first.get_or_insert(est);

        let max_lag = *a.max_lag.get_or_insert_with(|| {
            let three = (3.0 * setup.sim.relaxation_time() / ts.dt()).ceil() as usize;
            three.min(ts.len() / 10 - 1).max(1)
        });
        average_into(&mut acf_sum, &estimate_autocorr(&ts, max_lag)?)?;
        variance_sum += ts.variance();
        samples = ts.len();
        if setup.n_records > 1 {
            let window = *a.averaging_time.get_or_insert(ts.duration());
            means.push(window_mean(&ts, window)?);
        }
    }
    let n = files.len() as f64;
    let mut estimate = first.expect("at least one record");
    estimate.values = psd_sum.expect("at least one record").iter().map(|v| v / n).collect();
    let acf: Vec<f64> = acf_sum.expect("at least one record").iter().map(|v| v / n).collect();
    let dt = setup.sim.dt;

    let lo = a.x_lo * f0;
    let hi = a.x_hi * f0;
    let nyquist = 0.5 / dt;
    if hi >= nyquist {
        return Err(Error::Config(format!(
            "[analyze] x_hi = {} lies at or above the Nyquist frequency ({:.4} resonance frequencies)",
            a.x_hi,
            nyquist / f0
        )));
    }
    let bands = decade_bands(lo, hi)?;
    let band_freqs: Vec<f64> = estimate
        .frequencies
        .iter()
        .copied()
        .filter(|&f| f >= lo && f <= hi)
        .collect();
    let spectrum = NoiseSpectrum::from_fn(model.kind(), &band_freqs, |f| model.density(f))?;
    let comparison = compare_psd(&estimate, &spectrum, &bands, a.tolerance)?;

    let ensemble = if means.len() > 1 {
        let window = a.averaging_time.expect("set for ensembles");
        let mv = MeanVariance::from_means(&means, (window / dt).round() as usize)?;
        Some(EnsembleCheck {
            averaging_time: window,
            mean_variance: mv,
            model: model.mean_variance(window).ok().flatten(),
        })
    } else {
        None
    };

    cfg.put_section("analyze", &a)?;
    let header = cfg.header_lines();
    let mut written = Vec::new();

    let psd_rows: Vec<Vec<f64>> = estimate
        .frequencies
        .iter()
        .zip(&estimate.values)
        .filter(|(f, _)| **f > 0.0)
        .map(|(&f, &s)| Ok(vec![f, s, model.density(f)?]))
        .collect::<Result<_>>()?;
    let mut psd_header = header.clone();
    psd_header.push(format!("records = {}", files.len()));
    psd_header.push(format!("n_segments = {}", estimate.n_segments));
    let path = out.join("psd.tsv");
    create_dir(out)?;
    write_file(
        &path,
        columns_to_text(&psd_header, &["frequency_hz", "estimate", "model"], &psd_rows).as_bytes(),
    )?;
    written.push(path);

    let has_model = model.autocorr(0.0).is_some();
    let acf_rows: Vec<Vec<f64>> = acf
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let t = k as f64 * dt;
            match model.autocorr(t) {
                Some(m) => Ok(vec![t, r, m?]),
                None => Ok(vec![t, r]),
            }
        })
        .collect::<Result<_>>()?;
    let names: &[&str] = if has_model {
        &["lag_s", "estimate", "model"]
    } else {
        &["lag_s", "estimate"]
    };
    let path = out.join("autocorr.tsv");
    write_file(&path, columns_to_text(&header, names, &acf_rows).as_bytes())?;
    written.push(path);

    let report = AnalysisReport {
        fingerprint: setup.sim.fingerprint(),
        channel: a.channel,
        n_records: files.len(),
        comparison: &comparison,
        variance: VarianceCheck {
            estimate: variance_sum / n,
            model: (a.channel == Channel::Angle).then(|| model.variance()),
        },
        ensemble,
    };
    let path = out.join("report.json");
    let json = serde_json::to_string_pretty(&json!({
        "config": header,
        "report": report,
    }))
    .expect("report serializes");
    write_file(&path, json.as_bytes())?;
    written.push(path);

    let mut summary = format!(
        "{} record(s) of {samples} samples, {} segments of {}\n",
        files.len(),
        estimate.n_segments,
        a.segment_len.unwrap_or(0)
    );
    for b in &comparison.bands {
        summary.push_str(&format!(
            "  band [{:.4e}, {:.4e}) Hz: {:>5} bins, deviation {:+.4}%\n",
            b.band.lo,
            b.band.hi,
            b.n_bins,
            100.0 * b.deviation
        ));
    }
    summary.push_str(&format!(
        "max |deviation| {:.4}% (tolerance {:.4}%): {}\n",
        100.0 * comparison.max_abs_deviation,
        100.0 * comparison.tolerance,
        if comparison.pass { "pass" } else { "FAIL" }
    ));
    Ok(Outcome {
        files: written,
        passed: comparison.pass,
        summary,
    })
}

/// Evaluates a closed-form curve on a grid and writes `model.tsv`.
pub fn model(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let mut cfg = keep_sections(cfg, &["pendulum", "feedback", "model"]);
    let p = cfg.section::<PendulumSection>("pendulum")?.resolve()?;
    let fb = cfg.section::<FeedbackSection>("feedback")?.resolve(&p)?;
    let mut m: ModelSection = cfg.section("model")?;
    let omega = match (&fb, m.kind.needs_feedback()) {
        (Some(fb), true) => derive_feedback(&p, fb).omega0_fb,
        (None, false) => p.derive().omega0,
        (None, true) => {
            return Err(Error::Config(format!(
                "[model] kind {:?} needs a [feedback] section",
                m.kind
            )))
        }
        (Some(_), false) => {
            return Err(Error::Config(format!(
                "[model] kind {:?} describes the free pendulum; remove [feedback]",
                m.kind
            )))
        }
    };
    let scale = if m.kind.is_autocorr() {
        2.0 * PI / omega
    } else {
        omega / (2.0 * PI)
    };
    let grid = m.grid(scale)?;
    let rows: Vec<Vec<f64>> = grid
        .iter()
        .map(|&g| {
            let v = match (m.kind, &fb) {
                (ModelKind::FreeAnglePsd, _) => free_angle_psd(&p, g),
                (ModelKind::FreeAngleAutocorr, _) => free_angle_autocorr(&p, g),
                (ModelKind::FeedbackAnglePsd, Some(fb)) => feedback_angle_psd(&p, fb, g),
                (ModelKind::FeedbackForcePsd, Some(fb)) => feedback_force_psd(&p, fb, m.arm, g),
                (ModelKind::FeedbackForceAutocorr, Some(fb)) => {
                    feedback_force_autocorr(&p, fb, m.arm, g)
                }
                _ => unreachable!("checked above"),
            }?;
            Ok(vec![g, v])
        })
        .collect::<Result<_>>()?;

    cfg.put_section("pendulum", &PendulumSection::resolved(&p))?;
    cfg.put_section("feedback", &FeedbackSection::resolved(fb.as_ref()))?;
    cfg.put_section("model", &m)?;
    let names: &[&str] = if m.kind.is_autocorr() {
        &["lag_s", "value"]
    } else {
        &["frequency_hz", "value"]
    };
    create_dir(out)?;
    let path = out.join("model.tsv");
    write_file(&path, columns_to_text(&cfg.header_lines(), names, &rows).as_bytes())?;
    Ok(Outcome {
        files: vec![path],
        passed: true,
        summary: format!("{} points of {:?}\n", rows.len(), m.kind),
    })
}

/// Feasibility report for a measurement plan: `plan.txt` and `plan.json`.
pub fn plan(cfg: &RunConfig, out: &Path) -> Result<Outcome> {
    let mut cfg = keep_sections(cfg, &["plan"]);
    let plan = cfg.section::<PlanSection>("plan")?.resolve()?;
    let report = feasibility_report(&plan)?;
    cfg.put_section("plan", &PlanSection::resolved(&plan))?;
    let header = cfg.header_lines();

    let mut text: String = header.iter().map(|h| format!("# {h}\n")).collect();
    text.push_str(&report.to_text());
    text.push_str("\npublished damping comparisons\n");
    for d in damping_table() {
        text.push_str(&format!(
            "  {:<36} γ = {:.3e}  γ_W = {:.3e}  crossover ℓ = {} cm  excess noise ×{}\n",
            d.name, d.system_damping, d.wire_damping, d.crossover_length, d.excess_noise_factor
        ));
    }
    create_dir(out)?;
    let txt = out.join("plan.txt");
    write_file(&txt, text.as_bytes())?;
    let json = serde_json::to_string_pretty(&json!({
        "config": header,
        "plan": plan,
        "report": report,
        "damping_table": damping_table(),
    }))
    .expect("report serializes");
    let js = out.join("plan.json");
    write_file(&js, json.as_bytes())?;
    Ok(Outcome {
        files: vec![txt, js],
        passed: true,
        summary: text,
    })
}
