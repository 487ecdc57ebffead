//! One pipeline per experiment kind. Each writes its artifacts into the
//! output directory and returns the checks that decide the exit code.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ethweyl::basis::FockBasis;
use ethweyl::lmg::{self, LmgParams};
use ethweyl::oracle1d;
use ethweyl::semiclassics::{bandwidth_estimate, semiclassical_profile, thermalization_time, write_semiclassical_csv, LmgModel};
use ethweyl::spectral::{
    self, band_profile, fit_scaling, write_profile_csv, write_scaling_csv, write_spectrum_csv, BandProfile, DensityOfStates,
    Fit, FitModel,
};
use ethweyl::weylcalc::{from_text, to_text, OperatorWord};
use serde::Serialize;

use crate::config::{ExperimentConfig, Kind};
use crate::manifest::Check;
use crate::plot::{emit_plot_script, Labels};

/// Files written so far, relative to `dir`.
pub struct Bundle {
    pub dir: PathBuf,
    pub files: Vec<String>,
}

impl Bundle {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Bundle { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.path(name);
        fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?;
        self.files.push(name.into());
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(v)?;
        s.push('\n');
        self.write(name, s.as_bytes())
    }

    fn csv(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, &buf)
    }

    fn script(&mut self, name: &str, csvs: &[&str], labels: Option<&Labels>) -> Result<()> {
        let paths: Vec<PathBuf> = csvs.iter().map(|c| self.path(c)).collect();
        let refs: Vec<&Path> = paths.iter().map(|p| p.as_path()).collect();
        let s = emit_plot_script(&refs, labels)?;
        self.write(name, s.as_bytes())
    }
}

/// Run the configured experiment.
pub fn run(cfg: &ExperimentConfig, out: &mut Bundle) -> Result<Vec<Check>> {
    let kind = cfg.kind.name();
    let r = match cfg.kind {
        Kind::Oracle1d => oracle(cfg, out),
        Kind::WeylSymbol => weyl_symbol(cfg, out),
        Kind::BandProfile => band(cfg, out),
        Kind::SemiclassicalCompare => compare(cfg, out),
        Kind::ScalingHbar => scaling_hbar(cfg, out),
        Kind::ScalingA => scaling_a(cfg, out),
        Kind::Bandwidth => bandwidth(cfg, out),
    };
    r.with_context(|| format!("{kind} pipeline"))
}

fn oracle(cfg: &ExperimentConfig, out: &mut Bundle) -> Result<Vec<Check>> {
    let rep = oracle1d::default_suite(&cfg.oracle).context("oracle1d")?;
    out.json("oracle_report.json", &rep)?;
    let detail = format!("{} cases, max relative error {:e}", rep.cases.len(), rep.max_rel_err);
    Ok(vec![Check::new("identity", rep.all_pass, detail)])
}

#[derive(Serialize)]
struct Term {
    hbar: u32,
    p: Vec<u32>,
    q: Vec<u32>,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct SymbolReport {
    word: String,
    dim: usize,
    symbol: Vec<Term>,
    /// Weyl-ordered classical functions by ħ power.
    decomposition: Vec<(u32, Vec<Term>)>,
}

fn terms(f: &ethweyl::weylcalc::PhasePolynomial) -> Vec<Term> {
    f.terms().map(|(m, c)| Term { hbar: m.hbar, p: m.p.clone(), q: m.q.clone(), re: c.re, im: c.im }).collect()
}

fn weyl_symbol(cfg: &ExperimentConfig, out: &mut Bundle) -> Result<Vec<Check>> {
    let w: OperatorWord = cfg.word.parse().context("weylcalc: parsing word")?;
    let s = w.weyl_symbol();
    let text = to_text(&s);
    out.write("symbol.txt", text.as_bytes())?;
    let rep = SymbolReport {
        word: w.to_string(),
        dim: s.dim(),
        symbol: terms(&s),
        decomposition: w.weyl_order_decompose().iter().map(|(k, f)| (*k, terms(f))).collect(),
    };
    out.json("symbol.json", &rep)?;
    let back = from_text(&text).context("weylcalc: re-reading symbol")?;
    Ok(vec![Check::new("text round trip", back == s, "symbol.txt parses back to the same polynomial")])
}

/// Spectrum, band profile and density of states of one model.
struct Band {
    levels: Vec<f64>,
    e: f64,
    rho: f64,
    profile: BandProfile,
}

fn compute_band(params: &LmgParams, cfg: &ExperimentConfig) -> Result<Band> {
    let basis = FockBasis::new(params.omega).context("basis")?;
    let h = lmg::build_hamiltonian(params, &basis).context("lmg")?;
    let s = spectral::diagonalize(&h).context("spectral: eigensolve")?;
    let o = spectral::eigenbasis_elements(&basis.matrix_observable_a(), &s).context("spectral: eigenbasis elements")?;
    let lv = s.values;
    let e = cfg.energy.unwrap_or(0.5 * (lv[0] + lv[lv.len() - 1]));
    let rho = DensityOfStates::with_default_window(&lv).context("spectral: density of states")?.eval(e);
    let profile = band_profile(&o, &lv, e, &cfg.profile).context("spectral: band profile")?;
    Ok(Band { levels: lv, e, rho, profile })
}

#[derive(Serialize)]
struct BandSummary<'a> {
    omega: u32,
    hbar: f64,
    energy: f64,
    rho_dos: f64,
    spacing: f64,
    bin_width: f64,
    peak: f64,
    peak_omega: f64,
    epsilon: f64,
    half_width: Option<f64>,
    mean_offdiag: f64,
    shell_pairs: usize,
    thermalization_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    semiclassical: Option<&'a CompareSummary>,
}

#[derive(Serialize)]
struct CompareSummary {
    peak: f64,
    peak_stderr: f64,
    peak_ratio: f64,
    half_width: Option<f64>,
    density_of_states: f64,
}

fn band_summary<'a>(p: &LmgParams, b: &Band, sc: Option<&'a CompareSummary>) -> BandSummary<'a> {
    let bp = &b.profile;
    BandSummary {
        omega: p.omega,
        hbar: p.hbar_eff(),
        energy: b.e,
        rho_dos: b.rho,
        spacing: bp.spacing,
        bin_width: bp.bin_width,
        peak: bp.peak,
        peak_omega: bp.peak_omega,
        epsilon: bp.epsilon,
        half_width: bp.half_width,
        mean_offdiag: bp.mean_offdiag,
        shell_pairs: bp.shell_pairs,
        thermalization_time: bp.half_width.and_then(|w| thermalization_time(w, p.hbar_eff()).ok()),
        semiclassical: sc,
    }
}

fn profile_checks(bp: &BandProfile) -> Vec<Check> {
    let vals: Vec<f64> = bp.values.iter().map(|v| v.unwrap_or(0.0)).collect();
    let n = vals.len();
    let asym = (0..n).map(|k| (vals[k] - vals[n - 1 - k]).abs()).fold(0.0, f64::max);
    let nonneg = vals.iter().all(|&v| v >= 0.0);
    vec![
        Check::new("profile symmetric", asym <= 1e-12 * bp.peak, format!("max |P(ω) − P(−ω)| = {asym:e}")),
        Check::new("profile non-negative", nonneg, ""),
    ]
}

fn band(cfg: &ExperimentConfig, out: &mut Bundle) -> Result<Vec<Check>> {
    let b = compute_band(&cfg.model, cfg)?;
    out.csv("spectrum.csv", |w| write_spectrum_csv(w, &b.levels))?;
    out.csv("profile.csv", |w| write_profile_csv(w, &b.profile))?;
    out.json("summary.json", &band_summary(&cfg.model, &b, None))?;
    out.script("profile.gp", &["profile.csv"], None)?;
    Ok(profile_checks(&b.profile))
}

fn compare(cfg: &ExperimentConfig, out: &mut Bundle) -> Result<Vec<Check>> {
    let b = compute_band(&cfg.model, cfg)?;
    let bp = &b.profile;
    let omegas: Vec<f64> = bp.omegas.iter().copied().filter(|w| w.abs() <= cfg.compare_omega_max).collect();
    let sc = semiclassical_profile(
        &LmgModel(cfg.model),
        &lmg::observable_symbol(),
        b.e,
        cfg.model.hbar_eff(),
        &omegas,
        &cfg.predictor,
    )
    .context("semiclassics: predictor")?;
    let c = omegas.len() / 2;
    let summary = CompareSummary {
        peak: sc.values[c],
        peak_stderr: sc.stderr[c],
        peak_ratio: sc.values[c] / bp.peak,
        half_width: sc.half_width(bp.epsilon).ok(),
        density_of_states: sc.density_of_states(),
    };
    out.csv("profile.csv", |w| write_profile_csv(w, bp))?;
    out.csv("semiclassical.csv", |w| write_semiclassical_csv(w, &sc))?;
    out.json("summary.json", &band_summary(&cfg.model, &b, Some(&summary)))?;
    out.script("compare.gp", &["profile.csv", "semiclassical.csv"], None)?;
    let mut checks = profile_checks(bp);
    let finite = sc.values.iter().chain(&sc.stderr).all(|v| v.is_finite());
    checks.push(Check::new("prediction finite", finite, format!("{} empty z_B draws of {}", sc.empty_zb, sc.n_zb)));
    Ok(checks)
}

#[derive(Serialize)]
struct FitReport {
    x: &'static str,
    y: &'static str,
    fit: Fit,
    exponent_or_slope: f64,
}

fn write_fit(
    out: &mut Bundle,
    stem: &str,
    xs: &[f64],
    ys: &[f64],
    model: FitModel,
    names: (&'static str, &'static str),
) -> Result<FitReport> {
    let fit = fit_scaling(xs, ys, model).with_context(|| format!("spectral: fitting {}", names.1))?;
    let csv = format!("{stem}.csv");
    out.csv(&csv, |w| write_scaling_csv(w, xs, ys, &fit))?;
    let labels = Labels { x: names.0.into(), y: names.1.into(), log: model == FitModel::Power };
    out.script(&format!("{stem}.gp"), &[&csv], Some(&labels))?;
    Ok(FitReport { x: names.0, y: names.1, fit, exponent_or_slope: fit.slope })
}

fn widths(bands: &[Band]) -> (Vec<f64>, Check) {
    let ys: Vec<f64> = bands.iter().map(|b| b.profile.half_width.unwrap_or(f64::NAN)).collect();
    let ok = ys.iter().all(|y| y.is_finite());
    (ys, Check::new("half-widths found", ok, ""))
}

fn scaling_hbar(cfg: &ExperimentConfig, out: &mut Bundle) -> Result<Vec<Check>> {
    let params: Vec<LmgParams> = cfg.omegas.iter().map(|&w| cfg.model.with_omega(w)).collect();
    let bands: Vec<Band> = params
        .iter()
        .map(|p| compute_band(p, cfg).with_context(|| format!("Ω = {}", p.omega)))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = params.iter().map(|p| p.hbar_eff()).collect();
    let (ws, mut check) = widths(&bands);
    let mut fits = Vec::new();
    if check.pass {
        fits.push(write_fit(out, "scaling", &xs, &ws, FitModel::Linear, ("hbar_eff", "w_b"))?);
    }
    let mean: Vec<f64> = bands.iter().map(|b| b.profile.mean_offdiag).collect();
    fits.push(write_fit(out, "offdiag_scaling", &xs, &mean, FitModel::Power, ("hbar_eff", "mean |O_ij|^2"))?);
    let rho: Vec<f64> = bands.iter().map(|b| b.rho).collect();
    fits.push(write_fit(out, "dos_scaling", &xs, &rho, FitModel::Power, ("hbar_eff", "rho_dos"))?);
    let summaries: Vec<BandSummary> = params.iter().zip(&bands).map(|(p, b)| band_summary(p, b, None)).collect();
    out.json("fits.json", &serde_json::json!({ "fits": fits, "points": summaries }))?;
    check.detail = format!("{} of {} systems", ws.iter().filter(|w| w.is_finite()).count(), ws.len());
    Ok(vec![check])
}

fn scaling_a(cfg: &ExperimentConfig, out: &mut Bundle) -> Result<Vec<Check>> {
    let params: Vec<LmgParams> = cfg.a_values.iter().map(|&a| cfg.model.with_a(a)).collect();
    let bands: Vec<Band> =
        params.iter().map(|p| compute_band(p, cfg).with_context(|| format!("a = {}", p.a))).collect::<Result<_>>()?;
    let (ws, check) = widths(&bands);
    let mut fits = Vec::new();
    if check.pass {
        fits.push(write_fit(out, "scaling", &cfg.a_values, &ws, FitModel::Linear, ("a", "w_b"))?);
    }
    let summaries: Vec<BandSummary> = params.iter().zip(&bands).map(|(p, b)| band_summary(p, b, None)).collect();
    out.json("fits.json", &serde_json::json!({ "fits": fits, "points": summaries }))?;
    Ok(vec![check])
}

fn bandwidth(cfg: &ExperimentConfig, out: &mut Bundle) -> Result<Vec<Check>> {
    let e = match cfg.energy {
        Some(e) => e,
        None => {
            let basis = FockBasis::new(cfg.model.omega).context("basis")?;
            let h = lmg::build_hamiltonian(&cfg.model, &basis).context("lmg")?;
            let lv = spectral::eigenvalues(&h).context("spectral: eigenvalues")?;
            0.5 * (lv[0] + lv[lv.len() - 1])
        }
    };
    let hbar = cfg.model.hbar_eff();
    let est = bandwidth_estimate(&LmgModel(cfg.model), &lmg::observable_symbol(), e, hbar, cfg.profile.epsilon, &cfg.bandwidth)
        .context("semiclassics: bandwidth")?;
    let tau = thermalization_time(est.w_b.value, hbar).ok();
    out.json("bandwidth.json", &serde_json::json!({ "energy": e, "estimate": est, "thermalization_time": tau }))?;
    let ok = est.w_b.value.is_finite() && est.w_b.value > 0.0;
    Ok(vec![Check::new("bandwidth positive", ok, format!("w_b = {} ± {}", est.w_b.value, est.w_b.stderr))])
}
