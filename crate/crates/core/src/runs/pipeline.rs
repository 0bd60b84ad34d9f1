use super::config::{Route, RunConfig, Stage};
use super::record::{write_outputs, RunRecord, Trace};
use super::study::{fit_loglog, StudyReport, TrackedSlope};
use crate::energy::{constant_term_position, constant_term_spectral, fit_window_constant, gp_energy_window};
use crate::green::{verify_green_bounds, FreeKernelSpec};
use crate::kernels::{build_w_and_k, hyperbolic_split, project_eta, verify_prop_eta};
use crate::potential::Potential;
use crate::scattering::{default_r_max, scatter};
use crate::thermo::lower_bound_rows;
use crate::twobody::{rescale_to_unit_box, solve_with, verify_minimizer_properties, BoxGeometry, SolverOptions, TwoBodySolution};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// One point of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    /// Value of the swept parameter, or ℓ without a sweep.
    pub x: f64,
    pub ell: f64,
    pub m: usize,
    pub kappa: f64,
}

pub fn sweep_points(cfg: &RunConfig) -> Vec<Point> {
    let base = Point { x: cfg.geometry.ell, ell: cfg.geometry.ell, m: cfg.geometry.m, kappa: cfg.potential.kappa };
    match &cfg.sweep {
        None => vec![base],
        Some(s) => s
            .values
            .iter()
            .map(|&v| {
                let mut p = Point { x: v, ..base };
                match s.parameter.as_str() {
                    "ell" => p.ell = v,
                    "m" => p.m = v as usize,
                    _ => p.kappa = v,
                }
                p
            })
            .collect(),
    }
}

fn check_dependencies(stages: &[Stage]) -> Result<()> {
    for &s in stages {
        for &r in s.requires() {
            if !stages.contains(&r) {
                return Err(Error::Pipeline { stage: s.name().into(), missing: r.name().into() });
            }
        }
    }
    Ok(())
}

struct Context<'a> {
    cfg: &'a RunConfig,
    base: Option<&'a Path>,
    points: Vec<Point>,
    /// (κ, 𝔞)
    lengths: Vec<(f64, f64)>,
    solutions: Vec<TwoBodySolution>,
    window_constant: Option<f64>,
    record: RunRecord,
}

impl Context<'_> {
    fn potential(&self, kappa: f64) -> Result<Potential> {
        self.cfg.potential.build(self.base)?.with_kappa(kappa)
    }

    fn length(&self, kappa: f64) -> f64 {
        self.lengths.iter().find(|l| l.0 == kappa).map(|l| l.1).expect("scatter stage ran for every coupling")
    }

    fn green(&mut self) -> Result<()> {
        let g = &self.cfg.green;
        let spec = FreeKernelSpec::new(6, g.eps)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        let half = 0.5 * g.ell;
        let pairs: Vec<(Vec<f64>, Vec<f64>)> = (0..g.samples)
            .map(|_| {
                let x = (0..6).map(|_| rng.gen_range(-half..half)).collect();
                let y = (0..6).map(|_| rng.gen_range(-half..half)).collect();
                (x, y)
            })
            .collect();
        let report = verify_green_bounds(&spec, g.ell, &pairs, g.radius)?;
        self.record.stages.insert("green".into(), serde_json::to_value(report)?);
        Ok(())
    }

    fn scatter(&mut self) -> Result<()> {
        let mut kappas: Vec<f64> = self.points.iter().map(|p| p.kappa).collect();
        kappas.sort_by(f64::total_cmp);
        kappas.dedup();
        let mut out = Vec::new();
        for k in kappas {
            let pot = self.potential(k)?;
            let rep = scatter(&pot, default_r_max(&pot), self.cfg.tolerances.scatter_steps)?;
            self.lengths.push((k, rep.a));
            out.push(json!({ "kappa": k, "report": rep }));
        }
        self.record.stages.insert("scatter".into(), Value::Array(out));
        Ok(())
    }

    fn twobody(&mut self) -> Result<()> {
        let g = &self.cfg.geometry;
        let opts = SolverOptions { tol: self.cfg.tolerances.eigen, max_iter: self.cfg.tolerances.max_iter, sampling: g.sampling };
        let mut out = Vec::new();
        let mut trace = Trace::new(&["x", "ell", "m", "kappa", "eigenvalue", "normalized_eigenvalue", "l2_deviation", "residual", "iterations"]);
        for p in self.points.clone() {
            let geom = BoxGeometry::new(g.d, p.ell, p.m)?;
            let pot = self.potential(p.kappa)?;
            let sol = solve_with(&geom, &pot, opts)?;
            let rep = verify_minimizer_properties(&sol, self.length(p.kappa));
            trace.push(vec![
                p.x,
                p.ell,
                p.m as f64,
                p.kappa,
                sol.eigenvalue,
                rep.normalized_eigenvalue,
                rep.l2_deviation,
                sol.residual,
                sol.iterations as f64,
            ]);
            out.push(json!({ "point": p, "solution": sol, "report": rep }));
            self.solutions.push(sol);
        }
        self.record.stages.insert("twobody".into(), Value::Array(out));
        self.record.traces.insert("twobody".into(), trace);
        Ok(())
    }

    fn kernels(&mut self) -> Result<()> {
        let coarse = self.cfg.geometry.coarse;
        let mut out = Vec::new();
        for (p, sol) in self.points.iter().zip(&self.solutions) {
            let (unit, _) = rescale_to_unit_box(sol);
            for &n in &self.cfg.energy.n {
                let (_, k) = build_w_and_k(&unit, p.ell, n, coarse)?;
                let (eta, _) = project_eta(&k);
                let hyp = hyperbolic_split(&eta);
                let rep = verify_prop_eta(&eta, &hyp, n, p.ell, p.kappa);
                out.push(json!({ "point": p, "n": n, "report": rep }));
            }
        }
        self.record.stages.insert("kernels".into(), Value::Array(out));
        Ok(())
    }

    fn energy(&mut self) -> Result<()> {
        let e = &self.cfg.energy;
        let mut out = Vec::new();
        let mut samples = Vec::new();
        let mut trace = Trace::new(&["x", "n", "cutoff", "total", "truncation_estimate"]);
        for (p, sol) in self.points.iter().zip(&self.solutions) {
            let (unit, _) = rescale_to_unit_box(sol);
            for &n in &e.n {
                let mut entry = json!({ "point": p, "n": n });
                let mut total = None;
                if e.route != Route::Position {
                    let (_, k) = build_w_and_k(&unit, p.ell, n, p.m)?;
                    let (eta, _) = project_eta(&k);
                    let top = e.cutoff.min(p.m - 1);
                    for cut in 1..=top {
                        let b = constant_term_spectral(&sol.potential, n, p.ell, &eta, cut, sol.sampling)?;
                        trace.push(vec![p.x, n, cut as f64, b.total, b.truncation_estimate]);
                        if cut == top {
                            total = Some(b.total);
                            entry["spectral"] = serde_json::to_value(&b)?;
                        }
                    }
                }
                if e.route != Route::Spectral {
                    let b = constant_term_position(n, sol)?;
                    total.get_or_insert(b.total);
                    entry["position"] = serde_json::to_value(&b)?;
                }
                samples.push((n, p.ell, total.unwrap_or(0.0), p.kappa));
                out.push(entry);
            }
        }
        let mut windows = Vec::new();
        let fitted = if samples.is_empty() {
            None
        } else {
            let a = self.length(samples[0].3);
            let same: Vec<(f64, f64, f64)> = samples.iter().filter(|s| s.3 == samples[0].3).map(|s| (s.0, s.1, s.2)).collect();
            let c = fit_window_constant(&same, a).ok();
            if let Some(c) = c {
                for &(n, ell, total) in &same {
                    let w = gp_energy_window(n, ell, a, c)?;
                    windows.push(json!({ "n": n, "ell": ell, "total": total, "window": w }));
                }
            }
            c
        };
        self.window_constant = fitted;
        self.record.stages.insert(
            "energy".into(),
            json!({ "breakdowns": out, "window_constant": fitted, "windows": windows }),
        );
        self.record.traces.insert("energy_cutoff".into(), trace);
        Ok(())
    }

    fn thermo(&mut self) -> Result<()> {
        let t = &self.cfg.thermo;
        let kappa = self.points[0].kappa;
        let a = self.length(kappa);
        let (c_const, source) = match (t.c_const, self.window_constant) {
            (Some(c), _) => (c, "config"),
            (None, Some(c)) => (c, "energy window fit"),
            (None, None) => (1.0, "default"),
        };
        let rows = lower_bound_rows(a, kappa, &t.rho, t.c, c_const)?;
        let mut trace = Trace::new(&["rho", "ell", "bound", "lhy", "ratio", "regime_ok"]);
        for r in &rows {
            trace.push(vec![r.rho, r.ell, r.bound, r.lhy, r.ratio, if r.regime_ok { 1.0 } else { 0.0 }]);
        }
        self.record.stages.insert(
            "thermo".into(),
            json!({ "scattering_length": a, "kappa": kappa, "c": t.c, "C": c_const, "C_source": source, "rows": rows }),
        );
        self.record.traces.insert("thermo".into(), trace);
        Ok(())
    }

    /// Per-point values of `stage.field`, taking the first particle number
    /// where a stage has several.
    fn tracked_values(&self, quantity: &str) -> Result<Vec<f64>> {
        let (stage, field) = quantity.split_once('.').expect("validated");
        let missing = || Error::Pipeline { stage: "study".into(), missing: stage.into() };
        let k = self.points.len();
        let entries: Vec<&Value> = match stage {
            "twobody" => self.record.stages.get("twobody").and_then(Value::as_array).ok_or_else(missing)?.iter().map(|v| &v["report"]).collect(),
            "kernels" => {
                let all = self.record.stages.get("kernels").and_then(Value::as_array).ok_or_else(missing)?;
                let per = all.len() / k.max(1);
                all.iter().step_by(per.max(1)).map(|v| &v["report"]).collect()
            }
            "energy" => {
                let all = self.record.stages.get("energy").and_then(|v| v["breakdowns"].as_array()).ok_or_else(missing)?;
                let per = all.len() / k.max(1);
                all.iter()
                    .step_by(per.max(1))
                    .map(|v| if v.get("spectral").is_some() { &v["spectral"] } else { &v["position"] })
                    .collect()
            }
            _ => return Err(Error::Config(format!("key `study.track.quantity`: unknown stage `{stage}`"))),
        };
        entries
            .iter()
            .map(|e| {
                e.get(field)
                    .and_then(Value::as_f64)
                    .ok_or_else(|| Error::Config(format!("key `study.track.quantity`: `{quantity}` is not a numeric output")))
            })
            .collect()
    }

    fn study(&self) -> Result<StudyReport> {
        let sweep = self.cfg.sweep.as_ref().ok_or_else(|| Error::InsufficientData("a study needs a sweep".into()))?;
        let xs = sweep.values.clone();
        let mut slopes = Vec::new();
        for t in &self.cfg.study.track {
            let ys = self.tracked_values(&t.quantity)?;
            let fit = fit_loglog(&xs, &ys)?;
            let pass = t.expected.map_or(true, |e| (fit.slope - e).abs() <= t.tolerance);
            slopes.push(TrackedSlope {
                quantity: t.quantity.clone(),
                sweep: sweep.parameter.clone(),
                x: xs.clone(),
                y: ys,
                fit,
                expected: t.expected,
                tolerance: t.tolerance,
                pass,
            });
        }
        let all_pass = slopes.iter().all(|s| s.pass);
        Ok(StudyReport { config_hash: self.record.config_hash.clone(), slopes, all_pass })
    }
}

/// Runs the selected stages in dependency order. Relative table paths in the
/// potential resolve against `base`.
pub fn execute(cfg: &RunConfig, base: Option<&Path>) -> Result<RunRecord> {
    cfg.validate()?;
    let mut stages = cfg.modules.clone();
    stages.sort();
    check_dependencies(&stages)?;
    let mut ctx = Context {
        cfg,
        base,
        points: sweep_points(cfg),
        lengths: Vec::new(),
        solutions: Vec::new(),
        window_constant: None,
        record: RunRecord::new(cfg.hash()),
    };
    for s in stages {
        match s {
            Stage::Green => ctx.green()?,
            Stage::Scatter => ctx.scatter()?,
            Stage::Twobody => ctx.twobody()?,
            Stage::Kernels => ctx.kernels()?,
            Stage::Energy => ctx.energy()?,
            Stage::Thermo => ctx.thermo()?,
        }
    }
    if !cfg.study.track.is_empty() {
        let rep = ctx.study()?;
        ctx.record.stages.insert("study".into(), serde_json::to_value(rep)?);
    }
    Ok(ctx.record)
}

/// Result of `run`: the record, where it was written and its SHA-256.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub output_dir: PathBuf,
    pub record_sha256: String,
}

fn output_dir(cfg: &RunConfig, base: &Path) -> PathBuf {
    let p = Path::new(&cfg.output);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Loads the configuration, executes it and writes the outputs next to it.
pub fn run(config_path: &Path) -> Result<RunOutcome> {
    let cfg = RunConfig::load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let start = Instant::now();
    let record = execute(&cfg, Some(base))?;
    let dir = output_dir(&cfg, base);
    let digest = write_outputs(&dir, &record, start.elapsed().as_secs_f64())?;
    Ok(RunOutcome { record, output_dir: dir, record_sha256: digest })
}

/// Runs the configuration and returns only the slope study.
pub fn study(config_path: &Path) -> Result<StudyReport> {
    let cfg = RunConfig::load(config_path)?;
    if cfg.study.track.is_empty() {
        return Err(Error::Config("key `study.track`: no quantities to track".into()));
    }
    if cfg.sweep.as_ref().map_or(0, |s| s.values.len()) < 3 {
        return Err(Error::InsufficientData("a slope study needs at least 3 sweep points".into()));
    }
    let out = run(config_path)?;
    serde_json::from_value(out.record.stages["study"].clone()).map_err(Error::from)
}
