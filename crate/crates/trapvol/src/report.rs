//! Batch driver: run configuration, verification suites, machine-readable
//! reports.
//!
//! A run loads a JSON [`RunConfig`], executes the verification suites for
//! the requested catalog examples, and writes
//!
//! * `report.json` — the full [`Report`],
//! * `summary.csv` — one `example,check,value,tolerance,pass` row per check,
//! * `volcurve_<id>_<seed>.csv` — (t, Vol(t)) pairs for plotting.
//!
//! Reports are byte-identical across reruns of the same configuration on
//! the same build: grid reductions are ordered, random families are seeded
//! from the config, and wall-clock timings go to stdout, never into the
//! report files.

use crate::catalog::{self, ExampleRecord};
use crate::error::{GeomError, Result};
use crate::fields::seeded_profile;
use crate::nullspace::{
    degeneracy_report, detect_focal_times, focal_predictions, theorem_suite,
    NullSpaceMap, TheoremTolerances,
};
use crate::quad::{sample_lattice, QuadratureGrid};
use crate::variation::{VariationSpec, VolumeEngine};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Tolerances used by the report checks. Every value must be positive.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceSet {
    /// Marginally trapped: max|θ⁺| bound.
    pub tol_mt: f64,
    /// Null energy condition: Ric(ℓ,ℓ) ≥ −tol_nec.
    pub tol_nec: f64,
    /// Frame pairing and normality residuals.
    pub frame: f64,
    /// tr(A±) − θ± residual.
    pub trace: f64,
    /// |FD first variation| bound for admissible variations.
    pub first_variation: f64,
    /// |−∫⟨X,H⟩dV₀| bound for admissible variations.
    pub first_formula: f64,
    /// Upper bound on second variations in NEC charts.
    pub second_variation_upper: f64,
    /// Relative gap between the characteristic and general second variation formulas.
    pub formula_gap: f64,
    /// Kernel alignment residual of the null sweep.
    pub kernel: f64,
    /// Quadrature stability: integral change under order doubling.
    pub integral_stability: f64,
}

impl Default for ToleranceSet {
    fn default() -> Self {
        ToleranceSet {
            tol_mt: 1e-6,
            tol_nec: 1e-8,
            frame: 1e-10,
            trace: 1e-8,
            first_variation: 1e-6,
            first_formula: 1e-9,
            second_variation_upper: 1e-4,
            formula_gap: 1e-6,
            kernel: 1e-8,
            integral_stability: 1e-9,
        }
    }
}

impl ToleranceSet {
    fn validate(&self) -> Result<()> {
        let all = [
            self.tol_mt,
            self.tol_nec,
            self.frame,
            self.trace,
            self.first_variation,
            self.first_formula,
            self.second_variation_upper,
            self.formula_gap,
            self.kernel,
            self.integral_stability,
        ];
        if all.iter().any(|&v| !(v > 0.0)) {
            return Err(GeomError::Config("all tolerances must be strictly positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Catalog ids to run; empty means the whole catalog.
    pub examples: Vec<String>,
    /// Gauss–Legendre order per axis panel.
    pub quadrature_order: usize,
    /// Residual sweeps run on this many lattice points per axis.
    pub lattice_per_axis: usize,
    /// Seeded variations per example and suite.
    pub seeds: u64,
    /// Base RNG seed; recorded in every output for replay.
    pub rng_seed: u64,
    /// Metric finite-difference step. Applies to FD-mode charts; the
    /// shipped catalog charts carry closed-form derivatives, so this only
    /// matters for user-built charts.
    pub h_g: f64,
    /// Immersion finite-difference step; same caveat as `h_g`.
    pub h_f: f64,
    /// Volume derivative step; default 1e−2 × each example's t-range.
    pub h_t: Option<f64>,
    /// Sample count for volume curves.
    pub t_samples: usize,
    /// Seeds that also get a volcurve CSV.
    pub curve_seeds: u64,
    pub tolerances: ToleranceSet,
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            examples: Vec::new(),
            quadrature_order: 12,
            lattice_per_axis: 24,
            seeds: 32,
            rng_seed: 7,
            h_g: 1e-4,
            h_f: 1e-5,
            h_t: None,
            t_samples: 9,
            curve_seeds: 2,
            tolerances: ToleranceSet::default(),
            output_dir: None,
        }
    }
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<RunConfig> {
        let raw = std::fs::read_to_string(path)
            .map_err(|e| GeomError::Config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&raw)
            .map_err(|e| GeomError::Config(format!("cannot parse {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        if self.quadrature_order == 0 || self.t_samples < 3 || self.lattice_per_axis < 2 {
            return Err(GeomError::Config(
                "quadrature_order ≥ 1, t_samples ≥ 3 and lattice_per_axis ≥ 2 required".into(),
            ));
        }
        if !(self.h_g > 0.0) || !(self.h_f > 0.0) {
            return Err(GeomError::Config("FD steps must be positive".into()));
        }
        for id in &self.examples {
            catalog::build(id)?;
        }
        Ok(())
    }

    pub fn example_ids(&self) -> Vec<String> {
        if self.examples.is_empty() {
            catalog::ids().iter().map(|s| s.to_string()).collect()
        } else {
            self.examples.clone()
        }
    }
}

/// One row of the per-example check table.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    fn upper(name: impl Into<String>, value: f64, tolerance: f64) -> CheckRow {
        CheckRow { name: name.into(), value, tolerance, pass: value <= tolerance }
    }
}

/// One variation row: a seeded admissible variation or a reparametrized
/// inner variation of the null sweep.
#[derive(Debug, Clone, Serialize)]
pub struct VariationRow {
    pub kind: String,
    pub seed: u64,
    pub first_fd: f64,
    pub first_floor: f64,
    pub first_formula: f64,
    pub second_fd: f64,
    pub second_floor: f64,
    pub general_terms: [f64; 5],
    pub general_total: f64,
    pub characteristic: f64,
    pub formula_gap: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegeneracySummary {
    pub t_window: f64,
    pub samples: usize,
    pub singular_count: usize,
    pub max_kernel_residual: f64,
    pub min_gram_eigenvalue: f64,
    pub focal_predicted: Vec<f64>,
    pub focal_detected: Vec<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleReport {
    pub id: String,
    pub checks: Vec<CheckRow>,
    pub variations: Vec<VariationRow>,
    pub degeneracy: DegeneracySummary,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub config: RunConfig,
    pub examples: Vec<ExampleReport>,
    pub all_pass: bool,
}

pub struct RunOutcome {
    pub report: Report,
    pub output_dir: PathBuf,
    pub failing: Vec<String>,
}

/// Environment variable overriding the output directory.
pub const OUTPUT_DIR_ENV: &str = "TRAPVOL_OUT_DIR";

fn resolve_output_dir(config: &RunConfig) -> PathBuf {
    if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
        return PathBuf::from(dir);
    }
    config.output_dir.clone().unwrap_or_else(|| PathBuf::from("trapvol-out"))
}

/// Run the full verification for one example.
pub fn run_example(config: &RunConfig, id: &str) -> Result<(ExampleReport, Vec<(u64, Vec<(f64, f64)>)>)> {
    let record = catalog::build(id)?;
    let imm = &record.immersion;
    let frame = &record.frame;
    let tol = &config.tolerances;
    let grid = QuadratureGrid::for_domain(&imm.domain, config.quadrature_order);
    let lattice = sample_lattice(&imm.domain.box_intervals, config.lattice_per_axis);
    let h_t = config.h_t.unwrap_or(1e-2 * record.t_range);

    let mut checks: Vec<CheckRow> = Vec::new();

    // frame residuals over the lattice
    let mut frame_res = [0.0f64; 4];
    for x in &lattice {
        let r = frame.invariant_residuals(imm, x)?;
        for (acc, v) in frame_res.iter_mut().zip(r) {
            *acc = acc.max(v);
        }
    }
    for (name, v) in ["frame-null-plus", "frame-null-minus", "frame-pairing", "frame-normality"]
        .iter()
        .zip(frame_res)
    {
        checks.push(CheckRow::upper(name.to_string(), v, tol.frame));
    }

    // expected facts (catalog tolerances)
    for outcome in catalog::verify_all_facts(&record, config.lattice_per_axis.min(12))? {
        checks.push(CheckRow {
            name: format!("fact-{}", outcome.label),
            value: outcome.max_residual,
            tolerance: outcome.tolerance,
            pass: outcome.pass,
        });
    }

    // marginally trapped sweep
    let trapped = crate::nullframe::marginally_trapped_check(imm, frame, &lattice, tol.tol_mt)?;
    checks.push(CheckRow::upper("theta-plus-max", trapped.max_theta_plus, tol.tol_mt));
    checks.push(CheckRow::upper("trace-identity-max", {
        let mut worst = 0.0f64;
        for x in lattice.iter().step_by(3) {
            for sign in [crate::nullframe::NullSign::Plus, crate::nullframe::NullSign::Minus] {
                let a = crate::nullframe::shape_operator(imm, frame, x, sign)?;
                let th = crate::nullframe::theta(imm, frame, x, sign)?;
                worst = worst.max((a.trace() - th.value).abs());
            }
        }
        worst
    }, tol.trace));

    // pointwise NEC over the image
    let nec = catalog::nec_over_example(&record, 8)?;
    checks.push(CheckRow {
        name: "nec-min-ricci".into(),
        value: nec.min_value,
        tolerance: -tol.tol_nec,
        pass: nec.pass,
    });

    // seeded admissible variations, over cached node geometry
    let engine = VolumeEngine::new(imm, frame, &grid)?;
    let mut variations: Vec<VariationRow> = Vec::new();
    let mut curves: Vec<(u64, Vec<(f64, f64)>)> = Vec::new();
    for k in 0..config.seeds {
        let seed = config.rng_seed.wrapping_add(k);
        let phi = seeded_profile(&imm.domain, seed, 0.5);
        let spec = Arc::new(VariationSpec::admissible(phi, record.t_range));
        let d = engine.derivatives(&spec, h_t)?;
        let formula = engine.first_variation_formula(&spec)?;
        let c = engine.characteristic_second_variation(&spec)?;
        let pass = d.first.value.abs() <= tol.first_variation
            && formula.abs() <= tol.first_formula
            && d.second.value <= tol.second_variation_upper
            && c.value <= tol.second_variation_upper
            && c.relative_gap <= tol.formula_gap;
        variations.push(VariationRow {
            kind: "admissible".into(),
            seed,
            first_fd: d.first.value,
            first_floor: d.first.noise_floor,
            first_formula: formula,
            second_fd: d.second.value,
            second_floor: d.second.noise_floor,
            general_terms: c.general.terms,
            general_total: c.general.total,
            characteristic: c.value,
            formula_gap: c.relative_gap,
            pass,
        });
        if k < config.curve_seeds {
            let half = record.t_range;
            let ts: Vec<f64> = (0..config.t_samples)
                .map(|i| -half + 2.0 * half * i as f64 / (config.t_samples - 1) as f64)
                .collect();
            curves.push((seed, engine.curve(&spec, &ts)?));
        }
    }

    // reparametrized inner variations of the null sweep
    let nmap = NullSpaceMap::new(imm.clone(), frame.clone(), record.t_window);
    let suite = theorem_suite(
        &nmap,
        &grid,
        config.rng_seed..config.rng_seed + config.seeds,
        TheoremTolerances {
            first_variation: tol.first_variation,
            second_variation_upper: tol.second_variation_upper,
        },
    )?;
    for row in &suite.rows {
        variations.push(VariationRow {
            kind: "inner".into(),
            seed: row.seed,
            first_fd: row.first_fd,
            first_floor: row.first_floor,
            first_formula: row.first_formula,
            second_fd: row.second_fd,
            second_floor: row.second_floor,
            general_terms: row.general_terms,
            general_total: row.general_total,
            characteristic: row.second_formula,
            formula_gap: row.formula_gap,
            pass: row.pass && row.formula_gap <= tol.formula_gap,
        });
    }

    // degeneracy of the null sweep on its window
    let sweep_points = sample_lattice(&imm.domain.box_intervals, 4);
    let ts: Vec<f64> = (-4..=4).map(|k| record.t_window * k as f64 / 4.0).collect();
    let deg = degeneracy_report(&nmap, &sweep_points, &ts)?;
    let focal_predicted = focal_predictions(imm, frame, &imm.domain.center())?;
    let focal_detected = if focal_predicted.is_empty() {
        Vec::new()
    } else {
        let reach = focal_predicted.iter().fold(0.0f64, |m, t| m.max(t.abs())) * 1.3;
        let scan: Vec<f64> = (-60..=60).map(|k| reach * k as f64 / 60.0).collect();
        detect_focal_times(&nmap, &imm.domain.center(), &scan, 0.5)?
    };
    let degeneracy = DegeneracySummary {
        t_window: record.t_window,
        samples: deg.samples.len(),
        singular_count: deg.singular_count,
        max_kernel_residual: deg.max_kernel_residual,
        min_gram_eigenvalue: deg.min_eigenvalue,
        pass: deg.singular_count == 0 && deg.max_kernel_residual <= tol.kernel,
        focal_predicted,
        focal_detected,
    };

    // convergence hygiene: order doubling and step halving
    {
        let grid2 = QuadratureGrid::for_domain(&imm.domain, 2 * config.quadrature_order);
        let engine2 = VolumeEngine::new(imm, frame, &grid2)?;
        let phi = seeded_profile(&imm.domain, config.rng_seed, 0.5);
        let spec = Arc::new(VariationSpec::admissible(phi, record.t_range));
        let v1 = imm.volume(&grid)?;
        let v2 = imm.volume(&grid2)?;
        checks.push(CheckRow::upper("convergence-volume", (v1 - v2).abs(), tol.integral_stability));
        let c1 = engine.characteristic_second_variation(&spec)?;
        let c2 = engine2.characteristic_second_variation(&spec)?;
        checks.push(CheckRow::upper(
            "convergence-characteristic-formula",
            (c1.value - c2.value).abs(),
            tol.integral_stability,
        ));
        checks.push(CheckRow::upper(
            "convergence-general-formula",
            (c1.general.total - c2.general.total).abs(),
            tol.integral_stability,
        ));
        let d1 = engine.derivatives(&spec, h_t)?;
        let d2 = engine.derivatives(&spec, h_t / 2.0)?;
        checks.push(CheckRow::upper(
            "convergence-first-fd",
            (d1.first.value - d2.first.value).abs(),
            d1.first.noise_floor,
        ));
        checks.push(CheckRow::upper(
            "convergence-second-fd",
            (d1.second.value - d2.second.value).abs(),
            d1.second.noise_floor,
        ));
    }

    let pass = checks.iter().all(|c| c.pass)
        && variations.iter().all(|v| v.pass)
        && degeneracy.pass;
    Ok((
        ExampleReport { id: id.to_string(), checks, variations, degeneracy, pass },
        curves,
    ))
}

fn fmt_f64(v: f64) -> String {
    // shortest round-trip decimal, '.' separator, no locale
    format!("{v}")
}

fn write_summary_csv(path: &Path, report: &Report) -> Result<()> {
    let mut out = String::from("example,check,value,tolerance,pass\n");
    for ex in &report.examples {
        for c in &ex.checks {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                ex.id,
                c.name,
                fmt_f64(c.value),
                fmt_f64(c.tolerance),
                c.pass
            ));
        }
        for v in &ex.variations {
            out.push_str(&format!(
                "{},{}-seed-{}-second,{},{},{}\n",
                ex.id,
                v.kind,
                v.seed,
                fmt_f64(v.second_fd),
                fmt_f64(report.config.tolerances.second_variation_upper),
                v.pass
            ));
        }
        out.push_str(&format!(
            "{},degeneracy-kernel,{},{},{}\n",
            ex.id,
            fmt_f64(ex.degeneracy.max_kernel_residual),
            fmt_f64(report.config.tolerances.kernel),
            ex.degeneracy.pass
        ));
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_volcurves(dir: &Path, id: &str, curves: &[(u64, Vec<(f64, f64)>)]) -> Result<()> {
    for (seed, curve) in curves {
        let mut out = String::from("t,vol\n");
        for (t, v) in curve {
            out.push_str(&format!("{},{}\n", fmt_f64(*t), fmt_f64(*v)));
        }
        std::fs::write(dir.join(format!("volcurve_{id}_{seed}.csv")), out)?;
    }
    Ok(())
}

/// Execute a run: all suites for every requested example, then the report
/// files. Returns the outcome; the binary maps it to exit codes.
pub fn run(config: RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let out_dir = resolve_output_dir(&config);
    std::fs::create_dir_all(&out_dir)?;

    let mut examples = Vec::new();
    let mut failing = Vec::new();
    for id in config.example_ids() {
        let started = std::time::Instant::now();
        let (report, curves) = run_example(&config, &id)?;
        println!(
            "example {id}: {} ({:.1} s)",
            if report.pass { "pass" } else { "FAIL" },
            started.elapsed().as_secs_f64()
        );
        write_volcurves(&out_dir, &id, &curves)?;
        if !report.pass {
            for c in report.checks.iter().filter(|c| !c.pass) {
                failing.push(format!("{id}/{}: {} > {}", c.name, c.value, c.tolerance));
            }
            for v in report.variations.iter().filter(|v| !v.pass) {
                failing.push(format!(
                    "{id}/{}-seed-{}: first {} second {} gap {}",
                    v.kind, v.seed, v.first_fd, v.second_fd, v.formula_gap
                ));
            }
            if !report.degeneracy.pass {
                failing.push(format!("{id}/degeneracy"));
            }
        }
        examples.push(report);
    }
    let report = Report { all_pass: failing.is_empty(), config, examples };
    let json = serde_json::to_string_pretty(&report).expect("report serialization");
    std::fs::write(out_dir.join("report.json"), json)?;
    write_summary_csv(&out_dir.join("summary.csv"), &report)?;
    Ok(RunOutcome { report, output_dir: out_dir, failing })
}

/// `list-examples` subcommand payload.
pub fn list_examples() -> Vec<&'static str> {
    catalog::ids()
}

/// `describe <id>` subcommand payload.
pub fn describe(id: &str) -> Result<String> {
    let record: ExampleRecord = catalog::build(id)?;
    let mut out = String::new();
    out.push_str(&format!("id:        {}\n", record.id));
    out.push_str(&format!("chart:     {}\n", record.chart.name));
    out.push_str(&format!(
        "box:       {:?} (collar margin {})\n",
        record.immersion.domain.box_intervals, record.immersion.domain.boundary_margin
    ));
    out.push_str(&format!("t-range:   ±{}\n", record.t_range));
    out.push_str(&format!("t-window:  ±{}\n", record.t_window));
    out.push_str(&format!("H vanishes: {}\n", record.h_vanishes));
    out.push_str("expected facts:\n");
    for fact in &record.expected {
        out.push_str(&format!("  - {}\n", fact.label()));
    }
    Ok(out)
}

/// Entry point shared with the binary; returns the process exit code.
pub fn cli_main(args: &[String]) -> i32 {
    match args {
        [cmd, path] if cmd == "run" => {
            let config = match RunConfig::from_path(Path::new(path)) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return 2;
                }
            };
            match run(config) {
                Ok(outcome) if outcome.failing.is_empty() => {
                    println!("all suites passed; report in {}", outcome.output_dir.display());
                    0
                }
                Ok(outcome) => {
                    let mut err = std::io::stderr();
                    for row in &outcome.failing {
                        let _ = writeln!(err, "FAIL {row}");
                    }
                    1
                }
                Err(e) => {
                    eprintln!("run error: {e}");
                    1
                }
            }
        }
        [cmd] if cmd == "list-examples" => {
            for id in list_examples() {
                println!("{id}");
            }
            0
        }
        [cmd, id] if cmd == "describe" => match describe(id) {
            Ok(text) => {
                print!("{text}");
                0
            }
            Err(e) => {
                eprintln!("{e}");
                2
            }
        },
        _ => {
            eprintln!(
                "usage: trapvol run <config.json> | trapvol list-examples | trapvol describe <id>\n\
                 output directory: config `output_dir`, overridden by ${OUTPUT_DIR_ENV}"
            );
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_covers_catalog() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.example_ids().len(), catalog::ids().len());
    }

    #[test]
    fn config_rejects_bad_values() {
        let mut cfg = RunConfig::default();
        cfg.tolerances.tol_mt = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.examples = vec!["unknown-example".into()];
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.t_samples = 2;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn config_parse_rejects_unknown_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, r#"{"quadrature_order": 8, "not_a_field": 1}"#).unwrap();
        assert!(matches!(RunConfig::from_path(&path), Err(GeomError::Config(_))));
        let path2 = dir.path().join("notjson.json");
        std::fs::write(&path2, "{{{{").unwrap();
        assert!(RunConfig::from_path(&path2).is_err());
    }

    #[test]
    fn describe_and_list() {
        assert_eq!(list_examples().len(), 7);
        let text = describe("horosphere").unwrap();
        assert!(text.contains("minkowski(4)"));
        assert!(describe("nope").is_err());
    }
}
