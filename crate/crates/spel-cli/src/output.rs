//! Deterministic result documents.
//!
//! Everything here is rendered by hand so the bytes are a pure function of
//! the resolved configuration and the numbers: floats at 17 significant
//! digits (enough to round-trip f64 exactly), no timestamps, no map
//! iteration order. Running the same command twice must produce identical
//! files.

use spel::calibrate::InferenceReport;
use spel::scores::ScoreMatrix;
use spel::simlab::{ExperimentConfig, MonteCarloResult, TimingReport};

use crate::{InferArgs, SimulateArgs, TimingArgs};

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_list(xs: &[f64]) -> String {
    let body: Vec<String> = xs.iter().map(|&x| fmt(x)).collect();
    format!("[{}]", body.join(", "))
}

/// One-based indices, matching the policy_N column names of the input.
fn fmt_indices(xs: &[usize]) -> String {
    let body: Vec<String> = xs.iter().map(|&i| (i + 1).to_string()).collect();
    format!("[{}]", body.join(", "))
}

fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Empirical quantile of the bootstrap draws at probability `p`, for the
/// summary block only (the critical value itself comes from the library).
fn draw_quantile(sorted: &[f64], p: f64) -> f64 {
    let b = sorted.len();
    let idx = ((b as f64 - 1.0) * p).round() as usize;
    sorted[idx.min(b - 1)]
}

pub(crate) fn infer_document(
    args: &InferArgs,
    scores: &ScoreMatrix,
    report: &InferenceReport,
) -> String {
    let bound = &report.bound;
    let active = &report.active;
    let (draw_count, draw_mean, draw_quantiles) = match &report.calibration {
        Some(cal) => {
            let mut sorted = cal.draws.clone();
            sorted.sort_by(f64::total_cmp);
            let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
            let qs = vec![
                sorted[0],
                draw_quantile(&sorted, 0.5),
                draw_quantile(&sorted, 0.95),
                sorted[sorted.len() - 1],
            ];
            (sorted.len(), fmt(mean), fmt_list(&qs))
        }
        None => (0, "null".to_string(), "[]".to_string()),
    };
    let mut doc = String::new();
    doc.push_str("{\n");
    let mut field = |key: &str, value: String| {
        doc.push_str(&format!("  {}: {},\n", json_string(key), value));
    };
    field("tool", json_string("spel"));
    field("version", json_string(env!("CARGO_PKG_VERSION")));
    field("command", json_string("infer"));
    field("scores_path", json_string(&args.scores.display().to_string()));
    field("n", scores.n().to_string());
    field("num_policies", scores.num_policies().to_string());
    field("alpha", fmt(args.alpha));
    field("requested_method", json_string(args.method.label()));
    field("resolved_method", json_string(bound.method.label()));
    field("boot_draws", args.boot_draws.to_string());
    field("multiplier", json_string(args.multiplier.label()));
    field("seed", args.seed.to_string());
    field("lower_bound", fmt(bound.lower));
    field("level", fmt(bound.level));
    field("critical_value", fmt(bound.critical_value));
    field("weights", fmt_list(&bound.weights));
    field("face", fmt_indices(&bound.face));
    field("active_set", fmt_indices(active.indices.active()));
    field("kappa", fmt(active.kappa));
    field("active_gaps", fmt_list(&active.gaps));
    field("draw_count", draw_count.to_string());
    field("draw_mean", draw_mean);
    field("draw_quantiles", draw_quantiles);
    // Trailing comma from the last field is not valid JSON; trim it.
    let trimmed = doc.trim_end_matches(",\n").to_string();
    format!("{trimmed}\n}}\n")
}

/// The `# config` line embeds everything needed to reproduce the file.
/// Worker count and output path are deliberately absent: they change the
/// wall clock and the destination, never the bytes.
fn simulate_config_line(args: &SimulateArgs) -> String {
    let js: Vec<String> = args.j.iter().map(|j| j.to_string()).collect();
    let rhos: Vec<String> = args.rho.iter().map(|&r| fmt(r)).collect();
    format!(
        "# config {{\"experiment\": {}, \"n\": {}, \"j\": [{}], \"k\": {}, \
         \"rho\": [{}], \"reps\": {}, \"boot_draws\": {}, \"alpha\": {}, \
         \"multiplier\": {}, \"seed\": {}}}",
        json_string(args.experiment.label()),
        args.n,
        js.join(", "),
        args.k,
        rhos.join(", "),
        args.reps,
        args.boot_draws,
        fmt(args.alpha),
        json_string(args.multiplier.label()),
        args.seed,
    )
}

pub(crate) fn simulate_document(
    args: &SimulateArgs,
    rows: &[(ExperimentConfig, MonteCarloResult)],
) -> String {
    let mut doc = simulate_config_line(args);
    doc.push('\n');
    doc.push_str(
        "experiment,n,J,k,rho,method,coverage,mean_shortfall,mean_critical_value,\
         mean_active_size,reps,B,seed,tau0,tau0_se\n",
    );
    for (config, result) in rows {
        for summary in &result.methods {
            doc.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                config.experiment.label(),
                config.n,
                config.num_policies,
                config.tie_multiplicity,
                fmt(config.rho),
                summary.method.label(),
                fmt(summary.coverage),
                fmt(summary.mean_shortfall),
                fmt(summary.mean_critical_value),
                fmt(summary.mean_active_size),
                config.reps,
                config.boot_draws,
                config.master_seed,
                fmt(result.tau0),
                fmt(result.tau0_se),
            ));
        }
    }
    doc
}

pub(crate) fn timing_document(args: &TimingArgs, report: &TimingReport) -> String {
    let mut doc = format!(
        "# config {{\"n\": {}, \"j\": {}, \"boot_draws\": {}, \"reps\": {}, \"seed\": {}}}\n",
        args.n, args.j, args.boot_draws, args.reps, args.seed
    );
    doc.push_str("n,J,B,arm,total_secs,per_draw_secs,ratio\n");
    doc.push_str(&format!(
        "{},{},{},score-level,{},{},{}\n",
        report.n,
        report.num_policies,
        report.boot_draws,
        fmt(report.score_secs),
        fmt(report.score_per_draw_secs),
        fmt(1.0),
    ));
    doc.push_str(&format!(
        "{},{},{},refit-per-resample,{},{},{}\n",
        report.n,
        report.num_policies,
        report.boot_draws,
        fmt(report.refit_secs),
        fmt(report.refit_per_draw_secs),
        fmt(report.ratio),
    ));
    doc
}
