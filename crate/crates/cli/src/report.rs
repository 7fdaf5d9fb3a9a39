use std::fmt::Write;
use std::path::Path;

use terralabel::pipeline::{average_accuracy, Metrics, SceneReport};
use terralabel::{LcClass, N_CLASSES};

use crate::run::scene_reports;
use crate::CliError;

/// Render the text report for the run stored in `dir`.
pub fn cmd_report(dir: &Path) -> Result<String, CliError> {
    let reports: Vec<SceneReport> = scene_reports(dir)?.into_iter().map(|(_, r)| r).collect();
    if reports.is_empty() {
        return Err(CliError::Missing(format!("{}: no scene metrics", dir.display())));
    }
    Ok(render_report(&reports))
}

fn short(k: usize) -> String {
    LcClass::TRAINABLE[k].name().chars().take(6).collect()
}

/// Per-scene accuracy, tile average, per-class table and the normalized
/// confusion matrix pooled over all evaluated scenes.
pub fn render_report(reports: &[SceneReport]) -> String {
    let mut s = String::new();
    let mut accuracies = Vec::new();
    let mut pooled = [[0u64; N_CLASSES]; N_CLASSES];
    let width = reports.iter().map(|r| r.scene_id.len()).max().unwrap_or(0).max(12);

    writeln!(s, "{:<width$}  accuracy", "scene").unwrap();
    for r in reports {
        match (&r.metrics, r.skipped) {
            (Some(m), false) => {
                writeln!(s, "{:<width$}  {:.4}", r.scene_id, m.accuracy).unwrap();
                accuracies.push(m.accuracy);
                for t in 0..N_CLASSES {
                    for p in 0..N_CLASSES {
                        pooled[t][p] += m.confusion[t][p];
                    }
                }
            }
            _ if r.skipped => {
                let reason = r.skip_reason.as_deref().unwrap_or("skipped");
                writeln!(s, "{:<width$}  skipped ({reason} {:.4})", r.scene_id, r.cloud_fraction).unwrap();
            }
            _ => writeln!(s, "{:<width$}  -", r.scene_id).unwrap(),
        }
    }
    match average_accuracy(&accuracies) {
        Some(a) => writeln!(s, "{:<width$}  {a:.4}", "tile average").unwrap(),
        None => writeln!(s, "{:<width$}  -", "tile average").unwrap(),
    }

    let Ok(m) = Metrics::from_confusion(pooled) else {
        return s;
    };
    writeln!(s).unwrap();
    writeln!(s, "{:<26}  recall  precision  support", "class").unwrap();
    for (k, c) in m.per_class.iter().enumerate() {
        let cell = |v: f64, ok: bool| if ok { format!("{v:.4}") } else { "-".into() };
        writeln!(
            s,
            "{:<26}  {:>6}  {:>9}  {:>7}",
            LcClass::TRAINABLE[k].name(),
            cell(c.recall, c.recall_defined),
            cell(c.precision, c.precision_defined),
            c.support
        )
        .unwrap();
    }

    writeln!(s).unwrap();
    writeln!(s, "normalized confusion matrix (rows true, columns predicted)").unwrap();
    write!(s, "{:<6}", "").unwrap();
    for k in 0..N_CLASSES {
        write!(s, "  {:>6}", short(k)).unwrap();
    }
    writeln!(s).unwrap();
    for t in 0..N_CLASSES {
        write!(s, "{:<6}", short(t)).unwrap();
        for p in 0..N_CLASSES {
            if m.per_class[t].support == 0 {
                write!(s, "  {:>6}", "-").unwrap();
            } else {
                write!(s, "  {:>6.4}", m.normalized[t][p]).unwrap();
            }
        }
        writeln!(s).unwrap();
    }
    s
}
