use std::collections::BTreeMap;
use std::path::Path;

use rebact_core::metrics::{aggregate, read_results, render_summary, Rendered};
use rebact_core::EpisodeResult;

use crate::run::{verify, write_summaries};
use crate::{CliError, LOG_DIR, RESULTS_FILE};

/// Re-aggregates a finished run directory after checking every result
/// against its call log. One summary row is produced per method.
pub fn cmd_report(dir: &Path) -> Result<Rendered, CliError> {
    let results_path = dir.join(RESULTS_FILE);
    if !results_path.is_file() {
        return Err(CliError::Config(format!(
            "{} has no {RESULTS_FILE}",
            dir.display()
        )));
    }
    let results = read_results(&results_path).map_err(|e| CliError::Integrity(e.to_string()))?;
    if results.is_empty() {
        return Err(CliError::Config(format!(
            "{} is empty",
            results_path.display()
        )));
    }
    verify(&results, &dir.join(LOG_DIR))?;

    let mut by_method: BTreeMap<&'static str, Vec<EpisodeResult>> = BTreeMap::new();
    for r in results {
        by_method.entry(r.method.as_str()).or_default().push(r);
    }
    let summaries = by_method
        .iter()
        .map(|(label, rs)| aggregate(rs, label).map_err(|e| CliError::Integrity(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let rendered = render_summary(&summaries);
    write_summaries(dir, &rendered)?;
    Ok(rendered)
}
