//! `unlearn-plan` and `unlearn-report`.

use std::path::PathBuf;

use kgtrace_core::unlearn::{
    compare_runs, load_embeddings, load_pairing, save_removal_plan, select_removals,
    SimilarityReport,
};
use kgtrace_core::Result;

use crate::config::RunConfig;
use crate::report::{write_json, write_text};

use super::ensure_out_dir;
use super::rank::load_rank_report;

pub struct PlanArgs {
    pub rank_reports: Vec<PathBuf>,
    pub k: Option<usize>,
    pub experiment_id: String,
}

pub fn run_plan(config: &RunConfig, args: PlanArgs) -> Result<u8> {
    ensure_out_dir(config)?;
    let k = args.k.unwrap_or(config.k);
    if k == 0 {
        return Err(kgtrace_core::Error::Config("-k must be >= 1".into()));
    }
    let results = args
        .rank_reports
        .iter()
        .map(|path| load_rank_report(path))
        .collect::<Result<Vec<_>>>()?;
    let plan = select_removals(&results, k, &args.experiment_id)?;

    let path = config.out_dir.join("removal_plan.tsv");
    save_removal_plan(&plan, &path)?;
    write_json(&config.out_dir.join("removal_plan.json"), &plan)?;
    println!(
        "experiment `{}`: {} prompt(s), {} image(s) to remove; wrote {}",
        plan.experiment_id,
        plan.per_prompt.len(),
        plan.total_removed,
        path.display()
    );
    Ok(0)
}

pub struct ReportArgs {
    pub before: PathBuf,
    pub after: PathBuf,
    pub pairing: PathBuf,
}

pub fn run_report(config: &RunConfig, args: ReportArgs) -> Result<u8> {
    ensure_out_dir(config)?;
    let before = load_embeddings(&args.before)?;
    let after = load_embeddings(&args.after)?;
    let pairing = load_pairing(&args.pairing)?;
    let report = compare_runs(&before, &after, &pairing)?;

    write_text(
        &config.out_dir.join("similarity.tsv"),
        &similarity_to_tsv(&report),
    )?;
    write_text(
        &config.out_dir.join("similarity_per_prompt.tsv"),
        &per_prompt_to_tsv(&report),
    )?;
    write_json(&config.out_dir.join("similarity.json"), &report)?;
    println!("cosine mean/std/range: {}", report.summary_row());
    Ok(0)
}

pub(crate) fn similarity_to_tsv(report: &SimilarityReport) -> String {
    format!(
        "metric\tvalue\nmean\t{:.3}\nstd\t{:.3}\nmin\t{:.3}\nmax\t{:.3}\nsummary\t{}\n",
        report.mean,
        report.std,
        report.min,
        report.max,
        report.summary_row()
    )
}

fn per_prompt_to_tsv(report: &SimilarityReport) -> String {
    let mut out = String::from("prompt_id\tcosine\n");
    for (prompt_id, value) in &report.per_prompt {
        out.push_str(&format!("{prompt_id}\t{value:.3}\n"));
    }
    out
}
