//! `kgtrace`: ontology-guided knowledge-graph attribution pipeline.
//!
//! Exit codes: 0 success, 1 usage/validation, 2 data error, 3 transport
//! error (`extract` also exits 2/3 when some images fail).

mod args;
mod commands;
mod config;
mod report;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use kgtrace_core::{Error, ErrorClass};

use args::{Cli, Command};
use config::RunConfig;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };

    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err.class() {
                ErrorClass::Validation => 1,
                ErrorClass::Data => 2,
                ErrorClass::Transport => 3,
            })
        }
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    let config = RunConfig::resolve(
        cli.config.as_deref(),
        cli.ontology.as_deref(),
        cli.match_mode.as_deref(),
        cli.out.as_deref(),
        cli.placeholders.as_deref(),
    )?;

    match cli.command {
        Command::Extract {
            images,
            endpoint,
            model,
            prompt_template,
            no_ontology_prompt,
            timeout,
            retries,
            concurrency,
            temperature,
            seed,
        } => commands::extract::run(
            &config,
            commands::extract::ExtractArgs {
                images,
                endpoint,
                model,
                prompt_template,
                no_ontology_prompt,
                timeout,
                retries,
                concurrency,
                temperature,
                seed,
            },
        ),
        Command::Rank {
            query,
            triples,
            query_triples,
            k,
            exclude_zero,
        } => commands::rank::run(
            &config,
            commands::rank::RankArgs {
                query,
                triples,
                query_triples,
                k,
                exclude_zero,
            },
        ),
        Command::Stats {
            triples,
            group,
            query,
            thresholds,
        } => commands::stats::run(
            &config,
            commands::stats::StatsArgs {
                triples,
                group,
                query,
                thresholds,
            },
        ),
        Command::Delta { pairs, triples } => {
            commands::style::run_delta(&config, commands::style::DeltaArgs { pairs, triples })
        }
        Command::Match {
            deltas,
            world,
            labels,
            dedupe,
            label_counting,
        } => commands::style::run_match(
            &config,
            commands::style::MatchArgs {
                deltas,
                world,
                labels,
                dedupe,
                label_counting,
            },
        ),
        Command::UnlearnPlan {
            rank_reports,
            k,
            experiment_id,
        } => commands::unlearn::run_plan(
            &config,
            commands::unlearn::PlanArgs {
                rank_reports,
                k,
                experiment_id,
            },
        ),
        Command::UnlearnReport {
            before,
            after,
            pairing,
        } => commands::unlearn::run_report(
            &config,
            commands::unlearn::ReportArgs {
                before,
                after,
                pairing,
            },
        ),
        Command::Freq { triples, top_k } => {
            commands::store::run_freq(&config, commands::store::FreqArgs { triples, top_k })
        }
        Command::ExportBulk { triples, labels } => {
            commands::store::run_export(&config, commands::store::ExportArgs { triples, labels })
        }
    }
}
