use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde_json::json;
use traitlens::artifacts::{emit_run_reports, render_reports, latest_stats};
use traitlens::config::{Config, EndpointConfig};
use traitlens::error::{HarnessError, Result};
use traitlens::experiments::{
    administer, answers_from_records, keyword_reversal_experiment, personality_measurement_test,
    rater_reversal_experiment, reliability_validity_study, self_report_reversal_baseline, Testee,
};
use traitlens::gateway::{Gateway, LiveTransport, Transport};
use traitlens::inputs::{persona_file_for, read_bfi_statements, read_human_ratings, read_overrides, read_personas};
use traitlens::mock::{DryRunTransport, MockServer, MockTransport};
use traitlens::offline::{inter_rater, kappa_table, study_stats, trait_score_table, StatsKind};
use traitlens::rating::{Answer, Rater, RaterKind};
use traitlens::scripted::DefaultMock;
use traitlens::store::{unix_secs, RunManifest, RunStatus, RunStore};
use traitlens_core::inventory::{final_item_set, load_inventory, InventoryItem, Orientation, Trait};
use traitlens_core::psychstats::WeightScheme;
use traitlens_core::report::ReversalReport;

#[derive(Parser)]
#[command(name = "traitlens", version, about = "Administer the open-ended Big Five inventory to language models and analyze the answers")]
struct Cli {
    /// JSON file with named endpoint definitions.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run store directory.
    #[arg(long, global = true, default_value = "traitlens-runs")]
    store: PathBuf,
    /// Route every request to the built-in deterministic mock instead of the network.
    #[arg(long, global = true)]
    mock: bool,
    /// Print the rendered prompts instead of sending them; nothing is stored.
    #[arg(long, global = true)]
    dry_run: bool,
    /// Sampling temperature for all endpoints (default 0). Recorded in the manifest.
    #[arg(long, global = true)]
    temperature: Option<f64>,
    /// Kappa disagreement weights.
    #[arg(long, global = true, default_value = "quadratic")]
    weights: WeightScheme,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ask a model every inventory item once.
    Administer {
        #[arg(long)]
        model: String,
        #[arg(long, default_value = "normal")]
        variant: Orientation,
        /// Text file whose contents become the system message.
        #[arg(long)]
        system_prompt_file: Option<PathBuf>,
        /// Only the 40 items of the final set.
        #[arg(long)]
        final_set: bool,
    },
    /// Rate the answers stored in a run; ratings are appended to that run.
    Rate {
        #[arg(long)]
        run: String,
        #[arg(long, default_value = "decoder")]
        rater: RaterKind,
        #[arg(long)]
        rater_model: String,
        #[arg(long, default_value = "normal")]
        orientation: Orientation,
    },
    /// Per-trait mean scores for each rater of a run.
    Score {
        #[arg(long)]
        run: String,
        /// Use all 44 items instead of the final 40.
        #[arg(long)]
        full_bank: bool,
    },
    /// Keyword-order reversal experiment.
    ReverseItems {
        #[arg(long)]
        model: String,
        #[arg(long)]
        embed_model: Option<String>,
        /// CSV item_id,variant,corrected_score,note.
        #[arg(long)]
        overrides: Option<PathBuf>,
        #[arg(long)]
        final_set: bool,
    },
    /// Rater-scale reversal experiment on the normal-order answers of a run.
    ReverseRater {
        #[arg(long)]
        run: String,
        #[arg(long)]
        rater_model: String,
    },
    /// Numeric self-report on the original statements under both scale orders.
    BaselineBfi {
        #[arg(long)]
        model: String,
        /// CSV id,text.
        #[arg(long)]
        statements: PathBuf,
    },
    /// Persona x trait x level reliability and validity study.
    Study {
        #[arg(long)]
        model: String,
        #[arg(long)]
        rater_model: String,
        #[arg(long, default_value = "decoder")]
        rater: RaterKind,
        #[arg(long)]
        personas: PathBuf,
        #[arg(long)]
        final_set: bool,
    },
    /// Prompted level versus measured trait score.
    Measure {
        #[arg(long, value_delimiter = ',', required = true)]
        models: Vec<String>,
        #[arg(long)]
        rater_model: String,
        #[arg(long, default_value = "decoder")]
        rater: RaterKind,
        /// Directory with {model}.txt / {model}.csv persona files (or default.txt).
        #[arg(long)]
        personas_dir: PathBuf,
        #[arg(long)]
        full_bank: bool,
    },
    /// Recompute statistics from a stored run.
    Stats {
        #[arg(long)]
        run: String,
        #[arg(long, default_value = "all")]
        what: StatsKind,
        /// Human ratings CSV item_id,rater_name,score (repeatable).
        #[arg(long)]
        human: Vec<PathBuf>,
    },
    /// Rebuild the report files of a run from its log.
    Report {
        #[arg(long)]
        run: String,
    },
    /// Serve the deterministic mock over HTTP for all three endpoint protocols.
    MockServer {
        #[arg(long, default_value_t = 8787)]
        port: u16,
    },
}

struct App {
    cli_config: Config,
    store_path: PathBuf,
    mock: bool,
    dry_run: bool,
    temperature: Option<f64>,
    weights: WeightScheme,
}

impl App {
    fn endpoint(&self, name: &str) -> Result<EndpointConfig> {
        let mut cfg = self.cli_config.resolve(name, self.mock || self.dry_run)?;
        if let Some(t) = self.temperature {
            cfg.temperature = t;
        }
        if self.dry_run {
            cfg.parallelism_limit = 1;
        }
        cfg.validate()?;
        if !(self.mock || self.dry_run) {
            // Fail before a run is created; the key itself is read again per request.
            cfg.resolve_api_key()?;
        }
        Ok(cfg)
    }

    fn transport(&self) -> Arc<dyn Transport> {
        if self.dry_run {
            Arc::new(DryRunTransport::default())
        } else if self.mock {
            Arc::new(MockTransport::new(Arc::new(DefaultMock::default())))
        } else {
            Arc::new(LiveTransport)
        }
    }

    fn store(&self) -> Result<Arc<RunStore>> {
        Ok(Arc::new(RunStore::open(&self.store_path)?))
    }

    /// Runs `body` inside a new run: manifest first, status and end time after,
    /// then the run's reports are rebuilt from its log.
    fn run_experiment(
        &self,
        experiment: &str,
        endpoints: Vec<EndpointConfig>,
        item_set: &str,
        variants: &[&str],
        parameters: serde_json::Value,
        body: impl FnOnce(&Gateway) -> Result<String>,
    ) -> Result<()> {
        if self.dry_run {
            let gw = Gateway::new(self.transport());
            match body(&gw) {
                Ok(summary) => println!("dry run finished (nothing stored)\n{summary}"),
                Err(e) => println!("dry run finished (nothing stored); results are placeholders: {e}"),
            }
            return Ok(());
        }
        let store = self.store()?;
        let run_id = store.new_run_id(experiment);
        let mut manifest = RunManifest::new(run_id.clone(), experiment, endpoints);
        manifest.item_set = item_set.to_string();
        manifest.variants = variants.iter().map(|v| v.to_string()).collect();
        manifest.temperature_override = self.temperature.filter(|t| *t != 0.0);
        if let serde_json::Value::Object(map) = parameters {
            manifest.parameters = map.into_iter().collect();
        }
        store.create_run(&manifest)?;
        println!("run {run_id}");
        println!("wrote {}", store.run_dir(&run_id).join("manifest.json").display());
        let gw = Gateway::new(self.transport()).with_store(Arc::clone(&store), run_id.clone());
        let outcome = body(&gw);
        manifest.finished_at = Some(unix_secs());
        match &outcome {
            Ok(_) => manifest.status = RunStatus::Complete,
            Err(e) => {
                manifest.status = RunStatus::Failed;
                manifest.error = Some(format!("{e} (rerun to resume from the cache)"));
            }
        }
        store.write_manifest(&manifest)?;
        let summary = outcome?;
        println!("wrote {}", store.run_dir(&run_id).join("records.jsonl").display());
        for path in emit_run_reports(&store, &run_id)? {
            println!("wrote {}", path.display());
        }
        println!("{summary}");
        Ok(())
    }

    /// Appends to an existing run (ratings, offline statistics) and rebuilds its reports.
    fn extend_run(&self, run_id: &str, body: impl FnOnce(&Arc<RunStore>, &Gateway) -> Result<String>) -> Result<()> {
        let store = self.store()?;
        if store.manifest(run_id).is_none() {
            return Err(HarnessError::Config(format!("no run {run_id} in {}", self.store_path.display())));
        }
        if self.dry_run {
            let summary = body(&store, &Gateway::new(self.transport()))?;
            println!("dry run finished (nothing stored)\n{summary}");
            return Ok(());
        }
        let gw = Gateway::new(self.transport()).with_store(Arc::clone(&store), run_id.to_string());
        let summary = body(&store, &gw)?;
        for path in emit_run_reports(&store, run_id)? {
            println!("wrote {}", path.display());
        }
        println!("{summary}");
        Ok(())
    }
}

fn items_for(final_set: bool) -> (Vec<InventoryItem>, &'static str) {
    if final_set {
        (final_item_set(), "final-40")
    } else {
        (load_inventory(), "full-44")
    }
}

fn describe_reversal(r: &ReversalReport) -> String {
    let kappa = r
        .kappa
        .as_ref()
        .map_or_else(|| format!("n/a ({})", r.kappa_error.clone().unwrap_or_default()), |k| format!("{:.3}", k.kappa));
    let mut s = format!(
        "{} items analyzed, {} flagged; inconsistencies {} ({} before overrides); weighted kappa {kappa}",
        r.analyzed, r.flagged, r.inconsistency_count, r.raw_inconsistency_count
    );
    if let Some(sim) = &r.similarity {
        s.push_str(&format!("; similarity median {:.3} (IQR {:.3}-{:.3})", sim.median, sim.q1, sim.q3));
    }
    s
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<()> {
    let cli_config = match &cli.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(t) = cli.temperature {
        if !(t >= 0.0) {
            return Err(HarnessError::Config(format!("temperature must be >= 0, got {t}")));
        }
    }
    let app = App {
        cli_config,
        store_path: cli.store.clone(),
        mock: cli.mock,
        dry_run: cli.dry_run,
        temperature: cli.temperature,
        weights: cli.weights,
    };
    match cli.command {
        Command::Administer {
            model,
            variant,
            system_prompt_file,
            final_set,
        } => {
            let cfg = app.endpoint(&model)?;
            let system = system_prompt_file.as_deref().map(read_text).transpose()?;
            let (items, set) = items_for(final_set);
            let params = json!({"system_prompt_file": system_prompt_file});
            app.run_experiment("administer", vec![cfg.clone()], set, &[&variant.to_string()], params, |gw| {
                let answers = administer(gw, &cfg, &items, variant, system.as_deref())?;
                Ok(format!("{} answers from {}", answers.len(), cfg.model_id))
            })
        }
        Command::Rate {
            run,
            rater,
            rater_model,
            orientation,
        } => {
            let rater = Rater {
                kind: rater,
                cfg: app.endpoint(&rater_model)?,
            };
            app.extend_run(&run, |store, gw| {
                let answers = answers_from_records(&store.run_records(&run)?);
                if answers.is_empty() {
                    return Err(HarnessError::Precondition(format!("run {run} holds no administered answers")));
                }
                let (mut ok, mut failed) = (0, 0);
                for a in &answers {
                    let answer = Answer {
                        item: &a.item,
                        text: &a.exchange.response_text,
                        answer_ref: &a.exchange.request_hash,
                        respondent: None,
                    };
                    match rater.rate(gw, answer, orientation)?.rating {
                        Ok(_) => ok += 1,
                        Err(e) => {
                            failed += 1;
                            log::warn!("{} not rated: {e}", a.item.id);
                        }
                    }
                }
                Ok(format!("{ok} answers rated by {}, {failed} unparseable", rater.id()))
            })
        }
        Command::Score { run, full_bank } => app.extend_run(&run, |store, _| {
            let table = trait_score_table(&store.run_records(&run)?, full_bank)?;
            let mut out = format!("trait scores ({})", table.item_set);
            for (rater, profile) in &table.profiles {
                out.push_str(&format!("\n  {rater}:"));
                for s in &profile.scores {
                    out.push_str(&format!(" {}={:.3}", s.trait_.name(), s.mean));
                }
            }
            if !app.dry_run {
                store.record_stats(&run, "trait_scores", serde_json::to_value(&table).expect("plain data"))?;
            }
            Ok(out)
        }),
        Command::ReverseItems {
            model,
            embed_model,
            overrides,
            final_set,
        } => {
            let cfg = app.endpoint(&model)?;
            let embed = embed_model.as_deref().map(|m| app.endpoint(m)).transpose()?;
            let overrides = overrides.as_deref().map(read_overrides).transpose()?.unwrap_or_default();
            let (items, set) = items_for(final_set);
            let mut endpoints = vec![cfg.clone()];
            endpoints.extend(embed.clone());
            let params = json!({"overrides": overrides, "weights": app.weights});
            app.run_experiment("reverse-items", endpoints, set, &["normal", "reversed"], params, |gw| {
                let r = keyword_reversal_experiment(gw, &cfg, embed.as_ref(), &items, &overrides, app.weights)?;
                Ok(describe_reversal(&r))
            })
        }
        Command::ReverseRater { run, rater_model } => {
            let rater_cfg = app.endpoint(&rater_model)?;
            let store = app.store()?;
            let source = store
                .manifest(&run)
                .ok_or_else(|| HarnessError::Config(format!("no run {run} in {}", app.store_path.display())))?;
            let answers: Vec<_> = answers_from_records(&store.run_records(&run)?)
                .into_iter()
                .filter(|a| a.orientation == Orientation::Normal && a.exchange.system_text.is_none())
                .collect();
            if answers.is_empty() {
                return Err(HarnessError::Precondition(format!("run {run} holds no normal-order answers")));
            }
            drop(store);
            let mut endpoints = source.endpoints.clone();
            endpoints.push(rater_cfg.clone());
            let params = json!({"source_run": run, "weights": app.weights});
            app.run_experiment("reverse-rater", endpoints, &source.item_set, &["normal", "reversed"], params, |gw| {
                let r = rater_reversal_experiment(gw, &rater_cfg, &answers, app.weights)?;
                Ok(describe_reversal(&r))
            })
        }
        Command::BaselineBfi { model, statements } => {
            let cfg = app.endpoint(&model)?;
            let list = read_bfi_statements(&statements)?;
            let params = json!({"statements": statements, "weights": app.weights});
            app.run_experiment("baseline-bfi", vec![cfg.clone()], "bfi-original", &["normal", "reversed"], params, |gw| {
                let r = self_report_reversal_baseline(gw, &cfg, &list, app.weights)?;
                Ok(describe_reversal(&r))
            })
        }
        Command::Study {
            model,
            rater_model,
            rater,
            personas,
            final_set,
        } => {
            let testee = app.endpoint(&model)?;
            let rater = Rater {
                kind: rater,
                cfg: app.endpoint(&rater_model)?,
            };
            let persona_list = read_personas(&personas)?;
            let (items, set) = items_for(final_set);
            let params = json!({"personas": personas, "persona_count": persona_list.len()});
            app.run_experiment("study", vec![testee.clone(), rater.cfg.clone()], set, &["normal"], params, |gw| {
                let out = reliability_validity_study(gw, &testee, &rater, &persona_list, &items)?;
                let s = &out.stats;
                let mut text = format!(
                    "{} respondents x {} items; KMO {}; retained {} components (Kaiser {}, scree elbow {}); dropped {:?}",
                    out.respondents,
                    s.matrix.ncols(),
                    s.pca.kmo.map_or("n/a".into(), |k| format!("{k:.3}")),
                    s.pca.retained_k,
                    s.pca.kaiser_count,
                    s.pca.elbow_count.map_or("n/a".into(), |e| e.to_string()),
                    s.reduction.dropped()
                );
                for (t, a) in &s.alphas {
                    text.push_str(&format!("\n  alpha {} = {:.3}", t.name(), a.alpha));
                }
                text.push_str(&format!(
                    "\n  component labels: {:?}; flagged items: {:?}",
                    s.assignment.labels.iter().map(|l| l.map(Trait::name)).collect::<Vec<_>>(),
                    s.assignment.flagged.iter().map(|f| f.item.as_str()).collect::<Vec<_>>()
                ));
                Ok(text)
            })
        }
        Command::Measure {
            models,
            rater_model,
            rater,
            personas_dir,
            full_bank,
        } => {
            let testees = models
                .iter()
                .map(|m| {
                    Ok(Testee {
                        cfg: app.endpoint(m)?,
                        personas: read_personas(&persona_file_for(&personas_dir, m)?)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let rater = Rater {
                kind: rater,
                cfg: app.endpoint(&rater_model)?,
            };
            let items = if full_bank { load_inventory() } else { final_item_set() };
            let set = if full_bank { "full-44" } else { "final-40" };
            let mut endpoints: Vec<EndpointConfig> = testees.iter().map(|t| t.cfg.clone()).collect();
            endpoints.push(rater.cfg.clone());
            let params = json!({"personas_dir": personas_dir});
            app.run_experiment("measure", endpoints, set, &["normal"], params, |gw| {
                let report = personality_measurement_test(gw, &testees, &rater, &items, &Trait::ALL)?;
                let mut text = format!("{} cells", report.cells.len());
                for c in &report.cells {
                    if let Some(s) = &c.summary {
                        text.push_str(&format!(
                            "\n  {} {} level {}: mean {:.3} (n = {})",
                            c.model,
                            c.trait_.name(),
                            c.level,
                            s.mean,
                            s.n
                        ));
                    }
                }
                Ok(text)
            })
        }
        Command::Stats { run, what, human } => {
            let humans = human
                .iter()
                .map(|p| read_human_ratings(p))
                .collect::<Result<Vec<_>>>()?
                .concat();
            app.extend_run(&run, |store, _| {
                let records = store.run_records(&run)?;
                let mut lines = Vec::new();
                let wants = |k: StatsKind| what == k || what == StatsKind::All;
                let record = |name: &str, value: serde_json::Value| -> Result<()> {
                    if !app.dry_run {
                        store.record_stats(&run, name, value)?;
                    }
                    Ok(())
                };
                let skip_or_fail = |e: HarnessError, lines: &mut Vec<String>, label: &str| -> Result<()> {
                    if what == StatsKind::All && matches!(e, HarnessError::Precondition(_)) {
                        lines.push(format!("{label}: skipped ({e})"));
                        Ok(())
                    } else {
                        Err(e)
                    }
                };
                if wants(StatsKind::Kappa) {
                    let table = kappa_table(&records, app.weights)?;
                    if table.is_empty() {
                        skip_or_fail(
                            HarnessError::Precondition("no paired normal/reversed scores in this run".into()),
                            &mut lines,
                            "kappa",
                        )?;
                    } else {
                        for (label, k) in &table {
                            lines.push(format!(
                                "kappa {label}: {:.3} (95% CI {:.3}-{:.3}, p {:.3e}, n {})",
                                k.kappa, k.ci95.0, k.ci95.1, k.p_value, k.n_pairs
                            ));
                        }
                        record("kappa", serde_json::to_value(&table).expect("plain data"))?;
                    }
                }
                if wants(StatsKind::Icc) {
                    match inter_rater(&records, &humans) {
                        Ok(ir) => {
                            for (label, r) in &ir.icc {
                                lines.push(format!(
                                    "ICC {label}: single {:.3}, average {:.3}, F {} ({} items x {} raters)",
                                    r.icc_single,
                                    r.icc_average,
                                    r.f_value.map_or("inf".into(), |f| format!("{f:.3}")),
                                    r.n_subjects,
                                    r.k_raters
                                ));
                            }
                            record("interrater", serde_json::to_value(&ir).expect("plain data"))?;
                        }
                        Err(e) => skip_or_fail(e, &mut lines, "icc")?,
                    }
                }
                if wants(StatsKind::Alpha) || wants(StatsKind::Pca) {
                    match study_stats(&records) {
                        Ok(s) => {
                            if wants(StatsKind::Alpha) {
                                for (t, a) in &s.alphas {
                                    lines.push(format!("alpha {}: {:.3}", t.name(), a.alpha));
                                    record(&format!("alpha:{t}"), serde_json::to_value(a).expect("plain data"))?;
                                }
                            }
                            if wants(StatsKind::Pca) {
                                lines.push(format!(
                                    "PCA: KMO {}, retained {} (Kaiser {}, elbow {:?}), dropped {:?}",
                                    s.pca.kmo.map_or("n/a".into(), |k| format!("{k:.3}")),
                                    s.pca.retained_k,
                                    s.pca.kaiser_count,
                                    s.pca.elbow_count,
                                    s.reduction.dropped()
                                ));
                                record("pca", serde_json::to_value(&s.pca).expect("plain data"))?;
                                record("reduction", serde_json::to_value(&s.reduction).expect("plain data"))?;
                                record("assignment", serde_json::to_value(&s.assignment).expect("plain data"))?;
                            }
                        }
                        Err(e) => skip_or_fail(e, &mut lines, "alpha/pca")?,
                    }
                }
                Ok(lines.join("\n"))
            })
        }
        Command::Report { run } => {
            let store = app.store()?;
            if store.manifest(&run).is_none() {
                return Err(HarnessError::Config(format!("no run {run} in {}", app.store_path.display())));
            }
            if app.dry_run {
                for (name, _) in render_reports(&latest_stats(&store.run_records(&run)?))? {
                    println!("would write {}", store.reports_dir(&run).join(name).display());
                }
                return Ok(());
            }
            let paths = emit_run_reports(&store, &run)?;
            for p in &paths {
                println!("wrote {}", p.display());
            }
            if paths.is_empty() {
                println!("run {run} holds no statistics yet");
            }
            Ok(())
        }
        Command::MockServer { port } => {
            let server = MockServer::start_on(&format!("127.0.0.1:{port}"), Arc::new(DefaultMock::default()))?;
            println!("mock server listening on {}", server.base_url());
            server.wait();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
