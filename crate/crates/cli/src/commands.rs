use std::path::Path;

use rayon::prelude::*;
use serde_json::json;
use tmerge::benchgen::{self, GenSpec, ManifestEntry, SuiteProfile};
use tmerge::estimate::{self, Protocol};
use tmerge::oracle::{verify_optimization, Verdict};
use tmerge::report::{
    compare_instance, run_optimize, Comparison, Config, CsvRow, OptimizationReport, COMPARISON_HEADER, CSV_HEADER,
};
use tmerge::{Circuit, CircuitDocument, Order, Overlap};

use crate::error::CliError;
use crate::io::{csv_bytes, ensure_dir, read, write_atomic};
use crate::{BenchArgs, CompareArgs, EstimateArgs, GenerateArgs, OptimizeArgs, OrderArg, PolicyArg, TuneArgs, VerifyArgs};

fn load_config(path: &Path) -> Result<Config, CliError> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes).map_err(|_| CliError::Usage(format!("{} is not UTF-8", path.display())))?;
    let bad = |e: String| CliError::Usage(format!("{}: {e}", path.display()));
    if path.extension().is_some_and(|e| e == "json") {
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        // a report carries its resolved config
        let section = value.get("config").cloned().unwrap_or(value);
        serde_json::from_value(section).map_err(|e| bad(e.to_string()))
    } else {
        toml::from_str(&text).map_err(|e| bad(e.to_string()))
    }
}

impl TuneArgs {
    fn resolve(&self) -> Result<Config, CliError> {
        let mut c = match &self.config {
            Some(path) => load_config(path)?,
            None => Config::default(),
        };
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.alpha {
            c.expansion.alpha = v;
        }
        if let Some(v) = self.beta {
            c.greedy.beta = v;
        }
        if let Some(v) = self.population {
            c.ga.population_size = v;
        }
        if let Some(v) = self.generations {
            c.ga.generations = v;
        }
        if let Some(v) = self.elite {
            c.ga.elite_k = v;
        }
        if let Some(v) = self.mutation {
            c.ga.mutation_rate = v;
        }
        if let Some(v) = self.policy {
            c.policy.overlap = match v {
                PolicyArg::Disjoint => Overlap::DisjointOnly,
                PolicyArg::Overlap => Overlap::EqualAxisOverlap,
            };
        }
        if let Some(v) = self.order {
            c.policy.order = match v {
                OrderArg::Paper => Order::PaperOrder,
                OrderArg::Strict => Order::StrictCommute,
            };
        }
        if let Some(v) = self.window {
            c.lookahead_window = v;
        }
        if self.max_rounds.is_some() {
            c.ga.max_rounds = self.max_rounds;
        }
        if self.no_expansion {
            c.expansion.enabled = false;
        }
        c.validate().map_err(CliError::Usage)?;
        Ok(c.resolved())
    }
}

fn load_circuit(path: &Path) -> Result<Circuit, CliError> {
    tmerge::parse_circuit(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn profile(name: &str, count: usize, densities: &[f64]) -> Result<SuiteProfile, CliError> {
    let mut p = SuiteProfile::by_name(name, count).ok_or_else(|| {
        CliError::Usage(format!("unknown profile {name:?}; expected one of {}", SuiteProfile::NAMES.join(", ")))
    })?;
    if !densities.is_empty() {
        p = p.with_densities(densities.to_vec());
    }
    Ok(p)
}

fn provenance(spec: &GenSpec) -> serde_json::Value {
    json!({ "generator": spec })
}

pub fn generate(args: GenerateArgs) -> Result<(), CliError> {
    if let Some(name) = &args.profile {
        let out = args.out.as_deref().ok_or_else(|| CliError::Usage("--out DIR is required for a suite".into()))?;
        let p = profile(name, args.count, &args.densities)?;
        let suite = benchgen::generate_suite(&p, args.seed)?;
        ensure_dir(out)?;
        for (entry, circuit) in &suite {
            let doc = CircuitDocument::from_circuit(circuit, Some(provenance(&entry.spec())));
            write_atomic(&out.join(format!("{}.json", entry.instance)), doc.to_json().as_bytes())?;
        }
        let manifest: Vec<&ManifestEntry> = suite.iter().map(|(e, _)| e).collect();
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        write_atomic(&out.join("manifest.json"), text.as_bytes())?;
        eprintln!("wrote {} instances and manifest.json to {}", suite.len(), out.display());
        return Ok(());
    }
    let (Some(n), Some(c)) = (args.qubits, args.columns) else {
        return Err(CliError::Usage("give --qubits and --columns, or --profile".into()));
    };
    let spec = match (args.t_total, args.density) {
        (Some(t), _) => GenSpec { n, c, t_total: t, seed: args.seed },
        (None, Some(d)) if (0.0..=1.0).contains(&d) => GenSpec::with_density(n, c, d, args.seed),
        (None, Some(d)) => return Err(CliError::Usage(format!("density must be in [0, 1], got {d}"))),
        (None, None) => GenSpec::with_density(n, c, 0.5, args.seed),
    };
    let circuit = benchgen::generate(&spec)?;
    emit(args.out.as_deref(), &CircuitDocument::from_circuit(&circuit, Some(provenance(&spec))).to_json())
}

fn summarize(report: &OptimizationReport) -> String {
    format!(
        "T-depth {} -> {} (-{:.2}%), T-count {} -> {} (-{:.2}%), {} rounds, {:.3}s",
        report.input.t_depth,
        report.output.t_depth,
        report.t_depth_reduction_pct,
        report.input.t_count,
        report.output.t_count,
        report.t_count_reduction_pct,
        report.rounds,
        report.seconds
    )
}

pub fn optimize(args: OptimizeArgs) -> Result<(), CliError> {
    let config = args.tune.resolve()?;
    let circuit = load_circuit(&args.input)?;
    let (result, mut report) = run_optimize(&circuit, &config)?;
    report.source = Some(args.input.display().to_string());
    let doc = CircuitDocument::from_circuit(
        &result.circuit,
        Some(json!({ "optimized_from": report.source, "seed": config.seed })),
    );
    emit(args.out.as_deref(), &doc.to_json())?;
    if let Some(path) = &args.report {
        write_atomic(path, report.to_json().as_bytes())?;
    }
    if let Some(path) = &args.csv {
        let name = args.input.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        let row = CsvRow {
            instance: name,
            n: circuit.n(),
            c: circuit.len(),
            t_total: circuit.t_count(),
            method: "ga".into(),
            td_before: report.input.t_depth,
            td_after: report.output.t_depth,
            tc_before: report.input.t_count,
            tc_after: report.output.t_count,
            rounds: report.rounds,
            seconds: report.seconds,
            seed: config.seed,
        };
        write_atomic(path, &csv_bytes(&CSV_HEADER, &[row])?)?;
    }
    eprintln!("{}", summarize(&report));
    Ok(())
}

pub fn verify(args: VerifyArgs) -> Result<(), CliError> {
    if !(args.tol > 0.0) {
        return Err(CliError::Usage(format!("tolerance must be positive, got {}", args.tol)));
    }
    let original = load_circuit(&args.original)?;
    let optimized = load_circuit(&args.optimized)?;
    let verdict = verify_optimization(&original, &optimized, args.tol)?;
    if args.json {
        println!("{}", serde_json::to_string(&verdict).expect("verdict serializes"));
    } else {
        println!("{verdict}");
    }
    match verdict {
        Verdict::Equivalent { .. } => Ok(()),
        other => Err(CliError::Verification(format!("circuits not verified: {}", other.label()))),
    }
}

/// Instances named by a manifest, or the single circuit in a document.
fn load_instances(path: &Path) -> Result<Vec<(String, Circuit)>, CliError> {
    let bytes = read(path)?;
    let value: serde_json::Value =
        serde_json::from_slice(&bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if value.is_array() {
        let manifest: Vec<ManifestEntry> =
            serde_json::from_value(value).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        return manifest
            .into_par_iter()
            .map(|entry| Ok((entry.instance.clone(), benchgen::generate(&entry.spec())?)))
            .collect();
    }
    let name = path.file_stem().map_or_else(|| "input".to_string(), |s| s.to_string_lossy().into_owned());
    Ok(vec![(name, load_circuit(path)?)])
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

pub fn compare(args: CompareArgs) -> Result<(), CliError> {
    let config = args.tune.resolve()?;
    let instances = load_instances(&args.input)?;
    let results: Vec<Comparison> = instances
        .par_iter()
        .map(|(name, c)| compare_instance(name, c, &config))
        .collect::<Result<_, _>>()?;
    ensure_dir(&args.out)?;
    let rows: Vec<&CsvRow> = results.iter().flat_map(|r| [&r.ga, &r.lookahead]).collect();
    write_atomic(&args.out.join("compare.csv"), &csv_bytes(&CSV_HEADER, &rows)?)?;
    let summaries: Vec<_> = results.iter().map(Comparison::summary).collect();
    write_atomic(&args.out.join("aggregate.csv"), &csv_bytes(&COMPARISON_HEADER, &summaries)?)?;

    let wins = summaries.iter().filter(|s| s.ga_td_reduction_pct >= s.lookahead_td_reduction_pct).count();
    let fraction = if summaries.is_empty() { 1.0 } else { wins as f64 / summaries.len() as f64 };
    println!(
        "{} instances: mean T-depth reduction GA {:.2}% vs lookahead(w={}) {:.2}%",
        summaries.len(),
        mean(summaries.iter().map(|s| s.ga_td_reduction_pct)),
        config.lookahead_window,
        mean(summaries.iter().map(|s| s.lookahead_td_reduction_pct)),
    );
    println!(
        "mean T-count reduction GA {:.2}% vs lookahead {:.2}%",
        mean(summaries.iter().map(|s| s.ga_tc_reduction_pct)),
        mean(summaries.iter().map(|s| s.lookahead_tc_reduction_pct)),
    );
    let verdict = if fraction >= args.min_fraction { "meets" } else { "below" };
    println!(
        "GA >= lookahead on {wins}/{} instances ({:.1}%), {verdict} the {:.1}% target",
        summaries.len(),
        100.0 * fraction,
        100.0 * args.min_fraction
    );
    Ok(())
}

pub fn bench(args: BenchArgs) -> Result<(), CliError> {
    let config = args.tune.resolve()?;
    let p = profile(&args.profile, args.count, &args.densities)?;
    let suite = benchgen::generate_suite(&p, args.suite_seed)?;
    let rows: Vec<CsvRow> = suite
        .iter()
        .map(|(entry, circuit)| {
            let (_, report) = run_optimize(circuit, &config)?;
            eprintln!("{}: {}", entry.instance, summarize(&report));
            Ok(CsvRow {
                instance: entry.instance.clone(),
                n: entry.n,
                c: entry.c,
                t_total: entry.t_total,
                method: "ga".into(),
                td_before: report.input.t_depth,
                td_after: report.output.t_depth,
                tc_before: report.input.t_count,
                tc_after: report.output.t_count,
                rounds: report.rounds,
                seconds: report.seconds,
                seed: config.seed,
            })
        })
        .collect::<Result<_, CliError>>()?;
    write_atomic(&args.out, &csv_bytes(&CSV_HEADER, &rows)?)?;
    println!(
        "{} instances: mean T-depth reduction {:.2}%, T-count {:.2}%, {:.2}s total",
        rows.len(),
        mean(rows.iter().map(CsvRow::t_depth_reduction_pct)),
        mean(rows.iter().map(CsvRow::t_count_reduction_pct)),
        rows.iter().map(|r| r.seconds).sum::<f64>()
    );
    Ok(())
}

pub fn estimate(args: EstimateArgs) -> Result<(), CliError> {
    let (t_count, t_depth) = match &args.input {
        Some(path) => {
            let c = load_circuit(path)?;
            (c.t_count(), c.t_depth())
        }
        None => (args.t_count.unwrap_or(0), args.t_depth.unwrap_or(0)),
    };
    let protocol = Protocol {
        suppression_constant: args.constant,
        suppression_exponent: args.exponent,
        tiles: args.tiles,
        code_distance: args.distance,
    };
    let e = estimate::estimate(t_count, t_depth, args.target, protocol)?;
    println!("{}", e.p_max_formula);
    println!("{}", e.factory_formula);
    println!("magic states: {} in {} sequential batches", e.magic_states, e.batches);
    if let Some(path) = &args.out {
        let text = serde_json::to_string_pretty(&e).expect("estimate serializes") + "\n";
        write_atomic(path, text.as_bytes())?;
    }
    Ok(())
}
