//! `cbd`: decide contextuality of content-context systems of binary
//! random variables from the command line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use cbd_cli::demo::{demo_double_slit_params, double_slit_description, pr_box_system};
use cbd_cli::format::{parse_document, render_document, system_to_document, SystemDocument};
use cbd_cli::report::{
    fill_analysis, reduction_document, render_closed_form, render_human_analysis,
    render_machine, render_system_matrix, step_string, verdict_string, ClosedFormDocument,
    ReportDocument, SweepDocument,
};
use cbd_core::coupling::{
    coincidence_probability, is_noncontextual_lp, Coupling, CouplingError, VariableRef,
};
use cbd_core::cyclic::{cyclic_criterion, detect_cycle, CriterionReport};
use cbd_core::model::{ContentId, ContextId, System, Verdict};
use cbd_core::rational::{
    format_rational, is_probability, parse_rational, rat_int, Rational,
};
use cbd_core::reduce::reduce_fixpoint;
use cbd_core::slits::{
    build_double_slit, closed_form_double_slit, paper_triple_slit_example,
    sample_double_slit_params, ClosedFormReport, DoubleSlitParams,
};
use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

#[derive(Parser)]
#[command(
    name = "cbd",
    version,
    about = "Contextuality-by-Default analysis of systems of binary random variables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

// Parsed once at startup; the size skew from the five inline rationals in
// DoubleSlit is irrelevant.
#[allow(clippy::large_enum_variant)]
#[derive(Subcommand)]
enum Command {
    /// Decide whether the system in a .sys file is contextual.
    Analyze {
        file: PathBuf,
        /// auto reduces first, then uses the cyclic criterion when the
        /// reduced system is a cycle and the coupling LP otherwise.
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Include the witness coupling on noncontextual LP verdicts.
        #[arg(long)]
        witness: bool,
        /// Include the reduction steps in the report.
        #[arg(long)]
        trace: bool,
        /// Emit the canonical machine-readable report instead of text.
        #[arg(long)]
        machine: bool,
    },
    /// Drop deterministic variables and small contexts to a fixpoint.
    Reduce {
        file: PathBuf,
        #[arg(long)]
        machine: bool,
    },
    /// Evaluate the double-slit closed form at one parameter point.
    DoubleSlit {
        /// Detection probability with only the left slit open.
        #[arg(long, value_parser = probability_value)]
        p: Rational,
        /// Detection probability with only the right slit open.
        #[arg(long, value_parser = probability_value)]
        q: Rational,
        /// Both open: detected through the left slit only.
        #[arg(long, value_parser = probability_value)]
        pp: Rational,
        /// Both open: detected through the right slit only.
        #[arg(long, value_parser = probability_value)]
        qp: Rational,
        /// Both open: detected through both slits.
        #[arg(long, value_parser = probability_value)]
        rp: Rational,
        /// Also emit the generated system document.
        #[arg(long)]
        emit_system: bool,
        #[arg(long)]
        machine: bool,
    },
    /// Sample and/or grid the double-slit parameter region and count
    /// closed-form verdicts, optionally cross-checking against the LP.
    Sweep {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also sweep the full grid with this step, e.g. 1/8.
        #[arg(long, value_parser = positive_rational)]
        grid_step: Option<Rational>,
        /// Cross-check this many of the sampled points against the LP.
        #[arg(long, default_value_t = 0)]
        lp_subsample: usize,
        #[arg(long)]
        machine: bool,
    },
    /// Analyze a bundled example: double-slit-paper, triple-slit-paper
    /// or pr-box.
    Demo {
        name: String,
        #[arg(long)]
        machine: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Cyclic,
    Lp,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Cap(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Cap(_) => 3,
        }
    }
}

fn probability_value(s: &str) -> Result<Rational, String> {
    let r = parse_rational(s).map_err(|e| e.to_string())?;
    if !is_probability(&r) {
        return Err(format!("{s} is not a probability in [0, 1]"));
    }
    Ok(r)
}

fn positive_rational(s: &str) -> Result<Rational, String> {
    let r = parse_rational(s).map_err(|e| e.to_string())?;
    if r <= rat_int(0) {
        return Err(format!("{s} is not a positive rational"));
    }
    Ok(r)
}

fn read_system(path: &Path) -> Result<(SystemDocument, System), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let doc = parse_document(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let system = cbd_cli::format::document_to_system(&doc)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    Ok((doc, system))
}

/// LP failures are resource caps (variable cap, pivot budget) — exit 3.
fn run_lp(system: &System) -> Result<Verdict, CliError> {
    is_noncontextual_lp(system).map_err(|e| match e {
        CouplingError::CapExceeded { .. } | CouplingError::Solve(_) => {
            CliError::Cap(e.to_string())
        }
        other => CliError::Input(other.to_string()),
    })
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze { file, method, witness, trace, machine } => {
            cmd_analyze(&file, method, witness, trace, machine)
        }
        Command::Reduce { file, machine } => cmd_reduce(&file, machine),
        Command::DoubleSlit { p, q, pp, qp, rp, emit_system, machine } => {
            cmd_double_slit(&p, &q, &pp, &qp, &rp, emit_system, machine)
        }
        Command::Sweep { samples, seed, grid_step, lp_subsample, machine } => {
            cmd_sweep(samples, seed, grid_step.as_ref(), lp_subsample, machine)
        }
        Command::Demo { name, machine } => cmd_demo(&name, machine),
    };
    if let Err(error) = result {
        eprintln!("error: {error}");
        std::process::exit(error.code());
    }
}

/// Runs the selected decision route and returns the verdict together with
/// the cyclic report (when that route ran) and the reduction summary
/// (when auto reduced first).
fn decide(
    system: &System,
    method: MethodArg,
    include_steps: bool,
) -> Result<
    (Verdict, Option<CriterionReport>, Option<cbd_cli::report::ReductionDocument>),
    CliError,
> {
    match method {
        MethodArg::Auto => {
            let (reduced, trace) = reduce_fixpoint(system);
            let reduction = reduction_document(&trace, &reduced, include_steps);
            match detect_cycle(&reduced) {
                Some(layout) => {
                    let (verdict, report) = cyclic_criterion(&reduced, &layout)
                        .map_err(|e| CliError::Input(e.to_string()))?;
                    Ok((verdict, Some(report), Some(reduction)))
                }
                None => Ok((run_lp(&reduced)?, None, Some(reduction))),
            }
        }
        MethodArg::Cyclic => {
            let layout = detect_cycle(system).ok_or_else(|| {
                CliError::Input(
                    "system is not a cycle of two-variable contexts; \
                     use --method lp or --method auto"
                        .to_string(),
                )
            })?;
            let (verdict, report) = cyclic_criterion(system, &layout)
                .map_err(|e| CliError::Input(e.to_string()))?;
            Ok((verdict, Some(report), None))
        }
        MethodArg::Lp => Ok((run_lp(system)?, None, None)),
    }
}

fn cmd_analyze(
    file: &Path,
    method: MethodArg,
    witness: bool,
    trace: bool,
    machine: bool,
) -> Result<(), CliError> {
    let (_, system) = read_system(file)?;
    let (verdict, criterion, reduction) = decide(&system, method, trace)?;
    let mut report = ReportDocument::new("analyze");
    report.reduction = reduction;
    fill_analysis(&mut report, &system, &verdict, criterion.as_ref(), witness);
    if machine {
        print!("{}", render_machine(&report));
    } else {
        print!("{}", render_human_analysis(&system, &report, &verdict));
        if witness && report.witness.is_none() {
            println!(
                "witness: none (witnesses come from the coupling-lp route on \
                 noncontextual systems)"
            );
        }
    }
    Ok(())
}

fn cmd_reduce(file: &Path, machine: bool) -> Result<(), CliError> {
    let (doc, system) = read_system(file)?;
    let (reduced, trace) = reduce_fixpoint(&system);
    let reduced_doc = system_to_document(&reduced, doc.description.clone());
    let mut report = ReportDocument::new("reduce");
    report.reduction = Some(reduction_document(&trace, &reduced, true));
    report.system = Some(reduced_doc.clone());
    if machine {
        print!("{}", render_machine(&report));
    } else {
        if trace.is_empty() {
            println!("already reduced: no deterministic variables, no small contexts");
        } else {
            for (i, step) in trace.steps.iter().enumerate() {
                println!("step {}: {}", i + 1, step_string(&step.kind));
            }
        }
        print!("{}", render_system_matrix(&reduced));
        println!("reduced document:");
        print!("{}", render_document(&reduced_doc));
    }
    Ok(())
}

fn closed_form_document(report: &ClosedFormReport) -> ClosedFormDocument {
    ClosedFormDocument {
        a: [&report.a1, &report.a2, &report.a3, &report.a4]
            .into_iter()
            .map(format_rational)
            .collect(),
        b: format_rational(&report.b),
        max_a: format_rational(report.max_a()),
        noncontextual: report.noncontextual,
    }
}

fn cmd_double_slit(
    p: &Rational,
    q: &Rational,
    pp: &Rational,
    qp: &Rational,
    rp: &Rational,
    emit_system: bool,
    machine: bool,
) -> Result<(), CliError> {
    let params =
        DoubleSlitParams::new(p.clone(), q.clone(), pp.clone(), qp.clone(), rp.clone())
            .map_err(|e| CliError::Input(e.to_string()))?;
    let closed = closed_form_double_slit(&params);
    let mut report = ReportDocument::new("double-slit");
    report.verdict = Some(verdict_string(!closed.noncontextual));
    report.closed_form = Some(closed_form_document(&closed));
    if emit_system {
        let system = build_double_slit(&params);
        report.system =
            Some(system_to_document(&system, Some(double_slit_description(&params))));
    }
    if machine {
        print!("{}", render_machine(&report));
    } else {
        print!("{}", render_closed_form(report.closed_form.as_ref().expect("set above")));
        if let Some(doc) = &report.system {
            println!("system document:");
            print!("{}", render_document(doc));
        }
    }
    Ok(())
}

fn grid_axis(step: &Rational) -> Vec<Rational> {
    let mut axis = Vec::new();
    let mut value = rat_int(0);
    while value <= rat_int(1) {
        axis.push(value.clone());
        value += step;
    }
    axis
}

fn cmd_sweep(
    samples: usize,
    seed: u64,
    grid_step: Option<&Rational>,
    lp_subsample: usize,
    machine: bool,
) -> Result<(), CliError> {
    let mut noncontextual = 0usize;
    let mut contextual = 0usize;
    let mut counterexample: Option<String> = None;
    let mut tally = |params: &DoubleSlitParams, counterexample: &mut Option<String>| {
        if closed_form_double_slit(params).noncontextual {
            noncontextual += 1;
        } else {
            contextual += 1;
            counterexample
                .get_or_insert_with(|| format!("closed form contextual at {params:?}"));
        }
    };

    let sampled = sample_double_slit_params(samples, seed);
    for params in &sampled {
        tally(params, &mut counterexample);
    }

    let mut grid_points = 0usize;
    if let Some(step) = grid_step {
        let axis = grid_axis(step);
        let one = rat_int(1);
        for p in &axis {
            for q in &axis {
                for pp in &axis {
                    for qp in &axis {
                        if pp + qp > one {
                            continue;
                        }
                        for rp in &axis {
                            if pp + qp + rp > one {
                                continue;
                            }
                            let params = DoubleSlitParams::new(
                                p.clone(),
                                q.clone(),
                                pp.clone(),
                                qp.clone(),
                                rp.clone(),
                            )
                            .expect("grid point is in the region");
                            grid_points += 1;
                            tally(&params, &mut counterexample);
                        }
                    }
                }
            }
        }
    }

    let lp_checked = lp_subsample.min(sampled.len());
    let mut lp_agreements = 0usize;
    for params in sampled.iter().take(lp_checked) {
        let closed = closed_form_double_slit(params).noncontextual;
        let lp = !run_lp(&build_double_slit(params))?.contextual;
        if closed == lp {
            lp_agreements += 1;
        } else if counterexample.is_none() {
            counterexample = Some(format!("closed form and LP disagree at {params:?}"));
        }
    }

    let mut report = ReportDocument::new("sweep");
    report.sweep = Some(SweepDocument {
        samples,
        seed,
        grid_step: grid_step.map(format_rational),
        grid_points,
        noncontextual,
        contextual,
        lp_checked,
        lp_agreements,
        counterexample: counterexample.clone(),
    });
    if machine {
        print!("{}", render_machine(&report));
    } else {
        println!(
            "sampled {samples} parameter tuples (seed {seed}): \
             {noncontextual} noncontextual, {contextual} contextual"
        );
        if let Some(step) = grid_step {
            println!("grid step {}: {grid_points} points swept", format_rational(step));
        }
        if lp_checked > 0 {
            println!("LP cross-check: {lp_agreements}/{lp_checked} verdicts agree");
        }
        match &counterexample {
            Some(c) => println!("counterexample: {c}"),
            None => println!("counterexample: none"),
        }
    }
    Ok(())
}

fn coincidence(system: &System, context: &str, first: &str, second: &str) -> Rational {
    let bunch = system.bunch(&ContextId::new(context)).expect("bundled context exists");
    let coupling = Coupling::from_bunch(bunch).expect("bundled table is a distribution");
    let var = |q: &str| VariableRef::new(ContentId::new(q), ContextId::new(context));
    coincidence_probability(&coupling, &var(first), &var(second))
        .expect("bundled contents exist")
}

fn cmd_demo(name: &str, machine: bool) -> Result<(), CliError> {
    let mut report = ReportDocument::new("demo");
    let mut headline = BTreeMap::new();
    let system = match name {
        "double-slit-paper" => {
            let params = demo_double_slit_params();
            report.closed_form = Some(closed_form_document(&closed_form_double_slit(&params)));
            build_double_slit(&params)
        }
        "triple-slit-paper" => {
            let system = paper_triple_slit_example();
            headline.insert(
                "coincidence probability, all slits open".to_string(),
                format_rational(&coincidence(&system, "c_ooo", "q_o..", "q_..o")),
            );
            headline.insert(
                "coincidence probability, middle slit closed".to_string(),
                format_rational(&coincidence(&system, "c_oxo", "q_o..", "q_..o")),
            );
            system
        }
        "pr-box" => pr_box_system(),
        other => {
            return Err(CliError::Input(format!(
                "unknown demo {other:?}; choose double-slit-paper, triple-slit-paper or pr-box"
            )))
        }
    };

    let (verdict, criterion, reduction) = decide(&system, MethodArg::Auto, false)?;
    report.reduction = reduction;
    fill_analysis(&mut report, &system, &verdict, criterion.as_ref(), false);
    if !headline.is_empty() {
        report.headline = Some(headline);
    }

    if machine {
        print!("{}", render_machine(&report));
    } else {
        println!("demo: {name}");
        print!("{}", render_human_analysis(&system, &report, &verdict));
        if let Some(closed) = &report.closed_form {
            print!("{}", render_closed_form(closed));
        }
        for (label, value) in report.headline.iter().flatten() {
            println!("{label}: {value}");
        }
    }
    Ok(())
}
