//! Command-line front end: planning, pooled-run simulation, circuit
//! build/run, the two single-query simulators, and a cross-strategy
//! comparison report.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use bsb::bits::{spring_balance, CountingOracle, QueryString, SecretString};
use bsb::circuit::{build_bsb_circuit, export_netlist, output_width};
use bsb::compare::{compare, seeded_random_secret};
use bsb::optics::{run_optical_bv, OpticalElement};
use bsb::pooling::{
    optimal_stage_count, prevalence_report, run_li, worst_case_tests,
    worst_case_tests_optimal, Accounting, PoolRunReport, PoolingPlan,
};
use bsb::statevector::{
    apply_oracle, prepare_query_register, run_bv, OracleConstruction, OracleSpec,
};

#[derive(Parser)]
#[command(
    name = "bsb",
    about = "Binary spring balance puzzle: pooled testing, popcount circuits, \
             and single-query polarization solvers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a pooling plan and its closed-form analytics.
    Plan(PlanArgs),
    /// Simulate a pooled run against a known secret.
    Pool(PoolArgs),
    /// Build or evaluate the popcount circuit.
    Circuit {
        #[command(subcommand)]
        command: CircuitCommand,
    },
    /// Run the state-vector single-query solver.
    Bv {
        #[command(subcommand)]
        command: BvCommand,
    },
    /// Run the polarization-optics single-query solver.
    Optics {
        #[command(subcommand)]
        command: OpticsCommand,
    },
    /// Run every strategy on one secret and tabulate query costs.
    Compare(CompareArgs),
    /// Emit a deterministic random secret with a fixed defect count.
    RandomSecret(RandomSecretArgs),
}

#[derive(Args)]
struct PlanArgs {
    /// Population size N.
    #[arg(long)]
    n: usize,
    /// Assumed defect count d.
    #[arg(long)]
    d: usize,
    /// Stage count S; defaults to the optimal round(ln(N/d)).
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PoolArgs {
    /// The hidden secret the oracle answers for.
    #[arg(long)]
    secret: SecretString,
    /// Assumed defect count for planning; defaults to the secret's actual
    /// defect count (minimum 1).
    #[arg(long)]
    d: Option<usize>,
    /// Stage count S; defaults to the optimal round(ln(N/d)).
    #[arg(long)]
    stages: Option<usize>,
    /// Stage-1 pool size for a two-stage plan; conflicts with --stages
    /// unless --stages 2.
    #[arg(long)]
    pool_size: Option<usize>,
    /// Final-stage bookkeeping: test every survivor, or deduce from pool
    /// readings.
    #[arg(long, value_enum, default_value_t = AccountingArg::Strict)]
    accounting: AccountingArg,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum AccountingArg {
    Strict,
    Paper,
}

impl From<AccountingArg> for Accounting {
    fn from(a: AccountingArg) -> Self {
        match a {
            AccountingArg::Strict => Accounting::Strict,
            AccountingArg::Paper => Accounting::Paper,
        }
    }
}

#[derive(Subcommand)]
enum CircuitCommand {
    /// Build the N-bit circuit and report component counts.
    Build {
        #[arg(long)]
        n: usize,
        /// Write the netlist JSON to this path.
        #[arg(long)]
        export: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate the circuit on one (secret, query) pair.
    Run {
        #[arg(long)]
        secret: SecretString,
        #[arg(long)]
        query: QueryString,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum BvCommand {
    /// Recover the secret with a single oracle query.
    Run {
        #[arg(long)]
        secret: SecretString,
        /// Oracle construction: z (phase gates) or cnot (ancilla kickback).
        #[arg(long, value_enum, default_value_t = OracleArg::Z)]
        oracle: OracleArg,
        /// Write the pre-measurement amplitudes as JSON [[re,im],...].
        #[arg(long)]
        dump_state: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum OracleArg {
    Z,
    Cnot,
}

impl From<OracleArg> for OracleConstruction {
    fn from(a: OracleArg) -> Self {
        match a {
            OracleArg::Z => OracleConstruction::ZOnly,
            OracleArg::Cnot => OracleConstruction::CnotAncilla,
        }
    }
}

#[derive(Subcommand)]
enum OpticsCommand {
    /// Recover the secret with the polarizer pipeline.
    Run {
        #[arg(long)]
        secret: SecretString,
        /// Write per-beam elements (angles in degrees) and outputs as JSON.
        #[arg(long)]
        dump_beams: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    secret: SecretString,
    /// Stage count for the pooled runs; defaults to the optimal value.
    #[arg(long)]
    stages: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RandomSecretArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    json: bool,
}

#[derive(Serialize)]
struct PlanReport {
    schema_version: u32,
    #[serde(rename = "N")]
    n: usize,
    d: usize,
    #[serde(rename = "S")]
    s: usize,
    #[serde(rename = "S_optimal")]
    s_optimal: usize,
    pool_sizes: Vec<usize>,
    worst_case_tests: f64,
    worst_case_tests_optimal: Option<f64>,
    prevalence: bsb::pooling::PrevalenceReport,
}

#[derive(Serialize)]
struct CircuitBuildReport {
    schema_version: u32,
    #[serde(rename = "N")]
    n: usize,
    output_bus_width: usize,
    and: usize,
    full_adders: usize,
    half_adders: usize,
}

#[derive(Serialize)]
struct CircuitRunReport {
    schema_version: u32,
    secret: String,
    query: String,
    f: u32,
    reference_f: u32,
    agree: bool,
}

#[derive(Serialize)]
struct BvReport {
    schema_version: u32,
    secret: String,
    oracle: String,
    recovered: String,
    oracle_calls: u32,
    probability: f64,
    recovered_ok: bool,
}

#[derive(Serialize)]
struct OpticsReport {
    schema_version: u32,
    secret: String,
    recovered: String,
    recovered_ok: bool,
}

#[derive(Serialize)]
struct BeamDumpElement {
    element: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phi_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta_deg: Option<f64>,
}

#[derive(Serialize)]
struct BeamDump {
    beam: usize,
    elements: Vec<BeamDumpElement>,
    output: [[f64; 2]; 2],
    attenuation: f64,
}

#[derive(Serialize)]
struct BeamDumpFile {
    schema_version: u32,
    secret: String,
    beams: Vec<BeamDump>,
}

#[derive(Serialize)]
struct RandomSecretReport {
    schema_version: u32,
    #[serde(rename = "N")]
    n: usize,
    d: usize,
    seed: u64,
    secret: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(ok) => {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn emit<T: Serialize>(json: bool, value: &T, human: impl FnOnce()) -> Result<(), Box<dyn std::error::Error>> {
    if json {
        println!("{}", serde_json::to_string_pretty(value)?);
    } else {
        human();
    }
    Ok(())
}

fn build_plan(
    n: usize,
    d: usize,
    stages: Option<usize>,
    pool_size: Option<usize>,
) -> Result<PoolingPlan, bsb::Error> {
    match (stages, pool_size) {
        (_, Some(k)) => {
            if let Some(s) = stages {
                if s != 2 {
                    return Err(bsb::Error::InvalidPlan(
                        "--pool-size sets a two-stage plan; use --stages 2 or omit it"
                            .into(),
                    ));
                }
            }
            PoolingPlan::from_pool_sizes(n, d, vec![k, 1])
        }
        (Some(s), None) => PoolingPlan::with_stage_count(n, d, s),
        (None, None) => PoolingPlan::optimal(n, d),
    }
}

/// Returns Ok(true) when the command's postconditions held.
fn run(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Plan(args) => {
            let plan = build_plan(args.n, args.d, args.stages, None)?;
            let s = plan.stage_count();
            let report = PlanReport {
                schema_version: 1,
                n: args.n,
                d: args.d,
                s,
                s_optimal: optimal_stage_count(args.n, args.d)?,
                pool_sizes: plan.pool_sizes().to_vec(),
                worst_case_tests: worst_case_tests(args.n, args.d, s)?,
                worst_case_tests_optimal: worst_case_tests_optimal(args.n, args.d).ok(),
                prevalence: prevalence_report(args.n, args.d)?,
            };
            emit(args.json, &report, || {
                println!("plan for N={} d={}", report.n, report.d);
                println!("  stages S       : {} (optimal {})", report.s, report.s_optimal);
                println!("  pool sizes     : {:?}", report.pool_sizes);
                println!("  worst-case t   : {:.4}", report.worst_case_tests);
                if let Some(t) = report.worst_case_tests_optimal {
                    println!("  optimal-S t    : {:.4}", t);
                }
                let p = &report.prevalence;
                println!(
                    "  prevalence p   : {:.4}  (-p ln p = {:.4})",
                    p.p, p.neg_p_ln_p
                );
                println!(
                    "  futile         : S=2 {}  optimal-S {}",
                    p.futile_s2, p.futile_optimal
                );
            })?;
            Ok(true)
        }
        Command::Pool(args) => {
            let n = args.secret.len();
            let d = args.d.unwrap_or_else(|| args.secret.defect_count().max(1));
            let plan = build_plan(n, d, args.stages, args.pool_size)?;
            let mut oracle = CountingOracle::new(args.secret.clone());
            let result = run_li(&mut oracle, &plan, args.accounting.into())?;
            let report = PoolRunReport::new(&plan, &result);
            let ok = result.identified_defects == args.secret.defect_indices();
            emit(args.json, &report, || {
                println!("pooled run, N={n} pools={:?}", plan.pool_sizes());
                for (i, stage) in result.stages.iter().enumerate() {
                    println!("  stage {} ({} queries)", i + 1, stage.len());
                    for q in stage {
                        println!("    x={}  f={}", q.x, q.f);
                    }
                }
                println!("  defects        : {:?}", result.identified_defects);
                println!("  total queries  : {}", result.total_queries);
            })?;
            Ok(ok)
        }
        Command::Circuit { command } => match command {
            CircuitCommand::Build { n, export, json } => {
                let net = build_bsb_circuit(n)?;
                let counts = net.component_counts();
                if let Some(path) = &export {
                    fs::write(path, export_netlist(&net))?;
                }
                let report = CircuitBuildReport {
                    schema_version: 1,
                    n,
                    output_bus_width: output_width(n),
                    and: counts.and_gates,
                    full_adders: counts.full_adders,
                    half_adders: counts.half_adders,
                };
                emit(json, &report, || {
                    println!("circuit for N={n}");
                    println!("  AND gates    : {}", report.and);
                    println!("  full adders  : {}", report.full_adders);
                    println!("  half adders  : {}", report.half_adders);
                    println!("  output bus   : {} bits", report.output_bus_width);
                    if let Some(path) = &export {
                        println!("  netlist written to {path}");
                    }
                })?;
                Ok(true)
            }
            CircuitCommand::Run { secret, query, json } => {
                let net = build_bsb_circuit(secret.len())?;
                let f = net.simulate(&secret, &query)?;
                let reference = spring_balance(&secret, &query)?;
                let report = CircuitRunReport {
                    schema_version: 1,
                    secret: secret.to_string(),
                    query: query.to_string(),
                    f,
                    reference_f: reference,
                    agree: f == reference,
                };
                emit(json, &report, || {
                    println!("f({}) = {}  (reference {})", report.query, f, reference);
                })?;
                Ok(f == reference)
            }
        },
        Command::Bv { command } => match command {
            BvCommand::Run { secret, oracle, dump_state, json } => {
                let construction: OracleConstruction = oracle.into();
                let outcome = run_bv(&secret, construction)?;
                if let Some(path) = &dump_state {
                    let spec = OracleSpec {
                        secret: secret.clone(),
                        construction,
                    };
                    let mut psi = prepare_query_register(
                        secret.len(),
                        construction == OracleConstruction::CnotAncilla,
                    )?;
                    apply_oracle(&mut psi, &spec)?;
                    for q in 0..secret.len() {
                        psi.apply_h(q);
                    }
                    let amps: Vec<[f64; 2]> =
                        psi.amplitudes().iter().map(|a| [a.re, a.im]).collect();
                    fs::write(path, serde_json::to_string_pretty(&amps)?)?;
                }
                let ok = outcome.recovered == secret;
                let report = BvReport {
                    schema_version: 1,
                    secret: secret.to_string(),
                    oracle: match construction {
                        OracleConstruction::ZOnly => "z".into(),
                        OracleConstruction::CnotAncilla => "cnot".into(),
                    },
                    recovered: outcome.recovered.to_string(),
                    oracle_calls: outcome.oracle_calls,
                    probability: outcome.probability,
                    recovered_ok: ok,
                };
                emit(json, &report, || {
                    println!("recovered    : {}", report.recovered);
                    println!("oracle calls : {}", report.oracle_calls);
                    println!("probability  : {:.12}", report.probability);
                })?;
                Ok(ok)
            }
        },
        Command::Optics { command } => match command {
            OpticsCommand::Run { secret, dump_beams, json } => {
                let outcome = run_optical_bv(&secret)?;
                if let Some(path) = &dump_beams {
                    let pipeline = bsb::optics::build_optical_bv(&secret);
                    let beams = pipeline
                        .beams()
                        .iter()
                        .zip(&outcome.beams)
                        .enumerate()
                        .map(|(i, (elements, out))| BeamDump {
                            beam: i + 1,
                            elements: elements.iter().map(dump_element).collect(),
                            output: [
                                [out.vector.0[0].re, out.vector.0[0].im],
                                [out.vector.0[1].re, out.vector.0[1].im],
                            ],
                            attenuation: out.attenuation,
                        })
                        .collect();
                    let dump = BeamDumpFile {
                        schema_version: 1,
                        secret: secret.to_string(),
                        beams,
                    };
                    fs::write(path, serde_json::to_string_pretty(&dump)?)?;
                }
                let ok = outcome.recovered == secret;
                let report = OpticsReport {
                    schema_version: 1,
                    secret: secret.to_string(),
                    recovered: outcome.recovered.to_string(),
                    recovered_ok: ok,
                };
                emit(json, &report, || {
                    println!("recovered : {}", report.recovered);
                })?;
                Ok(ok)
            }
        },
        Command::Compare(args) => {
            let n = args.secret.len();
            let d = args.secret.defect_count().max(1);
            let plan = build_plan(n, d, args.stages, None)?;
            let report = compare(&args.secret, &plan)?;
            emit(args.json, &report, || {
                println!(
                    "comparison for secret {} (N={}, d={})",
                    args.secret, report.n, report.d
                );
                println!("  strategy             queries");
                println!("  individual           {}", report.queries_individual);
                println!("  pooled (strict)      {}", report.queries_li_strict);
                println!("  pooled (paper)       {}", report.queries_li_paper);
                println!("  single-query         {}", report.queries_bv);
                println!(
                    "  predicted worst t    {:.4}  (simulated strict {}, paper {})",
                    report.predicted_worst_case,
                    report.simulated_worst_case_strict,
                    report.simulated_worst_case_paper
                );
                println!(
                    "  futile: S=2 {}  optimal-S {}",
                    report.futile_s2, report.futile_optimal
                );
            })?;
            Ok(report.all_recovered)
        }
        Command::RandomSecret(args) => {
            let secret = seeded_random_secret(args.n, args.d, args.seed)?;
            let report = RandomSecretReport {
                schema_version: 1,
                n: args.n,
                d: args.d,
                seed: args.seed,
                secret: secret.to_string(),
            };
            emit(args.json, &report, || println!("{secret}"))?;
            Ok(secret.defect_count() == args.d)
        }
    }
}

fn dump_element(element: &OpticalElement) -> BeamDumpElement {
    let deg = |r: f64| r.to_degrees();
    match *element {
        OpticalElement::Lp { theta } => BeamDumpElement {
            element: "lp".into(),
            eta_deg: None,
            phi_deg: None,
            theta_deg: Some(deg(theta)),
        },
        OpticalElement::Bf { eta, phi, theta } => BeamDumpElement {
            element: "bf".into(),
            eta_deg: Some(deg(eta)),
            phi_deg: Some(deg(phi)),
            theta_deg: Some(deg(theta)),
        },
        OpticalElement::Identity => BeamDumpElement {
            element: "identity".into(),
            eta_deg: None,
            phi_deg: None,
            theta_deg: None,
        },
    }
}
