use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pedigree_core::dot::{fk_dot, restricted_dot, state_dot};
use pedigree_core::experiment::{run_experiment, ExperimentConfig};
use pedigree_core::io::{read_point, to_json, PointFile};
use pedigree_core::layered::Tail;
use pedigree_core::oracle::oracle_membership;
use pedigree_core::pedigree::{is_pedigree, Edge, PedigreeCheck, Pedigree, Tour, Triangle};
use pedigree_core::random::{generate, Mode};
use pedigree_core::rational::format;
use pedigree_core::{check_membership, Error, MembershipOptions};

const EXIT_MEMBER: u8 = 0;
const EXIT_NOT_MEMBER: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_DISCREPANCY: u8 = 3;

#[derive(Parser)]
#[command(name = "pedigree", version, about = "Exact membership tests for the pedigree polytope")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide membership of the point in a JSON point file.
    Check {
        file: PathBuf,
        /// Skip the MCF when a cheap sufficient condition holds.
        #[arg(long)]
        shortcuts: bool,
        /// Print the per-stage trace.
        #[arg(long)]
        trace: bool,
        /// Write N_k and F_k graphs for every stage to this directory.
        #[arg(long, value_name = "DIR")]
        emit_dot: Option<PathBuf>,
        /// With --emit-dot, also write every restricted network.
        #[arg(long, requires = "emit_dot")]
        emit_restricted: bool,
        /// Write the LP text of every MCF solved to this directory.
        #[arg(long, value_name = "DIR")]
        dump_lp: Option<PathBuf>,
        /// Compare with the brute-force hull oracle (n <= 8); exit 3 on disagreement.
        #[arg(long)]
        oracle: bool,
    },
    /// Generate random points.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "hull")]
        mode: ModeArg,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// Write one file per point here instead of printing a JSON array.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Run the driver against the hull oracle on generated points.
    Experiment {
        #[arg(long, default_value_t = 5)]
        n_min: usize,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        /// Points per n.
        #[arg(long, default_value_t = 200)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["hull", "perturbed", "pmi"])]
        modes: Vec<ModeArg>,
        #[arg(long)]
        shortcuts: bool,
        /// Where to write full traces of disagreeing points.
        #[arg(long, value_name = "FILE", default_value = "discrepancies.txt")]
        discrepancies: PathBuf,
    },
    /// Convert between tours, pedigrees and characteristic vectors.
    Convert {
        #[arg(value_enum)]
        direction: Direction,
        /// A tour as a city sequence ("1 3 6 4 2 5") or a pedigree as edges ("((2,3),(1,2))").
        input: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Hull,
    Perturbed,
    Pmi,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Hull => Mode::Hull,
            ModeArg::Perturbed => Mode::Perturbed,
            ModeArg::Pmi => Mode::Pmi,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    TourToPedigree,
    PedigreeToTour,
    PedigreeToCv,
}

fn input_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_INPUT)
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Resource(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Resource(format!("{}: {e}", dir.display())))
}

fn tail_file_name(t: Tail) -> String {
    match t {
        Tail::Node(v) => format!("{}_{}_{}", v.k, v.edge.i, v.edge.j),
        Tail::Shrunk(i) => format!("R{i}"),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_check(
    file: &Path,
    shortcuts: bool,
    trace: bool,
    emit_dot: Option<&Path>,
    emit_restricted: bool,
    dump_lp: Option<&Path>,
    oracle: bool,
) -> Result<ExitCode, Error> {
    let (x, label) = match read_point(file) {
        Ok(p) => p,
        Err(e) => return Ok(input_error(e)),
    };
    let opts = MembershipOptions { shortcuts, keep_states: emit_dot.is_some(), keep_lp: dump_lp.is_some() };
    let v = check_membership(&x, &opts)?;
    if let Some(l) = label {
        println!("{l}");
    }
    println!("{}", v.headline());
    if trace {
        for s in &v.trace {
            println!("  {s}");
        }
        if let Some(parts) = &v.decomposition {
            println!("  decomposition:");
            for (p, w) in parts {
                println!("    {} {p}", format(w));
            }
        }
    }
    for viol in &v.violations {
        eprintln!("invariant violation: {viol}");
    }
    if let Some(dir) = emit_dot {
        create_dir(dir)?;
        for (i, state) in v.states.iter().enumerate() {
            write_file(&dir.join(format!("N{}.dot", state.k)), &state_dot(state))?;
            if emit_restricted && i + 1 < v.states.len() {
                let fk = &v.problems[i + 1];
                for a in 0..fk.problem.arcs.len() {
                    if let (Tail::Node(u), d) = fk.arc_ends(a) {
                        let rn = state.restricted_network(u, d);
                        let name = format!("L{}_{}_to_{}.dot", fk.k, tail_file_name(Tail::Node(u)), tail_file_name(Tail::Node(d)));
                        write_file(&dir.join(name), &restricted_dot(state, &rn))?;
                    }
                }
            }
        }
        for (i, fk) in v.problems.iter().enumerate() {
            // F_k is built from the state after stage k - 1; F_4 has no layered state behind it.
            let base = if i == 0 { v.states.first() } else { v.states.get(i - 1) };
            if let Some(state) = base {
                write_file(&dir.join(format!("F{}.dot", fk.k)), &fk_dot(state, fk, None))?;
            }
        }
    }
    if let Some(dir) = dump_lp {
        create_dir(dir)?;
        for (k, text) in &v.lp_dumps {
            write_file(&dir.join(format!("mcf{k}.lp")), text)?;
        }
    }
    if oracle {
        let o = oracle_membership(&x)?;
        println!("oracle: {}", if o.member { "MEMBER" } else { "NOT MEMBER" });
        if o.member != v.member {
            eprintln!("discrepancy between driver and oracle");
            return Ok(ExitCode::from(EXIT_DISCREPANCY));
        }
    }
    if !v.violations.is_empty() {
        return Ok(ExitCode::from(EXIT_DISCREPANCY));
    }
    Ok(ExitCode::from(if v.member { EXIT_MEMBER } else { EXIT_NOT_MEMBER }))
}

fn cmd_random(n: usize, mode: Mode, seed: u64, count: usize, out: Option<&Path>) -> Result<ExitCode, Error> {
    let pts = match generate(n, mode, seed, count) {
        Ok(p) => p,
        Err(e) => return Ok(input_error(e)),
    };
    match out {
        Some(dir) => {
            create_dir(dir)?;
            for (i, x) in pts.iter().enumerate() {
                let label = format!("{} n={n} seed={seed} #{i}", mode.name());
                write_file(&dir.join(format!("{}_{n}_{seed}_{i}.json", mode.name())), &to_json(x, Some(label)))?;
            }
        }
        None => {
            let files: Vec<PointFile> = pts
                .iter()
                .enumerate()
                .map(|(i, x)| PointFile::from_point(x, Some(format!("{} n={n} seed={seed} #{i}", mode.name()))))
                .collect();
            println!("{}", serde_json::to_string_pretty(&files).expect("point files serialize"));
        }
    }
    Ok(ExitCode::from(EXIT_MEMBER))
}

fn cmd_experiment(cfg: &ExperimentConfig, discrepancies: &Path) -> Result<ExitCode, Error> {
    let summary = run_experiment(cfg)?;
    println!("{summary}");
    for (n, i, viol) in &summary.violations {
        eprintln!("n = {n}, point {i}: {}", viol.join("; "));
    }
    if summary.discrepancies.is_empty() && summary.violations.is_empty() {
        return Ok(ExitCode::from(EXIT_MEMBER));
    }
    let mut text = String::new();
    for d in &summary.discrepancies {
        text.push_str(&format!(
            "{} #{} driver={} oracle={}\n{}\n",
            d.mode.name(),
            d.index,
            d.driver,
            d.oracle,
            d.report
        ));
    }
    write_file(discrepancies, &text)?;
    eprintln!("{} discrepancies written to {}", summary.discrepancies.len(), discrepancies.display());
    Ok(ExitCode::from(EXIT_DISCREPANCY))
}

fn parse_pedigree(s: &str) -> Result<Vec<Edge>, String> {
    let nums: Vec<usize> = s
        .split(|c: char| !c.is_ascii_digit())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|e| format!("{t}: {e}")))
        .collect::<Result<_, _>>()?;
    if !nums.len().is_multiple_of(2) {
        return Err("a pedigree needs pairs of cities".into());
    }
    nums.chunks(2).map(|c| Edge::new(c[0].min(c[1]), c[0].max(c[1])).map_err(|e| e.to_string())).collect()
}

fn build_pedigree(edges: &[Edge]) -> Result<Pedigree, String> {
    let mut seq = vec![Triangle::BASE];
    let mut ped = Pedigree::base();
    for &e in edges {
        let k = ped.n() + 1;
        if !ped.can_extend(e) {
            let reason = match Triangle::new(e.i, e.j, k) {
                Ok(t) => {
                    seq.push(t);
                    match is_pedigree(&seq) {
                        Ok(PedigreeCheck::RepeatedEdge { .. }) => "the edge was already used".to_string(),
                        Ok(_) => format!("the edge is not in the tour on cities 1..{}", k - 1),
                        Err(err) => err.to_string(),
                    }
                }
                Err(err) => err.to_string(),
            };
            return Err(format!("insert {k} in {e} not possible ({reason})"));
        }
        seq.push(Triangle { k, edge: e });
        ped = ped.extend(e).map_err(|err| err.to_string())?;
    }
    Ok(ped)
}

fn cmd_convert(direction: Direction, input: &str) -> ExitCode {
    match direction {
        Direction::TourToPedigree => {
            let cities: Result<Vec<usize>, _> = input.split(|c: char| !c.is_ascii_digit()).filter(|t| !t.is_empty()).map(str::parse).collect();
            let tour = match cities.map_err(|e| e.to_string()).and_then(|c| Tour::from_cycle(&c).map_err(|e| e.to_string())) {
                Ok(t) => t,
                Err(e) => return input_error(e),
            };
            println!("{}", tour.to_pedigree());
        }
        Direction::PedigreeToTour | Direction::PedigreeToCv => {
            let ped = match parse_pedigree(input).and_then(|e| build_pedigree(&e)) {
                Ok(p) => p,
                Err(e) => return input_error(e),
            };
            match direction {
                Direction::PedigreeToTour => {
                    let cycle: Vec<String> = ped.to_tour().cycle().iter().map(|c| c.to_string()).collect();
                    println!("{}", cycle.join(" "));
                }
                _ => println!("{:?}", ped.char_vector()),
            }
        }
    }
    ExitCode::from(EXIT_MEMBER)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { file, shortcuts, trace, emit_dot, emit_restricted, dump_lp, oracle } => cmd_check(
            &file,
            shortcuts,
            trace,
            emit_dot.as_deref(),
            emit_restricted,
            dump_lp.as_deref(),
            oracle,
        ),
        Command::Random { n, mode, seed, count, out } => cmd_random(n, mode.into(), seed, count, out.as_deref()),
        Command::Experiment { n_min, n_max, count, seed, modes, shortcuts, discrepancies } => {
            let cfg = ExperimentConfig {
                n_min,
                n_max,
                count,
                seed,
                modes: modes.into_iter().map(Mode::from).collect(),
                shortcuts,
            };
            cmd_experiment(&cfg, &discrepancies)
        }
        Command::Convert { direction, input } => Ok(cmd_convert(direction, &input)),
    };
    match result {
        Ok(code) => code,
        Err(e @ Error::Invariant(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DISCREPANCY)
        }
        Err(e) => input_error(e),
    }
}
