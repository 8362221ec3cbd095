//! `corelevel-qpe`: validate integrals, compile qubit Hamiltonians, solve FCI,
//! and run phase-estimation experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use corelevel_qpe::harness::{
    default_orbital_names, excitation_label, excitation_report, ExcitationReport,
};
use corelevel_qpe::sector::{FciOptions, SectorSolver};
use corelevel_qpe::{
    compute_orbital_energies, expand_to_spin_orbitals, jordan_wigner, run_experiment, Determinant,
    Error, ExperimentConfig, IntegralSet, RunOutput, HARTREE_TO_EV,
};

const THREADS_ENV: &str = "CORELEVEL_QPE_THREADS";
const C2V_NAMES: [&str; 4] = ["A1", "B1", "B2", "A2"];

#[derive(Parser)]
#[command(
    name = "corelevel-qpe",
    version,
    about = "Core-level phase estimation toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize an FCIDUMP file: header, symmetry violations, HF and orbital energies.
    Validate { fcidump: PathBuf },
    /// Compile to a Jordan-Wigner Pauli sum, one `<coef> <string>` per line.
    Compile {
        fcidump: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact eigenstates of the electron-number sector.
    Fci(FciArgs),
    /// Sample energies with QPE or RPE.
    Run(RunArgs),
    /// Excitation energies in eV from a ground-state run and excited-state runs.
    Report {
        ground: PathBuf,
        #[arg(required = true)]
        excited: Vec<PathBuf>,
        /// Write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct FciArgs {
    fcidump: PathBuf,
    #[arg(long, default_value_t = 5)]
    nstates: usize,
    /// Print <S^2>.
    #[arg(long)]
    s2: bool,
    /// Total irrep: a 1-based Molpro label or a C2v name (A1, B1, B2, A2).
    #[arg(long)]
    irrep: Option<String>,
    /// Energy window `LO,HI` in Hartree.
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    window: Option<(f64, f64)>,
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    fcidump: Option<PathBuf>,
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    estimator: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    initial: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
    window: Option<(f64, f64)>,
    #[arg(long, allow_hyphen_values = true)]
    e_shift: Option<f64>,
    /// Ground-state run to difference against.
    #[arg(long)]
    ground: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("`{s}` is not LO,HI"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{lo}: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{hi}: {e}"))?;
    Ok((lo, hi))
}

fn parse_irrep(s: &str) -> corelevel_qpe::Result<u8> {
    if let Some(k) = C2V_NAMES.iter().position(|n| n.eq_ignore_ascii_case(s)) {
        return Ok(k as u8 + 1);
    }
    match s.parse::<u8>() {
        Ok(l @ 1..=8) => Ok(l),
        _ => Err(Error::Config(format!("unknown irrep `{s}`"))),
    }
}

fn irrep_name(ints: &IntegralSet, label: u8) -> String {
    if ints.orbital_irreps().iter().all(|&l| l <= 4) && (1..=4).contains(&label) {
        format!("{label}({})", C2V_NAMES[label as usize - 1])
    } else {
        label.to_string()
    }
}

fn threads() -> corelevel_qpe::Result<Option<usize>> {
    parse_threads(std::env::var(THREADS_ENV).ok().as_deref())
}

fn parse_threads(value: Option<&str>) -> corelevel_qpe::Result<Option<usize>> {
    match value {
        Some(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!(
                "{THREADS_ENV}={v} is not a positive integer"
            ))),
        },
        None => Ok(None),
    }
}

fn validate(path: &Path) -> corelevel_qpe::Result<()> {
    let ints = IntegralSet::read(path)?;
    let n_docc = ints.n_alpha().min(ints.n_beta());
    println!("file            {}", path.display());
    println!("orbitals        {}", ints.n_orbitals());
    println!("electrons       {}", ints.n_electrons());
    println!("ms2             {}", ints.ms2());
    let orbsym: Vec<String> = ints.orbital_irreps().iter().map(u8::to_string).collect();
    println!("orbsym          {}", orbsym.join(","));
    if let Some(s) = ints.isym() {
        println!("isym            {s}");
    }
    println!("core energy     {:.12}", ints.core_energy());
    println!("nonzero eri     {}", ints.count_nonzero_eri(1e-14));
    println!("symmetry leak   {:.3e}", ints.max_symmetry_violation());
    println!("checksum        {}", ints.checksum());
    println!("E_HF            {:.12}", ints.reference_energy(n_docc)?);
    let eps = compute_orbital_energies(&ints, n_docc)?;
    println!("orbital energies (Hartree)");
    for (p, e) in eps.computed.iter().enumerate() {
        match &eps.from_file {
            Some(f) => println!("  {:>3} {:>18.10} {:>18.10}", p + 1, e, f[p]),
            None => println!("  {:>3} {:>18.10}", p + 1, e),
        }
    }
    if let Some(d) = eps.max_deviation {
        println!("max deviation from file  {d:.3e}");
    }
    Ok(())
}

fn compile(path: &Path, out: &Path) -> corelevel_qpe::Result<()> {
    let ints = IntegralSet::read(path)?;
    let h = jordan_wigner(&expand_to_spin_orbitals(&ints))?;
    std::fs::write(out, h.to_text())?;
    eprintln!(
        "{} qubits, {} Pauli terms plus identity -> {}",
        h.n_qubits(),
        h.len(),
        out.display()
    );
    Ok(())
}

fn fci(args: &FciArgs) -> corelevel_qpe::Result<()> {
    let ints = IntegralSet::read(&args.fcidump)?;
    let solver = SectorSolver::from_integrals(&ints)?;
    let mut opts = FciOptions::lowest(args.nstates);
    opts.window = args.window;
    opts.irrep = args.irrep.as_deref().map(parse_irrep).transpose()?;
    let sol = solver.solve(&opts)?;
    let names = default_orbital_names(&ints);
    let reference = Determinant::aufbau(ints.n_alpha(), ints.n_beta());
    println!("sector dimension {}", solver.hamiltonian().dim());
    for (i, s) in sol.states.iter().enumerate() {
        let mut line = format!(
            "{:>4} {:>20.12} irrep {:<8}",
            i + 1,
            s.energy,
            irrep_name(&ints, s.irrep)
        );
        if args.s2 {
            line.push_str(&format!(" S2 {:>8.5}", s.s2));
        }
        println!("{line}");
        for (c, d) in &s.leading {
            println!(
                "       {c:>+10.6} {}",
                excitation_label(d, &reference, &names)
            );
        }
    }
    Ok(())
}

fn build_config(args: &RunArgs) -> corelevel_qpe::Result<ExperimentConfig> {
    let mut table = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            text.parse::<toml::Table>()
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    let mut set = |k: &str, v: toml::Value| {
        table.insert(k.into(), v);
    };
    if let Some(v) = &args.fcidump {
        set("fcidump", v.display().to_string().into());
    }
    if let Some(v) = &args.backend {
        set("backend", v.clone().into());
    }
    if let Some(v) = &args.estimator {
        set("estimator", v.clone().into());
    }
    if let Some(v) = args.delta {
        set("delta", v.into());
    }
    if let Some(v) = args.bits {
        set("bits", i64::from(v).into());
    }
    if let Some(v) = args.shots {
        set("shots", (v as i64).into());
    }
    if let Some(v) = &args.initial {
        set("initial", v.clone().into());
    }
    if let Some(v) = args.seed {
        let v = i64::try_from(v).map_err(|_| Error::Config(format!("seed {v} exceeds i64")))?;
        set("seed", v.into());
    }
    if let Some((lo, hi)) = args.window {
        set("window", toml::Value::Array(vec![lo.into(), hi.into()]));
    }
    if let Some(v) = args.e_shift {
        set("e_shift", v.into());
    }
    if !table.contains_key("fcidump") {
        return Err(Error::Config(
            "no FCIDUMP given (--fcidump or config)".into(),
        ));
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))
}

fn print_report(r: &ExcitationReport) {
    println!(
        "ground {:.6} +- {:.6} Hartree",
        r.ground_energy, r.ground_std
    );
    println!(
        "{:>14} {:>10} {:>6} {:>12} {:>8} {:>12}",
        "E/Ha", "std/Ha", "n", "omega/eV", "+-", "FCI/eV"
    );
    for l in &r.lines {
        let fci = l
            .fci_omega_ev
            .map_or("-".to_string(), |w| format!("{w:.3}"));
        println!(
            "{:>14.6} {:>10.6} {:>6} {:>12.3} {:>8.3} {:>12}",
            l.energy, l.std, l.count, l.omega_ev, l.omega_std_ev, fci
        );
    }
}

fn ground_cluster(path: &Path) -> corelevel_qpe::Result<corelevel_qpe::StateCluster> {
    let run = RunOutput::load(path)?;
    run.clusters
        .into_iter()
        .next()
        .ok_or_else(|| Error::Config(format!("{} has no clusters", path.display())))
}

fn run(args: &RunArgs) -> corelevel_qpe::Result<()> {
    let config = build_config(args)?;
    let mut out = run_experiment(&config, threads()?)?;
    if let Some(g) = &args.ground {
        out.report = Some(excitation_report(&ground_cluster(g)?, &out.clusters));
    }
    let csv = out.write(&args.out)?;
    println!(
        "{} shots, reference {:.6} Hartree",
        out.samples.len(),
        out.system.reference_energy
    );
    for c in out.clusters.iter().take(5) {
        let fci = c.assignment.as_ref().map_or(String::new(), |a| {
            format!("  FCI {:.6} S2 {:.3} w {:.4}", a.energy, a.s2, a.overlap)
        });
        println!(
            "cluster {:>12.6} +- {:.6}  n={:<5}{fci}",
            c.mean, c.std, c.count
        );
    }
    if let Some(r) = &out.report {
        print_report(r);
    }
    eprintln!("wrote {} and {}", args.out.display(), csv.display());
    Ok(())
}

fn report(ground: &Path, excited: &[PathBuf], out: Option<&Path>) -> corelevel_qpe::Result<()> {
    let g = ground_cluster(ground)?;
    let clusters = excited
        .iter()
        .map(|p| ground_cluster(p))
        .collect::<corelevel_qpe::Result<Vec<_>>>()?;
    let r = excitation_report(&g, &clusters);
    print_report(&r);
    if let Some(out) = out {
        let mut text = serde_json::to_string_pretty(&r)?;
        text.push('\n');
        std::fs::write(out, text)?;
    }
    println!("1 Hartree = {HARTREE_TO_EV} eV");
    Ok(())
}

fn dispatch(command: &Command) -> corelevel_qpe::Result<()> {
    match command {
        Command::Validate { fcidump } => validate(fcidump),
        Command::Compile { fcidump, out } => compile(fcidump, out),
        Command::Fci(a) => fci(a),
        Command::Run(a) => run(a),
        Command::Report {
            ground,
            excited,
            out,
        } => report(ground, excited, out.as_deref()),
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_config() {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
