use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use isovem::analysis::{read_csv, write_csv, write_figure_data, SeriesKey};
use isovem::cases::CaseKind;
use isovem::methods::MethodRegistry;
use isovem::study::{run_study, with_thread_cap, MeshKind, StudyConfig, StudyReport, DEFAULT_LLOYD_ITERS};

/// Convergence studies for isoparametric virtual element methods.
#[derive(Parser, Debug)]
#[command(name = "isovem", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Concatenate convergence CSVs named `<case>_<method>_k<k>_l<l>.csv`
    /// into one long table.
    FigureData {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "figure_data.csv")]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// annulus, plane or identity
    #[arg(long, default_value = "annulus")]
    case: CaseKind,
    /// Registered method name
    #[arg(long, default_value = "physical")]
    method: String,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    l: usize,
    #[arg(long, default_value_t = 5)]
    levels: usize,
    /// voronoi, quads or perturbed
    #[arg(long, default_value = "voronoi")]
    mesh: MeshKind,
    /// Cells on the coarsest level
    #[arg(long, default_value_t = 64)]
    cells: usize,
    #[arg(long, default_value_t = 2)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_LLOYD_ITERS)]
    lloyd_iters: usize,
    /// Extra quadrature degree on top of the method default
    #[arg(long = "quad-order-bump", default_value_t = 0)]
    quad_bump: usize,
    /// Defaults to `<case>_<method>_k<k>_l<l>.csv`
    #[arg(long)]
    out: Option<PathBuf>,
    /// One mesh file per level, in order
    #[arg(long = "mesh-file")]
    mesh_files: Vec<PathBuf>,
    /// One map DoF file per level, in order
    #[arg(long = "map-file")]
    map_files: Vec<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> StudyConfig {
        StudyConfig {
            case: self.case,
            method: self.method.clone(),
            k: self.k,
            l: self.l,
            levels: if self.mesh_files.is_empty() { self.levels } else { self.mesh_files.len() },
            mesh: self.mesh,
            cells: self.cells,
            seed: self.seed,
            quad_bump: self.quad_bump,
            lloyd_iters: self.lloyd_iters,
            mesh_files: self.mesh_files.clone(),
            map_files: self.map_files.clone(),
        }
    }

    fn out_path(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| {
            let key = SeriesKey {
                case: self.case.to_string(),
                method: self.method.clone(),
                k: self.k,
                l: self.l,
            };
            PathBuf::from(format!("{}.csv", key.stem()))
        })
    }
}

fn print_table(report: &StudyReport, mut out: impl Write) -> io::Result<()> {
    let c = &report.config;
    writeln!(out, "{} / {}  k={} l={}  mesh={}", c.case, c.method, c.k, c.l, c.mesh)?;
    writeln!(
        out,
        "{:>5} {:>11} {:>8} {:>11} {:>11} {:>7} {:>7} {:>9}",
        "level", "h", "ndof", "L2", "H1", "eoc L2", "eoc H1", "seconds"
    )?;
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.2}")).unwrap_or_else(|| "-".into());
    for lv in &report.levels {
        let r = &lv.record;
        writeln!(
            out,
            "{:>5} {:>11.4e} {:>8} {:>11.4e} {:>11.4e} {:>7} {:>7} {:>9.2}",
            r.mesh_index,
            r.h,
            r.ndof,
            r.l2_error,
            r.h1_error,
            opt(r.eoc_l2),
            opt(r.eoc_h1),
            lv.seconds
        )?;
    }
    Ok(())
}

fn run(args: &RunArgs) -> Result<(), Box<dyn std::error::Error>> {
    let cfg = args.config();
    let registry = MethodRegistry::default();
    let report = with_thread_cap(|| run_study(&cfg, &registry))?;
    let path = args.out_path();
    let mut w = BufWriter::new(File::create(&path)?);
    write_csv(&report.records(), &mut w)?;
    w.flush()?;
    print_table(&report, io::stdout().lock())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn figure_data(inputs: &[PathBuf], out: &PathBuf) -> Result<(), Box<dyn std::error::Error>> {
    let mut series = Vec::with_capacity(inputs.len());
    for path in inputs {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        let key = SeriesKey::from_stem(stem)
            .ok_or_else(|| format!("{}: file name is not `<case>_<method>_k<k>_l<l>.csv`", path.display()))?;
        let records = read_csv(File::open(path)?).map_err(|e| format!("{}: {e}", path.display()))?;
        series.push((key, records));
    }
    let mut w = BufWriter::new(File::create(out)?);
    let rows = write_figure_data(&series, &mut w)?;
    w.flush()?;
    println!("wrote {rows} rows to {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Some(Command::FigureData { inputs, out }) => figure_data(inputs, out),
        None => run(&cli.run),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
