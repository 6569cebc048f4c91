//! Command-line driver. Every failure is one line on stderr and a nonzero
//! exit code: 1 usage or I/O, 2 parse or validation, 3 solver.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::solver::{solve_sweep, Diagnostic, HmdpModel, SolveOptions, SolveRecord, Solver, State};
use crate::xadd::{Assignment, DiagramStore, NodeId, XaddError};

use super::{builtin_by_spec, parse, print};

#[derive(Parser, Debug)]
#[command(name = "basdp", version, about = "Bounded approximate symbolic dynamic programming")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run value iteration; write stats.csv and one V<h>.xadd per horizon.
    Solve(SolveArgs),
    /// Compress a diagram file within an absolute error bound.
    Compress {
        input: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve, then report value and best action at one state.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated `name=value`; booleans take true/false/1/0.
        #[arg(long, value_delimiter = ',', required = true)]
        state: Vec<String>,
        /// Horizon to query (default: the solved horizon).
        #[arg(long)]
        at: Option<usize>,
    },
    /// Render a diagram file as Graphviz DOT or case text.
    Export {
        input: PathBuf,
        #[arg(long, default_value = "dot")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate a diagram file over a grid of one or two continuous axes.
    Sample {
        input: PathBuf,
        /// `axis=lo:hi:steps`, once or twice.
        #[arg(long, required_unless_present = "points")]
        grid: Vec<String>,
        /// Draw this many uniform random states instead of a grid.
        #[arg(long)]
        points: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `name=value` for variables that are not axes.
        #[arg(long, value_delimiter = ',')]
        fix: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// LP-verified maximum absolute difference of two diagram files.
    Diff { a: PathBuf, b: PathBuf },
    /// Print the canonical text of a domain.
    Domain {
        #[arg(long)]
        domain: String,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// Builtin name (mars1d, mars2d, inventory, inventory(n)) or a file path.
    #[arg(long)]
    domain: String,
    #[arg(long)]
    horizon: Option<usize>,
    /// Absolute error per horizon; a comma list runs a sweep.
    #[arg(long, value_delimiter = ',', conflicts_with = "eps_rel")]
    eps: Vec<f64>,
    /// Error per horizon as a fraction of max |V^h|.
    #[arg(long = "eps-rel", value_delimiter = ',')]
    eps_rel: Vec<f64>,
    /// Keep Q diagrams of every horizon.
    #[arg(long)]
    retain_q: bool,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

enum CliError {
    Usage(String),
    Parse(String),
    Solver(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Solver(_) => 3,
        }
    }

    fn line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage", m),
            CliError::Parse(m) => ("parse", m),
            CliError::Solver(m) => ("solver", m),
        };
        format!("error: {}: {}", kind, msg.replace('\n', " "))
    }
}

impl From<XaddError> for CliError {
    fn from(e: XaddError) -> Self {
        match e {
            XaddError::Syntax { .. } | XaddError::UnboundedVariable(_) | XaddError::ConflictingBounds(_) => {
                CliError::Parse(e.to_string())
            }
            XaddError::UnassignedVariable(_) | XaddError::UnknownVariable(_) => CliError::Usage(e.to_string()),
            e => CliError::Solver(e.to_string()),
        }
    }
}

impl From<crate::solver::SolveError> for CliError {
    fn from(e: crate::solver::SolveError) -> Self {
        match e {
            crate::solver::SolveError::Invalid(_) => CliError::Parse(e.to_string()),
            crate::solver::SolveError::OutOfDomain(_) => CliError::Usage(e.to_string()),
            crate::solver::SolveError::Xadd(x) => CliError::Solver(x.to_string()),
        }
    }
}

fn diagnostics(d: Vec<Diagnostic>) -> CliError {
    let mut msg = d.first().map(|d| d.to_string()).unwrap_or_default();
    if d.len() > 1 {
        let _ = write!(msg, " (and {} more)", d.len() - 1);
    }
    CliError::Parse(msg)
}

/// Run the command line `args` (program name first). Returns the exit code.
pub fn cli_run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{}", e);
                return 0;
            }
            let first = e.to_string();
            let first = first
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            eprintln!("{}", CliError::Usage(first.to_string()).line());
            return 1;
        }
    };
    match run(cli.cmd) {
        Ok(out) => {
            print!("{}", out);
            0
        }
        Err(e) => {
            eprintln!("{}", e.line());
            e.code()
        }
    }
}

fn run(cmd: Cmd) -> Result<String, CliError> {
    match cmd {
        Cmd::Solve(a) => solve(a),
        Cmd::Compress { input, eps, out } => compress(&input, eps, out.as_deref()),
        Cmd::Eval { run, state, at } => eval(run, &state, at),
        Cmd::Export { input, format, out } => export(&input, &format, out.as_deref()),
        Cmd::Sample {
            input,
            grid,
            points,
            seed,
            fix,
            out,
        } => sample(&input, &grid, points, seed, &fix, out.as_deref()),
        Cmd::Diff { a, b } => diff(&a, &b),
        Cmd::Domain { domain } => Ok(print(&load_domain(&domain)?)),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {}", path.display(), e)))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {}", path.display(), e)))
}

fn load_domain(spec: &str) -> Result<HmdpModel, CliError> {
    let text = match builtin_by_spec(spec) {
        Ok(t) => t,
        Err(_) if Path::new(spec).exists() => read(Path::new(spec))?,
        Err(d) => return Err(CliError::Usage(format!("{} and no such file", d.msg))),
    };
    parse(&text).map_err(diagnostics)
}

fn load_xadd(store: &mut DiagramStore<f64>, path: &Path) -> Result<NodeId, CliError> {
    let text = read(path)?;
    store
        .read_text(&text)
        .map_err(|e| CliError::Parse(format!("{}: {}", path.display(), e)))
}

/// Finite non-negative budgets, one run per value.
fn runs(a: &RunArgs, model: &HmdpModel) -> Result<Vec<(String, SolveOptions<f64>)>, CliError> {
    let horizon = a
        .horizon
        .or(model.horizon)
        .ok_or_else(|| CliError::Usage("no --horizon given and the domain declares none".into()))?;
    let mut out = Vec::new();
    for &e in a.eps.iter().chain(&a.eps_rel) {
        if !(e.is_finite() && e >= 0.0) {
            return Err(CliError::Usage(format!(
                "error bound must be finite and >= 0, got {}",
                e
            )));
        }
    }
    for &e in &a.eps {
        out.push((format!("eps_{}", e), SolveOptions::absolute(horizon, e)));
    }
    for &e in &a.eps_rel {
        out.push((format!("eps_rel_{}", e), SolveOptions::relative(horizon, e)));
    }
    if out.is_empty() {
        out.push(("exact".to_string(), SolveOptions::exact(horizon)));
    }
    for (_, o) in out.iter_mut() {
        o.retain_all_q = a.retain_q;
    }
    Ok(out)
}

/// Fixed 9-significant-digit formatting.
pub(crate) fn fmt9(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{}", v);
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..9).contains(&exp) {
        return format!("{:.8e}", v);
    }
    let decimals = (8 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, v);
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

fn stats_csv(rec: &SolveRecord<f64>) -> String {
    let mut s = String::from("h,nodes,partitions,eps_used,millis\n");
    for st in &rec.stats {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            st.h,
            st.nodes,
            st.partitions,
            fmt9(st.eps_used),
            fmt9(st.millis)
        );
    }
    s
}

fn solve(a: SolveArgs) -> Result<String, CliError> {
    let model = load_domain(&a.run.domain)?;
    let runs = runs(&a.run, &model)?;
    let opts: Vec<SolveOptions<f64>> = runs.iter().map(|r| r.1.clone()).collect();
    let results = solve_sweep(&model, &opts);
    let mut report = String::new();
    let many = runs.len() > 1;
    for ((label, _), res) in runs.iter().zip(results) {
        let (solver, rec) = res?;
        let dir = if many { a.out.join(label) } else { a.out.clone() };
        fs::create_dir_all(&dir).map_err(|e| CliError::Usage(format!("cannot create {}: {}", dir.display(), e)))?;
        write(&dir.join("stats.csv"), &stats_csv(&rec))?;
        for (h, &v) in rec.values.iter().enumerate() {
            write(&dir.join(format!("V{}.xadd", h)), &solver.store.write_text(v))?;
        }
        let last = rec.values.len() - 1;
        let _ = writeln!(
            report,
            "{} horizon={} solved={} converged={} nodes={} bound={}",
            label,
            rec.horizon,
            last,
            rec.converged_at.map_or("no".to_string(), |h| h.to_string()),
            solver.store.node_count(rec.final_value()),
            fmt9(rec.cumulative_bound())
        );
    }
    Ok(report)
}

fn compress(input: &Path, eps: f64, out: Option<&Path>) -> Result<String, CliError> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(CliError::Usage(format!("--eps must be finite and >= 0, got {}", eps)));
    }
    let mut store = DiagramStore::<f64>::new();
    let x = load_xadd(&mut store, input)?;
    let (y, used) = store.xadd_compress(x, eps)?;
    let text = store.write_text(y);
    let summary = format!(
        "eps_used={} nodes_before={} nodes_after={}\n",
        fmt9(used),
        store.node_count(x),
        store.node_count(y)
    );
    match out {
        Some(p) => {
            write(p, &text)?;
            Ok(summary)
        }
        None => {
            eprint!("{}", summary);
            Ok(text)
        }
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "1" | "T" | "t" => Some(true),
        "false" | "0" | "F" | "f" => Some(false),
        _ => None,
    }
}

fn pairs(items: &[String]) -> Result<Vec<(String, String)>, CliError> {
    items
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| match s.split_once('=') {
            Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
            None => Err(CliError::Usage(format!("expected name=value, got `{}`", s))),
        })
        .collect()
}

fn eval(run: RunArgs, state: &[String], at: Option<usize>) -> Result<String, CliError> {
    let model = load_domain(&run.domain)?;
    let mut runs = runs(&run, &model)?;
    if runs.len() != 1 {
        return Err(CliError::Usage("eval takes a single error bound".into()));
    }
    let (_, opts) = runs.remove(0);
    let mut st = State::new();
    for (k, v) in pairs(state)? {
        if model.is_bvar(&k) {
            let b = parse_bool(&v).ok_or_else(|| CliError::Usage(format!("`{}` needs true/false, got `{}`", k, v)))?;
            st = st.with_bool(&k, b);
        } else {
            let x: f64 = v
                .parse()
                .map_err(|_| CliError::Usage(format!("`{}` needs a number, got `{}`", k, v)))?;
            st = st.with_cont(&k, x);
        }
    }
    let mut solver = Solver::<f64>::new(&model)?;
    let rec = solver.solve(&opts)?;
    let h = at.unwrap_or(opts.horizon);
    let value = solver.value_at(&rec, h, &st)?;
    let mut out = format!("value {}\n", fmt9(value));
    if h > 0 {
        let p = solver.policy_at(&rec, h, &st)?;
        let _ = writeln!(out, "action {}", p.action);
        for (name, v) in &p.params {
            let _ = writeln!(out, "param {} {}", name, fmt9(*v));
        }
        let _ = writeln!(out, "q {}", fmt9(p.value));
    }
    Ok(out)
}

fn export(input: &Path, format: &str, out: Option<&Path>) -> Result<String, CliError> {
    let mut store = DiagramStore::<f64>::new();
    let x = load_xadd(&mut store, input)?;
    let text = match format {
        "dot" => store.export_dot(x),
        "case" => store.print_case(x),
        other => return Err(CliError::Usage(format!("unknown format `{}` (dot, case)", other))),
    };
    match out {
        Some(p) => {
            write(p, &text)?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

struct Axis {
    name: String,
    lo: f64,
    hi: f64,
    steps: usize,
}

impl Axis {
    fn parse(s: &str) -> Result<Axis, CliError> {
        let bad = || CliError::Usage(format!("grid axis must be name=lo:hi:steps, got `{}`", s));
        let (name, rest) = s.split_once('=').ok_or_else(bad)?;
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].parse().map_err(|_| bad())?;
        let steps: usize = parts[2].parse().map_err(|_| bad())?;
        if steps < 2 || !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(CliError::Usage(format!(
                "grid axis `{}` needs lo <= hi and at least 2 steps",
                name
            )));
        }
        Ok(Axis {
            name: name.trim().to_string(),
            lo,
            hi,
            steps,
        })
    }

    fn point(&self, k: usize) -> f64 {
        if k + 1 == self.steps {
            self.hi
        } else {
            self.lo + (self.hi - self.lo) * k as f64 / (self.steps - 1) as f64
        }
    }
}

fn sample(
    input: &Path,
    grid: &[String],
    points: Option<usize>,
    seed: u64,
    fix: &[String],
    out: Option<&Path>,
) -> Result<String, CliError> {
    let mut store = DiagramStore::<f64>::new();
    let x = load_xadd(&mut store, input)?;
    let mut fixed_c: BTreeMap<String, f64> = BTreeMap::new();
    let mut fixed_b: BTreeMap<String, bool> = BTreeMap::new();
    for (k, v) in pairs(fix)? {
        if store.bool_var(&k).is_some() {
            let b = parse_bool(&v).ok_or_else(|| CliError::Usage(format!("`{}` needs true/false, got `{}`", k, v)))?;
            fixed_b.insert(k, b);
        } else {
            let f: f64 = v
                .parse()
                .map_err(|_| CliError::Usage(format!("`{}` needs a number, got `{}`", k, v)))?;
            fixed_c.insert(k, f);
        }
    }
    let axes: Vec<Axis> = match points {
        // random mode samples every free continuous variable over its box
        Some(_) => store
            .cont_vars()
            .iter()
            .filter(|v| !fixed_c.contains_key(&v.name))
            .map(|v| Axis {
                name: v.name.clone(),
                lo: v.lo,
                hi: v.hi,
                steps: 2,
            })
            .collect(),
        None => grid.iter().map(|g| Axis::parse(g)).collect::<Result<_, _>>()?,
    };
    if points.is_none() && !(1..=2).contains(&axes.len()) {
        return Err(CliError::Usage("sample takes one or two --grid axes".into()));
    }
    for v in store.cont_vars() {
        if !axes.iter().any(|a| a.name == v.name) && !fixed_c.contains_key(&v.name) {
            return Err(CliError::Usage(format!(
                "`{}` is neither an axis nor fixed with --fix",
                v.name
            )));
        }
    }
    let free_bools: Vec<String> = store
        .bool_vars()
        .iter()
        .filter(|b| !fixed_b.contains_key(*b))
        .cloned()
        .collect();

    let mut csv = String::new();
    let header: Vec<&str> = axes
        .iter()
        .map(|a| a.name.as_str())
        .chain(store.bool_vars().iter().map(|s| s.as_str()))
        .chain(std::iter::once("value"))
        .collect();
    let _ = writeln!(csv, "{}", header.join(","));

    let mut base = Assignment::new();
    for (k, v) in &fixed_c {
        if let Some(id) = store.cont_var(k) {
            base.set_cont(id, *v);
        }
    }
    let cont_points: Vec<Vec<f64>> = match points {
        Some(n) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| axes.iter().map(|a| rng.gen_range(a.lo..=a.hi)).collect())
                .collect()
        }
        None => {
            let mut pts = Vec::new();
            let inner = axes.get(1).map_or(1, |a| a.steps);
            for i in 0..axes[0].steps {
                for j in 0..inner {
                    let mut p = vec![axes[0].point(i)];
                    if let Some(a) = axes.get(1) {
                        p.push(a.point(j));
                    }
                    pts.push(p);
                }
            }
            pts
        }
    };
    let combos = 1usize << free_bools.len();
    for mask in 0..combos {
        let mut bools = fixed_b.clone();
        for (k, b) in free_bools.iter().enumerate() {
            // first variable varies slowest
            let bit = free_bools.len() - 1 - k;
            bools.insert(b.clone(), mask >> bit & 1 == 1);
        }
        let mut assign = base.clone();
        for (k, v) in &bools {
            if let Some(id) = store.bool_var(k) {
                assign.set_bool(id, *v);
            }
        }
        for p in &cont_points {
            let mut a = assign.clone();
            for (axis, &v) in axes.iter().zip(p) {
                if let Some(id) = store.cont_var(&axis.name) {
                    a.set_cont(id, v);
                }
            }
            let value = store.evaluate(x, &a)?;
            let mut row: Vec<String> = p.iter().map(|&v| fmt9(v)).collect();
            for b in store.bool_vars() {
                row.push(if bools[b] { "1".into() } else { "0".into() });
            }
            row.push(fmt9(value));
            let _ = writeln!(csv, "{}", row.join(","));
        }
    }
    match out {
        Some(p) => {
            write(p, &csv)?;
            Ok(String::new())
        }
        None => Ok(csv),
    }
}

fn diff(a: &Path, b: &Path) -> Result<String, CliError> {
    let mut store = DiagramStore::<f64>::new();
    let fa = load_xadd(&mut store, a)?;
    let fb = load_xadd(&mut store, b)?;
    let d = store.max_abs_diff(fa, fb)?;
    Ok(format!("{}\n", d))
}

#[cfg(test)]
mod tests {
    use super::fmt9;

    #[test]
    fn nine_digits() {
        assert_eq!(fmt9(38.0), "38");
        assert_eq!(fmt9(0.1 + 0.2), "0.3");
        assert_eq!(fmt9(-2.3), "-2.3");
        assert_eq!(fmt9(123456789.4), "123456789");
        assert_eq!(fmt9(1234567890.0), "1.23456789e9");
        assert_eq!(fmt9(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt9(-1e-12), "-1.00000000e-12");
        assert_eq!(fmt9(-0.0), "0");
    }
}
