use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use clonelab::closure::{close, contains, minimality_probe, name_generators, ClosureBudget, Membership};
use clonelab::median::{
    amplification_schedule, ident_med_map, lower_bound_violation, majority_ladder, median_term,
    parse_rational, simulate_expansion,
};
use clonelab::order_stats::{median, order_stat};
use clonelab::report::{Check, Report};
use clonelab::verify::{self, criteria, Settings};
use clonelab::wild::{
    chain_lower_bound_from_wild_set, chain_level, classification_identity_map, disjoint_pair,
    in_pol_t1, is_almost_unary_family, oracle_disagreement, wild_family_of_term,
};
use clonelab::{Chain, Error, OpRef, OpTable, Registry, Term};

#[derive(Parser)]
#[command(name = "clonelab", version, about = "Clone-theory workbench on finite chains")]
struct Cli {
    /// Write the JSON report to PATH ("-" for stdout).
    #[arg(long, global = true, value_name = "PATH")]
    json: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct BudgetArgs {
    #[arg(long, default_value_t = 3)]
    max_arity: usize,
    #[arg(long, default_value_t = 200_000)]
    max_tables: usize,
}

impl BudgetArgs {
    fn budget(&self) -> clonelab::Result<ClosureBudget> {
        ClosureBudget::new(self.max_arity, self.max_tables, None)
    }
}

#[derive(Args, Clone)]
struct GeneratorArgs {
    /// Generator table file (repeatable).
    #[arg(long = "table", value_name = "FILE")]
    tables: Vec<PathBuf>,
    /// Generator order statistic such as m:4:2, med:3, min:2 (repeatable).
    #[arg(long = "op", value_name = "SYMBOL")]
    ops: Vec<String>,
    /// Chain size for symbolic generators.
    #[arg(long, default_value_t = 4)]
    chain: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Check the identification turning med_n into med_k.
    MedianGen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        chain: usize,
    },
    /// Exact median-frequency schedule of the med_3 expansion.
    Amplify {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "1/2", value_name = "P/Q")]
        threshold: String,
    },
    /// Build a majority of one arity from another and check it.
    MajorityLadder {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        #[arg(long, default_value_t = 4)]
        chain: usize,
    },
    /// Bounded closure of a generator set.
    Closure {
        #[command(flatten)]
        gens: GeneratorArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        /// Print every member with its witness term.
        #[arg(long)]
        dump: bool,
    },
    /// Is a table in the clone generated by the generators?
    Member {
        #[command(flatten)]
        gens: GeneratorArgs,
        #[command(flatten)]
        budget: BudgetArgs,
        #[arg(long, value_name = "FILE", conflicts_with = "target_op")]
        target: Option<PathBuf>,
        #[arg(long, value_name = "SYMBOL")]
        target_op: Option<String>,
    },
    /// Bounded evidence on whether one operation generates a minimal clone.
    Minimality {
        #[command(flatten)]
        gens: GeneratorArgs,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Wild sets of a monotone term.
    Wild {
        #[arg(long, value_name = "FILE")]
        term: PathBuf,
        #[arg(long, default_value_t = verify::DEFAULT_ORACLE_BOUND, value_name = "M")]
        oracle: u64,
    },
    /// Chain level of m^n_k and the identification realizing it.
    Classify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        chain: usize,
    },
    /// Run every acceptance criterion.
    VerifyAll {
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = verify::DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = verify::DEFAULT_ORACLE_BOUND, value_name = "M")]
        oracle: u64,
    },
}

fn read(path: &Path) -> clonelab::Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        line: 0,
        msg: format!("{}: {e}", path.display()),
    })
}

fn symbol_table(sym: &str, chain: Chain) -> clonelab::Result<OpTable> {
    match OpRef::parse(sym)? {
        OpRef::OrderStat { n, k } => order_stat(n, k, chain),
        OpRef::Named(name) => Err(Error::UnknownOp(name)),
    }
}

fn generators(args: &GeneratorArgs, report: &mut Report) -> clonelab::Result<(Vec<OpTable>, Chain)> {
    let mut tables = Vec::new();
    let mut sources = Vec::new();
    for p in &args.tables {
        tables.push(OpTable::parse(&read(p)?)?);
        sources.push(p.display().to_string());
    }
    let chain = match tables.first() {
        Some(t) => t.chain(),
        None => Chain::new(args.chain)?,
    };
    for s in &args.ops {
        tables.push(symbol_table(s, chain)?);
        sources.push(s.clone());
    }
    let named: Vec<String> = (1..=sources.len()).map(|i| format!("f{i}")).collect();
    report.param("generators", named.iter().zip(&sources).map(|(n, s)| format!("{n} = {s}")).collect::<Vec<_>>());
    report.param("chain", chain.size());
    Ok((tables, chain))
}

fn run(cli: &Cli, report: &mut Report) -> clonelab::Result<()> {
    match &cli.command {
        Command::MedianGen { n, k, chain } => {
            report.param("n", n).param("k", k).param("chain", chain);
            let ch = Chain::new(*chain)?;
            let map = ident_med_map(*n, *k)?;
            let term = median_term(*n, *k)?;
            let mut c = Check::new(format!("med_{n} identifies to med_{k}"));
            c.expect_equal("identified table", &median(*n, ch)?.identify_vars(&map)?, &median(*k, ch)?);
            c.note(format!("{} tuples of med_{n} on chain {chain}", median(*n, ch)?.values().len()));
            c.tuples_checked = (*chain as u64).pow(*n as u32);
            report.fact("term", &term);
            report.data = json!({ "multiplicities": map.multiplicities(), "term": term.to_string() });
            report.push(c);
        }
        Command::Amplify { n, threshold } => {
            let t = parse_rational(threshold)?;
            report.param("n", n).param("threshold", threshold);
            let s = amplification_schedule(*n, &t)?;
            let mut c = Check::new("schedule exceeds the threshold");
            match &s.b {
                Some(b) => c.note(format!("b = {b} after {} expansions", s.steps.len() - 1)),
                None => c.fail("step or size cap reached", json!(s.steps.len())),
            }
            report.push(c);
            let mut c = Check::new("lower-bound inequality at every step");
            if let Some(j) = lower_bound_violation(&s) {
                c.fail(format!("fails at j = {j}"), json!(j));
            }
            report.push(c);
            if *n >= 5 && s.steps.len() > 1 {
                // expanding n distinct values: the median count after one step is k_1
                let mut c = Check::new("simulation matches k_1");
                let start: Vec<usize> = (0..*n).collect();
                let (out, freq) = simulate_expansion(&start)?;
                c.tuples_checked = out.len() as u64;
                let got = freq.get(&(n / 2)).copied().unwrap_or(0);
                let want = s.steps[1].k_j.to_integer().to_string();
                c.expect(got.to_string() == want, "median frequency", json!({ "got": got, "want": want }));
                report.push(c);
            }
            if s.degenerate {
                report.param("degenerate", true);
            }
            for st in &s.steps {
                report.fact(&format!("j = {}", st.j), format!("n_j = {}, r_j = {}", st.n_j, st.r_j));
            }
            report.data = s.to_json();
        }
        Command::MajorityLadder { from, to, chain } => {
            report.param("from", from).param("to", to).param("chain", chain);
            let ch = Chain::new(*chain)?;
            let ladder = majority_ladder(*from, *to)?;
            let src = if from % 2 == 1 {
                median(*from, ch)?
            } else {
                ladder_even_source(*from, ch)?
            };
            let tables = ladder.tabulate(&src);
            for r in &ladder.rungs {
                report.fact("rung", format!("{:?} {} -> {}", r.step, r.from, r.to));
            }
            report.data = serde_json::to_value(&ladder).expect("ladder serializes");
            match tables {
                Ok(tables) => {
                    let last = tables.last().cloned().unwrap_or(src);
                    report.push(verify::majority_check(&format!("maj_{to} is a majority"), &last));
                }
                Err(e) => {
                    let mut c = Check::new(format!("maj_{to} is a majority"));
                    c.fail(e.to_string(), json!(null));
                    report.push(c);
                }
            }
        }
        Command::Closure { gens, budget, dump } => {
            let (tables, chain) = generators(gens, report)?;
            let b = budget.budget()?;
            report.param("max_arity", b.max_arity).param("max_tables", b.max_tables);
            let frag = close(&name_generators(&tables)?, chain, &b)?;
            let levels: Vec<_> = frag
                .levels()
                .iter()
                .map(|l| json!({ "arity": l.arity(), "members": l.len(), "exhausted": l.exhausted(), "rounds": l.rounds() }))
                .collect();
            let mut c = Check::new("witnesses reproduce members");
            c.tables_enumerated = frag.len() as u64;
            if let Some(key) = frag.verify_witnesses()? {
                c.fail("witness mismatch", json!(hex(&key)));
            }
            report.push(c);
            let mut c = Check::new("fixpoint reached at every arity");
            if !frag.fully_exhausted() {
                c.unknown("budget exhausted before the fixpoint");
            }
            report.push(c);
            for l in frag.levels() {
                report.fact(
                    &format!("arity {}", l.arity()),
                    format!("{} members{}", l.len(), if l.exhausted() { "" } else { " (not exhausted)" }),
                );
            }
            let mut data = json!({ "levels": levels });
            if *dump {
                data["members"] = frag
                    .members()
                    .map(|m| json!({ "key": m.table.key_hex(), "arity": m.table.arity(), "witness": m.witness.to_string() }))
                    .collect();
                print!("{}", frag.dump());
            }
            report.data = data;
        }
        Command::Member { gens, budget, target, target_op } => {
            let (tables, chain) = generators(gens, report)?;
            let target = match (target, target_op) {
                (Some(p), _) => OpTable::parse(&read(p)?)?,
                (None, Some(s)) => symbol_table(s, chain)?,
                (None, None) => return Err(Error::InvalidBudget("--target or --target-op is required".into())),
            };
            let b = ClosureBudget {
                max_arity: budget.max_arity.max(target.arity()),
                ..budget.budget()?
            };
            report.param("max_arity", b.max_arity).param("max_tables", b.max_tables);
            let frag = close(&name_generators(&tables)?, chain, &b)?;
            let mut c = Check::new("target is generated");
            c.tables_enumerated = frag.len() as u64;
            match contains(&frag, &target)? {
                Membership::Yes(w) => {
                    c.note(format!("witness {w}"));
                    report.data = json!({ "member": "yes", "witness": w.to_string() });
                }
                Membership::No => {
                    c.fail("fixpoint reached without the target", json!(target.key_hex()));
                    report.data = json!({ "member": "no" });
                }
                Membership::Unknown => {
                    c.unknown("budget exhausted");
                    report.data = json!({ "member": "unknown" });
                }
            }
            report.push(c);
        }
        Command::Minimality { gens, budget } => {
            let (tables, _) = generators(gens, report)?;
            let [f] = tables.as_slice() else {
                return Err(Error::InvalidBudget("exactly one --table or --op is required".into()));
            };
            let b = budget.budget()?;
            report.param("max_arity", b.max_arity).param("max_tables", b.max_tables);
            let r = minimality_probe(f, &b)?;
            let mut c = Check::new("every checked member regenerates the operation");
            c.tables_enumerated = r.fragment_size as u64;
            if let Some(e) = r.failures.first() {
                c.fail(
                    format!("{} members do not regenerate it", r.failures.len()),
                    json!({ "key": e.table.key_hex(), "witness": e.witness.to_string() }),
                );
            } else if !r.unknown.is_empty() {
                c.unknown(format!("{} members undecided", r.unknown.len()));
            } else {
                c.note(format!("{} members checked (bounded evidence, not a proof)", r.checked));
            }
            report.push(c);
            report.data = json!({
                "checked": r.checked,
                "regenerating": r.regenerating,
                "failures": r.failures.iter().map(|e| json!({ "key": e.table.key_hex(), "witness": e.witness.to_string() })).collect::<Vec<_>>(),
                "unknown": r.unknown.len(),
                "fragment_exhausted": r.fragment_exhausted,
                "note": "bounded evidence, not a proof",
            });
        }
        Command::Wild { term, oracle } => {
            report.param("term", term.display().to_string()).param("oracle", oracle);
            let t = Term::parse(&read(term)?)?;
            let fam = wild_family_of_term(&t)?;
            let mut data = fam.to_json();
            data["in_pol_t1"] = json!(in_pol_t1(&fam));
            if let Some((a, b)) = disjoint_pair(&fam) {
                data["disjoint_pair"] = json!([a, b]);
            }
            if t.arity() >= 2 {
                let au = is_almost_unary_family(&fam)?;
                data["almost_unary"] = json!(au);
                if !au {
                    let bound = chain_lower_bound_from_wild_set(&fam, None)?;
                    data["chain_lower_bound"] = json!(bound.level);
                    data["bound_map"] = json!(bound.map.assignment());
                }
            }
            let sets: Vec<String> = fam
                .minimal_sets()
                .iter()
                .map(|s| format!("{{{}}}", s.iter().map(usize::to_string).collect::<Vec<_>>().join(",")))
                .collect();
            report.fact("minimal wild sets", sets.join(" "));
            report.fact("in_pol_t1", in_pol_t1(&fam));
            if let Some(au) = data.get("almost_unary") {
                report.fact("almost unary", au);
            }
            if let Some(b) = data.get("chain_lower_bound") {
                report.fact("chain lower bound", format!("M_{b}"));
            }
            let mut c = Check::new("growth oracle agrees on every subset");
            c.tuples_checked = (1u64 << t.arity()) * (oracle + 1);
            if let Some(set) = oracle_disagreement(&t, *oracle)? {
                c.fail("oracle disagrees", json!(set));
            }
            report.push(c);
            report.data = data;
        }
        Command::Classify { n, k, chain } => {
            report.param("n", n).param("k", k).param("chain", chain);
            let ch = Chain::new(*chain)?;
            let level = chain_level(*n, *k)?;
            let map = classification_identity_map(*n, *k)?;
            let mut c = Check::new(format!("m^{n}_{k} identifies to m^{level}_2"));
            c.expect_equal("identified table", &order_stat(*n, *k, ch)?.identify_vars(&map)?, &order_stat(level, 2, ch)?);
            report.push(c);
            report.fact("chain level", level);
            report.fact("multiplicities", format!("{:?}", map.multiplicities()));
            report.data = json!({ "level": level, "multiplicities": map.multiplicities() });
        }
        Command::VerifyAll { quick, seed, oracle } => {
            report.param("quick", quick).param("seed", seed).param("oracle", oracle);
            let s = Settings { quick: *quick, seed: *seed, oracle_bound: *oracle };
            for cr in criteria() {
                let mut c = (cr.run)(&s);
                c.name = format!("criterion {}: {}", cr.id, cr.name);
                report.push(c);
            }
        }
    }
    Ok(())
}

fn ladder_even_source(arity: usize, ch: Chain) -> clonelab::Result<OpTable> {
    clonelab::median::even_majority_term(&OpRef::median(arity + 1)?, &median(arity + 1, ch)?, arity)?
        .to_table(ch, &Registry::new())
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn configure_threads() {
    if let Some(n) = std::env::var("CLONELAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    configure_threads();
    let mut report = Report::new(std::env::args().skip(1).collect());
    let start = Instant::now();
    if let Err(e) = run(&cli, &mut report) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    report.wall_time = start.elapsed();
    print!("{}", report.to_text());
    if let Some(path) = &cli.json {
        let body = report.to_json();
        let written = if path.as_os_str() == "-" {
            print!("{body}");
            Ok(())
        } else {
            std::fs::write(path, body)
        };
        if let Err(e) = written {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(report.exit_code() as u8)
}
