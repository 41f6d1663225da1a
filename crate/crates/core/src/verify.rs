//! The acceptance criteria as runnable checks.
//!
//! `quick` runs exactly the pinned parameters; the full run widens corpora
//! and chains.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::closure::{minimality_probe, ClosureBudget};
use crate::median::{
    amplification_schedule, even_majority_term, grow_majority_term, ident_med_map,
    is_almost_divisible, lower_bound_violation, lower_median_to_med3, majority_ladder,
    max_from_mnk, med3_doubling_map, min_from_mnk, simulate_expansion,
    ternary_identifications_to_med3,
};
use crate::order_stats::{
    is_majority, lower_median, majority_counterexample, max_op, median, min_op, order_stat,
};
use crate::report::Check;
use crate::table::{Chain, OpTable};
use crate::term::{OpRef, Registry, Term};
use crate::wild::{
    build_intersecting_term, chain_level, classification_identity_map, in_pol_t1,
    intersecting_antichains, is_almost_unary_family, monotone_corpus, oracle_disagreement,
    second_order_stat_corpus, set_of, wild_family_of_order_stat, wild_family_of_term, wild_leq,
};

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_ORACLE_BOUND: u64 = 32;

/// Pinned parameters.
pub const MEDIAN_CHAIN: usize = 4;
pub const MED3_CHAIN: usize = 5;
pub const SCHEDULE_STEP_LIMIT: usize = 20;
pub const WILD_CORPUS_SIZE: usize = 200;
pub const WILD_CORPUS_ARITY: usize = 6;
pub const CORPUS_DEPTH: usize = 3;
pub const SECOND_STAT_CORPUS_SIZE: usize = 100;
pub const ANTICHAIN_MAX_ARITY: usize = 5;

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub quick: bool,
    pub seed: u64,
    pub oracle_bound: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            quick: true,
            seed: DEFAULT_SEED,
            oracle_bound: DEFAULT_ORACLE_BOUND,
        }
    }
}

pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    /// Expected wall-time ceiling in seconds (optimized build).
    pub budget_secs: u64,
    pub run: fn(&Settings) -> Check,
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: 1, name: "median identification", budget_secs: 5, run: median_identification },
        Criterion { id: 2, name: "med_3 from med_n", budget_secs: 2, run: med3_from_median },
        Criterion { id: 3, name: "majority amplifier", budget_secs: 2, run: majority_amplifier },
        Criterion { id: 4, name: "majority ladder", budget_secs: 10, run: ladder_grid },
        Criterion { id: 5, name: "amplification schedule", budget_secs: 5, run: schedule },
        Criterion { id: 6, name: "minimality landscape", budget_secs: 180, run: minimality },
        Criterion { id: 7, name: "lower median", budget_secs: 1, run: lower_median_check },
        Criterion { id: 8, name: "wildness oracle agreement", budget_secs: 30, run: oracle_agreement },
        Criterion { id: 9, name: "Pol(T1) criterion", budget_secs: 1, run: pol_t1 },
        Criterion { id: 10, name: "intersecting-family builder", budget_secs: 60, run: intersecting },
        Criterion { id: 11, name: "chain classification", budget_secs: 10, run: classification },
        Criterion { id: 12, name: "below-arity collapse", budget_secs: 5, run: below_arity },
    ]
}

fn chain(n: usize) -> Chain {
    Chain::new(n).expect("pinned chain sizes are valid")
}

fn median_identification(s: &Settings) -> Check {
    Check::run("median identification", |c| {
        let size = if s.quick { MEDIAN_CHAIN } else { MEDIAN_CHAIN + 1 };
        let ch = chain(size);
        let mut pairs = 0;
        for n in (3..=9).step_by(2) {
            let med_n = median(n, ch)?;
            for k in (3..=n).step_by(2) {
                if !is_almost_divisible(n, k) {
                    continue;
                }
                let map = ident_med_map(n, k)?;
                c.expect_equal(&format!("med_{n} -> med_{k}"), &med_n.identify_vars(&map)?, &median(k, ch)?);
                pairs += 1;
            }
        }
        c.note(format!("{pairs} almost-divisible pairs on chain {size}"));
        Ok(())
    })
}

fn med3_from_median(s: &Settings) -> Check {
    Check::run("med_3 from med_n", |c| {
        let ch = chain(MED3_CHAIN);
        let top = if s.quick { 9 } else { 11 };
        let med3 = median(3, ch)?;
        for n in (5..=top).step_by(2) {
            let map = med3_doubling_map(n)?;
            c.expect_equal(&format!("med_{n}"), &median(n, ch)?.identify_vars(&map)?, &med3);
        }
        c.note(format!("n = 5..={top} odd on chain {MED3_CHAIN}"));
        Ok(())
    })
}

fn expect_majority(c: &mut Check, what: &str, t: &OpTable) {
    c.tuples_checked += t.values().len() as u64;
    if let Some(x) = majority_counterexample(t) {
        c.fail(format!("{what} is not a majority"), json!({ "what": what, "tuple": x }));
    }
}

fn majority_amplifier(_: &Settings) -> Check {
    Check::run("majority amplifier", |c| {
        let empty = Registry::new();
        let med3 = OpRef::median(3)?;
        let c3 = chain(3);
        let five = grow_majority_term(&med3, &median(3, c3)?, 5)?;
        c.expect(five.depth() == 3, "grow term depth is 3", json!(five.depth()));
        let t5 = five.to_table(c3, &empty)?;
        c.expect(t5.values().len() == 243, "243 tuples on chain 3", json!(t5.values().len()));
        expect_majority(c, "maj_5 on chain 3", &t5);

        let c2 = chain(2);
        let t5 = five.to_table(c2, &empty)?;
        let reg = Registry::new().with("maj5", t5.clone())?;
        let t7 = grow_majority_term(&OpRef::named("maj5"), &t5, 7)?.to_table(c2, &reg)?;
        c.expect(t7.values().len() == 128, "128 tuples on chain 2", json!(t7.values().len()));
        expect_majority(c, "maj_7 on chain 2", &t7);

        let t4 = even_majority_term(&OpRef::median(5)?, &median(5, c3)?, 4)?.to_table(c3, &empty)?;
        expect_majority(c, "maj_4 on chain 3", &t4);
        Ok(())
    })
}

fn majority_source(arity: usize, ch: Chain) -> crate::Result<OpTable> {
    if arity % 2 == 1 {
        median(arity, ch)
    } else {
        even_majority_term(&OpRef::median(arity + 1)?, &median(arity + 1, ch)?, arity)?
            .to_table(ch, &Registry::new())
    }
}

fn ladder_grid(s: &Settings) -> Check {
    Check::run("majority ladder", |c| {
        let ch = chain(2);
        let top = if s.quick { 8 } else { 10 };
        let mut ladders = 0;
        for source in 3..=5 {
            let src = majority_source(source, ch)?;
            for target in 2..=top {
                let ladder = majority_ladder(source, target)?;
                let tables = ladder.tabulate(&src).or_else(|e| {
                    c.fail(format!("{source} -> {target}: {e}"), json!([source, target]));
                    Ok::<_, crate::Error>(Vec::new())
                })?;
                let last = tables.last().cloned().unwrap_or_else(|| src.clone());
                c.expect(last.arity() == target, "ladder ends at the target arity", json!([source, target]));
                expect_majority(c, &format!("ladder {source} -> {target}"), &last);
                ladders += 1;
            }
        }
        c.note(format!("{ladders} ladders on chain 2"));
        Ok(())
    })
}

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn schedule(s: &Settings) -> Check {
    Check::run("amplification schedule", |c| {
        let sched = amplification_schedule(5, &ratio(1, 2))?;
        let r: Vec<BigRational> = sched.steps.iter().map(|s| s.r_j.clone()).collect();
        let want = vec![ratio(1, 5), ratio(4, 10), ratio(76, 120)];
        c.expect(r == want, "n = 5 ratios", json!(r.iter().map(|r| r.to_string()).collect::<Vec<_>>()));
        c.expect(sched.b == Some(BigInt::from(120)), "b = 120", json!(sched.b.as_ref().map(|b| b.to_string())));

        let start: Vec<u32> = (0..5).collect();
        let (once, freq) = simulate_expansion(&start)?;
        c.expect(freq.get(&2) == Some(&4), "median frequency 4 after one step", json!(freq.get(&2)));
        let (twice, freq) = simulate_expansion(&once)?;
        c.tuples_checked += (once.len() + twice.len()) as u64;
        c.expect(twice.len() == 120, "120 evaluations in step two", json!(twice.len()));
        c.expect(freq.get(&2).is_some_and(|&f| f >= 76), "median frequency ≥ 76 after two steps", json!(freq.get(&2)));

        let top = if s.quick { 15 } else { 21 };
        let threshold = ratio(99, 100);
        for n in (5..=top).step_by(2) {
            let sched = amplification_schedule(n, &threshold)?;
            let expansions = sched.steps.len() - 1;
            c.expect(sched.b.is_some() && expansions <= SCHEDULE_STEP_LIMIT, format!("n = {n} reaches 0.99 within {SCHEDULE_STEP_LIMIT} steps"), json!({ "n": n, "steps": expansions }));
            if let Some(j) = lower_bound_violation(&sched) {
                c.fail(format!("n = {n}: lower bound fails"), json!({ "n": n, "j": j }));
            }
        }
        c.note(format!("exact schedules for n = 5..={top}"));
        Ok(())
    })
}

fn minimality(s: &Settings) -> Check {
    Check::run("minimality landscape", |c| {
        let ch = chain(MEDIAN_CHAIN);
        let top = if s.quick { 6 } else { 8 };
        let (min2, max2) = (min_op(2, ch)?, max_op(2, ch)?);
        for n in 2..=top {
            for k in 1..=n {
                if let Ok(map) = min_from_mnk(n, k) {
                    c.expect_equal(&format!("min_2 from m^{n}_{k}"), &order_stat(n, k, ch)?.identify_vars(&map)?, &min2);
                }
                if let Ok(map) = max_from_mnk(n, k) {
                    c.expect_equal(&format!("max_2 from m^{n}_{k}"), &order_stat(n, k, ch)?.identify_vars(&map)?, &max2);
                }
            }
        }
        let budget = ClosureBudget::default();
        let c3 = chain(3);
        let r = minimality_probe(&median(3, c3)?, &budget)?;
        c.tables_enumerated += r.fragment_size as u64;
        c.expect(r.failures.is_empty(), "every member of <med_3> regenerates med_3", json!(r.failures.first().map(|e| e.table.key_hex())));
        if !r.unknown.is_empty() {
            c.unknown(format!("{} members of <med_3> undecided", r.unknown.len()));
        }
        let r = minimality_probe(&order_stat(4, 2, c3)?, &budget)?;
        c.tables_enumerated += r.fragment_size as u64;
        let min_c3 = min_op(2, c3)?;
        c.expect(r.failures.iter().any(|e| e.table == min_c3), "min_2 witnesses non-minimality of m^4_2", json!(r.failures.len()));
        c.note(format!("n ≤ {top} identities on chain {MEDIAN_CHAIN}; probes on chain 3"));
        Ok(())
    })
}

fn lower_median_check(_: &Settings) -> Check {
    Check::run("lower median", |c| {
        let ch = chain(MEDIAN_CHAIN);
        let med3 = median(3, ch)?;
        for n in [6, 8] {
            let map = lower_median_to_med3(n)?;
            c.expect_equal(&format!("med^low_{n}"), &lower_median(n, ch)?.identify_vars(&map)?, &med3);
        }
        let hits = ternary_identifications_to_med3(&lower_median(4, ch)?)?;
        c.tables_enumerated += 81;
        c.expect(hits.is_empty(), "no identification of med^low_4 is med_3", json!(hits.first().map(|m| m.assignment().to_vec())));
        c.expect(lower_median_to_med3(4).is_err(), "n = 4 refused", json!(4));
        Ok(())
    })
}

fn oracle_agreement(s: &Settings) -> Check {
    Check::run("wildness oracle agreement", |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
        let count = if s.quick { WILD_CORPUS_SIZE } else { 5 * WILD_CORPUS_SIZE };
        let corpus = monotone_corpus(&mut rng, count, WILD_CORPUS_ARITY, CORPUS_DEPTH);
        for t in &corpus {
            c.tuples_checked += 1 << t.arity();
            if let Some(set) = oracle_disagreement(t, s.oracle_bound)? {
                c.fail("oracle and {0,∞} reading disagree", json!({ "term": t.to_string(), "set": set }));
            }
        }
        c.note(format!("{count} terms, seed {}, M = {}", s.seed, s.oracle_bound));
        Ok(())
    })
}

/// The incomparable pair: `med_3` padded to arity 4 and `med_5(x1,x1,x2,x3,x4)`.
pub fn incomparable_pair() -> (Term, Term) {
    let g = Term::parse("term 4\n(op med:3 (var 1) (var 2) (var 3))").expect("literal term");
    let f = Term::parse("(op med:5 (var 1) (var 1) (var 2) (var 3) (var 4))").expect("literal term");
    (g, f)
}

fn pol_t1(_: &Settings) -> Check {
    Check::run("Pol(T1) criterion", |c| {
        for n in 1..=9 {
            for k in 1..=n {
                let fam = wild_family_of_order_stat(n, k)?;
                c.expect(in_pol_t1(&fam) == (2 * k <= n + 1), "in_pol_t1(m^n_k) iff k ≤ (n+1)/2", json!([n, k]));
            }
        }
        let (g, f) = incomparable_pair();
        let (gf, ff) = (wild_family_of_term(&g)?, wild_family_of_term(&f)?);
        c.expect(in_pol_t1(&gf) && in_pol_t1(&ff), "both terms preserve T1", json!(null));
        c.expect(wild_leq(&ff, &gf)?.is_none(), "no permutation f ≤_W g", json!(wild_leq(&ff, &gf)?));
        c.expect(wild_leq(&gf, &ff)?.is_none(), "no permutation g ≤_W f", json!(wild_leq(&gf, &ff)?));
        Ok(())
    })
}

fn intersecting(_: &Settings) -> Check {
    Check::run("intersecting-family builder", |c| {
        let mut total = 0;
        for n in 1..=ANTICHAIN_MAX_ARITY {
            for anti in intersecting_antichains(n) {
                let sets: Vec<Vec<usize>> = anti.iter().map(|&m| set_of(m)).collect();
                let fam = wild_family_of_term(&build_intersecting_term(&sets, n)?)?;
                if let Some(s) = sets.iter().find(|s| !fam.contains(s)) {
                    c.fail("built term misses a given set", json!({ "n": n, "family": sets, "missing": s }));
                }
                total += 1;
            }
        }
        c.tables_enumerated += total;
        c.note(format!("{total} intersecting antichains, n ≤ {ANTICHAIN_MAX_ARITY}"));
        Ok(())
    })
}

fn classification(_: &Settings) -> Check {
    Check::run("chain classification", |c| {
        let ch = chain(3);
        for (n, k) in [(5, 3), (7, 3), (7, 4), (9, 4), (9, 5)] {
            let map = classification_identity_map(n, k)?;
            let level = chain_level(n, k)?;
            c.expect(level == n.div_ceil(k - 1) && map.target_arity() == level, "chain level", json!([n, k, level]));
            c.expect_equal(&format!("m^{n}_{k} -> m^{level}_2"), &order_stat(n, k, ch)?.identify_vars(&map)?, &order_stat(level, 2, ch)?);
        }
        for n in 2..=4 {
            let big = wild_family_of_order_stat(n + 1, 2)?;
            let padded = wild_family_of_order_stat(n, 2)?.pad(n + 1)?;
            c.expect(wild_leq(&big, &padded)?.is_some(), "m^{n+1}_2 ≤_W padded m^n_2", json!(n));
        }
        Ok(())
    })
}

fn below_arity(s: &Settings) -> Check {
    Check::run("below-arity collapse", |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x5eed);
        let total = if s.quick { SECOND_STAT_CORPUS_SIZE } else { 5 * SECOND_STAT_CORPUS_SIZE };
        let mut done = 0;
        for (i, n) in [3, 4, 5].into_iter().enumerate() {
            let count = total / 3 + usize::from(i < total % 3);
            for t in second_order_stat_corpus(&mut rng, count, n, CORPUS_DEPTH) {
                let fam = wild_family_of_term(&t)?;
                c.expect(is_almost_unary_family(&fam)?, "term below arity n is almost unary", json!({ "n": n, "term": t.to_string() }));
                done += 1;
            }
        }
        c.note(format!("{done} terms over m:n:2, seed {}", s.seed));
        Ok(())
    })
}

/// Checks that a majority table really is one; shared with the CLI.
pub fn majority_check(name: &str, t: &OpTable) -> Check {
    let mut c = Check::new(name);
    expect_majority(&mut c, name, t);
    if c.passed() {
        c.note(format!("is_majority over {} tuples", t.values().len()));
    }
    debug_assert_eq!(c.passed(), is_majority(t));
    c
}
