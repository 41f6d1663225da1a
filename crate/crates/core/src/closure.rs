//! Bounded computation of the clone generated by finitely many tables.
//!
//! The `m`-ary part of a clone is the smallest set of `m`-ary tables that
//! contains the projections and is closed under applying the generators.
//! Each arity is therefore closed independently: round by round, every
//! generator is applied to tuples of members at least one of which was new
//! in the previous round, until nothing new appears (the fragment is then
//! *exhausted* at that arity) or the budget runs out.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::order_stats::is_totally_symmetric;
use crate::table::{Chain, OpTable, DEFAULT_TABLE_CAP};
use crate::term::{Expr, OpRef, Registry, Term};

/// Limits for a closure run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClosureBudget {
    /// Largest arity whose part of the clone is computed.
    pub max_arity: usize,
    /// Cap on the total number of stored members over all arities.
    pub max_tables: usize,
    /// Cap on the number of composition rounds per arity.
    pub max_depth: Option<usize>,
    /// Cap on generator applications per arity.
    pub max_compositions: u64,
}

impl Default for ClosureBudget {
    fn default() -> Self {
        ClosureBudget {
            max_arity: 3,
            max_tables: 200_000,
            max_depth: None,
            max_compositions: 200_000_000,
        }
    }
}

impl ClosureBudget {
    pub fn new(max_arity: usize, max_tables: usize, max_depth: Option<usize>) -> Result<Self> {
        let b = ClosureBudget {
            max_arity,
            max_tables,
            max_depth,
            ..Default::default()
        };
        b.validate()?;
        Ok(b)
    }

    pub fn with_arity(max_arity: usize) -> Self {
        ClosureBudget {
            max_arity,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_arity == 0 || self.max_tables == 0 || self.max_compositions == 0 {
            return Err(Error::InvalidBudget("limits must be positive".into()));
        }
        if self.max_depth == Some(0) {
            return Err(Error::InvalidBudget("max_depth must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Recipe {
    Projection(usize),
    Generator(usize),
    Apply { generator: usize, args: Vec<u32> },
}

#[derive(Debug, Clone)]
struct Member {
    table: OpTable,
    recipe: Recipe,
    round: usize,
}

/// The members of one arity.
#[derive(Debug, Clone)]
pub struct ArityLevel {
    arity: usize,
    members: Vec<Member>,
    index: HashMap<Vec<u8>, usize>,
    exhausted: bool,
    rounds: usize,
    compositions: u64,
}

impl ArityLevel {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// True iff the fixpoint was reached within budget.
    pub fn exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn compositions(&self) -> u64 {
        self.compositions
    }

    pub fn tables(&self) -> impl Iterator<Item = &OpTable> {
        self.members.iter().map(|m| &m.table)
    }

    pub fn position(&self, table: &OpTable) -> Option<usize> {
        if table.arity() != self.arity {
            return None;
        }
        self.index.get(table.values()).copied()
    }
}

/// A bounded part of the clone generated by `generators`.
#[derive(Debug, Clone)]
pub struct CloneFragment {
    chain: Chain,
    generators: Registry,
    budget: ClosureBudget,
    levels: Vec<ArityLevel>,
}

/// A member together with its witness term.
#[derive(Debug, Clone)]
pub struct MemberView<'a> {
    pub table: &'a OpTable,
    pub witness: Term,
    /// Composition round in which the member first appeared (0 for seeds).
    pub round: usize,
}

/// Outcome of a membership query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    Yes(Term),
    /// The target's arity was closed to a fixpoint without meeting it.
    No,
    /// The budget ran out before a verdict.
    Unknown,
}

impl Membership {
    pub fn label(&self) -> &'static str {
        match self {
            Membership::Yes(_) => "yes",
            Membership::No => "no",
            Membership::Unknown => "unknown",
        }
    }
}

impl CloneFragment {
    pub fn chain(&self) -> Chain {
        self.chain
    }

    pub fn budget(&self) -> &ClosureBudget {
        &self.budget
    }

    pub fn generators(&self) -> &Registry {
        &self.generators
    }

    pub fn level(&self, arity: usize) -> Option<&ArityLevel> {
        self.levels.get(arity.checked_sub(1)?)
    }

    pub fn levels(&self) -> &[ArityLevel] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.iter().map(ArityLevel::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn exhausted(&self, arity: usize) -> bool {
        self.level(arity).is_some_and(ArityLevel::exhausted)
    }

    pub fn fully_exhausted(&self) -> bool {
        self.levels.iter().all(ArityLevel::exhausted)
    }

    pub fn contains_table(&self, table: &OpTable) -> bool {
        table.chain() == self.chain
            && self
                .level(table.arity())
                .is_some_and(|l| l.position(table).is_some())
    }

    /// Looks a member up by its canonical key.
    pub fn get(&self, key: &[u8]) -> Option<MemberView<'_>> {
        if key.len() < 8 {
            return None;
        }
        let arity = u32::from_le_bytes(key[0..4].try_into().ok()?) as usize;
        let size = u32::from_le_bytes(key[4..8].try_into().ok()?) as usize;
        if size != self.chain.size() {
            return None;
        }
        let level = self.level(arity)?;
        let idx = *level.index.get(&key[8..])?;
        Some(self.view(level, idx))
    }

    /// All members, arity by arity in insertion order.
    pub fn members(&self) -> impl Iterator<Item = MemberView<'_>> {
        self.levels
            .iter()
            .flat_map(move |l| (0..l.members.len()).map(move |i| self.view(l, i)))
    }

    pub fn member_tables(&self) -> impl Iterator<Item = &OpTable> {
        self.levels.iter().flat_map(ArityLevel::tables)
    }

    fn view<'a>(&'a self, level: &'a ArityLevel, idx: usize) -> MemberView<'a> {
        let m = &level.members[idx];
        MemberView {
            table: &m.table,
            witness: Term::new(level.arity, self.witness_expr(level, idx))
                .expect("witness built over the level's own variables"),
            round: m.round,
        }
    }

    fn witness_expr(&self, level: &ArityLevel, idx: usize) -> Expr {
        witness_expr(&self.generators, level, idx)
    }

    /// Re-tabulates every witness and compares it with the stored table.
    pub fn verify_witnesses(&self) -> Result<Option<Vec<u8>>> {
        for m in self.members() {
            let t = m.witness.to_table(self.chain, &self.generators)?;
            if &t != m.table {
                return Ok(Some(m.table.canonical_key()));
            }
        }
        Ok(None)
    }

    /// One record per member: the table in text form and its witness.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for m in self.members() {
            out.push_str(&m.table.to_text());
            out.push_str("witness ");
            out.push_str(&m.witness.to_string());
            out.push_str("\n\n");
        }
        out
    }
}

fn witness_expr(generators: &Registry, level: &ArityLevel, idx: usize) -> Expr {
    let (names, _): (Vec<&str>, Vec<&OpTable>) = generators.iter().unzip();
    match &level.members[idx].recipe {
        Recipe::Projection(k) => Expr::Var(*k),
        Recipe::Generator(g) => {
            let arity = generators.iter().nth(*g).map(|(_, t)| t.arity()).unwrap_or(0);
            Expr::apply_vars(OpRef::named(names[*g]), arity)
        }
        Recipe::Apply { generator, args } => Expr::Apply {
            op: OpRef::named(names[*generator]),
            args: args
                .iter()
                .map(|&a| witness_expr(generators, level, a as usize))
                .collect(),
        },
    }
}

/// Closes `generators` on `chain` at every arity `1..=budget.max_arity`.
///
/// Generators whose arity exceeds `max_arity` are still applied to the
/// members of each computed arity; they are just not stored themselves.
pub fn close(generators: &Registry, chain: Chain, budget: &ClosureBudget) -> Result<CloneFragment> {
    budget.validate()?;
    check_generators(generators, chain)?;
    let mut levels = Vec::with_capacity(budget.max_arity);
    let mut used = 0usize;
    for m in 1..=budget.max_arity {
        let level = close_arity(generators, chain, m, budget, budget.max_tables - used, None)?;
        used += level.len();
        levels.push(level);
        if used >= budget.max_tables {
            // remaining arities get no room; report them as not exhausted
            for m2 in (m + 1)..=budget.max_arity {
                levels.push(empty_level(chain, m2)?);
            }
            break;
        }
    }
    Ok(CloneFragment {
        chain,
        generators: generators.clone(),
        budget: *budget,
        levels,
    })
}

/// Convenience wrapper naming the generators `f1, f2, …`.
pub fn close_tables(
    generators: &[OpTable],
    chain: Chain,
    budget: &ClosureBudget,
) -> Result<CloneFragment> {
    close(&name_generators(generators)?, chain, budget)
}

pub fn name_generators(generators: &[OpTable]) -> Result<Registry> {
    let mut reg = Registry::new();
    for (i, g) in generators.iter().enumerate() {
        reg.insert(format!("f{}", i + 1), g.clone())?;
    }
    Ok(reg)
}

fn check_generators(generators: &Registry, chain: Chain) -> Result<()> {
    for (_, g) in generators.iter() {
        if g.chain() != chain {
            return Err(Error::DomainMismatch {
                left: chain.size(),
                right: g.chain().size(),
            });
        }
        if g.arity() == 0 {
            return Err(Error::ArityTooSmall { min: 1, found: 0 });
        }
    }
    Ok(())
}

fn empty_level(chain: Chain, arity: usize) -> Result<ArityLevel> {
    chain.tuple_count(arity, DEFAULT_TABLE_CAP)?;
    Ok(ArityLevel {
        arity,
        members: Vec::new(),
        index: HashMap::new(),
        exhausted: false,
        rounds: 0,
        compositions: 0,
    })
}

/// Membership query against a computed fragment.
pub fn contains(fragment: &CloneFragment, target: &OpTable) -> Result<Membership> {
    if target.chain() != fragment.chain {
        return Err(Error::DomainMismatch {
            left: fragment.chain.size(),
            right: target.chain().size(),
        });
    }
    let Some(level) = fragment.level(target.arity()) else {
        return Err(Error::ArityOverBudget {
            arity: target.arity(),
            max: fragment.budget.max_arity,
        });
    };
    Ok(level_membership(&fragment.generators, level, target))
}

fn level_membership(generators: &Registry, level: &ArityLevel, target: &OpTable) -> Membership {
    match level.position(target) {
        Some(idx) => Membership::Yes(
            Term::new(level.arity, witness_expr(generators, level, idx))
                .expect("witness built over the level's own variables"),
        ),
        None if level.exhausted => Membership::No,
        None => Membership::Unknown,
    }
}

/// Decides whether `target` lies in the clone generated by `generators`,
/// closing only the target's arity and stopping as soon as it appears.
pub fn generates(
    generators: &Registry,
    target: &OpTable,
    budget: &ClosureBudget,
) -> Result<Membership> {
    budget.validate()?;
    let chain = target.chain();
    check_generators(generators, chain)?;
    let level = close_arity(
        generators,
        chain,
        target.arity(),
        budget,
        budget.max_tables,
        Some(target.values()),
    )?;
    Ok(level_membership(generators, &level, target))
}

struct Job {
    generator: usize,
    arity: usize,
    /// fixed leading indices
    prefix: Vec<u32>,
    /// index ranges for the remaining coordinates
    ranges: Vec<(u32, u32)>,
    symmetric: bool,
}

struct Candidate {
    values: Vec<u8>,
    generator: usize,
    args: Vec<u32>,
}

fn close_arity(
    generators: &Registry,
    chain: Chain,
    arity: usize,
    budget: &ClosureBudget,
    max_tables: usize,
    stop_at: Option<&[u8]>,
) -> Result<ArityLevel> {
    let len = chain.tuple_count(arity, DEFAULT_TABLE_CAP)?;
    let gens: Vec<&OpTable> = generators.iter().map(|(_, t)| t).collect();
    let symmetric: Vec<bool> = gens.iter().map(|g| is_totally_symmetric(g)).collect();
    let mut level = ArityLevel {
        arity,
        members: Vec::new(),
        index: HashMap::new(),
        exhausted: false,
        rounds: 0,
        compositions: 0,
    };
    let insert = |level: &mut ArityLevel, table: OpTable, recipe: Recipe, round: usize| {
        if level.members.len() >= max_tables || level.index.contains_key(table.values()) {
            return false;
        }
        level
            .index
            .insert(table.values().to_vec(), level.members.len());
        level.members.push(Member {
            table,
            recipe,
            round,
        });
        true
    };
    for k in 1..=arity {
        insert(
            &mut level,
            OpTable::projection(chain, arity, k)?,
            Recipe::Projection(k),
            0,
        );
    }
    for (gi, g) in gens.iter().enumerate() {
        if g.arity() == arity {
            insert(&mut level, (*g).clone(), Recipe::Generator(gi), 0);
        }
    }
    let found = |level: &ArityLevel| stop_at.is_some_and(|t| level.index.contains_key(t));
    if found(&level) {
        return Ok(level);
    }
    if level.members.len() >= max_tables {
        return Ok(level);
    }

    let size = chain.size();
    let mut start = 0usize;
    loop {
        if budget.max_depth.is_some_and(|d| level.rounds >= d) {
            return Ok(level);
        }
        let end = level.members.len();
        let jobs = plan_round(&gens, &symmetric, start as u32, end as u32);
        let work: u64 = jobs.iter().map(job_size).sum();
        if level.compositions.saturating_add(work) > budget.max_compositions {
            return Ok(level);
        }
        level.compositions += work;
        level.rounds += 1;
        let members: Vec<&[u8]> = level.members.iter().map(|m| m.table.values()).collect();
        let index = &level.index;
        let results: Vec<Vec<Candidate>> = jobs
            .par_iter()
            .map(|job| run_job(job, &gens, &members, index, size, len))
            .collect();
        let round = level.rounds;
        let mut added = 0usize;
        for cand in results.into_iter().flatten() {
            let table = OpTable::from_raw(chain, arity, cand.values);
            let recipe = Recipe::Apply {
                generator: cand.generator,
                args: cand.args,
            };
            if insert(&mut level, table, recipe, round) {
                added += 1;
            }
            if level.members.len() >= max_tables {
                return Ok(level);
            }
        }
        if found(&level) {
            return Ok(level);
        }
        if added == 0 {
            level.exhausted = true;
            return Ok(level);
        }
        start = end;
    }
}

/// Splits the semi-naive tuple space of one round into parallel jobs.
fn plan_round(gens: &[&OpTable], symmetric: &[bool], start: u32, end: u32) -> Vec<Job> {
    let mut jobs = Vec::new();
    for (gi, g) in gens.iter().enumerate() {
        let n = g.arity();
        if symmetric[gi] {
            // non-decreasing tuples whose last (largest) index is new
            for last in start..end {
                jobs.push(Job {
                    generator: gi,
                    arity: n,
                    prefix: vec![last],
                    ranges: Vec::new(),
                    symmetric: true,
                });
            }
        } else {
            // first new coordinate at position p
            let positions = if start == 0 { 1 } else { n };
            for p in 0..positions {
                for first_new in start..end {
                    let mut ranges = Vec::with_capacity(n);
                    ranges.extend(std::iter::repeat_n((0, start), p));
                    ranges.push((first_new, first_new + 1));
                    ranges.extend(std::iter::repeat_n((0, end), n - p - 1));
                    jobs.push(Job {
                        generator: gi,
                        arity: n,
                        prefix: Vec::new(),
                        ranges,
                        symmetric: false,
                    });
                }
            }
        }
    }
    jobs
}

fn job_size(job: &Job) -> u64 {
    if job.symmetric {
        // multisets of size n-1 drawn from the first last+1 members
        let choose = (job.prefix[0] as u64 + 1) + (job.arity as u64 - 1) - 1;
        return binomial(choose, job.arity as u64 - 1);
    }
    job.ranges
        .iter()
        .map(|&(a, b)| (b - a) as u64)
        .product()
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n.saturating_sub(k));
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
        if r > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    r as u64
}

fn run_job(
    job: &Job,
    gens: &[&OpTable],
    members: &[&[u8]],
    index: &HashMap<Vec<u8>, usize>,
    size: usize,
    len: usize,
) -> Vec<Candidate> {
    let g = gens[job.generator];
    let n = g.arity();
    let mut weights = vec![1u32; n];
    for i in (0..n.saturating_sub(1)).rev() {
        weights[i] = weights[i + 1] * size as u32;
    }
    let mut out = Vec::new();
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut args = vec![0u32; n];
    let mut acc = vec![vec![0u32; len]; n + 1];
    debug_assert_eq!(job.arity, n);
    let mut emit = |args: &[u32], acc_last: &[u32], out: &mut Vec<Candidate>| {
        let values: Vec<u8> = acc_last.iter().map(|&i| g.values()[i as usize]).collect();
        if index.contains_key(&values) || seen.contains(&values) {
            return;
        }
        seen.insert(values.clone());
        out.push(Candidate {
            values,
            generator: job.generator,
            args: args.to_vec(),
        });
    };
    if job.symmetric {
        // args[n-1] fixed to the job's new index; args[0..n-1] non-decreasing, <= it
        let last = job.prefix[0];
        args[n - 1] = last;
        sym_rec(0, n, last, &weights, members, &mut args, &mut acc, &mut emit, &mut out);
    } else {
        gen_rec(0, &job.ranges, &weights, members, &mut args, &mut acc, &mut emit, &mut out);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn gen_rec(
    pos: usize,
    ranges: &[(u32, u32)],
    weights: &[u32],
    members: &[&[u8]],
    args: &mut [u32],
    acc: &mut [Vec<u32>],
    emit: &mut dyn FnMut(&[u32], &[u32], &mut Vec<Candidate>),
    out: &mut Vec<Candidate>,
) {
    let n = ranges.len();
    if pos == n {
        emit(args, &acc[n], out);
        return;
    }
    let (lo, hi) = ranges[pos];
    for i in lo..hi {
        args[pos] = i;
        let (before, after) = acc.split_at_mut(pos + 1);
        let prev = &before[pos];
        let next = &mut after[0];
        let col = members[i as usize];
        let w = weights[pos];
        for ((nx, &pv), &c) in next.iter_mut().zip(prev.iter()).zip(col) {
            *nx = pv + c as u32 * w;
        }
        gen_rec(pos + 1, ranges, weights, members, args, acc, emit, out);
    }
}

#[allow(clippy::too_many_arguments)]
fn sym_rec(
    pos: usize,
    n: usize,
    last: u32,
    weights: &[u32],
    members: &[&[u8]],
    args: &mut [u32],
    acc: &mut [Vec<u32>],
    emit: &mut dyn FnMut(&[u32], &[u32], &mut Vec<Candidate>),
    out: &mut Vec<Candidate>,
) {
    if pos == n {
        emit(args, &acc[n], out);
        return;
    }
    let (lo, hi) = if pos == n - 1 {
        (last, last + 1)
    } else {
        (if pos == 0 { 0 } else { args[pos - 1] }, last + 1)
    };
    for i in lo..hi {
        args[pos] = i;
        let (before, after) = acc.split_at_mut(pos + 1);
        let prev = &before[pos];
        let next = &mut after[0];
        let col = members[i as usize];
        let w = weights[pos];
        for ((nx, &pv), &c) in next.iter_mut().zip(prev.iter()).zip(col) {
            *nx = pv + c as u32 * w;
        }
        sym_rec(pos + 1, n, last, weights, members, args, acc, emit, out);
    }
}

/// One candidate examined by [`minimality_probe`].
#[derive(Debug, Clone)]
pub struct ProbeEntry {
    pub table: OpTable,
    pub witness: Term,
    pub verdict: Membership,
}

/// Bounded evidence about whether `f` generates a minimal clone.
///
/// Every non-projection member `g` of the computed fragment of `<f>` is asked
/// whether `f ∈ <g>`. A `No` is a genuine counterexample to minimality; the
/// report as a whole is evidence, not proof, since members above
/// `max_arity` are never examined.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub target: OpTable,
    pub budget: ClosureBudget,
    pub fragment_size: usize,
    pub fragment_exhausted: bool,
    pub checked: usize,
    pub regenerating: usize,
    pub failures: Vec<ProbeEntry>,
    pub unknown: Vec<ProbeEntry>,
}

impl ProbeReport {
    /// No checked member failed to regenerate the target.
    pub fn consistent_with_minimal(&self) -> bool {
        self.failures.is_empty()
    }
}

pub fn minimality_probe(f: &OpTable, budget: &ClosureBudget) -> Result<ProbeReport> {
    if f.is_projection() {
        return Err(Error::ProjectionGiven);
    }
    let chain = f.chain();
    let fragment = close(&Registry::new().with("f1", f.clone())?, chain, budget)?;
    let candidates: Vec<MemberView<'_>> = fragment
        .members()
        .filter(|m| !m.table.is_projection())
        .collect();
    let verdicts: Vec<Result<Membership>> = candidates
        .par_iter()
        .map(|m| {
            if m.table == f {
                return Ok(Membership::Yes(m.witness.clone()));
            }
            let reg = Registry::new().with("g", m.table.clone())?;
            // the target's own arity may exceed max_arity; only that level is closed
            generates(&reg, f, budget)
        })
        .collect();
    let mut report = ProbeReport {
        target: f.clone(),
        budget: *budget,
        fragment_size: fragment.len(),
        fragment_exhausted: fragment.fully_exhausted(),
        checked: candidates.len(),
        regenerating: 0,
        failures: Vec::new(),
        unknown: Vec::new(),
    };
    for (m, v) in candidates.into_iter().zip(verdicts) {
        let verdict = v?;
        let entry = ProbeEntry {
            table: m.table.clone(),
            witness: m.witness,
            verdict,
        };
        match entry.verdict {
            Membership::Yes(_) => report.regenerating += 1,
            Membership::No => report.failures.push(entry),
            Membership::Unknown => report.unknown.push(entry),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order_stats::{max_op, median, min_op, order_stat};

    fn ch(n: usize) -> Chain {
        Chain::new(n).unwrap()
    }

    fn keys(f: &CloneFragment) -> Vec<Vec<u8>> {
        let mut v: Vec<_> = f.member_tables().map(OpTable::canonical_key).collect();
        v.sort();
        v
    }

    #[test]
    fn empty_generators_give_projections() {
        let f = close(&Registry::new(), ch(3), &ClosureBudget::with_arity(3)).unwrap();
        assert_eq!(f.len(), 1 + 2 + 3);
        assert!(f.member_tables().all(OpTable::is_projection));
        assert!(f.fully_exhausted());
    }

    #[test]
    fn max_generates_subset_maxima() {
        let c = ch(3);
        let f = close_tables(&[max_op(2, c).unwrap()], c, &ClosureBudget::with_arity(3)).unwrap();
        // nonempty subsets of {1..m}
        assert_eq!(f.level(1).unwrap().len(), 1);
        assert_eq!(f.level(2).unwrap().len(), 3);
        assert_eq!(f.level(3).unwrap().len(), 7);
        assert!(f.fully_exhausted());
        assert!(f.contains_table(&max_op(3, c).unwrap()));
    }

    #[test]
    fn min_does_not_generate_max() {
        let c = ch(2);
        let f = close_tables(&[min_op(2, c).unwrap()], c, &ClosureBudget::with_arity(2)).unwrap();
        assert_eq!(contains(&f, &max_op(2, c).unwrap()).unwrap(), Membership::No);
    }

    #[test]
    fn median_binary_part_is_trivial() {
        let c = ch(4);
        let f = close_tables(&[median(3, c).unwrap()], c, &ClosureBudget::with_arity(2)).unwrap();
        assert_eq!(contains(&f, &min_op(2, c).unwrap()).unwrap(), Membership::No);
        assert_eq!(f.level(2).unwrap().len(), 2);
    }

    #[test]
    fn high_arity_generator_reaches_low_arity() {
        let c = ch(5);
        let reg = Registry::new().with("med5", median(5, c).unwrap()).unwrap();
        let f = close(&reg, c, &ClosureBudget::with_arity(3)).unwrap();
        match contains(&f, &median(3, c).unwrap()).unwrap() {
            Membership::Yes(w) => {
                assert_eq!(w.to_table(c, &reg).unwrap(), median(3, c).unwrap());
            }
            other => panic!("expected yes, got {other:?}"),
        }
    }

    #[test]
    fn witnesses_reproduce_members() {
        let c = ch(3);
        let f = close_tables(
            &[order_stat(4, 2, c).unwrap(), max_op(2, c).unwrap()],
            c,
            &ClosureBudget::with_arity(3),
        )
        .unwrap();
        assert_eq!(f.verify_witnesses().unwrap(), None);
        for m in f.members() {
            let back = f.get(&m.table.canonical_key()).unwrap();
            assert_eq!(back.table, m.table);
        }
    }

    #[test]
    fn closure_of_four_ary_second_order_stat() {
        let f = close_tables(&[order_stat(4, 2, ch(2)).unwrap()], ch(2), &ClosureBudget::with_arity(4))
            .unwrap();
        let sizes: Vec<usize> = f.levels().iter().map(ArityLevel::len).collect();
        assert_eq!(sizes, vec![1, 3, 10, 54]);
        assert!(f.fully_exhausted());
    }

    #[test]
    fn idempotent_and_monotone() {
        let c = ch(3);
        let b = ClosureBudget::with_arity(3);
        let small = close_tables(&[median(3, c).unwrap()], c, &b).unwrap();
        let again: Vec<OpTable> = small.member_tables().cloned().collect();
        let twice = close_tables(&again, c, &b).unwrap();
        assert_eq!(keys(&small), keys(&twice));
        let big = close_tables(&[median(3, c).unwrap(), min_op(2, c).unwrap()], c, &b).unwrap();
        for t in small.member_tables() {
            assert!(big.contains_table(t));
        }
    }

    #[test]
    fn budget_limits_report_unknown() {
        let c = ch(3);
        let b = ClosureBudget {
            max_depth: Some(1),
            ..ClosureBudget::with_arity(3)
        };
        let f = close_tables(&[max_op(2, c).unwrap()], c, &b).unwrap();
        assert!(!f.exhausted(3));
        assert_eq!(contains(&f, &max_op(3, c).unwrap()).unwrap(), Membership::Unknown);
        let f = close_tables(
            &[max_op(2, c).unwrap()],
            c,
            &ClosureBudget {
                max_tables: 4,
                ..ClosureBudget::with_arity(3)
            },
        )
        .unwrap();
        assert!(f.len() <= 4);
        assert!(!f.fully_exhausted());
    }

    #[test]
    fn contains_rejects_bad_targets() {
        let c = ch(3);
        let f = close(&Registry::new(), c, &ClosureBudget::with_arity(2)).unwrap();
        assert!(matches!(
            contains(&f, &median(3, c).unwrap()),
            Err(Error::ArityOverBudget { arity: 3, max: 2 })
        ));
        assert!(matches!(
            contains(&f, &min_op(2, ch(2)).unwrap()),
            Err(Error::DomainMismatch { .. })
        ));
        assert!(ClosureBudget::new(0, 10, None).is_err());
    }

    #[test]
    fn probe_examples() {
        let c = ch(3);
        let r = minimality_probe(&median(3, c).unwrap(), &ClosureBudget::with_arity(3)).unwrap();
        assert!(r.consistent_with_minimal());
        assert!(r.unknown.is_empty());
        let r = minimality_probe(&order_stat(4, 2, ch(2)).unwrap(), &ClosureBudget::with_arity(3))
            .unwrap();
        assert!(!r.consistent_with_minimal());
        assert!(r.failures.iter().any(|e| e.table == min_op(2, ch(2)).unwrap()));
        assert!(matches!(
            minimality_probe(&OpTable::projection(c, 2, 1).unwrap(), &ClosureBudget::default()),
            Err(Error::ProjectionGiven)
        ));
    }
}
