//! Explicit term constructions between medians, majority functions and
//! order statistics, and the exact-rational amplification schedule.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::order_stats::{is_majority, kth_smallest, median, order_stat};
use crate::table::{Chain, OpTable, VarMap};
use crate::term::{Expr, OpRef, Registry, Term};

/// `n − k·⌊n/k⌋`.
pub fn remainder(n: usize, k: usize) -> usize {
    n % k
}

/// `R(n/k) ≤ n/k` or `(k−1) − R(n/k) ≤ n/k`, compared exactly.
pub fn is_almost_divisible(n: usize, k: usize) -> bool {
    let r = remainder(n, k);
    // x ≤ n/k  ⇔  x·k ≤ n  for k > 0
    r * k <= n || (k - 1 - r) * k <= n
}

/// Block map: variable `j` occurs `⌊n/k⌋ + 1` times if `j ≤ R(n/k)`, else `⌊n/k⌋` times.
fn block_map(n: usize, k: usize) -> VarMap {
    let q = n / k;
    let r = remainder(n, k);
    let mult: Vec<usize> = (1..=k).map(|j| if j <= r { q + 1 } else { q }).collect();
    VarMap::from_multiplicities(&mult)
}

fn apply_map(op: OpRef, map: &VarMap) -> Term {
    let args = map.assignment().iter().map(|&j| Expr::Var(j)).collect();
    Term::new(map.target_arity(), Expr::apply(op, args)).expect("map targets are in range")
}

/// Identification turning `med_n` into `med_k`.
pub fn ident_med_map(n: usize, k: usize) -> Result<VarMap> {
    if n % 2 == 0 || k % 2 == 0 || k == 0 || k > n {
        return Err(Error::ParityViolation(format!(
            "need odd 1 ≤ k ≤ n, got n={n}, k={k}"
        )));
    }
    if !is_almost_divisible(n, k) {
        return Err(Error::NotAlmostDivisible { n, k });
    }
    Ok(block_map(n, k))
}

/// `med_k` as a term over `med:n`.
pub fn median_term(n: usize, k: usize) -> Result<Term> {
    let map = ident_med_map(n, k)?;
    Ok(apply_map(OpRef::median(n)?, &map))
}

/// `med_3 = med_n(x, …, x, y, …, y, z)` with `x` and `y` each doubled `(n−1)/2` times.
pub fn med3_doubling_map(n: usize) -> Result<VarMap> {
    if n % 2 == 0 || n < 3 {
        return Err(Error::ParityViolation(format!("need odd n ≥ 3, got {n}")));
    }
    let h = (n - 1) / 2;
    Ok(VarMap::from_multiplicities(&[h, h, 1]))
}

fn require_majority(source: &OpTable, arity: usize) -> Result<()> {
    if source.arity() != arity {
        return Err(Error::ArityMismatch {
            expected: arity,
            found: source.arity(),
        });
    }
    if !is_majority(source) {
        return Err(Error::NotAMajority);
    }
    Ok(())
}

fn ternary_expr(op: &OpRef, n: usize) -> Expr {
    apply_map(op.clone(), &block_map(n, 3)).into_root()
}

fn even_expr(op: &OpRef, n: usize) -> Expr {
    let mut args: Vec<Expr> = (1..=n).map(Expr::Var).collect();
    args.push(Expr::Var(n));
    Expr::apply(op.clone(), args)
}

/// Positions kept by `γ_i^j` (1-based).
fn gamma_positions(n: usize, i: usize, j: usize) -> Vec<usize> {
    let second = if j == i + 1 { i + 2 } else { i + 1 };
    (1..=n).filter(|&p| p != i && p != second).collect()
}

fn grow_expr(op: &OpRef, n: usize) -> Expr {
    let z = |j: usize| {
        let gammas = (1..n)
            .filter(|&i| i != j)
            .map(|i| {
                Expr::apply(
                    op.clone(),
                    gamma_positions(n, i, j).into_iter().map(Expr::Var).collect(),
                )
            })
            .collect();
        Expr::apply(op.clone(), gammas)
    };
    Expr::apply(op.clone(), (2..n).map(z).collect())
}

/// A ternary majority term from an `n`-ary majority `source` named `op`.
pub fn ternary_majority_term(op: &OpRef, source: &OpTable) -> Result<Term> {
    let n = source.arity();
    if n < 5 {
        return Err(Error::ArityTooSmall { min: 5, found: n });
    }
    require_majority(source, n)?;
    Term::new(3, ternary_expr(op, n))
}

/// `maj_n(x_1, …, x_n) = maj_{n+1}(x_1, …, x_n, x_n)` for even `n`.
pub fn even_majority_term(op: &OpRef, source: &OpTable, n: usize) -> Result<Term> {
    if n % 2 != 0 || n < 2 {
        return Err(Error::ParityViolation(format!("need even n ≥ 2, got {n}")));
    }
    require_majority(source, n + 1)?;
    Term::new(n, even_expr(op, n))
}

/// The depth-three `n`-ary majority term over an `(n−2)`-ary majority.
pub fn grow_majority_term(op: &OpRef, source: &OpTable, n: usize) -> Result<Term> {
    if n < 5 {
        return Err(Error::ArityTooSmall { min: 5, found: n });
    }
    require_majority(source, n - 2)?;
    Term::new(n, grow_expr(op, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LadderStep {
    /// identification down to arity 3
    Ternary,
    /// doubling the last variable: odd `n+1` to even `n`
    Even,
    /// the depth-three construction: `n−2` to `n`
    Grow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Rung {
    pub step: LadderStep,
    pub from: usize,
    pub to: usize,
}

/// A plan turning a majority of one arity into a majority of another.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MajorityLadder {
    pub source: usize,
    pub target: usize,
    pub rungs: Vec<Rung>,
}

pub fn majority_ladder(source: usize, target: usize) -> Result<MajorityLadder> {
    if source < 3 {
        return Err(Error::ArityTooSmall { min: 3, found: source });
    }
    if target < 2 {
        return Err(Error::ArityTooSmall { min: 2, found: target });
    }
    let mut rungs = Vec::new();
    let mut cur = source;
    let push = |rungs: &mut Vec<Rung>, step, from, to| rungs.push(Rung { step, from, to });
    loop {
        if cur == target {
            break;
        }
        if target >= cur && target % 2 == cur % 2 {
            while cur < target {
                push(&mut rungs, LadderStep::Grow, cur, cur + 2);
                cur += 2;
            }
        } else if target % 2 == 0 && cur % 2 == 1 && target + 1 >= cur {
            while cur < target + 1 {
                push(&mut rungs, LadderStep::Grow, cur, cur + 2);
                cur += 2;
            }
            push(&mut rungs, LadderStep::Even, cur, target);
            cur = target;
        } else if cur >= 5 {
            push(&mut rungs, LadderStep::Ternary, cur, 3);
            cur = 3;
        } else {
            // cur = 4 heading somewhere the other cases do not cover
            push(&mut rungs, LadderStep::Grow, cur, 6);
            cur = 6;
        }
    }
    Ok(MajorityLadder {
        source,
        target,
        rungs,
    })
}

impl MajorityLadder {
    fn rung_expr(rung: &Rung, op: &OpRef) -> Expr {
        match rung.step {
            LadderStep::Ternary => ternary_expr(op, rung.from),
            LadderStep::Even => even_expr(op, rung.to),
            LadderStep::Grow => grow_expr(op, rung.to),
        }
    }

    /// The fully inlined term over `op`. Its size grows quickly with the
    /// number of grow rungs.
    pub fn term(&self, op: &OpRef) -> Term {
        let placeholder = OpRef::named("maj");
        let mut def = Expr::apply_vars(op.clone(), self.source);
        for rung in &self.rungs {
            def = Self::rung_expr(rung, &placeholder).inline(&placeholder, &def);
        }
        Term::new(self.target, def).expect("ladder terms use the target's variables")
    }

    /// Tabulates rung by rung starting from `source`, checking that every
    /// intermediate table is a majority function.
    pub fn tabulate(&self, source: &OpTable) -> Result<Vec<OpTable>> {
        require_majority(source, self.source)?;
        let op = OpRef::named("maj");
        let mut cur = source.clone();
        let mut out = Vec::with_capacity(self.rungs.len());
        for rung in &self.rungs {
            let reg = Registry::new().with("maj", cur)?;
            let term = Term::new(rung.to, Self::rung_expr(rung, &op))?;
            cur = term.to_table(source.chain(), &reg)?;
            if !is_majority(&cur) {
                return Err(Error::NotAMajority);
            }
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Final majority table (the source itself for an empty ladder).
    pub fn result(&self, source: &OpTable) -> Result<OpTable> {
        Ok(self
            .tabulate(source)?
            .pop()
            .unwrap_or_else(|| source.clone()))
    }
}

pub const SCHEDULE_STEP_CAP: usize = 64;
/// Expansion stops once `n_j` exceeds this many bits (sizes cube each step).
pub const SCHEDULE_BITS_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleStep {
    pub j: usize,
    pub n_j: BigInt,
    pub k_j: BigRational,
    pub r_j: BigRational,
}

/// Sizes and median counts of the repeated `med_3` expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmplificationSchedule {
    pub n: usize,
    pub threshold: BigRational,
    /// Starts with `j = 0`; the expansion count is `steps.len() − 1`.
    pub steps: Vec<ScheduleStep>,
    /// `n_j` at the first `j` with `r_j > threshold`; `None` if a step or size cap was hit.
    pub b: Option<BigInt>,
    /// Set when an expansion shrinks the tuple (only `n = 3`).
    pub degenerate: bool,
}

/// `a < b` by cross-multiplication. `Ratio`'s own ordering walks the
/// continued fraction recursively and overflows the stack on the huge,
/// nearly equal values the schedule produces.
fn ratio_lt(a: &BigRational, b: &BigRational) -> bool {
    a.numer() * b.denom() < b.numer() * a.denom()
}

fn choose_rational(k: &BigRational, m: u32) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..m {
        acc *= k - BigRational::from_integer(BigInt::from(i));
    }
    let fact: u32 = (1..=m).product();
    acc / BigRational::from_integer(BigInt::from(fact))
}

fn choose3(n: &BigInt) -> BigInt {
    if n < &BigInt::from(3) {
        return BigInt::zero();
    }
    n * (n - 1) * (n - 2) / 6
}

/// Next median count: `C(k,3) + C(k,2)(n−k) + k((n−k)/2)²`.
pub fn next_k(n: &BigInt, k: &BigRational) -> BigRational {
    let n = BigRational::from_integer(n.clone());
    let rest = &n - k;
    let half = &rest / BigRational::from_integer(BigInt::from(2));
    choose_rational(k, 3) + choose_rational(k, 2) * &rest + k * &half * &half
}

pub fn amplification_schedule(n: usize, threshold: &BigRational) -> Result<AmplificationSchedule> {
    if n % 2 == 0 || n < 3 {
        return Err(Error::ParityViolation(format!("need odd n ≥ 3, got {n}")));
    }
    // r_j ≤ 1 always, so a threshold of 1 or more is never exceeded
    if !ratio_lt(threshold, &BigRational::one()) {
        return Err(Error::OutOfStatedRange(format!("threshold {threshold} must be below 1")));
    }
    let mut n_j = BigInt::from(n);
    let mut k_j = BigRational::one();
    let mut steps = Vec::new();
    let mut degenerate = false;
    for j in 0..=SCHEDULE_STEP_CAP {
        let r_j = &k_j / BigRational::from_integer(n_j.clone());
        let done = ratio_lt(threshold, &r_j);
        steps.push(ScheduleStep {
            j,
            n_j: n_j.clone(),
            k_j: k_j.clone(),
            r_j,
        });
        if done {
            return Ok(AmplificationSchedule {
                n,
                threshold: threshold.clone(),
                steps,
                b: Some(n_j),
                degenerate,
            });
        }
        if n_j.bits() > SCHEDULE_BITS_CAP {
            break;
        }
        let next_n = choose3(&n_j);
        k_j = next_k(&n_j, &k_j);
        if next_n < n_j {
            degenerate = true;
        }
        n_j = next_n;
    }
    Ok(AmplificationSchedule {
        n,
        threshold: threshold.clone(),
        steps,
        b: None,
        degenerate,
    })
}

/// First recorded step violating
/// `r_{j+1} ≥ r_j (3/2 − r_j²/2 − 1/(n_j − 1))` among steps with `n_j ≥ 4`.
pub fn lower_bound_violation(schedule: &AmplificationSchedule) -> Option<usize> {
    let one = BigRational::one();
    let two = BigRational::from_integer(BigInt::from(2));
    let three_halves = BigRational::new(BigInt::from(3), BigInt::from(2));
    schedule.steps.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if a.n_j < BigInt::from(4) {
            return None;
        }
        let nm1 = BigRational::from_integer(&a.n_j - 1);
        let bound = &a.r_j * (&three_halves - &a.r_j * &a.r_j / &two - &one / nm1);
        ratio_lt(&b.r_j, &bound).then_some(a.j)
    })
}

fn rational_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `p/q` or an integer.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidBudget(format!("not a rational: {s}"));
    let r = match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            BigRational::new(p, q)
        }
        None => BigRational::from_integer(s.trim().parse().map_err(|_| bad())?),
    };
    if r.is_negative() {
        return Err(bad());
    }
    Ok(r)
}

/// `k_j/n_j` unreduced when `k_j` is integral, the reduced `r_j` otherwise.
fn ratio_string(s: &ScheduleStep) -> String {
    if s.k_j.is_integer() {
        format!("{}/{}", s.k_j.numer(), s.n_j)
    } else {
        format!("{}/{}", s.r_j.numer(), s.r_j.denom())
    }
}

impl AmplificationSchedule {
    pub fn to_json(&self) -> serde_json::Value {
        let steps: Vec<serde_json::Value> = self
            .steps
            .iter()
            .map(|s| {
                serde_json::json!({
                    "j": s.j,
                    "n_j": s.n_j.to_string(),
                    "k_j": rational_string(&s.k_j),
                    "r_j": ratio_string(s),
                })
            })
            .collect();
        serde_json::json!({
            "n": self.n,
            "threshold": rational_string(&self.threshold),
            "steps": steps,
            "b": self.b.as_ref().map(|b| b.to_string()),
            "degenerate": self.degenerate,
        })
    }
}

/// Applies `med_3` to every 3-subset (in lexicographic order) and counts values.
pub fn simulate_expansion<T: Ord + Copy>(tuple: &[T]) -> Result<(Vec<T>, BTreeMap<T, usize>)> {
    let n = tuple.len();
    if n < 3 {
        return Err(Error::TupleTooShort(n));
    }
    let mut out = Vec::with_capacity(n * (n - 1) * (n - 2) / 6);
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                out.push(kth_smallest(&[tuple[a], tuple[b], tuple[c]], 2));
            }
        }
    }
    let mut freq = BTreeMap::new();
    for &v in &out {
        *freq.entry(v).or_insert(0) += 1;
    }
    Ok((out, freq))
}

/// Identification turning the lower median `m^n_{n/2}` into `med_3`.
pub fn lower_median_to_med3(n: usize) -> Result<VarMap> {
    if n % 2 != 0 {
        return Err(Error::OddArity(n));
    }
    if n < 6 {
        return Err(Error::ArityTooSmall { min: 6, found: n });
    }
    Ok(block_map(n, 3))
}

/// Every map `{1..n} → {1..3}` under which `table` identifies to `med_3`.
pub fn ternary_identifications_to_med3(table: &OpTable) -> Result<Vec<VarMap>> {
    let chain = table.chain();
    let med3 = median(3, chain)?;
    let n = table.arity();
    let mut hits = Vec::new();
    for rank in 0..3usize.pow(n as u32) {
        let assignment: Vec<usize> = Chain::new(3)?
            .unrank(rank, n)
            .into_iter()
            .map(|v| v + 1)
            .collect();
        let map = VarMap::new(3, assignment)?;
        if table.identify_vars(&map)? == med3 {
            hits.push(map);
        }
    }
    Ok(hits)
}

fn two_block(n: usize) -> VarMap {
    VarMap::from_multiplicities(&[n / 2, n - n / 2])
}

/// `min_2(x, y) = m^n_k(x, …, x, y, …, y)` with `x` repeated `⌊n/2⌋` times.
pub fn min_from_mnk(n: usize, k: usize) -> Result<VarMap> {
    if n < 4 || k < 2 || k > n / 2 {
        return Err(Error::OutOfStatedRange(format!(
            "min needs n ≥ 4 and 2 ≤ k ≤ ⌊n/2⌋, got n={n}, k={k}"
        )));
    }
    Ok(two_block(n))
}

/// `max_2(x, y) = m^n_k(x, …, x, y, …, y)` with `x` repeated `⌊n/2⌋` times.
pub fn max_from_mnk(n: usize, k: usize) -> Result<VarMap> {
    if k <= n.div_ceil(2) || k >= n {
        return Err(Error::OutOfStatedRange(format!(
            "max needs ⌈n/2⌉ < k < n, got n={n}, k={k}"
        )));
    }
    Ok(two_block(n))
}

/// Tabulates `m^n_k` under `map`.
pub fn identify_order_stat(n: usize, k: usize, map: &VarMap, chain: Chain) -> Result<OpTable> {
    order_stat(n, k, chain)?.identify_vars(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order_stats::{lower_median, max_op, min_op};

    fn ch(n: usize) -> Chain {
        Chain::new(n).unwrap()
    }

    fn ratio(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn remainders_and_divisibility() {
        assert_eq!(remainder(9, 3), 0);
        assert_eq!(remainder(7, 3), 1);
        assert_eq!(remainder(5, 3), 2);
        for n in 1..60 {
            for k in 1..=n {
                if n % k == 0 {
                    assert!(is_almost_divisible(n, k));
                }
                if k * k <= n {
                    assert!(is_almost_divisible(n, k), "{n} {k}");
                }
            }
            if n >= 4 {
                assert!(is_almost_divisible(n, 3));
            }
        }
        // 11 = 3·5 − 4: R = 1 ≤ 11/5 holds
        assert!(is_almost_divisible(11, 5));
        // 13/7: R = 6 > 13/7 and 0 ≤ 13/7
        assert!(is_almost_divisible(13, 7));
        // 7/5: R = 2 > 7/5 and 4 − 2 = 2 > 7/5
        assert!(!is_almost_divisible(7, 5));
    }

    #[test]
    fn median_identification() {
        assert_eq!(ident_med_map(7, 3).unwrap().multiplicities(), vec![3, 2, 2]);
        assert_eq!(ident_med_map(9, 3).unwrap().multiplicities(), vec![3, 3, 3]);
        assert_eq!(ident_med_map(5, 5).unwrap(), VarMap::identity(5));
        assert!(matches!(ident_med_map(7, 5), Err(Error::NotAlmostDivisible { .. })));
        assert!(matches!(ident_med_map(6, 3), Err(Error::ParityViolation(_))));
        let c = ch(4);
        let t = median(7, c).unwrap().identify_vars(&ident_med_map(7, 3).unwrap()).unwrap();
        assert_eq!(t, median(3, c).unwrap());
        let term = median_term(9, 3).unwrap();
        assert_eq!(term.to_table(ch(3), &Registry::new()).unwrap(), median(3, ch(3)).unwrap());
    }

    #[test]
    fn ternary_and_even() {
        let c = ch(3);
        let op = OpRef::median(5).unwrap();
        let src = median(5, c).unwrap();
        let t = ternary_majority_term(&op, &src).unwrap();
        assert!(is_majority(&t.to_table(c, &Registry::new()).unwrap()));
        let t = even_majority_term(&op, &src, 4).unwrap();
        let tab = t.to_table(c, &Registry::new()).unwrap();
        assert_eq!(tab.values().len(), 81);
        assert!(is_majority(&tab));
        assert!(matches!(
            ternary_majority_term(&OpRef::median(3).unwrap(), &median(3, c).unwrap()),
            Err(Error::ArityTooSmall { .. })
        ));
        assert!(matches!(
            ternary_majority_term(&OpRef::named("m"), &order_stat(5, 2, c).unwrap()),
            Err(Error::NotAMajority)
        ));
        assert!(matches!(
            even_majority_term(&op, &src, 5),
            Err(Error::ParityViolation(_))
        ));
        // maj_2(x, y) = med_3(x, y, y) = y
        let t = even_majority_term(&OpRef::median(3).unwrap(), &median(3, c).unwrap(), 2).unwrap();
        assert_eq!(
            t.to_table(c, &Registry::new()).unwrap(),
            OpTable::projection(c, 2, 2).unwrap()
        );
    }

    #[test]
    fn gamma_semantics() {
        assert_eq!(gamma_positions(5, 1, 3), vec![3, 4, 5]);
        assert_eq!(gamma_positions(5, 1, 2), vec![2, 4, 5]);
        assert_eq!(gamma_positions(5, 3, 4), vec![1, 2, 4]);
    }

    #[test]
    fn grow_from_median() {
        let c = ch(3);
        let op = OpRef::median(3).unwrap();
        let t = grow_majority_term(&op, &median(3, c).unwrap(), 5).unwrap();
        assert_eq!(t.depth(), 3);
        let tab = t.to_table(c, &Registry::new()).unwrap();
        assert_eq!(tab.values().len(), 243);
        assert!(is_majority(&tab));
        // iterate on chain 2
        let c2 = ch(2);
        let five = t.to_table(c2, &Registry::new()).unwrap();
        let reg = Registry::new().with("maj5", five.clone()).unwrap();
        let seven = grow_majority_term(&OpRef::named("maj5"), &five, 7).unwrap();
        assert!(is_majority(&seven.to_table(c2, &reg).unwrap()));
        // even case from maj_4
        let op5 = OpRef::median(5).unwrap();
        let four = even_majority_term(&op5, &median(5, c2).unwrap(), 4)
            .unwrap()
            .to_table(c2, &Registry::new())
            .unwrap();
        let reg = Registry::new().with("maj4", four.clone()).unwrap();
        let six = grow_majority_term(&OpRef::named("maj4"), &four, 6).unwrap();
        assert!(is_majority(&six.to_table(c2, &reg).unwrap()));
    }

    #[test]
    fn ladders() {
        let l = majority_ladder(3, 9).unwrap();
        assert_eq!(l.rungs.iter().filter(|r| r.step == LadderStep::Grow).count(), 3);
        assert_eq!(l.rungs.len(), 3);
        let l = majority_ladder(5, 4).unwrap();
        assert_eq!(l.rungs, vec![Rung { step: LadderStep::Even, from: 5, to: 4 }]);
        let l = majority_ladder(4, 3).unwrap();
        assert_eq!(
            l.rungs,
            vec![
                Rung { step: LadderStep::Grow, from: 4, to: 6 },
                Rung { step: LadderStep::Ternary, from: 6, to: 3 },
            ]
        );
        let c = ch(2);
        let src = even_majority_term(&OpRef::median(5).unwrap(), &median(5, c).unwrap(), 4)
            .unwrap()
            .to_table(c, &Registry::new())
            .unwrap();
        assert!(is_majority(&l.result(&src).unwrap()));
        // inlined and stepwise tabulations agree
        let l = majority_ladder(3, 6).unwrap();
        let reg = Registry::new();
        let inlined = l.term(&OpRef::median(3).unwrap()).to_table(c, &reg).unwrap();
        assert_eq!(inlined, l.result(&median(3, c).unwrap()).unwrap());
    }

    #[test]
    fn schedule_for_five() {
        let s = amplification_schedule(5, &ratio(1, 2)).unwrap();
        let r: Vec<BigRational> = s.steps.iter().map(|s| s.r_j.clone()).collect();
        assert_eq!(r, vec![ratio(1, 5), ratio(4, 10), ratio(76, 120)]);
        assert_eq!(s.b, Some(BigInt::from(120)));
        assert!(!s.degenerate);
        assert_eq!(lower_bound_violation(&s), None);
        let j = s.to_json();
        assert_eq!(j["b"], "120");
        assert_eq!(j["steps"][2]["r_j"], "76/120");
    }

    #[test]
    fn schedule_edge_cases() {
        let s = amplification_schedule(3, &ratio(1, 2)).unwrap();
        assert!(s.degenerate);
        assert_eq!(s.b, Some(BigInt::from(1)));
        assert_eq!(s.steps[1].r_j, ratio(1, 1));
        let s = amplification_schedule(7, &BigRational::zero()).unwrap();
        assert_eq!(s.steps.len(), 1);
        assert_eq!(s.b, Some(BigInt::from(7)));
        assert!(amplification_schedule(4, &ratio(1, 2)).is_err());
        assert!(amplification_schedule(5, &BigRational::one()).is_err());
        assert!(amplification_schedule(5, &ratio(3, 2)).is_err());
        assert_eq!(parse_rational("3/6").unwrap(), ratio(1, 2));
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn expansion_simulation() {
        let (out, freq) = simulate_expansion(&[0, 1, 2]).unwrap();
        assert_eq!(out, vec![1]);
        assert_eq!(freq[&1], 1);
        let (out, freq) = simulate_expansion(&[0u32, 1, 2, 3, 4]).unwrap();
        assert_eq!(freq[&2], 4);
        let (_, freq) = simulate_expansion(&out).unwrap();
        assert!(freq[&2] >= 76);
        assert!(simulate_expansion(&[1, 2]).is_err());
    }

    #[test]
    fn lower_median_identities() {
        let c = ch(4);
        for (n, mult) in [(6, vec![2, 2, 2]), (8, vec![3, 3, 2])] {
            let map = lower_median_to_med3(n).unwrap();
            assert_eq!(map.multiplicities(), mult);
            let t = lower_median(n, c).unwrap().identify_vars(&map).unwrap();
            assert_eq!(t, median(3, c).unwrap());
        }
        assert!(matches!(lower_median_to_med3(4), Err(Error::ArityTooSmall { .. })));
        assert!(matches!(lower_median_to_med3(7), Err(Error::OddArity(7))));
        let hits = ternary_identifications_to_med3(&lower_median(4, ch(3)).unwrap()).unwrap();
        assert!(hits.is_empty());
        let hits = ternary_identifications_to_med3(&median(5, ch(3)).unwrap()).unwrap();
        assert!(!hits.is_empty());
    }

    #[test]
    fn min_and_max_from_order_stats() {
        let c = ch(4);
        let t = identify_order_stat(4, 2, &min_from_mnk(4, 2).unwrap(), c).unwrap();
        assert_eq!(t, min_op(2, c).unwrap());
        let map = max_from_mnk(5, 4).unwrap();
        assert_eq!(map.multiplicities(), vec![2, 3]);
        assert_eq!(identify_order_stat(5, 4, &map, c).unwrap(), max_op(2, c).unwrap());
        assert!(matches!(min_from_mnk(5, 3), Err(Error::OutOfStatedRange(_))));
        assert!(max_from_mnk(5, 3).is_err());
    }
}
