//! Wild sets of monotone order-statistic terms.
//!
//! A term over order statistics and projections is read on the two-point
//! chain `{0, ∞}`: a coordinate set `A` is wild iff setting the coordinates
//! in `A` to `∞` and the rest to `0` yields `∞`. Under this reading `m^n_k`
//! yields `∞` iff at least `n − k + 1` of its arguments do. A growth oracle
//! on prefixes of ℕ cross-checks the reading.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::table::VarMap;
use crate::term::{Expr, OpRef, Term};

/// Largest ambient arity a family may have (2^20 subsets).
pub const MAX_FAMILY_ARITY: usize = 20;
/// Largest arity for permutation searches.
pub const MAX_SEARCH_ARITY: usize = 8;

/// An upward-closed family of subsets of `{1, …, n}`, stored as bitmasks
/// (bit `i − 1` for coordinate `i`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WildFamily {
    n: usize,
    member: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
struct FamilyJson {
    n: usize,
    minimal_sets: Vec<Vec<usize>>,
}

pub fn mask_of(set: &[usize]) -> u32 {
    set.iter().fold(0, |m, &i| m | 1 << (i - 1))
}

pub fn set_of(mask: u32) -> Vec<usize> {
    (0..32).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()
}

fn check_arity(n: usize) -> Result<()> {
    if n > MAX_FAMILY_ARITY {
        return Err(Error::BudgetExceeded {
            requested: 1u128 << n,
            cap: 1u128 << MAX_FAMILY_ARITY,
        });
    }
    Ok(())
}

impl WildFamily {
    /// Builds a family from a membership predicate on masks and checks upward closure.
    pub fn from_predicate(n: usize, mut wild: impl FnMut(u32) -> bool) -> Result<Self> {
        check_arity(n)?;
        let member: Vec<bool> = (0..1u32 << n).map(&mut wild).collect();
        let f = WildFamily { n, member };
        if !f.is_upward_closed() {
            return Err(Error::NotUpwardClosed);
        }
        Ok(f)
    }

    /// The upward closure of `sets`.
    pub fn from_minimal_sets(n: usize, sets: &[Vec<usize>]) -> Result<Self> {
        check_arity(n)?;
        for s in sets {
            if let Some(&i) = s.iter().find(|&&i| i == 0 || i > n) {
                return Err(Error::IndexOutOfRange { n, k: i });
            }
        }
        let masks: Vec<u32> = sets.iter().map(|s| mask_of(s)).collect();
        Self::from_predicate(n, |m| masks.iter().any(|&a| a & m == a))
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn contains_mask(&self, mask: u32) -> bool {
        self.member.get(mask as usize).copied().unwrap_or(false)
    }

    pub fn contains(&self, set: &[usize]) -> bool {
        set.iter().all(|&i| i >= 1 && i <= self.n) && self.contains_mask(mask_of(set))
    }

    pub fn len(&self) -> usize {
        self.member.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn masks(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.member.len() as u32).filter(|&m| self.member[m as usize])
    }

    pub fn is_upward_closed(&self) -> bool {
        self.masks()
            .all(|m| (0..self.n).all(|i| self.contains_mask(m | 1 << i)))
    }

    pub fn minimal_masks(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self
            .masks()
            .filter(|&m| (0..self.n).all(|i| m >> i & 1 == 0 || !self.contains_mask(m & !(1 << i))))
            .collect();
        out.sort_by_key(|&m| (m.count_ones(), set_of(m)));
        out
    }

    /// Minimal members, sorted by size and then lexicographically.
    pub fn minimal_sets(&self) -> Vec<Vec<usize>> {
        self.minimal_masks().into_iter().map(set_of).collect()
    }

    /// Image under the permutation `perm` (`perm[i − 1] = π(i)`).
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.n)?;
        let mut member = vec![false; self.member.len()];
        for m in self.masks() {
            member[image(m, perm) as usize] = true;
        }
        Ok(WildFamily { n: self.n, member })
    }

    /// The same sets seen in arity `n` with dummy coordinates appended.
    pub fn pad(&self, n: usize) -> Result<Self> {
        if n < self.n {
            return Err(Error::ArityMismatch {
                expected: self.n,
                found: n,
            });
        }
        let low = (1u32 << self.n) - 1;
        Self::from_predicate(n, |m| self.contains_mask(m & low))
    }

    /// Family of `g(y) = f(y_{map(1)}, …, y_{map(n)})`: `B` is wild iff
    /// `map⁻¹[B]` is.
    pub fn pullback(&self, map: &VarMap) -> Result<Self> {
        if map.source_arity() != self.n {
            return Err(Error::ArityMismatch {
                expected: self.n,
                found: map.source_arity(),
            });
        }
        let assign = map.assignment().to_vec();
        Self::from_predicate(map.target_arity(), |b| {
            let pre = assign
                .iter()
                .enumerate()
                .filter(|(_, &t)| b >> (t - 1) & 1 == 1)
                .fold(0u32, |acc, (i, _)| acc | 1 << i);
            self.contains_mask(pre)
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(FamilyJson {
            n: self.n,
            minimal_sets: self.minimal_sets(),
        })
        .expect("plain data serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse {
            line: 0,
            msg: m.to_string(),
        };
        let n = value["n"].as_u64().ok_or_else(|| bad("missing n"))? as usize;
        let sets = value["minimal_sets"]
            .as_array()
            .ok_or_else(|| bad("missing minimal_sets"))?
            .iter()
            .map(|s| {
                s.as_array()
                    .ok_or_else(|| bad("set must be an array"))?
                    .iter()
                    .map(|i| i.as_u64().map(|i| i as usize).ok_or_else(|| bad("bad index")))
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_minimal_sets(n, &sets)
    }
}

fn image(mask: u32, perm: &[usize]) -> u32 {
    (0..perm.len())
        .filter(|&i| mask >> i & 1 == 1)
        .fold(0, |acc, i| acc | 1 << (perm[i] - 1))
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n + 1];
    if perm.len() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            found: perm.len(),
        });
    }
    for &p in perm {
        if p == 0 || p > n || seen[p] {
            return Err(Error::InvalidVarMap(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// `m^n_k`'s family: all sets with at least `n − k + 1` elements.
pub fn wild_family_of_order_stat(n: usize, k: usize) -> Result<WildFamily> {
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { n, k });
    }
    WildFamily::from_predicate(n, |m| m.count_ones() as usize > n - k)
}

fn two_point(expr: &Expr, mask: u32) -> Result<bool> {
    match expr {
        Expr::Var(i) | Expr::Proj { k: i, .. } => Ok(mask >> (i - 1) & 1 == 1),
        Expr::Apply { op, args } => {
            let OpRef::OrderStat { n, k } = op else {
                return Err(Error::NonMonotoneSymbol(op.to_string()));
            };
            let mut inf = 0;
            for a in args {
                inf += two_point(a, mask)? as usize;
            }
            Ok(inf > n - k)
        }
    }
}

/// The family of a monotone term under the `{0, ∞}` reading.
pub fn wild_family_of_term(term: &Term) -> Result<WildFamily> {
    let n = term.arity();
    check_arity(n)?;
    let mut member = Vec::with_capacity(1 << n);
    for m in 0..1u32 << n {
        member.push(two_point(term.root(), m)?);
    }
    let f = WildFamily { n, member };
    if !f.is_upward_closed() {
        return Err(Error::NotUpwardClosed);
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthProbe<'a> {
    pub term: &'a Term,
    pub set: Vec<usize>,
    pub bound: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Growth {
    Unbounded,
    BoundedUpTo(u64),
}

/// Evaluates the term on ℕ with the probe's coordinates set to `m` and the
/// rest to `0`, for `m = 0..=M`. Reports unbounded iff the value equals `m`
/// throughout the upper half `⌈M/2⌉..=M`.
pub fn oracle_wild_check(probe: &GrowthProbe<'_>) -> Result<Growth> {
    let n = probe.term.arity();
    let mut input = vec![0u64; n];
    let mut values = Vec::with_capacity(probe.bound as usize + 1);
    for m in 0..=probe.bound {
        for &i in &probe.set {
            input[i - 1] = m;
        }
        values.push(probe.term.eval_unbounded(&input)?);
    }
    let start = probe.bound.div_ceil(2);
    let tail_linear = (start..=probe.bound).all(|m| values[m as usize] == m);
    Ok(if tail_linear && probe.bound > 0 {
        Growth::Unbounded
    } else {
        Growth::BoundedUpTo(probe.bound)
    })
}

/// Compares `wild_family_of_term` with the oracle on every subset; returns
/// the first disagreeing set.
pub fn oracle_disagreement(term: &Term, bound: u64) -> Result<Option<Vec<usize>>> {
    let fam = wild_family_of_term(term)?;
    for m in 0..1u32 << term.arity() {
        let set = set_of(m);
        let probe = GrowthProbe {
            term,
            set: set.clone(),
            bound,
        };
        let unbounded = oracle_wild_check(&probe)? == Growth::Unbounded;
        if unbounded != fam.contains_mask(m) {
            return Ok(Some(set));
        }
    }
    Ok(None)
}

/// Every two wild sets meet.
pub fn in_pol_t1(family: &WildFamily) -> bool {
    let mins = family.minimal_masks();
    mins.iter()
        .enumerate()
        .all(|(i, a)| mins[i..].iter().all(|b| a & b != 0))
}

/// First pair of disjoint minimal sets, if any.
pub fn disjoint_pair(family: &WildFamily) -> Option<(Vec<usize>, Vec<usize>)> {
    let mins = family.minimal_masks();
    for (i, a) in mins.iter().enumerate() {
        for b in &mins[i..] {
            if a & b == 0 {
                return Some((set_of(*a), set_of(*b)));
            }
        }
    }
    None
}

/// Some `(n−1)`-element set is not wild.
pub fn is_almost_unary_family(family: &WildFamily) -> Result<bool> {
    let n = family.arity();
    if n < 2 {
        return Err(Error::ArityTooSmall { min: 2, found: n });
    }
    let full = (1u32 << n) - 1;
    Ok((0..n).any(|i| !family.contains_mask(full & !(1 << i))))
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot has a successor");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// A permutation `π` with `π[A]` `g`-wild for every `f`-wild `A`, searched
/// in lexicographic order (so the identity is found first when it works).
pub fn wild_leq(f: &WildFamily, g: &WildFamily) -> Result<Option<Vec<usize>>> {
    if f.arity() != g.arity() {
        return Err(Error::ArityMismatch {
            expected: f.arity(),
            found: g.arity(),
        });
    }
    let n = f.arity();
    if n > MAX_SEARCH_ARITY {
        return Err(Error::ArityTooLargeForSearch(n));
    }
    let mins = f.minimal_masks();
    let mut perm: Vec<usize> = (1..=n).collect();
    loop {
        if mins.iter().all(|&a| g.contains_mask(image(a, &perm))) {
            return Ok(Some(perm));
        }
        if !next_permutation(&mut perm) {
            return Ok(None);
        }
    }
}

pub fn wild_equiv(f: &WildFamily, g: &WildFamily) -> Result<bool> {
    Ok(wild_leq(f, g)?.is_some() && wild_leq(g, f)?.is_some())
}

/// A term over `med_3` and projections in which every given set is wild.
///
/// `t = med_3(t_B, t_C, t_D)` with `B = A_1..A_{k−1}`, `C = A_1..A_{k−2}, A_k`
/// and `D = A_{k−1}, A_k`; one or two sets give the projection onto the
/// smallest common coordinate.
pub fn build_intersecting_term(sets: &[Vec<usize>], n: usize) -> Result<Term> {
    if n == 0 {
        return Err(Error::ArityTooSmall { min: 1, found: 0 });
    }
    let masks: Vec<u32> = sets
        .iter()
        .map(|s| {
            if let Some(&i) = s.iter().find(|&&i| i == 0 || i > n) {
                return Err(Error::IndexOutOfRange { n, k: i });
            }
            Ok(mask_of(s))
        })
        .collect::<Result<_>>()?;
    for (i, &a) in masks.iter().enumerate() {
        for (j, &b) in masks.iter().enumerate().skip(i) {
            if a & b == 0 {
                return Err(Error::NotPairwiseIntersecting(
                    sets[i].clone(),
                    sets[j].clone(),
                ));
            }
        }
    }
    Term::new(n, intersecting_expr(&masks))
}

fn intersecting_expr(masks: &[u32]) -> Expr {
    let smallest = |m: u32| Expr::Var(m.trailing_zeros() as usize + 1);
    match masks {
        [] => Expr::Var(1),
        [a] => smallest(*a),
        [a, b] => smallest(a & b),
        _ => {
            let k = masks.len();
            let b = &masks[..k - 1];
            let c: Vec<u32> = masks[..k - 2].iter().chain([&masks[k - 1]]).copied().collect();
            let d = &masks[k - 2..];
            Expr::apply(
                OpRef::OrderStat { n: 3, k: 2 },
                vec![intersecting_expr(b), intersecting_expr(&c), intersecting_expr(d)],
            )
        }
    }
}

/// `⌈n/(k−1)⌉`.
pub fn chain_level(n: usize, k: usize) -> Result<usize> {
    if k < 2 || k > n {
        return Err(Error::OutOfStatedRange(format!("need 2 ≤ k ≤ n, got n={n}, k={k}")));
    }
    Ok(n.div_ceil(k - 1))
}

/// Blocks of `k−1` copies, then one block of `R(n/(k−1))` if nonzero;
/// identifies `m^n_k` to `m^{⌈n/(k−1)⌉}_2`.
pub fn classification_identity_map(n: usize, k: usize) -> Result<VarMap> {
    chain_level(n, k)?;
    let q = n / (k - 1);
    let r = n % (k - 1);
    let mut mult = vec![k - 1; q];
    if r > 0 {
        mult.push(r);
    }
    Ok(VarMap::from_multiplicities(&mult))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainBound {
    /// `M_level` lies in the clone generated by the function and the almost unary ones.
    pub level: usize,
    /// The wild set used.
    pub set: Vec<usize>,
    /// Sends the set onto `1..=k` (in order) and every other coordinate to `k+1`.
    pub map: VarMap,
    /// `m^{k+1}_2 ≤_W` the family of the identified function.
    pub verified: bool,
}

/// The bound `k + 1` from a `k`-element wild set of a non-almost-unary family.
/// With `k = None` the smallest wild set size is used.
pub fn chain_lower_bound_from_wild_set(family: &WildFamily, k: Option<usize>) -> Result<ChainBound> {
    if is_almost_unary_family(family)? {
        return Err(Error::AlmostUnary);
    }
    let mins = family.minimal_masks();
    let k = k.unwrap_or_else(|| mins.first().map_or(0, |m| m.count_ones() as usize));
    let n = family.arity();
    let mask = family
        .masks()
        .filter(|m| m.count_ones() as usize == k)
        .min_by_key(|&m| set_of(m))
        .ok_or(Error::NoWildSetOfSize(k))?;
    let set = set_of(mask);
    let assignment: Vec<usize> = (1..=n)
        .map(|i| set.iter().position(|&a| a == i).map_or(k + 1, |p| p + 1))
        .collect();
    let map = VarMap::new(k + 1, assignment)?;
    let pulled = family.pullback(&map)?;
    let verified = if k < MAX_SEARCH_ARITY {
        wild_leq(&wild_family_of_order_stat(k + 1, 2)?, &pulled)?.is_some()
    } else {
        false
    };
    Ok(ChainBound {
        level: k + 1,
        set,
        map,
        verified,
    })
}

/// All nonempty antichains of nonempty subsets of `{1..n}` whose members
/// pairwise intersect, as lists of masks in increasing order.
pub fn intersecting_antichains(n: usize) -> Vec<Vec<u32>> {
    let subsets: Vec<u32> = (1..1u32 << n).collect();
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(subsets: &[u32], from: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        for i in from..subsets.len() {
            let s = subsets[i];
            let ok = cur
                .iter()
                .all(|&c| c & s != 0 && c & s != c && c & s != s);
            if ok {
                cur.push(s);
                out.push(cur.clone());
                rec(subsets, i + 1, cur, out);
                cur.pop();
            }
        }
    }
    rec(&subsets, 0, &mut cur, &mut out);
    out
}

fn random_order_stat(rng: &mut dyn rand::RngCore, max_n: usize) -> OpRef {
    let n = rng.gen_range(1..=max_n);
    let k = rng.gen_range(1..=n);
    OpRef::OrderStat { n, k }
}

fn random_expr(
    rng: &mut impl Rng,
    arity: usize,
    depth: usize,
    pick: &mut impl FnMut(&mut dyn rand::RngCore) -> OpRef,
) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return Expr::Var(rng.gen_range(1..=arity));
    }
    let op = pick(rng);
    let n = op.symbolic_arity().expect("symbolic");
    let args = (0..n).map(|_| random_expr(rng, arity, depth - 1, pick)).collect();
    Expr::apply(op, args)
}

/// Random terms over `m:n:k` (`n ≤ 5`) and projections, arity `1..=max_arity`,
/// depth at most `max_depth`.
pub fn monotone_corpus(rng: &mut impl Rng, count: usize, max_arity: usize, max_depth: usize) -> Vec<Term> {
    (0..count)
        .map(|_| {
            let arity = rng.gen_range(1..=max_arity);
            let mut pick = |r: &mut dyn rand::RngCore| random_order_stat(r, 5);
            let e = random_expr(rng, arity, max_depth, &mut pick);
            Term::new(arity, e).expect("variables drawn in range")
        })
        .collect()
}

/// Random terms of arity `2..n` over `m:n:2` and projections.
pub fn second_order_stat_corpus(rng: &mut impl Rng, count: usize, n: usize, max_depth: usize) -> Vec<Term> {
    (0..count)
        .map(|_| {
            let arity = rng.gen_range(2..n);
            let mut pick = |_: &mut dyn rand::RngCore| OpRef::OrderStat { n, k: 2 };
            let e = random_expr(rng, arity, max_depth, &mut pick);
            Term::new(arity, e).expect("variables drawn in range")
        })
        .collect()
}
