//! Finite chains, operation tables and the table-level primitives
//! (evaluation, composition, identification of variables).
//!
//! A table stores one value per input tuple, indexed by the lexicographic
//! rank of the tuple with the leftmost coordinate most significant.

use std::fmt;

use crate::error::{parse_err, Error, Result};

/// Default cap on the number of entries a single table may hold.
pub const DEFAULT_TABLE_CAP: u128 = 10_000_000;

/// The chain `0 < 1 < … < size-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chain {
    size: usize,
}

impl Chain {
    pub fn new(size: usize) -> Result<Self> {
        if !(2..=256).contains(&size) {
            return Err(Error::InvalidChain(size));
        }
        Ok(Chain { size })
    }

    pub fn size(self) -> usize {
        self.size
    }

    /// Number of input tuples of the given arity, or `BudgetExceeded` above `cap`.
    pub fn tuple_count(self, arity: usize, cap: u128) -> Result<usize> {
        let mut count: u128 = 1;
        for _ in 0..arity {
            count = count.saturating_mul(self.size as u128);
            if count > cap {
                // report the true figure where it fits
                let requested = (self.size as u128)
                    .checked_pow(arity as u32)
                    .unwrap_or(u128::MAX);
                return Err(Error::BudgetExceeded { requested, cap });
            }
        }
        Ok(count as usize)
    }

    /// Iterates over all tuples of `arity` in lexicographic order.
    pub fn tuples(self, arity: usize) -> Tuples {
        Tuples {
            size: self.size,
            current: vec![0; arity],
            done: false,
        }
    }

    pub fn rank(self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &v| acc * self.size + v)
    }

    pub fn unrank(self, mut rank: usize, arity: usize) -> Vec<usize> {
        let mut out = vec![0; arity];
        for slot in out.iter_mut().rev() {
            *slot = rank % self.size;
            rank /= self.size;
        }
        out
    }
}

/// Lexicographic tuple iterator (last coordinate varies fastest).
pub struct Tuples {
    size: usize,
    current: Vec<usize>,
    done: bool,
}

impl Iterator for Tuples {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let mut i = self.current.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.current[i] += 1;
            if self.current[i] < self.size {
                break;
            }
            self.current[i] = 0;
        }
        Some(out)
    }
}

/// A total `arity`-ary operation on a chain.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OpTable {
    arity: usize,
    chain: Chain,
    values: Vec<u8>,
}

impl fmt::Debug for OpTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "OpTable(arity={}, chain={}, values={:?})",
            self.arity,
            self.chain.size(),
            self.values
        )
    }
}

impl OpTable {
    pub fn from_values(chain: Chain, arity: usize, values: Vec<u8>) -> Result<Self> {
        let expected = chain.tuple_count(arity, u128::MAX)?;
        if values.len() != expected {
            return Err(Error::ArityMismatch {
                expected,
                found: values.len(),
            });
        }
        if let Some(&bad) = values.iter().find(|&&v| v as usize >= chain.size()) {
            return Err(Error::ElementOutOfRange {
                value: bad as usize,
                size: chain.size(),
            });
        }
        Ok(OpTable {
            arity,
            chain,
            values,
        })
    }

    /// Tabulates `f` over every tuple, subject to the default entry cap.
    pub fn from_fn(chain: Chain, arity: usize, f: impl FnMut(&[usize]) -> usize) -> Result<Self> {
        Self::from_fn_capped(chain, arity, DEFAULT_TABLE_CAP, f)
    }

    pub fn from_fn_capped(
        chain: Chain,
        arity: usize,
        cap: u128,
        mut f: impl FnMut(&[usize]) -> usize,
    ) -> Result<Self> {
        let count = chain.tuple_count(arity, cap)?;
        let mut values = Vec::with_capacity(count);
        for t in chain.tuples(arity) {
            let v = f(&t);
            if v >= chain.size() {
                return Err(Error::ElementOutOfRange {
                    value: v,
                    size: chain.size(),
                });
            }
            values.push(v as u8);
        }
        Ok(OpTable {
            arity,
            chain,
            values,
        })
    }

    /// The projection onto coordinate `k` (1-based) of an `n`-ary tuple.
    pub fn projection(chain: Chain, n: usize, k: usize) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::IndexOutOfRange { n, k });
        }
        Self::from_fn(chain, n, |t| t[k - 1])
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn chain(&self) -> Chain {
        self.chain
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub(crate) fn from_raw(chain: Chain, arity: usize, values: Vec<u8>) -> Self {
        debug_assert_eq!(values.len(), chain.size().pow(arity as u32));
        OpTable {
            arity,
            chain,
            values,
        }
    }

    pub fn eval(&self, input: &[usize]) -> Result<usize> {
        if input.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: input.len(),
            });
        }
        if let Some(&bad) = input.iter().find(|&&v| v >= self.chain.size()) {
            return Err(Error::ElementOutOfRange {
                value: bad,
                size: self.chain.size(),
            });
        }
        Ok(self.values[self.chain.rank(input)] as usize)
    }

    /// Returns `Some(k)` (1-based) if this table is the projection onto `k`.
    pub fn projection_index(&self) -> Option<usize> {
        (1..=self.arity).find(|&k| {
            self.chain
                .tuples(self.arity)
                .zip(&self.values)
                .all(|(t, &v)| t[k - 1] == v as usize)
        })
    }

    pub fn is_projection(&self) -> bool {
        self.projection_index().is_some()
    }

    /// `outer(inners[0](x), …, inners[n-1](x))` for every tuple `x`.
    pub fn compose(&self, inners: &[OpTable]) -> Result<OpTable> {
        if inners.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: inners.len(),
            });
        }
        let Some(first) = inners.first() else {
            // a nullary outer has nothing to compose with
            return Err(Error::ArityMismatch {
                expected: 1,
                found: 0,
            });
        };
        let m = first.arity;
        for g in inners {
            if g.chain != self.chain {
                return Err(Error::DomainMismatch {
                    left: self.chain.size(),
                    right: g.chain.size(),
                });
            }
            if g.arity != m {
                return Err(Error::ArityMismatch {
                    expected: m,
                    found: g.arity,
                });
            }
        }
        let refs: Vec<&[u8]> = inners.iter().map(|g| g.values.as_slice()).collect();
        Ok(OpTable::from_raw(
            self.chain,
            m,
            compose_values(&self.values, self.chain.size(), &refs),
        ))
    }

    /// `table(y_{map(1)}, …, y_{map(n)})` as a `map.target_arity()`-ary table.
    pub fn identify_vars(&self, map: &VarMap) -> Result<OpTable> {
        if map.source_arity() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: map.source_arity(),
            });
        }
        let count = self.chain.tuple_count(map.target_arity(), DEFAULT_TABLE_CAP)?;
        let mut values = Vec::with_capacity(count);
        let mut source = vec![0usize; self.arity];
        for y in self.chain.tuples(map.target_arity()) {
            for (slot, &target) in source.iter_mut().zip(map.assignment()) {
                *slot = y[target - 1];
            }
            values.push(self.values[self.chain.rank(&source)]);
        }
        Ok(OpTable::from_raw(self.chain, map.target_arity(), values))
    }

    /// Injective byte key over `(arity, chain size, values)`.
    pub fn canonical_key(&self) -> Vec<u8> {
        let mut key = Vec::with_capacity(8 + self.values.len());
        key.extend_from_slice(&(self.arity as u32).to_le_bytes());
        key.extend_from_slice(&(self.chain.size() as u32).to_le_bytes());
        key.extend_from_slice(&self.values);
        key
    }

    /// Short hex digest of the canonical key, for reports.
    pub fn key_hex(&self) -> String {
        // FNV-1a over the canonical key; display only, never used for dedup
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.canonical_key() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{:016x}", h)
    }

    /// First tuple (lexicographic) on which the tables differ.
    pub fn first_difference(&self, other: &OpTable) -> Option<Vec<usize>> {
        if self.arity != other.arity || self.chain != other.chain {
            return Some(Vec::new());
        }
        self.values
            .iter()
            .zip(&other.values)
            .position(|(a, b)| a != b)
            .map(|r| self.chain.unrank(r, self.arity))
    }

    pub fn to_text(&self) -> String {
        let size = self.chain.size();
        let mut out = format!("optable {} {}\n", self.arity, size);
        let row = if self.arity == 0 { 1 } else { size };
        for chunk in self.values.chunks(row) {
            let line: Vec<String> = chunk.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the `optable <arity> <domain_size>` text format.
    pub fn parse(text: &str) -> Result<OpTable> {
        let mut tokens = tokens_with_lines(text);
        let table = parse_table_tokens(&mut tokens)?;
        if let Some((line, tok)) = tokens.next() {
            return Err(parse_err(line, format!("trailing token `{tok}`")));
        }
        Ok(table)
    }
}

pub(crate) fn compose_values(outer: &[u8], size: usize, inners: &[&[u8]]) -> Vec<u8> {
    let len = inners[0].len();
    let mut weights = vec![1usize; inners.len()];
    for i in (0..inners.len().saturating_sub(1)).rev() {
        weights[i] = weights[i + 1] * size;
    }
    (0..len)
        .map(|r| {
            let idx: usize = inners
                .iter()
                .zip(&weights)
                .map(|(g, w)| g[r] as usize * w)
                .sum();
            outer[idx]
        })
        .collect()
}

pub(crate) fn tokens_with_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().flat_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("");
        line.split_whitespace().map(move |t| (i + 1, t))
    })
}

pub(crate) fn parse_table_tokens<'a>(
    tokens: &mut impl Iterator<Item = (usize, &'a str)>,
) -> Result<OpTable> {
    let (line, head) = tokens
        .next()
        .ok_or_else(|| parse_err(1, "empty input"))?;
    if head != "optable" {
        return Err(parse_err(line, format!("expected `optable`, found `{head}`")));
    }
    let mut num = |what: &str| -> Result<(usize, usize)> {
        let (line, tok) = tokens
            .next()
            .ok_or_else(|| parse_err(line, format!("unexpected end of input, wanted {what}")))?;
        tok.parse::<usize>()
            .map(|v| (line, v))
            .map_err(|_| parse_err(line, format!("expected {what}, found `{tok}`")))
    };
    let (_, arity) = num("arity")?;
    let (l, size) = num("domain size")?;
    let chain = Chain::new(size).map_err(|e| parse_err(l, e.to_string()))?;
    let count = chain
        .tuple_count(arity, DEFAULT_TABLE_CAP)
        .map_err(|e| parse_err(l, e.to_string()))?;
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let (l, v) = num("table value")?;
        if v >= size {
            return Err(parse_err(l, format!("value {v} out of range for chain {size}")));
        }
        values.push(v as u8);
    }
    Ok(OpTable::from_raw(chain, arity, values))
}

/// A total map `{1..source_arity} -> {1..target_arity}` used to identify
/// (and permute) variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarMap {
    target_arity: usize,
    assignment: Vec<usize>,
}

impl VarMap {
    /// `assignment[i-1]` is the target variable (1-based) of source position `i`.
    pub fn new(target_arity: usize, assignment: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = assignment.iter().find(|&&t| t == 0 || t > target_arity) {
            return Err(Error::InvalidVarMap(format!(
                "target {bad} outside 1..={target_arity}"
            )));
        }
        Ok(VarMap {
            target_arity,
            assignment,
        })
    }

    pub fn identity(n: usize) -> Self {
        VarMap {
            target_arity: n,
            assignment: (1..=n).collect(),
        }
    }

    /// Consecutive blocks: variable `j` repeated `multiplicities[j-1]` times.
    pub fn from_multiplicities(multiplicities: &[usize]) -> Self {
        let assignment = multiplicities
            .iter()
            .enumerate()
            .flat_map(|(j, &m)| std::iter::repeat(j + 1).take(m))
            .collect();
        VarMap {
            target_arity: multiplicities.len(),
            assignment,
        }
    }

    pub fn source_arity(&self) -> usize {
        self.assignment.len()
    }

    pub fn target_arity(&self) -> usize {
        self.target_arity
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// How often each target variable occurs.
    pub fn multiplicities(&self) -> Vec<usize> {
        let mut m = vec![0; self.target_arity];
        for &t in &self.assignment {
            m[t - 1] += 1;
        }
        m
    }

    /// The projection tables realizing this map, so that
    /// `f.compose(&map.as_projections(chain))` equals `f.identify_vars(&map)`.
    pub fn as_projections(&self, chain: Chain) -> Result<Vec<OpTable>> {
        self.assignment
            .iter()
            .map(|&t| OpTable::projection(chain, self.target_arity, t))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: usize) -> Chain {
        Chain::new(n).unwrap()
    }

    fn sorted_kth(t: &[usize], k: usize) -> usize {
        let mut s = t.to_vec();
        s.sort_unstable();
        s[k - 1]
    }

    #[test]
    fn chain_rejects_trivial() {
        assert_eq!(Chain::new(1), Err(Error::InvalidChain(1)));
        assert!(Chain::new(0).is_err());
    }

    #[test]
    fn rank_unrank_bijective() {
        for m in 2..=4 {
            let ch = c(m);
            for n in 0..=5 {
                let total = m.pow(n as u32);
                for (r, t) in ch.tuples(n).enumerate() {
                    assert_eq!(ch.rank(&t), r);
                    assert_eq!(ch.unrank(r, n), t);
                }
                assert_eq!(ch.tuples(n).count(), total);
            }
        }
    }

    #[test]
    fn eval_examples() {
        let p32 = OpTable::projection(c(3), 3, 2).unwrap();
        assert_eq!(p32.eval(&[0, 2, 1]).unwrap(), 2);
        let med3 = OpTable::from_fn(c(3), 3, |t| sorted_kth(t, 2)).unwrap();
        assert_eq!(med3.eval(&[0, 2, 1]).unwrap(), 1);
        let m42 = OpTable::from_fn(c(3), 4, |t| sorted_kth(t, 2)).unwrap();
        assert_eq!(m42.eval(&[1, 1, 2, 0]).unwrap(), 1);
    }

    #[test]
    fn eval_errors() {
        let p = OpTable::projection(c(3), 2, 1).unwrap();
        assert_eq!(
            p.eval(&[0]),
            Err(Error::ArityMismatch {
                expected: 2,
                found: 1
            })
        );
        assert_eq!(
            p.eval(&[0, 3]),
            Err(Error::ElementOutOfRange { value: 3, size: 3 })
        );
    }

    #[test]
    fn compose_examples() {
        let ch = c(3);
        let f = OpTable::from_fn(ch, 2, |t| (t[0] + 2 * t[1]) % 3).unwrap();
        let g = OpTable::from_fn(ch, 2, |t| t[0].max(t[1])).unwrap();
        let p21 = OpTable::projection(ch, 2, 1).unwrap();
        assert_eq!(p21.compose(&[f.clone(), g.clone()]).unwrap(), f);

        let ch2 = c(2);
        let med3 = OpTable::from_fn(ch2, 3, |t| sorted_kth(t, 2)).unwrap();
        let x = OpTable::projection(ch2, 2, 1).unwrap();
        let y = OpTable::projection(ch2, 2, 2).unwrap();
        // med_3(x, x, y) = x: the doubled argument always holds the majority
        assert_eq!(med3.compose(&[x.clone(), x.clone(), y]).unwrap(), x);

        let min3 = OpTable::from_fn(ch, 2, |t| t[0].min(t[1])).unwrap();
        let abs = g.compose(&[min3, g.clone()]).unwrap();
        assert_eq!(abs.eval(&[1, 2]).unwrap(), 2);
    }

    #[test]
    fn compose_errors() {
        let p = OpTable::projection(c(3), 2, 1).unwrap();
        let q = OpTable::projection(c(2), 2, 1).unwrap();
        let r = OpTable::projection(c(3), 3, 1).unwrap();
        assert!(matches!(
            p.compose(&[p.clone()]),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            p.compose(&[p.clone(), q]),
            Err(Error::DomainMismatch { .. })
        ));
        assert!(matches!(
            p.compose(&[p.clone(), r]),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn identify_examples() {
        let ch = c(4);
        let med3 = OpTable::from_fn(ch, 3, |t| sorted_kth(t, 2)).unwrap();
        assert_eq!(med3.identify_vars(&VarMap::identity(3)).unwrap(), med3);
        let med5 = OpTable::from_fn(ch, 5, |t| sorted_kth(t, 3)).unwrap();
        let map = VarMap::new(3, vec![1, 2, 2, 3, 3]).unwrap();
        assert_eq!(med5.identify_vars(&map).unwrap(), med3);
        let m42 = OpTable::from_fn(ch, 4, |t| sorted_kth(t, 2)).unwrap();
        let min2 = OpTable::from_fn(ch, 2, |t| t[0].min(t[1])).unwrap();
        let map = VarMap::from_multiplicities(&[2, 2]);
        assert_eq!(m42.identify_vars(&map).unwrap(), min2);
    }

    #[test]
    fn varmap_validation() {
        assert!(VarMap::new(2, vec![1, 3]).is_err());
        assert!(VarMap::new(2, vec![0]).is_err());
        assert_eq!(
            VarMap::from_multiplicities(&[3, 2, 2]).assignment(),
            &[1, 1, 1, 2, 2, 3, 3]
        );
    }

    #[test]
    fn keys_distinguish_tables() {
        let ch = c(2);
        let med3 = OpTable::from_fn(ch, 3, |t| sorted_kth(t, 2)).unwrap();
        let again = OpTable::from_fn(ch, 3, |t| {
            let mut s = t.to_vec();
            s.sort();
            s[1]
        })
        .unwrap();
        let max3 = OpTable::from_fn(ch, 3, |t| *t.iter().max().unwrap()).unwrap();
        assert_eq!(med3.canonical_key(), again.canonical_key());
        assert_ne!(med3.canonical_key(), max3.canonical_key());
        assert_eq!(med3.eval(&[0, 0, 1]).unwrap(), 0);
        assert_eq!(max3.eval(&[0, 0, 1]).unwrap(), 1);
        // same values, different arity/size must not collide
        let a = OpTable::from_values(c(2), 2, vec![0, 1, 1, 0]).unwrap();
        let b = OpTable::from_values(c(4), 1, vec![0, 1, 1, 0]).unwrap();
        assert_ne!(a.canonical_key(), b.canonical_key());
    }

    #[test]
    fn text_format_fixpoint() {
        let t = OpTable::from_fn(c(3), 3, |t| sorted_kth(t, 2)).unwrap();
        let text = t.to_text();
        assert!(text.starts_with("optable 3 3\n"));
        let back = OpTable::parse(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_text(), text);
        assert_eq!(back.canonical_key(), t.canonical_key());
    }

    #[test]
    fn text_format_errors() {
        assert!(matches!(
            OpTable::parse("optable 1 2\n0"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            OpTable::parse("optable 1 2\n0 2"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(OpTable::parse("table 1 2 0 1").is_err());
        assert!(OpTable::parse("optable 1 2 0 1 0").is_err());
    }

    #[test]
    fn budget_cap() {
        let ch = c(10);
        assert!(matches!(
            OpTable::from_fn(ch, 8, |_| 0),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn projection_detection() {
        let ch = c(3);
        assert_eq!(
            OpTable::projection(ch, 3, 2).unwrap().projection_index(),
            Some(2)
        );
        let max2 = OpTable::from_fn(ch, 2, |t| t[0].max(t[1])).unwrap();
        assert!(!max2.is_projection());
    }
}
