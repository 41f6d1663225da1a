//! Order statistics `m^n_k` on chains, their named special cases, the
//! majority and symmetry recognizers, and the lattice generalization.

use crate::error::{parse_err, Error, Result};
use crate::table::{parse_table_tokens, tokens_with_lines, Chain, OpTable};

/// The `k`-th smallest entry (1-based, counted with multiplicity).
pub fn kth_smallest<T: Ord + Copy>(values: &[T], k: usize) -> T {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    sorted[k - 1]
}

/// `m^n_k`: returns the `k`-th smallest of its `n` arguments.
pub fn order_stat(n: usize, k: usize, chain: Chain) -> Result<OpTable> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::IndexOutOfRange { n, k });
    }
    let mut buf = vec![0usize; n];
    OpTable::from_fn(chain, n, |t| {
        buf.copy_from_slice(t);
        buf.sort_unstable();
        buf[k - 1]
    })
}

/// `med_n = m^n_{(n+1)/2}` for odd `n`.
pub fn median(n: usize, chain: Chain) -> Result<OpTable> {
    if n % 2 == 0 {
        return Err(Error::EvenArity(n));
    }
    order_stat(n, n.div_ceil(2), chain)
}

pub fn max_op(n: usize, chain: Chain) -> Result<OpTable> {
    order_stat(n, n, chain)
}

pub fn min_op(n: usize, chain: Chain) -> Result<OpTable> {
    order_stat(n, 1, chain)
}

/// Lower median `m^n_{n/2}` for even `n`.
pub fn lower_median(n: usize, chain: Chain) -> Result<OpTable> {
    if n % 2 == 1 || n == 0 {
        return Err(Error::OddArity(n));
    }
    order_stat(n, n / 2, chain)
}

/// Occurrences a value needs to count as a majority among `n` arguments.
pub fn majority_threshold(n: usize) -> usize {
    (n + 1).div_ceil(2)
}

/// First tuple where some value holds a majority but the table disagrees.
pub fn majority_counterexample(table: &OpTable) -> Option<Vec<usize>> {
    let n = table.arity();
    let size = table.chain().size();
    let need = majority_threshold(n);
    let mut counts = vec![0usize; size];
    table
        .chain()
        .tuples(n)
        .zip(table.values())
        .find(|(t, &v)| {
            counts.iter_mut().for_each(|c| *c = 0);
            for &x in t {
                counts[x] += 1;
            }
            counts
                .iter()
                .position(|&c| c >= need)
                .is_some_and(|winner| winner != v as usize)
        })
        .map(|(t, _)| t)
}

pub fn is_majority(table: &OpTable) -> bool {
    majority_counterexample(table).is_none()
}

/// First tuple whose value changes under some transposition of coordinates.
pub fn symmetry_counterexample(table: &OpTable) -> Option<Vec<usize>> {
    let n = table.arity();
    let chain = table.chain();
    let vals = table.values();
    // adjacent transpositions generate the symmetric group
    chain.tuples(n).find(|t| {
        let v = vals[chain.rank(t)];
        let mut s = t.clone();
        (0..n.saturating_sub(1)).any(|i| {
            s.swap(i, i + 1);
            let w = vals[chain.rank(&s)];
            s.swap(i, i + 1);
            w != v
        })
    })
}

pub fn is_totally_symmetric(table: &OpTable) -> bool {
    symmetry_counterexample(table).is_none()
}

/// Work cap for `lattice_order_stat` (index tuples times inputs).
pub const LATTICE_WORK_CAP: u128 = 100_000_000;

/// A finite lattice on `{0, …, size-1}` given by its meet and join tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteLattice {
    meet: OpTable,
    join: OpTable,
}

impl FiniteLattice {
    /// Validates the lattice laws exhaustively.
    pub fn new(meet: OpTable, join: OpTable) -> Result<Self> {
        if meet.arity() != 2 || join.arity() != 2 {
            return Err(Error::InvalidLattice("meet and join must be binary".into()));
        }
        if meet.chain() != join.chain() {
            return Err(Error::InvalidLattice("meet and join on different carriers".into()));
        }
        let l = FiniteLattice { meet, join };
        let size = l.size();
        let m = |a, b| l.meet_of(a, b);
        let j = |a, b| l.join_of(a, b);
        for a in 0..size {
            if m(a, a) != a || j(a, a) != a {
                return Err(Error::InvalidLattice(format!("not idempotent at {a}")));
            }
            for b in 0..size {
                if m(a, b) != m(b, a) || j(a, b) != j(b, a) {
                    return Err(Error::InvalidLattice(format!("not commutative at ({a},{b})")));
                }
                if m(a, j(a, b)) != a || j(a, m(a, b)) != a {
                    return Err(Error::InvalidLattice(format!("absorption fails at ({a},{b})")));
                }
                for c in 0..size {
                    if m(m(a, b), c) != m(a, m(b, c)) || j(j(a, b), c) != j(a, j(b, c)) {
                        return Err(Error::InvalidLattice(format!(
                            "not associative at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(l)
    }

    /// The chain `0 < … < size-1` viewed as a lattice.
    pub fn chain(chain: Chain) -> Result<Self> {
        Self::new(min_op(2, chain)?, max_op(2, chain)?)
    }

    pub fn size(&self) -> usize {
        self.meet.chain().size()
    }

    pub fn carrier(&self) -> Chain {
        self.meet.chain()
    }

    pub fn meet(&self) -> &OpTable {
        &self.meet
    }

    pub fn join(&self) -> &OpTable {
        &self.join
    }

    pub fn meet_of(&self, a: usize, b: usize) -> usize {
        self.meet.values()[a * self.size() + b] as usize
    }

    pub fn join_of(&self, a: usize, b: usize) -> usize {
        self.join.values()[a * self.size() + b] as usize
    }

    /// True iff the induced order is total.
    pub fn is_chain(&self) -> bool {
        let s = self.size();
        (0..s).all(|a| (0..s).all(|b| {
            let m = self.meet_of(a, b);
            m == a || m == b
        }))
    }

    pub fn to_text(&self) -> String {
        format!("lattice {}\n{}{}", self.size(), self.meet.to_text(), self.join.to_text())
    }

    /// `lattice <size>` followed by the meet and the join table.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = tokens_with_lines(text);
        let (line, head) = tokens.next().ok_or_else(|| parse_err(1, "empty input"))?;
        if head != "lattice" {
            return Err(parse_err(line, format!("expected `lattice`, found `{head}`")));
        }
        let (line, size) = tokens
            .next()
            .ok_or_else(|| parse_err(line, "missing lattice size"))?;
        let size: usize = size
            .parse()
            .map_err(|_| parse_err(line, "bad lattice size"))?;
        let meet = parse_table_tokens(&mut tokens)?;
        let join = parse_table_tokens(&mut tokens)?;
        if let Some((l, tok)) = tokens.next() {
            return Err(parse_err(l, format!("trailing token `{tok}`")));
        }
        if meet.chain().size() != size {
            return Err(parse_err(line, "lattice size disagrees with its tables"));
        }
        Self::new(meet, join)
    }
}

/// `⋀_{(j_1..j_k)} ⋁_i x_{j_i}` over every ordered tuple of pairwise
/// distinct indices, without symmetry reduction.
///
/// Tuples with repeated indices are excluded: `(j, …, j)` would contribute
/// `x_j` itself and collapse the whole meet to `x_1 ∧ … ∧ x_n`.
pub fn lattice_order_stat(n: usize, k: usize, lattice: &FiniteLattice) -> Result<OpTable> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::IndexOutOfRange { n, k });
    }
    let chain = lattice.carrier();
    let inputs = chain.tuple_count(n, LATTICE_WORK_CAP)? as u128;
    let index_tuples: u128 = ((n - k + 1)..=n).map(|v| v as u128).product();
    let work = inputs.saturating_mul(index_tuples);
    if work > LATTICE_WORK_CAP {
        return Err(Error::BudgetExceeded {
            requested: work,
            cap: LATTICE_WORK_CAP,
        });
    }
    let tuples = injective_tuples(n, k);
    OpTable::from_fn(chain, n, |x| {
        tuples
            .iter()
            .map(|idx| idx[1..].iter().fold(x[idx[0]], |j, &i| lattice.join_of(j, x[i])))
            .reduce(|a, b| lattice.meet_of(a, b))
            .expect("k <= n gives at least one index tuple")
    })
}

/// All ordered `k`-tuples of distinct indices from `0..n`.
fn injective_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !cur.contains(&i) {
                cur.push(i);
                go(n, k, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, k, &mut Vec::with_capacity(k), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: usize) -> Chain {
        Chain::new(n).unwrap()
    }

    #[test]
    fn order_stat_examples() {
        assert_eq!(order_stat(3, 2, c(3)).unwrap().eval(&[0, 2, 1]).unwrap(), 1);
        assert_eq!(
            order_stat(5, 5, c(4)).unwrap().eval(&[1, 0, 3, 2, 2]).unwrap(),
            3
        );
        assert_eq!(order_stat(4, 2, c(3)).unwrap().eval(&[2, 2, 0, 1]).unwrap(), 1);
        assert!(matches!(order_stat(3, 4, c(3)), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(order_stat(3, 0, c(3)), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(order_stat(30, 1, c(3)), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn median_examples() {
        let id = median(1, c(3)).unwrap();
        assert_eq!(id.projection_index(), Some(1));
        let bmaj = median(3, c(2)).unwrap();
        for t in c(2).tuples(3) {
            let ones: usize = t.iter().sum();
            assert_eq!(bmaj.eval(&t).unwrap(), usize::from(ones >= 2));
        }
        assert_eq!(median(5, c(4)).unwrap().eval(&[3, 0, 2, 2, 1]).unwrap(), 2);
        assert_eq!(median(4, c(3)), Err(Error::EvenArity(4)));
    }

    #[test]
    fn majority_recognizer() {
        for n in [1, 3, 5, 7] {
            for m in 2..=4 {
                if n == 7 && m == 4 {
                    continue; // covered by the acceptance suite
                }
                assert!(is_majority(&median(n, c(m)).unwrap()), "med_{n} on {m}");
            }
        }
        for m in 2..=4 {
            let p = OpTable::projection(c(m), 3, 1).unwrap();
            assert_eq!(majority_counterexample(&p), Some(vec![0, 1, 1]));
            let max3 = max_op(3, c(m)).unwrap();
            assert_eq!(majority_counterexample(&max3), Some(vec![0, 0, 1]));
        }
    }

    #[test]
    fn symmetry_recognizer() {
        for n in 1..=4 {
            for k in 1..=n {
                assert!(is_totally_symmetric(&order_stat(n, k, c(3)).unwrap()));
            }
        }
        assert!(!is_totally_symmetric(&OpTable::projection(c(2), 2, 1).unwrap()));
        let ch = c(3);
        let med = median(3, ch).unwrap();
        let x = OpTable::projection(ch, 3, 1).unwrap();
        let y = OpTable::projection(ch, 3, 2).unwrap();
        // med(x, x, y) = x is not symmetric
        let g = med.compose(&[x.clone(), x, y]).unwrap();
        assert!(!is_totally_symmetric(&g));
    }

    #[test]
    fn chain_lattice_agrees_with_order_stats() {
        for size in 2..=3 {
            let lat = FiniteLattice::chain(c(size)).unwrap();
            assert!(lat.is_chain());
            for n in 1..=4 {
                for k in 1..=n {
                    assert_eq!(
                        lattice_order_stat(n, k, &lat).unwrap(),
                        order_stat(n, k, c(size)).unwrap(),
                        "n={n} k={k} size={size}"
                    );
                }
            }
        }
    }

    fn diamond() -> FiniteLattice {
        // M3: 0 bottom, 4 top, 1 2 3 pairwise incomparable atoms
        let ch = c(5);
        let le = |a: usize, b: usize| a == b || a == 0 || b == 4;
        let meet = OpTable::from_fn(ch, 2, |t| {
            let (a, b) = (t[0], t[1]);
            if le(a, b) { a } else if le(b, a) { b } else { 0 }
        })
        .unwrap();
        let join = OpTable::from_fn(ch, 2, |t| {
            let (a, b) = (t[0], t[1]);
            if le(a, b) { b } else if le(b, a) { a } else { 4 }
        })
        .unwrap();
        FiniteLattice::new(meet, join).unwrap()
    }

    #[test]
    fn lattice_extremes() {
        let lat = diamond();
        assert!(!lat.is_chain());
        for n in 1..=3 {
            let top = lattice_order_stat(n, n, &lat).unwrap();
            let bottom = lattice_order_stat(n, 1, &lat).unwrap();
            for t in lat.carrier().tuples(n) {
                let j = t[1..].iter().fold(t[0], |a, &b| lat.join_of(a, b));
                let m = t[1..].iter().fold(t[0], |a, &b| lat.meet_of(a, b));
                assert_eq!(top.eval(&t).unwrap(), j);
                assert_eq!(bottom.eval(&t).unwrap(), m);
            }
        }
    }

    #[test]
    fn invalid_lattices_rejected() {
        let ch = c(3);
        let max2 = max_op(2, ch).unwrap();
        // max for both operations fails absorption
        assert!(matches!(
            FiniteLattice::new(max2.clone(), max2.clone()),
            Err(Error::InvalidLattice(_))
        ));
        let p = OpTable::projection(ch, 2, 1).unwrap();
        assert!(FiniteLattice::new(p, max2).is_err());
    }

    #[test]
    fn lattice_text_round_trip() {
        let lat = diamond();
        let back = FiniteLattice::parse(&lat.to_text()).unwrap();
        assert_eq!(back, lat);
        assert!(FiniteLattice::parse("lattice 3\n").is_err());
    }

    #[test]
    fn injective_tuple_count() {
        assert_eq!(injective_tuples(4, 2).len(), 12);
        assert_eq!(injective_tuples(3, 3).len(), 6);
        assert!(injective_tuples(3, 1).iter().all(|t| t.len() == 1));
    }

    #[test]
    fn lattice_budget() {
        let lat = FiniteLattice::chain(c(4)).unwrap();
        assert!(matches!(
            lattice_order_stat(9, 9, &lat),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
