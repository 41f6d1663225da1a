//! Term trees over named tables and symbolic order statistics.
//!
//! Text form is an s-expression: `(var i)`, `(proj n k)` and
//! `(op NAME child…)`, where `NAME` is a registry name or one of the
//! symbolic forms `m:n:k`, `med:n`, `max:n`, `min:n`. An optional leading
//! `term <arity>` line declares an ambient arity larger than the one the
//! expression mentions.

use std::fmt;

use crate::error::{parse_err, Error, Result};
use crate::order_stats::kth_smallest;
use crate::table::{Chain, OpTable, DEFAULT_TABLE_CAP};

/// Reference to an operation inside a term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OpRef {
    /// A table registered under this name.
    Named(String),
    /// The order statistic `m^n_k`, evaluated symbolically on any chain.
    OrderStat { n: usize, k: usize },
}

impl OpRef {
    pub fn order_stat(n: usize, k: usize) -> Result<Self> {
        if n == 0 || k == 0 || k > n {
            return Err(Error::IndexOutOfRange { n, k });
        }
        Ok(OpRef::OrderStat { n, k })
    }

    pub fn median(n: usize) -> Result<Self> {
        if n % 2 == 0 {
            return Err(Error::EvenArity(n));
        }
        Self::order_stat(n, n.div_ceil(2))
    }

    pub fn named(name: impl Into<String>) -> Self {
        OpRef::Named(name.into())
    }

    /// Parses `m:n:k`, `med:n`, `max:n`, `min:n`, or falls back to a name.
    pub fn parse(name: &str) -> Result<Self> {
        let parts: Vec<&str> = name.split(':').collect();
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::UnknownOp(name.to_string()))
        };
        match parts.as_slice() {
            ["m", n, k] => Self::order_stat(num(n)?, num(k)?),
            ["med", n] => Self::median(num(n)?),
            ["max", n] => {
                let n = num(n)?;
                Self::order_stat(n, n)
            }
            ["min", n] => Self::order_stat(num(n)?, 1),
            [single] if !single.is_empty() => Ok(OpRef::Named(single.to_string())),
            _ => Err(Error::UnknownOp(name.to_string())),
        }
    }

    /// Arity if known without a registry.
    pub fn symbolic_arity(&self) -> Option<usize> {
        match self {
            OpRef::OrderStat { n, .. } => Some(*n),
            OpRef::Named(_) => None,
        }
    }
}

impl fmt::Display for OpRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpRef::Named(s) => f.write_str(s),
            OpRef::OrderStat { n, k } => write!(f, "m:{n}:{k}"),
        }
    }
}

/// Named operation tables available to term evaluation.
#[derive(Debug, Clone, Default)]
pub struct Registry {
    entries: Vec<(String, OpTable)>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers (or replaces) `name`. Names that parse as symbolic order
    /// statistics are rejected.
    pub fn insert(&mut self, name: impl Into<String>, table: OpTable) -> Result<()> {
        let name = name.into();
        if !matches!(OpRef::parse(&name), Ok(OpRef::Named(_))) {
            return Err(Error::UnknownOp(format!("{name} (reserved or malformed)")));
        }
        match self.entries.iter_mut().find(|(n, _)| *n == name) {
            Some(slot) => slot.1 = table,
            None => self.entries.push((name, table)),
        }
        Ok(())
    }

    pub fn with(mut self, name: impl Into<String>, table: OpTable) -> Result<Self> {
        self.insert(name, table)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<&OpTable> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &OpTable)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Expression node; variable and projection indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(usize),
    Proj { n: usize, k: usize },
    Apply { op: OpRef, args: Vec<Expr> },
}

impl Expr {
    pub fn apply(op: OpRef, args: Vec<Expr>) -> Self {
        Expr::Apply { op, args }
    }

    /// `op(x_1, …, x_n)`.
    pub fn apply_vars(op: OpRef, n: usize) -> Self {
        Expr::Apply {
            op,
            args: (1..=n).map(Expr::Var).collect(),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Apply { args, .. } => 1 + args.iter().map(Expr::size).sum::<usize>(),
            _ => 1,
        }
    }

    /// Longest chain of nested applications.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Apply { args, .. } => 1 + args.iter().map(Expr::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    fn max_index(&self) -> usize {
        match self {
            Expr::Var(i) => *i,
            Expr::Proj { n, .. } => *n,
            Expr::Apply { args, .. } => args.iter().map(Expr::max_index).max().unwrap_or(0),
        }
    }

    fn validate(&self, arity: usize) -> Result<()> {
        match self {
            Expr::Var(i) => {
                if *i == 0 || *i > arity {
                    return Err(Error::IndexOutOfRange { n: arity, k: *i });
                }
            }
            Expr::Proj { n, k } => {
                if *n != arity {
                    return Err(Error::ArityMismatch {
                        expected: arity,
                        found: *n,
                    });
                }
                if *k == 0 || k > n {
                    return Err(Error::IndexOutOfRange { n: *n, k: *k });
                }
            }
            Expr::Apply { op, args } => {
                if let Some(n) = op.symbolic_arity() {
                    if n != args.len() {
                        return Err(Error::ArityMismatch {
                            expected: n,
                            found: args.len(),
                        });
                    }
                }
                for a in args {
                    a.validate(arity)?;
                }
            }
        }
        Ok(())
    }

    /// Named operations referenced anywhere in the expression.
    pub fn named_ops(&self, out: &mut Vec<String>) {
        if let Expr::Apply { op, args } = self {
            if let OpRef::Named(name) = op {
                if !out.contains(name) {
                    out.push(name.clone());
                }
            }
            for a in args {
                a.named_ops(out);
            }
        }
    }

    /// Replaces every variable `i` by `subst[i-1]`.
    pub fn substitute(&self, subst: &[Expr]) -> Expr {
        match self {
            Expr::Var(i) => subst[*i - 1].clone(),
            Expr::Proj { k, .. } => subst[*k - 1].clone(),
            Expr::Apply { op, args } => Expr::Apply {
                op: op.clone(),
                args: args.iter().map(|a| a.substitute(subst)).collect(),
            },
        }
    }
}

impl Expr {
    /// Replaces every application of `op` by `definition` applied to the
    /// (already inlined) arguments.
    pub fn inline(&self, op: &OpRef, definition: &Expr) -> Expr {
        match self {
            Expr::Apply { op: o, args } => {
                let args: Vec<Expr> = args.iter().map(|a| a.inline(op, definition)).collect();
                if o == op {
                    definition.substitute(&args)
                } else {
                    Expr::Apply {
                        op: o.clone(),
                        args,
                    }
                }
            }
            leaf => leaf.clone(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(i) => write!(f, "(var {i})"),
            Expr::Proj { n, k } => write!(f, "(proj {n} {k})"),
            Expr::Apply { op, args } => {
                write!(f, "(op {op}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// An expression together with its ambient arity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    arity: usize,
    root: Expr,
}

impl Term {
    pub fn new(arity: usize, root: Expr) -> Result<Self> {
        root.validate(arity)?;
        Ok(Term { arity, root })
    }

    /// Uses the smallest arity consistent with the expression.
    pub fn infer(root: Expr) -> Result<Self> {
        let arity = root.max_index();
        Self::new(arity, root)
    }

    pub fn var(arity: usize, i: usize) -> Result<Self> {
        Self::new(arity, Expr::Var(i))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn root(&self) -> &Expr {
        &self.root
    }

    pub fn into_root(self) -> Expr {
        self.root
    }

    pub fn size(&self) -> usize {
        self.root.size()
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    /// Checks that every named operation resolves with a matching arity.
    pub fn check(&self, registry: &Registry) -> Result<()> {
        fn walk(e: &Expr, reg: &Registry) -> Result<()> {
            if let Expr::Apply { op, args } = e {
                if let OpRef::Named(name) = op {
                    let t = reg
                        .get(name)
                        .ok_or_else(|| Error::UnknownOp(name.clone()))?;
                    if t.arity() != args.len() {
                        return Err(Error::ArityMismatch {
                            expected: t.arity(),
                            found: args.len(),
                        });
                    }
                }
                for a in args {
                    walk(a, reg)?;
                }
            }
            Ok(())
        }
        walk(&self.root, registry)
    }

    /// Pointwise recursive evaluation.
    pub fn eval(&self, input: &[usize], registry: &Registry) -> Result<usize> {
        if input.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: input.len(),
            });
        }
        eval_expr(&self.root, input, registry)
    }

    /// Evaluation over the naturals; only order statistics and projections
    /// are allowed.
    pub fn eval_unbounded(&self, input: &[u64]) -> Result<u64> {
        if input.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: input.len(),
            });
        }
        fn go(e: &Expr, input: &[u64]) -> Result<u64> {
            match e {
                Expr::Var(i) | Expr::Proj { k: i, .. } => Ok(input[*i - 1]),
                Expr::Apply {
                    op: OpRef::OrderStat { k, .. },
                    args,
                } => {
                    let vals = args
                        .iter()
                        .map(|a| go(a, input))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(kth_smallest(&vals, *k))
                }
                Expr::Apply {
                    op: OpRef::Named(name),
                    ..
                } => Err(Error::NonMonotoneSymbol(name.clone())),
            }
        }
        go(&self.root, input)
    }

    /// Exhaustive tabulation on `chain` under the default entry cap.
    pub fn to_table(&self, chain: Chain, registry: &Registry) -> Result<OpTable> {
        self.to_table_capped(chain, registry, DEFAULT_TABLE_CAP)
    }

    /// Tabulation computed bottom-up, one value vector per subterm.
    pub fn to_table_capped(&self, chain: Chain, registry: &Registry, cap: u128) -> Result<OpTable> {
        let count = chain.tuple_count(self.arity, cap)?;
        self.check(registry)?;
        for (name, t) in registry.iter() {
            if t.chain() != chain {
                let mut used = Vec::new();
                self.root.named_ops(&mut used);
                if used.iter().any(|u| u == name) {
                    return Err(Error::DomainMismatch {
                        left: chain.size(),
                        right: t.chain().size(),
                    });
                }
            }
        }
        let values = tabulate(&self.root, chain, self.arity, count, registry);
        Ok(OpTable::from_raw(chain, self.arity, values))
    }

    /// Text form: the s-expression, preceded by a `term <arity>` line when
    /// the ambient arity is not implied by the expression.
    pub fn to_text(&self) -> String {
        if self.root.max_index() == self.arity {
            format!("{}\n", self.root)
        } else {
            format!("term {}\n{}\n", self.arity, self.root)
        }
    }

    pub fn parse(text: &str) -> Result<Term> {
        let toks = lex(text);
        let mut pos = 0;
        let mut declared = None;
        if let Some(Tok::Atom(a, line)) = toks.first() {
            if a == "term" {
                match toks.get(1) {
                    Some(Tok::Atom(n, _)) => {
                        declared = Some(
                            n.parse::<usize>()
                                .map_err(|_| parse_err(*line, "bad arity after `term`"))?,
                        );
                        pos = 2;
                    }
                    _ => return Err(parse_err(*line, "expected arity after `term`")),
                }
            }
        }
        let root = parse_expr(&toks, &mut pos)?;
        if let Some(t) = toks.get(pos) {
            return Err(parse_err(t.line(), "trailing input after term"));
        }
        match declared {
            Some(a) => Term::new(a, root),
            None => Term::infer(root),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

fn eval_expr(e: &Expr, input: &[usize], registry: &Registry) -> Result<usize> {
    match e {
        Expr::Var(i) | Expr::Proj { k: i, .. } => Ok(input[*i - 1]),
        Expr::Apply { op, args } => {
            let vals = args
                .iter()
                .map(|a| eval_expr(a, input, registry))
                .collect::<Result<Vec<_>>>()?;
            match op {
                OpRef::OrderStat { n, k } => {
                    if vals.len() != *n {
                        return Err(Error::ArityMismatch {
                            expected: *n,
                            found: vals.len(),
                        });
                    }
                    Ok(kth_smallest(&vals, *k))
                }
                OpRef::Named(name) => registry
                    .get(name)
                    .ok_or_else(|| Error::UnknownOp(name.clone()))?
                    .eval(&vals),
            }
        }
    }
}

fn tabulate(e: &Expr, chain: Chain, arity: usize, count: usize, registry: &Registry) -> Vec<u8> {
    match e {
        Expr::Var(i) | Expr::Proj { k: i, .. } => {
            // coordinate i of the r-th tuple
            let stride = chain.size().pow((arity - i) as u32);
            (0..count)
                .map(|r| ((r / stride) % chain.size()) as u8)
                .collect()
        }
        Expr::Apply { op, args } => {
            let cols: Vec<Vec<u8>> = args
                .iter()
                .map(|a| tabulate(a, chain, arity, count, registry))
                .collect();
            match op {
                OpRef::Named(name) => {
                    let t = registry.get(name).expect("checked before tabulation");
                    let refs: Vec<&[u8]> = cols.iter().map(Vec::as_slice).collect();
                    crate::table::compose_values(t.values(), chain.size(), &refs)
                }
                OpRef::OrderStat { k, .. } => {
                    let mut buf = vec![0u8; cols.len()];
                    (0..count)
                        .map(|r| {
                            for (b, c) in buf.iter_mut().zip(&cols) {
                                *b = c[r];
                            }
                            buf.sort_unstable();
                            buf[*k - 1]
                        })
                        .collect()
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open(usize),
    Close(usize),
    Atom(String, usize),
}

impl Tok {
    fn line(&self) -> usize {
        match self {
            Tok::Open(l) | Tok::Close(l) | Tok::Atom(_, l) => *l,
        }
    }
}

fn lex(text: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.split(';').next().unwrap_or("");
        let mut atom = String::new();
        let flush = |atom: &mut String, out: &mut Vec<Tok>| {
            if !atom.is_empty() {
                out.push(Tok::Atom(std::mem::take(atom), line_no));
            }
        };
        for ch in line.chars() {
            match ch {
                '(' => {
                    flush(&mut atom, &mut out);
                    out.push(Tok::Open(line_no));
                }
                ')' => {
                    flush(&mut atom, &mut out);
                    out.push(Tok::Close(line_no));
                }
                c if c.is_whitespace() => flush(&mut atom, &mut out),
                c => atom.push(c),
            }
        }
        flush(&mut atom, &mut out);
    }
    out
}

fn parse_expr(toks: &[Tok], pos: &mut usize) -> Result<Expr> {
    let line = toks.get(*pos).map(Tok::line).unwrap_or(0);
    match toks.get(*pos) {
        Some(Tok::Open(_)) => *pos += 1,
        _ => return Err(parse_err(line, "expected `(`")),
    }
    let head = match toks.get(*pos) {
        Some(Tok::Atom(a, _)) => a.clone(),
        _ => return Err(parse_err(line, "expected `var`, `proj` or `op`")),
    };
    *pos += 1;
    let number = |pos: &mut usize| -> Result<usize> {
        match toks.get(*pos) {
            Some(Tok::Atom(a, l)) => {
                *pos += 1;
                a.parse::<usize>()
                    .map_err(|_| parse_err(*l, format!("expected a number, found `{a}`")))
            }
            _ => Err(parse_err(line, "expected a number")),
        }
    };
    let expr = match head.as_str() {
        "var" => Expr::Var(number(pos)?),
        "proj" => {
            let n = number(pos)?;
            let k = number(pos)?;
            Expr::Proj { n, k }
        }
        "op" => {
            let name = match toks.get(*pos) {
                Some(Tok::Atom(a, _)) => a.clone(),
                _ => return Err(parse_err(line, "expected an operation name")),
            };
            *pos += 1;
            let op = OpRef::parse(&name).map_err(|e| parse_err(line, e.to_string()))?;
            let mut args = Vec::new();
            while let Some(Tok::Open(_)) = toks.get(*pos) {
                args.push(parse_expr(toks, pos)?);
            }
            Expr::Apply { op, args }
        }
        other => return Err(parse_err(line, format!("unknown node `{other}`"))),
    };
    match toks.get(*pos) {
        Some(Tok::Close(_)) => {
            *pos += 1;
            Ok(expr)
        }
        _ => Err(parse_err(line, "expected `)`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: usize) -> Chain {
        Chain::new(n).unwrap()
    }

    #[test]
    fn opref_parsing() {
        assert_eq!(OpRef::parse("m:3:2").unwrap(), OpRef::OrderStat { n: 3, k: 2 });
        assert_eq!(OpRef::parse("med:5").unwrap(), OpRef::OrderStat { n: 5, k: 3 });
        assert_eq!(OpRef::parse("max:4").unwrap(), OpRef::OrderStat { n: 4, k: 4 });
        assert_eq!(OpRef::parse("min:4").unwrap(), OpRef::OrderStat { n: 4, k: 1 });
        assert_eq!(OpRef::parse("f").unwrap(), OpRef::Named("f".into()));
        assert!(OpRef::parse("med:4").is_err());
        assert!(OpRef::parse("m:3:4").is_err());
        assert!(OpRef::parse("m:x:1").is_err());
    }

    #[test]
    fn eval_examples() {
        let reg = Registry::new();
        let t = Term::var(1, 1).unwrap();
        assert_eq!(t.eval(&[4], &reg).unwrap(), 4);
        let med = Term::infer(Expr::apply_vars(OpRef::parse("m:3:2").unwrap(), 3)).unwrap();
        assert_eq!(med.eval(&[0, 2, 1], &reg).unwrap(), 1);
    }

    #[test]
    fn tabulation_examples() {
        let reg = Registry::new();
        let p = Term::new(2, Expr::Proj { n: 2, k: 1 }).unwrap();
        assert_eq!(p.to_table(c(2), &reg).unwrap().values(), &[0, 0, 1, 1]);
        let or = Term::infer(Expr::apply_vars(OpRef::parse("m:3:3").unwrap(), 3)).unwrap();
        let table = or.to_table(c(2), &reg).unwrap();
        for t in c(2).tuples(3) {
            let expect = (t[0] | t[1] | t[2]) as u8;
            assert_eq!(table.values()[c(2).rank(&t)], expect);
        }
    }

    #[test]
    fn unknown_op_and_arity() {
        let reg = Registry::new();
        let t = Term::infer(Expr::apply_vars(OpRef::named("f"), 2)).unwrap();
        assert_eq!(t.eval(&[0, 1], &reg), Err(Error::UnknownOp("f".into())));
        assert!(matches!(t.to_table(c(2), &reg), Err(Error::UnknownOp(_))));
        assert!(matches!(
            t.eval(&[0], &reg),
            Err(Error::ArityMismatch { .. })
        ));
        let reg = Registry::new()
            .with("f", OpTable::projection(c(2), 3, 1).unwrap())
            .unwrap();
        assert!(matches!(t.check(&reg), Err(Error::ArityMismatch { .. })));
        assert!(Term::infer(Expr::apply(OpRef::order_stat(3, 2).unwrap(), vec![Expr::Var(1)])).is_err());
        assert!(Term::new(2, Expr::Var(3)).is_err());
    }

    #[test]
    fn registry_rejects_symbolic_names() {
        let mut reg = Registry::new();
        assert!(reg.insert("m:3:2", OpTable::projection(c(2), 1, 1).unwrap()).is_err());
        assert!(reg.insert("g", OpTable::projection(c(2), 1, 1).unwrap()).is_ok());
    }

    #[test]
    fn named_tables_evaluate() {
        let ch = c(3);
        let max2 = OpTable::from_fn(ch, 2, |t| t[0].max(t[1])).unwrap();
        let reg = Registry::new().with("j", max2.clone()).unwrap();
        let t = Term::parse("(op j (var 2) (op j (var 1) (var 1)))").unwrap();
        assert_eq!(t.eval(&[2, 1], &reg).unwrap(), 2);
        let table = t.to_table(ch, &reg).unwrap();
        assert_eq!(table, max2);
    }

    #[test]
    fn sexpr_round_trip() {
        let src = "(op m:3:2 (proj 4 1) (proj 4 2) (op g (var 3) (var 1)))";
        let t = Term::parse(src).unwrap();
        assert_eq!(t.arity(), 4);
        assert_eq!(t.to_string(), src);
        let again = Term::parse(&t.to_text()).unwrap();
        assert_eq!(again, t);

        let padded = Term::parse("term 4\n(op m:3:2 (var 1) (var 2) (var 3))").unwrap();
        assert_eq!(padded.arity(), 4);
        assert_eq!(Term::parse(&padded.to_text()).unwrap(), padded);
    }

    #[test]
    fn parse_errors() {
        assert!(Term::parse("(var 1").is_err());
        assert!(Term::parse("(foo 1)").is_err());
        assert!(Term::parse("(var 1) (var 2)").is_err());
        assert!(Term::parse("(proj 2 3)").is_err());
        assert!(Term::parse("(op m:3:2 (var 1))").is_err());
    }

    #[test]
    fn depth_and_size() {
        let t = Term::parse("(op m:3:2 (var 1) (op m:3:2 (var 1) (var 2) (var 3)) (var 3))").unwrap();
        assert_eq!(t.depth(), 2);
        assert_eq!(t.size(), 7);
    }

    #[test]
    fn unbounded_eval_rejects_tables() {
        let t = Term::parse("(op f (var 1))").unwrap();
        assert!(matches!(
            t.eval_unbounded(&[1]),
            Err(Error::NonMonotoneSymbol(_))
        ));
        let t = Term::parse("(op m:3:2 (var 1) (var 2) (var 3))").unwrap();
        assert_eq!(t.eval_unbounded(&[10, 1_000, 3]).unwrap(), 10);
    }
}
