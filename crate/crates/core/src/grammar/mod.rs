//! Context-free grammars over the singleton terminal alphabet `{a}`.
//!
//! Grammars are parsed from a small line-based format, cleaned of useless
//! symbols, and normalized to Chomsky normal form. Because the alphabet has a
//! single letter, membership is a predicate on word *lengths*, and the module
//! exposes an exact bounded length oracle ([`CnfGrammar::derivable_lengths`])
//! computed by dynamic programming over (nonterminal, length) pairs.
//!
//! The grammar file format:
//!
//! ```text
//! # comment lines start with '#'
//! start: S          # optional; defaults to the lhs of the first rule
//! S -> a S a | a    # alternatives separated by '|'
//! T -> eps          # 'eps' denotes the empty right-hand side
//! ```
//!
//! Nonterminals are identifiers beginning with an uppercase letter; the only
//! terminal is the letter `a`.

mod tree;

pub use tree::{ParseTree, PumpStep};
pub(crate) use tree::{Surgeon, TreeTables};

use crate::error::{Error, Result};
use crate::lengths::LengthSet;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

/// A grammar symbol: the single terminal letter or an indexed nonterminal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Symbol {
    Terminal,
    Nonterminal(usize),
}

/// One production `lhs -> rhs` (an empty `rhs` derives the empty word).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Production {
    pub lhs: usize,
    pub rhs: Vec<Symbol>,
}

/// A context-free grammar over the terminal alphabet `{a}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnaryGrammar {
    names: Vec<String>,
    start: usize,
    productions: Vec<Production>,
}

fn is_nonterminal_token(tok: &str) -> bool {
    let mut chars = tok.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

impl UnaryGrammar {
    /// Parses grammar source text. See the module docs for the format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut intern = |name: &str, names: &mut Vec<String>| -> usize {
            *index.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                names.len() - 1
            })
        };

        let mut productions: Vec<Production> = Vec::new();
        let mut start_decl: Option<(String, usize)> = None;

        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("start:") {
                if start_decl.is_some() {
                    return Err(Error::Syntax {
                        line: lineno,
                        msg: "duplicate start declaration".into(),
                    });
                }
                let name = rest.trim();
                if !is_nonterminal_token(name) {
                    return Err(Error::Syntax {
                        line: lineno,
                        msg: format!("invalid start symbol '{name}'"),
                    });
                }
                start_decl = Some((name.to_string(), lineno));
                continue;
            }
            let (lhs_txt, rhs_txt) = line.split_once("->").ok_or_else(|| Error::Syntax {
                line: lineno,
                msg: "expected 'X -> ...'".into(),
            })?;
            let lhs_tok = lhs_txt.trim();
            if !is_nonterminal_token(lhs_tok) {
                return Err(Error::Syntax {
                    line: lineno,
                    msg: format!("invalid nonterminal '{lhs_tok}' on the left-hand side"),
                });
            }
            let lhs = intern(lhs_tok, &mut names);
            for alt in rhs_txt.split('|') {
                let toks: Vec<&str> = alt.split_whitespace().collect();
                if toks.is_empty() {
                    return Err(Error::Syntax {
                        line: lineno,
                        msg: "empty alternative (write 'eps' for the empty word)".into(),
                    });
                }
                let rhs = if toks == ["eps"] {
                    Vec::new()
                } else {
                    let mut rhs = Vec::with_capacity(toks.len());
                    for tok in toks {
                        if tok == "a" {
                            rhs.push(Symbol::Terminal);
                        } else if is_nonterminal_token(tok) {
                            rhs.push(Symbol::Nonterminal(intern(tok, &mut names)));
                        } else if tok == "eps" {
                            return Err(Error::Syntax {
                                line: lineno,
                                msg: "'eps' must be the only symbol of its alternative".into(),
                            });
                        } else {
                            return Err(Error::Syntax {
                                line: lineno,
                                msg: format!("unknown terminal '{tok}' (the alphabet is {{a}})"),
                            });
                        }
                    }
                    rhs
                };
                productions.push(Production { lhs, rhs });
            }
        }

        if productions.is_empty() {
            return Err(Error::NoRules);
        }
        let start = match start_decl {
            Some((name, line)) => *index.get(&name).ok_or_else(|| Error::Syntax {
                line,
                msg: format!("start symbol '{name}' does not appear in any rule"),
            })?,
            None => productions[0].lhs,
        };
        Ok(UnaryGrammar {
            names,
            start,
            productions,
        })
    }

    /// Builds a grammar from `(lhs, rhs-token)` pairs using the same token
    /// conventions as the text format.
    pub fn from_rules(start: &str, rules: &[(&str, &[&str])]) -> Result<Self> {
        let mut text = format!("start: {start}\n");
        for (lhs, rhs) in rules {
            let body = if rhs.is_empty() {
                "eps".to_string()
            } else {
                rhs.join(" ")
            };
            text.push_str(&format!("{lhs} -> {body}\n"));
        }
        Self::parse(&text)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn name(&self, nt: usize) -> &str {
        &self.names[nt]
    }

    pub fn nonterminal_count(&self) -> usize {
        self.names.len()
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    /// Removes non-generating and unreachable nonterminals. The generated
    /// language is unchanged. Fails with [`Error::EmptyLanguage`] when the
    /// start symbol derives no word at all.
    pub fn reduce(&self) -> Result<UnaryGrammar> {
        let n = self.names.len();
        let mut generating = vec![false; n];
        loop {
            let mut changed = false;
            for p in &self.productions {
                if !generating[p.lhs]
                    && p.rhs.iter().all(|s| match s {
                        Symbol::Terminal => true,
                        Symbol::Nonterminal(i) => generating[*i],
                    })
                {
                    generating[p.lhs] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if !generating[self.start] {
            return Err(Error::EmptyLanguage {
                start: self.names[self.start].clone(),
            });
        }

        // Reachability over productions whose rhs is entirely generating.
        let mut reachable = vec![false; n];
        reachable[self.start] = true;
        let mut queue = vec![self.start];
        while let Some(a) = queue.pop() {
            for p in &self.productions {
                if p.lhs != a {
                    continue;
                }
                if !p.rhs.iter().all(|s| match s {
                    Symbol::Terminal => true,
                    Symbol::Nonterminal(i) => generating[*i],
                }) {
                    continue;
                }
                for s in &p.rhs {
                    if let Symbol::Nonterminal(i) = s {
                        if !reachable[*i] {
                            reachable[*i] = true;
                            queue.push(*i);
                        }
                    }
                }
            }
        }

        let keep: Vec<bool> = (0..n).map(|i| generating[i] && reachable[i]).collect();
        let mut remap = vec![usize::MAX; n];
        let mut names = Vec::new();
        for i in 0..n {
            if keep[i] {
                remap[i] = names.len();
                names.push(self.names[i].clone());
            }
        }
        let productions = self
            .productions
            .iter()
            .filter(|p| {
                keep[p.lhs]
                    && p.rhs.iter().all(|s| match s {
                        Symbol::Terminal => true,
                        Symbol::Nonterminal(i) => keep[*i],
                    })
            })
            .map(|p| Production {
                lhs: remap[p.lhs],
                rhs: p
                    .rhs
                    .iter()
                    .map(|s| match s {
                        Symbol::Terminal => Symbol::Terminal,
                        Symbol::Nonterminal(i) => Symbol::Nonterminal(remap[*i]),
                    })
                    .collect(),
            })
            .collect();
        Ok(UnaryGrammar {
            names,
            start: remap[self.start],
            productions,
        })
    }

    /// Converts to Chomsky normal form: epsilon elimination, unit elimination,
    /// terminal separation and binarization, followed by a cleanup pass. The
    /// generated length set is preserved; the empty word is tracked by the
    /// [`CnfGrammar::accepts_epsilon`] flag.
    pub fn to_cnf(&self) -> Result<CnfGrammar> {
        let g = self.reduce()?;
        let n = g.names.len();

        // Nullable nonterminals.
        let mut nullable = vec![false; n];
        loop {
            let mut changed = false;
            for p in &g.productions {
                if !nullable[p.lhs]
                    && p.rhs.iter().all(|s| match s {
                        Symbol::Terminal => false,
                        Symbol::Nonterminal(i) => nullable[*i],
                    })
                {
                    nullable[p.lhs] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let accepts_epsilon = nullable[g.start];

        // Epsilon elimination: every way of dropping nullable occurrences.
        let mut rules: Vec<(usize, Vec<Symbol>)> = Vec::new();
        let mut seen: HashSet<(usize, Vec<Symbol>)> = HashSet::new();
        for p in &g.productions {
            let optional: Vec<usize> = p
                .rhs
                .iter()
                .enumerate()
                .filter_map(|(i, s)| match s {
                    Symbol::Nonterminal(a) if nullable[*a] => Some(i),
                    _ => None,
                })
                .collect();
            for mask in 0..(1u32 << optional.len()) {
                let drop: HashSet<usize> = optional
                    .iter()
                    .enumerate()
                    .filter(|(bit, _)| mask >> bit & 1 == 1)
                    .map(|(_, &pos)| pos)
                    .collect();
                let rhs: Vec<Symbol> = p
                    .rhs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !drop.contains(i))
                    .map(|(_, s)| *s)
                    .collect();
                if rhs.is_empty() {
                    continue;
                }
                if seen.insert((p.lhs, rhs.clone())) {
                    rules.push((p.lhs, rhs));
                }
            }
        }

        // Unit elimination: replace `A -> B` chains by B's non-unit rules.
        let unit_target = |rhs: &[Symbol]| match rhs {
            [Symbol::Nonterminal(b)] => Some(*b),
            _ => None,
        };
        let mut closed: Vec<(usize, Vec<Symbol>)> = Vec::new();
        let mut seen: HashSet<(usize, Vec<Symbol>)> = HashSet::new();
        for a in 0..n {
            // Unit-reachable set from `a`, in breadth-first discovery order.
            let mut reach = vec![a];
            let mut in_reach: HashSet<usize> = reach.iter().copied().collect();
            let mut head = 0;
            while head < reach.len() {
                let cur = reach[head];
                head += 1;
                for (lhs, rhs) in &rules {
                    if *lhs == cur {
                        if let Some(b) = unit_target(rhs) {
                            if in_reach.insert(b) {
                                reach.push(b);
                            }
                        }
                    }
                }
            }
            for b in reach {
                for (lhs, rhs) in &rules {
                    if *lhs == b && unit_target(rhs).is_none() {
                        let key = (a, rhs.clone());
                        if seen.insert(key) {
                            closed.push((a, rhs.clone()));
                        }
                    }
                }
            }
        }
        let mut rules = closed;

        let mut names = g.names.clone();
        let mut start = g.start;

        // With the epsilon flag set, the start symbol must not occur on any rhs.
        if accepts_epsilon
            && rules
                .iter()
                .any(|(_, rhs)| rhs.contains(&Symbol::Nonterminal(start)))
        {
            let fresh = fresh_name(&names, &format!("{}0", names[start]));
            names.push(fresh);
            let new_start = names.len() - 1;
            let copied: Vec<(usize, Vec<Symbol>)> = rules
                .iter()
                .filter(|(lhs, _)| *lhs == start)
                .map(|(_, rhs)| (new_start, rhs.clone()))
                .collect();
            rules.extend(copied);
            start = new_start;
        }

        // Terminal separation: in every rhs of length >= 2 replace `a` by a
        // helper nonterminal, then binarize long rules, sharing suffix chains.
        let mut term_helper: Option<usize> = None;
        let mut helper_rules: Vec<(usize, CnfRhs)> = Vec::new();
        let mut out: Vec<(usize, CnfRhs)> = Vec::new();
        let mut suffix_cache: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut chain_counter = 0usize;

        let mut rules_iter = rules.into_iter().collect::<Vec<_>>();
        for (lhs, rhs) in rules_iter.drain(..) {
            match rhs.len() {
                0 => unreachable!("epsilon productions were eliminated"),
                1 => match rhs[0] {
                    Symbol::Terminal => out.push((lhs, CnfRhs::Terminal)),
                    Symbol::Nonterminal(_) => unreachable!("unit productions were eliminated"),
                },
                _ => {
                    let nts: Vec<usize> = rhs
                        .iter()
                        .map(|s| match s {
                            Symbol::Terminal => *term_helper.get_or_insert_with(|| {
                                let name = fresh_name(&names, "A");
                                names.push(name);
                                let id = names.len() - 1;
                                helper_rules.push((id, CnfRhs::Terminal));
                                id
                            }),
                            Symbol::Nonterminal(i) => *i,
                        })
                        .collect();
                    // Right-fold: X -> s0 <s1..sk>, sharing suffix helpers.
                    let mut right = *nts.last().unwrap();
                    for i in (1..nts.len() - 1).rev() {
                        let key: Vec<usize> = std::iter::once(nts[i])
                            .chain(std::iter::once(right))
                            .collect();
                        right = *suffix_cache.entry(key.clone()).or_insert_with(|| {
                            let name = loop {
                                let cand = if chain_counter == 0 {
                                    "X".to_string()
                                } else {
                                    format!("X{chain_counter}")
                                };
                                chain_counter += 1;
                                if !names.contains(&cand) {
                                    break cand;
                                }
                            };
                            names.push(name);
                            let id = names.len() - 1;
                            helper_rules.push((id, CnfRhs::Pair(key[0], key[1])));
                            id
                        });
                    }
                    out.push((lhs, CnfRhs::Pair(nts[0], right)));
                }
            }
        }
        out.extend(helper_rules);

        CnfGrammar::build(names, start, out, accepts_epsilon)
    }
}

fn fresh_name(names: &[String], base: &str) -> String {
    if !names.iter().any(|n| n == base) {
        return base.to_string();
    }
    for k in 1.. {
        let cand = format!("{base}{k}");
        if !names.contains(&cand) {
            return cand;
        }
    }
    unreachable!()
}

impl fmt::Display for UnaryGrammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "start: {}", self.names[self.start])?;
        for p in &self.productions {
            let rhs = if p.rhs.is_empty() {
                "eps".to_string()
            } else {
                p.rhs
                    .iter()
                    .map(|s| match s {
                        Symbol::Terminal => "a".to_string(),
                        Symbol::Nonterminal(i) => self.names[*i].clone(),
                    })
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            writeln!(f, "{} -> {}", self.names[p.lhs], rhs)?;
        }
        Ok(())
    }
}

/// Right-hand side of a Chomsky normal form rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CnfRhs {
    /// `A -> a`
    Terminal,
    /// `A -> B C`
    Pair(usize, usize),
}

/// A rule of a [`CnfGrammar`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CnfRule {
    pub lhs: usize,
    pub rhs: CnfRhs,
}

/// A grammar in Chomsky normal form. Every nonterminal that occurs in a rule
/// is generating and reachable; whether the language contains the empty word
/// is carried by a flag rather than an epsilon production.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfGrammar {
    names: Vec<String>,
    start: usize,
    rules: Vec<CnfRule>,
    by_lhs: Vec<Vec<usize>>,
    accepts_epsilon: bool,
}

impl CnfGrammar {
    fn build(
        names: Vec<String>,
        start: usize,
        rules: Vec<(usize, CnfRhs)>,
        accepts_epsilon: bool,
    ) -> Result<CnfGrammar> {
        // Cleanup: keep only generating and reachable nonterminals.
        let n = names.len();
        let mut generating = vec![false; n];
        loop {
            let mut changed = false;
            for (lhs, rhs) in &rules {
                let ok = match rhs {
                    CnfRhs::Terminal => true,
                    CnfRhs::Pair(b, c) => generating[*b] && generating[*c],
                };
                if ok && !generating[*lhs] {
                    generating[*lhs] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if !generating[start] && !accepts_epsilon {
            return Err(Error::EmptyLanguage {
                start: names[start].clone(),
            });
        }
        let mut reachable = vec![false; n];
        if generating[start] {
            reachable[start] = true;
            let mut queue = vec![start];
            while let Some(a) = queue.pop() {
                for (lhs, rhs) in &rules {
                    if *lhs != a {
                        continue;
                    }
                    if let CnfRhs::Pair(b, c) = rhs {
                        if generating[*b] && generating[*c] {
                            for t in [*b, *c] {
                                if !reachable[t] {
                                    reachable[t] = true;
                                    queue.push(t);
                                }
                            }
                        }
                    }
                }
            }
        }

        let keep: Vec<bool> = (0..n)
            .map(|i| (generating[i] && reachable[i]) || i == start)
            .collect();
        let mut remap = vec![usize::MAX; n];
        let mut out_names = Vec::new();
        for i in 0..n {
            if keep[i] {
                remap[i] = out_names.len();
                out_names.push(names[i].clone());
            }
        }
        let mut out_rules = Vec::new();
        for (lhs, rhs) in &rules {
            let ok = keep[*lhs]
                && generating[*lhs]
                && match rhs {
                    CnfRhs::Terminal => true,
                    CnfRhs::Pair(b, c) => keep[*b] && keep[*c] && generating[*b] && generating[*c],
                };
            if ok && reachable[*lhs] {
                out_rules.push(CnfRule {
                    lhs: remap[*lhs],
                    rhs: match rhs {
                        CnfRhs::Terminal => CnfRhs::Terminal,
                        CnfRhs::Pair(b, c) => CnfRhs::Pair(remap[*b], remap[*c]),
                    },
                });
            }
        }

        let mut by_lhs = vec![Vec::new(); out_names.len()];
        for (i, r) in out_rules.iter().enumerate() {
            by_lhs[r.lhs].push(i);
        }
        Ok(CnfGrammar {
            names: out_names,
            start: remap[start],
            rules: out_rules,
            by_lhs,
            accepts_epsilon,
        })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn name(&self, nt: usize) -> &str {
        &self.names[nt]
    }

    pub fn nonterminal_count(&self) -> usize {
        self.names.len()
    }

    pub fn rules(&self) -> &[CnfRule] {
        &self.rules
    }

    /// Rule indices of `nt` in declaration order.
    pub(crate) fn rules_of(&self, nt: usize) -> &[usize] {
        &self.by_lhs[nt]
    }

    pub fn accepts_epsilon(&self) -> bool {
        self.accepts_epsilon
    }

    /// The pumping constant `2^|V|` for `|V|` nonterminals: any derivation of
    /// a word at least this long repeats a nonterminal along a longest path
    /// of its parse tree.
    pub fn pumping_constant(&self) -> usize {
        let v = self.names.len();
        assert!(v < usize::BITS as usize - 1, "too many nonterminals");
        1usize << v
    }

    /// Bounded length oracle: the set of `n <= max` such that `a^n` is in the
    /// language.
    pub fn derivable_lengths(&self, max: usize) -> LengthSet {
        let table = self.length_table(max);
        let mut out = table
            .get(self.start)
            .cloned()
            .unwrap_or_else(|| LengthSet::empty(max));
        if self.accepts_epsilon {
            out.insert(0);
        }
        out
    }

    /// Per-nonterminal derivable-length sets up to `max`, by fixpoint over
    /// the sumset equations of the binary rules.
    pub(crate) fn length_table(&self, max: usize) -> Vec<LengthSet> {
        let n = self.names.len();
        let mut sets = vec![LengthSet::empty(max); n];
        if max >= 1 {
            for r in &self.rules {
                if let CnfRhs::Terminal = r.rhs {
                    sets[r.lhs].insert(1);
                }
            }
        }
        loop {
            let mut changed = false;
            for r in &self.rules {
                if let CnfRhs::Pair(b, c) = r.rhs {
                    // Sumset of sets[b] and sets[c], iterating the smaller side.
                    let (small, big) = if sets[b].count() <= sets[c].count() {
                        (b, c)
                    } else {
                        (c, b)
                    };
                    let mut add = LengthSet::empty(max);
                    let shifts: Vec<usize> = sets[small].iter().collect();
                    for k in shifts {
                        add.or_shifted(&sets[big], k);
                    }
                    changed |= or_into(&mut sets, r.lhs, &add);
                }
            }
            if !changed {
                break;
            }
        }
        sets
    }

    /// Parse-tree membership for a single length (convenience wrapper).
    pub fn derives_length(&self, n: usize) -> bool {
        self.derivable_lengths(n).contains(n)
    }

    /// Sorted members of the language up to `max`.
    pub fn lengths_up_to(&self, max: usize) -> BTreeSet<usize> {
        self.derivable_lengths(max).iter().collect()
    }
}

fn or_into(sets: &mut [LengthSet], target: usize, add: &LengthSet) -> bool {
    let before = sets[target].count();
    sets[target].union_with(add);
    sets[target].count() != before
}

impl fmt::Display for CnfGrammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "start: {}{}",
            self.names[self.start],
            if self.accepts_epsilon { " (+ eps)" } else { "" }
        )?;
        for r in &self.rules {
            match r.rhs {
                CnfRhs::Terminal => writeln!(f, "{} -> a", self.names[r.lhs])?,
                CnfRhs::Pair(b, c) => writeln!(
                    f,
                    "{} -> {} {}",
                    self.names[r.lhs], self.names[b], self.names[c]
                )?,
            }
        }
        Ok(())
    }
}
