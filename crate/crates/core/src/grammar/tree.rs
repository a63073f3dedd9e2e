//! Deterministic parse trees and pumping decompositions.
//!
//! For a unary grammar the parse tree of a length is made canonical by a
//! fixed choice rule: first production in declaration order, smallest left
//! child yield first. [`TreeTables`] precomputes that choice together with
//! the height of every canonical subtree, which makes walking a longest path
//! cheap. A pumping split of a length is found by locating a repeated
//! nonterminal among the lowest nodes of a longest path; cutting the segment
//! between the two occurrences out of the tree leaves a valid parse tree for
//! the shorter residual word, which is what certifies the split.

use super::{CnfGrammar, CnfRhs};
use crate::error::{Error, Result};
use crate::lengths::LengthSet;
use serde::Serialize;
use std::collections::HashSet;

/// One pumping split of a length `l`: `l = p + q` with the whole arithmetic
/// progression `p + i*q` staying inside the language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PumpStep {
    pub p: usize,
    pub q: usize,
}

/// A parse tree of a [`CnfGrammar`]. Leaves read the terminal letter;
/// branches apply a binary rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseTree {
    Leaf {
        label: usize,
    },
    Branch {
        label: usize,
        len: usize,
        left: Box<ParseTree>,
        right: Box<ParseTree>,
    },
}

impl ParseTree {
    pub fn label(&self) -> usize {
        match self {
            ParseTree::Leaf { label } | ParseTree::Branch { label, .. } => *label,
        }
    }

    /// Number of terminal leaves.
    pub fn yield_len(&self) -> usize {
        match self {
            ParseTree::Leaf { .. } => 1,
            ParseTree::Branch { len, .. } => *len,
        }
    }

    pub fn children(&self) -> Option<(&ParseTree, &ParseTree)> {
        match self {
            ParseTree::Leaf { .. } => None,
            ParseTree::Branch { left, right, .. } => Some((left, right)),
        }
    }

    /// Checks that every node matches a rule of `g` and that cached yields
    /// are consistent.
    pub fn validate(&self, g: &CnfGrammar) -> bool {
        match self {
            ParseTree::Leaf { label } => g
                .rules_of(*label)
                .iter()
                .any(|&r| matches!(g.rules()[r].rhs, CnfRhs::Terminal)),
            ParseTree::Branch {
                label,
                len,
                left,
                right,
            } => {
                *len == left.yield_len() + right.yield_len()
                    && g.rules_of(*label).iter().any(|&r| {
                        matches!(g.rules()[r].rhs, CnfRhs::Pair(b, c)
                            if b == left.label() && c == right.label())
                    })
                    && left.validate(g)
                    && right.validate(g)
            }
        }
    }
}

const NONE: u64 = 0;

/// Precomputed canonical decompositions: for every derivable pair
/// `(nonterminal, length <= bound)` the chosen rule and split, plus the
/// height of the canonical tree. Rule choice is by declaration order, split
/// choice by smallest left yield.
pub(crate) struct TreeTables {
    bound: usize,
    pub(crate) lengths: Vec<LengthSet>,
    choice: Vec<u64>,
    height: Vec<u32>,
}

#[derive(Clone, Copy)]
enum Choice {
    Terminal,
    Pair {
        left: usize,
        right: usize,
        split: usize,
    },
}

impl TreeTables {
    pub(crate) fn build(g: &CnfGrammar, bound: usize) -> TreeTables {
        let n = g.nonterminal_count();
        let lengths = g.length_table(bound);
        let mut choice = vec![NONE; n * (bound + 1)];
        let mut height = vec![0u32; n * (bound + 1)];
        let idx = |a: usize, len: usize| a * (bound + 1) + len;

        for len in 1..=bound {
            for a in 0..n {
                if !lengths[a].contains(len) {
                    continue;
                }
                let mut found = false;
                'rules: for (pos, &ri) in g.rules_of(a).iter().enumerate() {
                    match g.rules()[ri].rhs {
                        CnfRhs::Terminal => {
                            if len == 1 {
                                choice[idx(a, len)] = (pos as u64 + 1) << 32;
                                height[idx(a, len)] = 1;
                                found = true;
                                break 'rules;
                            }
                        }
                        CnfRhs::Pair(b, c) => {
                            for k in 1..len {
                                if lengths[b].contains(k) && lengths[c].contains(len - k) {
                                    choice[idx(a, len)] = (pos as u64 + 1) << 32 | k as u64;
                                    let hb = height[idx(b, k)];
                                    let hc = height[idx(c, len - k)];
                                    height[idx(a, len)] = 1 + hb.max(hc);
                                    found = true;
                                    break 'rules;
                                }
                            }
                        }
                    }
                }
                debug_assert!(found, "derivable pair without a usable rule");
            }
        }
        TreeTables {
            bound,
            lengths,
            choice,
            height,
        }
    }

    fn decode(&self, g: &CnfGrammar, a: usize, len: usize) -> Choice {
        let raw = self.choice[a * (self.bound + 1) + len];
        debug_assert_ne!(raw, NONE, "no choice recorded for ({a}, {len})");
        let pos = (raw >> 32) as usize - 1;
        let split = (raw & u32::MAX as u64) as usize;
        match g.rules()[g.rules_of(a)[pos]].rhs {
            CnfRhs::Terminal => Choice::Terminal,
            CnfRhs::Pair(b, c) => Choice::Pair {
                left: b,
                right: c,
                split,
            },
        }
    }

    fn height(&self, a: usize, len: usize) -> u32 {
        self.height[a * (self.bound + 1) + len]
    }

    /// Whether `a^len` is derivable from the start symbol (`len >= 1`).
    pub(crate) fn derivable(&self, g: &CnfGrammar, len: usize) -> bool {
        len >= 1 && self.lengths[g.start()].contains(len)
    }

    /// The language's length set up to the table bound, epsilon included.
    pub(crate) fn language_lengths(&self, g: &CnfGrammar) -> LengthSet {
        let mut out = self.lengths[g.start()].clone();
        if g.accepts_epsilon() {
            out.insert(0);
        }
        out
    }

    /// Walks the longest path of the canonical tree for `(start, len)` and
    /// returns the `(label, yield)` pairs of its lowest `window` nodes,
    /// bottom-most last.
    fn low_window(&self, g: &CnfGrammar, len: usize, window: usize) -> Vec<(usize, usize)> {
        let mut path: Vec<(usize, usize)> = Vec::new();
        let (mut a, mut n) = (g.start(), len);
        loop {
            path.push((a, n));
            match self.decode(g, a, n) {
                Choice::Terminal => break,
                Choice::Pair { left, right, split } => {
                    if self.height(left, split) >= self.height(right, n - split) {
                        a = left;
                        n = split;
                    } else {
                        a = right;
                        n -= split;
                    }
                }
            }
        }
        let cut = path.len().saturating_sub(window);
        path.split_off(cut)
    }

    /// Pumping split by tree surgery: among the lowest `|V| + 1` nodes of a
    /// longest path, the lowest repeated nonterminal pair whose yield
    /// difference `q` satisfies `0 < q <= b`. Returns `None` when no such
    /// pair exists (possible only for user-supplied `b` smaller than the
    /// grammar's own pumping constant).
    pub(crate) fn decompose(&self, g: &CnfGrammar, len: usize, b: usize) -> Option<PumpStep> {
        let window = self.low_window(g, len, g.nonterminal_count() + 1);
        find_pair(&window, b).map(|q| PumpStep { p: len - q, q })
    }
}

/// Scans a low window (bottom-most node last) for the lowest repeated-label
/// pair with yield difference in `(0, b]`.
fn find_pair(window: &[(usize, usize)], b: usize) -> Option<usize> {
    let last = window.len() - 1;
    for j in 1..window.len() {
        for i in 0..j {
            let upper = window[last - j];
            let lower = window[last - i];
            if upper.0 == lower.0 {
                let q = upper.1 - lower.1;
                if q >= 1 && q <= b {
                    return Some(q);
                }
            }
        }
    }
    None
}

impl CnfGrammar {
    /// The canonical parse tree for `a^len`. Deterministic: repeated calls
    /// yield structurally identical trees.
    pub fn parse_tree(&self, len: usize) -> Result<ParseTree> {
        let tables = TreeTables::build(self, len);
        if !tables.derivable(self, len) {
            return Err(Error::NotInLanguage { length: len });
        }
        Ok(build_tree(self, &tables, self.start(), len))
    }

    /// Pumping split of `len` under the constant `b`, certified by parse-tree
    /// surgery. Requires `len >= b` and `a^len` in the language.
    pub fn pump_decompose(&self, len: usize, b: usize) -> Result<PumpStep> {
        let tables = TreeTables::build(self, len);
        if !tables.derivable(self, len) {
            return Err(Error::NotInLanguage { length: len });
        }
        if len < b {
            return Err(Error::BelowConstant { length: len, b });
        }
        tables
            .decompose(self, len, b)
            .ok_or_else(|| Error::WitnessViolation {
                length: len,
                reason: format!("no repeated nonterminal with pump at most {b} on a longest path"),
            })
    }
}

/// Iterative construction of the canonical tree (the trees are spine-shaped,
/// so recursion depth would track the yield).
fn build_tree(g: &CnfGrammar, tables: &TreeTables, a: usize, len: usize) -> ParseTree {
    enum Task {
        Open(usize, usize),
        Close(usize, usize),
    }
    let mut tasks = vec![Task::Open(a, len)];
    let mut out: Vec<ParseTree> = Vec::new();
    while let Some(task) = tasks.pop() {
        match task {
            Task::Open(a, n) => match tables.decode(g, a, n) {
                Choice::Terminal => out.push(ParseTree::Leaf { label: a }),
                Choice::Pair { left, right, split } => {
                    tasks.push(Task::Close(a, n));
                    tasks.push(Task::Open(right, n - split));
                    tasks.push(Task::Open(left, split));
                }
            },
            Task::Close(a, n) => {
                let right = out.pop().expect("right subtree");
                let left = out.pop().expect("left subtree");
                out.push(ParseTree::Branch {
                    label: a,
                    len: n,
                    left: Box::new(left),
                    right: Box::new(right),
                });
            }
        }
    }
    debug_assert_eq!(out.len(), 1);
    out.pop().unwrap()
}

const NIL: u32 = u32::MAX;

/// A mutable arena tree supporting repeated pump-segment excision. Each
/// excision replaces the subtree at the upper occurrence of a repeated
/// nonterminal by the subtree at the lower occurrence; the remaining tree is
/// a valid parse of the residual length. The lower node is recorded as an
/// anchor: if every anchor survives to the end of the descent, each excised
/// segment can be re-inserted at its anchor independently of the others.
pub(crate) struct Surgeon {
    window: usize,
    label: Vec<u32>,
    yld: Vec<u32>,
    hgt: Vec<u32>,
    left: Vec<u32>,
    right: Vec<u32>,
    parent: Vec<u32>,
    root: u32,
    total: usize,
    anchors: HashSet<u32>,
    anchors_alive: bool,
    path_buf: Vec<u32>,
}

impl Surgeon {
    pub(crate) fn build(g: &CnfGrammar, tables: &TreeTables, z: usize) -> Surgeon {
        let mut s = Surgeon {
            window: g.nonterminal_count() + 1,
            label: Vec::new(),
            yld: Vec::new(),
            hgt: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
            parent: Vec::new(),
            root: 0,
            total: z,
            anchors: HashSet::new(),
            anchors_alive: true,
            path_buf: Vec::new(),
        };
        // Iterative build from the choice tables; children know their parent
        // slot up front.
        let mut stack: Vec<(usize, usize, u32, bool)> = vec![(g.start(), z, NIL, false)];
        while let Some((a, n, parent, is_left)) = stack.pop() {
            let id = s.label.len() as u32;
            s.label.push(a as u32);
            s.yld.push(n as u32);
            s.hgt.push(tables.height(a, n));
            s.left.push(NIL);
            s.right.push(NIL);
            s.parent.push(parent);
            if parent == NIL {
                s.root = id;
            } else if is_left {
                s.left[parent as usize] = id;
            } else {
                s.right[parent as usize] = id;
            }
            if let Choice::Pair { left, right, split } = tables.decode(g, a, n) {
                stack.push((right, n - split, id, false));
                stack.push((left, split, id, true));
            }
        }
        s
    }

    pub(crate) fn total(&self) -> usize {
        self.total
    }

    /// Whether every anchor recorded so far is still part of the tree.
    pub(crate) fn certified(&self) -> bool {
        self.anchors_alive
    }

    /// Finds the lowest repeated-label pair with `0 < q <= b` among the
    /// lowest window nodes of a longest path, extends it upward along the
    /// path while the same label recurs with the same yield gap, and cuts
    /// the whole run out in a single splice. The run is capped so that only
    /// the final residual may fall below `b`. Returns the splits realized by
    /// the run (earliest first), or `None` when the current tree has no
    /// admissible pair.
    pub(crate) fn excise_run(&mut self, b: usize) -> Option<Vec<PumpStep>> {
        // Longest path from the root, following the taller child (left on ties).
        self.path_buf.clear();
        let mut v = self.root;
        loop {
            self.path_buf.push(v);
            let (l, r) = (self.left[v as usize], self.right[v as usize]);
            if l == NIL {
                break;
            }
            v = if self.hgt[l as usize] >= self.hgt[r as usize] {
                l
            } else {
                r
            };
        }
        let len = self.path_buf.len();
        let at = |d: usize| self.path_buf[len - 1 - d];
        let w = self.window.min(len);
        let mut found: Option<(usize, usize, usize)> = None;
        'search: for j in 1..w {
            for i in 0..j {
                let (upper, lower) = (at(j), at(i));
                if self.label[upper as usize] == self.label[lower as usize] {
                    let q = (self.yld[upper as usize] - self.yld[lower as usize]) as usize;
                    if q >= 1 && q <= b {
                        found = Some((i, j, q));
                        break 'search;
                    }
                }
            }
        }
        let (i, j, q) = found?;
        let lower = at(i);
        let gap = j - i;

        // Extend the pair into a run of occurrences with identical gaps.
        let mut count = 1usize;
        while i + (count + 1) * gap < len {
            let next = at(i + (count + 1) * gap);
            let prev = at(i + count * gap);
            if self.label[next as usize] != self.label[lower as usize]
                || (self.yld[next as usize] - self.yld[prev as usize]) as usize != q
            {
                break;
            }
            count += 1;
        }
        // The descent stops at the first residual below b, so later cuts of
        // the run would never be asked for.
        count = count.min((self.total - b) / q + 1);
        let upper = at(i + count * gap);
        let removed = count * q;

        // Anchors that sit strictly inside the excised segment die with it.
        let mut stack = vec![upper];
        while let Some(nd) = stack.pop() {
            if nd == lower {
                continue;
            }
            if self.anchors.contains(&nd) {
                self.anchors_alive = false;
            }
            let (l, r) = (self.left[nd as usize], self.right[nd as usize]);
            if l != NIL {
                stack.push(l);
                stack.push(r);
            }
        }

        // Splice the lower subtree into the upper position.
        let p = self.parent[upper as usize];
        if p == NIL {
            self.root = lower;
            self.parent[lower as usize] = NIL;
        } else {
            if self.left[p as usize] == upper {
                self.left[p as usize] = lower;
            } else {
                self.right[p as usize] = lower;
            }
            self.parent[lower as usize] = p;
        }
        // Yields shrink along the whole ancestor chain; heights are
        // recomputed from the (already-final) children.
        let mut anc = p;
        while anc != NIL {
            self.yld[anc as usize] -= removed as u32;
            let (l, r) = (self.left[anc as usize], self.right[anc as usize]);
            self.hgt[anc as usize] = 1 + self.hgt[l as usize].max(self.hgt[r as usize]);
            anc = self.parent[anc as usize];
        }

        let steps = (1..=count)
            .map(|k| PumpStep {
                p: self.total - k * q,
                q,
            })
            .collect();
        self.total -= removed;
        self.anchors.insert(lower);
        Some(steps)
    }
}
