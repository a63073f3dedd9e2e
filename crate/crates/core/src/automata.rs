//! Weighted unary automata, canonical lasso DFAs and eventually periodic
//! sets.
//!
//! Transitions of a [`UnaryNfa`] carry a weight: the number of letters the
//! edge consumes. A pump tuple `<p, q_0, ..., q_k>` becomes a two-state NFA
//! whose arc pre-charges one copy of every generator (`p + q_0 + ... + q_k`)
//! and whose self-loops supply the remaining copies.
//!
//! Every deterministic unary automaton is a tail of states followed by a
//! cycle, so [`UnaryDfa`] stores exactly that shape. Minimization reduces
//! the cycle to the minimal period of its acceptance word and then retracts
//! the tail as far as the periodic pattern extends backward, which yields a
//! unique canonical automaton per language. [`EventuallyPeriodicSet`] is the
//! same information viewed as a set of naturals and is the lingua franca of
//! the pipeline: exact unions, restrictions and finite patches, plus regular
//! expression output.

use crate::error::{Error, Result};
use crate::pumping::PumpTuple;
use serde::ser::{Serialize, SerializeStruct, Serializer};
use serde::Serialize as DeriveSerialize;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// A transition consuming `weight` letters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Transition {
    pub from: usize,
    pub weight: usize,
    pub to: usize,
}

/// A nondeterministic automaton over `{a}` with weighted transitions.
/// Zero-weight transitions are allowed but must not form a cycle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnaryNfa {
    num_states: usize,
    transitions: Vec<Transition>,
    initials: Vec<usize>,
    finals: Vec<usize>,
}

impl UnaryNfa {
    pub fn new(
        num_states: usize,
        transitions: Vec<Transition>,
        initials: Vec<usize>,
        finals: Vec<usize>,
    ) -> Result<Self> {
        if num_states == 0 {
            return Err(Error::InvalidAutomaton("automaton has no states".into()));
        }
        for t in &transitions {
            if t.from >= num_states || t.to >= num_states {
                return Err(Error::InvalidAutomaton(format!(
                    "transition {} -> {} out of range",
                    t.from, t.to
                )));
            }
        }
        for &s in initials.iter().chain(&finals) {
            if s >= num_states {
                return Err(Error::InvalidAutomaton(format!("state {s} out of range")));
            }
        }
        // Reject cycles made only of zero-weight transitions.
        let mut color = vec![0u8; num_states]; // 0 white, 1 gray, 2 black
        let zero_succ: Vec<Vec<usize>> = {
            let mut adj = vec![Vec::new(); num_states];
            for t in &transitions {
                if t.weight == 0 {
                    adj[t.from].push(t.to);
                }
            }
            adj
        };
        for start in 0..num_states {
            if color[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            color[start] = 1;
            while let Some(&mut (v, ref mut i)) = stack.last_mut() {
                if *i < zero_succ[v].len() {
                    let w = zero_succ[v][*i];
                    *i += 1;
                    match color[w] {
                        0 => {
                            color[w] = 1;
                            stack.push((w, 0));
                        }
                        1 => {
                            return Err(Error::InvalidAutomaton(
                                "cycle of zero-weight transitions".into(),
                            ))
                        }
                        _ => {}
                    }
                } else {
                    color[v] = 2;
                    stack.pop();
                }
            }
        }
        Ok(UnaryNfa {
            num_states,
            transitions,
            initials,
            finals,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initials(&self) -> &[usize] {
        &self.initials
    }

    pub fn finals(&self) -> &[usize] {
        &self.finals
    }

    /// Exact acceptance for all lengths `0..=max`, by dynamic programming
    /// over (state, consumed length) with zero-weight closure at every step.
    pub fn accept_vector(&self, max: usize) -> Vec<bool> {
        let mut reach = vec![vec![false; self.num_states]; max + 1];
        for &s in &self.initials {
            reach[0][s] = true;
        }
        let mut out = vec![false; max + 1];
        for len in 0..=max {
            // Zero-weight closure at this consumed length.
            loop {
                let mut changed = false;
                for t in &self.transitions {
                    if t.weight == 0 && reach[len][t.from] && !reach[len][t.to] {
                        reach[len][t.to] = true;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            out[len] = self.finals.iter().any(|&s| reach[len][s]);
            for t in &self.transitions {
                if t.weight >= 1 && len + t.weight <= max && reach[len][t.from] {
                    reach[len + t.weight][t.to] = true;
                }
            }
        }
        out
    }

    /// Whether the automaton accepts `a^n`.
    pub fn accepts(&self, n: usize) -> bool {
        self.accept_vector(n)[n]
    }
}

/// The two-state automaton of a pump tuple: an arc from the initial state
/// pre-charging `p + q_0 + ... + q_k`, then one self-loop per generator on
/// the final state. It accepts exactly
/// `{p + i_0 q_0 + ... + i_k q_k : all i_j > 0}`.
pub fn tuple_to_nfa(tuple: &PumpTuple) -> UnaryNfa {
    let mut transitions = vec![Transition {
        from: 0,
        weight: tuple.min_member(),
        to: 1,
    }];
    for &q in tuple.qs() {
        transitions.push(Transition {
            from: 1,
            weight: q,
            to: 1,
        });
    }
    UnaryNfa::new(2, transitions, vec![0], vec![1]).expect("tuple automaton is well formed")
}

/// Union by a fresh initial state with zero-weight edges into every
/// component. An empty list yields an automaton for the empty language.
pub fn nfa_union(parts: &[UnaryNfa]) -> UnaryNfa {
    let mut transitions = Vec::new();
    let mut finals = Vec::new();
    let mut offset = 1usize;
    for nfa in parts {
        for &i in &nfa.initials {
            transitions.push(Transition {
                from: 0,
                weight: 0,
                to: offset + i,
            });
        }
        for t in &nfa.transitions {
            transitions.push(Transition {
                from: offset + t.from,
                weight: t.weight,
                to: offset + t.to,
            });
        }
        finals.extend(nfa.finals.iter().map(|&f| offset + f));
        offset += nfa.num_states;
    }
    UnaryNfa::new(offset, transitions, vec![0], finals).expect("union preserves well-formedness")
}

/// A deterministic unary automaton in lasso form: states `0..tail+cycle`,
/// where reading `a^n` ends in state `n` for `n < tail + cycle` and in state
/// `tail + (n - tail) % cycle` afterwards.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct UnaryDfa {
    tail: usize,
    cycle: usize,
    accepting: Vec<bool>,
}

impl UnaryDfa {
    pub fn new(tail: usize, cycle: usize, accepting: Vec<bool>) -> Result<Self> {
        if cycle == 0 {
            return Err(Error::InvalidAutomaton("cycle length must be >= 1".into()));
        }
        if accepting.len() != tail + cycle {
            return Err(Error::InvalidAutomaton(format!(
                "accepting vector has {} entries, expected tail + cycle = {}",
                accepting.len(),
                tail + cycle
            )));
        }
        Ok(UnaryDfa {
            tail,
            cycle,
            accepting,
        })
    }

    pub fn tail(&self) -> usize {
        self.tail
    }

    pub fn cycle(&self) -> usize {
        self.cycle
    }

    /// Accepting positions, sorted.
    pub fn accepting_positions(&self) -> Vec<usize> {
        (0..self.accepting.len())
            .filter(|&i| self.accepting[i])
            .collect()
    }

    pub fn accepts(&self, n: usize) -> bool {
        let pos = if n < self.tail + self.cycle {
            n
        } else {
            self.tail + (n - self.tail) % self.cycle
        };
        self.accepting[pos]
    }

    pub fn accept_vector(&self, max: usize) -> Vec<bool> {
        (0..=max).map(|n| self.accepts(n)).collect()
    }

    /// The canonical minimal automaton of the same language: the cycle is
    /// cut to the minimal period of its acceptance word, then the tail is
    /// retracted while the periodic pattern extends backward.
    pub fn minimize(&self) -> UnaryDfa {
        let word: Vec<bool> = self.accepting[self.tail..].to_vec();
        let period = (1..=self.cycle)
            .find(|&d| {
                self.cycle.is_multiple_of(d)
                    && (0..self.cycle).all(|i| word[i] == word[(i + d) % self.cycle])
            })
            .expect("every word has itself as a period");
        let mut tail = self.tail;
        while tail > 0 && self.accepts(tail - 1) == self.accepts(tail - 1 + period) {
            tail -= 1;
        }
        let accepting = (0..tail + period).map(|n| self.accepts(n)).collect();
        UnaryDfa {
            tail,
            cycle: period,
            accepting,
        }
    }

    /// Reads the lasso as an eventually periodic set (canonicalizing).
    pub fn to_eps(&self) -> EventuallyPeriodicSet {
        let low = (0..self.tail).filter(|&n| self.accepting[n]).collect();
        let cyc = (0..self.cycle)
            .filter(|&r| self.accepting[self.tail + r])
            .collect();
        EventuallyPeriodicSet::new(self.tail, self.cycle, low, cyc)
    }
}

impl fmt::Display for UnaryDfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tail={} cycle={} accepting={{{}}}",
            self.tail,
            self.cycle,
            self.accepting_positions()
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

impl Serialize for UnaryDfa {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("UnaryDfa", 3)?;
        s.serialize_field("tail", &self.tail)?;
        s.serialize_field("cycle", &self.cycle)?;
        s.serialize_field("accepting", &self.accepting_positions())?;
        s.end()
    }
}

/// Subset construction after expanding weighted edges into unit chains. The
/// successor of a state set is deterministic, so the reachable sets form a
/// tail followed by a cycle; the result records acceptance along that lasso.
pub fn determinize(nfa: &UnaryNfa) -> UnaryDfa {
    // Expand weights >= 2 into chains of fresh states.
    let mut total = nfa.num_states;
    let mut unit_succ: Vec<Vec<usize>> = vec![Vec::new(); nfa.num_states];
    let mut eps_succ: Vec<Vec<usize>> = vec![Vec::new(); nfa.num_states];
    for t in &nfa.transitions {
        match t.weight {
            0 => eps_succ[t.from].push(t.to),
            1 => unit_succ[t.from].push(t.to),
            w => {
                let mut prev = t.from;
                for _ in 0..w - 1 {
                    unit_succ.push(Vec::new());
                    eps_succ.push(Vec::new());
                    unit_succ[prev].push(total);
                    prev = total;
                    total += 1;
                }
                unit_succ[prev].push(t.to);
            }
        }
    }
    let words = total.div_ceil(64);
    let closure = |set: &mut Vec<u64>| {
        let mut queue: Vec<usize> = (0..total)
            .filter(|&s| set[s / 64] >> (s % 64) & 1 == 1)
            .collect();
        while let Some(s) = queue.pop() {
            if s >= nfa.num_states {
                continue;
            }
            for &t in &eps_succ[s] {
                if set[t / 64] >> (t % 64) & 1 == 0 {
                    set[t / 64] |= 1 << (t % 64);
                    queue.push(t);
                }
            }
        }
    };
    let is_accepting = |set: &[u64]| nfa.finals.iter().any(|&s| set[s / 64] >> (s % 64) & 1 == 1);

    let mut cur = vec![0u64; words];
    for &s in &nfa.initials {
        cur[s / 64] |= 1 << (s % 64);
    }
    closure(&mut cur);

    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut accepting: Vec<bool> = Vec::new();
    loop {
        if let Some(&idx) = seen.get(&cur) {
            let tail = idx;
            let cycle = accepting.len() - idx;
            return UnaryDfa {
                tail,
                cycle,
                accepting,
            };
        }
        seen.insert(cur.clone(), accepting.len());
        accepting.push(is_accepting(&cur));
        let mut next = vec![0u64; words];
        for s in 0..total {
            if cur[s / 64] >> (s % 64) & 1 == 1 {
                for &t in &unit_succ[s] {
                    next[t / 64] |= 1 << (t % 64);
                }
            }
        }
        closure(&mut next);
        cur = next;
    }
}

/// An eventually periodic set of naturals in canonical form: membership of
/// `n < threshold` is listed explicitly in `low`, and beyond the threshold
/// it depends only on `(n - threshold) % period`. Canonical means the period
/// is minimal for the eventual part and the threshold is minimal for that
/// period. These are exactly the unary regular languages.
#[derive(Clone, Debug, PartialEq, Eq, Hash, DeriveSerialize)]
pub struct EventuallyPeriodicSet {
    threshold: usize,
    period: usize,
    low: BTreeSet<usize>,
    cyc: BTreeSet<usize>,
}

impl EventuallyPeriodicSet {
    /// Builds the set and canonicalizes. `low` must lie below `threshold`
    /// and `cyc` below `period`.
    pub fn new(
        threshold: usize,
        period: usize,
        low: BTreeSet<usize>,
        cyc: BTreeSet<usize>,
    ) -> Self {
        assert!(period >= 1, "period must be positive");
        assert!(
            low.iter().all(|&n| n < threshold),
            "low members beyond threshold"
        );
        assert!(cyc.iter().all(|&r| r < period), "residues beyond period");

        // Minimal period: smallest divisor under which the residue set is
        // shift-invariant.
        let d = (1..=period)
            .find(|&d| {
                period.is_multiple_of(d)
                    && (0..period).all(|r| cyc.contains(&r) == cyc.contains(&((r + d) % period)))
            })
            .expect("period is always a period of itself");
        let mut cyc: BTreeSet<usize> = cyc.into_iter().filter(|&r| r < d).collect();
        let mut threshold = threshold;
        let mut low = low;

        // Minimal threshold: absorb trailing low members that already follow
        // the cycle. Lowering the threshold by one shifts every residue up.
        while threshold > 0 {
            let prev = threshold - 1;
            let in_low = low.contains(&prev);
            let predicted = cyc.contains(&(d - 1));
            if in_low != predicted {
                break;
            }
            low.remove(&prev);
            threshold = prev;
            cyc = cyc.iter().map(|&r| (r + 1) % d).collect();
        }

        EventuallyPeriodicSet {
            threshold,
            period: d,
            low,
            cyc,
        }
    }

    pub fn empty() -> Self {
        EventuallyPeriodicSet {
            threshold: 0,
            period: 1,
            low: BTreeSet::new(),
            cyc: BTreeSet::new(),
        }
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn low(&self) -> &BTreeSet<usize> {
        &self.low
    }

    pub fn cyc(&self) -> &BTreeSet<usize> {
        &self.cyc
    }

    pub fn contains(&self, n: usize) -> bool {
        if n < self.threshold {
            self.low.contains(&n)
        } else {
            self.cyc.contains(&((n - self.threshold) % self.period))
        }
    }

    pub fn is_empty(&self) -> bool {
        self.low.is_empty() && self.cyc.is_empty()
    }

    pub fn accept_vector(&self, max: usize) -> Vec<bool> {
        (0..=max).map(|n| self.contains(n)).collect()
    }

    /// Exact union.
    pub fn union(&self, other: &EventuallyPeriodicSet) -> EventuallyPeriodicSet {
        let threshold = self.threshold.max(other.threshold);
        let period = lcm(self.period, other.period);
        let low = (0..threshold)
            .filter(|&n| self.contains(n) || other.contains(n))
            .collect();
        let cyc = (0..period)
            .filter(|&r| self.contains(threshold + r) || other.contains(threshold + r))
            .collect();
        EventuallyPeriodicSet::new(threshold, period, low, cyc)
    }

    /// Drops every member below `min`.
    pub fn restrict_min(&self, min: usize) -> EventuallyPeriodicSet {
        let threshold = self.threshold.max(min);
        let low = (min..threshold).filter(|&n| self.contains(n)).collect();
        let cyc = (0..self.period)
            .filter(|&r| self.contains(threshold + r))
            .collect();
        EventuallyPeriodicSet::new(threshold, self.period, low, cyc)
    }

    /// Injects a finite set of members.
    pub fn add_finite(&self, extra: &BTreeSet<usize>) -> EventuallyPeriodicSet {
        let threshold = self
            .threshold
            .max(extra.iter().next_back().map_or(0, |&m| m + 1));
        let low = (0..threshold)
            .filter(|&n| self.contains(n) || extra.contains(&n))
            .collect();
        let cyc = (0..self.period)
            .filter(|&r| self.contains(threshold + r))
            .collect();
        EventuallyPeriodicSet::new(threshold, self.period, low, cyc)
    }

    /// The canonical lasso automaton of this set.
    pub fn to_dfa(&self) -> UnaryDfa {
        UnaryDfa {
            tail: self.threshold,
            cycle: self.period,
            accepting: (0..self.threshold + self.period)
                .map(|n| self.contains(n))
                .collect(),
        }
    }

    /// A regular expression over `{a}` denoting the set: one `a^m` atom per
    /// low member and one `a^{t+r}(a^p)*` term per cyclic residue.
    pub fn to_regex(&self) -> String {
        if self.is_empty() {
            return "∅".to_string();
        }
        let mut parts: Vec<String> = Vec::new();
        for &m in &self.low {
            parts.push(if m == 0 {
                "ε".to_string()
            } else {
                "a".repeat(m)
            });
        }
        for &r in &self.cyc {
            parts.push(format!(
                "{}({})*",
                "a".repeat(self.threshold + r),
                "a".repeat(self.period)
            ));
        }
        parts.join("|")
    }
}

impl fmt::Display for EventuallyPeriodicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let fmt_set = |s: &BTreeSet<usize>| {
            s.iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        write!(
            f,
            "threshold={} period={} low={{{}}} cyc={{{}}}",
            self.threshold,
            self.period,
            fmt_set(&self.low),
            fmt_set(&self.cyc)
        )
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}
