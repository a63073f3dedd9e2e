//! Pumping witnesses and the tuple generation descent.
//!
//! A unary language with pumping constant `b` splits every member length
//! `l >= b` as `l = p + q`, `0 < q <= b`, with the progression `p + i*q`
//! contained in the language. Iterating the split on the residual `p` until
//! it drops below `b` yields a trace `(p_0, q_0), ..., (p_h, q_h)`; grouping
//! equal `q` values turns the trace into a tuple `<p_h, q_0 < ... < q_k>`
//! whose language `{p_h + i_0 q_0 + ... + i_k q_k : all i_j > 0}` contains
//! the original length. Only finitely many tuples exist for a given `b`, so
//! the members at or above `b` are covered by a finite union of such
//! languages; that covering is the core of the regularization pipeline.

pub use crate::grammar::PumpStep;

use crate::error::{Error, Result};
use crate::grammar::{CnfGrammar, Surgeon, TreeTables};
use crate::lengths::LengthSet;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

/// How successive splits of a descent are obtained for grammar-backed
/// sources.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PiMode {
    /// Each split excises the pumped segment from the running parse tree, so
    /// the next split works on the residual tree rather than a fresh parse.
    /// Keeps enough structure to certify tuples whose excised segments stay
    /// independent.
    Lineage,
    /// Each residual length is split from scratch (re-parsed for grammars,
    /// or handed to the witness function for oracle sources).
    Literal,
}

impl fmt::Display for PiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PiMode::Lineage => "lineage",
            PiMode::Literal => "literal",
        })
    }
}

impl std::str::FromStr for PiMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lineage" => Ok(PiMode::Lineage),
            "literal" => Ok(PiMode::Literal),
            other => Err(format!(
                "unknown pi mode '{other}' (use lineage or literal)"
            )),
        }
    }
}

/// A user-supplied split function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PiSpec {
    /// `pi(l) = (l - q, q)` for a fixed `q`.
    Affine { q: usize },
    /// Explicit table `l -> (p, q)`. Missing entries are an input error.
    Table(BTreeMap<usize, (usize, usize)>),
}

/// A pumping witness: the constant `b` plus a split function for lengths
/// `>= b`. Grammar-backed sources derive theirs from parse trees; witnesses
/// are for oracle-backed sources and for overriding the derived machinery.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PumpingWitness {
    pub b: usize,
    pub pi: PiSpec,
}

impl PumpingWitness {
    /// Parses the witness file format:
    ///
    /// ```text
    /// b: 3
    /// pi: affine q=2
    /// ```
    ///
    /// or, with an explicit table,
    ///
    /// ```text
    /// b: 3
    /// pi 3 -> 1 2
    /// pi 5 -> 3 2
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut b: Option<usize> = None;
        let mut affine: Option<usize> = None;
        let mut table: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let lineno = lineno + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let syntax = |msg: String| Error::Syntax { line: lineno, msg };
            if let Some(rest) = line.strip_prefix("b:") {
                let v = rest
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| syntax(format!("invalid b value '{}'", rest.trim())))?;
                if v == 0 {
                    return Err(syntax("b must be positive".into()));
                }
                b = Some(v);
            } else if let Some(rest) = line.strip_prefix("pi:") {
                let rest = rest.trim();
                let q = rest
                    .strip_prefix("affine")
                    .map(str::trim)
                    .and_then(|s| s.strip_prefix("q="))
                    .and_then(|s| s.trim().parse::<usize>().ok())
                    .ok_or_else(|| {
                        syntax(format!("expected 'pi: affine q=<int>', got '{rest}'"))
                    })?;
                affine = Some(q);
            } else if let Some(rest) = line.strip_prefix("pi ") {
                let (l_txt, pq_txt) = rest
                    .split_once("->")
                    .ok_or_else(|| syntax("expected 'pi <l> -> <p> <q>'".into()))?;
                let l = l_txt
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| syntax(format!("invalid length '{}'", l_txt.trim())))?;
                let parts: Vec<&str> = pq_txt.split_whitespace().collect();
                let [p_txt, q_txt] = parts.as_slice() else {
                    return Err(syntax("expected two integers after '->'".into()));
                };
                let p = p_txt
                    .parse::<usize>()
                    .map_err(|_| syntax(format!("invalid p '{p_txt}'")))?;
                let q = q_txt
                    .parse::<usize>()
                    .map_err(|_| syntax(format!("invalid q '{q_txt}'")))?;
                table.insert(l, (p, q));
            } else {
                return Err(syntax(format!("unrecognized witness line '{line}'")));
            }
        }
        let b = b.ok_or(Error::Syntax {
            line: 1,
            msg: "witness file must declare 'b: <int>'".into(),
        })?;
        let pi = match (affine, table.is_empty()) {
            (Some(q), true) => PiSpec::Affine { q },
            (None, false) => PiSpec::Table(table),
            (Some(_), false) => {
                return Err(Error::Syntax {
                    line: 1,
                    msg: "witness mixes affine and table pi entries".into(),
                })
            }
            (None, true) => {
                return Err(Error::Syntax {
                    line: 1,
                    msg: "witness file must define pi".into(),
                })
            }
        };
        Ok(PumpingWitness { b, pi })
    }

    fn eval(&self, l: usize, b: usize) -> Result<PumpStep> {
        let (p, q) = match &self.pi {
            PiSpec::Affine { q } => {
                if *q > l {
                    return Err(Error::WitnessViolation {
                        length: l,
                        reason: format!("affine q={q} exceeds the length"),
                    });
                }
                (l - q, *q)
            }
            PiSpec::Table(map) => *map.get(&l).ok_or_else(|| Error::WitnessViolation {
                length: l,
                reason: "no table entry for this length".into(),
            })?,
        };
        if p + q != l || q == 0 || q > b {
            return Err(Error::WitnessViolation {
                length: l,
                reason: format!("pi({l}) = ({p}, {q}) violates l = p + q with 0 < q <= {b}"),
            });
        }
        Ok(PumpStep { p, q })
    }
}

/// The language under study: a CNF grammar, or a membership oracle carrying
/// its own witness.
#[derive(Clone)]
pub enum LanguageSource {
    Grammar(CnfGrammar),
    Oracle {
        membership: Arc<dyn Fn(usize) -> bool + Send + Sync>,
        witness: PumpingWitness,
    },
}

impl fmt::Debug for LanguageSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LanguageSource::Grammar(g) => f.debug_tuple("Grammar").field(g).finish(),
            LanguageSource::Oracle { witness, .. } => f
                .debug_struct("Oracle")
                .field("witness", witness)
                .finish_non_exhaustive(),
        }
    }
}

impl LanguageSource {
    pub fn from_grammar(g: CnfGrammar) -> Self {
        LanguageSource::Grammar(g)
    }

    pub fn from_oracle(
        membership: impl Fn(usize) -> bool + Send + Sync + 'static,
        witness: PumpingWitness,
    ) -> Self {
        LanguageSource::Oracle {
            membership: Arc::new(membership),
            witness,
        }
    }

    /// Membership snapshot on `0..=max`.
    pub fn lengths_up_to(&self, max: usize) -> LengthSet {
        match self {
            LanguageSource::Grammar(g) => g.derivable_lengths(max),
            LanguageSource::Oracle { membership, .. } => LengthSet::from_fn(max, |n| membership(n)),
        }
    }
}

/// A full descent: the input length and the splits `(p_0, q_0) ... (p_h, q_h)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleTrace {
    pub z: usize,
    pub steps: Vec<PumpStep>,
}

impl TupleTrace {
    /// Final residual `p_h`.
    pub fn residual(&self) -> usize {
        self.steps.last().expect("trace has at least one step").p
    }

    /// Checks the loop invariants of the descent: after every step `i`,
    /// `z = p_i + sum(q_0..=q_i)` with each `q` in `(0, b]`; intermediate
    /// residuals stay at or above `b` while the final one is below; and the
    /// residual sequence strictly decreases.
    pub fn check_frame(&self, b: usize) -> std::result::Result<(), String> {
        if self.steps.is_empty() {
            return Err("empty trace".into());
        }
        let h = self.steps.len() - 1;
        let mut qsum = 0usize;
        let mut prev_p = self.z;
        for (i, s) in self.steps.iter().enumerate() {
            if s.q == 0 || s.q > b {
                return Err(format!("step {i}: q = {} outside (0, {b}]", s.q));
            }
            qsum += s.q;
            if s.p + qsum != self.z {
                return Err(format!("step {i}: {} + {} != z = {}", s.p, qsum, self.z));
            }
            if i < h && s.p < b {
                return Err(format!(
                    "step {i}: residual {} below b = {b} before the end",
                    s.p
                ));
            }
            if i == h && s.p >= b {
                return Err(format!("final residual {} not below b = {b}", s.p));
            }
            if s.p >= prev_p && i > 0 {
                return Err(format!("step {i}: residual did not decrease"));
            }
            prev_p = s.p;
        }
        Ok(())
    }
}

/// A normalized pump tuple `<p, q_0 < q_1 < ... < q_k>`, denoting the
/// language `{p + i_0 q_0 + ... + i_k q_k : all i_j > 0}`. Identity ignores
/// multiplicities and the order in which the `q` values were produced.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PumpTuple {
    #[serde(rename = "p_h")]
    p: usize,
    qs: Vec<usize>,
}

impl PumpTuple {
    /// `qs` must be strictly increasing and positive.
    pub fn new(p: usize, qs: Vec<usize>) -> Self {
        assert!(
            qs.windows(2).all(|w| w[0] < w[1]) && qs.first().is_none_or(|&q| q > 0),
            "qs must be strictly increasing positive integers"
        );
        PumpTuple { p, qs }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn qs(&self) -> &[usize] {
        &self.qs
    }

    /// Smallest member of the tuple language: one copy of every `q`.
    pub fn min_member(&self) -> usize {
        self.p + self.qs.iter().sum::<usize>()
    }

    /// Membership snapshot of the tuple language on `0..=max`, by dynamic
    /// programming over the generators.
    pub fn members_up_to(&self, max: usize) -> LengthSet {
        let mut set = LengthSet::empty(max);
        let base = self.min_member();
        if base > max {
            return set;
        }
        set.insert(base);
        for n in base..=max {
            if set.contains(n) {
                for &q in &self.qs {
                    if n + q <= max {
                        set.insert(n + q);
                    }
                }
            }
        }
        set
    }
}

impl fmt::Display for PumpTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let qs = self
            .qs
            .iter()
            .map(|q| q.to_string())
            .collect::<Vec<_>>()
            .join(",");
        write!(f, "<{},({qs})>", self.p)
    }
}

/// Groups the equal `q` values of a trace: returns the tuple together with
/// the multiplicities of its `q` values, so that
/// `z = p_h + sum(counts[j] * qs[j])`.
pub fn tuple_normalize(trace: &TupleTrace) -> (PumpTuple, Vec<usize>) {
    let mut grouped: BTreeMap<usize, usize> = BTreeMap::new();
    for s in &trace.steps {
        *grouped.entry(s.q).or_insert(0) += 1;
    }
    let p = trace.residual();
    let (qs, counts): (Vec<usize>, Vec<usize>) = grouped.into_iter().unzip();
    let tuple = PumpTuple::new(p, qs);
    debug_assert_eq!(
        tuple.p
            + tuple
                .qs
                .iter()
                .zip(&counts)
                .map(|(q, c)| q * c)
                .sum::<usize>(),
        trace.z,
        "normalization must conserve the input length"
    );
    (tuple, counts)
}

/// The finite family of all tuples admissible for the constant `b`: residual
/// below `b`, distinct `q` values from `(0, b]`. Its size is `b * (2^b - 1)`.
pub fn enumerate_family(b: usize) -> BTreeSet<PumpTuple> {
    assert!(b >= 1, "b must be positive");
    assert!(
        b <= 16,
        "family of size b * (2^b - 1) is too large for b = {b}"
    );
    let mut out = BTreeSet::new();
    for p in 0..b {
        for mask in 1u32..(1 << b) {
            let qs: Vec<usize> = (0..b)
                .filter(|j| mask >> j & 1 == 1)
                .map(|j| j + 1)
                .collect();
            out.insert(PumpTuple::new(p, qs));
        }
    }
    out
}

/// Where a collected tuple came from and whether its language is certified
/// to be contained in the source language.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TupleOrigin {
    /// Smallest input length whose descent produced the tuple.
    pub first_z: usize,
    /// True when some descent proves the whole tuple language stays inside
    /// the source language: either every excised segment of a lineage
    /// descent kept an independent re-insertion point, or the tuple has a
    /// single `q` whose final split was certified by tree surgery.
    pub certified: bool,
}

enum PiBackend {
    Surgery(TreeTables),
    Witness(PumpingWitness),
}

/// Binds a language source to a pumping constant and split mode, and runs
/// descents. Immutable after construction; all operations are pure.
pub struct Pumper<'a> {
    source: &'a LanguageSource,
    b: usize,
    mode: PiMode,
    bound: usize,
    descent_bound: usize,
    lengths: LengthSet,
    backend: PiBackend,
}

struct Descent {
    trace: TupleTrace,
    /// Anchors of a lineage descent all survived (vacuously false for
    /// literal and witness descents).
    anchors_alive: bool,
    /// The final split was obtained by tree surgery.
    final_surgery: bool,
}

impl<'a> Pumper<'a> {
    /// `bound` caps the lengths the pumper can be asked about; membership
    /// and parse tables are precomputed up to it.
    pub fn new(
        source: &'a LanguageSource,
        b_override: Option<usize>,
        mode: PiMode,
        bound: usize,
    ) -> Result<Pumper<'a>> {
        Self::with_bounds(source, b_override, mode, bound, bound)
    }

    /// Like [`Pumper::new`], but caps the parse tables at `descent_bound`
    /// (the largest length descents start from) while keeping membership
    /// answers up to the larger `bound`. Progression checks stretch to
    /// `bound`, which is what makes a smaller table bound safe.
    pub fn with_bounds(
        source: &'a LanguageSource,
        b_override: Option<usize>,
        mode: PiMode,
        bound: usize,
        descent_bound: usize,
    ) -> Result<Pumper<'a>> {
        let descent_bound = descent_bound.min(bound);
        let (b, backend, lengths) = match source {
            LanguageSource::Grammar(g) => {
                let b = b_override.unwrap_or_else(|| g.pumping_constant());
                let tables = TreeTables::build(g, descent_bound);
                let mut lengths = tables.language_lengths(g);
                if bound > descent_bound {
                    lengths = g.derivable_lengths(bound);
                }
                (b, PiBackend::Surgery(tables), lengths)
            }
            LanguageSource::Oracle { witness, .. } => {
                if let Some(ov) = b_override {
                    if ov != witness.b {
                        return Err(Error::InvalidConfig(format!(
                            "b override {ov} conflicts with the witness constant {}",
                            witness.b
                        )));
                    }
                }
                if mode == PiMode::Lineage {
                    return Err(Error::InvalidConfig(
                        "lineage mode requires a grammar-backed source".into(),
                    ));
                }
                (
                    witness.b,
                    PiBackend::Witness(witness.clone()),
                    source.lengths_up_to(bound),
                )
            }
        };
        if b == 0 {
            return Err(Error::InvalidConfig(
                "pumping constant must be positive".into(),
            ));
        }
        Ok(Pumper {
            source,
            b,
            mode,
            bound,
            descent_bound,
            lengths,
            backend,
        })
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn mode(&self) -> PiMode {
        self.mode
    }

    pub fn lengths(&self) -> &LengthSet {
        &self.lengths
    }

    /// The split function: `pi(l) = (p, q)` with `l = p + q`, `0 < q <= b`.
    pub fn pi(&self, l: usize) -> Result<PumpStep> {
        self.pi_with_provenance(l).map(|(s, _)| s)
    }

    fn pi_with_provenance(&self, l: usize) -> Result<(PumpStep, bool)> {
        assert!(
            l <= self.bound,
            "length {l} beyond pumper bound {}",
            self.bound
        );
        match &self.backend {
            PiBackend::Witness(w) => w.eval(l, self.b).map(|s| (s, false)),
            PiBackend::Surgery(tables) => {
                assert!(
                    l <= self.descent_bound,
                    "length {l} beyond the parse-table bound {}",
                    self.descent_bound
                );
                let g = match self.source {
                    LanguageSource::Grammar(g) => g,
                    _ => unreachable!(),
                };
                if let Some(step) = tables.decompose(g, l, self.b) {
                    return Ok((step, true));
                }
                // A user-supplied b below the grammar's own constant may rule
                // out every repeated pair; fall back to the smallest q whose
                // progression verifies against the bounded oracle.
                self.progression_split(l).map(|s| (s, false))
            }
        }
    }

    /// Whether the whole progression `p + i*q` stays in the language up to
    /// the pumper's bound (including `i = 0`).
    fn progression_holds(&self, p: usize, q: usize) -> bool {
        let mut n = p;
        while n <= self.bound {
            if !self.lengths.contains(n) {
                return false;
            }
            n += q;
        }
        true
    }

    fn progression_split(&self, l: usize) -> Result<PumpStep> {
        for q in 1..=self.b.min(l) {
            if self.progression_holds(l - q, q) {
                return Ok(PumpStep { p: l - q, q });
            }
        }
        Err(Error::WitnessViolation {
            length: l,
            reason: format!("no split with q <= {} pumps within the language", self.b),
        })
    }

    /// Runs the descent for one length: split, then re-split the residual
    /// while it stays at or above `b`. Loop invariants are checked on every
    /// run (see [`TupleTrace::check_frame`]).
    pub fn tuple_generate(&self, l: usize) -> Result<TupleTrace> {
        self.descend(l).map(|d| d.trace)
    }

    fn descend(&self, l: usize) -> Result<Descent> {
        if l < self.b {
            return Err(Error::BelowConstant {
                length: l,
                b: self.b,
            });
        }
        if l > self.descent_bound {
            return Err(Error::InvalidConfig(format!(
                "length {l} beyond the pumper's descent bound {}",
                self.descent_bound
            )));
        }
        if !self.lengths.contains(l) {
            return Err(Error::NotInLanguage { length: l });
        }

        let mut steps: Vec<PumpStep> = Vec::new();
        let anchors_alive;
        let final_surgery;

        if self.mode == PiMode::Lineage {
            let (g, tables) = match (&self.source, &self.backend) {
                (LanguageSource::Grammar(g), PiBackend::Surgery(t)) => (g, t),
                _ => unreachable!("lineage is grammar-only by construction"),
            };
            let mut surgeon = Surgeon::build(g, tables, l);
            let mut fell_back = false;
            let mut fallback_surgery = true;
            loop {
                match surgeon.excise_run(self.b) {
                    Some(run) => {
                        steps.extend(run);
                        if steps.last().expect("run is non-empty").p < self.b {
                            break;
                        }
                    }
                    None => {
                        // No admissible pair in the residual tree. Prefer
                        // continuing with the previous pump amount (its whole
                        // progression is re-checked against the bounded
                        // oracle) so the descent does not mix pump amounts
                        // across language classes; fall back to from-scratch
                        // splits only when that fails.
                        fell_back = true;
                        let mut cur = surgeon.total();
                        let mut prev_q = steps.last().map(|s| s.q);
                        loop {
                            let continued = prev_q
                                .filter(|&q| q <= cur && self.progression_holds(cur - q, q))
                                .map(|q| (PumpStep { p: cur - q, q }, false));
                            let (step, surg) = match continued {
                                Some(s) => s,
                                None => self.pi_with_provenance(cur)?,
                            };
                            fallback_surgery = surg;
                            steps.push(step);
                            prev_q = Some(step.q);
                            if step.p < self.b {
                                break;
                            }
                            cur = step.p;
                        }
                        break;
                    }
                }
            }
            anchors_alive = !fell_back && surgeon.certified();
            final_surgery = if fell_back { fallback_surgery } else { true };
        } else {
            let mut cur = l;
            final_surgery = loop {
                let (step, surg) = self.pi_with_provenance(cur)?;
                steps.push(step);
                if step.p < self.b {
                    break surg;
                }
                cur = step.p;
            };
            anchors_alive = false;
        }

        let trace = TupleTrace { z: l, steps };
        if let Err(msg) = trace.check_frame(self.b) {
            panic!("descent invariant violated at z = {l}: {msg}");
        }
        Ok(Descent {
            trace,
            anchors_alive,
            final_surgery,
        })
    }

    /// A single-q tuple is covered by the final split's progression; a
    /// multi-q tuple needs the independent re-insertion points of a fully
    /// anchored lineage descent. Witness-backed splits certify nothing.
    fn certified(&self, distinct_qs: usize, final_surgery: bool, anchors_alive: bool) -> bool {
        if matches!(self.backend, PiBackend::Witness(_)) {
            return false;
        }
        (distinct_qs == 1 && final_surgery) || (self.mode == PiMode::Lineage && anchors_alive)
    }

    /// Collects the normalized tuples of every descent starting from a
    /// language length in `[b, z_max]`.
    pub fn collect_tuples(&self, z_max: usize) -> Result<BTreeMap<PumpTuple, TupleOrigin>> {
        if z_max < self.b || z_max > self.descent_bound {
            return Err(Error::InvalidConfig(format!(
                "tuple collection bound {z_max} outside [{}, {}]",
                self.b, self.descent_bound
            )));
        }
        let mut out: BTreeMap<PumpTuple, TupleOrigin> = BTreeMap::new();
        let mut record = |tuple: PumpTuple, z: usize, certified: bool| {
            out.entry(tuple)
                .and_modify(|o| o.certified |= certified)
                .or_insert(TupleOrigin {
                    first_z: z,
                    certified,
                });
        };
        if self.mode == PiMode::Lineage {
            for z in self.lengths.iter().filter(|&z| z >= self.b && z <= z_max) {
                let d = self.descend(z)?;
                let (tuple, _) = tuple_normalize(&d.trace);
                let certified = self.certified(tuple.qs().len(), d.final_surgery, d.anchors_alive);
                record(tuple, z, certified);
            }
        } else {
            // Literal descents of different lengths share suffixes: the
            // descent from z continues as the descent from its residual.
            // Memoize (residual, q multiplicities, final-split provenance)
            // per length.
            type Entry = (usize, BTreeMap<usize, usize>, bool);
            let mut memo: HashMap<usize, Entry> = HashMap::new();
            for z in self.lengths.iter().filter(|&z| z >= self.b && z <= z_max) {
                let mut pending: Vec<(usize, PumpStep)> = Vec::new();
                let mut cur = z;
                let mut entry: Entry = loop {
                    if let Some(e) = memo.get(&cur) {
                        break e.clone();
                    }
                    let (step, surgery) = self.pi_with_provenance(cur)?;
                    if step.p < self.b {
                        // Base of the chain: the final split.
                        let counts = BTreeMap::from([(step.q, 1usize)]);
                        let e = (step.p, counts, surgery);
                        memo.insert(cur, e.clone());
                        break e;
                    }
                    pending.push((cur, step));
                    cur = step.p;
                };
                // Unwind towards z; the final split (and hence provenance)
                // is inherited from the suffix.
                for (len, step) in pending.into_iter().rev() {
                    *entry.1.entry(step.q).or_insert(0) += 1;
                    memo.insert(len, entry.clone());
                }
                let (p_h, counts, final_surgery) = entry;
                let tuple = PumpTuple::new(p_h, counts.keys().copied().collect());
                let certified = self.certified(tuple.qs().len(), final_surgery, false);
                record(tuple, z, certified);
            }
        }
        Ok(out)
    }
}

/// One piece of evidence in a failing pumping check: the split `(p, q)` and
/// the first progression member found outside the language.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Pl1Break {
    pub p: usize,
    pub q: usize,
    pub breaks_at: usize,
}

/// Outcome of the bounded pumping-property check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Pl1Outcome {
    Pass,
    Fail {
        /// Least language length with no admissible split.
        length: usize,
        /// Every admissible `(p, q)` with its breaking progression member.
        evidence: Vec<Pl1Break>,
    },
}

/// Report of [`check_pl1`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pl1Report {
    pub b: usize,
    pub bound: usize,
    pub outcome: Pl1Outcome,
}

impl Pl1Report {
    pub fn passed(&self) -> bool {
        matches!(self.outcome, Pl1Outcome::Pass)
    }
}

impl fmt::Display for Pl1Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.outcome {
            Pl1Outcome::Pass => write!(
                f,
                "pumping property holds for b = {} on lengths up to {}",
                self.b, self.bound
            ),
            Pl1Outcome::Fail { length, evidence } => {
                writeln!(
                    f,
                    "pumping property fails for b = {} at length {length}:",
                    self.b
                )?;
                for e in evidence {
                    writeln!(
                        f,
                        "  split (p, q) = ({}, {}): progression breaks at {} (not in the language)",
                        e.p, e.q, e.breaks_at
                    )?;
                }
                Ok(())
            }
        }
    }
}

/// Bounded check of the pumping property: for every language length in
/// `[b, m]`, searches for a split `(p, q)`, `0 < q <= b`, whose whole
/// progression within `[0, m]` stays in the language. Reports the least
/// failing length with per-split evidence, scanning each progression upward
/// from the length first and the residual `p` last so the reported break is
/// the first one met in that order.
pub fn check_pl1(source: &LanguageSource, b: usize, m: usize) -> Pl1Report {
    assert!(b >= 1 && m >= b, "require 1 <= b <= m");
    let lengths = source.lengths_up_to(m);
    for l in lengths.iter() {
        if l < b {
            continue;
        }
        let mut evidence = Vec::new();
        let mut passed = false;
        for q in 1..=b.min(l) {
            let p = l - q;
            match progression_break(&lengths, p, q, m) {
                None => {
                    passed = true;
                    break;
                }
                Some(n) => evidence.push(Pl1Break { p, q, breaks_at: n }),
            }
        }
        if !passed {
            return Pl1Report {
                b,
                bound: m,
                outcome: Pl1Outcome::Fail {
                    length: l,
                    evidence,
                },
            };
        }
    }
    Pl1Report {
        b,
        bound: m,
        outcome: Pl1Outcome::Pass,
    }
}

fn progression_break(lengths: &LengthSet, p: usize, q: usize, m: usize) -> Option<usize> {
    let mut n = p + q;
    while n <= m {
        if !lengths.contains(n) {
            return Some(n);
        }
        n += q;
    }
    if !lengths.contains(p) {
        return Some(p);
    }
    None
}
