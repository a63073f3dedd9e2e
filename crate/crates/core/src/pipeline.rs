//! The end-to-end regularization pipeline.
//!
//! For a language with pumping constant `b`, the members below `b` form a
//! finite set and the members at or above `b` are covered by the languages
//! of the collected pump tuples. The pipeline computes both parts, realizes
//! the tuples as automata, intersects with `{n >= b}`, reattaches the finite
//! part, and verifies the result pointwise against the length oracle. Tuples
//! whose language escapes the source within the verification bound are
//! discarded by a soundness filter (on by default), and the report records
//! which tuples were kept, which were discarded and why, and whether
//! enlarging the collection bound changes the tuple set.

use crate::automata::{determinize, nfa_union, tuple_to_nfa, EventuallyPeriodicSet, UnaryDfa};
use crate::error::{Error, Result};
use crate::grammar::UnaryGrammar;
use crate::lengths::LengthSet;
use crate::pumping::{LanguageSource, PiMode, PumpTuple, Pumper, TupleOrigin};
use crate::semilinear::SemilinearSet;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// Keep the default `b = 2^|V|` from exploding the search bounds; beyond
/// this a user-supplied constant is required.
const MAX_AUTO_B: usize = 1 << 20;

/// Pipeline configuration. Every bound has a source-derived default.
#[derive(Clone, Debug, Default)]
pub struct Config {
    /// Pumping constant override (defaults to `2^|V|` for grammars, the
    /// witness constant for oracle sources).
    pub b_override: Option<usize>,
    /// Tuple collection bound (defaults to `b * (b + 2)`).
    pub z_max: Option<usize>,
    /// Verification bound (defaults to `max(2000, 4 * z_max)`).
    pub max_check: Option<usize>,
    /// Split mode (defaults to lineage for grammars, literal for oracles).
    pub pi_mode: Option<PiMode>,
    /// Disable the soundness filter.
    pub no_filter: bool,
}

/// Bounds after applying defaults.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResolvedBounds {
    pub b: usize,
    pub z_max: usize,
    pub max_check: usize,
}

/// Applies the default bounds for a given pumping constant.
pub fn resolve_bounds(b: usize, config: &Config) -> Result<ResolvedBounds> {
    if b == 0 {
        return Err(Error::InvalidConfig(
            "pumping constant must be positive".into(),
        ));
    }
    let default_z_max = b.checked_mul(b + 2).ok_or_else(|| {
        Error::InvalidConfig(format!("pumping constant {b} overflows the bounds"))
    })?;
    let z_max = config.z_max.unwrap_or(default_z_max);
    if z_max < b {
        return Err(Error::InvalidConfig(format!(
            "tuple collection bound {z_max} below the pumping constant {b}"
        )));
    }
    let max_check = config.max_check.unwrap_or_else(|| 2000.max(4 * z_max));
    if max_check < z_max {
        return Err(Error::InvalidConfig(format!(
            "verification bound {max_check} below the collection bound {z_max}"
        )));
    }
    Ok(ResolvedBounds {
        b,
        z_max,
        max_check,
    })
}

/// A kept tuple in the verification report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KeptTuple {
    pub p_h: usize,
    pub qs: Vec<usize>,
    /// The tuple's language is proven to stay inside the source (see
    /// [`TupleOrigin::certified`]), as opposed to merely surviving the
    /// bounded filter.
    pub certified: bool,
}

/// A tuple discarded by the soundness filter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DiscardedTuple {
    pub p_h: usize,
    pub qs: Vec<usize>,
    /// Least tuple-language member in `[b, max]` outside the source.
    pub first_escape: usize,
}

/// Verification section of a [`RegularizationResult`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub agreement_bound: usize,
    /// Mismatching lengths, capped at 20 entries.
    pub mismatches: Vec<usize>,
    pub mismatch_count: usize,
    pub tuples_kept: Vec<KeptTuple>,
    pub tuples_discarded: Vec<DiscardedTuple>,
    /// Whether raising the collection bound by `b` leaves the kept tuple
    /// set unchanged.
    pub stabilized: bool,
    pub pi_mode: String,
    pub b: usize,
}

impl VerificationReport {
    pub fn agreed(&self) -> bool {
        self.mismatch_count == 0
    }
}

/// Everything the pipeline produces for one language.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegularizationResult {
    pub b: usize,
    /// The members below `b`.
    #[serde(rename = "low")]
    pub low_set: BTreeSet<usize>,
    /// Kept tuples covering the members at or above `b`.
    pub tuples: BTreeSet<PumpTuple>,
    pub eps: EventuallyPeriodicSet,
    pub dfa: UnaryDfa,
    pub regex: String,
    pub semilinear: SemilinearSet,
    pub verification: VerificationReport,
}

/// Outcome of the soundness filter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilterOutcome {
    pub kept: BTreeSet<PumpTuple>,
    pub discarded: Vec<DiscardedTuple>,
}

/// Retains the tuples whose language, restricted to `[b, max]`, is contained
/// in the source's length set; discarded tuples carry their first escaping
/// length.
pub fn soundness_filter(
    tuples: &BTreeSet<PumpTuple>,
    source: &LanguageSource,
    b: usize,
    max: usize,
) -> FilterOutcome {
    filter_with_lengths(tuples, &source.lengths_up_to(max), b, max)
}

fn filter_with_lengths(
    tuples: &BTreeSet<PumpTuple>,
    lengths: &LengthSet,
    b: usize,
    max: usize,
) -> FilterOutcome {
    let mut kept = BTreeSet::new();
    let mut discarded = Vec::new();
    for tuple in tuples {
        let members = tuple.members_up_to(max);
        let escape = members.iter().find(|&n| n >= b && !lengths.contains(n));
        match escape {
            None => {
                kept.insert(tuple.clone());
            }
            Some(first_escape) => discarded.push(DiscardedTuple {
                p_h: tuple.p(),
                qs: tuple.qs().to_vec(),
                first_escape,
            }),
        }
    }
    FilterOutcome { kept, discarded }
}

/// Pointwise comparison report of [`oracle_compare`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CompareReport {
    pub agreement_bound: usize,
    /// Mismatching lengths, capped at 20 entries.
    pub mismatches: Vec<usize>,
    pub mismatch_count: usize,
}

impl CompareReport {
    pub fn agreed(&self) -> bool {
        self.mismatch_count == 0
    }
}

/// Compares the membership of a result against the source's length oracle
/// on `[0, max]`.
pub fn oracle_compare(
    result: &RegularizationResult,
    source: &LanguageSource,
    max: usize,
) -> CompareReport {
    compare_eps(&result.eps, &source.lengths_up_to(max), max)
}

fn compare_eps(eps: &EventuallyPeriodicSet, lengths: &LengthSet, max: usize) -> CompareReport {
    let mut mismatches = Vec::new();
    let mut count = 0usize;
    for n in 0..=max {
        if eps.contains(n) != lengths.contains(n) {
            count += 1;
            if mismatches.len() < 20 {
                mismatches.push(n);
            }
        }
    }
    CompareReport {
        agreement_bound: max,
        mismatches,
        mismatch_count: count,
    }
}

/// Runs the full construction for a prepared source.
pub fn regularize(source: &LanguageSource, config: &Config) -> Result<RegularizationResult> {
    let b = match source {
        LanguageSource::Grammar(g) => {
            let computed = g.pumping_constant();
            let b = config.b_override.unwrap_or(computed);
            if config.b_override.is_none() && computed > MAX_AUTO_B {
                return Err(Error::InvalidConfig(format!(
                    "computed pumping constant 2^{} is impractically large; supply a b override",
                    g.nonterminal_count()
                )));
            }
            b
        }
        LanguageSource::Oracle { witness, .. } => {
            if let Some(ov) = config.b_override {
                if ov != witness.b {
                    return Err(Error::InvalidConfig(format!(
                        "b override {ov} conflicts with the witness constant {}",
                        witness.b
                    )));
                }
            }
            witness.b
        }
    };
    let bounds = resolve_bounds(b, config)?;
    let mode = config.pi_mode.unwrap_or(match source {
        LanguageSource::Grammar(_) => PiMode::Lineage,
        LanguageSource::Oracle { .. } => PiMode::Literal,
    });

    // Membership must cover the verification range; descents only start
    // within the enlarged collection range of the stabilization check.
    let membership_bound = bounds.max_check.max(bounds.z_max + b);
    let pumper = Pumper::with_bounds(source, Some(b), mode, membership_bound, bounds.z_max + b)?;
    let lengths = pumper.lengths();

    let low_set: BTreeSet<usize> = lengths.iter().take_while(|&n| n < b).collect();

    let collected = pumper.collect_tuples(bounds.z_max)?;
    let collected_ext = pumper.collect_tuples(bounds.z_max + b)?;

    let as_set = |m: &BTreeMap<PumpTuple, TupleOrigin>| -> BTreeSet<PumpTuple> {
        m.keys().cloned().collect()
    };
    let (kept, discarded, kept_ext) = if config.no_filter {
        (as_set(&collected), Vec::new(), as_set(&collected_ext))
    } else {
        let f = filter_with_lengths(&as_set(&collected), lengths, b, bounds.max_check);
        let f_ext = filter_with_lengths(&as_set(&collected_ext), lengths, b, bounds.max_check);
        (f.kept, f.discarded, f_ext.kept)
    };
    let stabilized = kept == kept_ext;

    let eps_tuples = if kept.is_empty() {
        EventuallyPeriodicSet::empty()
    } else {
        let nfas: Vec<_> = kept.iter().map(tuple_to_nfa).collect();
        determinize(&nfa_union(&nfas)).minimize().to_eps()
    };
    let eps = eps_tuples.restrict_min(b).add_finite(&low_set);

    let comparison = compare_eps(&eps, lengths, bounds.max_check);
    let tuples_kept = kept
        .iter()
        .map(|t| KeptTuple {
            p_h: t.p(),
            qs: t.qs().to_vec(),
            certified: collected.get(t).is_some_and(|o| o.certified),
        })
        .collect();

    let dfa = eps.to_dfa();
    let regex = eps.to_regex();
    let semilinear = SemilinearSet::from_eps(&eps);
    Ok(RegularizationResult {
        b,
        low_set,
        tuples: kept,
        eps,
        dfa,
        regex,
        semilinear,
        verification: VerificationReport {
            agreement_bound: comparison.agreement_bound,
            mismatches: comparison.mismatches,
            mismatch_count: comparison.mismatch_count,
            tuples_kept,
            tuples_discarded: discarded,
            stabilized,
            pi_mode: mode.to_string(),
            b,
        },
    })
}

/// Parses nothing: reduces and normalizes the grammar, then runs
/// [`regularize`]. An empty language yields the empty result rather than an
/// error.
pub fn regularize_grammar(g: &UnaryGrammar, config: &Config) -> Result<RegularizationResult> {
    match g.to_cnf() {
        Ok(cnf) => regularize(&LanguageSource::Grammar(cnf), config),
        Err(Error::EmptyLanguage { .. }) => {
            let b = config.b_override.unwrap_or(1);
            let bounds = resolve_bounds(b, config)?;
            let eps = EventuallyPeriodicSet::empty();
            Ok(RegularizationResult {
                b,
                low_set: BTreeSet::new(),
                tuples: BTreeSet::new(),
                dfa: eps.to_dfa(),
                regex: eps.to_regex(),
                semilinear: SemilinearSet::from_eps(&eps),
                eps,
                verification: VerificationReport {
                    agreement_bound: bounds.max_check,
                    mismatches: Vec::new(),
                    mismatch_count: 0,
                    tuples_kept: Vec::new(),
                    tuples_discarded: Vec::new(),
                    stabilized: true,
                    pi_mode: config.pi_mode.unwrap_or(PiMode::Lineage).to_string(),
                    b,
                },
            })
        }
        Err(e) => Err(e),
    }
}
