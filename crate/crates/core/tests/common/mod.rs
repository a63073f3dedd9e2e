//! Shared test support: a seeded random grammar corpus and an oracle for
//! length sets computed directly on the raw (non-CNF) grammar.
//!
//! Each integration test binary compiles its own copy, so not every item is
//! used by every binary.
#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use unareg::grammar::{Symbol, UnaryGrammar};

/// Length sets straight from the raw grammar, by fixpoint over arbitrary
/// right-hand sides (sumset of the symbol sets). Independent of the CNF
/// pipeline and of the per-nonterminal dynamic program it uses.
pub fn direct_lengths(g: &UnaryGrammar, max: usize) -> Vec<bool> {
    let n = g.nonterminal_count();
    let mut sets: Vec<Vec<bool>> = vec![vec![false; max + 1]; n];
    loop {
        let mut changed = false;
        for p in g.productions() {
            // Sumset over the rhs, seeded with {0} for the empty product.
            let mut acc = vec![false; max + 1];
            acc[0] = true;
            for sym in &p.rhs {
                let mut next = vec![false; max + 1];
                match sym {
                    Symbol::Terminal => {
                        for i in 0..max {
                            if acc[i] {
                                next[i + 1] = true;
                            }
                        }
                    }
                    Symbol::Nonterminal(b) => {
                        for i in 0..=max {
                            if acc[i] {
                                for j in 0..=max - i {
                                    if sets[*b][j] {
                                        next[i + j] = true;
                                    }
                                }
                            }
                        }
                    }
                }
                acc = next;
            }
            let target = &mut sets[p.lhs];
            for i in 0..=max {
                if acc[i] && !target[i] {
                    target[i] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    sets.swap_remove(g.start())
}

/// One random grammar within the corpus caps: at most 5 nonterminals, at
/// most 10 productions, right-hand sides of length at most 4.
pub fn random_grammar(rng: &mut ChaCha8Rng) -> UnaryGrammar {
    const NAMES: [&str; 5] = ["S", "A", "B", "C", "D"];
    let nts = rng.gen_range(1..=5usize);
    let prods = rng.gen_range(nts.max(2)..=10usize);
    let mut rules: Vec<(String, Vec<String>)> = Vec::new();
    for i in 0..prods {
        // The start symbol owns the first production.
        let lhs = if i == 0 {
            NAMES[0].to_string()
        } else {
            NAMES[rng.gen_range(0..nts)].to_string()
        };
        let len = *[0usize, 1, 1, 2, 2, 2, 3, 3, 4].choose(rng).unwrap();
        let rhs: Vec<String> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.55) {
                    "a".to_string()
                } else {
                    NAMES[rng.gen_range(0..nts)].to_string()
                }
            })
            .collect();
        rules.push((lhs, rhs));
    }
    let refs: Vec<(&str, Vec<&str>)> = rules
        .iter()
        .map(|(l, r)| (l.as_str(), r.iter().map(String::as_str).collect()))
        .collect();
    let refs2: Vec<(&str, &[&str])> = refs.iter().map(|(l, r)| (*l, r.as_slice())).collect();
    UnaryGrammar::from_rules("S", &refs2).expect("generated rules are well formed")
}

/// The deterministic acceptance corpus: grammars that survive reduction,
/// generate a nonempty language, and whose CNF stays small enough for the
/// default `2^|V|` pumping constant to be searchable.
pub fn corpus(count: usize) -> Vec<UnaryGrammar> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_u64);
    let mut out = Vec::new();
    while out.len() < count {
        let g = random_grammar(&mut rng);
        let Ok(reduced) = g.reduce() else { continue };
        let Ok(cnf) = reduced.to_cnf() else { continue };
        if cnf.nonterminal_count() > 5 {
            continue;
        }
        if cnf.derivable_lengths(64).is_empty() && !cnf.accepts_epsilon() {
            continue;
        }
        out.push(g);
    }
    out
}
