//! Shared fixtures and independent reference implementations for the
//! integration suites. The oracles recompute everything from first
//! principles (own cycle detection, own subset scans, own equation
//! arithmetic) so that a suite failure points at the library, not at a
//! helper borrowed from it.

#![allow(dead_code)]

use std::collections::BTreeMap;

use afeq::af::{ArgumentSet, Framework, Label, Labelling};
use afeq::equations::{Combinator, EquationSystem};
use afeq::solver::Valuation;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn fw(args: &[&str], attacks: &[(&str, &str)]) -> Framework {
    Framework::from_parts(
        args.iter().map(|s| s.to_string()),
        attacks.iter().map(|(a, b)| (a.to_string(), b.to_string())),
    )
    .unwrap()
}

pub fn set(names: &[&str]) -> ArgumentSet {
    names.iter().map(|s| s.to_string()).collect()
}

pub fn sets(groups: &[&[&str]]) -> Vec<ArgumentSet> {
    groups.iter().map(|g| set(g)).collect()
}

// ---- fixtures ----------------------------------------------------------

pub fn chain3() -> Framework {
    fw(&["a", "b", "c"], &[("a", "b"), ("b", "c")])
}

/// Odd three-ring whose members all attack a funneled argument, which in
/// turn attacks a sink.
pub fn triangle_funnel() -> Framework {
    fw(
        &["alpha", "beta", "phi", "gamma", "delta"],
        &[
            ("phi", "alpha"),
            ("alpha", "beta"),
            ("beta", "phi"),
            ("alpha", "gamma"),
            ("beta", "gamma"),
            ("phi", "gamma"),
            ("gamma", "delta"),
        ],
    )
}

/// Three-ring with one member in a mutual pair.
pub fn triangle_mutual_pair() -> Framework {
    fw(
        &["alpha", "beta", "gamma", "phi"],
        &[
            ("alpha", "beta"),
            ("beta", "gamma"),
            ("gamma", "alpha"),
            ("gamma", "phi"),
            ("phi", "gamma"),
        ],
    )
}

/// Four-ring with one member in a mutual pair.
pub fn quad_mutual_pair() -> Framework {
    fw(
        &["alpha", "beta", "gamma", "delta", "phi"],
        &[
            ("gamma", "alpha"),
            ("alpha", "delta"),
            ("delta", "beta"),
            ("beta", "gamma"),
            ("gamma", "phi"),
            ("phi", "gamma"),
        ],
    )
}

/// Three-ring feeding a mutual pair that feeds a four-ring.
pub fn cascade9() -> Framework {
    fw(
        &["a", "b", "c", "d", "e", "f", "g", "h", "i"],
        &[
            ("c", "a"),
            ("a", "b"),
            ("b", "c"),
            ("b", "d"),
            ("b", "e"),
            ("e", "f"),
            ("f", "e"),
            ("d", "f"),
            ("i", "f"),
            ("f", "g"),
            ("g", "h"),
            ("h", "i"),
        ],
    )
}

/// Chain with a self-attacker joining at the tail.
pub fn chain_self() -> Framework {
    fw(
        &["a", "b", "c", "d"],
        &[("a", "b"), ("b", "c"), ("d", "c"), ("d", "d")],
    )
}

/// Two three-rings sharing the argument `b`.
pub fn two_rings_shared() -> Framework {
    fw(
        &["a", "b", "c", "x", "y"],
        &[
            ("a", "b"),
            ("b", "c"),
            ("c", "a"),
            ("b", "x"),
            ("x", "y"),
            ("y", "b"),
        ],
    )
}

/// Three-ring plus a longer detour: both cycles share the a -> b -> c spine.
pub fn ring3_detour() -> Framework {
    fw(
        &["a", "b", "c", "x"],
        &[("a", "b"), ("b", "c"), ("c", "a"), ("c", "x"), ("x", "a")],
    )
}

/// Nine-ring with three chords, so one removal never suffices.
pub fn ring9_chords() -> Framework {
    let names: Vec<String> = (1..=9).map(|i| format!("a{i}")).collect();
    let mut attacks: Vec<(String, String)> = (0..9)
        .map(|i| (names[i].clone(), names[(i + 1) % 9].clone()))
        .collect();
    attacks.push(("a9".into(), "a5".into()));
    attacks.push(("a6".into(), "a2".into()));
    attacks.push(("a3".into(), "a8".into()));
    Framework::from_parts(names, attacks).unwrap()
}

/// Directed ring a1 -> a2 -> ... -> an -> a1.
pub fn ring(n: usize) -> Framework {
    let names: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let attacks: Vec<(String, String)> = (0..n)
        .map(|i| (names[i].clone(), names[(i + 1) % n].clone()))
        .collect();
    Framework::from_parts(names, attacks).unwrap()
}

/// [`ring`] plus a pendant argument attacked by a1.
pub fn ring_with_pendant(n: usize) -> Framework {
    let mut names: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let mut attacks: Vec<(String, String)> = (0..n)
        .map(|i| (names[i].clone(), names[(i + 1) % n].clone()))
        .collect();
    names.push("p".into());
    attacks.push(("a1".into(), "p".into()));
    Framework::from_parts(names, attacks).unwrap()
}

/// Named fixtures with at most ten arguments, for exhaustive sweeps.
pub fn catalog() -> Vec<(&'static str, Framework)> {
    vec![
        ("chain3", chain3()),
        ("triangle_funnel", triangle_funnel()),
        ("triangle_mutual_pair", triangle_mutual_pair()),
        ("quad_mutual_pair", quad_mutual_pair()),
        ("cascade9", cascade9()),
        ("chain_self", chain_self()),
        ("two_rings_shared", two_rings_shared()),
        ("ring3_detour", ring3_detour()),
        ("ring9_chords", ring9_chords()),
        ("ring2", ring(2)),
        ("ring5", ring(5)),
        ("ring6_pendant", ring_with_pendant(6)),
    ]
}

// ---- random generation -------------------------------------------------

/// Random digraph on `a1..an`: every ordered pair, self-pairs included,
/// becomes an attack with probability `p`. Deterministic in the seed.
pub fn random_framework(seed: u64, n: usize, p: f64) -> Framework {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let mut attacks = Vec::new();
    for src in &names {
        for dst in &names {
            if rng.gen::<f64>() < p {
                attacks.push((src.clone(), dst.clone()));
            }
        }
    }
    Framework::from_parts(names, attacks).unwrap()
}

/// Random digraph with attacks only from lower to higher index, hence
/// acyclic.
pub fn random_acyclic_framework(seed: u64, n: usize, p: f64) -> Framework {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let mut attacks = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen::<f64>() < p {
                attacks.push((names[i].clone(), names[j].clone()));
            }
        }
    }
    Framework::from_parts(names, attacks).unwrap()
}

// ---- oracles ------------------------------------------------------------

/// Every subset of `universe`, in bitmask order.
pub fn subsets(universe: &ArgumentSet) -> Vec<ArgumentSet> {
    let items: Vec<&String> = universe.iter().collect();
    (0u64..(1u64 << items.len()))
        .map(|mask| {
            items
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, name)| (*name).clone())
                .collect()
        })
        .collect()
}

pub fn oracle_is_conflict_free(f: &Framework, s: &ArgumentSet) -> bool {
    f.attacks()
        .iter()
        .all(|(a, b)| !(s.contains(a) && s.contains(b)))
}

/// Maximal conflict-free sets by full subset scan.
pub fn oracle_maximal_conflict_free(f: &Framework) -> Vec<ArgumentSet> {
    let candidates: Vec<ArgumentSet> = subsets(f.args())
        .into_iter()
        .filter(|s| oracle_is_conflict_free(f, s))
        .collect();
    let mut maximal: Vec<ArgumentSet> = candidates
        .iter()
        .filter(|s| {
            !candidates
                .iter()
                .any(|t| t.len() > s.len() && s.is_subset(t))
        })
        .cloned()
        .collect();
    maximal.sort();
    maximal
}

/// Cycle check on the subgraph induced by `keep`, by three-color depth
/// first search over the raw attack list.
pub fn oracle_is_acyclic(f: &Framework, keep: &ArgumentSet) -> bool {
    let mut succ: BTreeMap<&String, Vec<&String>> = BTreeMap::new();
    for (a, b) in f.attacks() {
        if keep.contains(a) && keep.contains(b) {
            succ.entry(a).or_default().push(b);
        }
    }
    // 0 unvisited, 1 on the current path, 2 done
    let mut color: BTreeMap<&String, u8> = keep.iter().map(|x| (x, 0u8)).collect();
    fn visit<'a>(
        x: &'a String,
        succ: &BTreeMap<&'a String, Vec<&'a String>>,
        color: &mut BTreeMap<&'a String, u8>,
    ) -> bool {
        color.insert(x, 1);
        for y in succ.get(x).into_iter().flatten() {
            match color[*y] {
                1 => return false,
                0 => {
                    if !visit(y, succ, color) {
                        return false;
                    }
                }
                _ => {}
            }
        }
        color.insert(x, 2);
        true
    }
    let names: Vec<&String> = keep.iter().collect();
    for x in names {
        if color[x] == 0 && !visit(x, &succ, &mut color) {
            return false;
        }
    }
    true
}

fn oracle_busting_sets(f: &Framework) -> Vec<ArgumentSet> {
    subsets(f.args())
        .into_iter()
        .filter(|b| {
            let keep: ArgumentSet = f.args().difference(b).cloned().collect();
            oracle_is_acyclic(f, &keep)
        })
        .collect()
}

/// Inclusion-minimal removal sets that leave the framework acyclic.
pub fn oracle_minimal_busters(f: &Framework) -> Vec<ArgumentSet> {
    let busting = oracle_busting_sets(f);
    let mut minimal: Vec<ArgumentSet> = busting
        .iter()
        .filter(|b| !busting.iter().any(|c| c.len() < b.len() && c.is_subset(b)))
        .cloned()
        .collect();
    minimal.sort();
    minimal
}

/// Minimum-cardinality removal sets that leave the framework acyclic.
pub fn oracle_minimum_busters(f: &Framework) -> Vec<ArgumentSet> {
    let busting = oracle_busting_sets(f);
    let best = busting.iter().map(|b| b.len()).min().unwrap_or(0);
    let mut minimum: Vec<ArgumentSet> = busting.into_iter().filter(|b| b.len() == best).collect();
    minimum.sort();
    minimum
}

/// All complete labellings by scanning every assignment: accepted needs
/// all attackers rejected, rejected needs an accepted attacker, undecided
/// needs no accepted attacker and some undecided one.
pub fn oracle_complete_labellings(f: &Framework) -> Vec<Labelling> {
    let names: Vec<&String> = f.args().iter().collect();
    let attackers = f.attacker_map();
    let mut found = Vec::new();
    let total = 3usize.pow(names.len() as u32);
    for code in 0..total {
        let mut c = code;
        let mut lab = Labelling::new();
        for name in &names {
            let label = match c % 3 {
                0 => Label::In,
                1 => Label::Out,
                _ => Label::Und,
            };
            c /= 3;
            lab.insert((*name).clone(), label);
        }
        let legal = names.iter().all(|name| {
            let atts = &attackers[*name];
            let some_in = atts.iter().any(|a| lab[a] == Label::In);
            let all_out = atts.iter().all(|a| lab[a] == Label::Out);
            match lab[*name] {
                Label::In => all_out,
                Label::Out => some_in,
                Label::Und => !some_in && !all_out,
            }
        });
        if legal {
            found.push(lab);
        }
    }
    found
}

/// Right-hand side recomputed with local arithmetic, mirroring the clamp
/// and no-attacker rules.
pub fn oracle_h_value(
    kind: Combinator,
    clamped: bool,
    terms: &[Vec<String>],
    v: &Valuation,
) -> f64 {
    if clamped {
        return 0.0;
    }
    if terms.is_empty() {
        return 1.0;
    }
    match kind {
        Combinator::Max => {
            let strongest = terms
                .iter()
                .map(|g| g.iter().map(|m| v[m]).fold(f64::INFINITY, f64::min))
                .fold(f64::NEG_INFINITY, f64::max);
            1.0 - strongest
        }
        Combinator::Product => terms
            .iter()
            .map(|g| 1.0 - g.iter().map(|m| v[m]).product::<f64>())
            .product(),
    }
}

/// Grid solutions over {0, 1/2, 1} by full scan with its own arithmetic;
/// a solution must match its right-hand side exactly.
pub fn oracle_crisp_solutions(sys: &EquationSystem) -> Vec<Valuation> {
    let vars: Vec<String> = sys.variables().into_iter().collect();
    let mut found = Vec::new();
    let total = 3usize.pow(vars.len() as u32);
    for code in 0..total {
        let mut c = code;
        let mut v = Valuation::new();
        for var in &vars {
            v.insert(var.clone(), [0.0, 0.5, 1.0][c % 3]);
            c /= 3;
        }
        let solves = vars.iter().all(|x| {
            let eq = sys.equation(x).unwrap();
            let want = oracle_h_value(sys.kind(), eq.clamped, &eq.terms, &v);
            v[x] == want
        });
        if solves {
            found.push(v);
        }
    }
    found
}

/// Value-1 members of a {0,1}-valued valuation; `None` if any value is
/// neither 0 nor 1.
pub fn crisp_extension(v: &Valuation) -> Option<ArgumentSet> {
    let mut ext = ArgumentSet::new();
    for (name, &x) in v {
        if x == 1.0 {
            ext.insert(name.clone());
        } else if x != 0.0 {
            return None;
        }
    }
    Some(ext)
}

/// Grounded decisions by naive framework-level fixpoint: an argument
/// becomes 1 when all its attackers are 0, and 0 when some attacker is 1.
pub fn oracle_grounded_decided(f: &Framework) -> BTreeMap<String, bool> {
    let attackers = f.attacker_map();
    let mut decided: BTreeMap<String, bool> = BTreeMap::new();
    loop {
        let mut changed = false;
        for name in f.args() {
            if decided.contains_key(name) {
                continue;
            }
            let atts = &attackers[name];
            if atts.iter().all(|a| decided.get(a) == Some(&false)) {
                decided.insert(name.clone(), true);
                changed = true;
            } else if atts.iter().any(|a| decided.get(a) == Some(&true)) {
                decided.insert(name.clone(), false);
                changed = true;
            }
        }
        if !changed {
            return decided;
        }
    }
}
