//! Cycle structure of a framework: strongly connected classes, the class
//! quotient, and loop-busting sets.
//!
//! A set of arguments *busts* the loops of a framework when removing it
//! leaves an acyclic graph; a self-attack counts as a cycle of length one.
//! Busters come in four enumerable flavors:
//!
//! - `Absolute`: busters of minimum cardinality,
//! - `Relative`: busters minimal under inclusion,
//! - `ComputationalAbsolute` / `ComputationalRelative`: the same two
//!   measures applied to *seed* sets, judged by whether the zeros that
//!   forcing the seed propagates to (see
//!   [`crate::solver::grounded_propagate`]) bust the loops.
//!
//! The computational flavors record the propagated zero set alongside the
//! seed. `Raw` tags sets produced by other means and is not enumerable.
//! Structural minimal busters only ever contain arguments that lie on
//! cycles, so enumeration searches those; a seed off every cycle can still
//! matter computationally, so the computational flavors search all
//! arguments. Enumeration is exponential in the worst case, which is why it
//! is gated behind an argument-count bound.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::{json, Value};
use thiserror::Error;

use crate::af::{AfError, ArgumentSet, Framework};
use crate::solver::{decided_zeros, grounded_propagate};

/// Largest framework [`enumerate_busters`] accepts.
pub const BUSTER_ENUMERATION_BOUND: usize = 20;

/// How a buster set was selected.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusterKind {
    Absolute,
    Relative,
    ComputationalAbsolute,
    ComputationalRelative,
    Raw,
}

impl std::fmt::Display for BusterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            BusterKind::Absolute => "absolute",
            BusterKind::Relative => "relative",
            BusterKind::ComputationalAbsolute => "comp-absolute",
            BusterKind::ComputationalRelative => "comp-relative",
            BusterKind::Raw => "raw",
        };
        write!(f, "{s}")
    }
}

/// Errors from cycle analysis.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoopsError {
    #[error("framework has {count} arguments, over the bound of {bound}")]
    TooManyArguments { count: usize, bound: usize },
    #[error("raw buster sets are tagged, not enumerated")]
    RawKindNotEnumerable,
    #[error(transparent)]
    Af(#[from] AfError),
}

/// A buster set with its selection flavor; `induced_zero` is the propagated
/// zero closure for computational flavors and empty otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BusterSet {
    pub members: ArgumentSet,
    pub kind: BusterKind,
    pub induced_zero: ArgumentSet,
}

impl BusterSet {
    pub fn to_json(&self) -> Value {
        json!({
            "members": self.members.iter().cloned().collect::<Vec<_>>(),
            "kind": self.kind.to_string(),
            "induced_zero": self.induced_zero.iter().cloned().collect::<Vec<_>>(),
        })
    }
}

/// Partition of the arguments into strongly connected classes, with the
/// acyclic quotient over class indices. Classes are sorted lexicographically
/// and indices refer to that order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccDecomposition {
    classes: Vec<ArgumentSet>,
    class_of: BTreeMap<String, usize>,
    cyclic: Vec<bool>,
    quotient_attacks: BTreeSet<(usize, usize)>,
}

impl SccDecomposition {
    pub fn classes(&self) -> &[ArgumentSet] {
        &self.classes
    }

    pub fn class_of(&self, name: &str) -> Option<usize> {
        self.class_of.get(name).copied()
    }

    /// True when the class carries a cycle: more than one member, or a
    /// single member attacking itself.
    pub fn is_cyclic_class(&self, idx: usize) -> bool {
        self.cyclic[idx]
    }

    /// Attacks between distinct classes.
    pub fn quotient_attacks(&self) -> &BTreeSet<(usize, usize)> {
        &self.quotient_attacks
    }

    /// Classes no other class attacks.
    pub fn top_class_indices(&self) -> Vec<usize> {
        (0..self.classes.len())
            .filter(|&i| !self.quotient_attacks.iter().any(|&(_, t)| t == i))
            .collect()
    }

    /// Class indices in an order compatible with the quotient, smallest
    /// index first among the available.
    pub fn topological_order(&self) -> Vec<usize> {
        let n = self.classes.len();
        let mut indegree = vec![0usize; n];
        for &(_, t) in &self.quotient_attacks {
            indegree[t] += 1;
        }
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let next = (0..n)
                .find(|&i| !placed[i] && indegree[i] == 0)
                .expect("class quotient is acyclic");
            placed[next] = true;
            order.push(next);
            for &(s, t) in &self.quotient_attacks {
                if s == next {
                    indegree[t] -= 1;
                }
            }
        }
        order
    }
}

/// Tarjan's algorithm over the attack graph, run iteratively.
pub fn scc_decompose(f: &Framework) -> SccDecomposition {
    let names: Vec<String> = f.args().iter().cloned().collect();
    let index_of: BTreeMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let n = names.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, t) in f.attacks() {
        succ[index_of[s.as_str()]].push(index_of[t.as_str()]);
    }

    const UNSEEN: usize = usize::MAX;
    let mut order = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_order = 0usize;
    let mut components: Vec<Vec<usize>> = Vec::new();

    for root in 0..n {
        if order[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        order[root] = next_order;
        low[root] = next_order;
        next_order += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < succ[v].len() {
                let w = succ[v][*pos];
                *pos += 1;
                if order[w] == UNSEEN {
                    order[w] = next_order;
                    low[w] = next_order;
                    next_order += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(order[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == order[v] {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().expect("component root still on stack");
                        on_stack[w] = false;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    components.push(component);
                }
            }
        }
    }

    let mut classes: Vec<ArgumentSet> = components
        .into_iter()
        .map(|c| c.into_iter().map(|i| names[i].clone()).collect())
        .collect();
    classes.sort();
    let mut class_of = BTreeMap::new();
    for (i, class) in classes.iter().enumerate() {
        for member in class {
            class_of.insert(member.clone(), i);
        }
    }
    let cyclic: Vec<bool> = classes
        .iter()
        .map(|class| class.len() > 1 || class.iter().any(|m| f.has_attack(m, m)))
        .collect();
    let mut quotient_attacks = BTreeSet::new();
    for (s, t) in f.attacks() {
        let (cs, ct) = (class_of[s], class_of[t]);
        if cs != ct {
            quotient_attacks.insert((cs, ct));
        }
    }
    SccDecomposition {
        classes,
        class_of,
        cyclic,
        quotient_attacks,
    }
}

/// The unattacked classes, in class order.
pub fn top_classes(d: &SccDecomposition) -> Vec<ArgumentSet> {
    d.top_class_indices()
        .into_iter()
        .map(|i| d.classes[i].clone())
        .collect()
}

/// True when the attack graph has any cycle, self-attacks included.
pub fn has_cycle(f: &Framework) -> bool {
    scc_decompose(f).cyclic.iter().any(|&c| c)
}

/// Arguments lying on at least one cycle: the members of cyclic classes.
pub fn cycle_arguments(f: &Framework) -> ArgumentSet {
    let d = scc_decompose(f);
    d.classes
        .iter()
        .zip(&d.cyclic)
        .filter(|(_, &cyclic)| cyclic)
        .flat_map(|(class, _)| class.iter().cloned())
        .collect()
}

/// True when every argument lies on some cycle.
pub fn is_complete_loop(f: &Framework) -> bool {
    cycle_arguments(f).len() == f.args().len()
}

/// True when removing `b` leaves the framework acyclic.
pub fn is_loop_buster(f: &Framework, b: &ArgumentSet) -> Result<bool, AfError> {
    if let Some(missing) = b.iter().find(|x| !f.contains(x)) {
        return Err(AfError::UnknownArgument(missing.clone()));
    }
    let keep: ArgumentSet = f.args().difference(b).cloned().collect();
    Ok(!has_cycle(&f.restrict(&keep)?))
}

/// Subsets of `universe` in ascending size, then lexicographic order.
/// With `minimum_only` the first size with any hit is returned whole;
/// otherwise hits minimal under inclusion are collected (supersets of an
/// earlier hit are skipped, which is sound because any non-minimal hit has
/// a minimal hit strictly inside it, found at a smaller size).
pub(crate) fn scan_subsets_ascending(
    universe: &[String],
    minimum_only: bool,
    mut hits: impl FnMut(&ArgumentSet) -> bool,
) -> Vec<ArgumentSet> {
    fn combinations(
        universe: &[String],
        k: usize,
        start: usize,
        current: &mut Vec<String>,
        visit: &mut impl FnMut(&ArgumentSet),
    ) {
        if current.len() == k {
            visit(&current.iter().cloned().collect());
            return;
        }
        for i in start..universe.len() {
            current.push(universe[i].clone());
            combinations(universe, k, i + 1, current, visit);
            current.pop();
        }
    }

    let mut minimal: Vec<ArgumentSet> = Vec::new();
    for k in 0..=universe.len() {
        let mut level: Vec<ArgumentSet> = Vec::new();
        let mut current = Vec::new();
        combinations(universe, k, 0, &mut current, &mut |subset| {
            if !minimum_only && minimal.iter().any(|m| m.is_subset(subset)) {
                return;
            }
            if hits(subset) {
                level.push(subset.clone());
            }
        });
        if minimum_only {
            if !level.is_empty() {
                return level;
            }
        } else {
            minimal.extend(level);
        }
    }
    minimal
}

/// All buster sets of the requested flavor, sorted lexicographically by
/// members. See the module doc for what each flavor searches.
pub fn enumerate_busters(f: &Framework, kind: BusterKind) -> Result<Vec<BusterSet>, LoopsError> {
    enumerate_busters_bounded(f, kind, BUSTER_ENUMERATION_BOUND)
}

/// [`enumerate_busters`] with an explicit argument-count bound.
pub fn enumerate_busters_bounded(
    f: &Framework,
    kind: BusterKind,
    bound: usize,
) -> Result<Vec<BusterSet>, LoopsError> {
    if f.args().len() > bound {
        return Err(LoopsError::TooManyArguments {
            count: f.args().len(),
            bound,
        });
    }
    let (universe, minimum_only, computational) = match kind {
        BusterKind::Raw => return Err(LoopsError::RawKindNotEnumerable),
        BusterKind::Absolute => (cycle_arguments(f), true, false),
        BusterKind::Relative => (cycle_arguments(f), false, false),
        BusterKind::ComputationalAbsolute => (f.args().clone(), true, true),
        BusterKind::ComputationalRelative => (f.args().clone(), false, true),
    };
    let universe: Vec<String> = universe.into_iter().collect();
    let mut closures: BTreeMap<ArgumentSet, ArgumentSet> = BTreeMap::new();
    let found = scan_subsets_ascending(&universe, minimum_only, |subset| {
        if computational {
            let (decided, _) = grounded_propagate(f, subset)
                .expect("buster candidates are drawn from the arguments");
            let zeros = decided_zeros(&decided);
            let busts =
                is_loop_buster(f, &zeros).expect("propagated zeros are drawn from the arguments");
            if busts {
                closures.insert(subset.clone(), zeros);
            }
            busts
        } else {
            is_loop_buster(f, subset).expect("buster candidates are drawn from the arguments")
        }
    });
    let mut out: Vec<BusterSet> = found
        .into_iter()
        .map(|members| {
            let induced_zero = closures.remove(&members).unwrap_or_default();
            BusterSet {
                members,
                kind,
                induced_zero,
            }
        })
        .collect();
    out.sort_by(|a, b| a.members.cmp(&b.members));
    Ok(out)
}
