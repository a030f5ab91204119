//! Extension semantics: the classical labelling-based families, the
//! recursive class-by-class semantics, and the staged loop-busting
//! protocol.
//!
//! The loop-busting protocol alternates two kinds of step on a shrinking
//! residual framework. While forced values exist it takes a *grounded*
//! step: propagate with nothing clamped and record what got decided. When
//! nothing is forced every unattacked class of the residual carries a
//! cycle, and the protocol takes a *policy* step: choose a buster set for
//! the cyclic top classes, clamp it, and propagate. Four policies pick the
//! busters:
//!
//! - `Lb1`: seed sets of minimum cardinality inside the top classes whose
//!   propagated zeros bust every top-class cycle,
//! - `Lb2`: per top class, the complement of a maximal conflict-free set
//!   of the class,
//! - `Lb3`: like `Lb1` but minimal under inclusion instead of minimum,
//! - `Lb4`: one single member per cyclic top class.
//!
//! Every branch of choices is explored; each completed run yields a trace
//! (the step-by-step decisions, plus the step index at which each argument
//! was decided) and an extension, the arguments decided 1. Policy steps
//! always decide every current top class, so the residual shrinks and the
//! protocol terminates.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::af::{AfError, ArgumentSet, Framework, Label, Labelling};
use crate::loops::{is_loop_buster, scan_subsets_ascending, scc_decompose, BusterKind, BusterSet};
use crate::solver::{decided_ones, grounded_propagate, PartialValuation, SolverError};

/// Largest framework the labelling-based semantics enumerate.
pub const CLASSICAL_ENUMERATION_BOUND: usize = 24;

/// Largest framework the class-recursive and loop-busting semantics accept.
pub const RECURSIVE_SEMANTICS_BOUND: usize = 20;

/// Every extension semantics this crate computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Semantics {
    Grounded,
    Complete,
    Stable,
    Preferred,
    Cf2,
    Lb1,
    Lb2,
    Lb3,
    Lb4,
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Semantics::Grounded => "grounded",
            Semantics::Complete => "complete",
            Semantics::Stable => "stable",
            Semantics::Preferred => "preferred",
            Semantics::Cf2 => "cf2",
            Semantics::Lb1 => "lb1",
            Semantics::Lb2 => "lb2",
            Semantics::Lb3 => "lb3",
            Semantics::Lb4 => "lb4",
        };
        write!(f, "{s}")
    }
}

impl FromStr for Semantics {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "grounded" => Semantics::Grounded,
            "complete" => Semantics::Complete,
            "stable" => Semantics::Stable,
            "preferred" => Semantics::Preferred,
            "cf2" => Semantics::Cf2,
            "lb1" => Semantics::Lb1,
            "lb2" => Semantics::Lb2,
            "lb3" => Semantics::Lb3,
            "lb4" => Semantics::Lb4,
            other => return Err(format!("unknown semantics `{other}`")),
        })
    }
}

/// A loop-busting policy; see the module doc.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    Lb1,
    Lb2,
    Lb3,
    Lb4,
}

impl From<Policy> for Semantics {
    fn from(p: Policy) -> Semantics {
        match p {
            Policy::Lb1 => Semantics::Lb1,
            Policy::Lb2 => Semantics::Lb2,
            Policy::Lb3 => Semantics::Lb3,
            Policy::Lb4 => Semantics::Lb4,
        }
    }
}

/// Tuning for the seed-searching policies.
///
/// `Lb1` and `Lb3` measure their seeds over the union of the top classes by
/// default. With `per_class_minimality` the minimum or minimality is taken
/// class by class and the per-class picks are joined. Top classes attack
/// neither each other nor themselves from outside, so the two readings give
/// the same extensions; the flag exists to make that checkable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LbOptions {
    pub per_class_minimality: bool,
}

/// Errors from semantics computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemanticsError {
    #[error("framework has {count} arguments, over the bound of {bound}")]
    TooManyArguments { count: usize, bound: usize },
    #[error("`{0}` is not a classical labelling semantics")]
    NotClassical(Semantics),
    #[error("the given class is not a top class of the framework")]
    NotTopClass,
    #[error("policy produced no buster for a cyclic residual")]
    NoBusterForCyclicResidual,
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Af(#[from] AfError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Extensions under one semantics, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionSet {
    pub semantics: Semantics,
    pub extensions: Vec<ArgumentSet>,
}

impl ExtensionSet {
    fn from_sets(semantics: Semantics, sets: impl IntoIterator<Item = ArgumentSet>) -> Self {
        let dedup: BTreeSet<ArgumentSet> = sets.into_iter().collect();
        ExtensionSet {
            semantics,
            extensions: dedup.into_iter().collect(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "semantics": self.semantics.to_string(),
            "extensions": self
                .extensions
                .iter()
                .map(|e| e.iter().cloned().collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })
    }
}

/// One step of a loop-busting run: the clamped buster (empty for a
/// grounded step) and everything the step decided.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LbStep {
    pub buster: ArgumentSet,
    pub decided: PartialValuation,
}

/// One completed loop-busting run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LbTrace {
    pub steps: Vec<LbStep>,
    /// 1-based index of the step that decided each argument.
    pub rank: BTreeMap<String, usize>,
    /// The arguments decided 1.
    pub extension: ArgumentSet,
}

impl LbTrace {
    pub fn to_json(&self) -> Value {
        let steps: Vec<Value> = self
            .steps
            .iter()
            .map(|step| {
                let decided: Map<String, Value> = step
                    .decided
                    .iter()
                    .map(|(k, &v)| (k.clone(), json!(if v { 1 } else { 0 })))
                    .collect();
                json!({
                    "buster": step.buster.iter().cloned().collect::<Vec<_>>(),
                    "decided": decided,
                })
            })
            .collect();
        json!({
            "steps": steps,
            "rank": self.rank,
            "extension": self.extension.iter().cloned().collect::<Vec<_>>(),
        })
    }
}

/// Difference between two extension sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffReport {
    pub left: Semantics,
    pub right: Semantics,
    pub equal: bool,
    pub only_left: Vec<ArgumentSet>,
    pub only_right: Vec<ArgumentSet>,
}

impl DiffReport {
    pub fn to_json(&self) -> Value {
        let lists = |v: &[ArgumentSet]| -> Vec<Vec<String>> {
            v.iter().map(|e| e.iter().cloned().collect()).collect()
        };
        json!({
            "left": self.left.to_string(),
            "right": self.right.to_string(),
            "equal": self.equal,
            "only_left": lists(&self.only_left),
            "only_right": lists(&self.only_right),
        })
    }
}

/// Lists the extensions both ways and what each side has over the other.
pub fn compare(left: &ExtensionSet, right: &ExtensionSet) -> DiffReport {
    let l: BTreeSet<&ArgumentSet> = left.extensions.iter().collect();
    let r: BTreeSet<&ArgumentSet> = right.extensions.iter().collect();
    let only_left: Vec<ArgumentSet> = l.difference(&r).map(|e| (*e).clone()).collect();
    let only_right: Vec<ArgumentSet> = r.difference(&l).map(|e| (*e).clone()).collect();
    DiffReport {
        left: left.semantics,
        right: right.semantics,
        equal: only_left.is_empty() && only_right.is_empty(),
        only_left,
        only_right,
    }
}

/// All complete labellings: every argument is `In` with all attackers
/// `Out`, `Out` with some attacker `In`, or `Und` with no attacker `In`
/// and some attacker `Und`.
pub fn complete_labellings(f: &Framework) -> Result<Vec<Labelling>, SemanticsError> {
    complete_labellings_bounded(f, CLASSICAL_ENUMERATION_BOUND)
}

/// [`complete_labellings`] with an explicit argument-count bound.
pub fn complete_labellings_bounded(
    f: &Framework,
    bound: usize,
) -> Result<Vec<Labelling>, SemanticsError> {
    if f.args().len() > bound {
        return Err(SemanticsError::TooManyArguments {
            count: f.args().len(),
            bound,
        });
    }
    let names: Vec<String> = f.args().iter().cloned().collect();
    let index: BTreeMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let n = names.len();
    let mut attackers: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut targets: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, t) in f.attacks() {
        attackers[index[t.as_str()]].push(index[s.as_str()]);
        targets[index[s.as_str()]].push(index[t.as_str()]);
    }

    // partial consistency of one argument's constraint; conclusive failures
    // only, unassigned attackers keep everything open
    let admissible = |assign: &[Option<Label>], j: usize| -> bool {
        match assign[j] {
            None => true,
            Some(Label::In) => attackers[j]
                .iter()
                .all(|&a| !matches!(assign[a], Some(Label::In) | Some(Label::Und))),
            Some(Label::Out) => {
                attackers[j].iter().any(|&a| assign[a].is_none())
                    || attackers[j].iter().any(|&a| assign[a] == Some(Label::In))
            }
            Some(Label::Und) => {
                if attackers[j].iter().any(|&a| assign[a] == Some(Label::In)) {
                    return false;
                }
                attackers[j].iter().any(|&a| assign[a].is_none())
                    || attackers[j].iter().any(|&a| assign[a] == Some(Label::Und))
            }
        }
    };

    fn walk(
        depth: usize,
        names: &[String],
        targets: &[Vec<usize>],
        admissible: &dyn Fn(&[Option<Label>], usize) -> bool,
        assign: &mut Vec<Option<Label>>,
        out: &mut Vec<Labelling>,
    ) {
        if depth == names.len() {
            out.push(
                names
                    .iter()
                    .enumerate()
                    .map(|(i, name)| (name.clone(), assign[i].unwrap()))
                    .collect(),
            );
            return;
        }
        for label in [Label::In, Label::Out, Label::Und] {
            assign[depth] = Some(label);
            let ok =
                admissible(assign, depth) && targets[depth].iter().all(|&t| admissible(assign, t));
            if ok {
                walk(depth + 1, names, targets, admissible, assign, out);
            }
            assign[depth] = None;
        }
    }

    let mut assign: Vec<Option<Label>> = vec![None; n];
    let mut out = Vec::new();
    walk(0, &names, &targets, &admissible, &mut assign, &mut out);
    Ok(out)
}

fn in_set(l: &Labelling) -> ArgumentSet {
    l.iter()
        .filter(|(_, &lab)| lab == Label::In)
        .map(|(k, _)| k.clone())
        .collect()
}

/// Extensions of the classical semantics. Grounded works at any size; the
/// enumerating semantics are bounded.
pub fn classical_extensions(f: &Framework, sem: Semantics) -> Result<ExtensionSet, SemanticsError> {
    classical_extensions_bounded(f, sem, CLASSICAL_ENUMERATION_BOUND)
}

/// [`classical_extensions`] with an explicit argument-count bound.
pub fn classical_extensions_bounded(
    f: &Framework,
    sem: Semantics,
    bound: usize,
) -> Result<ExtensionSet, SemanticsError> {
    match sem {
        Semantics::Grounded => {
            let (decided, _) = grounded_propagate(f, &ArgumentSet::new())?;
            Ok(ExtensionSet::from_sets(sem, [decided_ones(&decided)]))
        }
        Semantics::Complete => {
            let labellings = complete_labellings_bounded(f, bound)?;
            Ok(ExtensionSet::from_sets(sem, labellings.iter().map(in_set)))
        }
        Semantics::Stable => {
            let labellings = complete_labellings_bounded(f, bound)?;
            Ok(ExtensionSet::from_sets(
                sem,
                labellings
                    .iter()
                    .filter(|l| l.values().all(|&lab| lab != Label::Und))
                    .map(in_set),
            ))
        }
        Semantics::Preferred => {
            let labellings = complete_labellings_bounded(f, bound)?;
            let ins: BTreeSet<ArgumentSet> = labellings.iter().map(in_set).collect();
            Ok(ExtensionSet::from_sets(
                sem,
                ins.iter()
                    .filter(|e| !ins.iter().any(|o| *e != o && e.is_subset(o)))
                    .cloned(),
            ))
        }
        other => Err(SemanticsError::NotClassical(other)),
    }
}

fn cf2_sets(f: &Framework) -> Vec<ArgumentSet> {
    if f.args().is_empty() {
        return vec![ArgumentSet::new()];
    }
    let d = scc_decompose(f);
    if d.classes().len() == 1 {
        return f.maximal_conflict_free_sets();
    }
    let mut partials: Vec<ArgumentSet> = vec![ArgumentSet::new()];
    for idx in d.topological_order() {
        let class = &d.classes()[idx];
        let mut next = Vec::new();
        for chosen in &partials {
            let survivors: ArgumentSet = class
                .iter()
                .filter(|x| {
                    !chosen
                        .iter()
                        .any(|y| !class.contains(y) && f.has_attack(y, x))
                })
                .cloned()
                .collect();
            let sub = f
                .restrict(&survivors)
                .expect("class members are arguments of the framework");
            for local in cf2_sets(&sub) {
                let mut joined = chosen.clone();
                joined.extend(local);
                next.push(joined);
            }
        }
        partials = next;
    }
    partials
}

/// Extensions of the class-recursive semantics: maximal conflict-free sets
/// on a single strongly connected class, otherwise classes are processed in
/// quotient order, each class reduced by the attacks chosen members aim
/// into it, with the semantics applied recursively to what survives.
pub fn cf2_extensions(f: &Framework) -> Result<ExtensionSet, SemanticsError> {
    cf2_extensions_bounded(f, RECURSIVE_SEMANTICS_BOUND)
}

/// [`cf2_extensions`] with an explicit argument-count bound.
pub fn cf2_extensions_bounded(f: &Framework, bound: usize) -> Result<ExtensionSet, SemanticsError> {
    if f.args().len() > bound {
        return Err(SemanticsError::TooManyArguments {
            count: f.args().len(),
            bound,
        });
    }
    Ok(ExtensionSet::from_sets(Semantics::Cf2, cf2_sets(f)))
}

/// The busters of one top class under the class-recursive reading: the
/// complements of the maximal conflict-free sets of the class, tagged raw.
/// Errors unless `class` is a top class of `f`.
pub fn cf2_busters_for_class(
    f: &Framework,
    class: &ArgumentSet,
) -> Result<Vec<BusterSet>, SemanticsError> {
    let d = scc_decompose(f);
    let is_top = d
        .top_class_indices()
        .into_iter()
        .any(|i| &d.classes()[i] == class);
    if !is_top {
        return Err(SemanticsError::NotTopClass);
    }
    let mut busters: Vec<BusterSet> = mcf_complements(f, class)
        .into_iter()
        .map(|members| BusterSet {
            members,
            kind: BusterKind::Raw,
            induced_zero: ArgumentSet::new(),
        })
        .collect();
    busters.sort_by(|a, b| a.members.cmp(&b.members));
    Ok(busters)
}

fn mcf_complements(f: &Framework, class: &ArgumentSet) -> Vec<ArgumentSet> {
    let sub = f
        .restrict(class)
        .expect("class members are arguments of the framework");
    sub.maximal_conflict_free_sets()
        .into_iter()
        .map(|kept| class.difference(&kept).cloned().collect())
        .collect()
}

/// Extensions and traces of the loop-busting protocol under a policy.
pub fn lb_extensions(
    f: &Framework,
    policy: Policy,
) -> Result<(ExtensionSet, Vec<LbTrace>), SemanticsError> {
    lb_extensions_with(f, policy, LbOptions::default(), RECURSIVE_SEMANTICS_BOUND)
}

/// [`lb_extensions`] with explicit options and argument-count bound.
pub fn lb_extensions_with(
    f: &Framework,
    policy: Policy,
    opts: LbOptions,
    bound: usize,
) -> Result<(ExtensionSet, Vec<LbTrace>), SemanticsError> {
    if f.args().len() > bound {
        return Err(SemanticsError::TooManyArguments {
            count: f.args().len(),
            bound,
        });
    }
    let mut steps: Vec<LbStep> = Vec::new();
    let mut traces: Vec<LbTrace> = Vec::new();
    descend(f, f.args(), policy, opts, &mut steps, &mut traces)?;
    let extensions = traces.iter().map(|t| t.extension.clone());
    Ok((ExtensionSet::from_sets(policy.into(), extensions), traces))
}

fn descend(
    residual: &Framework,
    all_args: &ArgumentSet,
    policy: Policy,
    opts: LbOptions,
    steps: &mut Vec<LbStep>,
    traces: &mut Vec<LbTrace>,
) -> Result<(), SemanticsError> {
    if residual.args().is_empty() {
        traces.push(finish_trace(steps, all_args)?);
        return Ok(());
    }
    let (decided, rest) = grounded_propagate(residual, &ArgumentSet::new())?;
    if !decided.is_empty() {
        steps.push(LbStep {
            buster: ArgumentSet::new(),
            decided,
        });
        descend(&rest, all_args, policy, opts, steps, traces)?;
        steps.pop();
        return Ok(());
    }
    let choices = policy_choices(residual, policy, opts)?;
    if choices.is_empty() {
        return Err(SemanticsError::NoBusterForCyclicResidual);
    }
    for buster in choices {
        let (decided, rest) = grounded_propagate(residual, &buster)?;
        steps.push(LbStep { buster, decided });
        descend(&rest, all_args, policy, opts, steps, traces)?;
        steps.pop();
    }
    Ok(())
}

fn finish_trace(steps: &[LbStep], all_args: &ArgumentSet) -> Result<LbTrace, SemanticsError> {
    let mut rank = BTreeMap::new();
    let mut extension = ArgumentSet::new();
    for (i, step) in steps.iter().enumerate() {
        for (arg, &one) in &step.decided {
            if rank.insert(arg.clone(), i + 1).is_some() {
                return Err(SemanticsError::Internal(format!(
                    "argument `{arg}` decided twice"
                )));
            }
            if one {
                extension.insert(arg.clone());
            }
        }
    }
    if rank.len() != all_args.len() {
        return Err(SemanticsError::Internal(
            "run ended with undecided arguments".into(),
        ));
    }
    Ok(LbTrace {
        steps: steps.to_vec(),
        rank,
        extension,
    })
}

/// Buster choices for the cyclic top classes of `residual`, one joint set
/// per way of choosing. Pre: propagation decided nothing, so every top
/// class is cyclic.
fn policy_choices(
    residual: &Framework,
    policy: Policy,
    opts: LbOptions,
) -> Result<Vec<ArgumentSet>, SemanticsError> {
    let d = scc_decompose(residual);
    let tops: Vec<ArgumentSet> = d
        .top_class_indices()
        .into_iter()
        .map(|i| d.classes()[i].clone())
        .collect();
    debug_assert!(tops
        .iter()
        .all(|cls| cls.len() > 1 || cls.iter().any(|m| residual.has_attack(m, m))));
    match policy {
        Policy::Lb2 => {
            let per_class: Vec<Vec<ArgumentSet>> = tops
                .iter()
                .map(|cls| mcf_complements(residual, cls))
                .collect();
            Ok(join_per_class(per_class))
        }
        Policy::Lb4 => {
            let per_class: Vec<Vec<ArgumentSet>> = tops
                .iter()
                .map(|cls| {
                    cls.iter()
                        .map(|m| [m.clone()].into_iter().collect())
                        .collect()
                })
                .collect();
            Ok(join_per_class(per_class))
        }
        Policy::Lb1 | Policy::Lb3 => {
            let minimum_only = policy == Policy::Lb1;
            if opts.per_class_minimality {
                let mut per_class = Vec::new();
                for cls in &tops {
                    per_class.push(seed_scan(residual, cls, minimum_only)?);
                }
                Ok(join_per_class(per_class))
            } else {
                let union: ArgumentSet = tops.iter().flatten().cloned().collect();
                seed_scan(residual, &union, minimum_only)
            }
        }
    }
}

/// Seeds within `scope` whose propagated zeros bust every cycle of the
/// restriction of `residual` to `scope`, minimal or minimum per the flag.
fn seed_scan(
    residual: &Framework,
    scope: &ArgumentSet,
    minimum_only: bool,
) -> Result<Vec<ArgumentSet>, SemanticsError> {
    let scoped = residual.restrict(scope)?;
    let universe: Vec<String> = scope.iter().cloned().collect();
    Ok(scan_subsets_ascending(&universe, minimum_only, |seed| {
        let (decided, _) = grounded_propagate(residual, seed)
            .expect("seeds are drawn from the residual arguments");
        let zeros: ArgumentSet = decided
            .iter()
            .filter(|(arg, &v)| !v && scope.contains(*arg))
            .map(|(arg, _)| arg.clone())
            .collect();
        is_loop_buster(&scoped, &zeros).expect("zeros are drawn from the scope")
    }))
}

/// Cartesian join across classes: one variant from each, unioned.
fn join_per_class(per_class: Vec<Vec<ArgumentSet>>) -> Vec<ArgumentSet> {
    let mut acc: Vec<ArgumentSet> = vec![ArgumentSet::new()];
    for variants in per_class {
        let mut next = Vec::with_capacity(acc.len() * variants.len());
        for base in &acc {
            for variant in &variants {
                let mut joined = base.clone();
                joined.extend(variant.iter().cloned());
                next.push(joined);
            }
        }
        acc = next;
    }
    acc
}

/// Computes extensions under any semantics; loop-busting ones also return
/// their traces.
pub fn solve(
    f: &Framework,
    sem: Semantics,
) -> Result<(ExtensionSet, Option<Vec<LbTrace>>), SemanticsError> {
    solve_bounded(
        f,
        sem,
        CLASSICAL_ENUMERATION_BOUND,
        RECURSIVE_SEMANTICS_BOUND,
    )
}

/// [`solve`] with explicit bounds for the two enumeration families.
pub fn solve_bounded(
    f: &Framework,
    sem: Semantics,
    classical_bound: usize,
    recursive_bound: usize,
) -> Result<(ExtensionSet, Option<Vec<LbTrace>>), SemanticsError> {
    match sem {
        Semantics::Grounded | Semantics::Complete | Semantics::Stable | Semantics::Preferred => {
            Ok((classical_extensions_bounded(f, sem, classical_bound)?, None))
        }
        Semantics::Cf2 => Ok((cf2_extensions_bounded(f, recursive_bound)?, None)),
        Semantics::Lb1 => lb_with_traces(f, Policy::Lb1, recursive_bound),
        Semantics::Lb2 => lb_with_traces(f, Policy::Lb2, recursive_bound),
        Semantics::Lb3 => lb_with_traces(f, Policy::Lb3, recursive_bound),
        Semantics::Lb4 => lb_with_traces(f, Policy::Lb4, recursive_bound),
    }
}

fn lb_with_traces(
    f: &Framework,
    policy: Policy,
    bound: usize,
) -> Result<(ExtensionSet, Option<Vec<LbTrace>>), SemanticsError> {
    let (extensions, traces) = lb_extensions_with(f, policy, LbOptions::default(), bound)?;
    Ok((extensions, Some(traces)))
}
