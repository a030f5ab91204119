//! Solvers for equation systems: damped fixed-point iteration, exhaustive
//! enumeration of crisp solutions on the {0, 1/2, 1} grid, and exact
//! propagation of forced values.
//!
//! Propagation is the bridge between numeric systems and graphs: it decides
//! every variable whose value is forced (clamped, constant-one, or pinned by
//! already-decided attackers), leaving a reduced residual system over the
//! undecided variables. Feeding a framework through
//! [`crate::equations::perturb`] and [`propagate_system`] and reading the
//! residual back with [`crate::equations::network_from_equations`] is
//! exactly grounded reasoning with a forced-zero set; [`grounded_propagate`]
//! packages that pipeline.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::af::{ArgumentSet, Framework};
use crate::equations::{
    build_equations, evaluate, network_from_equations, perturb, Combinator, EqError, Equation,
    EquationSystem,
};

/// Total assignment of values in [0,1] to variables.
pub type Valuation = BTreeMap<String, f64>;

/// Partial crisp assignment; `true` stands for 1 and `false` for 0.
pub type PartialValuation = BTreeMap<String, bool>;

/// Arguments a partial valuation sends to 1.
pub fn decided_ones(pv: &PartialValuation) -> ArgumentSet {
    pv.iter()
        .filter(|(_, &v)| v)
        .map(|(k, _)| k.clone())
        .collect()
}

/// Arguments a partial valuation sends to 0.
pub fn decided_zeros(pv: &PartialValuation) -> ArgumentSet {
    pv.iter()
        .filter(|(_, &v)| !v)
        .map(|(k, _)| k.clone())
        .collect()
}

/// Largest system [`enumerate_crisp_solutions`] accepts.
pub const CRISP_ENUMERATION_BOUND: usize = 24;

/// Starting point for fixed-point iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialValuation {
    /// Every variable starts at the given constant.
    Uniform(f64),
    /// Explicit start covering exactly the system's variables.
    Explicit(Valuation),
}

/// Knobs for [`iterate_fixed_point`].
#[derive(Debug, Clone, PartialEq)]
pub struct IterationParams {
    /// Step blend in (0,1]: 1 replaces values outright, smaller values damp.
    pub damping: f64,
    /// Convergence threshold on the max-norm residual; must be positive.
    pub tolerance: f64,
    /// Update budget before giving up.
    pub max_iterations: u64,
    pub initial: InitialValuation,
}

impl Default for IterationParams {
    fn default() -> Self {
        IterationParams {
            damping: 0.5,
            tolerance: 1e-9,
            max_iterations: 100_000,
            initial: InitialValuation::Uniform(0.5),
        }
    }
}

impl IterationParams {
    fn validate(&self) -> Result<(), SolverError> {
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(SolverError::InvalidParams(format!(
                "damping must lie in (0,1], got {}",
                self.damping
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(SolverError::InvalidParams(format!(
                "tolerance must be positive and finite, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(SolverError::InvalidParams(
                "max_iterations must be at least 1".into(),
            ));
        }
        if let InitialValuation::Uniform(c) = self.initial {
            if !(0.0..=1.0).contains(&c) {
                return Err(SolverError::InvalidParams(format!(
                    "uniform start must lie in [0,1], got {c}"
                )));
            }
        }
        Ok(())
    }
}

/// Errors from the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("no convergence after {iterations} iterations (last residual {last_residual:e})")]
    NonConvergence { iterations: u64, last_residual: f64 },
    #[error("system has {count} variables, over the bound of {bound}")]
    TooManyVariables { count: usize, bound: usize },
    #[error("invalid iteration parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Eq(#[from] EqError),
}

/// Damped synchronous iteration `v <- (1-d) v + d h(v)` until the max-norm
/// residual drops to the tolerance. Clamped variables are pinned at exactly
/// 0.0 throughout. The residual is checked before the first update, so a
/// starting point that already solves the system returns immediately.
pub fn iterate_fixed_point(
    sys: &EquationSystem,
    params: &IterationParams,
) -> Result<Valuation, SolverError> {
    params.validate()?;
    let mut v: Valuation = match &params.initial {
        InitialValuation::Uniform(c) => sys.variables().into_iter().map(|x| (x, *c)).collect(),
        InitialValuation::Explicit(given) => given.clone(),
    };
    for (var, eq) in sys.eqs() {
        if eq.clamped {
            if let Some(slot) = v.get_mut(var) {
                *slot = 0.0;
            }
        }
    }
    let d = params.damping;
    let mut iterations = 0;
    loop {
        let residual = evaluate(sys, &v)?.max_residual;
        if residual <= params.tolerance {
            return Ok(v);
        }
        if iterations == params.max_iterations {
            return Err(SolverError::NonConvergence {
                iterations,
                last_residual: residual,
            });
        }
        let lookup = |name: &str| v[name];
        let mut next = Valuation::new();
        for (var, eq) in sys.eqs() {
            let value = if eq.clamped {
                0.0
            } else {
                (1.0 - d) * v[var] + d * sys.h_value(var, &lookup)
            };
            next.insert(var.clone(), value);
        }
        v = next;
        iterations += 1;
    }
}

/// All solutions with every value in {0, 1/2, 1}, found by exhaustive
/// depth-first search with interval pruning. A solution must have residual
/// exactly 0.0. Results are sorted by their value vector (variables in
/// name order, values ascending), which is also discovery order.
pub fn enumerate_crisp_solutions(sys: &EquationSystem) -> Result<Vec<Valuation>, SolverError> {
    enumerate_crisp_solutions_bounded(sys, CRISP_ENUMERATION_BOUND)
}

/// [`enumerate_crisp_solutions`] with an explicit variable-count bound.
pub fn enumerate_crisp_solutions_bounded(
    sys: &EquationSystem,
    bound: usize,
) -> Result<Vec<Valuation>, SolverError> {
    if sys.len() > bound {
        return Err(SolverError::TooManyVariables {
            count: sys.len(),
            bound,
        });
    }
    let vars: Vec<String> = sys.variables().into_iter().collect();
    let index: BTreeMap<&str, usize> = vars
        .iter()
        .enumerate()
        .map(|(i, name)| (name.as_str(), i))
        .collect();
    const GRID: [f64; 3] = [0.0, 0.5, 1.0];
    const ZERO: [f64; 1] = [0.0];
    const ONE: [f64; 1] = [1.0];
    let domains: Vec<&[f64]> = vars
        .iter()
        .map(|x| {
            let eq = sys.equation(x).unwrap();
            if eq.clamped {
                &ZERO[..]
            } else if eq.terms.is_empty() {
                &ONE[..]
            } else {
                &GRID[..]
            }
        })
        .collect();
    // eqs to recheck once a variable gets a value: its own plus every
    // equation mentioning it
    let mut affected: Vec<Vec<usize>> = vec![Vec::new(); vars.len()];
    for (i, x) in vars.iter().enumerate() {
        affected[i].push(i);
        for member in sys.equation(x).unwrap().mentioned() {
            let j = index[member.as_str()];
            if j != i {
                affected[j].push(i);
            }
        }
    }
    let mut assigned: Vec<Option<f64>> = vec![None; vars.len()];
    let mut found = Vec::new();
    search(
        sys,
        &vars,
        &index,
        &domains,
        &affected,
        &mut assigned,
        0,
        &mut found,
    );
    Ok(found)
}

/// Bounds on `h_x` given a partial assignment: exact when every mentioned
/// variable is assigned, otherwise a closed interval containing every
/// completion. Both ends are computed with the same f64 operations as the
/// final residual, and f64 multiplication is monotone, so no completion
/// escapes the interval.
fn h_bounds(
    sys: &EquationSystem,
    x: &str,
    index: &BTreeMap<&str, usize>,
    assigned: &[Option<f64>],
) -> (f64, f64) {
    let eq = sys.equation(x).unwrap();
    if eq.clamped {
        return (0.0, 0.0);
    }
    if eq.terms.is_empty() {
        return (1.0, 1.0);
    }
    match sys.kind() {
        Combinator::Max => {
            let mut strongest_lo = f64::NEG_INFINITY;
            let mut strongest_hi = f64::NEG_INFINITY;
            for group in &eq.terms {
                let mut weakest = 1.0f64;
                let mut complete = true;
                for member in group {
                    match assigned[index[member.as_str()]] {
                        Some(value) => weakest = weakest.min(value),
                        None => complete = false,
                    }
                }
                let lo = if complete { weakest } else { 0.0 };
                strongest_lo = strongest_lo.max(lo);
                strongest_hi = strongest_hi.max(weakest);
            }
            (1.0 - strongest_hi, 1.0 - strongest_lo)
        }
        Combinator::Product => {
            let mut lo = 1.0f64;
            let mut hi = 1.0f64;
            for group in &eq.terms {
                let mut partial = 1.0f64;
                let mut complete = true;
                for member in group {
                    match assigned[index[member.as_str()]] {
                        Some(value) => partial *= value,
                        None => complete = false,
                    }
                }
                let q_hi = partial;
                let q_lo = if complete { partial } else { 0.0 };
                lo *= 1.0 - q_hi;
                hi *= 1.0 - q_lo;
            }
            (lo, hi)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn search(
    sys: &EquationSystem,
    vars: &[String],
    index: &BTreeMap<&str, usize>,
    domains: &[&[f64]],
    affected: &[Vec<usize>],
    assigned: &mut Vec<Option<f64>>,
    depth: usize,
    found: &mut Vec<Valuation>,
) {
    if depth == vars.len() {
        let complete: Valuation = vars
            .iter()
            .enumerate()
            .map(|(i, x)| (x.clone(), assigned[i].unwrap()))
            .collect();
        let lookup = |name: &str| complete[name];
        if vars.iter().all(|x| complete[x] == sys.h_value(x, &lookup)) {
            found.push(complete);
        }
        return;
    }
    for &value in domains[depth] {
        assigned[depth] = Some(value);
        let feasible = affected[depth].iter().all(|&i| match assigned[i] {
            None => true,
            Some(current) => {
                let (lo, hi) = h_bounds(sys, &vars[i], index, assigned);
                lo <= current && current <= hi
            }
        });
        if feasible {
            search(
                sys,
                vars,
                index,
                domains,
                affected,
                assigned,
                depth + 1,
                found,
            );
        }
        assigned[depth] = None;
    }
}

/// Decides every variable the system forces and reduces the rest.
///
/// A variable is decided 0 when clamped or when some group is entirely
/// decided 1; decided 1 when every group contains a decided 0 (vacuously so
/// for the constant-one equation). This closes under iteration. The
/// residual system keeps the undecided variables with their groups reduced:
/// groups holding a decided 0 drop out, decided-1 members drop from the
/// groups that remain. No residual equation is clamped or constant.
pub fn propagate_system(sys: &EquationSystem) -> (PartialValuation, EquationSystem) {
    let mut decided = PartialValuation::new();
    for (var, eq) in sys.eqs() {
        if eq.clamped {
            decided.insert(var.clone(), false);
        }
    }
    loop {
        let mut changed = false;
        for (var, eq) in sys.eqs() {
            if decided.contains_key(var) {
                continue;
            }
            let forced_zero = eq
                .terms
                .iter()
                .any(|group| group.iter().all(|m| decided.get(m) == Some(&true)));
            let forced_one = eq
                .terms
                .iter()
                .all(|group| group.iter().any(|m| decided.get(m) == Some(&false)));
            if forced_zero {
                decided.insert(var.clone(), false);
                changed = true;
            } else if forced_one {
                decided.insert(var.clone(), true);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut residual = BTreeMap::new();
    for (var, eq) in sys.eqs() {
        if decided.contains_key(var) {
            continue;
        }
        let terms: Vec<Vec<String>> = eq
            .terms
            .iter()
            .filter(|group| !group.iter().any(|m| decided.get(m) == Some(&false)))
            .map(|group| {
                group
                    .iter()
                    .filter(|m| !decided.contains_key(*m))
                    .cloned()
                    .collect()
            })
            .collect();
        residual.insert(
            var.clone(),
            Equation {
                terms,
                clamped: false,
            },
        );
    }
    let residual = EquationSystem::from_raw(sys.kind(), residual)
        .expect("reduced groups only mention undecided variables");
    (decided, residual)
}

/// Grounded reasoning with a forced-zero set: clamps `forced_zero`,
/// propagates, and returns the decided values together with the framework
/// of the still-undecided arguments. Equivalent to adding fresh unattacked
/// attackers for `forced_zero` and propagating with nothing forced.
pub fn grounded_propagate(
    f: &Framework,
    forced_zero: &ArgumentSet,
) -> Result<(PartialValuation, Framework), SolverError> {
    let sys = perturb(&build_equations(f, Combinator::Max), forced_zero)?;
    let (decided, residual) = propagate_system(&sys);
    Ok((decided, network_from_equations(&residual)))
}
