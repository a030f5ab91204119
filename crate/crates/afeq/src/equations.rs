//! Equation systems over argument values in [0,1].
//!
//! Every argument `x` gets one equation driven by its attackers. Attackers
//! are stored as *groups*: a group contributes only through the joint value
//! of all its members, which is what joint attacks need; plain frameworks
//! always produce singleton groups. With `v` a valuation, the right-hand
//! side `h_x(v)` is
//!
//! - `Max` combinator: `1 - max over groups of (min over group members)`,
//! - `Product` combinator: `product over groups of (1 - product of members)`,
//!
//! and `1` when there are no groups. A *clamped* equation ignores its groups
//! and pins `x` at 0; clamping is how a loop-busting perturbation is applied
//! to a system. The graph-level counterpart, adding a fresh unattacked
//! attacker, is [`crate::af::Framework::add_zero_attackers`]; the two routes
//! decide the same values and that equivalence is covered by tests.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::af::{ArgumentSet, Framework};
use crate::solver::Valuation;

/// How attacker groups combine into `h_x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combinator {
    Max,
    Product,
}

/// Errors from equation-system operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EqError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("valuation is missing variable `{0}`")]
    MissingValue(String),
    #[error("valuation contains surplus variable `{0}`")]
    SurplusValue(String),
    #[error("value {value} for `{var}` is outside [0,1]")]
    ValueOutOfRange { var: String, value: f64 },
    #[error("equation group may not be empty (variable `{0}`)")]
    EmptyGroup(String),
    #[error("malformed equation JSON: {0}")]
    InvalidJson(String),
}

/// One equation's right-hand side: attacker groups plus the clamp flag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    /// Sorted, deduplicated groups of sorted, deduplicated member names.
    pub terms: Vec<Vec<String>>,
    /// When set, the equation reads `x = 0` regardless of the groups.
    pub clamped: bool,
}

impl Equation {
    fn normalized(mut terms: Vec<Vec<String>>, clamped: bool) -> Self {
        for group in &mut terms {
            group.sort();
            group.dedup();
        }
        terms.sort();
        terms.dedup();
        Equation { terms, clamped }
    }

    /// Every variable mentioned by any group.
    pub fn mentioned(&self) -> ArgumentSet {
        self.terms.iter().flatten().cloned().collect()
    }
}

/// A fixed-point system: one equation per variable under one combinator.
#[derive(Debug, Clone, PartialEq)]
pub struct EquationSystem {
    kind: Combinator,
    eqs: BTreeMap<String, Equation>,
}

impl EquationSystem {
    /// Builds a system from raw parts, validating that groups are nonempty
    /// and only mention declared variables. Groups and members are sorted
    /// and deduplicated.
    pub fn from_raw(kind: Combinator, eqs: BTreeMap<String, Equation>) -> Result<Self, EqError> {
        let normalized: BTreeMap<String, Equation> = eqs
            .into_iter()
            .map(|(var, eq)| (var, Equation::normalized(eq.terms, eq.clamped)))
            .collect();
        for (var, eq) in &normalized {
            for group in &eq.terms {
                if group.is_empty() {
                    return Err(EqError::EmptyGroup(var.clone()));
                }
                for member in group {
                    if !normalized.contains_key(member) {
                        return Err(EqError::UnknownVariable(member.clone()));
                    }
                }
            }
        }
        Ok(EquationSystem {
            kind,
            eqs: normalized,
        })
    }

    pub fn kind(&self) -> Combinator {
        self.kind
    }

    pub fn eqs(&self) -> &BTreeMap<String, Equation> {
        &self.eqs
    }

    pub fn equation(&self, var: &str) -> Option<&Equation> {
        self.eqs.get(var)
    }

    pub fn variables(&self) -> ArgumentSet {
        self.eqs.keys().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.eqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eqs.is_empty()
    }

    /// Right-hand side of `var`'s equation, with values drawn from `lookup`.
    /// `lookup` must cover every mentioned variable.
    pub fn h_value(&self, var: &str, lookup: &dyn Fn(&str) -> f64) -> f64 {
        let eq = &self.eqs[var];
        if eq.clamped {
            return 0.0;
        }
        if eq.terms.is_empty() {
            return 1.0;
        }
        match self.kind {
            Combinator::Max => {
                let strongest = eq
                    .terms
                    .iter()
                    .map(|group| {
                        group
                            .iter()
                            .map(|m| lookup(m))
                            .fold(f64::INFINITY, f64::min)
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                1.0 - strongest
            }
            Combinator::Product => eq
                .terms
                .iter()
                .map(|group| 1.0 - group.iter().map(|m| lookup(m)).product::<f64>())
                .product(),
        }
    }

    /// JSON form: `{"vars":[...],"eqs":{"x":{"op":..,"atk":..,"clamped":..}}}`.
    /// `op` is `"one"` for an unclamped equation with no groups, otherwise
    /// the system combinator (`"max"` or `"prod"`). Singleton groups print
    /// as bare names, larger groups as arrays.
    pub fn to_json(&self) -> Value {
        let kind_str = match self.kind {
            Combinator::Max => "max",
            Combinator::Product => "prod",
        };
        let mut eqs = Map::new();
        for (var, eq) in &self.eqs {
            let op = if eq.terms.is_empty() && !eq.clamped {
                "one"
            } else {
                kind_str
            };
            let atk: Vec<Value> = eq
                .terms
                .iter()
                .map(|group| {
                    if group.len() == 1 {
                        Value::String(group[0].clone())
                    } else {
                        Value::Array(group.iter().cloned().map(Value::String).collect())
                    }
                })
                .collect();
            eqs.insert(
                var.clone(),
                json!({"op": op, "atk": atk, "clamped": eq.clamped}),
            );
        }
        json!({
            "vars": self.eqs.keys().cloned().collect::<Vec<_>>(),
            "eqs": Value::Object(eqs),
        })
    }

    /// Reads a system back from its JSON form. All non-`"one"` ops must
    /// agree; a system whose every equation is `"one"` reads as `Max`
    /// (the combinators are indistinguishable without attackers).
    pub fn from_json(value: &Value) -> Result<Self, EqError> {
        let obj = value
            .as_object()
            .ok_or_else(|| EqError::InvalidJson("expected an object".into()))?;
        let vars = obj
            .get("vars")
            .and_then(Value::as_array)
            .ok_or_else(|| EqError::InvalidJson("missing `vars` array".into()))?;
        let eq_obj = obj
            .get("eqs")
            .and_then(Value::as_object)
            .ok_or_else(|| EqError::InvalidJson("missing `eqs` object".into()))?;
        let mut declared = ArgumentSet::new();
        for v in vars {
            let name = v
                .as_str()
                .ok_or_else(|| EqError::InvalidJson("`vars` entries must be strings".into()))?;
            declared.insert(name.to_string());
        }
        if declared.len() != eq_obj.len() || !eq_obj.keys().all(|k| declared.contains(k)) {
            return Err(EqError::InvalidJson(
                "`vars` and `eqs` keys must coincide".into(),
            ));
        }
        let mut kind: Option<Combinator> = None;
        let mut eqs = BTreeMap::new();
        for (var, spec) in eq_obj {
            let spec = spec.as_object().ok_or_else(|| {
                EqError::InvalidJson(format!("equation `{var}` must be an object"))
            })?;
            let op = spec
                .get("op")
                .and_then(Value::as_str)
                .ok_or_else(|| EqError::InvalidJson(format!("equation `{var}` missing `op`")))?;
            let clamped = spec
                .get("clamped")
                .and_then(Value::as_bool)
                .ok_or_else(|| {
                    EqError::InvalidJson(format!("equation `{var}` missing `clamped`"))
                })?;
            let atk = spec
                .get("atk")
                .and_then(Value::as_array)
                .ok_or_else(|| EqError::InvalidJson(format!("equation `{var}` missing `atk`")))?;
            let mut terms = Vec::new();
            for entry in atk {
                match entry {
                    Value::String(name) => terms.push(vec![name.clone()]),
                    Value::Array(names) => {
                        let mut group = Vec::new();
                        for n in names {
                            let n = n.as_str().ok_or_else(|| {
                                EqError::InvalidJson("group members must be strings".into())
                            })?;
                            group.push(n.to_string());
                        }
                        terms.push(group);
                    }
                    _ => {
                        return Err(EqError::InvalidJson(
                            "`atk` entries must be names or arrays of names".into(),
                        ))
                    }
                }
            }
            match op {
                "one" => {
                    if !terms.is_empty() || clamped {
                        return Err(EqError::InvalidJson(format!(
                            "equation `{var}`: op `one` requires no attackers and no clamp"
                        )));
                    }
                }
                "max" | "prod" => {
                    let this = if op == "max" {
                        Combinator::Max
                    } else {
                        Combinator::Product
                    };
                    match kind {
                        None => kind = Some(this),
                        Some(k) if k == this => {}
                        Some(_) => {
                            return Err(EqError::InvalidJson(
                                "mixed `max` and `prod` ops in one system".into(),
                            ))
                        }
                    }
                }
                other => {
                    return Err(EqError::InvalidJson(format!(
                        "equation `{var}`: unknown op `{other}`"
                    )))
                }
            }
            eqs.insert(var.clone(), Equation { terms, clamped });
        }
        Self::from_raw(kind.unwrap_or(Combinator::Max), eqs)
    }
}

/// Per-variable deviation of a valuation from being a solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub deviations: BTreeMap<String, f64>,
    pub max_residual: f64,
}

/// One equation per argument of `f`: the attackers of `x`, each its own
/// singleton group; unattacked arguments get the constant-one equation.
pub fn build_equations(f: &Framework, kind: Combinator) -> EquationSystem {
    let mut eqs = BTreeMap::new();
    for (arg, attackers) in f.attacker_map() {
        let terms: Vec<Vec<String>> = attackers.into_iter().map(|a| vec![a]).collect();
        eqs.insert(
            arg,
            Equation {
                terms,
                clamped: false,
            },
        );
    }
    EquationSystem::from_raw(kind, eqs).expect("framework attacks reference declared arguments")
}

/// Clamps every variable of `zero` to 0. Idempotent; the rest of the system
/// is untouched.
pub fn perturb(sys: &EquationSystem, zero: &ArgumentSet) -> Result<EquationSystem, EqError> {
    let mut out = sys.clone();
    for var in zero {
        match out.eqs.get_mut(var) {
            Some(eq) => eq.clamped = true,
            None => return Err(EqError::UnknownVariable(var.clone())),
        }
    }
    Ok(out)
}

/// Deviation `|v(x) - h_x(v)|` per variable; clamped variables deviate by
/// `|v(x)|`. The valuation must cover exactly the system's variables, with
/// values in [0,1] (a hair of slack for accumulated rounding).
pub fn evaluate(sys: &EquationSystem, v: &Valuation) -> Result<Residual, EqError> {
    for var in sys.eqs.keys() {
        match v.get(var) {
            None => return Err(EqError::MissingValue(var.clone())),
            Some(&x) if !(-1e-12..=1.0 + 1e-12).contains(&x) => {
                return Err(EqError::ValueOutOfRange {
                    var: var.clone(),
                    value: x,
                })
            }
            Some(_) => {}
        }
    }
    if let Some(extra) = v.keys().find(|k| !sys.eqs.contains_key(*k)) {
        return Err(EqError::SurplusValue(extra.clone()));
    }
    let lookup = |name: &str| v[name];
    let mut deviations = BTreeMap::new();
    let mut max_residual = 0.0f64;
    for var in sys.eqs.keys() {
        let d = (v[var] - sys.h_value(var, &lookup)).abs();
        max_residual = max_residual.max(d);
        deviations.insert(var.clone(), d);
    }
    Ok(Residual {
        deviations,
        max_residual,
    })
}

/// Framework whose attack relation mirrors the system: the arguments are the
/// non-clamped variables, attacked by every variable mentioned in their
/// groups. Inverse of [`build_equations`] on clamp-free systems; applied to
/// the residual system left by propagation it yields the derived network of
/// the still-undecided arguments.
pub fn network_from_equations(sys: &EquationSystem) -> Framework {
    let args: ArgumentSet = sys
        .eqs
        .iter()
        .filter(|(_, eq)| !eq.clamped)
        .map(|(var, _)| var.clone())
        .collect();
    let mut attacks = Vec::new();
    for (var, eq) in &sys.eqs {
        if eq.clamped {
            continue;
        }
        for source in eq.mentioned() {
            if args.contains(&source) {
                attacks.push((source, var.clone()));
            }
        }
    }
    Framework::from_parts(args, attacks).expect("system variables are valid argument names")
}
