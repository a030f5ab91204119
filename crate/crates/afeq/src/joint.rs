//! Joint attacks: a set of arguments attacking a target together, with the
//! attack carrying only as much force as its weakest member.
//!
//! A [`JointFramework`] generalizes the plain attack relation to pairs of a
//! nonempty source set and a target; singleton sources are ordinary
//! attacks. The text format extends APX with `jatt([a,b],c).` facts.
//!
//! Joint frameworks can be evaluated directly ([`joint_equations`] builds
//! group equations the solvers understand) or rewritten to a plain
//! framework ([`encode_standard`]): every source of some genuinely joint
//! attack gets a mirror node `__x_<source>` it attacks, and each joint
//! attack gets a gate node `__y_<target>` attacked by the mirrors of its
//! sources and attacking its target. The gate falls only when every mirror
//! stands, that is when every source has fallen; the encoding preserves
//! crisp reasoning and the returned provenance maps every node of the
//! encoding back to its origin.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::af::{
    scan_apx_facts, valid_name, AfError, ApxFact, ArgumentSet, Framework, ParseError, ZERO_PREFIX,
};
use crate::equations::{Combinator, Equation, EquationSystem};

/// Name prefix reserved for source mirror nodes of the standard encoding.
pub const SOURCE_PREFIX: &str = "__x_";

/// Name prefix reserved for attack gate nodes of the standard encoding.
pub const GATE_PREFIX: &str = "__y_";

/// Errors from joint-framework operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JointError {
    #[error("attack on `{target}` has an empty source set")]
    EmptySourceSet { target: String },
    #[error("argument `{0}` collides with a name the encoding generates")]
    NameCollision(String),
    #[error(transparent)]
    Af(#[from] AfError),
}

/// Where a node of the standard encoding comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeOrigin {
    /// An argument of the joint framework.
    Original,
    /// The mirror of one source argument.
    SourceMirror { source: String },
    /// The gate of one joint attack.
    AttackGate {
        sources: ArgumentSet,
        target: String,
    },
}

/// Arguments plus attacks from nonempty source sets to single targets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct JointFramework {
    args: ArgumentSet,
    attacks: BTreeSet<(ArgumentSet, String)>,
}

impl JointFramework {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a joint framework, validating names, nonempty sources, and
    /// declared endpoints.
    pub fn from_parts<A, T, S>(args: A, attacks: T) -> Result<Self, JointError>
    where
        A: IntoIterator<Item = String>,
        T: IntoIterator<Item = (S, String)>,
        S: IntoIterator<Item = String>,
    {
        let args: ArgumentSet = args.into_iter().collect();
        for name in &args {
            if !valid_name(name) {
                return Err(AfError::InvalidName(name.clone()).into());
            }
        }
        let mut normalized = BTreeSet::new();
        for (sources, target) in attacks {
            let sources: ArgumentSet = sources.into_iter().collect();
            if sources.is_empty() {
                return Err(JointError::EmptySourceSet { target });
            }
            for endpoint in sources.iter().chain([&target]) {
                if !args.contains(endpoint) {
                    return Err(AfError::UnknownArgument(endpoint.clone()).into());
                }
            }
            normalized.insert((sources, target));
        }
        Ok(JointFramework {
            args,
            attacks: normalized,
        })
    }

    pub fn args(&self) -> &ArgumentSet {
        &self.args
    }

    pub fn attacks(&self) -> &BTreeSet<(ArgumentSet, String)> {
        &self.attacks
    }

    /// Serializes to the extended APX format: `arg(..).` facts, then
    /// attacks with singleton sources as `att(..).` and the rest as
    /// `jatt([..],..).`.
    pub fn serialize_japx(&self) -> String {
        let mut out = String::new();
        for arg in &self.args {
            out.push_str(&format!("arg({arg}).\n"));
        }
        for (sources, target) in &self.attacks {
            if sources.len() == 1 {
                let only = sources.iter().next().unwrap();
                out.push_str(&format!("att({only},{target}).\n"));
            } else {
                let list = sources.iter().cloned().collect::<Vec<_>>().join(",");
                out.push_str(&format!("jatt([{list}],{target}).\n"));
            }
        }
        out
    }
}

fn check_joint_name(name: &str, line: usize, args: &ArgumentSet) -> Result<(), ParseError> {
    if !valid_name(name) {
        return Err(ParseError::Syntax {
            line,
            message: format!("invalid argument name `{name}`"),
        });
    }
    for prefix in [ZERO_PREFIX, SOURCE_PREFIX, GATE_PREFIX] {
        if name.starts_with(prefix) {
            return Err(ParseError::ReservedName {
                line,
                name: name.to_string(),
            });
        }
    }
    if args.contains(name) {
        return Err(ParseError::DuplicateDeclaration {
            line,
            name: name.to_string(),
        });
    }
    Ok(())
}

/// Reads the extended APX format. `att(a,b).` is accepted as shorthand for
/// a singleton joint attack. Names starting with any reserved prefix
/// (`__z_`, `__x_`, `__y_`) are rejected.
pub fn parse_joint(text: &str) -> Result<JointFramework, ParseError> {
    let facts = scan_apx_facts(text, true)?;
    let mut args = ArgumentSet::new();
    for (line, fact) in &facts {
        if let ApxFact::Arg(name) = fact {
            check_joint_name(name, *line, &args)?;
            args.insert(name.clone());
        }
    }
    let mut attacks = BTreeSet::new();
    for (line, fact) in &facts {
        let (sources, target) = match fact {
            ApxFact::Arg(_) => continue,
            ApxFact::Att(s, t) => (vec![s.clone()], t.clone()),
            ApxFact::Jatt(sources, t) => (sources.clone(), t.clone()),
        };
        for name in sources.iter().chain([&target]) {
            if !args.contains(name) {
                return Err(ParseError::UndeclaredArgument {
                    line: *line,
                    name: name.clone(),
                });
            }
        }
        attacks.insert((sources.into_iter().collect::<ArgumentSet>(), target));
    }
    Ok(JointFramework { args, attacks })
}

/// One equation per argument with a group per incoming attack: under max
/// the group contributes the weakest source, under products the group
/// contributes the product of its sources.
pub fn joint_equations(jf: &JointFramework, kind: Combinator) -> EquationSystem {
    let mut eqs: BTreeMap<String, Equation> = jf
        .args
        .iter()
        .map(|arg| {
            (
                arg.clone(),
                Equation {
                    terms: Vec::new(),
                    clamped: false,
                },
            )
        })
        .collect();
    for (sources, target) in &jf.attacks {
        eqs.get_mut(target)
            .expect("attack targets are declared arguments")
            .terms
            .push(sources.iter().cloned().collect());
    }
    EquationSystem::from_raw(kind, eqs).expect("attack sources are declared arguments")
}

/// Rewrites a joint framework as a plain one, returning the framework and
/// the origin of every node. Singleton attacks pass through untouched;
/// each genuinely joint attack runs through the mirrors of its sources
/// into a gate that attacks the target. Gates on one target are numbered
/// `__y_<target>`, `__y_<target>_2`, ... in source-set order. Errors if a
/// generated name is already taken by an argument.
pub fn encode_standard(
    jf: &JointFramework,
) -> Result<(Framework, BTreeMap<String, NodeOrigin>), JointError> {
    let mut provenance: BTreeMap<String, NodeOrigin> = jf
        .args
        .iter()
        .map(|arg| (arg.clone(), NodeOrigin::Original))
        .collect();
    let mut args = jf.args.clone();
    let mut attacks: Vec<(String, String)> = Vec::new();
    let fresh = |name: String,
                 origin: NodeOrigin,
                 args: &mut ArgumentSet,
                 provenance: &mut BTreeMap<String, NodeOrigin>|
     -> Result<(), JointError> {
        if !args.insert(name.clone()) {
            return Err(JointError::NameCollision(name));
        }
        provenance.insert(name, origin);
        Ok(())
    };

    let mut gate_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (sources, target) in &jf.attacks {
        if sources.len() == 1 {
            let only = sources.iter().next().unwrap();
            attacks.push((only.clone(), target.clone()));
            continue;
        }
        let count = gate_counts.entry(target.as_str()).or_insert(0);
        *count += 1;
        let gate = if *count == 1 {
            format!("{GATE_PREFIX}{target}")
        } else {
            format!("{GATE_PREFIX}{target}_{count}")
        };
        fresh(
            gate.clone(),
            NodeOrigin::AttackGate {
                sources: sources.clone(),
                target: target.clone(),
            },
            &mut args,
            &mut provenance,
        )?;
        for source in sources {
            let mirror = format!("{SOURCE_PREFIX}{source}");
            if !args.contains(&mirror) {
                fresh(
                    mirror.clone(),
                    NodeOrigin::SourceMirror {
                        source: source.clone(),
                    },
                    &mut args,
                    &mut provenance,
                )?;
                attacks.push((source.clone(), mirror.clone()));
            } else if !matches!(
                provenance.get(&mirror),
                Some(NodeOrigin::SourceMirror { .. })
            ) {
                return Err(JointError::NameCollision(mirror));
            }
            attacks.push((mirror, gate.clone()));
        }
        attacks.push((gate, target.clone()));
    }
    let framework = Framework::from_parts(args, attacks)?;
    Ok((framework, provenance))
}
