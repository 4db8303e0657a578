//! Twisted 1-cocycles of a stabilizer subgroup with values in G, twisted
//! conjugacy, and the H^1 classes that classify local types.
//!
//! Convention: `b` acts on a cocycle by `a_g -> b * a_g * g_G(b)^-1`.

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::group::{same_group, AutAction, Elem, Subgroup};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CohomologyError {
    #[error("cocycles live over different stabilizers or actions")]
    MismatchedContext,
    #[error("stabilizer is not a subgroup of the acting group")]
    NotInGamma,
    #[error("expected {expected} values, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("value at gamma={0} is not an element of G")]
    BadValue(Elem),
    #[error("value at the identity is not the identity")]
    NotNormalized,
    #[error("cocycle identity fails at (gamma={gamma}, sigma={sigma})")]
    NotCocycle { gamma: Elem, sigma: Elem },
}

/// A map `a: Gamma_x -> G` with `a_{gs} = a_g * g_G(a_s)`.
///
/// `values[i]` is the value at `stabilizer.members()[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistedCocycle {
    stabilizer: Subgroup,
    action: Arc<AutAction>,
    values: Vec<Elem>,
}

impl TwistedCocycle {
    pub fn new(
        stabilizer: Subgroup,
        action: Arc<AutAction>,
        values: Vec<Elem>,
    ) -> Result<Self, CohomologyError> {
        if !same_group(stabilizer.ambient(), action.gamma()) {
            return Err(CohomologyError::NotInGamma);
        }
        if values.len() != stabilizer.order() {
            return Err(CohomologyError::Shape { expected: stabilizer.order(), got: values.len() });
        }
        let g = action.g();
        for (&c, &v) in stabilizer.members().iter().zip(&values) {
            if v >= g.order() {
                return Err(CohomologyError::BadValue(c));
            }
        }
        let cocycle = TwistedCocycle { stabilizer, action, values };
        cocycle.check()?;
        Ok(cocycle)
    }

    /// The cocycle with every value equal to the identity.
    pub fn trivial(stabilizer: Subgroup, action: Arc<AutAction>) -> Self {
        let values = vec![action.g().identity(); stabilizer.order()];
        TwistedCocycle { stabilizer, action, values }
    }

    /// Exhaustive check of normalization and the cocycle identity.
    pub fn check(&self) -> Result<(), CohomologyError> {
        let gamma = self.action.gamma();
        let g = self.action.g();
        if self.value(gamma.identity()) != g.identity() {
            return Err(CohomologyError::NotNormalized);
        }
        for &c in self.stabilizer.members() {
            for &s in self.stabilizer.members() {
                let lhs = self.value(gamma.mul(c, s));
                let rhs = g.mul(self.value(c), self.action.apply(c, self.value(s)));
                if lhs != rhs {
                    return Err(CohomologyError::NotCocycle { gamma: c, sigma: s });
                }
            }
        }
        Ok(())
    }

    pub fn stabilizer(&self) -> &Subgroup {
        &self.stabilizer
    }

    pub fn action(&self) -> &Arc<AutAction> {
        &self.action
    }

    pub fn values(&self) -> &[Elem] {
        &self.values
    }

    /// `a_gamma`. Panics if `gamma` is outside the stabilizer.
    pub fn value(&self, gamma: Elem) -> Elem {
        let i = self.stabilizer.position(gamma).expect("gamma outside the stabilizer");
        self.values[i]
    }

    pub fn same_context(&self, other: &TwistedCocycle) -> bool {
        self.stabilizer == other.stabilizer && self.action.same_context(&other.action)
    }

    /// `b . a`, with values `b * a_g * g_G(b)^-1`.
    pub fn twisted_conjugate(&self, b: Elem) -> TwistedCocycle {
        TwistedCocycle {
            stabilizer: self.stabilizer.clone(),
            action: self.action.clone(),
            values: twist_values(&self.action, self.stabilizer.members(), &self.values, b),
        }
    }

    /// Least `b` (by index) with `b . self == other`, if any.
    pub fn same_class(&self, other: &TwistedCocycle) -> Result<Option<Elem>, CohomologyError> {
        if !self.same_context(other) {
            return Err(CohomologyError::MismatchedContext);
        }
        let members = self.stabilizer.members();
        Ok(self
            .action
            .g()
            .elements()
            .find(|&b| twist_values(&self.action, members, &self.values, b) == other.values))
    }

    /// Stabilizer of this cocycle under twisted conjugation.
    pub fn twisted_centralizer(&self) -> Subgroup {
        let members = self.stabilizer.members();
        let fixed: Vec<Elem> = self
            .action
            .g()
            .elements()
            .filter(|&b| twist_values(&self.action, members, &self.values, b) == self.values)
            .collect();
        Subgroup::from_members(self.action.g().clone(), &fixed)
            .expect("a stabilizer is closed under products")
    }

    /// The twisted-conjugacy orbit as a sorted set of value vectors.
    pub fn orbit(&self) -> BTreeSet<Vec<Elem>> {
        let members = self.stabilizer.members();
        self.action
            .g()
            .elements()
            .map(|b| twist_values(&self.action, members, &self.values, b))
            .collect()
    }

    /// The H^1 class of this cocycle: least orbit member, orbit size and
    /// twisted-centralizer order.
    pub fn class(&self) -> H1Class {
        let orbit = self.orbit();
        let least = orbit.iter().next().expect("orbit is nonempty").clone();
        let representative = TwistedCocycle {
            stabilizer: self.stabilizer.clone(),
            action: self.action.clone(),
            values: least,
        };
        let centralizer_order = self.action.g().order() / orbit.len();
        H1Class { representative, orbit_size: orbit.len(), centralizer_order }
    }
}

#[inline]
fn twist_values(action: &AutAction, members: &[Elem], values: &[Elem], b: Elem) -> Vec<Elem> {
    let g = action.g();
    members
        .iter()
        .zip(values)
        .map(|(&c, &a)| g.mul(g.mul(b, a), g.inv(action.apply(c, b))))
        .collect()
}

/// A twisted-conjugacy class of cocycles, identified by its
/// lexicographically least member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct H1Class {
    pub representative: TwistedCocycle,
    pub orbit_size: usize,
    pub centralizer_order: usize,
}

impl H1Class {
    pub fn is_trivial(&self) -> bool {
        let e = self.representative.action.g().identity();
        self.representative.values.iter().all(|&v| v == e)
    }
}

/// Every twisted cocycle on `stabilizer`, in lexicographic order of value
/// vectors.
///
/// Backtracking over the stabilizer members in index order; each choice is
/// closed under the cocycle identity before the next free member is picked,
/// so only values on a generating set are ever guessed.
pub fn enumerate_cocycles(
    stabilizer: &Subgroup,
    action: &Arc<AutAction>,
) -> Result<Vec<TwistedCocycle>, CohomologyError> {
    if !same_group(stabilizer.ambient(), action.gamma()) {
        return Err(CohomologyError::NotInGamma);
    }
    let n = stabilizer.order();
    let mut partial = vec![None; n];
    partial[stabilizer.position(action.gamma().identity()).unwrap()] = Some(action.g().identity());
    let mut out = Vec::new();
    let table = MemberTable::new(stabilizer);
    if close(&table, action, &mut partial) {
        extend(&table, action, partial, &mut out);
    }
    out.sort();
    Ok(out
        .into_iter()
        .map(|values| TwistedCocycle { stabilizer: stabilizer.clone(), action: action.clone(), values })
        .collect())
}

/// Multiplication of a subgroup in member positions.
struct MemberTable {
    members: Vec<Elem>,
    mul: Vec<usize>,
}

impl MemberTable {
    fn new(sub: &Subgroup) -> Self {
        let gamma = sub.ambient();
        let n = sub.order();
        let mut mul = Vec::with_capacity(n * n);
        for &a in sub.members() {
            for &b in sub.members() {
                mul.push(sub.position(gamma.mul(a, b)).unwrap());
            }
        }
        MemberTable { members: sub.members().to_vec(), mul }
    }
}

fn extend(
    table: &MemberTable,
    action: &AutAction,
    partial: Vec<Option<Elem>>,
    out: &mut Vec<Vec<Elem>>,
) {
    let Some(free) = partial.iter().position(Option::is_none) else {
        out.push(partial.into_iter().map(Option::unwrap).collect());
        return;
    };
    for v in action.g().elements() {
        let mut next = partial.clone();
        next[free] = Some(v);
        if close(table, action, &mut next) {
            extend(table, action, next, out);
        }
    }
}

/// Propagates `a_{gs} = a_g g_G(a_s)` to a fixpoint; false on conflict.
fn close(table: &MemberTable, action: &AutAction, partial: &mut [Option<Elem>]) -> bool {
    let g = action.g();
    let n = partial.len();
    loop {
        let mut changed = false;
        for i in 0..n {
            let Some(ai) = partial[i] else { continue };
            for j in 0..n {
                let Some(aj) = partial[j] else { continue };
                let k = table.mul[i * n + j];
                let v = g.mul(ai, action.apply(table.members[i], aj));
                match partial[k] {
                    None => {
                        partial[k] = Some(v);
                        changed = true;
                    }
                    Some(w) if w != v => return false,
                    Some(_) => {}
                }
            }
        }
        if !changed {
            return true;
        }
    }
}

/// Orbit decomposition of all cocycles on `stabilizer`, ordered by
/// representative.
pub fn h1_classes(
    stabilizer: &Subgroup,
    action: &Arc<AutAction>,
) -> Result<Vec<H1Class>, CohomologyError> {
    let cocycles = enumerate_cocycles(stabilizer, action)?;
    let mut seen = BTreeSet::new();
    let mut classes = Vec::new();
    // cocycles are sorted, so the first unseen one is the least of its orbit
    for c in &cocycles {
        if seen.contains(&c.values) {
            continue;
        }
        let class = c.class();
        debug_assert_eq!(class.representative.values, c.values);
        seen.extend(c.orbit());
        classes.push(class);
    }
    Ok(classes)
}
