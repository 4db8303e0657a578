//! Finite groups given by explicit multiplication tables.
//!
//! Elements are dense indices `0..order`. Every group built by this module's
//! own constructors puts the identity at index 0; groups read from arbitrary
//! tables record wherever the identity actually sits.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// An element of a finite group, as an index into its table.
pub type Elem = usize;

/// Largest group order accepted by [`FiniteGroup::from_table`].
pub const MAX_GROUP_ORDER: usize = 64;
/// Largest order accepted for the acting group of an [`AutAction`] or a cover.
pub const MAX_GAMMA_ORDER: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("multiplication table is empty")]
    Empty,
    #[error("row {row} has length {len}, expected {expected}")]
    NotSquare { row: usize, len: usize, expected: usize },
    #[error("entry table[{a}][{b}] = {value} is out of range")]
    OutOfRange { a: usize, b: usize, value: usize },
    #[error("group of order {order} exceeds the cap of {cap}")]
    TooLarge { order: usize, cap: usize },
    #[error("not associative: ({a}*{b})*{c} != {a}*({b}*{c})")]
    NotAssociative { a: Elem, b: Elem, c: Elem },
    #[error("no two-sided identity element")]
    NoIdentity,
    #[error("element {0} has no two-sided inverse")]
    NoInverse(Elem),
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("element index {0} is out of range")]
    BadElement(usize),
    #[error("map of length {got} does not match source order {expected}")]
    BadMapShape { expected: usize, got: usize },
    #[error("not a homomorphism: f({a}*{b}) != f({a})*f({b})")]
    NotHomomorphism { a: Elem, b: Elem },
    #[error("image of gamma element {0} is not an automorphism of G")]
    NotAutomorphism(Elem),
    #[error("action is not a homomorphism at (gamma={gamma}, sigma={sigma})")]
    ActionNotHomomorphism { gamma: Elem, sigma: Elem },
    #[error("expected {expected} permutations in the action, got {got}")]
    ActionShape { expected: usize, got: usize },
    #[error("members do not form a subgroup (first offender {0})")]
    NotSubgroup(Elem),
}

/// A finite group stored as its full Cayley table.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<Elem>,
    identity: Elem,
    inverse: Vec<Elem>,
    labels: Option<Vec<String>>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("order", &self.order)
            .field("identity", &self.identity)
            .finish_non_exhaustive()
    }
}

impl FiniteGroup {
    /// Validates a square Cayley table and computes identity and inverses.
    pub fn from_table(
        table: &[Vec<Elem>],
        labels: Option<Vec<String>>,
    ) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::Empty);
        }
        if n > MAX_GROUP_ORDER {
            return Err(GroupError::TooLarge { order: n, cap: MAX_GROUP_ORDER });
        }
        let mut flat = Vec::with_capacity(n * n);
        for (a, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(GroupError::NotSquare { row: a, len: row.len(), expected: n });
            }
            for (b, &value) in row.iter().enumerate() {
                if value >= n {
                    return Err(GroupError::OutOfRange { a, b, value });
                }
                flat.push(value);
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(GroupError::LabelCount { expected: n, got: labels.len() });
            }
        }
        let at = |a: usize, b: usize| flat[a * n + b];
        for a in 0..n {
            for b in 0..n {
                let ab = at(a, b);
                for c in 0..n {
                    if at(ab, c) != at(a, at(b, c)) {
                        return Err(GroupError::NotAssociative { a, b, c });
                    }
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|a| at(e, a) == a && at(a, e) == a))
            .ok_or(GroupError::NoIdentity)?;
        let mut inverse = Vec::with_capacity(n);
        for a in 0..n {
            let inv = (0..n)
                .find(|&b| at(a, b) == identity && at(b, a) == identity)
                .ok_or(GroupError::NoInverse(a))?;
            inverse.push(inv);
        }
        Ok(FiniteGroup { order: n, table: flat, identity, inverse, labels })
    }

    /// Cyclic group `Z/n` with `a * b = (a + b) mod n`.
    pub fn cyclic(n: usize) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::Empty);
        }
        let table: Vec<Vec<Elem>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        let labels = (0..n).map(|a| a.to_string()).collect();
        Self::from_table(&table, Some(labels))
    }

    /// Symmetric group on `n` letters. Elements are the permutations in
    /// lexicographic order of their image vectors, so index 0 is the
    /// identity. The product `a * b` applies `b` first.
    pub fn symmetric(n: usize) -> Result<Self, GroupError> {
        if n == 0 {
            return Err(GroupError::Empty);
        }
        let order: usize = (1..=n).product();
        if order > MAX_GROUP_ORDER {
            return Err(GroupError::TooLarge { order, cap: MAX_GROUP_ORDER });
        }
        let perms = permutations(n);
        let table = permutation_table(&perms);
        let labels = perms.iter().map(|p| cycle_notation(p)).collect();
        Self::from_table(&table, Some(labels))
    }

    /// Direct product with componentwise multiplication; element
    /// `(a, b)` has index `a * other.order() + b`.
    pub fn direct_product(&self, other: &FiniteGroup) -> Result<Self, GroupError> {
        let m = other.order;
        let n = self.order * m;
        if n > MAX_GROUP_ORDER {
            return Err(GroupError::TooLarge { order: n, cap: MAX_GROUP_ORDER });
        }
        let table: Vec<Vec<Elem>> = (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| self.mul(x / m, y / m) * m + other.mul(x % m, y % m))
                    .collect()
            })
            .collect();
        let labels = (0..n)
            .map(|x| format!("({},{})", self.label(x / m), other.label(x % m)))
            .collect();
        Self::from_table(&table, Some(labels))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> Elem {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.table[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: Elem) -> Elem {
        self.inverse[a]
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.order
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, a: Elem) -> String {
        match &self.labels {
            Some(labels) => labels[a].clone(),
            None => a.to_string(),
        }
    }

    /// Index of the element with the given label.
    pub fn find_label(&self, label: &str) -> Option<Elem> {
        self.labels.as_ref()?.iter().position(|l| l == label)
    }

    /// Row-major copy of the table.
    pub fn table_rows(&self) -> Vec<Vec<Elem>> {
        self.table.chunks(self.order).map(|row| row.to_vec()).collect()
    }

    pub fn element_order(&self, a: Elem) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn conj(&self, by: Elem, a: Elem) -> Elem {
        self.mul(self.mul(by, a), self.inv(by))
    }

    /// Product of a word of elements, left to right.
    pub fn product(&self, word: &[Elem]) -> Elem {
        word.iter().fold(self.identity, |acc, &x| self.mul(acc, x))
    }

    pub fn is_abelian(&self) -> bool {
        self.elements().all(|a| self.elements().all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// A small generating set, chosen greedily in index order.
    pub fn generators(&self) -> Vec<Elem> {
        let mut gens = Vec::new();
        let mut span = BTreeSet::from([self.identity]);
        for a in self.elements() {
            if !span.contains(&a) {
                gens.push(a);
                span = closure(self, &gens);
            }
        }
        gens
    }
}

/// Smallest subset closed under multiplication containing `gens` and the
/// identity. Finite, so closure under products gives inverses too.
fn closure(g: &FiniteGroup, gens: &[Elem]) -> BTreeSet<Elem> {
    let mut members = BTreeSet::from([g.identity()]);
    let mut frontier = vec![g.identity()];
    while let Some(x) = frontier.pop() {
        for &s in gens {
            let y = g.mul(x, s);
            if members.insert(y) {
                frontier.push(y);
            }
        }
    }
    members
}

/// All permutations of `0..n` in lexicographic order.
pub(crate) fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| current[i] < current[i + 1]) else {
            break;
        };
        let j = (i + 1..n).rev().find(|&j| current[j] > current[i]).unwrap();
        current.swap(i, j);
        current[i + 1..].reverse();
    }
    out
}

fn permutation_table(perms: &[Vec<usize>]) -> Vec<Vec<Elem>> {
    let index: std::collections::HashMap<&[usize], usize> =
        perms.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    perms
        .iter()
        .map(|a| {
            perms
                .iter()
                .map(|b| {
                    let ab: Vec<usize> = b.iter().map(|&x| a[x]).collect();
                    index[ab.as_slice()]
                })
                .collect()
        })
        .collect()
}

/// Cycle notation with 1-based letters, `e` for the identity.
pub fn cycle_notation(perm: &[usize]) -> String {
    let mut seen = vec![false; perm.len()];
    let mut out = String::new();
    for start in 0..perm.len() {
        if seen[start] || perm[start] == start {
            continue;
        }
        out.push('(');
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            out.push_str(&(x + 1).to_string());
            x = perm[x];
        }
        out.push(')');
    }
    if out.is_empty() {
        out.push('e');
    }
    out
}

/// Pointer or structural equality of shared groups.
pub fn same_group(a: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A homomorphism between two finite groups, stored as its image array.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupHom {
    source: Arc<FiniteGroup>,
    target: Arc<FiniteGroup>,
    image: Vec<Elem>,
}

impl GroupHom {
    pub fn new(
        source: Arc<FiniteGroup>,
        target: Arc<FiniteGroup>,
        image: Vec<Elem>,
    ) -> Result<Self, GroupError> {
        if image.len() != source.order() {
            return Err(GroupError::BadMapShape { expected: source.order(), got: image.len() });
        }
        if let Some(&bad) = image.iter().find(|&&x| x >= target.order()) {
            return Err(GroupError::BadElement(bad));
        }
        for a in source.elements() {
            for b in source.elements() {
                if image[source.mul(a, b)] != target.mul(image[a], image[b]) {
                    return Err(GroupError::NotHomomorphism { a, b });
                }
            }
        }
        Ok(GroupHom { source, target, image })
    }

    pub fn source(&self) -> &Arc<FiniteGroup> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FiniteGroup> {
        &self.target
    }

    pub fn apply(&self, a: Elem) -> Elem {
        self.image[a]
    }

    pub fn image(&self) -> &[Elem] {
        &self.image
    }
}

/// A homomorphism `rho: Gamma -> Aut(G)`, stored as one permutation of G's
/// elements per element of Gamma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AutAction {
    gamma: Arc<FiniteGroup>,
    g: Arc<FiniteGroup>,
    act: Vec<Vec<Elem>>,
    inv_act: Vec<Vec<Elem>>,
}

impl AutAction {
    pub fn new(
        gamma: Arc<FiniteGroup>,
        g: Arc<FiniteGroup>,
        act: Vec<Vec<Elem>>,
    ) -> Result<Self, GroupError> {
        if gamma.order() > MAX_GAMMA_ORDER {
            return Err(GroupError::TooLarge { order: gamma.order(), cap: MAX_GAMMA_ORDER });
        }
        if act.len() != gamma.order() {
            return Err(GroupError::ActionShape { expected: gamma.order(), got: act.len() });
        }
        let mut inv_act = Vec::with_capacity(act.len());
        for (c, perm) in act.iter().enumerate() {
            if perm.len() != g.order() || !is_automorphism(&g, perm) {
                return Err(GroupError::NotAutomorphism(c));
            }
            let mut inv = vec![0; g.order()];
            for (x, &y) in perm.iter().enumerate() {
                inv[y] = x;
            }
            inv_act.push(inv);
        }
        for c in gamma.elements() {
            for s in gamma.elements() {
                let cs = gamma.mul(c, s);
                if g.elements().any(|x| act[cs][x] != act[c][act[s][x]]) {
                    return Err(GroupError::ActionNotHomomorphism { gamma: c, sigma: s });
                }
            }
        }
        Ok(AutAction { gamma, g, act, inv_act })
    }

    pub fn trivial(gamma: Arc<FiniteGroup>, g: Arc<FiniteGroup>) -> Result<Self, GroupError> {
        let act = vec![g.elements().collect(); gamma.order()];
        Self::new(gamma, g, act)
    }

    /// Action by conjugation through a homomorphism `Gamma -> G`:
    /// `gamma_G(x) = w(gamma) x w(gamma)^-1`.
    pub fn inner(witness: &GroupHom) -> Result<Self, GroupError> {
        let g = witness.target().clone();
        let act = witness
            .source()
            .elements()
            .map(|c| g.elements().map(|x| g.conj(witness.apply(c), x)).collect())
            .collect();
        Self::new(witness.source().clone(), g, act)
    }

    pub fn gamma(&self) -> &Arc<FiniteGroup> {
        &self.gamma
    }

    pub fn g(&self) -> &Arc<FiniteGroup> {
        &self.g
    }

    /// `gamma_G(x)`.
    #[inline]
    pub fn apply(&self, gamma: Elem, x: Elem) -> Elem {
        self.act[gamma][x]
    }

    /// `gamma_G^-1(x)`.
    #[inline]
    pub fn apply_inverse(&self, gamma: Elem, x: Elem) -> Elem {
        self.inv_act[gamma][x]
    }

    pub fn permutations(&self) -> &[Vec<Elem>] {
        &self.act
    }

    pub fn is_trivial(&self) -> bool {
        self.act.iter().all(|p| p.iter().enumerate().all(|(i, &x)| i == x))
    }

    pub fn same_context(&self, other: &AutAction) -> bool {
        std::ptr::eq(self, other)
            || (same_group(&self.gamma, &other.gamma) && same_group(&self.g, &other.g) && self.act == other.act)
    }
}

fn is_automorphism(g: &FiniteGroup, perm: &[Elem]) -> bool {
    let mut seen = vec![false; g.order()];
    for &y in perm {
        if y >= g.order() || seen[y] {
            return false;
        }
        seen[y] = true;
    }
    g.elements()
        .all(|a| g.elements().all(|b| perm[g.mul(a, b)] == g.mul(perm[a], perm[b])))
}

/// All automorphisms of `g` as permutations, sorted. Brute force over the
/// images of a generating set.
pub fn automorphisms(g: &FiniteGroup) -> Vec<Vec<Elem>> {
    let gens = g.generators();
    let mut out = Vec::new();
    let mut images = vec![0; gens.len()];
    search_images(g, g, &gens, &mut images, 0, &mut |map| {
        if is_automorphism(g, map) {
            out.push(map.to_vec());
        }
    });
    out.sort();
    out
}

/// Every homomorphism `source -> target`, as image arrays, sorted.
pub fn homomorphisms(source: &FiniteGroup, target: &FiniteGroup) -> Vec<Vec<Elem>> {
    let gens = source.generators();
    let mut out = Vec::new();
    let mut images = vec![0; gens.len()];
    search_images(source, target, &gens, &mut images, 0, &mut |map| out.push(map.to_vec()));
    out.sort();
    out
}

fn search_images(
    source: &FiniteGroup,
    target: &FiniteGroup,
    gens: &[Elem],
    images: &mut Vec<Elem>,
    depth: usize,
    found: &mut dyn FnMut(&[Elem]),
) {
    if depth == gens.len() {
        if let Some(map) = extend_to_hom(source, target, gens, images) {
            found(&map);
        }
        return;
    }
    for t in target.elements() {
        images[depth] = t;
        search_images(source, target, gens, images, depth + 1, found);
    }
}

/// Extends generator images to a map on all of `source` by breadth-first
/// word expansion; returns `None` if the assignment is not a homomorphism.
pub fn extend_to_hom(
    source: &FiniteGroup,
    target: &FiniteGroup,
    gens: &[Elem],
    images: &[Elem],
) -> Option<Vec<Elem>> {
    let mut map: Vec<Option<Elem>> = vec![None; source.order()];
    map[source.identity()] = Some(target.identity());
    let mut queue = std::collections::VecDeque::from([source.identity()]);
    while let Some(x) = queue.pop_front() {
        let fx = map[x].unwrap();
        for (&s, &fs) in gens.iter().zip(images) {
            let y = source.mul(x, s);
            let fy = target.mul(fx, fs);
            match map[y] {
                None => {
                    map[y] = Some(fy);
                    queue.push_back(y);
                }
                Some(existing) if existing != fy => return None,
                Some(_) => {}
            }
        }
    }
    let map: Vec<Elem> = map.into_iter().collect::<Option<_>>()?;
    let ok = source
        .elements()
        .all(|a| source.elements().all(|b| map[source.mul(a, b)] == target.mul(map[a], map[b])));
    ok.then_some(map)
}

/// Every action of `gamma` on `g` by automorphisms.
pub fn all_actions(gamma: &Arc<FiniteGroup>, g: &Arc<FiniteGroup>) -> Vec<AutAction> {
    let auts = automorphisms(g);
    let aut_group = permutation_table(&auts);
    let aut_group = uncapped_group(&aut_group);
    let gens = gamma.generators();
    let mut out = Vec::new();
    let mut images = vec![0; gens.len()];
    search_images(gamma, &aut_group, &gens, &mut images, 0, &mut |map| {
        let act = map.iter().map(|&a| auts[a].clone()).collect();
        if let Ok(action) = AutAction::new(gamma.clone(), g.clone(), act) {
            out.push(action);
        }
    });
    out
}

// Aut(G) can exceed the order cap, so its table skips validation. The
// input is a composition table of permutations with the identity at 0.
fn uncapped_group(table: &[Vec<Elem>]) -> FiniteGroup {
    let n = table.len();
    let flat: Vec<Elem> = table.iter().flatten().copied().collect();
    let inverse = (0..n).map(|a| (0..n).find(|&b| flat[a * n + b] == 0).unwrap()).collect();
    FiniteGroup { order: n, table: flat, identity: 0, inverse, labels: None }
}

/// A subgroup of a finite group, as a sorted member list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subgroup {
    ambient: Arc<FiniteGroup>,
    members: Vec<Elem>,
}

impl Subgroup {
    /// Subgroup generated by `gens`; the empty set generates the trivial group.
    pub fn generated(ambient: Arc<FiniteGroup>, gens: &[Elem]) -> Result<Self, GroupError> {
        if let Some(&bad) = gens.iter().find(|&&x| x >= ambient.order()) {
            return Err(GroupError::BadElement(bad));
        }
        let members = closure(&ambient, gens).into_iter().collect();
        Ok(Subgroup { ambient, members })
    }

    /// Validates an explicit member set.
    pub fn from_members(ambient: Arc<FiniteGroup>, members: &[Elem]) -> Result<Self, GroupError> {
        let set: BTreeSet<Elem> = members.iter().copied().collect();
        if let Some(&bad) = set.iter().find(|&&x| x >= ambient.order()) {
            return Err(GroupError::BadElement(bad));
        }
        if !set.contains(&ambient.identity()) {
            return Err(GroupError::NotSubgroup(ambient.identity()));
        }
        for &a in &set {
            if !set.contains(&ambient.inv(a)) {
                return Err(GroupError::NotSubgroup(a));
            }
            for &b in &set {
                if !set.contains(&ambient.mul(a, b)) {
                    return Err(GroupError::NotSubgroup(ambient.mul(a, b)));
                }
            }
        }
        Ok(Subgroup { ambient, members: set.into_iter().collect() })
    }

    pub fn whole(ambient: Arc<FiniteGroup>) -> Self {
        let members = ambient.elements().collect();
        Subgroup { ambient, members }
    }

    pub fn trivial(ambient: Arc<FiniteGroup>) -> Self {
        let members = vec![ambient.identity()];
        Subgroup { ambient, members }
    }

    pub fn ambient(&self) -> &Arc<FiniteGroup> {
        &self.ambient
    }

    pub fn members(&self) -> &[Elem] {
        &self.members
    }

    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, a: Elem) -> bool {
        self.members.binary_search(&a).is_ok()
    }

    /// Position of `a` in the sorted member list.
    pub fn position(&self, a: Elem) -> Option<usize> {
        self.members.binary_search(&a).ok()
    }

    pub fn is_trivial(&self) -> bool {
        self.members.len() == 1
    }

    /// Every subgroup generated by at most two elements, deduplicated and
    /// sorted by member list. For the small groups used here that is every
    /// subgroup.
    pub fn all_two_generated(ambient: &Arc<FiniteGroup>) -> Vec<Subgroup> {
        let mut seen = BTreeSet::new();
        for a in ambient.elements() {
            for b in a..ambient.order() {
                seen.insert(closure(ambient, &[a, b]).into_iter().collect::<Vec<_>>());
            }
        }
        seen.into_iter().map(|members| Subgroup { ambient: ambient.clone(), members }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_group_axioms(g: &FiniteGroup) {
        let e = g.identity();
        for a in g.elements() {
            assert_eq!(g.mul(e, a), a);
            assert_eq!(g.mul(a, e), a);
            assert_eq!(g.mul(a, g.inv(a)), e);
            assert_eq!(g.mul(g.inv(a), a), e);
            for b in g.elements() {
                for c in g.elements() {
                    assert_eq!(g.mul(g.mul(a, b), c), g.mul(a, g.mul(b, c)));
                }
            }
        }
    }

    #[test]
    fn trivial_table() {
        let g = FiniteGroup::from_table(&[vec![0]], None).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(g.identity(), 0);
    }

    #[test]
    fn z2_table() {
        let g = FiniteGroup::from_table(&[vec![0, 1], vec![1, 0]], None).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.inv(1), 1);
    }

    #[test]
    fn identity_need_not_be_first() {
        let g = FiniteGroup::from_table(&[vec![1, 0], vec![0, 1]], None).unwrap();
        assert_eq!(g.identity(), 1);
        assert_eq!(g.inv(0), 0);
    }

    #[test]
    fn rejects_bad_tables() {
        assert_eq!(FiniteGroup::from_table(&[], None), Err(GroupError::Empty));
        assert!(matches!(
            FiniteGroup::from_table(&[vec![0, 1], vec![1]], None),
            Err(GroupError::NotSquare { row: 1, .. })
        ));
        assert!(matches!(
            FiniteGroup::from_table(&[vec![0, 2], vec![1, 0]], None),
            Err(GroupError::OutOfRange { a: 0, b: 1, value: 2 })
        ));
        // constant table: associative, but no identity
        assert_eq!(
            FiniteGroup::from_table(&[vec![0, 0], vec![0, 0]], None),
            Err(GroupError::NoIdentity)
        );
        // left-zero semigroup x*y = x is associative with no identity either;
        // a monoid without inverses: {0 identity, 1 absorbing}
        assert_eq!(
            FiniteGroup::from_table(&[vec![0, 1], vec![1, 1]], None),
            Err(GroupError::NoInverse(1))
        );
        // a*b = b-a mod 3 is not associative
        let t: Vec<Vec<usize>> = (0..3).map(|a| (0..3).map(|b| (b + 3 - a) % 3).collect()).collect();
        assert!(matches!(FiniteGroup::from_table(&t, None), Err(GroupError::NotAssociative { .. })));
    }

    #[test]
    fn s4_matches_composition_oracle() {
        let g = FiniteGroup::symmetric(4).unwrap();
        assert_eq!(g.order(), 24);
        assert_group_axioms(&g);
        // oracle: compose permutations directly and look the result up by label
        let perms = permutations(4);
        for (i, a) in perms.iter().enumerate() {
            for (j, b) in perms.iter().enumerate() {
                let ab: Vec<usize> = (0..4).map(|x| a[b[x]]).collect();
                assert_eq!(g.label(g.mul(i, j)), cycle_notation(&ab));
            }
        }
        let t = g.find_label("(12)").unwrap();
        let u = g.find_label("(34)").unwrap();
        let tu = g.find_label("(12)(34)").unwrap();
        assert_eq!(g.mul(t, u), tu);
        assert_eq!(g.mul(u, t), tu);
        assert_eq!(g.element_order(tu), 2);
    }

    #[test]
    fn symmetric_small_cases() {
        let s1 = FiniteGroup::symmetric(1).unwrap();
        assert_eq!(s1.order(), 1);
        let s3 = FiniteGroup::symmetric(3).unwrap();
        assert_eq!(s3.order(), 6);
        assert_eq!(s3.label(0), "e");
        let involutions = s3.elements().filter(|&a| s3.element_order(a) == 2).count();
        assert_eq!(involutions, 3);
        assert!(matches!(FiniteGroup::symmetric(5), Err(GroupError::TooLarge { order: 120, .. })));
    }

    #[test]
    fn cyclic_groups() {
        assert_eq!(FiniteGroup::cyclic(1).unwrap().order(), 1);
        let z6 = FiniteGroup::cyclic(6).unwrap();
        assert_eq!(z6.element_order(1), 6);
        assert_group_axioms(&z6);
    }

    #[test]
    fn subgroup_generation() {
        let s4 = Arc::new(FiniteGroup::symmetric(4).unwrap());
        assert!(Subgroup::generated(s4.clone(), &[]).unwrap().is_trivial());
        let tau = s4.find_label("(12)(34)").unwrap();
        assert_eq!(Subgroup::generated(s4.clone(), &[tau]).unwrap().order(), 2);
        let s3 = Arc::new(FiniteGroup::symmetric(3).unwrap());
        let r = s3.find_label("(123)").unwrap();
        let t = s3.find_label("(12)").unwrap();
        assert_eq!(Subgroup::generated(s3.clone(), &[r, t]).unwrap().order(), 6);
        assert!(Subgroup::from_members(s3.clone(), &[0, t, r]).is_err());
    }

    #[test]
    fn actions() {
        let z2 = Arc::new(FiniteGroup::cyclic(2).unwrap());
        let z3 = Arc::new(FiniteGroup::cyclic(3).unwrap());
        let s4 = Arc::new(FiniteGroup::symmetric(4).unwrap());
        assert!(AutAction::trivial(z2.clone(), s4.clone()).is_ok());
        let inversion = AutAction::new(z2.clone(), z3.clone(), vec![vec![0, 1, 2], vec![0, 2, 1]]);
        assert!(inversion.is_ok());
        // a non-automorphism
        let bad = AutAction::new(z2.clone(), z3.clone(), vec![vec![0, 1, 2], vec![1, 2, 0]]);
        assert_eq!(bad, Err(GroupError::NotAutomorphism(1)));
        // an automorphism of order 2 cannot be the image of a generator of Z/3
        let z3b = z3.clone();
        let bad = AutAction::new(z3b, z3.clone(), vec![vec![0, 1, 2], vec![0, 2, 1], vec![0, 2, 1]]);
        assert!(matches!(bad, Err(GroupError::ActionNotHomomorphism { .. })));

        let tau = s4.find_label("(12)(34)").unwrap();
        let w = GroupHom::new(z2.clone(), s4.clone(), vec![0, tau]).unwrap();
        let rho = AutAction::inner(&w).unwrap();
        for x in s4.elements() {
            assert_eq!(rho.apply(1, x), s4.conj(tau, x));
            assert_eq!(rho.apply_inverse(1, rho.apply(1, x)), x);
        }
        let trivial_w = GroupHom::new(z2.clone(), s4.clone(), vec![0, 0]).unwrap();
        assert!(AutAction::inner(&trivial_w).unwrap().is_trivial());
    }

    #[test]
    fn automorphism_counts() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        assert_eq!(automorphisms(&s3).len(), 6);
        assert_eq!(automorphisms(&FiniteGroup::cyclic(6).unwrap()).len(), 2);
        assert_eq!(automorphisms(&FiniteGroup::symmetric(4).unwrap()).len(), 24);
        let z2 = Arc::new(FiniteGroup::cyclic(2).unwrap());
        let s3 = Arc::new(s3);
        // involutions of Aut(S3) = S3 plus the identity
        assert_eq!(all_actions(&z2, &s3).len(), 4);
        let k4 = FiniteGroup::cyclic(2).unwrap().direct_product(&FiniteGroup::cyclic(2).unwrap()).unwrap();
        assert_eq!(automorphisms(&k4).len(), 6);
        assert_eq!(homomorphisms(&FiniteGroup::cyclic(4).unwrap(), &k4).len(), 4);
    }
}
