//! Descent of equivariant bundles to torsors over the base.
//!
//! For an anchor bundle `P`, the descent group has vertex groups `H_x`
//! (equivariant automorphisms of `P` over the fiber of `x`, recorded by
//! their value at the basepoint lift) and edge groups `G` (equivariant
//! automorphisms over a free edge fiber, recorded at the basepoint edge
//! lift in source coordinates). Torsors are Čech data: one `u_e` per base
//! edge, modulo the vertex gauge `u -> r_s(k_s)^-1 u r_t(k_t)`.

use std::collections::HashSet;
use std::sync::Arc;

use thiserror::Error;

use crate::cardinality::{groupoid_cardinality, ExactCardinality};
use crate::gbundle::{enumerate_bundles, odometer, BundleError, EquivBundle, Gauge, LocalTypeProfile};
use crate::group::{Elem, FiniteGroup, Subgroup};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DescentError {
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error("bundles live over different covers or actions")]
    MismatchedContext,
    #[error("local types differ at base vertex {0}")]
    LocalTypeMismatch(usize),
    #[error("invalid torsor: {0}")]
    InvalidTorsor(String),
    #[error("restriction at base vertex {vertex}, edge pair {pair}: {reason}")]
    BadRestriction { vertex: usize, pair: usize, reason: &'static str },
    #[error("enumeration needs {needed} steps, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("section choice for base vertex {0} is not an invariant section")]
    BadSection(usize),
}

/// Every fiberwise equivariant torsor map from `p` to `p2` over base
/// vertex `x`, as tuples `phi[i]` indexed by fiber point, with
/// `phi_{g.v} * c1(g, v) = c2(g, v) * g_G(phi_v)`. Found by backtracking
/// over the fiber points in order; output is lexicographically sorted.
pub fn invariant_sections(p: &EquivBundle, p2: &EquivBundle, x: usize) -> Result<Vec<Vec<Elem>>, DescentError> {
    search_sections(p, p2, x, usize::MAX)
}

fn search_sections(p: &EquivBundle, p2: &EquivBundle, x: usize, limit: usize) -> Result<Vec<Vec<Elem>>, DescentError> {
    if !p.same_context(p2) {
        return Err(DescentError::MismatchedContext);
    }
    let cover = p.cover();
    let gamma = cover.gamma();
    let g = p.action().g();
    let points: Vec<usize> = cover.fiber(x).collect();
    let first = points[0];
    let mut out = Vec::new();
    let mut phi = vec![0usize; points.len()];
    fn fits(
        p: &EquivBundle,
        p2: &EquivBundle,
        phi: &[Elem],
        first: usize,
        upto: usize,
        gamma: &FiniteGroup,
        g: &FiniteGroup,
    ) -> bool {
        let cover = p.cover();
        let i = upto;
        let v = first + i;
        gamma.elements().all(|c| {
            // constraints linking point i with an earlier (or the same) point
            let w = cover.act_vertex(c, v) - first;
            let forward_ok = w > i || {
                let lhs = g.mul(phi[w], p.lift(c, v));
                lhs == g.mul(p2.lift(c, v), p.action().apply(c, phi[i]))
            };
            let u = cover.act_vertex(gamma.inv(c), v) - first;
            let backward_ok = u > i || {
                let src = first + u;
                let lhs = g.mul(phi[i], p.lift(c, src));
                lhs == g.mul(p2.lift(c, src), p.action().apply(c, phi[u]))
            };
            forward_ok && backward_ok
        })
    }
    let n = points.len();
    let mut depth = 0usize;
    let mut next = vec![0usize; n];
    loop {
        if next[depth] == g.order() {
            next[depth] = 0;
            if depth == 0 {
                break;
            }
            depth -= 1;
            continue;
        }
        phi[depth] = next[depth];
        next[depth] += 1;
        if fits(p, p2, &phi, first, depth, gamma, g) {
            if depth + 1 == n {
                out.push(phi.clone());
                if out.len() == limit {
                    break;
                }
            } else {
                depth += 1;
            }
        }
    }
    Ok(out)
}

/// Which end of an edge pair a restriction map lands from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Source,
    Target,
}

/// The descent group of an anchor bundle.
#[derive(Debug, Clone)]
pub struct DescentGroupScheme {
    anchor: EquivBundle,
    vertex_groups: Vec<Subgroup>,
    /// Per edge pair, restriction tables from the source and target vertex
    /// groups, indexed by position in the vertex group.
    restrictions: Vec<(Vec<Elem>, Vec<Elem>)>,
}

impl DescentGroupScheme {
    /// Builds the scheme and checks every restriction map against the
    /// invariant sections of `Iso(P, P)` found by direct search.
    pub fn new(anchor: &EquivBundle) -> Result<Self, DescentError> {
        let cover = anchor.cover();
        let base = cover.base();
        let g = anchor.action().g();
        let vertex_groups: Vec<Subgroup> = (0..base.vertex_count())
            .map(|x| anchor.cocycle_at(cover.basepoint_lift(x)).twisted_centralizer())
            .collect();
        let mut scheme = DescentGroupScheme { anchor: anchor.clone(), vertex_groups, restrictions: Vec::new() };
        for k in 0..base.pair_count() {
            let (s, t) = base.pairs()[k];
            let e0 = cover.basepoint_edge_lift(2 * k);
            let (s0, t0) = (cover.edge_source(e0), cover.edge_target(e0));
            let g0 = anchor.trans(e0);
            let rs = scheme.vertex_groups[s].members().iter().map(|&b| scheme.spread(s, b, s0)).collect();
            let rt = scheme.vertex_groups[t]
                .members()
                .iter()
                .map(|&b| g.product(&[g.inv(g0), scheme.spread(t, b, t0), g0]))
                .collect();
            scheme.restrictions.push((rs, rt));
        }
        scheme.check_restrictions()?;
        scheme.check_against_sections()?;
        Ok(scheme)
    }

    pub fn anchor(&self) -> &EquivBundle {
        &self.anchor
    }

    pub fn vertex_group(&self, x: usize) -> &Subgroup {
        &self.vertex_groups[x]
    }

    pub fn vertex_groups(&self) -> &[Subgroup] {
        &self.vertex_groups
    }

    pub fn edge_group(&self) -> &Arc<FiniteGroup> {
        self.anchor.action().g()
    }

    /// Value at cover vertex `v` over `x` of the invariant automorphism
    /// whose basepoint value is `b`: `c(s, v0) s_G(b) c(s, v0)^-1` with
    /// `v = s . v0`.
    pub fn spread(&self, x: usize, b: Elem, v: usize) -> Elem {
        let cover = self.anchor.cover();
        let g = self.anchor.action().g();
        let v0 = cover.basepoint_lift(x);
        let s = cover.coset_rep(v);
        let c = self.anchor.lift(s, v0);
        g.product(&[c, self.anchor.action().apply(s, b), g.inv(c)])
    }

    /// `r_{x,e}(b)` for the given end of edge pair `pair`.
    pub fn restrict(&self, pair: usize, end: End, b: Elem) -> Elem {
        let (s, t) = self.anchor.cover().base().pairs()[pair];
        let (x, table) = match end {
            End::Source => (s, &self.restrictions[pair].0),
            End::Target => (t, &self.restrictions[pair].1),
        };
        let i = self.vertex_groups[x].position(b).expect("element of the vertex group");
        table[i]
    }

    /// Cardinality of the vertex gauge group `prod |H_x|`.
    pub fn gauge_group_order(&self) -> u128 {
        self.vertex_groups.iter().map(|h| h.order() as u128).product()
    }

    fn check_restrictions(&self) -> Result<(), DescentError> {
        let g = self.edge_group();
        let pairs = self.anchor.cover().base().pairs();
        for (k, &(s, t)) in pairs.iter().enumerate() {
            for (end, x) in [(End::Source, s), (End::Target, t)] {
                let h = &self.vertex_groups[x];
                let mut image = HashSet::new();
                for &a in h.members() {
                    image.insert(self.restrict(k, end, a));
                    for &b in h.members() {
                        let lhs = self.restrict(k, end, g.mul(a, b));
                        if lhs != g.mul(self.restrict(k, end, a), self.restrict(k, end, b)) {
                            return Err(DescentError::BadRestriction { vertex: x, pair: k, reason: "not a homomorphism" });
                        }
                    }
                }
                if image.len() != h.order() {
                    return Err(DescentError::BadRestriction { vertex: x, pair: k, reason: "not injective" });
                }
            }
        }
        Ok(())
    }

    /// Restricts every invariant section of `Iso(P, P)` over each vertex to
    /// every incident edge lift, checks the result is equivariant over the
    /// edge fiber, and compares the basepoint value with the table.
    fn check_against_sections(&self) -> Result<(), DescentError> {
        let p = &self.anchor;
        let cover = p.cover();
        let gamma = cover.gamma();
        let g = self.edge_group();
        let base = cover.base();
        for x in 0..base.vertex_count() {
            let sections = invariant_sections(p, p, x)?;
            let first = cover.fiber(x).start;
            if sections.len() != self.vertex_groups[x].order() {
                return Err(DescentError::BadRestriction { vertex: x, pair: usize::MAX, reason: "vertex group size differs from section count" });
            }
            for phi in &sections {
                let b = phi[cover.basepoint_lift(x) - first];
                for v in cover.fiber(x) {
                    if phi[v - first] != self.spread(x, b, v) {
                        return Err(DescentError::BadRestriction { vertex: x, pair: usize::MAX, reason: "spread differs from section" });
                    }
                }
                for (k, &(s, t)) in base.pairs().iter().enumerate() {
                    for (end, y) in [(End::Source, s), (End::Target, t)] {
                        if y != x {
                            continue;
                        }
                        let e0 = cover.basepoint_edge_lift(2 * k);
                        let psi: Vec<Elem> = (0..gamma.order())
                            .map(|i| {
                                let e = cover.cover_edge(2 * k, i);
                                match end {
                                    End::Source => phi[cover.edge_source(e) - first],
                                    End::Target => {
                                        let ge = p.trans(e);
                                        g.product(&[g.inv(ge), phi[cover.edge_target(e) - first], ge])
                                    }
                                }
                            })
                            .collect();
                        for c in gamma.elements() {
                            for i in 0..gamma.order() {
                                let e = cover.cover_edge(2 * k, i);
                                let ce = cover.edge_lift_index(cover.act_edge(c, e));
                                let lift = p.lift(c, cover.edge_source(e));
                                let expected = g.product(&[lift, p.action().apply(c, psi[i]), g.inv(lift)]);
                                if psi[ce] != expected {
                                    return Err(DescentError::BadRestriction { vertex: x, pair: k, reason: "restriction is not equivariant" });
                                }
                            }
                        }
                        if psi[cover.edge_lift_index(e0)] != self.restrict(k, end, b) {
                            return Err(DescentError::BadRestriction { vertex: x, pair: k, reason: "table differs from direct restriction" });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Builds the descent group of `p`.
pub fn descent_group(p: &EquivBundle) -> Result<DescentGroupScheme, DescentError> {
    DescentGroupScheme::new(p)
}

/// A torsor under the descent group: `u_e` per oriented base edge.
#[derive(Debug, Clone)]
pub struct HTorsor {
    scheme: Arc<DescentGroupScheme>,
    trans: Vec<Elem>,
}

impl PartialEq for HTorsor {
    fn eq(&self, other: &Self) -> bool {
        self.trans == other.trans
    }
}

impl Eq for HTorsor {}

impl HTorsor {
    /// Validated torsor from one value per oriented base edge.
    pub fn new(scheme: Arc<DescentGroupScheme>, trans: Vec<Elem>) -> Result<Self, DescentError> {
        let base = scheme.anchor.cover().base();
        let g = scheme.edge_group();
        if trans.len() != base.edge_count() {
            return Err(DescentError::InvalidTorsor(format!("expected {} edge values, got {}", base.edge_count(), trans.len())));
        }
        if let Some(e) = trans.iter().position(|&u| u >= g.order()) {
            return Err(DescentError::InvalidTorsor(format!("edge {e} value is not an element of G")));
        }
        for k in 0..base.pair_count() {
            if trans[2 * k + 1] != g.inv(trans[2 * k]) {
                return Err(DescentError::InvalidTorsor(format!("edge {} is not inverse to edge {}", 2 * k + 1, 2 * k)));
            }
        }
        Ok(HTorsor { scheme, trans })
    }

    /// Torsor from one value per edge pair.
    pub fn from_pairs(scheme: Arc<DescentGroupScheme>, values: &[Elem]) -> Self {
        let g = scheme.edge_group().clone();
        let trans = values.iter().flat_map(|&u| [u, g.inv(u)]).collect();
        HTorsor { scheme, trans }
    }

    pub fn trivial(scheme: Arc<DescentGroupScheme>) -> Self {
        let pairs = scheme.anchor.cover().base().pair_count();
        let e = scheme.edge_group().identity();
        Self::from_pairs(scheme, &vec![e; pairs])
    }

    pub fn scheme(&self) -> &Arc<DescentGroupScheme> {
        &self.scheme
    }

    pub fn transitions(&self) -> &[Elem] {
        &self.trans
    }

    pub fn pair_values(&self) -> Vec<Elem> {
        self.trans.iter().step_by(2).copied().collect()
    }

    fn key(&self) -> Vec<u8> {
        self.trans.iter().step_by(2).map(|&u| u as u8).collect()
    }

    /// Action of a vertex gauge `k` (one element of `H_x` per base vertex).
    pub fn gauge_transform(&self, k: &[Elem]) -> HTorsor {
        let g = self.scheme.edge_group();
        let pairs = self.scheme.anchor.cover().base().pairs();
        let values: Vec<Elem> = pairs
            .iter()
            .enumerate()
            .map(|(i, &(s, t))| {
                let rs = self.scheme.restrict(i, End::Source, k[s]);
                let rt = self.scheme.restrict(i, End::Target, k[t]);
                g.product(&[g.inv(rs), self.trans[2 * i], rt])
            })
            .collect();
        HTorsor::from_pairs(self.scheme.clone(), &values)
    }

    /// First vertex gauge carrying `self` to `other`, in index order.
    pub fn is_isomorphic(&self, other: &HTorsor) -> Option<Vec<Elem>> {
        let mut found = None;
        self.for_each_gauge(|k| {
            if self.gauge_transform(k) == *other {
                found = Some(k.to_vec());
                false
            } else {
                true
            }
        });
        found
    }

    pub fn automorphism_count(&self) -> usize {
        let mut count = 0;
        self.for_each_gauge(|k| {
            if self.gauge_transform(k) == *self {
                count += 1;
            }
            true
        });
        count
    }

    fn for_each_gauge(&self, mut f: impl FnMut(&[Elem]) -> bool) {
        let groups = self.scheme.vertex_groups();
        let mut digits = vec![0usize; groups.len()];
        let radix: Vec<usize> = groups.iter().map(Subgroup::order).collect();
        let mut k = vec![0; groups.len()];
        loop {
            for (i, h) in groups.iter().enumerate() {
                k[i] = h.members()[digits[i]];
            }
            if !f(&k) {
                return;
            }
            if !mixed_step(&mut digits, &radix) {
                return;
            }
        }
    }
}

fn mixed_step(digits: &mut [usize], radix: &[usize]) -> bool {
    for (d, &r) in digits.iter_mut().zip(radix).rev() {
        *d += 1;
        if *d < r {
            return true;
        }
        *d = 0;
    }
    false
}

/// One torsor class from [`enumerate_htorsors`].
#[derive(Debug, Clone)]
pub struct TorsorClass {
    pub representative: HTorsor,
    pub automorphisms: usize,
    pub orbit_size: usize,
}

/// Gauge orbits of edge data, least representative first.
pub fn enumerate_htorsors(scheme: &Arc<DescentGroupScheme>, budget: u64) -> Result<Vec<TorsorClass>, DescentError> {
    let pairs = scheme.anchor.cover().base().pair_count();
    let n = scheme.edge_group().order();
    let needed = (n as u128)
        .checked_pow(pairs as u32)
        .and_then(|x| x.checked_mul(scheme.gauge_group_order()))
        .unwrap_or(u128::MAX);
    if needed > budget as u128 {
        return Err(DescentError::BudgetExceeded { needed, budget });
    }
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut classes = Vec::new();
    let mut digits = vec![0usize; pairs];
    loop {
        let f = HTorsor::from_pairs(scheme.clone(), &digits);
        let key = f.key();
        if !seen.contains(&key) {
            let mut least = f.clone();
            let mut automorphisms = 0;
            let mut orbit_size = 0;
            f.for_each_gauge(|k| {
                let image = f.gauge_transform(k);
                let image_key = image.key();
                if image_key == key {
                    automorphisms += 1;
                }
                if image_key < least.key() {
                    least = image;
                }
                if seen.insert(image_key) {
                    orbit_size += 1;
                }
                true
            });
            classes.push(TorsorClass { representative: least, automorphisms, orbit_size });
        }
        if !odometer(&mut digits, n) {
            break;
        }
    }
    classes.sort_by_key(|c| c.representative.key());
    Ok(classes)
}

/// Sections chosen by [`forward`]: one tuple per base vertex.
pub type SectionChoice = Vec<Vec<Elem>>;

/// Least invariant section of `Iso(anchor, p2)` at every base vertex.
pub fn least_sections(anchor: &EquivBundle, p2: &EquivBundle) -> Result<SectionChoice, DescentError> {
    let base = anchor.cover().base();
    (0..base.vertex_count())
        .map(|x| {
            let mut all = search_sections(anchor, p2, x, 1)?;
            if all.is_empty() {
                Err(DescentError::LocalTypeMismatch(x))
            } else {
                Ok(all.swap_remove(0))
            }
        })
        .collect()
}

/// The torsor of invariant isomorphisms from the anchor to `p2`, using the
/// least section at each vertex.
pub fn forward(scheme: &Arc<DescentGroupScheme>, p2: &EquivBundle) -> Result<HTorsor, DescentError> {
    if !scheme.anchor.same_context(p2) {
        return Err(DescentError::MismatchedContext);
    }
    let phi = least_sections(&scheme.anchor, p2)?;
    Ok(torsor_from_sections(scheme, p2, &phi))
}

/// [`forward`] with explicit per-vertex sections; each must be an
/// invariant section of `Iso(anchor, p2)`.
pub fn forward_with_sections(
    scheme: &Arc<DescentGroupScheme>,
    p2: &EquivBundle,
    phi: &[Vec<Elem>],
) -> Result<HTorsor, DescentError> {
    let anchor = &scheme.anchor;
    let nv = anchor.cover().base().vertex_count();
    if phi.len() != nv {
        return Err(DescentError::BadSection(phi.len().min(nv)));
    }
    for (x, section) in phi.iter().enumerate() {
        if !invariant_sections(anchor, p2, x)?.contains(section) {
            return Err(DescentError::BadSection(x));
        }
    }
    Ok(torsor_from_sections(scheme, p2, phi))
}

/// `u_e = phi_s^-1 g'^-1 phi_t g` at the basepoint lift of each edge pair.
fn torsor_from_sections(scheme: &Arc<DescentGroupScheme>, p2: &EquivBundle, phi: &[Vec<Elem>]) -> HTorsor {
    let anchor = &scheme.anchor;
    let cover = anchor.cover();
    let base = cover.base();
    let g = scheme.edge_group();
    let at = |v: usize| {
        let x = cover.project_vertex(v);
        phi[x][v - cover.fiber(x).start]
    };
    let values: Vec<Elem> = (0..base.pair_count())
        .map(|k| {
            let e0 = cover.basepoint_edge_lift(2 * k);
            let (s0, t0) = (cover.edge_source(e0), cover.edge_target(e0));
            g.product(&[g.inv(at(s0)), g.inv(p2.trans(e0)), at(t0), anchor.trans(e0)])
        })
        .collect();
    HTorsor::from_pairs(scheme.clone(), &values)
}

/// Gauge on the cover assembled from per-vertex sections.
pub fn sections_as_gauge(anchor: &EquivBundle, phi: &[Vec<Elem>]) -> Gauge {
    let cover = anchor.cover();
    Gauge(
        (0..cover.cover_vertex_count())
            .map(|v| {
                let x = cover.project_vertex(v);
                phi[x][v - cover.fiber(x).start]
            })
            .collect(),
    )
}

/// The contracted product: anchor's lift data, transitions twisted by
/// `u^-1` at the basepoint edge lift and spread over each edge fiber.
pub fn backward(f: &HTorsor) -> Result<EquivBundle, DescentError> {
    let scheme = f.scheme();
    let anchor = &scheme.anchor;
    HTorsor::new(scheme.clone(), f.trans.clone())?;
    let cover = anchor.cover();
    let gamma = cover.gamma();
    let g = scheme.edge_group();
    let action = anchor.action();
    let mut trans = anchor.transitions().to_vec();
    for k in 0..cover.base().pair_count() {
        let e0 = cover.basepoint_edge_lift(2 * k);
        let (s0, t0) = (cover.edge_source(e0), cover.edge_target(e0));
        let twisted = g.mul(anchor.trans(e0), g.inv(f.trans[2 * k]));
        for c in gamma.elements() {
            let e = cover.act_edge(c, e0);
            let value = g.product(&[anchor.lift(c, t0), action.apply(c, twisted), g.inv(anchor.lift(c, s0))]);
            trans[e] = value;
            trans[cover.reverse_edge(e)] = g.inv(value);
        }
    }
    Ok(EquivBundle::new(cover.clone(), action.clone(), trans, anchor.lifts().to_vec())?)
}

/// Summary of one isomorphism class for reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSummary {
    pub data: Vec<Elem>,
    pub automorphisms: usize,
}

/// Outcome of [`verify_equivalence`].
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub profile: LocalTypeProfile,
    /// Valid bundle data checked for the domain of `forward`.
    pub domain_checked: usize,
    /// Bundle classes of any local type.
    pub all_bundle_classes: usize,
    pub bundle_classes: Vec<ClassSummary>,
    pub torsor_classes: Vec<ClassSummary>,
    /// `(bundle class, torsor class)` matched by explicit isomorphisms.
    pub matching: Vec<(usize, usize)>,
    pub bundle_cardinality: ExactCardinality,
    pub torsor_cardinality: ExactCardinality,
    pub domain_ok: bool,
    pub bijection_ok: bool,
    pub automorphisms_ok: bool,
    pub round_trips_ok: bool,
    pub cardinality_ok: bool,
    /// First counterexample, if any.
    pub failure: Option<String>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.domain_ok && self.bijection_ok && self.automorphisms_ok && self.round_trips_ok && self.cardinality_ok
    }
}

/// Enumerates both sides for `anchor` and checks that `forward` and
/// `backward` are inverse equivalences on isomorphism classes.
pub fn verify_equivalence(anchor: &EquivBundle, budget: u64) -> Result<EquivalenceReport, DescentError> {
    let cover = anchor.cover();
    let action = anchor.action();
    let profile = anchor.local_type();
    let scheme = Arc::new(descent_group(anchor)?);
    let mut failure: Option<String> = None;
    let mut fail = |msg: String| {
        if failure.is_none() {
            failure = Some(msg);
        }
    };

    // (a) forward is defined exactly on the anchor's local type
    let mut domain_ok = true;
    let mut domain_checked = 0;
    for p in crate::gbundle::all_bundles(cover, action) {
        domain_checked += 1;
        let same = anchor.same_local_type(&p)?.same;
        let defined = match forward(&scheme, &p) {
            Ok(_) => true,
            Err(DescentError::LocalTypeMismatch(_)) => false,
            Err(e) => return Err(e),
        };
        if same != defined {
            domain_ok = false;
            fail(format!("forward defined={defined} but same local type={same} on {:?}", p.key()));
        }
    }

    let all_classes = enumerate_bundles(cover, action, None, budget)?;
    let sector: Vec<_> = all_classes.iter().filter(|c| c.representative.local_type() == profile).cloned().collect();
    let torsors = enumerate_htorsors(&scheme, budget)?;

    // (b), (c), (d)
    let mut matching = Vec::new();
    let mut automorphisms_ok = true;
    let mut round_trips_ok = true;
    for (i, class) in sector.iter().enumerate() {
        let p2 = &class.representative;
        let phi = least_sections(anchor, p2)?;
        let f = torsor_from_sections(&scheme, p2, &phi);
        let hits: Vec<usize> =
            torsors.iter().enumerate().filter(|(_, t)| t.representative.is_isomorphic(&f).is_some()).map(|(j, _)| j).collect();
        if hits.len() != 1 {
            fail(format!("bundle class {i} matches {} torsor classes", hits.len()));
            continue;
        }
        let j = hits[0];
        matching.push((i, j));
        if class.automorphisms != torsors[j].automorphisms || f.automorphism_count() != class.automorphisms {
            automorphisms_ok = false;
            fail(format!("bundle class {i}: |Aut| = {} but torsor class {j}: |Aut| = {}", class.automorphisms, torsors[j].automorphisms));
        }
        let back = backward(&f)?;
        if back.gauge_transform(&sections_as_gauge(anchor, &phi)) != *p2 {
            round_trips_ok = false;
            fail(format!("backward(forward(P')) is not carried to P' by the chosen sections, class {i}"));
        }
    }
    for (j, t) in torsors.iter().enumerate() {
        let f = &t.representative;
        let b = backward(f)?;
        if b.local_type() != profile {
            round_trips_ok = false;
            fail(format!("backward of torsor class {j} changes the local type"));
            continue;
        }
        let phi = least_sections(anchor, &b)?;
        let again = torsor_from_sections(&scheme, &b, &phi);
        let cover = anchor.cover();
        let k: Vec<Elem> = (0..cover.base().vertex_count())
            .map(|x| phi[x][cover.basepoint_lift(x) - cover.fiber(x).start])
            .collect();
        if f.gauge_transform(&k) != again {
            round_trips_ok = false;
            fail(format!("forward(backward(F)) is not carried to F by the section values, torsor class {j}"));
        }
    }
    let matched: HashSet<usize> = matching.iter().map(|&(_, j)| j).collect();
    let bijection_ok = matching.len() == sector.len() && matched.len() == sector.len() && sector.len() == torsors.len();
    if !bijection_ok {
        fail(format!("{} bundle classes, {} torsor classes, {} distinct matches", sector.len(), torsors.len(), matched.len()));
    }

    // (e)
    let bundle_cardinality: ExactCardinality = groupoid_cardinality(sector.iter().map(|c| c.automorphisms));
    let torsor_cardinality: ExactCardinality = groupoid_cardinality(torsors.iter().map(|c| c.automorphisms));
    let cardinality_ok = bundle_cardinality == torsor_cardinality;
    if !cardinality_ok {
        fail(format!("groupoid cardinalities {bundle_cardinality} and {torsor_cardinality} differ"));
    }

    Ok(EquivalenceReport {
        profile,
        domain_checked,
        all_bundle_classes: all_classes.len(),
        bundle_classes: sector
            .iter()
            .map(|c| ClassSummary { data: c.representative.key().into_iter().map(usize::from).collect(), automorphisms: c.automorphisms })
            .collect(),
        torsor_classes: torsors
            .iter()
            .map(|c| ClassSummary { data: c.representative.pair_values(), automorphisms: c.automorphisms })
            .collect(),
        matching,
        bundle_cardinality,
        torsor_cardinality,
        domain_ok,
        bijection_ok,
        automorphisms_ok,
        round_trips_ok,
        cardinality_ok,
        failure,
    })
}
