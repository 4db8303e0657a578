//! Equivariant (Gamma, G)-bundles on a graph cover as finite data.
//!
//! Fibers are right G-torsors trivialized at cover vertices. Parallel
//! transport along a cover edge `e` is `p -> g_e * p`, and the lift of
//! `gamma` at a vertex `v` is `p -> c(gamma, v) * gamma_G(p)`, landing in
//! the fiber over `gamma . v`. With that encoding the compatibility
//! `gamma_P(p g) = gamma_P(p) gamma_G(g)` holds automatically, and a bundle
//! is valid exactly when
//!
//! * `g_{rev e} = g_e^-1`,
//! * `c(e, v) = 1`,
//! * `c(gs, v) = c(g, s.v) * g_G(c(s, v))`,
//! * `c(g, t(e)) * g_G(g_e) = g_{g.e} * c(g, s(e))`.
//!
//! A gauge `h` (one element per cover vertex) changes trivializations:
//! `g_e -> h_t g_e h_s^-1` and `c(g, v) -> h_{g.v} c(g, v) g_G(h_v)^-1`.

use std::collections::HashSet;
use std::sync::Arc;

use thiserror::Error;

use crate::cohomology::{H1Class, TwistedCocycle};
use crate::covering::{BranchPoint, GammaCover};
use crate::group::{same_group, AutAction, Elem, Subgroup};

/// Default cap on `|G|^(cover vertices + cover edge pairs)` for enumeration.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BundleError {
    #[error("cover and action disagree on Gamma")]
    GammaMismatch,
    #[error("expected {expected} {what}, got {got}")]
    Shape { what: &'static str, expected: usize, got: usize },
    #[error("{what} entry {index} is not an element of G")]
    BadElement { what: &'static str, index: usize },
    #[error("orientation violated at cover edge {edge}: g(rev e) != g(e)^-1")]
    OrientationViolation { edge: usize },
    #[error("unit violated at cover vertex {vertex}: c(1, v) != 1")]
    UnitViolation { vertex: usize },
    #[error("composition law violated at (gamma={gamma}, sigma={sigma}, vertex {vertex})")]
    CocycleViolation { gamma: Elem, sigma: Elem, vertex: usize },
    #[error("edge compatibility violated at (gamma={gamma}, cover edge {edge})")]
    EdgeCompatViolation { gamma: Elem, edge: usize },
    #[error("bundles live over different covers or actions")]
    MismatchedContext,
    #[error("enumeration needs {needed} steps, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("vertex {0} is not in the branch locus")]
    NotBranchPoint(usize),
}

/// Per-vertex change of trivialization.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Gauge(pub Vec<Elem>);

impl Gauge {
    pub fn identity(cover: &GammaCover, action: &AutAction) -> Self {
        Gauge(vec![action.g().identity(); cover.cover_vertex_count()])
    }

    /// Pointwise product `self * first`: transforming by `first` and then
    /// by `self` equals transforming by the product.
    pub fn after(&self, first: &Gauge, action: &AutAction) -> Gauge {
        let g = action.g();
        Gauge(self.0.iter().zip(&first.0).map(|(&a, &b)| g.mul(a, b)).collect())
    }
}

/// Bundle with identity transitions and `gamma_P = gamma_G`.
pub fn trivial_bundle(cover: Arc<GammaCover>, action: Arc<AutAction>) -> Result<EquivBundle, BundleError> {
    EquivBundle::trivial(cover, action)
}

/// Validated bundle; see [`EquivBundle::new`].
pub fn make_bundle(
    cover: Arc<GammaCover>,
    action: Arc<AutAction>,
    trans: Vec<Elem>,
    lift: Vec<Elem>,
) -> Result<EquivBundle, BundleError> {
    EquivBundle::new(cover, action, trans, lift)
}

/// A (Gamma, G)-bundle on a cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivBundle {
    cover: Arc<GammaCover>,
    action: Arc<AutAction>,
    trans: Vec<Elem>,
    lift: Vec<Elem>,
}

impl EquivBundle {
    /// Validated bundle from transitions (one per oriented cover edge) and
    /// lift coefficients indexed `gamma * cover_vertex_count + v`.
    pub fn new(
        cover: Arc<GammaCover>,
        action: Arc<AutAction>,
        trans: Vec<Elem>,
        lift: Vec<Elem>,
    ) -> Result<Self, BundleError> {
        if !same_group(cover.gamma(), action.gamma()) {
            return Err(BundleError::GammaMismatch);
        }
        let nv = cover.cover_vertex_count();
        let expected_lift = cover.gamma().order() * nv;
        if trans.len() != cover.cover_edge_count() {
            return Err(BundleError::Shape {
                what: "transitions",
                expected: cover.cover_edge_count(),
                got: trans.len(),
            });
        }
        if lift.len() != expected_lift {
            return Err(BundleError::Shape { what: "lift coefficients", expected: expected_lift, got: lift.len() });
        }
        let order = action.g().order();
        if let Some(index) = trans.iter().position(|&x| x >= order) {
            return Err(BundleError::BadElement { what: "transition", index });
        }
        if let Some(index) = lift.iter().position(|&x| x >= order) {
            return Err(BundleError::BadElement { what: "lift", index });
        }
        let bundle = EquivBundle { cover, action, trans, lift };
        bundle.validate()?;
        Ok(bundle)
    }

    /// Identity transitions and `gamma_P = gamma_G`.
    pub fn trivial(cover: Arc<GammaCover>, action: Arc<AutAction>) -> Result<Self, BundleError> {
        let e = action.g().identity();
        let trans = vec![e; cover.cover_edge_count()];
        let lift = vec![e; cover.gamma().order() * cover.cover_vertex_count()];
        Self::new(cover, action, trans, lift)
    }

    pub(crate) fn from_parts_unchecked(
        cover: Arc<GammaCover>,
        action: Arc<AutAction>,
        trans: Vec<Elem>,
        lift: Vec<Elem>,
    ) -> Self {
        EquivBundle { cover, action, trans, lift }
    }

    /// Checks the four defining equations, reporting the first failure.
    pub fn validate(&self) -> Result<(), BundleError> {
        let cover = &self.cover;
        let gamma = cover.gamma();
        let g = self.action.g();
        for e in 0..cover.cover_edge_count() {
            if self.trans[cover.reverse_edge(e)] != g.inv(self.trans[e]) {
                return Err(BundleError::OrientationViolation { edge: e });
            }
        }
        for v in 0..cover.cover_vertex_count() {
            if self.lift(gamma.identity(), v) != g.identity() {
                return Err(BundleError::UnitViolation { vertex: v });
            }
        }
        for c in gamma.elements() {
            for s in gamma.elements() {
                let cs = gamma.mul(c, s);
                for v in 0..cover.cover_vertex_count() {
                    let rhs = g.mul(
                        self.lift(c, cover.act_vertex(s, v)),
                        self.action.apply(c, self.lift(s, v)),
                    );
                    if self.lift(cs, v) != rhs {
                        return Err(BundleError::CocycleViolation { gamma: c, sigma: s, vertex: v });
                    }
                }
            }
        }
        for c in gamma.elements() {
            for e in 0..cover.cover_edge_count() {
                let lhs = g.mul(self.lift(c, cover.edge_target(e)), self.action.apply(c, self.trans[e]));
                let rhs = g.mul(self.trans[cover.act_edge(c, e)], self.lift(c, cover.edge_source(e)));
                if lhs != rhs {
                    return Err(BundleError::EdgeCompatViolation { gamma: c, edge: e });
                }
            }
        }
        Ok(())
    }

    pub fn cover(&self) -> &Arc<GammaCover> {
        &self.cover
    }

    pub fn action(&self) -> &Arc<AutAction> {
        &self.action
    }

    pub fn transitions(&self) -> &[Elem] {
        &self.trans
    }

    pub fn lifts(&self) -> &[Elem] {
        &self.lift
    }

    #[inline]
    pub fn trans(&self, e: usize) -> Elem {
        self.trans[e]
    }

    /// `c(gamma, v)`.
    #[inline]
    pub fn lift(&self, gamma: Elem, v: usize) -> Elem {
        self.lift[gamma * self.cover.cover_vertex_count() + v]
    }

    /// `gamma_P` on the point `p` of the fiber over `v`.
    pub fn act_point(&self, gamma: Elem, v: usize, p: Elem) -> (usize, Elem) {
        let g = self.action.g();
        (self.cover.act_vertex(gamma, v), g.mul(self.lift(gamma, v), self.action.apply(gamma, p)))
    }

    /// Pointwise check of `gamma_P(p g) = gamma_P(p) gamma_G(g)` over every
    /// fiber point. True by construction of the encoding.
    pub fn check_equivariance_law(&self) -> bool {
        let g = self.action.g();
        self.cover.gamma().elements().all(|c| {
            (0..self.cover.cover_vertex_count()).all(|v| {
                g.elements().all(|p| {
                    g.elements().all(|x| {
                        let (_, left) = self.act_point(c, v, g.mul(p, x));
                        let (_, right) = self.act_point(c, v, p);
                        left == g.mul(right, self.action.apply(c, x))
                    })
                })
            })
        })
    }

    pub fn same_context(&self, other: &EquivBundle) -> bool {
        (Arc::ptr_eq(&self.cover, &other.cover) || self.cover == other.cover)
            && self.action.same_context(&other.action)
    }

    /// Concatenated data vector (transitions, then lift coefficients).
    pub fn key(&self) -> Vec<u8> {
        self.trans.iter().chain(&self.lift).map(|&x| x as u8).collect()
    }

    pub fn gauge_transform(&self, h: &Gauge) -> EquivBundle {
        let cover = &self.cover;
        let g = self.action.g();
        let nv = cover.cover_vertex_count();
        let trans = (0..cover.cover_edge_count())
            .map(|e| {
                let (s, t) = (cover.edge_source(e), cover.edge_target(e));
                g.mul(g.mul(h.0[t], self.trans[e]), g.inv(h.0[s]))
            })
            .collect();
        let mut lift = Vec::with_capacity(self.lift.len());
        for c in cover.gamma().elements() {
            for v in 0..nv {
                let hv = g.inv(self.action.apply(c, h.0[v]));
                lift.push(g.mul(g.mul(h.0[cover.act_vertex(c, v)], self.lift(c, v)), hv));
            }
        }
        EquivBundle { cover: self.cover.clone(), action: self.action.clone(), trans, lift }
    }

    /// First gauge (in index order of the values at the spanning-forest
    /// roots) carrying `self` to `other`.
    pub fn is_isomorphic(&self, other: &EquivBundle) -> Result<Option<Gauge>, BundleError> {
        if !self.same_context(other) {
            return Err(BundleError::MismatchedContext);
        }
        let mut found = None;
        self.for_each_tree_gauge(other, |h| {
            found = Some(h);
            false
        });
        Ok(found)
    }

    /// Every gauge fixing `self`.
    pub fn automorphisms(&self) -> Vec<Gauge> {
        let mut out = Vec::new();
        self.for_each_tree_gauge(self, |h| {
            out.push(h);
            true
        });
        out
    }

    pub fn automorphism_count(&self) -> usize {
        let mut count = 0;
        self.for_each_tree_gauge(self, |_| {
            count += 1;
            true
        });
        count
    }

    /// Calls `f` on every gauge carrying `self` to `other` until `f`
    /// returns false. Values at the forest roots are enumerated; the rest
    /// are forced along tree edges by `h_t = g'_e h_s g_e^-1`.
    fn for_each_tree_gauge(&self, other: &EquivBundle, mut f: impl FnMut(Gauge) -> bool) {
        let cover = &self.cover;
        let g = self.action.g();
        let (roots, tree) = cover.spanning_forest();
        let mut root_values = vec![0usize; roots.len()];
        let mut h = vec![g.identity(); cover.cover_vertex_count()];
        loop {
            for (&r, &val) in roots.iter().zip(&root_values) {
                h[r] = val;
            }
            for &e in &tree {
                let (s, t) = (cover.edge_source(e), cover.edge_target(e));
                h[t] = g.mul(g.mul(other.trans[e], h[s]), g.inv(self.trans[e]));
            }
            if self.carries(&h, other) && !f(Gauge(h.clone())) {
                return;
            }
            if !odometer(&mut root_values, g.order()) {
                return;
            }
        }
    }

    /// Whether the gauge `h` carries `self` to `other`; stops at the first
    /// mismatch.
    fn carries(&self, h: &[Elem], other: &EquivBundle) -> bool {
        let cover = &self.cover;
        let g = self.action.g();
        let nv = cover.cover_vertex_count();
        for c in cover.gamma().elements() {
            for v in 0..nv {
                let lhs = g.mul(h[cover.act_vertex(c, v)], self.lift(c, v));
                if lhs != g.mul(other.lift(c, v), self.action.apply(c, h[v])) {
                    return false;
                }
            }
        }
        (0..cover.cover_edge_count()).all(|e| {
            let (s, t) = (cover.edge_source(e), cover.edge_target(e));
            g.mul(h[t], self.trans[e]) == g.mul(other.trans[e], h[s])
        })
    }

    /// Restriction of the lift data to the stabilizer of cover vertex `v`:
    /// `gamma -> c(gamma, v)`.
    pub fn cocycle_at(&self, v: usize) -> TwistedCocycle {
        let cover = &self.cover;
        let members: Vec<Elem> =
            cover.gamma().elements().filter(|&c| cover.act_vertex(c, v) == v).collect();
        let stabilizer = Subgroup::from_members(cover.gamma().clone(), &members).expect("stabilizer");
        let values = members.iter().map(|&c| self.lift(c, v)).collect();
        TwistedCocycle::new(stabilizer, self.action.clone(), values)
            .expect("restriction of valid lift data is a cocycle")
    }

    /// The cocycle at the basepoint lift of a branch point.
    pub fn restrict_to_fiber(&self, x: &BranchPoint) -> TwistedCocycle {
        self.cocycle_at(x.basepoint_lift)
    }

    /// H^1 class at every branch point.
    pub fn local_type(&self) -> LocalTypeProfile {
        let entries = self
            .cover
            .branch_locus()
            .iter()
            .map(|x| (x.vertex, self.restrict_to_fiber(x).class()))
            .collect();
        LocalTypeProfile { entries }
    }

    /// Compares local types at each branch point, returning a twisting
    /// witness per point when one exists.
    pub fn same_local_type(&self, other: &EquivBundle) -> Result<LocalTypeComparison, BundleError> {
        if !self.same_context(other) {
            return Err(BundleError::MismatchedContext);
        }
        let witnesses: Vec<(usize, Option<Elem>)> = self
            .cover
            .branch_locus()
            .iter()
            .map(|x| {
                let a = self.restrict_to_fiber(x);
                let b = other.restrict_to_fiber(x);
                (x.vertex, a.same_class(&b).expect("same stabilizer and action"))
            })
            .collect();
        let same = witnesses.iter().all(|(_, w)| w.is_some());
        Ok(LocalTypeComparison { same, witnesses })
    }
}

/// Advances a little-endian counter with digits in `0..base`; false on wrap.
pub(crate) fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// Local types of a bundle, keyed by branch vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalTypeProfile {
    pub entries: Vec<(usize, H1Class)>,
}

impl LocalTypeProfile {
    pub fn is_trivial(&self) -> bool {
        self.entries.iter().all(|(_, c)| c.is_trivial())
    }

    /// Representative values per branch point, for display and sorting.
    pub fn signature(&self) -> Vec<(usize, Vec<Elem>)> {
        self.entries.iter().map(|(x, c)| (*x, c.representative.values().to_vec())).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalTypeComparison {
    pub same: bool,
    pub witnesses: Vec<(usize, Option<Elem>)>,
}

/// One gauge-equivalence class from [`enumerate_bundles`].
#[derive(Debug, Clone)]
pub struct BundleClass {
    pub representative: EquivBundle,
    pub automorphisms: usize,
    pub orbit_size: usize,
}

/// `|G|^(cover vertices + cover edge pairs)`, saturating.
pub fn enumeration_cost(cover: &GammaCover, action: &AutAction) -> u128 {
    let exp = cover.cover_vertex_count() + cover.cover_edge_count() / 2;
    (action.g().order() as u128).checked_pow(exp as u32).unwrap_or(u128::MAX)
}

fn check_budget(needed: u128, budget: u64) -> Result<(), BundleError> {
    if needed > budget as u128 {
        Err(BundleError::BudgetExceeded { needed, budget })
    } else {
        Ok(())
    }
}

/// All valid lift data on the fiber over `x`, as `(gamma, point) -> c`
/// tables of size `|Gamma| * |fiber|`, indexed `gamma * |fiber| + point`.
///
/// The data are parametrized by a cocycle `a` on the stabilizer of the
/// basepoint and free values `f(s_i)` at coset representatives; with
/// `f(s_j t) = f(s_j) s_j(a_t)` one gets `c(g, s_i . p0) = f(g s_i) g(f(s_i))^-1`.
pub fn fiber_lift_data(cover: &GammaCover, action: &Arc<AutAction>, x: usize) -> Vec<Vec<Elem>> {
    let gamma = cover.gamma();
    let g = action.g();
    let fiber = cover.vertex_fiber(x);
    let size = fiber.size();
    let stab = cover.stabilizer(x);
    let reps: Vec<Elem> = (0..size)
        .map(|p| if p == 0 { gamma.identity() } else { cover.coset_rep(cover.cover_vertex(x, p)) })
        .collect();
    let cocycles = crate::cohomology::enumerate_cocycles(stab, action).expect("stabilizer lies in Gamma");
    let mut out = Vec::new();
    let mut free = vec![0usize; size.saturating_sub(1)];
    for a in &cocycles {
        loop {
            let f_rep = |p: usize| if p == 0 { g.identity() } else { free[p - 1] };
            let f: Vec<Elem> = gamma
                .elements()
                .map(|c| {
                    let j = fiber.apply(c, 0);
                    let t = gamma.mul(gamma.inv(reps[j]), c);
                    g.mul(f_rep(j), action.apply(reps[j], a.value(t)))
                })
                .collect();
            let mut table = vec![0; gamma.order() * size];
            for c in gamma.elements() {
                for p in 0..size {
                    let s = reps[p];
                    table[c * size + p] = g.mul(f[gamma.mul(c, s)], g.inv(action.apply(c, f_rep(p))));
                }
            }
            out.push(table);
            if !odometer(&mut free, g.order()) {
                break;
            }
        }
    }
    out
}

/// Every valid bundle on the cover, in generation order.
pub fn all_bundles(
    cover: &Arc<GammaCover>,
    action: &Arc<AutAction>,
) -> impl Iterator<Item = EquivBundle> {
    let cover = cover.clone();
    let action = action.clone();
    let base = cover.base();
    let fiber_choices: Vec<Vec<Vec<Elem>>> =
        (0..base.vertex_count()).map(|x| fiber_lift_data(&cover, &action, x)).collect();
    let mut digits = vec![0usize; base.vertex_count() + base.pair_count()];
    let radix: Vec<usize> = fiber_choices
        .iter()
        .map(Vec::len)
        .chain(std::iter::repeat_n(action.g().order(), base.pair_count()))
        .collect();
    let mut done = radix.contains(&0);
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let bundle = assemble(&cover, &action, &fiber_choices, &digits);
        done = !mixed_odometer(&mut digits, &radix);
        Some(bundle)
    })
}

fn mixed_odometer(digits: &mut [usize], radix: &[usize]) -> bool {
    for (d, &r) in digits.iter_mut().zip(radix).rev() {
        *d += 1;
        if *d < r {
            return true;
        }
        *d = 0;
    }
    false
}

fn assemble(
    cover: &Arc<GammaCover>,
    action: &Arc<AutAction>,
    fiber_choices: &[Vec<Vec<Elem>>],
    digits: &[usize],
) -> EquivBundle {
    let gamma = cover.gamma();
    let g = action.g();
    let base = cover.base();
    let nv = cover.cover_vertex_count();
    let mut lift = vec![0; gamma.order() * nv];
    for x in 0..base.vertex_count() {
        let table = &fiber_choices[x][digits[x]];
        let size = cover.fiber(x).len();
        for c in gamma.elements() {
            for p in 0..size {
                lift[c * nv + cover.cover_vertex(x, p)] = table[c * size + p];
            }
        }
    }
    let mut trans = vec![0; cover.cover_edge_count()];
    for k in 0..base.pair_count() {
        let g0 = digits[base.vertex_count() + k];
        let e0 = cover.basepoint_edge_lift(2 * k);
        let (s0, t0) = (cover.edge_source(e0), cover.edge_target(e0));
        for c in gamma.elements() {
            let e = cover.act_edge(c, e0);
            let value = g.mul(g.mul(lift[c * nv + t0], action.apply(c, g0)), g.inv(lift[c * nv + s0]));
            trans[e] = value;
            trans[cover.reverse_edge(e)] = g.inv(value);
        }
    }
    EquivBundle::from_parts_unchecked(cover.clone(), action.clone(), trans, lift)
}

/// All gauges on the cover in index order.
pub fn all_gauges(cover: &GammaCover, action: &AutAction) -> impl Iterator<Item = Gauge> {
    let n = action.g().order();
    let mut digits = vec![0usize; cover.cover_vertex_count()];
    let mut done = false;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let h = Gauge(digits.clone());
        done = !odometer(&mut digits, n);
        Some(h)
    })
}

/// Gauge-equivalence classes of bundles, each with its least data vector
/// as representative and its automorphism count, sorted by representative.
/// With `filter`, only classes of that local type are returned.
pub fn enumerate_bundles(
    cover: &Arc<GammaCover>,
    action: &Arc<AutAction>,
    filter: Option<&LocalTypeProfile>,
    budget: u64,
) -> Result<Vec<BundleClass>, BundleError> {
    if !same_group(cover.gamma(), action.gamma()) {
        return Err(BundleError::GammaMismatch);
    }
    check_budget(enumeration_cost(cover, action), budget)?;
    let gauges: Vec<Gauge> = all_gauges(cover, action).collect();
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut classes = Vec::new();
    for bundle in all_bundles(cover, action) {
        let key = bundle.key();
        if seen.contains(&key) {
            continue;
        }
        let mut least = (key.clone(), bundle.clone());
        let mut automorphisms = 0;
        let mut orbit_size = 0;
        for h in &gauges {
            let image = bundle.gauge_transform(h);
            let image_key = image.key();
            if image_key == key {
                automorphisms += 1;
            }
            if image_key < least.0 {
                least = (image_key.clone(), image);
            }
            if seen.insert(image_key) {
                orbit_size += 1;
            }
        }
        let representative = least.1;
        if let Some(profile) = filter {
            if representative.local_type() != *profile {
                continue;
            }
        }
        classes.push((least.0, BundleClass { representative, automorphisms, orbit_size }));
    }
    classes.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(classes.into_iter().map(|(_, c)| c).collect())
}
