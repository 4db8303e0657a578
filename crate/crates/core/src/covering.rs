//! Finite graph models of ramified Gamma-coverings.
//!
//! The base is a connected multigraph whose oriented edges come in reverse
//! pairs: pair `k` gives oriented edge `2k` (as listed) and `2k + 1` (its
//! reverse). Over every base vertex sits a transitive Gamma-set, over every
//! edge pair a free transitive one. Ramification lives only at vertices.
//!
//! Cover vertices are numbered fiber by fiber. Cover edge `e * |Gamma| + i`
//! is lift `i` of oriented base edge `e`; a lift and its reverse share `i`.

use std::collections::VecDeque;
use std::sync::Arc;

use thiserror::Error;

use crate::group::{Elem, FiniteGroup, Subgroup, MAX_GAMMA_ORDER};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error("base graph has no vertices")]
    NoVertices,
    #[error("base edge {edge} has endpoint {vertex} out of range")]
    BadEndpoint { edge: usize, vertex: usize },
    #[error("base graph is not connected (vertex {0} unreachable from 0)")]
    Disconnected(usize),
    #[error("acting group of order {0} exceeds the cap of {MAX_GAMMA_ORDER}")]
    GammaTooLarge(usize),
    #[error("expected {expected} {what}, got {got}")]
    Shape { what: &'static str, expected: usize, got: usize },
    #[error("fiber over {what} {index} is not a Gamma-set: {reason}")]
    NotGammaSet { what: &'static str, index: usize, reason: &'static str },
    #[error("fiber over base vertex {0} is not transitive")]
    NonTransitiveVertexFiber(usize),
    #[error("fiber over base edge {0} is not free and transitive")]
    NonFreeEdgeFiber(usize),
    #[error("incidence of base edge {edge} lift {lift} is out of range")]
    BadIncidence { edge: usize, lift: usize },
    #[error("incidence is not equivariant at (gamma={gamma}, base edge {edge}, lift {lift})")]
    NonEquivariantIncidence { gamma: Elem, edge: usize, lift: usize },
}

/// A connected multigraph with loops allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseGraph {
    vertices: usize,
    pairs: Vec<(usize, usize)>,
}

impl BaseGraph {
    pub fn new(vertices: usize, pairs: Vec<(usize, usize)>) -> Result<Self, CoverError> {
        if vertices == 0 {
            return Err(CoverError::NoVertices);
        }
        for (k, &(s, t)) in pairs.iter().enumerate() {
            if s >= vertices || t >= vertices {
                return Err(CoverError::BadEndpoint { edge: k, vertex: s.max(t) });
            }
        }
        let graph = BaseGraph { vertices, pairs };
        let reached = graph.reachable_from(0);
        if let Some(v) = reached.iter().position(|&r| !r) {
            return Err(CoverError::Disconnected(v));
        }
        Ok(graph)
    }

    fn reachable_from(&self, root: usize) -> Vec<bool> {
        let mut seen = vec![false; self.vertices];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(s, t) in &self.pairs {
                for (a, b) in [(s, t), (t, s)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        queue.push_back(b);
                    }
                }
            }
        }
        seen
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Number of oriented edges.
    pub fn edge_count(&self) -> usize {
        2 * self.pairs.len()
    }

    pub fn source(&self, e: usize) -> usize {
        let (s, t) = self.pairs[e / 2];
        if e.is_multiple_of(2) {
            s
        } else {
            t
        }
    }

    pub fn target(&self, e: usize) -> usize {
        self.source(e ^ 1)
    }

    pub fn reverse(&self, e: usize) -> usize {
        e ^ 1
    }
}

/// A finite left Gamma-set given by one permutation per element of Gamma.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaSet {
    act: Vec<Vec<usize>>,
}

impl GammaSet {
    fn new(
        gamma: &FiniteGroup,
        act: Vec<Vec<usize>>,
        what: &'static str,
        index: usize,
    ) -> Result<Self, CoverError> {
        let err = |reason| CoverError::NotGammaSet { what, index, reason };
        if act.len() != gamma.order() {
            return Err(err("wrong number of permutations"));
        }
        let size = act[0].len();
        if size == 0 {
            return Err(err("empty fiber"));
        }
        for perm in &act {
            let mut seen = vec![false; size];
            if perm.len() != size {
                return Err(err("permutations of different lengths"));
            }
            for &p in perm {
                if p >= size || seen[p] {
                    return Err(err("not a permutation"));
                }
                seen[p] = true;
            }
        }
        for c in gamma.elements() {
            for s in gamma.elements() {
                let cs = gamma.mul(c, s);
                if (0..size).any(|p| act[cs][p] != act[c][act[s][p]]) {
                    return Err(err("not a group action"));
                }
            }
        }
        Ok(GammaSet { act })
    }

    /// Left cosets of `sub`, ordered by least member; `gamma` acts by left
    /// multiplication.
    pub fn cosets(sub: &Subgroup) -> Self {
        let gamma = sub.ambient();
        let mut coset_of = vec![usize::MAX; gamma.order()];
        let mut count = 0;
        for a in gamma.elements() {
            if coset_of[a] == usize::MAX {
                for &h in sub.members() {
                    coset_of[gamma.mul(a, h)] = count;
                }
                count += 1;
            }
        }
        let reps: Vec<Elem> = (0..count).map(|i| coset_of.iter().position(|&c| c == i).unwrap()).collect();
        let act = gamma
            .elements()
            .map(|c| reps.iter().map(|&r| coset_of[gamma.mul(c, r)]).collect())
            .collect();
        GammaSet { act }
    }

    /// Gamma acting on itself by left multiplication.
    pub fn regular(gamma: &FiniteGroup) -> Self {
        GammaSet::cosets(&Subgroup::trivial(Arc::new(gamma.clone())))
    }

    pub fn size(&self) -> usize {
        self.act[0].len()
    }

    pub fn apply(&self, gamma: Elem, p: usize) -> usize {
        self.act[gamma][p]
    }

    pub fn permutations(&self) -> &[Vec<usize>] {
        &self.act
    }

    pub fn is_transitive(&self) -> bool {
        (0..self.size()).all(|p| self.act.iter().any(|perm| perm[0] == p))
    }

    pub fn is_free(&self, gamma: &FiniteGroup) -> bool {
        gamma
            .elements()
            .filter(|&c| c != gamma.identity())
            .all(|c| (0..self.size()).all(|p| self.act[c][p] != p))
    }

    pub fn stabilizer_members(&self, p: usize) -> Vec<Elem> {
        (0..self.act.len()).filter(|&c| self.act[c][p] == p).collect()
    }
}

/// A validated Gamma-cover of a base graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaCover {
    base: BaseGraph,
    gamma: Arc<FiniteGroup>,
    vertex_fibers: Vec<GammaSet>,
    edge_fibers: Vec<GammaSet>,
    incidence: Vec<Vec<(usize, usize)>>,
    vertex_offset: Vec<usize>,
    vertex_base: Vec<usize>,
    stabilizers: Vec<Subgroup>,
    coset_reps: Vec<Elem>,
    edge_lift_elem: Vec<Vec<Elem>>,
}

/// A base vertex with nontrivial stabilizer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchPoint {
    pub vertex: usize,
    pub basepoint_lift: usize,
    pub stabilizer: Subgroup,
}

impl GammaCover {
    /// Validates fibers and incidence. `incidence[k][i]` is the pair
    /// (point over the source, point over the target) of lift `i` of the
    /// listed orientation of base edge pair `k`.
    pub fn new(
        base: BaseGraph,
        gamma: Arc<FiniteGroup>,
        vertex_fibers: Vec<Vec<Vec<usize>>>,
        edge_fibers: Vec<Vec<Vec<usize>>>,
        incidence: Vec<Vec<(usize, usize)>>,
    ) -> Result<Self, CoverError> {
        if gamma.order() > MAX_GAMMA_ORDER {
            return Err(CoverError::GammaTooLarge(gamma.order()));
        }
        let shape = |what, expected, got: usize| {
            if expected == got {
                Ok(())
            } else {
                Err(CoverError::Shape { what, expected, got })
            }
        };
        shape("vertex fibers", base.vertex_count(), vertex_fibers.len())?;
        shape("edge fibers", base.pair_count(), edge_fibers.len())?;
        shape("incidence lists", base.pair_count(), incidence.len())?;

        let vertex_fibers = vertex_fibers
            .into_iter()
            .enumerate()
            .map(|(x, act)| GammaSet::new(&gamma, act, "vertex", x))
            .collect::<Result<Vec<_>, _>>()?;
        for (x, fiber) in vertex_fibers.iter().enumerate() {
            if !fiber.is_transitive() {
                return Err(CoverError::NonTransitiveVertexFiber(x));
            }
        }
        let edge_fibers = edge_fibers
            .into_iter()
            .enumerate()
            .map(|(k, act)| GammaSet::new(&gamma, act, "edge", k))
            .collect::<Result<Vec<_>, _>>()?;
        for (k, fiber) in edge_fibers.iter().enumerate() {
            if fiber.size() != gamma.order() || !fiber.is_transitive() || !fiber.is_free(&gamma) {
                return Err(CoverError::NonFreeEdgeFiber(k));
            }
        }
        for (k, lifts) in incidence.iter().enumerate() {
            shape("edge lifts", gamma.order(), lifts.len())?;
            let (s, t) = base.pairs()[k];
            for (i, &(ps, pt)) in lifts.iter().enumerate() {
                if ps >= vertex_fibers[s].size() || pt >= vertex_fibers[t].size() {
                    return Err(CoverError::BadIncidence { edge: k, lift: i });
                }
            }
            for c in gamma.elements() {
                for i in 0..gamma.order() {
                    let j = edge_fibers[k].apply(c, i);
                    let (ps, pt) = lifts[i];
                    let expected = (vertex_fibers[s].apply(c, ps), vertex_fibers[t].apply(c, pt));
                    if lifts[j] != expected {
                        return Err(CoverError::NonEquivariantIncidence { gamma: c, edge: k, lift: i });
                    }
                }
            }
        }

        let mut vertex_offset = Vec::with_capacity(base.vertex_count() + 1);
        let mut vertex_base = Vec::new();
        let mut coset_reps = Vec::new();
        let mut stabilizers = Vec::new();
        let mut offset = 0;
        for (x, fiber) in vertex_fibers.iter().enumerate() {
            vertex_offset.push(offset);
            offset += fiber.size();
            vertex_base.extend(std::iter::repeat_n(x, fiber.size()));
            for p in 0..fiber.size() {
                coset_reps.push(gamma.elements().find(|&c| fiber.apply(c, 0) == p).unwrap());
            }
            let members = fiber.stabilizer_members(0);
            stabilizers.push(Subgroup::from_members(gamma.clone(), &members).expect("stabilizers are subgroups"));
        }
        vertex_offset.push(offset);
        let edge_lift_elem = edge_fibers
            .iter()
            .map(|fiber| {
                let mut elem = vec![0; gamma.order()];
                for c in gamma.elements() {
                    elem[fiber.apply(c, 0)] = c;
                }
                elem
            })
            .collect();
        Ok(GammaCover {
            base,
            gamma,
            vertex_fibers,
            edge_fibers,
            incidence,
            vertex_offset,
            vertex_base,
            stabilizers,
            coset_reps,
            edge_lift_elem,
        })
    }

    /// Builds the cover whose fiber over `x` is `Gamma / stabilizers[x]` and
    /// whose edge fibers are regular. The lift of pair `k` indexed by
    /// `d` in Gamma runs from coset `d * a` to coset `d * b`, where
    /// `(a, b) = offsets[k]`.
    pub fn from_stabilizers(
        base: BaseGraph,
        gamma: Arc<FiniteGroup>,
        stabilizers: &[Subgroup],
        offsets: &[(Elem, Elem)],
    ) -> Result<Self, CoverError> {
        let vertex_sets: Vec<GammaSet> = stabilizers.iter().map(GammaSet::cosets).collect();
        if offsets.len() != base.pair_count() {
            return Err(CoverError::Shape {
                what: "edge offsets",
                expected: base.pair_count(),
                got: offsets.len(),
            });
        }
        let point_of = |x: usize, a: Elem| vertex_sets[x].apply(a, 0);
        let incidence = base
            .pairs()
            .iter()
            .zip(offsets)
            .map(|(&(s, t), &(a, b))| {
                gamma.elements().map(|d| (point_of(s, gamma.mul(d, a)), point_of(t, gamma.mul(d, b)))).collect()
            })
            .collect();
        let regular = GammaSet::regular(&gamma);
        let edge_sets = vec![regular.act; base.pair_count()];
        let vertex_sets = vertex_sets.into_iter().map(|s| s.act).collect();
        Self::new(base, gamma, vertex_sets, edge_sets, incidence)
    }

    /// The cover with trivial Gamma.
    pub fn identity(base: BaseGraph) -> Self {
        let gamma = Arc::new(FiniteGroup::cyclic(1).unwrap());
        let subs = vec![Subgroup::trivial(gamma.clone()); base.vertex_count()];
        let offsets = vec![(0, 0); base.pair_count()];
        Self::from_stabilizers(base, gamma, &subs, &offsets).expect("identity cover is valid")
    }

    pub fn base(&self) -> &BaseGraph {
        &self.base
    }

    pub fn gamma(&self) -> &Arc<FiniteGroup> {
        &self.gamma
    }

    pub fn vertex_fiber(&self, x: usize) -> &GammaSet {
        &self.vertex_fibers[x]
    }

    pub fn edge_fiber(&self, pair: usize) -> &GammaSet {
        &self.edge_fibers[pair]
    }

    pub fn incidence(&self) -> &[Vec<(usize, usize)>] {
        &self.incidence
    }

    pub fn cover_vertex_count(&self) -> usize {
        *self.vertex_offset.last().unwrap()
    }

    pub fn cover_edge_count(&self) -> usize {
        self.base.edge_count() * self.gamma.order()
    }

    /// Cover vertices over base vertex `x`.
    pub fn fiber(&self, x: usize) -> std::ops::Range<usize> {
        self.vertex_offset[x]..self.vertex_offset[x + 1]
    }

    pub fn project_vertex(&self, v: usize) -> usize {
        self.vertex_base[v]
    }

    pub fn cover_vertex(&self, x: usize, point: usize) -> usize {
        self.vertex_offset[x] + point
    }

    /// `gamma . v` on cover vertices.
    pub fn act_vertex(&self, gamma: Elem, v: usize) -> usize {
        let x = self.vertex_base[v];
        self.vertex_offset[x] + self.vertex_fibers[x].apply(gamma, v - self.vertex_offset[x])
    }

    pub fn basepoint_lift(&self, x: usize) -> usize {
        self.vertex_offset[x]
    }

    /// Least element of Gamma carrying the basepoint lift of the fiber to `v`.
    pub fn coset_rep(&self, v: usize) -> Elem {
        self.coset_reps[v]
    }

    /// Stabilizer of the basepoint lift over `x`.
    pub fn stabilizer(&self, x: usize) -> &Subgroup {
        &self.stabilizers[x]
    }

    pub fn cover_edge(&self, base_edge: usize, lift: usize) -> usize {
        base_edge * self.gamma.order() + lift
    }

    pub fn project_edge(&self, e: usize) -> usize {
        e / self.gamma.order()
    }

    pub fn edge_lift_index(&self, e: usize) -> usize {
        e % self.gamma.order()
    }

    pub fn reverse_edge(&self, e: usize) -> usize {
        let n = self.gamma.order();
        ((e / n) ^ 1) * n + e % n
    }

    pub fn edge_source(&self, e: usize) -> usize {
        let n = self.gamma.order();
        let (base_edge, lift) = (e / n, e % n);
        let pair = base_edge / 2;
        let (ps, pt) = self.incidence[pair][lift];
        let (s, t) = self.base.pairs()[pair];
        if base_edge % 2 == 0 {
            self.cover_vertex(s, ps)
        } else {
            self.cover_vertex(t, pt)
        }
    }

    pub fn edge_target(&self, e: usize) -> usize {
        self.edge_source(self.reverse_edge(e))
    }

    /// `gamma . e` on cover edges.
    pub fn act_edge(&self, gamma: Elem, e: usize) -> usize {
        let n = self.gamma.order();
        let base_edge = e / n;
        base_edge * n + self.edge_fibers[base_edge / 2].apply(gamma, e % n)
    }

    /// Basepoint lift of an oriented base edge: lift 0.
    pub fn basepoint_edge_lift(&self, base_edge: usize) -> usize {
        self.cover_edge(base_edge, 0)
    }

    /// The unique element of Gamma carrying lift 0 of `base_edge` to `e`.
    pub fn edge_lift_element(&self, e: usize) -> Elem {
        let n = self.gamma.order();
        self.edge_lift_elem[e / n / 2][e % n]
    }

    /// Base vertices with nontrivial stabilizer, with the least-index lift.
    pub fn branch_locus(&self) -> Vec<BranchPoint> {
        (0..self.base.vertex_count())
            .filter(|&x| !self.stabilizers[x].is_trivial())
            .map(|x| BranchPoint {
                vertex: x,
                basepoint_lift: self.basepoint_lift(x),
                stabilizer: self.stabilizers[x].clone(),
            })
            .collect()
    }

    /// Base vertices whose stabilizer is not cyclic. Smooth curves only
    /// produce cyclic stabilizers; the graph model allows any.
    pub fn noncyclic_stabilizers(&self) -> Vec<usize> {
        (0..self.base.vertex_count())
            .filter(|&x| {
                let sub = &self.stabilizers[x];
                !sub.members().iter().any(|&c| self.gamma.element_order(c) == sub.order())
            })
            .collect()
    }

    /// Oriented cover edges forming a spanning forest of the cover, with
    /// one root per connected component. Returns `(roots, tree)` where
    /// `tree` lists edges in BFS order from their roots.
    pub fn spanning_forest(&self) -> (Vec<usize>, Vec<usize>) {
        let nv = self.cover_vertex_count();
        let mut incident: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for e in 0..self.cover_edge_count() {
            incident[self.edge_source(e)].push(e);
        }
        let mut seen = vec![false; nv];
        let mut roots = Vec::new();
        let mut tree = Vec::new();
        for root in 0..nv {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            roots.push(root);
            let mut queue = VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &e in &incident[v] {
                    let w = self.edge_target(e);
                    if !seen[w] {
                        seen[w] = true;
                        tree.push(e);
                        queue.push_back(w);
                    }
                }
            }
        }
        (roots, tree)
    }
}
