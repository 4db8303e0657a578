//! JSON instance files: groups, action, cover and bundles.
//!
//! Group elements may be written as indices or as labels. Bundle maps are
//! sparse; entries that are absent are the identity.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::covering::{BaseGraph, GammaCover};
use crate::gbundle::EquivBundle;
use crate::group::{AutAction, Elem, FiniteGroup, GroupHom, Subgroup};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("at `{path}`: {message}")]
    Invalid { path: String, message: String },
}

impl SchemaError {
    fn invalid(path: impl Into<String>, message: impl ToString) -> Self {
        SchemaError::Invalid { path: path.into(), message: message.to_string() }
    }

    pub fn path(&self) -> &str {
        match self {
            SchemaError::Parse { path, .. } | SchemaError::Invalid { path, .. } => path,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElemRef {
    Index(usize),
    Label(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cyclic: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetric: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    /// `act[gamma][x]` is the image of `x` under `gamma`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub act: Option<Vec<Vec<usize>>>,
    /// Conjugation through a homomorphism; one image per Gamma element.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inner: Option<Vec<ElemRef>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    pub vertices: usize,
    #[serde(default)]
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FibersSpec {
    pub vertices: Vec<Vec<Vec<usize>>>,
    #[serde(default)]
    pub edges: Vec<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidenceSpec {
    pub edges: Vec<Vec<(usize, usize)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverSpec {
    pub base: BaseSpec,
    /// Generators of the stabilizer of the basepoint lift, per base vertex.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stabilizers: Option<Vec<Vec<ElemRef>>>,
    /// Per edge pair, Gamma elements `(a, b)`: lift `d` runs from coset
    /// `d a` to coset `d b`. Defaults to the identity.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<(ElemRef, ElemRef)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fibers: Option<FibersSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub incidence: Option<IncidenceSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSpec {
    /// Cover edge index to transition.
    #[serde(default)]
    pub trans: BTreeMap<String, ElemRef>,
    /// `"gamma,vertex"` to lift coefficient.
    #[serde(default)]
    pub lift: BTreeMap<String, ElemRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GroupSpec>,
    pub g: GroupSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverSpec>,
    /// Stabilizer generators for classification without a cover.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stabilizers: Option<Vec<Vec<ElemRef>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<BundleSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundles: Option<Vec<BundleSpec>>,
}

/// A loaded and validated instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub gamma: Arc<FiniteGroup>,
    pub g: Arc<FiniteGroup>,
    pub action: Arc<AutAction>,
    pub cover: Option<Arc<GammaCover>>,
    pub stabilizers: Vec<Subgroup>,
    pub anchor: Option<EquivBundle>,
    pub bundles: Vec<EquivBundle>,
}

/// Parses and validates; errors carry the JSON key path.
pub fn parse_instance(text: &str) -> Result<Instance, SchemaError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: InstanceSpec = serde_path_to_error::deserialize(de).map_err(|e| SchemaError::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    load_instance(&spec)
}

pub fn load_instance(spec: &InstanceSpec) -> Result<Instance, SchemaError> {
    let gamma = Arc::new(match &spec.gamma {
        Some(s) => build_group(s, "gamma")?,
        None => FiniteGroup::cyclic(1).expect("trivial group"),
    });
    let g = Arc::new(build_group(&spec.g, "g")?);
    let action = Arc::new(build_action(spec.action.as_ref(), &gamma, &g)?);
    let cover = match &spec.cover {
        Some(c) => Some(Arc::new(build_cover(c, &gamma)?)),
        None => None,
    };
    let stabilizers = match (&spec.stabilizers, &cover) {
        (Some(list), _) => list
            .iter()
            .enumerate()
            .map(|(i, gens)| build_subgroup(gens, &gamma, &format!("stabilizers[{i}]")))
            .collect::<Result<_, _>>()?,
        (None, Some(cover)) => (0..cover.base().vertex_count()).map(|x| cover.stabilizer(x).clone()).collect(),
        (None, None) => Vec::new(),
    };
    let need_cover = |what: &str| SchemaError::invalid(what, "bundles need a cover");
    let anchor = match &spec.anchor {
        Some(b) => {
            let cover = cover.as_ref().ok_or_else(|| need_cover("anchor"))?;
            Some(build_bundle(b, cover, &action, "anchor")?)
        }
        None => None,
    };
    let mut bundles = Vec::new();
    for (i, b) in spec.bundles.iter().flatten().enumerate() {
        let path = format!("bundles[{i}]");
        let cover = cover.as_ref().ok_or_else(|| need_cover(&path))?;
        bundles.push(build_bundle(b, cover, &action, &path)?);
    }
    Ok(Instance { gamma, g, action, cover, stabilizers, anchor, bundles })
}

fn build_group(spec: &GroupSpec, path: &str) -> Result<FiniteGroup, SchemaError> {
    let given = [spec.cyclic.is_some(), spec.symmetric.is_some(), spec.table.is_some()];
    if given.iter().filter(|&&b| b).count() != 1 {
        return Err(SchemaError::invalid(path, "give exactly one of `cyclic`, `symmetric`, `table`"));
    }
    let group = if let Some(n) = spec.cyclic {
        FiniteGroup::cyclic(n).map_err(|e| SchemaError::invalid(format!("{path}.cyclic"), e))?
    } else if let Some(n) = spec.symmetric {
        FiniteGroup::symmetric(n).map_err(|e| SchemaError::invalid(format!("{path}.symmetric"), e))?
    } else {
        let table = spec.table.as_ref().expect("checked above");
        FiniteGroup::from_table(table, spec.labels.clone()).map_err(|e| SchemaError::invalid(format!("{path}.table"), e))?
    };
    if let Some(order) = spec.order {
        if order != group.order() {
            return Err(SchemaError::invalid(format!("{path}.order"), format!("declared {order}, table has {}", group.order())));
        }
    }
    if spec.labels.is_some() && spec.table.is_none() {
        return Err(SchemaError::invalid(format!("{path}.labels"), "labels are only accepted with `table`"));
    }
    Ok(group)
}

fn resolve(group: &FiniteGroup, r: &ElemRef, path: &str) -> Result<Elem, SchemaError> {
    match r {
        ElemRef::Index(i) if *i < group.order() => Ok(*i),
        ElemRef::Index(i) => Err(SchemaError::invalid(path, format!("element index {i} out of range"))),
        ElemRef::Label(l) => group
            .find_label(l)
            .or_else(|| l.parse().ok().filter(|&i: &usize| i < group.order()))
            .ok_or_else(|| SchemaError::invalid(path, format!("unknown element `{l}`"))),
    }
}

fn build_action(spec: Option<&ActionSpec>, gamma: &Arc<FiniteGroup>, g: &Arc<FiniteGroup>) -> Result<AutAction, SchemaError> {
    let spec = match spec {
        None => return AutAction::trivial(gamma.clone(), g.clone()).map_err(|e| SchemaError::invalid("action", e)),
        Some(s) => s,
    };
    match (&spec.act, &spec.inner) {
        (Some(act), None) => {
            AutAction::new(gamma.clone(), g.clone(), act.clone()).map_err(|e| SchemaError::invalid("action.act", e))
        }
        (None, Some(images)) => {
            let image = images
                .iter()
                .enumerate()
                .map(|(i, r)| resolve(g, r, &format!("action.inner[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let hom = GroupHom::new(gamma.clone(), g.clone(), image).map_err(|e| SchemaError::invalid("action.inner", e))?;
            AutAction::inner(&hom).map_err(|e| SchemaError::invalid("action.inner", e))
        }
        _ => Err(SchemaError::invalid("action", "give exactly one of `act`, `inner`")),
    }
}

fn build_subgroup(gens: &[ElemRef], gamma: &Arc<FiniteGroup>, path: &str) -> Result<Subgroup, SchemaError> {
    let gens = gens
        .iter()
        .enumerate()
        .map(|(i, r)| resolve(gamma, r, &format!("{path}[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Subgroup::generated(gamma.clone(), &gens).map_err(|e| SchemaError::invalid(path, e))
}

fn build_cover(spec: &CoverSpec, gamma: &Arc<FiniteGroup>) -> Result<GammaCover, SchemaError> {
    let base = BaseGraph::new(spec.base.vertices, spec.base.edges.clone())
        .map_err(|e| SchemaError::invalid("cover.base", e))?;
    match (&spec.stabilizers, &spec.fibers, &spec.incidence) {
        (Some(stabs), None, None) => {
            let subs = stabs
                .iter()
                .enumerate()
                .map(|(i, gens)| build_subgroup(gens, gamma, &format!("cover.stabilizers[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            let offsets = match &spec.offsets {
                Some(list) => list
                    .iter()
                    .enumerate()
                    .map(|(i, (a, b))| {
                        let p = format!("cover.offsets[{i}]");
                        Ok((resolve(gamma, a, &p)?, resolve(gamma, b, &p)?))
                    })
                    .collect::<Result<Vec<_>, SchemaError>>()?,
                None => vec![(gamma.identity(), gamma.identity()); base.pair_count()],
            };
            GammaCover::from_stabilizers(base, gamma.clone(), &subs, &offsets).map_err(|e| SchemaError::invalid("cover", e))
        }
        (None, Some(fibers), Some(incidence)) => {
            if spec.offsets.is_some() {
                return Err(SchemaError::invalid("cover.offsets", "offsets only apply with `stabilizers`"));
            }
            GammaCover::new(base, gamma.clone(), fibers.vertices.clone(), fibers.edges.clone(), incidence.edges.clone())
                .map_err(|e| SchemaError::invalid("cover", e))
        }
        _ => Err(SchemaError::invalid("cover", "give either `stabilizers` or both `fibers` and `incidence`")),
    }
}

fn build_bundle(
    spec: &BundleSpec,
    cover: &Arc<GammaCover>,
    action: &Arc<AutAction>,
    path: &str,
) -> Result<EquivBundle, SchemaError> {
    let g = action.g();
    let gamma = cover.gamma();
    let nv = cover.cover_vertex_count();
    let mut trans = vec![g.identity(); cover.cover_edge_count()];
    for (key, value) in &spec.trans {
        let p = format!("{path}.trans.{key}");
        let e: usize = key.trim().parse().map_err(|_| SchemaError::invalid(&p, "key must be a cover edge index"))?;
        if e >= trans.len() {
            return Err(SchemaError::invalid(&p, format!("cover edge {e} out of range")));
        }
        trans[e] = resolve(g, value, &p)?;
    }
    let mut lift = vec![g.identity(); gamma.order() * nv];
    for (key, value) in &spec.lift {
        let p = format!("{path}.lift.{key}");
        let (c, v) = key.rsplit_once(',').ok_or_else(|| SchemaError::invalid(&p, "key must be `gamma,vertex`"))?;
        let c = resolve(gamma, &ElemRef::Label(c.trim().to_string()), &p)?;
        let v: usize = v.trim().parse().map_err(|_| SchemaError::invalid(&p, "vertex must be an index"))?;
        if v >= nv {
            return Err(SchemaError::invalid(&p, format!("cover vertex {v} out of range")));
        }
        lift[c * nv + v] = resolve(g, value, &p)?;
    }
    EquivBundle::new(cover.clone(), action.clone(), trans, lift).map_err(|e| SchemaError::invalid(path, e))
}

/// Sparse serialization with labels; identity entries are omitted.
pub fn bundle_to_spec(b: &EquivBundle) -> BundleSpec {
    let cover = b.cover();
    let g = b.action().g();
    let gamma = cover.gamma();
    let e = g.identity();
    let trans = b
        .transitions()
        .iter()
        .enumerate()
        .filter(|(_, &x)| x != e)
        .map(|(i, &x)| (format!("{i:03}"), ElemRef::Label(g.label(x))))
        .collect();
    let mut lift = BTreeMap::new();
    for c in gamma.elements() {
        for v in 0..cover.cover_vertex_count() {
            let x = b.lift(c, v);
            if x != e {
                lift.insert(format!("{},{v:03}", gamma.label(c)), ElemRef::Label(g.label(x)));
            }
        }
    }
    BundleSpec { trans, lift }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RAMIFIED: &str = r#"{
        "gamma": {"cyclic": 2},
        "g": {"cyclic": 3},
        "action": {"act": [[0, 1, 2], [0, 2, 1]]},
        "cover": {"base": {"vertices": 2, "edges": [[0, 1]]}, "stabilizers": [[1], [1]]},
        "anchor": {},
        "bundles": [{"trans": {"0": 1, "1": 2, "2": 2, "3": 1}}]
    }"#;

    #[test]
    fn parses_ramified_interval() {
        let inst = parse_instance(RAMIFIED).unwrap();
        let cover = inst.cover.unwrap();
        assert_eq!(cover.branch_locus().len(), 2);
        assert_eq!(inst.bundles.len(), 1);
        assert_eq!(inst.stabilizers.len(), 2);
        let spec = bundle_to_spec(&inst.bundles[0]);
        assert_eq!(spec.trans.len(), 4);
        assert!(spec.lift.is_empty());
    }

    #[test]
    fn round_trips_bundles() {
        let inst = parse_instance(RAMIFIED).unwrap();
        let cover = inst.cover.clone().unwrap();
        for b in crate::gbundle::all_bundles(&cover, &inst.action) {
            let spec = bundle_to_spec(&b);
            assert_eq!(build_bundle(&spec, &cover, &inst.action, "x").unwrap(), b);
        }
    }

    #[test]
    fn errors_carry_key_paths() {
        let bad = RAMIFIED.replace("\"vertices\": 2", "\"vertices\": \"two\"");
        let err = parse_instance(&bad).unwrap_err();
        assert!(matches!(err, SchemaError::Parse { .. }));
        assert_eq!(err.path(), "cover.base.vertices");

        let bad = RAMIFIED.replace("\"0\": 1, \"1\": 2", "\"0\": 1, \"1\": 1");
        let err = parse_instance(&bad).unwrap_err();
        assert_eq!(err.path(), "bundles[0]");
        assert!(err.to_string().contains("orientation"));

        let bad = RAMIFIED.replace("[[1], [1]]", "[[1], [7]]");
        assert_eq!(parse_instance(&bad).unwrap_err().path(), "cover.stabilizers[1][0]");

        let bad = RAMIFIED.replace("[0, 2, 1]]", "[0, 1, 1]]");
        assert_eq!(parse_instance(&bad).unwrap_err().path(), "action.act");

        let bad = RAMIFIED.replace("\"anchor\": {}", "\"anchor\": {\"colour\": 1}");
        assert_eq!(parse_instance(&bad).unwrap_err().path(), "anchor.colour");
    }

    #[test]
    fn labels_resolve() {
        let text = r#"{
            "gamma": {"cyclic": 2},
            "g": {"symmetric": 4},
            "action": {"inner": ["e", "(12)(34)"]},
            "cover": {"base": {"vertices": 2, "edges": [[0, 1]]}, "stabilizers": [["1"], ["1"]]},
            "bundles": [{"lift": {"1,0": "(12)", "1,1": "(12)"}}]
        }"#;
        let inst = parse_instance(text).unwrap();
        assert!(!inst.bundles[0].local_type().is_trivial());
        assert!(parse_instance(&text.replace("\"(12)\", \"1,1\"", "\"(99)\", \"1,1\"")).is_err());
    }
}
