//! JSON shapes for cycles, planes, and solver outputs.
//!
//! Floats are written by `serde_json` in shortest round-trip form, so a value
//! read back is bit-identical to the one written.

use std::sync::Arc;

use fillvol_core::{
    AffineKPlane, Ambient, Cell, OrientedSubspace, PolyCycle, Pseudomanifold, Sign, SignedPoint, SliceAtom,
    TransportPlan, WitnessFunction, ZeroCycle,
};
use serde::{Deserialize, Serialize};

use crate::LabError;

fn sign_of(v: i64, what: &str) -> Result<Sign, LabError> {
    Sign::from_i64(v).ok_or_else(|| LabError::Config(format!("{what}: coefficient must be +1 or -1, got {v}")))
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CellJson {
    pub verts: Vec<Vec<f64>>,
    pub coef: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SimplexJson {
    pub verts: Vec<usize>,
    pub coef: i64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PseudomanifoldJson {
    pub num_vertices: usize,
    pub k: usize,
    pub simplices: Vec<SimplexJson>,
}

impl From<&Pseudomanifold> for PseudomanifoldJson {
    fn from(m: &Pseudomanifold) -> Self {
        PseudomanifoldJson {
            num_vertices: m.num_vertices(),
            k: m.k(),
            simplices: m
                .simplices()
                .iter()
                .map(|(v, s)| SimplexJson { verts: v.clone(), coef: s.value().into() })
                .collect(),
        }
    }
}

impl TryFrom<PseudomanifoldJson> for Pseudomanifold {
    type Error = LabError;

    fn try_from(j: PseudomanifoldJson) -> Result<Self, LabError> {
        let simplices = j
            .simplices
            .into_iter()
            .map(|s| Ok((s.verts, sign_of(s.coef, "simplex")?)))
            .collect::<Result<Vec<_>, LabError>>()?;
        Ok(Pseudomanifold::new(j.num_vertices, j.k, simplices)?)
    }
}

/// `{"n":…, "k":…, "cells":[{"verts":[[x,…],…],"coef":±1},…]}` with optional
/// `"relative": true` and `"provenance"` (the generating pseudomanifold).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PolyCycleJson {
    pub n: usize,
    pub k: usize,
    #[serde(default, skip_serializing_if = "is_false")]
    pub relative: bool,
    pub cells: Vec<CellJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<PseudomanifoldJson>,
}

impl From<&PolyCycle> for PolyCycleJson {
    fn from(z: &PolyCycle) -> Self {
        PolyCycleJson {
            n: z.n(),
            k: z.k(),
            relative: z.is_relative(),
            cells: z
                .cells()
                .iter()
                .map(|c| CellJson { verts: c.verts.clone(), coef: c.coef.value().into() })
                .collect(),
            provenance: z.provenance().map(|m| PseudomanifoldJson::from(m.as_ref())),
        }
    }
}

impl TryFrom<PolyCycleJson> for PolyCycle {
    type Error = LabError;

    fn try_from(j: PolyCycleJson) -> Result<Self, LabError> {
        let z = match j.provenance {
            Some(mj) => {
                let m = Pseudomanifold::try_from(mj)?;
                if m.simplices().len() != j.cells.len() {
                    return Err(LabError::Config("provenance and cells disagree in length".into()));
                }
                let mut positions: Vec<Option<Vec<f64>>> = vec![None; m.num_vertices()];
                for ((verts, _), cell) in m.simplices().iter().zip(&j.cells) {
                    if cell.verts.len() != verts.len() {
                        return Err(LabError::Config("cell does not match its simplex".into()));
                    }
                    for (&v, x) in verts.iter().zip(&cell.verts) {
                        match &positions[v] {
                            Some(p) if p != x => {
                                return Err(LabError::Config(format!("vertex {v} has two positions")))
                            }
                            _ => positions[v] = Some(x.clone()),
                        }
                    }
                }
                // isolated vertices never reach a cell; park them at the origin
                let positions: Vec<Vec<f64>> =
                    positions.into_iter().map(|p| p.unwrap_or_else(|| vec![0.0; j.n])).collect();
                let z = PolyCycle::from_embedding(Arc::new(m), j.n, &positions)?;
                for (c, cj) in z.cells().iter().zip(&j.cells) {
                    if i64::from(c.coef.value()) != cj.coef {
                        return Err(LabError::Config("cell coefficient differs from its simplex".into()));
                    }
                }
                z
            }
            None => {
                let cells = j
                    .cells
                    .into_iter()
                    .map(|c| Ok(Cell { verts: c.verts, coef: sign_of(c.coef, "cell")? }))
                    .collect::<Result<Vec<_>, LabError>>()?;
                PolyCycle::new(j.n, j.k, cells)?
            }
        };
        Ok(if j.relative { z.relative_to_boundary() } else { z })
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum AmbientJson {
    Cube(usize),
    Sphere(usize),
}

impl From<Ambient> for AmbientJson {
    fn from(a: Ambient) -> Self {
        match a {
            Ambient::Cube(d) => AmbientJson::Cube(d),
            Ambient::Sphere(d) => AmbientJson::Sphere(d),
        }
    }
}

impl From<AmbientJson> for Ambient {
    fn from(a: AmbientJson) -> Self {
        match a {
            AmbientJson::Cube(d) => Ambient::Cube(d),
            AmbientJson::Sphere(d) => Ambient::Sphere(d),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PointJson {
    pub pos: Vec<f64>,
    pub sign: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub src: Option<usize>,
}

/// `{"ambient":{"cube":d}|{"sphere":d}, "points":[{"pos":[…],"sign":±1,"src":i},…]}`
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ZeroCycleJson {
    pub ambient: AmbientJson,
    pub points: Vec<PointJson>,
}

impl ZeroCycleJson {
    pub fn from_cycle(z: &ZeroCycle) -> Self {
        ZeroCycleJson {
            ambient: z.ambient().into(),
            points: z
                .points()
                .iter()
                .map(|p| PointJson { pos: p.pos.clone(), sign: p.sign.value().into(), src: None })
                .collect(),
        }
    }

    /// Points of `z` tagged with the sources of the present atoms, in order.
    pub fn from_slice(z: &ZeroCycle, atoms: &[SliceAtom]) -> Self {
        let mut j = Self::from_cycle(z);
        let sources = atoms.iter().filter(|a| a.point.is_some()).map(|a| a.source);
        for (p, s) in j.points.iter_mut().zip(sources) {
            p.src = Some(s);
        }
        j
    }
}

impl TryFrom<ZeroCycleJson> for ZeroCycle {
    type Error = LabError;

    fn try_from(j: ZeroCycleJson) -> Result<Self, LabError> {
        let points = j
            .points
            .into_iter()
            .map(|p| Ok(SignedPoint::new(p.pos, sign_of(p.sign, "point")?)))
            .collect::<Result<Vec<_>, LabError>>()?;
        Ok(ZeroCycle::new(j.ambient.into(), points)?)
    }
}

/// Columns are listed one per inner array.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PlaneJson {
    pub basis: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SubspaceJson {
    pub basis: Vec<Vec<f64>>,
}

/// Output of `generate` for the plane and sphere models.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum FamilyJson {
    Planes(Vec<PlaneJson>),
    Subspaces(Vec<SubspaceJson>),
}

impl FamilyJson {
    pub fn planes(ps: &[AffineKPlane]) -> Self {
        FamilyJson::Planes(
            ps.iter().map(|p| PlaneJson { basis: p.basis().to_vec(), offset: p.offset().to_vec() }).collect(),
        )
    }

    pub fn subspaces(us: &[OrientedSubspace]) -> Self {
        FamilyJson::Subspaces(us.iter().map(|u| SubspaceJson { basis: u.basis().to_vec() }).collect())
    }

    pub fn to_planes(&self) -> Result<Vec<AffineKPlane>, LabError> {
        match self {
            FamilyJson::Planes(ps) => {
                ps.iter().map(|p| Ok(AffineKPlane::new(p.basis.clone(), p.offset.clone())?)).collect()
            }
            FamilyJson::Subspaces(_) => Err(LabError::Config("expected planes, found subspaces".into())),
        }
    }

    pub fn to_subspaces(&self) -> Result<Vec<OrientedSubspace>, LabError> {
        match self {
            FamilyJson::Subspaces(us) => us.iter().map(|u| Ok(OrientedSubspace::new(u.basis.clone())?)).collect(),
            FamilyJson::Planes(_) => Err(LabError::Config("expected subspaces, found planes".into())),
        }
    }
}

/// Anything `slice` and `fv` accept on input.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum InputJson {
    Poly(PolyCycleJson),
    Zero(ZeroCycleJson),
    Family(FamilyJson),
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PairingJson {
    pub plus: usize,
    pub minus: usize,
    pub cost: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BoundaryJson {
    pub point: usize,
    pub cost: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct PlanJson {
    pub pairings: Vec<PairingJson>,
    pub boundary: Vec<BoundaryJson>,
    pub total_cost: f64,
}

impl From<&TransportPlan> for PlanJson {
    fn from(p: &TransportPlan) -> Self {
        PlanJson {
            pairings: p.pairings.iter().map(|&(plus, minus, cost)| PairingJson { plus, minus, cost }).collect(),
            boundary: p.boundary_assignments.iter().map(|&(point, cost)| BoundaryJson { point, cost }).collect(),
            total_cost: p.total_cost,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FvOutput {
    pub fv: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plan: Option<PlanJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shift: Option<i64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AtomJson {
    pub corner: Vec<f64>,
    pub side: f64,
    pub coef: f64,
    pub scale: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WitnessOutput {
    pub integral: f64,
    pub lip: f64,
    pub certified_lip: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact_lip: Option<f64>,
    pub bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<AtomJson>>,
}

impl WitnessOutput {
    pub fn new(w: &WitnessFunction, z: &ZeroCycle, dump_atoms: bool) -> Result<Self, LabError> {
        let atoms = dump_atoms.then(|| {
            w.atoms()
                .iter()
                .zip(w.scale_tags())
                .map(|(a, &scale)| AtomJson { corner: a.corner.clone(), side: a.side, coef: a.coef, scale })
                .collect()
        });
        Ok(WitnessOutput {
            integral: w.integrate(z)?,
            lip: w.lip_bound(),
            certified_lip: w.certified_lip(),
            exact_lip: w.exact_lip(),
            bound: w.lower_bound(z)?,
            atoms,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use fillvol_core::models::sample_random_jump;
    use fillvol_core::RngStream;

    #[test]
    fn polycycle_round_trip_is_exact() {
        let z = sample_random_jump(7, 3, RngStream::new(3, 1)).unwrap();
        let text = serde_json::to_string(&PolyCycleJson::from(&z)).unwrap();
        let back = PolyCycle::try_from(serde_json::from_str::<PolyCycleJson>(&text).unwrap()).unwrap();
        assert_eq!(back.cells(), z.cells());
        assert_eq!(back.provenance().map(|m| m.as_ref()), z.provenance().map(|m| m.as_ref()));
        assert!(text.starts_with("{\"n\":3,\"k\":1,\"cells\":[{\"verts\":[["));
    }

    #[test]
    fn zero_cycle_shape() {
        let z = ZeroCycle::new(Ambient::Cube(1), vec![SignedPoint::pos(vec![0.25]), SignedPoint::neg(vec![0.5])])
            .unwrap();
        let text = serde_json::to_string(&ZeroCycleJson::from_cycle(&z)).unwrap();
        assert_eq!(text, r#"{"ambient":{"cube":1},"points":[{"pos":[0.25],"sign":1},{"pos":[0.5],"sign":-1}]}"#);
        let back = ZeroCycle::try_from(serde_json::from_str::<ZeroCycleJson>(&text).unwrap()).unwrap();
        assert_eq!(back, z);
    }

    #[test]
    fn rejects_bad_coefficients() {
        let j: PolyCycleJson =
            serde_json::from_str(r#"{"n":2,"k":1,"cells":[{"verts":[[0,0],[1,1]],"coef":2}]}"#).unwrap();
        assert!(matches!(PolyCycle::try_from(j), Err(LabError::Config(_))));
    }

    #[test]
    fn untagged_input_dispatch() {
        let poly: InputJson = serde_json::from_str(r#"{"n":2,"k":1,"cells":[]}"#).unwrap();
        assert!(matches!(poly, InputJson::Poly(_)));
        let zero: InputJson = serde_json::from_str(r#"{"ambient":{"sphere":2},"points":[]}"#).unwrap();
        assert!(matches!(zero, InputJson::Zero(_)));
        let fam: InputJson = serde_json::from_str(r#"{"subspaces":[]}"#).unwrap();
        assert!(matches!(fam, InputJson::Family(_)));
    }
}
