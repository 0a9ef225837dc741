//! JSON set-description schema, e.g.
//! `{"type":"vpolytope","vertices":[[1,1],[-1,1],[1,0],[-1,0]]}` or
//! `{"type":"halfspace","normal":[0,1],"offset":0}` (meaning `<normal,x> >= offset`).

use serde::{Deserialize, Serialize};

use super::{ConvexSet, HalfPlane, Wedge};
use crate::error::Error;
use crate::point::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceDescription {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfPlaneDescription {
    pub normal: [f64; 2],
    pub offset: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetDescription {
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
    },
    Hyperplane {
        normal: Vec<f64>,
        offset: f64,
    },
    Affine {
        base: Vec<f64>,
        #[serde(default)]
        directions: Vec<Vec<f64>>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Vpolytope {
        vertices: Vec<Vec<f64>>,
    },
    Hpolyhedron {
        halfspaces: Vec<HalfspaceDescription>,
    },
    /// conv(line through `apex` and `line_through` ∪ ray from `apex` through `ray_through`).
    Wedge {
        apex: Vec<f64>,
        line_through: Vec<f64>,
        ray_through: Vec<f64>,
    },
    /// Region of the plane `origin + span(u, w)` cut by half-planes in the
    /// orthonormal chart derived from (u, w).
    Planar {
        origin: Vec<f64>,
        u: Vec<f64>,
        w: Vec<f64>,
        halfplanes: Vec<HalfPlaneDescription>,
    },
    Translate {
        inner: Box<SetDescription>,
        shift: Vec<f64>,
    },
}

impl SetDescription {
    pub fn build(&self) -> Result<ConvexSet, Error> {
        ConvexSet::try_from(self.clone())
    }
}

impl TryFrom<SetDescription> for ConvexSet {
    type Error = Error;

    fn try_from(d: SetDescription) -> Result<Self, Error> {
        match d {
            SetDescription::Halfspace { normal, offset } => {
                ConvexSet::halfspace(Point::new(normal), offset)
            }
            SetDescription::Hyperplane { normal, offset } => {
                ConvexSet::hyperplane(Point::new(normal), offset)
            }
            SetDescription::Affine { base, directions } => ConvexSet::affine(
                Point::new(base),
                directions.into_iter().map(Point::new).collect(),
            ),
            SetDescription::Ball { center, radius } => ConvexSet::ball(Point::new(center), radius),
            SetDescription::Vpolytope { vertices } => {
                ConvexSet::vpolytope(vertices.into_iter().map(Point::new).collect())
            }
            SetDescription::Hpolyhedron { halfspaces } => ConvexSet::hpolyhedron(
                halfspaces
                    .into_iter()
                    .map(|h| (Point::new(h.normal), h.offset))
                    .collect(),
            ),
            SetDescription::Wedge {
                apex,
                line_through,
                ray_through,
            } => ConvexSet::wedge(
                Point::new(apex),
                Point::new(line_through),
                Point::new(ray_through),
            ),
            SetDescription::Planar {
                origin,
                u,
                w,
                halfplanes,
            } => Ok(ConvexSet::Wedge(Wedge::new(
                Point::new(origin),
                Point::new(u),
                Point::new(w),
                halfplanes
                    .into_iter()
                    .map(|h| HalfPlane {
                        normal: h.normal,
                        offset: h.offset,
                    })
                    .collect(),
            )?)),
            SetDescription::Translate { inner, shift } => {
                ConvexSet::try_from(*inner)?.translate(Point::new(shift))
            }
        }
    }
}

impl From<ConvexSet> for SetDescription {
    fn from(s: ConvexSet) -> Self {
        SetDescription::from(&s)
    }
}

impl From<&ConvexSet> for SetDescription {
    fn from(s: &ConvexSet) -> Self {
        match s {
            ConvexSet::Halfspace(h) => SetDescription::Halfspace {
                normal: h.normal().to_vec(),
                offset: h.offset(),
            },
            ConvexSet::Hyperplane(h) => SetDescription::Hyperplane {
                normal: h.normal().to_vec(),
                offset: h.offset(),
            },
            ConvexSet::AffineSubspace(a) => SetDescription::Affine {
                base: a.base().to_vec(),
                directions: a.basis().iter().map(|e| e.to_vec()).collect(),
            },
            ConvexSet::Ball(b) => SetDescription::Ball {
                center: b.center().to_vec(),
                radius: b.radius(),
            },
            ConvexSet::VPolytope(p) => SetDescription::Vpolytope {
                vertices: p.vertices().iter().map(|v| v.to_vec()).collect(),
            },
            ConvexSet::HPolyhedron(p) => SetDescription::Hpolyhedron {
                halfspaces: p
                    .halfspaces()
                    .map(|(n, b)| HalfspaceDescription {
                        normal: n.to_vec(),
                        offset: b,
                    })
                    .collect(),
            },
            ConvexSet::Wedge(w) => match w.defining_points() {
                Some([a, l, r]) => SetDescription::Wedge {
                    apex: a.to_vec(),
                    line_through: l.to_vec(),
                    ray_through: r.to_vec(),
                },
                None => {
                    let (e1, e2) = w.chart_basis();
                    SetDescription::Planar {
                        origin: w.origin().to_vec(),
                        u: e1.to_vec(),
                        w: e2.to_vec(),
                        halfplanes: w
                            .halfplanes()
                            .iter()
                            .map(|h| HalfPlaneDescription {
                                normal: h.normal,
                                offset: h.offset,
                            })
                            .collect(),
                    }
                }
            },
            ConvexSet::Translate(t) => SetDescription::Translate {
                inner: Box::new(SetDescription::from(t.inner())),
                shift: t.shift().to_vec(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_examples() {
        let a: ConvexSet =
            serde_json::from_str(r#"{"type":"vpolytope","vertices":[[1,1],[-1,1],[1,0],[-1,0]]}"#)
                .unwrap();
        assert_eq!(a.vertices().unwrap().len(), 4);
        let h: ConvexSet =
            serde_json::from_str(r#"{"type":"halfspace","normal":[0,1],"offset":0}"#).unwrap();
        assert!(h.contains(&Point::from([3.0, 0.5]), 0.0).unwrap());
        assert!(!h.contains(&Point::from([3.0, -0.5]), 0.0).unwrap());
    }

    #[test]
    fn rejects_unknown_type() {
        let r: Result<ConvexSet, _> = serde_json::from_str(r#"{"type":"blob","r":1}"#);
        assert!(r.is_err());
    }

    #[test]
    fn wedge_description_round_trips() {
        let w = ConvexSet::wedge([2.0, -1.0, 0.0], [0.0, 1.0, 1.0], [3.0, 0.0, 0.0]).unwrap();
        let json = serde_json::to_string(&w).unwrap();
        let back: ConvexSet = serde_json::from_str(&json).unwrap();
        assert_eq!(w, back);
    }
}
