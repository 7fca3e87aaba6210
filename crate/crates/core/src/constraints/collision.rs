//! Collision bodies, the active pair set and the clearance term.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::collision::segment_clearance;
use crate::geometry::{CollisionPrimitive, Transform, Vec3};

use super::jet::{object_jet, robot_state};
use super::{Model, RowSink, Sample, Term};

#[derive(Debug, Clone, PartialEq)]
pub enum BodyOwner {
    Link { robot: usize, link: usize },
    Object(usize),
    Static(Transform),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub name: String,
    pub owner: BodyOwner,
    pub primitive: CollisionPrimitive,
}

/// Every collision body of the scenario. Link bodies are named
/// `robot:link<l>`, object and obstacle bodies by their own name.
pub fn bodies(model: &Model) -> Vec<Body> {
    let mut out = Vec::new();
    for (i, r) in model.scenario.robots.iter().enumerate() {
        for lp in &r.chain.collision_bodies {
            out.push(Body {
                name: format!("{}:link{}", r.name, lp.link),
                owner: BodyOwner::Link {
                    robot: i,
                    link: lp.link,
                },
                primitive: lp.primitive,
            });
        }
    }
    for (j, o) in model.scenario.objects.iter().enumerate() {
        for p in &model.object_primitives[j] {
            out.push(Body {
                name: o.name.clone(),
                owner: BodyOwner::Object(j),
                primitive: *p,
            });
        }
    }
    for obs in &model.scenario.obstacles {
        out.push(Body {
            name: obs.name.clone(),
            owner: BodyOwner::Static(obs.pose.to_transform()),
            primitive: obs.primitive,
        });
    }
    out
}

/// Active pairs: the explicit list when the scenario gives one, otherwise
/// every link except the distal (grasping) link against every object,
/// every pair of objects, and every movable body against every obstacle.
pub fn active_pairs(model: &Model) -> Result<Vec<(Body, Body)>> {
    let all = bodies(model);
    if let Some(pairs) = &model.scenario.extensions.collision_pairs {
        let mut out = Vec::new();
        for [a, b] in pairs {
            let pick = |name: &String| -> Result<Vec<&Body>> {
                let found: Vec<&Body> = all.iter().filter(|x| &x.name == name).collect();
                if found.is_empty() {
                    return Err(Error::InvalidScenario(format!(
                        "extensions.collision_pairs names unknown body `{name}`"
                    )));
                }
                Ok(found)
            };
            for x in pick(a)? {
                for y in pick(b)? {
                    out.push((x.clone(), y.clone()));
                }
            }
        }
        return Ok(out);
    }
    let distal = |robot: usize| model.scenario.robots[robot].chain.dof() - 1;
    let mut out = Vec::new();
    for (k, a) in all.iter().enumerate() {
        for b in &all[k + 1..] {
            let keep = match (&a.owner, &b.owner) {
                (BodyOwner::Link { robot, link }, BodyOwner::Object(_)) => *link != distal(*robot),
                (BodyOwner::Object(i), BodyOwner::Object(j)) => i != j,
                (BodyOwner::Static(_), BodyOwner::Static(_)) => false,
                (BodyOwner::Static(_), _) | (_, BodyOwner::Static(_)) => true,
                _ => false,
            };
            if keep {
                out.push((a.clone(), b.clone()));
            }
        }
    }
    Ok(out)
}

type PointPartials = Vec<(usize, [Vec3; 2])>;

fn world_points(model: &Model, body: &Body, x: &[f64], at: &Sample) -> ([Vec3; 2], PointPartials) {
    let local = body.primitive.local_points();
    match &body.owner {
        BodyOwner::Static(t) => (
            local.map(|p| t * nalgebra::Point3::from(p)).map(|p| p.coords),
            Vec::new(),
        ),
        BodyOwner::Object(j) => {
            let jet = object_jet(model, x, *j, at.point);
            let pts = local.map(|p| jet.position + jet.rotation * p);
            let partials = jet
                .partials
                .iter()
                .map(|p| (p.index, pts.map(|q| p.position + p.rotation.cross(&(q - jet.position)))))
                .collect();
            (pts, partials)
        }
        BodyOwner::Link { robot, link } => {
            let st = robot_state(model, x, *robot, at.point);
            let frame = st.frames.links[*link];
            let pts = local.map(|p| (frame * nalgebra::Point3::from(p)).coords);
            let block = &model.layout.robots[*robot];
            let mut partials = Vec::with_capacity(4 * (link + 1));
            for k in 0..=*link {
                let rates = pts.map(|q| st.frames.point_rate(k, &q));
                for (a, index) in block.nodal_indices(at.point.segment, k).into_iter().enumerate() {
                    let c = st.weights.value[a];
                    partials.push((index, rates.map(|r| r * c)));
                }
            }
            (pts, partials)
        }
    }
}

/// Squared distance between the two primitives' core segments minus the
/// squared radius sum; `≥ 0` when they do not overlap.
pub struct CollisionTerm {
    model: Arc<Model>,
    a: Body,
    b: Body,
}

impl CollisionTerm {
    pub fn new(model: Arc<Model>, a: Body, b: Body) -> Self {
        Self { model, a, b }
    }

    pub fn label(&self) -> String {
        format!("{}|{}", self.a.name, self.b.name)
    }
}

impl Term for CollisionTerm {
    fn rows(&self) -> usize {
        1
    }

    fn evaluate(&self, x: &[f64], at: &Sample, out: &mut RowSink<'_>) {
        let (pa, da) = world_points(&self.model, &self.a, x, at);
        let (pb, db) = world_points(&self.model, &self.b, x, at);
        let c = segment_clearance(pa, self.a.primitive.radius, pb, self.b.primitive.radius);
        out.set(0, c.value);
        for (index, d) in da {
            out.add(0, index, c.grad_a[0].dot(&d[0]) + c.grad_a[1].dot(&d[1]));
        }
        for (index, d) in db {
            out.add(0, index, c.grad_b[0].dot(&d[0]) + c.grad_b[1].dot(&d[1]));
        }
    }
}
