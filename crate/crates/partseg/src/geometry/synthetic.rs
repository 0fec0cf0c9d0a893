//! Procedural chair- and lamp-like shapes with ground-truth instance trees.
//!
//! Shapes are assembled from axis-aligned boxes, cylinders, and spheres, with
//! points sampled uniformly over surface area. Every generated point belongs
//! to exactly one childless instance node, and the annotation validates
//! against the category's built-in template.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::PointCloud;
use crate::annotation::{Annotation, InstanceNode};
use crate::error::{Error, Result};
use crate::template::{NodeKind, Template, TemplateNode};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticShapeSpec {
    pub category: String,
    pub seed: u64,
    pub points_per_shape: usize,
    pub jitter_sigma: f64,
}

pub fn synthetic_categories() -> &'static [&'static str] {
    &["chair", "lamp"]
}

/// The built-in template for a synthetic category.
pub fn synthetic_template(category: &str) -> Result<Template> {
    match category {
        "chair" => chair_template(),
        "lamp" => lamp_template(),
        other => Err(Error::InvalidArgument(format!(
            "unknown synthetic category {other:?}"
        ))),
    }
}

// chair node ids
const CHAIR: u32 = 0;
const CHAIR_BACK: u32 = 1;
const CHAIR_SEAT: u32 = 2;
const CHAIR_BASE: u32 = 3;
const BACK_PANEL: u32 = 4;
const BACK_FRAME: u32 = 5;
const REGULAR_BASE: u32 = 6;
const PEDESTAL_BASE: u32 = 7;
const BACK_VERTICAL_BAR: u32 = 8;
const BACK_TOP_BAR: u32 = 9;
const LEG: u32 = 10;
const CENTRAL_SUPPORT: u32 = 11;
const PEDESTAL_FOOT: u32 = 12;

fn chair_template() -> Result<Template> {
    let node = |id, label: &str, kind, children: Vec<u32>| TemplateNode {
        node_id: id,
        label: label.into(),
        kind,
        children,
    };
    Template::new(
        "chair",
        CHAIR,
        vec![
            node(CHAIR, "chair", NodeKind::And, vec![CHAIR_BACK, CHAIR_SEAT, CHAIR_BASE]),
            node(CHAIR_BACK, "chair_back", NodeKind::And, vec![BACK_PANEL, BACK_FRAME]),
            node(CHAIR_SEAT, "chair_seat", NodeKind::Leaf, vec![]),
            node(CHAIR_BASE, "chair_base", NodeKind::Or, vec![REGULAR_BASE, PEDESTAL_BASE]),
            node(BACK_PANEL, "back_panel", NodeKind::Leaf, vec![]),
            node(BACK_FRAME, "back_frame", NodeKind::And, vec![BACK_VERTICAL_BAR, BACK_TOP_BAR]),
            node(REGULAR_BASE, "regular_base", NodeKind::And, vec![LEG]),
            node(PEDESTAL_BASE, "pedestal_base", NodeKind::And, vec![CENTRAL_SUPPORT, PEDESTAL_FOOT]),
            node(BACK_VERTICAL_BAR, "back_vertical_bar", NodeKind::Leaf, vec![]),
            node(BACK_TOP_BAR, "back_top_bar", NodeKind::Leaf, vec![]),
            node(LEG, "leg", NodeKind::Leaf, vec![]),
            node(CENTRAL_SUPPORT, "central_support", NodeKind::Leaf, vec![]),
            node(PEDESTAL_FOOT, "pedestal_foot", NodeKind::Leaf, vec![]),
        ],
        level_cuts(&[
            (1, vec![CHAIR_BACK, CHAIR_SEAT, CHAIR_BASE]),
            (2, vec![CHAIR_SEAT, BACK_PANEL, BACK_FRAME, LEG, CENTRAL_SUPPORT, PEDESTAL_FOOT]),
            (
                3,
                vec![
                    CHAIR_SEAT,
                    BACK_PANEL,
                    BACK_VERTICAL_BAR,
                    BACK_TOP_BAR,
                    LEG,
                    CENTRAL_SUPPORT,
                    PEDESTAL_FOOT,
                ],
            ),
        ]),
    )
}

// lamp node ids
const LAMP: u32 = 0;
const LAMP_BASE: u32 = 1;
const LAMP_BODY: u32 = 2;
const LAMP_HEAD: u32 = 3;
const POLE: u32 = 4;
const SHADE: u32 = 5;
const BULB: u32 = 6;

fn lamp_template() -> Result<Template> {
    let node = |id, label: &str, kind, children: Vec<u32>| TemplateNode {
        node_id: id,
        label: label.into(),
        kind,
        children,
    };
    Template::new(
        "lamp",
        LAMP,
        vec![
            node(LAMP, "lamp", NodeKind::And, vec![LAMP_BASE, LAMP_BODY, LAMP_HEAD]),
            node(LAMP_BASE, "lamp_base", NodeKind::Leaf, vec![]),
            node(LAMP_BODY, "lamp_body", NodeKind::And, vec![POLE]),
            node(LAMP_HEAD, "lamp_head", NodeKind::And, vec![SHADE, BULB]),
            node(POLE, "pole", NodeKind::Leaf, vec![]),
            node(SHADE, "shade", NodeKind::Leaf, vec![]),
            node(BULB, "bulb", NodeKind::Leaf, vec![]),
        ],
        level_cuts(&[
            (1, vec![LAMP_BASE, LAMP_BODY, LAMP_HEAD]),
            (2, vec![LAMP_BASE, POLE, SHADE, BULB]),
        ]),
    )
}

fn level_cuts(cuts: &[(u8, Vec<u32>)]) -> BTreeMap<u8, std::collections::BTreeSet<u32>> {
    cuts.iter()
        .map(|(l, ids)| (*l, ids.iter().copied().collect()))
        .collect()
}

#[derive(Debug, Clone)]
enum Primitive {
    /// Axis-aligned box given by center and full extents.
    Box { center: [f64; 3], size: [f64; 3] },
    /// Y-axis cylinder; `capped` adds the two end discs.
    Cylinder { center: [f64; 3], radius: f64, height: f64, capped: bool },
    Sphere { center: [f64; 3], radius: f64 },
}

impl Primitive {
    fn area(&self) -> f64 {
        match *self {
            Primitive::Box { size: [sx, sy, sz], .. } => 2.0 * (sx * sy + sy * sz + sx * sz),
            Primitive::Cylinder { radius, height, capped, .. } => {
                let side = 2.0 * std::f64::consts::PI * radius * height;
                if capped {
                    side + 2.0 * std::f64::consts::PI * radius * radius
                } else {
                    side
                }
            }
            Primitive::Sphere { radius, .. } => 4.0 * std::f64::consts::PI * radius * radius,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> [f64; 3] {
        match *self {
            Primitive::Box { center, size: [sx, sy, sz] } => {
                let areas = [sy * sz, sy * sz, sx * sz, sx * sz, sx * sy, sx * sy];
                let total: f64 = areas.iter().sum();
                let mut pick = rng.gen_range(0.0..total);
                let mut face = 0;
                for (i, a) in areas.iter().enumerate() {
                    if pick < *a {
                        face = i;
                        break;
                    }
                    pick -= a;
                }
                let u = rng.gen_range(-0.5..0.5);
                let v = rng.gen_range(-0.5..0.5);
                let p = match face {
                    0 => [0.5, u, v],
                    1 => [-0.5, u, v],
                    2 => [u, 0.5, v],
                    3 => [u, -0.5, v],
                    4 => [u, v, 0.5],
                    _ => [u, v, -0.5],
                };
                [
                    center[0] + p[0] * sx,
                    center[1] + p[1] * sy,
                    center[2] + p[2] * sz,
                ]
            }
            Primitive::Cylinder { center, radius, height, capped } => {
                let side = 2.0 * std::f64::consts::PI * radius * height;
                let cap = std::f64::consts::PI * radius * radius;
                let total = if capped { side + 2.0 * cap } else { side };
                let pick = rng.gen_range(0.0..total);
                if pick < side {
                    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                    let y = rng.gen_range(-0.5..0.5) * height;
                    [
                        center[0] + radius * theta.cos(),
                        center[1] + y,
                        center[2] + radius * theta.sin(),
                    ]
                } else {
                    let sign = if pick < side + cap { 1.0 } else { -1.0 };
                    let r = radius * rng.gen_range(0.0f64..1.0).sqrt();
                    let theta = rng.gen_range(0.0..std::f64::consts::TAU);
                    [
                        center[0] + r * theta.cos(),
                        center[1] + sign * height * 0.5,
                        center[2] + r * theta.sin(),
                    ]
                }
            }
            Primitive::Sphere { center, radius } => {
                let z = rng.gen_range(-1.0f64..1.0);
                let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                let rxy = (1.0 - z * z).max(0.0).sqrt();
                [
                    center[0] + radius * rxy * phi.cos(),
                    center[1] + radius * z,
                    center[2] + radius * rxy * phi.sin(),
                ]
            }
        }
    }
}

/// A childless instance node to be populated with sampled points.
struct Part {
    template_node: u32,
    primitives: Vec<Primitive>,
}

/// The assembled shape: a tree skeleton where leaves reference parts by index.
enum Skeleton {
    Branch(u32, Vec<Skeleton>),
    Part(usize),
}

struct BuiltShape {
    parts: Vec<Part>,
    skeleton: Skeleton,
}

pub fn generate_synthetic(spec: &SyntheticShapeSpec) -> Result<(PointCloud, Annotation)> {
    if spec.points_per_shape == 0 {
        return Err(Error::InvalidArgument("points_per_shape must be positive".into()));
    }
    if !spec.jitter_sigma.is_finite() || spec.jitter_sigma < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "jitter_sigma must be non-negative, got {}",
            spec.jitter_sigma
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let built = match spec.category.as_str() {
        "chair" => build_chair(&mut rng),
        "lamp" => build_lamp(&mut rng),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown synthetic category {other:?}"
            )))
        }
    };
    if spec.points_per_shape < built.parts.len() {
        return Err(Error::InvalidArgument(format!(
            "points_per_shape {} is below the {} generated parts",
            spec.points_per_shape,
            built.parts.len()
        )));
    }

    let counts = allocate_points(&built.parts, spec.points_per_shape);
    let mut points = Vec::with_capacity(spec.points_per_shape);
    let mut part_ranges = Vec::with_capacity(built.parts.len());
    for (part, &count) in built.parts.iter().zip(&counts) {
        let start = points.len();
        let areas: Vec<f64> = part.primitives.iter().map(|p| p.area()).collect();
        let total: f64 = areas.iter().sum();
        for _ in 0..count {
            let mut pick = rng.gen_range(0.0..total);
            let mut chosen = 0;
            for (i, a) in areas.iter().enumerate() {
                if pick < *a {
                    chosen = i;
                    break;
                }
                pick -= a;
            }
            points.push(part.primitives[chosen].sample(&mut rng));
        }
        part_ranges.push(start..points.len());
    }
    if spec.jitter_sigma > 0.0 {
        let normal = Normal::new(0.0, spec.jitter_sigma)
            .map_err(|e| Error::InvalidArgument(format!("bad jitter sigma: {e}")))?;
        for p in points.iter_mut() {
            for c in p.iter_mut() {
                *c += normal.sample(&mut rng);
            }
        }
    }

    let shape_id = format!("{}_{:016x}", spec.category, spec.seed);
    let root = instantiate(&built.skeleton, &built.parts, &part_ranges);
    let annotation = Annotation {
        shape_id: shape_id.clone(),
        category: spec.category.clone(),
        point_count: points.len(),
        root,
    };
    let cloud = PointCloud::new(shape_id, points)?;
    Ok((cloud, annotation))
}

fn instantiate(skeleton: &Skeleton, parts: &[Part], ranges: &[std::ops::Range<usize>]) -> InstanceNode {
    match skeleton {
        Skeleton::Branch(node, children) => InstanceNode::branch(
            *node,
            children.iter().map(|c| instantiate(c, parts, ranges)).collect(),
        ),
        Skeleton::Part(index) => InstanceNode::leaf(
            parts[*index].template_node,
            ranges[*index].clone().collect(),
        ),
    }
}

/// Splits the point budget across parts proportionally to surface area,
/// guaranteeing at least one point per part (largest remainder rounding).
fn allocate_points(parts: &[Part], total: usize) -> Vec<usize> {
    let areas: Vec<f64> = parts
        .iter()
        .map(|p| p.primitives.iter().map(|q| q.area()).sum::<f64>())
        .collect();
    let area_total: f64 = areas.iter().sum();
    let spare = total - parts.len();
    let targets: Vec<f64> = areas.iter().map(|a| a / area_total * spare as f64).collect();
    let mut counts: Vec<usize> = targets.iter().map(|t| 1 + t.floor() as usize).collect();
    let mut assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..parts.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = targets[a] - targets[a].floor();
        let fb = targets[b] - targets[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    let mut i = 0;
    while assigned < total {
        counts[order[i % order.len()]] += 1;
        assigned += 1;
        i += 1;
    }
    counts
}

fn build_chair(rng: &mut ChaCha8Rng) -> BuiltShape {
    let w = rng.gen_range(0.85..1.25);
    let d = rng.gen_range(0.85..1.25);
    let seat_t = rng.gen_range(0.06..0.12);
    let seat_h = rng.gen_range(0.65..0.95);
    let back_h = rng.gen_range(0.75..1.10);
    let back_t = rng.gen_range(0.04..0.07);
    let back_z = -d / 2.0 + back_t / 2.0;

    let mut parts = Vec::new();
    let add = |template_node: u32, primitives: Vec<Primitive>, parts: &mut Vec<Part>| -> usize {
        parts.push(Part { template_node, primitives });
        parts.len() - 1
    };

    // back: panel low, vertical bars in the middle, one bar across the top
    let panel_h = 0.4 * back_h;
    let panel = add(
        BACK_PANEL,
        vec![Primitive::Box {
            center: [0.0, seat_h + panel_h / 2.0, back_z],
            size: [w, panel_h, back_t * 0.6],
        }],
        &mut parts,
    );
    let top_bar_h = rng.gen_range(0.08..0.14);
    let bar_top = seat_h + back_h - top_bar_h;
    let n_bars = rng.gen_range(2..=4usize);
    let bar_w = rng.gen_range(0.05..0.09);
    let mut bar_parts = Vec::new();
    for i in 0..n_bars {
        let span = w - bar_w;
        let x = if n_bars == 1 {
            0.0
        } else {
            -span / 2.0 + span * i as f64 / (n_bars - 1) as f64
        };
        let bar_bottom = seat_h + panel_h;
        bar_parts.push(add(
            BACK_VERTICAL_BAR,
            vec![Primitive::Box {
                center: [x, (bar_bottom + bar_top) / 2.0, back_z],
                size: [bar_w, bar_top - bar_bottom, back_t],
            }],
            &mut parts,
        ));
    }
    let top_bar = add(
        BACK_TOP_BAR,
        vec![Primitive::Box {
            center: [0.0, bar_top + top_bar_h / 2.0, back_z],
            size: [w, top_bar_h, back_t],
        }],
        &mut parts,
    );

    let seat = add(
        CHAIR_SEAT,
        vec![Primitive::Box {
            center: [0.0, seat_h - seat_t / 2.0, 0.0],
            size: [w, seat_t, d],
        }],
        &mut parts,
    );

    // base subtype is the template's Or choice
    let pedestal = rng.gen_bool(0.5);
    let base_children = if pedestal {
        let foot_h = rng.gen_range(0.03..0.06);
        let col_r = rng.gen_range(0.04..0.07);
        let foot_r = rng.gen_range(0.18..0.30);
        let col_h = seat_h - seat_t - foot_h;
        let support = add(
            CENTRAL_SUPPORT,
            vec![Primitive::Cylinder {
                center: [0.0, foot_h + col_h / 2.0, 0.0],
                radius: col_r,
                height: col_h,
                capped: false,
            }],
            &mut parts,
        );
        let foot = add(
            PEDESTAL_FOOT,
            vec![Primitive::Cylinder {
                center: [0.0, foot_h / 2.0, 0.0],
                radius: foot_r,
                height: foot_h,
                capped: true,
            }],
            &mut parts,
        );
        Skeleton::Branch(
            PEDESTAL_BASE,
            vec![Skeleton::Part(support), Skeleton::Part(foot)],
        )
    } else {
        let leg_a = rng.gen_range(0.05..0.09);
        let leg_h = seat_h - seat_t;
        let inset = leg_a / 2.0 + 0.01;
        let mut legs = Vec::new();
        for &sx in &[-1.0, 1.0] {
            for &sz in &[-1.0, 1.0] {
                legs.push(Skeleton::Part(add(
                    LEG,
                    vec![Primitive::Box {
                        center: [sx * (w / 2.0 - inset), leg_h / 2.0, sz * (d / 2.0 - inset)],
                        size: [leg_a, leg_h, leg_a],
                    }],
                    &mut parts,
                )));
            }
        }
        Skeleton::Branch(REGULAR_BASE, legs)
    };

    let mut chair_children = vec![
        Skeleton::Branch(
            CHAIR_BACK,
            vec![
                Skeleton::Part(panel),
                Skeleton::Branch(
                    BACK_FRAME,
                    bar_parts
                        .into_iter()
                        .map(Skeleton::Part)
                        .chain([Skeleton::Part(top_bar)])
                        .collect(),
                ),
            ],
        ),
        Skeleton::Part(seat),
        Skeleton::Branch(CHAIR_BASE, vec![base_children]),
    ];

    // occasionally attach trim points directly to chair_back, a second back
    // instance whose label path ends above the leaf level
    if rng.gen_bool(0.3) {
        let trim = add(
            CHAIR_BACK,
            vec![Primitive::Box {
                center: [0.0, seat_h + panel_h + 0.015, back_z + back_t * 0.55],
                size: [w * 0.9, 0.03, back_t * 0.4],
            }],
            &mut parts,
        );
        chair_children.insert(1, Skeleton::Part(trim));
    }

    BuiltShape {
        parts,
        skeleton: Skeleton::Branch(CHAIR, chair_children),
    }
}

fn build_lamp(rng: &mut ChaCha8Rng) -> BuiltShape {
    let base_r = rng.gen_range(0.18..0.32);
    let base_h = rng.gen_range(0.03..0.07);
    let pole_r = rng.gen_range(0.02..0.045);
    let pole_h = rng.gen_range(0.70..1.30);
    let shade_r = rng.gen_range(0.16..0.30);
    let shade_h = rng.gen_range(0.20..0.35);
    let bulb_r = rng.gen_range(0.05..0.08);

    let mut parts = Vec::new();
    let add = |template_node: u32, primitives: Vec<Primitive>, parts: &mut Vec<Part>| -> usize {
        parts.push(Part { template_node, primitives });
        parts.len() - 1
    };

    let base = add(
        LAMP_BASE,
        vec![Primitive::Cylinder {
            center: [0.0, base_h / 2.0, 0.0],
            radius: base_r,
            height: base_h,
            capped: true,
        }],
        &mut parts,
    );
    let pole = add(
        POLE,
        vec![Primitive::Cylinder {
            center: [0.0, base_h + pole_h / 2.0, 0.0],
            radius: pole_r,
            height: pole_h,
            capped: false,
        }],
        &mut parts,
    );
    let head_y = base_h + pole_h;
    let shade = add(
        SHADE,
        vec![Primitive::Cylinder {
            center: [0.0, head_y, 0.0],
            radius: shade_r,
            height: shade_h,
            capped: false,
        }],
        &mut parts,
    );
    let bulb = add(
        BULB,
        vec![Primitive::Sphere {
            center: [0.0, head_y - bulb_r * 0.5, 0.0],
            radius: bulb_r,
        }],
        &mut parts,
    );

    BuiltShape {
        parts,
        skeleton: Skeleton::Branch(
            LAMP,
            vec![
                Skeleton::Part(base),
                Skeleton::Branch(LAMP_BODY, vec![Skeleton::Part(pole)]),
                Skeleton::Branch(LAMP_HEAD, vec![Skeleton::Part(shade), Skeleton::Part(bulb)]),
            ],
        ),
    }
}
