//! Procedural meshes and shapes for tests, benchmarks and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::{Dir3, Point3, RigidPose, Vec3};
use crate::mesh::TriMesh;
use crate::shape::{GroundTruthArticulation, GtRange, Part, Shape};

#[rustfmt::skip]
const BOX_FACES: [[u32; 3]; 12] = [
    [0, 2, 1], [1, 2, 3], // -z
    [4, 5, 6], [5, 7, 6], // +z
    [0, 1, 4], [1, 5, 4], // -y
    [2, 6, 3], [3, 6, 7], // +y
    [0, 4, 2], [2, 4, 6], // -x
    [1, 3, 5], [3, 7, 5], // +x
];

/// Closed axis-aligned box with outward-facing triangles.
pub fn box_mesh(center: Point3, half: [f64; 3]) -> TriMesh {
    let vertices = (0..8)
        .map(|i| {
            let s = |bit: usize, h: f64| if i >> bit & 1 == 1 { h } else { -h };
            center + Vec3::new(s(0, half[0]), s(1, half[1]), s(2, half[2]))
        })
        .collect();
    TriMesh {
        vertices,
        triangles: BOX_FACES.to_vec(),
    }
}

/// Box from its min and max corners.
pub fn box_between(min: [f64; 3], max: [f64; 3]) -> TriMesh {
    let c = Point3::new(
        0.5 * (min[0] + max[0]),
        0.5 * (min[1] + max[1]),
        0.5 * (min[2] + max[2]),
    );
    box_mesh(
        c,
        [
            0.5 * (max[0] - min[0]),
            0.5 * (max[1] - min[1]),
            0.5 * (max[2] - min[2]),
        ],
    )
}

/// Box rotated by `angle` about `axis` through `pivot`.
pub fn oriented_box(
    min: [f64; 3],
    max: [f64; 3],
    axis: Dir3,
    pivot: &Point3,
    angle: f64,
) -> TriMesh {
    box_between(min, max).transformed(&RigidPose::rotation_about(axis, pivot, angle))
}

/// `n_tris` random triangles of roughly `tri_size` whose vertices lie in
/// the cube of half-size `extent` around `center`.
pub fn random_soup(
    n_tris: usize,
    seed: u64,
    center: Point3,
    extent: f64,
    tri_size: f64,
) -> TriMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices = Vec::with_capacity(3 * n_tris);
    let mut triangles = Vec::with_capacity(n_tris);
    for t in 0..n_tris {
        let base = center
            + Vec3::new(
                rng.gen_range(-extent..extent),
                rng.gen_range(-extent..extent),
                rng.gen_range(-extent..extent),
            );
        vertices.push(base);
        for _ in 0..2 {
            let off = Vec3::new(
                rng.gen_range(-tri_size..tri_size),
                rng.gen_range(-tri_size..tri_size),
                rng.gen_range(-tri_size..tri_size),
            );
            vertices.push(base + off);
        }
        let i = 3 * t as u32;
        triangles.push([i, i + 1, i + 2]);
    }
    TriMesh {
        vertices,
        triangles,
    }
}

/// Closed, finely tessellated sheet: a `nx` by `ny` grid on the plane
/// `z = z0` spanning `[-half, half]^2`. Each cell is two triangles.
pub fn grid_sheet(nx: usize, ny: usize, half: f64, z0: f64) -> TriMesh {
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point3::new(
                -half + 2.0 * half * i as f64 / nx as f64,
                -half + 2.0 * half * j as f64 / ny as f64,
                z0,
            ));
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    let w = (nx + 1) as u32;
    for j in 0..ny as u32 {
        for i in 0..nx as u32 {
            let a = j * w + i;
            triangles.push([a, a + 1, a + w]);
            triangles.push([a + 1, a + w + 1, a + w]);
        }
    }
    TriMesh {
        vertices,
        triangles,
    }
}

pub(crate) fn gt_revolute(
    part_id: u32,
    axis: Dir3,
    pivot: Point3,
    deg: [f64; 2],
) -> GroundTruthArticulation {
    GroundTruthArticulation {
        part_id,
        m_rev: true,
        m_pri: false,
        axis: Some(axis),
        pivot: Some(pivot),
        range: Some(GtRange {
            revolute_deg: Some(deg),
            prismatic: None,
        }),
    }
}

pub(crate) fn gt_prismatic(part_id: u32, axis: Dir3, range: [f64; 2]) -> GroundTruthArticulation {
    GroundTruthArticulation {
        part_id,
        m_rev: false,
        m_pri: true,
        axis: Some(axis),
        pivot: None,
        range: Some(GtRange {
            revolute_deg: None,
            prismatic: Some(range),
        }),
    }
}

fn part_with(id: u32, label: &str, mesh: TriMesh, gt: GroundTruthArticulation) -> Part {
    let mut p = Part::new(id, mesh);
    p.label = Some(label.to_string());
    p.gt = Some(gt);
    p
}

/// Knobs for [`cabinet`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CabinetOptions {
    /// Put a stop bar this far in front of the drawer.
    pub drawer_stop_gap: Option<f64>,
    /// Put a plate where the door's outer face lies when opened by this many
    /// degrees.
    pub door_block_deg: Option<f64>,
    /// Push the shelf this far into both side walls.
    pub shelf_embed: f64,
}

pub const CABINET_BODY: u32 = 0;
pub const CABINET_DOOR: u32 = 1;
pub const CABINET_DRAWER: u32 = 2;
pub const CABINET_SHELF: u32 = 3;

/// Hinge line of the cabinet door (a point and the direction that opens the
/// door for positive angles), before normalization.
pub const CABINET_HINGE: ([f64; 3], [f64; 3]) = ([0.05, 1.4, 0.0], [0.0, -1.0, 0.0]);

/// Tall open-front cabinet: a drawer in the bottom bay, an open middle bay,
/// and an inset door hinged on its front-left edge over the top bay. A shelf
/// glued into a slot sits behind the door. The body is one soup of panels
/// that overrun each other, so no moving face ends flush with a panel edge.
///
/// Units: width 0.5, height 2.0, depth 0.25, opening towards `+z`.
pub fn cabinet(opts: &CabinetOptions) -> Shape {
    let mut body = vec![
        box_between([0.0, 0.0, -0.25], [0.05, 2.0, 0.0]),
        box_between([0.45, 0.0, -0.25], [0.5, 2.0, 0.0]),
        box_between([0.0, 0.0, -0.25], [0.5, 2.0, -0.2]),
        box_between([0.0, 0.0, -0.25], [0.5, 0.05, 0.0]),
        box_between([0.0, 0.15, -0.25], [0.5, 0.2, 0.0]),
        box_between([0.0, 0.85, -0.25], [0.5, 0.9, 0.0]),
        box_between([0.0, 1.95, -0.25], [0.5, 2.0, 0.0]),
        // keeps the door from being pushed in
        box_between([0.0, 1.85, -0.14], [0.5, 1.95, -0.04]),
        // slot around the shelf: cleats below and above, lip in front
        box_between([0.0, 1.25, -0.2], [0.5, 1.3, -0.1]),
        box_between([0.0, 1.35, -0.2], [0.5, 1.4, -0.1]),
        box_between([0.0, 1.25, -0.1], [0.5, 1.4, -0.05]),
        // post in front of the door's free edge: clear of the hinge swing,
        // in the way of a swing about any other edge
        box_between([0.38, 1.0, 0.28], [0.48, 1.8, 0.38]),
    ];
    if let Some(gap) = opts.drawer_stop_gap {
        body.push(box_between([0.0, 0.07, gap], [0.5, 0.13, gap + 0.05]));
    }
    if let Some(deg) = opts.door_block_deg {
        let (p, d) = CABINET_HINGE;
        body.push(oriented_box(
            [0.2, 1.0, 0.0],
            [0.45, 1.8, 0.05],
            Dir3::from_xyz(d[0], d[1], d[2]).expect("unit"),
            &Point3::from(p),
            deg.to_radians(),
        ));
    }
    let body = TriMesh::merged(body.iter());

    let door = box_between([0.05, 0.9, -0.04], [0.45, 1.95, 0.0]);
    let drawer = box_between([0.05, 0.05, -0.2], [0.45, 0.15, 0.0]);
    let e = opts.shelf_embed;
    let shelf = box_between([0.05 - e, 1.3, -0.2], [0.45 + e, 1.35, -0.1]);

    let (hp, hd) = CABINET_HINGE;
    Shape::new(
        "cabinet",
        vec![
            part_with(
                CABINET_BODY,
                "body",
                body,
                GroundTruthArticulation::fixed(CABINET_BODY),
            ),
            part_with(
                CABINET_DOOR,
                "door",
                door,
                gt_revolute(
                    CABINET_DOOR,
                    Dir3::from_xyz(hd[0], hd[1], hd[2]).expect("unit"),
                    Point3::from(hp),
                    [0.0, 90.0],
                ),
            ),
            part_with(
                CABINET_DRAWER,
                "drawer",
                drawer,
                gt_prismatic(CABINET_DRAWER, Dir3::z_axis(), [0.0, 0.2]),
            ),
            part_with(
                CABINET_SHELF,
                "shelf",
                shelf,
                GroundTruthArticulation::fixed(CABINET_SHELF),
            ),
        ],
    )
}
