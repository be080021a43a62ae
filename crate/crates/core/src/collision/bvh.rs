//! Median-split bounding-volume hierarchy over the triangles of one mesh.

use crate::geom::Aabb;
use crate::mesh::TriMesh;

pub const MAX_LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    /// Triangles `order[start..start + count]`.
    Leaf {
        start: u32,
        count: u32,
    },
    Inner {
        left: u32,
        right: u32,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvhNode {
    pub aabb: Aabb,
    pub kind: NodeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bvh {
    pub nodes: Vec<BvhNode>,
    /// Triangle indices permuted so every leaf covers a contiguous range.
    pub order: Vec<u32>,
    /// Per-triangle boxes, indexed by triangle id.
    pub tri_boxes: Vec<Aabb>,
}

impl Bvh {
    pub fn build(mesh: &TriMesh) -> Bvh {
        let tri_boxes: Vec<Aabb> = (0..mesh.triangles.len())
            .map(|t| Aabb::from_points(&mesh.triangle(t)))
            .collect();
        let centers: Vec<[f64; 3]> = tri_boxes
            .iter()
            .map(|b| {
                let c = b.center();
                [c.x, c.y, c.z]
            })
            .collect();
        let mut order: Vec<u32> = (0..mesh.triangles.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * order.len() / MAX_LEAF_SIZE + 1);
        if !order.is_empty() {
            build_node(&mut nodes, &mut order, 0, &tri_boxes, &centers);
        }
        Bvh {
            nodes,
            order,
            tri_boxes,
        }
    }

    pub fn root(&self) -> Option<&BvhNode> {
        self.nodes.first()
    }

    pub fn leaf_triangles(&self, node: &BvhNode) -> &[u32] {
        match node.kind {
            NodeKind::Leaf { start, count } => {
                &self.order[start as usize..(start + count) as usize]
            }
            NodeKind::Inner { .. } => &[],
        }
    }
}

fn build_node(
    nodes: &mut Vec<BvhNode>,
    order: &mut [u32],
    offset: usize,
    boxes: &[Aabb],
    centers: &[[f64; 3]],
) -> u32 {
    let aabb = order
        .iter()
        .fold(Aabb::empty(), |acc, &t| acc.union(&boxes[t as usize]));
    let index = nodes.len() as u32;
    nodes.push(BvhNode {
        aabb,
        kind: NodeKind::Leaf {
            start: offset as u32,
            count: order.len() as u32,
        },
    });
    if order.len() <= MAX_LEAF_SIZE {
        return index;
    }
    let axis = aabb.longest_axis();
    let mid = order.len() / 2;
    order.select_nth_unstable_by(mid, |&a, &b| {
        centers[a as usize][axis]
            .total_cmp(&centers[b as usize][axis])
            .then(a.cmp(&b))
    });
    let (lo, hi) = order.split_at_mut(mid);
    let left = build_node(nodes, lo, offset, boxes, centers);
    let right = build_node(nodes, hi, offset + mid, boxes, centers);
    nodes[index as usize].kind = NodeKind::Inner { left, right };
    index
}
