//! Incremental 2-D kd-tree over node positions.
//!
//! Points are inserted in tree order and never removed. Queries return the
//! lowest index among equidistant points, matching a linear scan.

use alloc::vec::Vec;

use crate::math::dist2;

#[derive(Debug, Clone)]
struct KdNode {
    point: [f64; 2],
    index: usize,
    children: [Option<u32>; 2],
}

#[derive(Debug, Clone, Default)]
pub struct KdTree {
    nodes: Vec<KdNode>,
}

impl KdTree {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn insert(&mut self, point: [f64; 2], index: usize) {
        let id = self.nodes.len() as u32;
        self.nodes.push(KdNode {
            point,
            index,
            children: [None, None],
        });
        if id == 0 {
            return;
        }
        let mut cur = 0usize;
        let mut axis = 0usize;
        loop {
            let side = usize::from(point[axis] >= self.nodes[cur].point[axis]);
            match self.nodes[cur].children[side] {
                Some(next) => {
                    cur = next as usize;
                    axis ^= 1;
                }
                None => {
                    self.nodes[cur].children[side] = Some(id);
                    return;
                }
            }
        }
    }

    /// `(index, squared distance)` of the nearest point, or `None` if empty.
    pub fn nearest(&self, q: [f64; 2]) -> Option<(usize, f64)> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = (usize::MAX, f64::INFINITY);
        let mut stack: Vec<(u32, usize, f64)> = Vec::with_capacity(64);
        stack.push((0, 0, 0.0));
        while let Some((id, axis, bound)) = stack.pop() {
            if bound > best.1 {
                continue;
            }
            let node = &self.nodes[id as usize];
            let d = dist2(node.point, q);
            if d < best.1 || (d == best.1 && node.index < best.0) {
                best = (node.index, d);
            }
            let diff = q[axis] - node.point[axis];
            let near = usize::from(diff >= 0.0);
            let far = 1 - near;
            // Push far side first so the near side is explored first.
            if let Some(c) = node.children[far] {
                stack.push((c, axis ^ 1, diff * diff));
            }
            if let Some(c) = node.children[near] {
                stack.push((c, axis ^ 1, 0.0));
            }
        }
        Some(best)
    }
}

/// Linear-scan nearest neighbor with lowest-index tie breaking.
pub fn nearest_linear(points: &[[f64; 2]], q: [f64; 2]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        let d = dist2(*p, q);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|b| b.0)
}
