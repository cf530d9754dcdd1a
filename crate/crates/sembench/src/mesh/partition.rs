//! Slab decomposition of a mesh into concurrent partitions.
//!
//! Partitions model the distributed ranks of the original solver on
//! shared-memory hardware: each partition owns a contiguous slab of
//! elements along the longest element axis, executes its element loop
//! concurrently with the others, and meets them only at the shared
//! interface nodes. Element ids are already ordered slab-axis-slowest, so
//! every partition is a contiguous id range.

use super::HexMesh;
use crate::{Error, Result};
use std::ops::Range;

/// A node referenced by more than one partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SharedNode {
    pub node: u32,
    /// Partitions whose owned elements reference the node, ascending.
    pub partitions: Vec<u32>,
}

/// A slab decomposition of one mesh.
#[derive(Debug, Clone)]
pub struct MeshPartition {
    slab_axis: usize,
    /// Owned element-id range per partition; disjoint and covering.
    ranges: Vec<Range<usize>>,
    /// Nodes owned per partition. Every node is owned by exactly one
    /// partition; an interface plane belongs to the slab it opens.
    owned_nodes: Vec<usize>,
    /// All multiply-referenced nodes, sorted by node id.
    shared: Vec<SharedNode>,
}

impl MeshPartition {
    pub fn num_partitions(&self) -> usize {
        self.ranges.len()
    }

    pub fn slab_axis(&self) -> usize {
        self.slab_axis
    }

    /// Owned element-id range of partition `q`.
    pub fn elements(&self, q: usize) -> Range<usize> {
        self.ranges[q].clone()
    }

    pub fn ranges(&self) -> &[Range<usize>] {
        &self.ranges
    }

    /// Nodes owned by partition `q`. Ownership assigns every node to
    /// exactly one partition, so the counts sum to the mesh node count.
    pub fn owned_node_count(&self, q: usize) -> usize {
        self.owned_nodes[q]
    }

    /// Nodes referenced by at least two partitions.
    pub fn shared_nodes(&self) -> &[SharedNode] {
        &self.shared
    }

    /// Largest relative deviation of any partition's owned-node count
    /// from the mean.
    pub fn node_imbalance(&self) -> f64 {
        let total: usize = self.owned_nodes.iter().sum();
        let mean = total as f64 / self.owned_nodes.len() as f64;
        self.owned_nodes
            .iter()
            .map(|&n| (n as f64 - mean).abs() / mean)
            .fold(0.0, f64::max)
    }
}

/// Split a mesh into `parts` contiguous slabs along its slab axis.
///
/// When the slab axis has at least `parts` element layers, whole layers
/// are distributed as evenly as possible; otherwise the element-id space
/// is split directly. Requesting more partitions than elements is an
/// error.
pub fn partition_mesh(mesh: &HexMesh, parts: usize) -> Result<MeshPartition> {
    let num_elems = mesh.num_elements();
    if parts == 0 || parts > num_elems {
        return Err(Error::PartitionCount {
            requested: parts,
            elements: num_elems,
        });
    }

    let axis = mesh.slab_axis();
    let layers = mesh.element_counts()[axis];
    let layer_elems = num_elems / layers;

    let mut ranges = Vec::with_capacity(parts);
    if parts <= layers {
        // Distribute whole layers; the first `layers % parts` partitions
        // take one extra.
        let base = layers / parts;
        let extra = layers % parts;
        let mut layer = 0usize;
        for q in 0..parts {
            let take = base + usize::from(q < extra);
            ranges.push(layer * layer_elems..(layer + take) * layer_elems);
            layer += take;
        }
    } else {
        let base = num_elems / parts;
        let extra = num_elems % parts;
        let mut start = 0usize;
        for q in 0..parts {
            let take = base + usize::from(q < extra);
            ranges.push(start..start + take);
            start += take;
        }
    }

    // Referencing partitions per node, for the shared-node map. Up to 64
    // partitions the referencing set fits a bitmask; beyond that a
    // per-node vector takes over.
    let mut first_ref: Vec<u32> = vec![u32::MAX; mesh.num_nodes()];
    let mut ref_mask: Vec<u64> = vec![0; mesh.num_nodes()];
    let use_mask = parts <= 64;
    let mut wide: Vec<Vec<u32>> = if use_mask {
        Vec::new()
    } else {
        vec![Vec::new(); mesh.num_nodes()]
    };
    for (q, range) in ranges.iter().enumerate() {
        for e in range.clone() {
            for &g in mesh.element_nodes(e) {
                let g = g as usize;
                if first_ref[g] == u32::MAX {
                    first_ref[g] = q as u32;
                }
                if use_mask {
                    ref_mask[g] |= 1u64 << q;
                } else if wide[g].last() != Some(&(q as u32)) {
                    wide[g].push(q as u32);
                }
            }
        }
    }

    // Node ownership. For layer-aligned splits each partition owns the
    // half-open tick interval of its slab, which hands every interface
    // plane to exactly one side and keeps the counts at N/P for evenly
    // divided periodic meshes. The ragged fallback credits shared nodes to
    // the first referencing partition.
    let mut owned_nodes = vec![0usize; parts];
    if parts <= layers {
        let p_ord = mesh.order();
        let mut owner_of_tick = vec![0u32; mesh.ticks[axis]];
        for (q, range) in ranges.iter().enumerate() {
            let t0 = (range.start / layer_elems) * p_ord;
            let mut t1 = (range.end / layer_elems) * p_ord;
            if !mesh.periodic()[axis] && q == parts - 1 {
                t1 += 1;
            }
            for t in t0..t1 {
                owner_of_tick[t] = q as u32;
            }
        }
        let [sx, sy, _] = mesh.ticks;
        for g in 0..mesh.num_nodes() {
            let t = match axis {
                0 => g % sx,
                1 => (g / sx) % sy,
                _ => g / (sx * sy),
            };
            owned_nodes[owner_of_tick[t] as usize] += 1;
        }
    } else {
        for g in 0..mesh.num_nodes() {
            owned_nodes[first_ref[g] as usize] += 1;
        }
    }

    let mut shared = Vec::new();
    for g in 0..mesh.num_nodes() {
        let referencing: Vec<u32> = if use_mask {
            (0..parts as u32)
                .filter(|&q| ref_mask[g] & (1u64 << q) != 0)
                .collect()
        } else {
            wide[g].clone()
        };
        if referencing.len() > 1 {
            shared.push(SharedNode {
                node: g as u32,
                partitions: referencing,
            });
        }
    }

    Ok(MeshPartition {
        slab_axis: axis,
        ranges,
        owned_nodes,
        shared,
    })
}
