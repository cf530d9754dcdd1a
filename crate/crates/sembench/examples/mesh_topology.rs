//! Box meshes, shared nodes and slab partitions.
//!
//! Builds the same 3x2x2 element box twice, fully periodic and fully
//! walled, to show how node counts and connectivity change, then cuts
//! the mesh into slabs the way the partitioned runner does.
//!
//! ```bash
//! cargo run --example mesh_topology
//! ```

use sembench::mesh::{build_box_mesh, partition_mesh};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let order = 3;
    let elems = [3, 2, 2];
    let extents = [3.0, 2.0, 2.0];

    let periodic = build_box_mesh(order, elems, extents, [true; 3])?;
    let walled = build_box_mesh(order, elems, extents, [false; 3])?;
    println!("order {order}, elements {elems:?}:");
    println!("  periodic mesh: {} global nodes", periodic.num_nodes());
    println!("  walled mesh:   {} global nodes", walled.num_nodes());

    // Conforming faces share global ids by construction. Element ids
    // run slab-major, so look the two x-neighbours up by grid position.
    let np = order + 1;
    let e0 = walled.element_id([0, 0, 0]);
    let e1 = walled.element_id([1, 0, 0]);
    let left = walled.element_nodes(e0);
    let right = walled.element_nodes(e1);
    let mut shared = 0;
    for k in 0..np {
        for j in 0..np {
            let a_right = k * np * np + j * np + (np - 1);
            let a_left = k * np * np + j * np;
            if left[a_right] == right[a_left] {
                shared += 1;
            }
        }
    }
    println!(
        "  x-neighbours (elements {e0} and {e1}) share {shared} of {} face nodes",
        np * np
    );

    // Wall planes exist only on non-periodic axes.
    let wall_y = walled.boundary_plane_nodes(1)?;
    println!("  walled mesh has {} nodes on the two y planes", wall_y.len());
    match periodic.boundary_plane_nodes(1) {
        Err(e) => println!("  periodic mesh: {e}"),
        Ok(_) => unreachable!("periodic axes have no boundary"),
    }

    // Slab partitioning picks the axis with the most elements and hands
    // out contiguous element ranges.
    let parts = partition_mesh(&periodic, 3)?;
    println!(
        "\n3 partitions cut along axis {} (imbalance {:.3}):",
        parts.slab_axis(),
        parts.node_imbalance()
    );
    for q in 0..parts.num_partitions() {
        println!(
            "  partition {q}: elements {:?}, {} owned nodes",
            parts.elements(q),
            parts.owned_node_count(q)
        );
    }
    println!("  {} nodes sit on partition interfaces", parts.shared_nodes().len());
    Ok(())
}
