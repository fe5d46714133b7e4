//! Shared inputs for the benchmarks under `benches/`.

use qwnet_core::network::{Node, Resource, ResourceNetwork};

/// A `w x h` grid of nodes joined by Bell pairs, ids row-major from 1.
pub fn grid_network(w: u32, h: u32, d: usize) -> ResourceNetwork {
    let id = |x: u32, y: u32| y * w + x + 1;
    let nodes = (0..w * h).map(|i| Node { id: i + 1, label: format!("g{}", i + 1) }).collect();
    let mut resources = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if x + 1 < w {
                resources.push(Resource::bell(id(x, y), id(x + 1, y)));
            }
            if y + 1 < h {
                resources.push(Resource::bell(id(x, y), id(x, y + 1)));
            }
        }
    }
    ResourceNetwork::new(d, nodes, resources).expect("grid network is valid")
}

/// The four corners of a `w x h` grid.
pub fn grid_corners(w: u32, h: u32) -> Vec<u32> {
    vec![1, w, w * (h - 1) + 1, w * h]
}
