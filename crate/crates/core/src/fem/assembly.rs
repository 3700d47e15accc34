use super::quadrature::tensor_rule;
use super::{shape_values, ExactField};
use crate::linalg::{CsrMatrix, TripletBuilder};
use crate::mesh::{GridMesh, Point};
use rayon::prelude::*;

/// Exact Q1 element stiffness on a square (independent of the side length in 2D),
/// local order SW, SE, NE, NW.
pub const ELEMENT_STIFFNESS: [[f64; 4]; 4] = [
    [4.0 / 6.0, -1.0 / 6.0, -2.0 / 6.0, -1.0 / 6.0],
    [-1.0 / 6.0, 4.0 / 6.0, -1.0 / 6.0, -2.0 / 6.0],
    [-2.0 / 6.0, -1.0 / 6.0, 4.0 / 6.0, -1.0 / 6.0],
    [-1.0 / 6.0, -2.0 / 6.0, -1.0 / 6.0, 4.0 / 6.0],
];

/// Exact Q1 element mass on the unit square; scale by `h²`.
pub const ELEMENT_MASS_UNIT: [[f64; 4]; 4] = [
    [4.0 / 36.0, 2.0 / 36.0, 1.0 / 36.0, 2.0 / 36.0],
    [2.0 / 36.0, 4.0 / 36.0, 2.0 / 36.0, 1.0 / 36.0],
    [1.0 / 36.0, 2.0 / 36.0, 4.0 / 36.0, 2.0 / 36.0],
    [2.0 / 36.0, 1.0 / 36.0, 2.0 / 36.0, 4.0 / 36.0],
];

fn assemble_element_matrix(mesh: &GridMesh, element: &[[f64; 4]; 4], scale: f64) -> CsrMatrix {
    let n = mesh.node_count();
    let mut b = TripletBuilder::with_capacity(n, n, 16 * mesh.cell_count());
    for (ci, cj) in mesh.cells() {
        let nodes = mesh.cell_nodes(ci, cj);
        for a in 0..4 {
            for c in 0..4 {
                b.push(nodes[a], nodes[c], scale * element[a][c]);
            }
        }
    }
    b.build()
}

/// `∫ ∇Nᵢ·∇Nⱼ` over all nodes.
pub fn assemble_stiffness(mesh: &GridMesh) -> CsrMatrix {
    assemble_element_matrix(mesh, &ELEMENT_STIFFNESS, 1.0)
}

/// `∫ Nᵢ Nⱼ` over all nodes.
pub fn assemble_mass(mesh: &GridMesh) -> CsrMatrix {
    assemble_element_matrix(mesh, &ELEMENT_MASS_UNIT, mesh.h() * mesh.h())
}

/// Gram matrix of the `H¹(Γ)` inner product `∫_Γ g q + ∫_Γ ∂ₜg ∂ₜq` for
/// continuous piecewise-linear traces, indexed by boundary chain position.
///
/// The chain is treated as one periodic 1D mesh; corners are ordinary nodes.
pub fn assemble_boundary_h1(mesh: &GridMesh) -> CsrMatrix {
    let p = mesh.boundary_chain().len();
    let h = mesh.h();
    let mass = [[2.0 * h / 6.0, h / 6.0], [h / 6.0, 2.0 * h / 6.0]];
    let stiff = [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
    let mut b = TripletBuilder::with_capacity(p, p, 4 * p);
    for e in 0..p {
        let ends = [e, (e + 1) % p];
        for a in 0..2 {
            for c in 0..2 {
                b.push(ends[a], ends[c], mass[a][c] + stiff[a][c]);
            }
        }
    }
    b.build()
}

/// Load vector `∫ f Nᵢ` by per-cell tensor Gauss quadrature of the given order.
pub fn assemble_source_load(mesh: &GridMesh, f: &ExactField, order: usize) -> Vec<f64> {
    let rule = tensor_rule(order);
    let h = mesh.h();
    let area = h * h;
    let cells: Vec<(usize, usize)> = mesh.cells().collect();
    let local: Vec<[f64; 4]> = cells
        .par_iter()
        .map(|&(ci, cj)| {
            let o = mesh.cell_origin(ci, cj);
            let mut acc = [0.0; 4];
            for &(xi, eta, w) in &rule {
                let fv = f.value(Point::new(o.x + xi * h, o.y + eta * h)) * w * area;
                let n = shape_values(xi, eta);
                for k in 0..4 {
                    acc[k] += fv * n[k];
                }
            }
            acc
        })
        .collect();
    let mut load = vec![0.0; mesh.node_count()];
    for (&(ci, cj), acc) in cells.iter().zip(&local) {
        for (k, node) in mesh.cell_nodes(ci, cj).into_iter().enumerate() {
            load[node] += acc[k];
        }
    }
    load
}
