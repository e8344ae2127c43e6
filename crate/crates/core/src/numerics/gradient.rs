use crate::mesh::BlockGeometry;

/// Green-Gauss cell gradients with arithmetic face averaging.
///
/// `values` is a scalar over the whole ghost frame. Gradients are produced for
/// every cell that has all four neighbours (interior plus the first ghost
/// layer); the outermost ring is left at zero.
pub fn gradient_green_gauss(values: &[f64], geo: &BlockGeometry) -> Vec<[f64; 2]> {
    let nx = geo.cells_i();
    let ny = geo.cells_j();
    assert_eq!(values.len(), nx * ny, "scalar field size mismatch");
    let mut out = vec![[0.0; 2]; nx * ny];
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let c = geo.cell(i, j);
            let phi = values[c];
            let east = 0.5 * (phi + values[c + 1]);
            let west = 0.5 * (phi + values[c - 1]);
            let north = 0.5 * (phi + values[c + nx]);
            let south = 0.5 * (phi + values[c - nx]);
            let fe = geo.iface(i + 1, j);
            let fw = geo.iface(i, j);
            let fn_ = geo.jface(i, j + 1);
            let fs = geo.jface(i, j);
            let mut g = [0.0; 2];
            for k in 0..2 {
                g[k] = (east * geo.iface_normal[fe][k] * geo.iface_area[fe]
                    - west * geo.iface_normal[fw][k] * geo.iface_area[fw]
                    + north * geo.jface_normal[fn_][k] * geo.jface_area[fn_]
                    - south * geo.jface_normal[fs][k] * geo.jface_area[fs])
                    / geo.volume[c];
            }
            out[c] = g;
        }
    }
    out
}
