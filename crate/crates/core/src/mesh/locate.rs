use super::{Mesh, Point};

/// Uniform-grid bucket index over cell bounding boxes.
#[derive(Debug, Clone)]
pub struct CellLocator {
    min: Point,
    cell_size: Point,
    dims: [usize; 3],
    buckets: Vec<Vec<usize>>,
}

impl CellLocator {
    pub fn new(mesh: &Mesh) -> Self {
        let mut min = Point::repeat(f64::INFINITY);
        let mut max = Point::repeat(f64::NEG_INFINITY);
        for v in mesh.vertices() {
            min = min.inf(v);
            max = max.sup(v);
        }
        let per_axis = ((mesh.num_cells() as f64 / 4.0).cbrt().ceil() as usize).max(1);
        let ext = max - min;
        let dims = [0, 1, 2].map(|d| if ext[d] > 0.0 { per_axis } else { 1 });
        let cell_size = Point::from_fn(|d, _| if ext[d] > 0.0 { ext[d] / dims[d] as f64 } else { 1.0 });
        let mut loc = CellLocator {
            min,
            cell_size,
            dims,
            buckets: vec![Vec::new(); dims[0] * dims[1] * dims[2]],
        };
        for c in 0..mesh.num_cells() {
            let verts = mesh.cell_vertices(c);
            let lo = verts.iter().fold(Point::repeat(f64::INFINITY), |a, v| a.inf(v));
            let hi = verts.iter().fold(Point::repeat(f64::NEG_INFINITY), |a, v| a.sup(v));
            let (l, h) = (loc.bucket_coords(&lo), loc.bucket_coords(&hi));
            for k in l[2]..=h[2] {
                for j in l[1]..=h[1] {
                    for i in l[0]..=h[0] {
                        let b = loc.flat(i, j, k);
                        loc.buckets[b].push(c);
                    }
                }
            }
        }
        loc
    }

    fn bucket_coords(&self, x: &Point) -> [usize; 3] {
        [0, 1, 2].map(|d| {
            let t = ((x[d] - self.min[d]) / self.cell_size[d]).floor();
            (t.max(0.0) as usize).min(self.dims[d] - 1)
        })
    }

    fn flat(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    /// First cell containing `x`, with barycentric tolerance `tol`.
    pub fn locate(&self, mesh: &Mesh, x: &Point, tol: f64) -> Option<usize> {
        if (0..3).any(|d| x[d] < self.min[d] - tol || x[d] > self.min[d] + self.cell_size[d] * self.dims[d] as f64 + tol) {
            return None;
        }
        let [i, j, k] = self.bucket_coords(x);
        self.buckets[self.flat(i, j, k)]
            .iter()
            .copied()
            .find(|&c| mesh.barycentric(c, x).iter().all(|&l| l >= -tol))
    }
}
