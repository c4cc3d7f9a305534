//! Seeded random instances shared by the integration suites.

use intbasis::field::FieldSpec;
use intbasis::linalg::Matrix;
use intbasis::pmodule::PersistenceModule;
use intbasis::simplicial::{FilteredComplex, Simplex, SimplexSet};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random module with `1..=max_len` steps of dimension `0..=max_dim` and
/// entry density drawn per map.
pub fn random_module(
    rng: &mut ChaCha8Rng,
    field: &FieldSpec,
    max_dim: usize,
    max_len: usize,
) -> PersistenceModule {
    let n = rng.gen_range(1..=max_len);
    let dims: Vec<usize> = (0..n).map(|_| rng.gen_range(0..=max_dim)).collect();
    let mut maps = Vec::with_capacity(n - 1);
    for w in dims.windows(2) {
        let (cols, rows) = (w[0], w[1]);
        let density = rng.gen_range(0.2..0.9);
        let mut entries = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            if rng.gen_bool(density) {
                let value = loop {
                    let v = rng.gen_range(-3i64..=3);
                    if v != 0 {
                        break v;
                    }
                };
                entries.push(field.from_i64(value));
            } else {
                entries.push(field.zero());
            }
        }
        maps.push(Matrix::new(*field, rows, cols, entries).expect("valid entries"));
    }
    PersistenceModule::new(*field, dims, maps).expect("valid shapes")
}

fn sx(v: Vec<usize>) -> Simplex {
    Simplex::new(v).expect("strictly increasing")
}

/// Random filtration: at most `max_simplices` simplices of dimension <= 2
/// spread over at most `max_steps` nested steps.
pub fn random_filtration(
    rng: &mut ChaCha8Rng,
    max_simplices: usize,
    max_steps: usize,
) -> FilteredComplex {
    let n_vertices = rng.gen_range(3..=6);
    let n_steps = rng.gen_range(1..=max_steps);

    // Pick the final complex: all vertices, random edges, then triangles
    // whose edges are present.
    let mut edges = Vec::new();
    for a in 0..n_vertices {
        for b in a + 1..n_vertices {
            if rng.gen_bool(0.5) {
                edges.push((a, b));
            }
        }
    }
    let mut triangles = Vec::new();
    for a in 0..n_vertices {
        for b in a + 1..n_vertices {
            for c in b + 1..n_vertices {
                let has = |x, y| edges.contains(&(x, y));
                if has(a, b) && has(a, c) && has(b, c) && rng.gen_bool(0.5) {
                    triangles.push((a, b, c));
                }
            }
        }
    }
    while n_vertices + edges.len() + triangles.len() > max_simplices {
        if !triangles.is_empty() {
            triangles.pop();
        } else {
            let (a, b) = edges.pop().expect("size bound leaves vertices");
            triangles.retain(|&(x, y, z)| !((x, y) == (a, b) || (x, z) == (a, b) || (y, z) == (a, b)));
        }
    }

    // Birth steps respect the face order.
    let mut vertex_birth = vec![0usize; n_vertices];
    for b in vertex_birth.iter_mut() {
        *b = rng.gen_range(0..n_steps);
    }
    let edge_birth: Vec<usize> = edges
        .iter()
        .map(|&(a, b)| rng.gen_range(vertex_birth[a].max(vertex_birth[b])..n_steps))
        .collect();
    let triangle_birth: Vec<usize> = triangles
        .iter()
        .map(|&(a, b, c)| {
            let floor = edges
                .iter()
                .zip(&edge_birth)
                .filter(|&(&(x, y), _)| (x, y) == (a, b) || (x, y) == (a, c) || (x, y) == (b, c))
                .map(|(_, &t)| t)
                .max()
                .expect("triangle edges are present");
            rng.gen_range(floor..n_steps)
        })
        .collect();

    let steps: Vec<SimplexSet> = (0..n_steps)
        .map(|t| {
            let mut simplices: Vec<Simplex> = (0..n_vertices)
                .filter(|&v| vertex_birth[v] <= t)
                .map(|v| sx(vec![v]))
                .collect();
            simplices.extend(
                edges
                    .iter()
                    .zip(&edge_birth)
                    .filter(|&(_, &b)| b <= t)
                    .map(|(&(a, b), _)| sx(vec![a, b])),
            );
            simplices.extend(
                triangles
                    .iter()
                    .zip(&triangle_birth)
                    .filter(|&(_, &b)| b <= t)
                    .map(|(&(a, b, c), _)| sx(vec![a, b, c])),
            );
            SimplexSet::new(simplices).expect("closed by construction")
        })
        .collect();
    FilteredComplex::new(steps).expect("nested by construction")
}
