//! Deterministic instance generators for tests and self-checks.
//!
//! Every generator takes an explicit RNG, so all "random" test data is
//! reproducible from a seed.

use crate::config::Configuration;
use crate::field::{Fe, Field};
use crate::linalg::{projective_points, span, Vector};
use crate::patch::RootedConfiguration;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The project-standard seeded RNG.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vector(f: &Field, dim: usize, r: &mut impl Rng) -> Vector {
    Vector::new(
        (0..dim)
            .map(|_| Fe(r.gen_range(0..f.order() as u8)))
            .collect(),
    )
}

pub fn random_nonzero_vector(f: &Field, dim: usize, r: &mut impl Rng) -> Vector {
    loop {
        let v = random_vector(f, dim, r);
        if !v.is_zero() {
            return v;
        }
    }
}

/// `n` random nonzero vectors in F^dim (repetition allowed).
pub fn random_configuration(f: &Field, dim: usize, n: usize, r: &mut impl Rng) -> Configuration {
    let vectors = (0..n).map(|_| random_nonzero_vector(f, dim, r)).collect();
    Configuration::new(f.clone(), dim, vectors).expect("coordinates in range")
}

/// `n` distinct projective points of F^dim; panics if fewer exist.
pub fn random_simple_configuration(
    f: &Field,
    dim: usize,
    n: usize,
    r: &mut impl Rng,
) -> Configuration {
    let mut pts = projective_points(f, dim);
    assert!(n <= pts.len(), "not enough projective points");
    for i in 0..n {
        let j = r.gen_range(i..pts.len());
        pts.swap(i, j);
    }
    pts.truncate(n);
    Configuration::new(f.clone(), dim, pts).expect("points in range")
}

/// An independent q-tuple in F^dim (q <= dim).  Random attempts with a
/// deterministic unit-vector fallback, so it always terminates.
pub fn random_independent_tuple(f: &Field, dim: usize, q: usize, r: &mut impl Rng) -> Vec<Vector> {
    assert!(
        q <= dim,
        "cannot pick {q} independent vectors in dimension {dim}"
    );
    let mut out: Vec<Vector> = vec![];
    for _ in 0..q {
        let cur = span(f, dim, &out);
        let pick = (0..50)
            .map(|_| random_nonzero_vector(f, dim, r))
            .find(|v| !cur.contains(f, v))
            .unwrap_or_else(|| {
                (0..dim)
                    .map(|i| Vector::unit(dim, i))
                    .find(|u| !cur.contains(f, u))
                    .expect("span is proper, some unit vector lies outside")
            });
        out.push(pick);
    }
    out
}

/// A spanning rooted configuration: the core spans F^ambient, and both
/// terminal lists are independent q-tuples (so every validity clause holds).
pub fn random_spanning_patch(
    f: &Field,
    ambient: usize,
    core_size: usize,
    q: usize,
    r: &mut impl Rng,
) -> RootedConfiguration {
    let mut vectors: Vec<Vector> = (0..core_size)
        .map(|_| random_nonzero_vector(f, ambient, r))
        .collect();
    loop {
        let cur = span(f, ambient, &vectors);
        if cur.dim() == ambient {
            break;
        }
        let u = (0..ambient)
            .map(|i| Vector::unit(ambient, i))
            .find(|u| !cur.contains(f, u))
            .expect("proper subspace misses some unit");
        vectors.push(u);
    }
    let core = Configuration::new(f.clone(), ambient, vectors).expect("in range");
    let left = random_independent_tuple(f, ambient, q, r);
    let right = random_independent_tuple(f, ambient, q, r);
    let h = RootedConfiguration::new(core, left, right).expect("consistent dims");
    debug_assert!(h.violation().is_none());
    h
}

/// A valid rooted configuration; with probability 1/2 a non-spanning one
/// (both terminal lists share one fresh direction outside the core span).
pub fn random_rooted(f: &Field, r: &mut impl Rng) -> RootedConfiguration {
    let ambient = r.gen_range(2..=4usize);
    let q = r.gen_range(0..=2usize.min(ambient));
    let core_size = r.gen_range(1..=5usize);
    let h = random_spanning_patch(f, ambient, core_size, q, r);
    if r.gen_bool(0.5) {
        let pad = |v: &Vector| {
            let mut c = v.coords.clone();
            c.push(Fe(0));
            Vector::new(c)
        };
        let core = Configuration::new(
            f.clone(),
            ambient + 1,
            h.core.vectors.iter().map(pad).collect(),
        )
        .expect("in range");
        let fresh = Vector::unit(ambient + 1, ambient);
        let mut left: Vec<Vector> = h.left.iter().map(pad).collect();
        let mut right: Vec<Vector> = h.right.iter().map(pad).collect();
        left.push(fresh.clone());
        right.push(fresh);
        let out = RootedConfiguration::new(core, left, right).expect("consistent dims");
        debug_assert!(out.violation().is_none());
        out
    } else {
        h
    }
}

/// A composable pair (G, H): G is a spanning q-patch, H is a q-patch with no
/// core point inside the span of its left terminals (which makes point counts
/// add up exactly under gluing).
pub fn random_composable_pair(
    f: &Field,
    r: &mut impl Rng,
) -> (RootedConfiguration, RootedConfiguration) {
    let q = r.gen_range(1..=2usize);
    let g_ambient = r.gen_range(q..=3usize.max(q));
    let g = random_spanning_patch(f, g_ambient, r.gen_range(1..=4), q, r);

    let t = r.gen_range(1..=2usize);
    let m = q + t;
    let left: Vec<Vector> = (0..q).map(|i| Vector::unit(m, i)).collect();
    // Core vectors with a nonzero tail block never lie in span(left).
    let core_n = r.gen_range(1..=4usize);
    let mut vectors: Vec<Vector> = (0..core_n)
        .map(|_| {
            let mut c: Vec<Fe> = (0..q)
                .map(|_| Fe(r.gen_range(0..f.order() as u8)))
                .collect();
            let tail = random_nonzero_vector(f, t, r);
            c.extend(tail.coords);
            Vector::new(c)
        })
        .collect();
    loop {
        let mut all = vectors.clone();
        all.extend(left.iter().cloned());
        let cur = span(f, m, &all);
        if cur.dim() == m {
            break;
        }
        let u = (q..m)
            .map(|i| Vector::unit(m, i))
            .find(|u| !cur.contains(f, u))
            .expect("missing dimension lies in the tail block");
        vectors.push(u);
    }
    let right = (0..40)
        .map(|_| random_independent_tuple(f, m, q, r))
        .find(|cand| {
            let mut s = vectors.clone();
            s.extend(cand.iter().cloned());
            let sp = span(f, m, &s);
            left.iter().all(|l| sp.contains(f, l))
        })
        .unwrap_or_else(|| left.clone());
    let core = Configuration::new(f.clone(), m, vectors).expect("in range");
    let h = RootedConfiguration::new(core, left, right).expect("consistent dims");
    debug_assert!(h.violation().is_none());
    (g, h)
}
