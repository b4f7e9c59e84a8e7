//! Exact linear algebra over small finite fields.
//!
//! Subspaces are kept in a canonical form — the reduced row echelon basis with
//! rows ordered by pivot column — so structural equality of `Subspace` values
//! is equality of subspaces.  All dimension bookkeeping is exact; every
//! operation is deterministic.

use crate::field::{Fe, Field};

/// A vector over a finite field, as a coordinate list.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vector {
    pub coords: Vec<Fe>,
}

impl std::fmt::Debug for Vector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl Vector {
    pub fn new(coords: Vec<Fe>) -> Self {
        Vector { coords }
    }

    /// Build from raw indices (unchecked against a field order).
    pub fn from_indices(idx: &[u8]) -> Self {
        Vector {
            coords: idx.iter().map(|&i| Fe(i)).collect(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Vector {
            coords: vec![Fe(0); dim],
        }
    }

    /// Standard basis vector e_i (0-based) in the given dimension.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Vector::zero(dim);
        v.coords[i] = Fe(1);
        v
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == Fe(0))
    }

    pub fn leading_index(&self) -> Option<usize> {
        self.coords.iter().position(|&c| c != Fe(0))
    }

    pub fn scale(&self, f: &Field, s: Fe) -> Vector {
        Vector {
            coords: self.coords.iter().map(|&c| f.mul(c, s)).collect(),
        }
    }

    pub fn add(&self, f: &Field, other: &Vector) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        }
    }

    /// self + s * other
    pub fn add_scaled(&self, f: &Field, other: &Vector, s: Fe) -> Vector {
        debug_assert_eq!(self.dim(), other.dim());
        Vector {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(&a, &b)| f.add(a, f.mul(b, s)))
                .collect(),
        }
    }

    /// Projective normalization: scale so the leading nonzero coordinate is 1.
    /// Returns `None` for the zero vector.
    pub fn projective_rep(&self, f: &Field) -> Option<Vector> {
        let lead = self.leading_index()?;
        let inv = f.inv(self.coords[lead]).expect("nonzero leading coord");
        Some(self.scale(f, inv))
    }
}

/// Reduced row echelon form of the given rows: nonzero rows only, each with a
/// leading 1, pivot columns cleared elsewhere, rows sorted by pivot column.
pub fn rref(f: &Field, rows: &[Vector]) -> Vec<Vector> {
    let mut rows: Vec<Vector> = rows.iter().filter(|r| !r.is_zero()).cloned().collect();
    if rows.is_empty() {
        return rows;
    }
    let ncols = rows[0].dim();
    let mut pivot_row = 0usize;
    for col in 0..ncols {
        let Some(r) = (pivot_row..rows.len()).find(|&r| rows[r].coords[col] != Fe(0)) else {
            continue;
        };
        rows.swap(pivot_row, r);
        let inv = f.inv(rows[pivot_row].coords[col]).unwrap();
        rows[pivot_row] = rows[pivot_row].scale(f, inv);
        for r2 in 0..rows.len() {
            if r2 != pivot_row && rows[r2].coords[col] != Fe(0) {
                let c = f.neg(rows[r2].coords[col]);
                rows[r2] = rows[r2].add_scaled(f, &rows[pivot_row], c);
            }
        }
        pivot_row += 1;
        if pivot_row == rows.len() {
            break;
        }
    }
    rows.truncate(pivot_row);
    rows
}

/// A subspace in canonical (reduced row echelon) form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient: usize,
    basis: Vec<Vector>, // canonical RREF rows
}

impl std::fmt::Debug for Subspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Subspace(dim {} of {}; {:?})",
            self.dim(),
            self.ambient,
            self.basis
        )
    }
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: vec![],
        }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace {
            ambient,
            basis: (0..ambient).map(|i| Vector::unit(ambient, i)).collect(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Canonical echelon basis rows, ordered by pivot column.
    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn pivot_columns(&self) -> Vec<usize> {
        self.basis
            .iter()
            .map(|r| r.leading_index().unwrap())
            .collect()
    }

    /// Reduce `v` modulo this subspace (clearing pivot coordinates); the
    /// result is the canonical coset representative.
    pub fn reduce(&self, f: &Field, v: &Vector) -> Vector {
        let mut v = v.clone();
        for row in &self.basis {
            let p = row.leading_index().unwrap();
            if v.coords[p] != Fe(0) {
                let c = f.neg(v.coords[p]);
                v = v.add_scaled(f, row, c);
            }
        }
        v
    }

    pub fn contains(&self, f: &Field, v: &Vector) -> bool {
        self.reduce(f, v).is_zero()
    }

    pub fn contains_subspace(&self, f: &Field, other: &Subspace) -> bool {
        other.basis.iter().all(|v| self.contains(f, v))
    }

    /// Enumerate every vector of the subspace (order^dim of them).
    pub fn all_vectors(&self, f: &Field) -> Vec<Vector> {
        let mut out = vec![Vector::zero(self.ambient)];
        for row in &self.basis {
            let mut next = Vec::with_capacity(out.len() * f.order());
            for v in &out {
                for s in f.elements() {
                    next.push(v.add_scaled(f, row, s));
                }
            }
            out = next;
        }
        out
    }
}

/// Span of a set of vectors.
pub fn span(f: &Field, ambient: usize, vecs: &[Vector]) -> Subspace {
    debug_assert!(vecs.iter().all(|v| v.dim() == ambient));
    Subspace {
        ambient,
        basis: rref(f, vecs),
    }
}

/// Sum of two subspaces.
pub fn sum(f: &Field, a: &Subspace, b: &Subspace) -> Subspace {
    let mut rows = a.basis.clone();
    rows.extend(b.basis.iter().cloned());
    span(f, a.ambient, &rows)
}

/// Intersection of two subspaces (Zassenhaus block elimination).
pub fn intersect(f: &Field, a: &Subspace, b: &Subspace) -> Subspace {
    assert_eq!(a.ambient, b.ambient, "ambient dimension mismatch");
    let n = a.ambient;
    let mut rows: Vec<Vector> = Vec::new();
    for u in &a.basis {
        let mut c = u.coords.clone();
        c.extend(u.coords.iter().copied());
        rows.push(Vector::new(c));
    }
    for v in &b.basis {
        let mut c = v.coords.clone();
        c.extend(std::iter::repeat_n(Fe(0), n));
        rows.push(Vector::new(c));
    }
    let reduced = rref(f, &rows);
    let mut inter_rows = vec![];
    for r in &reduced {
        if r.coords[..n].iter().all(|&c| c == Fe(0)) {
            inter_rows.push(Vector::new(r.coords[n..].to_vec()));
        }
    }
    span(f, n, &inter_rows)
}

/// A linear map given by a `target_dim x source_dim` matrix (rows are images
/// of coordinates read off by matrix–vector product).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LinearMap {
    pub rows: Vec<Vector>, // each of length source_dim
    pub source_dim: usize,
    pub target_dim: usize,
}

impl LinearMap {
    pub fn identity(dim: usize) -> Self {
        LinearMap {
            rows: (0..dim).map(|i| Vector::unit(dim, i)).collect(),
            source_dim: dim,
            target_dim: dim,
        }
    }

    pub fn apply(&self, f: &Field, v: &Vector) -> Vector {
        assert_eq!(v.dim(), self.source_dim, "dimension mismatch in apply");
        let coords = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = Fe(0);
                for (a, b) in row.coords.iter().zip(&v.coords) {
                    acc = f.add(acc, f.mul(*a, *b));
                }
                acc
            })
            .collect();
        Vector::new(coords)
    }

    /// Kernel as a canonical subspace: solve M v = 0 by eliminating the
    /// transposed system.
    pub fn kernel(&self, f: &Field) -> Subspace {
        // Row reduce the matrix; free columns parameterize the kernel.
        let mat = rref(
            f,
            &self
                .rows
                .iter()
                .map(|r| Vector::new(r.coords.clone()))
                .collect::<Vec<_>>(),
        );
        let pivots: Vec<usize> = mat.iter().map(|r| r.leading_index().unwrap()).collect();
        let mut basis = vec![];
        for free in 0..self.source_dim {
            if pivots.contains(&free) {
                continue;
            }
            let mut v = Vector::zero(self.source_dim);
            v.coords[free] = Fe(1);
            for (r, &p) in mat.iter().zip(&pivots) {
                v.coords[p] = f.neg(r.coords[free]);
            }
            basis.push(v);
        }
        span(f, self.source_dim, &basis)
    }

    /// Image as a canonical subspace of the target.
    pub fn image(&self, f: &Field) -> Subspace {
        let cols: Vec<Vector> = (0..self.source_dim)
            .map(|j| Vector::new(self.rows.iter().map(|r| r.coords[j]).collect()))
            .collect();
        span(f, self.target_dim, &cols)
    }

    pub fn rank(&self, f: &Field) -> usize {
        self.image(f).dim()
    }
}

/// Quotient map of the ambient space by the span of `kernel_gens`: a
/// surjective map onto a space of dimension `ambient - dim(kernel)` whose
/// kernel is exactly that span.  The section is the coordinate complement of
/// the kernel's pivot columns (greedy pivot order), so the map is
/// deterministic.
pub fn quotient_map(f: &Field, ambient: usize, kernel_gens: &[Vector]) -> LinearMap {
    let k = span(f, ambient, kernel_gens);
    let pivots = k.pivot_columns();
    let free: Vec<usize> = (0..ambient).filter(|i| !pivots.contains(i)).collect();
    let mut rows = Vec::with_capacity(free.len());
    // Row r of the matrix reads coordinate free[r] of the canonical coset
    // representative.
    let mut reduced_units: Vec<Vector> = Vec::with_capacity(ambient);
    for j in 0..ambient {
        reduced_units.push(k.reduce(f, &Vector::unit(ambient, j)));
    }
    for &q in &free {
        let row = Vector::new((0..ambient).map(|j| reduced_units[j].coords[q]).collect());
        rows.push(row);
    }
    LinearMap {
        rows,
        source_dim: ambient,
        target_dim: free.len(),
    }
}

/// Solver for coordinates relative to a fixed independent list of vectors
/// (not necessarily echelon).  Builds the elimination once so repeated solves
/// are cheap.
pub struct BasisSolver {
    rows: Vec<Vector>, // rref of basis rows, augmented with bookkeeping cols
    n: usize,          // ambient dimension
    m: usize,          // basis size
}

impl BasisSolver {
    /// Returns `None` if the given list is linearly dependent.
    pub fn new(f: &Field, basis: &[Vector]) -> Option<Self> {
        let n = basis.first().map_or(0, |b| b.dim());
        let m = basis.len();
        let rows: Vec<Vector> = basis
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let mut c = b.coords.clone();
                c.extend((0..m).map(|j| if i == j { Fe(1) } else { Fe(0) }));
                Vector::new(c)
            })
            .collect();
        let rows = rref(f, &rows);
        // Dependence shows up as a reduced row whose leading entry sits in the
        // bookkeeping block.
        if rows
            .iter()
            .any(|r| r.coords[..n].iter().all(|&c| c == Fe(0)))
        {
            return None;
        }
        if rows.len() != m {
            return None;
        }
        Some(BasisSolver { rows, n, m })
    }

    /// Coordinates of `v` in the basis, or `None` if outside its span.
    pub fn solve(&self, f: &Field, v: &Vector) -> Option<Vec<Fe>> {
        let mut work = v.coords.clone();
        work.extend(std::iter::repeat_n(Fe(0), self.m));
        let mut work = Vector::new(work);
        for row in &self.rows {
            let p = row.coords[..self.n]
                .iter()
                .position(|&c| c != Fe(0))
                .expect("independent basis row");
            if work.coords[p] != Fe(0) {
                let c = f.neg(work.coords[p]);
                work = work.add_scaled(f, row, c);
            }
        }
        if work.coords[..self.n].iter().any(|&c| c != Fe(0)) {
            return None;
        }
        // The bookkeeping columns now hold -coefficients.
        Some(work.coords[self.n..].iter().map(|&c| f.neg(c)).collect())
    }
}

/// Coordinates of `v` in terms of an arbitrary independent list `basis`
/// (not necessarily echelon).  Returns `None` if `v` is outside the span.
/// One-shot convenience wrapper around [`BasisSolver`].
pub fn coordinates_in(f: &Field, basis: &[Vector], v: &Vector) -> Option<Vec<Fe>> {
    if basis.is_empty() {
        return if v.is_zero() { Some(vec![]) } else { None };
    }
    BasisSolver::new(f, basis)
        .expect("coordinates_in requires an independent basis")
        .solve(f, v)
}

/// All projective points of F^dim: one representative per 1-dimensional
/// subspace, normalized to leading coefficient 1, in lexicographic order.
pub fn projective_points(f: &Field, dim: usize) -> Vec<Vector> {
    let mut out = vec![];
    let order = f.order();
    let total = order.checked_pow(dim as u32).expect("dimension too large");
    for idx in 1..total {
        let mut coords = vec![Fe(0); dim];
        let mut rest = idx;
        for c in coords.iter_mut().rev() {
            *c = Fe((rest % order) as u8);
            rest /= order;
        }
        let v = Vector::new(coords);
        if v.projective_rep(f).as_ref() == Some(&v) {
            out.push(v);
        }
    }
    out
}

/// Outcome of pinning one more (x -> y) pair into a [`PartialLinearMap`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extend {
    /// x was independent of the current domain; the pair was added.
    Added,
    /// x was already in the domain and the forced image agrees with y.
    Consistent,
    /// x was already in the domain but the forced image differs from y:
    /// no linear map satisfies all pinned pairs.
    Conflict,
}

/// A linear map pinned on a growing list of (x -> y) pairs.
///
/// The x-parts are kept as a reduced echelon system (distinct pivots, pivot
/// coefficient 1, mutually reduced) with the same row operations mirrored on
/// the y-parts, so adding a dependent pair immediately reveals whether it is
/// consistent with the span of the earlier ones.
#[derive(Clone, Debug)]
pub struct PartialLinearMap {
    source_dim: usize,
    target_dim: usize,
    rows: Vec<(Vector, Vector)>,
}

impl PartialLinearMap {
    pub fn new(source_dim: usize, target_dim: usize) -> Self {
        PartialLinearMap {
            source_dim,
            target_dim,
            rows: vec![],
        }
    }

    pub fn domain_dim(&self) -> usize {
        self.rows.len()
    }

    /// Reduce (x, y) against the stored rows (same operations on both sides).
    fn reduce(&self, f: &Field, mut x: Vector, mut y: Vector) -> (Vector, Vector) {
        for (rx, ry) in &self.rows {
            let p = rx.leading_index().expect("stored rows are nonzero");
            let c = x.coords[p];
            if c != Fe(0) {
                let nc = f.neg(c);
                x = x.add_scaled(f, rx, nc);
                y = y.add_scaled(f, ry, nc);
            }
        }
        (x, y)
    }

    /// Pin the image of `x` to `y`.
    pub fn add_pair(&mut self, f: &Field, x: &Vector, y: &Vector) -> Extend {
        debug_assert_eq!(x.dim(), self.source_dim);
        debug_assert_eq!(y.dim(), self.target_dim);
        let (rx, ry) = self.reduce(f, x.clone(), y.clone());
        match rx.leading_index() {
            None => {
                if ry.is_zero() {
                    Extend::Consistent
                } else {
                    Extend::Conflict
                }
            }
            Some(p) => {
                let inv = f.inv(rx.coords[p]).expect("nonzero pivot");
                let rx = rx.scale(f, inv);
                let ry = ry.scale(f, inv);
                // Clear the new pivot from the existing rows to keep the
                // x-system fully reduced.
                for (ex, ey) in &mut self.rows {
                    let c = ex.coords[p];
                    if c != Fe(0) {
                        let nc = f.neg(c);
                        *ex = ex.add_scaled(f, &rx, nc);
                        *ey = ey.add_scaled(f, &ry, nc);
                    }
                }
                let pos = self
                    .rows
                    .iter()
                    .position(|(ex, _)| ex.leading_index().unwrap() > p)
                    .unwrap_or(self.rows.len());
                self.rows.insert(pos, (rx, ry));
                Extend::Added
            }
        }
    }

    /// Image of `v` under the pinned map, or `None` if `v` is outside the
    /// span of the pinned x-parts.
    pub fn apply(&self, f: &Field, v: &Vector) -> Option<Vector> {
        let (rx, ry) = self.reduce(f, v.clone(), Vector::zero(self.target_dim));
        if rx.is_zero() {
            // v = sum c_i x_i and ry = -sum c_i y_i, so the image is -ry.
            Some(ry.scale(f, f.neg(f.one())))
        } else {
            None
        }
    }

    pub fn domain_contains(&self, f: &Field, v: &Vector) -> bool {
        self.apply(f, v).is_some()
    }

    /// Dimension of the span of the pinned images.  The map extends to an
    /// injective map on its domain iff this equals `domain_dim`.
    pub fn image_rank(&self, f: &Field) -> usize {
        let ys: Vec<Vector> = self.rows.iter().map(|(_, y)| y.clone()).collect();
        span(f, self.target_dim, &ys).dim()
    }
}
