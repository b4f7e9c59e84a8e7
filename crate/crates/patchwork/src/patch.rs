//! Rooted configurations and q-patches: validation, products, composition,
//! rooted minors, linkedness, and the g_q functional.
//!
//! A rooted configuration H = (A, L, R) is a core configuration A together
//! with two ordered terminal lists L and R in the same ambient space, such
//! that L and R are each linearly independent, R ⊆ ⟨A ∪ L⟩ and L ⊆ ⟨A ∪ R⟩.
//! When |L| = |R| = q we call H a q-patch.  ⟨H⟩ denotes the span of core and
//! terminals together; H̃ denotes the core alone.

use std::collections::HashMap;

use crate::config::{Configuration, SEARCH_GUARD};
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::linalg::{
    intersect, quotient_map, span, BasisSolver, Extend, LinearMap, PartialLinearMap, Subspace,
    Vector,
};
use crate::ratio::{rat_int, Rational};

/// A core configuration with ordered left/right terminal lists.
///
/// `new` checks only shape (dimensions and coordinate ranges); the
/// rooted-configuration axioms are checked by [`RootedConfiguration::violation`]
/// and enforced by every operation through `ensure_valid`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedConfiguration {
    pub core: Configuration,
    pub left: Vec<Vector>,
    pub right: Vec<Vector>,
}

impl RootedConfiguration {
    pub fn new(core: Configuration, left: Vec<Vector>, right: Vec<Vector>) -> Result<Self> {
        for v in left.iter().chain(&right) {
            if v.dim() != core.ambient_dim {
                return Err(Error::invalid(format!(
                    "terminal vector has dimension {}, ambient space has dimension {}",
                    v.dim(),
                    core.ambient_dim
                )));
            }
            if v.coords.iter().any(|c| c.0 as usize >= core.field.order()) {
                return Err(Error::invalid(
                    "terminal coordinate out of range for the field",
                ));
            }
        }
        Ok(RootedConfiguration { core, left, right })
    }

    pub fn field(&self) -> &Field {
        &self.core.field
    }

    pub fn ambient_dim(&self) -> usize {
        self.core.ambient_dim
    }

    /// ⟨H⟩: span of core and both terminal lists.
    pub fn full_span(&self) -> Subspace {
        let mut vs = self.core.vectors.clone();
        vs.extend(self.left.iter().cloned());
        vs.extend(self.right.iter().cloned());
        span(self.field(), self.ambient_dim(), &vs)
    }

    pub fn span_dim(&self) -> usize {
        self.full_span().dim()
    }

    /// First violated rooted-configuration clause, if any.
    pub fn violation(&self) -> Option<String> {
        let f = self.field();
        let n = self.ambient_dim();
        if span(f, n, &self.left).dim() < self.left.len() {
            return Some("L dependent: left terminals are linearly dependent".into());
        }
        if span(f, n, &self.right).dim() < self.right.len() {
            return Some("R dependent: right terminals are linearly dependent".into());
        }
        let mut al = self.core.vectors.clone();
        al.extend(self.left.iter().cloned());
        let al = span(f, n, &al);
        if let Some(r) = self.right.iter().find(|r| !al.contains(f, r)) {
            return Some(format!(
                "R ⊄ ⟨A∪L⟩: right terminal {:?} lies outside the span of core and left terminals",
                r
            ));
        }
        let mut ar = self.core.vectors.clone();
        ar.extend(self.right.iter().cloned());
        let ar = span(f, n, &ar);
        if let Some(l) = self.left.iter().find(|l| !ar.contains(f, l)) {
            return Some(format!(
                "L ⊄ ⟨A∪R⟩: left terminal {:?} lies outside the span of core and right terminals",
                l
            ));
        }
        None
    }

    pub fn ensure_valid(&self) -> Result<()> {
        match self.violation() {
            Some(v) => Err(Error::invalid(format!("invalid rooted configuration: {v}"))),
            None => Ok(()),
        }
    }

    /// dim⟨H̃⟩ = dim⟨H⟩: the core alone already spans everything.
    pub fn is_spanning(&self) -> bool {
        self.core.rank() == self.span_dim()
    }

    /// dim⟨H⟩ > |L|.
    pub fn is_nontrivial(&self) -> bool {
        self.span_dim() > self.left.len()
    }

    /// The patch parameter; errors when |L| ≠ |R|.
    pub fn q(&self) -> Result<usize> {
        if self.left.len() == self.right.len() {
            Ok(self.left.len())
        } else {
            Err(Error::invalid(format!(
                "not a q-patch: |L| = {} differs from |R| = {}",
                self.left.len(),
                self.right.len()
            )))
        }
    }

    /// g_q(H, Δ) = ε(H̃) − Δ·(dim⟨H⟩ − q).
    pub fn g_q(&self, delta: Rational) -> Result<Rational> {
        let q = self.q()?;
        Ok(rat_int(self.core.epsilon() as i64) - delta * rat_int((self.span_dim() - q) as i64))
    }

    fn core_vectors_at(&self, idx: &[usize]) -> Vec<Vector> {
        idx.iter().map(|&i| self.core.vectors[i].clone()).collect()
    }

    fn guard(&self, what: &'static str) -> Result<()> {
        let size = self.core.epsilon();
        if size > SEARCH_GUARD {
            return Err(Error::GuardExceeded {
                what,
                size,
                limit: SEARCH_GUARD,
            });
        }
        Ok(())
    }
}

/// f(X) = ε(X) − Δ·dim⟨X⟩ for a configuration X.
pub fn f_functional(a: &Configuration, delta: Rational) -> Rational {
    rat_int(a.epsilon() as i64) - delta * rat_int(a.rank() as i64)
}

/// In-space product (A1 ∪ A2, L1, R2).
///
/// Requires the same ambient space, `h1.right` identical to `h2.left` as an
/// ordered list, and that this shared list is a basis of ⟨A1∪L1⟩ ∩ ⟨A2∪R2⟩.
pub fn product(h1: &RootedConfiguration, h2: &RootedConfiguration) -> Result<RootedConfiguration> {
    h1.ensure_valid()?;
    h2.ensure_valid()?;
    let f = h1.field();
    if f != h2.field() {
        return Err(Error::invalid("field mismatch in product"));
    }
    let n = h1.ambient_dim();
    if n != h2.ambient_dim() {
        return Err(Error::invalid("ambient dimension mismatch in product"));
    }
    if h1.right != h2.left {
        return Err(Error::invalid(
            "terminal mismatch: H1.right and H2.left differ as ordered lists",
        ));
    }
    let mut s1v = h1.core.vectors.clone();
    s1v.extend(h1.left.iter().cloned());
    let s1 = span(f, n, &s1v);
    let mut s2v = h2.core.vectors.clone();
    s2v.extend(h2.right.iter().cloned());
    let s2 = span(f, n, &s2v);
    let x = intersect(f, &s1, &s2);
    if x != span(f, n, &h1.right) {
        return Err(Error::invalid(format!(
            "boundary mismatch: shared terminals do not form a basis of \
             ⟨A1∪L⟩ ∩ ⟨A2∪R⟩ (terminals span dimension {}, intersection has dimension {})",
            span(f, n, &h1.right).dim(),
            x.dim()
        )));
    }
    let mut core_v = h1.core.vectors.clone();
    core_v.extend(h2.core.vectors.iter().cloned());
    let core = Configuration::new(f.clone(), n, core_v)?;
    let out = RootedConfiguration::new(core, h1.left.clone(), h2.right.clone())?;
    out.ensure_valid().map_err(|e| {
        Error::internal(format!(
            "product produced an invalid rooted configuration: {e}"
        ))
    })?;
    Ok(out)
}

/// Split H = (A, L, R) along a core partition into (A1, L, X) and (A2, X, R),
/// where X is the canonical echelon-ordered basis of ⟨A1∪L⟩ ∩ ⟨A2∪R⟩.
/// Errors when that intersection has dimension above `q_bound`.
pub fn split(
    h: &RootedConfiguration,
    part1: &[usize],
    q_bound: usize,
) -> Result<(RootedConfiguration, RootedConfiguration)> {
    h.ensure_valid()?;
    let f = h.field();
    let n = h.ambient_dim();
    let m = h.core.len();
    let mut in_part1 = vec![false; m];
    for &i in part1 {
        if i >= m {
            return Err(Error::invalid(format!(
                "part1 index {i} out of range (core has {m} elements)"
            )));
        }
        if in_part1[i] {
            return Err(Error::invalid(format!("part1 index {i} repeated")));
        }
        in_part1[i] = true;
    }
    let a1: Vec<Vector> = (0..m)
        .filter(|&i| in_part1[i])
        .map(|i| h.core.vectors[i].clone())
        .collect();
    let a2: Vec<Vector> = (0..m)
        .filter(|&i| !in_part1[i])
        .map(|i| h.core.vectors[i].clone())
        .collect();
    let mut s1v = a1.clone();
    s1v.extend(h.left.iter().cloned());
    let s1 = span(f, n, &s1v);
    let mut s2v = a2.clone();
    s2v.extend(h.right.iter().cloned());
    let s2 = span(f, n, &s2v);
    let x = intersect(f, &s1, &s2);
    if x.dim() > q_bound {
        return Err(Error::invalid(format!(
            "boundary dimension {} exceeds the requested bound {}",
            x.dim(),
            q_bound
        )));
    }
    let xb: Vec<Vector> = x.basis().to_vec();
    let h1 = RootedConfiguration::new(
        Configuration::new(f.clone(), n, a1)?,
        h.left.clone(),
        xb.clone(),
    )?;
    let h2 = RootedConfiguration::new(Configuration::new(f.clone(), n, a2)?, xb, h.right.clone())?;
    h1.ensure_valid()
        .map_err(|e| Error::internal(format!("split factor H1 invalid: {e}")))?;
    h2.ensure_valid()
        .map_err(|e| Error::internal(format!("split factor H2 invalid: {e}")))?;
    Ok((h1, h2))
}

/// Glue H2 onto H1 along the terminal order-isomorphism R1 → L2 and return
/// the in-space product of the embedded copies: one canonical member of
/// 𝒫(H1, H2).
///
/// The glued ambient space has dimension dim⟨H1⟩ + dim⟨H2⟩ − q.  ⟨H1⟩ is
/// embedded on the first dim⟨H1⟩ coordinates (in canonical basis order);
/// ⟨H2⟩ is glued by extending its left terminals to a basis in pivot order,
/// sending terminal j to the embedded image of R1[j] and each extension
/// vector to a fresh coordinate.
pub fn compose(h1: &RootedConfiguration, h2: &RootedConfiguration) -> Result<RootedConfiguration> {
    h1.ensure_valid()?;
    h2.ensure_valid()?;
    let f = h1.field();
    if f != h2.field() {
        return Err(Error::invalid("field mismatch in compose"));
    }
    let q = h1.right.len();
    if q != h2.left.len() {
        return Err(Error::invalid(format!(
            "no terminal order-isomorphism: |H1.right| = {} differs from |H2.left| = {}",
            q,
            h2.left.len()
        )));
    }
    let s1 = h1.full_span();
    let s2 = h2.full_span();
    let n1 = s1.dim();
    let n2 = s2.dim();
    let n = n1 + n2 - q;
    let b1: Vec<Vector> = s1.basis().to_vec();
    let solver1 = BasisSolver::new(f, &b1).expect("canonical basis is independent");
    let embed1 = |v: &Vector| -> Vector {
        let c = solver1.solve(f, v).expect("vector lies in ⟨H1⟩");
        let mut out = Vector::zero(n);
        for (i, ci) in c.into_iter().enumerate() {
            out.coords[i] = ci;
        }
        out
    };
    // Basis of ⟨H2⟩ starting with L2, extended in pivot order.
    let mut b2: Vec<Vector> = h2.left.clone();
    for w in s2.basis() {
        let cur = span(f, h2.ambient_dim(), &b2);
        if !cur.contains(f, w) {
            b2.push(w.clone());
        }
    }
    if b2.len() != n2 {
        return Err(Error::internal(
            "terminal extension failed to reach a basis of ⟨H2⟩",
        ));
    }
    let solver2 = BasisSolver::new(f, &b2)
        .ok_or_else(|| Error::internal("extended terminal basis is dependent"))?;
    let images2: Vec<Vector> = (0..n2)
        .map(|j| {
            if j < q {
                embed1(&h1.right[j])
            } else {
                Vector::unit(n, n1 + (j - q))
            }
        })
        .collect();
    let embed2 = |v: &Vector| -> Vector {
        let c = solver2.solve(f, v).expect("vector lies in ⟨H2⟩");
        let mut out = Vector::zero(n);
        for (j, cj) in c.into_iter().enumerate() {
            if cj != Fe(0) {
                out = out.add_scaled(f, &images2[j], cj);
            }
        }
        out
    };
    let core1: Vec<Vector> = h1.core.vectors.iter().map(&embed1).collect();
    let core2: Vec<Vector> = h2.core.vectors.iter().map(&embed2).collect();
    let left: Vec<Vector> = h1.left.iter().map(&embed1).collect();
    let shared: Vec<Vector> = h1.right.iter().map(embed1).collect();
    let right: Vec<Vector> = h2.right.iter().map(embed2).collect();
    let f1 = RootedConfiguration::new(
        Configuration::new(f.clone(), n, core1)?,
        left,
        shared.clone(),
    )?;
    let f2 = RootedConfiguration::new(Configuration::new(f.clone(), n, core2)?, shared, right)?;
    product(&f1, &f2).map_err(|e| {
        Error::internal(format!(
            "canonical gluing failed the product condition: {e}"
        ))
    })
}

/// G1 ∘ H^l ∘ G2 by left-folding `compose`; `l = 0` gives compose(G1, G2).
pub fn compose_power(
    g1: &RootedConfiguration,
    h: &RootedConfiguration,
    l: usize,
    g2: &RootedConfiguration,
) -> Result<RootedConfiguration> {
    let mut acc = g1.clone();
    for _ in 0..l {
        acc = compose(&acc, h)?;
    }
    compose(&acc, g2)
}

/// Distinct nonzero core vector values in order of first occurrence, with
/// multiplicities (exact values, not projective classes — isomorphisms act on
/// vectors).
fn core_value_bag(h: &RootedConfiguration) -> (Vec<Vector>, HashMap<Vector, usize>) {
    let mut order = vec![];
    let mut bag: HashMap<Vector, usize> = HashMap::new();
    for v in &h.core.vectors {
        if v.is_zero() {
            continue;
        }
        let e = bag.entry(v.clone()).or_insert(0);
        if *e == 0 {
            order.push(v.clone());
        }
        *e += 1;
    }
    (order, bag)
}

/// Depth-first completion of a pinned partial map into a map sending every
/// distinct `src` value to some `tgt` value, injective on a `want_dim`
/// dimensional domain, with the image multiset condition given by `exact`:
/// equality with `bag` when true, containment in `bag` when false.
#[allow(clippy::too_many_arguments)] // a focused recursion; bundling would obscure it
fn complete_value_map(
    f: &Field,
    pinned: &PartialLinearMap,
    src: &[Vector],
    src_bag: &HashMap<Vector, usize>,
    tgt: &[Vector],
    tgt_bag: &HashMap<Vector, usize>,
    want_dim: usize,
    exact: bool,
) -> bool {
    match src.iter().find(|v| !pinned.domain_contains(f, v)) {
        None => {
            if pinned.image_rank(f) != want_dim || pinned.domain_dim() != want_dim {
                return false;
            }
            let mut remaining = tgt_bag.clone();
            for (v, cnt) in src_bag {
                let img = pinned.apply(f, v).expect("value lies in the domain");
                match remaining.get_mut(&img) {
                    Some(c) if *c >= *cnt => *c -= cnt,
                    _ => return false,
                }
            }
            !exact || remaining.values().all(|&c| c == 0)
        }
        Some(x) => {
            let cx = src_bag[x];
            for y in tgt {
                if exact && tgt_bag[y] != cx {
                    continue;
                }
                if !exact && tgt_bag[y] < cx {
                    continue;
                }
                let mut next = pinned.clone();
                if let Extend::Conflict = next.add_pair(f, x, y) {
                    continue;
                }
                if complete_value_map(f, &next, src, src_bag, tgt, tgt_bag, want_dim, exact) {
                    return true;
                }
            }
            false
        }
    }
}

/// Rooted isomorphism: an invertible linear map ⟨H1⟩ → ⟨H2⟩ carrying the core
/// multiset onto the core multiset and terminals onto terminals in order.
pub fn rooted_iso(h1: &RootedConfiguration, h2: &RootedConfiguration) -> Result<bool> {
    h1.ensure_valid()?;
    h2.ensure_valid()?;
    h1.guard("rooted_iso")?;
    h2.guard("rooted_iso")?;
    if h1.field() != h2.field() {
        return Ok(false);
    }
    if h1.left.len() != h2.left.len() || h1.right.len() != h2.right.len() {
        return Ok(false);
    }
    if h1.core.len() != h2.core.len()
        || h1.core.loop_count() != h2.core.loop_count()
        || h1.core.epsilon() != h2.core.epsilon()
        || h1.core.rank() != h2.core.rank()
    {
        return Ok(false);
    }
    let d = h1.span_dim();
    if d != h2.span_dim() {
        return Ok(false);
    }
    let f = h1.field();
    let mut pinned = PartialLinearMap::new(h1.ambient_dim(), h2.ambient_dim());
    for (x, y) in h1
        .left
        .iter()
        .zip(&h2.left)
        .chain(h1.right.iter().zip(&h2.right))
    {
        if let Extend::Conflict = pinned.add_pair(f, x, y) {
            return Ok(false);
        }
    }
    let (src, src_bag) = core_value_bag(h1);
    let (tgt, tgt_bag) = core_value_bag(h2);
    if src.len() != tgt.len() {
        return Ok(false);
    }
    Ok(complete_value_map(
        f, &pinned, &src, &src_bag, &tgt, &tgt_bag, d, true,
    ))
}

/// A rooted minor witness: indices into the big core whose span is the kernel
/// of the contraction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatchMinorWitness {
    pub contract: Vec<usize>,
}

/// Rooted-minor search: does contracting some independent subset of `big`'s
/// core (kernel = its span) followed by a core restriction yield `small` up
/// to rooted isomorphism, with terminals carried onto terminals in order?
pub fn is_patch_minor(
    small: &RootedConfiguration,
    big: &RootedConfiguration,
) -> Result<Option<PatchMinorWitness>> {
    small.ensure_valid()?;
    big.ensure_valid()?;
    small.guard("is_patch_minor")?;
    big.guard("is_patch_minor")?;
    if small.field() != big.field() {
        return Ok(None);
    }
    if small.left.len() != big.left.len() || small.right.len() != big.right.len() {
        return Ok(None);
    }
    if small.core.loop_count() > 0 {
        // Contraction images of nonloops are never zero after restriction
        // bookkeeping here; loopy patterns are not searched (same convention
        // as the unrooted minor search).
        return Ok(None);
    }
    let d_small = small.span_dim();
    let f = big.field();
    let n_big = big.ambient_dim();
    let d_big = big.span_dim();
    if d_small > d_big {
        return Ok(None);
    }
    // One representative index per nonzero parallel class of big's core.
    let mut seen: HashMap<Vector, ()> = HashMap::new();
    let mut reps: Vec<usize> = vec![];
    for (i, v) in big.core.vectors.iter().enumerate() {
        if let Some(p) = v.projective_rep(f) {
            if seen.insert(p, ()).is_none() {
                reps.push(i);
            }
        }
    }
    let (src, src_bag) = core_value_bag(small);
    for mask in 0u64..(1u64 << reps.len()) {
        let contract: Vec<usize> = reps
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &i)| i)
            .collect();
        let cvecs = big.core_vectors_at(&contract);
        let csp = span(f, n_big, &cvecs);
        if csp.dim() != contract.len() {
            // Dependent contract sets repeat a span already visited.
            continue;
        }
        if d_big - csp.dim() < d_small {
            continue;
        }
        let lmap = quotient_map(f, n_big, &cvecs);
        let mut pinned = PartialLinearMap::new(small.ambient_dim(), lmap.target_dim);
        let mut conflict = false;
        for (x, y) in small
            .left
            .iter()
            .zip(&big.left)
            .chain(small.right.iter().zip(&big.right))
        {
            if let Extend::Conflict = pinned.add_pair(f, x, &lmap.apply(f, y)) {
                conflict = true;
                break;
            }
        }
        if conflict {
            continue;
        }
        let mut tgt: Vec<Vector> = vec![];
        let mut tgt_bag: HashMap<Vector, usize> = HashMap::new();
        for (i, v) in big.core.vectors.iter().enumerate() {
            if contract.contains(&i) {
                continue;
            }
            let img = lmap.apply(f, v);
            if img.is_zero() {
                continue;
            }
            let e = tgt_bag.entry(img.clone()).or_insert(0);
            if *e == 0 {
                tgt.push(img);
            }
            *e += 1;
        }
        if complete_value_map(f, &pinned, &src, &src_bag, &tgt, &tgt_bag, d_small, false) {
            return Ok(Some(PatchMinorWitness { contract }));
        }
    }
    Ok(None)
}

/// Linkedness of a q-patch: some rooted minor of H has identical ordered
/// left/right terminal sequences.  Returns the contraction witness (indices
/// into H's core; empty when L = R already).
pub fn is_linked_patch(h: &RootedConfiguration) -> Result<Option<Vec<usize>>> {
    h.ensure_valid()?;
    let q = h.q()?;
    // L = R needs no search (the empty contract set is a witness), so the
    // size guard only applies when an actual search is required.
    if h.left == h.right {
        return Ok(Some(vec![]));
    }
    h.guard("is_linked_patch")?;
    let f = h.field();
    let n = h.ambient_dim();
    let mut seen: HashMap<Vector, ()> = HashMap::new();
    let mut reps: Vec<usize> = vec![];
    for (i, v) in h.core.vectors.iter().enumerate() {
        if let Some(p) = v.projective_rep(f) {
            if seen.insert(p, ()).is_none() {
                reps.push(i);
            }
        }
    }
    for mask in 1u64..(1u64 << reps.len()) {
        let contract: Vec<usize> = reps
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &i)| i)
            .collect();
        let cvecs = h.core_vectors_at(&contract);
        let csp = span(f, n, &cvecs);
        if csp.dim() != contract.len() {
            continue;
        }
        let lmap = quotient_map(f, n, &cvecs);
        let li: Vec<Vector> = h.left.iter().map(|v| lmap.apply(f, v)).collect();
        let ri: Vec<Vector> = h.right.iter().map(|v| lmap.apply(f, v)).collect();
        if li == ri && span(f, lmap.target_dim, &li).dim() == q {
            return Ok(Some(contract));
        }
    }
    Ok(None)
}

/// Markers presenting P as a three-fold product H1 × H2 × H3: index lists
/// partitioning P's core (kept in the given order) and the two shared
/// boundary terminal lists.
#[derive(Clone, Debug)]
pub struct ProductMarkers {
    pub part1: Vec<usize>,
    pub part2: Vec<usize>,
    pub part3: Vec<usize>,
    pub x1: Vec<Vector>,
    pub x2: Vec<Vector>,
}

/// Result of contracting a linked middle factor.
#[derive(Clone, Debug)]
pub struct ContractOutcome {
    pub result: RootedConfiguration,
    /// Absolute indices into P's core that were contracted.
    pub contracted: Vec<usize>,
    /// The quotient applied to P's ambient space.
    pub map: LinearMap,
}

/// Contract a linked middle factor out of P = H1 × H2 × H3.
///
/// `witness` indexes the middle core (in marker order) and must be a
/// linkedness witness for the middle factor, as returned by
/// [`is_linked_patch`].  The witness kernel is completed greedily with
/// further middle-core elements until its dimension reaches dim⟨H2⟩ − q while
/// staying independent from the boundary X1; the quotient by the completed
/// kernel is applied to ⟨P⟩, middle leftovers are dropped, and the output is
/// verified to be a product of isomorphic copies of H1 and H3.
pub fn contract_linked_middle(
    p: &RootedConfiguration,
    markers: &ProductMarkers,
    witness: &[usize],
) -> Result<ContractOutcome> {
    p.ensure_valid()?;
    let f = p.field().clone();
    let n = p.ambient_dim();
    let m = p.core.len();
    let mut owner = vec![0u8; m];
    for (tag, part) in [
        (1u8, &markers.part1),
        (2u8, &markers.part2),
        (3u8, &markers.part3),
    ] {
        for &i in part {
            if i >= m {
                return Err(Error::invalid(format!(
                    "marker index {i} out of range (core has {m} elements)"
                )));
            }
            if owner[i] != 0 {
                return Err(Error::invalid(format!("marker index {i} assigned twice")));
            }
            owner[i] = tag;
        }
    }
    if owner.contains(&0) {
        return Err(Error::invalid("markers do not cover every core element"));
    }
    let sub = |part: &[usize]| -> Result<Configuration> {
        Configuration::new(
            f.clone(),
            n,
            part.iter().map(|&i| p.core.vectors[i].clone()).collect(),
        )
    };
    let f1 = RootedConfiguration::new(sub(&markers.part1)?, p.left.clone(), markers.x1.clone())?;
    let f2 =
        RootedConfiguration::new(sub(&markers.part2)?, markers.x1.clone(), markers.x2.clone())?;
    let f3 = RootedConfiguration::new(sub(&markers.part3)?, markers.x2.clone(), p.right.clone())?;
    let f23 = product(&f2, &f3)
        .map_err(|e| Error::invalid(format!("markers do not present P as a product: {e}")))?;
    let pp = product(&f1, &f23)
        .map_err(|e| Error::invalid(format!("markers do not present P as a product: {e}")))?;
    {
        let mut a = pp.core.vectors.clone();
        let mut b = p.core.vectors.clone();
        a.sort();
        b.sort();
        if a != b || pp.left != p.left || pp.right != p.right {
            return Err(Error::invalid("markers do not reassemble P"));
        }
    }
    let q = f2
        .q()
        .map_err(|_| Error::invalid("middle factor is not a q-patch"))?;

    // Validate the linkedness witness on the middle factor.
    let mid = f2.core.len();
    let mut seen = vec![false; mid];
    for &wi in witness {
        if wi >= mid {
            return Err(Error::invalid(format!(
                "witness index {wi} out of range for the middle core"
            )));
        }
        if seen[wi] {
            return Err(Error::invalid(format!("witness index {wi} repeated")));
        }
        seen[wi] = true;
    }
    let wvecs: Vec<Vector> = witness
        .iter()
        .map(|&wi| f2.core.vectors[wi].clone())
        .collect();
    {
        let wmap = quotient_map(&f, n, &wvecs);
        let li: Vec<Vector> = f2.left.iter().map(|v| wmap.apply(&f, v)).collect();
        let ri: Vec<Vector> = f2.right.iter().map(|v| wmap.apply(&f, v)).collect();
        if li != ri || span(&f, wmap.target_dim, &li).dim() != q {
            return Err(Error::invalid(
                "witness does not make the middle terminals equal and independent",
            ));
        }
    }

    // Complete the witness kernel to dimension dim⟨H2⟩ − q, keeping it
    // independent from span(X1) so the boundary survives the quotient.
    let mut cstar: Vec<usize> = witness.to_vec();
    cstar.sort_unstable();
    let mut cur: Vec<Vector> = wvecs;
    cur.extend(markers.x1.iter().cloned());
    for i in 0..mid {
        if cstar.contains(&i) {
            continue;
        }
        let sp = span(&f, n, &cur);
        let v = &f2.core.vectors[i];
        if !sp.contains(&f, v) {
            cstar.push(i);
            cur.push(v.clone());
        }
    }
    cstar.sort_unstable();
    let cvecs: Vec<Vector> = cstar.iter().map(|&i| f2.core.vectors[i].clone()).collect();
    let d2 = f2.span_dim();
    let ksp = span(&f, n, &cvecs);
    if ksp.dim() != d2 - q {
        return Err(Error::internal(format!(
            "kernel completion reached dimension {} instead of {}",
            ksp.dim(),
            d2 - q
        )));
    }
    let lmap = quotient_map(&f, n, &cvecs);

    // Build the contracted configuration: images of the outer cores (zero
    // images only arise from original loops, which stay loops), terminals
    // carried through.
    let apply_all =
        |vs: &[Vector]| -> Vec<Vector> { vs.iter().map(|v| lmap.apply(&f, v)).collect() };
    let core1_img = apply_all(&f1.core.vectors);
    let core3_img = apply_all(&f3.core.vectors);
    let left_img = apply_all(&p.left);
    let right_img = apply_all(&p.right);
    let mut core_out = core1_img.clone();
    core_out.extend(core3_img.iter().cloned());
    let hprime = RootedConfiguration::new(
        Configuration::new(f.clone(), lmap.target_dim, core_out)?,
        left_img.clone(),
        right_img.clone(),
    )?;
    hprime
        .ensure_valid()
        .map_err(|e| Error::internal(format!("contracted configuration invalid: {e}")))?;

    // Verify membership in 𝒫(H1, H3): the image factors multiply back to the
    // output and are isomorphic to the outer factors.
    let xbar = apply_all(&markers.x1);
    if xbar != apply_all(&markers.x2) {
        return Err(Error::internal(
            "middle boundaries disagree after contraction",
        ));
    }
    let h1p = RootedConfiguration::new(
        Configuration::new(f.clone(), lmap.target_dim, core1_img)?,
        left_img,
        xbar.clone(),
    )?;
    let h3p = RootedConfiguration::new(
        Configuration::new(f.clone(), lmap.target_dim, core3_img)?,
        xbar,
        right_img,
    )?;
    let back = product(&h1p, &h3p).map_err(|e| {
        Error::internal(format!(
            "contracted factors fail the product condition: {e}"
        ))
    })?;
    if back != hprime {
        return Err(Error::internal(
            "contracted factors do not reassemble the output",
        ));
    }
    if !(rooted_iso(&h1p, &f1)? && rooted_iso(&h3p, &f3)?) {
        return Err(Error::internal(
            "contracted factors are not isomorphic to the outer factors",
        ));
    }
    let contracted: Vec<usize> = cstar.iter().map(|&ri| markers.part2[ri]).collect();
    Ok(ContractOutcome {
        result: hprime,
        contracted,
        map: lmap,
    })
}
