//! Configurations: finite multisets of vectors over a small finite field.
//!
//! A configuration represents a matroid through its vectors.  Element order is
//! preserved (elements are addressed by index) and multiset semantics apply:
//! equal vectors may appear several times.  Loops (zero vectors) are allowed
//! in inputs; minors discard them, and the point count `epsilon` never counts
//! them.
//!
//! Searches over minors and isomorphisms are exact and guarded: when an input
//! is too large for the brute-force search the operation returns a guard
//! error instead of an approximation.

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::linalg::{quotient_map, span, BasisSolver, LinearMap, Subspace, Vector};
use crate::ratio::{rat_int, Rational};
use std::collections::HashMap;

/// Elements-after-simplification limit for minor / isomorphism / pruning
/// searches.
pub const SEARCH_GUARD: usize = 12;

/// A multiset of vectors in `F^ambient_dim`.
#[derive(Clone, PartialEq, Eq)]
pub struct Configuration {
    pub field: Field,
    pub ambient_dim: usize,
    pub vectors: Vec<Vector>,
}

impl std::fmt::Debug for Configuration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Configuration({:?}, dim {}, {:?})",
            self.field, self.ambient_dim, self.vectors
        )
    }
}

/// Witness that `small` is a minor of `big`: contract these indices of `big`,
/// delete those, and the resulting configuration is isomorphic to `small`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinorWitness {
    pub contract: Vec<usize>,
    pub delete: Vec<usize>,
}

/// A minor violating the pruning inequality: contracting/deleting as listed
/// loses fewer points than the density bound demands.
#[derive(Clone, Debug)]
pub struct PruneViolation {
    pub contract: Vec<usize>,
    pub delete: Vec<usize>,
    pub minor_epsilon: usize,
    pub minor_rank: usize,
}

/// One greedy pruning step: the violation taken and the state after taking it.
#[derive(Clone, Debug)]
pub struct PruneStep {
    pub violation: PruneViolation,
    pub epsilon_after: usize,
    pub rank_after: usize,
}

impl Configuration {
    pub fn new(field: Field, ambient_dim: usize, vectors: Vec<Vector>) -> Result<Self> {
        for v in &vectors {
            if v.dim() != ambient_dim {
                return Err(Error::invalid(format!(
                    "vector {v:?} has dimension {} != ambient {ambient_dim}",
                    v.dim()
                )));
            }
            for &c in &v.coords {
                if c.0 as usize >= field.order() {
                    return Err(Error::invalid(format!(
                        "coordinate {c} out of range for {field:?}"
                    )));
                }
            }
        }
        Ok(Configuration {
            field,
            ambient_dim,
            vectors,
        })
    }

    /// Convenience constructor from raw coordinate indices.
    pub fn from_rows(field: Field, ambient_dim: usize, rows: &[&[u8]]) -> Result<Self> {
        let vectors = rows.iter().map(|r| Vector::from_indices(r)).collect();
        Configuration::new(field, ambient_dim, vectors)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn span(&self) -> Subspace {
        span(&self.field, self.ambient_dim, &self.vectors)
    }

    /// Rank of the represented matroid: dimension of the span.
    pub fn rank(&self) -> usize {
        self.span().dim()
    }

    /// Number of rank-one flats: distinct projective points among the nonzero
    /// vectors.  Loops and parallel copies do not count.
    pub fn epsilon(&self) -> usize {
        self.point_multiplicities().len()
    }

    /// Projective point -> multiplicity map over the nonzero vectors.
    pub fn point_multiplicities(&self) -> HashMap<Vector, usize> {
        let mut m = HashMap::new();
        for v in &self.vectors {
            if let Some(rep) = v.projective_rep(&self.field) {
                *m.entry(rep).or_insert(0) += 1;
            }
        }
        m
    }

    /// Distinct projective points, in order of first occurrence.
    pub fn distinct_points(&self) -> Vec<Vector> {
        let mut seen = std::collections::HashSet::new();
        let mut out = vec![];
        for v in &self.vectors {
            if let Some(rep) = v.projective_rep(&self.field) {
                if seen.insert(rep.clone()) {
                    out.push(rep);
                }
            }
        }
        out
    }

    pub fn loop_count(&self) -> usize {
        self.vectors.iter().filter(|v| v.is_zero()).count()
    }

    /// The simplification: one representative per projective point, loops
    /// dropped, in order of first occurrence.
    pub fn simplify(&self) -> Configuration {
        Configuration {
            field: self.field.clone(),
            ambient_dim: self.ambient_dim,
            vectors: self.distinct_points(),
        }
    }

    /// Whether the configuration is simple: no loops, no parallel vectors.
    pub fn is_simple(&self) -> bool {
        self.loop_count() == 0 && self.epsilon() == self.len()
    }

    /// Density epsilon / rank as an exact rational.  Errors on rank zero.
    pub fn density(&self) -> Result<Rational> {
        let r = self.rank();
        if r == 0 {
            return Err(Error::invalid(
                "density undefined for a rank-zero configuration".to_string(),
            ));
        }
        Ok(Rational::new(self.epsilon() as i64, r as i64))
    }

    fn check_subset(&self, subset: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.len()];
        for &i in subset {
            if i >= self.len() {
                return Err(Error::invalid(format!(
                    "element index {i} out of range (size {})",
                    self.len()
                )));
            }
            if seen[i] {
                return Err(Error::invalid(format!("duplicate element index {i}")));
            }
            seen[i] = true;
        }
        Ok(())
    }

    fn vectors_at(&self, idxs: &[usize]) -> Vec<Vector> {
        idxs.iter().map(|&i| self.vectors[i].clone()).collect()
    }

    fn complement(&self, subset: &[usize]) -> Vec<usize> {
        let mut inx = vec![true; self.len()];
        for &i in subset {
            inx[i] = false;
        }
        (0..self.len()).filter(|&i| inx[i]).collect()
    }

    /// Connectivity of the sub-multiset given by `subset` (element indices):
    /// the dimension of span(X) ∩ span(A \ X).  No "+1" in this convention.
    pub fn lambda(&self, subset: &[usize]) -> Result<usize> {
        self.check_subset(subset)?;
        let comp = self.complement(subset);
        let sx = span(&self.field, self.ambient_dim, &self.vectors_at(subset));
        let sy = span(&self.field, self.ambient_dim, &self.vectors_at(&comp));
        Ok(crate::linalg::intersect(&self.field, &sx, &sy).dim())
    }

    /// Contract the elements at `contract` and delete those at `delete`.
    /// Returns the quotient map (kernel = span of the contracted vectors) and
    /// the configuration of nonzero images of the remaining elements; elements
    /// whose image is zero become loops and are discarded.
    pub fn take_minor(
        &self,
        contract: &[usize],
        delete: &[usize],
    ) -> Result<(Configuration, LinearMap)> {
        self.check_subset(contract)?;
        self.check_subset(delete)?;
        if contract.iter().any(|i| delete.contains(i)) {
            return Err(Error::invalid(
                "contract and delete sets must be disjoint".to_string(),
            ));
        }
        let map = quotient_map(&self.field, self.ambient_dim, &self.vectors_at(contract));
        let mut kept = vec![];
        for i in 0..self.len() {
            if contract.contains(&i) || delete.contains(&i) {
                continue;
            }
            let img = map.apply(&self.field, &self.vectors[i]);
            if !img.is_zero() {
                kept.push(img);
            }
        }
        let minor = Configuration {
            field: self.field.clone(),
            ambient_dim: map.target_dim,
            vectors: kept,
        };
        Ok((minor, map))
    }

    fn guard(&self, what: &'static str) -> Result<()> {
        let size = self.epsilon();
        if size > SEARCH_GUARD {
            return Err(Error::GuardExceeded {
                what,
                size,
                limit: SEARCH_GUARD,
            });
        }
        Ok(())
    }

    /// Sorted multiset of parallel-class multiplicities (cheap invariant).
    fn multiplicity_profile(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.point_multiplicities().values().copied().collect();
        v.sort_unstable();
        v
    }

    /// Nonzero vectors (with multiplicity) in element order.
    fn nonloop_vectors(&self) -> Vec<Vector> {
        self.vectors
            .iter()
            .filter(|v| !v.is_zero())
            .cloned()
            .collect()
    }

    /// A basis of the span chosen greedily from the elements themselves.
    fn element_basis(&self) -> Vec<Vector> {
        let f = &self.field;
        let mut basis: Vec<Vector> = vec![];
        let mut current = Subspace::zero(self.ambient_dim);
        for v in &self.vectors {
            if !v.is_zero() && !current.contains(f, v) {
                basis.push(v.clone());
                let mut rows = basis.clone();
                rows.sort();
                current = span(f, self.ambient_dim, &basis);
                let _ = rows;
            }
        }
        basis
    }

    /// Decide isomorphism: an invertible linear map between the spans carrying
    /// one multiset onto the other.  Exhaustive over images of an element
    /// basis; guarded by [`SEARCH_GUARD`] on the point counts.
    pub fn is_isomorphic(&self, other: &Configuration) -> Result<bool> {
        if self.field != other.field {
            return Ok(false);
        }
        if self.loop_count() != other.loop_count()
            || self.len() != other.len()
            || self.rank() != other.rank()
            || self.epsilon() != other.epsilon()
            || self.multiplicity_profile() != other.multiplicity_profile()
        {
            return Ok(false);
        }
        let r = self.rank();
        if r == 0 {
            return Ok(true); // only loops on both sides, counts equal
        }
        self.guard("is_isomorphic")?;
        other.guard("is_isomorphic")?;
        let basis = self.element_basis();
        debug_assert_eq!(basis.len(), r);
        let solver = BasisSolver::new(&self.field, &basis).expect("element basis independent");
        let my_coords: Vec<Vec<Fe>> = self
            .nonloop_vectors()
            .iter()
            .map(|v| solver.solve(&self.field, v).expect("element in own span"))
            .collect();
        let candidates = other.distinct_points_with_scalings();
        let mut target_bag: HashMap<Vector, usize> = HashMap::new();
        for v in other.nonloop_vectors() {
            *target_bag.entry(v).or_insert(0) += 1;
        }
        Ok(search_basis_images(
            &self.field,
            other.ambient_dim,
            &candidates,
            r,
            &mut |tuple| check_multiset_map(&self.field, &my_coords, tuple, &target_bag, true),
        ))
    }

    /// All nonzero vectors occurring in the configuration, each in every
    /// nonzero scaling that actually occurs... for basis-image candidates we
    /// need the actual element vectors (distinct values).
    fn distinct_points_with_scalings(&self) -> Vec<Vector> {
        let mut seen = std::collections::HashSet::new();
        let mut out = vec![];
        for v in &self.vectors {
            if !v.is_zero() && seen.insert(v.clone()) {
                out.push(v.clone());
            }
        }
        out
    }

    /// Canonical byte key: equal keys exactly for isomorphic configurations.
    /// Minimizes the serialized coordinate multiset over all ordered element
    /// bases of the span.
    pub fn canonical_key(&self) -> Result<Vec<u8>> {
        self.guard("canonical_key")?;
        let spec = self.field.spec();
        let r = self.rank();
        let nonloops = self.nonloop_vectors();
        let mut header = vec![
            spec.p,
            spec.k,
            r as u8,
            self.loop_count() as u8,
            nonloops.len() as u8,
        ];
        if r == 0 {
            return Ok(header);
        }
        let candidates = self.distinct_points_with_scalings();
        let mut best: Option<Vec<u8>> = None;
        search_basis_images(
            &self.field,
            self.ambient_dim,
            &candidates,
            r,
            &mut |tuple| {
                let solver = BasisSolver::new(&self.field, tuple).expect("independent tuple");
                let mut coords: Vec<Vec<u8>> = nonloops
                    .iter()
                    .map(|v| {
                        solver
                            .solve(&self.field, v)
                            .expect("element inside span")
                            .iter()
                            .map(|fe| fe.0)
                            .collect()
                    })
                    .collect();
                coords.sort_unstable();
                let mut body = Vec::with_capacity(nonloops.len() * r);
                for c in &coords {
                    body.extend_from_slice(c);
                }
                match &best {
                    Some(b) if *b <= body => {}
                    _ => best = Some(body),
                }
                false // keep searching all tuples
            },
        );
        header.extend(best.expect("rank > 0 has at least one basis"));
        Ok(header)
    }

    /// Is `small` a minor of `self`?  Searches contract sets (one
    /// representative per parallel class suffices because extra copies become
    /// loops) and then embeds `small` into the image.  Any returned witness is
    /// re-verified via `take_minor` + `is_isomorphic`.
    pub fn is_minor_of_self(&self, small: &Configuration) -> Result<Option<MinorWitness>> {
        if small.field != self.field {
            return Ok(None);
        }
        if small.loop_count() > 0 {
            // Minors discard loops, so a loopy pattern never matches.
            return Ok(None);
        }
        if small.rank() > self.rank() || small.epsilon() > self.epsilon() {
            return Ok(None);
        }
        self.guard("is_minor")?;
        small.guard("is_minor")?;
        let f = &self.field;
        // Representative index of each parallel class (first occurrence).
        let mut rep_of_point: HashMap<Vector, usize> = HashMap::new();
        let mut reps: Vec<usize> = vec![];
        for (i, v) in self.vectors.iter().enumerate() {
            if let Some(p) = v.projective_rep(f) {
                rep_of_point.entry(p).or_insert_with(|| {
                    reps.push(i);
                    i
                });
            }
        }
        let max_contract_rank = self.rank() - small.rank();
        let small_rank = small.rank();
        let small_basis = small.element_basis();
        let small_solver_basis = small_basis.clone();
        let small_nonloops = small.nonloop_vectors();

        for mask in 0u64..(1u64 << reps.len()) {
            let contract: Vec<usize> = reps
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, &i)| i)
                .collect();
            let cspan = span(f, self.ambient_dim, &self.vectors_at(&contract));
            if cspan.dim() > max_contract_rank || cspan.dim() != contract.len() {
                // Dependent contract sets repeat a span already visited.
                continue;
            }
            let map = quotient_map(f, self.ambient_dim, &self.vectors_at(&contract));
            // Images of non-contracted elements, tracked by original index.
            let mut img: Vec<(usize, Vector)> = vec![];
            for i in 0..self.len() {
                if contract.contains(&i) {
                    continue;
                }
                let w = map.apply(f, &self.vectors[i]);
                if !w.is_zero() {
                    img.push((i, w));
                }
            }
            if img.len() < small_nonloops.len() {
                continue;
            }
            let mut img_bag: HashMap<Vector, usize> = HashMap::new();
            for (_, w) in &img {
                *img_bag.entry(w.clone()).or_insert(0) += 1;
            }
            let mut img_distinct: Vec<Vector> = vec![];
            {
                let mut seen = std::collections::HashSet::new();
                for (_, w) in &img {
                    if seen.insert(w.clone()) {
                        img_distinct.push(w.clone());
                    }
                }
            }
            let solver = match BasisSolver::new(f, &small_solver_basis) {
                Some(s) => s,
                None => unreachable!("element basis independent"),
            };
            let small_coords: Vec<Vec<Fe>> = small_nonloops
                .iter()
                .map(|v| solver.solve(f, v).expect("in span"))
                .collect();
            let mut assigned: Option<Vec<Vector>> = None;
            search_basis_images(f, map.target_dim, &img_distinct, small_rank, &mut |tuple| {
                if let Some(images) = multiset_map_images(f, &small_coords, tuple, &img_bag, false)
                {
                    assigned = Some(images);
                    true
                } else {
                    false
                }
            });
            if let Some(images) = assigned {
                // Convert image multiset to kept original indices.
                let mut need: HashMap<Vector, usize> = HashMap::new();
                for w in &images {
                    *need.entry(w.clone()).or_insert(0) += 1;
                }
                let mut keep: Vec<usize> = vec![];
                for (i, w) in &img {
                    if let Some(cnt) = need.get_mut(w) {
                        if *cnt > 0 {
                            *cnt -= 1;
                            keep.push(*i);
                        }
                    }
                }
                let delete: Vec<usize> = (0..self.len())
                    .filter(|i| !contract.contains(i) && !keep.contains(i))
                    .collect();
                let witness = MinorWitness { contract, delete };
                // Honest re-verification through the public path.
                let (minor, _) = self.take_minor(&witness.contract, &witness.delete)?;
                if minor.is_isomorphic(small)? {
                    return Ok(Some(witness));
                } else {
                    return Err(Error::internal(
                        "minor witness failed re-verification".to_string(),
                    ));
                }
            }
        }
        Ok(None)
    }

    /// Pruning check: find a minor `N` with rank(N) >= rank(A) - k violating
    /// eps(A) - eps(N) >= (d(A) - delta) (rank(A) - rank(N)).  Returns the
    /// first violation in a deterministic scan order, or `None` if the
    /// configuration is (delta, k)-pruned.
    pub fn is_pruned(&self, delta: Rational, k: usize) -> Result<Option<PruneViolation>> {
        if delta < rat_int(0) {
            return Err(Error::invalid("delta must be nonnegative".to_string()));
        }
        let r = self.rank();
        if r == 0 {
            return Err(Error::invalid(
                "pruning undefined for a rank-zero configuration".to_string(),
            ));
        }
        self.guard("is_pruned")?;
        let f = &self.field;
        let eps = self.epsilon() as i64;
        let d = self.density()?;
        let slope = d - delta;

        // Work at the level of parallel classes: contracting extra copies of
        // a point changes nothing, and deleting some-but-not-all copies
        // changes nothing, so each class is kept, contracted, or deleted
        // entirely.
        let mut class_members: Vec<Vec<usize>> = vec![];
        {
            let mut index_of: HashMap<Vector, usize> = HashMap::new();
            for (i, v) in self.vectors.iter().enumerate() {
                if let Some(p) = v.projective_rep(f) {
                    let slot = *index_of.entry(p).or_insert_with(|| {
                        class_members.push(vec![]);
                        class_members.len() - 1
                    });
                    class_members[slot].push(i);
                }
            }
        }
        let nclasses = class_members.len();
        for cmask in 0u64..(1u64 << nclasses) {
            let contract_classes: Vec<usize> =
                (0..nclasses).filter(|b| cmask >> b & 1 == 1).collect();
            let contract: Vec<usize> = contract_classes
                .iter()
                .map(|&c| class_members[c][0])
                .collect();
            let cspan = span(f, self.ambient_dim, &self.vectors_at(&contract));
            if cspan.dim() > k || cspan.dim() != contract.len() {
                continue; // too deep, or same span as a smaller contract set
            }
            let map = quotient_map(f, self.ambient_dim, &self.vectors_at(&contract));
            // Image point of each surviving class (zero images vanish).
            let survivors: Vec<usize> = (0..nclasses)
                .filter(|c| !contract_classes.contains(c))
                .collect();
            let images: Vec<(usize, Vector)> = survivors
                .iter()
                .filter_map(|&c| {
                    let w = map.apply(f, &self.vectors[class_members[c][0]]);
                    w.projective_rep(f).map(|p| (c, p))
                })
                .collect();
            for dmask in 0u64..(1u64 << images.len()) {
                let kept: Vec<&(usize, Vector)> = images
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| dmask >> b & 1 == 0)
                    .map(|(_, x)| x)
                    .collect();
                let kept_points: Vec<Vector> = kept.iter().map(|(_, p)| p.clone()).collect();
                let minor_rank = span(f, map.target_dim, &kept_points).dim();
                if minor_rank + k < r {
                    continue;
                }
                let mut distinct = kept_points.clone();
                distinct.sort();
                distinct.dedup();
                let minor_eps = distinct.len() as i64;
                let lhs = rat_int(eps - minor_eps);
                let rhs = slope * rat_int((r - minor_rank) as i64);
                if lhs < rhs {
                    let deleted_classes: Vec<usize> = images
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| dmask >> b & 1 == 1)
                        .map(|(_, (c, _))| *c)
                        .collect();
                    let delete: Vec<usize> = deleted_classes
                        .iter()
                        .flat_map(|&c| class_members[c].iter().copied())
                        .collect();
                    return Ok(Some(PruneViolation {
                        contract,
                        delete,
                        minor_epsilon: minor_eps as usize,
                        minor_rank,
                    }));
                }
            }
        }
        Ok(None)
    }

    /// Greedy pruning: repeatedly replace the configuration by a violating
    /// minor until it is (delta, k)-pruned.  The density strictly increases
    /// at every step (machine-checked); rank strictly decreases, so the loop
    /// terminates.
    pub fn prune(&self, delta: Rational, k: usize) -> Result<(Configuration, Vec<PruneStep>)> {
        let mut current = self.clone();
        let mut steps = vec![];
        loop {
            let Some(violation) = current.is_pruned(delta, k)? else {
                return Ok((current, steps));
            };
            let before = current.density()?;
            let (next, _) = current.take_minor(&violation.contract, &violation.delete)?;
            if next.rank() == 0 {
                return Err(Error::internal(
                    "pruning step produced a rank-zero minor".to_string(),
                ));
            }
            let after = next.density()?;
            if after <= before {
                return Err(Error::internal(format!(
                    "pruning step did not increase density ({before} -> {after})"
                )));
            }
            steps.push(PruneStep {
                violation,
                epsilon_after: next.epsilon(),
                rank_after: next.rank(),
            });
            current = next;
        }
    }
}

/// Search over ordered independent `r`-tuples from `candidates` (vectors in a
/// space of dimension `ambient`).  Calls `visit` on each tuple; stops early
/// when `visit` returns true.  Returns whether any visit succeeded.
fn search_basis_images(
    f: &Field,
    ambient: usize,
    candidates: &[Vector],
    r: usize,
    visit: &mut dyn FnMut(&[Vector]) -> bool,
) -> bool {
    fn rec(
        f: &Field,
        ambient: usize,
        candidates: &[Vector],
        r: usize,
        chosen: &mut Vec<Vector>,
        used: &mut Vec<bool>,
        visit: &mut dyn FnMut(&[Vector]) -> bool,
    ) -> bool {
        if chosen.len() == r {
            return visit(chosen);
        }
        let current = span(f, ambient, chosen);
        for i in 0..candidates.len() {
            if used[i] || current.contains(f, &candidates[i]) {
                continue;
            }
            used[i] = true;
            chosen.push(candidates[i].clone());
            if rec(f, ambient, candidates, r, chosen, used, visit) {
                return true;
            }
            chosen.pop();
            used[i] = false;
        }
        false
    }
    let mut chosen = vec![];
    let mut used = vec![false; candidates.len()];
    rec(f, ambient, candidates, r, &mut chosen, &mut used, visit)
}

/// Map every source element (given by its coordinates in the source basis)
/// through the candidate basis images and check the resulting multiset
/// against `target_bag`.  With `exact` the bags must be equal; otherwise the
/// image must be contained in the bag.
fn check_multiset_map(
    f: &Field,
    src_coords: &[Vec<Fe>],
    basis_images: &[Vector],
    target_bag: &HashMap<Vector, usize>,
    exact: bool,
) -> bool {
    multiset_map_images(f, src_coords, basis_images, target_bag, exact).is_some()
}

fn multiset_map_images(
    f: &Field,
    src_coords: &[Vec<Fe>],
    basis_images: &[Vector],
    target_bag: &HashMap<Vector, usize>,
    exact: bool,
) -> Option<Vec<Vector>> {
    let ambient = basis_images.first().map_or(0, |v| v.dim());
    let mut remaining: HashMap<&Vector, usize> = target_bag.iter().map(|(k, &v)| (k, v)).collect();
    let mut images = Vec::with_capacity(src_coords.len());
    for coords in src_coords {
        let mut w = Vector::zero(ambient);
        for (c, b) in coords.iter().zip(basis_images) {
            if *c != Fe(0) {
                w = w.add_scaled(f, b, *c);
            }
        }
        match remaining.get_mut(&w) {
            Some(cnt) if *cnt > 0 => *cnt -= 1,
            _ => return None,
        }
        images.push(w);
    }
    if exact && remaining.values().any(|&c| c > 0) {
        return None;
    }
    Some(images)
}

/// Enumerate one representative per isomorphism class of simple
/// configurations over `field` with at most `max_elements` elements and rank
/// at most `max_rank`.  Representatives are full-rank in their ambient space
/// (ambient dimension = rank).  Built by point extension with canonical-key
/// deduplication.
pub fn enumerate_simple_configs(
    field: &Field,
    max_elements: usize,
    max_rank: usize,
) -> Result<Vec<Configuration>> {
    let empty = Configuration {
        field: field.clone(),
        ambient_dim: 0,
        vectors: vec![],
    };
    let mut all = vec![empty.clone()];
    let mut frontier = vec![empty];
    let mut seen = std::collections::HashSet::new();
    while let Some(cfg) = frontier.pop() {
        if cfg.len() == max_elements {
            continue;
        }
        let r = cfg.ambient_dim;
        let mut candidates: Vec<Configuration> = vec![];
        // (a) add a projective point inside the current span.
        for p in crate::linalg::projective_points(field, r) {
            if cfg.vectors.contains(&p) {
                continue;
            }
            let mut vectors = cfg.vectors.clone();
            vectors.push(p);
            candidates.push(Configuration {
                field: field.clone(),
                ambient_dim: r,
                vectors,
            });
        }
        // (b) extend the ambient space and add a new independent point;
        // up to isomorphism the new point is the fresh unit vector.
        if r < max_rank {
            let mut vectors: Vec<Vector> = cfg
                .vectors
                .iter()
                .map(|v| {
                    let mut c = v.coords.clone();
                    c.push(Fe(0));
                    Vector::new(c)
                })
                .collect();
            vectors.push(Vector::unit(r + 1, r));
            candidates.push(Configuration {
                field: field.clone(),
                ambient_dim: r + 1,
                vectors,
            });
        }
        for cand in candidates {
            let key = cand.canonical_key()?;
            if seen.insert(key) {
                all.push(cand.clone());
                frontier.push(cand);
            }
        }
    }
    Ok(all)
}
