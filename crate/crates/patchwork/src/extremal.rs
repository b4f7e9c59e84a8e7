//! Extremal tables and eventual periodicity.
//!
//! A [`ClassSpec`] describes a minor-closed class at desk scale: a field, a
//! branch-width bound, and a list of excluded minors.  [`enumerate_class`]
//! lists the class members of a given rank up to isomorphism (exhaustively
//! for small ranks, in flagged extension mode beyond), [`ex_table`] extracts
//! the extremal function ex(n) = max ε with witnesses, [`fit_periodic`] fits
//! the eventually periodic form Δn + a_i with exact rational arithmetic, and
//! [`grow_family`]/[`verify_extremal_family`] compare patch-generated
//! families against enumerated tables.  [`check_bounded_gap`] reports the
//! exact maximum of |ex(n) − Δn| over a table.

use std::collections::{BTreeMap, HashSet, VecDeque};

use crate::config::Configuration;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::linalg::{projective_points, Vector};
use crate::patch::{compose_power, RootedConfiguration};
use crate::ratio::{rat, rat_int, rational_abs, Rational};
use crate::structure::{branch_width, BwMode, BW_EXACT_GUARD};

/// Largest projective point count for which any enumeration is attempted.
pub const ENUM_POINT_LIMIT: usize = 31;
/// Largest projective point count for which the full subset sweep runs;
/// beyond it (up to [`ENUM_POINT_LIMIT`]) extension mode takes over.
pub const SWEEP_POINT_LIMIT: usize = 15;

/// A minor-closed class of configurations at desk scale: members are the
/// configurations over `field` with branch-width at most `width_bound` and
/// none of `excluded_minors` as a minor.  `rank_cap` bounds enumeration, not
/// membership.
#[derive(Clone, Debug)]
pub struct ClassSpec {
    pub field: Field,
    pub width_bound: usize,
    pub excluded_minors: Vec<Configuration>,
    pub rank_cap: usize,
}

impl ClassSpec {
    /// Normalizes the excluded minors: each is simplified and duplicates
    /// (up to isomorphism) are dropped.
    pub fn new(
        field: Field,
        width_bound: usize,
        excluded_minors: Vec<Configuration>,
        rank_cap: usize,
    ) -> Result<ClassSpec> {
        let mut minors: Vec<Configuration> = vec![];
        let mut keys = HashSet::new();
        for m in excluded_minors {
            if m.field != field {
                return Err(Error::invalid(
                    "excluded minor lives over a different field than the class",
                ));
            }
            let s = m.simplify();
            if keys.insert(s.canonical_key()?) {
                minors.push(s);
            }
        }
        Ok(ClassSpec {
            field,
            width_bound,
            excluded_minors: minors,
            rank_cap,
        })
    }
}

/// One row of an extremal table.
#[derive(Clone, Debug)]
pub struct ExtremalEntry {
    pub ex_value: usize,
    pub witness: Configuration,
    /// False when the underlying enumeration ran in extension mode and is
    /// complete only under the hereditary-growth assumption.
    pub exhaustive: bool,
}

/// The extremal function of a class on an initial range of ranks.
#[derive(Clone, Debug, Default)]
pub struct ExtremalTable {
    pub entries: BTreeMap<usize, ExtremalEntry>,
}

impl ExtremalTable {
    /// The plain n → ex(n) integer map, the shape [`fit_periodic`] consumes.
    pub fn values(&self) -> BTreeMap<usize, i64> {
        self.entries
            .iter()
            .map(|(&n, e)| (n, e.ex_value as i64))
            .collect()
    }
}

/// An exact eventually-periodic fit ex(n) = Δn + a_{n mod p} for n > m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicFit {
    pub delta: Rational,
    pub period: usize,
    /// `offsets[i]` applies to n ≡ i (mod period).
    pub offsets: Vec<Rational>,
    /// All table entries with n > threshold match the fit.
    pub threshold: i64,
    /// True when the fit is supported by at least three entries per residue
    /// beyond the threshold; false marks a best-effort candidate.
    pub exact: bool,
}

impl PeriodicFit {
    /// The fitted value at rank n.
    pub fn value_at(&self, n: usize) -> Rational {
        self.delta * rat_int(n as i64) + self.offsets[n % self.period]
    }
}

/// The members of rank `n`, one per isomorphism class, with the completeness
/// flag of the enumeration mode that produced them.
#[derive(Clone, Debug)]
pub struct ClassEnumeration {
    pub configs: Vec<Configuration>,
    pub exhaustive: bool,
}

// ---------------------------------------------------------------------------
// Membership
// ---------------------------------------------------------------------------

/// Exact class membership: branch-width at most the bound and no excluded
/// minor.  When a search guard blocks the decision the call errors; it never
/// guesses.
pub fn in_class(a: &Configuration, spec: &ClassSpec) -> Result<bool> {
    if a.field != spec.field {
        return Ok(false);
    }
    if !a.is_empty() {
        // An upper bound certifies membership cheaply; only when the
        // heuristic overshoots is the exact (guarded) search needed.
        let h = branch_width(a, BwMode::Heuristic)?;
        if h.width > spec.width_bound {
            if a.len() > BW_EXACT_GUARD {
                return Err(Error::GuardExceeded {
                    what: "exact branch-width decision",
                    size: a.len(),
                    limit: BW_EXACT_GUARD,
                });
            }
            if branch_width(a, BwMode::Exact)?.width > spec.width_bound {
                return Ok(false);
            }
        }
    }
    for m in &spec.excluded_minors {
        if a.is_minor_of_self(m)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

fn projective_point_count(field: &Field, n: usize) -> usize {
    let q = field.order();
    (0..n).map(|i| q.pow(i as u32)).sum()
}

fn config_of_points(field: &Field, dim: usize, points: &[Vector]) -> Configuration {
    Configuration::new(field.clone(), dim, points.to_vec()).expect("points share the ambient dim")
}

/// Depth-first subset sweep below one root point.  Prunes on membership:
/// subsets are deletion minors, so once a set leaves the class every superset
/// has too.
fn sweep_from(
    spec: &ClassSpec,
    n: usize,
    points: &[Vector],
    chosen: &mut Vec<Vector>,
    start: usize,
    out: &mut BTreeMap<Vec<u8>, Configuration>,
) -> Result<()> {
    for i in start..points.len() {
        chosen.push(points[i].clone());
        let cand = config_of_points(&spec.field, n, chosen);
        if in_class(&cand, spec)? {
            if cand.rank() == n {
                out.entry(cand.canonical_key()?).or_insert(cand);
            }
            sweep_from(spec, n, points, chosen, i + 1, out)?;
        }
        chosen.pop();
    }
    Ok(())
}

/// All canonical-key-distinct simple configurations of rank exactly `n` in
/// the class.  Ranks whose projective space has at most
/// [`SWEEP_POINT_LIMIT`] points get a full subset sweep (exhaustive); up to
/// [`ENUM_POINT_LIMIT`] points, members are grown point by point from the
/// rank n−1 members instead and the result is flagged non-exhaustive.
pub fn enumerate_class(spec: &ClassSpec, n: usize) -> Result<ClassEnumeration> {
    enumerate_class_jobs(spec, n, 1)
}

/// [`enumerate_class`] with the subset sweep sharded over `jobs` worker
/// threads by leading point index; results are unioned by canonical key.
pub fn enumerate_class_jobs(spec: &ClassSpec, n: usize, jobs: usize) -> Result<ClassEnumeration> {
    if n > spec.rank_cap {
        return Err(Error::invalid(format!(
            "rank {n} exceeds the class rank cap {}",
            spec.rank_cap
        )));
    }
    if n == 0 {
        let empty = Configuration::new(spec.field.clone(), 0, vec![])?;
        let configs = if in_class(&empty, spec)? {
            vec![empty]
        } else {
            vec![]
        };
        return Ok(ClassEnumeration {
            configs,
            exhaustive: true,
        });
    }
    let count = projective_point_count(&spec.field, n);
    if count > ENUM_POINT_LIMIT {
        return Err(Error::GuardExceeded {
            what: "class enumeration",
            size: count,
            limit: ENUM_POINT_LIMIT,
        });
    }
    if count <= SWEEP_POINT_LIMIT {
        let points = projective_points(&spec.field, n);
        let jobs = jobs.max(1).min(points.len().max(1));
        let mut found: BTreeMap<Vec<u8>, Configuration> = BTreeMap::new();
        if jobs <= 1 {
            let mut chosen = vec![];
            sweep_from(spec, n, &points, &mut chosen, 0, &mut found)?;
        } else {
            let shards: Vec<Result<BTreeMap<Vec<u8>, Configuration>>> =
                std::thread::scope(|scope| {
                    let handles: Vec<_> = (0..jobs)
                        .map(|j| {
                            let points = &points;
                            scope.spawn(move || {
                                let mut out = BTreeMap::new();
                                for root in (j..points.len()).step_by(jobs) {
                                    let mut chosen = vec![points[root].clone()];
                                    let cand = config_of_points(&spec.field, n, &chosen);
                                    if in_class(&cand, spec)? {
                                        if cand.rank() == n {
                                            out.entry(cand.canonical_key()?).or_insert(cand);
                                        }
                                        sweep_from(
                                            spec,
                                            n,
                                            points,
                                            &mut chosen,
                                            root + 1,
                                            &mut out,
                                        )?;
                                    }
                                }
                                Ok(out)
                            })
                        })
                        .collect();
                    handles
                        .into_iter()
                        .map(|h| h.join().expect("sweep worker panicked"))
                        .collect()
                });
            for shard in shards {
                for (k, v) in shard? {
                    found.entry(k).or_insert(v);
                }
            }
        }
        return Ok(ClassEnumeration {
            configs: found.into_values().collect(),
            exhaustive: true,
        });
    }
    // Extension mode: grow rank-n members point by point from rank n−1.
    let prev = enumerate_class_jobs(spec, n - 1, jobs)?;
    let points = projective_points(&spec.field, n);
    let mut found: BTreeMap<Vec<u8>, Configuration> = BTreeMap::new();
    let mut queue: VecDeque<Configuration> = VecDeque::new();
    for m in &prev.configs {
        let mut vecs: Vec<Vector> = m
            .vectors
            .iter()
            .map(|v| {
                let mut c = v.coords.clone();
                c.push(crate::field::Fe(0));
                Vector::new(c)
            })
            .collect();
        vecs.push(Vector::unit(n, n - 1));
        let seed = Configuration::new(spec.field.clone(), n, vecs)?;
        if in_class(&seed, spec)? {
            let key = seed.canonical_key()?;
            if let std::collections::btree_map::Entry::Vacant(e) = found.entry(key) {
                e.insert(seed.clone());
                queue.push_back(seed);
            }
        }
    }
    while let Some(cur) = queue.pop_front() {
        for p in &points {
            if cur.vectors.contains(p) {
                continue;
            }
            let mut vecs = cur.vectors.clone();
            vecs.push(p.clone());
            let cand = Configuration::new(spec.field.clone(), n, vecs)?;
            if in_class(&cand, spec)? {
                let key = cand.canonical_key()?;
                if let std::collections::btree_map::Entry::Vacant(e) = found.entry(key) {
                    e.insert(cand.clone());
                    queue.push_back(cand);
                }
            }
        }
    }
    Ok(ClassEnumeration {
        configs: found.into_values().collect(),
        exhaustive: false,
    })
}

// ---------------------------------------------------------------------------
// Extremal table
// ---------------------------------------------------------------------------

/// ex(n) with a witness for every n ≤ n_max at which the class has members;
/// stops at the first empty rank (a member of rank n+1 always has a rank-n
/// deletion minor, so nothing exists beyond it either).
pub fn ex_table(spec: &ClassSpec, n_max: usize) -> Result<ExtremalTable> {
    ex_table_jobs(spec, n_max, 1)
}

/// [`ex_table`] with sharded enumeration.
pub fn ex_table_jobs(spec: &ClassSpec, n_max: usize, jobs: usize) -> Result<ExtremalTable> {
    let mut entries = BTreeMap::new();
    for n in 0..=n_max {
        let enumeration = enumerate_class_jobs(spec, n, jobs)?;
        let best = enumeration
            .configs
            .iter()
            .max_by_key(|c| c.epsilon())
            .cloned();
        match best {
            None => break,
            Some(witness) => {
                entries.insert(
                    n,
                    ExtremalEntry {
                        ex_value: witness.epsilon(),
                        witness,
                        exhaustive: enumeration.exhaustive,
                    },
                );
            }
        }
    }
    Ok(ExtremalTable { entries })
}

// ---------------------------------------------------------------------------
// Periodic fitting
// ---------------------------------------------------------------------------

struct FitCandidate {
    fit: PeriodicFit,
    valid: bool,
}

fn fit_with_period(table: &BTreeMap<usize, i64>, p: usize) -> Option<FitCandidate> {
    let mut by_residue: Vec<Vec<(usize, i64)>> = vec![vec![]; p];
    for (&n, &v) in table {
        by_residue[n % p].push((n, v));
    }
    // Slope per residue from its last two entries; all must agree.
    let mut delta: Option<Rational> = None;
    for entries in &by_residue {
        if entries.len() < 2 {
            return None;
        }
        let (n1, v1) = entries[entries.len() - 2];
        let (n2, v2) = entries[entries.len() - 1];
        let slope = rat(v2 - v1, (n2 - n1) as i64);
        match delta {
            None => delta = Some(slope),
            Some(d) if d == slope => {}
            Some(_) => return None,
        }
    }
    let delta = delta.expect("period >= 1 has a residue");
    let mut offsets = Vec::with_capacity(p);
    for entries in &by_residue {
        let (n, v) = entries[entries.len() - 1];
        offsets.push(rat_int(v) - delta * rat_int(n as i64));
    }
    let fits = |n: usize, v: i64| rat_int(v) == delta * rat_int(n as i64) + offsets[n % p];
    let threshold = table
        .iter()
        .filter(|&(&n, &v)| !fits(n, v))
        .map(|(&n, _)| n as i64)
        .max()
        .unwrap_or_else(|| *table.keys().next().expect("table checked non-empty") as i64 - 1);
    let valid = (0..p).all(|i| {
        by_residue[i]
            .iter()
            .filter(|&&(n, _)| n as i64 > threshold)
            .count()
            >= 3
    });
    Some(FitCandidate {
        fit: PeriodicFit {
            delta,
            period: p,
            offsets,
            threshold,
            exact: valid,
        },
        valid,
    })
}

/// Fit the eventually periodic form an extremal sequence settles into:
/// the smallest period p ≤ p_max whose residue classes share one exact
/// rational slope Δ on a tail holding at least three entries per residue,
/// with the smallest consistent threshold m.  When no period qualifies, the
/// best candidate (longest consistent tail, then smallest period) is
/// returned with `exact = false`.
pub fn fit_periodic(table: &BTreeMap<usize, i64>, p_max: usize) -> Result<PeriodicFit> {
    if p_max < 1 {
        return Err(Error::invalid("p_max must be at least 1"));
    }
    if table.len() < 3 * p_max {
        return Err(Error::invalid(format!(
            "fitting up to period {p_max} needs at least {} entries, got {}",
            3 * p_max,
            table.len()
        )));
    }
    let mut best: Option<PeriodicFit> = None;
    for p in 1..=p_max {
        let Some(cand) = fit_with_period(table, p) else {
            continue;
        };
        if cand.valid {
            return Ok(cand.fit);
        }
        let better = match &best {
            None => true,
            Some(b) => (cand.fit.threshold, cand.fit.period) < (b.threshold, b.period),
        };
        if better {
            best = Some(cand.fit);
        }
    }
    best.ok_or_else(|| {
        Error::internal(
            "period 1 always yields a candidate on a table with >= 2 entries".to_string(),
        )
    })
}

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

/// The configuration G1 ∘ H^L ∘ G2 together with its dimension and ε.
#[derive(Clone, Debug)]
pub struct FamilyMember {
    pub config: Configuration,
    pub dim: usize,
    pub epsilon: usize,
}

/// Compose G1 ∘ H^L ∘ G2 and recount its statistics directly.  G1 must span;
/// the composed core must span its space too for the dimension bookkeeping
/// n = dim⟨G1⟩ + L(dim⟨H⟩ − q) + dim⟨G2⟩ − q to be meaningful, and both
/// facts are checked.
pub fn grow_family(
    g1: &RootedConfiguration,
    h: &RootedConfiguration,
    g2: &RootedConfiguration,
    l: usize,
) -> Result<FamilyMember> {
    if !g1.is_spanning() {
        return Err(Error::invalid(
            "G1 must be spanning (the family dimension bookkeeping depends on it)",
        ));
    }
    let composed = compose_power(g1, h, l, g2)?;
    let config = composed.core.clone();
    let dim = config.rank();
    if dim != composed.span_dim() {
        // Validity forces R ⊆ ⟨A ∪ L⟩ in every factor, so a spanning G1
        // propagates through the whole composition; reaching here is a bug.
        return Err(Error::internal(format!(
            "composed core spans only {dim} of {} dimensions despite a spanning G1",
            composed.span_dim()
        )));
    }
    let q = g1.right.len();
    let predicted = g1.span_dim() + l * (h.span_dim() - q) + g2.span_dim() - q;
    if dim != predicted {
        return Err(Error::internal(format!(
            "dimension bookkeeping mismatch: composed rank {dim}, predicted {predicted}"
        )));
    }
    let epsilon = config.epsilon();
    Ok(FamilyMember {
        config,
        dim,
        epsilon,
    })
}

/// One rank compared between a patch family and an extremal table.
#[derive(Clone, Debug)]
pub struct FamilyRow {
    pub l: usize,
    pub n: usize,
    pub family_epsilon: usize,
    pub ex_value: usize,
    pub equal: bool,
    pub member_in_class: bool,
}

/// Per-rank comparison of the family G1 ∘ H^L ∘ G2 against a table: for each
/// L whose composed dimension lands inside the table, report ε(family) vs
/// ex(n), whether they agree, and whether the family member itself passes
/// membership.
pub fn verify_extremal_family(
    spec: &ClassSpec,
    g1: &RootedConfiguration,
    h: &RootedConfiguration,
    g2: &RootedConfiguration,
    table: &ExtremalTable,
) -> Result<Vec<FamilyRow>> {
    let Some(&n_max) = table.entries.keys().next_back() else {
        return Err(Error::invalid("the extremal table is empty"));
    };
    let mut rows = vec![];
    for l in 0..=n_max + 1 {
        let member = grow_family(g1, h, g2, l)?;
        if member.dim > n_max {
            break;
        }
        if let Some(entry) = table.entries.get(&member.dim) {
            let member_in_class = in_class(&member.config, spec)?;
            rows.push(FamilyRow {
                l,
                n: member.dim,
                family_epsilon: member.epsilon,
                ex_value: entry.ex_value,
                equal: member.epsilon == entry.ex_value,
                member_in_class,
            });
        }
        if h.span_dim() == g1.right.len() {
            break; // H adds no dimension; larger L only repeats the rank.
        }
    }
    Ok(rows)
}

/// The exact maximum of |ex(n) − Δn| over the table and the first n
/// attaining it.
pub fn check_bounded_gap(
    table: &BTreeMap<usize, i64>,
    delta: Rational,
) -> Result<(Rational, usize)> {
    if table.is_empty() {
        return Err(Error::invalid("the table is empty"));
    }
    let mut best: Option<(Rational, usize)> = None;
    for (&n, &v) in table {
        let gap = rational_abs(&(rat_int(v) - delta * rat_int(n as i64)));
        match &best {
            Some((g, _)) if *g >= gap => {}
            _ => best = Some((gap, n)),
        }
    }
    Ok(best.expect("non-empty table"))
}
