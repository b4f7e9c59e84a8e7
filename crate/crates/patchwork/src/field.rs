//! Small finite fields GF(p^k) with p^k <= 16.
//!
//! Field elements are indices `0..p^k` encoding a polynomial residue in base
//! `p`: the element with index `i` has coefficients given by the base-`p`
//! digits of `i`, least significant digit first (so over GF(4), index 2 is `x`
//! and index 3 is `x + 1`).  Extension fields are built from a fixed, shipped
//! modulus per order (Conway-style), and the modulus is re-verified
//! irreducible at construction time by trial division; a reducible modulus is
//! rejected with an error naming a nontrivial factor.
//!
//! All arithmetic goes through precomputed tables, so a [`Field`] value is
//! cheap to clone and share.

use crate::error::{Error, Result};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const MAX_ORDER: usize = 16;

/// Orders supported: all prime powers up to 16.
pub const SUPPORTED_ORDERS: [u8; 10] = [2, 3, 4, 5, 7, 8, 9, 11, 13, 16];

/// A field element, stored as its index in `0..order`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fe(pub u8);

impl std::fmt::Debug for Fe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::fmt::Display for Fe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Description of a field: characteristic `p`, extension degree `k`, and the
/// monic degree-`k` modulus polynomial (coefficients low-to-high, length
/// `k + 1`).  For prime fields the modulus is the trivial `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldSpec {
    pub p: u8,
    pub k: u8,
    pub modulus: Vec<u8>,
}

/// Shipped modulus polynomials, one per supported extension order.
fn shipped_modulus(p: u8, k: u8) -> Option<Vec<u8>> {
    match (p, k) {
        (_, 1) => Some(vec![0, 1]),       // x; residues are the constants mod p
        (2, 2) => Some(vec![1, 1, 1]),    // x^2 + x + 1
        (2, 3) => Some(vec![1, 1, 0, 1]), // x^3 + x + 1
        (2, 4) => Some(vec![1, 1, 0, 0, 1]), // x^4 + x + 1
        (3, 2) => Some(vec![2, 2, 1]),    // x^2 + 2x + 2
        _ => None,
    }
}

fn is_prime(p: u8) -> bool {
    p >= 2 && (2..p).all(|d| !p.is_multiple_of(d))
}

impl FieldSpec {
    /// Spec for GF(p^k) with the shipped modulus.
    pub fn for_pk(p: u8, k: u8) -> Result<FieldSpec> {
        if !is_prime(p) {
            return Err(Error::invalid(format!("characteristic {p} is not prime")));
        }
        let order = (p as u32).checked_pow(k as u32).unwrap_or(u32::MAX);
        if k == 0 || order > MAX_ORDER as u32 {
            return Err(Error::invalid(format!(
                "unsupported field order {p}^{k} (supported orders: {SUPPORTED_ORDERS:?})"
            )));
        }
        let modulus = shipped_modulus(p, k)
            .ok_or_else(|| Error::invalid(format!("no shipped modulus for GF({p}^{k})")))?;
        Ok(FieldSpec { p, k, modulus })
    }

    /// Spec for the field of the given order.
    pub fn for_order(order: u8) -> Result<FieldSpec> {
        for p in 2..=order {
            if !is_prime(p) {
                continue;
            }
            let mut q = 1u32;
            for k in 1..=4u8 {
                q *= p as u32;
                if q == order as u32 {
                    return FieldSpec::for_pk(p, k);
                }
                if q > order as u32 {
                    break;
                }
            }
        }
        Err(Error::invalid(format!(
            "order {order} is not a prime power <= {MAX_ORDER}"
        )))
    }

    pub fn order(&self) -> u8 {
        (self.p as u32).pow(self.k as u32) as u8
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire {
            p: u8,
            k: u8,
        }
        Wire {
            p: self.p,
            k: self.k,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Wire {
            p: u8,
            k: u8,
        }
        let w = Wire::deserialize(de)?;
        FieldSpec::for_pk(w.p, w.k).map_err(|e| D::Error::custom(e.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Polynomial helpers over GF(p), p prime.  Coefficient vectors are
// low-to-high and not necessarily trimmed.
// ---------------------------------------------------------------------------

fn poly_trim(c: &mut Vec<u8>) {
    while c.last() == Some(&0) {
        c.pop();
    }
}

fn poly_deg(c: &[u8]) -> Option<usize> {
    c.iter().rposition(|&x| x != 0)
}

fn poly_mul(p: u8, a: &[u8], b: &[u8]) -> Vec<u8> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u8; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = ((out[i + j] as u16 + ai as u16 * bj as u16) % p as u16) as u8;
        }
    }
    poly_trim(&mut out);
    out
}

/// Remainder of `a` divided by monic `m` over GF(p).
fn poly_rem(p: u8, a: &[u8], m: &[u8]) -> Vec<u8> {
    let md = poly_deg(m).expect("monic modulus");
    debug_assert_eq!(m[md], 1, "modulus must be monic");
    let mut r: Vec<u8> = a.to_vec();
    poly_trim(&mut r);
    while let Some(rd) = poly_deg(&r) {
        if rd < md {
            break;
        }
        let lead = r[rd];
        let shift = rd - md;
        for i in 0..=md {
            let sub = (lead as u16 * m[i] as u16) % p as u16;
            r[i + shift] = ((r[i + shift] as u16 + p as u16 - sub % p as u16) % p as u16) as u8;
        }
        poly_trim(&mut r);
    }
    r
}

fn poly_to_string(c: &[u8]) -> String {
    let mut terms = vec![];
    for (i, &ci) in c.iter().enumerate().rev() {
        if ci == 0 {
            continue;
        }
        let var = match i {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{i}"),
        };
        let t = match (ci, i) {
            (c, 0) => format!("{c}"),
            (1, _) => var,
            (c, _) => format!("{c}{var}"),
        };
        terms.push(t);
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    }
}

/// All monic polynomials of exactly degree `d` over GF(p), low-to-high coeffs.
fn monic_polys(p: u8, d: usize) -> Vec<Vec<u8>> {
    let mut out = vec![];
    let count = (p as u64).pow(d as u32);
    for idx in 0..count {
        let mut c = vec![0u8; d + 1];
        let mut rest = idx;
        for slot in c.iter_mut().take(d) {
            *slot = (rest % p as u64) as u8;
            rest /= p as u64;
        }
        c[d] = 1;
        out.push(c);
    }
    out
}

// ---------------------------------------------------------------------------
// Field with full arithmetic tables.
// ---------------------------------------------------------------------------

/// A finite field with precomputed add/mul/neg/inv tables.
#[derive(Clone)]
pub struct Field {
    spec: FieldSpec,
    add: [[u8; MAX_ORDER]; MAX_ORDER],
    mul: [[u8; MAX_ORDER]; MAX_ORDER],
    neg: [u8; MAX_ORDER],
    inv: [u8; MAX_ORDER], // inv[0] unused
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}
impl Eq for Field {}

impl std::fmt::Debug for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GF({}^{})", self.spec.p, self.spec.k)
    }
}

impl Field {
    /// Build a field from a spec, verifying the modulus is monic of degree `k`
    /// and irreducible (trial division by all monic polynomials of degree up
    /// to `k/2`; a found divisor is reported by name).
    pub fn new(spec: FieldSpec) -> Result<Field> {
        let p = spec.p;
        let k = spec.k as usize;
        if !is_prime(p) {
            return Err(Error::invalid(format!("characteristic {p} is not prime")));
        }
        let order = (p as u32).pow(k as u32);
        if k == 0 || order > MAX_ORDER as u32 {
            return Err(Error::invalid(format!("unsupported field order {p}^{k}")));
        }
        if spec.modulus.len() != k + 1 || spec.modulus[k] != 1 {
            return Err(Error::invalid(format!(
                "modulus must be monic of degree {k}, got {}",
                poly_to_string(&spec.modulus)
            )));
        }
        if spec.modulus.iter().any(|&c| c >= p) {
            return Err(Error::invalid(
                "modulus coefficient out of range".to_string(),
            ));
        }
        // Irreducibility by trial division.
        for d in 1..=k / 2 {
            for g in monic_polys(p, d) {
                if poly_rem(p, &spec.modulus, &g).is_empty() {
                    return Err(Error::invalid(format!(
                        "modulus {} is reducible: divisible by {}",
                        poly_to_string(&spec.modulus),
                        poly_to_string(&g)
                    )));
                }
            }
        }

        let order = order as usize;
        let decode = |i: usize| -> Vec<u8> {
            let mut c = vec![0u8; k];
            let mut rest = i;
            for slot in c.iter_mut() {
                *slot = (rest % p as usize) as u8;
                rest /= p as usize;
            }
            c
        };
        let encode = |c: &[u8]| -> u8 {
            let mut idx = 0usize;
            for (i, &ci) in c.iter().enumerate() {
                idx += ci as usize * (p as usize).pow(i as u32);
            }
            idx as u8
        };

        let mut add = [[0u8; MAX_ORDER]; MAX_ORDER];
        let mut mul = [[0u8; MAX_ORDER]; MAX_ORDER];
        let mut neg = [0u8; MAX_ORDER];
        for a in 0..order {
            let ca = decode(a);
            let mut cn = vec![0u8; k];
            for i in 0..k {
                cn[i] = (p - ca[i]) % p;
            }
            neg[a] = encode(&cn);
            for b in 0..order {
                let cb = decode(b);
                let mut cs = vec![0u8; k];
                for i in 0..k {
                    cs[i] = (ca[i] + cb[i]) % p;
                }
                add[a][b] = encode(&cs);
                let prod = poly_mul(p, &ca, &cb);
                let mut rem = poly_rem(p, &prod, &spec.modulus);
                rem.resize(k, 0);
                mul[a][b] = encode(&rem);
            }
        }
        let mut inv = [0u8; MAX_ORDER];
        for a in 1..order {
            let found = (1..order).find(|&b| mul[a][b] == 1).ok_or_else(|| {
                Error::internal(format!(
                    "element {a} has no inverse; modulus not irreducible?"
                ))
            })?;
            inv[a] = found as u8;
        }
        Ok(Field {
            spec,
            add,
            mul,
            neg,
            inv,
        })
    }

    /// Field of the given order with the shipped modulus.
    pub fn of_order(order: u8) -> Result<Field> {
        Field::new(FieldSpec::for_order(order)?)
    }

    /// GF(p^k) with the shipped modulus.
    pub fn gf(p: u8, k: u8) -> Result<Field> {
        Field::new(FieldSpec::for_pk(p, k)?)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn order(&self) -> usize {
        self.spec.order() as usize
    }

    pub fn zero(&self) -> Fe {
        Fe(0)
    }

    pub fn one(&self) -> Fe {
        Fe(1)
    }

    /// Validate an element index from external input.
    pub fn element(&self, index: u8) -> Result<Fe> {
        if (index as usize) < self.order() {
            Ok(Fe(index))
        } else {
            Err(Error::invalid(format!(
                "element index {index} out of range for {self:?}"
            )))
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.order() as u8).map(Fe)
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Fe> {
        (1..self.order() as u8).map(Fe)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        Fe(self.add[a.0 as usize][b.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        Fe(self.mul[a.0 as usize][b.0 as usize])
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        Fe(self.neg[a.0 as usize])
    }

    /// Multiplicative inverse; errors on zero.
    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.0 == 0 {
            Err(Error::invalid("inverse of zero".to_string()))
        } else {
            Ok(Fe(self.inv[a.0 as usize]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent reference for extension-field products: multiply the two
    /// coefficient vectors as polynomials and reduce by long division, all in
    /// plain integer arithmetic.
    fn oracle_mul(p: u8, k: usize, modulus: &[u8], a: u8, b: u8) -> u8 {
        let digits = |mut v: u8| -> Vec<u8> {
            let mut c = vec![0u8; k];
            for slot in c.iter_mut() {
                *slot = v % p;
                v /= p;
            }
            c
        };
        let ca = digits(a);
        let cb = digits(b);
        let mut prod = vec![0u16; 2 * k];
        for i in 0..k {
            for j in 0..k {
                prod[i + j] = (prod[i + j] + ca[i] as u16 * cb[j] as u16) % p as u16;
            }
        }
        // Long division by the monic modulus.
        for d in (k..2 * k).rev() {
            let lead = prod[d];
            if lead == 0 {
                continue;
            }
            #[allow(clippy::needless_range_loop)] // i drives both modulus[i] and idx
            for i in 0..=k {
                let idx = d - k + i;
                let sub = (lead * modulus[i] as u16) % p as u16;
                prod[idx] = (prod[idx] + p as u16 - sub) % p as u16;
            }
        }
        let mut out = 0u8;
        for i in (0..k).rev() {
            out = out * p + prod[i] as u8;
        }
        out
    }

    #[test]
    fn gf2_and_gf3_basics() {
        let f2 = Field::of_order(2).unwrap();
        assert_eq!(f2.add(Fe(1), Fe(1)), Fe(0));
        let f3 = Field::of_order(3).unwrap();
        assert_eq!(f3.mul(Fe(2), Fe(2)), Fe(1));
    }

    #[test]
    fn gf4_generator_square() {
        // With modulus x^2 + x + 1 the element x (index 2) squares to x + 1
        // (index 3); cross-checked against the long-division oracle.
        let f4 = Field::of_order(4).unwrap();
        assert_eq!(f4.mul(Fe(2), Fe(2)), Fe(3));
        assert_eq!(oracle_mul(2, 2, &[1, 1, 1], 2, 2), 3);
    }

    #[test]
    fn tables_match_polynomial_oracle() {
        for order in SUPPORTED_ORDERS {
            let f = Field::of_order(order).unwrap();
            let spec = f.spec().clone();
            for a in 0..order {
                for b in 0..order {
                    assert_eq!(
                        f.mul(Fe(a), Fe(b)).0,
                        oracle_mul(spec.p, spec.k as usize, &spec.modulus, a, b),
                        "mul mismatch in GF({}) at {a},{b}",
                        order
                    );
                }
            }
        }
    }

    #[test]
    fn field_axioms_exhaustive() {
        for order in SUPPORTED_ORDERS {
            let f = Field::of_order(order).unwrap();
            let els: Vec<Fe> = f.elements().collect();
            for &a in &els {
                assert_eq!(f.add(a, f.zero()), a);
                assert_eq!(f.mul(a, f.one()), a);
                assert_eq!(f.add(a, f.neg(a)), f.zero());
                if a != f.zero() {
                    let ai = f.inv(a).unwrap();
                    assert_eq!(f.mul(a, ai), f.one());
                }
                for &b in &els {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for &c in &els {
                        assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
                        assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
                        assert_eq!(
                            f.mul(a, f.add(b, c)),
                            f.add(f.mul(a, b), f.mul(a, c)),
                            "distributivity fails in GF({order})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn reducible_modulus_rejected_with_named_factor() {
        // x^2 + 1 = (x + 1)^2 over GF(2).
        let spec = FieldSpec {
            p: 2,
            k: 2,
            modulus: vec![1, 0, 1],
        };
        let err = Field::new(spec).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("reducible"), "message: {msg}");
        assert!(msg.contains("x + 1"), "factor not named: {msg}");
    }

    #[test]
    fn unsupported_orders_rejected() {
        assert!(Field::of_order(6).is_err());
        assert!(Field::of_order(17).is_err());
        assert!(FieldSpec::for_pk(4, 1).is_err());
        assert!(FieldSpec::for_pk(2, 5).is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = FieldSpec::for_pk(3, 2).unwrap();
        let js = serde_json::to_string(&spec).unwrap();
        assert_eq!(js, r#"{"p":3,"k":2}"#);
        let back: FieldSpec = serde_json::from_str(&js).unwrap();
        assert_eq!(back, spec);
        assert!(serde_json::from_str::<FieldSpec>(r#"{"p":4,"k":1}"#).is_err());
    }
}
