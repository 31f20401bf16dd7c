//! Finite local commutative Frobenius rings with table-driven arithmetic.
//!
//! Elements are encoded as integers `0..q` using mixed-radix digits of their
//! coefficient vectors (for `Z_{p^k}` the code is the residue itself). All
//! operations are precomputed as tables. The generating character is stored
//! as an exponent table `e: R -> Z_N` with `chi(r) = omega^{e(r)}` for a fixed
//! primitive `N`-th root of unity `omega`, where `N` is the Pauli phase order.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Canonical code of a ring element.
pub type Elem = u8;

/// Largest supported ring cardinality.
pub const MAX_RING_SIZE: usize = 256;

/// Ring families that can be instantiated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RingSpec {
    /// Integer residue ring `Z_{p^k}`.
    Zpk { p: u32, k: u32 },
    /// Finite field `F_{p^d} = F_p[x]/(modulus)`; `modulus` holds the
    /// coefficients from degree 0 to degree `d` and is monic.
    Gf { p: u32, d: u32, modulus: Vec<u32> },
    /// Chain ring `F_p[u]/(u^k)`.
    ChainFpUk { p: u32, k: u32 },
    /// `F_2[x,y]/(x^2, y^2)`, the smallest local Frobenius ring that is not a chain ring.
    F2xy,
}

fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

fn prime_power(m: u32) -> Option<(u32, u32)> {
    if m < 2 {
        return None;
    }
    let p = (2..=m).find(|d| m.is_multiple_of(*d))?;
    let mut rest = m;
    let mut k = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        k += 1;
    }
    (rest == 1).then_some((p, k))
}

fn checked_size(p: u32, k: u32) -> Result<usize> {
    let q = (p as u64).checked_pow(k).unwrap_or(u64::MAX);
    if q > MAX_RING_SIZE as u64 {
        return Err(Error::InvalidRing(format!("ring size {p}^{k} exceeds {MAX_RING_SIZE}")));
    }
    Ok(q as usize)
}

impl RingSpec {
    pub fn zpk(p: u32, k: u32) -> Self {
        RingSpec::Zpk { p, k }
    }

    pub fn chain(p: u32, k: u32) -> Self {
        RingSpec::ChainFpUk { p, k }
    }

    /// `GF(p^d)` with the lexicographically first irreducible monic modulus.
    pub fn gf(p: u32, d: u32) -> Result<Self> {
        if !is_prime(p) || d == 0 {
            return Err(Error::InvalidRing(format!("GF({p}^{d}) needs a prime p and d >= 1")));
        }
        let q = checked_size(p, d)?;
        for code in 0..q {
            let mut modulus = poly_digits(code, p, d as usize);
            modulus.push(1);
            if poly_irreducible(&modulus, p) {
                return Ok(RingSpec::Gf { p, d, modulus });
            }
        }
        unreachable!("irreducible polynomials exist in every degree")
    }

    pub fn gf_with_modulus(p: u32, d: u32, modulus: Vec<u32>) -> Self {
        RingSpec::Gf { p, d, modulus }
    }

    pub fn cardinality(&self) -> Result<usize> {
        match self {
            RingSpec::Zpk { p, k } | RingSpec::ChainFpUk { p, k } => checked_size(*p, *k),
            RingSpec::Gf { p, d, .. } => checked_size(*p, *d),
            RingSpec::F2xy => Ok(16),
        }
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Zpk { p, k } => write!(f, "Z{}", p.pow(*k)),
            RingSpec::Gf { p, d: 1, .. } => write!(f, "GF{p}"),
            RingSpec::Gf { p, d, modulus } => {
                write!(f, "GF{}:{}", p.pow(*d), format_poly(modulus, "x"))
            }
            RingSpec::ChainFpUk { p, k } => write!(f, "F{p}u{k}"),
            RingSpec::F2xy => write!(f, "F2XY"),
        }
    }
}

impl Serialize for RingSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn parse_u32(s: &str, what: &str) -> Result<u32> {
    s.parse::<u32>()
        .map_err(|_| Error::InvalidRing(format!("cannot parse {what} from {s:?}")))
}

/// Parses a polynomial in `x` such as `x^2+x+1` or `2x^3+x+2`.
fn parse_poly(text: &str, p: u32) -> Result<Vec<u32>> {
    let bad = || Error::InvalidRing(format!("malformed polynomial {text:?}"));
    let mut coeffs: Vec<u32> = Vec::new();
    for term in text.split('+') {
        let term = term.trim().replace('*', "");
        if term.is_empty() {
            return Err(bad());
        }
        let (coef, power) = match term.find('x') {
            None => (parse_u32(&term, "coefficient")?, 0usize),
            Some(pos) => {
                let c = if pos == 0 { 1 } else { parse_u32(&term[..pos], "coefficient")? };
                let rest = &term[pos + 1..];
                let e = if rest.is_empty() {
                    1
                } else {
                    let e = rest.strip_prefix('^').ok_or_else(bad)?;
                    parse_u32(e, "exponent")? as usize
                };
                (c, e)
            }
        };
        if coef >= p {
            return Err(Error::InvalidRing(format!("coefficient {coef} not in 0..{p}")));
        }
        if coeffs.len() <= power {
            coeffs.resize(power + 1, 0);
        }
        coeffs[power] = (coeffs[power] + coef) % p;
    }
    while coeffs.len() > 1 && *coeffs.last().unwrap() == 0 {
        coeffs.pop();
    }
    Ok(coeffs)
}

fn format_poly(coeffs: &[u32], var: &str) -> String {
    let mut terms = Vec::new();
    for (i, &c) in coeffs.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{var}^{i}"),
        };
        terms.push(match (c, i) {
            (_, 0) => c.to_string(),
            (1, _) => mono,
            _ => format!("{c}{mono}"),
        });
    }
    if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join("+")
    }
}

impl FromStr for RingSpec {
    type Err = Error;

    /// Accepted forms: `Z<m>` (m a prime power), `GF<q>` or `GF<q>:<poly>`,
    /// `F<q>` (alias of `GF<q>`), `F<p>u<k>`, `F2XY`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("F2XY") {
            return Ok(RingSpec::F2xy);
        }
        if let Some(m) = s.strip_prefix('Z') {
            let m = parse_u32(m, "modulus")?;
            let (p, k) = prime_power(m)
                .ok_or_else(|| Error::InvalidRing(format!("Z{m}: modulus is not a prime power")))?;
            checked_size(p, k)?;
            return Ok(RingSpec::Zpk { p, k });
        }
        let gf_body = s.strip_prefix("GF").or_else(|| {
            s.strip_prefix('F').filter(|rest| !rest.contains('u'))
        });
        if let Some(body) = gf_body {
            let (q, poly) = match body.split_once(':') {
                Some((q, poly)) => (q, Some(poly)),
                None => (body, None),
            };
            let q = parse_u32(q, "field size")?;
            let (p, d) = prime_power(q)
                .ok_or_else(|| Error::InvalidRing(format!("GF{q}: size is not a prime power")))?;
            return match poly {
                None => RingSpec::gf(p, d),
                Some(poly) => {
                    let modulus = parse_poly(poly, p)?;
                    if modulus.len() != d as usize + 1 || modulus[d as usize] != 1 {
                        return Err(Error::InvalidRing(format!(
                            "modulus {poly:?} must be monic of degree {d}"
                        )));
                    }
                    Ok(RingSpec::Gf { p, d, modulus })
                }
            };
        }
        if let Some(body) = s.strip_prefix('F') {
            if let Some((p, k)) = body.split_once('u') {
                let p = parse_u32(p, "characteristic")?;
                let k = parse_u32(k, "nilpotency index")?;
                return Ok(RingSpec::ChainFpUk { p, k });
            }
        }
        Err(Error::InvalidRing(format!("unknown ring spec {s:?}")))
    }
}

fn poly_digits(code: usize, p: u32, len: usize) -> Vec<u32> {
    let mut c = code;
    (0..len)
        .map(|_| {
            let d = (c % p as usize) as u32;
            c /= p as usize;
            d
        })
        .collect()
}

fn poly_code(coeffs: &[u32], p: u32) -> usize {
    coeffs.iter().rev().fold(0usize, |acc, &c| acc * p as usize + c as usize)
}

/// Remainder of `a` modulo a monic `m` over `F_p`.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - dm;
        if lead != 0 {
            for (i, &mc) in m.iter().enumerate() {
                let idx = shift + i;
                r[idx] = (r[idx] + p - (lead * mc) % p) % p;
            }
        }
        r.pop();
    }
    r
}

fn poly_irreducible(m: &[u32], p: u32) -> bool {
    let d = m.len() - 1;
    if d == 1 {
        return true;
    }
    // Any factorization has a monic factor of degree <= d/2.
    for deg in 1..=d / 2 {
        let count = (p as usize).pow(deg as u32);
        for code in 0..count {
            let mut g = poly_digits(code, p, deg);
            g.push(1);
            if poly_rem(m, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// A fully tabulated finite local commutative Frobenius ring.
///
/// Immutable after construction; shared through `Arc`.
#[derive(Debug)]
pub struct LocalRing {
    spec: RingSpec,
    q: usize,
    characteristic: u32,
    phase_order: u32,
    add: Vec<Elem>,
    mul: Vec<Elem>,
    neg: Vec<Elem>,
    inverse: Vec<Option<Elem>>,
    maximal_ideal: Vec<Elem>,
    maximal_ideal_gens: Vec<Elem>,
    socle: Elem,
    char_exp: Vec<u32>,
    residue: Vec<Elem>,
    lift: Vec<Elem>,
    field: Option<Arc<LocalRing>>,
    additive_orders: Vec<u32>,
}

/// Outcome of [`verify_frobenius`]: every listed check passed.
#[derive(Debug, Clone, Serialize)]
pub struct FrobeniusReport {
    pub ring: String,
    pub cardinality: usize,
    pub characteristic: u32,
    pub phase_order: u32,
    pub socle_generator: Elem,
    pub maximal_ideal_size: usize,
    pub maximal_ideal_generators: Vec<Elem>,
    pub residue_field_size: usize,
    pub checks: Vec<&'static str>,
}

type BinaryOp = Box<dyn Fn(usize, usize) -> usize>;

impl LocalRing {
    /// Builds and verifies a ring instance.
    pub fn build(spec: &RingSpec) -> Result<Arc<LocalRing>> {
        let ring = Self::build_unchecked(spec)?;
        verify_frobenius(&ring)?;
        Ok(Arc::new(ring))
    }

    /// Shorthand for `LocalRing::build(&spec.parse()?)`.
    pub fn parse(spec: &str) -> Result<Arc<LocalRing>> {
        Self::build(&spec.parse()?)
    }

    fn build_unchecked(spec: &RingSpec) -> Result<LocalRing> {
        let q = spec.cardinality()?;
        let (p, add_fn, mul_fn, orders): (u32, BinaryOp, BinaryOp, Vec<u32>) =
            match spec {
                RingSpec::Zpk { p, k } => {
                    if !is_prime(*p) || *k == 0 {
                        return Err(Error::InvalidRing(format!("Z_{p}^{k}: p must be prime, k >= 1")));
                    }
                    (
                        *p,
                        Box::new(move |a, b| (a + b) % q),
                        Box::new(move |a, b| (a * b) % q),
                        vec![q as u32],
                    )
                }
                RingSpec::Gf { p, d, modulus } => {
                    if !is_prime(*p) || *d == 0 {
                        return Err(Error::InvalidRing(format!("GF({p}^{d}): p must be prime, d >= 1")));
                    }
                    if modulus.len() != *d as usize + 1 || modulus[*d as usize] != 1 {
                        return Err(Error::InvalidRing("modulus must be monic of degree d".into()));
                    }
                    if modulus.iter().any(|&c| c >= *p) {
                        return Err(Error::InvalidRing("modulus coefficients must lie in 0..p".into()));
                    }
                    if !poly_irreducible(modulus, *p) {
                        return Err(Error::InvalidRing(format!(
                            "modulus {} is not irreducible over F_{p}",
                            format_poly(modulus, "x")
                        )));
                    }
                    let (p, d) = (*p, *d as usize);
                    let m = modulus.clone();
                    (
                        p,
                        Box::new(move |a, b| digitwise_add(a, b, p, d)),
                        Box::new(move |a, b| {
                            let x = poly_digits(a, p, d);
                            let y = poly_digits(b, p, d);
                            let mut prod = vec![0u32; 2 * d - 1];
                            for (i, &xi) in x.iter().enumerate() {
                                for (j, &yj) in y.iter().enumerate() {
                                    prod[i + j] = (prod[i + j] + xi * yj) % p;
                                }
                            }
                            poly_code(&poly_rem(&prod, &m, p), p)
                        }),
                        vec![p; d],
                    )
                }
                RingSpec::ChainFpUk { p, k } => {
                    if !is_prime(*p) || *k == 0 {
                        return Err(Error::InvalidRing(format!("F_{p}[u]/(u^{k}): p must be prime, k >= 1")));
                    }
                    let (p, k) = (*p, *k as usize);
                    (
                        p,
                        Box::new(move |a, b| digitwise_add(a, b, p, k)),
                        Box::new(move |a, b| {
                            let x = poly_digits(a, p, k);
                            let y = poly_digits(b, p, k);
                            let mut prod = vec![0u32; k];
                            for i in 0..k {
                                for j in 0..k - i {
                                    prod[i + j] = (prod[i + j] + x[i] * y[j]) % p;
                                }
                            }
                            poly_code(&prod, p)
                        }),
                        vec![p; k],
                    )
                }
                RingSpec::F2xy => (
                    2,
                    Box::new(|a, b| a ^ b),
                    Box::new(|a, b| {
                        let bit = |v: usize, i: usize| (v >> i) & 1;
                        let c0 = bit(a, 0) & bit(b, 0);
                        let c1 = (bit(a, 0) & bit(b, 1)) ^ (bit(a, 1) & bit(b, 0));
                        let c2 = (bit(a, 0) & bit(b, 2)) ^ (bit(a, 2) & bit(b, 0));
                        let c3 = (bit(a, 0) & bit(b, 3))
                            ^ (bit(a, 3) & bit(b, 0))
                            ^ (bit(a, 1) & bit(b, 2))
                            ^ (bit(a, 2) & bit(b, 1));
                        c0 | (c1 << 1) | (c2 << 2) | (c3 << 3)
                    }),
                    vec![2; 4],
                ),
            };

        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for a in 0..q {
            for b in 0..q {
                add[a * q + b] = add_fn(a, b) as Elem;
                mul[a * q + b] = mul_fn(a, b) as Elem;
            }
        }
        let neg: Vec<Elem> = (0..q)
            .map(|a| (0..q).find(|&b| add[a * q + b] == 0).expect("additive inverse") as Elem)
            .collect();
        let inverse: Vec<Option<Elem>> = (0..q)
            .map(|a| (0..q).find(|&b| mul[a * q + b] == 1).map(|b| b as Elem))
            .collect();
        let characteristic = (1..=q as u32)
            .find(|&m| (0..m).fold(0usize, |acc, _| add[acc * q + 1] as usize) == 0)
            .expect("finite characteristic");
        if prime_power(characteristic).map(|(pp, _)| pp) != Some(p) {
            return Err(Error::RingAxiom(format!("characteristic {characteristic} is not a power of {p}")));
        }
        let phase_order = if characteristic % 2 == 0 { 2 * characteristic } else { characteristic };
        let maximal_ideal: Vec<Elem> = (0..q).filter(|&a| inverse[a].is_none()).map(|a| a as Elem).collect();

        let mut ring = LocalRing {
            spec: spec.clone(),
            q,
            characteristic,
            phase_order,
            add,
            mul,
            neg,
            inverse,
            maximal_ideal,
            maximal_ideal_gens: Vec::new(),
            socle: 0,
            char_exp: Vec::new(),
            residue: Vec::new(),
            lift: Vec::new(),
            field: None,
            additive_orders: orders,
        };
        ring.maximal_ideal_gens = ring.ideal_generators(&ring.maximal_ideal.clone());
        let ann_m: Vec<Elem> = ring.annihilator(&ring.maximal_ideal);
        ring.socle = ann_m.iter().copied().find(|&a| a != 0).unwrap_or(0);
        ring.char_exp = ring.default_char_exp();
        ring.build_residue()?;
        Ok(ring)
    }

    fn default_char_exp(&self) -> Vec<u32> {
        let scale = self.phase_order / self.characteristic;
        let n = self.phase_order;
        match &self.spec {
            RingSpec::Zpk { .. } => (0..self.q as u32).map(|a| (a * scale) % n).collect(),
            RingSpec::Gf { p, d, .. } => (0..self.q)
                .map(|a| {
                    // Tr(a) = sum_{j<d} a^{p^j}, an element of the prime field.
                    let mut t = 0 as Elem;
                    let mut power = a as Elem;
                    for _ in 0..*d {
                        t = self.add(t, power);
                        power = self.pow(power, *p as u64);
                    }
                    (t as u32 * scale) % n
                })
                .collect(),
            RingSpec::ChainFpUk { p, k } => (0..self.q)
                .map(|a| (poly_digits(a, *p, *k as usize)[*k as usize - 1] * scale) % n)
                .collect(),
            RingSpec::F2xy => (0..self.q as u32).map(|a| 2 * ((a >> 3) & 1)).collect(),
        }
    }

    fn build_residue(&mut self) -> Result<()> {
        let q = self.q;
        if self.maximal_ideal.len() == 1 {
            self.residue = (0..q).map(|a| a as Elem).collect();
            self.lift = self.residue.clone();
            return Ok(());
        }
        // Cosets of m, labelled in order of their smallest member.
        let mut residue = vec![Elem::MAX; q];
        let mut lift = Vec::new();
        for r in 0..q {
            if residue[r] != Elem::MAX {
                continue;
            }
            let label = lift.len() as Elem;
            lift.push(r as Elem);
            for &z in &self.maximal_ideal {
                residue[self.add(r as Elem, z) as usize] = label;
            }
        }
        let f = lift.len();
        let (p, k) = prime_power(f as u32)
            .ok_or_else(|| Error::RingAxiom(format!("residue ring of size {f} is not a field")))?;
        if k != 1 {
            return Err(Error::InvalidRing(format!(
                "residue field of size {f} is not a prime field; not supported"
            )));
        }
        self.field = Some(Arc::new(LocalRing::build_unchecked(&RingSpec::gf(p, 1)?)?));
        self.residue = residue;
        self.lift = lift;
        Ok(())
    }

    fn ideal_generators(&self, ideal: &[Elem]) -> Vec<Elem> {
        let mut gens: Vec<Elem> = Vec::new();
        let mut span: Vec<bool> = vec![false; self.q];
        span[0] = true;
        for &z in ideal {
            if span[z as usize] {
                continue;
            }
            gens.push(z);
            span = self.ideal_closure(&gens);
        }
        gens
    }

    /// Membership table of the ideal generated by `gens`.
    fn ideal_closure(&self, gens: &[Elem]) -> Vec<bool> {
        let mut member = vec![false; self.q];
        member[0] = true;
        let mut frontier = vec![0 as Elem];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                for r in self.elements() {
                    let y = self.add(x, self.mul(r, g));
                    if !member[y as usize] {
                        member[y as usize] = true;
                        frontier.push(y);
                    }
                }
            }
        }
        member
    }

    fn annihilator(&self, set: &[Elem]) -> Vec<Elem> {
        self.elements().filter(|&r| set.iter().all(|&z| self.mul(r, z) == 0)).collect()
    }

    /// Replaces the generating character. The result is not verified; run
    /// [`verify_frobenius`] before relying on it.
    pub fn with_char_exp_unchecked(&self, char_exp: Vec<u32>) -> LocalRing {
        assert_eq!(char_exp.len(), self.q, "one exponent per element");
        LocalRing {
            spec: self.spec.clone(),
            q: self.q,
            characteristic: self.characteristic,
            phase_order: self.phase_order,
            add: self.add.clone(),
            mul: self.mul.clone(),
            neg: self.neg.clone(),
            inverse: self.inverse.clone(),
            maximal_ideal: self.maximal_ideal.clone(),
            maximal_ideal_gens: self.maximal_ideal_gens.clone(),
            socle: self.socle,
            char_exp: char_exp.into_iter().map(|e| e % self.phase_order).collect(),
            residue: self.residue.clone(),
            lift: self.lift.clone(),
            field: self.field.clone(),
            additive_orders: self.additive_orders.clone(),
        }
    }

    pub fn spec(&self) -> &RingSpec {
        &self.spec
    }

    pub fn name(&self) -> String {
        self.spec.to_string()
    }

    /// Cardinality `q = |R|`.
    pub fn size(&self) -> usize {
        self.q
    }

    /// Additive characteristic `c`.
    pub fn characteristic(&self) -> u32 {
        self.characteristic
    }

    /// Order `N` of the Pauli phase root of unity: `c` for odd `c`, `2c` otherwise.
    pub fn phase_order(&self) -> u32 {
        self.phase_order
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.q).map(|a| a as Elem)
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        self.add[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        self.mul[a as usize * self.q + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn inv(&self, a: Elem) -> Option<Elem> {
        self.inverse[a as usize]
    }

    pub fn is_unit(&self, a: Elem) -> bool {
        self.inverse[a as usize].is_some()
    }

    pub fn is_field(&self) -> bool {
        self.field.is_none()
    }

    pub fn pow(&self, a: Elem, mut e: u64) -> Elem {
        let mut base = a;
        let mut acc: Elem = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Image of an integer under `Z -> R`.
    pub fn from_int(&self, n: i64) -> Elem {
        let c = self.characteristic as i64;
        let m = n.rem_euclid(c);
        (0..m).fold(0, |acc, _| self.add(acc, 1))
    }

    /// Generating-character exponent: `chi(r) = omega^{e(r)}`.
    #[inline]
    pub fn char_exp(&self, r: Elem) -> u32 {
        self.char_exp[r as usize]
    }

    pub fn char_exp_table(&self) -> &[u32] {
        &self.char_exp
    }

    /// The socle generator `alpha`, with `soc(R) = alpha R = ann(m)`.
    pub fn socle_generator(&self) -> Elem {
        self.socle
    }

    pub fn maximal_ideal(&self) -> &[Elem] {
        &self.maximal_ideal
    }

    pub fn maximal_ideal_generators(&self) -> &[Elem] {
        &self.maximal_ideal_gens
    }

    pub fn in_maximal_ideal(&self, a: Elem) -> bool {
        self.inverse[a as usize].is_none()
    }

    /// Residue map `R -> F = R/m`.
    #[inline]
    pub fn residue(&self, r: Elem) -> Elem {
        self.residue[r as usize]
    }

    /// A fixed section `F -> R` of the residue map.
    pub fn lift(&self, f: Elem) -> Elem {
        self.lift[f as usize]
    }

    pub fn residue_field_size(&self) -> usize {
        self.lift.len()
    }

    /// The residue field as a ring instance. A field is its own residue field.
    pub fn residue_field(self: &Arc<Self>) -> Arc<LocalRing> {
        match &self.field {
            Some(f) => Arc::clone(f),
            None => Arc::clone(self),
        }
    }

    /// Orders of the cyclic summands of `(R,+)`; element codes are the
    /// mixed-radix numbers with these radices.
    pub fn additive_orders(&self) -> &[u32] {
        &self.additive_orders
    }

    /// Additive coordinates (mixed-radix digits) of an element.
    pub fn digits(&self, r: Elem) -> impl Iterator<Item = u32> + '_ {
        let mut rest = r as u32;
        self.additive_orders.iter().map(move |&m| {
            let d = rest % m;
            rest /= m;
            d
        })
    }

    pub fn from_digits(&self, digits: &[i128]) -> Elem {
        let mut code: u32 = 0;
        let mut place: u32 = 1;
        for (&d, &m) in digits.iter().zip(&self.additive_orders) {
            code += d.rem_euclid(m as i128) as u32 * place;
            place *= m;
        }
        code as Elem
    }

    /// Elements whose digit vectors are the unit vectors; they generate
    /// `(R,+)` and hence every submodule together with its generators.
    pub fn additive_basis(&self) -> Vec<Elem> {
        (0..self.additive_orders.len())
            .map(|j| {
                let mut d = vec![0i128; self.additive_orders.len()];
                d[j] = 1;
                self.from_digits(&d)
            })
            .collect()
    }

    /// Additive order of an element.
    pub fn additive_order(&self, r: Elem) -> u32 {
        let mut order = 1u32;
        let mut acc = r;
        while acc != 0 {
            acc = self.add(acc, r);
            order += 1;
        }
        order
    }

    pub fn add_vec(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        a.iter().zip(b).map(|(&x, &y)| self.add(x, y)).collect()
    }

    pub fn sub_vec(&self, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
        a.iter().zip(b).map(|(&x, &y)| self.sub(x, y)).collect()
    }

    pub fn scale_vec(&self, r: Elem, v: &[Elem]) -> Vec<Elem> {
        v.iter().map(|&x| self.mul(r, x)).collect()
    }

    pub fn dot(&self, a: &[Elem], b: &[Elem]) -> Elem {
        a.iter().zip(b).fold(0, |acc, (&x, &y)| self.add(acc, self.mul(x, y)))
    }

    /// Human-readable form of an element (coefficient polynomial for
    /// non-`Z_N` rings).
    pub fn format_elem(&self, r: Elem) -> String {
        match &self.spec {
            RingSpec::Zpk { .. } => r.to_string(),
            RingSpec::Gf { p, d, .. } => format_poly(&poly_digits(r as usize, *p, *d as usize), "x"),
            RingSpec::ChainFpUk { p, k } => format_poly(&poly_digits(r as usize, *p, *k as usize), "u"),
            RingSpec::F2xy => {
                let names = ["1", "x", "y", "xy"];
                let terms: Vec<&str> = (0..4).filter(|i| (r >> i) & 1 == 1).map(|i| names[i]).collect();
                if terms.is_empty() { "0".into() } else { terms.join("+") }
            }
        }
    }

    /// Legend mapping codes to coefficient polynomials, `None` for `Z_N`.
    pub fn legend(&self) -> Option<String> {
        if matches!(self.spec, RingSpec::Zpk { .. }) {
            return None;
        }
        Some(self.elements().map(|r| format!("{}={}", r, self.format_elem(r))).collect::<Vec<_>>().join(" "))
    }
}

fn digitwise_add(a: usize, b: usize, p: u32, len: usize) -> usize {
    let x = poly_digits(a, p, len);
    let y = poly_digits(b, p, len);
    let s: Vec<u32> = x.iter().zip(&y).map(|(u, v)| (u + v) % p).collect();
    poly_code(&s, p)
}

/// Checks every local-Frobenius axiom the rest of the crate relies on.
///
/// On failure the error names the violated axiom.
pub fn verify_frobenius(ring: &LocalRing) -> Result<FrobeniusReport> {
    let q = ring.q;
    let fail = |msg: String| Err(Error::RingAxiom(msg));
    let mut checks = Vec::new();

    for a in ring.elements() {
        for b in ring.elements() {
            if ring.add(a, b) != ring.add(b, a) || ring.mul(a, b) != ring.mul(b, a) {
                return fail(format!("not commutative at ({a},{b})"));
            }
        }
        if ring.mul(1, a) != a || ring.add(0, a) != a {
            return fail(format!("identity fails at {a}"));
        }
    }
    checks.push("commutative ring with identity");

    let m = &ring.maximal_ideal;
    for &x in m {
        for &y in m {
            if ring.is_unit(ring.add(x, y)) {
                return fail(format!("not local: {x} + {y} is a unit"));
            }
        }
        for r in ring.elements() {
            if ring.is_unit(ring.mul(r, x)) {
                return fail(format!("not local: {r} * {x} is a unit"));
            }
        }
    }
    checks.push("local: non-units form an ideal");

    let alpha = ring.socle;
    if alpha == 0 {
        return fail("socle generator is zero".into());
    }
    let alpha_r: Vec<Elem> = {
        let mut v: Vec<Elem> = ring.elements().map(|r| ring.mul(alpha, r)).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    for r in ring.elements().filter(|&r| r != 0) {
        if !ring.elements().any(|s| ring.mul(r, s) == alpha) {
            return fail(format!("socle not the unique minimal ideal: alpha not in {r}R"));
        }
    }
    for &s in alpha_r.iter().filter(|&&s| s != 0) {
        if !ring.elements().any(|r| ring.mul(s, r) == alpha) {
            return fail(format!("alpha R is not minimal: {s}R is smaller"));
        }
    }
    checks.push("soc(R) = alpha R is the unique minimal ideal");

    if ring.annihilator(m) != alpha_r {
        return fail("ann(m) != alpha R".into());
    }
    if ring.annihilator(&alpha_r) != *m {
        return fail("ann(alpha R) != m".into());
    }
    checks.push("ann(m) = alpha R and ann(alpha R) = m");

    let n = ring.phase_order;
    let scale = n / ring.characteristic;
    for a in ring.elements() {
        if !ring.char_exp(a).is_multiple_of(scale) {
            return fail(format!("character value at {a} is not a c-th root of unity"));
        }
        for b in ring.elements() {
            if ring.char_exp(ring.add(a, b)) != (ring.char_exp(a) + ring.char_exp(b)) % n {
                return fail(format!("character not additive at ({a},{b})"));
            }
        }
    }
    checks.push("character is additive with values in the c-th roots of unity");

    if alpha_r.iter().all(|&s| ring.char_exp(s) == 0) {
        return fail("character not generating: trivial on alpha R".into());
    }
    checks.push("character generating: nontrivial on alpha R");

    for r in ring.elements().filter(|&r| r != 0) {
        let mut counts = vec![0usize; n as usize];
        for s in ring.elements() {
            counts[ring.char_exp(ring.mul(r, s)) as usize] += 1;
        }
        let hit: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
        if hit.len() < 2 || hit.iter().any(|&c| c != hit[0]) {
            return fail(format!("character sum of r*chi does not vanish for r = {r}"));
        }
    }
    checks.push("orthogonality: sum_s chi(rs) = 0 for r != 0");

    let f = ring.lift.len();
    if f * m.len() != q {
        return fail(format!("|F| = {f} but q/|m| = {}", q / m.len()));
    }
    let field_ops = |a: Elem, b: Elem, op: bool| -> Elem {
        match &ring.field {
            Some(fl) => if op { fl.add(a, b) } else { fl.mul(a, b) },
            None => if op { ring.add(a, b) } else { ring.mul(a, b) },
        }
    };
    for a in ring.elements() {
        if (ring.residue(a) == 0) != ring.in_maximal_ideal(a) {
            return fail(format!("residue kernel differs from m at {a}"));
        }
        for b in ring.elements() {
            let (ra, rb) = (ring.residue(a), ring.residue(b));
            if ring.residue(ring.add(a, b)) != field_ops(ra, rb, true)
                || ring.residue(ring.mul(a, b)) != field_ops(ra, rb, false)
            {
                return fail(format!("residue map not a homomorphism at ({a},{b})"));
            }
        }
    }
    if (0..f).any(|x| ring.residue(ring.lift[x]) as usize != x) {
        return fail("residue o lift is not the identity".into());
    }
    checks.push("residue map is a surjective homomorphism with kernel m");

    for a in ring.elements() {
        for b in ring.elements() {
            let expect: Vec<i128> = ring
                .digits(a)
                .zip(ring.digits(b))
                .map(|(x, y)| x as i128 + y as i128)
                .collect();
            if ring.from_digits(&expect) != ring.add(a, b) {
                return fail(format!("additive digits inconsistent at ({a},{b})"));
            }
        }
    }
    checks.push("additive coordinates");

    Ok(FrobeniusReport {
        ring: ring.name(),
        cardinality: q,
        characteristic: ring.characteristic,
        phase_order: n,
        socle_generator: alpha,
        maximal_ideal_size: m.len(),
        maximal_ideal_generators: ring.maximal_ideal_gens.clone(),
        residue_field_size: f,
        checks,
    })
}
