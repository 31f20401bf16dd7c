//! Exact Pauli-group arithmetic with phases in `Z_N`, lifting self-orthogonal
//! codes to stabilizer groups, and a small complex realizer for checking.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};
use serde::Serialize;

use crate::code::{symplectic_inner_unchecked, Code};
use crate::error::{Error, Limits, Result, ENUMERATION_LIMIT, REALIZER_LIMIT};
use crate::normalforms::{egcd, CyclicDecomposition};
use crate::ring::{Elem, LocalRing};

pub type Complex64 = Complex<f64>;

/// `omega^phase X(a) Z(b)` with `omega` a primitive `N`-th root of unity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PauliElement {
    pub phase: u32,
    pub a: Vec<Elem>,
    pub b: Vec<Elem>,
}

impl PauliElement {
    pub fn identity(n: usize) -> Self {
        PauliElement { phase: 0, a: vec![0; n], b: vec![0; n] }
    }

    pub fn new(ring: &LocalRing, phase: u32, a: Vec<Elem>, b: Vec<Elem>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.len(), found: b.len() });
        }
        if a.iter().chain(&b).any(|&x| x as usize >= ring.size()) {
            return Err(Error::invalid("element code out of range"));
        }
        Ok(PauliElement { phase: phase % ring.phase_order(), a, b })
    }

    /// `X(a) Z(b)` for `v = (a | b)`.
    pub fn from_vector(v: &[Elem]) -> Self {
        let n = v.len() / 2;
        PauliElement { phase: 0, a: v[..n].to_vec(), b: v[n..].to_vec() }
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// The symplectic vector `(a | b)`.
    pub fn vector(&self) -> Vec<Elem> {
        self.a.iter().chain(&self.b).copied().collect()
    }

    pub fn is_identity(&self) -> bool {
        self.phase == 0 && self.a.iter().chain(&self.b).all(|&x| x == 0)
    }
}

impl fmt::Display for PauliElement {
    /// `(phase | a | b)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[Elem]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        write!(f, "({} | {} | {})", self.phase, join(&self.a), join(&self.b))
    }
}

fn check_same_n(p: &PauliElement, q: &PauliElement) -> Result<()> {
    if p.n() != q.n() {
        return Err(Error::DimensionMismatch { expected: p.n(), found: q.n() });
    }
    Ok(())
}

fn add_phase(ring: &LocalRing, x: u32, y: u32) -> u32 {
    (x + y) % ring.phase_order()
}

/// `P P' = omega^{l + l' + e(b . a')} X(a + a') Z(b + b')`.
pub fn pauli_mul(ring: &LocalRing, p: &PauliElement, q: &PauliElement) -> Result<PauliElement> {
    check_same_n(p, q)?;
    let twist = ring.char_exp(ring.dot(&p.b, &q.a));
    Ok(PauliElement {
        phase: add_phase(ring, add_phase(ring, p.phase, q.phase), twist),
        a: ring.add_vec(&p.a, &q.a),
        b: ring.add_vec(&p.b, &q.b),
    })
}

/// `P^l` in closed form: phase `l*phase + e(l(l-1)/2 * b.a)`.
pub fn pauli_pow(ring: &LocalRing, p: &PauliElement, l: u64) -> PauliElement {
    let big_n = ring.phase_order() as u64;
    let pairs = (l as u128 * (l as u128).saturating_sub(1) / 2) % ring.characteristic() as u128;
    let twist = ring.char_exp(ring.mul(ring.from_int(pairs as i64), ring.dot(&p.b, &p.a)));
    let scalar = ring.from_int((l % ring.characteristic() as u64) as i64);
    PauliElement {
        phase: ((l % big_n) * p.phase as u64 % big_n) as u32 + twist,
        a: ring.scale_vec(scalar, &p.a),
        b: ring.scale_vec(scalar, &p.b),
    }
    .normalized(ring)
}

impl PauliElement {
    fn normalized(mut self, ring: &LocalRing) -> Self {
        self.phase %= ring.phase_order();
        self
    }
}

/// Least `l >= 1` with `P^l = I`.
pub fn pauli_order(ring: &LocalRing, p: &PauliElement) -> Result<u32> {
    let big_n = ring.phase_order();
    (1..=big_n)
        .find(|&l| pauli_pow(ring, p, l as u64).is_identity())
        .ok_or_else(|| Error::consistency(format!("order of {p} does not divide {big_n}")))
}

/// `N = 2c` for even characteristic `c`, else `c`.
pub fn group_exponent(ring: &LocalRing) -> u32 {
    ring.phase_order()
}

/// `lcm` of the orders of all phase-free `X(a)Z(b)` with `n = 1`.
pub fn group_exponent_by_orders(ring: &LocalRing) -> Result<u32> {
    let mut acc = 1u32;
    for a in ring.elements() {
        for b in ring.elements() {
            let o = pauli_order(ring, &PauliElement { phase: 0, a: vec![a], b: vec![b] })?;
            acc = acc / egcd(acc as i64, o as i64).0 as u32 * o;
        }
    }
    Ok(acc)
}

/// `P P' = P' P` iff `e(<Psi(P), Psi(P')>_s) = 0`.
pub fn commute(ring: &LocalRing, p: &PauliElement, q: &PauliElement) -> Result<bool> {
    check_same_n(p, q)?;
    Ok(ring.char_exp(symplectic_inner_unchecked(ring, &p.vector(), &q.vector())) == 0)
}

/// A stabilizer group presented by lifts of the cyclic generators of a code.
#[derive(Debug, Clone)]
pub struct StabilizerGroup {
    ring: Arc<LocalRing>,
    n: usize,
    generators: Vec<PauliElement>,
    decomposition: CyclicDecomposition,
}

impl StabilizerGroup {
    pub fn ring(&self) -> &Arc<LocalRing> {
        &self.ring
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliElement] {
        &self.generators
    }

    pub fn orders(&self) -> &[u32] {
        self.decomposition.orders()
    }

    pub fn order(&self) -> u128 {
        self.decomposition.order()
    }

    /// `prod_j g_j^{c_j}` for an exponent tuple.
    pub fn element(&self, tuple: &[u32]) -> PauliElement {
        self.generators.iter().zip(tuple).fold(PauliElement::identity(self.n), |acc, (g, &c)| {
            pauli_mul(&self.ring, &acc, &pauli_pow(&self.ring, g, c as u64)).expect("same n")
        })
    }

    /// All elements, exponent tuples in mixed-radix order (first digit fastest).
    pub fn elements(&self, limits: Limits) -> Result<Vec<PauliElement>> {
        limits.check("stabilizer group expansion", self.order(), ENUMERATION_LIMIT)?;
        let orders = self.orders();
        let mut out = Vec::with_capacity(self.order() as usize);
        let mut tuple = vec![0u32; orders.len()];
        loop {
            out.push(self.element(&tuple));
            let mut j = 0;
            loop {
                if j == tuple.len() {
                    return Ok(out);
                }
                tuple[j] += 1;
                if tuple[j] < orders[j] {
                    break;
                }
                tuple[j] = 0;
                j += 1;
            }
        }
    }

    /// Generators commute pairwise and `g_j^{m_j} = I`. Together with the
    /// direct-sum decomposition this makes the group abelian, maps it onto
    /// the code bijectively, and leaves no nontrivial scalar in it.
    pub fn check(&self) -> Result<()> {
        for (i, g) in self.generators.iter().enumerate() {
            for h in &self.generators[i + 1..] {
                if !commute(&self.ring, g, h)? {
                    return Err(Error::consistency(format!("lifted generators {g} and {h} do not commute")));
                }
            }
            let m = self.orders()[i];
            if !pauli_pow(&self.ring, g, m as u64).is_identity() {
                return Err(Error::consistency(format!("{g}^{m} is not the identity")));
            }
        }
        Ok(())
    }
}

/// Validity of an explicitly listed stabilizer group: contains the identity,
/// closed under products, abelian, and `Psi` injective (so the only scalar
/// in the group is the identity).
pub fn is_valid_stabilizer(ring: &LocalRing, elements: &[PauliElement]) -> Result<bool> {
    let Some(first) = elements.first() else { return Ok(false) };
    let set: HashSet<&PauliElement> = elements.iter().collect();
    if !set.contains(&PauliElement::identity(first.n())) {
        return Ok(false);
    }
    let vectors: HashSet<Vec<Elem>> = elements.iter().map(|p| p.vector()).collect();
    if vectors.len() != set.len() {
        return Ok(false);
    }
    for p in elements {
        for q in elements {
            if !commute(ring, p, q)? || !set.contains(&pauli_mul(ring, p, q)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Smallest `t >= 0` with `m t = -k (mod N)`.
fn solve_phase(m: u32, k: u32, big_n: u32) -> Option<u32> {
    let (g, s, _) = egcd(m as i64, big_n as i64);
    let rhs = (big_n as i64 - k as i64) % big_n as i64;
    if rhs % g != 0 {
        return None;
    }
    let modulus = big_n as i64 / g;
    Some(((rhs / g) * s).rem_euclid(modulus) as u32)
}

/// Lifts a self-orthogonal code to a stabilizer group: each cyclic generator
/// `v_j` of order `m_j` gets the phase `t_j` solving `m_j t_j + k_j = 0 (mod N)`,
/// where `k_j` is the phase of `(X(a_j)Z(b_j))^{m_j}`.
pub fn stabilizer_lift(code: &Code) -> Result<StabilizerGroup> {
    if !code.is_self_orthogonal() {
        return Err(Error::invalid("stabilizer lift needs a self-orthogonal code"));
    }
    let ring = Arc::clone(code.ring());
    let big_n = ring.phase_order();
    let decomposition = code.decomposition().clone();
    let generators = decomposition
        .generators()
        .iter()
        .zip(decomposition.orders())
        .map(|(v, &m)| {
            let base = PauliElement::from_vector(v);
            let k = pauli_pow(&ring, &base, m as u64).phase;
            let t = solve_phase(m, k, big_n).ok_or_else(|| {
                Error::consistency(format!("phase congruence {m} t = -{k} (mod {big_n}) has no solution"))
            })?;
            Ok(PauliElement { phase: t, ..base })
        })
        .collect::<Result<Vec<_>>>()?;
    let group = StabilizerGroup { ring, n: code.n(), generators, decomposition };
    group.check()?;
    Ok(group)
}

fn omega_power(ring: &LocalRing, exponent: u32) -> Complex64 {
    let theta = 2.0 * PI * exponent as f64 / ring.phase_order() as f64;
    Complex64::new(theta.cos(), theta.sin())
}

/// Index of `x in R^n` in the lexicographic basis (first coordinate most significant).
fn basis_index(q: usize, x: &[Elem]) -> usize {
    x.iter().fold(0, |acc, &c| acc * q + c as usize)
}

fn basis_vector(q: usize, n: usize, mut idx: usize) -> Vec<Elem> {
    let mut x = vec![0; n];
    for c in x.iter_mut().rev() {
        *c = (idx % q) as Elem;
        idx /= q;
    }
    x
}

fn realizer_dim(ring: &LocalRing, n: usize, limits: Limits) -> Result<usize> {
    let dim = (ring.size() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    limits.check("realizer dimension q^n", dim, REALIZER_LIMIT)?;
    Ok(dim as usize)
}

/// The matrix of `omega^l X(a) Z(b)`: column `x` is `omega^{l + e(b.x)} v_{x+a}`.
pub fn realize_matrix(ring: &LocalRing, p: &PauliElement, limits: Limits) -> Result<DMatrix<Complex64>> {
    let n = p.n();
    let q = ring.size();
    let dim = realizer_dim(ring, n, limits)?;
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let x = basis_vector(q, n, col);
        let row = basis_index(q, &ring.add_vec(&x, &p.a));
        m[(row, col)] = omega_power(ring, (p.phase + ring.char_exp(ring.dot(&p.b, &x))) % ring.phase_order());
    }
    Ok(m)
}

/// The code space fixed by a stabilizer group.
#[derive(Debug, Clone)]
pub struct QuantumCode {
    pub dimension: usize,
    pub basis: Vec<DVector<Complex64>>,
    pub projector: DMatrix<Complex64>,
}

impl QuantumCode {
    /// Squared norm of the projection of a unit-normalized `v` onto the code space.
    pub fn overlap(&self, v: &DVector<Complex64>) -> f64 {
        let v = v / Complex64::new(v.norm(), 0.0);
        (&self.projector * &v).norm_squared()
    }
}

/// Image of `(1/|S|) sum_{e in S} e`; its rank must be `q^n / |S|`.
pub fn quantum_code(ring: &LocalRing, n: usize, elements: &[PauliElement], limits: Limits) -> Result<QuantumCode> {
    let dim = realizer_dim(ring, n, limits)?;
    if elements.is_empty() {
        return Err(Error::invalid("empty stabilizer group"));
    }
    let mut projector = DMatrix::<Complex64>::zeros(dim, dim);
    for e in elements {
        projector += realize_matrix(ring, e, limits)?;
    }
    projector /= Complex64::new(elements.len() as f64, 0.0);
    let trace = projector.trace();
    let rank = trace.re.round();
    if (trace.re - rank).abs() > 1e-6 || trace.im.abs() > 1e-6 {
        return Err(Error::consistency(format!("projector trace {trace} is not an integer")));
    }
    let mut basis: Vec<DVector<Complex64>> = Vec::new();
    for col in projector.column_iter() {
        let mut v: DVector<Complex64> = col.into_owned();
        for u in &basis {
            let c = u.dotc(&v);
            v -= u * c;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v / Complex64::new(norm, 0.0));
        }
    }
    if basis.len() != rank as usize {
        return Err(Error::consistency(format!("projector rank {} differs from its trace {rank}", basis.len())));
    }
    if basis.len() * elements.len() != dim {
        return Err(Error::consistency(format!(
            "code space has dimension {} but q^n / |S| = {dim} / {}",
            basis.len(),
            elements.len()
        )));
    }
    Ok(QuantumCode { dimension: basis.len(), basis, projector })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pe(phase: u32, a: &[Elem], b: &[Elem]) -> PauliElement {
        PauliElement { phase, a: a.to_vec(), b: b.to_vec() }
    }

    fn close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> bool {
        (a - b).norm() < 1e-9
    }

    #[test]
    fn products_and_powers() {
        let f4 = LocalRing::parse("GF4").unwrap();
        assert!(pauli_mul(&f4, &pe(0, &[1], &[1]), &pe(0, &[1], &[1])).unwrap().is_identity());
        let z4 = LocalRing::parse("Z4").unwrap();
        assert_eq!(pauli_mul(&z4, &pe(0, &[1], &[1]), &pe(0, &[1], &[1])).unwrap(), pe(2, &[2], &[2]));
        assert_eq!(pauli_pow(&z4, &pe(0, &[1], &[1]), 4), pe(4, &[0], &[0]));
        assert_eq!(pauli_order(&z4, &pe(0, &[1], &[1])).unwrap(), 8);
        assert_eq!(pauli_order(&z4, &PauliElement::identity(2)).unwrap(), 1);
        let z3 = LocalRing::parse("Z3").unwrap();
        for a in 0..3 {
            for b in 0..3 {
                assert!(pauli_pow(&z3, &pe(0, &[a], &[b]), 3).is_identity());
            }
        }
    }

    #[test]
    fn powers_match_repeated_products() {
        for name in ["Z4", "Z8", "GF4", "F2XY", "Z9"] {
            let r = LocalRing::parse(name).unwrap();
            for a in r.elements() {
                for b in r.elements() {
                    let p = pe(1, &[a], &[b]);
                    let mut acc = PauliElement::identity(1);
                    for l in 0..=2 * r.phase_order() as u64 {
                        assert_eq!(pauli_pow(&r, &p, l), acc, "{name} {a} {b} {l}");
                        acc = pauli_mul(&r, &acc, &p).unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn exponents() {
        for (name, n) in [("Z3", 3), ("Z4", 8), ("Z8", 16), ("GF4", 4), ("F2XY", 4)] {
            let r = LocalRing::parse(name).unwrap();
            assert_eq!(group_exponent(&r), n);
            assert_eq!(group_exponent_by_orders(&r).unwrap(), n);
        }
    }

    #[test]
    fn commutation() {
        let z4 = LocalRing::parse("Z4").unwrap();
        assert!(!commute(&z4, &pe(0, &[1], &[0]), &pe(0, &[0], &[1])).unwrap());
        assert!(commute(&z4, &pe(0, &[1], &[3]), &pe(0, &[1], &[3])).unwrap());
    }

    #[test]
    fn realizer_is_a_homomorphism() {
        let z4 = LocalRing::parse("Z4").unwrap();
        let lim = Limits::default();
        let ps = [pe(0, &[1], &[0]), pe(3, &[0], &[1]), pe(5, &[2], &[3]), pe(1, &[3], &[3])];
        for p in &ps {
            for q in &ps {
                let lhs = realize_matrix(&z4, &pauli_mul(&z4, p, q).unwrap(), lim).unwrap();
                let rhs = realize_matrix(&z4, p, lim).unwrap() * realize_matrix(&z4, q, lim).unwrap();
                assert!(close(&lhs, &rhs));
            }
            let m = realize_matrix(&z4, p, lim).unwrap();
            assert!(close(&(&m * m.adjoint()), &DMatrix::identity(4, 4)));
        }
    }

    #[test]
    fn f4_matrices() {
        let f4 = LocalRing::parse("GF4").unwrap();
        let lim = Limits::default();
        let x = realize_matrix(&f4, &pe(0, &[1], &[0]), lim).unwrap();
        let z = realize_matrix(&f4, &pe(0, &[0], &[1]), lim).unwrap();
        let re = |rows: [[f64; 4]; 4]| DMatrix::from_fn(4, 4, |i, j| Complex64::new(rows[i][j], 0.0));
        assert!(close(&x, &re([[0., 1., 0., 0.], [1., 0., 0., 0.], [0., 0., 0., 1.], [0., 0., 1., 0.]])));
        assert!(close(&z, &re([[1., 0., 0., 0.], [0., 1., 0., 0.], [0., 0., -1., 0.], [0., 0., 0., -1.]])));
    }

    #[test]
    fn phase_congruence() {
        assert_eq!(solve_phase(2, 2, 8), Some(3));
        assert_eq!(solve_phase(2, 1, 8), None);
        assert_eq!(solve_phase(1, 0, 4), Some(0));
    }

    #[test]
    fn lift_of_zero_code() {
        let z4 = LocalRing::parse("Z4").unwrap();
        let g = stabilizer_lift(&Code::zero(z4.clone(), 1).unwrap()).unwrap();
        let els = g.elements(Limits::default()).unwrap();
        assert_eq!(els, vec![PauliElement::identity(1)]);
        assert_eq!(quantum_code(&z4, 1, &els, Limits::default()).unwrap().dimension, 4);
    }
}
