//! Codes in `R^{2n}`: symplectic form, self-orthogonality, duals, freeness
//! and the standard form of free self-orthogonal codes.
//!
//! A vector of `R^{2n}` is stored as `(a_1..a_n | b_1..b_n)`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::isometry::{tau_i, tau_sigma};
use crate::normalforms::{self, decode, encode, CyclicDecomposition, RingMatrix, Subgroup};
use crate::ring::{Elem, LocalRing};

/// `<(a,b),(a',b')> = b.a' - b'.a`.
pub fn symplectic_inner(ring: &LocalRing, v: &[Elem], w: &[Elem]) -> Result<Elem> {
    if v.len() != w.len() || !v.len().is_multiple_of(2) {
        return Err(Error::DimensionMismatch { expected: v.len(), found: w.len() });
    }
    Ok(symplectic_inner_unchecked(ring, v, w))
}

#[inline]
pub(crate) fn symplectic_inner_unchecked(ring: &LocalRing, v: &[Elem], w: &[Elem]) -> Elem {
    let n = v.len() / 2;
    let (a, b) = v.split_at(n);
    let (a2, b2) = w.split_at(n);
    ring.sub(ring.dot(b, a2), ring.dot(b2, a))
}

/// Number of positions `i` with `(a_i, b_i) != (0, 0)`.
pub fn symplectic_weight(v: &[Elem]) -> usize {
    let n = v.len() / 2;
    (0..n).filter(|&i| v[i] != 0 || v[n + i] != 0).count()
}

/// A submodule of `R^{2n}` given by generators.
#[derive(Clone)]
pub struct Code {
    ring: Arc<LocalRing>,
    n: usize,
    generators: Vec<Vec<Elem>>,
    span: Subgroup,
    decomposition: CyclicDecomposition,
    minimal: Vec<Vec<Elem>>,
}

impl fmt::Debug for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Code")
            .field("ring", &self.ring.name())
            .field("n", &self.n)
            .field("generators", &self.generators)
            .field("cardinality", &self.cardinality())
            .finish()
    }
}

impl Code {
    pub fn new(ring: Arc<LocalRing>, n: usize, generators: Vec<Vec<Elem>>) -> Result<Code> {
        if n == 0 {
            return Err(Error::invalid("codes need n >= 1"));
        }
        normalforms::check_lengths(2 * n, &generators)?;
        if let Some(&bad) = generators.iter().flatten().find(|&&x| x as usize >= ring.size()) {
            return Err(Error::invalid(format!("element code {bad} out of range for {}", ring.name())));
        }
        let span = normalforms::span(&ring, 2 * n, &generators);
        Self::from_parts(ring, n, generators, span)
    }

    pub fn from_matrix(n: usize, g: &RingMatrix) -> Result<Code> {
        Code::new(Arc::clone(g.ring()), n, g.row_vecs())
    }

    fn from_parts(ring: Arc<LocalRing>, n: usize, generators: Vec<Vec<Elem>>, span: Subgroup) -> Result<Code> {
        let basis = ring.additive_basis();
        let preferred: Vec<Vec<i64>> = generators
            .iter()
            .flat_map(|g| basis.iter().map(|&b| encode(&ring, &ring.scale_vec(b, g))).collect::<Vec<_>>())
            .collect();
        let decomposition = CyclicDecomposition::from_subgroup(&ring, 2 * n, &span, &preferred)?;
        let minimal = minimal_generating_set(&ring, 2 * n, &generators);
        Ok(Code { ring, n, generators, span, decomposition, minimal })
    }

    pub(crate) fn from_subgroup(ring: Arc<LocalRing>, n: usize, span: Subgroup) -> Result<Code> {
        let generators: Vec<Vec<Elem>> = span.generators().iter().map(|g| decode(&ring, g)).collect();
        Self::from_parts(ring, n, generators, span)
    }

    /// The zero code `{0}`.
    pub fn zero(ring: Arc<LocalRing>, n: usize) -> Result<Code> {
        Code::new(ring, n, Vec::new())
    }

    /// The whole ambient space `R^{2n}`.
    pub fn ambient(ring: Arc<LocalRing>, n: usize) -> Result<Code> {
        let gens = (0..2 * n)
            .map(|i| {
                let mut e = vec![0; 2 * n];
                e[i] = 1;
                e
            })
            .collect();
        Code::new(ring, n, gens)
    }

    pub fn ring(&self) -> &Arc<LocalRing> {
        &self.ring
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[Vec<Elem>] {
        &self.generators
    }

    pub fn generator_matrix(&self) -> RingMatrix {
        RingMatrix::from_rows(Arc::clone(&self.ring), 2 * self.n, &self.generators).expect("validated rows")
    }

    pub fn decomposition(&self) -> &CyclicDecomposition {
        &self.decomposition
    }

    pub(crate) fn subgroup(&self) -> &Subgroup {
        &self.span
    }

    pub fn cardinality(&self) -> u128 {
        self.span.order()
    }

    pub fn is_zero(&self) -> bool {
        self.cardinality() == 1
    }

    /// Minimal number of generators `mu = dim_F C/mC` and a generating set of
    /// that size taken from the given generators.
    pub fn minimal_generators(&self) -> (usize, &[Vec<Elem>]) {
        (self.minimal.len(), &self.minimal)
    }

    /// `C` is free iff `|C| = q^mu`.
    pub fn is_free(&self) -> bool {
        (self.ring.size() as u128).checked_pow(self.minimal.len() as u32) == Some(self.cardinality())
    }

    /// Rank of a free code.
    pub fn free_rank(&self) -> Option<usize> {
        self.is_free().then_some(self.minimal.len())
    }

    pub fn contains(&self, v: &[Elem]) -> Result<bool> {
        if v.len() != 2 * self.n {
            return Err(Error::DimensionMismatch { expected: 2 * self.n, found: v.len() });
        }
        Ok(self.span.contains(&encode(&self.ring, v)))
    }

    /// Set equality of codes over the same ring and length.
    pub fn same_code(&self, other: &Code) -> bool {
        self.ring.spec() == other.ring.spec() && self.n == other.n && self.span == other.span
    }

    pub fn is_subcode_of(&self, other: &Code) -> bool {
        self.ring.spec() == other.ring.spec() && self.n == other.n && self.span.is_subgroup_of(&other.span)
    }

    /// All generator pairs are symplectically orthogonal; bilinearity extends
    /// this to the whole code.
    pub fn is_self_orthogonal(&self) -> bool {
        let g = &self.generators;
        (0..g.len()).all(|i| (i + 1..g.len()).all(|j| symplectic_inner_unchecked(&self.ring, &g[i], &g[j]) == 0))
    }

    /// The symplectic dual `C^perp`.
    pub fn dual(&self) -> Result<Code> {
        let ring = &self.ring;
        let ker = normalforms::pairing_kernel(ring, 2 * self.n, &self.generators, |v, w| {
            symplectic_inner_unchecked(ring, v, w)
        })?;
        Code::from_subgroup(Arc::clone(ring), self.n, ker)
    }

    pub fn is_self_dual(&self) -> Result<bool> {
        Ok(self.is_self_orthogonal() && self.dual()?.cardinality() == self.cardinality())
    }

    /// `C cap D` for codes of the same length.
    pub fn intersection(&self, other: &Code) -> Result<Code> {
        self.check_compatible(other)?;
        Code::from_subgroup(Arc::clone(&self.ring), self.n, self.span.intersection(&other.span))
    }

    pub fn sum(&self, other: &Code) -> Result<Code> {
        self.check_compatible(other)?;
        let gens = self.generators.iter().chain(&other.generators).cloned().collect();
        Code::new(Arc::clone(&self.ring), self.n, gens)
    }

    fn check_compatible(&self, other: &Code) -> Result<()> {
        if self.ring.spec() != other.ring.spec() {
            return Err(Error::invalid("codes over different rings"));
        }
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: other.n });
        }
        Ok(())
    }

    /// Image of the code under an R-linear map given on vectors.
    pub fn map(&self, f: impl Fn(&[Elem]) -> Vec<Elem>) -> Result<Code> {
        Code::new(Arc::clone(&self.ring), self.n, self.generators.iter().map(|g| f(g)).collect())
    }

    /// Standard form of a free self-orthogonal code.
    pub fn standard_form(&self) -> Result<StandardForm> {
        standard_form(self)
    }
}

/// Greedy Nakayama selection: keep a generator iff it is not in `mC` plus the
/// span of the ones kept so far.
fn minimal_generating_set(ring: &LocalRing, len: usize, gens: &[Vec<Elem>]) -> Vec<Vec<Elem>> {
    let radical_gens: Vec<Vec<Elem>> = gens
        .iter()
        .flat_map(|g| ring.maximal_ideal_generators().iter().map(move |&z| ring.scale_vec(z, g)))
        .collect();
    let mut kept: Vec<Vec<Elem>> = Vec::new();
    let mut current = normalforms::span(ring, len, &radical_gens);
    for g in gens {
        if current.contains(&encode(ring, g)) {
            continue;
        }
        kept.push(g.clone());
        let all: Vec<Vec<Elem>> = radical_gens.iter().chain(&kept).cloned().collect();
        current = normalforms::span(ring, len, &all);
    }
    kept
}

/// One step of a standard-form trail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Isometry {
    /// `tau_sigma` for the permutation in one-line notation (0-based).
    Permute(Vec<usize>),
    /// `tau_i` for the 0-based position `i`.
    Tau(usize),
}

impl Isometry {
    pub fn apply(&self, ring: &LocalRing, v: &[Elem]) -> Vec<Elem> {
        match self {
            Isometry::Permute(sigma) => tau_sigma(sigma, v),
            Isometry::Tau(i) => tau_i(ring, *i, v),
        }
    }
}

/// Applies a trail left to right.
pub fn apply_trail(ring: &LocalRing, trail: &[Isometry], v: &[Elem]) -> Vec<Elem> {
    trail.iter().fold(v.to_vec(), |acc, step| step.apply(ring, &acc))
}

/// `C' = im(I_k | M | N_1 | N_2)` together with the isometries taking `C` to `C'`.
#[derive(Debug, Clone)]
pub struct StandardForm {
    pub k: usize,
    pub m: RingMatrix,
    pub n1: RingMatrix,
    pub n2: RingMatrix,
    pub trail: Vec<Isometry>,
    pub code: Code,
}

impl StandardForm {
    pub fn generator_matrix(&self) -> RingMatrix {
        self.code.generator_matrix()
    }

    /// `N_1 + N_2 M^T`.
    pub fn symmetry_matrix(&self) -> RingMatrix {
        self.n1.add(&self.n2.mul(&self.m.transpose()).expect("shapes")).expect("shapes")
    }
}

fn standard_form(code: &Code) -> Result<StandardForm> {
    let k = code.free_rank().ok_or_else(|| Error::invalid("standard form needs a free code"))?;
    if !code.is_self_orthogonal() {
        return Err(Error::invalid("standard form needs a self-orthogonal code"));
    }
    let ring = Arc::clone(code.ring());
    let r = &*ring;
    let n = code.n();
    let mut g: Vec<Vec<Elem>> = code.minimal_generators().1.to_vec();
    let mut trail = Vec::new();
    let swap = |i: usize, j: usize| -> Isometry {
        let mut sigma: Vec<usize> = (0..n).collect();
        sigma.swap(i, j);
        Isometry::Permute(sigma)
    };
    for row in 0..k {
        let mut steps = Vec::new();
        if let Some(j) = (row..n).find(|&j| r.is_unit(g[row][j])) {
            if j != row {
                steps.push(swap(row, j));
            }
        } else if let Some(j) = (row..n).find(|&j| r.is_unit(g[row][n + j])) {
            steps.push(Isometry::Tau(j));
            if j != row {
                steps.push(swap(row, j));
            }
        } else {
            return Err(Error::consistency(format!(
                "no unit pivot for row {row}: the code is not free and self-orthogonal"
            )));
        }
        for step in steps {
            for v in g.iter_mut() {
                *v = step.apply(r, v);
            }
            trail.push(step);
        }
        let inv = r.inv(g[row][row]).expect("unit pivot");
        g[row] = r.scale_vec(inv, &g[row]);
        for other in 0..k {
            if other != row && g[other][row] != 0 {
                let f = g[other][row];
                g[other] = r.sub_vec(&g[other], &r.scale_vec(f, &g[row]));
            }
        }
    }
    let full = RingMatrix::from_rows(Arc::clone(&ring), 2 * n, &g)?;
    let m = full.columns(k..n);
    let n1 = full.columns(n..n + k);
    let n2 = full.columns(n + k..2 * n);
    let image = Code::new(Arc::clone(&ring), n, g)?;
    let moved = code.map(|v| apply_trail(r, &trail, v))?;
    if !moved.same_code(&image) {
        return Err(Error::consistency("standard-form trail does not map the code onto its normal form"));
    }
    let form = StandardForm { k, m, n1, n2, trail, code: image };
    if !form.symmetry_matrix().is_symmetric() {
        return Err(Error::consistency("N1 + N2 M^T is not symmetric for a self-orthogonal code"));
    }
    Ok(form)
}

/// Generator matrix of the dual of `im(I_k | M | N_1 | N_2)`:
/// rows `(I_k 0 N_1^T 0)`, `(0 I_{n-k} N_2^T 0)`, `(0 0 M^T -I_{n-k})`.
pub fn dual_standard_form(k: usize, m: &RingMatrix, n1: &RingMatrix, n2: &RingMatrix) -> Result<RingMatrix> {
    let ring = Arc::clone(n1.ring());
    let rest = m.ncols();
    if (m.nrows(), n1.nrows(), n1.ncols(), n2.nrows(), n2.ncols()) != (k, k, k, k, rest) {
        return Err(Error::invalid("block shapes must be M: k x (n-k), N1: k x k, N2: k x (n-k)"));
    }
    let sym = n1.add(&n2.mul(&m.transpose())?)?;
    if !sym.is_symmetric() {
        return Err(Error::invalid("N1 + N2 M^T is not symmetric"));
    }
    let zero = |r, c| RingMatrix::zeros(Arc::clone(&ring), r, c);
    let id = |s| RingMatrix::identity(Arc::clone(&ring), s);
    let top = RingMatrix::hcat(&[&id(k), &zero(k, rest), &n1.transpose(), &zero(k, rest)])?;
    let middle = RingMatrix::hcat(&[&zero(rest, k), &id(rest), &n2.transpose(), &zero(rest, rest)])?;
    let bottom = RingMatrix::hcat(&[&zero(rest, k), &zero(rest, rest), &m.transpose(), &id(rest).neg()])?;
    RingMatrix::vcat(&[&top, &middle, &bottom])
}
