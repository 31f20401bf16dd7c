//! Reduction of codes to the residue field, colon modules, the distance
//! comparisons between a code and its reduction, and a randomized search
//! over free stabilizer codes comparing the two relative distances.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::Serialize;

use crate::code::{symplectic_weight, Code};
use crate::error::{Error, Limits, Result};
use crate::metrics::{enumerate, min_distance, relative_distance, split_minima, Best, Minimum, Visitor};
use crate::normalforms::{ambient_moduli, encode, preimage, RingMatrix};
use crate::ring::{Elem, LocalRing};

/// Name of the random generator used by every seeded routine here.
pub const RNG_NAME: &str = "Pcg64 (rand_pcg, seed_from_u64)";

/// `rho(alpha x)` coordinatewise, which is the residue of `x`.
pub fn reduce_vector(ring: &LocalRing, v: &[Elem]) -> Vec<Elem> {
    v.iter().map(|&x| ring.residue(x)).collect()
}

/// `m^{2n}` as a code.
fn radical_code(ring: &Arc<LocalRing>, n: usize) -> Result<Code> {
    let gens = (0..2 * n)
        .flat_map(|i| {
            ring.maximal_ideal_generators().iter().map(move |&z| {
                let mut e = vec![0; 2 * n];
                e[i] = z;
                e
            })
        })
        .collect();
    Code::new(Arc::clone(ring), n, gens)
}

/// `alpha R^{2n}` as a code.
fn socle_code(ring: &Arc<LocalRing>, n: usize) -> Result<Code> {
    let alpha = ring.socle_generator();
    let gens = (0..2 * n)
        .map(|i| {
            let mut e = vec![0; 2 * n];
            e[i] = alpha;
            e
        })
        .collect();
    Code::new(Arc::clone(ring), n, gens)
}

/// The reduced code over the residue field: the span of the residues of
/// the generators. Checks `|reduced| = |C| / |C cap m^{2n}|`.
pub fn reduce_code(code: &Code) -> Result<Code> {
    let ring = code.ring();
    let field = ring.residue_field();
    let gens: Vec<Vec<Elem>> = code.generators().iter().map(|g| reduce_vector(ring, g)).collect();
    let reduced = Code::new(field, code.n(), gens)?;
    let radical_part = code.intersection(&radical_code(ring, code.n())?)?;
    if reduced.cardinality() * radical_part.cardinality() != code.cardinality() {
        return Err(Error::consistency(format!(
            "reduced code has {} elements, expected {} / {}",
            reduced.cardinality(),
            code.cardinality(),
            radical_part.cardinality()
        )));
    }
    Ok(reduced)
}

/// `(C : alpha) = { v : alpha v in C }`. Checks `alpha (C:alpha) = C cap alpha R^{2n}`.
pub fn colon_module(code: &Code) -> Result<Code> {
    let ring = code.ring();
    let len = 2 * code.n();
    let alpha = ring.socle_generator();
    let moduli = ambient_moduli(ring, len);
    // The multiplication-by-alpha map on additive generators of R^{2n}.
    let pairs: Vec<(Vec<i64>, Vec<i64>)> = (0..len)
        .flat_map(|i| {
            ring.additive_basis().into_iter().map(move |b| {
                let mut e = vec![0; len];
                e[i] = b;
                (encode(ring, &ring.scale_vec(alpha, &e)), encode(ring, &e))
            })
        })
        .collect();
    let target = code.subgroup().generators();
    let colon = Code::from_subgroup(Arc::clone(ring), code.n(), preimage(&moduli, &moduli, &pairs, &target))?;
    let scaled = colon.map(|v| ring.scale_vec(alpha, v))?;
    if !scaled.same_code(&code.intersection(&socle_code(ring, code.n())?)?) {
        return Err(Error::consistency("alpha (C:alpha) differs from C cap alpha R^{2n}"));
    }
    Ok(colon)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    NotApplicable,
}

impl Verdict {
    fn from_bool(ok: bool) -> Verdict {
        if ok {
            Verdict::Holds
        } else {
            Verdict::Violated
        }
    }
}

/// Distances of a self-orthogonal code, its reduction and its colon module,
/// with verdicts for the comparisons between them.
#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    pub ring: String,
    pub field: String,
    pub n: usize,
    pub free: bool,
    pub free_rank: Option<usize>,
    pub cardinality: u128,
    pub dual_cardinality: u128,
    pub reduced_dimension: usize,
    pub self_dual: bool,
    /// `d_s(C)`; absent for the zero code.
    pub ds_code: Option<usize>,
    /// `d_s` of the reduced code; absent when it is zero.
    pub ds_reduced: Option<usize>,
    /// `d_s` of the reduction of `(C : alpha)`.
    pub ds_colon_reduced: Option<usize>,
    /// `dist` of the code relative to its dual.
    pub dist_ring: usize,
    pub dist_ring_witness: Vec<Elem>,
    /// `dist` of the reduced code relative to its dual over the residue field.
    pub dist_field: usize,
    /// Minimum weight of the nonzero residues of words in `C^perp - C`.
    pub lnk_quantity: Option<usize>,
    /// `d_s` of (reduction of `C^perp`) minus the reduced code.
    pub reduced_dual_gap: Option<usize>,
    pub reduced_pure: bool,
    /// `lnk_quantity` differs from `dist_field`.
    pub lnk_differs: bool,
    /// `d_s(C) = d_s(reduced colon) <= d_s(reduced)`, for a nonzero reduction.
    pub verdict_chain: Verdict,
    /// `d_s(C) = d_s(reduced)` for free codes.
    pub verdict_free_equality: Verdict,
    /// `dist_ring <= dist_field` for free codes, with equality when the code
    /// is self-dual, the reduction is pure, or `d_s(C)` exceeds the rank.
    pub verdict_relative: Verdict,
    pub notes: Vec<String>,
}

impl ReductionReport {
    pub fn violated(&self) -> bool {
        [self.verdict_chain, self.verdict_free_equality, self.verdict_relative].contains(&Verdict::Violated)
    }

    fn derive_verdicts(&mut self) {
        self.notes.clear();
        self.verdict_chain = match (self.ds_code, self.ds_reduced) {
            (Some(d), Some(dr)) => Verdict::from_bool(self.ds_colon_reduced == Some(d) && d <= dr),
            _ => {
                self.notes.push("reduced code is zero: distance chain not applicable".into());
                Verdict::NotApplicable
            }
        };
        self.verdict_free_equality = match (self.free, self.ds_code) {
            (true, Some(d)) => Verdict::from_bool(self.ds_reduced == Some(d)),
            _ => Verdict::NotApplicable,
        };
        self.verdict_relative = match (self.free, self.free_rank) {
            (true, Some(k)) => {
                let equality_forced =
                    self.self_dual || self.reduced_pure || self.ds_code.is_some_and(|d| d > k);
                let ok = self.dist_ring <= self.dist_field && (!equality_forced || self.dist_ring == self.dist_field);
                Verdict::from_bool(ok)
            }
            _ => {
                self.notes.push("code is not free: relative distances recorded without a claim".into());
                Verdict::NotApplicable
            }
        };
        if self.lnk_differs {
            let lnk = self.lnk_quantity.map_or("undefined".to_string(), |w| w.to_string());
            self.notes.push(format!(
                "minimum weight of reduced C^perp - C is {lnk}, relative distance of the reduction is {}",
                self.dist_field
            ));
        }
    }
}

/// Minimum weight of the nonzero residues of words of `outer` outside `inner`.
struct ResidueOutside<'a> {
    inner: &'a Code,
    best: Best,
}

impl Visitor for ResidueOutside<'_> {
    fn visit(&mut self, v: &[Elem]) {
        let ring = self.inner.ring();
        let reduced = reduce_vector(ring, v);
        let w = symplectic_weight(&reduced);
        if w > 0 && self.best.improves(w, &reduced) && !self.inner.contains(v).expect("same length") {
            self.best.offer(w, &reduced);
        }
    }

    fn merge(self, other: Self) -> Self {
        ResidueOutside { inner: self.inner, best: self.best.merge(other.best) }
    }
}

fn weight_of(m: Option<Minimum>) -> Option<usize> {
    m.map(|m| m.weight)
}

pub fn distance_chain_report(code: &Code, limits: Limits) -> Result<ReductionReport> {
    if !code.is_self_orthogonal() {
        return Err(Error::invalid("distance comparison needs a self-orthogonal code"));
    }
    let ring = code.ring();
    let dual = code.dual()?;
    let ring_side = relative_distance(code, limits)?;
    let reduced = reduce_code(code)?;
    let reduced_side = relative_distance(&reduced, limits)?;
    let colon_reduced = reduce_code(&colon_module(code)?)?;
    let ds_colon_reduced = if colon_reduced.is_zero() { None } else { Some(min_distance(&colon_reduced, limits)?.weight) };
    let ds_reduced = if reduced.is_zero() { None } else { Some(min_distance(&reduced, limits)?.weight) };
    let lnk = enumerate(dual.decomposition(), limits, || ResidueOutside { inner: code, best: Best::default() })?;
    let lnk_quantity = weight_of(lnk.best.into_inner());
    let reduced_dual = reduce_code(&dual)?;
    let reduced_dual_gap = weight_of(split_minima(&reduced_dual, &reduced, limits)?.outside);
    let field = ring.residue_field();
    let mut report = ReductionReport {
        ring: ring.name(),
        field: field.name(),
        n: code.n(),
        free: code.is_free(),
        free_rank: code.free_rank(),
        cardinality: code.cardinality(),
        dual_cardinality: dual.cardinality(),
        reduced_dimension: log_size(reduced.cardinality(), field.size()),
        self_dual: ring_side.self_dual,
        ds_code: ring_side.ds_code.as_ref().map(|m| m.weight),
        ds_reduced,
        ds_colon_reduced,
        dist_ring: ring_side.dist.weight,
        dist_ring_witness: ring_side.dist.witness,
        dist_field: reduced_side.dist.weight,
        lnk_differs: lnk_quantity != Some(reduced_side.dist.weight),
        lnk_quantity,
        reduced_dual_gap,
        reduced_pure: reduced_side.pure,
        verdict_chain: Verdict::NotApplicable,
        verdict_free_equality: Verdict::NotApplicable,
        verdict_relative: Verdict::NotApplicable,
        notes: Vec::new(),
    };
    report.derive_verdicts();
    Ok(report)
}

fn log_size(mut size: u128, base: usize) -> usize {
    let mut d = 0;
    while size > 1 {
        size /= base as u128;
        d += 1;
    }
    d
}

/// `im(I_k M | N1 N2)` from `M`, `N2` and a symmetric `S`, with `N1 = S - N2 M^T`.
pub fn free_code_from_parts(ring: &Arc<LocalRing>, m: &RingMatrix, n2: &RingMatrix, s: &RingMatrix) -> Result<Code> {
    let k = s.nrows();
    if !s.is_symmetric() {
        return Err(Error::invalid("S must be symmetric"));
    }
    let n1 = s.sub(&n2.mul(&m.transpose())?)?;
    let g = RingMatrix::hcat(&[&RingMatrix::identity(Arc::clone(ring), k), m, &n1, n2])?;
    let code = Code::from_matrix(k + m.ncols(), &g)?;
    if !code.is_self_orthogonal() {
        return Err(Error::consistency("N1 + N2 M^T symmetric but code not self-orthogonal"));
    }
    Ok(code)
}

/// A random free self-orthogonal code of rank `k`, determined by `(ring, n, k, seed)`.
pub fn random_free_stabilizer(ring: &Arc<LocalRing>, n: usize, k: usize, seed: u64) -> Result<Code> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("rank {k} must lie in 1..={n}")));
    }
    let mut rng = Pcg64::seed_from_u64(seed);
    let q = ring.size();
    let mut draw = |rows: usize, cols: usize| -> RingMatrix {
        let data = (0..rows * cols).map(|_| rng.gen_range(0..q) as Elem).collect();
        RingMatrix::new(Arc::clone(ring), rows, cols, data).expect("sizes match")
    };
    let m = draw(k, n - k);
    let n2 = draw(k, n - k);
    let upper = draw(k, k);
    let mut s = RingMatrix::zeros(Arc::clone(ring), k, k);
    for i in 0..k {
        for j in i..k {
            s.set(i, j, upper.get(i, j));
            s.set(j, i, upper.get(i, j));
        }
    }
    free_code_from_parts(ring, &m, &n2, &s)
}

/// Every free code `im(I_k M | N1 N2)` of rank `k`, in lexicographic order
/// of the entries of `(M, N2, upper triangle of S)`.
pub fn all_free_stabilizers(ring: &Arc<LocalRing>, n: usize, k: usize, limits: Limits) -> Result<Vec<Code>> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("rank {k} must lie in 1..={n}")));
    }
    let entries = 2 * k * (n - k) + k * (k + 1) / 2;
    let q = ring.size() as u128;
    let total = q.checked_pow(entries as u32).unwrap_or(u128::MAX);
    limits.check("exhaustive free-code enumeration", total, 1 << 16)?;
    (0..total)
        .map(|mut idx| {
            let mut digits = vec![0 as Elem; entries];
            for d in digits.iter_mut().rev() {
                *d = (idx % q) as Elem;
                idx /= q;
            }
            let (m_part, rest) = digits.split_at(k * (n - k));
            let (n2_part, s_part) = rest.split_at(k * (n - k));
            let m = RingMatrix::new(Arc::clone(ring), k, n - k, m_part.to_vec())?;
            let n2 = RingMatrix::new(Arc::clone(ring), k, n - k, n2_part.to_vec())?;
            let mut s = RingMatrix::zeros(Arc::clone(ring), k, k);
            let mut it = s_part.iter();
            for i in 0..k {
                for j in i..k {
                    let x = *it.next().expect("upper triangle");
                    s.set(i, j, x);
                    s.set(j, i, x);
                }
            }
            free_code_from_parts(ring, &m, &n2, &s)
        })
        .collect()
}

/// One trial of the relative-distance comparison.
#[derive(Debug, Clone, Serialize)]
pub struct SearchRecord {
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub ring: String,
    /// Generator rows `(a | b)` of the code.
    pub matrices: Vec<Vec<Elem>>,
    pub dist_ring: usize,
    pub dist_field: usize,
    pub equal: bool,
}

impl SearchRecord {
    /// `dist_ring > dist_field`, which no free code should produce.
    pub fn violates_inequality(&self) -> bool {
        self.dist_ring > self.dist_field
    }
}

/// Compares `dist` of a free self-orthogonal code with that of its reduction.
pub fn compare_relative_distances(code: &Code, seed: u64, limits: Limits) -> Result<SearchRecord> {
    let k = code.free_rank().ok_or_else(|| Error::invalid("relative-distance comparison needs a free code"))?;
    let ring_side = relative_distance(code, limits)?;
    let field_side = relative_distance(&reduce_code(code)?, limits)?;
    Ok(SearchRecord {
        seed,
        n: code.n(),
        k,
        ring: code.ring().name(),
        matrices: code.generators().to_vec(),
        dist_ring: ring_side.dist.weight,
        dist_field: field_side.dist.weight,
        equal: ring_side.dist.weight == field_side.dist.weight,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchSummary {
    pub generator: &'static str,
    pub trials: usize,
    pub equalities: usize,
    /// Records with `dist_ring < dist_field`.
    pub strict: Vec<SearchRecord>,
    /// Records with `dist_ring > dist_field`.
    pub violations: Vec<SearchRecord>,
}

impl SearchSummary {
    pub fn from_records(records: &[SearchRecord]) -> SearchSummary {
        SearchSummary {
            generator: RNG_NAME,
            trials: records.len(),
            equalities: records.iter().filter(|r| r.equal).count(),
            strict: records.iter().filter(|r| r.dist_ring < r.dist_field).cloned().collect(),
            violations: records.iter().filter(|r| r.violates_inequality()).cloned().collect(),
        }
    }
}

/// `trials` random free codes; trial `i` uses seed `seed + i`. Records are
/// returned in trial order.
pub fn conjecture_search(
    ring: &Arc<LocalRing>,
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
    limits: Limits,
) -> Result<Vec<SearchRecord>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(i);
            compare_relative_distances(&random_free_stabilizer(ring, n, k, s)?, s, limits)
        })
        .collect()
}

/// A random submodule with between 1 and `2n` generators and uniform entries.
pub fn random_submodule(ring: &Arc<LocalRing>, n: usize, seed: u64) -> Result<Code> {
    let mut rng = Pcg64::seed_from_u64(seed);
    let count = rng.gen_range(1..=2 * n);
    let gens = (0..count).map(|_| (0..2 * n).map(|_| rng.gen_range(0..ring.size()) as Elem).collect()).collect();
    Code::new(Arc::clone(ring), n, gens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalforms::ambient_vectors;

    fn code(ring: &str, n: usize, rows: &[&[Elem]]) -> Code {
        Code::new(LocalRing::parse(ring).unwrap(), n, rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn reduction_of_im22_is_zero() {
        let c = code("Z4", 1, &[&[2, 2]]);
        assert!(reduce_code(&c).unwrap().is_zero());
        let z = Code::zero(LocalRing::parse("Z8").unwrap(), 2).unwrap();
        assert!(reduce_code(&z).unwrap().is_zero());
    }

    #[test]
    fn colon_of_im22_by_scan() {
        let c = code("Z4", 1, &[&[2, 2]]);
        let colon = colon_module(&c).unwrap();
        let z4 = c.ring();
        let expected: Vec<Vec<Elem>> = ambient_vectors(z4, 2)
            .filter(|v| c.contains(&z4.scale_vec(2, v)).unwrap())
            .collect();
        assert_eq!(expected.len(), 8);
        assert_eq!(colon.cardinality(), 8);
        assert!(expected.iter().all(|v| colon.contains(v).unwrap()));
        let full = Code::ambient(Arc::clone(z4), 2).unwrap();
        assert!(colon_module(&full).unwrap().same_code(&full));
    }

    #[test]
    fn colon_of_free_code_reduces_like_the_code() {
        let c = code("Z8", 3, &[&[1, 0, 0, 1, 2, 2], &[0, 1, 4, 2, 1, 2]]);
        let a = reduce_code(&colon_module(&c).unwrap()).unwrap();
        assert!(a.same_code(&reduce_code(&c).unwrap()));
    }

    #[test]
    fn random_free_codes_are_deterministic() {
        let z4 = LocalRing::parse("Z4").unwrap();
        let a = random_free_stabilizer(&z4, 3, 2, 7).unwrap();
        let b = random_free_stabilizer(&z4, 3, 2, 7).unwrap();
        assert_eq!(a.generators(), b.generators());
        assert!(a.is_self_orthogonal());
        assert_eq!(a.free_rank(), Some(2));
    }

    #[test]
    fn systematic_self_dual_distance_one() {
        let z4 = LocalRing::parse("Z4").unwrap();
        let c = free_code_from_parts(
            &z4,
            &RingMatrix::zeros(Arc::clone(&z4), 2, 0),
            &RingMatrix::zeros(Arc::clone(&z4), 2, 0),
            &RingMatrix::zeros(Arc::clone(&z4), 2, 2),
        )
        .unwrap();
        assert!(c.is_self_dual().unwrap());
        assert_eq!(relative_distance(&c, Limits::default()).unwrap().dist.weight, 1);
    }

    #[test]
    fn exhaustive_free_codes_small() {
        let z4 = LocalRing::parse("Z4").unwrap();
        let codes = all_free_stabilizers(&z4, 2, 1, Limits::default()).unwrap();
        assert_eq!(codes.len(), 64);
        for c in &codes {
            let r = compare_relative_distances(c, 0, Limits::default()).unwrap();
            assert!(r.dist_ring <= r.dist_field);
        }
    }
}
