//! Symplectic isometries: interleaving, the elementary maps `tau_sigma` and
//! `tau_i`, SL2-monomial maps, and isometry-group enumeration for codes.

use std::collections::HashMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use rayon::prelude::*;
use serde::Serialize;

use crate::code::{symplectic_inner_unchecked, symplectic_weight, Code};
use crate::error::{Error, Limits, Result, MONOMIAL_LIMIT, SYMP_CODE_LIMIT, SYMP_SEARCH_LIMIT};
use crate::metrics::{enumerate, Visitor};
use crate::ring::{Elem, LocalRing};

/// `(a_1..a_n | b_1..b_n) -> (a_1, b_1 | ... | a_n, b_n)`.
pub fn gamma(v: &[Elem]) -> Vec<Elem> {
    let n = v.len() / 2;
    (0..n).flat_map(|i| [v[i], v[n + i]]).collect()
}

pub fn gamma_inverse(x: &[Elem]) -> Vec<Elem> {
    let n = x.len() / 2;
    (0..n).map(|i| x[2 * i]).chain((0..n).map(|i| x[2 * i + 1])).collect()
}

/// `tau_sigma`: position `i` receives `(a_{sigma(i)}, b_{sigma(i)})`.
pub fn tau_sigma(sigma: &[usize], v: &[Elem]) -> Vec<Elem> {
    let n = sigma.len();
    debug_assert_eq!(v.len(), 2 * n);
    (0..n).map(|i| v[sigma[i]]).chain((0..n).map(|i| v[n + sigma[i]])).collect()
}

/// `tau_i`: `(a_i, b_i) -> (b_i, -a_i)`, other positions unchanged.
pub fn tau_i(ring: &LocalRing, i: usize, v: &[Elem]) -> Vec<Elem> {
    let n = v.len() / 2;
    let mut out = v.to_vec();
    out[i] = v[n + i];
    out[n + i] = ring.neg(v[i]);
    out
}

/// A 2x2 block `[[a00, a01], [a10, a11]]` stored row-major.
pub type Block = [Elem; 4];

pub const IDENTITY_BLOCK: Block = [1, 0, 0, 1];

/// `J = [[0, -1], [1, 0]]` over `ring`.
pub fn j_block(ring: &LocalRing) -> Block {
    [0, ring.neg(1), 1, 0]
}

pub fn determinant(ring: &LocalRing, a: &Block) -> Elem {
    ring.sub(ring.mul(a[0], a[3]), ring.mul(a[1], a[2]))
}

/// `(x, y) A` for a row vector.
#[inline]
fn apply_block(ring: &LocalRing, a: &Block, x: Elem, y: Elem) -> (Elem, Elem) {
    (
        ring.add(ring.mul(x, a[0]), ring.mul(y, a[2])),
        ring.add(ring.mul(x, a[1]), ring.mul(y, a[3])),
    )
}

/// `v -> gamma^{-1}(gamma(v) diag(A_1..A_n) (P_sigma (x) I_2))`: position `i`
/// of the image is `(a_{sigma(i)}, b_{sigma(i)}) A_{sigma(i)}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SL2Monomial {
    pub blocks: Vec<Block>,
    pub sigma: Vec<usize>,
}

impl SL2Monomial {
    pub fn identity(n: usize) -> Self {
        SL2Monomial { blocks: vec![IDENTITY_BLOCK; n], sigma: (0..n).collect() }
    }

    /// Validates determinants and the permutation.
    pub fn new(ring: &LocalRing, blocks: Vec<Block>, sigma: Vec<usize>) -> Result<Self> {
        if blocks.len() != sigma.len() {
            return Err(Error::DimensionMismatch { expected: blocks.len(), found: sigma.len() });
        }
        let mut seen = vec![false; sigma.len()];
        for &s in &sigma {
            if s >= sigma.len() || std::mem::replace(&mut seen[s], true) {
                return Err(Error::invalid(format!("{sigma:?} is not a permutation")));
            }
        }
        if let Some(b) = blocks.iter().find(|b| determinant(ring, b) != 1) {
            return Err(Error::invalid(format!("block {b:?} does not have determinant 1")));
        }
        Ok(SL2Monomial { blocks, sigma })
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn apply(&self, ring: &LocalRing, v: &[Elem]) -> Vec<Elem> {
        let n = self.n();
        let mut out = vec![0; 2 * n];
        for i in 0..n {
            let s = self.sigma[i];
            let (x, y) = apply_block(ring, &self.blocks[s], v[s], v[n + s]);
            out[i] = x;
            out[n + i] = y;
        }
        out
    }

    /// One-line permutation and blocks as element codes.
    pub fn describe(&self) -> String {
        let blocks: Vec<String> = self.blocks.iter().map(|b| format!("[{} {} {} {}]", b[0], b[1], b[2], b[3])).collect();
        format!("sigma={:?} blocks={}", self.sigma, blocks.join(" "))
    }
}

/// `SL_2(R)` in lexicographic order of entry codes.
pub fn sl2(ring: &LocalRing, limits: Limits) -> Result<Vec<Block>> {
    let q = ring.size();
    limits.check("SL2 enumeration (q^4)", (q as u128).pow(4), 1 << 16)?;
    let mut out = Vec::new();
    for a in ring.elements() {
        for b in ring.elements() {
            for c in ring.elements() {
                for d in ring.elements() {
                    let m = [a, b, c, d];
                    if determinant(ring, &m) == 1 {
                        out.push(m);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Next permutation in lexicographic order; false after the last one.
fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("successor exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    while next_permutation(&mut p) {
        out.push(p.clone());
    }
    out
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn monomial_count(sl2_order: usize, n: usize) -> u128 {
    (sl2_order as u128).checked_pow(n as u32).unwrap_or(u128::MAX).saturating_mul(factorial(n))
}

/// The monomial with index `idx` in lexicographic order of `(sigma, A_1..A_n)`.
fn monomial_at(perms: &[Vec<usize>], group: &[Block], n: usize, idx: u128) -> SL2Monomial {
    let per_sigma = (group.len() as u128).pow(n as u32);
    let sigma = perms[(idx / per_sigma) as usize].clone();
    let mut rest = idx % per_sigma;
    let mut blocks = vec![IDENTITY_BLOCK; n];
    for slot in blocks.iter_mut().rev() {
        *slot = group[(rest % group.len() as u128) as usize];
        rest /= group.len() as u128;
    }
    SL2Monomial { blocks, sigma }
}

/// Does an R-linear map on `R^{2n}`, given by the images of the unit
/// vectors, preserve the symplectic weight and form?
fn preserves_ambient(ring: &LocalRing, n: usize, images: &[Vec<Elem>], vectors: &[Vec<Elem>]) -> bool {
    let apply = |v: &[Elem]| -> Vec<Elem> {
        let mut out = vec![0; 2 * n];
        for (i, &c) in v.iter().enumerate() {
            if c != 0 {
                for (o, &x) in out.iter_mut().zip(&images[i]) {
                    *o = ring.add(*o, ring.mul(c, x));
                }
            }
        }
        out
    };
    for i in 0..2 * n {
        for j in i + 1..2 * n {
            let (ei, ej) = (unit(2 * n, i), unit(2 * n, j));
            if symplectic_inner_unchecked(ring, &images[i], &images[j]) != symplectic_inner_unchecked(ring, &ei, &ej) {
                return false;
            }
        }
    }
    vectors.iter().all(|v| symplectic_weight(&apply(v)) == symplectic_weight(v))
}

fn unit(len: usize, i: usize) -> Vec<Elem> {
    let mut e = vec![0; len];
    e[i] = 1;
    e
}

/// Comparison of weight- and form-preserving linear maps of `R^{2n}` with
/// the SL2-monomial maps.
#[derive(Debug, Clone, Serialize)]
pub struct AmbientClassification {
    pub ring: String,
    pub n: usize,
    pub exhaustive: bool,
    /// Linear maps examined.
    pub examined: u128,
    /// Examined maps that preserve weight and form.
    pub isometries: u128,
    pub sl2_order: usize,
    pub monomial_group_order: u128,
    /// Every isometry found is an SL2-monomial map (and, when exhaustive,
    /// every monomial map was found).
    pub matches_monomials: bool,
    /// Sampled monomials that failed to preserve weight or form.
    pub monomial_failures: usize,
}

/// Exhaustive when `q^{4n^2} <= 2^20`, otherwise containment of the
/// monomial maps plus a random sample of linear maps.
pub fn classify_ambient_isometries(ring: &Arc<LocalRing>, n: usize, seed: u64, limits: Limits) -> Result<AmbientClassification> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let r = &**ring;
    let group = sl2(r, limits)?;
    let mono_order = monomial_count(group.len(), n);
    let len = 2 * n;
    let q = ring.size() as u128;
    let maps = q.checked_pow((len * len) as u32);
    let vectors: Vec<Vec<Elem>> = crate::normalforms::ambient_vectors(r, len).collect();
    if vectors.len() as u128 > crate::error::BRUTE_FORCE_LIMIT && !limits.force {
        return Err(Error::Guard {
            what: "ambient vectors".into(),
            size: vectors.len() as u128,
            limit: crate::error::BRUTE_FORCE_LIMIT,
        });
    }
    let decode_map = |mut idx: u128| -> Vec<Vec<Elem>> {
        (0..len)
            .map(|_| {
                (0..len)
                    .map(|_| {
                        let x = (idx % q) as Elem;
                        idx /= q;
                        x
                    })
                    .collect()
            })
            .collect()
    };
    let perms = all_permutations(n);
    let is_monomial = |images: &[Vec<Elem>]| -> bool {
        as_monomial(r, n, images).is_some_and(|m| group.contains(&m.blocks[0]) || n == 0)
    };
    match maps {
        Some(total) if total <= 1 << 20 => {
            let found: Vec<Vec<Vec<Elem>>> = (0..total)
                .into_par_iter()
                .map(decode_map)
                .filter(|images| preserves_ambient(r, n, images, &vectors))
                .collect();
            let all_monomial = found.iter().all(|m| is_monomial(m));
            Ok(AmbientClassification {
                ring: ring.name(),
                n,
                exhaustive: true,
                examined: total,
                isometries: found.len() as u128,
                sl2_order: group.len(),
                monomial_group_order: mono_order,
                matches_monomials: all_monomial && found.len() as u128 == mono_order,
                monomial_failures: 0,
            })
        }
        _ => {
            let mut rng = Pcg64::seed_from_u64(seed);
            let mut failures = 0;
            for _ in 0..1000 {
                let sigma = perms[rng.gen_range(0..perms.len())].clone();
                let blocks = (0..n).map(|_| group[rng.gen_range(0..group.len())]).collect();
                let m = SL2Monomial { blocks, sigma };
                let images: Vec<Vec<Elem>> = (0..len).map(|i| m.apply(r, &unit(len, i))).collect();
                if !preserves_ambient(r, n, &images, &vectors) {
                    failures += 1;
                }
            }
            let samples = 10_000u128;
            let mut isometries = 0;
            let mut all_monomial = true;
            for _ in 0..samples {
                let images: Vec<Vec<Elem>> =
                    (0..len).map(|_| (0..len).map(|_| rng.gen_range(0..ring.size()) as Elem).collect()).collect();
                if preserves_ambient(r, n, &images, &vectors) {
                    isometries += 1;
                    all_monomial &= is_monomial(&images);
                }
            }
            Ok(AmbientClassification {
                ring: ring.name(),
                n,
                exhaustive: false,
                examined: samples,
                isometries,
                sl2_order: group.len(),
                monomial_group_order: mono_order,
                matches_monomials: all_monomial && failures == 0,
                monomial_failures: failures,
            })
        }
    }
}

/// Recognizes a linear map (images of the unit vectors) as an SL2-monomial map.
pub fn as_monomial(ring: &LocalRing, n: usize, images: &[Vec<Elem>]) -> Option<SL2Monomial> {
    let mut sigma = vec![usize::MAX; n];
    let mut blocks = vec![IDENTITY_BLOCK; n];
    for s in 0..n {
        // Unit vectors a_s and b_s must land in one common position i.
        let (ia, ib) = (&images[s], &images[n + s]);
        let support: Vec<usize> = (0..n).filter(|&i| ia[i] != 0 || ia[n + i] != 0 || ib[i] != 0 || ib[n + i] != 0).collect();
        let [i] = support[..] else { return None };
        if sigma[i] != usize::MAX {
            return None;
        }
        sigma[i] = s;
        blocks[s] = [ia[i], ia[n + i], ib[i], ib[n + i]];
    }
    SL2Monomial::new(ring, blocks, sigma).ok()
}

/// Which maps [`enumerate_monomial_group`] and [`enumerate_symp_group`] keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GroupMode {
    /// Maps of `C` (monomials fixing `C` setwise).
    Code,
    /// Maps of `C^perp` that fix `C` setwise.
    DualFixingCode,
}

impl std::str::FromStr for GroupMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "code" | "C" => Ok(GroupMode::Code),
            "dual" | "dual-fixing-code" | "Cperp,C" => Ok(GroupMode::DualFixingCode),
            _ => Err(Error::invalid(format!("unknown group mode {s:?} (expected code or dual)"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonomialGroup {
    pub mode: GroupMode,
    pub examined: u128,
    pub order: usize,
    pub elements: Vec<SL2Monomial>,
}

fn maps_into(ring: &LocalRing, m: &SL2Monomial, domain: &Code, target: &Code) -> bool {
    domain.generators().iter().all(|g| target.contains(&m.apply(ring, g)).expect("same length"))
}

/// All SL2-monomial maps fixing `C` (and `C^perp`) setwise.
pub fn enumerate_monomial_group(code: &Code, mode: GroupMode, limits: Limits) -> Result<MonomialGroup> {
    let ring = code.ring();
    let n = code.n();
    let group = sl2(ring, limits)?;
    let total = monomial_count(group.len(), n);
    limits.check("monomial group |SL2(R)|^n n!", total, MONOMIAL_LIMIT)?;
    let dual = match mode {
        GroupMode::Code => None,
        GroupMode::DualFixingCode => Some(code.dual()?),
    };
    let perms = all_permutations(n);
    let elements: Vec<SL2Monomial> = (0..total)
        .into_par_iter()
        .map(|idx| monomial_at(&perms, &group, n, idx))
        .filter(|m| maps_into(ring, m, code, code) && dual.as_ref().is_none_or(|d| maps_into(ring, m, d, d)))
        .collect();
    Ok(MonomialGroup { mode, examined: total, order: elements.len(), elements })
}

/// An R-linear map defined on a code by the images of its decomposition generators.
#[derive(Debug, Clone)]
pub struct CodeMap {
    domain: Code,
    images: Vec<Vec<Elem>>,
}

impl CodeMap {
    /// Map given on the cyclic-decomposition generators of `domain`; the
    /// images must respect the generator orders and R-linearity.
    pub fn new(domain: Code, images: Vec<Vec<Elem>>) -> Result<CodeMap> {
        let dec = domain.decomposition();
        if images.len() != dec.rank() {
            return Err(Error::DimensionMismatch { expected: dec.rank(), found: images.len() });
        }
        let ring = Arc::clone(domain.ring());
        for (img, &m) in images.iter().zip(dec.orders()) {
            if img.len() != 2 * domain.n() {
                return Err(Error::DimensionMismatch { expected: 2 * domain.n(), found: img.len() });
            }
            let killed = (0..m).fold(vec![0; img.len()], |acc, _| ring.add_vec(&acc, img));
            if killed.iter().any(|&x| x != 0) {
                return Err(Error::invalid("generator image does not respect the generator order"));
            }
        }
        let map = CodeMap { domain, images };
        for (h, img) in map.domain.decomposition().generators().iter().zip(&map.images) {
            for b in ring.additive_basis() {
                if map.apply(&ring.scale_vec(b, h))? != ring.scale_vec(b, img) {
                    return Err(Error::invalid("map is not R-linear"));
                }
            }
        }
        Ok(map)
    }

    /// Map determined by the images of the code's own generators (for
    /// example rows of one generator matrix sent to rows of another).
    pub fn from_generator_images(domain: Code, gen_images: &[Vec<Elem>], limits: Limits) -> Result<CodeMap> {
        if gen_images.len() != domain.generators().len() {
            return Err(Error::DimensionMismatch { expected: domain.generators().len(), found: gen_images.len() });
        }
        limits.check("code map tabulation", domain.cardinality(), crate::error::BRUTE_FORCE_LIMIT)?;
        let ring = Arc::clone(domain.ring());
        let zero = vec![0; 2 * domain.n()];
        let basis = ring.additive_basis();
        let mut table: HashMap<Vec<Elem>, Vec<Elem>> = HashMap::new();
        table.insert(zero.clone(), zero);
        let mut frontier: Vec<Vec<Elem>> = vec![vec![0; 2 * domain.n()]];
        while let Some(x) = frontier.pop() {
            let fx = table[&x].clone();
            for (g, fg) in domain.generators().iter().zip(gen_images) {
                for &b in &basis {
                    let y = ring.add_vec(&x, &ring.scale_vec(b, g));
                    let fy = ring.add_vec(&fx, &ring.scale_vec(b, fg));
                    match table.get(&y) {
                        Some(existing) if *existing != fy => {
                            return Err(Error::invalid("generator images do not define a well-defined map"));
                        }
                        Some(_) => {}
                        None => {
                            table.insert(y.clone(), fy);
                            frontier.push(y);
                        }
                    }
                }
            }
        }
        let images = domain.decomposition().generators().iter().map(|h| table[h].clone()).collect();
        CodeMap::new(domain, images)
    }

    pub fn identity(domain: Code) -> CodeMap {
        let images = domain.decomposition().generators().to_vec();
        CodeMap { domain, images }
    }

    pub fn domain(&self) -> &Code {
        &self.domain
    }

    pub fn images(&self) -> &[Vec<Elem>] {
        &self.images
    }

    pub fn apply(&self, v: &[Elem]) -> Result<Vec<Elem>> {
        let ring = self.domain.ring();
        let tuple = self
            .domain
            .decomposition()
            .membership(v)?
            .ok_or_else(|| Error::invalid("vector outside the domain of the map"))?;
        let mut out = vec![0; v.len()];
        for (img, &c) in self.images.iter().zip(&tuple) {
            for _ in 0..c {
                out = ring.add_vec(&out, img);
            }
        }
        Ok(out)
    }

    /// Weight preserved on every codeword and form preserved on generator pairs.
    pub fn is_symplectic_isometry(&self, limits: Limits) -> Result<bool> {
        let ring = self.domain.ring();
        let gens = self.domain.decomposition().generators();
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                if symplectic_inner_unchecked(ring, &gens[i], &gens[j])
                    != symplectic_inner_unchecked(ring, &self.images[i], &self.images[j])
                {
                    return Ok(false);
                }
            }
        }
        struct WeightCheck<'a>(&'a CodeMap, bool);
        impl Visitor for WeightCheck<'_> {
            fn visit(&mut self, v: &[Elem]) {
                if self.1 {
                    let image = self.0.apply(v).expect("codeword");
                    self.1 = symplectic_weight(&image) == symplectic_weight(v);
                }
            }
            fn merge(self, other: Self) -> Self {
                WeightCheck(self.0, self.1 && other.1)
            }
        }
        Ok(enumerate(self.domain.decomposition(), limits, || WeightCheck(self, true))?.1)
    }

    /// Does the monomial restrict to this map (checked on generators)?
    pub fn is_restriction_of(&self, m: &SL2Monomial) -> bool {
        let ring = self.domain.ring();
        self.domain
            .decomposition()
            .generators()
            .iter()
            .zip(&self.images)
            .all(|(h, img)| m.apply(ring, h) == *img)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SympGroup {
    pub mode: GroupMode,
    pub order: usize,
    /// Candidate partial assignments visited by the search.
    pub visited: u128,
    /// Images of the decomposition generators, one list per group element.
    pub elements: Vec<Vec<Vec<Elem>>>,
}

/// All symplectic isometries `C -> C` (or of `C^perp` fixing `C`).
pub fn enumerate_symp_group(code: &Code, mode: GroupMode, limits: Limits) -> Result<SympGroup> {
    let (domain, fixed) = match mode {
        GroupMode::Code => (code.clone(), None),
        GroupMode::DualFixingCode => (code.dual()?, Some(code)),
    };
    limits.check("isometry group domain |C|", domain.cardinality(), SYMP_CODE_LIMIT)?;
    let ring = Arc::clone(domain.ring());
    let dec = domain.decomposition();
    let gens = dec.generators().to_vec();
    let orders = dec.orders().to_vec();
    if gens.is_empty() {
        return Ok(SympGroup { mode, order: 1, visited: 0, elements: vec![Vec::new()] });
    }
    // Codewords with the same weight and additive order as each generator.
    let words: Vec<Vec<Elem>> = {
        struct Collect(Vec<Vec<Elem>>);
        impl Visitor for Collect {
            fn visit(&mut self, v: &[Elem]) {
                self.0.push(v.to_vec());
            }
            fn merge(mut self, other: Self) -> Self {
                self.0.extend(other.0);
                self
            }
        }
        enumerate(dec, limits, || Collect(Vec::new()))?.0
    };
    let additive_order = |v: &[Elem]| -> u32 {
        let mut acc = v.to_vec();
        let mut k = 1;
        while acc.iter().any(|&x| x != 0) {
            acc = ring.add_vec(&acc, v);
            k += 1;
        }
        k
    };
    let candidates: Vec<Vec<usize>> = gens
        .iter()
        .zip(&orders)
        .map(|(h, &m)| {
            let w = symplectic_weight(h);
            (0..words.len())
                .filter(|&i| symplectic_weight(&words[i]) == w && additive_order(&words[i]) == m)
                .collect()
        })
        .collect();
    let space: u128 = candidates.iter().map(|c| c.len() as u128).try_fold(1u128, |a, b| a.checked_mul(b)).unwrap_or(u128::MAX);
    let _ = space;
    let visited = std::sync::atomic::AtomicU64::new(0);
    let search = |first: usize| -> Result<Vec<Vec<Vec<Elem>>>> {
        let mut found = Vec::new();
        let mut chosen = vec![first];
        let mut cursor = vec![0usize];
        // Depth-first over generator images with form pruning.
        loop {
            let depth = chosen.len();
            let consistent = {
                let d = depth - 1;
                let img = &words[chosen[d]];
                (0..d).all(|i| {
                    symplectic_inner_unchecked(&ring, &gens[i], &gens[d])
                        == symplectic_inner_unchecked(&ring, &words[chosen[i]], img)
                })
            };
            let count = visited.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
            if count as u128 > SYMP_SEARCH_LIMIT && !limits.force {
                return Err(Error::Guard {
                    what: "isometry-group search".into(),
                    size: count as u128,
                    limit: SYMP_SEARCH_LIMIT,
                });
            }
            if consistent && depth == gens.len() {
                let images: Vec<Vec<Elem>> = chosen.iter().map(|&i| words[i].clone()).collect();
                if let Ok(map) = CodeMap::new(domain.clone(), images.clone()) {
                    let fixes = fixed.is_none_or(|c| {
                        c.generators().iter().all(|g| c.contains(&map.apply(g).expect("in domain")).expect("length"))
                    });
                    if fixes && map.is_symplectic_isometry(Limits::forced())? {
                        found.push(images);
                    }
                }
            }
            if consistent && depth < gens.len() {
                chosen.push(candidates[depth][0]);
                cursor.push(0);
                if candidates[depth].is_empty() {
                    chosen.pop();
                    cursor.pop();
                } else {
                    continue;
                }
            }
            // Advance to the next sibling, backtracking as needed.
            loop {
                let d = chosen.len() - 1;
                if d == 0 {
                    return Ok(found);
                }
                cursor[d] += 1;
                if cursor[d] < candidates[d].len() {
                    chosen[d] = candidates[d][cursor[d]];
                    break;
                }
                chosen.pop();
                cursor.pop();
            }
        }
    };
    let shards: Vec<Result<Vec<Vec<Vec<Elem>>>>> = candidates[0].par_iter().map(|&first| search(first)).collect();
    let mut elements = Vec::new();
    for s in shards {
        elements.extend(s?);
    }
    Ok(SympGroup {
        mode,
        order: elements.len(),
        visited: visited.load(std::sync::atomic::Ordering::Relaxed) as u128,
        elements,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtensionResult {
    pub found: Option<SL2Monomial>,
    /// Monomials examined before stopping.
    pub examined: u128,
    pub total: u128,
}

/// First SL2-monomial (in lexicographic order of `(sigma, A_1..A_n)`)
/// restricting to `f`, or a proof of absence by exhaustion.
pub fn extension_search(f: &CodeMap, limits: Limits) -> Result<ExtensionResult> {
    let ring = f.domain().ring();
    let n = f.domain().n();
    let group = sl2(ring, limits)?;
    let total = monomial_count(group.len(), n);
    limits.check("monomial group |SL2(R)|^n n!", total, MONOMIAL_LIMIT)?;
    let perms = all_permutations(n);
    let hit = (0..total).into_par_iter().find_first(|&idx| f.is_restriction_of(&monomial_at(&perms, &group, n, idx)));
    Ok(match hit {
        Some(idx) => ExtensionResult { found: Some(monomial_at(&perms, &group, n, idx)), examined: idx + 1, total },
        None => ExtensionResult { found: None, examined: total, total },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_roundtrip() {
        assert_eq!(gamma(&[1, 2, 3, 4]), vec![1, 3, 2, 4]);
        assert_eq!(gamma_inverse(&gamma(&[5, 6, 7, 8, 9, 0])), vec![5, 6, 7, 8, 9, 0]);
        assert_eq!(gamma(&[0, 0]), vec![0, 0]);
    }

    #[test]
    fn tau_maps() {
        let z4 = LocalRing::parse("Z4").unwrap();
        assert_eq!(tau_i(&z4, 0, &[1, 2]), vec![2, 3]);
        assert_eq!(tau_sigma(&[0, 1], &[1, 2, 3, 0]), vec![1, 2, 3, 0]);
        assert_eq!(tau_sigma(&[1, 0], &[1, 2, 3, 0]), vec![2, 1, 0, 3]);
        // tau_i preserves the form on all 256 pairs of Z4^2.
        for v in crate::normalforms::ambient_vectors(&z4, 2) {
            for w in crate::normalforms::ambient_vectors(&z4, 2) {
                assert_eq!(
                    symplectic_inner_unchecked(&z4, &tau_i(&z4, 0, &v), &tau_i(&z4, 0, &w)),
                    symplectic_inner_unchecked(&z4, &v, &w)
                );
            }
        }
    }

    #[test]
    fn monomials_match_elementary_maps() {
        let z4 = LocalRing::parse("Z4").unwrap();
        let v = vec![1, 2, 3, 0, 1, 2];
        let mut blocks = vec![IDENTITY_BLOCK; 3];
        blocks[1] = j_block(&z4);
        let m = SL2Monomial::new(&z4, blocks, vec![0, 1, 2]).unwrap();
        assert_eq!(m.apply(&z4, &v), tau_i(&z4, 1, &v));
        let sigma = vec![2, 0, 1];
        let m = SL2Monomial::new(&z4, vec![IDENTITY_BLOCK; 3], sigma.clone()).unwrap();
        assert_eq!(m.apply(&z4, &v), tau_sigma(&sigma, &v));
        assert_eq!(SL2Monomial::identity(3).apply(&z4, &v), v);
    }

    #[test]
    fn sl2_orders() {
        let f2 = LocalRing::parse("GF2").unwrap();
        assert_eq!(sl2(&f2, Limits::default()).unwrap().len(), 6);
        let z4 = LocalRing::parse("Z4").unwrap();
        assert_eq!(sl2(&z4, Limits::default()).unwrap().len(), 48);
        let f3 = LocalRing::parse("GF3").unwrap();
        assert_eq!(sl2(&f3, Limits::default()).unwrap().len(), 24);
    }

    #[test]
    fn ambient_classification_n1() {
        for (name, order) in [("GF2", 6), ("Z4", 48), ("GF3", 24)] {
            let r = LocalRing::parse(name).unwrap();
            let c = classify_ambient_isometries(&r, 1, 0, Limits::default()).unwrap();
            assert!(c.exhaustive);
            assert_eq!(c.isometries, order);
            assert!(c.matches_monomials);
        }
    }

    #[test]
    fn permutations_in_lex_order() {
        assert_eq!(all_permutations(3), vec![vec![0, 1, 2], vec![0, 2, 1], vec![1, 0, 2], vec![1, 2, 0], vec![2, 0, 1], vec![2, 1, 0]]);
    }

    #[test]
    fn identity_extends() {
        let f2 = LocalRing::parse("GF2").unwrap();
        let c = Code::new(f2, 2, vec![vec![1, 0, 0, 1]]).unwrap();
        let r = extension_search(&CodeMap::identity(c), Limits::default()).unwrap();
        assert_eq!(r.found, Some(SL2Monomial::identity(2)));
    }

    #[test]
    fn tau_restricted_to_im11() {
        let f2 = LocalRing::parse("GF2").unwrap();
        let c = Code::new(Arc::clone(&f2), 1, vec![vec![1, 1]]).unwrap();
        let f = CodeMap::from_generator_images(c.clone(), &[tau_i(&f2, 0, &[1, 1])], Limits::default()).unwrap();
        let r = extension_search(&f, Limits::default()).unwrap();
        let m = r.found.unwrap();
        assert_eq!(m.apply(&f2, &[1, 1]), vec![1, 1]);
        let symp = enumerate_symp_group(&c, GroupMode::Code, Limits::default()).unwrap();
        assert_eq!(symp.order, 1);
    }

    #[test]
    fn zero_code_groups() {
        let f2 = LocalRing::parse("GF2").unwrap();
        let zero = Code::zero(Arc::clone(&f2), 2).unwrap();
        assert_eq!(enumerate_symp_group(&zero, GroupMode::Code, Limits::default()).unwrap().order, 1);
        let mono = enumerate_monomial_group(&zero, GroupMode::Code, Limits::default()).unwrap();
        assert_eq!(mono.order, 6 * 6 * 2);
        let full = Code::ambient(f2, 2).unwrap();
        assert_eq!(enumerate_monomial_group(&full, GroupMode::Code, Limits::default()).unwrap().order, 72);
    }
}
