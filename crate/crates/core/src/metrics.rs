//! Symplectic weights, minimum distances and relative distances by exact
//! enumeration of codewords.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::code::Code;
use crate::error::{Error, Limits, Result, ENUMERATION_LIMIT};
use crate::normalforms::CyclicDecomposition;
use crate::ring::Elem;

pub use crate::code::symplectic_weight;

/// A minimum weight together with its lexicographically first witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Minimum {
    pub weight: usize,
    pub witness: Vec<Elem>,
}

/// Running minimum with deterministic tie-breaking.
#[derive(Debug, Clone, Default)]
pub(crate) struct Best(Option<Minimum>);

impl Best {
    /// Would `(weight, v)` improve on the current minimum?
    #[inline]
    pub fn improves(&self, weight: usize, v: &[Elem]) -> bool {
        match &self.0 {
            None => true,
            Some(m) => weight < m.weight || (weight == m.weight && v < m.witness.as_slice()),
        }
    }

    #[inline]
    pub fn offer(&mut self, weight: usize, v: &[Elem]) {
        if self.improves(weight, v) {
            self.0 = Some(Minimum { weight, witness: v.to_vec() });
        }
    }

    pub fn merge(mut self, other: Best) -> Best {
        if let Some(m) = other.0 {
            self.offer(m.weight, &m.witness);
        }
        self
    }

    pub fn into_inner(self) -> Option<Minimum> {
        self.0
    }
}

/// Per-shard state of an enumeration.
pub(crate) trait Visitor: Send + Sized {
    fn visit(&mut self, v: &[Elem]);
    fn merge(self, other: Self) -> Self;
}

/// Visits every element of the group exactly once, in parallel shards of
/// the exponent-tuple range, and merges the shard states in shard order.
pub(crate) fn enumerate<V: Visitor>(
    decomposition: &CyclicDecomposition,
    limits: Limits,
    make: impl Fn() -> V + Sync,
) -> Result<V> {
    let total = decomposition.order();
    limits.check("codeword enumeration", total, ENUMERATION_LIMIT)?;
    let shards = total.min(256);
    let chunk = total.div_ceil(shards);
    let orders = decomposition.orders();
    let ring = decomposition.ring();
    let gens = decomposition.generators();
    let states: Vec<V> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let mut state = make();
            let start = s * chunk;
            let end = ((s + 1) * chunk).min(total);
            if start >= end {
                return state;
            }
            // Mixed-radix digits of `start`, least significant first.
            let mut tuple = vec![0u32; orders.len()];
            let mut rest = start;
            for (t, &m) in tuple.iter_mut().zip(orders) {
                *t = (rest % m as u128) as u32;
                rest /= m as u128;
            }
            let mut v = decomposition.combine(&tuple);
            state.visit(&v);
            for _ in start + 1..end {
                // Odometer step: a wrapping digit adds its generator once more
                // (m_j v_j = 0), the first non-wrapping digit adds one copy.
                for (j, t) in tuple.iter_mut().enumerate() {
                    for (x, &g) in v.iter_mut().zip(&gens[j]) {
                        *x = ring.add(*x, g);
                    }
                    *t += 1;
                    if *t == orders[j] {
                        *t = 0;
                    } else {
                        break;
                    }
                }
                state.visit(&v);
            }
            state
        })
        .collect();
    Ok(states.into_iter().reduce(V::merge).unwrap_or_else(make))
}

struct MinVisitor(Best);

impl Visitor for MinVisitor {
    fn visit(&mut self, v: &[Elem]) {
        let w = symplectic_weight(v);
        if w > 0 {
            self.0.offer(w, v);
        }
    }

    fn merge(self, other: Self) -> Self {
        MinVisitor(self.0.merge(other.0))
    }
}

/// `d_s(C)`: minimum symplectic weight over the nonzero codewords.
pub fn min_distance(code: &Code, limits: Limits) -> Result<Minimum> {
    if code.is_zero() {
        return Err(Error::invalid("minimum distance of the zero code is undefined"));
    }
    let v = enumerate(code.decomposition(), limits, || MinVisitor(Best::default()))?;
    Ok(v.0.into_inner().expect("nonzero code has a nonzero word"))
}

/// Minima over the nonzero words of `outer`, split by membership in `inner`.
struct SplitVisitor<'a> {
    inner: &'a Code,
    all: Best,
    inside: Best,
    outside: Best,
}

impl Visitor for SplitVisitor<'_> {
    fn visit(&mut self, v: &[Elem]) {
        let w = symplectic_weight(v);
        if w == 0 {
            return;
        }
        self.all.offer(w, v);
        let in_improves = self.inside.improves(w, v);
        let out_improves = self.outside.improves(w, v);
        if in_improves || out_improves {
            if self.inner.contains(v).expect("same length") {
                if in_improves {
                    self.inside.offer(w, v);
                }
            } else if out_improves {
                self.outside.offer(w, v);
            }
        }
    }

    fn merge(self, other: Self) -> Self {
        SplitVisitor {
            inner: self.inner,
            all: self.all.merge(other.all),
            inside: self.inside.merge(other.inside),
            outside: self.outside.merge(other.outside),
        }
    }
}

pub(crate) struct SplitMinima {
    pub all: Option<Minimum>,
    pub inside: Option<Minimum>,
    pub outside: Option<Minimum>,
}

pub(crate) fn split_minima(outer: &Code, inner: &Code, limits: Limits) -> Result<SplitMinima> {
    let v = enumerate(outer.decomposition(), limits, || SplitVisitor {
        inner,
        all: Best::default(),
        inside: Best::default(),
        outside: Best::default(),
    })?;
    Ok(SplitMinima { all: v.all.into_inner(), inside: v.inside.into_inner(), outside: v.outside.into_inner() })
}

/// `d_s(A - B)` for codes `B` inside `A`; `None` when `A = B`.
pub fn min_distance_outside(outer: &Code, inner: &Code, limits: Limits) -> Result<Option<Minimum>> {
    Ok(split_minima(outer, inner, limits)?.outside)
}

/// Distances of a stabilizer code and its dual.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceReport {
    pub ring: String,
    pub n: usize,
    pub cardinality: u128,
    pub dual_cardinality: u128,
    /// `d_s(C)`, absent for the zero code.
    pub ds_code: Option<Minimum>,
    pub ds_dual: Minimum,
    /// `d_s(C^perp - C)`, or `d_s(C^perp)` when `C` is self-dual.
    pub dist: Minimum,
    pub self_dual: bool,
    pub pure: bool,
    pub enumerated: u128,
    pub elapsed_ms: u128,
}

/// Computes `d_s(C)`, `d_s(C^perp)` and `dist_{C^perp}(C)` in one pass over `C^perp`.
pub fn relative_distance(code: &Code, limits: Limits) -> Result<DistanceReport> {
    let start = Instant::now();
    if !code.is_self_orthogonal() {
        return Err(Error::invalid("relative distance needs a self-orthogonal code"));
    }
    let dual = code.dual()?;
    let self_dual = dual.cardinality() == code.cardinality();
    let split = split_minima(&dual, code, limits)?;
    let ds_dual = split.all.ok_or_else(|| Error::invalid("the dual code is zero"))?;
    let dist = if self_dual {
        ds_dual.clone()
    } else {
        split.outside.expect("C is a proper subcode of its dual")
    };
    if dist.weight < ds_dual.weight {
        return Err(Error::consistency("relative distance below the dual distance"));
    }
    Ok(DistanceReport {
        ring: code.ring().name(),
        n: code.n(),
        cardinality: code.cardinality(),
        dual_cardinality: dual.cardinality(),
        ds_code: split.inside,
        pure: ds_dual.weight == dist.weight,
        ds_dual,
        dist,
        self_dual,
        enumerated: dual.cardinality(),
        elapsed_ms: start.elapsed().as_millis(),
    })
}
