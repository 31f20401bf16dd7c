//! Property checks shared by the proptest suite and the acceptance runner.
//! Each check takes a ring, a length and a seed and reports the first
//! violated property as an error string.
#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{Complex, DMatrix};
use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;

use frobstab::code::{apply_trail, symplectic_inner, symplectic_weight, Code};
use frobstab::isometry::{determinant, SL2Monomial};
use frobstab::metrics::{min_distance, relative_distance};
use frobstab::normalforms::RingMatrix;
use frobstab::pauli::{
    is_valid_stabilizer, pauli_mul, pauli_pow, realize_matrix, stabilizer_lift, PauliElement,
};
use frobstab::reduction::{colon_module, random_free_stabilizer, random_submodule, reduce_code};
use frobstab::{Elem, Limits, LocalRing};

pub const RINGS: [&str; 6] = ["Z4", "Z8", "Z9", "GF4", "F2u2", "F2XY"];

pub type Check = fn(&Arc<LocalRing>, usize, u64) -> Result<(), String>;

pub const CHECKS: [(&str, Check); 7] = [
    ("(a) |C| |C^perp| = |R|^2n", cardinality_identity),
    ("(b) d_s(C) = d_s(reduced colon) <= d_s(reduced)", distance_chain),
    ("(c) free codes: d_s(C) = d_s(reduced)", free_distance_equality),
    ("(d) free stabilizer codes: dist_ring <= dist_field", relative_distance_inequality),
    ("(e) standard-form trail is an isometry", trail_is_isometry),
    ("(f) stabilizer lift postconditions", lift_postconditions),
    ("(g) phase arithmetic matches the realizer", realizer_agreement),
];

fn lim() -> Limits {
    Limits::default()
}

fn err(e: frobstab::Error) -> String {
    e.to_string()
}

fn random_vector(ring: &LocalRing, len: usize, rng: &mut Pcg64) -> Vec<Elem> {
    (0..len).map(|_| rng.gen_range(0..ring.size()) as Elem).collect()
}

pub fn random_sl2(ring: &LocalRing, rng: &mut Pcg64) -> [Elem; 4] {
    loop {
        let a: [Elem; 4] = std::array::from_fn(|_| rng.gen_range(0..ring.size()) as Elem);
        if determinant(ring, &a) == 1 {
            return a;
        }
    }
}

pub fn random_monomial(ring: &LocalRing, n: usize, rng: &mut Pcg64) -> SL2Monomial {
    let mut sigma: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        sigma.swap(i, rng.gen_range(0..=i));
    }
    let blocks = (0..n).map(|_| random_sl2(ring, rng)).collect();
    SL2Monomial::new(ring, blocks, sigma).expect("valid monomial")
}

/// A free code with an identity submatrix in random columns.
pub fn random_systematic_code(ring: &Arc<LocalRing>, n: usize, rng: &mut Pcg64) -> Code {
    let k = rng.gen_range(1..=2 * n);
    let mut cols: Vec<usize> = (0..2 * n).collect();
    for i in (1..2 * n).rev() {
        cols.swap(i, rng.gen_range(0..=i));
    }
    let pivots = &cols[..k];
    let gens = (0..k)
        .map(|i| {
            let mut row = random_vector(ring, 2 * n, rng);
            for (j, &c) in pivots.iter().enumerate() {
                row[c] = (i == j) as Elem;
            }
            row
        })
        .collect();
    Code::new(Arc::clone(ring), n, gens).expect("valid generators")
}

/// A free stabilizer code moved by a random SL2-monomial map.
pub fn scrambled_free_stabilizer(ring: &Arc<LocalRing>, n: usize, rng: &mut Pcg64) -> Code {
    let k = rng.gen_range(1..=n);
    let code = random_free_stabilizer(ring, n, k, rng.gen()).expect("valid rank");
    let m = random_monomial(ring, n, rng);
    code.map(|v| m.apply(ring, v)).expect("same length")
}

/// `D cap D^perp` for a random submodule `D`; always self-orthogonal.
pub fn random_self_orthogonal(ring: &Arc<LocalRing>, n: usize, seed: u64) -> Code {
    let d = random_submodule(ring, n, seed).expect("valid generators");
    d.intersection(&d.dual().expect("dual")).expect("same ambient")
}

pub fn cardinality_identity(ring: &Arc<LocalRing>, n: usize, seed: u64) -> Result<(), String> {
    let c = random_submodule(ring, n, seed).map_err(err)?;
    let dual = c.dual().map_err(err)?;
    let total = (ring.size() as u128).pow(2 * n as u32);
    if c.cardinality() * dual.cardinality() != total {
        return Err(format!("{} * {} != {total}", c.cardinality(), dual.cardinality()));
    }
    Ok(())
}

pub fn distance_chain(ring: &Arc<LocalRing>, n: usize, seed: u64) -> Result<(), String> {
    let c = random_submodule(ring, n, seed).map_err(err)?;
    let reduced = reduce_code(&c).map_err(err)?;
    if reduced.is_zero() {
        return Ok(());
    }
    let ds = min_distance(&c, lim()).map_err(err)?.weight;
    let ds_colon = min_distance(&reduce_code(&colon_module(&c).map_err(err)?).map_err(err)?, lim()).map_err(err)?.weight;
    let ds_reduced = min_distance(&reduced, lim()).map_err(err)?.weight;
    if ds != ds_colon || ds > ds_reduced {
        return Err(format!("d_s(C)={ds}, colon {ds_colon}, reduced {ds_reduced}"));
    }
    Ok(())
}

pub fn free_distance_equality(ring: &Arc<LocalRing>, n: usize, seed: u64) -> Result<(), String> {
    let mut rng = Pcg64::seed_from_u64(seed);
    let c = random_systematic_code(ring, n, &mut rng);
    if !c.is_free() {
        return Err("systematic code is not free".into());
    }
    let ds = min_distance(&c, lim()).map_err(err)?.weight;
    let reduced = reduce_code(&c).map_err(err)?;
    let ds_reduced = min_distance(&reduced, lim()).map_err(err)?.weight;
    if ds != ds_reduced {
        return Err(format!("d_s(C)={ds} but reduced d_s={ds_reduced}"));
    }
    if reduced.cardinality() != (reduced.ring().size() as u128).pow(c.free_rank().unwrap() as u32) {
        return Err("reduced dimension differs from the rank".into());
    }
    Ok(())
}

pub fn relative_distance_inequality(ring: &Arc<LocalRing>, n: usize, seed: u64) -> Result<(), String> {
    let mut rng = Pcg64::seed_from_u64(seed);
    let c = scrambled_free_stabilizer(ring, n, &mut rng);
    let ring_side = relative_distance(&c, lim()).map_err(err)?;
    let field_side = relative_distance(&reduce_code(&c).map_err(err)?, lim()).map_err(err)?;
    let (dr, df) = (ring_side.dist.weight, field_side.dist.weight);
    if dr > df || (ring_side.self_dual && dr != df) {
        return Err(format!("dist_ring={dr}, dist_field={df}, self_dual={}", ring_side.self_dual));
    }
    Ok(())
}

pub fn trail_is_isometry(ring: &Arc<LocalRing>, n: usize, seed: u64) -> Result<(), String> {
    let mut rng = Pcg64::seed_from_u64(seed);
    let c = scrambled_free_stabilizer(ring, n, &mut rng);
    let sf = c.standard_form().map_err(err)?;
    let moved = c.map(|v| apply_trail(ring, &sf.trail, v)).map_err(err)?;
    if !moved.same_code(&sf.code) {
        return Err("trail does not carry C onto its standard form".into());
    }
    let sym = sf.n1.add(&sf.n2.mul(&sf.m.transpose()).map_err(err)?).map_err(err)?;
    if !sym.is_symmetric() {
        return Err("N1 + N2 M^T is not symmetric".into());
    }
    let k = sf.k;
    let ident = RingMatrix::identity(Arc::clone(ring), k);
    let expected = RingMatrix::hcat(&[&ident, &sf.m, &sf.n1, &sf.n2]).map_err(err)?;
    if !Code::from_matrix(n, &expected).map_err(err)?.same_code(&sf.code) {
        return Err("standard form is not im(I M N1 N2)".into());
    }
    for _ in 0..10_000 {
        let v = random_vector(ring, 2 * n, &mut rng);
        let w = random_vector(ring, 2 * n, &mut rng);
        let (tv, tw) = (apply_trail(ring, &sf.trail, &v), apply_trail(ring, &sf.trail, &w));
        if symplectic_weight(&tv) != symplectic_weight(&v)
            || symplectic_inner(ring, &tv, &tw).map_err(err)? != symplectic_inner(ring, &v, &w).map_err(err)?
        {
            return Err(format!("trail {:?} moves weight or form of {v:?}, {w:?}", sf.trail));
        }
    }
    Ok(())
}

pub fn lift_postconditions(ring: &Arc<LocalRing>, n: usize, seed: u64) -> Result<(), String> {
    let mut rng = Pcg64::seed_from_u64(seed);
    let codes = [scrambled_free_stabilizer(ring, n, &mut rng), random_self_orthogonal(ring, n, seed)];
    for c in &codes {
        let s = stabilizer_lift(c).map_err(err)?;
        if c.cardinality() > 4096 {
            continue;
        }
        let elements = s.elements(lim()).map_err(err)?;
        let vectors: std::collections::HashSet<Vec<Elem>> = elements.iter().map(|p| p.vector()).collect();
        if vectors.len() as u128 != c.cardinality() || !vectors.iter().all(|v| c.contains(v).unwrap()) {
            return Err("Psi is not a bijection onto C".into());
        }
        if c.cardinality() <= 256 && !is_valid_stabilizer(ring, &elements).map_err(err)? {
            return Err("lifted group is not a valid stabilizer".into());
        }
    }
    Ok(())
}

fn close(a: &DMatrix<Complex<f64>>, b: &DMatrix<Complex<f64>>) -> bool {
    (a - b).iter().all(|z| z.norm() < 1e-9)
}

pub fn realizer_agreement(ring: &Arc<LocalRing>, _n: usize, seed: u64) -> Result<(), String> {
    let mut rng = Pcg64::seed_from_u64(seed);
    let big_n = ring.phase_order();
    let random_pauli = |rng: &mut Pcg64| PauliElement {
        phase: rng.gen_range(0..big_n),
        a: random_vector(ring, 1, rng),
        b: random_vector(ring, 1, rng),
    };
    let q = ring.size();
    for _ in 0..8 {
        let p = random_pauli(&mut rng);
        let r = random_pauli(&mut rng);
        let mp = realize_matrix(ring, &p, lim()).map_err(err)?;
        let mr = realize_matrix(ring, &r, lim()).map_err(err)?;
        let prod = realize_matrix(ring, &pauli_mul(ring, &p, &r).map_err(err)?, lim()).map_err(err)?;
        if !close(&prod, &(&mp * &mr)) {
            return Err(format!("product of {p} and {r}"));
        }
        let l = rng.gen_range(0..2 * big_n as u64);
        let pow = realize_matrix(ring, &pauli_pow(ring, &p, l), lim()).map_err(err)?;
        let mut expected = DMatrix::identity(q, q);
        for _ in 0..l {
            expected = &expected * &mp;
        }
        if !close(&pow, &expected) {
            return Err(format!("power {l} of {p}"));
        }
        let trace = mp.trace();
        let theta = 2.0 * std::f64::consts::PI * p.phase as f64 / big_n as f64;
        let want = if p.a == [0] && p.b == [0] {
            Complex::new(theta.cos(), theta.sin()) * q as f64
        } else {
            Complex::new(0.0, 0.0)
        };
        if (trace - want).norm() > 1e-9 {
            return Err(format!("trace of {p}"));
        }
        let commute = frobstab::pauli::commute(ring, &p, &r).map_err(err)?;
        if commute != close(&(&mp * &mr), &(&mr * &mp)) {
            return Err(format!("commutation of {p} and {r}"));
        }
    }
    Ok(())
}

/// Runs every check for seeds in `seeds`, all rings, `n = 1 + seed % 3`.
/// Returns, per check, the number of cases and the failure messages.
pub fn run_suite(seeds: std::ops::Range<u64>) -> Vec<(&'static str, usize, Vec<String>)> {
    use rayon::prelude::*;
    CHECKS
        .iter()
        .map(|&(name, check)| {
            let cases: Vec<(String, u64)> =
                seeds.clone().flat_map(|s| RINGS.iter().map(move |r| (r.to_string(), s))).collect();
            let failures: Vec<String> = cases
                .par_iter()
                .filter_map(|(r, s)| {
                    let ring = LocalRing::parse(r).unwrap();
                    let n = 1 + (*s as usize) % 3;
                    check(&ring, n, *s).err().map(|e| format!("{r} n={n} seed={s}: {e}"))
                })
                .collect();
            (name, cases.len(), failures)
        })
        .collect()
}
