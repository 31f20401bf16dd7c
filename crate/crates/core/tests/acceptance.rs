//! Acceptance runner: one PASS/FAIL line per criterion, each with its own
//! runtime budget. Exits nonzero if any criterion fails.

mod common;

use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;

use frobstab::code::Code;
use frobstab::codefile::parse_code_file;
use frobstab::isometry::{classify_ambient_isometries, extension_search, CodeMap};
use frobstab::metrics::relative_distance;
use frobstab::pauli::{
    group_exponent, group_exponent_by_orders, is_valid_stabilizer, quantum_code, realize_matrix,
    stabilizer_lift, PauliElement,
};
use frobstab::reduction::{
    compare_relative_distances, distance_chain_report, random_free_stabilizer, reduce_code, SearchSummary, RNG_NAME,
};
use frobstab::{Limits, LocalRing};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn load(name: &str) -> Code {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../codes").join(name);
    parse_code_file(&std::fs::read_to_string(&path).expect("shipped code file")).expect("valid code file")
}

fn lim() -> Limits {
    Limits::default()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e(err: frobstab::Error) -> String {
    err.to_string()
}

fn z4_impure() -> Outcome {
    let c = load("z4_free_impure_n7.code");
    ensure(c.free_rank() == Some(6), "expected a free code of rank 6")?;
    let r = relative_distance(&c, lim()).map_err(e)?;
    let ds = r.ds_code.as_ref().map(|m| m.weight);
    ensure(r.dual_cardinality == 65536, format!("|C^perp| = {}", r.dual_cardinality))?;
    ensure(ds == Some(2), format!("d_s(C) = {ds:?}"))?;
    ensure(r.ds_dual.weight == 2, format!("d_s(C^perp) = {}", r.ds_dual.weight))?;
    ensure(r.dist.weight == 3, format!("dist = {}", r.dist.weight))?;
    ensure(!r.pure, "code reported pure")?;
    let field = relative_distance(&reduce_code(&c).map_err(e)?, lim()).map_err(e)?;
    ensure(field.dist.weight == 3, format!("reduced dist = {}", field.dist.weight))?;
    Ok("d_s(C)=2 d_s(C^perp)=2 dist=3 impure, reduced dist=3".into())
}

fn z8_free_self_orth() -> Outcome {
    let c = load("z8_free_self_orth_n3.code");
    let dual = c.dual().map_err(e)?;
    ensure(dual.same_code(&load("z8_free_self_orth_n3_dual.code")), "dual differs from the printed matrix")?;
    let rec = compare_relative_distances(&c, 0, lim()).map_err(e)?;
    ensure(rec.dist_ring == 1 && rec.dist_field == 1, format!("dists {} / {}", rec.dist_ring, rec.dist_field))?;
    let sf = c.standard_form().map_err(e)?;
    let sym = sf.n1.add(&sf.n2.mul(&sf.m.transpose()).map_err(e)?).map_err(e)?;
    ensure(sym.is_symmetric(), "N1 + N2 M^T not symmetric")?;
    Ok("dual = H, dist_ring=1, dist_field=1, N1+N2M^T symmetric".into())
}

fn z8_nonfree() -> Outcome {
    let c = load("z8_nonfree_n5.code");
    let r = distance_chain_report(&c, lim()).map_err(e)?;
    ensure(r.cardinality == 1024, format!("|C| = {}", r.cardinality))?;
    ensure(r.dual_cardinality == 8u128.pow(6) * 4, format!("|C^perp| = {}", r.dual_cardinality))?;
    ensure(r.dist_ring == 1, format!("dist_ring = {}", r.dist_ring))?;
    ensure(r.lnk_quantity == Some(2), format!("reduced C^perp - C weight = {:?}", r.lnk_quantity))?;
    ensure(r.dist_field == 1, format!("dist_field = {}", r.dist_field))?;
    Ok(format!("|C|=1024 |C^perp|={} dist_ring=1 lnk_quantity=2 dist_field=1", r.dual_cardinality))
}

fn close(a: &DMatrix<Complex<f64>>, rows: [[f64; 4]; 4]) -> bool {
    (0..4).all(|i| (0..4).all(|j| (a[(i, j)] - Complex::new(rows[i][j], 0.0)).norm() < 1e-12))
}

fn pe(phase: u32, a: u8, b: u8) -> PauliElement {
    PauliElement { phase, a: vec![a], b: vec![b] }
}

fn f4_stabilizers() -> Outcome {
    let f4 = LocalRing::parse("GF4").map_err(e)?;
    let x = realize_matrix(&f4, &pe(0, 1, 0), lim()).map_err(e)?;
    let z = realize_matrix(&f4, &pe(0, 0, 1), lim()).map_err(e)?;
    ensure(close(&x, [[0., 1., 0., 0.], [1., 0., 0., 0.], [0., 0., 0., 1.], [0., 0., 1., 0.]]), "X(1) differs")?;
    ensure(close(&z, [[1., 0., 0., 0.], [0., 1., 0., 0.], [0., 0., -1., 0.], [0., 0., 0., -1.]]), "Z(1) differs")?;
    let additive = [pe(0, 0, 0), pe(0, 1, 0), pe(0, 0, 1), pe(0, 1, 1)];
    let q = quantum_code(&f4, 1, &additive, lim()).map_err(e)?;
    let target = DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0].into_iter().map(|x| Complex::new(x, 0.0)).collect());
    let overlap = q.overlap(&target);
    ensure(q.dimension == 1 && overlap > 1.0 - 1e-9, format!("dim {} overlap {overlap}", q.dimension))?;
    let printed = [pe(0, 0, 0), pe(0, 1, 1), pe(3, 2, 2), pe(1, 3, 3)];
    ensure(is_valid_stabilizer(&f4, &printed).map_err(e)?, "printed lifted group invalid")?;
    let s = stabilizer_lift(&load("f4_diagonal_n1.code")).map_err(e)?;
    let elements = s.elements(lim()).map_err(e)?;
    ensure(is_valid_stabilizer(&f4, &elements).map_err(e)?, "our lift invalid")?;
    let dim = quantum_code(&f4, 1, &elements, lim()).map_err(e)?.dimension;
    ensure(dim == 1 && dim * elements.len() == 4, format!("lift dimension {dim}"))?;
    Ok(format!("X(1), Z(1) exact; code space (1,1,0,0) overlap {overlap:.12}; lift dim 1 = 4/|S|"))
}

fn exponents() -> Outcome {
    let mut parts = Vec::new();
    for (name, want) in [("Z3", 3), ("Z4", 8), ("Z8", 16), ("GF4", 4), ("F2XY", 4)] {
        let r = LocalRing::parse(name).map_err(e)?;
        let (formula, brute) = (group_exponent(&r), group_exponent_by_orders(&r).map_err(e)?);
        ensure(formula == want && brute == want, format!("{name}: formula {formula}, lcm {brute}, want {want}"))?;
        parts.push(format!("N({name})={want}"));
    }
    Ok(parts.join(" "))
}

fn non_extension() -> Outcome {
    let c1 = load("f2_self_dual_n4.code");
    let c2 = load("f2_self_dual_n4_image.code");
    let f = CodeMap::from_generator_images(c1, c2.generators(), lim()).map_err(e)?;
    ensure(f.is_symplectic_isometry(lim()).map_err(e)?, "f is not a symplectic isometry")?;
    let r = extension_search(&f, lim()).map_err(e)?;
    ensure(r.total == 31104 && r.examined == 31104, format!("examined {} of {}", r.examined, r.total))?;
    ensure(r.found.is_none(), "an extension was found")?;
    Ok("f is an isometry; none of 31104 SL2-monomials extends it".into())
}

fn property_suite() -> Outcome {
    let results = common::run_suite(0..100);
    let mut failures = Vec::new();
    let mut cases = 0;
    for (name, n, fails) in &results {
        cases += n;
        for f in fails.iter().take(3) {
            failures.push(format!("{name}: {f}"));
        }
        if !fails.is_empty() {
            failures.push(format!("{name}: {} failures", fails.len()));
        }
    }
    ensure(failures.is_empty(), failures.join("; "))?;
    Ok(format!("{cases} cases over parts (a)-(g), 0 failures"))
}

fn harness() -> Outcome {
    let mut configs = Vec::new();
    for (ring, max_n) in [("Z4", 3), ("Z8", 2), ("F2XY", 2)] {
        for n in 1..=max_n {
            for k in 1..=n {
                configs.push((ring, n, k));
            }
        }
    }
    let rings: Vec<Arc<LocalRing>> = configs.iter().map(|(r, _, _)| LocalRing::parse(r).unwrap()).collect();
    let records = (0..1000u64)
        .into_par_iter()
        .map(|seed| {
            let i = seed as usize % configs.len();
            let (_, n, k) = configs[i];
            let code = random_free_stabilizer(&rings[i], n, k, seed)?;
            compare_relative_distances(&code, seed, lim())
        })
        .collect::<frobstab::Result<Vec<_>>>()
        .map_err(e)?;
    let summary = SearchSummary::from_records(&records);
    for r in &summary.strict {
        println!("  strict case (counterexample candidate): {}", serde_json::to_string(r).unwrap());
    }
    ensure(summary.violations.is_empty(), format!("{} violations of dist_ring <= dist_field", summary.violations.len()))?;
    Ok(format!(
        "{} trials ({RNG_NAME}), {} equalities, {} strict, 0 violations",
        summary.trials,
        summary.equalities,
        summary.strict.len()
    ))
}

fn ambient_classification() -> Outcome {
    let mut parts = Vec::new();
    for (name, want) in [("GF2", 6), ("Z4", 48)] {
        let r = LocalRing::parse(name).map_err(e)?;
        let c = classify_ambient_isometries(&r, 1, 0, lim()).map_err(e)?;
        ensure(c.exhaustive && c.isometries == want && c.sl2_order == want as usize && c.matches_monomials,
            format!("{name}: {} isometries, |SL2| = {}", c.isometries, c.sl2_order))?;
        parts.push(format!("{name}: {} isometries of {} maps", c.isometries, c.examined));
    }
    Ok(parts.join(", "))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 Z4 n=7 free impure code", z4_impure, Duration::from_secs(5)),
        ("2 Z8 n=3 free self-orthogonal code", z8_free_self_orth, Duration::from_secs(1)),
        ("3 Z8 n=5 non-free code", z8_nonfree, Duration::from_secs(30)),
        ("4 F4 stabilizer groups", f4_stabilizers, Duration::from_secs(1)),
        ("5 group exponents", exponents, Duration::from_secs(1)),
        ("6 F2 n=4 non-extension", non_extension, Duration::from_secs(5)),
        ("7 property suite", property_suite, Duration::from_secs(300)),
        ("8 relative-distance harness", harness, Duration::from_secs(600)),
        ("9 ambient isometries at n=1", ambient_classification, Duration::from_secs(10)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > budget => Err(format!("{msg}; took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("PASS {name} [{elapsed:.2?}]: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("FAIL {name} [{elapsed:.2?}]: {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
