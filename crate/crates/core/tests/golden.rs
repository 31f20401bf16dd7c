//! Worked examples, checked against their published numbers and against
//! brute-force scans of the ambient space where that is feasible.

use std::path::PathBuf;
use std::sync::Arc;

use frobstab::code::{dual_standard_form, Code};
use frobstab::codefile::parse_code_file;
use frobstab::isometry::{enumerate_monomial_group, extension_search, CodeMap, GroupMode, SL2Monomial};
use frobstab::metrics::{min_distance, relative_distance};
use frobstab::normalforms::ambient_vectors;
use frobstab::pauli::{is_valid_stabilizer, quantum_code, stabilizer_lift, PauliElement};
use frobstab::reduction::{compare_relative_distances, distance_chain_report, reduce_code, Verdict};
use frobstab::{Elem, Limits, LocalRing};

fn load(name: &str) -> Code {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../codes").join(name);
    parse_code_file(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn lim() -> Limits {
    Limits::default()
}

#[test]
fn z4_impure_code_distances() {
    let c = load("z4_free_impure_n7.code");
    assert_eq!(c.free_rank(), Some(6));
    assert!(c.is_self_orthogonal());
    let dual = c.dual().unwrap();
    assert!(dual.same_code(&load("z4_free_impure_n7_dual.code")));
    assert_eq!(dual.cardinality(), 65536);
    let r = relative_distance(&c, lim()).unwrap();
    assert_eq!(r.ds_code.as_ref().unwrap().weight, 2);
    assert_eq!(r.ds_dual.weight, 2);
    assert_eq!(r.dist.weight, 3);
    assert!(!r.pure);
    // The printed weight-3 word (0,1,1,0,0,0,1,0) H lies in C^perp - C.
    let witness: Vec<Elem> = vec![0, 1, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 0];
    assert!(dual.contains(&witness).unwrap() && !c.contains(&witness).unwrap());
    let reduced = reduce_code(&c).unwrap();
    assert_eq!(reduced.cardinality(), 1 << 6);
    let rr = relative_distance(&reduced, lim()).unwrap();
    assert_eq!(rr.dist.weight, 3);
    assert_eq!(rr.ds_code.unwrap().weight, 2);
    assert_eq!(compare_relative_distances(&c, 0, lim()).unwrap().dist_field, 3);
}

#[test]
fn z4_impure_weight_two_words_are_multiples_of_first_row() {
    let c = load("z4_free_impure_n7.code");
    let dual = c.dual().unwrap();
    let first = c.generators()[0].clone();
    let z4 = c.ring();
    let multiples: Vec<Vec<Elem>> = (1..4).map(|s| z4.scale_vec(s, &first)).collect();
    let mut found = Vec::new();
    // Scan C^perp through its decomposition.
    let dec = dual.decomposition();
    let mut tuple = vec![0u32; dec.rank()];
    loop {
        let v = dec.combine(&tuple);
        if frobstab::metrics::symplectic_weight(&v) == 2 {
            found.push(v);
        }
        let mut j = 0;
        while j < tuple.len() {
            tuple[j] += 1;
            if tuple[j] < dec.orders()[j] {
                break;
            }
            tuple[j] = 0;
            j += 1;
        }
        if j == tuple.len() {
            break;
        }
    }
    found.sort();
    let mut expected = multiples;
    expected.sort();
    assert_eq!(found, expected);
}

#[test]
fn z8_free_self_orth() {
    let c = load("z8_free_self_orth_n3.code");
    assert!(c.dual().unwrap().same_code(&load("z8_free_self_orth_n3_dual.code")));
    let rec = compare_relative_distances(&c, 0, lim()).unwrap();
    assert_eq!((rec.dist_ring, rec.dist_field), (1, 1));
    let sf = c.standard_form().unwrap();
    let sym = sf.n1.add(&sf.n2.mul(&sf.m.transpose()).unwrap()).unwrap();
    assert!(sym.is_symmetric());
    let dual = dual_standard_form(sf.k, &sf.m, &sf.n1, &sf.n2).unwrap();
    assert!(Code::from_matrix(3, &dual).unwrap().same_code(&c.dual().unwrap()));
    // Weight-1 words of C^perp - C reduce to zero; the reduction still has
    // three weight-1 words outside the reduced code.
    let dual_code = c.dual().unwrap();
    let z8 = c.ring();
    for v in ambient_vectors(z8, 6) {
        if frobstab::metrics::symplectic_weight(&v) == 1 && dual_code.contains(&v).unwrap() && !c.contains(&v).unwrap() {
            assert!(v.iter().all(|&x| z8.in_maximal_ideal(x)));
        }
    }
    let reduced = reduce_code(&c).unwrap();
    let reduced_dual = reduced.dual().unwrap();
    let f2 = reduced.ring();
    let light = ambient_vectors(f2, 6)
        .filter(|v| frobstab::metrics::symplectic_weight(v) == 1)
        .filter(|v| reduced_dual.contains(v).unwrap() && !reduced.contains(v).unwrap())
        .count();
    assert_eq!(light, 3);
}

#[test]
fn z8_nonfree_reduction() {
    let c = load("z8_nonfree_n5.code");
    assert!(!c.is_free());
    assert_eq!(c.cardinality(), 1024);
    let dual = c.dual().unwrap();
    assert_eq!(dual.cardinality(), 8u128.pow(6) * 4);
    assert!(dual.same_code(&load("z8_nonfree_n5_dual.code")));
    let f2 = LocalRing::parse("GF2").unwrap();
    let printed_reduced = Code::new(
        Arc::clone(&f2),
        5,
        vec![vec![1, 0, 0, 0, 1, 0, 0, 0, 1, 0], vec![0, 1, 0, 0, 1, 0, 0, 1, 1, 0]],
    )
    .unwrap();
    assert!(reduce_code(&c).unwrap().same_code(&printed_reduced));
    let r = distance_chain_report(&c, lim()).unwrap();
    assert_eq!(r.dist_ring, 1);
    assert_eq!(r.dist_field, 1);
    assert_eq!(r.lnk_quantity, Some(2));
    assert_eq!(r.reduced_dual_gap, Some(2));
    assert!(r.lnk_differs);
    assert_eq!(r.verdict_relative, Verdict::NotApplicable);
    assert!(!r.violated());
}

#[test]
fn socle_repetition_code_distances() {
    let c = load("z4_socle_repetition_n3.code");
    assert!(c.is_self_orthogonal());
    let r = distance_chain_report(&c, lim()).unwrap();
    assert_eq!(r.ds_code, Some(1));
    assert_eq!(r.ds_reduced, Some(3));
    assert_eq!(r.verdict_chain, Verdict::Holds);
    for n in 1..=4 {
        let z4 = LocalRing::parse("Z4").unwrap();
        let mut gens = vec![vec![1; 2 * n]];
        for i in 0..n {
            let mut g = vec![0; 2 * n];
            g[i] = 2;
            g[n + i] = 2;
            gens.push(g);
        }
        let c = Code::new(z4, n, gens).unwrap();
        assert_eq!(min_distance(&c, lim()).unwrap().weight, 1);
        assert_eq!(min_distance(&reduce_code(&c).unwrap(), lim()).unwrap().weight, n);
    }
}

#[test]
fn f2_isometry_without_extension() {
    let c1 = load("f2_self_dual_n4.code");
    let c2 = load("f2_self_dual_n4_image.code");
    assert!(c1.same_code(&c2));
    assert!(c1.is_self_dual().unwrap());
    let f = CodeMap::from_generator_images(c1.clone(), c2.generators(), lim()).unwrap();
    assert!(f.is_symplectic_isometry(lim()).unwrap());
    let r = extension_search(&f, lim()).unwrap();
    assert_eq!(r.total, 31104);
    assert_eq!(r.examined, 31104);
    assert!(r.found.is_none());
    // Independent check: no monomial sends every row of G1 to the matching row of G2.
    let mono = enumerate_monomial_group(&c1, GroupMode::Code, lim()).unwrap();
    let f2 = c1.ring();
    assert!(mono
        .elements
        .iter()
        .all(|m: &SL2Monomial| c1.generators().iter().zip(c2.generators()).any(|(g, h)| m.apply(f2, g) != *h)));
}

fn pe(phase: u32, a: Elem, b: Elem) -> PauliElement {
    PauliElement { phase, a: vec![a], b: vec![b] }
}

#[test]
fn f4_stabilizer_state() {
    let f4 = LocalRing::parse("GF4").unwrap();
    let target = nalgebra::DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0].into_iter().map(|x| nalgebra::Complex::new(x, 0.0)).collect());
    // {I, X(1), Z(1), X(1)Z(1)}: abelian, fixes exactly (1,1,0,0).
    let additive = vec![pe(0, 0, 0), pe(0, 1, 0), pe(0, 0, 1), pe(0, 1, 1)];
    assert!(is_valid_stabilizer(&f4, &additive).unwrap());
    let q = quantum_code(&f4, 1, &additive, lim()).unwrap();
    assert_eq!(q.dimension, 1);
    assert!(q.overlap(&target) > 1.0 - 1e-9);
    // {I, X(1)Z(1), -i X(a)Z(a), i X(a^2)Z(a^2)} with a = code 2, a^2 = code 3, omega = i.
    let printed = vec![pe(0, 0, 0), pe(0, 1, 1), pe(3, 2, 2), pe(1, 3, 3)];
    assert!(is_valid_stabilizer(&f4, &printed).unwrap());
    assert_eq!(quantum_code(&f4, 1, &printed, lim()).unwrap().dimension, 1);

    let c = load("f4_diagonal_n1.code");
    let s = stabilizer_lift(&c).unwrap();
    let elements = s.elements(lim()).unwrap();
    assert!(is_valid_stabilizer(&f4, &elements).unwrap());
    assert_eq!(quantum_code(&f4, 1, &elements, lim()).unwrap().dimension, 1);
}

#[test]
fn z8_lift_has_64_elements() {
    let c = load("z8_free_self_orth_n3.code");
    let s = stabilizer_lift(&c).unwrap();
    let elements = s.elements(lim()).unwrap();
    assert_eq!(elements.len(), 64);
    assert!(is_valid_stabilizer(c.ring(), &elements).unwrap());
    let vectors: std::collections::HashSet<Vec<Elem>> = elements.iter().map(|p| p.vector()).collect();
    assert_eq!(vectors.len(), 64);
    assert!(vectors.iter().all(|v| c.contains(v).unwrap()));
}
