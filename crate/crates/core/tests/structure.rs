use mse_core::fixtures::{self, synthetic_chain};
use mse_core::poly::{parse, SamplerConfig};
use mse_core::structure::{check_leading, check_lower_order, FactoredLeading, LowerOrder, Verdict};
use mse_core::{Field, Polynomial};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn lower_order_recovers_synthetic_chains() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for trial in 0..200 {
        let c = synthetic_chain(&mut rng);
        let fl = FactoredLeading::new(c.p.clone(), c.k, c.qm.clone()).unwrap();
        match check_lower_order(&c.full, &fl).unwrap() {
            LowerOrder::Chain { s, multiplicities } => {
                assert_eq!(s, c.s, "trial {trial}");
                let got: Vec<_> = multiplicities
                    .iter()
                    .map(|m| (m.degree, m.multiplicity))
                    .collect();
                assert_eq!(got, c.multiplicities, "trial {trial}");
            }
            other => panic!("trial {trial}: {other:?}"),
        }
    }
}

fn radial(n: usize, j: u32) -> Polynomial {
    fixtures::signature_quadric(n, 0).pow(j)
}

#[test]
fn valid_triples_are_accepted_and_mutations_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = SamplerConfig {
        samples: 500,
        seed: 3,
    };
    let n = 3;
    for trial in 0..12 {
        let p = fixtures::random_homogeneous(&mut rng, n, 3 + 2 * (trial % 2), 4);
        let k = 1 + 2 * (trial % 3);
        let qm = radial(n, trial % 2).scale_rational(&num_rational::BigRational::new(
            (1 + trial as i64).into(),
            2.into(),
        ));
        let fl = FactoredLeading::new(p.clone(), k, qm.clone()).unwrap();
        let r = check_leading(&fl, cfg).unwrap();
        assert!(
            r.product_ok && r.parity_ok && r.degree_ok && r.coprime_ok,
            "trial {trial}"
        );
        assert_ne!(r.verdict, Verdict::Violated, "trial {trial}");

        assert!(FactoredLeading::new(p.clone(), k + 1, qm.clone()).is_err());
        let odd = &qm * &fixtures::random_linear_form(&mut rng, n);
        let r = check_leading(&FactoredLeading::new(p.clone(), k, odd).unwrap(), cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(!r.parity_ok);
        let shared = &qm * &p.pow(2);
        let r = check_leading(&FactoredLeading::new(p, k, shared).unwrap(), cfg).unwrap();
        assert_eq!(r.verdict, Verdict::Violated);
        assert!(!r.coprime_ok);
    }
}

#[test]
fn violation_at_top_lower_degree() {
    let p = parse("x1^3 - 3*x1*x2^2", 3, Field::Rational).unwrap();
    let fl = FactoredLeading::new(p.clone(), 3, parse("1", 3, Field::Rational).unwrap()).unwrap();
    let full = &p.pow(3) + &parse("x3^8", 3, Field::Rational).unwrap();
    assert!(matches!(
        check_lower_order(&full, &fl).unwrap(),
        LowerOrder::Violation {
            degree: Some(8),
            ..
        }
    ));
}
