use num_rational::BigRational;
use proptest::prelude::*;
use simplex_bundle::poly::{
    derive, face_product, parse_polynomial, Indeterminate, Monomial, RationalPolynomial, VarNames,
};
use simplex_bundle::{ContrastVector, SampleSpace};

fn sparse_poly(d: usize) -> impl Strategy<Value = RationalPolynomial> {
    prop::collection::vec(
        (-9i64..=9, 1i64..=6, prop::collection::vec(0u32..=3, d)),
        1..=4,
    )
    .prop_map(|terms| {
        RationalPolynomial::from_terms(terms.into_iter().map(|(n, den, exps)| {
            (
                BigRational::new(n.into(), den.into()),
                Monomial::from_powers(
                    exps.into_iter()
                        .enumerate()
                        .filter(|&(_, e)| e > 0)
                        .map(|(x, e)| (Indeterminate::p(x), e)),
                ),
            )
        }))
    })
}

fn s_dot(alpha: &[u32]) -> RationalPolynomial {
    RationalPolynomial::from_terms(alpha.iter().enumerate().map(|(x, &a)| {
        (BigRational::from_integer(a.into()), Monomial::var(Indeterminate::s(x)))
    }))
}

proptest! {
    #[test]
    fn derive_is_a_derivation(f in sparse_poly(4), g in sparse_poly(4), c in -5i64..5) {
        let prod = derive(&(&f * &g)).unwrap();
        let leibniz = &(&derive(&f).unwrap() * &g) + &(&f * &derive(&g).unwrap());
        prop_assert_eq!(prod, leibniz);
        let c = BigRational::from_integer(c.into());
        let lin = derive(&(&f.scale(&c) + &g)).unwrap();
        prop_assert_eq!(lin, &derive(&f).unwrap().scale(&c) + &derive(&g).unwrap());
    }

    #[test]
    fn binomial_derivative_reduces_to_the_score_relation(
        alpha in prop::collection::vec(0u32..=3, 4),
        beta in prop::collection::vec(0u32..=3, 4),
    ) {
        prop_assume!(alpha != beta);
        let pa = Monomial::p_power(&alpha);
        let pb = Monomial::p_power(&beta);
        let f = &RationalPolynomial::term(BigRational::from_integer(1.into()), pa.clone())
            - &RationalPolynomial::term(BigRational::from_integer(1.into()), pb.clone());
        let df = derive(&f).unwrap();
        let expanded = &s_dot(&alpha).mul_monomial(&pa) - &s_dot(&beta).mul_monomial(&pb);
        prop_assert_eq!(&df, &expanded);
        let diff: Vec<i64> = alpha.iter().zip(&beta).map(|(&a, &b)| a as i64 - b as i64).collect();
        let relation = RationalPolynomial::from_terms(diff.iter().enumerate().map(|(x, &c)| {
            (BigRational::from_integer(c.into()), Monomial::var(Indeterminate::s(x)))
        }))
        .mul_monomial(&pa);
        // df − ⟨α−β, s⟩ p^α = ⟨β, s⟩ f
        prop_assert_eq!(&df - &relation, &s_dot(&beta) * &f);
        if pa.div(&pb).is_none() {
            prop_assert_eq!(df.replace_monomial(&pb, &pa), relation);
        }
    }

    #[test]
    fn printing_round_trips(f in sparse_poly(4)) {
        let names = VarNames::new(SampleSpace::table2x2());
        let text = f.display(&names).to_string();
        prop_assert_eq!(parse_polynomial(&text, &names).unwrap(), f);
    }
}

/// Every contrast supported off cell `x` has coefficients in the zero set of `L_x`.
#[test]
fn face_factors_vanish_on_off_cell_contrasts() {
    for d in 2..=4 {
        let space = SampleSpace::numbered(d).unwrap();
        // a generic basis: e_0 − e_y shifted by a fixed contrast
        let basis: Vec<ContrastVector> = (1..d)
            .map(|y| {
                let mut v = vec![0.0; d];
                v[0] += 1.0;
                v[y] -= 1.0;
                v[(y + 1) % d] += 0.5 * y as f64;
                v[y % d] -= 0.5 * y as f64;
                ContrastVector::new(space.clone(), v).unwrap()
            })
            .collect();
        let names: Vec<String> = (0..d - 1).map(|i| format!("c{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let fp = face_product(&basis, &refs).unwrap();
        assert_eq!(fp.factors.len(), d);
        // coefficient vectors on a small integer lattice
        let m = d - 1;
        let mut coeffs = vec![-2i64; m];
        loop {
            let c: Vec<f64> = coeffs.iter().map(|&c| c as f64).collect();
            let contrast: Vec<f64> = (0..d)
                .map(|x| basis.iter().zip(&c).map(|(b, c)| c * b.values()[x]).sum())
                .collect();
            for (x, factor) in fp.factors.iter().enumerate() {
                let value = factor.eval_f64(|v| c[v.index]);
                assert_eq!(contrast[x] == 0.0, value == 0.0, "d={d} x={x} coeffs={coeffs:?}");
            }
            let mut i = 0;
            while i < m && coeffs[i] == 2 {
                coeffs[i] = -2;
                i += 1;
            }
            if i == m {
                break;
            }
            coeffs[i] += 1;
        }
    }
}
