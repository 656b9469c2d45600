use choquet_core::measures::VectorMeasure;
use choquet_core::transfer::{eval_pf, hustad, is_in_n, tilde, transfer_k};
use choquet_core::{random, GenericSpace};
use proptest::prelude::*;

type Space = GenericSpace<f64>;

fn setup(seed: u64) -> (Space, VectorMeasure<f64>, rand_chacha::ChaCha8Rng) {
    let mut rng = random::trial_rng(seed, 0);
    let s = random::space(&mut rng, 4);
    let mu = random::vector_measure(&mut rng, &s, 6);
    (s, mu, rng)
}

fn nonzero(mu: &VectorMeasure<f64>) -> VectorMeasure<f64> {
    VectorMeasure::from_entries(
        mu.support()
            .filter(|(_, v)| v.iter().any(|&x| x != 0.0))
            .map(|(t, v)| (t.clone(), v.clone())),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn hustad_inverts_transfer(seed in any::<u64>()) {
        let (s, mu, _) = setup(seed);
        let k = transfer_k(&mu, &s).unwrap();
        prop_assert!(hustad(&k).approx_eq(&nonzero(&mu), 1e-9));
    }

    #[test]
    fn transfer_preserves_norm_on_the_sphere(seed in any::<u64>()) {
        let (s, mu, _) = setup(seed);
        let k = transfer_k(&mu, &s).unwrap();
        let tv = mu.total_variation(&s).unwrap();
        prop_assert!((k.mass().unwrap() - tv).abs() <= 1e-9 * tv.max(1.0));
        for a in k.atoms() {
            prop_assert!((s.dual_norm(&a.xstar).unwrap() - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn tilde_fixes_transfer(seed in any::<u64>()) {
        let (s, mu, _) = setup(seed);
        let k = transfer_k(&mu, &s).unwrap();
        prop_assert!(tilde(&k, &s).unwrap().approx_eq(&k, 1e-9));
    }

    #[test]
    fn tilde_collapses_every_member(seed in any::<u64>(), depth in 1usize..4) {
        let (s, mu, mut rng) = setup(seed);
        let nu = random::n_member(&mut rng, &mu, &s, depth).unwrap();
        prop_assert!(is_in_n(&nu, &mu, &s));
        let k = transfer_k(&mu, &s).unwrap();
        prop_assert!(tilde(&nu, &s).unwrap().approx_eq(&k, 1e-9));
    }

    #[test]
    fn pf_adds_over_disjoint_labels(seed in any::<u64>()) {
        let (s, mu, mut rng) = setup(seed);
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for (i, (t, v)) in mu.support().enumerate() {
            if i % 2 == 0 { left.push((t.clone(), v.clone())) } else { right.push((t.clone(), v.clone())) }
        }
        let labels: Vec<&str> = mu.support().map(|(t, _)| t.as_str()).collect();
        let f = random::dfunction(&mut rng, &labels, s.dim());
        let (m1, m2) = (VectorMeasure::from_entries(left), VectorMeasure::from_entries(right));
        let whole = eval_pf(&f, &mu, &s).unwrap();
        let parts = eval_pf(&f, &m1, &s).unwrap() + eval_pf(&f, &m2, &s).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-9 * whole.abs().max(1.0));
    }

    #[test]
    fn linear_d_functions_give_the_pairing(seed in any::<u64>()) {
        use rand::Rng;
        let (s, mu, mut rng) = setup(seed);
        let g: std::collections::BTreeMap<String, Vec<f64>> = mu
            .entries
            .iter()
            .map(|(t, v)| (t.clone(), (0..v.len()).map(|_| rng.gen_range(-2.0..2.0)).collect()))
            .collect();
        let f = choquet_core::DFunction::linear(&g);
        let pf = eval_pf(&f, &mu, &s).unwrap();
        prop_assert!((pf - mu.pair(&g).unwrap()).abs() <= 1e-9 * pf.abs().max(1.0));
    }
}
