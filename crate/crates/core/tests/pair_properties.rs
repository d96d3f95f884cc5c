use pairform::alt::{alt_canonicalize, convert};
use pairform::atlas::{assemble, build_pair_block, sort_blocks, CanonicalBlock, Family};
use pairform::canonical::{canonicalize_pair, verify_canonical, witness_form, Flavor};
use pairform::glr::glr_of_pair;
use pairform::harness::{random_canonical_pair, random_spectrum_spec, random_transition, same_blocks, SpectrumSpec};
use pairform::linalg::{cx, inverse, norm, signature, CMatrix};
use pairform::normalizers::normalize_positive;
use pairform::pair::{apply_basis_change, symmetric_form_of_pair, validate_pair, AntilinearOperator, SelfAdjointPair};
use pairform::spectral::{
    filtration_dim, primary_decomposition, restrict_pair, spectral_profile, split_filtration_dim, SubspaceBasis, SubspaceTag,
};
use pairform::ToleranceConfig;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn generated(seed: u64, nmax: usize, kmax: usize) -> (SelfAdjointPair, SpectrumSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=nmax);
    let spec = random_spectrum_spec(n, kmax, &mut rng);
    let g = random_canonical_pair(spec.dim(), &spec, Some(rng.gen()), &ToleranceConfig::default()).unwrap();
    (g.pair, spec)
}

fn close(a: &SelfAdjointPair, b: &SelfAdjointPair, tol: f64) -> bool {
    norm(&(a.h() - b.h())) <= tol * norm(b.h()) && norm(&(a.c() - b.c())) <= tol * norm(b.c()).max(1.0)
}

#[test]
fn generation_is_deterministic() {
    let tol = ToleranceConfig::default();
    let spec: SpectrumSpec = "positive:1.5:2:-,negative:-2:1,zero:3".parse().unwrap();
    let a = random_canonical_pair(spec.dim(), &spec, Some(42), &tol).unwrap();
    let b = random_canonical_pair(spec.dim(), &spec, Some(42), &tol).unwrap();
    assert_eq!(a.pair.h(), b.pair.h());
    assert_eq!(a.pair.c(), b.pair.c());
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn generated_pairs_validate(seed in any::<u64>()) {
        let tol = ToleranceConfig::default();
        let (p, _) = generated(seed, 8, 4);
        prop_assert!(validate_pair(p.h(), p.c(), &tol).is_ok());
    }

    #[test]
    fn basis_change_round_trip(seed in any::<u64>()) {
        let tol = ToleranceConfig::default();
        let (p, _) = generated(seed, 6, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let m = random_transition(p.n, &mut rng);
        let q = apply_basis_change(&p, &m, &tol).unwrap();
        let back = apply_basis_change(&q, &inverse(&m, &tol).unwrap(), &tol).unwrap();
        prop_assert!(close(&back, &p, tol.verify_tol));
        prop_assert_eq!(signature(q.h(), &tol).unwrap(), signature(p.h(), &tol).unwrap());
    }

    #[test]
    fn basis_change_composes(seed in any::<u64>()) {
        let tol = ToleranceConfig::default();
        let (p, _) = generated(seed, 6, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let m1 = random_transition(p.n, &mut rng);
        let m2 = random_transition(p.n, &mut rng);
        let step = apply_basis_change(&apply_basis_change(&p, &m1, &tol).unwrap(), &m2, &tol).unwrap();
        let once = apply_basis_change(&p, &(&m2 * &m1), &tol).unwrap();
        prop_assert!(close(&step, &once, tol.verify_tol));
    }

    #[test]
    fn symmetric_form_is_symmetric(seed in any::<u64>()) {
        let (p, _) = generated(seed, 8, 4);
        let s = symmetric_form_of_pair(&p);
        prop_assert!(norm(&(&s - s.transpose())) <= 1e-6 * norm(&s));
    }

    #[test]
    fn canonicalization_is_idempotent(seed in any::<u64>()) {
        let tol = ToleranceConfig::default();
        let (p, _) = generated(seed, 8, 4);
        let f = canonicalize_pair(&p, &tol).unwrap();
        let (h, c) = assemble(&f.blocks).unwrap();
        let again = canonicalize_pair(&validate_pair(&h, &c, &tol).unwrap(), &tol).unwrap();
        prop_assert!(same_blocks(&again.blocks, &f.blocks, &tol));
        prop_assert_eq!(signature(&h, &tol).unwrap(), signature(p.h(), &tol).unwrap());
    }

    #[test]
    fn profile_accounts_for_every_dimension(seed in any::<u64>()) {
        let tol = ToleranceConfig::default();
        let (p, _) = generated(seed, 8, 4);
        let prof = spectral_profile(p.c(), &tol).unwrap();
        prop_assert_eq!(prof.total_dim(), p.n);
        for c in &prof.clusters {
            if matches!(c.family, Family::Negative | Family::Nonreal) {
                prop_assert!(c.jordan_sizes.iter().all(|&(_, r)| r % 2 == 0), "{:?}", c);
            }
        }
        let subs = primary_decomposition(&p, &prof, &tol).unwrap();
        let dims: Vec<usize> = subs.iter().map(|s| s.dim()).collect();
        let want: Vec<usize> = prof.clusters.iter().map(|c| c.dim).collect();
        prop_assert_eq!(dims, want);
    }

    #[test]
    fn positive_filtration_splits(seed in any::<u64>(), k in 1usize..5, extra in 0usize..3) {
        let tol = ToleranceConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lambda = rng.gen_range(0.5..2.0);
        let mut blocks = vec![CanonicalBlock::positive(lambda, k, 1).unwrap()];
        if extra > 0 {
            blocks.push(CanonicalBlock::positive(lambda, extra, -1).unwrap());
        }
        let spec = SpectrumSpec::new(blocks);
        let p = random_canonical_pair(spec.dim(), &spec, Some(seed), &tol).unwrap().pair;
        // W^{(j)+} contains W^{(j−1)}, whose real dimension is twice its complex one.
        let mut prev = 0;
        for j in 1..=k.max(extra) {
            let real = split_filtration_dim(&p, lambda, j, true, &tol).unwrap();
            let complex = filtration_dim(&p, cx(lambda * lambda, 0.0), j, &tol).unwrap();
            prop_assert_eq!(real - 2 * prev, complex - prev, "level {}", j);
            prev = complex;
        }
    }

    #[test]
    fn positive_chain_realizes_atlas_pair(seed in any::<u64>(), k in 1usize..6, eps in prop::sample::select(vec![1i8, -1])) {
        let tol = ToleranceConfig::default();
        let b = CanonicalBlock::positive(1.3, k, eps).unwrap();
        let spec = SpectrumSpec::new(vec![b]);
        let p = random_canonical_pair(spec.dim(), &spec, Some(seed), &tol).unwrap().pair;
        let (chain, _) = normalize_positive(&p, &tol).unwrap();
        prop_assert!(same_blocks(&[chain.block], &[b], &tol), "{:?}", chain.block);
        let local = restrict_pair(&p, &SubspaceBasis::new(chain.vectors, SubspaceTag::Chain), &tol).unwrap();
        let (h, c) = build_pair_block(&b).unwrap();
        prop_assert!(norm(&(local.h() - &h)) <= tol.verify_tol * norm(&h));
        prop_assert!(norm(&(local.c() - &c)) <= tol.verify_tol * norm(&c));
    }

    #[test]
    fn witness_form_is_valid(seed in any::<u64>(), n in 1usize..7) {
        let tol = ToleranceConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = CMatrix::from_fn(n, n, |_, _| cx(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0)));
        let h = witness_form(&AntilinearOperator::new(c.clone()).unwrap(), &tol).unwrap();
        prop_assert!(validate_pair(h.matrix(), &c, &tol).is_ok());
    }

    #[test]
    fn alternative_round_trip(seed in any::<u64>()) {
        let tol = ToleranceConfig::default();
        let (p, _) = generated(seed, 6, 3);
        let std = canonicalize_pair(&p, &tol).unwrap();
        let alt = alt_canonicalize(&p, &tol).unwrap();
        prop_assert!(verify_canonical(&p, &alt, &tol).unwrap().pass);
        prop_assert!(same_blocks(&sort_blocks(alt.blocks.clone()), &std.blocks, &tol));
        let back = convert(&p, &alt, Flavor::Standard, &tol).unwrap();
        prop_assert!(same_blocks(&back.blocks, &std.blocks, &tol));
        prop_assert!(verify_canonical(&p, &back, &tol).unwrap().pass);
    }

    #[test]
    fn glr_conserves_signature(seed in any::<u64>()) {
        let tol = ToleranceConfig::default();
        let (p, spec) = generated(seed, 6, 3);
        prop_assume!(spec.families().iter().all(|&f| f != Family::Zero));
        let g = glr_of_pair(&p, &tol).unwrap();
        let (h, _) = g.assembled();
        prop_assert!(g.residuals.pass);
        prop_assert_eq!(signature(&h, &tol).unwrap(), signature(p.h(), &tol).unwrap());
    }
}
