use std::collections::HashSet;

use naxbench::problem::clamp_genotype;
use naxbench::spaces::{self, SPACE_NAMES};
use naxbench::Error;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn any_space() -> impl Strategy<Value = &'static str> {
    prop::sample::select(SPACE_NAMES.to_vec())
}

fn space_and_row() -> impl Strategy<Value = (&'static str, Vec<i64>)> {
    any_space().prop_flat_map(|name| {
        let d = spaces::by_name(name).unwrap().descriptor().dim();
        (Just(name), prop::collection::vec(-1000i64..1000, d))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn clamped_rows_are_in_range((name, row) in space_and_row()) {
        let space = spaces::by_name(name).unwrap();
        let x = clamp_genotype(space.descriptor(), &row).unwrap();
        prop_assert!(space.descriptor().check(&x).is_ok());
        for ((&v, &c), &raw) in x.iter().zip(&space.descriptor().cardinalities).zip(&row) {
            prop_assert_eq!(v as i64, raw.rem_euclid(c as i64));
        }
    }

    #[test]
    fn repair_yields_valid_genotypes((name, row) in space_and_row()) {
        let space = spaces::by_name(name).unwrap();
        let x = clamp_genotype(space.descriptor(), &row).unwrap();
        let repaired = space.repair(x.clone());
        prop_assert!(space.is_valid(&repaired).unwrap());
        if space.is_valid(&x).unwrap() {
            prop_assert_eq!(repaired, x);
        }
    }

    #[test]
    fn canonical_strings_are_fixpoints(name in any_space(), seed in 0u64..1000) {
        let space = spaces::by_name(name).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = &spaces::sample(space.as_ref(), &mut rng, 1).unwrap()[0];
        let p = space.decode(x).unwrap();
        prop_assert_eq!(space.canonicalize(&p).unwrap(), p);
    }
}

#[test]
fn wrong_length_is_rejected() {
    for space in spaces::all() {
        let d = space.descriptor().dim();
        let err = clamp_genotype(space.descriptor(), &vec![0; d + 1]).unwrap_err();
        assert!(matches!(err, Error::Dimension { .. }));
        assert!(space.decode(&vec![0; d - 1]).is_err());
    }
}

#[test]
fn out_of_range_is_rejected() {
    for space in spaces::all() {
        let mut x = vec![0; space.descriptor().dim()];
        x[0] = space.descriptor().cardinalities[0];
        assert!(matches!(
            space.is_valid(&x),
            Err(Error::OutOfRange { position: 0, .. })
        ));
    }
}

#[test]
fn enumeration_is_distinct_and_valid() {
    for name in ["nb201", "nats"] {
        let space = spaces::by_name(name).unwrap();
        let mut seen = HashSet::new();
        for x in spaces::enumerate(space.as_ref()).unwrap() {
            assert!(space.is_valid(&x).unwrap());
            assert!(seen.insert(x));
        }
        assert_eq!(seen.len() as f64, space.descriptor().raw_size());
    }
}

#[test]
fn large_spaces_refuse_enumeration() {
    for name in ["nb101", "darts", "resnet50", "transformer", "mnv3"] {
        let space = spaces::by_name(name).unwrap();
        assert!(matches!(
            spaces::enumerate(space.as_ref()),
            Err(Error::Unsupported(_))
        ));
    }
}

#[test]
fn sampling_is_seeded() {
    for space in spaces::all() {
        let a = spaces::sample(space.as_ref(), &mut ChaCha8Rng::seed_from_u64(3), 50).unwrap();
        let b = spaces::sample(space.as_ref(), &mut ChaCha8Rng::seed_from_u64(3), 50).unwrap();
        assert_eq!(a, b);
    }
    assert!(spaces::by_name("nb999").is_err());
}
