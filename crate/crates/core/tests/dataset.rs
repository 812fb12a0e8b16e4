use std::collections::BTreeSet;

use logscan::dataset::permutation;
use logscan::synthetic::{generate_dataset, SyntheticSpec};
use logscan::{drop_empty, split, Dataset, LogRecord, PointCloud, ProductBasket, SplitSpec};
use proptest::prelude::*;

fn dataset(n: usize) -> Dataset {
    let scan = PointCloud::from_arrays(&[[0.0, 0.0, 0.0]]).unwrap();
    let records = (0..n)
        .map(|i| {
            LogRecord::new(
                format!("r{i}"),
                scan.clone(),
                ProductBasket::new(vec![i as u32 % 2]),
            )
        })
        .collect();
    Dataset::new(records, 1, None).unwrap()
}

proptest! {
    #[test]
    fn splits_partition_the_dataset(
        n in 2usize..200,
        frac in 0.05..0.95f64,
        seed in any::<u64>(),
        run in 0usize..10,
    ) {
        let ds = dataset(n);
        let spec = SplitSpec { train_fraction: frac, seed, runs: 10, drop_empty_baskets: false };
        let (train, test) = split(&ds, &spec, run).unwrap();
        prop_assert_eq!(train.len(), (n as f64 * frac).floor() as usize);
        prop_assert_eq!(train.len() + test.len(), n);
        let a: BTreeSet<_> = train.records().iter().map(|r| r.id.clone()).collect();
        let b: BTreeSet<_> = test.records().iter().map(|r| r.id.clone()).collect();
        prop_assert!(a.is_disjoint(&b));
        prop_assert_eq!(split(&ds, &spec, run).unwrap(), (train, test));
    }

    #[test]
    fn permutations_are_permutations(n in 0usize..300, seed in any::<u64>(), run in 0usize..50) {
        let mut p = permutation(n, seed, run);
        p.sort_unstable();
        prop_assert_eq!(p, (0..n).collect::<Vec<_>>());
    }
}

#[test]
fn drop_empty_removes_exactly_the_empty_prototypes() {
    let spec = SyntheticSpec {
        prototypes: 12,
        copies_per_prototype: 3,
        products: 5,
        points: (30, 40),
        empty_prototypes: 4,
        ..SyntheticSpec::default()
    };
    let ds = generate_dataset(&spec).unwrap();
    assert_eq!(ds.len(), 36);
    let kept = drop_empty(&ds);
    assert_eq!(kept.len(), 24);
    assert!(kept.records().iter().all(|r| !r.basket.is_all_zero()));
}

#[test]
fn synthetic_generation_is_seeded() {
    let spec = SyntheticSpec {
        prototypes: 4,
        copies_per_prototype: 2,
        points: (20, 30),
        ..SyntheticSpec::default()
    };
    assert_eq!(
        generate_dataset(&spec).unwrap(),
        generate_dataset(&spec).unwrap()
    );
    let other = SyntheticSpec {
        seed: 1,
        ..spec.clone()
    };
    assert_ne!(
        generate_dataset(&spec).unwrap(),
        generate_dataset(&other).unwrap()
    );
}
