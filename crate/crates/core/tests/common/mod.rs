#![allow(dead_code)]

use fdenvelope_core::{binom_test, PValueFamily};
use proptest::prelude::*;

/// P-values with frequent ties and exact zeros.
pub fn tied_pvalue() -> impl Strategy<Value = f64> {
    prop_oneof![
        1 => Just(0.0),
        3 => (0u32..=25).prop_map(|k| k as f64 * 0.004),
        2 => (0u32..=20).prop_map(|k| k as f64 * 0.05),
        2 => 0.0..1.0f64,
        1 => Just(1.0),
    ]
}

pub fn uniform_family(max_m: usize) -> impl Strategy<Value = PValueFamily> {
    prop::collection::vec(tied_pvalue(), 1..=max_m).prop_map(|p| PValueFamily::uniform(p).unwrap())
}

/// Binomial-test families with small, varying numbers of trials.
pub fn binomial_family(max_m: usize) -> impl Strategy<Value = PValueFamily> {
    let test = (1u64..=10).prop_flat_map(|n| (Just(n), 0..=n));
    prop::collection::vec(test, 1..=max_m).prop_map(|tests| {
        let (p, c): (Vec<f64>, Vec<_>) = tests
            .into_iter()
            .map(|(n, x)| {
                let t = binom_test(n, x).unwrap();
                (t.pvalue, t.cdf)
            })
            .unzip();
        PValueFamily::new(p, c).unwrap()
    })
}

/// Family with a random subset mask drawn alongside it.
pub fn with_subset<S: Strategy<Value = PValueFamily>>(fam: S) -> impl Strategy<Value = (PValueFamily, Vec<usize>)> {
    fam.prop_flat_map(|f| {
        let m = f.m();
        (Just(f), prop::collection::vec(any::<bool>(), m))
    })
    .prop_map(|(f, mask)| {
        let s = mask.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        (f, s)
    })
}

pub fn all_subsets(m: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..(1u32 << m)).map(move |mask| (0..m).filter(|&i| mask >> i & 1 == 1).collect())
}
