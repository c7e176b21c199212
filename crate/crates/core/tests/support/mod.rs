#![allow(dead_code)]

use growseg_core::growcut::FeatureGrid;
use growseg_core::seeding::{SeedRegion, SeedSet};
use proptest::prelude::*;

/// A GrowCut instance: per-pixel features and single-pixel seeds with
/// 1-based labels.
#[derive(Debug, Clone)]
pub struct Instance {
    pub w: usize,
    pub h: usize,
    pub features: Vec<Vec<f64>>,
    pub seeds: Vec<(usize, u16)>,
}

impl Instance {
    pub fn grid(&self) -> FeatureGrid {
        let dims = self.features[0].len();
        let data = self.features.iter().flatten().copied().collect();
        FeatureGrid::new(self.w, self.h, dims, data).unwrap()
    }

    pub fn seed_set(&self) -> SeedSet {
        SeedSet {
            width: self.w,
            height: self.h,
            regions: self
                .seeds
                .iter()
                .enumerate()
                .map(|(i, &(p, l))| SeedRegion {
                    id: i as u32 + 1,
                    pixels: vec![(p % self.w, p / self.w)],
                    descriptor: vec![],
                    cluster_label: Some(l - 1),
                })
                .collect(),
        }
    }
}

/// Features are either continuous or drawn from three levels, the latter
/// producing many equal attacks.
pub fn instance(w: usize, h: usize, dims: usize, seeds: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Instance> {
    let n = w * h;
    let continuous = prop::collection::vec(prop::collection::vec(0.0f64..1.0, dims), n).boxed();
    let coarse = prop::collection::vec(
        prop::collection::vec(prop::sample::select(vec![0.0, 0.5, 1.0]), dims),
        n,
    )
    .boxed();
    let features = prop_oneof![continuous, coarse];
    let seed_list = seeds.prop_flat_map(move |k| {
        (
            prop::sample::subsequence((0..n).collect::<Vec<_>>(), k).prop_shuffle(),
            prop::collection::vec(1u16..=k as u16, k),
        )
    });
    (features, seed_list).prop_map(move |(features, (pixels, labels))| Instance {
        w,
        h,
        features,
        seeds: pixels.into_iter().zip(labels).collect(),
    })
}
