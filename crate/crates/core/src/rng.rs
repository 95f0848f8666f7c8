//! Deterministic per-sample random streams and compensated summation.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type SampleRng = Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of the stream for sample `index` of `experiment` under `master`.
pub fn counter_hash(master: u64, experiment: u64, index: u64) -> u64 {
    let h = mix(master.wrapping_add(GOLDEN));
    let h = mix(h ^ experiment.wrapping_mul(0xd6e8_feb8_6659_fd93).wrapping_add(GOLDEN));
    mix(h ^ index.wrapping_mul(0xa076_1d64_78bd_642f).wrapping_add(GOLDEN))
}

pub fn stream(master: u64, experiment: u64, index: u64) -> SampleRng {
    SampleRng::seed_from_u64(counter_hash(master, experiment, index))
}

/// Neumaier summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}
