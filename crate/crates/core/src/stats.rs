//! Streaming moments, compensated sums, priority subsampling and order
//! statistics used by the simulation engine.

/// Streaming mean/variance with Chan's pairwise merge.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let wb = other.count as f64 / count as f64;
        self.mean += delta * wb;
        self.m2 += other.m2 + delta * delta * self.count as f64 * wb;
        self.count = count;
    }

    /// Unbiased (n − 1) variance; NaN below two observations.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.carry);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// SplitMix64 finalizer.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform fixed-size subsample by bottom-k hashing.
///
/// Every observation gets a pseudo-random priority from its global index;
/// the `k` smallest priorities are kept. The kept set is a uniform sample
/// without replacement and does not depend on how the stream was chunked
/// or in which order partial samples were merged.
#[derive(Debug, Clone, Default)]
pub struct PrioritySample {
    cap: usize,
    items: Vec<(u64, f64)>,
}

impl PrioritySample {
    pub fn new(cap: usize) -> Self {
        Self {
            cap,
            items: Vec::new(),
        }
    }

    #[inline]
    pub fn offer(&mut self, salt: u64, index: u64, value: f64) {
        self.items.push((mix64(salt ^ mix64(index)), value));
        if self.items.len() >= 2 * self.cap.max(1) {
            self.shrink();
        }
    }

    pub fn merge(&mut self, other: PrioritySample) {
        self.items.extend(other.items);
        if self.items.len() > self.cap {
            self.shrink();
        }
    }

    fn shrink(&mut self) {
        if self.items.len() > self.cap {
            let key = |e: &(u64, f64)| (e.0, e.1.to_bits());
            self.items
                .select_nth_unstable_by(self.cap, |a, b| key(a).cmp(&key(b)));
            self.items.truncate(self.cap);
        }
    }

    /// Kept values in ascending order.
    pub fn into_sorted_values(mut self) -> Vec<f64> {
        self.shrink();
        let mut v: Vec<f64> = self.items.into_iter().map(|(_, x)| x).collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Linear-interpolation quantile (Hyndman–Fan type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = p.clamp(0.0, 1.0) * (n - 1) as f64;
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

/// Median absolute deviation (unscaled) of sorted data.
pub fn mad_sorted(sorted: &[f64]) -> f64 {
    let med = quantile_sorted(sorted, 0.5);
    let mut dev: Vec<f64> = sorted.iter().map(|x| (x - med).abs()).collect();
    dev.sort_by(f64::total_cmp);
    quantile_sorted(&dev, 0.5)
}

pub fn iqr_sorted(sorted: &[f64]) -> f64 {
    quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25)
}

/// Sample standard deviation (n − 1); `None` below two points.
pub fn std_dev(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let mut w = Welford::default();
    values.iter().for_each(|&x| w.push(x));
    Some(w.variance().sqrt())
}
