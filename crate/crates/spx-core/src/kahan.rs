//! Compensated accumulation. All norm and tail sums in the crate go through
//! this so that results do not depend on summation order at the 1e-15 level.

/// Neumaier variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator.
pub fn sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = Kahan::new();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensates_cancellation() {
        let mut k = Kahan::new();
        k.add(1.0);
        k.add(1e100);
        k.add(1.0);
        k.add(-1e100);
        assert_eq!(k.value(), 2.0);
    }

    #[test]
    fn harmonic_block_matches_f64_refinement() {
        let naive: f64 = (1..=100_000).map(|k| 1.0 / k as f64).sum();
        let comp = sum((1..=100_000).map(|k| 1.0 / k as f64));
        assert!((naive - comp).abs() < 1e-9);
    }
}
