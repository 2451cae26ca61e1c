use serde::{Deserialize, Serialize};

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub std_err: f64,
}

impl MeanEstimate {
    /// Summed in iteration order, so equal inputs give bit-equal outputs.
    pub fn from_samples<I>(samples: I) -> MeanEstimate
    where
        I: IntoIterator<Item = f64>,
    {
        let (mut count, mut sum, mut sumsq) = (0usize, 0.0f64, 0.0f64);
        for x in samples {
            count += 1;
            sum += x;
            sumsq += x * x;
        }
        if count == 0 {
            return MeanEstimate {
                count,
                mean: f64::NAN,
                std_dev: f64::NAN,
                std_err: f64::NAN,
            };
        }
        let mean = sum / count as f64;
        let var = if count > 1 {
            ((sumsq - count as f64 * mean * mean) / (count as f64 - 1.0)).max(0.0)
        } else {
            0.0
        };
        let std_dev = var.sqrt();
        MeanEstimate {
            count,
            mean,
            std_dev,
            std_err: std_dev / (count as f64).sqrt(),
        }
    }

    /// 95% normal-approximation halfwidth.
    pub fn halfwidth(&self) -> f64 {
        1.96 * self.std_err
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        let m = MeanEstimate::from_samples([1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.std_dev - (5.0f64 / 3.0).sqrt()).abs() < 1e-12);
        assert!((m.std_err - m.std_dev / 2.0).abs() < 1e-15);
        assert_eq!(MeanEstimate::from_samples([7.0]).std_err, 0.0);
    }
}
