//! Image-quality scores: MSE, PSNR and a single-window (global) SSIM.

use crate::error::{Error, Result};
use crate::imaging::Image;

/// SSIM stabilizer factors, `d1 = (K1 L)²`, `d2 = (K2 L)²`.
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

fn check_dims(a: &Image, b: &Image) -> Result<()> {
    if a.height() != b.height() || a.width() != b.width() {
        return Err(Error::arg(format!(
            "image dimensions differ: {}x{} vs {}x{}",
            a.height(),
            a.width(),
            b.height(),
            b.width()
        )));
    }
    Ok(())
}

/// Mean of squared pixel differences.
pub fn mse(a: &Image, b: &Image) -> Result<f64> {
    check_dims(a, b)?;
    let sum: f64 = a.pixels().iter().zip(b.pixels()).map(|(x, y)| (x - y).powi(2)).sum();
    Ok(sum / a.pixels().len() as f64)
}

/// `10 log10(MAX² / MSE)` from a precomputed MSE; `+∞` when `mse = 0`.
pub fn psnr_from_mse(mse: f64, max_value: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (max_value * max_value / mse).log10()
    }
}

pub fn psnr(a: &Image, b: &Image, max_value: f64) -> Result<f64> {
    if !(max_value > 0.0) {
        return Err(Error::arg(format!("PSNR peak value must be positive, got {max_value}")));
    }
    Ok(psnr_from_mse(mse(a, b)?, max_value))
}

/// Global SSIM over the whole image with population statistics.
pub fn ssim_global(a: &Image, b: &Image, dynamic_range: f64) -> Result<f64> {
    check_dims(a, b)?;
    if !(dynamic_range > 0.0) {
        return Err(Error::arg(format!("SSIM dynamic range must be positive, got {dynamic_range}")));
    }
    let d1 = (SSIM_K1 * dynamic_range).powi(2);
    let d2 = (SSIM_K2 * dynamic_range).powi(2);
    let (x, y) = (a.pixels(), b.pixels());
    let len = x.len() as f64;
    let mu_a = x.iter().sum::<f64>() / len;
    let mu_b = y.iter().sum::<f64>() / len;
    let (mut var_a, mut var_b, mut cov) = (0.0, 0.0, 0.0);
    for (p, q) in x.iter().zip(y) {
        let (da, db) = (p - mu_a, q - mu_b);
        var_a += da * da;
        var_b += db * db;
        cov += da * db;
    }
    let (var_a, var_b, cov) = (var_a / len, var_b / len, cov / len);
    Ok((2.0 * mu_a * mu_b + d1) * (2.0 * cov + d2) / ((mu_a * mu_a + mu_b * mu_b + d1) * (var_a + var_b + d2)))
}

/// MSE, PSNR and SSIM of a test image against a reference, for images in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub mse: f64,
    pub psnr_db: f64,
    pub ssim: f64,
}

impl QualityReport {
    pub const HEADER: [&'static str; 3] = ["mse", "psnr_db", "ssim"];

    pub fn compare(reference: &Image, test: &Image) -> Result<Self> {
        let mse = mse(reference, test)?;
        Ok(QualityReport { mse, psnr_db: psnr_from_mse(mse, 1.0), ssim: ssim_global(reference, test, 1.0)? })
    }

    pub fn values(&self) -> [f64; 3] {
        [self.mse, self.psnr_db, self.ssim]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn img(h: usize, w: usize, p: Vec<f64>) -> Image {
        Image::new(h, w, p).unwrap()
    }

    fn random_image(rng: &mut ChaCha8Rng, h: usize, w: usize) -> Image {
        img(h, w, (0..h * w).map(|_| rng.random::<f64>()).collect())
    }

    /// Second implementation of the SSIM formula: two-pass sums, no shared helpers.
    fn ssim_oracle(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let va = a.iter().map(|x| x * x).sum::<f64>() / n - ma * ma;
        let vb = b.iter().map(|x| x * x).sum::<f64>() / n - mb * mb;
        let cab = a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / n - ma * mb;
        let (d1, d2) = (1e-4, 9e-4);
        let luminance = (2.0 * ma * mb + d1) / (ma * ma + mb * mb + d1);
        let contrast_structure = (2.0 * cab + d2) / (va + vb + d2);
        luminance * contrast_structure
    }

    #[test]
    fn mse_examples() {
        let a = img(2, 2, vec![0.0, 0.0, 1.0, 1.0]);
        let b = img(2, 2, vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(mse(&a, &b).unwrap(), 0.5);
        let z = Image::constant(3, 3, 0.0).unwrap();
        let h = Image::constant(3, 3, 0.5).unwrap();
        assert_eq!(mse(&z, &h).unwrap(), 0.25);
        assert!(matches!(mse(&a, &z), Err(Error::Argument(_))));
    }

    #[test]
    fn psnr_examples() {
        let a = img(2, 2, vec![0.0, 0.0, 1.0, 1.0]);
        let b = img(2, 2, vec![0.0, 1.0, 1.0, 0.0]);
        assert_eq!(psnr(&a, &a, 1.0).unwrap(), f64::INFINITY);
        assert!((psnr_from_mse(0.01, 1.0) - 20.0).abs() < 1e-12);
        assert!((psnr(&a, &b, 1.0).unwrap() - 3.010_299_956_639_812).abs() < 1e-12);
        assert!(psnr(&a, &b, 0.0).is_err());
    }

    #[test]
    fn psnr_strictly_decreasing_in_mse() {
        let mut prev = f64::INFINITY;
        for i in 1..=1000 {
            let v = psnr_from_mse(i as f64 * 1e-3, 1.0);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn ssim_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_image(&mut rng, 6, 5);
        assert!((ssim_global(&a, &a, 1.0).unwrap() - 1.0).abs() < 1e-15);

        let z = Image::constant(4, 4, 0.0).unwrap();
        let o = Image::constant(4, 4, 1.0).unwrap();
        assert!((ssim_global(&z, &o, 1.0).unwrap() - 1e-4 / 1.0001).abs() < 1e-15);

        let a = random_image(&mut rng, 4, 4);
        let b = random_image(&mut rng, 4, 4);
        let s = ssim_global(&a, &b, 1.0).unwrap();
        assert!((s - ssim_oracle(a.pixels(), b.pixels())).abs() < 1e-12);
        assert!(ssim_global(&a, &z, 0.0).is_err());
    }

    #[test]
    fn ssim_symmetric_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..1000 {
            let a = random_image(&mut rng, 5, 7);
            let b = random_image(&mut rng, 5, 7);
            let s = ssim_global(&a, &b, 1.0).unwrap();
            assert!(s.abs() <= 1.0 + 1e-12);
            if i < 100 {
                assert_eq!(s, ssim_global(&b, &a, 1.0).unwrap());
            }
        }
    }

    #[test]
    fn report_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_image(&mut rng, 8, 8);
        let r = QualityReport::compare(&a, &a).unwrap();
        assert_eq!(r.mse, 0.0);
        assert_eq!(r.psnr_db, f64::INFINITY);
        assert!((r.ssim - 1.0).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn report_consistent(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_image(&mut rng, 6, 6);
            let b = random_image(&mut rng, 6, 6);
            let r = QualityReport::compare(&a, &b).unwrap();
            prop_assert!(r.mse > 0.0 && r.psnr_db.is_finite());
            prop_assert!((r.psnr_db - psnr(&a, &b, 1.0).unwrap()).abs() < 1e-12);
        }
    }
}
