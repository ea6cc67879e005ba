//! Real fields on periodic boxes in one to three dimensions and their
//! discrete Fourier coefficients.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralField {
    pub sizes: Vec<usize>,
    pub lengths: Vec<f64>,
    /// Row-major samples, last axis fastest.
    pub values: Vec<f64>,
    /// `f̂_ξ = N⁻¹ Σ_x f(x) e^{-iξ·x}`, same layout as `values`.
    pub coeffs: Vec<Complex64>,
}

fn check_shape(sizes: &[usize], lengths: &[f64]) -> Result<()> {
    if sizes.is_empty() || sizes.len() > 3 {
        return Err(Error::InvalidParameter(format!("dimension {} not in 1..=3", sizes.len())));
    }
    if sizes.len() != lengths.len() {
        return Err(Error::GridMismatch("sizes and lengths differ in dimension".into()));
    }
    if let Some(s) = sizes.iter().find(|s| !s.is_power_of_two() || **s < 2) {
        return Err(Error::InvalidParameter(format!("grid size {s} is not a power of two >= 2")));
    }
    if let Some(l) = lengths.iter().find(|l| !(**l > 0.0)) {
        return Err(Error::InvalidParameter(format!("box length {l} must be positive")));
    }
    Ok(())
}

/// In-place FFT along every axis of a row-major array.
fn fft_all_axes(data: &mut [Complex64], sizes: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let total: usize = sizes.iter().product();
    for (axis, &len) in sizes.iter().enumerate() {
        let fft = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
        let stride: usize = sizes[axis + 1..].iter().product();
        let outer = total / (len * stride);
        let mut line = vec![Complex64::new(0.0, 0.0); len];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * len * stride + s;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
    }
}

impl SpectralField {
    pub fn from_values(sizes: Vec<usize>, lengths: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        check_shape(&sizes, &lengths)?;
        let total: usize = sizes.iter().product();
        if values.len() != total {
            return Err(Error::GridMismatch(format!("{} values for a grid of {total}", values.len())));
        }
        let mut coeffs: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_all_axes(&mut coeffs, &sizes, false);
        let inv = 1.0 / total as f64;
        coeffs.iter_mut().for_each(|c| *c *= inv);
        let mut field = Self { sizes, lengths, values, coeffs };
        // project onto exact Hermitian symmetry (the data is real)
        let sym: Vec<Complex64> = (0..total)
            .map(|i| (field.coeffs[i] + field.coeffs[field.conjugate_index(i)].conj()) * 0.5)
            .collect();
        field.coeffs = sym;
        Ok(field)
    }

    /// Samples `f` at `x_j = j L / N` on each axis.
    pub fn from_fn(sizes: Vec<usize>, lengths: Vec<f64>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        check_shape(&sizes, &lengths)?;
        let total: usize = sizes.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut x = vec![0.0; sizes.len()];
        for flat in 0..total {
            let mut rem = flat;
            for axis in (0..sizes.len()).rev() {
                let i = rem % sizes[axis];
                rem /= sizes[axis];
                x[axis] = i as f64 * lengths[axis] / sizes[axis] as f64;
            }
            values.push(f(&x));
        }
        Self::from_values(sizes, lengths, values)
    }

    /// Square grid of side `size` and length `2π` in `dim` dimensions.
    pub fn torus(dim: usize, size: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::from_fn(vec![size; dim], vec![2.0 * PI; dim], f)
    }

    /// Rebuilds a field from coefficients, discarding rounding-level
    /// imaginary parts of the inverse transform.
    pub fn from_coeffs(sizes: Vec<usize>, lengths: Vec<f64>, coeffs: Vec<Complex64>) -> Result<Self> {
        check_shape(&sizes, &lengths)?;
        let mut data = coeffs.clone();
        fft_all_axes(&mut data, &sizes, true);
        let values = data.iter().map(|c| c.re).collect();
        Ok(Self { sizes, lengths, values, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Integer wave numbers of the flat index.
    pub fn wave_numbers(&self, flat: usize) -> Vec<i64> {
        let mut rem = flat;
        let mut out = vec![0i64; self.dim()];
        for axis in (0..self.dim()).rev() {
            let n = self.sizes[axis];
            let i = rem % n;
            rem /= n;
            out[axis] = if i <= n / 2 { i as i64 } else { i as i64 - n as i64 };
        }
        out
    }

    /// `|ξ|²` with `ξ_a = 2π k_a / L_a`.
    pub fn xi_squared(&self, flat: usize) -> f64 {
        self.wave_numbers(flat)
            .iter()
            .zip(&self.lengths)
            .map(|(&k, &l)| {
                let xi = 2.0 * PI * k as f64 / l;
                xi * xi
            })
            .sum()
    }

    /// Index of the mode `-ξ`.
    pub fn conjugate_index(&self, flat: usize) -> usize {
        let mut rem = flat;
        let mut idx = 0;
        let mut stride = 1;
        for axis in (0..self.dim()).rev() {
            let n = self.sizes[axis];
            let i = rem % n;
            rem /= n;
            idx += ((n - i) % n) * stride;
            stride *= n;
        }
        idx
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.sizes != other.sizes || self.lengths != other.lengths {
            return Err(Error::GridMismatch(format!(
                "{:?}/{:?} vs {:?}/{:?}",
                self.sizes, self.lengths, other.sizes, other.lengths
            )));
        }
        Ok(())
    }

    /// Multiplies each coefficient by `symbol(|ξ|)`; the symbol is evaluated
    /// once per distinct `|ξ|²`, concurrently.
    pub fn map_radial<F>(&self, symbol: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64> + Sync,
    {
        let xi2: Vec<f64> = (0..self.len()).map(|i| self.xi_squared(i)).collect();
        let mut distinct: Vec<u64> = xi2.iter().map(|v| v.to_bits()).collect();
        distinct.sort_unstable();
        distinct.dedup();
        let evaluated: Vec<(u64, f64)> = distinct
            .par_iter()
            .map(|&bits| symbol(f64::from_bits(bits).sqrt()).map(|v| (bits, v)))
            .collect::<Result<_>>()?;
        let table: HashMap<u64, f64> = evaluated.into_iter().collect();
        let coeffs = self.coeffs.iter().zip(&xi2).map(|(c, x)| c * table[&x.to_bits()]).collect();
        Self::from_coeffs(self.sizes.clone(), self.lengths.clone(), coeffs)
    }

    /// `∫ f g` by Parseval.
    pub fn pairing(&self, other: &Self) -> Result<f64> {
        self.same_grid(other)?;
        let s: f64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a.conj() * b).re).sum();
        Ok(self.volume() * s)
    }

    /// `∫ f g` by the rectangle rule on the samples (spectrally accurate).
    pub fn pairing_quadrature(&self, other: &Self) -> Result<f64> {
        self.same_grid(other)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(self.volume() * s / self.len() as f64)
    }

    /// `∫ |∇f|²`.
    pub fn dirichlet_energy(&self) -> f64 {
        let s: f64 = self.coeffs.iter().enumerate().map(|(i, c)| self.xi_squared(i) * c.norm_sqr()).sum();
        self.volume() * s
    }

    /// Largest `|f̂_{-ξ} - conj(f̂_ξ)|`.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.len())
            .map(|i| (self.coeffs[self.conjugate_index(i)] - self.coeffs[i].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_grid(other)?;
        Ok(self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// CSV with one index column per axis and a `value` column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.dim()).map(|a| format!("i{a}")).collect();
        header.push("value".into());
        w.write_record(&header)?;
        for flat in 0..self.len() {
            let mut rem = flat;
            let mut idx = vec![0usize; self.dim()];
            for axis in (0..self.dim()).rev() {
                idx[axis] = rem % self.sizes[axis];
                rem /= self.sizes[axis];
            }
            let mut rec: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            rec.push(format!("{:e}", self.values[flat]));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format of [`SpectralField::write_csv`]; sizes are inferred
    /// from the largest index on each axis.
    pub fn read_csv<R: Read>(input: R, lengths: Option<Vec<f64>>) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        let dim = header.len().checked_sub(1).filter(|d| (1..=3).contains(d)).ok_or_else(|| {
            Error::Parse(format!("expected 2 to 4 columns, found {}", header.len()))
        })?;
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let idx = (0..dim)
                .map(|a| rec[a].trim().parse::<usize>().map_err(|e| Error::Parse(format!("index: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let v = rec[dim].trim().parse::<f64>().map_err(|e| Error::Parse(format!("value: {e}")))?;
            rows.push((idx, v));
        }
        let sizes: Vec<usize> =
            (0..dim).map(|a| rows.iter().map(|(i, _)| i[a]).max().map_or(0, |m| m + 1)).collect();
        let total: usize = sizes.iter().product();
        if rows.len() != total {
            return Err(Error::Parse(format!("{} rows for a {sizes:?} grid", rows.len())));
        }
        let mut values = vec![0.0; total];
        for (idx, v) in rows {
            let flat = idx.iter().zip(&sizes).fold(0, |acc, (i, n)| acc * n + i);
            values[flat] = v;
        }
        let lengths = lengths.unwrap_or_else(|| vec![2.0 * PI; dim]);
        Self::from_values(sizes, lengths, values)
    }
}

/// Applies the Fourier multiplier `|ξ|^{2γ}` (the zero mode goes to zero).
pub fn fractional_multiplier_apply(f: &SpectralField, gamma: f64) -> Result<SpectralField> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
    }
    f.map_radial(|xi| Ok(if xi == 0.0 { 0.0 } else { xi.powf(2.0 * gamma) }))
}

/// Field with a few random low modes, zero mean.
pub fn random_field(dim: usize, size: usize, modes: usize, seed: u64) -> Result<SpectralField> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(Vec<f64>, f64, f64)> = (0..modes)
        .map(|_| {
            let k: Vec<f64> = (0..dim).map(|_| f64::from(rng.gen_range(-4i32..=4))).collect();
            (k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    let f = SpectralField::torus(dim, size, |x| {
        terms
            .iter()
            .map(|(k, a, phase)| a * (k.iter().zip(x).map(|(k, x)| k * x).sum::<f64>() + phase).cos())
            .sum()
    })?;
    let mut coeffs = f.coeffs.clone();
    coeffs[0] = Complex64::new(0.0, 0.0);
    SpectralField::from_coeffs(f.sizes, f.lengths, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cos1() -> SpectralField {
        SpectralField::torus(2, 16, |x| x[0].cos()).unwrap()
    }

    #[test]
    fn multiplier_examples() {
        let f = cos1();
        let g = fractional_multiplier_apply(&f, 0.5).unwrap();
        assert!(g.max_abs_diff(&f).unwrap() < 1e-13);
        let c = SpectralField::torus(2, 16, |_| 3.0).unwrap();
        assert!(fractional_multiplier_apply(&c, 0.7).unwrap().sup_norm() < 1e-14);
        let f2 = SpectralField::torus(2, 16, |x| (2.0 * x[0]).cos()).unwrap();
        let g2 = fractional_multiplier_apply(&f2, 0.75).unwrap();
        let expect = SpectralField::torus(2, 16, |x| 2f64.powf(1.5) * (2.0 * x[0]).cos()).unwrap();
        assert!(g2.max_abs_diff(&expect).unwrap() < 1e-13);
    }

    #[test]
    fn pairing_examples() {
        let f = cos1();
        let s = SpectralField::torus(2, 16, |x| x[0].sin()).unwrap();
        assert_relative_eq!(f.pairing(&f).unwrap(), 2.0 * PI * PI, max_relative = 1e-13);
        assert!(f.pairing(&s).unwrap().abs() < 1e-12);
        let other = SpectralField::torus(2, 8, |x| x[0].sin()).unwrap();
        assert!(matches!(f.pairing(&other), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn dirichlet_examples() {
        assert_relative_eq!(cos1().dirichlet_energy(), 2.0 * PI * PI, max_relative = 1e-13);
        assert!(SpectralField::torus(2, 16, |_| 1.0).unwrap().dirichlet_energy().abs() < 1e-20);
        let f = SpectralField::torus(2, 16, |x| x[0].cos() + (2.0 * x[1]).cos()).unwrap();
        assert_relative_eq!(f.dirichlet_energy(), 10.0 * PI * PI, max_relative = 1e-13);
    }

    #[test]
    fn parseval_matches_quadrature_and_multiplier_sum() {
        let f = random_field(2, 32, 6, 3).unwrap();
        let g = random_field(2, 32, 6, 4).unwrap();
        assert_relative_eq!(f.pairing(&g).unwrap(), f.pairing_quadrature(&g).unwrap(), epsilon = 1e-10);
        let pf = fractional_multiplier_apply(&f, 0.8).unwrap();
        let direct: f64 =
            f.coeffs.iter().enumerate().map(|(i, c)| c.norm_sqr() * f.xi_squared(i).powf(0.8)).sum::<f64>() * f.volume();
        assert_relative_eq!(f.pairing(&pf).unwrap(), direct, max_relative = 1e-12);
    }

    #[test]
    fn csv_round_trip_keeps_values() {
        let f = random_field(3, 4, 3, 9).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let g = SpectralField::read_csv(buf.as_slice(), None).unwrap();
        assert_eq!(g.sizes, f.sizes);
        assert!(g.max_abs_diff(&f).unwrap() < 1e-14);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(SpectralField::torus(4, 8, |_| 0.0).is_err());
        assert!(SpectralField::torus(1, 12, |_| 0.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn semigroup(seed in 0u64..1000, g1 in 0.05f64..1.5, g2 in 0.05f64..1.5, dim in 1usize..=3) {
            let f = random_field(dim, 8, 4, seed).unwrap();
            let a = fractional_multiplier_apply(&fractional_multiplier_apply(&f, g1).unwrap(), g2).unwrap();
            let b = fractional_multiplier_apply(&f, g1 + g2).unwrap();
            let scale = b.sup_norm().max(1e-300);
            prop_assert!(a.max_abs_diff(&b).unwrap() <= 1e-12 * scale);
        }

        #[test]
        fn self_adjoint_and_hermitian(seed in 0u64..1000, g in 0.05f64..2.9) {
            let f = random_field(2, 16, 5, seed).unwrap();
            let h = random_field(2, 16, 5, seed + 7).unwrap();
            let pf = fractional_multiplier_apply(&f, g).unwrap();
            let ph = fractional_multiplier_apply(&h, g).unwrap();
            let lhs = pf.pairing(&h).unwrap();
            let rhs = f.pairing(&ph).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-11 * lhs.abs().max(1.0));
            prop_assert_eq!(pf.hermitian_defect(), 0.0);
        }

        #[test]
        fn transform_round_trip(seed in 0u64..1000) {
            let f = random_field(2, 8, 4, seed).unwrap();
            let g = SpectralField::from_values(f.sizes.clone(), f.lengths.clone(), f.values.clone()).unwrap();
            let back = SpectralField::from_coeffs(g.sizes.clone(), g.lengths.clone(), g.coeffs.clone()).unwrap();
            prop_assert!(back.max_abs_diff(&f).unwrap() <= 1e-12 * f.sup_norm().max(1e-300));
        }
    }
}
