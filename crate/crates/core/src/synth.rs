//! Synthetic RKHS objectives: `f(x) = Σ_i α_i k(x, a_i)` with random
//! anchors `a_i` and Gaussian weights `α_i`, tabulated on a finite domain.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};

pub use crate::domain::{make_grid, Domain, GridShape};
use crate::error::{invalid, Error, Result};
use crate::kernels::KernelSpec;
use crate::rng;

/// Generation knobs. The defaults draw 100 anchors with unit weight scale and
/// rescale the surface so that its range over the domain lies in `[1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerateOptions {
    pub anchors: usize,
    pub weight_sigma: f64,
    pub rescale: bool,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            anchors: 100,
            weight_sigma: 1.0,
            rescale: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthFunction {
    kernel: KernelSpec,
    anchors: Vec<Vec<f64>>,
    weights: Vec<f64>,
    values: Vec<f64>,
    rkhs_norm: f64,
}

impl SynthFunction {
    /// Builds `f = Σ α_i k(·, a_i)` from explicit anchors and weights and
    /// tabulates it on `domain`.
    pub fn from_expansion(
        kernel: KernelSpec,
        anchors: Vec<Vec<f64>>,
        weights: Vec<f64>,
        domain: &Domain,
    ) -> Result<Self> {
        if anchors.is_empty() || anchors.len() != weights.len() {
            return Err(invalid("need one weight per anchor and at least one anchor"));
        }
        if domain.dim() != kernel.dim() {
            return Err(Error::DimensionMismatch {
                expected: kernel.dim(),
                got: domain.dim(),
            });
        }
        let gram = kernel.gram(&anchors)?;
        let quad: f64 = (0..anchors.len())
            .map(|i| weights[i] * crate::linalg::dot(gram.row(i), &weights))
            .sum();
        let mut f = Self {
            kernel,
            anchors,
            weights,
            values: Vec::new(),
            rkhs_norm: quad.max(0.0).sqrt(),
        };
        f.values = domain.points().map(|x| f.eval(x)).collect();
        Ok(f)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.anchors
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| w * self.kernel.eval_unchecked(a, x))
            .sum()
    }

    fn scale(&mut self, s: f64) {
        self.weights.iter_mut().for_each(|w| *w *= s);
        self.values.iter_mut().for_each(|v| *v *= s);
        self.rkhs_norm *= s.abs();
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn anchors(&self) -> &[Vec<f64>] {
        &self.anchors
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Values on the domain the function was generated for.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `‖f‖_H = √(αᵀ K α)`.
    pub fn rkhs_norm(&self) -> f64 {
        self.rkhs_norm
    }
}

/// Draws a random kernel expansion: anchors uniform on the domain's bounding
/// box, weights i.i.d. `N(0, weight_sigma²)`.
pub fn generate_function(
    kernel: KernelSpec,
    domain: &Domain,
    options: GenerateOptions,
    seed: u64,
) -> Result<SynthFunction> {
    if options.anchors == 0 {
        return Err(invalid("anchor count must be at least 1"));
    }
    if !(options.weight_sigma > 0.0) {
        return Err(invalid("weight_sigma must be positive"));
    }
    let mut rng = rng::stream(seed, rng::FUNCTION_STREAM);
    let (lo, hi) = domain.bounding_box();
    let anchors: Vec<Vec<f64>> = (0..options.anchors)
        .map(|_| {
            lo.iter()
                .zip(&hi)
                .map(|(&l, &h)| l + (h - l) * rng.random::<f64>())
                .collect()
        })
        .collect();
    let normal = Normal::new(0.0, options.weight_sigma).map_err(|e| invalid(e.to_string()))?;
    let weights: Vec<f64> = (0..options.anchors).map(|_| normal.sample(&mut rng)).collect();
    let mut f = SynthFunction::from_expansion(kernel, anchors, weights, domain)?;
    if options.rescale {
        let range = function_stats(f.values()).range;
        if range > 0.0 && range < 1.0 {
            f.scale(1.0 / range);
        } else if range > 2.0 {
            f.scale(2.0 / range);
        }
    }
    Ok(f)
}

/// Summary of a tabulated objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionStats {
    /// Lowest index attaining the maximum.
    pub argmax: usize,
    pub max: f64,
    pub min: f64,
    pub range: f64,
}

pub fn function_stats(values: &[f64]) -> FunctionStats {
    let mut argmax = 0;
    let mut max = f64::NEG_INFINITY;
    let mut min = f64::INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v > max {
            max = v;
            argmax = i;
        }
        min = min.min(v);
    }
    FunctionStats {
        argmax,
        max,
        min,
        range: max - min,
    }
}

/// Writes `index,x0,..,x{d-1},value` rows.
pub fn write_function_csv<W: Write>(writer: W, domain: &Domain, values: &[f64]) -> Result<()> {
    if values.len() != domain.len() {
        return Err(invalid("one value per domain point required"));
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["index".to_string()];
    header.extend((0..domain.dim()).map(|a| format!("x{a}")));
    header.push("value".into());
    w.write_record(&header)?;
    for (i, (p, v)) in domain.points().zip(values).enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(p.iter().map(f64::to_string));
        row.push(v.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_function_csv(path: &Path, domain: &Domain, values: &[f64]) -> Result<()> {
    write_function_csv(std::fs::File::create(path)?, domain, values)
}

/// Reads the format written by [`write_function_csv`].
pub fn read_function_csv<R: Read>(reader: R) -> Result<(Domain, Vec<f64>)> {
    let mut r = csv::Reader::from_reader(reader);
    let dim = r.headers()?.len().checked_sub(2).filter(|&d| d > 0).ok_or_else(|| {
        invalid("function CSV needs index, coordinate and value columns")
    })?;
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (row, record) in r.records().enumerate() {
        let record = record?;
        let parse = |s: &str| -> Result<f64> {
            s.trim()
                .parse()
                .map_err(|_| invalid(format!("row {row}: cannot parse `{s}`")))
        };
        let index: usize = record[0]
            .trim()
            .parse()
            .map_err(|_| invalid(format!("row {row}: bad index")))?;
        if index != row {
            return Err(invalid(format!("row {row}: expected index {row}, found {index}")));
        }
        points.push((1..=dim).map(|c| parse(&record[c])).collect::<Result<Vec<_>>>()?);
        values.push(parse(&record[dim + 1])?);
    }
    Ok((Domain::from_points(&points)?, values))
}

pub fn load_function_csv(path: &Path) -> Result<(Domain, Vec<f64>)> {
    read_function_csv(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Domain {
        make_grid(2, 11, &[0.0, 0.0], &[1.0, 1.0]).unwrap()
    }

    #[test]
    fn single_anchor_identity() {
        let k = KernelSpec::squared_exponential(0.3, 2).unwrap();
        let a = vec![0.42, 0.77];
        let f = SynthFunction::from_expansion(k, vec![a.clone()], vec![1.0], &grid()).unwrap();
        assert!((f.rkhs_norm() - 1.0).abs() < 1e-15);
        for (x, v) in grid().points().zip(f.values()) {
            assert_eq!(*v, k.eval(x, &a).unwrap());
        }
        // argmax is the grid point nearest the anchor
        let stats = function_stats(f.values());
        assert_eq!(grid().point(stats.argmax), &[0.4, 0.8]);
    }

    #[test]
    fn constant_surface_has_zero_range() {
        let s = function_stats(&[0.3, 0.3, 0.3]);
        assert_eq!((s.argmax, s.range), (0, 0.0));
    }

    #[test]
    fn ties_break_to_lowest_index() {
        assert_eq!(function_stats(&[0.0, 2.0, 1.0, 2.0]).argmax, 1);
    }

    #[test]
    fn generated_range_is_rescaled() {
        let k = KernelSpec::squared_exponential(0.3, 2).unwrap();
        for seed in 0..5 {
            let f = generate_function(k, &grid(), GenerateOptions::default(), seed).unwrap();
            let r = function_stats(f.values()).range;
            assert!((1.0 - 1e-12..=2.0 + 1e-12).contains(&r), "range {r}");
        }
    }

    #[test]
    fn csv_round_trip() {
        let k = KernelSpec::squared_exponential(0.5, 2).unwrap();
        let g = grid();
        let f = generate_function(k, &g, GenerateOptions::default(), 3).unwrap();
        let mut buf = Vec::new();
        write_function_csv(&mut buf, &g, f.values()).unwrap();
        let (d, v) = read_function_csv(buf.as_slice()).unwrap();
        assert_eq!(d.to_vecs(), g.to_vecs());
        assert_eq!(v, f.values());
    }

    #[test]
    fn bad_inputs() {
        let k = KernelSpec::squared_exponential(0.5, 2).unwrap();
        let opts = GenerateOptions {
            anchors: 0,
            ..Default::default()
        };
        assert!(generate_function(k, &grid(), opts, 0).is_err());
        let k1 = KernelSpec::squared_exponential(0.5, 1).unwrap();
        assert!(SynthFunction::from_expansion(k1, vec![vec![0.0]], vec![1.0], &grid()).is_err());
        assert!(read_function_csv("index,x0,value\n1,0.0,1.0\n".as_bytes()).is_err());
    }
}
