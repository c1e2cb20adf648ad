//! Labeled covariate data, synthetic samplers for the nominal and
//! point-mass-contaminated distributions, and CSV import/export.

use std::io::{BufRead, BufReader, Read, Write};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::asymptotics::TrueParameter;
use crate::error::{Error, Result};
use crate::losses::sigmoid;
use crate::quadrature::{CoordinateMeasure, CovariateMeasure};
use crate::rng::substream;

// Stream tags keep row draws and contamination coins on separate paths, so a
// zero contamination rate reproduces the nominal sampler bit for bit.
const ROW_STREAM: u64 = 0x01;
const COIN_STREAM: u64 = 0x02;

/// Rows of `(x, y)` with 1-based labels in `1..=k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    xs: Vec<f64>, // row-major n x d
    ys: Vec<usize>,
    d: usize,
    k: usize,
}

impl Dataset {
    pub fn new(xs: Vec<f64>, ys: Vec<usize>, d: usize, k: usize) -> Result<Self> {
        if d == 0 || k < 2 {
            return Err(Error::InvalidParameter(format!(
                "need d >= 1 and k >= 2, got d = {d}, k = {k}"
            )));
        }
        if xs.len() != ys.len() * d {
            return Err(Error::DimensionMismatch {
                expected: ys.len() * d,
                got: xs.len(),
            });
        }
        if let Some(&bad) = xs.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "covariates must be finite, got {bad}"
            )));
        }
        if let Some(&bad) = ys.iter().find(|&&y| y == 0 || y > k) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} outside 1..={k}"
            )));
        }
        Ok(Self { xs, ys, d, k })
    }

    pub fn len(&self) -> usize {
        self.ys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ys.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn class_count(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.xs[i * self.d..(i + 1) * self.d]
    }

    pub fn label(&self, i: usize) -> usize {
        self.ys[i]
    }

    /// Sign encoding `+1/-1` of a binary label (`1 → +1`, `2 → -1`).
    pub fn sign_label(&self, i: usize) -> f64 {
        if self.ys[i] == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// Writes `x1,...,xd,y` rows; floats in shortest round-trip decimal,
    /// labels 1-based.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = (1..=self.d).map(|i| format!("x{i}")).collect();
        writeln!(out, "{},y", header.join(","))?;
        for i in 0..self.len() {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{},{}", row.join(","), self.ys[i])?;
        }
        Ok(())
    }

    /// Reads the format written by [`Dataset::write_csv`]. The class count is
    /// the largest label seen, floored at 2.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let reader = BufReader::new(input);
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(Error::CsvParse {
            line: 1,
            message: "empty input".into(),
        })?;
        let header = header?;
        let cols: Vec<&str> = header.trim().split(',').collect();
        if cols.len() < 2 || cols[cols.len() - 1] != "y" {
            return Err(Error::CsvParse {
                line: 1,
                message: format!("expected header x1,...,xd,y, got {header}"),
            });
        }
        let d = cols.len() - 1;
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != d + 1 {
                return Err(Error::CsvParse {
                    line: idx + 1,
                    message: format!("expected {} fields, got {}", d + 1, fields.len()),
                });
            }
            for f in &fields[..d] {
                xs.push(f.parse::<f64>().map_err(|e| Error::CsvParse {
                    line: idx + 1,
                    message: e.to_string(),
                })?);
            }
            ys.push(fields[d].parse::<usize>().map_err(|e| Error::CsvParse {
                line: idx + 1,
                message: e.to_string(),
            })?);
        }
        let k = ys.iter().copied().max().unwrap_or(2).max(2);
        Self::new(xs, ys, d, k)
    }
}

/// Point-mass contamination: each row is replaced by `(x_c, y_c)` with
/// probability `epsilon`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContaminationSpec {
    epsilon: f64,
    x_c: Vec<f64>,
    y_c: usize,
}

impl ContaminationSpec {
    pub fn new(epsilon: f64, x_c: Vec<f64>, y_c: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "contamination rate must be in [0, 1), got {epsilon}"
            )));
        }
        if x_c.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "contamination point must be finite".into(),
            ));
        }
        if y_c == 0 {
            return Err(Error::InvalidParameter("labels are 1-based".into()));
        }
        Ok(Self { epsilon, x_c, y_c })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn point(&self) -> (&[f64], usize) {
        (&self.x_c, self.y_c)
    }
}

fn draw_row(
    beta: &TrueParameter,
    measure: &CovariateMeasure,
    rng: &mut impl Rng,
    x: &mut [f64],
) -> usize {
    for (xi, coord) in x.iter_mut().zip(measure.coords()) {
        *xi = match coord {
            CoordinateMeasure::PointMass(v) => *v,
            CoordinateMeasure::StandardNormal => rng.sample(StandardNormal),
        };
    }
    let v: f64 = beta
        .components()
        .iter()
        .zip(x.iter())
        .map(|(b, xi)| b * xi)
        .sum();
    let u: f64 = rng.gen();
    if u < sigmoid(v) {
        1
    } else {
        2
    }
}

/// Binary sample from the linear-logit model over the product measure.
/// Deterministic given the seed; row `i` has its own stream.
pub fn sample_nominal(
    beta: &TrueParameter,
    measure: &CovariateMeasure,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    if beta.dim() != measure.dim() {
        return Err(Error::DimensionMismatch {
            expected: measure.dim(),
            got: beta.dim(),
        });
    }
    let d = measure.dim();
    let mut xs = vec![0.0; n * d];
    let mut ys = vec![0usize; n];
    for i in 0..n {
        let mut rng = substream(seed, &[ROW_STREAM, i as u64]);
        ys[i] = draw_row(beta, measure, &mut rng, &mut xs[i * d..(i + 1) * d]);
    }
    Dataset::new(xs, ys, d, 2)
}

/// Mixture of the nominal sampler and a fixed contamination point. With a
/// zero rate this reproduces [`sample_nominal`] exactly for the same seed.
pub fn sample_contaminated(
    beta: &TrueParameter,
    measure: &CovariateMeasure,
    spec: &ContaminationSpec,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    if beta.dim() != measure.dim() {
        return Err(Error::DimensionMismatch {
            expected: measure.dim(),
            got: beta.dim(),
        });
    }
    let (x_c, y_c) = spec.point();
    if x_c.len() != measure.dim() {
        return Err(Error::DimensionMismatch {
            expected: measure.dim(),
            got: x_c.len(),
        });
    }
    let d = measure.dim();
    let mut xs = vec![0.0; n * d];
    let mut ys = vec![0usize; n];
    for i in 0..n {
        let coin: f64 = substream(seed, &[COIN_STREAM, i as u64]).gen();
        if coin < spec.epsilon() {
            xs[i * d..(i + 1) * d].copy_from_slice(x_c);
            ys[i] = y_c;
        } else {
            let mut rng = substream(seed, &[ROW_STREAM, i as u64]);
            ys[i] = draw_row(beta, measure, &mut rng, &mut xs[i * d..(i + 1) * d]);
        }
    }
    Dataset::new(xs, ys, d, 2)
}

const MEANS_STREAM: u64 = 0x03;

/// Class centers for the synthetic multiclass task: random directions scaled
/// to a common radius. Shared centers plus fresh rows give matched train and
/// test sets.
pub fn gaussian_cluster_means(k: usize, d: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = substream(seed, &[MEANS_STREAM]);
    (0..k)
        .map(|_| {
            let raw: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            raw.into_iter().map(|v| v * radius / norm).collect()
        })
        .collect()
}

/// Draws `n` rows with uniform class labels and isotropic Gaussian spread
/// around the given centers. Row `i` has its own stream.
pub fn sample_gaussian_clusters(
    means: &[Vec<f64>],
    sd: f64,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    let k = means.len();
    if k < 2 {
        return Err(Error::InvalidParameter("need at least 2 classes".into()));
    }
    let d = means[0].len();
    if means.iter().any(|m| m.len() != d) {
        return Err(Error::InvalidParameter("ragged cluster centers".into()));
    }
    if !(sd.is_finite() && sd > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cluster spread must be positive, got {sd}"
        )));
    }
    let mut xs = vec![0.0; n * d];
    let mut ys = vec![0usize; n];
    for i in 0..n {
        let mut rng = substream(seed, &[ROW_STREAM, i as u64]);
        let y = rng.gen_range(0..k);
        ys[i] = y + 1;
        for (j, xi) in xs[i * d..(i + 1) * d].iter_mut().enumerate() {
            *xi = means[y][j] + sd * rng.sample::<f64, _>(StandardNormal);
        }
    }
    Dataset::new(xs, ys, d, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beta(v: &[f64]) -> TrueParameter {
        TrueParameter::new(v.to_vec()).unwrap()
    }

    #[test]
    fn balanced_when_signal_is_zero() {
        let data = sample_nominal(
            &beta(&[0.0, 0.0]),
            &CovariateMeasure::intercept_normal(),
            100_000,
            11,
        )
        .unwrap();
        let pos = (0..data.len()).filter(|&i| data.label(i) == 1).count();
        let rate = pos as f64 / data.len() as f64;
        // 3 sigma binomial band around 1/2
        assert!((rate - 0.5).abs() < 3.0 * 0.5 / (data.len() as f64).sqrt());
    }

    #[test]
    fn labels_track_signal_coordinate() {
        let data = sample_nominal(
            &beta(&[0.0, 4.0]),
            &CovariateMeasure::intercept_normal(),
            100_000,
            12,
        )
        .unwrap();
        let mean: f64 = (0..data.len())
            .map(|i| data.sign_label(i) * data.row(i)[1])
            .sum::<f64>()
            / data.len() as f64;
        assert!(mean > 0.1, "E[y x2] = {mean}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = CovariateMeasure::intercept_normal();
        let a = sample_nominal(&beta(&[1.0, 2.0]), &m, 500, 99).unwrap();
        let b = sample_nominal(&beta(&[1.0, 2.0]), &m, 500, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_contamination_matches_nominal() {
        let m = CovariateMeasure::intercept_normal();
        let b2 = beta(&[1.0, 2.0]);
        let spec = ContaminationSpec::new(0.0, vec![1.0, 10.0], 2).unwrap();
        let nominal = sample_nominal(&b2, &m, 1000, 4).unwrap();
        let contaminated = sample_contaminated(&b2, &m, &spec, 1000, 4).unwrap();
        assert_eq!(nominal, contaminated);
    }

    #[test]
    fn full_contamination_rejected() {
        assert!(ContaminationSpec::new(1.0, vec![1.0, 0.0], 2).is_err());
        assert!(ContaminationSpec::new(0.05, vec![f64::NAN], 2).is_err());
    }

    #[test]
    fn contamination_count_is_binomial() {
        let m = CovariateMeasure::intercept_normal();
        let b2 = beta(&[1.0, 2.0]);
        let spec = ContaminationSpec::new(0.05, vec![1.0, 10.0], 2).unwrap();
        let n = 100_000;
        let data = sample_contaminated(&b2, &m, &spec, n, 21).unwrap();
        let hits = (0..n)
            .filter(|&i| data.row(i) == [1.0, 10.0] && data.label(i) == 2)
            .count() as f64;
        let mean = 0.05 * n as f64;
        let sd = (n as f64 * 0.05 * 0.95).sqrt();
        assert!((hits - mean).abs() < 3.0 * sd, "hits = {hits}");
    }

    #[test]
    fn csv_round_trip() {
        let data = sample_nominal(
            &beta(&[0.4, -1.7]),
            &CovariateMeasure::intercept_normal(),
            50,
            3,
        )
        .unwrap();
        let mut buf = Vec::new();
        data.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2,y\n"));
        let back = Dataset::read_csv(&buf[..]).unwrap();
        assert_eq!(data, back);
    }

    #[test]
    fn csv_rejects_malformed_rows() {
        let bad = "x1,x2,y\n1.0,2.0\n";
        assert!(matches!(
            Dataset::read_csv(bad.as_bytes()),
            Err(Error::CsvParse { line: 2, .. })
        ));
    }

    #[test]
    fn cluster_centers_have_requested_radius() {
        let means = gaussian_cluster_means(5, 8, 3.2, 7);
        assert_eq!(means.len(), 5);
        for m in &means {
            let norm = m.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 3.2).abs() < 1e-12);
        }
    }

    #[test]
    fn cluster_sample_labels_cover_classes() {
        let means = gaussian_cluster_means(4, 6, 3.0, 8);
        let data = sample_gaussian_clusters(&means, 1.0, 2000, 9).unwrap();
        assert_eq!(data.class_count(), 4);
        let mut counts = [0usize; 4];
        for i in 0..data.len() {
            counts[data.label(i) - 1] += 1;
        }
        for c in counts {
            // uniform labels, loose 5-sigma band
            assert!((c as f64 - 500.0).abs() < 5.0 * (2000.0f64 * 0.25 * 0.75).sqrt());
        }
    }
}
