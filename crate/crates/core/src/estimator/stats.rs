//! Sample streams, batch standard errors and the 1/√M scaling fit.

use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const BATCHES: usize = 100;

/// Per-trajectory samples of the numerator and denominator estimators.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleStream {
    pub a_o: Vec<f64>,
    pub a_i: Vec<f64>,
    pub seed: u64,
}

#[derive(Serialize, Deserialize)]
struct Row {
    a_o: f64,
    a_i: f64,
}

const MAGIC: &[u8; 8] = b"NVDSMP01";

impl SampleStream {
    pub fn len(&self) -> usize {
        self.a_o.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a_o.is_empty()
    }

    /// The first `m` samples.
    pub fn prefix(&self, m: usize) -> Self {
        Self {
            a_o: self.a_o[..m].to_vec(),
            a_i: self.a_i[..m].to_vec(),
            seed: self.seed,
        }
    }

    /// `# seed=<seed>` comment line, then `a_o,a_i` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let io = |e: std::io::Error| Error::InvalidParameter(format!("writing samples: {e}"));
        writeln!(w, "# seed={}", self.seed).map_err(io)?;
        let mut out = csv::Writer::from_writer(w);
        for (&a_o, &a_i) in self.a_o.iter().zip(&self.a_i) {
            out.serialize(Row { a_o, a_i })
                .map_err(|e| Error::InvalidParameter(format!("writing samples: {e}")))?;
        }
        out.flush().map_err(io)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut text = String::new();
        let mut r = r;
        r.read_to_string(&mut text).map_err(|e| Error::Parse {
            line: 0,
            message: e.to_string(),
        })?;
        let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
        let seed = first
            .strip_prefix("# seed=")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: "expected `# seed=<integer>`".into(),
            })?;
        let mut s = SampleStream {
            seed,
            ..Self::default()
        };
        for (i, row) in csv::Reader::from_reader(rest.as_bytes())
            .deserialize::<Row>()
            .enumerate()
        {
            let row = row.map_err(|e| Error::Parse {
                line: i + 3,
                message: e.to_string(),
            })?;
            s.a_o.push(row.a_o);
            s.a_i.push(row.a_i);
        }
        Ok(s)
    }

    /// Magic, seed, count, then interleaved little-endian f64 pairs.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 16 * self.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.seed.to_le_bytes());
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for (a, b) in self.a_o.iter().zip(&self.a_i) {
            out.extend_from_slice(&a.to_le_bytes());
            out.extend_from_slice(&b.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| Error::InvalidParameter(format!("sample file: {m}"));
        if bytes.len() < 24 || &bytes[..8] != MAGIC {
            return Err(bad("missing header"));
        }
        let word = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
        let seed = word(8);
        let m = word(16) as usize;
        if bytes.len() != 24 + 16 * m {
            return Err(bad("length does not match the sample count"));
        }
        let mut s = SampleStream {
            seed,
            ..Self::default()
        };
        for k in 0..m {
            s.a_o.push(f64::from_bits(word(24 + 16 * k)));
            s.a_i.push(f64::from_bits(word(32 + 16 * k)));
        }
        Ok(s)
    }
}

/// Neumaier-compensated sum.
pub fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(xs: &[f64]) -> f64 {
    compensated_sum(xs.iter().copied()) / xs.len() as f64
}

/// Standard deviation (divisor 100) of the 100 batch ratios
/// `mean(A_O)/mean(A_I)`.
pub fn batch_standard_error(stream: &SampleStream) -> Result<f64> {
    let m = stream.len();
    if m == 0 || !m.is_multiple_of(BATCHES) || stream.a_i.len() != m {
        return Err(Error::InvalidSampleCount(m));
    }
    let size = m / BATCHES;
    let mut ratios = Vec::with_capacity(BATCHES);
    for b in 0..BATCHES {
        let range = b * size..(b + 1) * size;
        let den = mean(&stream.a_i[range.clone()]);
        if den == 0.0 {
            return Err(Error::ZeroDenominatorBatch(b));
        }
        ratios.push(mean(&stream.a_o[range]) / den);
    }
    // shifting by the first ratio makes identical ratios give exactly zero
    let shifted: Vec<f64> = ratios.iter().map(|r| r - ratios[0]).collect();
    let mu = mean(&shifted);
    let var = compensated_sum(shifted.iter().map(|d| (d - mu) * (d - mu))) / BATCHES as f64;
    Ok(var.sqrt())
}

/// Standard deviation of `batches` ratios of batch means, each batch drawn
/// with replacement as `size` samples of the stream. Seeded, so a stream
/// and a seed always give the same value.
pub fn resampled_batch_spread(
    stream: &SampleStream,
    size: usize,
    batches: usize,
    seed: u64,
) -> Result<f64> {
    let m = stream.len();
    if m == 0 || stream.a_i.len() != m {
        return Err(Error::InvalidSampleCount(m));
    }
    if size == 0 || batches < 2 {
        return Err(Error::InvalidParameter(format!(
            "resampling needs a positive batch size and at least 2 batches, got {size} and {batches}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(batches);
    for b in 0..batches {
        let (mut num, mut den) = (0.0, 0.0);
        for _ in 0..size {
            let j = rng.random_range(0..m);
            num += stream.a_o[j];
            den += stream.a_i[j];
        }
        if den == 0.0 {
            return Err(Error::ZeroDenominatorBatch(b));
        }
        ratios.push(num / den);
    }
    let mu = mean(&ratios);
    let var = compensated_sum(ratios.iter().map(|r| (r - mu) * (r - mu))) / batches as f64;
    Ok(var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
}

impl ScalingFit {
    /// `10^intercept`: the per-sample spread behind the batch errors.
    pub fn underlying_sd(&self) -> f64 {
        10f64.powf(self.intercept)
    }
}

/// Least-squares line through `(log10 M, log10 stdError)`. `M` is the
/// number of samples behind each error, whether a whole stream or one
/// resampled batch.
pub fn scaling_fit(points: &[(usize, f64)]) -> Result<ScalingFit> {
    let too_few = || Error::TooFewPoints {
        needed: 4,
        got: points.len(),
    };
    if points.len() < 4 {
        return Err(too_few());
    }
    let lo = points.iter().map(|p| p.0).min().expect("non-empty") as f64;
    let hi = points.iter().map(|p| p.0).max().expect("non-empty") as f64;
    if lo <= 0.0 || hi / lo < 10.0 {
        return Err(too_few());
    }
    if let Some(&(_, e)) = points.iter().find(|p| !(p.1 > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "standard error {e} is not positive"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let (mx, my) = (mean(&xs), mean(&ys));
    let sxy = compensated_sum(xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)));
    let sxx = compensated_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    let slope = sxy / sxx;
    Ok(ScalingFit {
        slope,
        intercept: my - slope * mx,
    })
}
