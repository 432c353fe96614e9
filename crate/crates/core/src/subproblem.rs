//! Binarisation of the rectangular trust-region sub-problem into a QUBO.
//!
//! Inside the box `|x - x0| <= r` each coordinate is restricted to the grid
//! `x0 - r + delta * n` with `n in {0, ..., N}`, `N = 2^M - 1` and
//! `delta = 2r / N`. Writing `n_k = sum_m 2^m z_{m,k}` and stacking the bits
//! column-wise (`z[m*K + k]` is bit `m` of coordinate `k`, least significant
//! bit first) gives `x - x0 = -r + A z` with `A = b' (x) diag(delta)`.
//! Substituting into the quadratic model yields
//!
//! ```text
//! Q  = 1/2 A'H0A + diag(A'(g0 - H0 r))
//! c0 = -g0'r + 1/2 r'H0 r
//! ```
//!
//! so that `z'Qz + c0` is exactly the model change `m(x(z)) - f0`.
//! `A'H0A = (b b') (x) (D H0 D)` with `D = diag(delta)`; since `b_m b_m'` only
//! takes `2M - 1` distinct values, the blocks are filled from that many scaled
//! copies of `D H0 D`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{check_dim, Error, Result};
use crate::linalg::max_eigenvalue;
use crate::model::{Point, QuadraticModel};

/// Largest supported bits per dimension.
pub const MAX_BITS_PER_DIM: usize = 30;

/// Symmetric hyper-rectangular trust region `|x_k - center_k| <= half_width_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustBox {
    pub center: Point,
    pub half_width: DVector<f64>,
}

impl TrustBox {
    pub fn new(center: Point, half_width: DVector<f64>) -> Result<Self> {
        check_dim(center.len(), half_width.len())?;
        if half_width.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidArgument("trust box half-widths must be positive and finite".into()));
        }
        Ok(Self { center, half_width })
    }

    pub fn dimension(&self) -> usize {
        self.center.len()
    }
}

/// Grid description for `M` bits per dimension over a box of half-widths `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Binarisation {
    pub bits_per_dim: usize,
    /// `N = 2^M - 1`, the largest per-coordinate integer.
    pub levels: u64,
    /// `[1, 2, ..., 2^(M-1)]`.
    pub basis: Vec<f64>,
    /// `delta = 2r / N`.
    pub resolution: DVector<f64>,
}

impl Binarisation {
    pub fn new(bits_per_dim: usize, half_width: &DVector<f64>) -> Result<Self> {
        if bits_per_dim == 0 || bits_per_dim > MAX_BITS_PER_DIM {
            return Err(Error::InvalidArgument(format!(
                "bits per dimension must be in 1..={MAX_BITS_PER_DIM}, got {bits_per_dim}"
            )));
        }
        if half_width.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidArgument("half-widths must be positive and finite".into()));
        }
        let levels = (1u64 << bits_per_dim) - 1;
        let basis = (0..bits_per_dim).map(|m| (1u64 << m) as f64).collect();
        let resolution = half_width * (2.0 / levels as f64);
        Ok(Self { bits_per_dim, levels, basis, resolution })
    }

    pub fn dimension(&self) -> usize {
        self.resolution.len()
    }

    /// Total number of binary variables `K * M`.
    pub fn num_bits(&self) -> usize {
        self.dimension() * self.bits_per_dim
    }

    /// Per-coordinate integers `n = Z b` for a bit vector in vec order.
    pub fn integers(&self, z: &[bool]) -> Result<Vec<u64>> {
        check_dim(self.num_bits(), z.len())?;
        let k = self.dimension();
        let mut n = vec![0u64; k];
        for (idx, _) in z.iter().enumerate().filter(|(_, &bit)| bit) {
            n[idx % k] |= 1 << (idx / k);
        }
        Ok(n)
    }
}

/// Grid metadata linking a QUBO back to the continuous sub-problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding {
    pub binarisation: Binarisation,
    pub trust_box: TrustBox,
}

/// Dense symmetric QUBO `min z'Qz` plus the constant `c0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Qubo {
    coefficients: DMatrix<f64>,
    offset: f64,
    encoding: Option<Encoding>,
}

impl Qubo {
    /// A bare QUBO from a (not necessarily symmetric) coefficient matrix.
    ///
    /// The matrix is symmetrised; `z'Qz` is unchanged by that.
    pub fn from_matrix(q: DMatrix<f64>, offset: f64) -> Result<Self> {
        if q.nrows() != q.ncols() || q.nrows() == 0 {
            return Err(Error::InvalidArgument("QUBO matrix must be square and non-empty".into()));
        }
        if q.iter().any(|v| !v.is_finite()) || !offset.is_finite() {
            return Err(Error::NonFinite("QUBO coefficients"));
        }
        let coefficients = (&q + q.transpose()) * 0.5;
        Ok(Self { coefficients, offset, encoding: None })
    }

    pub fn size(&self) -> usize {
        self.coefficients.nrows()
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coefficients
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn encoding(&self) -> Option<&Encoding> {
        self.encoding.as_ref()
    }

    /// Symmetric coefficient column `j`, which is also row `j`.
    pub(crate) fn row(&self, j: usize) -> &[f64] {
        let n = self.size();
        &self.coefficients.as_slice()[j * n..(j + 1) * n]
    }

    /// Writes the triplet text format.
    ///
    /// The first line is `KM offset`; each following line is `row col value`
    /// with `row <= col` and `value` the coefficient of `z_row z_col` in the
    /// energy (off-diagonal entries are therefore `2 Q_ij`). Zero entries are
    /// omitted.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> Result<()> {
        let n = self.size();
        let mut buf = String::new();
        writeln!(buf, "{} {:e}", n, self.offset).expect("string write");
        for i in 0..n {
            for j in i..n {
                let v = if i == j { self.coefficients[(i, i)] } else { 2.0 * self.coefficients[(i, j)] };
                if v != 0.0 {
                    writeln!(buf, "{i} {j} {v:e}").expect("string write");
                }
            }
        }
        out.write_all(buf.as_bytes())?;
        Ok(())
    }

    /// Reads the format produced by [`Qubo::write_triplets`].
    ///
    /// Repeated pairs accumulate; `(i, j)` and `(j, i)` refer to the same
    /// coupling.
    pub fn read_triplets<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().filter(|l| !matches!(l, Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('#')));
        let header = lines.next().ok_or_else(|| Error::Format("empty QUBO file".into()))??;
        let mut fields = header.split_whitespace();
        let n: usize = parse_field(fields.next(), "size")?;
        let offset: f64 = parse_field(fields.next(), "offset")?;
        if n == 0 {
            return Err(Error::Format("QUBO size must be positive".into()));
        }
        let mut q = DMatrix::zeros(n, n);
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let mut f = line.split_whitespace();
            let i: usize = parse_field(f.next(), "row")?;
            let j: usize = parse_field(f.next(), "col")?;
            let v: f64 = parse_field(f.next(), "value")?;
            if i >= n || j >= n {
                return Err(Error::Format(format!("entry {} out of range: ({i}, {j}) for size {n}", lineno + 2)));
            }
            if i == j {
                q[(i, i)] += v;
            } else {
                q[(i, j)] += 0.5 * v;
                q[(j, i)] += 0.5 * v;
            }
        }
        Self::from_matrix(q, offset)
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, what: &str) -> Result<T> {
    field
        .ok_or_else(|| Error::Format(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::Format(format!("malformed {what}")))
}

/// `1/2 A'H A` assembled block-wise from the distinct products `b_m b_m'`.
pub fn coupling_matrix(hess: &DMatrix<f64>, bin: &Binarisation) -> Result<DMatrix<f64>> {
    let k = bin.dimension();
    check_dim(k, hess.nrows())?;
    check_dim(k, hess.ncols())?;
    let m = bin.bits_per_dim;
    let n = k * m;
    let delta = &bin.resolution;
    // D H D, scaled by 1/2 b_m b_m' = 2^(m + m' - 1)
    let dhd = DMatrix::from_fn(k, k, |i, j| delta[i] * delta[j] * hess[(i, j)]);
    let scaled: Vec<DMatrix<f64>> = (0..2 * m - 1).map(|s| &dhd * (0.5 * (1u64 << s) as f64)).collect();

    let mut q = DMatrix::<f64>::zeros(n, n);
    q.as_mut_slice().par_chunks_mut(n).enumerate().for_each(|(col, column)| {
        let (mb, j) = (col / k, col % k);
        for ma in 0..m {
            let src = scaled[ma + mb].column(j);
            column[ma * k..(ma + 1) * k].copy_from_slice(src.as_slice());
        }
    });
    Ok(q)
}

/// Builds the QUBO for the model `m` restricted to the grid over `trust_box`.
pub fn build_qubo(m: &QuadraticModel, trust_box: &TrustBox, bits_per_dim: usize) -> Result<Qubo> {
    let k = m.dimension();
    check_dim(k, trust_box.dimension())?;
    let r = &trust_box.half_width;
    let bin = Binarisation::new(bits_per_dim, r)?;
    let h = m.hess();
    let g = m.grad();

    let hr = h * r;
    let linear = g - &hr;
    let mut q = coupling_matrix(h, &bin)?;
    for (mi, &bm) in bin.basis.iter().enumerate() {
        for i in 0..k {
            q[(mi * k + i, mi * k + i)] += bm * bin.resolution[i] * linear[i];
        }
    }
    let offset = -g.dot(r) + 0.5 * r.dot(&hr);
    if q.iter().any(|v| !v.is_finite()) || !offset.is_finite() {
        return Err(Error::NonFinite("QUBO coefficients"));
    }
    Ok(Qubo {
        coefficients: q,
        offset,
        encoding: Some(Encoding { binarisation: bin, trust_box: trust_box.clone() }),
    })
}

/// Maps a bit vector to the step `p = -r + A z` it encodes.
///
/// Evaluated as `r o (2n/N - 1)`, which keeps `|p_k| <= r_k` exact in floating
/// point and puts `n = N` precisely on the upper face.
pub fn decode_step(q: &Qubo, z: &[bool]) -> Result<DVector<f64>> {
    let enc = q
        .encoding
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("QUBO carries no grid encoding".into()))?;
    let n = enc.binarisation.integers(z)?;
    let levels = enc.binarisation.levels as f64;
    let r = &enc.trust_box.half_width;
    Ok(DVector::from_fn(r.len(), |i, _| r[i] * (2.0 * n[i] as f64 / levels - 1.0)))
}

/// `z'Qz`.
pub fn qubo_energy(q: &Qubo, z: &[bool]) -> Result<f64> {
    check_dim(q.size(), z.len())?;
    let ones: Vec<usize> = z.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
    let mut e = 0.0;
    for &j in &ones {
        let col = q.row(j);
        e += ones.iter().map(|&i| col[i]).sum::<f64>();
    }
    Ok(e)
}

/// Grid spacing at which the discretisation bound equals `delta_f`:
/// `sqrt(8 delta_f / lambda)`, or `+inf` when `lambda <= 0`.
pub fn grid_resolution_for(delta_f: f64, lambda_max: f64) -> Result<f64> {
    if !(delta_f > 0.0) {
        return Err(Error::InvalidArgument(format!("cost resolution must be positive, got {delta_f}")));
    }
    let lambda = lambda_max.max(0.0);
    if lambda == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok((8.0 * delta_f / lambda).sqrt())
    }
}

/// Upper bound `1/8 max(lambda_max(H0), 0) delta'delta` on how far the grid
/// minimum of the model can sit above its continuous minimum.
pub fn discretisation_bound(m: &QuadraticModel, bin: &Binarisation) -> Result<f64> {
    check_dim(m.dimension(), bin.dimension())?;
    let lambda = max_eigenvalue(m.hess())?.max(0.0);
    Ok(0.125 * lambda * bin.resolution.norm_squared())
}
