//! Catalecticant flattenings and the singular-value gap heuristic used to
//! pick an approximating rank.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{svd, ComplexMatrix};
use crate::monomial::graded_lex;
use crate::tensor::{DenseTensor, MultiIndexIter, SymTensor};

pub const DEFAULT_GAP_FACTOR: f64 = 100.0;
pub const DEFAULT_FLOOR: f64 = 1e-10;

/// Square-ish symmetric flattening `(F_{alpha+beta})` with rows of degree at
/// most `floor(m/2)` and columns of degree at most `ceil(m/2)`.
pub fn catalecticant_sym(f: &SymTensor) -> Result<ComplexMatrix> {
    let m = f.order();
    if m < 2 {
        return Err(Error::InvalidArgument(format!("catalecticant of order {m}")));
    }
    let rows = graded_lex(f.nvars(), m / 2);
    let cols = graded_lex(f.nvars(), m - m / 2);
    let mut out = ComplexMatrix::zeros(rows.len(), cols.len());
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in cols.iter().enumerate() {
            out[(i, j)] = f.get_sum(a, b)?;
        }
    }
    Ok(out)
}

/// Bipartition of the modes of a tensor into row and column modes (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl Split {
    pub fn new(mut rows: Vec<usize>, mut cols: Vec<usize>, order: usize) -> Result<Self> {
        rows.sort_unstable();
        cols.sort_unstable();
        let mut all: Vec<usize> = rows.iter().chain(&cols).copied().collect();
        all.sort_unstable();
        if rows.is_empty() || cols.is_empty() || all != (0..order).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument(format!("{rows:?} | {cols:?} is not a bipartition of {order} modes")));
        }
        Ok(Split { rows, cols })
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn cols(&self) -> &[usize] {
        &self.cols
    }

    /// The most square flattening: minimizes `|prod rows - prod cols|`, with
    /// the first mode always on the row side and ties going to the
    /// lexicographically smallest row set.
    pub fn most_square(dims: &[usize]) -> Result<Self> {
        let m = dims.len();
        if m < 2 {
            return Err(Error::InvalidArgument(format!("flattening of order {m}")));
        }
        let total: usize = dims.iter().product();
        let mut best: Option<(usize, Vec<usize>)> = None;
        // Subsets of modes 1..m, with mode 0 always included in the rows.
        for mask in 0u64..(1u64 << (m - 1)) - 1 {
            let rows: Vec<usize> = core::iter::once(0).chain((1..m).filter(|t| mask >> (t - 1) & 1 == 1)).collect();
            let p: usize = rows.iter().map(|&t| dims[t]).product();
            let gap = p.abs_diff(total / p);
            let better = match &best {
                None => true,
                Some((g, r)) => gap < *g || (gap == *g && rows < *r),
            };
            if better {
                best = Some((gap, rows));
            }
        }
        let (_, rows) = best.expect("at least one bipartition");
        let cols = (0..m).filter(|t| !rows.contains(t)).collect();
        Split::new(rows, cols, m)
    }
}

impl fmt::Display for Split {
    /// 1-based, e.g. `1,3|2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[usize]| v.iter().map(|t| format!("{}", t + 1)).collect::<Vec<_>>().join(",");
        write!(f, "{}|{}", join(&self.rows), join(&self.cols))
    }
}

impl FromStr for Split {
    type Err = Error;

    /// Parses the 1-based form `a,b|c`; the order is inferred from the modes.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("split `{s}` is not of the form a,b|c"));
        let (lhs, rhs) = s.split_once('|').ok_or_else(bad)?;
        let parse = |side: &str| -> Result<Vec<usize>> {
            side.split(',')
                .map(|t| match t.trim().parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(bad()),
                })
                .collect()
        };
        let rows = parse(lhs)?;
        let cols = parse(rhs)?;
        let order = rows.len() + cols.len();
        Split::new(rows, cols, order)
    }
}

/// Flattening of a dense tensor with rows over the modes of `split.rows()`
/// (row-major within them) and columns over the rest.
pub fn catalecticant_ns(f: &DenseTensor, split: Option<&Split>) -> Result<ComplexMatrix> {
    let dims = f.dims();
    let owned;
    let split = match split {
        Some(s) => {
            if s.rows.len() + s.cols.len() != dims.len() {
                return Err(Error::InvalidArgument(format!("split {s} for a tensor of order {}", dims.len())));
            }
            s
        }
        None => {
            owned = Split::most_square(dims)?;
            &owned
        }
    };
    let row_dims: Vec<usize> = split.rows.iter().map(|&t| dims[t]).collect();
    let col_dims: Vec<usize> = split.cols.iter().map(|&t| dims[t]).collect();
    let nrows: usize = row_dims.iter().product();
    let ncols: usize = col_dims.iter().product();
    let mut out = ComplexMatrix::zeros(nrows, ncols);
    let mut idx = alloc::vec![0; dims.len()];
    for (i, ri) in MultiIndexIter::new(&row_dims).enumerate() {
        for (&t, &v) in split.rows.iter().zip(&ri) {
            idx[t] = v;
        }
        for (j, ci) in MultiIndexIter::new(&col_dims).enumerate() {
            for (&t, &v) in split.cols.iter().zip(&ci) {
                idx[t] = v;
            }
            out[(i, j)] = f.get(&idx);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub singular_values: Vec<f64>,
    /// `None` when the spectrum shows no gap.
    pub suggested_rank: Option<usize>,
    /// `eta_i / eta_{i+1}`; infinite after an exact zero, 1 between zeros.
    pub gap_ratios: Vec<f64>,
    /// Shape of the flattening the values came from, when known.
    pub shape: Option<(usize, usize)>,
}

impl SpectrumReport {
    pub fn describe(&self) -> String {
        match self.suggested_rank {
            Some(r) => format!("suggested rank {r}"),
            None => String::from("no singular-value gap; rank undefined"),
        }
    }
}

/// Smallest `r` with `eta_{r+1} <= floor * eta_1` or `eta_r / eta_{r+1} >= gap_factor`.
pub fn estimate_rank(eta: &[f64], gap_factor: f64, floor: f64) -> Result<SpectrumReport> {
    if eta.is_empty() {
        return Err(Error::InvalidArgument(String::from("empty spectrum")));
    }
    if gap_factor.is_nan() || gap_factor <= 1.0 || floor.is_nan() || floor < 0.0 {
        return Err(Error::InvalidArgument(format!("gap factor {gap_factor}, floor {floor}")));
    }
    if eta.iter().any(|&e| e.is_nan() || e < 0.0) || eta.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument(format!("spectrum {eta:?} is not nonincreasing and nonnegative")));
    }
    let gap_ratios: Vec<f64> = eta
        .windows(2)
        .map(|w| match (w[0] > 0.0, w[1] > 0.0) {
            (_, true) => w[0] / w[1],
            (true, false) => f64::INFINITY,
            (false, false) => 1.0,
        })
        .collect();
    let suggested_rank = if eta[0] == 0.0 {
        None
    } else if eta.len() == 1 {
        Some(1)
    } else {
        (1..eta.len()).find(|&r| eta[r] <= floor * eta[0] || gap_ratios[r - 1] >= gap_factor)
    };
    Ok(SpectrumReport { singular_values: eta.to_vec(), suggested_rank, gap_ratios, shape: None })
}

/// Singular values of `flattening` fed through [`estimate_rank`].
pub fn spectrum(flattening: &ComplexMatrix, gap_factor: f64, floor: f64) -> Result<SpectrumReport> {
    let s = svd(flattening)?.s;
    let mut report = estimate_rank(&s, gap_factor, floor)?;
    report.shape = Some((flattening.rows(), flattening.cols()));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    #[test]
    fn hankel_for_binary_quadric() {
        let f = SymTensor::from_entries(2, 2, alloc::vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(3.0, 0.0)])
            .unwrap();
        let c = catalecticant_sym(&f).unwrap();
        assert_eq!(c.data(), &[1.0, 2.0, 2.0, 3.0].map(|x| C64::new(x, 0.0)));
    }

    #[test]
    fn most_square_split() {
        let s = Split::most_square(&[7, 6, 5]).unwrap();
        assert_eq!((s.rows(), s.cols()), (&[0][..], &[1, 2][..]));
        let s = Split::most_square(&[4, 4, 4, 4]).unwrap();
        assert_eq!(s.to_string(), "1,2|3,4");
        let s = Split::most_square(&[8, 7, 6, 5]).unwrap();
        // 8*5 = 40 vs 42 beats 8*7 = 56 vs 30.
        assert_eq!(s.to_string(), "1,4|2,3");
    }

    #[test]
    fn split_parsing() {
        let s: Split = "1,3|2".parse().unwrap();
        assert_eq!((s.rows(), s.cols()), (&[0, 2][..], &[1][..]));
        assert!("1,2|2".parse::<Split>().is_err());
        assert!("1,2".parse::<Split>().is_err());
        assert!("0|1".parse::<Split>().is_err());
    }

    #[test]
    fn flattening_layout() {
        let f = DenseTensor::from_fn(&[2, 3, 2], |i| C64::new((i[0] * 100 + i[1] * 10 + i[2]) as f64, 0.0)).unwrap();
        let s: Split = "1,3|2".parse().unwrap();
        let c = catalecticant_ns(&f, Some(&s)).unwrap();
        assert_eq!((c.rows(), c.cols()), (4, 3));
        // row (i1, i3) = (1, 0), column i2 = 2
        assert_eq!(c[(2, 2)], C64::new(120.0, 0.0));
    }

    #[test]
    fn gap_rules() {
        let r = estimate_rank(&[5.7857, 5.4357, 7e-16], DEFAULT_GAP_FACTOR, DEFAULT_FLOOR).unwrap();
        assert_eq!(r.suggested_rank, Some(2));
        let r = estimate_rank(&[1.0, 0.0, 0.0], DEFAULT_GAP_FACTOR, DEFAULT_FLOOR).unwrap();
        assert_eq!(r.suggested_rank, Some(1));
        assert_eq!(r.gap_ratios, alloc::vec![f64::INFINITY, 1.0]);
        let r = estimate_rank(&[1.0, 0.9, 0.8], DEFAULT_GAP_FACTOR, DEFAULT_FLOOR).unwrap();
        assert_eq!(r.suggested_rank, None);
        assert!(estimate_rank(&[], 100.0, 0.0).is_err());
        assert!(estimate_rank(&[1.0, 2.0], 100.0, 0.0).is_err());
    }
}
