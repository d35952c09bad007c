//! Plain-text tensor files.
//!
//! ```text
//! TENSOR v1 dense order=3 dims=2,3,2
//! 1 1 1 1.5e0 0e0
//! 2 3 1 -2e-1 1e0
//! ```
//!
//! Dense entry lines carry 1-based indices; symmetric ones carry the
//! exponents `alpha_1 .. alpha_{n-1}` of the stored power vector. Lines may
//! come in any order, missing entries are zero and repeated ones are an error.
//! Blank lines and lines starting with `#` are ignored.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use gentensor_core::{DenseTensor, PowerVector, SymTensor, C64};

use crate::error::{CliError, Result};
use crate::tensor::Tensor;

pub fn to_text(t: &Tensor) -> String {
    let dims = t.dims();
    let dims_s: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
    let mut out = format!("TENSOR v1 {} order={} dims={}\n", t.kind(), dims.len(), dims_s.join(","));
    match t {
        Tensor::Sym(s) => {
            for (alpha, z) in s.powers().iter().zip(s.entries()) {
                if *z == C64::new(0.0, 0.0) {
                    continue;
                }
                for e in alpha.exponents() {
                    let _ = write!(out, "{e} ");
                }
                let _ = writeln!(out, "{:e} {:e}", z.re, z.im);
            }
        }
        Tensor::Dense(d) => {
            for (idx, z) in gentensor_core::tensor::MultiIndexIter::new(d.dims()).zip(d.data()) {
                if *z == C64::new(0.0, 0.0) {
                    continue;
                }
                for i in idx {
                    let _ = write!(out, "{} ", i + 1);
                }
                let _ = writeln!(out, "{:e} {:e}", z.re, z.im);
            }
        }
    }
    out
}

fn parse_header(line: &str) -> Result<(bool, usize, Vec<usize>)> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    if toks.len() != 5 || toks[0] != "TENSOR" {
        return Err(CliError::parse(1, "expected `TENSOR v1 <sym|dense> order=<m> dims=<n1,..>`"));
    }
    if toks[1] != "v1" {
        return Err(CliError::parse(1, format!("unsupported version {}", toks[1])));
    }
    let sym = match toks[2] {
        "sym" => true,
        "dense" => false,
        other => return Err(CliError::parse(1, format!("unknown kind {other}"))),
    };
    let order = toks[3]
        .strip_prefix("order=")
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| CliError::parse(1, format!("bad order field {}", toks[3])))?;
    let dims = toks[4]
        .strip_prefix("dims=")
        .and_then(|s| s.split(',').map(|d| d.parse::<usize>().ok()).collect::<Option<Vec<_>>>())
        .ok_or_else(|| CliError::parse(1, format!("bad dims field {}", toks[4])))?;
    if order == 0 || dims.contains(&0) {
        return Err(CliError::parse(1, "order and dims must be positive"));
    }
    if sym {
        // Symmetric files may list the dimension once or once per mode.
        if !(dims.len() == 1 || dims.len() == order) || dims.iter().any(|&d| d != dims[0]) {
            return Err(CliError::parse(1, format!("symmetric dims {dims:?} must be equal")));
        }
    } else if dims.len() != order {
        return Err(CliError::parse(1, format!("dims {dims:?} do not match order {order}")));
    }
    Ok((sym, order, dims))
}

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| CliError::parse(line, format!("bad number {tok}")))?;
    if !v.is_finite() {
        return Err(CliError::parse(line, format!("non-finite value {tok}")));
    }
    Ok(v)
}

pub fn from_text(text: &str) -> Result<Tensor> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines.next().ok_or_else(|| CliError::parse(1, "empty file"))?;
    let (sym, order, dims) = parse_header(header)?;
    let body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    if sym {
        let mut seen = HashSet::new();
        let n = dims[0];
        let mut t = SymTensor::zeros(n, order)?;
        for (no, l) in body {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != n + 1 {
                return Err(CliError::parse(no, format!("expected {} exponents and two values", n - 1)));
            }
            let exps = toks[..n - 1]
                .iter()
                .map(|s| s.parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| CliError::parse(no, "bad exponent"))?;
            let alpha = PowerVector::new(exps);
            if alpha.degree() as usize > order {
                return Err(CliError::parse(no, format!("power vector {alpha:?} exceeds order {order}")));
            }
            let z = C64::new(parse_value(toks[n - 1], no)?, parse_value(toks[n], no)?);
            if !seen.insert(alpha.clone()) {
                return Err(CliError::parse(no, format!("duplicate entry {alpha:?}")));
            }
            t.set(&alpha, z)?;
        }
        Ok(Tensor::Sym(t))
    } else {
        let mut seen = HashSet::new();
        let mut t = DenseTensor::zeros(&dims)?;
        for (no, l) in body {
            let toks: Vec<&str> = l.split_whitespace().collect();
            if toks.len() != order + 2 {
                return Err(CliError::parse(no, format!("expected {order} indices and two values")));
            }
            let mut idx = Vec::with_capacity(order);
            for (tok, &d) in toks[..order].iter().zip(&dims) {
                match tok.parse::<usize>() {
                    Ok(i) if (1..=d).contains(&i) => idx.push(i - 1),
                    _ => return Err(CliError::parse(no, format!("index {tok} outside 1..={d}"))),
                }
            }
            let z = C64::new(parse_value(toks[order], no)?, parse_value(toks[order + 1], no)?);
            if !seen.insert(idx.clone()) {
                return Err(CliError::parse(no, format!("duplicate entry {:?}", toks[..order].join(" "))));
            }
            t.set(&idx, z)?;
        }
        Ok(Tensor::Dense(t))
    }
}

pub fn read_tensor(path: &Path) -> Result<Tensor> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    from_text(&text)
}

pub fn write_tensor(path: &Path, t: &Tensor) -> Result<()> {
    std::fs::write(path, to_text(t)).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip_is_exact() {
        let t = DenseTensor::from_fn(&[2, 3, 2], |i| C64::new(0.1 * i[0] as f64 - 1.0 / 3.0, i[1] as f64 * 1e-300))
            .unwrap();
        let back = from_text(&to_text(&Tensor::Dense(t.clone()))).unwrap();
        assert_eq!(back, Tensor::Dense(t));
    }

    #[test]
    fn sym_round_trip_is_exact() {
        let t = SymTensor::from_fn(3, 3, |a| C64::new(a.graded_lex_rank() as f64 / 7.0, -0.25)).unwrap();
        let back = from_text(&to_text(&Tensor::Sym(t.clone()))).unwrap();
        assert_eq!(back, Tensor::Sym(t));
    }

    #[test]
    fn missing_entries_are_zero_and_order_is_free() {
        let t = from_text("TENSOR v1 dense order=2 dims=2,2\n2 1 3 0\n\n# note\n1 2 0 -1\n").unwrap();
        let d = t.into_dense();
        assert_eq!(d.get(&[1, 0]), C64::new(3.0, 0.0));
        assert_eq!(d.get(&[0, 1]), C64::new(0.0, -1.0));
        assert_eq!(d.get(&[0, 0]), C64::new(0.0, 0.0));

        let s = from_text("TENSOR v1 sym order=2 dims=2\n1 2 0\n").unwrap();
        match s {
            Tensor::Sym(s) => assert_eq!(s.entries(), &[0.0, 2.0, 0.0].map(|x| C64::new(x, 0.0))),
            _ => panic!("expected symmetric"),
        }
    }

    #[test]
    fn malformed_files_are_rejected() {
        for bad in [
            "",
            "TENSOR v2 dense order=1 dims=2",
            "TENSOR v1 dense order=2 dims=2",
            "TENSOR v1 sym order=2 dims=2,3",
            "TENSOR v1 dense order=1 dims=2\n3 1 0",
            "TENSOR v1 dense order=1 dims=2\n1 1 0\n1 2 0",
            "TENSOR v1 dense order=1 dims=2\n1 nan 0",
            "TENSOR v1 sym order=2 dims=3\n2 1 1 0",
            "TENSOR v1 sym order=2 dims=2\n1 1",
        ] {
            assert!(from_text(bad).is_err(), "{bad:?}");
        }
    }
}
