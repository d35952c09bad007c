//! Result reports: `[section]` headers followed by `key=value` lines.
//!
//! Complex numbers are written as `re,im` and vectors as space-separated
//! complex numbers, with enough digits to round-trip exactly.

use std::fmt::Write as _;

use gentensor_core::{NsApproxResult, SpectrumReport, SymApproxResult, C64};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Section {
    pub name: String,
    pub entries: Vec<(String, String)>,
}

impl Section {
    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.entries.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub sections: Vec<Section>,
}

impl Report {
    pub fn section(&mut self, name: &str) -> &mut Section {
        self.sections.push(Section { name: name.to_string(), entries: Vec::new() });
        self.sections.last_mut().expect("just pushed")
    }

    pub fn find(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.find(section)?.get(key)
    }

    /// Looks up and parses a value, failing when absent or malformed.
    pub fn value<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<T> {
        let raw = self.get(section, key).ok_or_else(|| CliError::Usage(format!("report lacks {section}.{key}")))?;
        raw.parse().map_err(|_| CliError::Usage(format!("bad value {section}.{key}={raw}")))
    }

    pub fn vector(&self, section: &str, key: &str) -> Result<Vec<C64>> {
        let raw = self.get(section, key).ok_or_else(|| CliError::Usage(format!("report lacks {section}.{key}")))?;
        parse_vector(raw).ok_or_else(|| CliError::Usage(format!("bad vector {section}.{key}")))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.sections.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let _ = writeln!(out, "[{}]", s.name);
            for (k, v) in &s.entries {
                let _ = writeln!(out, "{k}={v}");
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Report> {
        let mut report = Report::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                report.section(name);
            } else if let Some((k, v)) = line.split_once('=') {
                let sec = report
                    .sections
                    .last_mut()
                    .ok_or_else(|| CliError::parse(no + 1, "entry before the first section"))?;
                sec.set(k.trim(), v.trim());
            } else {
                return Err(CliError::parse(no + 1, format!("expected `key=value`, got {line:?}")));
            }
        }
        Ok(report)
    }
}

pub fn fmt_complex(z: C64) -> String {
    format!("{:e},{:e}", z.re, z.im)
}

pub fn fmt_vector(v: &[C64]) -> String {
    v.iter().map(|&z| fmt_complex(z)).collect::<Vec<_>>().join(" ")
}

pub fn parse_complex(s: &str) -> Option<C64> {
    let (re, im) = s.split_once(',')?;
    Some(C64::new(re.parse().ok()?, im.parse().ok()?))
}

pub fn parse_vector(s: &str) -> Option<Vec<C64>> {
    s.split_whitespace().map(parse_complex).collect()
}

fn fmt_list(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn diagnostics(sec: &mut Section, d: &gentensor_core::extract::ExtractionDiagnostics) {
    sec.set("commutator_defect", format!("{:e}", d.commutator_defect))
        .set("triangularity_defect", format!("{:e}", d.triangularity_defect))
        .set("eigen_separation", format!("{:e}", d.eigen_separation))
        .set("low_confidence", d.low_confidence);
}

fn suggested(s: Option<&SpectrumReport>) -> String {
    s.and_then(|s| s.suggested_rank).map_or_else(|| String::from("none"), |r| r.to_string())
}

/// Report of a symmetric run. Each `term.k` holds the generating-polynomial
/// point and coefficient plus the final vector `u` with `X = sum u^{⊗m}`.
pub fn sym_report(
    order: usize,
    rank: usize,
    norm: f64,
    res: &SymApproxResult,
    spec: Option<&SpectrumReport>,
) -> Report {
    let mut rep = Report::default();
    let sec = rep.section("result");
    sec.set("kind", "sym")
        .set("order", order)
        .set("dims", res.points.first().map_or(0, |p| p.len()))
        .set("rank", rank)
        .set("seed", res.seed)
        .set("tensor_norm", format!("{norm:e}"))
        .set("residual_gp", format!("{:e}", res.residual_gp));
    if let Some(r) = &res.refined {
        sec.set("residual_opt", format!("{:e}", r.residual_opt))
            .set("refine_status", format!("{:?}", r.status))
            .set("refine_iterations", r.iterations);
    } else {
        sec.set("refine_status", "skipped");
    }
    sec.set("residual", format!("{:e}", res.residual()))
        .set("suggested_rank", suggested(spec))
        .set("coordinates_changed", res.coordinates_changed);
    diagnostics(sec, &res.diagnostics);
    if let Some(s) = spec {
        let eta: Vec<String> = s.singular_values.iter().map(|x| format!("{x:e}")).collect();
        rep.section("spectrum").set("singular_values", eta.join(" "));
    }
    for (k, ((p, c), u)) in res.points.iter().zip(&res.coefficients).zip(res.best_vectors()).enumerate() {
        rep.section(&format!("term.{}", k + 1))
            .set("point", fmt_vector(p))
            .set("coefficient", fmt_complex(*c))
            .set("vector", fmt_vector(u));
    }
    rep
}

/// Report of a nonsymmetric run. `term.k` lists the final mode vectors as
/// `mode.j`, and the generating-polynomial ones as `gp.mode.j` when refined.
pub fn ns_report(
    dims: &[usize],
    rank: usize,
    norm: f64,
    res: &NsApproxResult,
    spec: Option<&SpectrumReport>,
) -> Report {
    let mut rep = Report::default();
    let sec = rep.section("result");
    sec.set("kind", "dense")
        .set("order", dims.len())
        .set("dims", fmt_list(dims))
        .set("rank", rank)
        .set("seed", res.seed)
        .set("tensor_norm", format!("{norm:e}"))
        .set("residual_gp", format!("{:e}", res.residual_gp));
    if let Some(r) = &res.refined {
        sec.set("residual_opt", format!("{:e}", r.residual_opt))
            .set("refine_status", format!("{:?}", r.status))
            .set("refine_iterations", r.iterations);
    } else {
        sec.set("refine_status", "skipped");
    }
    let perm: Vec<usize> = res.permutation.iter().map(|p| p + 1).collect();
    sec.set("residual", format!("{:e}", res.residual()))
        .set("suggested_rank", suggested(spec))
        .set("mode_order", fmt_list(&perm))
        .set("coordinates_changed", res.coordinates_changed);
    diagnostics(sec, &res.diagnostics);
    if let Some(s) = spec {
        let eta: Vec<String> = s.singular_values.iter().map(|x| format!("{x:e}")).collect();
        rep.section("spectrum").set("singular_values", eta.join(" "));
    }
    for (k, best) in res.best_tuples().iter().enumerate() {
        let sec = rep.section(&format!("term.{}", k + 1));
        for (j, v) in best.iter().enumerate() {
            sec.set(&format!("mode.{}", j + 1), fmt_vector(v));
        }
        if res.refined.is_some() {
            for (j, v) in res.tuples[k].iter().enumerate() {
                sec.set(&format!("gp.mode.{}", j + 1), fmt_vector(v));
            }
        }
    }
    rep
}

/// Report of a rank estimate.
pub fn rank_report(spec: &SpectrumReport, split: Option<&str>) -> Report {
    let mut rep = Report::default();
    let sec = rep.section("spectrum");
    if let Some((r, c)) = spec.shape {
        sec.set("shape", format!("{r}x{c}"));
    }
    if let Some(s) = split {
        sec.set("split", s);
    }
    let eta: Vec<String> = spec.singular_values.iter().map(|x| format!("{x:e}")).collect();
    let gaps: Vec<String> = spec.gap_ratios.iter().map(|x| format!("{x:e}")).collect();
    sec.set("singular_values", eta.join(" "))
        .set("gap_ratios", gaps.join(" "))
        .set("suggested_rank", suggested(Some(spec)))
        .set("summary", spec.describe());
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut rep = Report::default();
        rep.section("result").set("rank", 2).set("residual", format!("{:e}", 0.1 + 0.2));
        rep.section("term.1").set("vector", fmt_vector(&[C64::new(1.0 / 3.0, -2.5e-300), C64::new(0.0, 1.0)]));
        let back = Report::parse(&rep.to_text()).unwrap();
        assert_eq!(back, rep);
        assert_eq!(back.value::<f64>("result", "residual").unwrap(), 0.1 + 0.2);
        assert_eq!(back.vector("term.1", "vector").unwrap()[0], C64::new(1.0 / 3.0, -2.5e-300));
        assert!(back.value::<usize>("result", "missing").is_err());
    }

    #[test]
    fn malformed_reports() {
        assert!(Report::parse("a=1").is_err());
        assert!(Report::parse("[s]\nnot a pair").is_err());
        assert!(parse_vector("1,2 3").is_none());
    }
}
