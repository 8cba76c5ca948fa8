//! Serializable certificates for single analyses and scans, with text
//! renderings derived from the same values.

use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::rootsys::Root;
use crate::scalar::FLOAT_TOL;
use crate::spectral::{Analysis, CaseLabel, Component, CrossCheck, DegreeSpectrum, Origin, Provenance};
use crate::symbol::LocalReading;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameters {
    pub p: usize,
    pub q: usize,
    pub p1: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimensions {
    pub s: usize,
    pub t: usize,
    /// Real rank of the distribution.
    #[serde(rename = "dimE")]
    pub dim_e: usize,
    /// Real dimension of the fiber directions.
    #[serde(rename = "dimF")]
    pub dim_f: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Form {
    pub weights: Vec<String>,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RReport {
    pub root: [usize; 2],
    pub value: f64,
    pub exact: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub degree: usize,
    pub origin: Origin,
    /// Eigenvalue of `ΣM` on the exterior part.
    pub eigenvalue: f64,
    pub residual: f64,
    pub provenance: Provenance,
    /// Acceptance threshold for float residuals.
    pub tolerance: Option<f64>,
    pub witness_norm: f64,
    pub components: Vec<Component>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub rockland_fails: bool,
    pub maximal_hypoelliptic: Option<bool>,
    pub witness_degrees: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Versions {
    pub flagrock: String,
    pub schema: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Versions { flagrock: env!("CARGO_PKG_VERSION").to_string(), schema: SCHEMA_VERSION }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub parameters: Parameters,
    pub dimensions: Dimensions,
    pub hormander: bool,
    pub gamma: Vec<[usize; 2]>,
    pub form: Form,
    #[serde(rename = "hypothesis_H")]
    pub hypothesis_h: Option<bool>,
    pub case: CaseLabel,
    pub local_reading: LocalReading,
    pub r_values: Vec<RReport>,
    pub m_spectra: Vec<DegreeSpectrum>,
    pub witnesses: Vec<Witness>,
    /// Degrees where `−Σr` is an eigenvalue of `ΣM`; reported, not certified.
    pub spectral_kernel_degrees: Vec<usize>,
    pub degree0_min: Option<f64>,
    pub cross_check: Option<CrossCheck>,
    pub checks: Vec<String>,
    pub verdict: VerdictReport,
    pub versions: Versions,
    pub timing: Option<Timing>,
}

fn pair(r: Root) -> [usize; 2] {
    [r.i, r.j]
}

impl Report {
    pub fn from_analysis(a: &Analysis, elapsed: Option<Duration>) -> Self {
        let pd = &a.pd;
        Report {
            schema: SCHEMA_VERSION,
            parameters: Parameters { p: pd.p, q: pd.q, p1: pd.p1 },
            dimensions: Dimensions { s: pd.s(), t: pd.t(), dim_e: 2 * pd.u.len(), dim_f: 2 * pd.l_p.len() },
            hormander: a.hormander,
            gamma: a.gamma.iter().copied().map(pair).collect(),
            form: Form { weights: a.weights.clone(), exact: a.exact },
            hypothesis_h: a.hypothesis_h,
            case: a.case,
            local_reading: a.local_reading,
            r_values: a
                .r_values
                .iter()
                .map(|r| RReport { root: pair(r.root), value: r.value, exact: r.exact.clone() })
                .collect(),
            m_spectra: a.m_spectra.clone(),
            witnesses: a
                .witnesses()
                .map(|c| Witness {
                    degree: c.degree,
                    origin: c.origin,
                    eigenvalue: c.eigenvalue,
                    residual: c.residual,
                    provenance: c.provenance,
                    tolerance: (c.provenance == Provenance::Float).then_some(FLOAT_TOL),
                    witness_norm: c.witness_norm,
                    components: c.components.clone(),
                })
                .collect(),
            spectral_kernel_degrees: a.spectral_kernel_degrees.clone(),
            degree0_min: a.degree0_min,
            cross_check: a.cross_check.clone(),
            checks: a.checks.iter().map(|s| s.to_string()).collect(),
            verdict: VerdictReport {
                rockland_fails: a.verdict.rockland_fails,
                maximal_hypoelliptic: a.verdict.maximal_hypoelliptic,
                witness_degrees: a.verdict.witness_degrees.clone(),
            },
            versions: Versions::default(),
            timing: elapsed.map(|d| Timing { elapsed_ms: d.as_secs_f64() * 1e3 }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }

    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let p = &self.parameters;
        let d = &self.dimensions;
        let _ = writeln!(o, "U({},{}) with p1 = {}", p.p, p.q, p.p1);
        let _ = writeln!(o, "  s = {}, t = {}, dim E = {}, dim F = {}", d.s, d.t, d.dim_e, d.dim_f);
        let _ = writeln!(o, "  hormander: {}", yes_no(self.hormander));
        let _ = writeln!(o, "  case: {}", case_name(self.case));
        if self.case == CaseLabel::Degenerate {
            let _ = writeln!(o, "  no fiber directions; no verdict issued");
            let _ = writeln!(o, "verdict: undetermined");
            return o;
        }
        let gamma: Vec<String> = self.gamma.iter().map(|g| format!("({},{})", g[0], g[1])).collect();
        let _ = writeln!(o, "  gamma: {}", gamma.join(" "));
        let _ = writeln!(
            o,
            "  weights: {} ({})",
            self.form.weights.join(", "),
            if self.form.exact { "exact" } else { "float" }
        );
        let _ = writeln!(o, "  hypothesis H: {}", self.hypothesis_h.map_or("n/a", yes_no));
        for r in &self.r_values {
            let v = r.exact.clone().unwrap_or_else(|| format!("{}", r.value));
            let _ = writeln!(o, "  r({},{}) = {v}", r.root[0], r.root[1]);
        }
        for s in &self.m_spectra {
            let ev: Vec<String> = s.eigenvalues.iter().map(|e| format!("{e}")).collect();
            let _ = writeln!(o, "  spec ΣM on degree {}: [{}]", s.degree, ev.join(", "));
        }
        if let Some(m) = self.degree0_min {
            let _ = writeln!(o, "  lowest degree-0 eigenvalue: {m}");
        }
        if let Some(cc) = &self.cross_check {
            let _ = writeln!(
                o,
                "  truncated-basis cross-check (degree ≤ {}): max deviation {:.3e}, zero in spectrum: {}",
                cc.truncation,
                cc.max_deviation,
                yes_no(cc.zero_in_spectrum)
            );
        }
        if !self.spectral_kernel_degrees.is_empty() {
            let ks: Vec<String> = self.spectral_kernel_degrees.iter().map(|k| k.to_string()).collect();
            let _ = writeln!(o, "  degrees with -Σr in spec ΣM: {}", ks.join(", "));
        }
        for w in &self.witnesses {
            let prov = match (w.provenance, w.tolerance) {
                (Provenance::Exact, _) => "exact".to_string(),
                (Provenance::Float, Some(t)) => format!("float, tol {t:e}"),
                (Provenance::Float, None) => "float".to_string(),
            };
            let _ = writeln!(
                o,
                "  witness: degree {} via {}, ΣM eigenvalue {}, residual {} ({prov})",
                w.degree,
                origin_name(w.origin),
                w.eigenvalue,
                w.residual
            );
            for c in &w.components {
                let _ = writeln!(o, "    {} · {}", c.coefficient, c.basis);
            }
        }
        let v = &self.verdict;
        let verdict = match v.maximal_hypoelliptic {
            Some(false) => "Rockland fails; not maximal hypoelliptic",
            Some(true) => "maximal hypoelliptic",
            None => "undetermined",
        };
        let _ = writeln!(o, "verdict: {verdict}");
        o
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn case_name(c: CaseLabel) -> &'static str {
    match c {
        CaseLabel::First => "first (t ≥ s)",
        CaseLabel::Second => "second (t < s)",
        CaseLabel::Degenerate => "degenerate",
    }
}

fn origin_name(o: Origin) -> &'static str {
    match o {
        Origin::Recursion => "recursion",
        Origin::Duality => "duality",
    }
}

/// One row of a parameter scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub p: usize,
    pub q: usize,
    pub p1: usize,
    pub s: usize,
    pub t: usize,
    pub case: Option<CaseLabel>,
    pub hormander: Option<bool>,
    #[serde(rename = "hypothesis_H")]
    pub hypothesis_h: Option<bool>,
    pub rockland_fails: Option<bool>,
    pub maximal_hypoelliptic: Option<bool>,
    pub witness_degrees: Vec<usize>,
    pub error: Option<String>,
}

impl ScanRow {
    pub fn from_analysis(a: &Analysis) -> Self {
        ScanRow {
            p: a.pd.p,
            q: a.pd.q,
            p1: a.pd.p1,
            s: a.pd.s(),
            t: a.pd.t(),
            case: Some(a.case),
            hormander: Some(a.hormander),
            hypothesis_h: a.hypothesis_h,
            rockland_fails: Some(a.verdict.rockland_fails),
            maximal_hypoelliptic: a.verdict.maximal_hypoelliptic,
            witness_degrees: a.verdict.witness_degrees.clone(),
            error: None,
        }
    }

    /// Nondegenerate with (H) but no witness.
    pub fn is_anomalous(&self) -> bool {
        self.error.is_some()
            || (self.s >= 1
                && self.t >= 1
                && self.hypothesis_h == Some(true)
                && self.rockland_fails != Some(true))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub instances: usize,
    pub degenerate: usize,
    pub hormander: usize,
    pub hypothesis_h: usize,
    pub rockland_fails: usize,
    pub errors: usize,
    pub anomalies: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub schema: u32,
    pub max_n: usize,
    pub rows: Vec<ScanRow>,
    pub summary: ScanSummary,
    pub versions: Versions,
}

impl ScanReport {
    pub fn new(max_n: usize, rows: Vec<ScanRow>) -> Self {
        let count = |f: &dyn Fn(&ScanRow) -> bool| rows.iter().filter(|r| f(r)).count();
        let summary = ScanSummary {
            instances: rows.len(),
            degenerate: count(&|r| r.case == Some(CaseLabel::Degenerate)),
            hormander: count(&|r| r.hormander == Some(true)),
            hypothesis_h: count(&|r| r.hypothesis_h == Some(true)),
            rockland_fails: count(&|r| r.rockland_fails == Some(true)),
            errors: count(&|r| r.error.is_some()),
            anomalies: count(&ScanRow::is_anomalous),
        };
        ScanReport { schema: SCHEMA_VERSION, max_n, rows, summary, versions: Versions::default() }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scan serializes")
    }

    pub fn to_text(&self) -> String {
        let mut o = String::new();
        let _ = writeln!(o, "{:>2} {:>2} {:>3} {:>3} {:>3}  {:<10} {:<4} {:<4} {:<8} witnesses", "p", "q", "p1", "s", "t", "case", "hor", "H", "rockland");
        let opt = |b: Option<bool>| match b {
            Some(true) => "yes",
            Some(false) => "no",
            None => "-",
        };
        for r in &self.rows {
            let case = match r.case {
                Some(CaseLabel::First) => "first",
                Some(CaseLabel::Second) => "second",
                Some(CaseLabel::Degenerate) => "degenerate",
                None => "error",
            };
            let ws: Vec<String> = r.witness_degrees.iter().map(|k| k.to_string()).collect();
            let rock = match r.rockland_fails {
                Some(true) => "fails",
                Some(false) => "-",
                None => "?",
            };
            let _ = write!(
                o,
                "{:>2} {:>2} {:>3} {:>3} {:>3}  {:<10} {:<4} {:<4} {:<8} {}",
                r.p,
                r.q,
                r.p1,
                r.s,
                r.t,
                case,
                opt(r.hormander),
                opt(r.hypothesis_h),
                rock,
                ws.join(",")
            );
            if let Some(e) = &r.error {
                let _ = write!(o, "  error: {e}");
            }
            o.push('\n');
        }
        let s = &self.summary;
        let _ = writeln!(
            o,
            "{} instances: {} degenerate, {} with H, {} Rockland failures, {} errors, {} anomalies",
            s.instances, s.degenerate, s.hypothesis_h, s.rockland_fails, s.errors, s.anomalies
        );
        o
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::build_parabolic;
    use crate::spectral::analyze;

    #[test]
    fn round_trip() {
        for (p, q, p1) in [(2, 2, 1), (3, 1, 1), (1, 1, 1)] {
            let a = analyze(&build_parabolic(p, q, p1).unwrap(), None).unwrap();
            let r = Report::from_analysis(&a, Some(Duration::from_millis(3)));
            let back = Report::from_json(&r.to_json()).unwrap();
            assert_eq!(back, r);
        }
    }

    #[test]
    fn text_mentions_verdict() {
        let a = analyze(&build_parabolic(2, 2, 1).unwrap(), None).unwrap();
        let t = Report::from_analysis(&a, None).to_text();
        assert!(t.contains("Rockland fails"));
        assert!(t.contains("degree 1 via recursion"));
        assert!(t.contains("degree 2 via duality"));
    }

    #[test]
    fn scan_summary_counts() {
        let rows: Vec<ScanRow> = [(1, 1, 1), (2, 2, 1)]
            .iter()
            .map(|&(p, q, p1)| ScanRow::from_analysis(&analyze(&build_parabolic(p, q, p1).unwrap(), None).unwrap()))
            .collect();
        let s = ScanReport::new(4, rows);
        assert_eq!(s.summary.instances, 2);
        assert_eq!(s.summary.degenerate, 1);
        assert_eq!(s.summary.rockland_fails, 1);
        assert_eq!(s.summary.anomalies, 0);
    }
}
