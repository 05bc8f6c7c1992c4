//! System files, run configuration and the analyze / verify / normalize
//! commands behind the `birkhoff` binary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::difference::{monodromy_difference, verify_fuchs, DifferenceSystem};
use crate::elliptic::lattice_constants;
use crate::error::{Error, Result};
use crate::gauge::{normalize_system, GaugeLog, Shift, System};
use crate::matrix::{Mat, PolyMat};
use crate::qdiff::{det_zeros, fit_sigma_form, monodromy_q, q_congruent_pair, MonodromyEvaluator, QDifferenceSystem};
use crate::roots::{eigenvalues, poly_roots};
use crate::scalar::{BigComplex, ExactComplex};

/// `q` in a system file: a rational or decimal string, or an exact
/// `{"re", "im"}` object.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QValue {
    Text(String),
    Exact(ExactComplex),
}

impl QValue {
    pub fn to_exact(&self) -> Result<ExactComplex> {
        match self {
            QValue::Text(s) => s.parse(),
            QValue::Exact(q) => Ok(q.clone()),
        }
    }
}

/// On-disk system description. `coefficients` lists the matrices of
/// `z^low, …, z^top`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SystemFile {
    Difference {
        n: usize,
        r: i32,
        #[serde(default, skip_serializing_if = "is_zero")]
        low: i32,
        coefficients: Vec<Mat>,
    },
    #[serde(rename = "qdifference")]
    QDifference {
        q: QValue,
        n: usize,
        mu: i32,
        #[serde(default, skip_serializing_if = "is_zero")]
        low: i32,
        coefficients: Vec<Mat>,
    },
}

fn is_zero(x: &i32) -> bool {
    *x == 0
}

impl SystemFile {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        SystemFile::parse(&text).map_err(|e| match e {
            Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system files serialize")
    }

    pub fn to_system(&self) -> Result<System> {
        let (shift, n, top, low, coeffs) = match self {
            SystemFile::Difference { n, r, low, coefficients } => (Shift::Difference, *n, *r, *low, coefficients),
            SystemFile::QDifference { q, n, mu, low, coefficients } => {
                let q = q.to_exact()?;
                if q.norm_sqr() <= 1 {
                    return Err(Error::InvalidInput(format!("|q| must exceed 1, got q = {q}")));
                }
                (Shift::Q { q }, *n, *mu, *low, coefficients)
            }
        };
        if low > top {
            return Err(Error::InvalidInput(format!("low exponent {low} above top {top}")));
        }
        let want = (top - low + 1) as usize;
        if coeffs.len() != want {
            return Err(Error::InvalidInput(format!(
                "expected {want} coefficient matrices for powers {low}..={top}, found {}",
                coeffs.len()
            )));
        }
        for (k, m) in coeffs.iter().enumerate() {
            if m.rows() != n || m.cols() != n {
                return Err(Error::InvalidInput(format!(
                    "coefficient of z^{} is {}x{}, expected {n}x{n}",
                    low + k as i32,
                    m.rows(),
                    m.cols()
                )));
            }
        }
        let pairs: Vec<(i32, Mat)> = coeffs.iter().cloned().enumerate().map(|(k, m)| (low + k as i32, m)).collect();
        let coeff = PolyMat::from_coeff_mats(n, n, &pairs);
        if coeff.high() != Some(top) {
            return Err(Error::InvalidInput(format!("coefficient of z^{top} vanishes")));
        }
        System::new(shift, coeff)
    }

    pub fn from_system(s: &System) -> Self {
        let n = s.n();
        let (low, top) = (s.low(), s.top());
        let coefficients = (low..=top).map(|e| s.coeff.coeff(e)).collect();
        match &s.shift {
            Shift::Difference => SystemFile::Difference { n, r: top, low, coefficients },
            Shift::Q { q } => SystemFile::QDifference {
                q: QValue::Exact(q.clone()),
                n,
                mu: top,
                low,
                coefficients,
            },
        }
    }
}

/// Knobs shared by the commands.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    /// Working precision in bits.
    pub precision: u32,
    /// Series order used where a fixed order is needed.
    pub order: usize,
    /// Samples per side of the parallelogram (q) or along the period (difference).
    pub samples: usize,
    /// Pass threshold; `None` picks the suite default.
    pub tolerance: Option<f64>,
    pub seed: u64,
    /// Directory for artifacts (output system, gauge log, CSV grids).
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision: 256,
            order: 10,
            samples: 4,
            tolerance: None,
            seed: 0,
            out: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.precision < 64 {
            return Err(Error::InvalidInput(format!("precision {} below 64 bits", self.precision)));
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0) {
                return Err(Error::InvalidInput(format!("tolerance must be positive, got {t}")));
            }
        }
        if self.samples == 0 {
            return Err(Error::InvalidInput("sample count must be positive".into()));
        }
        Ok(())
    }

    fn tol(&self, default: f64) -> f64 {
        self.tolerance.unwrap_or(default)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeReport {
    pub kind: String,
    pub n: usize,
    pub degree: i32,
    pub low: i32,
    /// `ρ` (difference: diagonal of `A_r`; q: `ln λ / ln q` for `λ` the
    /// eigenvalues of `Q_0`).
    pub rho: Vec<String>,
    /// Difference case: exact `d_k`.
    pub d: Option<Vec<ExactComplex>>,
    /// q-case: `σ` from `Q_μ`.
    pub sigma: Option<Vec<BigComplex>>,
    pub det_roots: Vec<BigComplex>,
    pub warnings: Vec<String>,
    pub hypotheses_ok: bool,
    pub precision: u32,
}

fn congruent_roots(shift: &Shift, roots: &[BigComplex], prec: u32) -> Option<(usize, usize)> {
    match shift {
        Shift::Q { q } => q_congruent_pair(roots, &q.to_big(prec)),
        Shift::Difference => {
            for i in 0..roots.len() {
                for j in (i + 1)..roots.len() {
                    let d = roots[i].clone() - roots[j].clone();
                    let (re, im) = (d.re().to_f64(), d.im().to_f64());
                    if ((re - re.round()).powi(2) + im * im).sqrt() < crate::qdiff::CONGRUENCE_MARGIN {
                        return Some((i, j));
                    }
                }
            }
            None
        }
    }
}

/// Kind, degree, exponents, roots of the determinant and precondition
/// diagnostics. Violated hypotheses are warnings, not errors.
pub fn cmd_analyze(file: &SystemFile, cfg: &RunConfig) -> Result<AnalyzeReport> {
    cfg.validate()?;
    let prec = cfg.precision;
    let s = file.to_system()?;
    let mut warnings = Vec::new();
    let det_roots = match poly_roots(&s.det(), prec) {
        Ok(set) => set.flat(),
        Err(e) => {
            warnings.push(format!("roots of det: {e}"));
            Vec::new()
        }
    };
    if let Some((i, j)) = congruent_roots(&s.shift, &det_roots, prec) {
        warnings.push(format!("roots {i} and {j} of det are congruent under the shift"));
    }
    let (rho, d, sigma) = match &s.shift {
        Shift::Difference => {
            let ds = s.to_difference()?;
            warnings.extend(ds.hypothesis_violations());
            (ds.rho().iter().map(|x| x.to_string()).collect(), Some(ds.d()), None)
        }
        Shift::Q { q } => {
            let qs = s.to_q()?;
            warnings.extend(qs.hypothesis_violations(prec));
            let ln_q = q.to_big(prec).ln();
            let rho = if qs.is_polynomial() && !qs.coeff(0).det().is_zero() {
                eigenvalues(&qs.coeff(0).to_big(prec))?
                    .iter()
                    .map(|l| format!("{:?}", l.ln() / ln_q.clone()))
                    .collect()
            } else {
                Vec::new()
            };
            let sigma = if qs.is_normalized() {
                Some(qs.sigma(prec)?)
            } else {
                warnings.push("Q_mu is not diagonal; run normalize with zero targets first".into());
                None
            };
            (rho, None, sigma)
        }
    };
    Ok(AnalyzeReport {
        kind: s.shift.name().into(),
        n: s.n(),
        degree: s.top(),
        low: s.low(),
        rho,
        d,
        sigma,
        det_roots,
        hypotheses_ok: warnings.is_empty(),
        warnings,
        precision: prec,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Fuchs,
    Legendre,
    Periodicity,
    Circuit,
    SigmaForm,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Fuchs => "fuchs",
            Suite::Legendre => "legendre",
            Suite::Periodicity => "periodicity",
            Suite::Circuit => "circuit",
            Suite::SigmaForm => "sigma-form",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fuchs" => Ok(Suite::Fuchs),
            "legendre" => Ok(Suite::Legendre),
            "periodicity" => Ok(Suite::Periodicity),
            "circuit" => Ok(Suite::Circuit),
            "sigma-form" => Ok(Suite::SigmaForm),
            other => Err(Error::InvalidInput(format!("unknown suite '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub kind: String,
    pub pass: bool,
    pub tolerance: f64,
    /// Residual name to value; exact residuals are printed as exact strings.
    pub residuals: BTreeMap<String, String>,
    pub precision: u32,
    /// Artifacts written under the output directory.
    pub artifacts: Vec<String>,
}

fn inapplicable(suite: Suite, s: &System) -> Error {
    Error::SuiteInapplicable {
        suite: suite.name().into(),
        kind: s.shift.name().into(),
    }
}

/// Corner of the sampling parallelogram in the `t`-plane.
fn default_t0() -> (f64, f64) {
    (-0.45, -4.1)
}

/// `t, |p_ij|, arg p_ij` rows for every sample.
pub fn monodromy_csv(samples: &[(BigComplex, Mat<BigComplex>)]) -> String {
    let mut out = String::new();
    let n = samples.first().map_or(0, |(_, p)| p.rows());
    out.push_str("t_re,t_im");
    for i in 0..n {
        for j in 0..n {
            let _ = write!(out, ",abs_p{i}{j},arg_p{i}{j}");
        }
    }
    out.push('\n');
    for (t, p) in samples {
        let _ = write!(out, "{:.12e},{:.12e}", t.re().to_f64(), t.im().to_f64());
        for i in 0..n {
            for j in 0..n {
                let v = &p[(i, j)];
                let arg = v.im().to_f64().atan2(v.re().to_f64());
                let _ = write!(out, ",{:.12e},{:.12e}", v.abs_f64(), arg);
            }
        }
        out.push('\n');
    }
    out
}

fn write_artifact(cfg: &RunConfig, name: &str, body: &str, list: &mut Vec<String>) -> Result<()> {
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        list.push(path.display().to_string());
    }
    Ok(())
}

fn fmt_f(x: f64) -> String {
    format!("{x:e}")
}

/// Runs one verification suite.
pub fn cmd_verify(file: &SystemFile, suite: Suite, cfg: &RunConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let prec = cfg.precision;
    let s = file.to_system()?;
    let mut residuals = BTreeMap::new();
    let mut artifacts = Vec::new();
    let (pass, tolerance) = match (suite, &s.shift) {
        (Suite::Fuchs, Shift::Difference) => {
            let r = verify_fuchs(&s.to_difference()?)?;
            residuals.insert("residual".into(), r.residual.to_string());
            residuals.insert("d_sum".into(), r.d_sum.to_string());
            residuals.insert("root_sum".into(), r.root_sum.to_string());
            (r.residual.is_zero(), 0.0)
        }
        (Suite::Legendre, Shift::Q { q }) => {
            let tol = cfg.tol(1e-30);
            let lat = lattice_constants(&q.to_big(prec), prec)?;
            residuals.insert("legendre".into(), fmt_f(lat.legendre_residual));
            (lat.legendre_residual < tol, tol)
        }
        (Suite::Periodicity, Shift::Q { .. }) | (Suite::Circuit, Shift::Q { .. }) => {
            let tol = cfg.tol(1e-8);
            let (x, y) = default_t0();
            let rep = monodromy_q(&s.to_q()?, &BigComplex::from_f64(prec, x, y), cfg.samples, prec)?;
            residuals.insert("periodicity".into(), fmt_f(rep.periodicity_residual));
            residuals.insert("circuit".into(), fmt_f(rep.circuit_residual));
            write_artifact(cfg, "monodromy_q.csv", &monodromy_csv(&rep.samples), &mut artifacts)?;
            let value = if suite == Suite::Periodicity {
                rep.periodicity_residual
            } else {
                rep.circuit_residual
            };
            (value < tol, tol)
        }
        (Suite::Periodicity, Shift::Difference) => {
            let tol = cfg.tol(1e-8);
            let ds = s.to_difference()?;
            let count = cfg.samples.max(2 * ds.r() as usize + 3);
            let rep = monodromy_difference(&ds, count, prec, None, f64::INFINITY)?;
            residuals.insert("periodicity".into(), fmt_f(rep.periodicity_residual));
            residuals.insert("fit".into(), fmt_f(rep.fit_residual));
            residuals.insert("diagonal_constant".into(), fmt_f(rep.diagonal_constant_error));
            residuals.insert("diagonal_top".into(), fmt_f(rep.diagonal_top_error));
            write_artifact(cfg, "monodromy_difference.csv", &monodromy_csv(&rep.samples), &mut artifacts)?;
            (rep.periodicity_residual < tol, tol)
        }
        (Suite::SigmaForm, Shift::Q { q }) => {
            let tol = cfg.tol(1e-6);
            let ev = MonodromyEvaluator::new(&s.to_q()?, prec)?;
            let lat = lattice_constants(&q.to_big(prec), prec)?;
            let (x, y) = default_t0();
            let fits = fit_sigma_form(&ev, &lat, &BigComplex::from_f64(prec, x, y))?;
            let mut worst = 0.0f64;
            let mut worst_fit = 0.0f64;
            for (i, row) in fits.iter().enumerate() {
                for (j, f) in row.iter().enumerate() {
                    if let Some(f) = f {
                        residuals.insert(format!("lattice_{i}{j}"), fmt_f(f.lattice_residual));
                        residuals.insert(format!("winding_{i}{j}"), f.winding.to_string());
                        worst = worst.max(f.lattice_residual);
                        worst_fit = worst_fit.max(f.fit_residual);
                    }
                }
            }
            residuals.insert("fit".into(), fmt_f(worst_fit));
            // Zeros of det P must be simple; a repeated one is an error.
            let dz = det_zeros(&ev, &lat, &BigComplex::from_f64(prec, x, y))?;
            residuals.insert("det_zeros".into(), dz.winding.to_string());
            (worst < tol, tol)
        }
        _ => return Err(inapplicable(suite, &s)),
    };
    Ok(VerifyReport {
        suite,
        kind: s.shift.name().into(),
        pass,
        tolerance,
        residuals,
        precision: prec,
        artifacts,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalizeReport {
    pub targets: Vec<i32>,
    pub norm_trajectory: Vec<i32>,
    pub steps: usize,
    pub output: SystemFile,
    pub log: GaugeLog,
    /// Difference case: the exact Fuchs residual of the output.
    pub fuchs_residual: Option<ExactComplex>,
    pub artifacts: Vec<String>,
}

/// Runs the normalization pipeline and writes `system.json` and
/// `gauge_log.json` under the output directory when one is set.
pub fn cmd_normalize(file: &SystemFile, targets: &[i32], cfg: &RunConfig) -> Result<NormalizeReport> {
    cfg.validate()?;
    let s = file.to_system()?;
    let out = normalize_system(&s, targets)?;
    let fuchs_residual = match s.shift {
        Shift::Difference => Some(verify_fuchs(&DifferenceSystem::new(out.output.coeff.clone())?)?.residual),
        Shift::Q { .. } => None,
    };
    let output = SystemFile::from_system(&out.output);
    let mut artifacts = Vec::new();
    write_artifact(cfg, "system.json", &output.to_json(), &mut artifacts)?;
    let log_json = serde_json::to_string_pretty(&out.log)?;
    write_artifact(cfg, "gauge_log.json", &log_json, &mut artifacts)?;
    Ok(NormalizeReport {
        targets: targets.to_vec(),
        norm_trajectory: out.log.norm_trajectory.clone(),
        steps: out.records.len(),
        output,
        log: out.log,
        fuchs_residual,
        artifacts,
    })
}

/// Parses `"1,-1"` into target shifts.
pub fn parse_targets(text: &str) -> Result<Vec<i32>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<i32>()
                .map_err(|e| Error::Parse(format!("target '{}': {e}", p.trim())))
        })
        .collect()
}

/// Loads a q-difference system file directly.
pub fn load_q(path: &Path) -> Result<QDifferenceSystem> {
    SystemFile::load(path)?.to_system()?.to_q()
}

/// Loads a difference system file directly.
pub fn load_difference(path: &Path) -> Result<DifferenceSystem> {
    SystemFile::load(path)?.to_system()?.to_difference()
}

#[cfg(test)]
mod tests {
    use super::*;

    const WORKED: &str = r#"{
        "kind": "difference", "n": 2, "r": 1,
        "coefficients": [
            [[{"re":"2","im":"0"},{"re":"1","im":"0"}],[{"re":"1","im":"0"},{"re":"0","im":"3"}]],
            [[{"re":"1","im":"0"},{"re":"0","im":"0"}],[{"re":"0","im":"0"},{"re":"0","im":"1"}]]
        ]
    }"#;

    #[test]
    fn roundtrip_file() {
        let f = SystemFile::parse(WORKED).unwrap();
        let s = f.to_system().unwrap();
        assert_eq!(SystemFile::from_system(&s), f);
        let again = SystemFile::parse(&f.to_json()).unwrap();
        assert_eq!(again, f);
    }

    #[test]
    fn malformed_is_parse_error() {
        let e = SystemFile::parse("{\"kind\": \"difference\", ").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("line"));
    }

    #[test]
    fn fuchs_suite_prints_exact_zero() {
        let f = SystemFile::parse(WORKED).unwrap();
        let r = cmd_verify(&f, Suite::Fuchs, &RunConfig::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.residuals["residual"], "0");
    }

    #[test]
    fn suite_kind_mismatch() {
        let f = SystemFile::parse(WORKED).unwrap();
        let e = cmd_verify(&f, Suite::Legendre, &RunConfig::default()).unwrap_err();
        assert!(matches!(e, Error::SuiteInapplicable { .. }));
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn analyze_flags_real_ratio() {
        let text = WORKED.replace(r#"{"re":"0","im":"1"}]]
        ]"#, r#"{"re":"2","im":"0"}]]
        ]"#);
        let f = SystemFile::parse(&text).unwrap();
        let r = cmd_analyze(&f, &RunConfig::default()).unwrap();
        assert!(!r.hypotheses_ok);
        let ok = cmd_analyze(&SystemFile::parse(WORKED).unwrap(), &RunConfig::default()).unwrap();
        assert_eq!(ok.d.unwrap(), vec![ExactComplex::real(2), ExactComplex::real(3)]);
    }

    #[test]
    fn q_as_decimal_string() {
        let text = r#"{"kind":"qdifference","q":"2.5","n":1,"mu":0,"coefficients":[[[{"re":"3","im":"0"}]]]}"#;
        let s = SystemFile::parse(text).unwrap().to_system().unwrap();
        assert_eq!(s.shift, Shift::Q { q: ExactComplex::ratio(5, 2) });
    }

    #[test]
    fn targets_parse() {
        assert_eq!(parse_targets("1, -1").unwrap(), vec![1, -1]);
        assert!(parse_targets("1,x").is_err());
    }
}
