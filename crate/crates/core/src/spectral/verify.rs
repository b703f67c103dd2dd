use std::fmt::Write as _;

use num_complex::Complex64;

use super::bounds::{rho_min, BoundReport, ComplexDisc};
use super::spectrum::{classify, EigenClass, Spectrum, SpectrumMode};
use crate::error::{Error, Result};
use crate::tolerances::CONTAINMENT_SLACK;

/// The eigenvalue that violates a check the most (or comes closest to it).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Offender {
    pub value: Complex64,
    /// Amount by which the bound is exceeded; negative means inside.
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// False when the check could not run (e.g. no eigenvectors).
    pub ran: bool,
    pub checked: usize,
    pub exempt: usize,
    pub worst: Option<Offender>,
}

impl CheckResult {
    fn new(name: &'static str) -> Self {
        Self { name, passed: true, ran: true, checked: 0, exempt: 0, worst: None }
    }

    fn record(&mut self, value: Complex64, excess: f64) {
        self.checked += 1;
        if excess > CONTAINMENT_SLACK {
            self.passed = false;
        }
        if self.worst.map_or(true, |w| excess > w.excess) {
            self.worst = Some(Offender { value, excess });
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub provenance: String,
    pub mode: SpectrumMode,
    pub checks: Vec<CheckResult>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// One row per check.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("provenance,mode,check,ran,passed,checked,exempt,worst_re,worst_im,worst_excess\n");
        for c in &self.checks {
            let (re, im, ex) = c.worst.map_or((f64::NAN, f64::NAN, f64::NAN), |w| (w.value.re, w.value.im, w.excess));
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{:e},{:e},{:e}",
                self.provenance,
                self.mode,
                c.name,
                c.ran,
                if c.passed { "pass" } else { "fail" },
                c.checked,
                c.exempt,
                re,
                im,
                ex
            );
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "verdict for {} ({})", self.provenance, self.mode);
        for c in &self.checks {
            let status = match (c.ran, c.passed) {
                (false, _) => "skip",
                (true, true) => "pass",
                (true, false) => "FAIL",
            };
            let _ = write!(s, "  {:<26} {status}  checked {:>6}  exempt {:>6}", c.name, c.checked, c.exempt);
            if let Some(w) = c.worst {
                let _ = write!(s, "  worst {:.6e}{:+.6e}i excess {:.3e}", w.value.re, w.value.im, w.excess);
            }
            let _ = writeln!(s);
        }
        s
    }
}

/// Containment checks of a computed spectrum against a bound report.
pub fn verify_bounds(spectrum: &Spectrum, report: &BoundReport) -> Result<Verdict> {
    if spectrum.provenance != report.provenance {
        return Err(Error::Config(format!(
            "spectrum of {} checked against bounds of {}",
            spectrum.provenance, report.provenance
        )));
    }
    let checks = match spectrum.mode {
        SpectrumMode::Triangular => triangular_checks(spectrum, report),
        SpectrumMode::Diagonal => vec![diagonal_check(spectrum, report)],
    };
    Ok(Verdict { provenance: spectrum.provenance.clone(), mode: spectrum.mode, checks })
}

fn triangular_checks(sp: &Spectrum, report: &BoundReport) -> Vec<CheckResult> {
    let t = &report.triangular;
    let mut disc = CheckResult::new("complex-disc");
    let mut real = CheckResult::new("real-interval");
    let mut part = CheckResult::new("complex-real-part");
    part.ran = sp.weights.is_some();
    for (k, &z) in sp.values.iter().enumerate() {
        match classify(z) {
            EigenClass::Complex => {
                let excess = match report.disc {
                    ComplexDisc::Radius(r) => (z - 1.0).norm() - r,
                    ComplexDisc::AllReal => f64::INFINITY,
                };
                disc.record(z, excess);
                if let Some(w) = &sp.weights {
                    let b = w[k];
                    let rho = rho_min(&report.indicators, b.x2, b.y2, b.z2);
                    part.record(z, rho / 2.0 - z.re);
                }
            }
            EigenClass::Real => {
                let x = z.re;
                if x >= t.window.0 && x <= t.window.1 {
                    real.exempt += 1;
                } else {
                    real.record(z, (t.lo - x).max(x - t.hi));
                }
            }
        }
    }
    vec![disc, real, part]
}

fn diagonal_check(sp: &Spectrum, report: &BoundReport) -> CheckResult {
    let d = &report.diagonal;
    let mut c = CheckResult::new("diagonal-intervals");
    for &z in &sp.values {
        let x = z.re;
        let dist = |(lo, hi): (f64, f64)| (lo - x).max(x - hi);
        let excess = dist(d.minus).min(dist(d.plus)).max(z.im.abs());
        c.record(z, excess);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::IndicatorSet;

    fn unit_report() -> BoundReport {
        BoundReport::new(IndicatorSet::unit(), "unit")
    }

    #[test]
    fn exact_spectrum_passes() {
        let sp = Spectrum {
            mode: SpectrumMode::Triangular,
            values: vec![Complex64::new(1.0, 0.0); 6],
            weights: None,
            provenance: "unit".into(),
        };
        let v = verify_bounds(&sp, &unit_report()).unwrap();
        assert!(v.passed());
        assert!(!v.checks[2].ran);
    }

    #[test]
    fn shrunk_bound_reports_offender() {
        let sp = Spectrum {
            mode: SpectrumMode::Triangular,
            values: vec![Complex64::new(0.1, 0.0), Complex64::new(2.5, 0.0), Complex64::new(1.0, 0.0)],
            weights: None,
            provenance: "unit".into(),
        };
        let mut r = unit_report();
        r.triangular.hi = 2.0;
        let v = verify_bounds(&sp, &r).unwrap();
        assert!(!v.passed());
        let real = &v.checks[1];
        assert!(!real.passed);
        assert_eq!(real.worst.unwrap().value.re, 2.5);
        assert!(v.to_csv().contains("fail"));
    }

    #[test]
    fn complex_eigenvalue_outside_disc_fails() {
        let mut r = unit_report();
        r.disc = ComplexDisc::Radius(0.5);
        let sp = Spectrum {
            mode: SpectrumMode::Triangular,
            values: vec![Complex64::new(1.0, 0.7), Complex64::new(1.0, -0.7)],
            weights: None,
            provenance: "unit".into(),
        };
        assert!(!verify_bounds(&sp, &r).unwrap().checks[0].passed);
    }

    #[test]
    fn provenance_mismatch_is_config_error() {
        let sp = Spectrum { mode: SpectrumMode::Diagonal, values: vec![], weights: None, provenance: "other".into() };
        assert!(matches!(verify_bounds(&sp, &unit_report()), Err(Error::Config(_))));
    }

    #[test]
    fn diagonal_mode_checks_union() {
        let sp = Spectrum {
            mode: SpectrumMode::Diagonal,
            values: vec![Complex64::new(-0.75, 0.0), Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)],
            weights: None,
            provenance: "unit".into(),
        };
        let v = verify_bounds(&sp, &unit_report()).unwrap();
        assert!(!v.passed());
        assert_eq!(v.checks[0].worst.unwrap().value.re, 0.0);
    }
}
