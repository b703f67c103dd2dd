use std::fmt::Write as _;

use super::indicators::IndicatorSet;
use crate::error::{Error, Result};

/// Real-eigenvalue bounds of the block triangular preconditioned operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangularBounds {
    pub lo: f64,
    pub hi: f64,
    /// Real eigenvalues inside this window are not covered by [lo, hi].
    pub window: (f64, f64),
}

/// Disc centered at 1 that contains every complex eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ComplexDisc {
    Radius(f64),
    AllReal,
}

impl ComplexDisc {
    pub fn radius(&self) -> Option<f64> {
        match self {
            Self::Radius(r) => Some(*r),
            Self::AllReal => None,
        }
    }
}

/// Eigenvalue intervals of the block diagonal preconditioned operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagonalBounds {
    pub minus: (f64, f64),
    pub plus: (f64, f64),
}

impl DiagonalBounds {
    pub fn contains(&self, x: f64, slack: f64) -> bool {
        (x >= self.minus.0 - slack && x <= self.minus.1 + slack) || (x >= self.plus.0 - slack && x <= self.plus.1 + slack)
    }
}

/// Coefficients of a monic cubic; the sign convention depends on the caller.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CubicCoefficients {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

fn ratio(ind: &IndicatorSet) -> f64 {
    ind.r.min / (ind.a.max + ind.r.min + ind.d.max)
}

pub fn triangular_real_bounds(ind: &IndicatorSet) -> TriangularBounds {
    let q = ratio(ind);
    TriangularBounds {
        lo: ind.e.min.min(ind.a.min).min(q),
        hi: ind.a.max + ind.s.max + ind.x.max,
        window: (ind.a.min.min(q), ind.a.max + ind.s.max),
    }
}

pub fn triangular_complex_disc(ind: &IndicatorSet) -> ComplexDisc {
    if ind.d.min >= 1.0 {
        ComplexDisc::AllReal
    } else {
        ComplexDisc::Radius((1.0 - ind.d.min).sqrt())
    }
}

/// ρ_min for one eigenvector with squared block norms x2, y2, z2 in the
/// scaled variables.
pub fn rho_min(ind: &IndicatorSet, x2: f64, y2: f64, z2: f64) -> f64 {
    (ind.a.min * x2 + ind.d.min * y2 + ind.e.min * z2) / (y2 + ind.e.min * z2)
}

/// p(x) = x³ - a₂x² + a₁x - a₀ with the coefficients at the given indicator
/// values.
pub fn triangular_cubic(ga: f64, gs: f64, gx: f64, gd: f64, ge: f64, gr: f64, gk: f64) -> CubicCoefficients {
    CubicCoefficients {
        c2: gx + gs + ga,
        c1: ga * gx + gk + ge * gs + gd * ga + gr,
        c0: ga * gk + ge * ga * gd + ge * gr,
    }
}

/// π(λ) = λ³ - â₂λ² - â₁λ + â₀.
pub fn diagonal_cubic(ga: f64, gd: f64, ge: f64, gr: f64, gk: f64) -> CubicCoefficients {
    CubicCoefficients {
        c2: ga + ge - gd,
        c1: gr + gk + ge * gd + ga * gd - ge * ga,
        c0: ga * gk + ge * gr + ge * ga * gd,
    }
}

/// (α, β) with p(x) < 0 on (0, α) and p(x) > 0 for x > β, where
/// p(x) = x³ - a₂x² + a₁x - a₀.
pub fn cubic_bracket(a2: f64, a1: f64, a0: f64) -> Result<(f64, f64)> {
    if !(a2 > 0.0 && a1 > 0.0 && a0 > 0.0) {
        return Err(Error::Contract(format!("cubic coefficients must be positive, got ({a2}, {a1}, {a0})")));
    }
    let q = a0 / a1;
    Ok((a2.min(q), a2.max(q)))
}

pub fn diagonal_bounds(ind: &IndicatorSet) -> DiagonalBounds {
    let rk = (ind.r.max + ind.k.max).sqrt();
    DiagonalBounds {
        minus: (-ind.d.max - rk, -ind.s.min / (ind.a.max + ind.s.min)),
        plus: (
            ind.e.min.min(ind.a.min),
            (ind.a.max + ind.e.max + rk).max((ind.r.max + ind.k.max + ind.d.max * (ind.e.max + ind.a.max)).sqrt()),
        ),
    }
}

/// Every a priori bound derived from one indicator set.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub indicators: IndicatorSet,
    pub triangular: TriangularBounds,
    pub disc: ComplexDisc,
    pub diagonal: DiagonalBounds,
    /// Cubic coefficients at the indicator minima and maxima.
    pub cubic: [CubicCoefficients; 2],
    pub pi: [CubicCoefficients; 2],
    pub provenance: String,
    pub note: Option<String>,
}

impl BoundReport {
    pub fn new(indicators: IndicatorSet, provenance: impl Into<String>) -> Self {
        let g = &indicators;
        let at = |f: fn(&crate::linalg::EigenRange) -> f64| {
            (f(&g.a), f(&g.s), f(&g.x), f(&g.d), f(&g.e), f(&g.r), f(&g.k))
        };
        let lo = at(|r| r.min);
        let hi = at(|r| r.max);
        let tri = |t: (f64, f64, f64, f64, f64, f64, f64)| triangular_cubic(t.0, t.1, t.2, t.3, t.4, t.5, t.6);
        let dia = |t: (f64, f64, f64, f64, f64, f64, f64)| diagonal_cubic(t.0, t.3, t.4, t.5, t.6);
        Self {
            indicators,
            triangular: triangular_real_bounds(g),
            disc: triangular_complex_disc(g),
            diagonal: diagonal_bounds(g),
            cubic: [tri(lo), tri(hi)],
            pi: [dia(lo), dia(hi)],
            provenance: provenance.into(),
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    /// `quantity,value` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("quantity,value\n");
        for (name, g) in self.indicators.ranges() {
            let _ = writeln!(s, "gamma_{name}_min,{:e}", g.min);
            let _ = writeln!(s, "gamma_{name}_max,{:e}", g.max);
        }
        let t = &self.triangular;
        let d = &self.diagonal;
        for (k, v) in [
            ("tri_lo", t.lo),
            ("tri_hi", t.hi),
            ("tri_window_lo", t.window.0),
            ("tri_window_hi", t.window.1),
            ("tri_radius", self.disc.radius().unwrap_or(f64::NAN)),
            ("diag_minus_lo", d.minus.0),
            ("diag_minus_hi", d.minus.1),
            ("diag_plus_lo", d.plus.0),
            ("diag_plus_hi", d.plus.1),
        ] {
            let _ = writeln!(s, "{k},{v:e}");
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "bounds for {}", self.provenance);
        if let Some(n) = &self.note {
            let _ = writeln!(s, "note: {n}");
        }
        let _ = writeln!(s);
        let _ = write!(s, "{}", self.indicators);
        let _ = writeln!(s);
        let t = &self.triangular;
        let d = &self.diagonal;
        let _ = writeln!(s, "{:<24}| {:<44}", "operator", "bounds");
        let _ = writeln!(s, "{:-<24}+{:-<45}", "", "");
        let _ = writeln!(s, "{:<24}| [{:.4e}, {:.4e}]", "triangular (real)", t.lo, t.hi);
        let _ = writeln!(s, "{:<24}| [{:.4e}, {:.4e}]", "  exclusion window", t.window.0, t.window.1);
        match self.disc {
            ComplexDisc::Radius(r) => {
                let _ = writeln!(s, "{:<24}| |λ - 1| <= {:.4}", "triangular (complex)", r);
            }
            ComplexDisc::AllReal => {
                let _ = writeln!(s, "{:<24}| all real", "triangular (complex)");
            }
        }
        let _ = writeln!(
            s,
            "{:<24}| [{:.4e}, {:.4e}] U [{:.4e}, {:.4e}]",
            "diagonal", d.minus.0, d.minus.1, d.plus.0, d.plus.1
        );
        for (label, c) in [("p at minima", self.cubic[0]), ("p at maxima", self.cubic[1])] {
            let _ = writeln!(s, "{label:<24}| a2={:.4e} a1={:.4e} a0={:.4e}", c.c2, c.c1, c.c0);
        }
        for (label, c) in [("π at minima", self.pi[0]), ("π at maxima", self.pi[1])] {
            let _ = writeln!(s, "{label:<24}| a2={:.4e} a1={:.4e} a0={:.4e}", c.c2, c.c1, c.c0);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::EigenRange;
    use proptest::prelude::*;

    fn p(a2: f64, a1: f64, a0: f64, x: f64) -> f64 {
        ((x - a2) * x + a1) * x - a0
    }

    #[test]
    fn unit_indicators() {
        let ind = IndicatorSet::unit();
        let t = triangular_real_bounds(&ind);
        assert_eq!((t.lo, t.hi), (0.5, 3.0));
        let d = diagonal_bounds(&ind);
        assert_eq!(d.minus, (-1.0, -0.5));
        assert_eq!(d.plus, (1.0, 3.0));
    }

    #[test]
    fn disc_radius_and_all_real() {
        let mut ind = IndicatorSet::unit();
        ind.d = EigenRange::new(0.75, 0.8);
        assert_eq!(triangular_complex_disc(&ind), ComplexDisc::Radius(0.5));
        ind.d = EigenRange::new(1.0, 1.0);
        assert_eq!(triangular_complex_disc(&ind), ComplexDisc::AllReal);
        ind.d = EigenRange::new(3.1e-3, 0.5);
        let r = triangular_complex_disc(&ind).radius().unwrap();
        assert!((r - 0.998).abs() < 5e-4);
    }

    #[test]
    fn bracket_examples() {
        assert_eq!(cubic_bracket(1.0, 1.0, 1.0).unwrap(), (1.0, 1.0));
        assert_eq!(cubic_bracket(3.0, 2.0, 4.0).unwrap(), (2.0, 3.0));
        assert!(matches!(cubic_bracket(1.0, 0.0, 1.0), Err(Error::Contract(_))));
        for x in [0.1, 0.5, 0.99] {
            assert!(p(1.0, 1.0, 1.0, x) < 0.0);
        }
        for x in [1.01, 2.0, 9.0] {
            assert!(p(1.0, 1.0, 1.0, x) > 0.0);
        }
    }

    fn range() -> impl Strategy<Value = EigenRange> {
        (1e-4f64..2.0, 0.0f64..2.0).prop_map(|(a, w)| EigenRange::new(a, a + w))
    }

    fn semi() -> impl Strategy<Value = EigenRange> {
        (0.0f64..1.5, 0.0f64..2.0).prop_map(|(a, w)| EigenRange::new(a, a + w))
    }

    fn indicators() -> impl Strategy<Value = IndicatorSet> {
        (range(), range(), range(), semi(), range(), range(), semi())
            .prop_map(|(a, s, x, d, e, r, k)| IndicatorSet { a, s, x, d, e, r, k })
    }

    fn widen(g: EigenRange, lo: f64, hi: f64, keep_positive: bool) -> EigenRange {
        let min = if keep_positive { g.min * (1.0 - lo) } else { (g.min - lo).max(0.0) };
        EigenRange::new(min, g.max + hi)
    }

    proptest! {
        #[test]
        fn bracket_sign_pattern(a2 in 1e-3f64..10.0, a1 in 1e-3f64..10.0, a0 in 1e-3f64..10.0) {
            let (alpha, beta) = cubic_bracket(a2, a1, a0).unwrap();
            for i in 1..50 {
                let x = alpha * i as f64 / 50.0;
                prop_assert!(p(a2, a1, a0, x) < 0.0);
                let y = beta * (1.0 + 9.0 * i as f64 / 50.0);
                prop_assert!(p(a2, a1, a0, y) > 0.0);
            }
        }

        #[test]
        fn widening_never_shrinks(ind in indicators(), lo in 0.0f64..0.5, hi in 0.0f64..1.0, which in 0usize..7) {
            let mut w = ind;
            match which {
                0 => w.a = widen(ind.a, lo, hi, true),
                1 => w.s = widen(ind.s, lo, hi, true),
                2 => w.x = widen(ind.x, lo, hi, true),
                3 => w.d = widen(ind.d, lo, hi, false),
                4 => w.e = widen(ind.e, lo, hi, true),
                5 => w.r = widen(ind.r, lo, hi, true),
                _ => w.k = widen(ind.k, lo, hi, false),
            }
            let (t0, t1) = (triangular_real_bounds(&ind), triangular_real_bounds(&w));
            prop_assert!(t1.lo <= t0.lo && t1.hi >= t0.hi);
            let (d0, d1) = (diagonal_bounds(&ind), diagonal_bounds(&w));
            prop_assert!(d1.minus.0 <= d0.minus.0 && d1.minus.1 >= d0.minus.1);
            prop_assert!(d1.plus.0 <= d0.plus.0 && d1.plus.1 >= d0.plus.1);
        }

        #[test]
        fn triangular_hi_is_three_for_unit_a_s_x(d in semi(), e in range(), r in range(), k in semi()) {
            let one = EigenRange::new(1.0, 1.0);
            let ind = IndicatorSet { a: one, s: one, x: one, d, e, r, k };
            prop_assert_eq!(triangular_real_bounds(&ind).hi, 3.0);
        }
    }
}
