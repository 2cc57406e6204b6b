use serde::{Deserialize, Serialize};

use crate::constants::DimensionalConstants;
use crate::error::{Error, Result};
use crate::radial::RadialGrid;

/// Which fixed-point map to iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Quartic damping `-(1+A_v)r⁴` and correction `(r²-r⁴)|Δv(0)|/(2n)`; needs `n ≥ 5`.
    #[serde(alias = "THM1", alias = "Thm1")]
    Thm1,
    /// No damping polynomial, correction `r²|Δv(0)|/(2n)`; needs rapidly decaying `Q`.
    #[serde(alias = "THM2", alias = "Thm2")]
    Thm2,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Thm1 => "thm1",
            Variant::Thm2 => "thm2",
        })
    }
}

/// Radial curvature profile `Q(r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QProfile {
    Constant { value: f64 },
    /// `δ·e^{-λr²}`
    Gaussian { delta: f64, lambda: f64 },
    /// `δ·e^{-λr⁴}`
    QuarticDecay { delta: f64, lambda: f64 },
    /// Piecewise-linear through `(r_k, q_k)`; must cover `[0, R_max]`.
    Tabulated { r: Vec<f64>, q: Vec<f64> },
}

impl QProfile {
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            QProfile::Tabulated { r: rs, q } => {
                let k = rs.partition_point(|&x| x <= r);
                if k == 0 {
                    return q[0];
                }
                if k >= rs.len() {
                    return q[q.len() - 1];
                }
                let s = (r - rs[k - 1]) / (rs[k] - rs[k - 1]);
                (1.0 - s) * q[k - 1] + s * q[k]
            }
            _ => self.log_eval(r).exp(),
        }
    }

    /// `log Q(r)`, evaluated without underflow for the closed-form profiles.
    pub fn log_eval(&self, r: f64) -> f64 {
        match *self {
            QProfile::Constant { value } => value.ln(),
            QProfile::Gaussian { delta, lambda } => delta.ln() - lambda * r * r,
            QProfile::QuarticDecay { delta, lambda } => delta.ln() - lambda * r.powi(4),
            QProfile::Tabulated { .. } => self.eval(r).ln(),
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(Error::Spec(format!("Q: {name} must be positive and finite, got {x}")))
            }
        };
        match self {
            QProfile::Constant { value } => positive("value", *value),
            QProfile::Gaussian { delta, lambda } | QProfile::QuarticDecay { delta, lambda } => {
                positive("delta", *delta)?;
                if !(lambda.is_finite() && *lambda >= 0.0) {
                    return Err(Error::Spec(format!("Q: lambda must be non-negative, got {lambda}")));
                }
                Ok(())
            }
            QProfile::Tabulated { r, q } => {
                if r.len() != q.len() || r.len() < 2 {
                    return Err(Error::Spec(
                        "Q table needs at least two (r, q) pairs of equal length".into(),
                    ));
                }
                if r[0] != 0.0 {
                    return Err(Error::Spec("Q table must start at r = 0".into()));
                }
                if r.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Spec("Q table radii must be strictly increasing".into()));
                }
                if q.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                    return Err(Error::Spec("Q table values must be finite and non-negative".into()));
                }
                Ok(())
            }
        }
    }
}

/// Even polynomial `P(r) = Σ_j a_j r^{2j}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RadialPolynomial {
    pub coeffs: Vec<f64>,
}

impl RadialPolynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn eval(&self, r: f64) -> f64 {
        let r2 = r * r;
        self.coeffs.iter().rev().fold(0.0, |acc, a| acc * r2 + a)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&a| a == 0.0)
    }

    /// Degree in `r`, ignoring trailing zero coefficients.
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&a| a != 0.0).map_or(0, |j| 2 * j)
    }
}

/// Outcome of the decay screen for the second variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// `(λ, Q·e^{λr²} grid-integrable)` for λ ∈ {1, 2, 4}.
    pub gaussian_moments: Vec<(f64, bool)>,
    pub admissible: bool,
}

/// Complete statement of one solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub n: u32,
    pub kappa: f64,
    pub q: QProfile,
    pub p: RadialPolynomial,
    pub variant: Variant,
    pub consts: DimensionalConstants,
}

impl ProblemSpec {
    pub fn new(n: u32, kappa: f64, q: QProfile, p: RadialPolynomial, variant: Variant) -> Result<Self> {
        if n < 3 {
            return Err(Error::Spec(format!("dimension must be at least 3, got {n}")));
        }
        if variant == Variant::Thm1 && n < 5 {
            return Err(Error::Spec(format!("the quartic-damped variant requires n >= 5, got {n}")));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::Spec(format!("kappa must be positive and finite, got {kappa}")));
        }
        q.validate()?;
        if q.eval(0.0) <= 0.0 {
            return Err(Error::Spec("Q(0) must be positive".into()));
        }
        if p.coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::Spec("P coefficients must be finite".into()));
        }
        if p.degree() > n as usize - 1 {
            return Err(Error::Spec(format!(
                "P has degree {} but at most n-1 = {} is allowed",
                p.degree(),
                n - 1
            )));
        }
        if variant == Variant::Thm2 && !p.is_zero() {
            return Err(Error::Spec("the second variant takes no polynomial P".into()));
        }
        let consts = DimensionalConstants::new(n)?;
        Ok(Self { n, kappa, q, p, variant, consts })
    }

    pub fn kappa_over_lambda1(&self) -> f64 {
        self.kappa / self.consts.lambda1
    }

    /// `log(Q·e^{nP})` at every node, after checking the hypotheses that can be
    /// checked on the grid.
    pub fn log_base_on(&self, grid: &RadialGrid) -> Result<Vec<f64>> {
        if grid.n() != self.n {
            return Err(Error::GridMismatch(format!(
                "grid built for n = {}, problem has n = {}",
                grid.n(),
                self.n
            )));
        }
        if let QProfile::Tabulated { r, .. } = &self.q {
            if r[r.len() - 1] < grid.r_max() {
                return Err(Error::Spec(format!(
                    "Q table ends at r = {} but the grid extends to {}",
                    r[r.len() - 1],
                    grid.r_max()
                )));
            }
        }
        let nf = self.n as f64;
        let log_base: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&r| self.q.log_eval(r) + nf * self.p.eval(r))
            .collect();
        if log_base.iter().any(|x| x.is_nan() || *x == f64::INFINITY) {
            return Err(Error::Spec("Q·e^{nP} is not finite on the grid".into()));
        }
        if self.variant == Variant::Thm1 {
            let sup = log_base.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if sup >= f64::MAX.ln() {
                return Err(Error::Spec("sup of Q·e^{nP} over the grid is not finite".into()));
            }
        }
        Ok(log_base)
    }

    /// Numeric proxy for `∫Q e^{λr²} < ∞`: the integrand must be finite and
    /// negligible (relative 1e-12) at `R_max` for λ ∈ {1, 2, 4}.
    pub fn admissibility(&self, grid: &RadialGrid) -> AdmissibilityReport {
        let nodes = grid.nodes();
        let last = nodes.len() - 1;
        let moments: Vec<(f64, bool)> = [1.0, 2.0, 4.0]
            .iter()
            .map(|&lambda| {
                let log_f: Vec<f64> = nodes
                    .iter()
                    .map(|&r| self.q.log_eval(r) + lambda * r * r)
                    .collect();
                let peak = log_f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let ok = peak.is_finite()
                    && peak < f64::MAX.ln()
                    && (log_f[last] == f64::NEG_INFINITY || log_f[last] < peak - 12.0 * 10f64.ln());
                (lambda, ok)
            })
            .collect();
        let admissible = moments.iter().all(|m| m.1);
        AdmissibilityReport { gaussian_moments: moments, admissible }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_requirements() {
        let q = QProfile::Constant { value: 24.0 };
        assert!(ProblemSpec::new(4, 1.0, q.clone(), RadialPolynomial::zero(), Variant::Thm1).is_err());
        assert!(ProblemSpec::new(5, 1.0, q.clone(), RadialPolynomial::zero(), Variant::Thm1).is_ok());
        assert!(ProblemSpec::new(3, 1.0, q.clone(), RadialPolynomial::zero(), Variant::Thm2).is_ok());
        assert!(ProblemSpec::new(2, 1.0, q, RadialPolynomial::zero(), Variant::Thm2).is_err());
    }

    #[test]
    fn q_zero_at_origin_rejected() {
        let q = QProfile::Tabulated { r: vec![0.0, 200.0], q: vec![0.0, 1.0] };
        assert!(matches!(
            ProblemSpec::new(3, 1.0, q, RadialPolynomial::zero(), Variant::Thm2),
            Err(Error::Spec(_))
        ));
        let q = QProfile::Constant { value: 0.0 };
        assert!(ProblemSpec::new(3, 1.0, q, RadialPolynomial::zero(), Variant::Thm2).is_err());
    }

    #[test]
    fn polynomial_degree_bound() {
        let q = QProfile::Constant { value: 1.0 };
        // r⁴ is allowed for n = 5, r⁶ is not
        let ok = RadialPolynomial::new(vec![0.0, 1.0, -1.0]);
        assert!(ProblemSpec::new(5, 1.0, q.clone(), ok, Variant::Thm1).is_ok());
        let bad = RadialPolynomial::new(vec![0.0, 0.0, 0.0, 1.0]);
        assert!(ProblemSpec::new(5, 1.0, q, bad, Variant::Thm1).is_err());
        assert_eq!(RadialPolynomial::new(vec![1.0, 2.0, 3.0]).eval(2.0), 1.0 + 8.0 + 48.0);
    }

    #[test]
    fn tabulated_profile_interpolates_and_must_cover_grid() {
        let q = QProfile::Tabulated { r: vec![0.0, 1.0, 50.0], q: vec![2.0, 1.0, 0.0] };
        assert_eq!(q.eval(0.5), 1.5);
        let spec = ProblemSpec::new(3, 1.0, q, RadialPolynomial::zero(), Variant::Thm2).unwrap();
        let grid = RadialGrid::new(3, 100.0, 64, 2.0).unwrap();
        assert!(spec.log_base_on(&grid).is_err());
    }

    #[test]
    fn admissibility_screen() {
        let grid = RadialGrid::new(3, 100.0, 256, 2.0).unwrap();
        let quartic = QProfile::QuarticDecay { delta: 2.0, lambda: 1.0 };
        let spec = ProblemSpec::new(3, 1.0, quartic, RadialPolynomial::zero(), Variant::Thm2).unwrap();
        assert!(spec.admissibility(&grid).admissible);
        let gauss = QProfile::Gaussian { delta: 1.0, lambda: 1.0 };
        let spec = ProblemSpec::new(3, 1.0, gauss, RadialPolynomial::zero(), Variant::Thm2).unwrap();
        let report = spec.admissibility(&grid);
        assert!(!report.admissible);
        assert!(!report.gaussian_moments[0].1 && !report.gaussian_moments[2].1);
    }

    #[test]
    fn variant_serde_names() {
        let v: Variant = serde_json::from_str("\"THM1\"").unwrap();
        assert_eq!(v, Variant::Thm1);
        assert_eq!(serde_json::to_string(&Variant::Thm2).unwrap(), "\"thm2\"");
    }
}
