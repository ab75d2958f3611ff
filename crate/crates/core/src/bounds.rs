//! Closed-form large-deviation bounds on `P(|H(G) - <H>| > t)` and the
//! q-Potts merge threshold.
//!
//! Every bound is returned raw (it may exceed 1) and clamped to `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hoeffding constant of the edge-count tail `P(m - <m> < -Nt) <= exp(-t^2/lambda^2)`.
pub const LAMBDA_HOEFFDING: f64 = 0.5;
/// Denominator constant of the sparse modularity bound.
pub const MODULARITY_SPARSE_CONSTANT: f64 = 25.0 / 2.0;
/// Conditional-bound width used by the non-sparse Chung–Lu modularity bound.
pub const SIGMA_CL_MODULARITY: f64 = 5.0 / 4.0;
/// Grid size for [`best_mu`].
pub const MU_GRID_POINTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    /// General ensemble: `2 exp(-t^2/c^2)`.
    T1,
    /// K-bound ensemble: `2 exp(-N t^2 / (8 K^2 c^2))`.
    T3,
    /// Perturbation of a K-bound graph:
    /// `2 exp(-N t^2 / (4 [c^2 (2K^2 p0^2 + K p0) + K c t / 3]))`.
    T4,
    /// Sparse modularity: `2 exp(-N t^2 / ((25/2) K^2))`.
    T5,
    /// Non-sparse ER modularity:
    /// `2 exp(-mu^2 N^2 - t^2) + 2 exp(-t^2 N^2 (p - mu)^2)`.
    T6,
    /// Non-sparse Chung–Lu modularity:
    /// `2 exp(-mu^2 N^(2b) / (2 lambda^2) - t^2 / (2 sigma^2)) + 2 exp(-t^2 (B/2 - mu)^2 N^(2b) / 2)`.
    T7,
    /// Non-sparse ER bipartitioning, deviations larger than `N t`: `2 exp(-N^2 t^2)`.
    T8,
    /// K-bound ER bipartitioning: `2 exp(-N t^2 / (8 K^2))`.
    T9,
    /// Non-sparse ER q-Potts; same form as T6.
    #[serde(rename = "T10-ER")]
    T10Er,
    /// Non-sparse Chung–Lu q-Potts; T7 form with `sigma = J/2`.
    #[serde(rename = "T10-CL")]
    T10Cl,
    /// K-bound q-Potts: `2 exp(-N t^2 / (8 K^2))`.
    T11,
    /// Edge-count lower tail: `exp(-t^2 / lambda^2)`.
    Lemma2,
}

impl Theorem {
    pub fn has_free_mu(self) -> bool {
        matches!(self, Theorem::T6 | Theorem::T7 | Theorem::T10Er | Theorem::T10Cl)
    }

    fn er_divide(self) -> bool {
        matches!(self, Theorem::T6 | Theorem::T10Er)
    }
}

/// Named parameters; each theorem reads only the ones it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoundParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_hoeffding: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_star: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSpec {
    pub theorem: Theorem,
    #[serde(default)]
    pub params: BoundParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub raw: f64,
    pub clamped: f64,
}

impl BoundValue {
    fn new(raw: f64) -> Self {
        BoundValue {
            raw,
            clamped: raw.clamp(0.0, 1.0),
        }
    }
}

fn need<T: Copy>(v: Option<T>, name: &str, th: Theorem) -> Result<T> {
    v.ok_or_else(|| Error::Spec(format!("{th:?} needs parameter {name}")))
}

fn probability(v: f64, name: &str) -> Result<f64> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(Error::Spec(format!("{name} = {v} is not a probability")))
    }
}

impl BoundSpec {
    pub fn new(theorem: Theorem, params: BoundParams) -> Self {
        BoundSpec { theorem, params }
    }

    fn n(&self) -> Result<f64> {
        let n = need(self.params.n, "n", self.theorem)?;
        if n < 2 {
            return Err(Error::Spec(format!("N must be >= 2, got {n}")));
        }
        Ok(n as f64)
    }

    fn k(&self) -> Result<f64> {
        let k = need(self.params.k, "k", self.theorem)?;
        if k < 1 {
            return Err(Error::Spec("K must be >= 1".into()));
        }
        Ok(k as f64)
    }

    fn c(&self) -> Result<f64> {
        let c = need(self.params.c, "c", self.theorem)?;
        if !(c > 0.0) {
            return Err(Error::Spec(format!("c must be > 0, got {c}")));
        }
        Ok(c)
    }

    fn lambda(&self) -> f64 {
        self.params.lambda_hoeffding.unwrap_or(LAMBDA_HOEFFDING)
    }

    fn sigma(&self) -> Result<f64> {
        match (self.params.sigma, self.theorem) {
            (Some(s), _) => Ok(s),
            (None, Theorem::T7) => Ok(SIGMA_CL_MODULARITY),
            (None, Theorem::T10Cl) => Ok(need(self.params.j, "j (or sigma)", self.theorem)? / 2.0),
            (None, th) => Err(Error::Spec(format!("{th:?} needs parameter sigma"))),
        }
    }

    /// Open interval the free `mu` must lie in.
    pub fn mu_interval(&self) -> Result<(f64, f64)> {
        let hi = if self.theorem.er_divide() {
            probability(need(self.params.p, "p", self.theorem)?, "p")?
        } else if self.theorem.has_free_mu() {
            need(self.params.b, "b", self.theorem)? / 2.0
        } else {
            return Err(Error::Spec(format!("{:?} has no free mu", self.theorem)));
        };
        if !(hi > 0.0) {
            return Err(Error::Spec(format!("empty interval for mu: (0, {hi})")));
        }
        Ok((0.0, hi))
    }

    fn mu(&self) -> Result<f64> {
        let mu = need(self.params.mu, "mu", self.theorem)?;
        let (lo, hi) = self.mu_interval()?;
        if !(mu > lo && mu < hi) {
            return Err(Error::Spec(format!("mu = {mu} must lie in ({lo}, {hi})")));
        }
        Ok(mu)
    }

    fn with_mu(&self, mu: f64) -> BoundSpec {
        let mut s = self.clone();
        s.params.mu = Some(mu);
        s
    }

    /// Raw right-hand side at deviation `t`.
    pub fn raw(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::Spec(format!("t must be >= 0, got {t}")));
        }
        let t2 = t * t;
        let v = match self.theorem {
            Theorem::T1 => {
                let c = self.c()?;
                2.0 * (-t2 / (c * c)).exp()
            }
            Theorem::T3 => {
                let (c, n, k) = (self.c()?, self.n()?, self.k()?);
                2.0 * (-n * t2 / (8.0 * k * k * c * c)).exp()
            }
            Theorem::T4 => {
                let (c, n, k) = (self.c()?, self.n()?, self.k()?);
                let p0 = probability(need(self.params.p0, "p0", self.theorem)?, "p0")?;
                let denom = 4.0 * (c * c * (2.0 * k * k * p0 * p0 + k * p0) + k * c * t / 3.0);
                if denom > 0.0 {
                    2.0 * (-n * t2 / denom).exp()
                } else {
                    // p0 = 0 and t = 0: no perturbation, no deviation
                    if t > 0.0 {
                        0.0
                    } else {
                        2.0
                    }
                }
            }
            Theorem::T5 => {
                let (n, k) = (self.n()?, self.k()?);
                2.0 * (-n * t2 / (MODULARITY_SPARSE_CONSTANT * k * k)).exp()
            }
            Theorem::T6 | Theorem::T10Er => {
                let (n, mu) = (self.n()?, self.mu()?);
                let p = probability(need(self.params.p, "p", self.theorem)?, "p")?;
                2.0 * (-mu * mu * n * n - t2).exp() + 2.0 * (-t2 * n * n * (p - mu).powi(2)).exp()
            }
            Theorem::T7 | Theorem::T10Cl => {
                let (n, mu) = (self.n()?, self.mu()?);
                let b = need(self.params.b, "b", self.theorem)?;
                let beta = need(self.params.beta, "beta", self.theorem)?;
                if !(beta > 0.0) {
                    return Err(Error::Spec(format!("beta must be > 0, got {beta}")));
                }
                let lambda = self.lambda();
                let sigma = self.sigma()?;
                let n2b = n.powf(2.0 * beta);
                2.0 * (-mu * mu * n2b / (2.0 * lambda * lambda) - t2 / (2.0 * sigma * sigma)).exp()
                    + 2.0 * (-t2 * (b / 2.0 - mu).powi(2) * n2b / 2.0).exp()
            }
            Theorem::T8 => {
                let n = self.n()?;
                2.0 * (-n * n * t2).exp()
            }
            Theorem::T9 | Theorem::T11 => {
                let (n, k) = (self.n()?, self.k()?);
                2.0 * (-n * t2 / (8.0 * k * k)).exp()
            }
            Theorem::Lemma2 => {
                let l = self.lambda();
                (-t2 / (l * l)).exp()
            }
        };
        Ok(v)
    }
}

/// Evaluates `spec` at deviation `t`.
pub fn bound_eval(spec: &BoundSpec, t: f64) -> Result<BoundValue> {
    Ok(BoundValue::new(spec.raw(t)?))
}

/// Grid search over `mu` in its open interval (`MU_GRID_POINTS` interior
/// points) for the smallest raw bound at `t`. Returns `(mu, raw bound)`.
pub fn best_mu(spec: &BoundSpec, t: f64) -> Result<(f64, f64)> {
    best_mu_on_grid(spec, t, MU_GRID_POINTS)
}

pub fn best_mu_on_grid(spec: &BoundSpec, t: f64, points: usize) -> Result<(f64, f64)> {
    let (lo, hi) = spec.mu_interval()?;
    let mut best = (f64::NAN, f64::INFINITY);
    for i in 1..=points {
        let mu = lo + (hi - lo) * i as f64 / (points + 1) as f64;
        let v = spec.with_mu(mu).raw(t)?;
        if v < best.1 {
            best = (mu, v);
        }
    }
    Ok(best)
}

/// Two planted communities: sizes and inter-community edge count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    pub j: f64,
    pub n1: usize,
    pub n2: usize,
    pub m12: usize,
}

impl ThresholdSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n1 < 1 || self.n2 < 1 {
            return Err(Error::Spec("community sizes must be >= 1".into()));
        }
        if self.m12 > self.n1 * self.n2 {
            return Err(Error::Spec(format!(
                "m12 = {} exceeds n1 * n2 = {}",
                self.m12,
                self.n1 * self.n2
            )));
        }
        Ok(())
    }
}

/// Outlink-density threshold `J m12 / (2 n1 n2)`.
pub fn gamma_star(th: &ThresholdSpec) -> f64 {
    th.j * th.m12 as f64 / (2.0 * th.n1 as f64 * th.n2 as f64)
}
