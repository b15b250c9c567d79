//! GBM dynamics, affine revenue streams, and adapters for the named
//! literature models.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_finite, Error, Result};

/// Geometric Brownian motion `dx = mu x dt + sigma x dB` discounted at `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GbmParams {
    pub r: f64,
    pub mu: f64,
    pub sigma: f64,
}

impl GbmParams {
    pub fn new(r: f64, mu: f64, sigma: f64) -> Result<Self> {
        let g = GbmParams { r, mu, sigma };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        require_finite("r", self.r)?;
        require_finite("mu", self.mu)?;
        require_finite("sigma", self.sigma)?;
        if self.r <= self.mu.max(0.0) {
            return Err(invalid(
                "r",
                format!("need r > max(mu, 0), got r={} mu={}", self.r, self.mu),
            ));
        }
        if self.sigma < 0.0 {
            return Err(invalid("sigma", format!("must be >= 0, got {}", self.sigma)));
        }
        Ok(())
    }

    /// `r - mu`, the effective discount rate of a stream linear in the state.
    pub fn yield_gap(&self) -> f64 {
        self.r - self.mu
    }
}

/// Revenue stream `e^{-rt} (a x_t + b)`. A capitalized cost `I` enters as
/// `b = -r I`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineStream {
    pub a: f64,
    pub b: f64,
}

impl AffineStream {
    pub const fn new(a: f64, b: f64) -> Self {
        AffineStream { a, b }
    }

    /// Componentwise weak dominance, which implies `self >= other` at every
    /// positive state.
    pub fn dominates(&self, other: &AffineStream) -> bool {
        self.a >= other.a && self.b >= other.b
    }

    pub fn minus(&self, other: &AffineStream) -> AffineStream {
        AffineStream::new(self.a - other.a, self.b - other.b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Firm {
    One,
    Two,
}

impl Firm {
    pub const BOTH: [Firm; 2] = [Firm::One, Firm::Two];

    pub fn idx(self) -> usize {
        match self {
            Firm::One => 0,
            Firm::Two => 1,
        }
    }

    pub fn other(self) -> Firm {
        match self {
            Firm::One => Firm::Two,
            Firm::Two => Firm::One,
        }
    }
}

/// The four revenue streams of each firm: before any investment (`s0`),
/// as sole investor (`s_l`), after the rival invested alone (`s_f`), and
/// after both invested (`s_b`).
///
/// Firm 2 is the weaker one: its gains from investing, relative to the
/// laggard stream, are componentwise no larger than firm 1's.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineStreamModel {
    gbm: GbmParams,
    s0: [AffineStream; 2],
    s_l: [AffineStream; 2],
    s_f: [AffineStream; 2],
    s_b: [AffineStream; 2],
}

fn stream_label(s: &AffineStream) -> String {
    format!("(a={}, b={})", s.a, s.b)
}

impl AffineStreamModel {
    pub fn new(
        gbm: GbmParams,
        s0: [AffineStream; 2],
        s_l: [AffineStream; 2],
        s_f: [AffineStream; 2],
        s_b: [AffineStream; 2],
    ) -> Result<Self> {
        gbm.validate()?;
        for s in s0.iter().chain(&s_l).chain(&s_f).chain(&s_b) {
            require_finite("stream.a", s.a)?;
            require_finite("stream.b", s.b)?;
        }
        for f in Firm::BOTH {
            let i = f.idx();
            let n = i + 1;
            if !s_l[i].dominates(&s_b[i]) {
                return Err(Error::InvalidOrdering(format!(
                    "sL[{n}] >= sB[{n}] fails: {} vs {}",
                    stream_label(&s_l[i]),
                    stream_label(&s_b[i])
                )));
            }
            if !s0[i].dominates(&s_f[i]) {
                return Err(Error::InvalidOrdering(format!(
                    "s0[{n}] >= sF[{n}] fails: {} vs {}",
                    stream_label(&s0[i]),
                    stream_label(&s_f[i])
                )));
            }
        }
        let gb = |i: usize| s_b[i].minus(&s_f[i]);
        let gl = |i: usize| s_l[i].minus(&s_f[i]);
        if !gb(0).dominates(&gb(1)) {
            return Err(Error::InvalidOrdering(format!(
                "sB[2]-sF[2] <= sB[1]-sF[1] fails: {} vs {}",
                stream_label(&gb(1)),
                stream_label(&gb(0))
            )));
        }
        if !gl(0).dominates(&gl(1)) {
            return Err(Error::InvalidOrdering(format!(
                "sL[2]-sF[2] <= sL[1]-sF[1] fails: {} vs {}",
                stream_label(&gl(1)),
                stream_label(&gl(0))
            )));
        }
        Ok(AffineStreamModel {
            gbm,
            s0,
            s_l,
            s_f,
            s_b,
        })
    }

    /// Both firms share the same four streams.
    pub fn symmetric(
        gbm: GbmParams,
        s0: AffineStream,
        s_l: AffineStream,
        s_f: AffineStream,
        s_b: AffineStream,
    ) -> Result<Self> {
        Self::new(gbm, [s0; 2], [s_l; 2], [s_f; 2], [s_b; 2])
    }

    pub fn gbm(&self) -> &GbmParams {
        &self.gbm
    }

    pub fn s0(&self, f: Firm) -> AffineStream {
        self.s0[f.idx()]
    }

    pub fn s_l(&self, f: Firm) -> AffineStream {
        self.s_l[f.idx()]
    }

    pub fn s_f(&self, f: Firm) -> AffineStream {
        self.s_f[f.idx()]
    }

    pub fn s_b(&self, f: Firm) -> AffineStream {
        self.s_b[f.idx()]
    }

    /// Same streams under different dynamics. Used for the deterministic
    /// limit and for parameter sweeps.
    pub fn with_gbm(&self, gbm: GbmParams) -> Result<Self> {
        Self::new(gbm, self.s0, self.s_l, self.s_f, self.s_b)
    }

    /// A rival's entry leaves a non-investor's revenue unchanged.
    pub fn is_market_entry(&self) -> bool {
        self.s0 == self.s_f
    }

    /// Largest capitalized cost magnitude `|b|/r` over all streams; the
    /// natural payoff scale for tolerances.
    pub fn cost_scale(&self) -> f64 {
        self.s0
            .iter()
            .chain(&self.s_l)
            .chain(&self.s_f)
            .chain(&self.s_b)
            .map(|s| s.b.abs() / self.gbm.r)
            .fold(0.0, f64::max)
    }

    /// Recovers Pawlina-Kort parameters when the streams have exactly that
    /// shape.
    pub fn as_pawlina_kort(&self) -> Option<PawlinaKortParams> {
        let r = self.gbm.r;
        let [a, b] = [0, 1];
        let same_a = |s: &[AffineStream; 2]| s[a].a == s[b].a;
        if !(same_a(&self.s0) && same_a(&self.s_l) && same_a(&self.s_f) && same_a(&self.s_b)) {
            return None;
        }
        if self.s0.iter().chain(&self.s_f).any(|s| s.b != 0.0) {
            return None;
        }
        if self.s_l[a].b != self.s_b[a].b || self.s_l[b].b != self.s_b[b].b {
            return None;
        }
        let p = PawlinaKortParams {
            r,
            mu: self.gbm.mu,
            sigma: self.gbm.sigma,
            d00: self.s0[a].a,
            d01: self.s_f[a].a,
            d10: self.s_l[a].a,
            d11: self.s_b[a].a,
            i1: -self.s_l[a].b / r,
            i2: -self.s_l[b].b / r,
        };
        p.validate().ok().map(|_| p)
    }
}

/// Roots of `sigma^2/2 b(b-1) + mu b - r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaRoots {
    pub beta1: f64,
    /// Absent in the deterministic limit `sigma = 0`.
    pub beta2: Option<f64>,
}

impl BetaRoots {
    pub fn residual(g: &GbmParams, beta: f64) -> f64 {
        0.5 * g.sigma * g.sigma * beta * (beta - 1.0) + g.mu * beta - g.r
    }
}

pub fn beta_roots(g: &GbmParams) -> Result<BetaRoots> {
    g.validate()?;
    if g.sigma == 0.0 {
        if g.mu <= 0.0 {
            return Err(Error::DegenerateDynamics(format!(
                "sigma = 0 needs mu > 0, got mu={}",
                g.mu
            )));
        }
        return Ok(BetaRoots {
            beta1: g.r / g.mu,
            beta2: None,
        });
    }
    // qa b^2 + qb b + qc = 0 with qc < 0, so the roots have opposite signs.
    let qa = 0.5 * g.sigma * g.sigma;
    let qb = g.mu - qa;
    let qc = -g.r;
    let disc = (qb * qb - 4.0 * qa * qc).sqrt();
    // Avoid cancellation: take the large-magnitude root from the sign of qb.
    let sgn = if qb >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (qb + sgn * disc);
    let (r1, r2) = (q / qa, qc / q);
    let (beta1, beta2) = if r1 > r2 { (r1, r2) } else { (r2, r1) };
    Ok(BetaRoots {
        beta1,
        beta2: Some(beta2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PawlinaKortParams {
    pub r: f64,
    pub mu: f64,
    pub sigma: f64,
    #[serde(rename = "D00")]
    pub d00: f64,
    #[serde(rename = "D01")]
    pub d01: f64,
    #[serde(rename = "D10")]
    pub d10: f64,
    #[serde(rename = "D11")]
    pub d11: f64,
    #[serde(rename = "I1")]
    pub i1: f64,
    #[serde(rename = "I2")]
    pub i2: f64,
}

impl PawlinaKortParams {
    pub fn gbm(&self) -> GbmParams {
        GbmParams {
            r: self.r,
            mu: self.mu,
            sigma: self.sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.gbm().validate()?;
        for (n, v) in [
            ("D00", self.d00),
            ("D01", self.d01),
            ("D10", self.d10),
            ("D11", self.d11),
            ("I1", self.i1),
            ("I2", self.i2),
        ] {
            require_finite(n, v)?;
        }
        if self.d10 < self.d11 {
            return Err(Error::InvalidOrdering(format!(
                "D10 >= D11 fails: {} < {}",
                self.d10, self.d11
            )));
        }
        if self.d00 < self.d01 {
            return Err(Error::InvalidOrdering(format!(
                "D00 >= D01 fails: {} < {}",
                self.d00, self.d01
            )));
        }
        if self.i1 <= 0.0 {
            return Err(invalid("I1", format!("must be > 0, got {}", self.i1)));
        }
        if self.i2 < self.i1 {
            return Err(Error::InvalidOrdering(format!(
                "I2 >= I1 fails: {} < {}",
                self.i2, self.i1
            )));
        }
        Ok(())
    }

    pub fn cost(&self, f: Firm) -> f64 {
        match f {
            Firm::One => self.i1,
            Firm::Two => self.i2,
        }
    }
}

pub fn from_pawlina_kort(p: &PawlinaKortParams) -> Result<AffineStreamModel> {
    p.validate()?;
    let r = p.r;
    let s = |d: f64| AffineStream::new(d, 0.0);
    let c = |d: f64, i: f64| AffineStream::new(d, -r * i);
    AffineStreamModel::new(
        p.gbm(),
        [s(p.d00); 2],
        [c(p.d10, p.i1), c(p.d10, p.i2)],
        [s(p.d01); 2],
        [c(p.d11, p.i1), c(p.d11, p.i2)],
    )
}

/// Real-estate development game with construction delay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrenadierParams {
    pub r: f64,
    pub mu: f64,
    pub sigma: f64,
    pub delta: f64,
    #[serde(rename = "R")]
    pub rent: f64,
    pub gamma: f64,
    #[serde(rename = "I")]
    pub cost: f64,
    #[serde(rename = "D1")]
    pub d1: f64,
    #[serde(rename = "D2")]
    pub d2: f64,
}

impl GrenadierParams {
    pub fn gbm(&self) -> GbmParams {
        GbmParams {
            r: self.r,
            mu: self.mu,
            sigma: self.sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.gbm().validate()?;
        for (n, v) in [
            ("delta", self.delta),
            ("R", self.rent),
            ("gamma", self.gamma),
            ("I", self.cost),
            ("D1", self.d1),
            ("D2", self.d2),
        ] {
            require_finite(n, v)?;
        }
        if self.delta < 0.0 {
            return Err(invalid("delta", "must be >= 0"));
        }
        if self.rent < 0.0 {
            return Err(invalid("R", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(invalid("gamma", "must lie in [0, 1]"));
        }
        if self.cost <= 0.0 {
            return Err(invalid("I", "must be > 0"));
        }
        if self.d2 <= 0.0 {
            return Err(invalid("D2", "must be > 0"));
        }
        if self.d2 > self.d1 {
            return Err(Error::InvalidOrdering(format!(
                "D2 <= D1 fails: {} > {}",
                self.d2, self.d1
            )));
        }
        Ok(())
    }

    /// Discount on revenue that starts only after the construction delay.
    pub fn delay_factor(&self) -> f64 {
        (-(self.r - self.mu) * self.delta).exp()
    }
}

pub fn from_grenadier(p: &GrenadierParams) -> Result<AffineStreamModel> {
    p.validate()?;
    let e = p.delay_factor();
    let rc = -p.r * p.cost;
    AffineStreamModel::symmetric(
        p.gbm(),
        AffineStream::new(0.0, p.rent),
        AffineStream::new(p.d1 * e, rc),
        AffineStream::new(0.0, (1.0 - p.gamma) * p.rent),
        AffineStream::new(p.d2 * e, rc),
    )
}

/// R&D race with Poisson success arrival rate `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeedsParams {
    pub r: f64,
    pub mu: f64,
    pub sigma: f64,
    pub h: f64,
    #[serde(rename = "K")]
    pub k: f64,
}

impl WeedsParams {
    pub fn to_pawlina_kort(&self) -> Result<PawlinaKortParams> {
        require_finite("h", self.h)?;
        if self.h <= 0.0 {
            return Err(invalid("h", "must be > 0"));
        }
        let re = self.r + self.h;
        let d11 = self.h * (re - self.mu) / (re + self.h - self.mu);
        let p = PawlinaKortParams {
            r: re,
            mu: self.mu,
            sigma: self.sigma,
            d00: 0.0,
            d01: 0.0,
            d10: self.h,
            d11,
            i1: self.k,
            i2: self.k,
        };
        p.validate()?;
        Ok(p)
    }
}

/// Returns the model together with the effective discount rate `r + h`.
pub fn from_weeds(p: &WeedsParams) -> Result<(AffineStreamModel, f64)> {
    let pk = p.to_pawlina_kort()?;
    Ok((from_pawlina_kort(&pk)?, pk.r))
}

/// Deterministic technology adoption with cost `e^{-(r+a)t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FtParams {
    pub r: f64,
    pub a: f64,
    pub pi0_0: f64,
    pub pi0_1: f64,
    pub pi1_1: f64,
    pub pi1_2: f64,
}

impl FtParams {
    pub fn to_pawlina_kort(&self) -> Result<PawlinaKortParams> {
        let p = PawlinaKortParams {
            r: self.r + self.a,
            mu: self.a,
            sigma: 0.0,
            d00: self.pi0_0,
            d01: self.pi0_1,
            d10: self.pi1_1,
            d11: self.pi1_2,
            i1: 1.0,
            i2: 1.0,
        };
        p.validate()?;
        // Thresholds in this limit need beta1 = r/mu.
        beta_roots(&p.gbm())?;
        Ok(p)
    }
}

pub fn from_ft(p: &FtParams) -> Result<AffineStreamModel> {
    from_pawlina_kort(&p.to_pawlina_kort()?)
}

/// Free-form affine model as read from a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineParams {
    pub r: f64,
    pub mu: f64,
    pub sigma: f64,
    pub s0: [AffineStream; 2],
    #[serde(rename = "sL")]
    pub s_l: [AffineStream; 2],
    #[serde(rename = "sF")]
    pub s_f: [AffineStream; 2],
    #[serde(rename = "sB")]
    pub s_b: [AffineStream; 2],
}

/// Contents of a model file: `{"model": <kind>, "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "params", deny_unknown_fields)]
pub enum ModelSpec {
    #[serde(rename = "pawlina-kort")]
    PawlinaKort(PawlinaKortParams),
    #[serde(rename = "grenadier")]
    Grenadier(GrenadierParams),
    #[serde(rename = "weeds")]
    Weeds(WeedsParams),
    #[serde(rename = "ft")]
    Ft(FtParams),
    #[serde(rename = "affine")]
    Affine(AffineParams),
}

impl ModelSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| invalid("model file", e.to_string()))
    }

    pub fn to_affine(&self) -> Result<AffineStreamModel> {
        match self {
            ModelSpec::PawlinaKort(p) => from_pawlina_kort(p),
            ModelSpec::Grenadier(p) => from_grenadier(p),
            ModelSpec::Weeds(p) => from_weeds(p).map(|(m, _)| m),
            ModelSpec::Ft(p) => from_ft(p),
            ModelSpec::Affine(p) => AffineStreamModel::new(
                GbmParams::new(p.r, p.mu, p.sigma)?,
                p.s0,
                p.s_l,
                p.s_f,
                p.s_b,
            ),
        }
    }

    /// Pawlina-Kort parameters, directly or through an exact reduction.
    pub fn to_pawlina_kort(&self) -> Result<PawlinaKortParams> {
        match self {
            ModelSpec::PawlinaKort(p) => {
                p.validate()?;
                Ok(*p)
            }
            ModelSpec::Weeds(p) => p.to_pawlina_kort(),
            ModelSpec::Ft(p) => p.to_pawlina_kort(),
            other => other.to_affine()?.as_pawlina_kort().ok_or_else(|| {
                Error::NotApplicable("model does not have the Pawlina-Kort shape".into())
            }),
        }
    }
}
