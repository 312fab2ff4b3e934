//! Critical offspring laws with exact heavy-tail handling.
//!
//! Two built-in families cover the regimes of interest. The Slack family has
//! generating function f(s) = s + c(1-s)^alpha, alpha in (1, 2], c in (0, 1/alpha];
//! its slowly varying tail factor is identically c, so the volume scaling
//! a_n = n^alpha / c is exact rather than asymptotic. geometric_half
//! (pi_k = 2^-(k+1)) is the finite-variance workhorse with a_n = n^2.
//! Arbitrary finite-support critical laws load from tables.
//!
//! Heads are tabulated once at construction and never mutated; draws landing
//! beyond the head are resolved by bisection on the closed-form tail sums, so
//! heavy-tailed draws (infinite-mean size-biased laws included) cost O(log k)
//! instead of a term walk that could run to k ~ 1e12.

use crate::error::{Error, Result};
use rand::Rng;
use statrs::function::gamma::ln_gamma;

/// Head tabulation stops once the remaining tail mass drops below this.
const HEAD_TAIL_TARGET: f64 = 1e-12;
/// Hard cap on head length; polynomial tails never reach the mass target.
const HEAD_CAP: usize = 1 << 20;
/// A tabulated law must have mean within this of 1.
const CRITICALITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Family {
    Slack { c: f64 },
    GeometricHalf,
    Tabulated,
}

#[derive(Clone, Debug)]
struct Table {
    pdf: Vec<f64>,
    /// cdf[k] = sum of pdf[0..=k]
    cdf: Vec<f64>,
}

impl Table {
    fn build(pdf: Vec<f64>) -> Table {
        let mut cdf = Vec::with_capacity(pdf.len());
        let mut acc = 0.0;
        for &p in &pdf {
            acc += p;
            cdf.push(acc);
        }
        Table { pdf, cdf }
    }

    /// Smallest k with cdf[k] > u, or len if u lies beyond the head.
    fn invert(&self, u: f64) -> usize {
        self.cdf.partition_point(|&c| c <= u)
    }
}

/// A critical offspring law (mean exactly 1) with its tail data.
#[derive(Clone, Debug)]
pub struct OffspringDistribution {
    family: Family,
    alpha: f64,
    l_const: f64,
    head: Table,
    sb_head: Table,
    /// Tabulated only: suffix sums of pi_k and k*pi_k for exact tails.
    tab_tail: Vec<f64>,
    tab_sb_tail: Vec<f64>,
}

impl OffspringDistribution {
    /// Law with pgf s + c(1-s)^alpha. Critical by construction.
    pub fn slack(alpha: f64, c: f64) -> Result<OffspringDistribution> {
        if !(alpha > 1.0 && alpha <= 2.0) || !alpha.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "slack tail index alpha must lie in (1, 2], got {alpha}"
            )));
        }
        if !(c > 0.0 && c <= 1.0 / alpha) || !c.is_finite() {
            return Err(Error::InvalidDistribution(format!(
                "slack constant c must lie in (0, 1/alpha] = (0, {}], got {c}",
                1.0 / alpha
            )));
        }
        // pi_0 = c, pi_1 = 1 - c*alpha, pi_2 = c*alpha*(alpha-1)/2,
        // pi_{k+1} = pi_k * (k - alpha) / (k + 1).
        let mut pdf = vec![c, 1.0 - c * alpha];
        let mut term = c * alpha * (alpha - 1.0) / 2.0;
        let mut k = 2u64;
        let mut cum: f64 = pdf.iter().sum();
        while pdf.len() < HEAD_CAP && cum < 1.0 - HEAD_TAIL_TARGET && term > 0.0 {
            pdf.push(term);
            cum += term;
            term *= (k as f64 - alpha) / (k as f64 + 1.0);
            k += 1;
        }
        let dist = OffspringDistribution {
            family: Family::Slack { c },
            alpha,
            l_const: c,
            sb_head: Table::build(size_biased_pdf(&pdf)),
            head: Table::build(pdf),
            tab_tail: Vec::new(),
            tab_sb_tail: Vec::new(),
        };
        debug_assert!(dist.criticality_gap() < CRITICALITY_TOL);
        Ok(dist)
    }

    /// pi_k = 2^-(k+1); finite variance, f''(1) = 2, a_n = n^2.
    pub fn geometric_half() -> OffspringDistribution {
        let mut pdf = Vec::new();
        let mut term = 0.5f64;
        let mut cum = 0.0;
        while cum < 1.0 - HEAD_TAIL_TARGET {
            pdf.push(term);
            cum += term;
            term *= 0.5;
        }
        OffspringDistribution {
            family: Family::GeometricHalf,
            alpha: 2.0,
            l_const: 1.0,
            sb_head: Table::build(size_biased_pdf(&pdf)),
            head: Table::build(pdf),
            tab_tail: Vec::new(),
            tab_sb_tail: Vec::new(),
        }
    }

    /// Finite-support law from weights (normalized here). Must be critical.
    pub fn tabulated(weights: &[f64]) -> Result<OffspringDistribution> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty weight table".into()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("all weights are zero".into()));
        }
        let pdf: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let mean: f64 = pdf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
        if (mean - 1.0).abs() > CRITICALITY_TOL {
            return Err(Error::InvalidDistribution(format!(
                "law is not critical: mean = {mean}"
            )));
        }
        let f2: f64 = pdf
            .iter()
            .enumerate()
            .map(|(k, p)| (k * k.saturating_sub(1)) as f64 * p)
            .sum();
        let mut tab_tail = suffix_sums(&pdf);
        let sb = size_biased_pdf(&pdf);
        let tab_sb_tail = suffix_sums(&sb);
        // force exact normalization at the top
        tab_tail[0] = 1.0;
        Ok(OffspringDistribution {
            family: Family::Tabulated,
            alpha: 2.0,
            l_const: f2 / 2.0,
            sb_head: Table::build(sb),
            head: Table::build(pdf),
            tab_tail,
            tab_sb_tail,
        })
    }

    /// Tail index: the alpha of the stable domain, 2 for finite variance.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The constant the slowly varying factor collapses to; a_n = n^alpha / l_const.
    pub fn l_const(&self) -> f64 {
        self.l_const
    }

    pub fn scaling(&self) -> ScalingSequence {
        ScalingSequence {
            alpha: self.alpha,
            l_const: self.l_const,
        }
    }

    /// P(xi = k), exact for all k.
    pub fn pmf(&self, k: u64) -> f64 {
        if (k as usize) < self.head.pdf.len() {
            return self.head.pdf[k as usize];
        }
        match self.family {
            Family::Tabulated => 0.0,
            Family::GeometricHalf => (-(k as f64 + 1.0)).exp2(),
            Family::Slack { c } => {
                if self.alpha == 2.0 || k < 2 {
                    // head always covers k <= 2 for slack
                    0.0
                } else {
                    let a = self.alpha;
                    c * a
                        * (a - 1.0)
                        * (ln_gamma(k as f64 - a) - ln_gamma(2.0 - a) - ln_gamma(k as f64 + 1.0))
                            .exp()
                }
            }
        }
    }

    /// P(xi >= m), exact (closed form for the infinite families).
    pub fn tail(&self, m: u64) -> f64 {
        if m == 0 {
            return 1.0;
        }
        match self.family {
            Family::Tabulated => self
                .tab_tail
                .get(m as usize)
                .copied()
                .unwrap_or(0.0),
            Family::GeometricHalf => (-(m as f64)).exp2(),
            Family::Slack { c } => {
                if m == 1 {
                    1.0 - c
                } else if self.alpha == 2.0 {
                    if m == 2 {
                        c
                    } else {
                        0.0
                    }
                } else {
                    // sum_{i>=m} pi_i = c*(alpha-1)*Gamma(m-alpha) / (Gamma(2-alpha)*Gamma(m))
                    let a = self.alpha;
                    c * (a - 1.0)
                        * (ln_gamma(m as f64 - a) - ln_gamma(2.0 - a) - ln_gamma(m as f64)).exp()
                }
            }
        }
    }

    /// P(xi_hat > m) = sum_{k>m} k*pi_k; equals 1 at m = 0 by criticality.
    pub fn size_biased_tail(&self, m: u64) -> f64 {
        if m == 0 {
            return 1.0;
        }
        match self.family {
            Family::Tabulated => self
                .tab_sb_tail
                .get(m as usize + 1)
                .copied()
                .unwrap_or(0.0),
            Family::GeometricHalf => (m as f64 + 2.0) * (-(m as f64 + 1.0)).exp2(),
            Family::Slack { c } => {
                if self.alpha == 2.0 {
                    if m == 1 {
                        2.0 * c
                    } else {
                        0.0
                    }
                } else {
                    // sum_{k>m} k*pi_k = c*alpha*Gamma(m+1-alpha) / (Gamma(2-alpha)*Gamma(m))
                    let a = self.alpha;
                    c * a
                        * (ln_gamma(m as f64 + 1.0 - a) - ln_gamma(2.0 - a) - ln_gamma(m as f64))
                            .exp()
                }
            }
        }
    }

    /// Generating function E(s^xi).
    pub fn pgf(&self, s: f64) -> f64 {
        match self.family {
            Family::Slack { c } => s + c * (1.0 - s).powf(self.alpha),
            Family::GeometricHalf => 1.0 / (2.0 - s),
            Family::Tabulated => {
                let mut acc = 0.0;
                for &p in self.head.pdf.iter().rev() {
                    acc = acc * s + p;
                }
                acc
            }
        }
    }

    /// f''(1) when finite; None in the stable regime alpha < 2.
    pub fn second_factorial_moment(&self) -> Option<f64> {
        match self.family {
            Family::Slack { c } => (self.alpha == 2.0).then_some(2.0 * c),
            Family::GeometricHalf => Some(2.0),
            Family::Tabulated => Some(2.0 * self.l_const),
        }
    }

    /// |E(xi) - 1| computed from head plus analytic tail; ~0 for valid laws.
    pub fn criticality_gap(&self) -> f64 {
        let head: f64 = self
            .head
            .pdf
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum();
        let rest = self.size_biased_tail(self.head.pdf.len() as u64 - 1);
        (head + rest - 1.0).abs()
    }

    /// True when the law is the degenerate chain xi == 1.
    pub fn is_chain(&self) -> bool {
        self.pmf(1) > 1.0 - 1e-12
    }

    pub fn has_leaf(&self) -> bool {
        self.pmf(0) > 0.0
    }

    /// gcd of the nonzero support; tree sizes n require gcd | n-1.
    pub fn support_gcd(&self) -> u64 {
        match self.family {
            Family::GeometricHalf => 1,
            Family::Slack { .. } => {
                if self.alpha == 2.0 && self.pmf(1) == 0.0 {
                    2
                } else {
                    1
                }
            }
            Family::Tabulated => {
                let mut g = 0u64;
                for (k, &p) in self.head.pdf.iter().enumerate().skip(1) {
                    if p > 0.0 {
                        g = gcd(g, k as u64);
                    }
                }
                g
            }
        }
    }

    /// Draw xi.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u = rng.random::<f64>();
        let i = self.head.invert(u);
        if i < self.head.cdf.len() {
            return i as u64;
        }
        match self.family {
            Family::Tabulated => self.head.cdf.len() as u64 - 1,
            _ => self.tail_draw(u, self.head.cdf.len() as u64, |m| self.tail(m)),
        }
    }

    /// Draw xi_hat with P(xi_hat = k) = k*pi_k.
    pub fn sample_size_biased<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u = rng.random::<f64>();
        let i = self.sb_head.invert(u);
        if i < self.sb_head.cdf.len() {
            return i as u64;
        }
        match self.family {
            Family::Tabulated => self.sb_head.cdf.len() as u64 - 1,
            _ => self.tail_draw(u, self.sb_head.cdf.len() as u64, |m| {
                self.size_biased_tail(m - 1)
            }),
        }
    }

    /// Smallest k >= lo with P(X >= k+1) <= 1-u, for a decreasing tail
    /// function passed as P(X >= m). Bisection over the closed form.
    fn tail_draw(&self, u: f64, lo: u64, tail_geq: impl Fn(u64) -> f64) -> u64 {
        let t = 1.0 - u;
        let mut hi = lo.max(2);
        while tail_geq(hi + 1) > t {
            // doubling; saturate well below u64 overflow of m+1 arithmetic
            if hi > 1 << 62 {
                break;
            }
            hi *= 2;
        }
        let mut lo = lo;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if tail_geq(mid + 1) > t {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }
}

/// Scaling data a_n = n^alpha / l_const, with v(n) = a_n, r(n) = n.
#[derive(Clone, Copy, Debug)]
pub struct ScalingSequence {
    alpha: f64,
    l_const: f64,
}

impl ScalingSequence {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a(&self, n: f64) -> f64 {
        n.powf(self.alpha) / self.l_const
    }

    pub fn v(&self, n: f64) -> f64 {
        self.a(n)
    }

    pub fn r(&self, n: f64) -> f64 {
        n
    }

    /// Inverse of m -> v(m)*r(m) by bisection; the map is strictly increasing.
    pub fn inverse_vr(&self, y: f64) -> f64 {
        let vr = |m: f64| self.a(m) * m;
        let mut hi = 1.0f64;
        while vr(hi) < y {
            hi *= 2.0;
        }
        let mut lo = 0.0f64;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if vr(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Parse a plain-text table: one weight per line, `#` comments, blank lines ok.
pub fn parse_table(text: &str) -> Result<OffspringDistribution> {
    let mut weights = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let w: f64 = line.parse().map_err(|_| {
            Error::InvalidDistribution(format!("line {}: cannot parse {line:?}", lineno + 1))
        })?;
        weights.push(w);
    }
    OffspringDistribution::tabulated(&weights)
}

fn size_biased_pdf(pdf: &[f64]) -> Vec<f64> {
    pdf.iter()
        .enumerate()
        .map(|(k, p)| k as f64 * p)
        .collect()
}

fn suffix_sums(pdf: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; pdf.len() + 1];
    for k in (0..pdf.len()).rev() {
        out[k] = out[k + 1] + pdf[k];
    }
    out
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
