//! Catalog of closed-form metric charts.
//!
//! A chart produces its metric components as jets about a point, so every
//! partial derivative needed downstream comes from exact Taylor arithmetic.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::Serialize;
use thiserror::Error;

use crate::jet::{Exponent, Jet, JetError};

/// Metric components `g_ij` as jets.
pub type MetricJets = [[Jet; 4]; 4];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChartError {
    #[error("unknown manifold `{0}`")]
    Unknown(String),
    #[error("point {point:?} lies outside the domain of `{chart}`")]
    OutsideDomain { chart: String, point: [f64; 4] },
    #[error("metric of `{chart}` is not positive definite at {point:?}")]
    NotPositiveDefinite { chart: String, point: [f64; 4] },
    #[error(transparent)]
    Jet(#[from] JetError),
    #[error("bad conformal factor specification: {0}")]
    ConformalSpec(String),
}

/// Properties a chart claims. The suite re-measures every claim.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DeclaredProperties {
    /// Einstein constant λ in `Ric = λ g`, when Einstein.
    pub einstein: Option<f64>,
    pub ricci_flat: bool,
    pub harmonic_weyl: bool,
    pub parallel_weyl: bool,
    pub conformally_flat: bool,
    pub negative_control: bool,
}

#[derive(Debug, Clone, PartialEq)]
enum Lapse {
    Schwarzschild { m: f64 },
    DeSitter { m: f64, lambda: f64 },
    Perturbed { m: f64 },
}

impl Lapse {
    fn eval(&self, r: &Jet) -> Result<Jet, JetError> {
        let order = r.order();
        let one = Jet::constant(1.0, order);
        Ok(match *self {
            Lapse::Schwarzschild { m } => &one - &r.recip()?.scale(2.0 * m),
            Lapse::DeSitter { m, lambda } => {
                &(&one - &r.recip()?.scale(2.0 * m)) - &(r * r).scale(lambda / 3.0)
            }
            Lapse::Perturbed { m } => &one - &r.powf("pow", -1.5)?.scale(2.0 * m),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Flat,
    Sphere,
    Hyperbolic,
    ComplexProjective,
    SphereProduct { r1: f64, r2: f64 },
    Static(Lapse),
    Conformal { phi: Vec<(Exponent, f64)> },
    Deformation { eps: f64 },
}

/// A metric on a coordinate box of ℝ⁴.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricChart {
    pub name: String,
    pub coordinate_names: [&'static str; 4],
    /// Sampling box `[lo, hi]` per coordinate.
    pub domain: [(f64, f64); 4],
    pub orientation: f64,
    pub declared: DeclaredProperties,
    /// One-line property summary for listings.
    pub summary: String,
    /// Constant factor `c²` multiplying the metric.
    pub scale: f64,
    kind: Kind,
}

const SCHWARZSCHILD_MASS: f64 = 1.0;
const COSMOLOGICAL_CONSTANT: f64 = 0.03;

/// Default polynomial conformal exponent for the `conformally-flat` entry.
pub fn default_conformal_factor() -> Vec<(Exponent, f64)> {
    vec![
        ([1, 0, 0, 0], 0.3),
        ([0, 1, 1, 0], -0.2),
        ([0, 0, 0, 2], 0.1),
        ([1, 0, 0, 1], 0.15),
        ([0, 2, 1, 0], 0.05),
    ]
}

/// Names of all catalog entries, in listing order.
pub const CATALOG: [&str; 11] = [
    "flat",
    "s4",
    "h4",
    "cp2",
    "s2xs2",
    "s2xs2-unequal",
    "schwarzschild",
    "schwarzschild-de-sitter",
    "perturbed-schwarzschild",
    "conformally-flat",
    "generic-deformation",
];

fn einstein(lambda: f64) -> DeclaredProperties {
    DeclaredProperties {
        einstein: Some(lambda),
        ricci_flat: lambda == 0.0,
        harmonic_weyl: true,
        ..Default::default()
    }
}

const SPHERE_ANGLE: (f64, f64) = (0.2, PI - 0.2);
const AZIMUTH: (f64, f64) = (0.0, 2.0 * PI);

impl MetricChart {
    /// Looks up a catalog entry by name.
    pub fn by_name(name: &str) -> Result<Self, ChartError> {
        let unit_box = [(-0.8, 0.8); 4];
        let statik = |lapse: Lapse, declared: DeclaredProperties, summary: &str| MetricChart {
            name: name.to_string(),
            coordinate_names: ["tau", "r", "theta", "phi"],
            domain: [(0.0, 2.0 * PI), (3.0, 8.0), SPHERE_ANGLE, AZIMUTH],
            orientation: 1.0,
            declared,
            summary: summary.to_string(),
            scale: 1.0,
            kind: Kind::Static(lapse),
        };
        let cart = |kind: Kind, domain, declared, summary: &str| MetricChart {
            name: name.to_string(),
            coordinate_names: ["x1", "x2", "x3", "x4"],
            domain,
            orientation: 1.0,
            declared,
            summary: summary.to_string(),
            scale: 1.0,
            kind,
        };
        let product = |r1: f64, r2: f64, declared, summary: &str| MetricChart {
            name: name.to_string(),
            coordinate_names: ["theta1", "phi1", "theta2", "phi2"],
            domain: [SPHERE_ANGLE, AZIMUTH, SPHERE_ANGLE, AZIMUTH],
            orientation: 1.0,
            declared,
            summary: summary.to_string(),
            scale: 1.0,
            kind: Kind::SphereProduct { r1, r2 },
        };
        let conformally_flat = |d: DeclaredProperties| DeclaredProperties {
            harmonic_weyl: true,
            parallel_weyl: true,
            conformally_flat: true,
            ..d
        };
        let parallel = |d: DeclaredProperties| DeclaredProperties { parallel_weyl: true, ..d };
        Ok(match name {
            "flat" => cart(Kind::Flat, [(-1.0, 1.0); 4], conformally_flat(einstein(0.0)), "Einstein(λ=0) flat W=0"),
            "s4" => cart(Kind::Sphere, [(-1.0, 1.0); 4], conformally_flat(einstein(3.0)), "Einstein(λ=3) W=0"),
            "h4" => cart(Kind::Hyperbolic, [(-0.4, 0.4); 4], conformally_flat(einstein(-3.0)), "Einstein(λ=−3) W=0"),
            "cp2" => cart(
                Kind::ComplexProjective,
                [(-1.0, 1.0); 4],
                parallel(einstein(6.0)),
                "Einstein(λ=6) ∇W=0 W⁻=0",
            ),
            "s2xs2" => product(1.0, 1.0, parallel(einstein(1.0)), "Einstein(λ=1) ∇W=0"),
            "s2xs2-unequal" => product(
                1.0,
                2.0,
                DeclaredProperties { harmonic_weyl: true, parallel_weyl: true, ..Default::default() },
                "harmonic-Weyl non-Einstein ∇W=0",
            ),
            "schwarzschild" => statik(
                Lapse::Schwarzschild { m: SCHWARZSCHILD_MASS },
                einstein(0.0),
                "Einstein(λ=0) Ricci-flat ∇W≠0",
            ),
            "schwarzschild-de-sitter" => statik(
                Lapse::DeSitter { m: SCHWARZSCHILD_MASS, lambda: COSMOLOGICAL_CONSTANT },
                einstein(COSMOLOGICAL_CONSTANT),
                "Einstein(λ=Λ) ∇W≠0",
            ),
            "perturbed-schwarzschild" => statik(
                Lapse::Perturbed { m: SCHWARZSCHILD_MASS },
                DeclaredProperties { negative_control: true, ..Default::default() },
                "non-Einstein Cotton≠0 negative-control",
            ),
            "conformally-flat" => cart(
                Kind::Conformal { phi: default_conformal_factor() },
                unit_box,
                conformally_flat(DeclaredProperties::default()),
                "non-Einstein W=0",
            ),
            "generic-deformation" => cart(
                Kind::Deformation { eps: 0.15 },
                [(-1.0, 1.0); 4],
                DeclaredProperties::default(),
                "non-Einstein generic W± spectra",
            ),
            _ => return Err(ChartError::Unknown(name.to_string())),
        })
    }

    /// Every catalog entry.
    pub fn catalog() -> Vec<Self> {
        CATALOG.iter().map(|n| Self::by_name(n).expect("catalog entry")).collect()
    }

    /// The conformally flat family `e^{2φ}δ` with a user-supplied polynomial φ.
    pub fn conformally_flat(phi: Vec<(Exponent, f64)>) -> Self {
        let mut c = Self::by_name("conformally-flat").expect("catalog entry");
        c.kind = Kind::Conformal { phi };
        c
    }

    /// The same chart with metric `c² g`.
    pub fn scaled(&self, c2: f64) -> Self {
        assert!(c2 > 0.0, "metric scale must be positive");
        let mut c = self.clone();
        c.scale *= c2;
        if let Some(l) = c.declared.einstein.as_mut() {
            *l /= c2;
        }
        c
    }

    pub fn contains(&self, p: &[f64; 4]) -> bool {
        p.iter().zip(&self.domain).all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    /// Metric components as jets of the given order about `p`.
    pub fn metric_jets(&self, p: &[f64; 4], order: usize) -> Result<MetricJets, ChartError> {
        if !self.contains(p) {
            return Err(ChartError::OutsideDomain { chart: self.name.clone(), point: *p });
        }
        let x: [Jet; 4] = std::array::from_fn(|i| Jet::variable(i, p[i], order));
        let zero = Jet::zero(order);
        let mut g: MetricJets = std::array::from_fn(|_| std::array::from_fn(|_| zero.clone()));
        let diagonal = |g: &mut MetricJets, f: &Jet| {
            for (i, row) in g.iter_mut().enumerate() {
                row[i] = f.clone();
            }
        };
        let r2 = || x.iter().fold(Jet::zero(order), |acc, xi| &acc + &(xi * xi));
        match &self.kind {
            Kind::Flat => diagonal(&mut g, &Jet::constant(1.0, order)),
            Kind::Sphere => {
                let f = r2().add_scalar(1.0).powf("pow", -2.0)?.scale(4.0);
                diagonal(&mut g, &f);
            }
            Kind::Hyperbolic => {
                let f = r2().scale(-1.0).add_scalar(1.0).powf("pow", -2.0)?.scale(4.0);
                diagonal(&mut g, &f);
            }
            Kind::ComplexProjective => {
                // z1 = x1 + i x2, z2 = x3 + i x4;
                // h_jk̄ = ((1+|z|²)δ_jk − z̄_j z_k)/(1+|z|²)²
                let re = [&x[0], &x[2]];
                let im = [&x[1], &x[3]];
                let s = r2().add_scalar(1.0);
                let inv = s.powf("pow", -2.0)?;
                for j in 0..2 {
                    for k in 0..2 {
                        // z̄_j z_k = (a_j a_k + b_j b_k) + i(a_j b_k − b_j a_k)
                        let real = &(re[j] * re[k]) + &(im[j] * im[k]);
                        let imag = &(re[j] * im[k]) - &(im[j] * re[k]);
                        let mut a = real.scale(-1.0);
                        if j == k {
                            a = &a + &s;
                        }
                        let a = &a * &inv;
                        let b = &imag.scale(-1.0) * &inv;
                        // real block [[a, b], [−b, a]] over (x_j, y_j) × (x_k, y_k)
                        g[2 * j][2 * k] = a.clone();
                        g[2 * j + 1][2 * k + 1] = a;
                        g[2 * j][2 * k + 1] = b.clone();
                        g[2 * j + 1][2 * k] = b.scale(-1.0);
                    }
                }
            }
            Kind::SphereProduct { r1, r2 } => {
                let s1 = x[0].sin();
                let s2 = x[2].sin();
                g[0][0] = Jet::constant(r1 * r1, order);
                g[1][1] = (&s1 * &s1).scale(r1 * r1);
                g[2][2] = Jet::constant(r2 * r2, order);
                g[3][3] = (&s2 * &s2).scale(r2 * r2);
            }
            Kind::Static(lapse) => {
                let f = lapse.eval(&x[1])?;
                if f.value() <= 0.0 {
                    return Err(ChartError::NotPositiveDefinite { chart: self.name.clone(), point: *p });
                }
                let s = x[2].sin();
                let rr = &x[1] * &x[1];
                g[0][0] = f.clone();
                g[1][1] = f.recip()?;
                g[2][2] = rr.clone();
                g[3][3] = &rr * &(&s * &s);
            }
            Kind::Conformal { phi } => {
                let mut poly = Jet::zero(order);
                for (e, c) in phi {
                    let mut term = Jet::constant(*c, order);
                    for (v, &pow) in e.iter().enumerate() {
                        for _ in 0..pow {
                            term = &term * &x[v];
                        }
                    }
                    poly = &poly + &term;
                }
                diagonal(&mut g, &poly.scale(2.0).exp());
            }
            Kind::Deformation { eps } => {
                for i in 0..4 {
                    for j in i..4 {
                        let mut arg = Jet::constant(0.3 * (i + 2 * j) as f64 + 0.1, order);
                        for (k, xk) in x.iter().enumerate() {
                            let a = ((i * 7 + j * 5 + k * 3) % 11) as f64 / 11.0 - 0.4;
                            arg = &arg + &xk.scale(a);
                        }
                        let mut e = arg.sin().scale(*eps);
                        if i == j {
                            e = e.add_scalar(1.0);
                        }
                        g[i][j] = e.clone();
                        g[j][i] = e;
                    }
                }
            }
        }
        if self.scale != 1.0 {
            for row in g.iter_mut() {
                for e in row.iter_mut() {
                    *e = e.scale(self.scale);
                }
            }
        }
        Ok(g)
    }

    /// Deterministic sample point: depends only on `(seed, chart name, index)`.
    pub fn sample_point(&self, seed: u64, index: u64) -> [f64; 4] {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(point_seed(seed, &self.name, index));
        std::array::from_fn(|i| {
            let (lo, hi) = self.domain[i];
            rng.gen_range(lo..=hi)
        })
    }
}

/// Mixes a run seed, a name and an index into a generator seed (FNV-1a over
/// the name followed by a SplitMix64 finalizer).
fn point_seed(seed: u64, name: &str, index: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = seed ^ h.rotate_left(17) ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Parses a polynomial conformal exponent φ.
///
/// Accepts either JSON (`[{"exponent": [1,0,0,0], "coeff": 0.3}, …]` or
/// `{"1,0,0,0": 0.3, …}`) or plain text of `e1,e2,e3,e4=coeff` entries
/// separated by `;` or newlines.
pub fn parse_conformal_factor(text: &str) -> Result<Vec<(Exponent, f64)>, ChartError> {
    let bad = |m: String| ChartError::ConformalSpec(m);
    let exponent = |s: &str| -> Result<Exponent, ChartError> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 4 {
            return Err(bad(format!("exponent `{s}` needs four entries")));
        }
        let mut e = [0u8; 4];
        for (slot, p) in e.iter_mut().zip(parts) {
            *slot = p.parse().map_err(|_| bad(format!("bad exponent entry `{p}`")))?;
        }
        Ok(e)
    };
    let trimmed = text.trim();
    let terms = if trimmed.starts_with('[') || trimmed.starts_with('{') {
        let v: serde_json::Value = serde_json::from_str(trimmed).map_err(|e| bad(e.to_string()))?;
        match v {
            serde_json::Value::Array(items) => items
                .iter()
                .map(|it| {
                    let e = it["exponent"].as_array().ok_or_else(|| bad("missing `exponent`".into()))?;
                    let c = it["coeff"].as_f64().ok_or_else(|| bad("missing `coeff`".into()))?;
                    let joined = e.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
                    Ok((exponent(&joined)?, c))
                })
                .collect::<Result<Vec<_>, ChartError>>()?,
            serde_json::Value::Object(map) => map
                .iter()
                .map(|(k, v)| {
                    let c = v.as_f64().ok_or_else(|| bad(format!("coefficient for `{k}` is not a number")))?;
                    Ok((exponent(k)?, c))
                })
                .collect::<Result<Vec<_>, ChartError>>()?,
            _ => return Err(bad("expected a JSON array or object".into())),
        }
    } else {
        trimmed
            .split([';', '\n'])
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                let (k, v) = l.split_once('=').ok_or_else(|| bad(format!("`{l}` is not key=value")))?;
                let c: f64 = v.trim().parse().map_err(|_| bad(format!("bad coefficient `{v}`")))?;
                Ok((exponent(k)?, c))
            })
            .collect::<Result<Vec<_>, ChartError>>()?
    };
    if terms.iter().any(|(_, c)| !c.is_finite()) {
        return Err(bad("coefficients must be finite".into()));
    }
    Ok(terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names_resolve() {
        for c in MetricChart::catalog() {
            assert!(CATALOG.contains(&c.name.as_str()));
        }
        assert!(matches!(MetricChart::by_name("s5"), Err(ChartError::Unknown(_))));
    }

    #[test]
    fn sample_points_are_reproducible_and_in_domain() {
        for c in MetricChart::catalog() {
            for i in 0..10 {
                let p = c.sample_point(42, i);
                assert_eq!(p, c.sample_point(42, i));
                assert!(c.contains(&p));
            }
            assert_ne!(c.sample_point(42, 0), c.sample_point(43, 0));
        }
    }

    #[test]
    fn metric_is_symmetric_everywhere() {
        for c in MetricChart::catalog() {
            let g = c.metric_jets(&c.sample_point(1, 0), 3).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    assert_eq!(g[i][j], g[j][i], "{}", c.name);
                }
            }
        }
    }

    #[test]
    fn outside_domain_rejected() {
        let c = MetricChart::by_name("schwarzschild").unwrap();
        assert!(matches!(c.metric_jets(&[0.0, 1.0, 1.0, 0.0], 2), Err(ChartError::OutsideDomain { .. })));
    }

    #[test]
    fn conformal_spec_formats_agree() {
        let a = parse_conformal_factor("1,0,0,0=0.5; 0,2,0,0=-0.25").unwrap();
        let b = parse_conformal_factor(r#"[{"exponent":[1,0,0,0],"coeff":0.5},{"exponent":[0,2,0,0],"coeff":-0.25}]"#)
            .unwrap();
        assert_eq!(a, b);
        assert!(parse_conformal_factor("1,0,0=0.5").is_err());
        assert!(parse_conformal_factor("nonsense").is_err());
    }

    #[test]
    fn scaling_multiplies_metric() {
        let c = MetricChart::by_name("cp2").unwrap();
        let p = c.sample_point(3, 0);
        let g = c.metric_jets(&p, 2).unwrap();
        let h = c.scaled(4.0).metric_jets(&p, 2).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(h[i][j], g[i][j].scale(4.0));
            }
        }
    }
}
