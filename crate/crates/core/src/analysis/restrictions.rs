//! Largest admissible timestep for each stability result.
//!
//! Every constraint is an inequality that can be inverted for `k` in closed
//! form. The returned `k_max` is nudged down by at most a few ulps so that
//! evaluating the original inequality at `k_max` passes exactly.

use serde::{Deserialize, Serialize};

use super::{BoundsReport, Check, ConstantsSet};
use crate::error::{Error, Result};
use crate::harness::output::float;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Semi-implicit, small data: global H¹ bound.
    SemiSmall,
    /// Semi-implicit, short time.
    SemiShort,
    /// Fully implicit, small data.
    FullSmall,
    /// Fully implicit, short time.
    FullShort,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::SemiSmall, Variant::SemiShort, Variant::FullSmall, Variant::FullShort];

    pub fn constraints(self) -> &'static [Constraint] {
        use Constraint::*;
        match self {
            Variant::SemiSmall => &[K0K1s],
            Variant::SemiShort => &[Dtf5],
            Variant::FullSmall => &[Hypf, Dtf0, Dtfa, Dtfb],
            Variant::FullShort => &[Dtfx1, Dtfy1, Dtf4, Dtfz],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::SemiSmall => "semi_small",
            Variant::SemiShort => "semi_short",
            Variant::FullSmall => "full_small",
            Variant::FullShort => "full_short",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant `{s}` (expected semi_small, semi_short, full_small or full_short)"))
    }
}

/// Individual inequalities, labelled by stable mnemonic tags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// `(K0 + k|f|²_{H⁻¹}/ν)(K1 + 2k|f|²/ν) ≤ c2 ν⁴`
    K0K1s,
    /// `k ≤ ν³ / (2 c4 (2|∇u⁰|² + F)²)`
    Dtf5,
    /// `K̃ ≤ ½ (ν³/(3 c4 k))^{1/2}`
    Dtfx1,
    /// `(1 + c5 K̃0 K̃/ν⁴) K̃ + |f|²_{H⁻¹}/ν² ≤ (ν³/(12 c4 k))^{1/2}`
    Dtfy1,
    /// `k ≤ ν^{5/3} / (2 c4^{1/3} |f|^{4/3})`
    Dtf4,
    /// `(2|∇u⁰|² + (1 + 2^{1/3}) ν^{2/3}|f|^{2/3}/c4^{1/3})² ≤ (2^{1/3} − 1) ν³/(2 c4 k)`
    Dtfz,
    /// `k ≤ c0/ν`
    Dtf0,
    /// `K̃1 ≤ ½ (ν³/(3 c4 k))^{1/2}`
    Dtfa,
    /// `(1 + c5 K̃0 K̃1/ν⁴) K̃1 + |f|²_{H⁻¹}/ν² ≤ (ν³/(12 c4 k))^{1/2}`
    Dtfb,
    /// `|∇u₀|² + (2c0/ν²)|f|² ≤ ν²/(2 sqrt(c0 c4))`, independent of k.
    Hypf,
}

impl Constraint {
    pub fn tag(self) -> &'static str {
        match self {
            Constraint::K0K1s => "K0K1s",
            Constraint::Dtf5 => "dtf5",
            Constraint::Dtfx1 => "dtfx1",
            Constraint::Dtfy1 => "dtfy1",
            Constraint::Dtf4 => "dtf4",
            Constraint::Dtfz => "dtfz",
            Constraint::Dtf0 => "dtf0",
            Constraint::Dtfa => "dtfa",
            Constraint::Dtfb => "dtfb",
            Constraint::Hypf => "hypf",
        }
    }

    /// The inequality at timestep `k`.
    pub fn evaluate(self, b: &BoundsReport, c: &ConstantsSet, k: f64) -> Check {
        let s = Scalars::new(b, c);
        let nu = b.nu;
        match self {
            Constraint::K0K1s => Check::new((b.k0 + k * s.fh / nu) * (b.k1 + 2.0 * k * s.fl / nu), c.c2 * nu.powi(4)),
            Constraint::Dtf5 => Check::new(k, s.nu3 / (2.0 * c.c4 * (2.0 * b.u0_h1_sq + b.f_short).powi(2))),
            Constraint::Dtfx1 => Check::new(b.k_tilde_short, 0.5 * (s.nu3 / (3.0 * c.c4 * k)).sqrt()),
            Constraint::Dtfy1 => Check::new(s.lhs_y(b.k_tilde_short), (s.nu3 / (12.0 * c.c4 * k)).sqrt()),
            Constraint::Dtf4 => Check::new(k, dtf4_limit(nu, c.c4, s.fl)),
            Constraint::Dtfz => Check::new(s.dtfz_base.powi(2), (2f64.cbrt() - 1.0) * s.nu3 / (2.0 * c.c4 * k)),
            Constraint::Dtf0 => Check::new(k, c.c0 / nu),
            Constraint::Dtfa => Check::new(b.k1_tilde, 0.5 * (s.nu3 / (3.0 * c.c4 * k)).sqrt()),
            Constraint::Dtfb => Check::new(s.lhs_y(b.k1_tilde), (s.nu3 / (12.0 * c.c4 * k)).sqrt()),
            Constraint::Hypf => {
                Check::new(b.u0_h1_sq + 2.0 * c.c0 / (nu * nu) * s.fl, nu * nu / (2.0 * (c.c0 * c.c4).sqrt()))
            }
        }
    }

    /// Closed-form largest `k` (∞ when unconstrained). `Err` when no `k > 0`
    /// satisfies the inequality.
    fn limit(self, b: &BoundsReport, c: &ConstantsSet) -> Result<f64> {
        let s = Scalars::new(b, c);
        let nu = b.nu;
        let inverse_square = |q: f64| s.nu3 / (12.0 * c.c4 * q * q);
        let k = match self {
            Constraint::K0K1s => {
                let room = c.c2 * nu.powi(4) - b.k0 * b.k1;
                let alpha = s.fh / nu;
                let beta = 2.0 * s.fl / nu;
                let lin = alpha * b.k1 + beta * b.k0;
                let quad = alpha * beta;
                if room < 0.0 {
                    return Err(Error::Infeasible { tag: self.tag(), slack: room });
                }
                if lin == 0.0 && quad == 0.0 {
                    f64::INFINITY
                } else {
                    // positive root of quad k² + lin k − room, cancellation-free
                    2.0 * room / (lin + (lin * lin + 4.0 * quad * room).sqrt())
                }
            }
            Constraint::Dtf5 => s.nu3 / (2.0 * c.c4 * (2.0 * b.u0_h1_sq + b.f_short).powi(2)),
            Constraint::Dtfx1 => inverse_square(b.k_tilde_short),
            Constraint::Dtfy1 => inverse_square(s.lhs_y(b.k_tilde_short)),
            Constraint::Dtf4 => dtf4_limit(nu, c.c4, s.fl),
            Constraint::Dtfz => (2f64.cbrt() - 1.0) * s.nu3 / (2.0 * c.c4 * s.dtfz_base.powi(2)),
            Constraint::Dtf0 => c.c0 / nu,
            Constraint::Dtfa => inverse_square(b.k1_tilde),
            Constraint::Dtfb => inverse_square(s.lhs_y(b.k1_tilde)),
            Constraint::Hypf => {
                let chk = self.evaluate(b, c, 1.0);
                if !chk.ok {
                    return Err(Error::Infeasible { tag: self.tag(), slack: chk.slack });
                }
                f64::INFINITY
            }
        };
        // also catches NaN
        if k.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::Infeasible { tag: self.tag(), slack: 0.0 });
        }
        if k.is_infinite() {
            return Ok(k);
        }
        let mut k = k;
        while !self.evaluate(b, c, k).ok {
            k = k.next_down();
        }
        Ok(k)
    }
}

fn dtf4_limit(nu: f64, c4: f64, fl: f64) -> f64 {
    if fl == 0.0 {
        f64::INFINITY
    } else {
        nu.powf(5.0 / 3.0) / (2.0 * c4.cbrt() * fl.powf(2.0 / 3.0))
    }
}

struct Scalars {
    nu3: f64,
    fh: f64,
    fl: f64,
    c5_k0t_over_nu4: f64,
    fh_over_nu2: f64,
    dtfz_base: f64,
}

impl Scalars {
    fn new(b: &BoundsReport, c: &ConstantsSet) -> Self {
        let nu = b.nu;
        let (fh, fl) = (b.forcing.hm1_sq, b.forcing.l2_sq);
        Self {
            nu3: nu.powi(3),
            fh,
            fl,
            c5_k0t_over_nu4: c.c5 * b.k0_tilde / nu.powi(4),
            fh_over_nu2: fh / (nu * nu),
            dtfz_base: 2.0 * b.u0_h1_sq + (1.0 + 2f64.cbrt()) * (nu * nu * fl / c.c4).cbrt(),
        }
    }

    fn lhs_y(&self, kk: f64) -> f64 {
        (1.0 + self.c5_k0t_over_nu4 * kk) * kk + self.fh_over_nu2
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConstraintLimit {
    pub tag: &'static str,
    #[serde(with = "float")]
    pub k_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Admissible {
    pub variant: Variant,
    #[serde(with = "float")]
    pub k_max: f64,
    /// Tag of the constraint attaining `k_max`; `None` when unconstrained.
    pub binding: Option<&'static str>,
    pub constraints: Vec<ConstraintLimit>,
}

/// Largest timestep satisfying every constraint of `variant`.
pub fn dt_restrictions(bounds: &BoundsReport, consts: &ConstantsSet, variant: Variant) -> Result<Admissible> {
    let mut constraints = Vec::new();
    let mut k_max = f64::INFINITY;
    let mut binding = None;
    for &c in variant.constraints() {
        let k = c.limit(bounds, consts)?;
        if k < k_max {
            k_max = k;
            binding = Some(c.tag());
        }
        constraints.push(ConstraintLimit { tag: c.tag(), k_max: k });
    }
    Ok(Admissible { variant, k_max, binding, constraints })
}

/// Every constraint of `variant` evaluated at timestep `k`.
pub fn evaluate_constraints(
    bounds: &BoundsReport,
    consts: &ConstantsSet,
    variant: Variant,
    k: f64,
) -> Vec<(&'static str, Check)> {
    variant.constraints().iter().map(|c| (c.tag(), c.evaluate(bounds, consts, k))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forcing::ForcingNorms;

    fn bounds(l2: f64, h1: f64, fh: f64, fl: f64, nu: f64) -> BoundsReport {
        BoundsReport::from_norms(l2, h1, ForcingNorms { hm1_sq: fh, l2_sq: fl }, nu, &ConstantsSet::default(), 0.0)
            .unwrap()
    }

    #[test]
    fn semi_short_hand_case() {
        let a =
            dt_restrictions(&bounds(1.0, 1.0, 0.0, 0.0, 1.0), &ConstantsSet::default(), Variant::SemiShort).unwrap();
        assert_eq!(a.k_max, 0.125);
        assert_eq!(a.binding, Some("dtf5"));
    }

    #[test]
    fn full_small_at_rest_is_bound_by_dtf0() {
        let c = ConstantsSet::new(0.5, 1.0, 1.0, 1.0, 1.0).unwrap();
        let b = BoundsReport::from_norms(0.0, 0.0, ForcingNorms::default(), 2.0, &c, 0.0).unwrap();
        let a = dt_restrictions(&b, &c, Variant::FullSmall).unwrap();
        assert_eq!(a.k_max, 0.25);
        assert_eq!(a.binding, Some("dtf0"));
        let inf: Vec<_> = a.constraints.iter().filter(|l| l.k_max.is_infinite()).map(|l| l.tag).collect();
        assert_eq!(inf, vec!["hypf", "dtfa", "dtfb"]);
    }

    #[test]
    fn full_short_takes_the_minimum() {
        let b = bounds(0.0, 0.0, 0.5, 1.0, 1.0);
        let c = ConstantsSet::default();
        let a = dt_restrictions(&b, &c, Variant::FullShort).unwrap();
        let dtf4 = a.constraints.iter().find(|l| l.tag == "dtf4").unwrap().k_max;
        assert_eq!(dtf4, 0.5);
        // independent evaluation of each closed form
        let kt = 2.0 + 10.0;
        let ly = (1.0 + 1.0 * 1.0 * kt) * kt + 0.5;
        let bz = (1.0 + 2f64.cbrt()).powi(2);
        let expect = [1.0 / (12.0 * kt * kt), 1.0 / (12.0 * ly * ly), 0.5, (2f64.cbrt() - 1.0) / (2.0 * bz)];
        let min = expect.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((a.k_max - min).abs() <= 1e-15 * min);
        assert_eq!(a.binding, Some("dtfy1"));
        for (l, e) in a.constraints.iter().zip(expect) {
            assert!((l.k_max - e).abs() <= 4.0 * f64::EPSILON * e, "{} {} {}", l.tag, l.k_max, e);
        }
    }

    #[test]
    fn infeasible_smallness() {
        let c = ConstantsSet::default();
        let err = dt_restrictions(&bounds(1.0, 1.0, 0.0, 0.0, 1.0), &c, Variant::FullSmall).unwrap_err();
        assert!(matches!(err, Error::Infeasible { tag: "hypf", .. }));
        let err = dt_restrictions(&bounds(2.0, 2.0, 0.0, 0.0, 1.0), &c, Variant::SemiSmall).unwrap_err();
        assert!(matches!(err, Error::Infeasible { tag: "K0K1s", .. }));
    }

    #[test]
    fn k_max_is_tight() {
        let c = ConstantsSet::new(1.0, 1.0, 1.0, 0.7, 1.3).unwrap();
        for v in Variant::ALL {
            let b =
                BoundsReport::from_norms(0.05, 0.1, ForcingNorms { hm1_sq: 0.01, l2_sq: 0.02 }, 0.9, &c, 0.0).unwrap();
            let a = dt_restrictions(&b, &c, v).unwrap();
            assert!(a.k_max.is_finite());
            assert!(evaluate_constraints(&b, &c, v, a.k_max).iter().all(|(_, chk)| chk.ok));
            assert!(evaluate_constraints(&b, &c, v, 1.01 * a.k_max).iter().any(|(_, chk)| !chk.ok));
        }
    }
}
