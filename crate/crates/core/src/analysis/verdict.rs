//! Per-step verdicts: every inequality of the stability results evaluated
//! on the actual norms of one step.

use serde::{Deserialize, Serialize};

use super::{cubic_analyze, BoundsReport, Check, ConstantsSet, CubicAnalysis, HorizonReport, Variant};
use crate::error::Result;
use crate::forcing::ForcingNorms;
use crate::spectral::NormBundle;
use crate::stepper::Scheme;

/// Which stability result a run is monitored against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monitor {
    #[default]
    None,
    SemiSmall,
    SemiShort,
    FullSmall,
    FullShort,
}

impl Monitor {
    pub fn variant(self) -> Option<Variant> {
        match self {
            Monitor::None => None,
            Monitor::SemiSmall => Some(Variant::SemiSmall),
            Monitor::SemiShort => Some(Variant::SemiShort),
            Monitor::FullSmall => Some(Variant::FullSmall),
            Monitor::FullShort => Some(Variant::FullShort),
        }
    }

    /// End of validity of the monitored bound, if it is a short-time result.
    pub fn horizon(self, h: &HorizonReport) -> Option<f64> {
        match self {
            Monitor::SemiShort => Some(h.t_star_semi),
            Monitor::FullShort => Some(h.t_f_star),
            _ => None,
        }
    }
}

/// Everything a verdict needs besides the norms of the step itself.
#[derive(Clone, Copy, Debug)]
pub struct StepContext<'a> {
    pub scheme: Scheme,
    pub monitor: Monitor,
    pub k: f64,
    pub nu: f64,
    pub consts: &'a ConstantsSet,
    pub bounds: &'a BoundsReport,
    pub horizons: &'a HorizonReport,
    /// Time of the new level, `tₙ = nk`.
    pub t: f64,
}

/// Verdicts for one step. Fields that only apply to the fully implicit
/// scheme are `None` for semi-implicit steps; `bound` is `None` when no
/// result is monitored or the step lies beyond the short-time horizon.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepVerdict {
    /// `(1 + νk/c0)|uⁿ|² ≤ |uⁿ⁻¹|² + k|fⁿ|²_{H⁻¹}/ν`
    pub l2_recurrence: Check,
    /// Semi-implicit: `|∇uⁿ|² + (3ν/2 − c1|uⁿ⁻¹|_{L³}) k|Δuⁿ|² ≤ |∇uⁿ⁻¹|² + (2k/ν)|fⁿ|²`.
    /// Fully implicit: `G(|∇uⁿ|²; x) ≥ 0`.
    pub h1_recurrence: Check,
    /// The one-step lemma's two timestep restrictions on `K⁽ⁿ⁻¹⁾`.
    pub lemma_hypotheses: Option<Check>,
    /// `|∇uⁿ|² ≤ y1`; `None` also when the cubic has no positive roots.
    pub y1_membership: Option<Check>,
    /// `(1 + νk/(4c0))|∇uⁿ|² ≤ x`
    pub linf_recurrence: Option<Check>,
    /// `x ≤ ν²/(2 sqrt(c0 c4))`, under which the previous line must hold.
    pub linf_hypothesis: Option<Check>,
    /// `|∇uⁿ|² ≤ (1 + ak)x`, reported when `ak ≤ 2^{1/3} − 1`.
    pub explicit_bound: Option<Check>,
    /// The unreduced restriction with the actual `|uⁿ|²`, checked after the step.
    pub dtf2_posteriori: Option<Check>,
    /// Conclusion of the monitored result at this step.
    pub bound: Option<Check>,
    /// `|uⁿ⁻¹|_{L³} ≤ ν/(2 c1)`
    pub smallness: Check,
    #[serde(skip)]
    pub cubic: CubicAnalysis,
}

impl StepVerdict {
    fn checks(&self) -> impl Iterator<Item = &Check> {
        [Some(&self.l2_recurrence), Some(&self.h1_recurrence), Some(&self.smallness)]
            .into_iter()
            .chain([
                self.lemma_hypotheses.as_ref(),
                self.y1_membership.as_ref(),
                self.linf_recurrence.as_ref(),
                self.explicit_bound.as_ref(),
                self.bound.as_ref(),
            ])
            .flatten()
    }

    /// Smallest normalised slack over all applicable checks.
    pub fn slack_min(&self) -> f64 {
        self.checks().map(|c| c.fraction).fold(f64::INFINITY, f64::min)
    }

    /// A conclusion failed although its hypotheses held. Failed hypotheses
    /// alone are not violations.
    pub fn violation(&self) -> bool {
        let failed = |c: &Option<Check>| matches!(c, Some(chk) if !chk.ok);
        let held = |c: &Option<Check>| matches!(c, Some(chk) if chk.ok);
        let lemma = held(&self.lemma_hypotheses);
        failed(&self.bound)
            || (lemma && failed(&self.y1_membership))
            || (lemma && held(&self.y1_membership) && held(&self.linf_hypothesis) && failed(&self.linf_recurrence))
            || (lemma && failed(&self.explicit_bound))
    }
}

/// Conclusion of the monitored result for a state with norms `new` at time
/// `ctx.t`.
pub fn bound_check(new: &NormBundle, ctx: &StepContext) -> Option<Check> {
    let b = ctx.bounds;
    let l2 = || Check::new(new.l2_sq, b.discrete_l2_bound());
    let within = |h: f64| ctx.t <= h;
    match ctx.monitor {
        Monitor::None => None,
        Monitor::SemiSmall => Some(Check::new(new.h1_sq, b.semi_h1_bound()).and(l2())),
        Monitor::FullSmall => Some(Check::new(new.h1_sq, b.k1_tilde).and(l2())),
        Monitor::SemiShort | Monitor::FullShort => ctx
            .monitor
            .horizon(ctx.horizons)
            .filter(|&h| within(h))
            .map(|_| Check::new(new.h1_sq, 2.0 * b.u0_h1_sq + b.f_short)),
    }
}

pub fn step_verdict(prev: &NormBundle, new: &NormBundle, f_n: &ForcingNorms, ctx: &StepContext) -> Result<StepVerdict> {
    let (k, nu) = (ctx.k, ctx.nu);
    let c = ctx.consts;
    let b = ctx.bounds;
    let fl_sup = b.forcing.l2_sq;
    let cubic = cubic_analyze(prev.h1_sq, fl_sup, nu, k, c)?;
    let nu3 = nu.powi(3);

    let l2_recurrence = Check::new((1.0 + nu * k / c.c0) * new.l2_sq, prev.l2_sq + k * f_n.hm1_sq / nu);
    let smallness = Check::new(prev.l3, nu / (2.0 * c.c1));

    let full = ctx.scheme == Scheme::FullyImplicit;
    let h1_recurrence = if full {
        let g = cubic.eval(new.h1_sq);
        let scale = cubic.x.max(f64::MIN_POSITIVE);
        Check { ok: g >= 0.0, slack: g, fraction: g / scale }
    } else {
        Check::new(new.h1_sq + (1.5 * nu - c.c1 * prev.l3) * k * new.h2_sq, prev.h1_sq + 2.0 * k / nu * f_n.l2_sq)
    };

    let mut v = StepVerdict {
        l2_recurrence,
        h1_recurrence,
        lemma_hypotheses: None,
        y1_membership: None,
        linf_recurrence: None,
        linf_hypothesis: None,
        explicit_bound: None,
        dtf2_posteriori: None,
        bound: bound_check(new, ctx),
        smallness,
        cubic,
    };
    if full {
        let kk = b.lemma_k(prev.h1_sq);
        let fh_sup = b.forcing.hm1_sq;
        let dtfx = Check::new(kk, 0.5 * (nu3 / (3.0 * c.c4 * k)).sqrt());
        let dtfy = Check::new(
            (1.0 + c.c5 / nu.powi(4) * b.k0_tilde * kk) * kk + fh_sup / (nu * nu),
            (nu3 / (12.0 * c.c4 * k)).sqrt(),
        );
        v.lemma_hypotheses = Some(dtfx.and(dtfy));
        v.y1_membership = cubic.y1.map(|y1| Check::new(new.h1_sq, y1));
        v.linf_recurrence = Some(Check::new((1.0 + nu * k / (4.0 * c.c0)) * new.h1_sq, cubic.x));
        v.linf_hypothesis = Some(Check::new(cubic.x, nu * nu / (2.0 * (c.c0 * c.c4).sqrt())));
        if cubic.dtf3_ok {
            v.explicit_bound = Some(Check::new(new.h1_sq, cubic.explicit_bound(k)));
        }
        v.dtf2_posteriori = Some(Check::new(
            (2.0 + 2.0 * c.c5 / nu.powi(4) * new.l2_sq * prev.h1_sq) * prev.h1_sq + 2.0 / (nu * nu) * fh_sup,
            (nu3 / (3.0 * c.c4 * k)).sqrt(),
        ));
    }
    Ok(v)
}
