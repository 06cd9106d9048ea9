//! State-dependent transition functions.

use crate::error::{nonneg, Result};
use crate::params::ModelParams;

/// Probability that an undergraduate completer enters graduate study.
///
/// Falls linearly from `p_UG_max` at `G = 0` to zero at the graduate
/// capacity scale and stays at zero beyond it.
pub fn p_ug(g: f64, params: &ModelParams) -> Result<f64> {
    nonneg("G", g)?;
    params.validate()?;
    Ok(p_ug_unchecked(g, params))
}

/// Postdoc-to-faculty transition intensity under competition.
///
/// `p_PF_max / (1 + alpha_F * F / K_F)`: equal to the ceiling with no
/// faculty and strictly decreasing in `F` when `alpha_F > 0`.
pub fn p_pf(f: f64, params: &ModelParams) -> Result<f64> {
    nonneg("F", f)?;
    params.validate()?;
    Ok(p_pf_unchecked(f, params))
}

#[inline]
pub(crate) fn p_ug_unchecked(g: f64, params: &ModelParams) -> f64 {
    params.p_ug_max * (1.0 - g / params.k_g).max(0.0)
}

#[inline]
pub(crate) fn p_pf_unchecked(f: f64, params: &ModelParams) -> f64 {
    params.p_pf_max / (1.0 + params.alpha_f * f / params.k_f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ParamName;
    use proptest::prelude::*;

    const BASE: ModelParams = ModelParams::BASELINE;

    #[test]
    fn p_ug_examples() {
        let p = BASE.with(ParamName::PUGMax, 0.5);
        assert_eq!(p_ug(0.0, &p).unwrap(), 0.5);
        assert_eq!(p_ug(25_000.0, &p).unwrap(), 0.0);
        assert_eq!(p_ug(12_500.0, &p).unwrap(), 0.25);
        assert_eq!(p_ug(1e9, &p).unwrap(), 0.0);
    }

    #[test]
    fn p_pf_examples() {
        assert_eq!(p_pf(0.0, &BASE).unwrap(), 0.18);
        assert!((p_pf(4_000.0, &BASE).unwrap() - 0.09).abs() < 1e-15);
        assert!((p_pf(8_000.0, &BASE).unwrap() - 0.06).abs() < 1e-15);
    }

    #[test]
    fn negative_stock_rejected() {
        assert!(p_ug(-1.0, &BASE).is_err());
        assert!(p_pf(-1.0, &BASE).is_err());
        assert!(p_pf(f64::NAN, &BASE).is_err());
    }

    proptest! {
        #[test]
        fn p_ug_bounded_and_nonincreasing(g1 in 0.0..1e6f64, dg in 0.0..1e6f64, cap in 0.0..=1.0f64) {
            let p = BASE.with(ParamName::PUGMax, cap);
            let a = p_ug(g1, &p).unwrap();
            let b = p_ug(g1 + dg, &p).unwrap();
            prop_assert!((0.0..=cap).contains(&a));
            prop_assert!(b <= a);
            if g1 >= p.k_g {
                prop_assert_eq!(a, 0.0);
            }
        }

        #[test]
        fn p_pf_strictly_decreasing(f in 0.0..1e6f64, df in 1e-3..1e5f64, alpha in 1e-3..5.0f64) {
            let p = BASE.with(ParamName::AlphaF, alpha);
            let a = p_pf(f, &p).unwrap();
            let b = p_pf(f + df, &p).unwrap();
            prop_assert!(a > 0.0 && a <= p.p_pf_max);
            prop_assert!(b < a);
        }
    }
}
