use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{product, rel_diff, C64};

use super::{AdditiveSpec, SeriesKind, ThetaSeriesSpec, VwpSpec, CLASSIFY_TOL};

/// Structural flags of a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub balanced: bool,
    pub well_poised: bool,
    pub very_well_poised: bool,
    /// The sum-of-squares constraint; only defined for additive parameters.
    pub modular_constraint: Option<bool>,
    pub elliptic: bool,
    /// Sign `ε` of the root `εs` matched by the very-well-poised parameters.
    pub vwp_root_sign: Option<i8>,
}

fn close(a: C64, b: C64) -> bool {
    rel_diff(a, b) <= CLASSIFY_TOL
}

/// Removes each target from `pool` once; true if all were found.
fn contains_multiset(pool: &[C64], targets: &[C64]) -> bool {
    let mut used = vec![false; pool.len()];
    targets.iter().all(
        |&t| match (0..pool.len()).find(|&i| !used[i] && close(pool[i], t)) {
            Some(i) => {
                used[i] = true;
                true
            }
            None => false,
        },
    )
}

fn check_dimensions(spec: &ThetaSeriesSpec) -> Result<()> {
    let (r, s) = (spec.numerator.len(), spec.denominator.len());
    let ok = match spec.kind {
        SeriesKind::UnilateralE => r == s + 1,
        SeriesKind::BilateralG => r == s,
    };
    if ok && r > 0 {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{r} numerator and {s} denominator parameters do not fit the {:?} kind",
            spec.kind
        )))
    }
}

/// Balancing, (very-)well-poisedness and ellipticity of a multiplicative spec.
pub fn classify(spec: &ThetaSeriesSpec) -> Result<Classification> {
    check_dimensions(spec)?;
    let q = spec.nome.q;
    let p = spec.nome.p;
    let num = &spec.numerator;
    let den = &spec.denominator;

    let balanced = match spec.kind {
        SeriesKind::UnilateralE => close(product(num), q * product(den)),
        SeriesKind::BilateralG => close(product(num), product(den)),
    };

    // the common value of t_m w_m, and the numerator entries paired with w's
    let (poise, paired) = match spec.kind {
        SeriesKind::UnilateralE => (q * num[0], &num[1..]),
        SeriesKind::BilateralG => (num[0] * den[0], &num[..]),
    };
    let well_poised = paired.iter().zip(den).all(|(t, w)| close(t * w, poise));

    let mut vwp_root_sign = None;
    if well_poised && q != C64::new(0.0, 0.0) && p != C64::new(0.0, 0.0) {
        let s = (poise / q).sqrt();
        let sp = p.sqrt();
        for eps in [1i8, -1] {
            let es = s * eps as f64;
            let specials = [es * q, -es * q, es * q / sp, -es * q * sp];
            if contains_multiset(paired, &specials) {
                vwp_root_sign = Some(eps);
                break;
            }
        }
    }

    Ok(Classification {
        balanced,
        well_poised,
        very_well_poised: vwp_root_sign.is_some(),
        modular_constraint: None,
        elliptic: balanced,
        vwp_root_sign,
    })
}

/// Classification of the expanded form of a very-well-poised spec.
pub fn classify_vwp(spec: &VwpSpec) -> Result<Classification> {
    spec.validate()?;
    classify(&spec.to_theta_series()?)
}

/// Additive classification: balancing `Σu = Σv` and the sum-of-squares
/// constraint `Σu² = Σv²`, where `v` includes the implicit `1` of the
/// unilateral kind.
pub fn classify_additive(spec: &AdditiveSpec) -> Result<Classification> {
    spec.validate()?;
    let mult = classify(&spec.to_theta_series()?)?;
    let full = spec.full_denominator();
    if spec.numerator.len() != full.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} numerator and {} denominator parameters (with the implicit [1]) differ",
            spec.numerator.len(),
            full.len()
        )));
    }
    let su: C64 = spec.numerator.iter().sum();
    let sv: C64 = full.iter().sum();
    let su2: C64 = spec.numerator.iter().map(|u| u * u).sum();
    let sv2: C64 = full.iter().map(|v| v * v).sum();
    let balanced = additive_close(su, sv);
    Ok(Classification {
        balanced,
        modular_constraint: Some(additive_close(su2, sv2)),
        elliptic: balanced,
        ..mult
    })
}

/// Relative comparison with a unit floor, since parameter sums may vanish.
pub(crate) fn additive_close(a: C64, b: C64) -> bool {
    (a - b).norm() <= CLASSIFY_TOL * a.norm().max(b.norm()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::c;
    use crate::theta::{ModularPair, Nome};

    fn nome() -> Nome {
        Nome::new(c(0.41, 0.17), c(0.12, 0.29)).unwrap()
    }

    #[test]
    fn ft_family_is_balanced_and_vwp() {
        let nm = nome();
        let ts = [c(0.6, 0.2), c(-0.5, 0.45), c(0.7, -0.3), c(0.55, 0.5)];
        let t0 = c(0.8, 0.1);
        let t5 = nm.q / (t0 * product(&ts));
        let mut all = ts.to_vec();
        all.push(t5);
        let spec = VwpSpec::unilateral(t0, all, c(1.0, 0.0), nm);
        let cl = classify_vwp(&spec).unwrap();
        assert!(cl.balanced && cl.well_poised && cl.very_well_poised && cl.elliptic);
        assert_eq!(cl.vwp_root_sign, Some(1));
    }

    #[test]
    fn equal_lists_are_balanced_and_well_poised() {
        let nm = nome();
        let a = vec![c(0.3, 0.2)];
        let g = ThetaSeriesSpec::bilateral(a.clone(), a, c(2.0, 1.0), nm);
        let cl = classify(&g).unwrap();
        assert!(cl.balanced && cl.well_poised && !cl.very_well_poised);
    }

    #[test]
    fn random_spec_has_no_flags() {
        let nm = nome();
        let spec = ThetaSeriesSpec::unilateral(
            vec![c(0.3, 0.2), c(0.5, -0.1), c(-0.7, 0.3)],
            vec![c(0.6, 0.6), c(0.2, -0.9)],
            c(1.0, 0.0),
            nm,
        );
        let cl = classify(&spec).unwrap();
        assert!(!cl.balanced && !cl.well_poised && !cl.very_well_poised && !cl.elliptic);
    }

    #[test]
    fn dimension_mismatch() {
        let spec = ThetaSeriesSpec::bilateral(vec![c(0.3, 0.2)], vec![], c(1.0, 0.0), nome());
        assert!(matches!(classify(&spec), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn additive_sum_of_squares() {
        let pair = ModularPair::new(c(0.1, 0.2), c(0.05, 0.4)).unwrap();
        let spec = AdditiveSpec {
            kind: SeriesKind::BilateralG,
            numerator: vec![c(0.3, 0.0), c(0.5, 0.0)],
            denominator: vec![c(0.5, 0.0), c(0.3, 0.0)],
            z: c(1.0, 0.0),
            pair,
        };
        let cl = classify_additive(&spec).unwrap();
        assert!(cl.balanced && cl.modular_constraint == Some(true));
        let spec = AdditiveSpec {
            denominator: vec![c(0.6, 0.0), c(0.2, 0.0)],
            ..spec
        };
        let cl = classify_additive(&spec).unwrap();
        assert!(cl.balanced && cl.modular_constraint == Some(false));
    }
}
