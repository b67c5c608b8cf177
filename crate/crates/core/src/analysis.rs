//! Closed-form quantities: critical jumping rates per order, strong
//! regularity closed forms and search-condition checks, the third-order
//! perturbation report, and the Taylor-gap diagnostic.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::graph::SrgParams;

/// Which closed form produced a jumping rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaFormula {
    /// j = 1: γ = 1/N.
    Grover1N,
    /// j = 2: γ = 1/k + 1/((N−1)μ).
    SrgKMu,
    /// j = 3: γ = 1/(M²(M−3)).
    ThirdOrderExact,
    /// γ = 1/(M−1)^j, the finite-M choice that also covers j ≥ 4.
    PracticalMminus1PowJ,
}

impl GammaFormula {
    pub fn id(self) -> &'static str {
        match self {
            GammaFormula::Grover1N => "grover_1N",
            GammaFormula::SrgKMu => "srg_k_mu",
            GammaFormula::ThirdOrderExact => "third_order_exact",
            GammaFormula::PracticalMminus1PowJ => "practical_Mminus1_pow_j",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaChoice {
    pub value: f64,
    pub formula: GammaFormula,
}

/// The critical jumping rate for `K_M^{⊗j}`: 1/N for the complete graph,
/// the strongly-regular rate for j = 2, 1/(M²(M−3)) for j = 3, and the
/// practical 1/(M−1)^j for higher orders where no exact rate is derived.
pub fn critical_gamma(m: u64, j: u32) -> Result<GammaChoice> {
    if m < 2 {
        return Err(Error::invalid(format!("initiator needs at least 2 vertices, got {m}")));
    }
    if j == 0 {
        return Err(Error::invalid("order must be at least 1"));
    }
    match j {
        1 => Ok(GammaChoice { value: 1.0 / m as f64, formula: GammaFormula::Grover1N }),
        2 => {
            if m < 3 {
                return Err(Error::SingularFormula(
                    "the j = 2 rate needs μ > 0, which requires M ≥ 3".to_string(),
                ));
            }
            let p = srg_closed_form(m)?;
            let value = 1.0 / p.k as f64 + 1.0 / (((p.n - 1) * p.mu) as f64);
            Ok(GammaChoice { value, formula: GammaFormula::SrgKMu })
        }
        3 => {
            if m < 4 {
                return Err(Error::SingularFormula(
                    "1/(M²(M−3)) is singular at M = 3; use the practical rate 1/(M−1)³"
                        .to_string(),
                ));
            }
            let value = 1.0 / (m as f64 * m as f64 * (m - 3) as f64);
            Ok(GammaChoice { value, formula: GammaFormula::ThirdOrderExact })
        }
        _ => practical_gamma(m, j),
    }
}

/// γ = 1/(M−1)^j, labeled "practical" in all outputs.
pub fn practical_gamma(m: u64, j: u32) -> Result<GammaChoice> {
    if m < 2 {
        return Err(Error::invalid(format!("initiator needs at least 2 vertices, got {m}")));
    }
    let value = 1.0 / ((m - 1) as f64).powi(j as i32);
    Ok(GammaChoice { value, formula: GammaFormula::PracticalMminus1PowJ })
}

/// `K_M ⊗ K_M` is strongly regular with parameters
/// (M², (M−1)², (M−2)², (M−1)(M−2)).
pub fn srg_closed_form(m: u64) -> Result<SrgParams> {
    if m < 3 {
        return Err(Error::invalid(format!("λ and μ degenerate below M = 3, got {m}")));
    }
    Ok(SrgParams {
        n: m * m,
        k: (m - 1) * (m - 1),
        lambda: (m - 2) * (m - 2),
        mu: (m - 1) * (m - 2),
    })
}

/// Ratio diagnostics on the second-power strongly regular parameters.
///
/// For this family k/(μN)^(2/3) vanishes like M^(-2/3), while k/N is bounded:
/// (M-1)²/M² climbs toward 1 rather than shrinking, so only the first ratio
/// is a vanishing condition and `satisfied` tracks it alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrgConditionReport {
    pub k_over_n: f64,
    pub k_over_mu_n_23: f64,
    /// k/(μN)^(2/3) strictly decreases from M to 2M.
    pub satisfied: bool,
}

pub fn srg_search_conditions(m: u64) -> Result<SrgConditionReport> {
    let ratios = |m: u64| -> Result<(f64, f64)> {
        let p = srg_closed_form(m)?;
        let k = p.k as f64;
        Ok((k / p.n as f64, k / ((p.mu * p.n) as f64).powf(2.0 / 3.0)))
    };
    let (k_over_n, k_over_mu_n_23) = ratios(m)?;
    let (_, next_mu) = ratios(2 * m)?;
    Ok(SrgConditionReport {
        k_over_n,
        k_over_mu_n_23,
        satisfied: next_mu < k_over_mu_n_23,
    })
}

/// Third-order degenerate-perturbation summary at the exact critical rate.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub m: u64,
    pub gamma: f64,
    pub e0: f64,
    pub e1: f64,
    /// ΔE = E1 − E0.
    pub gap: f64,
    /// π/ΔE = (π/2)√M(M−3).
    pub runtime_estimate: f64,
    pub basis_note: &'static str,
}

const PERTURBATION_BASIS_NOTE: &str = "basis {|a>, |r>, |r'>, |r''>}: marked vertex, uniform \
superposition of unmarked vertices, and two orthogonal complements; the degenerate pair \
{|a>, |r>} mixes with coefficients (alpha_a, alpha_r) = (+-1, 1)/sqrt(2)";

/// At γ = 1/(M²(M−3)) the two lowest levels are E = −1 ∓ 1/(√M(M−3)),
/// giving gap 2/(√M(M−3)) and rotation time π/ΔE = (π/2)√M(M−3).
pub fn perturbation_report(m: u64) -> Result<PerturbationReport> {
    if m < 3 {
        return Err(Error::invalid(format!("perturbation analysis needs M ≥ 4, got {m}")));
    }
    if m == 3 {
        return Err(Error::SingularFormula(
            "the critical rate 1/(M²(M−3)) is singular at M = 3".to_string(),
        ));
    }
    let mf = m as f64;
    let split = 1.0 / (mf.sqrt() * (mf - 3.0));
    let gap = 2.0 * split;
    Ok(PerturbationReport {
        m,
        gamma: 1.0 / (mf * mf * (mf - 3.0)),
        e0: -1.0 - split,
        e1: -1.0 + split,
        gap,
        runtime_estimate: PI / gap,
        basis_note: PERTURBATION_BASIS_NOTE,
    })
}

/// Difference between the practical and exact third-order rates. The two
/// expand as 1/M³ + 3/M⁴ + 6/M⁵ and 1/M³ + 3/M⁴ + 9/M⁵, so M⁵ times the
/// difference tends to −3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorGap {
    /// 1/(M−1)³ − 1/(M²(M−3)).
    pub difference: f64,
    /// difference · M⁵.
    pub scaled: f64,
}

pub fn gamma_taylor_gap(m: u64) -> Result<TaylorGap> {
    if m == 3 {
        return Err(Error::SingularFormula(
            "the exact third-order rate is singular at M = 3".to_string(),
        ));
    }
    if m < 4 {
        return Err(Error::invalid(format!("Taylor comparison needs M ≥ 4, got {m}")));
    }
    let mf = m as f64;
    // 1/(M−1)³ − 1/(M²(M−3)) = (1 − 3M) / ((M−1)³ M² (M−3)), which avoids
    // the catastrophic cancellation of subtracting the two rates directly.
    let difference = (1.0 - 3.0 * mf) / ((mf - 1.0).powi(3) * mf * mf * (mf - 3.0));
    Ok(TaylorGap { difference, scaled: difference * mf.powi(5) })
}

/// Grover-optimal search time π√N/2.
pub fn predicted_runtime(n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("N must be at least 1"));
    }
    Ok(PI * (n as f64).sqrt() / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use crate::graph::{Graph, SrgCheck};

    #[test]
    fn critical_gamma_examples() {
        let g = critical_gamma(256, 1).unwrap();
        assert_eq!(g.value, 1.0 / 256.0);
        assert_eq!(g.formula.id(), "grover_1N");

        let g = critical_gamma(256, 2).unwrap();
        let expect = 1.0 / (255.0 * 255.0) + 1.0 / ((65536.0 - 1.0) * 255.0 * 254.0);
        assert_relative_eq!(g.value, expect, max_relative = 1e-15);

        // Sixth order at M = 4: 1/3⁶ = 1/729 ≈ 0.001372.
        let g = critical_gamma(4, 6).unwrap();
        assert_relative_eq!(g.value, 1.0 / 729.0, max_relative = 1e-15);
        assert!((g.value - 0.001372).abs() < 5e-7);
        assert_eq!(g.formula.id(), "practical_Mminus1_pow_j");

        assert!(matches!(critical_gamma(3, 3), Err(Error::SingularFormula(_))));
        assert!(matches!(critical_gamma(2, 2), Err(Error::SingularFormula(_))));
        assert!(critical_gamma(1, 1).is_err());
    }

    #[test]
    fn srg_closed_form_examples() {
        let p = srg_closed_form(4).unwrap();
        assert_eq!((p.n, p.k, p.lambda, p.mu), (16, 9, 4, 6));
        let p = srg_closed_form(3).unwrap();
        assert_eq!((p.n, p.k, p.lambda, p.mu), (9, 4, 1, 2));
        assert!(srg_closed_form(2).is_err());
        for m in 3..=8 {
            assert!(srg_closed_form(m).unwrap().feasibility_holds());
        }
    }

    #[test]
    fn srg_closed_form_matches_brute_force() {
        for m in 3..=8u64 {
            let g = Graph::complete(m).unwrap().kron_power(2).unwrap();
            let SrgCheck::Params(p) = g.srg_params().unwrap() else {
                panic!("K_{m} ⊗ K_{m} should be strongly regular")
            };
            assert_eq!(p, srg_closed_form(m).unwrap());
        }
    }

    #[test]
    fn search_conditions() {
        let r = srg_search_conditions(4).unwrap();
        assert_relative_eq!(r.k_over_n, 9.0 / 16.0, max_relative = 1e-15);
        assert!(r.satisfied);

        let mut prev = srg_search_conditions(4).unwrap();
        for m in [8u64, 16, 32] {
            let cur = srg_search_conditions(m).unwrap();
            // k/(μN)^(2/3) ~ M^(-2/3) shrinks; k/N = (M-1)²/M² climbs toward 1.
            assert!(cur.k_over_mu_n_23 < prev.k_over_mu_n_23);
            assert!(cur.k_over_n > prev.k_over_n);
            assert!(cur.satisfied);
            prev = cur;
        }
        // k/N → 1 from below as M grows.
        let p = srg_closed_form(1 << 20).unwrap();
        assert!((p.k as f64 / p.n as f64 - 1.0).abs() < 3e-6);
    }

    #[test]
    fn perturbation_examples() {
        let r = perturbation_report(256).unwrap();
        assert_relative_eq!(r.runtime_estimate, PI / 2.0 * 16.0 * 253.0, max_relative = 1e-12);
        assert!((r.runtime_estimate - 6358.4).abs() < 0.2);
        assert_relative_eq!(r.gap, r.e1 - r.e0, max_relative = 1e-12);
        assert!(r.e0 < r.e1);
        assert!(matches!(perturbation_report(3), Err(Error::SingularFormula(_))));
        assert!(matches!(perturbation_report(2), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn taylor_gap_examples() {
        let t = gamma_taylor_gap(256).unwrap();
        assert!((t.scaled + 3.0).abs() <= 0.1, "scaled = {}", t.scaled);
        let t = gamma_taylor_gap(10_000).unwrap();
        assert!((t.scaled + 3.0).abs() <= 0.003, "scaled = {}", t.scaled);
        // The simplified quotient must agree with the direct difference.
        for m in [8u64, 64, 512] {
            let mf = m as f64;
            let direct = 1.0 / (mf - 1.0).powi(3) - 1.0 / (mf * mf * (mf - 3.0));
            let t = gamma_taylor_gap(m).unwrap();
            assert_relative_eq!(t.difference, direct, max_relative = 1e-9);
        }
        assert!(matches!(gamma_taylor_gap(3), Err(Error::SingularFormula(_))));
    }

    #[test]
    fn taylor_gap_converges_to_minus_three() {
        let mut prev = f64::INFINITY;
        for m in [16u64, 32, 64, 128, 256, 512] {
            let t = gamma_taylor_gap(m).unwrap();
            let err = (t.scaled + 3.0).abs();
            assert!(err < prev, "M = {m}");
            prev = err;
        }
    }

    #[test]
    fn predicted_runtime_examples() {
        assert!((predicted_runtime(256).unwrap() - 25.13).abs() < 0.01);
        assert!((predicted_runtime(256 * 256).unwrap() - 402.12).abs() < 0.01);
        assert_relative_eq!(predicted_runtime(1).unwrap(), PI / 2.0, max_relative = 1e-15);
        for (m, j) in [(4u64, 3u32), (5, 2), (9, 4)] {
            assert_relative_eq!(
                predicted_runtime(m.pow(j)).unwrap(),
                PI / 2.0 * (m as f64).powf(j as f64 / 2.0),
                max_relative = 1e-12
            );
        }
        assert!(predicted_runtime(0).is_err());
    }
}
