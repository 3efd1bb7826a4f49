//! Covector-field perturbations: field strength, the two symmetric tensors
//! built from first derivatives, their blend, Maxwell and Lorenz residuals,
//! and sources expressed through a scalar field.
//!
//! Light speed is 1 throughout. Jacobians use the layout `J[i][k] = ∂_i A_k`.

use std::f64::consts::PI;

use crate::field::{CovectorField, ScalarField};
use crate::tensor_core::{Mat4, Point4, SymTensor2, ETA};

/// Weight `chi` of the first tensor in the blend `chi*h1 + (1-chi)*h2`.
#[derive(Debug, Clone, PartialEq)]
pub enum Blend {
    Constant(f64),
    Field(ScalarField),
}

impl Default for Blend {
    fn default() -> Self {
        Blend::Constant(0.5)
    }
}

impl Blend {
    pub fn at(&self, x: &Point4) -> f64 {
        match self {
            Blend::Constant(c) => *c,
            Blend::Field(f) => f.value(x),
        }
    }
}

/// Coupling constants of the combined perturbations; no values are known,
/// all default to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Couplings {
    pub mu: f64,
    pub gamma: f64,
    pub q: f64,
}

impl Default for Couplings {
    fn default() -> Self {
        Self {
            mu: 1.0,
            gamma: 1.0,
            q: 1.0,
        }
    }
}

/// `F_ij = ∂_i A_j - ∂_j A_i`.
pub fn field_strength(a: &CovectorField, x: &Point4) -> Mat4 {
    strength_from_jacobian(&a.jacobian(x))
}

pub(crate) fn strength_from_jacobian(j: &Mat4) -> Mat4 {
    let mut f = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            f[i][k] = j[i][k] - j[k][i];
        }
    }
    f
}

/// Both evaluation routes of the invariant `eta^ij eta^km F_ik F_jm`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarLa {
    /// Contraction of the field strength.
    pub contracted: f64,
    /// `2 eta eta (∂A ∂A - ∂A ∂A)` written with raw first derivatives.
    pub expanded: f64,
    /// Sum of the magnitudes of the expanded terms, for relative comparisons.
    pub scale: f64,
}

impl ScalarLa {
    pub fn value(&self) -> f64 {
        self.contracted
    }
}

pub fn scalar_la(a: &CovectorField, x: &Point4) -> ScalarLa {
    scalar_la_from_jacobian(&a.jacobian(x))
}

pub(crate) fn scalar_la_from_jacobian(j: &Mat4) -> ScalarLa {
    let f = strength_from_jacobian(j);
    let mut contracted = 0.0;
    let mut expanded = 0.0;
    let mut scale = 0.0;
    for i in 0..4 {
        for k in 0..4 {
            let w = ETA[i] * ETA[k];
            contracted += w * f[i][k] * f[i][k];
            let t1 = j[i][k] * j[i][k];
            let t2 = j[i][k] * j[k][i];
            expanded += 2.0 * w * (t1 - t2);
            scale += 2.0 * (t1.abs() + t2.abs());
        }
    }
    ScalarLa {
        contracted,
        expanded,
        scale,
    }
}

/// `h1_ij = eta^km (2 ∂_iA_k ∂_jA_m - ∂_iA_k ∂_mA_j - ∂_jA_k ∂_mA_i)`.
pub fn h1_tensor(a: &CovectorField, x: &Point4) -> SymTensor2 {
    h1_from_jacobian(&a.jacobian(x))
}

/// `h2_ij = eta^km (2 ∂_kA_i ∂_mA_j - ∂_kA_i ∂_jA_m - ∂_kA_j ∂_iA_m)`.
pub fn h2_tensor(a: &CovectorField, x: &Point4) -> SymTensor2 {
    h2_from_jacobian(&a.jacobian(x))
}

pub(crate) fn h1_from_jacobian(j: &Mat4) -> SymTensor2 {
    SymTensor2::from_fn(|i, jj| {
        (0..4)
            .map(|k| ETA[k] * (2.0 * j[i][k] * j[jj][k] - j[i][k] * j[k][jj] - j[jj][k] * j[k][i]))
            .sum()
    })
}

pub(crate) fn h2_from_jacobian(j: &Mat4) -> SymTensor2 {
    SymTensor2::from_fn(|i, jj| {
        (0..4)
            .map(|k| ETA[k] * (2.0 * j[k][i] * j[k][jj] - j[k][i] * j[jj][k] - j[k][jj] * j[i][k]))
            .sum()
    })
}

/// `chi*h1 + (1-chi)*h2`.
pub fn blended_h(a: &CovectorField, blend: &Blend, x: &Point4) -> SymTensor2 {
    let chi = blend.at(x);
    let j = a.jacobian(x);
    h1_from_jacobian(&j)
        .scale(chi)
        .add(&h2_from_jacobian(&j).scale(1.0 - chi))
}

/// `eta^km F_ik F_jm`: the part of `h1` and `h2` shared by both, unchanged by
/// gradient shifts.
pub fn strength_square(a: &CovectorField, x: &Point4) -> SymTensor2 {
    let f = field_strength(a, x);
    SymTensor2::from_fn(|i, j| (0..4).map(|k| ETA[k] * f[i][k] * f[j][k]).sum())
}

/// Per component `k`: `eta^ij ∂_i∂_j A_k - ∂_k(eta^ij ∂_i A_j)`.
pub fn maxwell_residual(a: &CovectorField, x: &Point4) -> [f64; 4] {
    let s = a.second(x);
    std::array::from_fn(|k| {
        let wave: f64 = (0..4).map(|i| ETA[i] * s[i][i][k]).sum();
        let gauge: f64 = (0..4).map(|i| ETA[i] * s[k][i][i]).sum();
        wave - gauge
    })
}

/// `eta^ij ∂_i A_j`; zero in Lorenz gauge.
pub fn lorenz_gauge_residual(a: &CovectorField, x: &Point4) -> f64 {
    let j = a.jacobian(x);
    (0..4).map(|i| ETA[i] * j[i][i]).sum()
}

/// `(16 pi) (A_i j_j + A_j j_i) / 2`.
pub fn source_tensor(a: &CovectorField, current: &CovectorField, x: &Point4) -> SymTensor2 {
    SymTensor2::sym_outer(&a.value(x), &current.value(x)).scale(16.0 * PI)
}

/// Blend plus source: the perturbation describing a field with given sources.
pub fn maxwell_perturbation(
    a: &CovectorField,
    current: &CovectorField,
    blend: &Blend,
    x: &Point4,
) -> SymTensor2 {
    blended_h(a, blend, x).add(&source_tensor(a, current, x))
}

/// `mu * h_A + gamma * h_grav`.
pub fn unified_perturbation(c: &Couplings, h_a: &SymTensor2, h_grav: &SymTensor2) -> SymTensor2 {
    h_a.scale(c.mu).add(&h_grav.scale(c.gamma))
}

/// `j_i = q ∂_i phi` at a point.
pub fn current_from_scalar(phi: &ScalarField, q: f64, x: &Point4) -> [f64; 4] {
    phi.gradient(x).map(|g| q * g)
}

/// `j_i = q ∂_i phi` as a field, so its divergence can be taken analytically.
pub fn current_field(phi: &ScalarField, q: f64) -> CovectorField {
    CovectorField::new(
        format!("{q} grad {}", phi.label()),
        std::array::from_fn(|i| phi.partial(i).scaled(q)),
    )
}

/// `eta^ij ∂_j j_i`.
pub fn continuity_residual(current: &CovectorField, x: &Point4) -> f64 {
    lorenz_gauge_residual(current, x)
}

/// `eta^ij ∂_i ∂_j phi`.
pub fn box_scalar(phi: &ScalarField, x: &Point4) -> f64 {
    let h = phi.hessian(x);
    (0..4).map(|i| ETA[i] * h[i][i]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{catalog, Polynomial};

    fn brute_la(j: &Mat4) -> f64 {
        // eta^ij eta^km F_ik F_jm over all 256 index combinations.
        let f = strength_from_jacobian(j);
        let eta = |a: usize, b: usize| if a == b { ETA[a] } else { 0.0 };
        let mut s = 0.0;
        for i in 0..4 {
            for jj in 0..4 {
                for k in 0..4 {
                    for m in 0..4 {
                        s += eta(i, jj) * eta(k, m) * f[i][k] * f[jj][m];
                    }
                }
            }
        }
        s
    }

    fn brute_h1(j: &Mat4) -> Mat4 {
        let eta = |a: usize, b: usize| if a == b { ETA[a] } else { 0.0 };
        let mut h = [[0.0; 4]; 4];
        for i in 0..4 {
            for jj in 0..4 {
                for k in 0..4 {
                    for m in 0..4 {
                        h[i][jj] += eta(k, m)
                            * (2.0 * j[i][k] * j[jj][m] - j[i][k] * j[m][jj] - j[jj][k] * j[m][i]);
                    }
                }
            }
        }
        h
    }

    fn linear_time() -> CovectorField {
        CovectorField::single("A1 = x0", 1, ScalarField::coordinate(0))
    }

    #[test]
    fn gradient_field_has_no_strength() {
        let f: ScalarField = Polynomial::new().term(1.0, [1, 2, 0, 1]).into();
        let a = CovectorField::gradient_of(&f);
        let x = [0.3, -0.2, 0.5, 0.9];
        let fs = field_strength(&a, &x);
        assert!(fs.iter().flatten().all(|v| v.abs() < 1e-15));
        assert!(scalar_la(&a, &x).value().abs() < 1e-15);
    }

    #[test]
    fn null_wave_strength_at_origin() {
        let a = catalog::null_plane_wave();
        let f = field_strength(&a, &[0.0; 4]);
        assert_eq!(f[0][2], 1.0);
        assert_eq!(f[1][2], -1.0);
        assert_eq!(f[2][0], -1.0);
        let nonzero = f.iter().flatten().filter(|v| **v != 0.0).count();
        assert_eq!(nonzero, 4);
    }

    #[test]
    fn linear_field_strength_and_invariant() {
        let a = linear_time();
        let x = [0.4, 0.1, -0.7, 2.0];
        let f = field_strength(&a, &x);
        assert_eq!(f[0][1], 1.0);
        assert_eq!(f[1][0], -1.0);
        let la = scalar_la(&a, &x);
        assert_eq!(brute_la(&a.jacobian(&x)), -2.0);
        assert_eq!(la.contracted, -2.0);
        assert_eq!(la.expanded, -2.0);
    }

    #[test]
    fn null_wave_invariant_vanishes() {
        let a = catalog::null_plane_wave();
        for x in [[0.3, 0.1, 0.0, 0.0], [1.2, -0.4, 0.5, 0.2]] {
            assert!(scalar_la(&a, &x).value().abs() < 1e-15);
        }
    }

    #[test]
    fn h1_matches_full_contraction() {
        let x = [0.2, -0.6, 0.3, 0.8];
        for a in catalog::covector_families() {
            let j = a.jacobian(&x);
            let oracle = brute_h1(&j);
            let h = h1_tensor(&a, &x);
            for i in 0..4 {
                for k in 0..4 {
                    assert!((h.get(i, k) - oracle[i][k]).abs() < 1e-12, "{}", a.label);
                }
            }
        }
        // A1 = x0: J[0][1] = 1 gives h1 = diag(-2, 0, 0, 0)... computed by the loop.
        let h = h1_tensor(&linear_time(), &x);
        let oracle = brute_h1(&linear_time().jacobian(&x));
        assert_eq!(h.get(0, 0), oracle[0][0]);
        assert_eq!(h.get(0, 0), -2.0);
        assert_eq!(h.get(1, 1), 0.0);
    }

    #[test]
    fn zero_field_gives_zero_tensors() {
        let a = CovectorField::zero();
        let x = [0.1; 4];
        assert_eq!(h1_tensor(&a, &x), SymTensor2::zero());
        assert_eq!(h2_tensor(&a, &x), SymTensor2::zero());
    }

    #[test]
    fn blend_endpoints() {
        let x = [0.2, 0.1, -0.5, 0.3];
        let a = &catalog::covector_families()[3];
        assert_eq!(blended_h(a, &Blend::Constant(1.0), &x), h1_tensor(a, &x));
        assert_eq!(blended_h(a, &Blend::Constant(0.0), &x), h2_tensor(a, &x));
    }

    #[test]
    fn trace_identity_for_any_blend() {
        let x = [0.2, 0.1, -0.5, 0.3];
        let chi_field = Blend::Field(ScalarField::wave(0.9, [1.0, 0.3, 0.0, 0.2], 0.4));
        for a in catalog::covector_families() {
            let la = scalar_la(&a, &x);
            for b in [Blend::Constant(0.0), Blend::Constant(0.5), Blend::Constant(1.0), chi_field.clone()] {
                let tr = blended_h(&a, &b, &x).eta_trace();
                assert!((tr - la.value()).abs() <= 1e-12 * la.scale.max(1.0), "{}", a.label);
            }
        }
    }

    #[test]
    fn h1_and_h2_share_the_strength_square() {
        // h1 = S + D and h2 = S - D with S = eta^km F_ik F_jm.
        let x = [0.6, -0.3, 0.2, 0.1];
        for a in catalog::covector_families() {
            let s = strength_square(&a, &x);
            let mean = h1_tensor(&a, &x).add(&h2_tensor(&a, &x)).scale(0.5);
            assert!(mean.sub(&s).max_abs() < 1e-12, "{}", a.label);
        }
    }

    #[test]
    fn gauge_shift_changes_h1_by_commutator() {
        // For A1 = x0 and f = x0 x1 the shift adds FηH - HηF = diag(-2, -2, 0, 0)
        // to h1; only the blend at chi = 1/2 is unchanged.
        let a = linear_time();
        let f: ScalarField = Polynomial::new().term(1.0, [1, 1, 0, 0]).into();
        let shifted = a.plus_gradient(&f);
        let x = [0.3, 0.4, -0.2, 0.9];
        let d1 = h1_tensor(&shifted, &x).sub(&h1_tensor(&a, &x));
        assert_eq!(d1, SymTensor2::diag([-2.0, -2.0, 0.0, 0.0]));
        let d2 = h2_tensor(&shifted, &x).sub(&h2_tensor(&a, &x));
        assert_eq!(d2, SymTensor2::diag([2.0, 2.0, 0.0, 0.0]));
        let half = Blend::default();
        let db = blended_h(&shifted, &half, &x).sub(&blended_h(&a, &half, &x));
        assert_eq!(db.max_abs(), 0.0);
    }

    #[test]
    fn gauge_shift_of_pure_gauge_base_keeps_h1() {
        let base = CovectorField::gradient_of(&catalog::gauge_functions()[2]);
        let shifted = base.plus_gradient(&catalog::gauge_functions()[3]);
        let x = [0.1, 0.5, -0.4, 0.2];
        assert!(h1_tensor(&shifted, &x).sub(&h1_tensor(&base, &x)).max_abs() < 1e-13);
    }

    #[test]
    fn maxwell_residual_cases() {
        let x = [0.3, -0.2, 0.8, 0.1];
        let r = maxwell_residual(&catalog::null_plane_wave(), &x);
        assert!(r.iter().all(|v| v.abs() < 1e-15));
        let a = CovectorField::single("A1 = (x0)^2", 1, Polynomial::new().term(1.0, [2, 0, 0, 0]).into());
        assert_eq!(maxwell_residual(&a, &x), [0.0, 2.0, 0.0, 0.0]);
        for f in catalog::gauge_functions() {
            let r = maxwell_residual(&CovectorField::gradient_of(&f), &x);
            assert!(r.iter().all(|v| v.abs() < 1e-13));
        }
    }

    #[test]
    fn lorenz_gauge_cases() {
        let x = [0.3, -0.2, 0.8, 0.1];
        assert_eq!(lorenz_gauge_residual(&catalog::null_plane_wave(), &x), 0.0);
        let a = CovectorField::single("A0 = x0", 0, ScalarField::coordinate(0));
        assert_eq!(lorenz_gauge_residual(&a, &x), 1.0);
        // A = (x0 x1, x1^2, x2 x3, -x3^2): div = x1 - 2 x1 - x3 + 2 x3.
        let a = CovectorField::new(
            "poly",
            [
                Polynomial::new().term(1.0, [1, 1, 0, 0]).into(),
                Polynomial::new().term(1.0, [0, 2, 0, 0]).into(),
                Polynomial::new().term(1.0, [0, 0, 1, 1]).into(),
                Polynomial::new().term(-1.0, [0, 0, 0, 2]).into(),
            ],
        );
        let expected = x[1] - 2.0 * x[1] - x[3] + 2.0 * x[3];
        assert!((lorenz_gauge_residual(&a, &x) - expected).abs() < 1e-15);
    }

    #[test]
    fn source_tensor_cases() {
        let x = [0.0; 4];
        let a = CovectorField::single("A0 = 1", 0, ScalarField::constant(1.0));
        assert_eq!(source_tensor(&a, &CovectorField::zero(), &x), SymTensor2::zero());
        let h = source_tensor(&a, &a, &x);
        assert!((h.get(0, 0) - 16.0 * PI).abs() < 1e-14);
        for (i, j) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
            assert_eq!(h.get(i, j), 0.0);
        }
    }

    #[test]
    fn currents_from_scalar() {
        let x = [0.5, 0.2, 0.1, 0.0];
        assert_eq!(current_from_scalar(&ScalarField::constant(3.0), 2.0, &x), [0.0; 4]);
        assert_eq!(current_from_scalar(&ScalarField::coordinate(0), 2.0, &x), [2.0, 0.0, 0.0, 0.0]);
        // Wave solution: box phi = 0 and hence the current is conserved.
        let phi = ScalarField::wave(1.3, [2.0, 1.2, 0.0, 1.6], 0.3);
        let j = current_field(&phi, 0.7);
        for x in [[0.1, 0.2, 0.3, 0.4], [-1.0, 0.5, 0.9, -0.2]] {
            assert!(box_scalar(&phi, &x).abs() < 1e-14);
            assert!(continuity_residual(&j, &x).abs() < 1e-14);
        }
    }
}
