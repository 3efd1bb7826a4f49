//! Identity suites run by `verify` and `h4`.

use fwl_core::berwald_moor::{
    bm_length, bm_length4, bm_length4_expanded, bm_length4_scale, build_g4, build_g4_upper, em_fourth_order,
    generalized_momenta, h4_minkowski_difference, indicatrix_residual, l1_fourth_order, minkowski_length4,
};
use fwl_core::field::{catalog, CovectorField, Polynomial, ScalarField};
use fwl_core::rng;
use fwl_core::tensor_core::{l2, l2_minors, l2_scale, minor2, ulps_apart, ETA};
use fwl_core::two_field::{two_field_l2, FieldPair};
use fwl_core::vector_field::{blended_h, field_strength, scalar_la, Blend};
use fwl_core::{Sign, SymTensor2};
use rand::Rng;
use serde::Serialize;

/// Outcome of one identity suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl SuiteResult {
    fn new(suite: &'static str, residual: f64, threshold: f64) -> Self {
        Self {
            suite,
            residual,
            threshold,
            pass: residual <= threshold,
        }
    }
}

/// Deliberate defects for exercising the failure path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Flip the sign of the (0,1) minor in the minors form.
    MinorSign,
}

/// Random-sample configuration shared by the suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    pub seed: u64,
    pub samples: usize,
}

// Stream ids, one per suite, so suites stay reproducible in isolation.
const STREAM_DET: u64 = 1;
const STREAM_GAUGE: u64 = 2;
const STREAM_TRACE: u64 = 3;
const STREAM_TWO_FIELD: u64 = 4;
const STREAM_H4: u64 = 5;
const STREAM_RANK4: u64 = 6;

/// Points per (family, gauge) pair in the gauge suite.
pub const GAUGE_POINTS: usize = 100;
/// Points per family in the trace suites.
pub const TRACE_POINTS: usize = 100;

pub fn random_sym2<R: Rng>(rng: &mut R, max_abs: f64) -> SymTensor2 {
    SymTensor2::from_fn(|_, _| rng.random_range(-max_abs..=max_abs))
}

pub fn random_wave<R: Rng>(rng: &mut R) -> ScalarField {
    let amp = rng.random_range(-1.0..=1.0);
    let k = rng::point_in_cube(rng);
    let phase = rng.random_range(-3.0..=3.0);
    ScalarField::wave(amp, k, phase)
}

/// A covector whose components are random polynomials of degree at most 3.
pub fn random_polynomial_covector<R: Rng>(rng: &mut R) -> CovectorField {
    let comps = std::array::from_fn(|_| {
        let mut p = Polynomial::new();
        for _ in 0..4 {
            let powers = std::array::from_fn(|_| rng.random_range(0..=1u32));
            let total: u32 = powers.iter().sum();
            if total <= 3 {
                p = p.term(rng.random_range(-1.0..=1.0), powers);
            }
        }
        p = p.term(rng.random_range(-1.0..=1.0), [rng.random_range(0..=2), 0, 0, 0]);
        ScalarField::from(p)
    });
    CovectorField::new("random polynomial", comps)
}

fn faulty_minors(h: &SymTensor2) -> f64 {
    l2_minors(h) - 2.0 * ETA[0] * ETA[1] * minor2(h, 0, 1)
}

/// Expanded vs minors form of the second-order term, in ulps of the term scale.
pub fn det_expansion(s: Sampling, fault: Option<Fault>) -> SuiteResult {
    let mut rng = rng::stream(s.seed, STREAM_DET);
    let mut worst = 0.0f64;
    for _ in 0..s.samples {
        let h = random_sym2(&mut rng, 0.05);
        let minors = match fault {
            Some(Fault::MinorSign) => faulty_minors(&h),
            None => l2_minors(&h),
        };
        worst = worst.max(ulps_apart(l2(&h), minors, l2_scale(&h)));
    }
    SuiteResult::new("det-expansion", worst, 8.0)
}

/// Change of `F`, `L_A` and the even blend under gradient shifts.
pub fn gauge_invariance(s: Sampling) -> SuiteResult {
    let points = rng::points(s.seed, STREAM_GAUGE, GAUGE_POINTS);
    let even = Blend::Constant(0.5);
    let mut worst = 0.0f64;
    for a in catalog::covector_families() {
        for f in catalog::gauge_functions() {
            let b = a.plus_gradient(&f);
            for x in &points {
                let (fa, fb) = (field_strength(&a, x), field_strength(&b, x));
                for i in 0..4 {
                    for j in 0..4 {
                        worst = worst.max((fa[i][j] - fb[i][j]).abs());
                    }
                }
                worst = worst.max((scalar_la(&a, x).value() - scalar_la(&b, x).value()).abs());
                worst = worst.max(blended_h(&a, &even, x).sub(&blended_h(&b, &even, x)).max_abs());
            }
        }
    }
    SuiteResult::new("gauge-invariance", worst, 1e-12)
}

/// `η^ij h_ij = L_A` for blends 0, 1/2 and 1, relative to the term scale.
pub fn trace_identity(s: Sampling) -> SuiteResult {
    let points = rng::points(s.seed, STREAM_TRACE, TRACE_POINTS);
    let mut worst = 0.0f64;
    for a in catalog::covector_families() {
        for x in &points {
            let la = scalar_la(&a, x);
            for chi in [0.0, 0.5, 1.0] {
                let tr = blended_h(&a, &Blend::Constant(chi), x).eta_trace();
                worst = worst.max((tr - la.value()).abs() / la.scale.max(1.0));
            }
        }
    }
    SuiteResult::new("trace-identity", worst, 1e-12)
}

/// Bracket form of the two-field second-order term vs the minors of its metric.
pub fn two_field_minors(s: Sampling) -> SuiteResult {
    let mut rng = rng::stream(s.seed, STREAM_TWO_FIELD);
    let mut worst = 0.0f64;
    for n in 0..s.samples {
        let eps = |b: bool| if b { Sign::Plus } else { Sign::Minus };
        let pair = FieldPair::new(random_wave(&mut rng), random_wave(&mut rng), eps(n % 2 == 0), eps(n % 4 < 2));
        let x = rng::point_in_cube(&mut rng);
        let h = pair.metric_perturbation(&x);
        worst = worst.max(ulps_apart(two_field_l2(&pair, &x), l2_minors(&h), l2_scale(&h)));
    }
    SuiteResult::new("two-field-minors", worst, 8.0)
}

/// Max residuals of the H4 identity families over seeded vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct H4Residuals {
    pub expanded: f64,
    pub contraction: f64,
    pub minkowski_difference: f64,
    pub indicatrix: f64,
    pub euler: f64,
    pub timelike: usize,
}

pub fn h4_residuals(s: Sampling) -> H4Residuals {
    let g = build_g4();
    let mut r = H4Residuals {
        expanded: 0.0,
        contraction: 0.0,
        minkowski_difference: 0.0,
        indicatrix: 0.0,
        euler: 0.0,
        timelike: 0,
    };
    for v in rng::points(s.seed, STREAM_H4, s.samples) {
        let len = bm_length4(&v);
        let scale = bm_length4_scale(&v);
        r.expanded = r.expanded.max((len - bm_length4_expanded(&v)).abs() / scale);
        r.contraction = r.contraction.max((len - g.contract4(&v)).abs() / scale);
        let d = len - minkowski_length4(&v) - h4_minkowski_difference(&v);
        r.minkowski_difference = r.minkowski_difference.max(d.abs() / scale);
        if len > 0.0 {
            r.timelike += 1;
            let p = generalized_momenta(&v).expect("timelike");
            let ind = indicatrix_residual(&p);
            // The expanded contraction cancels terms of size |p|^4 down to 1.
            let contracted = ind.contracted.abs() / bm_length4_scale(&p).max(1.0);
            r.indicatrix = r.indicatrix.max(ind.product.abs()).max(contracted);
            let ds = bm_length(&v).expect("timelike");
            let pv: f64 = (0..4).map(|i| p[i] * v[i]).sum();
            r.euler = r.euler.max((pv - ds).abs() / ds);
        }
    }
    r
}

impl H4Residuals {
    pub fn suites(&self) -> Vec<SuiteResult> {
        vec![
            SuiteResult::new("h4-expanded", self.expanded, 1e-12),
            SuiteResult::new("h4-contraction", self.contraction, 1e-12),
            SuiteResult::new("h4-minkowski-difference", self.minkowski_difference, 1e-12),
            SuiteResult::new("h4-indicatrix", self.indicatrix, 1e-10),
            SuiteResult::new("h4-euler", self.euler, 1e-12),
        ]
    }
}

/// Covariant and contravariant tables, compared entry by entry.
pub fn self_duality() -> SuiteResult {
    let (lo, up) = (build_g4(), build_g4_upper());
    let worst = lo
        .components()
        .iter()
        .zip(up.components())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    SuiteResult::new("h4-self-duality", worst, 0.0)
}

/// `g°^ijkl h_ijkl = L_A` for the rank-4 electromagnetic tensor.
pub fn rank4_trace(s: Sampling) -> SuiteResult {
    let mut rng = rng::stream(s.seed, STREAM_RANK4);
    let mut fields = catalog::covector_families();
    for _ in 0..5 {
        fields.push(random_polynomial_covector(&mut rng));
    }
    let points = rng::points(s.seed, STREAM_RANK4 + 100, TRACE_POINTS);
    let mut worst = 0.0f64;
    for a in &fields {
        for x in &points {
            let la = scalar_la(a, x);
            for chi in [0.0, 0.5, 1.0] {
                let tr = l1_fourth_order(&em_fourth_order(a, &Blend::Constant(chi), x));
                worst = worst.max((tr - la.value()).abs() / la.scale.max(f64::MIN_POSITIVE));
            }
        }
    }
    SuiteResult::new("rank4-trace", worst, 1e-10)
}

/// Every suite of `verify`, in a fixed order.
pub fn verify_all(s: Sampling, fault: Option<Fault>) -> Vec<SuiteResult> {
    let h4 = h4_residuals(s).suites();
    let pick = |name: &str| h4.iter().find(|r| r.suite == name).cloned().expect("known suite");
    vec![
        det_expansion(s, fault),
        gauge_invariance(s),
        trace_identity(s),
        two_field_minors(s),
        pick("h4-contraction"),
        pick("h4-minkowski-difference"),
        pick("h4-indicatrix"),
        self_duality(),
        rank4_trace(s),
    ]
}
