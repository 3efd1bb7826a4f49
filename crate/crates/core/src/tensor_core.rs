//! Symmetric rank-2 perturbations of the Minkowski background and the
//! determinant Lagrangian `sqrt(-det(eta + h))` with its weak-field expansions.
//!
//! The background `eta = diag(+1, -1, -1, -1)` is a module constant. Because
//! it is diagonal and its own inverse, raising or lowering an index is a sign
//! flip by [`ETA`].

use crate::error::{Error, Result};

/// Diagonal of the Minkowski metric, signature (+,-,-,-).
pub const ETA: [f64; 4] = [1.0, -1.0, -1.0, -1.0];

/// A point of spacetime, `x^0` is time.
pub type Point4 = [f64; 4];

/// A plain 4x4 matrix, row-major.
pub type Mat4 = [[f64; 4]; 4];

/// A sign coefficient such as the `±` attached to a scalar field perturbation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

const INDEX2: [[usize; 4]; 4] = {
    let mut t = [[0usize; 4]; 4];
    let mut n = 0;
    let mut i = 0;
    while i < 4 {
        let mut j = i;
        while j < 4 {
            t[i][j] = n;
            t[j][i] = n;
            n += 1;
            j += 1;
        }
        i += 1;
    }
    t
};

/// Symmetric 4x4 tensor stored as its 10 independent components.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SymTensor2 {
    entries: [f64; 10],
}

impl SymTensor2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn diag(d: [f64; 4]) -> Self {
        let mut t = Self::zero();
        for (i, v) in d.into_iter().enumerate() {
            t.set(i, i, v);
        }
        t
    }

    /// Builds the tensor from `f(i, j)` evaluated for `i <= j` only.
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut t = Self::zero();
        for i in 0..4 {
            for j in i..4 {
                t.entries[INDEX2[i][j]] = f(i, j);
            }
        }
        t
    }

    /// Symmetric part of a general matrix.
    pub fn symmetrize(m: &Mat4) -> Self {
        Self::from_fn(|i, j| 0.5 * (m[i][j] + m[j][i]))
    }

    /// Outer product `a_i b_j` symmetrized over (i, j).
    pub fn sym_outer(a: &[f64; 4], b: &[f64; 4]) -> Self {
        Self::from_fn(|i, j| 0.5 * (a[i] * b[j] + a[j] * b[i]))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[INDEX2[i][j]]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[INDEX2[i][j]] = v;
    }

    pub fn components(&self) -> &[f64; 10] {
        &self.entries
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            entries: self.entries.map(|v| s * v),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut entries = self.entries;
        for (e, o) in entries.iter_mut().zip(other.entries) {
            *e += o;
        }
        Self { entries }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn to_matrix(&self) -> Mat4 {
        let mut m = [[0.0; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.get(i, j);
            }
        }
        m
    }

    /// Contraction with the background, `eta^ij h_ij`.
    pub fn eta_trace(&self) -> f64 {
        (0..4).map(|i| ETA[i] * self.get(i, i)).sum()
    }
}

/// `eta + h` as a full matrix.
pub fn full_metric(h: &SymTensor2) -> Mat4 {
    let mut g = h.to_matrix();
    for (i, row) in g.iter_mut().enumerate() {
        row[i] += ETA[i];
    }
    g
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Determinant by cofactor expansion along the first row.
pub fn det4(m: &Mat4) -> f64 {
    let mut det = 0.0;
    for col in 0..4 {
        let mut minor = [[0.0; 3]; 3];
        for r in 1..4 {
            let mut c2 = 0;
            for c in 0..4 {
                if c != col {
                    minor[r - 1][c2] = m[r][c];
                    c2 += 1;
                }
            }
        }
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        det += sign * m[0][col] * det3(minor);
    }
    det
}

/// `-det(eta + h)`, exact up to rounding.
pub fn exact_neg_det(h: &SymTensor2) -> f64 {
    -det4(&full_metric(h))
}

/// First-order part of `-det(eta + h)`: `h00 - h11 - h22 - h33`.
pub fn l1(h: &SymTensor2) -> f64 {
    h.get(0, 0) - h.get(1, 1) - h.get(2, 2) - h.get(3, 3)
}

/// Second-order part of `-det(eta + h)` in its expanded polynomial form.
pub fn l2(h: &SymTensor2) -> f64 {
    let g = |i, j| h.get(i, j);
    -g(0, 0) * (g(1, 1) + g(2, 2) + g(3, 3))
        + g(1, 1) * g(2, 2)
        + g(1, 1) * g(3, 3)
        + g(2, 2) * g(3, 3)
        - g(1, 2) * g(1, 2)
        - g(1, 3) * g(1, 3)
        - g(2, 3) * g(2, 3)
        + g(0, 3) * g(0, 3)
        + g(0, 2) * g(0, 2)
        + g(0, 1) * g(0, 1)
}

/// The principal 2x2 minor of `h` on rows/columns `(a, b)`.
pub fn minor2(h: &SymTensor2, a: usize, b: usize) -> f64 {
    h.get(a, a) * h.get(b, b) - h.get(a, b) * h.get(a, b)
}

/// Second-order part written as six signed principal minors; time-paired
/// minors enter with `-`, space-paired with `+`.
pub fn l2_minors(h: &SymTensor2) -> f64 {
    let mut sum = 0.0;
    for a in 0..4 {
        for b in (a + 1)..4 {
            sum += ETA[a] * ETA[b] * minor2(h, a, b);
        }
    }
    sum
}

/// Sum of the magnitudes of the products entering [`l2_minors`]; the scale
/// against which the two second-order forms are compared.
pub fn l2_scale(h: &SymTensor2) -> f64 {
    let mut sum = 0.0;
    for a in 0..4 {
        for b in (a + 1)..4 {
            sum += (h.get(a, a) * h.get(b, b)).abs() + h.get(a, b) * h.get(a, b);
        }
    }
    sum
}

/// `|a - b|` in units of the spacing of doubles around `scale`.
pub fn ulps_apart(a: f64, b: f64, scale: f64) -> f64 {
    let d = (a - b).abs();
    if d == 0.0 {
        0.0
    } else {
        d / (f64::EPSILON * scale.abs())
    }
}

/// Every quantity of the rank-2 Lagrangian expansion at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lagrangian2Report {
    pub l1: f64,
    pub l2: f64,
    pub exact_neg_det: f64,
    pub l_first_order: f64,
    pub l_second_order: f64,
    /// `None` when `-det(g) < 0`.
    pub l_exact: Option<f64>,
}

impl Lagrangian2Report {
    /// The exact Lagrangian, or `IndefiniteMetric` when the radicand is negative.
    pub fn exact(&self) -> Result<f64> {
        self.l_exact.ok_or_else(|| Error::IndefiniteMetric {
            radicand: self.exact_neg_det,
            location: "rank-2 determinant".into(),
        })
    }
}

pub fn lagrangian_report(h: &SymTensor2) -> Lagrangian2Report {
    let l1 = l1(h);
    let l2 = l2(h);
    let neg_det = exact_neg_det(h);
    Lagrangian2Report {
        l1,
        l2,
        exact_neg_det: neg_det,
        l_first_order: 1.0 + 0.5 * l1,
        l_second_order: 1.0 + 0.5 * l1 + 0.5 * (l2 - 0.25 * l1 * l1),
        l_exact: (neg_det >= 0.0).then(|| neg_det.sqrt()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_det(m: &Mat4) -> f64 {
        // Leibniz sum over all 24 permutations.
        let mut perm = [0usize, 1, 2, 3];
        let mut total = 0.0;
        fn heap(k: usize, p: &mut [usize; 4], m: &Mat4, total: &mut f64) {
            if k == 1 {
                let mut inv = 0;
                for a in 0..4 {
                    for b in (a + 1)..4 {
                        if p[a] > p[b] {
                            inv += 1;
                        }
                    }
                }
                let s = if inv % 2 == 0 { 1.0 } else { -1.0 };
                *total += s * (0..4).map(|r| m[r][p[r]]).product::<f64>();
                return;
            }
            for i in 0..k {
                heap(k - 1, p, m, total);
                if k.is_multiple_of(2) {
                    p.swap(i, k - 1);
                } else {
                    p.swap(0, k - 1);
                }
            }
        }
        heap(4, &mut perm, m, &mut total);
        total
    }

    #[test]
    fn packed_layout_covers_ten_slots() {
        let mut seen = [false; 10];
        for i in 0..4 {
            for j in 0..4 {
                seen[INDEX2[i][j]] = true;
                assert_eq!(INDEX2[i][j], INDEX2[j][i]);
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn flat_background_has_unit_determinant() {
        assert_eq!(exact_neg_det(&SymTensor2::zero()), 1.0);
    }

    #[test]
    fn diagonal_time_perturbation() {
        let h = SymTensor2::diag([0.1, 0.0, 0.0, 0.0]);
        assert!((exact_neg_det(&h) - 1.1).abs() < 1e-15);
        assert!((l1(&h) - 0.1).abs() < 1e-15);
        assert_eq!(l2(&h), 0.0);
    }

    #[test]
    fn off_diagonal_time_space_entry() {
        let mut h = SymTensor2::zero();
        h.set(0, 1, 0.2);
        assert_eq!(h.get(1, 0), 0.2);
        let oracle = -brute_det(&full_metric(&h));
        assert!((oracle - 1.04).abs() < 1e-15);
        assert!((exact_neg_det(&h) - 1.04).abs() < 1e-15);
        assert!((l2(&h) - 0.04).abs() < 1e-16);
        assert!((l2_minors(&h) - 0.04).abs() < 1e-16);
    }

    #[test]
    fn signature_sum() {
        let h = SymTensor2::diag([0.1, 0.2, 0.3, 0.4]);
        assert!((l1(&h) + 0.8).abs() < 1e-15);
        assert_eq!(l1(&SymTensor2::zero()), 0.0);
    }

    #[test]
    fn only_time_space_minor_survives() {
        let h = SymTensor2::diag([1.0, 1.0, 0.0, 0.0]);
        assert_eq!(l2_minors(&h), -1.0);
        assert_eq!(l2(&h), -1.0);
    }

    #[test]
    fn cofactor_matches_leibniz() {
        let m = [
            [1.3, -0.2, 0.7, 0.1],
            [0.4, -1.1, 0.05, 2.0],
            [0.0, 0.3, -0.9, -0.6],
            [1.5, 0.8, 0.2, -1.0],
        ];
        assert!((det4(&m) - brute_det(&m)).abs() < 1e-14);
    }

    #[test]
    fn report_flat() {
        let r = lagrangian_report(&SymTensor2::zero());
        assert_eq!(r.l_exact, Some(1.0));
        assert_eq!(r.l_first_order, 1.0);
        assert_eq!(r.l_second_order, 1.0);
    }

    #[test]
    fn report_flags_indefinite_metric() {
        // eta + h = diag(-1, -1, -1, -1): -det = -1.
        let h = SymTensor2::diag([-2.0, 0.0, 0.0, 0.0]);
        let r = lagrangian_report(&h);
        assert!(r.exact_neg_det < 0.0);
        assert!(matches!(r.exact(), Err(Error::IndefiniteMetric { .. })));
        assert!((r.l_first_order - 0.0).abs() < 1e-15);
    }

    #[test]
    fn accessor_is_symmetric() {
        let h = SymTensor2::from_fn(|i, j| (i * 4 + j) as f64);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(h.get(i, j), h.get(j, i));
            }
        }
    }
}
