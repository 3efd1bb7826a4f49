//! The H4 (Berwald-Moor) fourth-order metric: its length element, the
//! covariant rank-4 tensor, generalized momenta, the indicatrix, and the
//! rank-4 weak-field tensors built from scalar and covector fields.
//!
//! Fully symmetric rank-4 tensors are stored once per index multiset
//! `{i<=j<=k<=l}` (35 entries); contractions weight each entry by its number
//! of distinct orderings `4!/∏ mult!`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{CovectorField, ScalarField};
use crate::tensor_core::{Point4, Sign, SymTensor2, ETA};
use crate::vector_field::{blended_h, Blend, Couplings};

/// Number of independent components of a symmetric rank-4 tensor in 4D.
pub const MULTISETS4: usize = 35;

const TABLES: ([[usize; 4]; MULTISETS4], [usize; 256], [f64; MULTISETS4]) = {
    let mut sets = [[0usize; 4]; MULTISETS4];
    let mut index = [0usize; 256];
    let mut weight = [0.0f64; MULTISETS4];
    let mut n = 0;
    let mut a = 0;
    while a < 4 {
        let mut b = a;
        while b < 4 {
            let mut c = b;
            while c < 4 {
                let mut d = c;
                while d < 4 {
                    let q = [a, b, c, d];
                    sets[n] = q;
                    let mut orderings = 0;
                    let mut seen = [false; 256];
                    let mut p0 = 0;
                    while p0 < 4 {
                        let mut p1 = 0;
                        while p1 < 4 {
                            let mut p2 = 0;
                            while p2 < 4 {
                                let p3 = 6usize.saturating_sub(p0 + p1 + p2);
                                if p0 + p1 + p2 <= 6 && p0 != p1 && p0 != p2 && p1 != p2 && p3 < 4 && p3 != p0 && p3 != p1 && p3 != p2 {
                                    let code = q[p0] * 64 + q[p1] * 16 + q[p2] * 4 + q[p3];
                                    index[code] = n;
                                    if !seen[code] {
                                        seen[code] = true;
                                        orderings += 1;
                                    }
                                }
                                p2 += 1;
                            }
                            p1 += 1;
                        }
                        p0 += 1;
                    }
                    weight[n] = orderings as f64;
                    n += 1;
                    d += 1;
                }
                c += 1;
            }
            b += 1;
        }
        a += 1;
    }
    (sets, index, weight)
};

const PERMUTATIONS4: [[usize; 4]; 24] = {
    let mut out = [[0usize; 4]; 24];
    let mut n = 0;
    let mut a = 0;
    while a < 4 {
        let mut b = 0;
        while b < 4 {
            let mut c = 0;
            while c < 4 {
                let d = 6usize.saturating_sub(a + b + c);
                if a + b + c <= 6 && a != b && a != c && b != c && d < 4 && d != a && d != b && d != c {
                    out[n] = [a, b, c, d];
                    n += 1;
                }
                c += 1;
            }
            b += 1;
        }
        a += 1;
    }
    out
};

/// Fully symmetric rank-4 tensor over 4 dimensions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymTensor4 {
    values: [f64; MULTISETS4],
}

impl Default for SymTensor4 {
    fn default() -> Self {
        Self::zero()
    }
}

impl SymTensor4 {
    pub fn zero() -> Self {
        Self {
            values: [0.0; MULTISETS4],
        }
    }

    /// Sorted index multiset of storage slot `n`.
    pub fn multiset(n: usize) -> [usize; 4] {
        TABLES.0[n]
    }

    /// Number of orderings of the multiset in slot `n`.
    pub fn multiplicity(n: usize) -> f64 {
        TABLES.2[n]
    }

    fn slot(i: usize, j: usize, k: usize, l: usize) -> usize {
        assert!(i < 4 && j < 4 && k < 4 && l < 4, "index out of range");
        TABLES.1[i * 64 + j * 16 + k * 4 + l]
    }

    /// Takes `f` at the sorted representative of each multiset; `f` is
    /// assumed symmetric.
    pub fn from_fn(mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        Self {
            values: std::array::from_fn(|n| {
                let [i, j, k, l] = TABLES.0[n];
                f(i, j, k, l)
            }),
        }
    }

    /// Average of `f` over all 24 orderings of each multiset.
    pub fn symmetrize(f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        Self::from_fn(|i, j, k, l| {
            let q = [i, j, k, l];
            PERMUTATIONS4
                .iter()
                .map(|p| f(q[p[0]], q[p[1]], q[p[2]], q[p[3]]))
                .sum::<f64>()
                / 24.0
        })
    }

    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.values[Self::slot(i, j, k, l)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, l: usize, v: f64) {
        self.values[Self::slot(i, j, k, l)] = v;
    }

    pub fn components(&self) -> &[f64; MULTISETS4] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            values: self.values.map(|v| v * s),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            values: std::array::from_fn(|n| self.values[n] + o.values[n]),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    /// `T_ijkl v^i v^j v^k v^l`.
    pub fn contract4(&self, v: &[f64; 4]) -> f64 {
        (0..MULTISETS4)
            .map(|n| {
                let [i, j, k, l] = TABLES.0[n];
                TABLES.2[n] * self.values[n] * v[i] * v[j] * v[k] * v[l]
            })
            .sum()
    }

    /// `T_ijkl v^j v^k v^l` for each `i`.
    pub fn contract3(&self, v: &[f64; 4]) -> [f64; 4] {
        // Every ordered triple (j,k,l) with j<=k<=l appears 3!/∏mult! times.
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..4 {
                for k in j..4 {
                    for l in k..4 {
                        let w = match (j == k, k == l) {
                            (true, true) => 1.0,
                            (false, false) => 6.0,
                            _ => 3.0,
                        };
                        *o += w * self.get(i, j, k, l) * v[j] * v[k] * v[l];
                    }
                }
            }
        }
        out
    }

    /// Full contraction `A^ijkl B_ijkl`.
    pub fn contract(&self, o: &Self) -> f64 {
        (0..MULTISETS4).map(|n| TABLES.2[n] * self.values[n] * o.values[n]).sum()
    }

    /// The same entries as a generic symmetric form.
    pub fn to_form(&self) -> SymmetricForm {
        SymmetricForm::from_fn(4, 4, |idx| self.get(idx[0], idx[1], idx[2], idx[3]))
    }
}

/// Symmetric form of any order and dimension, stored per sorted multiset.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricForm {
    order: usize,
    dim: usize,
    multisets: Vec<Vec<usize>>,
    values: Vec<f64>,
}

fn multisets(order: usize, dim: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, left: usize, dim: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            rec(i, left - 1, dim, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, order, dim, &mut Vec::new(), &mut out);
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Counts of each index in a sorted multiset.
fn counts(set: &[usize], dim: usize) -> Vec<usize> {
    let mut c = vec![0; dim];
    for &i in set {
        c[i] += 1;
    }
    c
}

impl SymmetricForm {
    /// `f` evaluated at sorted representatives.
    pub fn from_fn(order: usize, dim: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let sets = multisets(order, dim);
        let values = sets.iter().map(|s| f(s)).collect();
        Self {
            order,
            dim,
            multisets: sets,
            values,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Entry at any ordering of the indices.
    pub fn get(&self, idx: &[usize]) -> f64 {
        let mut key = idx.to_vec();
        key.sort_unstable();
        let n = self
            .multisets
            .binary_search(&key)
            .unwrap_or_else(|_| panic!("bad index {idx:?}"));
        self.values[n]
    }

    fn weight(&self, n: usize) -> f64 {
        let c = counts(&self.multisets[n], self.dim);
        factorial(self.order) / c.iter().map(|&m| factorial(m)).product::<f64>()
    }

    /// `T_{i1..im} v^i1 ... v^im`.
    pub fn contract(&self, v: &[f64]) -> f64 {
        assert_eq!(v.len(), self.dim);
        (0..self.len())
            .map(|n| self.weight(n) * self.values[n] * self.multisets[n].iter().map(|&i| v[i]).product::<f64>())
            .sum()
    }

    /// Gradient of [`contract`](Self::contract) with respect to `v`.
    pub fn contract_gradient(&self, v: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim];
        for n in 0..self.len() {
            let c = counts(&self.multisets[n], self.dim);
            let base = self.weight(n) * self.values[n];
            for (i, gi) in g.iter_mut().enumerate() {
                if c[i] == 0 {
                    continue;
                }
                let mut term = base * c[i] as f64;
                for (j, &m) in c.iter().enumerate() {
                    let power = if j == i { m - 1 } else { m };
                    term *= v[j].powi(power as i32);
                }
                *gi += term;
            }
        }
        g
    }

    /// `p_i = ∂(ds)/∂v^i` for `ds = (T v^m)^(1/m)`.
    pub fn momentum(&self, v: &[f64]) -> Result<Vec<f64>> {
        let len = self.contract(v);
        if !(len > 0.0) {
            return Err(Error::NullOrSpacelike { value: len });
        }
        let m = self.order as f64;
        let denom = m * len.powf((m - 1.0) / m);
        Ok(self.contract_gradient(v).into_iter().map(|g| g / denom).collect())
    }
}

/// A displacement or momentum in the physical basis.
pub type H4Vector = [f64; 4];

/// The four linear forms whose product is the fourth power of the length.
pub fn h4_factors(v: &H4Vector) -> [f64; 4] {
    let [a, b, c, d] = *v;
    [a + b + c + d, a + b - c - d, a - b + c - d, a - b - c + d]
}

/// `(ds)^4` as the product of the four linear forms.
pub fn bm_length4(v: &H4Vector) -> f64 {
    h4_factors(v).iter().product()
}

/// `(ds)^4` as the expanded quartic polynomial.
pub fn bm_length4_expanded(v: &H4Vector) -> f64 {
    let [a, b, c, d] = *v;
    let (a2, b2, c2, d2) = (a * a, b * b, c * c, d * d);
    a2 * a2 + b2 * b2 + c2 * c2 + d2 * d2 + 8.0 * a * b * c * d
        - 2.0 * (a2 * b2 + a2 * c2 + a2 * d2 + b2 * c2 + b2 * d2 + c2 * d2)
}

/// Sum of the magnitudes of the terms of the expanded quartic; the natural
/// scale for relative comparisons near the light cone.
pub fn bm_length4_scale(v: &H4Vector) -> f64 {
    let [a, b, c, d] = *v;
    let (a2, b2, c2, d2) = (a * a, b * b, c * c, d * d);
    a2 * a2 + b2 * b2 + c2 * c2 + d2 * d2 + 8.0 * (a * b * c * d).abs()
        + 2.0 * (a2 * b2 + a2 * c2 + a2 * d2 + b2 * c2 + b2 * d2 + c2 * d2)
}

/// `(η_ij v^i v^j)^2`.
pub fn minkowski_length4(v: &H4Vector) -> f64 {
    let q: f64 = (0..4).map(|i| ETA[i] * v[i] * v[i]).sum();
    q * q
}

/// `8 v0 v1 v2 v3 - 4 ((v1 v2)^2 + (v1 v3)^2 + (v2 v3)^2)`, the difference
/// between the H4 and Minkowski quartics.
pub fn h4_minkowski_difference(v: &H4Vector) -> f64 {
    let [a, b, c, d] = *v;
    8.0 * a * b * c * d - 4.0 * ((b * c).powi(2) + (b * d).powi(2) + (c * d).powi(2))
}

/// `1` when all four indices differ.
pub fn g_prime(i: usize, j: usize, k: usize, l: usize) -> f64 {
    let distinct = i != j && i != k && i != l && j != k && j != l && k != l;
    if distinct {
        1.0
    } else {
        0.0
    }
}

/// `1` for spatial indices forming two equal, distinct pairs.
pub fn g_pairs(i: usize, j: usize, k: usize, l: usize) -> f64 {
    let spatial = i != 0 && j != 0 && k != 0 && l != 0;
    let paired = (i == j && k == l && i != k) || (i == k && j == l && i != j) || (i == l && j == k && i != j);
    if spatial && paired {
        1.0
    } else {
        0.0
    }
}

fn g4_from(metric: [f64; 4]) -> SymTensor4 {
    let m = |i: usize, j: usize| if i == j { metric[i] } else { 0.0 };
    SymTensor4::from_fn(|i, j, k, l| {
        let sym = (m(i, j) * m(k, l) + m(i, k) * m(j, l) + m(i, l) * m(j, k)) / 3.0;
        sym + g_prime(i, j, k, l) / 3.0 - 2.0 * g_pairs(i, j, k, l) / 3.0
    })
}

/// Covariant `g°_ijkl`: symmetrized `ηη` plus `g'/3` minus `(2/3) G`.
///
/// With the pair tensor at unit weight the `(v^a v^b)^2` coefficients come
/// out as `-4` instead of `-2`; weight `2/3` is the one for which the
/// contraction reproduces the product of the four forms.
pub fn build_g4() -> SymTensor4 {
    g4_from(ETA)
}

/// Contravariant `g°^ijkl`, built from the inverse background metric.
pub fn build_g4_upper() -> SymTensor4 {
    g4_from(ETA.map(|e| 1.0 / e))
}

/// `p_i = g°_ijkl v^j v^k v^l / (ds)^3`.
pub fn generalized_momenta(v: &H4Vector) -> Result<[f64; 4]> {
    let len = bm_length4(v);
    if !(len > 0.0) {
        return Err(Error::NullOrSpacelike { value: len });
    }
    let denom = len.powf(0.75);
    Ok(build_g4().contract3(v).map(|c| c / denom))
}

/// `ds = (ds^4)^(1/4)` for timelike displacements.
pub fn bm_length(v: &H4Vector) -> Result<f64> {
    let len = bm_length4(v);
    if !(len > 0.0) {
        return Err(Error::NullOrSpacelike { value: len });
    }
    Ok(len.powf(0.25))
}

/// Indicatrix in product form and in contracted form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndicatrixResidual {
    pub product: f64,
    pub contracted: f64,
}

/// `Π (forms of p) - 1` and `g°^ijkl p_i p_j p_k p_l - 1`.
pub fn indicatrix_residual(p: &[f64; 4]) -> IndicatrixResidual {
    IndicatrixResidual {
        product: bm_length4(p) - 1.0,
        contracted: build_g4_upper().contract4(p) - 1.0,
    }
}

/// `g°^ijkl h_ijkl`.
pub fn l1_fourth_order(h: &SymTensor4) -> f64 {
    build_g4_upper().contract(h)
}

/// `Σ_kl g°^ijkl η_kl`, diagonal.
fn trace_weights() -> [f64; 4] {
    let g = build_g4_upper();
    std::array::from_fn(|i| (0..4).map(|k| g.get(i, i, k, k) * ETA[k]).sum())
}

/// `Sym(D(h) ⊗ η)` where `D` rescales the diagonal of `h` so that
/// `g°^ijkl E(h)_ijkl = η^ij h_ij`.
pub fn embed_rank2(h: &SymTensor2) -> SymTensor4 {
    let w = trace_weights();
    let d = SymTensor2::from_fn(|i, j| {
        if i == j {
            h.get(i, i) * ETA[i] / w[i]
        } else {
            h.get(i, j)
        }
    });
    let eta = |i: usize, j: usize| if i == j { ETA[i] } else { 0.0 };
    SymTensor4::symmetrize(|i, j, k, l| d.get(i, j) * eta(k, l))
}

/// Rank-4 electromagnetic tensor: the blended rank-2 tensor embedded so that
/// its contraction with `g°^ijkl` equals `L_A`.
pub fn em_fourth_order(a: &CovectorField, blend: &Blend, x: &Point4) -> SymTensor4 {
    embed_rank2(&blended_h(a, blend, x))
}

/// `16π (2 A_i j_j η_kl - A_i η_jk j_l - j_i η_jk A_l) / 6`, symmetrized.
pub fn source_fourth_order(a: &CovectorField, current: &CovectorField, x: &Point4) -> SymTensor4 {
    source_fourth_order_values(&a.value(x), &current.value(x))
}

pub fn source_fourth_order_values(a: &[f64; 4], j: &[f64; 4]) -> SymTensor4 {
    let eta = |i: usize, k: usize| if i == k { ETA[i] } else { 0.0 };
    let c = 16.0 * PI / 6.0;
    SymTensor4::symmetrize(|i, jj, k, l| {
        c * (2.0 * a[i] * j[jj] * eta(k, l) - a[i] * eta(jj, k) * j[l] - j[i] * eta(jj, k) * a[l])
    })
}

/// `Σ ε_a ∂φ_a^4 + Σ ϵ_b Sym(∂ψ_b ∂ψ_b η)`.
pub fn grav_fourth_order(phis: &[(ScalarField, Sign)], psis: &[(ScalarField, Sign)], x: &Point4) -> SymTensor4 {
    let mut out = SymTensor4::zero();
    for (phi, eps) in phis {
        let g = phi.gradient(x);
        let e = eps.value();
        out = out.add(&SymTensor4::from_fn(|i, j, k, l| e * g[i] * g[j] * g[k] * g[l]));
    }
    let eta = |i: usize, k: usize| if i == k { ETA[i] } else { 0.0 };
    for (psi, eps) in psis {
        let g = psi.gradient(x);
        let e = eps.value();
        out = out.add(&SymTensor4::symmetrize(|i, j, k, l| e * g[i] * g[j] * eta(k, l)));
    }
    out
}

/// `j_i = Σ_b q_b ∂_i ψ_b`.
pub fn current_from_scalars(psis: &[(ScalarField, f64)]) -> CovectorField {
    let comps = std::array::from_fn(|i| {
        psis.iter()
            .fold(ScalarField::zero(), |acc, (psi, q)| acc.plus(&psi.partial(i).scaled(*q)))
    });
    CovectorField::new("scalar current", comps)
}

/// Everything the combined rank-4 perturbation is built from.
#[derive(Debug, Clone, PartialEq)]
pub struct FourthOrderParts {
    pub potential: CovectorField,
    pub blend: Blend,
    /// `(φ_a, ε_a)`.
    pub phis: Vec<(ScalarField, Sign)>,
    /// `(ψ_b, ϵ_b)`; their gradients, weighted by `couplings.q`, are the current.
    pub psis: Vec<(ScalarField, Sign)>,
    pub couplings: Couplings,
}

impl FourthOrderParts {
    pub fn current(&self) -> CovectorField {
        let charged: Vec<(ScalarField, f64)> = self.psis.iter().map(|(p, _)| (p.clone(), self.couplings.q)).collect();
        current_from_scalars(&charged)
    }

    /// Electromagnetic tensor plus the symmetrized source.
    pub fn maxwell(&self, x: &Point4) -> SymTensor4 {
        em_fourth_order(&self.potential, &self.blend, x).add(&source_fourth_order(&self.potential, &self.current(), x))
    }

    pub fn grav(&self, x: &Point4) -> SymTensor4 {
        grav_fourth_order(&self.phis, &self.psis, x)
    }
}

/// `μ h_Max + γ h_grav`.
pub fn combined_fourth_order(parts: &FourthOrderParts, x: &Point4) -> SymTensor4 {
    let c = parts.couplings;
    parts.maxwell(x).scale(c.mu).add(&parts.grav(x).scale(c.gamma))
}
