//! Linear (GHMM) presentations of quantum models.
//!
//! Two routes are provided. The generalized Bloch route expands Hermitian
//! operators in a traceless orthogonal basis `{I/d, Gamma_1, ...}` and gives
//! a real GHMM with `ones = e1`. The Liouville route reshapes operators into
//! vectors and gives a complex GHMM with `ones = vec(I)`.
//!
//! Liouville convention: `vec(rho)[i * d + j] = rho[i][j]` (row-major), so a
//! pure state maps to `psi (x) conj(psi)` and the subchannel matrix acting on
//! column vectors is `sum_y K_xy (x) conj(K_xy)`. The GHMM transition matrix
//! is its transpose, acting on row vectors.

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::error::{Error, Result};
use crate::ghmm::Ghmm;
use crate::linalg;
use crate::qhmm::Qhmm;
use crate::{Tolerances, C64};

/// Traceless Hermitian basis with `tr(Gamma_m Gamma_n) = xi delta_mn`,
/// `xi = (d - 1) / d`.
#[derive(Clone, Debug)]
pub struct OperatorBasis {
    dim: usize,
    gamma: Vec<DMatrix<C64>>,
    xi: f64,
}

impl OperatorBasis {
    /// Generalized Gell-Mann matrices (symmetric, antisymmetric, then
    /// diagonal families), rescaled from `tr(L^2) = 2` to `tr(Gamma^2) = xi`.
    /// For `d = 2` this is the Pauli triple divided by two.
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::input("operator basis needs dimension at least 2"));
        }
        let xi = (d as f64 - 1.0) / d as f64;
        let scale = C64::new((xi / 2.0).sqrt(), 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let mut gamma = Vec::with_capacity(d * d - 1);
        for j in 0..d {
            for k in j + 1..d {
                let mut m = DMatrix::zeros(d, d);
                m[(j, k)] = one;
                m[(k, j)] = one;
                gamma.push(m * scale);
            }
        }
        for j in 0..d {
            for k in j + 1..d {
                let mut m = DMatrix::zeros(d, d);
                m[(j, k)] = -i;
                m[(k, j)] = i;
                gamma.push(m * scale);
            }
        }
        for l in 1..d {
            let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
            let mut m = DMatrix::zeros(d, d);
            for j in 0..l {
                m[(j, j)] = C64::new(norm, 0.0);
            }
            m[(l, l)] = C64::new(-(l as f64) * norm, 0.0);
            gamma.push(m * scale);
        }
        Ok(Self { dim: d, gamma, xi })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self) -> &[DMatrix<C64>] {
        &self.gamma
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// Length `d^2` of extended Bloch vectors.
    pub fn extended_len(&self) -> usize {
        self.dim * self.dim
    }
}

/// Coordinates `[c, b]` of `M = c I/d + b . Gamma`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedBlochVector {
    pub c: f64,
    pub b: DVector<f64>,
}

impl ExtendedBlochVector {
    pub fn to_row(&self) -> RowDVector<f64> {
        RowDVector::from_iterator(1 + self.b.len(), std::iter::once(self.c).chain(self.b.iter().copied()))
    }

    pub fn from_row(row: &RowDVector<f64>) -> Self {
        Self {
            c: row[0],
            b: DVector::from_iterator(row.len() - 1, row.iter().skip(1).copied()),
        }
    }
}

fn real_part(z: C64, what: &str, tol: &Tolerances) -> Result<f64> {
    if z.im.abs() > tol.residue {
        return Err(Error::NumericalIntegrity(format!(
            "{what} has imaginary residue {:.3e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// `c = tr M`, `b = tr(M Gamma) / xi`.
pub fn to_bloch(m: &DMatrix<C64>, basis: &OperatorBasis) -> Result<ExtendedBlochVector> {
    let d = basis.dim;
    if m.shape() != (d, d) {
        return Err(Error::input(format!("operator shape {:?} does not match basis dimension {d}", m.shape())));
    }
    let tol = Tolerances::default();
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    if linalg::max_abs_diff(m, &m.adjoint()) > tol.residue * scale {
        return Err(Error::input("operator is not Hermitian"));
    }
    let c = real_part(linalg::trace(m), "trace", &tol)?;
    let b = basis
        .gamma
        .iter()
        .map(|g| real_part(linalg::trace(&(m * g)), "Bloch coordinate", &tol).map(|v| v / basis.xi))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExtendedBlochVector { c, b: DVector::from_vec(b) })
}

pub fn from_bloch(v: &ExtendedBlochVector, basis: &OperatorBasis) -> Result<DMatrix<C64>> {
    let d = basis.dim;
    if v.b.len() != basis.gamma.len() {
        return Err(Error::input(format!(
            "Bloch vector of length {} for a basis of {} elements",
            v.b.len(),
            basis.gamma.len()
        )));
    }
    let mut m = DMatrix::<C64>::identity(d, d) * C64::new(v.c / d as f64, 0.0);
    for (g, &b) in basis.gamma.iter().zip(v.b.iter()) {
        m += g * C64::new(b, 0.0);
    }
    Ok(m)
}

/// Real `d^2 x d^2` matrix of one subchannel acting on extended Bloch rows.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochChannelMatrix(pub DMatrix<f64>);

/// Row `n` is the extended Bloch vector of `A_x(E_n)` for the basis element
/// `E_0 = I/d`, `E_n = Gamma_n`, whose own extended Bloch vector is `e_n`.
pub fn subchannel_to_bloch_matrix(model: &Qhmm, symbol: usize, basis: &OperatorBasis) -> Result<BlochChannelMatrix> {
    let d = model.dim();
    if basis.dim != d {
        return Err(Error::input("basis dimension differs from memory dimension"));
    }
    let identity = DMatrix::<C64>::identity(d, d) / C64::new(d as f64, 0.0);
    let probes = std::iter::once(&identity).chain(basis.gamma.iter());
    let n = basis.extended_len();
    let mut g = DMatrix::zeros(n, n);
    for (row, probe) in probes.enumerate() {
        let out = model.apply_subchannel(symbol, probe)?;
        g.set_row(row, &to_bloch(&out, basis)?.to_row());
    }
    Ok(BlochChannelMatrix(g))
}

/// Real `d^2`-dimensional GHMM with `eta0` the extended Bloch vector of
/// `sigma0`, `T(x) = G(x)` and `ones = e1`.
pub fn qhmm_to_ghmm_bloch(model: &Qhmm) -> Result<Ghmm<f64>> {
    let d = model.dim();
    if d == 1 {
        // Scalar memory: the only operator is the trace itself.
        let transitions = (0..model.alphabet().len())
            .map(|x| {
                let out = model.apply_subchannel(x, &DMatrix::identity(1, 1))?;
                Ok(DMatrix::from_element(1, 1, real_part(out[(0, 0)], "trace", &Tolerances::default())?))
            })
            .collect::<Result<Vec<_>>>()?;
        return Ghmm::new(
            model.alphabet().clone(),
            RowDVector::from_element(1, 1.0),
            transitions,
            DVector::from_element(1, 1.0),
        );
    }
    let basis = OperatorBasis::new(d)?;
    let transitions = (0..model.alphabet().len())
        .map(|x| subchannel_to_bloch_matrix(model, x, &basis).map(|g| g.0))
        .collect::<Result<Vec<_>>>()?;
    let eta0 = to_bloch(model.sigma0().matrix(), &basis)?.to_row();
    let mut ones = DVector::zeros(d * d);
    ones[0] = 1.0;
    Ghmm::new(model.alphabet().clone(), eta0, transitions, ones)
}

/// Row-major vectorization `vec(m)[i * d + j] = m[i][j]`.
pub fn vectorize_operator(m: &DMatrix<C64>) -> DVector<C64> {
    let (r, c) = m.shape();
    DVector::from_fn(r * c, |k, _| m[(k / c, k % c)])
}

pub fn unvectorize_operator(v: &DVector<C64>, d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

/// Liouville matrix `sum_y K_xy (x) conj(K_xy)` acting on `vec(rho)`.
pub fn liouville_matrix(model: &Qhmm, symbol: usize) -> DMatrix<C64> {
    let d = model.dim();
    model.kraus()[symbol]
        .iter()
        .fold(DMatrix::zeros(d * d, d * d), |acc, k| acc + k.kronecker(&k.map(|z| z.conj())))
}

/// Complex `d^2`-dimensional GHMM with `eta0 = vec(sigma0)^T`,
/// `T(x) = L(x)^T` and `ones = vec(I)`.
pub fn qhmm_to_ghmm_liouville(model: &Qhmm) -> Result<Ghmm<C64>> {
    let d = model.dim();
    let transitions = (0..model.alphabet().len())
        .map(|x| liouville_matrix(model, x).transpose())
        .collect();
    let eta0 = vectorize_operator(model.sigma0().matrix()).transpose();
    let ones = vectorize_operator(&DMatrix::identity(d, d));
    Ghmm::new(model.alphabet().clone(), eta0, transitions, ones)
}

/// Similarity to the all-ones gauge, using a scaled Householder reflection
/// that sends the normalized `ones` onto the normalized all-ones vector.
pub fn to_all_ones_gauge(model: &Ghmm<f64>) -> Result<Ghmm<f64>> {
    let d = model.dim();
    let ones = model.ones();
    let norm = ones.norm();
    if norm == 0.0 {
        return Err(Error::input("ones vector is zero"));
    }
    let a = ones / norm;
    let target = DVector::from_element(d, 1.0 / (d as f64).sqrt());
    let v = &a - &target;
    let vv = v.dot(&v);
    let reflect = if vv <= 1e-28 {
        DMatrix::identity(d, d)
    } else {
        DMatrix::identity(d, d) - (&v * v.transpose()) * (2.0 / vv)
    };
    let s = reflect * ((d as f64).sqrt() / norm);
    model.apply_similarity(&s, Tolerances::default().cond_cap)
}
