//! Built-in benchmark models and seeded random model generators.
//!
//! All randomness flows through ChaCha12 seeded from a caller-supplied
//! `u64`, with Gaussian entries from the ziggurat sampler, so generated
//! models are byte-reproducible across runs ([`GENERATOR_ID`] names the
//! scheme for provenance records).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::decompose::OdecoDecomposition;
use crate::error::Result;
use crate::system::InputOutputHpds;
use crate::tensor::{outer_power, DenseMatrix, DenseTensor, DenseVector};

/// Identity of the seeded generation scheme, recorded in model metadata.
pub const GENERATOR_ID: &str = "chacha12-ziggurat-normal-v1";

/// Coefficients of the six-state benchmark system's orthogonal
/// decomposition (three nonzero, the rest exactly zero).
pub const EXAMPLE1_COEFFS: [f64; 3] = [-8.2880, -3.2248, -9.7615];

/// Reference basis for the six-state benchmark, one row per state, stated
/// to four decimals; columns are orthonormalized to working precision
/// before use.
pub const EXAMPLE1_BASIS: [[f64; 3]; 6] = [
    [-0.1743, 0.0129, 0.7769],
    [-0.0115, -0.4458, 0.2735],
    [-0.0802, 0.0156, -0.5407],
    [-0.5370, -0.1316, -0.1081],
    [-0.4111, 0.8066, 0.0856],
    [0.7112, 0.3646, 0.1017],
];

/// Reference initial state for the six-state benchmark.
pub const EXAMPLE1_X0: [f64; 6] = [0.3341, 2.8115, -1.2861, -1.1378, -1.2017, -1.8510];

/// Columns of the reference basis, orthonormalized by modified
/// Gram-Schmidt in column order (the published values carry only four
/// decimals; without this step the construction would miss exactness at
/// working precision).
pub fn example1_basis() -> DenseMatrix {
    let mut cols: Vec<DenseVector> = (0..3)
        .map(|j| DenseVector::from_fn(6, |i, _| EXAMPLE1_BASIS[i][j]))
        .collect();
    for j in 0..cols.len() {
        for i in 0..j {
            let d = cols[i].dot(&cols[j]);
            let prev = cols[i].clone();
            cols[j] -= prev * d;
        }
        let norm = cols[j].norm();
        cols[j] /= norm;
    }
    DenseMatrix::from_fn(6, 3, |i, j| cols[j][i])
}

/// Six-state degree-three benchmark: an odeco dynamic tensor with exact
/// multilinear rank 3 and known coefficients, no input or output matrices.
pub fn example1() -> InputOutputHpds {
    let basis = example1_basis();
    let mut a = DenseTensor::zeros(vec![6; 4]).expect("static shape");
    for (j, &l) in EXAMPLE1_COEFFS.iter().enumerate() {
        let col = DenseVector::from_column_slice(basis.column(j).as_slice());
        let power = outer_power(&col, 4).expect("static shape");
        a = a.add(&power.scale(l)).expect("matching dims");
    }
    InputOutputHpds::new(a, None, None).expect("odeco construction is almost symmetric")
}

pub fn example1_x0() -> DenseVector {
    DenseVector::from_column_slice(&EXAMPLE1_X0)
}

/// Twelve-state degree-three benchmark with a five-column input matrix;
/// dynamic tensor and input entries are standard normal draws (the tensor
/// symmetrized over its contracted modes).
pub fn example2(seed: u64) -> Result<InputOutputHpds> {
    random_almost_symmetric(12, 4, 5, 0, seed)
}

/// Seeded odeco model: `r` nonzero coefficients with magnitudes uniform in
/// `[0.5, 3]` and random signs, on columns of a random orthogonal basis.
/// Returns the model together with its ground-truth decomposition.
pub fn random_odeco(
    n: usize,
    k: usize,
    r: usize,
    seed: u64,
) -> Result<(InputOutputHpds, OdecoDecomposition)> {
    if r > n {
        return Err(crate::error::Error::RankOutOfRange { rank: r, max: n });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let g = DenseMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    let u = g.qr().q();
    let mut lambdas = vec![0.0; n];
    for l in lambdas.iter_mut().take(r) {
        let mag: f64 = rng.gen_range(0.5..3.0);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        *l = sign * mag;
    }
    let mut a = DenseTensor::zeros(vec![n; k])?;
    for (j, &l) in lambdas.iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        let col = DenseVector::from_column_slice(u.column(j).as_slice());
        a = a.add(&outer_power(&col, k)?.scale(l))?;
    }
    let model = InputOutputHpds::new(a, None, None)?;
    Ok((model, OdecoDecomposition { lambdas, u }))
}

/// Seeded model whose dynamic tensor has exact multilinear rank `r`:
/// symmetric variants sum `r` outer powers over a random orthogonal basis,
/// almost symmetric variants expand a symmetrized random `r`-core through
/// orthonormal factors (distinct factors on the last mode). Gaussian `B`
/// and `C` are attached when `m`/`l` are nonzero.
pub fn random_exact_low_rank(
    n: usize,
    k: usize,
    r: usize,
    m: usize,
    l: usize,
    seed: u64,
    symmetric: bool,
) -> Result<InputOutputHpds> {
    if r > n {
        return Err(crate::error::Error::RankOutOfRange { rank: r, max: n });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let a = if symmetric {
        let g = DenseMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
        let u = g.qr().q();
        let mut t = DenseTensor::zeros(vec![n; k])?;
        for j in 0..r {
            let mag: f64 = rng.gen_range(0.5..2.0);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let col = DenseVector::from_column_slice(u.column(j).as_slice());
            t = t.add(&outer_power(&col, k)?.scale(sign * mag))?;
        }
        t
    } else {
        let len = r.pow(k as u32);
        let core = DenseTensor::new(
            vec![r; k],
            (0..len).map(|_| StandardNormal.sample(&mut rng)).collect(),
        )?
        .symmetrize_first_modes()?;
        let v = {
            let g = DenseMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
            g.qr().q().columns(0, r).into_owned()
        };
        let v_k = {
            let g = DenseMatrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
            g.qr().q().columns(0, r).into_owned()
        };
        let mut t = core;
        for mode in 0..k - 1 {
            t = t.mode_mul_matrix(mode, &v)?;
        }
        t.mode_mul_matrix(k - 1, &v_k)?
    };
    let b = (m > 0).then(|| DenseMatrix::from_fn(n, m, |_, _| StandardNormal.sample(&mut rng)));
    let c = (l > 0).then(|| DenseMatrix::from_fn(l, n, |_, _| StandardNormal.sample(&mut rng)));
    InputOutputHpds::new(a, b, c)
}

/// Seeded dense model: a symmetrized standard-normal dynamic tensor plus
/// Gaussian input/output matrices when `m`/`l` are nonzero.
pub fn random_almost_symmetric(
    n: usize,
    k: usize,
    m: usize,
    l: usize,
    seed: u64,
) -> Result<InputOutputHpds> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let len = n.pow(k as u32);
    let raw = DenseTensor::new(
        vec![n; k],
        (0..len).map(|_| StandardNormal.sample(&mut rng)).collect(),
    )?;
    let a = raw.symmetrize_first_modes()?;
    let b = (m > 0).then(|| DenseMatrix::from_fn(n, m, |_, _| StandardNormal.sample(&mut rng)));
    let c = (l > 0).then(|| DenseMatrix::from_fn(l, n, |_, _| StandardNormal.sample(&mut rng)));
    InputOutputHpds::new(a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::{is_odeco, mode_singular_values, DEFAULT_ODECO_TOL};
    use approx::assert_relative_eq;

    #[test]
    fn example1_shape_and_spectrum() {
        let model = example1();
        assert_eq!(model.state_dim(), 6);
        assert_eq!(model.order(), 4);
        assert!(model.dynamic_tensor().is_symmetric(1e-12).unwrap());
        // mode-0 singular values are the coefficient magnitudes, sorted
        let sigma = mode_singular_values(model.dynamic_tensor(), 0).unwrap();
        assert_relative_eq!(sigma[0], 9.7615, epsilon = 1e-10);
        assert_relative_eq!(sigma[1], 8.2880, epsilon = 1e-10);
        assert_relative_eq!(sigma[2], 3.2248, epsilon = 1e-10);
        for s in &sigma[3..] {
            assert!(*s <= 1e-10);
        }
    }

    #[test]
    fn example1_basis_is_orthonormal_and_close_to_reference() {
        let v = example1_basis();
        let defect = (v.transpose() * &v - DenseMatrix::identity(3, 3)).norm();
        assert!(defect <= 1e-14);
        for i in 0..6 {
            for j in 0..3 {
                assert!((v[(i, j)] - EXAMPLE1_BASIS[i][j]).abs() <= 5e-4);
            }
        }
    }

    #[test]
    fn random_odeco_is_odeco_and_deterministic() {
        let (m1, d1) = random_odeco(4, 4, 3, 11).unwrap();
        let (m2, _) = random_odeco(4, 4, 3, 11).unwrap();
        assert_eq!(m1.dynamic_tensor().data(), m2.dynamic_tensor().data());
        assert!(is_odeco(m1.dynamic_tensor(), DEFAULT_ODECO_TOL).unwrap());
        assert_eq!(d1.lambdas.iter().filter(|l| **l != 0.0).count(), 3);
        for l in &d1.lambdas {
            assert!(*l == 0.0 || (l.abs() >= 0.5 && l.abs() <= 3.0));
        }
        // ground truth reconstructs the tensor
        let back = d1.reconstruct(4).unwrap();
        assert!(back.sub(m1.dynamic_tensor()).unwrap().frobenius_norm() <= 1e-10);
    }

    #[test]
    fn random_almost_symmetric_shapes() {
        let m = random_almost_symmetric(3, 4, 2, 1, 7).unwrap();
        assert_eq!((m.state_dim(), m.order(), m.input_dim(), m.output_dim()), (3, 4, 2, 1));
        assert!(m.dynamic_tensor().is_almost_symmetric(0.0).unwrap());
        let again = random_almost_symmetric(3, 4, 2, 1, 7).unwrap();
        assert_eq!(m.dynamic_tensor().data(), again.dynamic_tensor().data());
    }
}
