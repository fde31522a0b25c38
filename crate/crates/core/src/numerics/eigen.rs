use super::matrix::{Matrix, SymMatrix};
use crate::error::{Error, Result};

/// Spectrum of a real symmetric matrix.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[n]` belongs to `values[n]`; the set is orthonormal.
    pub vectors: Vec<Vec<f64>>,
}

impl EigenDecomposition {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Projector onto the eigenvectors with the given indices.
    pub fn projector(&self, indices: impl IntoIterator<Item = usize>) -> Matrix {
        let n = self.values.len();
        let vecs: Vec<&[f64]> = indices.into_iter().map(|k| self.vectors[k].as_slice()).collect();
        Matrix::projector(n, vecs)
    }
}

/// Dense symmetric eigendecomposition: Householder reduction to tridiagonal form
/// followed by the implicit QL algorithm (EISPACK `tred2`/`tql2`).
///
/// Eigenvalues come out ascending. Each eigenvector is signed so that its first
/// component larger than `1e-8 · max|v_i|` is positive, which makes the output a
/// deterministic function of the input.
pub fn eigh(a: &SymMatrix) -> Result<EigenDecomposition> {
    if !a.is_finite() {
        return Err(Error::NonFinite("eigh input"));
    }
    let n = a.order();
    if n == 0 {
        return Ok(EigenDecomposition {
            values: Vec::new(),
            vectors: Vec::new(),
        });
    }
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    tridiagonal_ql(&mut v, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let mut col: Vec<f64> = (0..n).map(|i| v[i][k]).collect();
            fix_sign(&mut col);
            col
        })
        .collect();
    Ok(EigenDecomposition { values, vectors })
}

fn fix_sign(col: &mut [f64]) {
    let scale = col.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(first) = col.iter().find(|x| x.abs() > 1e-8 * scale) {
        if *first < 0.0 {
            col.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn tridiagonalize(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            for j in 0..i {
                f = d[j];
                v[j][i] = f;
                g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }

    // accumulate transformations
    for i in 0..n - 1 {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for row in v.iter_mut().take(i + 1) {
            row[i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

fn tridiagonal_ql(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let max_iterations = 60 * n.max(1);
    let mut iterations = 0;
    let mut f = 0.0;
    let mut tst1 = 0.0_f64;
    let eps = f64::EPSILON;

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            loop {
                iterations += 1;
                if iterations > max_iterations {
                    return Err(Error::EigenNoConvergence { iterations });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    fn random_symmetric(n: usize, seed: u64) -> SymMatrix {
        let mut rng = RngStream::new(seed, 0);
        SymMatrix::from_upper(n, |_, _| rng.normal())
    }

    fn residual(a: &SymMatrix, eig: &EigenDecomposition) -> f64 {
        let n = a.order();
        let mut worst = 0.0_f64;
        for (lambda, v) in eig.values.iter().zip(&eig.vectors) {
            let av = a.matvec(v);
            for i in 0..n {
                worst = worst.max((av[i] - lambda * v[i]).abs());
            }
        }
        worst
    }

    fn gram_defect(eig: &EigenDecomposition) -> f64 {
        let mut worst = 0.0_f64;
        for (i, u) in eig.vectors.iter().enumerate() {
            for (j, w) in eig.vectors.iter().enumerate() {
                let dot: f64 = u.iter().zip(w).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }

    #[test]
    fn pauli_x() {
        let a = SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let eig = eigh(&a).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((eig.values[0] + 1.0).abs() < 1e-15);
        assert!((eig.values[1] - 1.0).abs() < 1e-15);
        assert!((eig.vectors[0][0] - s).abs() < 1e-15 && (eig.vectors[0][1] + s).abs() < 1e-15);
        assert!((eig.vectors[1][0] - s).abs() < 1e-15 && (eig.vectors[1][1] - s).abs() < 1e-15);
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let eig = eigh(&SymMatrix::identity(5)).unwrap();
        assert!(eig.values.iter().all(|&v| v == 1.0));
        assert!(gram_defect(&eig) < 1e-12);
    }

    #[test]
    fn single_element() {
        let a = SymMatrix::from_rows(&[vec![-3.5]]).unwrap();
        let eig = eigh(&a).unwrap();
        assert_eq!(eig.values, vec![-3.5]);
        assert_eq!(eig.vectors, vec![vec![1.0]]);
    }

    #[test]
    fn reconstruction_of_random_matrix() {
        let a = random_symmetric(10, 7);
        let eig = eigh(&a).unwrap();
        let n = 10;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let r: f64 = (0..n)
                    .map(|k| eig.vectors[k][i] * eig.values[k] * eig.vectors[k][j])
                    .sum();
                worst = worst.max((r - a.get(i, j)).abs());
            }
        }
        assert!(worst < 1e-10, "reconstruction error {worst}");
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn residual_and_orthonormality_scale_to_large_orders() {
        for &n in &[1usize, 2, 3, 17, 64, 300] {
            let a = random_symmetric(n, n as u64);
            let eig = eigh(&a).unwrap();
            let tol = 1e-10 * a.norm_inf().max(1.0);
            assert!(residual(&a, &eig) < tol, "order {n}");
            assert!(gram_defect(&eig) < 1e-12, "order {n}");
        }
    }

    #[test]
    #[ignore = "order-1000 check takes several seconds"]
    fn residual_at_order_1000() {
        let a = random_symmetric(1000, 1000);
        let eig = eigh(&a).unwrap();
        assert!(residual(&a, &eig) < 1e-10 * a.norm_inf().max(1.0));
        assert!(gram_defect(&eig) < 1e-12);
    }

    #[test]
    fn degenerate_eigenspace_gets_orthonormal_basis() {
        // Q diag(1,1,1,2,2,-3) Qᵀ with Q from a random spectrum.
        let q = eigh(&random_symmetric(6, 99)).unwrap().vectors;
        let lambdas = [1.0, 1.0, 1.0, 2.0, 2.0, -3.0];
        let a = SymMatrix::from_upper(6, |i, j| {
            (0..6).map(|k| q[k][i] * lambdas[k] * q[k][j]).sum()
        });
        let eig = eigh(&a).unwrap();
        assert!(gram_defect(&eig) < 1e-12);
        assert!((eig.values[1] - 1.0).abs() < 1e-12 && (eig.values[4] - 2.0).abs() < 1e-12);
        assert!(residual(&a, &eig) < 1e-12);
    }

    #[test]
    fn deterministic_output() {
        let a = random_symmetric(20, 3);
        let e1 = eigh(&a).unwrap();
        let e2 = eigh(&a).unwrap();
        assert_eq!(e1.values, e2.values);
        assert_eq!(e1.vectors, e2.vectors);
    }

    #[test]
    fn rejects_non_finite_input() {
        let mut a = SymMatrix::zeros(3);
        a.set(0, 1, f64::NAN);
        assert_eq!(eigh(&a).unwrap_err(), Error::NonFinite("eigh input"));
    }
}
