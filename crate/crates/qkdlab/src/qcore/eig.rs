//! Eigenvalues of small Hermitian matrices via cyclic Jacobi rotations.
//!
//! Only used for reduced-density-matrix rank checks; the matrices involved
//! are at most a few dozen rows.

use num_complex::Complex64;

/// Eigenvalues of a Hermitian matrix given row-major. The input is not
/// checked for Hermiticity beyond using only its upper triangle implicitly
/// through symmetrized updates.
pub fn hermitian_eigenvalues(mut a: Vec<Complex64>, n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n, "matrix shape");
    if n == 1 {
        return vec![a[0].re];
    }
    let idx = |r: usize, c: usize| r * n + c;
    for _sweep in 0..200 {
        let mut off: f64 = 0.0;
        for r in 0..n {
            for c in (r + 1)..n {
                off = off.max(a[idx(r, c)].norm());
            }
        }
        if off < 1e-14 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[idx(p, q)];
                if apq.norm() < 1e-16 {
                    continue;
                }
                // Diagonalize the 2x2 Hermitian block [[app, apq], [apq*, aqq]].
                // Write apq = |apq| e^{i phi}; with c = cos t, s = sin t the
                // unitary U = [[c, -s e^{i phi}], [s e^{-i phi}, c]] zeroes the
                // off-diagonal entry when tan(2t) = 2 |apq| / (app - aqq).
                let app = a[idx(p, p)].re;
                let aqq = a[idx(q, q)].re;
                let mag = apq.norm();
                let phase = Complex64::from_polar(1.0, apq.arg());
                let theta = if (app - aqq).abs() < 1e-300 {
                    std::f64::consts::FRAC_PI_4
                } else {
                    0.5 * (2.0 * mag / (app - aqq)).atan()
                };
                let (s, c) = theta.sin_cos();
                // Column update: A <- A U
                for r in 0..n {
                    let arp = a[idx(r, p)];
                    let arq = a[idx(r, q)];
                    a[idx(r, p)] = arp * c + arq * phase.conj() * s;
                    a[idx(r, q)] = -arp * phase * s + arq * c;
                }
                // Row update: A <- U† A
                for r in 0..n {
                    let apr = a[idx(p, r)];
                    let aqr = a[idx(q, r)];
                    a[idx(p, r)] = apr * c + aqr * phase * s;
                    a[idx(q, r)] = -apr * phase.conj() * s + aqr * c;
                }
            }
        }
    }
    (0..n).map(|i| a[idx(i, i)].re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(|x, y| x.partial_cmp(y).unwrap());
        v
    }

    #[test]
    fn diagonal_matrix() {
        let a = vec![
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(3.0, 0.0),
        ];
        let e = sorted(hermitian_eigenvalues(a, 2));
        assert!((e[0] - 2.0).abs() < 1e-12 && (e[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn complex_offdiagonal() {
        // [[1, i], [-i, 1]] has eigenvalues {0, 2}.
        let a = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(1.0, 0.0),
        ];
        let e = sorted(hermitian_eigenvalues(a, 2));
        assert!(e[0].abs() < 1e-12 && (e[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rank_deficient_three_by_three() {
        // Projector onto (1,1,0)/sqrt(2) plus 0.5 * projector onto (0,0,1).
        let h = 0.5;
        let a = vec![
            Complex64::new(h, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.5, 0.0),
        ];
        let e = sorted(hermitian_eigenvalues(a, 3));
        assert!(e[0].abs() < 1e-12);
        assert!((e[1] - 0.5).abs() < 1e-12);
        assert!((e[2] - 1.0).abs() < 1e-12);
    }
}
