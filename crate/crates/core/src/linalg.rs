//! Small dense kernels that nalgebra does not provide in the needed form.

use nalgebra::DMatrix;

const SWEEP_LIMIT: usize = 60;

/// Natural logs of the singular values of `g`, via one-sided (Hestenes) Jacobi.
///
/// One-sided Jacobi keeps high relative accuracy for column-graded matrices
/// `B·D` with `B` well conditioned, which is exactly the shape produced when a far
/// point is paired with a nearby one. Entries must stay below ~1e150 in magnitude.
pub fn log_singular_values(mut g: DMatrix<f64>) -> Vec<f64> {
    let n = g.ncols();
    for _ in 0..SWEEP_LIMIT {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = g.column(i).norm_squared();
                let beta = g.column(j).norm_squared();
                let gamma = g.column(i).dot(&g.column(j));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                for r in 0..g.nrows() {
                    let gi = g[(r, i)];
                    let gj = g[(r, j)];
                    g[(r, i)] = c * gi - s * gj;
                    g[(r, j)] = s * gi + c * gj;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (0..n).map(|j| g.column(j).norm().ln()).collect()
}

/// The orthogonal matrix `Q` minimizing `‖a·Q - b‖_F` (orthogonal Procrustes).
pub fn procrustes(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let m = a.transpose() * b;
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested Vᵀ");
    u * vt
}
