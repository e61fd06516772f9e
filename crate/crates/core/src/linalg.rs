//! Symmetric tridiagonal eigenvalues by the implicit-shift QL method.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off[i]` couples rows `i` and `i + 1`).
///
/// Returns the eigenvalues in unspecified order. Fails if any eigenvalue needs
/// more than 60 QL sweeps.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if off.len() + 1 != n {
        return Err(Error::InvalidParameter(format!(
            "off-diagonal length {} does not match dimension {n}",
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = Vec::with_capacity(n);
    e.extend_from_slice(off);
    e.push(0.0);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            if sweeps == MAX_SWEEPS {
                return Err(Error::Numerical {
                    routine: "tridiagonal_eigenvalues",
                    detail: format!(
                        "no convergence for eigenvalue {l} of {n} after {MAX_SWEEPS} sweeps \
                         (residual off-diagonal {:e})",
                        e[l]
                    ),
                });
            }
            sweeps += 1;

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    // underflow: split the matrix and restart
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

/// Tridiagonal form of `B Bᵀ` for a lower-bidiagonal `B` with diagonal `diag`
/// and subdiagonal `sub` (`sub[i] = B[i+1][i]`).
pub fn bidiagonal_gram(diag: &[f64], sub: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut t_diag = Vec::with_capacity(n);
    let mut t_off = Vec::with_capacity(n.saturating_sub(1));
    for i in 0..n {
        let below = if i > 0 { sub[i - 1] } else { 0.0 };
        t_diag.push(diag[i] * diag[i] + below * below);
        if i + 1 < n {
            t_off.push(diag[i] * sub[i]);
        }
    }
    (t_diag, t_off)
}
