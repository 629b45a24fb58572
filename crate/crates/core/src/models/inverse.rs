use nalgebra::SymmetricEigen;

use super::kkt_matrix;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Relative eigenvalue cutoff below which the KKT matrix counts as singular.
const SINGULAR_RTOL: f64 = 1e-12;

/// Inverse of the interpolation KKT matrix in block form
/// `[[Ω, Ξᵀ], [Ξ, Υ]]` with `Ω = Z D Zᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseKkt {
    pub z: Matrix,
    pub d: Vec<f64>,
    pub xi: Matrix,
    pub upsilon: Matrix,
}

impl InverseKkt {
    /// Factors the KKT matrix of the displacements `xpt` (columns) from
    /// scratch, after scaling them to unit size.
    pub fn factorize(xpt: &Matrix) -> Result<Self> {
        let (n, m) = xpt.shape();
        let r = xpt.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::DegenerateGeometry);
        }
        let w = kkt_matrix(&(xpt / r));
        let eig = SymmetricEigen::new(w);
        let emax = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if eig.eigenvalues.iter().any(|v| !(v.abs() > SINGULAR_RTOL * emax)) {
            return Err(Error::DegenerateGeometry);
        }
        let q = &eig.eigenvectors;
        let mut scaled = q.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col /= eig.eigenvalues[k];
        }
        let hs = scaled * q.transpose();
        // Undo the scaling: H = S⁻¹ H' S⁻¹ with S⁻¹ = diag(r⁻² I, r², r I).
        let dim = m + n + 1;
        let sinv = Vector::from_iterator(
            dim,
            (0..dim).map(|i| if i < m { r.powi(-2) } else if i == m { r * r } else { r }),
        );
        let mut h = hs;
        for i in 0..dim {
            for j in 0..dim {
                h[(i, j)] *= sinv[i] * sinv[j];
            }
        }
        let omega = h.view((0, 0), (m, m)).into_owned();
        let (z, d) = factor_omega(&omega, m - n - 1);
        Ok(InverseKkt {
            z,
            d,
            xi: h.view((m, 0), (n + 1, m)).into_owned(),
            upsilon: h.view((m, m), (n + 1, n + 1)).into_owned(),
        })
    }

    pub fn m(&self) -> usize {
        self.z.nrows()
    }

    pub fn omega(&self) -> Matrix {
        let mut zd = self.z.clone();
        for (k, mut col) in zd.column_iter_mut().enumerate() {
            col *= self.d[k];
        }
        zd * self.z.transpose()
    }

    pub fn omega_mul(&self, v: &Vector) -> Vector {
        let mut c = self.z.tr_mul(v);
        for k in 0..c.len() {
            c[k] *= self.d[k];
        }
        &self.z * c
    }

    pub fn omega_col(&self, t: usize) -> Vector {
        let mut c = self.z.row(t).transpose();
        for k in 0..c.len() {
            c[k] *= self.d[k];
        }
        &self.z * c
    }

    pub fn omega_diag(&self) -> Vector {
        let m = self.m();
        Vector::from_iterator(
            m,
            (0..m).map(|i| (0..self.d.len()).map(|k| self.d[k] * self.z[(i, k)].powi(2)).sum()),
        )
    }

    /// Product of the assembled inverse with `w`.
    pub fn mul(&self, w: &Vector) -> Vector {
        let m = self.m();
        let np1 = self.xi.nrows();
        let wa = w.rows(0, m).into_owned();
        let wb = w.rows(m, np1).into_owned();
        let top = self.omega_mul(&wa) + self.xi.tr_mul(&wb);
        let bottom = &self.xi * &wa + &self.upsilon * &wb;
        let mut out = Vector::zeros(m + np1);
        out.rows_mut(0, m).copy_from(&top);
        out.rows_mut(m, np1).copy_from(&bottom);
        out
    }

    pub fn assemble(&self) -> Matrix {
        let m = self.m();
        let np1 = self.xi.nrows();
        let mut h = Matrix::zeros(m + np1, m + np1);
        h.view_mut((0, 0), (m, m)).copy_from(&self.omega());
        h.view_mut((m, 0), (np1, m)).copy_from(&self.xi);
        h.view_mut((0, m), (m, np1)).copy_from(&self.xi.transpose());
        h.view_mut((m, m), (np1, np1)).copy_from(&self.upsilon);
        h
    }

    /// Rank-2 update for replacing point `t`, given `hw = H w`.
    pub(crate) fn rank_two_update(&mut self, t: usize, hw: &Vector, alpha: f64, beta: f64, tau: f64, sigma: f64) {
        let m = self.m();
        let np1 = self.xi.nrows();
        let mut v = -hw;
        v[t] += 1.0;
        let ha = self.omega_col(t);
        let hb = self.xi.column(t).into_owned();
        let va = v.rows(0, m).into_owned();
        let vb = v.rows(m, np1).into_owned();

        // Lower blocks.
        let c_vv = alpha / sigma;
        let c_hh = -beta / sigma;
        let c_hv = tau / sigma;
        let mut xi = self.xi.clone();
        xi.ger(c_vv, &vb, &va, 1.0);
        xi.ger(c_hh, &hb, &ha, 1.0);
        xi.ger(c_hv, &hb, &va, 1.0);
        xi.ger(c_hv, &vb, &ha, 1.0);
        let mut up = self.upsilon.clone();
        up.ger(c_vv, &vb, &vb, 1.0);
        up.ger(c_hh, &hb, &hb, 1.0);
        up.ger(c_hv, &hb, &vb, 1.0);
        up.ger(c_hv, &vb, &hb, 1.0);

        // Leading block through its factor: concentrate row t of Z into one
        // column per sign class, then update that column.
        let mut z = self.z.clone();
        let mut pivots = Vec::new();
        for sign in [1.0, -1.0] {
            let cols: Vec<usize> = (0..self.d.len()).filter(|&k| self.d[k] == sign).collect();
            let Some(&jp) = cols.iter().max_by(|&&a, &&b| z[(t, a)].abs().total_cmp(&z[(t, b)].abs())) else {
                continue;
            };
            for &j in &cols {
                if j == jp || z[(t, j)] == 0.0 {
                    continue;
                }
                let (a, b) = (z[(t, jp)], z[(t, j)]);
                let r = a.hypot(b);
                let (c, s) = (a / r, b / r);
                for i in 0..m {
                    let (p, q) = (z[(i, jp)], z[(i, j)]);
                    z[(i, jp)] = c * p + s * q;
                    z[(i, j)] = c * q - s * p;
                }
                z[(t, j)] = 0.0;
            }
            if z[(t, jp)] != 0.0 {
                pivots.push(jp);
            }
        }
        self.xi = xi;
        self.upsilon = up;
        match pivots.as_slice() {
            [] => self.z = z,
            [j] => {
                let j = *j;
                let zeta = z[(t, j)];
                let scale = sigma.abs().sqrt();
                let col = (z.column(j) * tau + &va * zeta) / scale;
                z.set_column(j, &col);
                self.d[j] *= sigma.signum();
                self.z = z;
            }
            _ => {
                // Both sign classes touch row t: update the leading block
                // explicitly and factor it again.
                let mut omega = self.omega();
                omega.ger(c_vv, &va, &va, 1.0);
                omega.ger(c_hh, &ha, &ha, 1.0);
                omega.ger(c_hv, &ha, &va, 1.0);
                omega.ger(c_hv, &va, &ha, 1.0);
                let (z, d) = factor_omega(&omega, self.d.len());
                self.z = z;
                self.d = d;
            }
        }
    }
}

/// `Z`, `D` from the leading `rank` eigenpairs (by magnitude) of `omega`.
fn factor_omega(omega: &Matrix, rank: usize) -> (Matrix, Vec<f64>) {
    let m = omega.nrows();
    let sym = (omega + omega.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
    let mut z = Matrix::zeros(m, rank);
    let mut d = vec![1.0; rank];
    for (k, &idx) in order.iter().take(rank).enumerate() {
        let lam = eig.eigenvalues[idx];
        z.set_column(k, &(eig.eigenvectors.column(idx) * lam.abs().sqrt()));
        d[k] = if lam < 0.0 { -1.0 } else { 1.0 };
    }
    (z, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorization_inverts_kkt_matrix() {
        let xpt = Matrix::from_row_slice(2, 5, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
        let inv = InverseKkt::factorize(&xpt).unwrap();
        let prod = inv.assemble() * kkt_matrix(&xpt);
        assert!((prod - Matrix::identity(8, 8)).norm() < 1e-12);
        assert!(inv.d.iter().all(|&d| d == 1.0));
    }

    #[test]
    fn coincident_points_are_singular() {
        let xpt = Matrix::from_row_slice(1, 3, &[0.0, 1.0, 1.0]);
        assert_eq!(InverseKkt::factorize(&xpt), Err(Error::DegenerateGeometry));
    }
}
