//! Small dense convex QP solver: minimize ½ zᵀHz + fᵀz subject to Az ≤ b,
//! with H positive definite. An unconstrained Cholesky solve handles the
//! common no-active-set case exactly; otherwise Hildreth's dual coordinate
//! ascent runs on a lazily grown working set of violated rows.

use nalgebra::{Cholesky, DMatrix, DVector};
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    /// Iteration or deadline budget exhausted with small residual violation.
    Suboptimal,
    Infeasible,
    DeadlineExceeded,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub z: DVector<f64>,
    pub status: QpStatus,
    pub sweeps: usize,
    /// Worst constraint violation at the returned point.
    pub max_violation: f64,
}

#[derive(Debug, Clone)]
pub struct QpOptions {
    pub max_sweeps: usize,
    pub tol: f64,
    pub deadline: Option<Instant>,
}

impl Default for QpOptions {
    fn default() -> Self {
        QpOptions {
            max_sweeps: 4000,
            tol: 1e-9,
            deadline: None,
        }
    }
}

pub fn solve_qp(
    h: &DMatrix<f64>,
    f: &DVector<f64>,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    opts: &QpOptions,
) -> QpSolution {
    // Normalize constraint rows to unit norm: violations become comparable
    // distances and the dual iteration conditions much better. Rows with no
    // decision-variable coupling are structural: satisfied ones drop out,
    // violated ones make the problem infeasible outright.
    let n_raw = a.nrows();
    let mut keep: Vec<usize> = Vec::with_capacity(n_raw);
    for i in 0..n_raw {
        let norm = a.row(i).norm();
        if norm < 1e-12 {
            if b[i] < -1e-9 {
                return QpSolution {
                    z: DVector::zeros(h.nrows()),
                    status: QpStatus::Infeasible,
                    sweeps: 0,
                    max_violation: -b[i],
                };
            }
        } else {
            keep.push(i);
        }
    }
    let mut a_n = DMatrix::zeros(keep.len(), h.ncols());
    let mut b_n = DVector::zeros(keep.len());
    for (r, &i) in keep.iter().enumerate() {
        let norm = a.row(i).norm();
        a_n.set_row(r, &(a.row(i) / norm));
        b_n[r] = b[i] / norm;
    }
    let (a, b): (&DMatrix<f64>, &DVector<f64>) = (&a_n, &b_n);

    let n = h.nrows();
    let n_con = a.nrows();
    let chol = match Cholesky::new(h.clone()) {
        Some(c) => c,
        None => {
            // Regularize a numerically semidefinite Hessian.
            let mut hr = h.clone();
            for i in 0..n {
                hr[(i, i)] += 1e-10 * (1.0 + hr[(i, i)].abs());
            }
            Cholesky::new(hr).expect("QP Hessian not positive definite")
        }
    };

    let z_free = chol.solve(&(-f));
    if n_con == 0 {
        return QpSolution {
            z: z_free,
            status: QpStatus::Optimal,
            sweeps: 0,
            max_violation: 0.0,
        };
    }

    let violation = |z: &DVector<f64>| -> (f64, Vec<usize>) {
        let r = a * z - b;
        let mut worst = 0.0f64;
        let mut idx = Vec::new();
        for (i, v) in r.iter().enumerate() {
            if *v > opts.tol {
                idx.push(i);
            }
            worst = worst.max(*v);
        }
        (worst, idx)
    };

    let (w0, mut working): (f64, Vec<usize>) = violation(&z_free);
    if w0 <= opts.tol {
        return QpSolution {
            z: z_free,
            status: QpStatus::Optimal,
            sweeps: 0,
            max_violation: w0,
        };
    }

    // Working-set Hildreth: solve the dual restricted to the violated rows,
    // then re-screen the full constraint set and grow as needed.
    let mut lambda: Vec<f64> = vec![0.0; n_con];
    let mut z = z_free.clone();
    let mut total_sweeps = 0usize;
    // Cache of H⁻¹ aᵢᵀ columns, built lazily per constraint row.
    let mut hinv_at: Vec<Option<DVector<f64>>> = vec![None; n_con];

    for _outer in 0..n_con.max(8) {
        working.sort_unstable();
        working.dedup();
        let m = working.len();
        for &i in &working {
            if hinv_at[i].is_none() {
                let ai = a.row(i).transpose();
                hinv_at[i] = Some(chol.solve(&ai));
            }
        }
        // Restricted dual quadratic: P = A_w H⁻¹ A_wᵀ, c = A_w z_free − b_w.
        let mut p = DMatrix::zeros(m, m);
        for (r, &i) in working.iter().enumerate() {
            let hi = hinv_at[i].as_ref().unwrap();
            for (c, &j) in working.iter().enumerate() {
                p[(r, c)] = (a.row(j) * hi)[(0, 0)];
            }
        }
        let c_vec: Vec<f64> = working
            .iter()
            .map(|&i| b[i] - (a.row(i) * &z_free)[(0, 0)])
            .collect();

        let mut lam: Vec<f64> = working.iter().map(|&i| lambda[i]).collect();
        let mut converged = false;
        let mut last_checkpoint_violation = f64::INFINITY;
        let mut plateau = 0u32;
        // Over-relaxation accelerates well-conditioned duals but can cycle
        // on semidefinite ones; a plateau drops back to plain Gauss-Seidel
        // before infeasibility may be declared.
        let mut relax = 1.5;
        while total_sweeps < opts.max_sweeps {
            total_sweeps += 1;
            let mut max_delta = 0.0f64;
            for r in 0..m {
                let prr = p[(r, r)];
                if prr <= 1e-14 {
                    continue;
                }
                let mut s = c_vec[r];
                for c2 in 0..m {
                    if c2 != r {
                        s += p[(r, c2)] * lam[c2];
                    }
                }
                let target = (-s / prr).max(0.0);
                let new = (lam[r] + relax * (target - lam[r])).max(0.0);
                max_delta = max_delta.max((new - lam[r]).abs() * prr.sqrt());
                lam[r] = new;
            }
            if max_delta < opts.tol.max(1e-10) {
                converged = true;
                break;
            }
            // Rows are unit-normalized, so the working-set residual is a
            // plain distance; stop once it is small enough. A residual that
            // stops improving while multipliers keep pushing marks an
            // inconsistent row set.
            if total_sweeps % 8 == 0 {
                let mut worst = 0.0f64;
                for (r, &i) in working.iter().enumerate() {
                    let mut s = c_vec[r];
                    for c2 in 0..m {
                        s += p[(r, c2)] * lam[c2];
                    }
                    // s = b_i - a_i z(λ); violation when negative.
                    let _ = i;
                    worst = worst.max(-s);
                }
                if worst < 1e-7 && max_delta < 1e-6 {
                    converged = true;
                    break;
                }
                if total_sweeps % 64 == 0 {
                    if worst > 1e-6 && worst > last_checkpoint_violation - 1e-10 {
                        plateau += 1;
                        if plateau >= 3 {
                            if relax > 1.0 {
                                relax = 1.0;
                                plateau = 0;
                            } else {
                                return QpSolution {
                                    z: primal(&chol, f, a, &working, &lam),
                                    status: QpStatus::Infeasible,
                                    sweeps: total_sweeps,
                                    max_violation: worst,
                                };
                            }
                        }
                    } else {
                        plateau = 0;
                    }
                    last_checkpoint_violation = worst;
                }
            }
            if let Some(deadline) = opts.deadline {
                if total_sweeps % 16 == 0 && Instant::now() >= deadline {
                    let z = primal(&chol, f, a, &working, &lam);
                    let (w, _) = violation(&z);
                    return QpSolution {
                        z,
                        status: QpStatus::DeadlineExceeded,
                        sweeps: total_sweeps,
                        max_violation: w,
                    };
                }
            }
        }
        for (r, &i) in working.iter().enumerate() {
            lambda[i] = lam[r];
        }
        z = primal(&chol, f, a, &working, &lam);
        let (w, newly) = violation(&z);
        if w <= opts.tol.max(1e-7) {
            return QpSolution {
                z,
                status: QpStatus::Optimal,
                sweeps: total_sweeps,
                max_violation: w,
            };
        }
        let before = working.len();
        for i in newly {
            if !working.contains(&i) {
                working.push(i);
            }
        }
        if working.len() == before && converged {
            // Dual converged yet primal violation persists: inconsistent
            // constraint set.
            return QpSolution {
                z,
                status: QpStatus::Infeasible,
                sweeps: total_sweeps,
                max_violation: w,
            };
        }
        if total_sweeps >= opts.max_sweeps {
            let z = primal(&chol, f, a, &working, &lam_full(&lambda, &working));
            let (w, _) = violation(&z);
            return QpSolution {
                z,
                status: QpStatus::Suboptimal,
                sweeps: total_sweeps,
                max_violation: w,
            };
        }
    }
    let (w, _) = violation(&z);
    QpSolution {
        z,
        status: QpStatus::Suboptimal,
        sweeps: total_sweeps,
        max_violation: w,
    }
}

fn lam_full(lambda: &[f64], working: &[usize]) -> Vec<f64> {
    working.iter().map(|&i| lambda[i]).collect()
}

fn primal(
    chol: &Cholesky<f64, nalgebra::Dyn>,
    f: &DVector<f64>,
    a: &DMatrix<f64>,
    working: &[usize],
    lam: &[f64],
) -> DVector<f64> {
    let mut rhs = -f.clone();
    for (r, &i) in working.iter().enumerate() {
        if lam[r] != 0.0 {
            rhs -= a.row(i).transpose() * lam[r];
        }
    }
    chol.solve(&rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn ident(n: usize) -> DMatrix<f64> {
        DMatrix::identity(n, n)
    }

    #[test]
    fn unconstrained_matches_cholesky() {
        let h = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let f = DVector::from_row_slice(&[-1.0, -2.0]);
        let a = DMatrix::zeros(0, 2);
        let b = DVector::zeros(0);
        let sol = solve_qp(&h, &f, &a, &b, &QpOptions::default());
        let expect = Cholesky::new(h.clone()).unwrap().solve(&(-&f));
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((sol.z - expect).amax() < 1e-12);
    }

    #[test]
    fn single_constraint_projection_closed_form() {
        // minimize ||z - p||² s.t. aᵀz ≤ b: solution is the Euclidean
        // projection p − a (aᵀp − b)/||a||² when violated.
        let p = DVector::from_row_slice(&[2.0, 1.0]);
        let h = ident(2) * 2.0;
        let f = -2.0 * &p;
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let b = DVector::from_row_slice(&[1.0]);
        let sol = solve_qp(&h, &f, &a, &b, &QpOptions::default());
        let viol = (a.row(0) * &p)[(0, 0)] - b[0];
        let proj = &p - a.row(0).transpose() * (viol / a.row(0).norm_squared());
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!((&sol.z - &proj).amax() < 1e-7, "{} vs {}", sol.z, proj);
    }

    /// Slow projected-gradient oracle for box + general rows is replaced by
    /// a fine grid search on 2D problems: independent of the solver path.
    fn grid_oracle(
        h: &DMatrix<f64>,
        f: &DVector<f64>,
        a: &DMatrix<f64>,
        b: &DVector<f64>,
        lo: f64,
        hi: f64,
    ) -> DVector<f64> {
        let mut best = (f64::INFINITY, DVector::zeros(2));
        let steps = 400;
        for i in 0..=steps {
            for j in 0..=steps {
                let z = DVector::from_row_slice(&[
                    lo + (hi - lo) * i as f64 / steps as f64,
                    lo + (hi - lo) * j as f64 / steps as f64,
                ]);
                let feas = (a * &z - b).iter().all(|v| *v <= 1e-9);
                if feas {
                    let cost = 0.5 * (&z.transpose() * h * &z)[(0, 0)] + f.dot(&z);
                    if cost < best.0 {
                        best = (cost, z);
                    }
                }
            }
        }
        best.1
    }

    #[test]
    fn random_2d_problems_match_grid_oracle() {
        let mut rng = StdRng::seed_from_u64(99);
        for _ in 0..25 {
            let d1: f64 = rng.random_range(0.5..3.0);
            let d2: f64 = rng.random_range(0.5..3.0);
            let off: f64 = rng.random_range(-0.3..0.3);
            let h = DMatrix::from_row_slice(2, 2, &[d1, off, off, d2]);
            if Cholesky::new(h.clone()).is_none() {
                continue;
            }
            let f = DVector::from_fn(2, |_, _| rng.random_range(-2.0..2.0));
            // Box [-1, 1]² plus one random halfspace.
            let mut a = DMatrix::zeros(5, 2);
            let mut b = DVector::zeros(5);
            a[(0, 0)] = 1.0;
            b[0] = 1.0;
            a[(1, 0)] = -1.0;
            b[1] = 1.0;
            a[(2, 1)] = 1.0;
            b[2] = 1.0;
            a[(3, 1)] = -1.0;
            b[3] = 1.0;
            a[(4, 0)] = rng.random_range(-1.0..1.0);
            a[(4, 1)] = rng.random_range(-1.0..1.0);
            b[4] = rng.random_range(0.2..1.0);
            let sol = solve_qp(&h, &f, &a, &b, &QpOptions::default());
            assert_ne!(sol.status, QpStatus::Infeasible);
            let oracle = grid_oracle(&h, &f, &a, &b, -1.0, 1.0);
            assert!(
                (&sol.z - &oracle).amax() < 1.5e-2,
                "z={} oracle={}",
                sol.z,
                oracle
            );
            // Tight optimality: solver cost must not exceed oracle cost.
            let cost = |z: &DVector<f64>| 0.5 * (&z.transpose() * &h * z)[(0, 0)] + f.dot(z);
            assert!(cost(&sol.z) <= cost(&oracle) + 1e-6);
        }
    }

    #[test]
    fn detects_inconsistent_rows() {
        let h = ident(1);
        let f = DVector::zeros(1);
        // z ≤ -1 and -z ≤ -1 (z ≥ 1) cannot both hold.
        let a = DMatrix::from_row_slice(2, 1, &[1.0, -1.0]);
        let b = DVector::from_row_slice(&[-1.0, -1.0]);
        let sol = solve_qp(&h, &f, &a, &b, &QpOptions::default());
        assert_eq!(sol.status, QpStatus::Infeasible);
    }

    #[test]
    fn deadline_is_honored() {
        let n = 30;
        let mut rng = StdRng::seed_from_u64(7);
        let mut h = ident(n);
        for i in 0..n {
            h[(i, i)] = rng.random_range(0.5..2.0);
        }
        let f = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        let a = DMatrix::from_fn(3 * n, n, |_, _| rng.random_range(-1.0..1.0));
        let b = DVector::from_fn(3 * n, |_, _| rng.random_range(-0.05..0.05));
        let opts = QpOptions {
            deadline: Some(Instant::now()),
            ..QpOptions::default()
        };
        let sol = solve_qp(&h, &f, &a, &b, &opts);
        // Either it finished instantly on the shortcut or it reports the
        // exhausted deadline.
        assert!(matches!(
            sol.status,
            QpStatus::DeadlineExceeded | QpStatus::Optimal
        ));
    }
}
