//! Exact diagonalization of the second-quantized Hamiltonian
//! Σ p² a_p†a_p + ½ Σ V_pqrs a_p†a_q†a_r a_s in a truncated cosine basis at
//! fixed particle number.

use crate::eigen::{dense_lowest, lobpcg, LobpcgOptions, SymmetricOperator};
use crate::energy::{lowest_modes, MatrixElementTable, ModeIndex};
use crate::potential::Potential;
use crate::{Error, Result};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;

pub const MAX_DIMENSION: usize = 200_000;
pub const DENSE_LIMIT: usize = 5_000;

/// Occupation-number basis at fixed n. States are ordered lexicographically
/// descending, so the condensate |n, 0, …, 0⟩ comes first.
#[derive(Debug, Clone)]
pub struct FockBasis {
    pub modes: Vec<ModeIndex>,
    pub n: usize,
    states: Vec<Vec<u16>>,
    index: HashMap<Vec<u16>, usize>,
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

impl FockBasis {
    pub fn new(modes: Vec<ModeIndex>, n: usize) -> Result<Self> {
        let m = modes.len();
        if m == 0 {
            return Err(Error::Invalid("mode list is empty".into()));
        }
        let dim = binomial(n + m - 1, n).unwrap_or(usize::MAX);
        if dim > MAX_DIMENSION {
            return Err(Error::Size(format!("Fock dimension {dim} exceeds {MAX_DIMENSION}")));
        }
        let mut states = Vec::with_capacity(dim);
        let mut occ = vec![0u16; m];
        fn fill(pos: usize, left: usize, occ: &mut Vec<u16>, out: &mut Vec<Vec<u16>>) {
            if pos == occ.len() - 1 {
                occ[pos] = left as u16;
                out.push(occ.clone());
                return;
            }
            for k in (0..=left).rev() {
                occ[pos] = k as u16;
                fill(pos + 1, left - k, occ, out);
            }
            occ[pos] = 0;
        }
        fill(0, n, &mut occ, &mut states);
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Self { modes, n, states, index })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, i: usize) -> &[u16] {
        &self.states[i]
    }

    pub fn index_of(&self, occ: &[u16]) -> Option<usize> {
        self.index.get(occ).copied()
    }
}

/// Symmetric many-body matrix stored by rows.
#[derive(Debug, Clone)]
pub struct ManyBodyOperator {
    pub basis: FockBasis,
    pub label: String,
    rows: Vec<Vec<(usize, f64)>>,
}

impl ManyBodyOperator {
    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.basis.dim();
        let mut a = DMatrix::zeros(n, n);
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, v) in row {
                a[(i, j)] += v;
            }
        }
        a
    }

    /// max |H_ij − H_ji|
    pub fn asymmetry(&self) -> f64 {
        let a = self.dense();
        (&a - a.transpose()).amax()
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

impl SymmetricOperator for ManyBodyOperator {
    fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.par_iter_mut().zip(&self.rows).for_each(|(o, row)| {
            *o = row.iter().map(|&(j, a)| a * v[j]).sum();
        });
    }

    fn norm_bound(&self) -> f64 {
        self.rows.iter().map(|r| r.iter().map(|e| e.1.abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

/// H = Σ p² a_p†a_p + ½ Σ V_pqrs a_p†a_q†a_r a_s on the unit box, with the
/// matrix elements of `table` (which fixes the modes and ℓ).
pub fn build_hamiltonian(table: &MatrixElementTable, basis: FockBasis) -> Result<ManyBodyOperator> {
    if table.modes != basis.modes {
        return Err(Error::Invalid("matrix element table and basis use different modes".into()));
    }
    let m = basis.modes.len();
    let p2: Vec<f64> = basis.modes.iter().map(ModeIndex::p2).collect();
    let rows: Vec<Vec<(usize, f64)>> = (0..basis.dim())
        .into_par_iter()
        .map(|i| {
            let occ = basis.state(i);
            let mut acc: HashMap<usize, f64> = HashMap::new();
            let kin: f64 = occ.iter().zip(&p2).map(|(&k, &e)| k as f64 * e).sum();
            if kin != 0.0 {
                acc.insert(i, kin);
            }
            let mut work = occ.to_vec();
            for r in 0..m {
                for s in 0..m {
                    // a_r a_s
                    let ns = work[s] as f64;
                    if ns == 0.0 {
                        continue;
                    }
                    work[s] -= 1;
                    let nr = work[r] as f64;
                    if nr == 0.0 {
                        work[s] += 1;
                        continue;
                    }
                    work[r] -= 1;
                    let down = (ns * nr).sqrt();
                    for p in 0..m {
                        for q in 0..m {
                            let v = table.get(p, q, r, s);
                            if v == 0.0 {
                                continue;
                            }
                            // a_p† a_q†
                            work[q] += 1;
                            let cq = work[q] as f64;
                            work[p] += 1;
                            let cp = work[p] as f64;
                            let j = basis.index_of(&work).expect("particle number is conserved");
                            *acc.entry(j).or_insert(0.0) += 0.5 * v * down * (cq * cp).sqrt();
                            work[p] -= 1;
                            work[q] -= 1;
                        }
                    }
                    work[r] += 1;
                    work[s] += 1;
                }
            }
            let mut row: Vec<(usize, f64)> = acc.into_iter().collect();
            row.sort_unstable_by_key(|e| e.0);
            row
        })
        .collect();
    let label = format!("H(n={}, modes={}, ell={})", basis.n, m, table.ell);
    let mut op = ManyBodyOperator { basis, label, rows };
    symmetrize_rows(&mut op.rows);
    Ok(op)
}

/// Averages H_ij and H_ji so that the stored matrix is exactly symmetric.
fn symmetrize_rows(rows: &mut [Vec<(usize, f64)>]) {
    let lookup: Vec<HashMap<usize, f64>> = rows.iter().map(|r| r.iter().copied().collect()).collect();
    for (i, row) in rows.iter_mut().enumerate() {
        for e in row.iter_mut() {
            let t = lookup[e.0].get(&i).copied().unwrap_or(0.0);
            e.1 = 0.5 * (e.1 + t);
        }
    }
}

/// Lowest eigenpair; dense below `DENSE_LIMIT`, otherwise LOBPCG.
pub fn ground_state(h: &ManyBodyOperator) -> Result<(f64, Vec<f64>)> {
    let dim = h.basis.dim();
    let (e, v) = if dim <= DENSE_LIMIT {
        dense_lowest(h.dense())
    } else {
        return ground_state_iterative(h);
    };
    Ok(normalized(e, v))
}

/// Lowest eigenpair by LOBPCG started from the condensate state.
pub fn ground_state_iterative(h: &ManyBodyOperator) -> Result<(f64, Vec<f64>)> {
    let mut x0 = vec![0.0; h.basis.dim()];
    x0[0] = 1.0;
    let pair = lobpcg(h, None, None, x0, LobpcgOptions { tol: 1e-10, max_iter: 2000 })?;
    Ok(normalized(pair.value, pair.vector))
}

fn normalized(e: f64, mut v: Vec<f64>) -> (f64, Vec<f64>) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sign = if v[0] < 0.0 { -1.0 } else { 1.0 };
    v.iter_mut().for_each(|x| *x *= sign / norm);
    (e, v)
}

/// 1 − ⟨a₀†a₀⟩/n for a normalized vector.
pub fn depletion(vector: &[f64], basis: &FockBasis) -> f64 {
    if basis.n == 0 {
        return 0.0;
    }
    let zero = basis.modes.iter().position(ModeIndex::is_zero);
    let n0: f64 = match zero {
        Some(z) => vector.iter().enumerate().map(|(i, c)| c * c * basis.state(i)[z] as f64).sum(),
        None => 0.0,
    };
    1.0 - n0 / basis.n as f64
}

#[derive(Debug, Clone, Serialize)]
pub struct FockSummary {
    pub n: usize,
    pub ell: f64,
    pub modes: usize,
    pub basis_dim: usize,
    /// e_{n,ℓ}: ground energy on the unit box with the rescaled interaction.
    pub energy: f64,
    /// E(n, ℓ) = e_{n,ℓ}/ℓ² on Λ_ℓ.
    pub energy_box: f64,
    pub depletion: f64,
    pub element_error: f64,
}

/// Builds and diagonalizes the toy model with the `modes` lowest modes in d.
pub fn solve_toy(pot: &Potential, d: usize, ell: f64, n: usize, modes: usize, order: usize) -> Result<FockSummary> {
    let list = lowest_modes(d, modes);
    let basis = FockBasis::new(list.clone(), n)?;
    let table = MatrixElementTable::new(pot, ell, &list, order)?;
    let h = build_hamiltonian(&table, basis)?;
    let (energy, v) = ground_state(&h)?;
    Ok(FockSummary {
        n,
        ell,
        modes,
        basis_dim: h.basis.dim(),
        energy,
        energy_box: energy / (ell * ell),
        depletion: depletion(&v, &h.basis),
        element_error: table.error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_dimension_and_order() {
        let b = FockBasis::new(lowest_modes(3, 4), 3).unwrap();
        assert_eq!(b.dim(), 20);
        assert_eq!(b.state(0), &[3, 0, 0, 0]);
        assert_eq!(b.state(b.dim() - 1), &[0, 0, 0, 3]);
        for i in 0..b.dim() {
            assert_eq!(b.index_of(b.state(i)), Some(i));
            assert_eq!(b.state(i).iter().map(|&k| k as usize).sum::<usize>(), 3);
        }
    }

    #[test]
    fn oversize_is_rejected() {
        assert!(matches!(FockBasis::new(lowest_modes(3, 60), 6), Err(Error::Size(_))));
    }
}
