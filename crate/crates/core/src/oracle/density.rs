//! Dense density-matrix simulation of one pumping step.
//!
//! Four qubits: the kept pair (`k1`, `k2`) and the fresh pair (`f1`, `f2`),
//! where index 1 lives in the first register and index 2 in the second.
//! Basis index bits, most significant first: `k1 k2 f1 f2`.

use num_complex::Complex64;

use crate::error::{check_probability, Error, Result};
use crate::model::{Bell, BellDiagonalState};
use crate::pumping::{PumpKind, StepRecord};

const K1: usize = 0;
const K2: usize = 1;
const F1: usize = 2;
const F2: usize = 3;
const QUBITS: usize = 4;

/// Tolerances on the invariants of every simulated state.
pub const TRACE_TOLERANCE: f64 = 1e-12;
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Largest Bell-basis coherence tolerated in the post-selected pair.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    /// Row-major.
    entries: Vec<Complex64>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl DensityMatrix {
    pub fn zeros(dim: usize) -> Self {
        DensityMatrix {
            dim,
            entries: vec![c(0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = c(1.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self[(row, col)]
    }

    /// Two-qubit state in the computational basis `|q1 q2>`.
    pub fn from_bell_diagonal(state: &BellDiagonalState) -> Self {
        let mut m = Self::zeros(4);
        for bell in Bell::ALL {
            let v = bell_vector(bell);
            let p = state.get(bell);
            for i in 0..4 {
                for j in 0..4 {
                    m[(i, j)] += v[i] * v[j].conj() * p;
                }
            }
        }
        m
    }

    pub fn kron(&self, other: &Self) -> Self {
        let n = self.dim * other.dim;
        let mut m = Self::zeros(n);
        for a in 0..self.dim {
            for b in 0..self.dim {
                let x = self[(a, b)];
                if x == c(0.0) {
                    continue;
                }
                for i in 0..other.dim {
                    for j in 0..other.dim {
                        m[(a * other.dim + i, b * other.dim + j)] = x * other[(i, j)];
                    }
                }
            }
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let x = self[(i, k)];
                if x == c(0.0) {
                    continue;
                }
                for j in 0..n {
                    m[(i, j)] += x * other[(k, j)];
                }
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    /// `U rho U^dagger`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }

    fn scale(&mut self, s: f64) {
        self.entries.iter_mut().for_each(|x| *x *= s);
    }

    fn add_assign(&mut self, other: &Self) {
        for (x, y) in self.entries.iter_mut().zip(&other.entries) {
            *x += *y;
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn max_hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in 0..=i {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// True when `rho + tol * I` admits a Cholesky factorization, i.e. the
    /// smallest eigenvalue is above `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        let n = self.dim;
        let mut l = vec![c(0.0); n * n];
        for j in 0..n {
            let mut d = self[(j, j)].re + tol;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if d <= 0.0 {
                return false;
            }
            let djj = d.sqrt();
            l[j * n + j] = c(djj);
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = s / djj;
            }
        }
        true
    }

    /// Checks trace, Hermiticity and positivity.
    pub fn check_invariants(&self) -> Result<()> {
        let tr = self.trace();
        if (tr.re - 1.0).abs() > TRACE_TOLERANCE || tr.im.abs() > TRACE_TOLERANCE {
            return Err(Error::Inconsistent(format!("trace {tr}")));
        }
        let herm = self.max_hermitian_defect();
        if herm > HERMITIAN_TOLERANCE {
            return Err(Error::Inconsistent(format!("hermiticity defect {herm:e}")));
        }
        if !self.is_psd(PSD_TOLERANCE) {
            return Err(Error::Inconsistent(
                "negative eigenvalue below tolerance".into(),
            ));
        }
        Ok(())
    }

    /// Traces out the fresh pair of a four-qubit state, leaving `k1 k2`.
    fn trace_out_fresh(&self) -> Self {
        let mut m = Self::zeros(4);
        for a in 0..4 {
            for b in 0..4 {
                let mut s = c(0.0);
                for f in 0..4 {
                    s += self[(a * 4 + f, b * 4 + f)];
                }
                m[(a, b)] = s;
            }
        }
        m
    }
}

impl std::ops::Index<(usize, usize)> for DensityMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DensityMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.dim + j]
    }
}

fn bell_vector(bell: Bell) -> [Complex64; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    match bell {
        Bell::PhiPlus => [c(h), c(0.0), c(0.0), c(h)],
        Bell::PhiMinus => [c(h), c(0.0), c(0.0), c(-h)],
        Bell::PsiPlus => [c(0.0), c(h), c(h), c(0.0)],
        Bell::PsiMinus => [c(0.0), c(h), c(-h), c(0.0)],
    }
}

fn single(m: [[Complex64; 2]; 2]) -> DensityMatrix {
    let mut d = DensityMatrix::zeros(2);
    for i in 0..2 {
        for j in 0..2 {
            d[(i, j)] = m[i][j];
        }
    }
    d
}

fn pauli(index: usize) -> DensityMatrix {
    let (o, l, i) = (c(0.0), c(1.0), Complex64::new(0.0, 1.0));
    match index {
        0 => single([[l, o], [o, l]]),
        1 => single([[o, l], [l, o]]),
        2 => single([[o, -i], [i, o]]),
        _ => single([[l, o], [o, -l]]),
    }
}

/// Embeds single-qubit operators on the four-qubit register; `ops[q]` acts
/// on qubit `q`.
fn embed(ops: [DensityMatrix; QUBITS]) -> DensityMatrix {
    let mut it = ops.into_iter();
    let first = it.next().expect("four operators");
    it.fold(first, |acc, op| acc.kron(&op))
}

fn on_qubits(pairs: &[(usize, DensityMatrix)]) -> DensityMatrix {
    let mut ops = [pauli(0), pauli(0), pauli(0), pauli(0)];
    for (q, op) in pairs {
        ops[*q] = op.clone();
    }
    embed(ops)
}

fn bit_of(index: usize, qubit: usize) -> usize {
    (index >> (QUBITS - 1 - qubit)) & 1
}

/// C-NOT as a 16x16 permutation matrix.
fn cnot(control: usize, target: usize) -> DensityMatrix {
    let n = 1 << QUBITS;
    let mut u = DensityMatrix::zeros(n);
    for x in 0..n {
        let y = if bit_of(x, control) == 1 {
            x ^ (1 << (QUBITS - 1 - target))
        } else {
            x
        };
        u[(y, x)] = c(1.0);
    }
    u
}

/// Two-qubit depolarization of total weight `p`: with probability `p` the
/// two qubits are replaced by the maximally mixed state, written as the
/// uniform Pauli twirl.
fn depolarize(rho: &DensityMatrix, a: usize, b: usize, p: f64) -> DensityMatrix {
    if p == 0.0 {
        return rho.clone();
    }
    let mut out = rho.clone();
    out.scale(1.0 - p);
    for pa in 0..4 {
        for pb in 0..4 {
            let op = on_qubits(&[(a, pauli(pa)), (b, pauli(pb))]);
            let mut term = rho.conjugate_by(&op);
            term.scale(p / 16.0);
            out.add_assign(&term);
        }
    }
    out
}

/// Projector onto outcome `m` of qubit `q` in the Z (`x_basis == false`)
/// or X basis.
fn projector(q: usize, m: usize, x_basis: bool) -> DensityMatrix {
    let h = if m == 0 { 0.5 } else { -0.5 };
    let p = if x_basis {
        single([[c(0.5), c(h)], [c(h), c(0.5)]])
    } else if m == 0 {
        single([[c(1.0), c(0.0)], [c(0.0), c(0.0)]])
    } else {
        single([[c(0.0), c(0.0)], [c(0.0), c(1.0)]])
    };
    on_qubits(&[(q, p)])
}

/// Four-qubit state of a pumping step right before the comparison.
pub fn pre_measurement_state(
    target: &BellDiagonalState,
    fresh: &BellDiagonalState,
    kind: PumpKind,
    p_l: f64,
) -> Result<DensityMatrix> {
    let mut rho =
        DensityMatrix::from_bell_diagonal(target).kron(&DensityMatrix::from_bell_diagonal(fresh));
    rho.check_invariants()?;
    let gates = match kind {
        PumpKind::Bit => [(K1, F1), (K2, F2)],
        PumpKind::Phase => [(F1, K1), (F2, K2)],
    };
    for (control, target) in gates {
        rho = rho.conjugate_by(&cnot(control, target));
        let (a, b) = if control < target {
            (control, target)
        } else {
            (target, control)
        };
        rho = depolarize(&rho, a, b, p_l);
        rho.check_invariants()?;
    }
    Ok(rho)
}

/// Simulates one pumping step on the full four-qubit density matrix and
/// returns the acceptance probability and the kept pair.
pub fn simulate_pump_step(
    target: &BellDiagonalState,
    fresh: &BellDiagonalState,
    kind: PumpKind,
    p_l: f64,
    eps_m: f64,
) -> Result<(f64, BellDiagonalState)> {
    let p_l = check_probability("p_L", p_l)?;
    let eps_m = check_probability("eps_M", eps_m)?;
    let rho = pre_measurement_state(target, fresh, kind, p_l)?;

    let x_basis = kind == PumpKind::Phase;
    let agree = (1.0 - eps_m) * (1.0 - eps_m) + eps_m * eps_m;
    let disagree = 2.0 * eps_m * (1.0 - eps_m);
    let mut kept = DensityMatrix::zeros(4);
    for m1 in 0..2 {
        for m2 in 0..2 {
            let proj = projector(F1, m1, x_basis).matmul(&projector(F2, m2, x_basis));
            let branch = proj.matmul(&rho).matmul(&proj);
            let mut reduced = branch.trace_out_fresh();
            reduced.scale(if m1 == m2 { agree } else { disagree });
            kept.add_assign(&reduced);
        }
    }

    let success = kept.trace().re;
    if success <= 0.0 {
        return Err(Error::NeverAccepted(kind.to_string()));
    }
    kept.scale(1.0 / success);
    kept.check_invariants()?;

    // Change to the Bell basis and insist the result is diagonal there.
    let mut probs = [0.0; 4];
    for (i, bi) in Bell::ALL.iter().enumerate() {
        let vi = bell_vector(*bi);
        for (j, bj) in Bell::ALL.iter().enumerate() {
            let vj = bell_vector(*bj);
            let mut z = c(0.0);
            for a in 0..4 {
                for b in 0..4 {
                    z += vi[a].conj() * kept[(a, b)] * vj[b];
                }
            }
            if i == j {
                probs[i] = z.re;
            } else if z.norm() > OFF_DIAGONAL_TOLERANCE {
                return Err(Error::Inconsistent(format!(
                    "post-selected pair has Bell coherence {:e} between {bi:?} and {bj:?}",
                    z.norm()
                )));
            }
        }
    }
    Ok((success, BellDiagonalState::from_array(probs)?))
}

/// [`simulate_pump_step`] with the same signature as the recurrence.
pub fn oracle_step(
    target: &BellDiagonalState,
    fresh: &BellDiagonalState,
    kind: PumpKind,
    p_l: f64,
    eps_m: f64,
) -> Result<StepRecord> {
    let (success_prob, state) = simulate_pump_step(target, fresh, kind, p_l, eps_m)?;
    Ok(StepRecord {
        kind,
        state_before: *target,
        success_prob,
        state_after_success: state,
    })
}
