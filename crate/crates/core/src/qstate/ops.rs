use num_complex::Complex64;

use super::PureState;

/// Index of `T^k |q>`: the digit string rotated right by `k`.
fn rotate_index(idx: usize, k: usize, n: usize, d: usize) -> usize {
    let k = k % n.max(1);
    if k == 0 {
        return idx;
    }
    let low = d.pow(k as u32);
    let high = d.pow((n - k) as u32);
    (idx % low) * high + idx / low
}

pub(super) fn apply_translation(psi: &PureState, k: usize) -> PureState {
    let (n, d) = (psi.n(), psi.d() as usize);
    let mut out = vec![Complex64::new(0.0, 0.0); psi.dim()];
    for (idx, &a) in psi.amps().iter().enumerate() {
        out[rotate_index(idx, k, n, d)] = a;
    }
    PureState::from_parts_unchecked(psi.n(), psi.d(), out)
}

/// `<psi| T^k |psi>` without materializing `T^k |psi>`.
pub fn translation_expectation(psi: &PureState, k: usize) -> Complex64 {
    let (n, d) = (psi.n(), psi.d() as usize);
    let amps = psi.amps();
    amps.iter()
        .enumerate()
        .map(|(idx, &a)| amps[rotate_index(idx, k, n, d)].conj() * a)
        .sum()
}

/// Purity `tr(psi_S^2)` of the reduced state on the qudits in `subset`
/// (bit `i` set means qudit `i` belongs to `S`), via the partial trace.
pub fn partial_trace_purity(psi: &PureState, subset: u64) -> f64 {
    let (n, d) = (psi.n(), psi.d() as usize);
    let inside: Vec<usize> = (0..n).filter(|&i| subset >> i & 1 == 1).collect();
    let outside: Vec<usize> = (0..n).filter(|&i| subset >> i & 1 == 0).collect();
    if inside.is_empty() || outside.is_empty() {
        return 1.0;
    }
    let rows = d.pow(inside.len() as u32);
    let cols = d.pow(outside.len() as u32);
    // M[s][c] = psi amplitude with S-digits s and complement digits c
    let mut m = vec![Complex64::new(0.0, 0.0); rows * cols];
    let mut digits = vec![0usize; n];
    for (idx, &a) in psi.amps().iter().enumerate() {
        let mut r = idx;
        for q in (0..n).rev() {
            digits[q] = r % d;
            r /= d;
        }
        let s = inside.iter().fold(0, |acc, &q| acc * d + digits[q]);
        let c = outside.iter().fold(0, |acc, &q| acc * d + digits[q]);
        m[s * cols + c] = a;
    }
    // tr((M M^dag)^2) = ||M M^dag||_F^2 = ||M^dag M||_F^2; use the smaller Gram matrix
    let (small, big, by_rows) = if rows <= cols {
        (rows, cols, true)
    } else {
        (cols, rows, false)
    };
    let at = |i: usize, k: usize| {
        if by_rows {
            m[i * cols + k]
        } else {
            m[k * cols + i]
        }
    };
    let mut total = 0.0;
    for i in 0..small {
        for j in i..small {
            let g: Complex64 = (0..big).map(|k| at(i, k) * at(j, k).conj()).sum();
            total += if i == j {
                g.norm_sqr()
            } else {
                2.0 * g.norm_sqr()
            };
        }
    }
    total
}

/// Two-copy expectation `<psi1 psi2| SWAP_S |psi1 psi2> = tr(rho1_S rho2_S)`.
pub fn swap_overlap(psi1: &PureState, psi2: &PureState, subset: u64) -> Complex64 {
    let (n, d) = (psi1.n(), psi1.d() as usize);
    let (a1, a2) = (psi1.amps(), psi2.amps());
    let dim = psi1.dim();
    let weights: Vec<usize> = (0..n).map(|q| d.pow((n - 1 - q) as u32)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for q in 0..dim {
        for r in 0..dim {
            // swap the S-digits of q and r
            let (mut q2, mut r2) = (q, r);
            for (i, &w) in weights.iter().enumerate() {
                if subset >> i & 1 == 1 {
                    let dq = q / w % d;
                    let dr = r / w % d;
                    q2 = q2 - dq * w + dr * w;
                    r2 = r2 - dr * w + dq * w;
                }
            }
            acc += (a1[q] * a2[r]).conj() * a1[q2] * a2[r2];
        }
    }
    acc
}

/// Same purity as the two-copy expectation `<psi psi| SWAP_S |psi psi>`.
pub fn swap_purity(psi: &PureState, subset: u64) -> f64 {
    swap_overlap(psi, psi, subset).re
}

/// `tr(psi_S^2)`.
pub fn reduced_purity(psi: &PureState, subset: u64) -> f64 {
    partial_trace_purity(psi, subset)
}
