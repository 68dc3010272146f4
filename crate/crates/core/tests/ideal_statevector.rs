use gkplab::ideal::{ideal_graph_from_edges, project_bell_ideal, BellOutcome, GraphTopology};
use num_complex::Complex64;
use proptest::prelude::*;

type C = Complex64;

/// Graph state amplitudes: `(−1)^{Σ_edges x_a x_b} / 2^{n/2}`, qubit 0 most significant.
fn dense_graph(n: usize, edges: &[(usize, usize)]) -> Vec<C> {
    let amp = (0.5f64).powf(n as f64 / 2.0);
    (0..1usize << n)
        .map(|idx| {
            let bit = |q: usize| (idx >> (n - 1 - q)) & 1;
            let parity = edges.iter().map(|&(a, b)| bit(a) & bit(b)).sum::<usize>() & 1;
            C::new(if parity == 1 { -amp } else { amp }, 0.0)
        })
        .collect()
}

/// Two-qubit Bell vector `|ψ_ij⟩` in the basis |00⟩, |01⟩, |10⟩, |11⟩ (c then t).
///
/// `X_c Z_t` and `Z_c X_t` written out as 4×4 matrices, projector applied to
/// each basis state until a nonzero column appears.
fn bell_vector(i: u8, j: u8) -> [C; 4] {
    let xz = |v: [C; 4]| [v[2], -v[3], v[0], -v[1]];
    let zx = |v: [C; 4]| [v[1], v[0], -v[3], -v[2]];
    let si = if i == 1 { -1.0 } else { 1.0 };
    let sj = if j == 1 { -1.0 } else { 1.0 };
    for k in 0..4 {
        let mut v = [C::new(0.0, 0.0); 4];
        v[k] = C::new(1.0, 0.0);
        let a = zx(v);
        let v1: [C; 4] = std::array::from_fn(|m| (v[m] + a[m] * sj) * 0.5);
        let b = xz(v1);
        let v2: [C; 4] = std::array::from_fn(|m| (v1[m] + b[m] * si) * 0.5);
        let nrm: f64 = v2.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 1e-9 {
            return std::array::from_fn(|m| v2[m] / nrm);
        }
    }
    unreachable!()
}

/// `(⟨ψ_ij|_{c,t} ⊗ I) |v⟩`, remaining qubits kept in their original order.
fn project_dense(n: usize, v: &[C], c: usize, t: usize, bell: [C; 4]) -> Vec<C> {
    let rest: Vec<usize> = (0..n).filter(|&q| q != c && q != t).collect();
    let mut out = vec![C::new(0.0, 0.0); 1 << rest.len()];
    for (idx, amp) in v.iter().enumerate() {
        let bit = |q: usize| (idx >> (n - 1 - q)) & 1;
        let k = 2 * bit(c) + bit(t);
        let r = rest.iter().fold(0usize, |acc, &q| (acc << 1) | bit(q));
        out[r] += bell[k].conj() * amp;
    }
    out
}

fn overlap2(a: &[C], b: &[C]) -> f64 {
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    let s: C = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    s.norm_sqr() / (na * nb)
}

fn random_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>, usize, usize, u8, u8)> {
    (3usize..=6).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let m = pairs.len();
        (Just(n), prop::collection::vec(any::<bool>(), m), 0..n, 0..n, 0u8..2, 0u8..2).prop_map(
            move |(n, keep, c, t, i, j)| {
                let edges = pairs.iter().zip(&keep).filter(|(_, k)| **k).map(|(e, _)| *e).collect();
                (n, edges, c, t, i, j)
            },
        )
    })
}

#[test]
fn graph_tableau_matches_dense_graph_state() {
    let edges = [(0, 1), (1, 2), (2, 3), (0, 3), (1, 4)];
    let tab = ideal_graph_from_edges(&GraphTopology::from_edges(5, &edges).unwrap());
    let f = overlap2(&tab.statevector().unwrap(), &dense_graph(5, &edges));
    assert!((f - 1.0).abs() < 1e-12, "{f}");
}

#[test]
fn bell_vectors_are_orthonormal() {
    let all = BellOutcome::all().map(|o| bell_vector(o.i, o.j));
    for (a, va) in all.iter().enumerate() {
        for (b, vb) in all.iter().enumerate() {
            let s: C = va.iter().zip(vb).map(|(x, y)| x.conj() * y).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((s.norm() - want).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn bell_projection_matches_dense_simulation((n, edges, c, t, i, j) in random_graph()) {
        prop_assume!(c != t);
        let tab = ideal_graph_from_edges(&GraphTopology::from_edges(n, &edges).unwrap());
        let dense = project_dense(n, &dense_graph(n, &edges), c, t, bell_vector(i, j));
        let norm: f64 = dense.iter().map(|z| z.norm_sqr()).sum();
        // every Bell outcome has probability 1/4 on a graph state when c ≠ t
        prop_assume!(norm > 1e-12);
        let proj = project_bell_ideal(&tab, c, t, BellOutcome::new(i, j).unwrap()).unwrap();
        let f = overlap2(&proj.tableau.statevector().unwrap(), &dense);
        prop_assert!((f - 1.0).abs() < 1e-10, "fidelity {}", f);
    }
}
