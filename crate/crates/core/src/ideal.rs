//! Stabilizer tableau for the ideal GKP qubit layer.
//!
//! Rows follow the Aaronson–Gottesman encoding: bits `(x, z)` per qubit with
//! `(1,1)` meaning `Y`, plus a sign bit. Only stabilizer generators are kept;
//! deterministic measurement outcomes are resolved by Gaussian elimination.

use crate::error::{contract, Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Simple undirected graph on `n` vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphTopology {
    pub n: usize,
    pub adjacency: Vec<Vec<bool>>,
}

impl GraphTopology {
    pub fn empty(n: usize) -> Self {
        GraphTopology { n, adjacency: vec![vec![false; n]; n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(n);
        for &(a, b) in edges {
            if a >= n || b >= n || a == b {
                return contract(format!("invalid edge ({a}, {b}) on {n} vertices"));
            }
            g.adjacency[a][b] = true;
            g.adjacency[b][a] = true;
        }
        Ok(g)
    }

    pub fn toggle(&mut self, a: usize, b: usize) {
        self.adjacency[a][b] ^= true;
        self.adjacency[b][a] ^= true;
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a][b]
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&w| self.adjacency[v][w]).collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                if self.adjacency[a][b] {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Breadth-first distances from a set of sources (`usize::MAX` if unreachable).
    pub fn distances_from(&self, sources: &[usize]) -> Vec<usize> {
        let mut d = vec![usize::MAX; self.n];
        let mut queue = std::collections::VecDeque::new();
        for &s in sources {
            d[s] = 0;
            queue.push_back(s);
        }
        while let Some(v) = queue.pop_front() {
            for w in self.neighbors(v) {
                if d[w] == usize::MAX {
                    d[w] = d[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        d
    }

    pub fn remove_vertices(&self, remove: &[usize]) -> GraphTopology {
        let keep: Vec<usize> = (0..self.n).filter(|v| !remove.contains(v)).collect();
        let mut g = GraphTopology::empty(keep.len());
        for (i, &a) in keep.iter().enumerate() {
            for (j, &b) in keep.iter().enumerate() {
                g.adjacency[i][j] = self.adjacency[a][b];
            }
        }
        g
    }

    pub fn is_valid(&self) -> bool {
        (0..self.n).all(|i| !self.adjacency[i][i] && (0..self.n).all(|j| self.adjacency[i][j] == self.adjacency[j][i]))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliRow {
    pub x: Vec<bool>,
    pub z: Vec<bool>,
    /// `true` for an overall −1.
    pub sign: bool,
}

impl PauliRow {
    pub fn identity(n: usize) -> Self {
        PauliRow { x: vec![false; n], z: vec![false; n], sign: false }
    }

    /// Parses strings like `"XZI"` or `"-ZX"`.
    pub fn parse(s: &str) -> Result<Self> {
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let mut row = PauliRow::identity(body.chars().count());
        for (i, c) in body.chars().enumerate() {
            match c {
                'I' => {}
                'X' => row.x[i] = true,
                'Z' => row.z[i] = true,
                'Y' => {
                    row.x[i] = true;
                    row.z[i] = true
                }
                _ => return Err(Error::Parse(format!("bad Pauli letter {c:?}"))),
            }
        }
        row.sign = sign;
        Ok(row)
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn commutes_with(&self, o: &PauliRow) -> bool {
        let mut s = false;
        for i in 0..self.n() {
            s ^= (self.x[i] & o.z[i]) ^ (self.z[i] & o.x[i]);
        }
        !s
    }

    /// `self · o` for commuting rows (result has a real sign).
    pub fn times(&self, o: &PauliRow) -> PauliRow {
        let mut e: i32 = 2 * (self.sign as i32) + 2 * (o.sign as i32);
        for i in 0..self.n() {
            e += g_phase(self.x[i], self.z[i], o.x[i], o.z[i]);
        }
        let e = e.rem_euclid(4);
        debug_assert!(e == 0 || e == 2, "product of anticommuting rows");
        PauliRow {
            x: self.x.iter().zip(&o.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&o.z).map(|(a, b)| a ^ b).collect(),
            sign: e == 2,
        }
    }

    pub fn is_identity_on(&self, q: usize) -> bool {
        !self.x[q] && !self.z[q]
    }

    pub fn label(&self) -> String {
        let mut s = String::from(if self.sign { "-" } else { "+" });
        for i in 0..self.n() {
            s.push(match (self.x[i], self.z[i]) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            });
        }
        s
    }
}

/// Exponent of `i` picked up when multiplying single-qubit Paulis.
fn g_phase(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
    let (x1, z1, x2, z2) = (x1 as i32, z1 as i32, x2 as i32, z2 as i32);
    match (x1, z1) {
        (0, 0) => 0,
        (1, 1) => z2 - x2,
        (1, 0) => z2 * (2 * x2 - 1),
        _ => x2 * (1 - 2 * z2),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Clifford1 {
    H,
    S,
    Sdg,
}

/// Frame relating a stabilizer state to a graph state:
/// `|ψ⟩ = W† Z^corrections |G⟩` with `W` the listed local gates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphForm {
    pub topology: GraphTopology,
    /// Gates applied (in order) to each qubit to reach graph form.
    pub local_gates: Vec<Vec<Clifford1>>,
    /// Z corrections on the graph state.
    pub z_corrections: Vec<bool>,
}

impl GraphForm {
    pub fn is_pure_graph(&self) -> bool {
        self.local_gates.iter().all(|g| g.is_empty())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BellOutcome {
    pub i: u8,
    pub j: u8,
}

impl BellOutcome {
    pub fn new(i: u8, j: u8) -> Result<Self> {
        if i > 1 || j > 1 {
            return contract(format!("Bell outcome ({i}, {j}) must be bits"));
        }
        Ok(BellOutcome { i, j })
    }
    pub fn all() -> [BellOutcome; 4] {
        [BellOutcome { i: 0, j: 0 }, BellOutcome { i: 0, j: 1 }, BellOutcome { i: 1, j: 0 }, BellOutcome { i: 1, j: 1 }]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerTableau {
    pub n: usize,
    pub rows: Vec<PauliRow>,
}

/// Outcome of projecting a tableau onto a Bell pair and discarding it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BellProjection {
    pub tableau: StabilizerTableau,
    pub form: GraphForm,
}

pub fn ideal_graph_from_edges(topology: &GraphTopology) -> StabilizerTableau {
    let n = topology.n;
    let rows = (0..n)
        .map(|v| {
            let mut r = PauliRow::identity(n);
            r.x[v] = true;
            for w in topology.neighbors(v) {
                r.z[w] = true;
            }
            r
        })
        .collect();
    StabilizerTableau { n, rows }
}

impl StabilizerTableau {
    pub fn from_rows(rows: Vec<PauliRow>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.n() != n) {
            return contract("tableau rows must act on as many qubits as there are rows");
        }
        let t = StabilizerTableau { n, rows };
        if !t.is_valid() {
            return contract("generators must commute and be independent");
        }
        Ok(t)
    }

    pub fn empty() -> Self {
        StabilizerTableau { n: 0, rows: vec![] }
    }

    pub fn is_valid(&self) -> bool {
        for a in 0..self.rows.len() {
            for b in a + 1..self.rows.len() {
                if !self.rows[a].commutes_with(&self.rows[b]) {
                    return false;
                }
            }
        }
        self.rank() == self.n && self.rows.len() == self.n
    }

    fn rank(&self) -> usize {
        let mut m: Vec<Vec<bool>> = self.rows.iter().map(|r| r.x.iter().chain(r.z.iter()).cloned().collect()).collect();
        gf2_rank(&mut m)
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &StabilizerTableau) -> StabilizerTableau {
        let n = self.n + other.n;
        let mut rows = Vec::with_capacity(n);
        for r in &self.rows {
            let mut x = r.x.clone();
            x.extend(vec![false; other.n]);
            let mut z = r.z.clone();
            z.extend(vec![false; other.n]);
            rows.push(PauliRow { x, z, sign: r.sign });
        }
        for r in &other.rows {
            let mut x = vec![false; self.n];
            x.extend(r.x.iter().cloned());
            let mut z = vec![false; self.n];
            z.extend(r.z.iter().cloned());
            rows.push(PauliRow { x, z, sign: r.sign });
        }
        StabilizerTableau { n, rows }
    }

    /// Single qubit in `|0⟩` (`+Z`) or `|+⟩` (`+X`) and friends.
    pub fn single(row: &str) -> Result<Self> {
        Self::from_rows(vec![PauliRow::parse(row)?])
    }

    pub fn h(&mut self, a: usize) {
        for r in &mut self.rows {
            r.sign ^= r.x[a] & r.z[a];
            std::mem::swap(&mut r.x[a], &mut r.z[a]);
        }
    }

    pub fn s(&mut self, a: usize) {
        for r in &mut self.rows {
            r.sign ^= r.x[a] & r.z[a];
            r.z[a] ^= r.x[a];
        }
    }

    pub fn sdg(&mut self, a: usize) {
        self.s(a);
        self.s(a);
        self.s(a);
    }

    pub fn cnot(&mut self, c: usize, t: usize) {
        for r in &mut self.rows {
            r.sign ^= r.x[c] & r.z[t] & !(r.x[t] ^ r.z[c]);
            r.x[t] ^= r.x[c];
            r.z[c] ^= r.z[t];
        }
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        self.h(b);
        self.cnot(a, b);
        self.h(b);
    }

    pub fn pauli_x(&mut self, a: usize) {
        for r in &mut self.rows {
            r.sign ^= r.z[a];
        }
    }

    pub fn pauli_z(&mut self, a: usize) {
        for r in &mut self.rows {
            r.sign ^= r.x[a];
        }
    }

    pub fn apply_clifford1(&mut self, a: usize, g: Clifford1) {
        match g {
            Clifford1::H => self.h(a),
            Clifford1::S => self.s(a),
            Clifford1::Sdg => self.sdg(a),
        }
    }

    /// Sign with which `p` belongs to the stabilizer group, if it does.
    pub fn stabilizer_sign(&self, p: &PauliRow) -> Option<bool> {
        // solve Σ c_k row_k = p over GF(2) on the (x|z) bits
        let n2 = 2 * self.n;
        let k = self.rows.len();
        let mut aug: Vec<Vec<bool>> = (0..n2)
            .map(|bit| {
                let mut line: Vec<bool> = self
                    .rows
                    .iter()
                    .map(|r| if bit < self.n { r.x[bit] } else { r.z[bit - self.n] })
                    .collect();
                line.push(if bit < self.n { p.x[bit] } else { p.z[bit - self.n] });
                line
            })
            .collect();
        let coeffs = gf2_solve(&mut aug, k)?;
        let mut acc = PauliRow::identity(self.n);
        for (idx, &c) in coeffs.iter().enumerate() {
            if c {
                acc = acc.times(&self.rows[idx]);
            }
        }
        debug_assert_eq!((acc.x.clone(), acc.z.clone()), (p.x.clone(), p.z.clone()));
        Some(acc.sign)
    }

    /// Projects onto the `(−1)^outcome` eigenspace of `p`; returns the row index holding `±p`.
    pub fn measure(&mut self, p: &PauliRow, outcome: bool) -> Result<usize> {
        self.measure_keeping(p, outcome, &[])
    }

    /// Like [`measure`](Self::measure), but never overwrites the rows in `keep`.
    pub fn measure_keeping(&mut self, p: &PauliRow, outcome: bool, keep: &[usize]) -> Result<usize> {
        if p.n() != self.n {
            return contract("measured Pauli has wrong length");
        }
        let target = PauliRow { sign: outcome ^ p.sign, ..p.clone() };
        let anti: Vec<usize> = (0..self.rows.len()).filter(|&k| !self.rows[k].commutes_with(p)).collect();
        if anti.is_empty() {
            return match self.stabilizer_sign(&PauliRow { sign: false, ..p.clone() }) {
                Some(s) if s == target.sign => {
                    // replace a generator that participates so the row is explicit
                    self.make_explicit(&target, keep)
                }
                Some(_) => Err(Error::ImpossibleOutcome(format!("{} has the opposite definite value", target.label()))),
                None => Err(Error::InternalConsistency("commuting Pauli outside a full stabilizer group".into())),
            };
        }
        let pivot = anti[0];
        if keep.contains(&pivot) {
            return Err(Error::InternalConsistency("measurement anticommutes with a kept row".into()));
        }
        for &k in &anti[1..] {
            self.rows[k] = self.rows[k].times(&self.rows[pivot]);
        }
        self.rows[pivot] = target;
        Ok(pivot)
    }

    /// Rewrites the generating set so that `p` (already a stabilizer) is a row.
    fn make_explicit(&mut self, p: &PauliRow, keep: &[usize]) -> Result<usize> {
        if let Some(k) = self.rows.iter().position(|r| r == p) {
            return Ok(k);
        }
        let n2 = 2 * self.n;
        let k = self.rows.len();
        let mut aug: Vec<Vec<bool>> = (0..n2)
            .map(|bit| {
                let mut line: Vec<bool> = self
                    .rows
                    .iter()
                    .map(|r| if bit < self.n { r.x[bit] } else { r.z[bit - self.n] })
                    .collect();
                line.push(if bit < self.n { p.x[bit] } else { p.z[bit - self.n] });
                line
            })
            .collect();
        let coeffs = gf2_solve(&mut aug, k).ok_or_else(|| Error::InternalConsistency("not a stabilizer".into()))?;
        let idx = (0..k)
            .find(|&i| coeffs[i] && !keep.contains(&i))
            .ok_or_else(|| Error::InternalConsistency("Pauli lies in the span of the kept rows".into()))?;
        self.rows[idx] = p.clone();
        Ok(idx)
    }

    /// Removes `qubits`, which must be stabilized by the rows `measured` alone.
    pub fn discard(&mut self, measured: &[usize], qubits: &[usize]) -> Result<()> {
        let restrict = |r: &PauliRow| -> Vec<bool> {
            qubits.iter().flat_map(|&q| [r.x[q], r.z[q]]).collect()
        };
        let basis: Vec<Vec<bool>> = measured.iter().map(|&m| restrict(&self.rows[m])).collect();
        for k in 0..self.rows.len() {
            if measured.contains(&k) {
                continue;
            }
            let target = restrict(&self.rows[k]);
            if target.iter().all(|b| !b) {
                continue;
            }
            let mut aug: Vec<Vec<bool>> = (0..target.len())
                .map(|bit| {
                    let mut line: Vec<bool> = basis.iter().map(|b| b[bit]).collect();
                    line.push(target[bit]);
                    line
                })
                .collect();
            let coeffs = gf2_solve(&mut aug, basis.len()).ok_or_else(|| {
                Error::InternalConsistency("discarded qubits remain entangled with the rest".into())
            })?;
            for (i, &c) in coeffs.iter().enumerate() {
                if c {
                    self.rows[k] = self.rows[k].times(&self.rows[measured[i]]);
                }
            }
        }
        let keep_q: Vec<usize> = (0..self.n).filter(|q| !qubits.contains(q)).collect();
        let rows: Vec<PauliRow> = self
            .rows
            .iter()
            .enumerate()
            .filter(|(k, _)| !measured.contains(k))
            .map(|(_, r)| PauliRow {
                x: keep_q.iter().map(|&q| r.x[q]).collect(),
                z: keep_q.iter().map(|&q| r.z[q]).collect(),
                sign: r.sign,
            })
            .collect();
        self.n = keep_q.len();
        self.rows = rows;
        Ok(())
    }

    /// Single-qubit Pauli measurement followed by removal of the qubit.
    pub fn measure_and_discard(&mut self, q: usize, basis: Pauli1, outcome: bool) -> Result<()> {
        let mut p = PauliRow::identity(self.n);
        match basis {
            Pauli1::X => p.x[q] = true,
            Pauli1::Z => p.z[q] = true,
        }
        let row = self.measure(&p, outcome)?;
        self.discard(&[row], &[q])
    }

    /// Dense amplitudes in the computational basis, qubit 0 most significant.
    /// Fixed up to a global phase: the first nonzero amplitude is real positive.
    pub fn statevector(&self) -> Result<Vec<Complex64>> {
        if self.n > 16 {
            return Err(Error::Capacity(format!("dense statevector of {} qubits", self.n)));
        }
        let dim = 1usize << self.n;
        for start in 0..dim {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[start] = Complex64::new(1.0, 0.0);
            for r in &self.rows {
                let pv = apply_pauli_dense(r, &v);
                for (a, b) in v.iter_mut().zip(&pv) {
                    *a = (*a + b) * 0.5;
                }
            }
            let norm: f64 = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-6 {
                let lead = v.iter().find(|a| a.norm() > 1e-9).copied().unwrap_or(Complex64::new(1.0, 0.0));
                let fix = lead.conj() / lead.norm() / norm;
                return Ok(v.into_iter().map(|a| a * fix).collect());
            }
        }
        Err(Error::InternalConsistency("stabilizer group has no joint +1 eigenvector".into()))
    }

    /// Reduces to a graph state up to local Cliffords and Z corrections.
    pub fn graph_form(&self) -> Result<GraphForm> {
        let n = self.n;
        let mut t = self.clone();
        let mut local_gates = vec![Vec::new(); n];
        // make the X block invertible with Hadamards
        let (_, x_pivots) = t.eliminate_x();
        let z_rows: Vec<usize> = (x_pivots.len()..n).collect();
        if !z_rows.is_empty() {
            let free: Vec<usize> = (0..n).filter(|c| !x_pivots.contains(c)).collect();
            let mut m: Vec<Vec<bool>> = z_rows.iter().map(|&r| free.iter().map(|&c| t.rows[r].z[c]).collect()).collect();
            let piv = gf2_pivots(&mut m);
            for p in piv {
                let q = free[p];
                t.h(q);
                local_gates[q].push(Clifford1::H);
            }
        }
        let (rank, _) = t.eliminate_x();
        if rank != n {
            return Err(Error::InternalConsistency("X block still singular after Hadamards".into()));
        }
        // rows now have X = I (reduced echelon, pivots on the diagonal after sort)
        t.rows.sort_by_key(|r| r.x.iter().position(|&b| b).unwrap_or(n));
        for v in 0..n {
            if t.rows[v].z[v] {
                t.sdg(v);
                local_gates[v].push(Clifford1::Sdg);
            }
        }
        let mut topology = GraphTopology::empty(n);
        for v in 0..n {
            for w in 0..n {
                if v != w && t.rows[v].z[w] {
                    topology.adjacency[v][w] = true;
                }
            }
        }
        if !topology.is_valid() {
            return Err(Error::InternalConsistency("reduced Z block is not a simple graph".into()));
        }
        let z_corrections = t.rows.iter().map(|r| r.sign).collect();
        Ok(GraphForm { topology, local_gates, z_corrections })
    }

    /// Gaussian elimination on the X block; returns rank and pivot columns.
    fn eliminate_x(&mut self) -> (usize, Vec<usize>) {
        let n = self.n;
        let mut rank = 0;
        let mut pivots = Vec::new();
        for col in 0..n {
            let Some(p) = (rank..self.rows.len()).find(|&r| self.rows[r].x[col]) else { continue };
            self.rows.swap(rank, p);
            for r in 0..self.rows.len() {
                if r != rank && self.rows[r].x[col] {
                    self.rows[r] = self.rows[r].times(&self.rows[rank]);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        (rank, pivots)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli1 {
    X,
    Z,
}

/// Projects qubits `(c, t)` onto `|ψ_ij⟩` and removes them.
///
/// `|ψ_ij⟩` is the joint eigenstate of `X_c Z_t` (eigenvalue `(−1)^i`) and
/// `Z_c X_t` (eigenvalue `(−1)^j`).
pub fn project_bell_ideal(tableau: &StabilizerTableau, c: usize, t: usize, outcome: BellOutcome) -> Result<BellProjection> {
    if c == t || c >= tableau.n || t >= tableau.n {
        return contract(format!("invalid fusion pair ({c}, {t}) on {} qubits", tableau.n));
    }
    let mut tab = tableau.clone();
    let mut xz = PauliRow::identity(tab.n);
    xz.x[c] = true;
    xz.z[t] = true;
    let mut zx = PauliRow::identity(tab.n);
    zx.z[c] = true;
    zx.x[t] = true;
    let r1 = tab.measure(&xz, outcome.i == 1)?;
    let r2 = tab.measure_keeping(&zx, outcome.j == 1, &[r1])?;
    tab.discard(&[r1, r2], &[c, t])?;
    let form = tab.graph_form()?;
    Ok(BellProjection { tableau: tab, form })
}

fn gf2_rank(m: &mut [Vec<bool>]) -> usize {
    gf2_pivots(m).len()
}

/// Row-reduces `m` in place and returns pivot columns.
fn gf2_pivots(m: &mut [Vec<bool>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let mut r = 0;
    let mut piv = Vec::new();
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| m[i][c]) else { continue };
        m.swap(r, p);
        for i in 0..rows {
            if i != r && m[i][c] {
                let src = m[r].clone();
                for (a, b) in m[i].iter_mut().zip(src) {
                    *a ^= b;
                }
            }
        }
        piv.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    piv
}

/// Solves an augmented GF(2) system with `k` unknowns; `None` if inconsistent.
fn gf2_solve(aug: &mut [Vec<bool>], k: usize) -> Option<Vec<bool>> {
    let rows = aug.len();
    let mut r = 0;
    let mut where_ = vec![usize::MAX; k];
    for c in 0..k {
        let Some(p) = (r..rows).find(|&i| aug[i][c]) else { continue };
        aug.swap(r, p);
        for i in 0..rows {
            if i != r && aug[i][c] {
                let src = aug[r].clone();
                for (a, b) in aug[i].iter_mut().zip(src) {
                    *a ^= b;
                }
            }
        }
        where_[c] = r;
        r += 1;
    }
    if (r..rows).any(|i| aug[i][k]) {
        return None;
    }
    Some((0..k).map(|c| where_[c] != usize::MAX && aug[where_[c]][k]).collect())
}

/// `P|v⟩` for a signed Pauli row on a dense vector (qubit 0 most significant).
pub fn apply_pauli_dense(p: &PauliRow, v: &[Complex64]) -> Vec<Complex64> {
    let n = p.x.len();
    let mut flip = 0usize;
    for q in 0..n {
        if p.x[q] {
            flip |= 1 << (n - 1 - q);
        }
    }
    let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
    for (b, a) in v.iter().enumerate() {
        let mut ph = Complex64::new(if p.sign { -1.0 } else { 1.0 }, 0.0);
        for q in 0..n {
            let bit = (b >> (n - 1 - q)) & 1 == 1;
            match (p.x[q], p.z[q]) {
                (false, true) | (true, true) if bit => ph = -ph,
                _ => {}
            }
            if p.x[q] && p.z[q] {
                // Y = iXZ
                ph *= Complex64::new(0.0, 1.0);
            }
        }
        out[b ^ flip] += ph * a;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(t: &StabilizerTableau) -> Vec<String> {
        t.rows.iter().map(|r| r.label()).collect()
    }

    #[test]
    fn generators_of_small_graphs() {
        assert_eq!(labels(&ideal_graph_from_edges(&GraphTopology::empty(1))), vec!["+X"]);
        let e = GraphTopology::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(labels(&ideal_graph_from_edges(&e)), vec!["+XZ", "+ZX"]);
        let star = GraphTopology::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(labels(&ideal_graph_from_edges(&star)), vec!["+XZZZ", "+ZXII", "+ZIXI", "+ZIIX"]);
    }

    #[test]
    fn two_chains_fuse_to_an_edge() {
        let g = GraphTopology::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        let t = ideal_graph_from_edges(&g);
        let out = project_bell_ideal(&t, 1, 2, BellOutcome { i: 0, j: 0 }).unwrap();
        assert_eq!(out.form.topology.edges(), vec![(0, 1)]);
        assert!(out.form.is_pure_graph());
        assert_eq!(out.form.z_corrections, vec![false, false]);
    }

    #[test]
    fn fusing_two_vertices_of_a_triangle() {
        // the second Bell stabilizer is already in the group here
        let t = ideal_graph_from_edges(&GraphTopology::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap());
        let ok = BellOutcome::all().iter().filter(|o| project_bell_ideal(&t, 1, 2, **o).is_ok()).count();
        assert_eq!(ok, 2);
        let out = project_bell_ideal(&t, 1, 2, BellOutcome { i: 0, j: 0 }).unwrap();
        assert_eq!(out.tableau.n, 1);
    }

    #[test]
    fn topology_is_outcome_independent() {
        let g = GraphTopology::from_edges(6, &[(0, 1), (0, 2), (3, 4), (3, 5)]).unwrap();
        let t = ideal_graph_from_edges(&g);
        let base = project_bell_ideal(&t, 0, 4, BellOutcome { i: 0, j: 0 }).unwrap();
        for o in BellOutcome::all() {
            let out = project_bell_ideal(&t, 0, 4, o).unwrap();
            assert_eq!(out.form.topology, base.form.topology);
        }
    }

    #[test]
    fn cnot_fixed_point_on_zero_plus() {
        let mut t = StabilizerTableau::single("+Z").unwrap().tensor(&StabilizerTableau::single("+X").unwrap());
        t.cnot(0, 1);
        assert_eq!(labels(&t), vec!["+ZI", "+IX"]);
    }

    #[test]
    fn deterministic_outcome_contradiction() {
        let mut t = StabilizerTableau::single("+Z").unwrap();
        assert!(matches!(t.measure(&PauliRow::parse("Z").unwrap(), true), Err(Error::ImpossibleOutcome(_))));
    }

    #[test]
    fn z_measurement_deletes_vertex() {
        let g = GraphTopology::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let mut t = ideal_graph_from_edges(&g);
        t.measure_and_discard(1, Pauli1::Z, true).unwrap();
        let f = t.graph_form().unwrap();
        assert!(f.topology.edges().is_empty());
        assert_eq!(f.z_corrections, vec![true, true]);
    }
}
