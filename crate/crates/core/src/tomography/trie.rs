//! Prefix tree over product-projector labels.
//!
//! `Tr[(u_1 ⊗ ... ⊗ u_m)(...)^dagger M]` is contracted one qubit at a time so
//! that rows sharing a label prefix share work. Both contractions cost
//! `O(rows + 4^m)` rather than `O(rows * 4^m)`.

use crate::error::{Error, Result};
use crate::qmath::linalg::{self, CMatrix, C64, ZERO};
use crate::qmath::MubState;

const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
struct Node {
    children: [usize; 6],
    rows: Vec<usize>,
}

impl Node {
    fn new() -> Self {
        Self {
            children: [NONE; 6],
            rows: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct ProductTrie {
    depth: usize,
    rows: usize,
    nodes: Vec<Node>,
    /// `conj(u_a) u_b` for each label, indexed `[label][2a + b]`.
    bra_ket: [[C64; 4]; 6],
}

impl ProductTrie {
    pub fn new(rows: &[Vec<MubState>]) -> Result<Self> {
        let depth = rows.first().map(Vec::len).unwrap_or(0);
        if depth == 0 {
            return Err(Error::IncompleteMeasurements("no measurement records".into()));
        }
        let mut nodes = vec![Node::new()];
        for (r, labels) in rows.iter().enumerate() {
            if labels.len() != depth {
                return Err(Error::DimensionMismatch {
                    expected: depth,
                    found: labels.len(),
                });
            }
            let mut at = 0;
            for l in labels {
                let i = l.index();
                if nodes[at].children[i] == NONE {
                    nodes.push(Node::new());
                    let id = nodes.len() - 1;
                    nodes[at].children[i] = id;
                }
                at = nodes[at].children[i];
            }
            nodes[at].rows.push(r);
        }
        let mut bra_ket = [[ZERO; 4]; 6];
        for l in MubState::ALL {
            let u = l.vector();
            for a in 0..2 {
                for b in 0..2 {
                    bra_ket[l.index()][2 * a + b] = u[a].conj() * u[b];
                }
            }
        }
        Ok(Self {
            depth,
            rows: rows.len(),
            nodes,
            bra_ket,
        })
    }

    /// Number of qubits each row acts on.
    pub fn depth(&self) -> usize {
        self.depth
    }

    fn buffers(&self) -> Vec<Vec<C64>> {
        (0..=self.depth).map(|k| vec![ZERO; 1 << (2 * (self.depth - k))]).collect()
    }

    /// `Re <u|M|u>` for every row.
    pub fn probabilities(&self, m: &CMatrix) -> Vec<f64> {
        let dim = 1usize << self.depth;
        assert_eq!(m.nrows(), dim, "operator dimension");
        let mut bufs = self.buffers();
        for i in 0..dim {
            for j in 0..dim {
                bufs[0][i * dim + j] = m[(i, j)];
            }
        }
        let mut out = vec![0.0; self.rows];
        self.down(0, &mut bufs, &mut out);
        out
    }

    fn down(&self, node: usize, bufs: &mut [Vec<C64>], out: &mut [f64]) {
        let (cur, rest) = bufs.split_first_mut().expect("buffer per level");
        let n = &self.nodes[node];
        if rest.is_empty() {
            for &r in &n.rows {
                out[r] = cur[0].re;
            }
            return;
        }
        let h = (cur.len() as f64).sqrt() as usize;
        let h2 = h / 2;
        for (l, &child) in n.children.iter().enumerate() {
            if child == NONE {
                continue;
            }
            let c = self.bra_ket[l];
            let next = &mut rest[0];
            for i in 0..h2 {
                for j in 0..h2 {
                    next[i * h2 + j] = c[0] * cur[i * h + j]
                        + c[1] * cur[i * h + h2 + j]
                        + c[2] * cur[(h2 + i) * h + j]
                        + c[3] * cur[(h2 + i) * h + h2 + j];
                }
            }
            self.down(child, rest, out);
        }
    }

    /// `sum_r w_r |u_r><u_r|`.
    pub fn accumulate(&self, weights: &[f64]) -> CMatrix {
        assert_eq!(weights.len(), self.rows, "one weight per row");
        let mut bufs = self.buffers();
        self.up(0, &mut bufs, weights);
        let dim = 1usize << self.depth;
        CMatrix::from_fn(dim, dim, |i, j| bufs[0][i * dim + j])
    }

    fn up(&self, node: usize, bufs: &mut [Vec<C64>], w: &[f64]) {
        let (cur, rest) = bufs.split_first_mut().expect("buffer per level");
        let n = &self.nodes[node];
        if rest.is_empty() {
            cur[0] = C64::new(n.rows.iter().map(|&r| w[r]).sum(), 0.0);
            return;
        }
        cur.fill(ZERO);
        let h = (cur.len() as f64).sqrt() as usize;
        let h2 = h / 2;
        for (l, &child) in n.children.iter().enumerate() {
            if child == NONE {
                continue;
            }
            self.up(child, rest, w);
            let sub = &rest[0];
            // |u><u| has entries u_a conj(u_b) = conj(bra_ket[2a + b])
            let c = self.bra_ket[l];
            for (a, b) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let k = c[2 * a + b].conj();
                for i in 0..h2 {
                    for j in 0..h2 {
                        cur[(a * h2 + i) * h + b * h2 + j] += k * sub[i * h2 + j];
                    }
                }
            }
        }
    }

    /// Checks that the row projectors span the operator space.
    ///
    /// Up to four qubits the frame operator rank is computed directly. Larger
    /// sets must form a complete product grid whose per-qubit label sets are
    /// each complete.
    pub fn check_complete(&self, rows: &[Vec<MubState>]) -> Result<()> {
        if self.depth <= 4 {
            let mut distinct: Vec<&Vec<MubState>> = rows.iter().collect();
            distinct.sort();
            distinct.dedup();
            let d = 1usize << self.depth;
            let mut frame = CMatrix::zeros(d * d, d * d);
            for r in distinct {
                let v = r
                    .iter()
                    .map(|l| l.vector())
                    .reduce(|a, b| linalg::kron_vec(&a, &b))
                    .expect("non-empty row");
                let p = linalg::outer(&v);
                let vec = nalgebra::DVector::from_iterator(d * d, p.iter().copied());
                frame.ger(ONE_C, &vec, &vec.map(|z| z.conj()), ONE_C);
            }
            let ev = linalg::hermitian_eigenvalues(&frame);
            let tol = 1e-9 * ev[0].max(1e-300);
            let rank = ev.iter().filter(|&&e| e > tol).count();
            if rank < d * d {
                return Err(Error::IncompleteMeasurements(format!(
                    "projectors span {rank} of {} operator dimensions",
                    d * d
                )));
            }
            return Ok(());
        }
        let mut level_sets = vec![[false; 6]; self.depth];
        for r in rows {
            for (k, l) in r.iter().enumerate() {
                level_sets[k][l.index()] = true;
            }
        }
        let grid: usize = level_sets
            .iter()
            .map(|s| s.iter().filter(|&&b| b).count())
            .product();
        let leaves = self.nodes.iter().filter(|n| !n.rows.is_empty()).count();
        if leaves != grid {
            return Err(Error::IncompleteMeasurements(
                "settings beyond four qubits must form a complete product grid".into(),
            ));
        }
        for (k, set) in level_sets.iter().enumerate() {
            let labels: Vec<Vec<MubState>> = MubState::ALL
                .into_iter()
                .filter(|l| set[l.index()])
                .map(|l| vec![l])
                .collect();
            ProductTrie::new(&labels)?
                .check_complete(&labels)
                .map_err(|_| Error::IncompleteMeasurements(format!("qubit {k} labels are not complete")))?;
        }
        Ok(())
    }
}

const ONE_C: C64 = C64::new(1.0, 0.0);
