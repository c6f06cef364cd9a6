//! The harmonic contraction of two squared lengths and the collision kernel
//! it induces on densities.
//!
//! `K[p,q](u) = ∬ p(u1) q(u2) δ(u - u1 u2 / (u1 + u2)) du1 du2`
//!
//! is evaluated by pair binning: each pair of grid nodes carries mass
//! `w_i p_i w_j q_j` (trapezoid weights) and deposits it next to the
//! contracted value. Deposition is conservative, so `mass(K) = mass(p)
//! mass(q)` up to rounding, and since the contraction never exceeds either
//! argument nothing escapes the grid.

use std::fmt;
use std::str::FromStr;

use super::density::UDensity;
use crate::error::{Error, Result};

/// Harmonic combination `u1 u2 / (u1 + u2)`: inverse squared lengths add.
///
/// `+∞` stands for a delocalized partner and acts as the identity,
/// `combine(u, ∞) = u`. Two zero arguments give zero.
pub fn combine(u1: f64, u2: f64) -> Result<f64> {
    if !(u1 >= 0.0 && u2 >= 0.0) {
        return Err(Error::domain(format!(
            "combine needs nonnegative arguments, got ({u1}, {u2})"
        )));
    }
    Ok(combine_unchecked(u1, u2))
}

#[inline]
pub(crate) fn combine_unchecked(u1: f64, u2: f64) -> f64 {
    let (a, b) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
    if b == 0.0 {
        0.0
    } else if b.is_infinite() {
        a
    } else {
        a / (1.0 + a / b)
    }
}

/// How a node pair's mass is placed on the output grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Deposition {
    /// Mass sits at `combine(u_i, u_j)` and is split linearly between the two
    /// adjacent nodes. Point masses map to point masses.
    Node,
    /// Mass is spread uniformly over the image of the product cell
    /// `[u_i ± h/2] × [u_j ± h/2]` before linear splitting. Suppresses the
    /// lattice aliasing of `Node` at the cost of up to one node of smearing.
    #[default]
    Cell,
}

impl fmt::Display for Deposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Deposition::Node => "node",
            Deposition::Cell => "cell",
        })
    }
}

impl FromStr for Deposition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "node" => Ok(Deposition::Node),
            "cell" => Ok(Deposition::Cell),
            other => Err(Error::config(format!(
                "unknown deposition `{other}` (node | cell)"
            ))),
        }
    }
}

/// `K[p,q]` with node deposition.
pub fn collision_kernel(p: &UDensity, q: &UDensity) -> Result<UDensity> {
    collision_kernel_with(p, q, Deposition::Node)
}

pub fn collision_kernel_with(p: &UDensity, q: &UDensity, dep: Deposition) -> Result<UDensity> {
    p.grid().check_same(q.grid())?;
    let grid = *p.grid();
    let out = KernelPlan::new(grid.n_bins()).apply(&p.node_masses(), &q.node_masses(), dep);
    let values = out
        .into_iter()
        .enumerate()
        .map(|(i, m)| m / grid.weight(i))
        .collect();
    Ok(UDensity::from_raw(grid, values))
}

/// Per-grid tables shared by repeated kernel evaluations.
#[derive(Debug, Clone)]
pub(crate) struct KernelPlan {
    n: usize,
    /// `1 / s` for integer node-index sums.
    recip: Vec<f64>,
    /// `1 / (2 s)` for doubled half-integer cell-edge sums.
    recip_half: Vec<f64>,
    cells: Option<CellTable>,
}

/// Cell splits of every pair `j >= i`, row by row. The geometry does not
/// depend on the densities, so repeated evaluations only stream through it.
#[derive(Debug, Clone)]
struct CellTable {
    node: Vec<u32>,
    first: Vec<f64>,
    last: Vec<f64>,
}

/// Share of a pair's mass on nodes `node`, `node + 1`, `node + 2`: `first`,
/// the remainder, and `last`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Split {
    node: usize,
    first: f64,
    last: f64,
}

impl KernelPlan {
    pub(crate) fn new(n: usize) -> Self {
        let recip = (0..=2 * n)
            .map(|s| if s == 0 { 0.0 } else { 1.0 / s as f64 })
            .collect();
        let recip_half = (0..=4 * n + 2)
            .map(|s| if s == 0 { 0.0 } else { 0.5 / s as f64 })
            .collect();
        KernelPlan {
            n,
            recip,
            recip_half,
            cells: None,
        }
    }

    /// A plan that precomputes the cell splits (about 20 bytes per node
    /// pair), worthwhile when the kernel is evaluated many times.
    pub(crate) fn tabulated(n: usize) -> Self {
        let mut plan = Self::new(n);
        let pairs = (n + 1) * (n + 2) / 2;
        let mut table = CellTable {
            node: Vec::with_capacity(pairs),
            first: Vec::with_capacity(pairs),
            last: Vec::with_capacity(pairs),
        };
        for i in 0..=n {
            for j in i..=n {
                let s = plan.cell_split(i, j);
                table.node.push(s.node as u32);
                table.first.push(s.first);
                table.last.push(s.last);
            }
        }
        plan.cells = Some(table);
        plan
    }

    /// Plan for many evaluations with deposition `dep`.
    pub(crate) fn for_repeated(n: usize, dep: Deposition) -> Self {
        match dep {
            Deposition::Cell => Self::tabulated(n),
            Deposition::Node => Self::new(n),
        }
    }

    /// Deposits the pair masses of node masses `mp`, `mq`; returns output
    /// node masses. Pairs are visited in a fixed order, so the result is
    /// bit-reproducible and independent of tabulation.
    pub(crate) fn apply(&self, mp: &[f64], mq: &[f64], dep: Deposition) -> Vec<f64> {
        let n = self.n;
        assert_eq!(mp.len(), n + 1);
        assert_eq!(mq.len(), n + 1);
        // two spare nodes absorb the (zero) spill of splits ending at u_max
        let mut out = vec![0.0; n + 3];
        // combine is symmetric, so pairs (i, j) and (j, i) share a
        // destination and are folded into one visit with j >= i.
        let mut row = 0;
        for i in 0..=n {
            let len = n + 1 - i;
            let (a, b) = (mp[i], mq[i]);
            if a == 0.0 && b == 0.0 {
                row += len;
                continue;
            }
            let mass = |j: usize| if j == i { a * b } else { a * mq[j] + mp[j] * b };
            match (dep, &self.cells) {
                (Deposition::Node, _) => {
                    let fi = i as f64;
                    deposit_point(&mut out, 0.5 * fi, a * b);
                    let recip = &self.recip[2 * i + 1..];
                    let rows = mp[i + 1..].iter().zip(&mq[i + 1..]).zip(recip);
                    for (j, ((pj, qj), r)) in rows.enumerate() {
                        let x = fi * (i + 1 + j) as f64 * r;
                        deposit_point(&mut out, x, a * qj + pj * b);
                    }
                }
                (Deposition::Cell, Some(t)) => {
                    let rows = t.node[row..row + len]
                        .iter()
                        .zip(&t.first[row..row + len])
                        .zip(&t.last[row..row + len]);
                    for (d, ((&k, &first), &last)) in rows.enumerate() {
                        deposit_split(&mut out, k as usize, first, last, mass(i + d));
                    }
                }
                (Deposition::Cell, None) => {
                    for j in i..=n {
                        let s = self.cell_split(i, j);
                        deposit_split(&mut out, s.node, s.first, s.last, mass(j));
                    }
                }
            }
            row += len;
        }
        debug_assert!(out[n + 1] == 0.0 && out[n + 2] == 0.0);
        out.truncate(n + 1);
        out
    }

    /// Uniform spreading over the image of the product cell `(i, j)` under
    /// combine, projected on the nodal hat functions. The image is narrower
    /// than one grid cell, so at most three nodes are involved.
    fn cell_split(&self, i: usize, j: usize) -> Split {
        let (li, lj) = (self.edge_lo(i), self.edge_lo(j));
        let (hi, hj) = (self.edge_hi(i), self.edge_hi(j));
        let lo = (li * lj) as f64 * self.recip_half[li + lj];
        let up = (hi * hj) as f64 * self.recip_half[hi + hj];
        let k = lo as usize;
        let kh = up as usize;
        let t_lo = lo - k as f64;
        if kh == k {
            // hat fractions are linear inside one cell: midpoint split
            Split {
                node: k,
                first: 1.0 - 0.5 * (t_lo + (up - k as f64)),
                last: 0.0,
            }
        } else if kh == k + 1 {
            let w = up - lo;
            let t_hi = up - kh as f64;
            Split {
                node: k,
                first: 0.5 * (1.0 - t_lo) * (1.0 - t_lo) / w,
                last: 0.5 * t_hi * t_hi / w,
            }
        } else {
            unreachable!("cell image [{lo}, {up}] wider than one cell")
        }
    }

    /// Doubled lower edge of the cell around node `i`, clipped at 0.
    #[inline]
    fn edge_lo(&self, i: usize) -> usize {
        if i == 0 {
            0
        } else {
            2 * i - 1
        }
    }

    /// Doubled upper edge of the cell around node `i`, clipped at `n`.
    #[inline]
    fn edge_hi(&self, i: usize) -> usize {
        if i == self.n {
            2 * self.n
        } else {
            2 * i + 1
        }
    }
}

/// Linear split of mass `m` at node coordinate `x`.
#[inline]
fn deposit_point(out: &mut [f64], x: f64, m: f64) {
    let k = x as usize;
    let f = x - k as f64;
    out[k] += m - m * f;
    out[k + 1] += m * f;
}

#[inline]
fn deposit_split(out: &mut [f64], k: usize, first: f64, last: f64, m: f64) {
    let (a, c) = (m * first, m * last);
    out[k] += a;
    out[k + 1] += m - a - c;
    out[k + 2] += c;
}

/// `∬ p(u1) q(u2) combine(u1, u2) du1 du2` by direct double trapezoid sum,
/// without going through the kernel.
pub fn pair_mean_combine(p: &UDensity, q: &UDensity) -> Result<f64> {
    p.grid().check_same(q.grid())?;
    let g = p.grid();
    let mp = p.node_masses();
    let mq = q.node_masses();
    let mut total = 0.0;
    for (i, a) in mp.iter().enumerate() {
        if *a == 0.0 {
            continue;
        }
        let ui = g.node(i);
        let row: f64 = mq
            .iter()
            .enumerate()
            .map(|(j, b)| b * combine_unchecked(ui, g.node(j)))
            .sum();
        total += a * row;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::udist::grid::UGrid;

    #[test]
    fn combine_examples() {
        assert_eq!(combine(2.0, 2.0).unwrap(), 1.0);
        assert_eq!(combine(3.0, 6.0).unwrap(), 2.0);
        assert_eq!(combine(5.0, f64::INFINITY).unwrap(), 5.0);
        assert_eq!(combine(f64::INFINITY, 5.0).unwrap(), 5.0);
        assert_eq!(combine(0.0, 0.0).unwrap(), 0.0);
        assert_eq!(combine(0.0, 4.0).unwrap(), 0.0);
        assert!(combine(-1.0, 2.0).is_err());
        assert!(combine(1.0, f64::NAN).is_err());
    }

    #[test]
    fn point_masses_contract_under_node_deposition() {
        let g = UGrid::default();
        let p = UDensity::point_mass(g, 2.0).unwrap();
        let k = collision_kernel(&p, &p).unwrap();
        let expect = UDensity::point_mass(g, 1.0).unwrap();
        assert!(k.l1_distance(&expect).unwrap() < 1e-12);
    }

    #[test]
    fn cell_deposition_smears_within_one_node() {
        let g = UGrid::default();
        let p = UDensity::point_mass(g, 2.0).unwrap();
        let k = collision_kernel_with(&p, &p, Deposition::Cell).unwrap();
        assert!((k.mass() - 1.0).abs() < 1e-12);
        assert!((k.mean().unwrap() - 1.0).abs() < 1e-4);
        let support: Vec<usize> = (0..g.len()).filter(|&i| k.values()[i] > 0.0).collect();
        assert_eq!(support, vec![99, 100, 101]);
    }

    #[test]
    fn tabulated_plan_is_bit_identical() {
        let g = UGrid::with_bins(300, 0.05).unwrap();
        let p = UDensity::from_fn(g, |u| u * (-u).exp()).unwrap();
        let q = UDensity::from_fn(g, |u| (-0.5 * u).exp()).unwrap();
        let (mp, mq) = (p.node_masses(), q.node_masses());
        let direct = KernelPlan::new(300).apply(&mp, &mq, Deposition::Cell);
        let table = KernelPlan::tabulated(300).apply(&mp, &mq, Deposition::Cell);
        assert_eq!(direct, table);
    }

    #[test]
    fn cell_images_stay_within_one_cell() {
        let plan = KernelPlan::new(400);
        for i in 0..=400 {
            for j in i..=400 {
                let s = plan.cell_split(i, j);
                assert!(s.first >= 0.0 && s.last >= 0.0 && s.first + s.last <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let p = UDensity::point_mass(UGrid::default(), 2.0).unwrap();
        let q = UDensity::point_mass(UGrid::new(10.0, 0.01).unwrap(), 2.0).unwrap();
        assert!(matches!(collision_kernel(&p, &q), Err(Error::GridMismatch)));
    }

    #[test]
    fn unequal_densities_node_vs_brute_force() {
        // Asymmetric pairing via the i <= j fold must match an unfolded sum.
        let g = UGrid::with_bins(40, 0.25).unwrap();
        let p = UDensity::from_fn(g, |u| u * (-u).exp()).unwrap();
        let q = UDensity::from_fn(g, |u| (-0.5 * u).exp()).unwrap();
        let k = collision_kernel(&p, &q).unwrap();
        let (mp, mq) = (p.node_masses(), q.node_masses());
        let mut brute = vec![0.0; g.len()];
        for i in 0..g.len() {
            for j in 0..g.len() {
                let x = combine(i as f64, j as f64).unwrap();
                let kf = x.floor();
                let f = x - kf;
                brute[kf as usize] += mp[i] * mq[j] * (1.0 - f);
                if f > 0.0 {
                    brute[kf as usize + 1] += mp[i] * mq[j] * f;
                }
            }
        }
        for (i, b) in brute.iter().enumerate() {
            let got = k.values()[i] * g.weight(i);
            assert!((got - b).abs() < 1e-14, "node {i}: {got} vs {b}");
        }
    }

    #[test]
    fn deposition_parsing() {
        assert_eq!("node".parse::<Deposition>().unwrap(), Deposition::Node);
        assert_eq!("cell".parse::<Deposition>().unwrap(), Deposition::Cell);
        assert!("nearest".parse::<Deposition>().is_err());
    }
}
