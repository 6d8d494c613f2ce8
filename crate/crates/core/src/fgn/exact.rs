//! Exact marginals by joint enumeration; the correctness oracle for LBP.

use super::graph::FactorGraph;
use super::lbp::Marginals;
use super::FgnError;
use crate::num::Real;

/// Exact marginals obtained by summing the unnormalized joint over every
/// configuration. Only feasible while the joint state count stays at or
/// below 2^20.
pub fn brute_force_marginals<T: Real>(graph: &FactorGraph<T>) -> Result<Marginals<T>, FgnError> {
    let n = graph.n_variables();
    let arities: Vec<usize> = graph.variables().iter().map(|v| v.n_states).collect();
    let mut total: u64 = 1;
    for &k in &arities {
        total = total.saturating_mul(k as u64);
        if total > (1 << 20) {
            return Err(FgnError::TooLarge);
        }
    }

    let mut sums: Vec<Vec<T>> = arities.iter().map(|&k| vec![T::zero(); k]).collect();
    let mut assignment = vec![0usize; n];
    loop {
        let mut weight = T::one();
        for (v, &x) in assignment.iter().enumerate() {
            weight *= graph.unary()[v][x];
        }
        for f in graph.pairwise() {
            weight *= f.entry(assignment[f.i], assignment[f.j], arities[f.j]);
        }
        for (v, &x) in assignment.iter().enumerate() {
            sums[v][x] += weight;
        }
        // mixed-radix increment
        let mut pos = 0;
        loop {
            if pos == n {
                let per_variable = sums
                    .into_iter()
                    .map(|mut s| {
                        let z = s.iter().copied().sum::<T>();
                        for x in &mut s {
                            *x /= z;
                        }
                        s
                    })
                    .collect();
                return Ok(Marginals { per_variable });
            }
            assignment[pos] += 1;
            if assignment[pos] < arities[pos] {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fgn::graph::{PairwiseFactor, Variable};
    use crate::ingest::GeneId;

    fn var(name: &str, k: usize) -> Variable {
        Variable {
            gene: GeneId::new(name).unwrap(),
            n_states: k,
        }
    }

    #[test]
    fn single_variable_is_normalized_evidence() {
        let g: FactorGraph<f64> = FactorGraph::new(vec![var("A", 2)], vec![vec![0.3, 0.7]], vec![]).unwrap();
        let m = brute_force_marginals(&g).unwrap();
        assert!((m.per_variable[0][0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn symmetric_pair_is_uniform() {
        let e = std::f64::consts::E;
        let g = FactorGraph::new(
            vec![var("A", 2), var("B", 2)],
            vec![vec![0.5, 0.5], vec![0.5, 0.5]],
            vec![PairwiseFactor {
                i: 0,
                j: 1,
                table: vec![e, 1.0 / e, 1.0 / e, e],
            }],
        )
        .unwrap();
        let m = brute_force_marginals(&g).unwrap();
        for v in &m.per_variable {
            assert!((v[0] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn three_variable_chain_matches_manual_summation() {
        // chain A - B - C with asymmetric evidence and psi = [[2, .5], [.5, 2]]
        let ea = [0.7, 0.3];
        let eb = [0.6, 0.4];
        let ec = [0.2, 0.8];
        let psi = [[2.0, 0.5], [0.5, 2.0]];
        // manual summation over the 8 configurations
        let mut z = 0.0;
        let mut ma = [0.0f64; 2];
        let mut mb = [0.0f64; 2];
        let mut mc = [0.0f64; 2];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    let w = ea[a] * eb[b] * ec[c] * psi[a][b] * psi[b][c];
                    z += w;
                    ma[a] += w;
                    mb[b] += w;
                    mc[c] += w;
                }
            }
        }
        let g = FactorGraph::new(
            vec![var("A", 2), var("B", 2), var("C", 2)],
            vec![ea.to_vec(), eb.to_vec(), ec.to_vec()],
            vec![
                PairwiseFactor {
                    i: 0,
                    j: 1,
                    table: vec![2.0, 0.5, 0.5, 2.0],
                },
                PairwiseFactor {
                    i: 1,
                    j: 2,
                    table: vec![2.0, 0.5, 0.5, 2.0],
                },
            ],
        )
        .unwrap();
        let m = brute_force_marginals(&g).unwrap();
        for x in 0..2 {
            assert!((m.per_variable[0][x] - ma[x] / z).abs() < 1e-14);
            assert!((m.per_variable[1][x] - mb[x] / z).abs() < 1e-14);
            assert!((m.per_variable[2][x] - mc[x] / z).abs() < 1e-14);
        }
    }

    #[test]
    fn oversized_state_space_rejected() {
        let vars: Vec<Variable> = (0..21).map(|i| var(&format!("v{i}"), 2)).collect();
        let unary = vec![vec![0.5, 0.5]; 21];
        let g = FactorGraph::new(vars, unary, vec![]).unwrap();
        assert_eq!(brute_force_marginals(&g).unwrap_err(), FgnError::TooLarge);
    }
}
