//! Iterative Tarjan strongly connected components.
//!
//! The subset digraph can have millions of vertices, so the DFS is explicit
//! (no recursion) and successors are supplied lazily through a callback
//! instead of a materialized adjacency list.

const UNVISITED: u32 = u32::MAX;

/// Strongly connected component decomposition.
///
/// Component ids are assigned in completion order, i.e. reverse topological
/// order of the condensation: sinks get the smallest ids.
#[derive(Clone, Debug)]
pub struct Scc {
    pub comp_of: Vec<u32>,
    pub count: usize,
}

impl Scc {
    pub fn comp_sizes(&self) -> Vec<u32> {
        let mut sizes = vec![0u32; self.count];
        for &c in &self.comp_of {
            sizes[c as usize] += 1;
        }
        sizes
    }
}

/// Runs Tarjan's algorithm on the digraph with vertices `0..n`.
///
/// `succ(v, i)` must return the i-th successor of `v` (any fixed order) or
/// `None` once exhausted; it may be called again for earlier indices.
pub fn tarjan_scc(n: usize, mut succ: impl FnMut(usize, usize) -> Option<usize>) -> Scc {
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut frames: Vec<(u32, u32)> = Vec::new();
    let mut comp_of = vec![UNVISITED; n];
    let mut next = 0u32;
    let mut count = 0usize;

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root as u32);
        on_stack[root] = true;
        frames.push((root as u32, 0));

        while let Some(&mut (v, ref mut child)) = frames.last_mut() {
            let v = v as usize;
            if let Some(w) = succ(v, *child as usize) {
                *child += 1;
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    frames.push((w as u32, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&mut (p, _)) = frames.last_mut() {
                    let p = p as usize;
                    low[p] = low[p].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow") as usize;
                        on_stack[w] = false;
                        comp_of[w] = count as u32;
                        if w == v {
                            break;
                        }
                    }
                    count += 1;
                }
            }
        }
    }

    Scc { comp_of, count }
}

/// Convenience wrapper for an adjacency-list digraph.
pub fn tarjan_scc_adj(adj: &[Vec<usize>]) -> Scc {
    tarjan_scc(adj.len(), |v, i| adj[v].get(i).copied())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_gives_singletons() {
        let adj = vec![vec![1], vec![2], vec![]];
        let scc = tarjan_scc_adj(&adj);
        assert_eq!(scc.count, 3);
        // Sink first.
        assert_eq!(scc.comp_of, vec![2, 1, 0]);
    }

    #[test]
    fn cycle_is_one_component() {
        let adj = vec![vec![1], vec![2], vec![0], vec![0]];
        let scc = tarjan_scc_adj(&adj);
        assert_eq!(scc.count, 2);
        assert_eq!(scc.comp_of[0], scc.comp_of[1]);
        assert_eq!(scc.comp_of[0], scc.comp_of[2]);
        assert_ne!(scc.comp_of[3], scc.comp_of[0]);
    }

    #[test]
    fn two_components_with_bridge() {
        // 0 <-> 1 -> 2 <-> 3
        let adj = vec![vec![1], vec![0, 2], vec![3], vec![2]];
        let scc = tarjan_scc_adj(&adj);
        assert_eq!(scc.count, 2);
        assert_eq!(scc.comp_of[2], scc.comp_of[3]);
        assert_eq!(scc.comp_of[0], scc.comp_of[1]);
        // {2,3} is the sink component and completes first.
        assert!(scc.comp_of[2] < scc.comp_of[0]);
    }

    #[test]
    fn deep_path_does_not_overflow_stack() {
        let n = 200_000;
        let adj: Vec<Vec<usize>> = (0..n).map(|v| if v + 1 < n { vec![v + 1] } else { vec![] }).collect();
        let scc = tarjan_scc_adj(&adj);
        assert_eq!(scc.count, n);
    }
}
