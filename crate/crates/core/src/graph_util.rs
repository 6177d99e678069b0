//! Small graph algorithms shared by the matcher and the state-space tools.

use std::collections::VecDeque;

/// Strongly connected components of a graph on `0..n` (iterative Tarjan).
/// Components come out in reverse topological order.
pub fn tarjan_scc(n: usize, succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut work: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut i)) = work.last_mut() {
            if *i < succ[v].len() {
                let w = succ[v][*i];
                *i += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    work.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                work.pop();
                if let Some(&(parent, _)) = work.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("non-empty");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Components with no edge leaving them.
pub fn bottom_sccs(n: usize, succ: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let sccs = tarjan_scc(n, succ);
    let mut comp_of = vec![0; n];
    for (i, c) in sccs.iter().enumerate() {
        for &v in c {
            comp_of[v] = i;
        }
    }
    let mut out: Vec<Vec<usize>> = sccs
        .iter()
        .enumerate()
        .filter(|(i, c)| c.iter().all(|&v| succ[v].iter().all(|&w| comp_of[w] == *i)))
        .map(|(_, c)| c.clone())
        .collect();
    out.sort();
    out
}

/// Shortest path (as node list) from `from` to the first node satisfying `goal`.
pub fn bfs_path(from: usize, succ: &[Vec<usize>], goal: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
    let n = succ.len();
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut q = VecDeque::from([from]);
    seen[from] = true;
    while let Some(v) = q.pop_front() {
        if goal(v) {
            let mut path = vec![v];
            let mut cur = v;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &w in &succ[v] {
            if !seen[w] {
                seen[w] = true;
                prev[w] = v;
                q.push_back(w);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scc_and_bottoms() {
        // 0 -> 1 <-> 2 -> 3, 4 isolated
        let succ = vec![vec![1], vec![2], vec![1, 3], vec![], vec![]];
        let mut sccs = tarjan_scc(5, &succ);
        sccs.sort();
        assert_eq!(sccs, vec![vec![0], vec![1, 2], vec![3], vec![4]]);
        assert_eq!(bottom_sccs(5, &succ), vec![vec![3], vec![4]]);
    }

    #[test]
    fn shortest_paths() {
        let succ = vec![vec![1, 2], vec![3], vec![3], vec![]];
        assert_eq!(bfs_path(0, &succ, |v| v == 3), Some(vec![0, 1, 3]));
        assert_eq!(bfs_path(3, &succ, |v| v == 0), None);
    }

    #[test]
    fn deep_chain_does_not_overflow() {
        let n = 200_000;
        let succ: Vec<Vec<usize>> = (0..n).map(|i| if i + 1 < n { vec![i + 1] } else { vec![0] }).collect();
        assert_eq!(tarjan_scc(n, &succ).len(), 1);
    }
}
