//! Positive dependency graph, loop atoms and tightness.

use crate::program::{AtomId, GroundProgram};

/// Edge `y -> x` whenever `y` heads a rule with `x` in its positive body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencyGraph {
    successors: Vec<Vec<usize>>,
}

impl DependencyGraph {
    pub fn build(program: &GroundProgram) -> Self {
        let mut successors = vec![Vec::new(); program.num_atoms()];
        for r in program.rules() {
            for y in &r.head {
                for x in &r.pos_body {
                    successors[y.0].push(x.0);
                }
            }
        }
        for s in &mut successors {
            s.sort_unstable();
            s.dedup();
        }
        DependencyGraph { successors }
    }

    pub fn num_nodes(&self) -> usize {
        self.successors.len()
    }

    pub fn successors(&self, node: AtomId) -> impl Iterator<Item = AtomId> + '_ {
        self.successors[node.0].iter().map(|&x| AtomId(x))
    }

    pub fn has_edge(&self, from: AtomId, to: AtomId) -> bool {
        self.successors[from.0].binary_search(&to.0).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (AtomId, AtomId)> + '_ {
        self.successors
            .iter()
            .enumerate()
            .flat_map(|(y, xs)| xs.iter().map(move |&x| (AtomId(y), AtomId(x))))
    }

    pub fn num_edges(&self) -> usize {
        self.successors.iter().map(Vec::len).sum()
    }

    /// Strongly connected components (Tarjan, iterative). Component ids are
    /// assigned in reverse topological order.
    pub fn scc(&self) -> Vec<usize> {
        const UNVISITED: usize = usize::MAX;
        let n = self.num_nodes();
        let mut index = vec![UNVISITED; n];
        let mut lowlink = vec![0; n];
        let mut on_stack = vec![false; n];
        let mut component = vec![UNVISITED; n];
        let mut stack = Vec::new();
        let mut next_index = 0;
        let mut next_component = 0;
        // (node, position in its successor list)
        let mut call_stack: Vec<(usize, usize)> = Vec::new();

        for root in 0..n {
            if index[root] != UNVISITED {
                continue;
            }
            call_stack.push((root, 0));
            index[root] = next_index;
            lowlink[root] = next_index;
            next_index += 1;
            stack.push(root);
            on_stack[root] = true;

            while let Some(&mut (v, ref mut pos)) = call_stack.last_mut() {
                if let Some(&w) = self.successors[v].get(*pos) {
                    *pos += 1;
                    if index[w] == UNVISITED {
                        index[w] = next_index;
                        lowlink[w] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call_stack.push((w, 0));
                    } else if on_stack[w] {
                        lowlink[v] = lowlink[v].min(index[w]);
                    }
                    continue;
                }
                call_stack.pop();
                if let Some(&(parent, _)) = call_stack.last() {
                    lowlink[parent] = lowlink[parent].min(lowlink[v]);
                }
                if lowlink[v] == index[v] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        component[w] = next_component;
                        if w == v {
                            break;
                        }
                    }
                    next_component += 1;
                }
            }
        }
        component
    }

    /// Atoms lying on a directed cycle.
    pub fn loop_atoms(&self) -> LoopAtomSet {
        let comp = self.scc();
        let mut size = vec![0usize; comp.iter().max().map_or(0, |m| m + 1)];
        for &c in &comp {
            size[c] += 1;
        }
        let members = (0..self.num_nodes())
            .filter(|&x| size[comp[x]] >= 2 || self.successors[x].binary_search(&x).is_ok())
            .collect::<Vec<_>>();
        let mut contains = vec![false; self.num_nodes()];
        for &x in &members {
            contains[x] = true;
        }
        LoopAtomSet { members, contains }
    }
}

/// The loop atoms of a program. Empty iff the program is tight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoopAtomSet {
    members: Vec<usize>,
    contains: Vec<bool>,
}

impl LoopAtomSet {
    pub fn contains(&self, a: AtomId) -> bool {
        self.contains.get(a.0).copied().unwrap_or(false)
    }

    pub fn iter(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.members.iter().map(|&x| AtomId(x))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn names<'a>(&self, program: &'a GroundProgram) -> Vec<&'a str> {
        self.iter().map(|a| program.atom_name(a)).collect()
    }
}

pub fn build_dependency_graph(program: &GroundProgram) -> DependencyGraph {
    DependencyGraph::build(program)
}

pub fn loop_atoms(program: &GroundProgram) -> LoopAtomSet {
    DependencyGraph::build(program).loop_atoms()
}

pub fn is_tight(program: &GroundProgram) -> bool {
    loop_atoms(program).is_empty()
}
