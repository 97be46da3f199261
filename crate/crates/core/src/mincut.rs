//! Max-flow / min-cut on directed networks with a single source and sink.
//!
//! The solver follows Boykov and Kolmogorov: two search trees grow from the
//! terminals, every tree contact yields an augmenting path, and saturated
//! tree arcs turn their subtrees into orphans that try to re-attach to the
//! same tree before being freed. Trees are kept between augmentations, which
//! is what makes the method fast on the shallow, grid-like graphs produced by
//! ray sampling.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Endpoint of an arc. Non-terminal nodes are numbered from zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Vertex {
    Source,
    Sink,
    Node(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    pub from: Vertex,
    pub to: Vertex,
    pub capacity: f64,
}

/// A capacitated directed graph with an implicit source and sink.
///
/// Parallel arcs are kept as separate arcs. Arcs into the source or out of
/// the sink are rejected.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowNetwork {
    node_count: usize,
    arcs: Vec<Arc>,
}

impl FlowNetwork {
    pub fn new(node_count: usize) -> Self {
        FlowNetwork {
            node_count,
            arcs: Vec::new(),
        }
    }

    pub fn with_capacity(node_count: usize, arcs: usize) -> Self {
        FlowNetwork {
            node_count,
            arcs: Vec::with_capacity(arcs),
        }
    }

    /// Number of non-terminal nodes.
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn add_node(&mut self) -> u32 {
        self.node_count += 1;
        (self.node_count - 1) as u32
    }

    pub fn add_arc(&mut self, from: Vertex, to: Vertex, capacity: f64) -> Result<()> {
        if !(capacity.is_finite() && capacity >= 0.0) {
            return Err(Error::InvalidNetwork(format!(
                "capacity {capacity} must be finite and non-negative"
            )));
        }
        if to == Vertex::Source {
            return Err(Error::InvalidNetwork("arc into the source".into()));
        }
        if from == Vertex::Sink {
            return Err(Error::InvalidNetwork("arc out of the sink".into()));
        }
        for v in [from, to] {
            if let Vertex::Node(i) = v {
                if i as usize >= self.node_count {
                    return Err(Error::InvalidNetwork(format!(
                        "node {i} out of range (node_count {})",
                        self.node_count
                    )));
                }
            }
        }
        self.arcs.push(Arc { from, to, capacity });
        Ok(())
    }

    /// Shorthand for arcs between non-terminal nodes.
    pub fn add_edge(&mut self, from: u32, to: u32, capacity: f64) -> Result<()> {
        self.add_arc(Vertex::Node(from), Vertex::Node(to), capacity)
    }

    /// DIMACS max-flow text. Node `i` becomes `i + 1`, the source
    /// `node_count + 1` and the sink `node_count + 2`.
    pub fn to_dimacs(&self) -> String {
        let n = self.node_count;
        let id = |v: Vertex| match v {
            Vertex::Node(i) => i as usize + 1,
            Vertex::Source => n + 1,
            Vertex::Sink => n + 2,
        };
        let mut out = String::with_capacity(32 * (self.arcs.len() + 4));
        let _ = writeln!(out, "p max {} {}", n + 2, self.arcs.len());
        let _ = writeln!(out, "n {} s", n + 1);
        let _ = writeln!(out, "n {} t", n + 2);
        for a in &self.arcs {
            let _ = writeln!(out, "a {} {} {}", id(a.from), id(a.to), a.capacity);
        }
        out
    }

    /// Parses DIMACS max-flow text. Nodes other than the terminals are
    /// renumbered densely in increasing id order.
    pub fn from_dimacs(text: &str) -> Result<Self> {
        let bad =
            |line: usize, msg: &str| Error::Header(format!("DIMACS line {}: {msg}", line + 1));
        let mut total = None;
        let mut source = None;
        let mut sink = None;
        let mut raw_arcs = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            match parts.next() {
                None | Some("c") => {}
                Some("p") => {
                    if parts.next() != Some("max") {
                        return Err(bad(ln, "expected 'p max'"));
                    }
                    let n: usize = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad(ln, "bad node count"))?;
                    total = Some(n);
                }
                Some("n") => {
                    let id: usize = parts
                        .next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| bad(ln, "bad node id"))?;
                    match parts.next() {
                        Some("s") => source = Some(id),
                        Some("t") => sink = Some(id),
                        _ => return Err(bad(ln, "expected 's' or 't'")),
                    }
                }
                Some("a") => {
                    let mut num = || parts.next().ok_or_else(|| bad(ln, "short arc line"));
                    let u: usize = num()?.parse().map_err(|_| bad(ln, "bad tail"))?;
                    let v: usize = num()?.parse().map_err(|_| bad(ln, "bad head"))?;
                    let c: f64 = num()?.parse().map_err(|_| bad(ln, "bad capacity"))?;
                    raw_arcs.push((u, v, c));
                }
                Some(_) => return Err(bad(ln, "unknown record")),
            }
        }
        let total = total.ok_or_else(|| Error::Header("DIMACS: missing problem line".into()))?;
        let (s, t) = match (source, sink) {
            (Some(s), Some(t)) if s != t => (s, t),
            _ => return Err(Error::Header("DIMACS: missing or equal terminals".into())),
        };
        let mut map = vec![u32::MAX; total + 1];
        let mut next = 0u32;
        for id in 1..=total {
            if id != s && id != t {
                map[id] = next;
                next += 1;
            }
        }
        let mut net = FlowNetwork::with_capacity(next as usize, raw_arcs.len());
        for (u, v, c) in raw_arcs {
            let vertex = |id: usize| -> Result<Vertex> {
                if id == 0 || id > total {
                    Err(Error::Header(format!("DIMACS: node {id} out of range")))
                } else if id == s {
                    Ok(Vertex::Source)
                } else if id == t {
                    Ok(Vertex::Sink)
                } else {
                    Ok(Vertex::Node(map[id]))
                }
            };
            net.add_arc(vertex(u)?, vertex(v)?, c)?;
        }
        Ok(net)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutResult {
    pub max_flow_value: f64,
    /// Source-side flag per non-terminal node.
    pub source_side: Vec<bool>,
    pub cut_capacity: f64,
}

/// Total capacity of the arcs leaving the set made of the source and the
/// nodes flagged in `side`.
pub fn closed_set_cost(net: &FlowNetwork, side: &[bool]) -> Result<f64> {
    if side.len() != net.node_count() {
        return Err(Error::MalformedPartition(format!(
            "partition has {} entries for {} nodes",
            side.len(),
            net.node_count()
        )));
    }
    Ok(cut_capacity(net, side))
}

fn cut_capacity(net: &FlowNetwork, side: &[bool]) -> f64 {
    let inside = |v: Vertex| match v {
        Vertex::Source => true,
        Vertex::Sink => false,
        Vertex::Node(i) => side[i as usize],
    };
    net.arcs()
        .iter()
        .filter(|a| inside(a.from) && !inside(a.to))
        .map(|a| a.capacity)
        .fold(0.0, |acc, c| acc + c)
}

const NO_PARENT: u32 = u32::MAX;
const TERMINAL: u32 = u32::MAX - 1;
const ORPHAN: u32 = u32::MAX - 2;

/// Residual graph and search-tree state of one solve.
struct Solver {
    // per node
    first: Vec<u32>,
    tr_cap: Vec<f64>,
    parent: Vec<u32>,
    is_sink: Vec<bool>,
    ts: Vec<u64>,
    dist: Vec<u32>,
    queued: Vec<bool>,
    // per residual arc, grouped by tail node
    head: Vec<u32>,
    sister: Vec<u32>,
    r_cap: Vec<f64>,

    active: VecDeque<u32>,
    orphans: VecDeque<u32>,
    time: u64,
    flow: f64,
}

impl Solver {
    fn new(net: &FlowNetwork) -> Self {
        let n = net.node_count();
        let mut src_cap = vec![0.0f64; n];
        let mut snk_cap = vec![0.0f64; n];
        let mut degree = vec![0u32; n + 1];
        let mut direct = 0.0;
        for a in net.arcs() {
            match (a.from, a.to) {
                (Vertex::Node(u), Vertex::Node(v)) if u != v => {
                    degree[u as usize] += 1;
                    degree[v as usize] += 1;
                }
                (Vertex::Node(_), Vertex::Node(_)) => {}
                (Vertex::Source, Vertex::Node(v)) => src_cap[v as usize] += a.capacity,
                (Vertex::Node(u), Vertex::Sink) => snk_cap[u as usize] += a.capacity,
                (Vertex::Source, Vertex::Sink) => direct += a.capacity,
                _ => unreachable!("rejected by FlowNetwork::add_arc"),
            }
        }
        let mut first = vec![0u32; n + 1];
        let mut acc = 0u32;
        for i in 0..n {
            first[i] = acc;
            acc += degree[i];
        }
        first[n] = acc;
        let m = acc as usize;
        let mut head = vec![0u32; m];
        let mut sister = vec![0u32; m];
        let mut r_cap = vec![0.0f64; m];
        let mut fill: Vec<u32> = first[..n].to_vec();
        for a in net.arcs() {
            if let (Vertex::Node(u), Vertex::Node(v)) = (a.from, a.to) {
                if u == v {
                    continue;
                }
                let fwd = fill[u as usize];
                fill[u as usize] += 1;
                let rev = fill[v as usize];
                fill[v as usize] += 1;
                head[fwd as usize] = v;
                head[rev as usize] = u;
                sister[fwd as usize] = rev;
                sister[rev as usize] = fwd;
                r_cap[fwd as usize] = a.capacity;
            }
        }
        let mut flow = direct;
        let mut tr_cap = vec![0.0f64; n];
        for i in 0..n {
            flow += src_cap[i].min(snk_cap[i]);
            tr_cap[i] = src_cap[i] - snk_cap[i];
        }
        Solver {
            first,
            tr_cap,
            parent: vec![NO_PARENT; n],
            is_sink: vec![false; n],
            ts: vec![0; n],
            dist: vec![0; n],
            queued: vec![false; n],
            head,
            sister,
            r_cap,
            active: VecDeque::new(),
            orphans: VecDeque::new(),
            time: 0,
            flow,
        }
    }

    #[inline]
    fn arcs_of(&self, i: u32) -> std::ops::Range<usize> {
        self.first[i as usize] as usize..self.first[i as usize + 1] as usize
    }

    #[inline]
    fn set_active(&mut self, i: u32) {
        if !self.queued[i as usize] {
            self.queued[i as usize] = true;
            self.active.push_back(i);
        }
    }

    fn next_active(&mut self) -> Option<u32> {
        while let Some(i) = self.active.pop_front() {
            self.queued[i as usize] = false;
            if self.parent[i as usize] != NO_PARENT {
                return Some(i);
            }
        }
        None
    }

    fn run(&mut self) {
        for i in 0..self.tr_cap.len() {
            let c = self.tr_cap[i];
            if c != 0.0 {
                self.is_sink[i] = c < 0.0;
                self.parent[i] = TERMINAL;
                self.dist[i] = 1;
                self.set_active(i as u32);
            }
        }

        let mut current: Option<u32> = None;
        loop {
            let i = match current.take() {
                Some(i) if self.parent[i as usize] != NO_PARENT => i,
                _ => match self.next_active() {
                    Some(i) => i,
                    None => break,
                },
            };
            let bridge = self.grow(i);
            self.time += 1;
            if let Some(a) = bridge {
                // i may still have unexplored contacts
                current = Some(i);
                self.augment(a);
                self.adopt();
            }
        }
    }

    /// Expands the tree of `i` through its residual arcs. Returns an arc
    /// oriented from the source tree to the sink tree on contact.
    fn grow(&mut self, i: u32) -> Option<usize> {
        let iu = i as usize;
        let sink_tree = self.is_sink[iu];
        for a in self.arcs_of(i) {
            let cap = if sink_tree {
                self.r_cap[self.sister[a] as usize]
            } else {
                self.r_cap[a]
            };
            if cap <= 0.0 {
                continue;
            }
            let j = self.head[a];
            let ju = j as usize;
            if self.parent[ju] == NO_PARENT {
                self.is_sink[ju] = sink_tree;
                self.parent[ju] = self.sister[a];
                self.ts[ju] = self.ts[iu];
                self.dist[ju] = self.dist[iu] + 1;
                self.set_active(j);
            } else if self.is_sink[ju] != sink_tree {
                return Some(if sink_tree {
                    self.sister[a] as usize
                } else {
                    a
                });
            } else if self.ts[ju] <= self.ts[iu] && self.dist[ju] > self.dist[iu] {
                // shorter route to the terminal through i
                self.parent[ju] = self.sister[a];
                self.ts[ju] = self.ts[iu];
                self.dist[ju] = self.dist[iu] + 1;
            }
        }
        None
    }

    fn orphan_front(&mut self, i: u32) {
        self.parent[i as usize] = ORPHAN;
        self.orphans.push_front(i);
    }

    fn orphan_back(&mut self, i: u32) {
        self.parent[i as usize] = ORPHAN;
        self.orphans.push_back(i);
    }

    fn augment(&mut self, middle: usize) {
        let tail = self.head[self.sister[middle] as usize];
        let tip = self.head[middle];

        let mut bottleneck = self.r_cap[middle];
        let mut i = tail as usize;
        loop {
            let pa = self.parent[i];
            if pa == TERMINAL {
                break;
            }
            bottleneck = bottleneck.min(self.r_cap[self.sister[pa as usize] as usize]);
            i = self.head[pa as usize] as usize;
        }
        bottleneck = bottleneck.min(self.tr_cap[i]);
        let mut i = tip as usize;
        loop {
            let pa = self.parent[i];
            if pa == TERMINAL {
                break;
            }
            bottleneck = bottleneck.min(self.r_cap[pa as usize]);
            i = self.head[pa as usize] as usize;
        }
        bottleneck = bottleneck.min(-self.tr_cap[i]);

        self.r_cap[self.sister[middle] as usize] += bottleneck;
        self.r_cap[middle] -= bottleneck;

        let mut i = tail as usize;
        loop {
            let pa = self.parent[i];
            if pa == TERMINAL {
                break;
            }
            let pa = pa as usize;
            let down = self.sister[pa] as usize;
            self.r_cap[pa] += bottleneck;
            self.r_cap[down] -= bottleneck;
            let next = self.head[pa] as usize;
            if self.r_cap[down] == 0.0 {
                self.orphan_front(i as u32);
            }
            i = next;
        }
        self.tr_cap[i] -= bottleneck;
        if self.tr_cap[i] == 0.0 {
            self.orphan_front(i as u32);
        }

        let mut i = tip as usize;
        loop {
            let pa = self.parent[i];
            if pa == TERMINAL {
                break;
            }
            let pa = pa as usize;
            self.r_cap[self.sister[pa] as usize] += bottleneck;
            self.r_cap[pa] -= bottleneck;
            let next = self.head[pa] as usize;
            if self.r_cap[pa] == 0.0 {
                self.orphan_front(i as u32);
            }
            i = next;
        }
        self.tr_cap[i] += bottleneck;
        if self.tr_cap[i] == 0.0 {
            self.orphan_front(i as u32);
        }

        self.flow += bottleneck;
    }

    fn adopt(&mut self) {
        while let Some(i) = self.orphans.pop_front() {
            self.process_orphan(i);
        }
    }

    /// Distance from `j` to its terminal along parent arcs, or `None` when
    /// the walk ends in an orphan. Marks visited nodes with the current time.
    fn origin_distance(&mut self, start: u32) -> Option<u32> {
        let mut j = start as usize;
        let mut d = 0u32;
        loop {
            if self.ts[j] == self.time {
                d += self.dist[j];
                break;
            }
            let a = self.parent[j];
            d += 1;
            if a == TERMINAL {
                self.ts[j] = self.time;
                self.dist[j] = 1;
                break;
            }
            if a == ORPHAN {
                return None;
            }
            j = self.head[a as usize] as usize;
        }
        // cache distances along the walked path
        let mut j = start as usize;
        let mut dd = d;
        while self.ts[j] != self.time {
            self.ts[j] = self.time;
            self.dist[j] = dd;
            dd -= 1;
            j = self.head[self.parent[j] as usize] as usize;
        }
        Some(d)
    }

    fn process_orphan(&mut self, i: u32) {
        let iu = i as usize;
        let sink_tree = self.is_sink[iu];
        let mut best: Option<(usize, u32)> = None;
        for a in self.arcs_of(i) {
            // residual capacity from the candidate parent towards i (source
            // tree) or from i towards the candidate parent (sink tree)
            let cap = if sink_tree {
                self.r_cap[a]
            } else {
                self.r_cap[self.sister[a] as usize]
            };
            if cap <= 0.0 {
                continue;
            }
            let j = self.head[a];
            let ju = j as usize;
            if self.is_sink[ju] != sink_tree || self.parent[ju] == NO_PARENT {
                continue;
            }
            if let Some(d) = self.origin_distance(j) {
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((a, d));
                }
            }
        }

        if let Some((a, d)) = best {
            self.parent[iu] = a as u32;
            self.ts[iu] = self.time;
            self.dist[iu] = d + 1;
            return;
        }

        self.parent[iu] = NO_PARENT;
        for a in self.arcs_of(i) {
            let j = self.head[a];
            let ju = j as usize;
            if self.is_sink[ju] != sink_tree {
                continue;
            }
            let pa = self.parent[ju];
            if pa == NO_PARENT {
                continue;
            }
            let cap = if sink_tree {
                self.r_cap[a]
            } else {
                self.r_cap[self.sister[a] as usize]
            };
            if cap > 0.0 {
                self.set_active(j);
            }
            if pa != TERMINAL && pa != ORPHAN && self.head[pa as usize] == i {
                self.orphan_back(j);
            }
        }
    }

    /// Nodes reachable from the source in the residual graph.
    fn source_reachable(&self) -> Vec<bool> {
        let n = self.tr_cap.len();
        let mut seen = vec![false; n];
        let mut stack: Vec<u32> = Vec::new();
        for (i, &c) in self.tr_cap.iter().enumerate() {
            if c > 0.0 {
                seen[i] = true;
                stack.push(i as u32);
            }
        }
        while let Some(i) = stack.pop() {
            for a in self.arcs_of(i) {
                let j = self.head[a] as usize;
                if !seen[j] && self.r_cap[a] > 0.0 {
                    seen[j] = true;
                    stack.push(j as u32);
                }
            }
        }
        seen
    }
}

/// Maximum flow and the minimal-source-side minimum cut.
///
/// `source_side` is the set of nodes reachable from the source in the final
/// residual graph, which is the smallest source side among all minimum cuts
/// and therefore independent of arc order.
pub fn max_flow(net: &FlowNetwork) -> CutResult {
    let mut solver = Solver::new(net);
    solver.run();
    let source_side = solver.source_reachable();
    let cut = cut_capacity(net, &source_side);
    let flow = solver.flow;
    assert!(
        (flow - cut).abs() <= 1e-6 * flow.abs().max(1.0),
        "max-flow/min-cut mismatch: flow {flow}, cut {cut}"
    );
    CutResult {
        max_flow_value: flow,
        source_side,
        cut_capacity: cut,
    }
}
