//! Geometric near-neighbor access tree: an exact nearest-neighbor index over
//! an arbitrary metric.
//!
//! Internal nodes hold a set of split points (pivots). Every other item below
//! the node lives in the subtree of its closest pivot, and the node records,
//! for each pivot `i` and subtree `j`, the range of distances from pivot `i`
//! to the members of subtree `j` (including pivot `j` itself). A query prunes
//! subtree `j` whenever the ball around the query with the current best
//! radius cannot meet that range for some pivot.

pub const DEFAULT_ARITY: usize = 8;
pub const DEFAULT_LEAF_CAPACITY: usize = 32;

// Slack on pruning so float rounding in the triangle inequality never drops
// an exact answer.
const PRUNE_SLACK: f64 = 1e-9;

enum Node {
    Leaf(Vec<usize>),
    Internal {
        pivots: Vec<usize>,
        children: Vec<Node>,
        // ranges[i][j] = (min, max) of d(pivot i, member of child j ∪ {pivot j})
        ranges: Vec<Vec<(f64, f64)>>,
    },
}

pub struct Gnat<T, D> {
    items: Vec<(T, usize)>,
    root: Node,
    metric: D,
    arity: usize,
    leaf_capacity: usize,
}

impl<T, D> Gnat<T, D>
where
    D: Fn(&T, &T) -> f64,
{
    pub fn new(metric: D) -> Self {
        Self::with_params(metric, DEFAULT_ARITY, DEFAULT_LEAF_CAPACITY)
    }

    pub fn with_params(metric: D, arity: usize, leaf_capacity: usize) -> Self {
        assert!(arity >= 2, "GNAT arity must be at least 2");
        Self {
            items: Vec::new(),
            root: Node::Leaf(Vec::new()),
            metric,
            arity,
            leaf_capacity: leaf_capacity.max(arity),
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> impl Iterator<Item = (&T, usize)> {
        self.items.iter().map(|(t, h)| (t, *h))
    }

    pub fn insert(&mut self, item: T, handle: usize) {
        let idx = self.items.len();
        self.items.push((item, handle));
        let Self {
            items,
            root,
            metric,
            arity,
            leaf_capacity,
        } = self;
        insert_into(root, idx, items, metric, *arity, *leaf_capacity);
    }

    /// Stored item minimizing the metric to `query`; ties go to the lowest
    /// handle.
    pub fn nearest(&self, query: &T) -> Option<(&T, usize, f64)> {
        if self.items.is_empty() {
            return None;
        }
        let mut best = Best {
            dist: f64::INFINITY,
            handle: usize::MAX,
            idx: usize::MAX,
        };
        self.search(&self.root, query, &mut best);
        let (item, handle) = &self.items[best.idx];
        Some((item, *handle, best.dist))
    }

    fn consider(&self, idx: usize, dist: f64, best: &mut Best) {
        let handle = self.items[idx].1;
        if dist < best.dist || (dist == best.dist && handle < best.handle) {
            *best = Best { dist, handle, idx };
        }
    }

    fn search(&self, node: &Node, query: &T, best: &mut Best) {
        match node {
            Node::Leaf(members) => {
                for &m in members {
                    let d = (self.metric)(query, &self.items[m].0);
                    self.consider(m, d, best);
                }
            }
            Node::Internal {
                pivots,
                children,
                ranges,
            } => {
                let dists: Vec<f64> = pivots.iter().map(|&p| (self.metric)(query, &self.items[p].0)).collect();
                for (&p, &d) in pivots.iter().zip(&dists) {
                    self.consider(p, d, best);
                }
                let mut order: Vec<usize> = (0..children.len()).collect();
                order.sort_by(|&a, &b| dists[a].total_cmp(&dists[b]));
                for j in order {
                    let prunable = (0..pivots.len()).any(|i| {
                        let (lo, hi) = ranges[i][j];
                        let slack = PRUNE_SLACK * (1.0 + dists[i] + best.dist);
                        dists[i] - best.dist > hi + slack || dists[i] + best.dist < lo - slack
                    });
                    if !prunable {
                        self.search(&children[j], query, best);
                    }
                }
            }
        }
    }
}

struct Best {
    dist: f64,
    handle: usize,
    idx: usize,
}

fn insert_into<T, D: Fn(&T, &T) -> f64>(
    node: &mut Node,
    idx: usize,
    items: &[(T, usize)],
    metric: &D,
    arity: usize,
    leaf_capacity: usize,
) {
    match node {
        Node::Leaf(members) => {
            members.push(idx);
            if members.len() > leaf_capacity {
                let members = std::mem::take(members);
                *node = split(members, items, metric, arity, leaf_capacity);
            }
        }
        Node::Internal {
            pivots,
            children,
            ranges,
        } => {
            let dists: Vec<f64> = pivots.iter().map(|&p| metric(&items[idx].0, &items[p].0)).collect();
            let j = argmin(&dists);
            for (i, d) in dists.iter().enumerate() {
                let r = &mut ranges[i][j];
                r.0 = r.0.min(*d);
                r.1 = r.1.max(*d);
            }
            insert_into(&mut children[j], idx, items, metric, arity, leaf_capacity);
        }
    }
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x < v[best] {
            best = i;
        }
    }
    best
}

/// Farthest-first pivot selection starting from the oldest member, then
/// assignment of the rest to their closest pivot.
fn split<T, D: Fn(&T, &T) -> f64>(
    members: Vec<usize>,
    items: &[(T, usize)],
    metric: &D,
    arity: usize,
    leaf_capacity: usize,
) -> Node {
    let k = arity.min(members.len());
    let mut pivots = vec![members[0]];
    let mut to_nearest_pivot: Vec<f64> = members
        .iter()
        .map(|&m| metric(&items[m].0, &items[members[0]].0))
        .collect();
    let mut is_pivot = vec![false; members.len()];
    is_pivot[0] = true;
    while pivots.len() < k {
        let mut far = None;
        for (pos, d) in to_nearest_pivot.iter().enumerate() {
            if is_pivot[pos] {
                continue;
            }
            if far.is_none_or(|(_, best)| *d > best) {
                far = Some((pos, *d));
            }
        }
        let Some((pos, _)) = far else { break };
        is_pivot[pos] = true;
        pivots.push(members[pos]);
        for (q, d) in to_nearest_pivot.iter_mut().enumerate() {
            *d = d.min(metric(&items[members[q]].0, &items[members[pos]].0));
        }
    }

    let np = pivots.len();
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); np];
    let mut ranges = vec![vec![(f64::INFINITY, f64::NEG_INFINITY); np]; np];
    for (j, &p) in pivots.iter().enumerate() {
        for (i, &pi) in pivots.iter().enumerate() {
            let d = metric(&items[pi].0, &items[p].0);
            ranges[i][j] = (d, d);
        }
    }
    for (pos, &m) in members.iter().enumerate() {
        if is_pivot[pos] {
            continue;
        }
        let dists: Vec<f64> = pivots.iter().map(|&p| metric(&items[m].0, &items[p].0)).collect();
        let j = argmin(&dists);
        for (i, d) in dists.iter().enumerate() {
            let r = &mut ranges[i][j];
            r.0 = r.0.min(*d);
            r.1 = r.1.max(*d);
        }
        groups[j].push(m);
    }
    let children = groups
        .into_iter()
        .map(|g| {
            if g.len() > leaf_capacity {
                split(g, items, metric, arity, leaf_capacity)
            } else {
                Node::Leaf(g)
            }
        })
        .collect();
    Node::Internal {
        pivots,
        children,
        ranges,
    }
}
