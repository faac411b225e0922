use serde::{Deserialize, Serialize};

use crate::arrangement::{arrangement_distance, Arrangement, Gnat, ObjectId};
use crate::manipulation::{GripperConfig, Motion};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootKind {
    Start,
    Goal,
}

#[derive(Clone, Debug)]
pub struct Vertex {
    pub arrangement: Arrangement,
    /// Where the gripper is after reaching this vertex: the place grasp of
    /// the inbound edge, the home pose at the start root, nothing at the
    /// goal root.
    pub preceding: Option<GripperConfig>,
    /// Inbound edge.
    pub parent_edge: Option<usize>,
}

/// One pick-and-place between two vertices. Motions are absent when motion
/// checks are disabled, and the transit is absent on edges leaving the goal
/// root.
#[derive(Clone, Debug)]
pub struct TreeEdge {
    pub parent: usize,
    pub child: usize,
    pub object: ObjectId,
    pub pick: GripperConfig,
    pub place: GripperConfig,
    pub transit: Option<Motion>,
    pub transfer: Option<Motion>,
}

type Metric = Box<dyn Fn(&Arrangement, &Arrangement) -> f64 + Send + Sync>;

pub struct ArrangementTree {
    pub kind: RootKind,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<TreeEdge>,
    index: Gnat<Arrangement, Metric>,
}

impl ArrangementTree {
    pub fn new(kind: RootKind, root: Arrangement, preceding: Option<GripperConfig>, w_rot: f64) -> Self {
        let metric: Metric = Box::new(move |a, b| arrangement_distance(a, b, w_rot));
        let mut index = Gnat::new(metric);
        index.insert(root.clone(), 0);
        Self {
            kind,
            vertices: vec![Vertex {
                arrangement: root,
                preceding,
                parent_edge: None,
            }],
            edges: Vec::new(),
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn arrangement(&self, v: usize) -> &Arrangement {
        &self.vertices[v].arrangement
    }

    pub fn nearest(&self, a: &Arrangement) -> usize {
        self.index
            .nearest(a)
            .map(|(_, v, _)| v)
            .expect("trees always hold their root")
    }

    pub fn add(&mut self, edge: TreeEdge, arrangement: Arrangement) -> usize {
        let child = self.vertices.len();
        let preceding = Some(edge.place);
        self.edges.push(TreeEdge { child, ..edge });
        self.index.insert(arrangement.clone(), child);
        self.vertices.push(Vertex {
            arrangement,
            preceding,
            parent_edge: Some(self.edges.len() - 1),
        });
        child
    }

    /// Edges from the root down to `v`, in order.
    pub fn branch(&self, mut v: usize) -> Vec<&TreeEdge> {
        let mut out = Vec::new();
        while let Some(e) = self.vertices[v].parent_edge {
            out.push(&self.edges[e]);
            v = self.edges[e].parent;
        }
        out.reverse();
        out
    }
}
