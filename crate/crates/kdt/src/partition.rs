//! Quad-tree subdivision of a fixed root square into leaf blocks.
//!
//! A node splits into four congruent children (SW, SE, NW, NE) until every
//! leaf holds at most `threshold` points. A point exactly on a dividing
//! line belongs to the child on the higher-coordinate side, which makes
//! ownership total and deterministic. Leaves carry links to every leaf
//! they share a positive-length boundary segment with, per direction.
//!
//! Leaf squares also carry integer grid coordinates `(depth, ix, iy)`;
//! adjacency and tree-routing hop counts are computed on those, immune to
//! floating-point rounding of the square corners.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::triangulation::VertexId;
use serde::{Deserialize, Serialize};

/// Splits deeper than this mean more than `threshold` points share a
/// position (or nearly so); the division reports duplicate overflow.
pub const MAX_DEPTH: u32 = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BlockId(pub u32);

impl BlockId {
    pub const NONE: BlockId = BlockId(u32::MAX);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Axis direction of a move or a neighbor link.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dir {
    Left,
    Right,
    Up,
    Down,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::Left, Dir::Right, Dir::Up, Dir::Down];

    pub fn index(self) -> usize {
        match self {
            Dir::Left => 0,
            Dir::Right => 1,
            Dir::Up => 2,
            Dir::Down => 3,
        }
    }
}

/// An axis-aligned square given by center and half-width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Square {
    pub cx: f64,
    pub cy: f64,
    pub half: f64,
}

impl Square {
    pub fn contains_closed(&self, p: Point) -> bool {
        p.x >= self.cx - self.half
            && p.x <= self.cx + self.half
            && p.y >= self.cy - self.half
            && p.y <= self.cy + self.half
    }

    /// Child quadrant of `p`: 0 SW, 1 SE, 2 NW, 3 NE. Points on a center
    /// line go to the higher-coordinate side.
    pub fn quadrant(&self, p: Point) -> usize {
        let east = p.x >= self.cx;
        let north = p.y >= self.cy;
        match (north, east) {
            (false, false) => 0,
            (false, true) => 1,
            (true, false) => 2,
            (true, true) => 3,
        }
    }

    pub fn child(&self, q: usize) -> Square {
        let h = self.half / 2.0;
        let (sx, sy) = match q {
            0 => (-1.0, -1.0),
            1 => (1.0, -1.0),
            2 => (-1.0, 1.0),
            _ => (1.0, 1.0),
        };
        Square {
            cx: self.cx + sx * h,
            cy: self.cy + sy * h,
            half: h,
        }
    }

    /// Smallest square covering all points, centered on their bounding box.
    pub fn covering(points: &[Point]) -> Result<Square> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        let (mut xlo, mut xhi) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY);
        for p in points {
            p.check_finite()?;
            xlo = xlo.min(p.x);
            xhi = xhi.max(p.x);
            ylo = ylo.min(p.y);
            yhi = yhi.max(p.y);
        }
        Ok(Square {
            cx: (xlo + xhi) / 2.0,
            cy: (ylo + yhi) / 2.0,
            half: ((xhi - xlo) / 2.0).max((yhi - ylo) / 2.0),
        })
    }

    pub fn padded(&self, pad: f64) -> Square {
        Square {
            cx: self.cx,
            cy: self.cy,
            half: self.half + pad,
        }
    }
}

#[derive(Clone, Debug)]
enum NodeKind {
    Internal([usize; 4]),
    Leaf(usize),
}

#[derive(Clone, Debug)]
struct Node {
    square: Square,
    kind: NodeKind,
}

/// A quad-tree leaf: the unit of parallel work.
#[derive(Clone, Debug)]
pub struct Block {
    pub id: BlockId,
    pub square: Square,
    pub depth: u32,
    pub ix: u64,
    pub iy: u64,
    pub owned: Vec<VertexId>,
    /// Boundary-sharing leaves per direction, ascending block id.
    pub neighbors: [Vec<BlockId>; 4],
}

impl Block {
    pub fn neighbors_in(&self, dir: Dir) -> &[BlockId] {
        &self.neighbors[dir.index()]
    }

    pub fn is_neighbor(&self, other: BlockId) -> bool {
        self.neighbors.iter().any(|list| list.contains(&other))
    }
}

#[derive(Clone, Debug)]
pub struct QuadTree {
    nodes: Vec<Node>,
    pub blocks: Vec<Block>,
    pub threshold: usize,
}

/// JSON form of the partition: one record per leaf.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionDump {
    pub threshold: usize,
    pub blocks: Vec<BlockDump>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockDump {
    pub id: u32,
    pub square: [f64; 3],
    pub owned: usize,
    pub left: Vec<u32>,
    pub right: Vec<u32>,
    pub up: Vec<u32>,
    pub down: Vec<u32>,
}

/// Divide the smallest covering square until every leaf holds at most
/// `threshold` points.
pub fn quad_tree_division(points: &[(VertexId, Point)], threshold: usize) -> Result<QuadTree> {
    let coords: Vec<Point> = points.iter().map(|&(_, p)| p).collect();
    let root = Square::covering(&coords)?;
    quad_tree_division_with_root(root, points, threshold)
}

/// Same division under a caller-fixed root square (the kinetic loop keeps
/// one padded root for the whole run).
pub fn quad_tree_division_with_root(
    root: Square,
    points: &[(VertexId, Point)],
    threshold: usize,
) -> Result<QuadTree> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    if threshold == 0 {
        return Err(Error::InvalidConfig("threshold must be at least 1".into()));
    }
    let mut items: Vec<(VertexId, Point)> = points.to_vec();
    items.sort_by_key(|&(v, _)| v);
    for &(_, p) in &items {
        if !root.contains_closed(p) {
            return Err(Error::OutOfDomain { x: p.x, y: p.y });
        }
    }

    let mut tree = QuadTree {
        nodes: Vec::new(),
        blocks: Vec::new(),
        threshold,
    };
    tree.build(root, 0, 0, 0, items)?;
    tree.link_neighbors();
    Ok(tree)
}

impl QuadTree {
    fn build(
        &mut self,
        square: Square,
        depth: u32,
        ix: u64,
        iy: u64,
        items: Vec<(VertexId, Point)>,
    ) -> Result<usize> {
        let node_idx = self.nodes.len();
        self.nodes.push(Node {
            square,
            kind: NodeKind::Leaf(usize::MAX),
        });
        if items.len() <= self.threshold {
            let id = BlockId(self.blocks.len() as u32);
            self.blocks.push(Block {
                id,
                square,
                depth,
                ix,
                iy,
                owned: items.into_iter().map(|(v, _)| v).collect(),
                neighbors: Default::default(),
            });
            self.nodes[node_idx].kind = NodeKind::Leaf(id.index());
            return Ok(node_idx);
        }
        if depth >= MAX_DEPTH {
            return Err(Error::DuplicateOverflow { cap: MAX_DEPTH });
        }
        let mut parts: [Vec<(VertexId, Point)>; 4] = Default::default();
        for (v, p) in items {
            parts[square.quadrant(p)].push((v, p));
        }
        let mut children = [0usize; 4];
        for (q, part) in parts.into_iter().enumerate() {
            let (dx, dy) = [(0, 0), (1, 0), (0, 1), (1, 1)][q];
            children[q] = self.build(square.child(q), depth + 1, 2 * ix + dx, 2 * iy + dy, part)?;
        }
        self.nodes[node_idx].kind = NodeKind::Internal(children);
        Ok(node_idx)
    }

    pub fn root_square(&self) -> Square {
        self.nodes[0].square
    }

    /// Children of an internal node (root is node 0); None for leaves.
    pub(crate) fn node_children(&self, node: usize) -> Option<[usize; 4]> {
        match self.nodes[node].kind {
            NodeKind::Internal(children) => Some(children),
            NodeKind::Leaf(_) => None,
        }
    }

    pub(crate) fn node_block(&self, node: usize) -> BlockId {
        match self.nodes[node].kind {
            NodeKind::Leaf(b) => BlockId(b as u32),
            NodeKind::Internal(_) => unreachable!("not a leaf"),
        }
    }

    pub(crate) fn node_square(&self, node: usize) -> Square {
        self.nodes[node].square
    }

    pub fn block(&self, id: BlockId) -> &Block {
        &self.blocks[id.index()]
    }

    pub fn block_mut(&mut self, id: BlockId) -> &mut Block {
        &mut self.blocks[id.index()]
    }

    pub fn depth(&self) -> u32 {
        self.blocks.iter().map(|b| b.depth).max().unwrap_or(0)
    }

    /// Leaf owning `p` under the boundary rule.
    pub fn find_block(&self, p: Point) -> Result<BlockId> {
        if !self.root_square().contains_closed(p) {
            return Err(Error::OutOfDomain { x: p.x, y: p.y });
        }
        let mut node = &self.nodes[0];
        loop {
            match node.kind {
                NodeKind::Leaf(b) => return Ok(BlockId(b as u32)),
                NodeKind::Internal(children) => {
                    node = &self.nodes[children[node.square.quadrant(p)]];
                }
            }
        }
    }

    /// Integer x/y ranges of a leaf at the given common depth.
    fn ranges_at(&self, id: BlockId, depth: u32) -> (u64, u64, u64, u64) {
        let b = self.block(id);
        let shift = depth - b.depth;
        (
            b.ix << shift,
            (b.ix + 1) << shift,
            b.iy << shift,
            (b.iy + 1) << shift,
        )
    }

    fn link_neighbors(&mut self) {
        let max_depth = self.depth();
        let n = self.blocks.len();
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (BlockId(i as u32), BlockId(j as u32));
                let (ax0, ax1, ay0, ay1) = self.ranges_at(a, max_depth);
                let (bx0, bx1, by0, by1) = self.ranges_at(b, max_depth);
                let x_overlap = ax0.max(bx0) < ax1.min(bx1);
                let y_overlap = ay0.max(by0) < ay1.min(by1);
                if ax1 == bx0 && y_overlap {
                    self.blocks[i].neighbors[Dir::Right.index()].push(b);
                    self.blocks[j].neighbors[Dir::Left.index()].push(a);
                } else if bx1 == ax0 && y_overlap {
                    self.blocks[i].neighbors[Dir::Left.index()].push(b);
                    self.blocks[j].neighbors[Dir::Right.index()].push(a);
                } else if ay1 == by0 && x_overlap {
                    self.blocks[i].neighbors[Dir::Up.index()].push(b);
                    self.blocks[j].neighbors[Dir::Down.index()].push(a);
                } else if by1 == ay0 && x_overlap {
                    self.blocks[i].neighbors[Dir::Down.index()].push(b);
                    self.blocks[j].neighbors[Dir::Up.index()].push(a);
                }
            }
        }
    }

    /// Move ownership of `v` between leaves and report the routing cost:
    /// the tree-path length between the leaves, or 1 hop with direct
    /// neighbor links (0 if the move stays in its block either way).
    pub fn transfer_point(
        &mut self,
        v: VertexId,
        from: BlockId,
        to: BlockId,
        routing: Routing,
    ) -> Result<u32> {
        let owned = &mut self.blocks[from.index()].owned;
        let pos = owned
            .iter()
            .position(|&u| u == v)
            .ok_or(Error::InvalidTransfer {
                vertex: v.0,
                from: from.0,
            })?;
        if from == to {
            return Ok(0);
        }
        owned.remove(pos);
        self.blocks[to.index()].owned.push(v);
        Ok(self.hops_between(from, to, routing))
    }

    pub fn hops_between(&self, from: BlockId, to: BlockId, routing: Routing) -> u32 {
        if from == to {
            return 0;
        }
        match routing {
            Routing::Direct => 1,
            Routing::Tree => {
                let a = self.block(from);
                let b = self.block(to);
                let mut k = a.depth.min(b.depth);
                loop {
                    let same_x = (a.ix >> (a.depth - k)) == (b.ix >> (b.depth - k));
                    let same_y = (a.iy >> (a.depth - k)) == (b.iy >> (b.depth - k));
                    if same_x && same_y {
                        return (a.depth - k) + (b.depth - k);
                    }
                    k -= 1;
                }
            }
        }
    }

    /// True iff some leaf exceeds the threshold or some owned point no
    /// longer maps to its owner under the boundary rule.
    pub fn needs_repartition(&self, pos: impl Fn(VertexId) -> Point) -> bool {
        for block in &self.blocks {
            if block.owned.len() > self.threshold {
                return true;
            }
            for &v in &block.owned {
                match self.find_block(pos(v)) {
                    Ok(id) if id == block.id => {}
                    _ => return true,
                }
            }
        }
        false
    }

    pub fn dump(&self) -> PartitionDump {
        PartitionDump {
            threshold: self.threshold,
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockDump {
                    id: b.id.0,
                    square: [b.square.cx, b.square.cy, b.square.half],
                    owned: b.owned.len(),
                    left: b.neighbors[0].iter().map(|n| n.0).collect(),
                    right: b.neighbors[1].iter().map(|n| n.0).collect(),
                    up: b.neighbors[2].iter().map(|n| n.0).collect(),
                    down: b.neighbors[3].iter().map(|n| n.0).collect(),
                })
                .collect(),
        }
    }
}

/// How cross-block point hand-offs are priced: hop counts along the tree,
/// or a single hop over direct neighbor links.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Routing {
    Tree,
    Direct,
}

impl std::str::FromStr for Routing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tree" => Ok(Routing::Tree),
            "direct" => Ok(Routing::Direct),
            other => Err(Error::InvalidConfig(format!("unknown routing '{other}'"))),
        }
    }
}

impl std::fmt::Display for Routing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Routing::Tree => "tree",
            Routing::Direct => "direct",
        })
    }
}
