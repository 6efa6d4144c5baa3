use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{aspect_ratio, dist, Point, Rect, Segment};

/// Largest aspect ratio a shrunk or cut rectangle may have.
pub const MAX_ASPECT_RATIO: f64 = 5.0;
/// Below this depth nodes fall back to the partition process.
pub const MAX_DEPTH: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Process {
    /// Shrink to the padded bounding box of the local facilities, then cut.
    SubRectCut,
    Partition,
    Leaf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissectionNode {
    pub rect: Rect,
    pub process: Process,
    /// Indices into `L`.
    pub local: Vec<usize>,
    /// Indices into `G`.
    pub global: Vec<usize>,
    /// The shrunk rectangle `B''` that was cut.
    pub sub_rect: Option<Rect>,
    pub cut: Option<Segment>,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    pub depth: usize,
    /// Created by the partition process; its rect is the bounding box of its
    /// facilities.
    pub partition_part: bool,
    pub label: usize,
    pub is_region_node: bool,
}

/// Arena of nodes; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissectionTree {
    pub epsilon: f64,
    pub nodes: Vec<DissectionNode>,
    /// For every `G` facility, the index of its nearest `L` facility.
    pub nearest_local: Vec<usize>,
}

impl DissectionTree {
    pub fn root(&self) -> &DissectionNode {
        &self.nodes[0]
    }

    pub fn leaves(&self) -> impl Iterator<Item = (usize, &DissectionNode)> {
        self.nodes.iter().enumerate().filter(|(_, n)| n.children.is_empty())
    }

    /// Every rectangle produced by shrinking or cutting.
    pub fn shaped_rects(&self) -> Vec<Rect> {
        let mut out = Vec::new();
        for n in &self.nodes {
            if let Some(r) = n.sub_rect {
                out.push(r);
                out.extend(n.children.iter().map(|&c| self.nodes[c].rect));
            }
        }
        out
    }

    pub fn is_ancestor(&self, ancestor: usize, mut node: usize) -> bool {
        loop {
            if node == ancestor {
                return true;
            }
            match self.nodes[node].parent {
                Some(p) => node = p,
                None => return false,
            }
        }
    }
}

/// `1/(2 eps^2)`, the size at which nodes stop splitting.
pub(crate) fn half_inverse_square(epsilon: f64) -> f64 {
    0.5 / (epsilon * epsilon)
}

pub(crate) fn nearest_index(points: &[Point], q: Point) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, p) in points.iter().enumerate() {
        let d = dist(*p, q);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

struct Builder<'a> {
    local: &'a [Point],
    global: &'a [Point],
    epsilon: f64,
    nearest_local: Vec<usize>,
    nodes: Vec<DissectionNode>,
    rng: ChaCha8Rng,
}

impl Builder<'_> {
    fn push(&mut self, node: DissectionNode) -> usize {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn leaf(rect: Rect, local: Vec<usize>, global: Vec<usize>, parent: Option<usize>, depth: usize) -> DissectionNode {
        DissectionNode {
            rect,
            process: Process::Leaf,
            local,
            global,
            sub_rect: None,
            cut: None,
            children: Vec::new(),
            parent,
            depth,
            partition_part: false,
            label: 0,
            is_region_node: false,
        }
    }

    fn build(&mut self, id: usize) -> Result<()> {
        let (rect, depth) = (self.nodes[id].rect, self.nodes[id].depth);
        let total = self.nodes[id].local.len() + self.nodes[id].global.len();
        if (total as f64) < half_inverse_square(self.epsilon) {
            return Ok(());
        }
        let local_pts: Vec<Point> = self.nodes[id].local.iter().map(|&i| self.local[i]).collect();
        let bbox = Rect::bounding(local_pts.iter().copied());
        let many_local = self.nodes[id].local.len() as f64 > 0.5 / self.epsilon;
        match bbox {
            Some(b) if many_local && b.longest_side() > 0.0 && depth < MAX_DEPTH => {
                self.split(id, rect, b)
            }
            _ => {
                self.partition(id);
                Ok(())
            }
        }
    }

    fn split(&mut self, id: usize, rect: Rect, bbox: Rect) -> Result<()> {
        let pad = bbox.longest_side() / 3.0;
        let padded = Rect {
            xmin: bbox.xmin - pad,
            ymin: bbox.ymin - pad,
            xmax: bbox.xmax + pad,
            ymax: bbox.ymax + pad,
        };
        let sub = padded
            .intersect(&rect)
            .ok_or_else(|| Error::Degenerate(format!("empty shrunk rectangle in {rect:?}")))?;
        let s = sub.longest_side();
        let vertical = sub.width() >= sub.height();
        let u: f64 = self.rng.random();
        let (lo, cut) = if vertical {
            (sub.xmin, sub.xmin + s / 3.0 + u * s / 3.0)
        } else {
            (sub.ymin, sub.ymin + s / 3.0 + u * s / 3.0)
        };
        debug_assert!(cut >= lo + s / 3.0 && cut <= lo + 2.0 * s / 3.0);
        let (b1, b2, segment) = if vertical {
            (
                Rect { xmax: cut, ..sub },
                Rect { xmin: cut, ..sub },
                Segment::new(Point::new(cut, sub.ymin), Point::new(cut, sub.ymax)),
            )
        } else {
            (
                Rect { ymax: cut, ..sub },
                Rect { ymin: cut, ..sub },
                Segment::new(Point::new(sub.xmin, cut), Point::new(sub.xmax, cut)),
            )
        };
        for r in [sub, b1, b2] {
            let a = aspect_ratio(&r)?;
            if a > MAX_ASPECT_RATIO + 1e-9 {
                return Err(Error::Degenerate(format!("rectangle {r:?} has aspect ratio {a}")));
            }
        }

        let below = |p: Point| if vertical { p.x < cut } else { p.y < cut };
        let (l1, l2): (Vec<usize>, Vec<usize>) = self.nodes[id]
            .local
            .iter()
            .partition(|&&i| below(self.local[i]));
        let mut in_first = vec![false; self.local.len()];
        for &i in &l1 {
            in_first[i] = true;
        }
        let (g1, g2): (Vec<usize>, Vec<usize>) = self.nodes[id].global.iter().partition(|&&g| {
            in_first[self.nearest_local[g]] && !b2.contains(self.global[g])
        });

        let depth = self.nodes[id].depth + 1;
        let c1 = self.push(Self::leaf(b1, l1, g1, Some(id), depth));
        let c2 = self.push(Self::leaf(b2, l2, g2, Some(id), depth));
        let node = &mut self.nodes[id];
        node.process = Process::SubRectCut;
        node.sub_rect = Some(sub);
        node.cut = Some(segment);
        node.children = vec![c1, c2];
        self.build(c1)?;
        self.build(c2)
    }

    /// Contiguous chunks of the facilities sorted by `x`, then `y`, each
    /// holding between `1/(2 eps^2)` and `1/eps^2` of them.
    fn partition(&mut self, id: usize) {
        #[derive(Clone, Copy)]
        enum Item {
            L(usize),
            G(usize),
        }
        let at = |it: Item| match it {
            Item::L(i) => self.local[i],
            Item::G(i) => self.global[i],
        };
        let mut items: Vec<Item> = self.nodes[id]
            .local
            .iter()
            .map(|&i| Item::L(i))
            .chain(self.nodes[id].global.iter().map(|&i| Item::G(i)))
            .collect();
        items.sort_by(|&a, &b| {
            let (pa, pb) = (at(a), at(b));
            pa.x.total_cmp(&pb.x).then(pa.y.total_cmp(&pb.y))
        });
        let cap = ((1.0 / (self.epsilon * self.epsilon)) + 1e-9).floor().max(1.0) as usize;
        let parts = items.len().div_ceil(cap);
        let (base, extra) = (items.len() / parts, items.len() % parts);
        let depth = self.nodes[id].depth + 1;
        let mut start = 0;
        let mut children = Vec::with_capacity(parts);
        for k in 0..parts {
            let len = base + usize::from(k < extra);
            let chunk = &items[start..start + len];
            start += len;
            let rect = Rect::bounding(chunk.iter().map(|&it| at(it))).expect("nonempty chunk");
            let (mut l, mut g) = (Vec::new(), Vec::new());
            for &it in chunk {
                match it {
                    Item::L(i) => l.push(i),
                    Item::G(i) => g.push(i),
                }
            }
            l.sort_unstable();
            g.sort_unstable();
            let mut leaf = Self::leaf(rect, l, g, Some(id), depth);
            leaf.partition_part = true;
            children.push(self.push(leaf));
        }
        let node = &mut self.nodes[id];
        node.process = Process::Partition;
        node.children = children;
    }
}

/// Randomized adaptive dissection of the facility sets `L` (`local`) and `G`
/// (`global`), seeded by `seed`. Labels and region nodes are filled in.
pub fn adaptive_dissection(
    local: &[Point],
    global: &[Point],
    epsilon: f64,
    seed: u64,
) -> Result<DissectionTree> {
    if local.is_empty() {
        return Err(Error::validation("the local facility set L must be nonempty"));
    }
    if !(epsilon > 0.0 && 1.0 / (epsilon * epsilon) >= 2.0 - 1e-9) {
        return Err(Error::validation(format!(
            "epsilon must satisfy 0 < eps and 1/eps^2 >= 2, got {epsilon}"
        )));
    }
    if let Some(p) = local.iter().chain(global).find(|p| !p.is_finite()) {
        return Err(Error::validation(format!("non-finite facility {p:?}")));
    }
    let root_rect = Rect::bounding_square(local.iter().chain(global).copied()).expect("nonempty");
    let nearest_local = global.iter().map(|&g| nearest_index(local, g)).collect();
    let mut b = Builder {
        local,
        global,
        epsilon,
        nearest_local,
        nodes: Vec::new(),
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    b.push(Builder::leaf(
        root_rect,
        (0..local.len()).collect(),
        (0..global.len()).collect(),
        None,
        0,
    ));
    b.build(0)?;
    let mut tree = DissectionTree {
        epsilon,
        nodes: b.nodes,
        nearest_local: b.nearest_local,
    };
    label_nodes(&mut tree);
    Ok(tree)
}

/// Bottom-up labels: a leaf counts its facilities, an inner node sums its
/// children, and a node whose label exceeds `1/(2 eps^2)` becomes a region
/// node with label reset to 0. The root is always a region node.
fn label_nodes(tree: &mut DissectionTree) {
    let limit = half_inverse_square(tree.epsilon);
    // Children always have larger indices than their parent.
    for id in (0..tree.nodes.len()).rev() {
        let node = &tree.nodes[id];
        let label = if node.children.is_empty() {
            node.local.len() + node.global.len()
        } else {
            node.children.iter().map(|&c| tree.nodes[c].label).sum()
        };
        let fired = label as f64 > limit;
        let node = &mut tree.nodes[id];
        node.is_region_node = fired;
        node.label = if fired { 0 } else { label };
    }
    tree.nodes[0].is_region_node = true;
    tree.nodes[0].label = 0;
}
