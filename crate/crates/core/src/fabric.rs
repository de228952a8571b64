//! The uniform vertical-nanowire grid and the routing-resource graph derived
//! from it.
//!
//! Every nanowire column is cut into `gate_levels_per_wire` gate levels of
//! `segments_per_gate_level` slots each. Inside a level the lower half of the
//! slots is n-doped and the upper half p-doped; the SB-ILC of that level joins
//! the two slots on either side of the doping boundary.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::config::{ConfigError, FabricConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GridCoord {
    pub col_x: usize,
    pub col_y: usize,
    pub level: usize,
    pub seg: usize,
}

impl GridCoord {
    pub fn new(col_x: usize, col_y: usize, level: usize, seg: usize) -> Self {
        Self {
            col_x,
            col_y,
            level,
            seg,
        }
    }

    pub fn column(&self) -> (usize, usize) {
        (self.col_x, self.col_y)
    }
}

/// Who holds a nanowire segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SiteOwner {
    pub cell: u32,
    pub site: u16,
}

/// The column lattice plus its segment occupancy.
#[derive(Debug, Clone, PartialEq)]
pub struct NanowireGrid {
    config: Arc<FabricConfig>,
    occupancy: Vec<Option<SiteOwner>>,
    ilc_owner: Vec<Option<u32>>,
    reserved: Vec<bool>,
}

pub fn build_grid(config: FabricConfig) -> Result<NanowireGrid, ConfigError> {
    config.validate()?;
    Ok(NanowireGrid::new(Arc::new(config)))
}

impl NanowireGrid {
    fn new(config: Arc<FabricConfig>) -> Self {
        let cols = config.grid_cols_x * config.grid_cols_y;
        let segs = cols * config.gate_levels_per_wire * config.segments_per_gate_level;
        Self {
            occupancy: vec![None; segs],
            ilc_owner: vec![None; cols * config.gate_levels_per_wire],
            reserved: vec![false; cols],
            config,
        }
    }

    pub fn config(&self) -> &FabricConfig {
        &self.config
    }

    pub fn shared_config(&self) -> Arc<FabricConfig> {
        self.config.clone()
    }

    pub fn cols_x(&self) -> usize {
        self.config.grid_cols_x
    }

    pub fn cols_y(&self) -> usize {
        self.config.grid_cols_y
    }

    pub fn levels(&self) -> usize {
        self.config.gate_levels_per_wire
    }

    pub fn segs_per_level(&self) -> usize {
        self.config.segments_per_gate_level
    }

    pub fn segment_count(&self) -> usize {
        self.occupancy.len()
    }

    pub fn contains(&self, c: &GridCoord) -> bool {
        c.col_x < self.cols_x()
            && c.col_y < self.cols_y()
            && c.level < self.levels()
            && c.seg < self.segs_per_level()
    }

    pub fn column_index(&self, x: usize, y: usize) -> usize {
        y * self.cols_x() + x
    }

    pub fn seg_index(&self, c: &GridCoord) -> usize {
        ((self.column_index(c.col_x, c.col_y) * self.levels()) + c.level) * self.segs_per_level()
            + c.seg
    }

    pub fn occupant(&self, c: &GridCoord) -> Option<SiteOwner> {
        self.occupancy[self.seg_index(c)]
    }

    pub fn set_occupant(&mut self, c: &GridCoord, who: Option<SiteOwner>) {
        let i = self.seg_index(c);
        self.occupancy[i] = who;
    }

    pub fn ilc_owner(&self, x: usize, y: usize, level: usize) -> Option<u32> {
        self.ilc_owner[self.column_index(x, y) * self.levels() + level]
    }

    pub fn set_ilc_owner(&mut self, x: usize, y: usize, level: usize, who: Option<u32>) {
        let i = self.column_index(x, y) * self.levels() + level;
        self.ilc_owner[i] = who;
    }

    /// Marks a column as a heat-dissipating pillar site: no cells, no signal routing.
    pub fn reserve_column(&mut self, x: usize, y: usize) {
        let i = self.column_index(x, y);
        self.reserved[i] = true;
    }

    pub fn is_reserved(&self, x: usize, y: usize) -> bool {
        self.reserved[self.column_index(x, y)]
    }

    pub fn reserved_columns(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for y in 0..self.cols_y() {
            for x in 0..self.cols_x() {
                if self.is_reserved(x, y) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|o| o.is_some()).count()
    }

    /// Iterates every addressable segment coordinate in index order.
    pub fn coords(&self) -> impl Iterator<Item = GridCoord> + '_ {
        let (xs, ys, ls, ss) = (self.cols_x(), self.cols_y(), self.levels(), self.segs_per_level());
        (0..ys).flat_map(move |y| {
            (0..xs).flat_map(move |x| {
                (0..ls).flat_map(move |l| (0..ss).map(move |s| GridCoord::new(x, y, l, s)))
            })
        })
    }
}

/// One unit-capacity routing resource.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Resource {
    Seg(GridCoord),
    /// Horizontal link between the same `(level, seg)` of two 4-adjacent columns;
    /// `a` is always the lower-indexed column.
    Bridge {
        a: (usize, usize),
        b: (usize, usize),
        level: usize,
        seg: usize,
    },
    Coax(GridCoord, usize),
    Ilc {
        col_x: usize,
        col_y: usize,
        level: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ResourceKind {
    Seg,
    Bridge,
    Coax,
    Ilc,
}

impl ResourceKind {
    pub const ALL: [ResourceKind; 4] = [
        ResourceKind::Seg,
        ResourceKind::Bridge,
        ResourceKind::Coax,
        ResourceKind::Ilc,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ResourceKind::Seg => "nanowire_seg",
            ResourceKind::Bridge => "bridge",
            ResourceKind::Coax => "coax",
            ResourceKind::Ilc => "sbilc",
        }
    }
}

impl Resource {
    pub fn kind(&self) -> ResourceKind {
        match self {
            Resource::Seg(_) => ResourceKind::Seg,
            Resource::Bridge { .. } => ResourceKind::Bridge,
            Resource::Coax(..) => ResourceKind::Coax,
            Resource::Ilc { .. } => ResourceKind::Ilc,
        }
    }

    pub fn level(&self) -> usize {
        match *self {
            Resource::Seg(c) | Resource::Coax(c, _) => c.level,
            Resource::Bridge { level, .. } | Resource::Ilc { level, .. } => level,
        }
    }

    /// Columns the resource sits on (two for a Bridge).
    pub fn columns(&self) -> ([(usize, usize); 2], usize) {
        match *self {
            Resource::Seg(c) | Resource::Coax(c, _) => ([c.column(), c.column()], 1),
            Resource::Bridge { a, b, .. } => ([a, b], 2),
            Resource::Ilc { col_x, col_y, .. } => ([(col_x, col_y), (col_x, col_y)], 1),
        }
    }
}

impl fmt::Display for Resource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resource::Seg(c) => write!(f, "seg({},{},{},{})", c.col_x, c.col_y, c.level, c.seg),
            Resource::Bridge { a, b, level, seg } => {
                write!(f, "brg({},{}|{},{},{},{})", a.0, a.1, b.0, b.1, level, seg)
            }
            Resource::Coax(c, k) => write!(
                f,
                "coax({},{},{},{},{})",
                c.col_x, c.col_y, c.level, c.seg, k
            ),
            Resource::Ilc {
                col_x,
                col_y,
                level,
            } => write!(f, "ilc({col_x},{col_y},{level})"),
        }
    }
}

pub type ResourceId = u32;

/// Undirected adjacency over all routing resources of a grid, in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceGraph {
    xs: usize,
    ys: usize,
    levels: usize,
    segs: usize,
    shells: usize,
    pitch_nm: f64,
    segment_pitch_nm: f64,
    n_seg: usize,
    n_coax: usize,
    n_bridge_x: usize,
    n_bridge_y: usize,
    n_ilc: usize,
    offsets: Vec<u32>,
    adjacency: Vec<ResourceId>,
}

pub fn resource_graph(grid: &NanowireGrid) -> ResourceGraph {
    ResourceGraph::build(grid.config())
}

impl ResourceGraph {
    pub fn build(cfg: &FabricConfig) -> Self {
        let (xs, ys, levels, segs, shells) = (
            cfg.grid_cols_x,
            cfg.grid_cols_y,
            cfg.gate_levels_per_wire,
            cfg.segments_per_gate_level,
            cfg.coax_shells,
        );
        let per_col = levels * segs;
        let n_seg = xs * ys * per_col;
        let mut g = ResourceGraph {
            xs,
            ys,
            levels,
            segs,
            shells,
            pitch_nm: cfg.pitch_nm,
            segment_pitch_nm: cfg.segment_pitch_nm,
            n_seg,
            n_coax: n_seg * shells,
            n_bridge_x: xs.saturating_sub(1) * ys * per_col,
            n_bridge_y: xs * ys.saturating_sub(1) * per_col,
            n_ilc: xs * ys * levels,
            offsets: Vec::new(),
            adjacency: Vec::new(),
        };

        let mut edges: Vec<(ResourceId, ResourceId)> = Vec::new();
        let boundary = segs / 2;
        for y in 0..ys {
            for x in 0..xs {
                // vertical continuation along the wire, across level boundaries too
                for v in 0..per_col.saturating_sub(1) {
                    let lo = GridCoord::new(x, y, v / segs, v % segs);
                    let hi = GridCoord::new(x, y, (v + 1) / segs, (v + 1) % segs);
                    edges.push((g.seg_id(&lo), g.seg_id(&hi)));
                    for k in 0..shells {
                        edges.push((g.coax_id(&lo, k), g.coax_id(&hi, k)));
                    }
                }
                for l in 0..levels {
                    let ilc = g.ilc_id(x, y, l);
                    if boundary > 0 {
                        edges.push((ilc, g.seg_id(&GridCoord::new(x, y, l, boundary - 1))));
                    }
                    if boundary < segs {
                        edges.push((ilc, g.seg_id(&GridCoord::new(x, y, l, boundary))));
                    }
                }
            }
        }
        for id in g.n_seg + g.n_coax..g.n_seg + g.n_coax + g.n_bridge_x + g.n_bridge_y {
            let id = id as ResourceId;
            if let Resource::Bridge { a, b, level, seg } = g.resource(id) {
                for end in [a, b] {
                    let c = GridCoord::new(end.0, end.1, level, seg);
                    edges.push((id, g.seg_id(&c)));
                    for k in 0..shells {
                        edges.push((id, g.coax_id(&c, k)));
                    }
                }
            }
        }

        let n = g.node_count();
        let mut degree = vec![0u32; n];
        for &(a, b) in &edges {
            degree[a as usize] += 1;
            degree[b as usize] += 1;
        }
        let mut offsets = vec![0u32; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut adjacency = vec![0; offsets[n] as usize];
        for &(a, b) in &edges {
            adjacency[fill[a as usize] as usize] = b;
            fill[a as usize] += 1;
            adjacency[fill[b as usize] as usize] = a;
            fill[b as usize] += 1;
        }
        for i in 0..n {
            adjacency[offsets[i] as usize..offsets[i + 1] as usize].sort_unstable();
        }
        g.offsets = offsets;
        g.adjacency = adjacency;
        g
    }

    pub fn segs_per_level(&self) -> usize {
        self.segs
    }

    pub fn node_count(&self) -> usize {
        self.n_seg + self.n_coax + self.n_bridge_x + self.n_bridge_y + self.n_ilc
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.len() / 2
    }

    pub fn dims(&self) -> (usize, usize, usize, usize, usize) {
        (self.xs, self.ys, self.levels, self.segs, self.shells)
    }

    pub fn count_of(&self, kind: ResourceKind) -> usize {
        match kind {
            ResourceKind::Seg => self.n_seg,
            ResourceKind::Coax => self.n_coax,
            ResourceKind::Bridge => self.n_bridge_x + self.n_bridge_y,
            ResourceKind::Ilc => self.n_ilc,
        }
    }

    pub fn neighbors(&self, id: ResourceId) -> &[ResourceId] {
        let i = id as usize;
        &self.adjacency[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    pub fn has_edge(&self, a: ResourceId, b: ResourceId) -> bool {
        self.neighbors(a).binary_search(&b).is_ok()
    }

    fn seg_linear(&self, c: &GridCoord) -> usize {
        (((c.col_y * self.xs + c.col_x) * self.levels) + c.level) * self.segs + c.seg
    }

    fn coord_of_linear(&self, mut i: usize) -> GridCoord {
        let seg = i % self.segs;
        i /= self.segs;
        let level = i % self.levels;
        i /= self.levels;
        GridCoord::new(i % self.xs, i / self.xs, level, seg)
    }

    pub fn seg_id(&self, c: &GridCoord) -> ResourceId {
        self.seg_linear(c) as ResourceId
    }

    pub fn coax_id(&self, c: &GridCoord, shell: usize) -> ResourceId {
        (self.n_seg + self.seg_linear(c) * self.shells + shell) as ResourceId
    }

    pub fn ilc_id(&self, x: usize, y: usize, level: usize) -> ResourceId {
        let base = self.n_seg + self.n_coax + self.n_bridge_x + self.n_bridge_y;
        (base + (y * self.xs + x) * self.levels + level) as ResourceId
    }

    /// Bridge between two 4-adjacent columns, if it exists.
    pub fn bridge_id(
        &self,
        a: (usize, usize),
        b: (usize, usize),
        level: usize,
        seg: usize,
    ) -> Option<ResourceId> {
        let (a, b) = if (a.1, a.0) <= (b.1, b.0) { (a, b) } else { (b, a) };
        if b.0 >= self.xs || b.1 >= self.ys || level >= self.levels || seg >= self.segs {
            return None;
        }
        let slot = level * self.segs + seg;
        let per_col = self.levels * self.segs;
        let base = self.n_seg + self.n_coax;
        if a.1 == b.1 && a.0 + 1 == b.0 {
            let i = (a.1 * (self.xs - 1) + a.0) * per_col + slot;
            Some((base + i) as ResourceId)
        } else if a.0 == b.0 && a.1 + 1 == b.1 {
            let i = (a.1 * self.xs + a.0) * per_col + slot;
            Some((base + self.n_bridge_x + i) as ResourceId)
        } else {
            None
        }
    }

    pub fn id_of(&self, r: &Resource) -> Option<ResourceId> {
        let in_grid = |c: &GridCoord| {
            c.col_x < self.xs && c.col_y < self.ys && c.level < self.levels && c.seg < self.segs
        };
        match r {
            Resource::Seg(c) => in_grid(c).then(|| self.seg_id(c)),
            Resource::Coax(c, k) => (in_grid(c) && *k < self.shells).then(|| self.coax_id(c, *k)),
            Resource::Bridge { a, b, level, seg } => self.bridge_id(*a, *b, *level, *seg),
            Resource::Ilc {
                col_x,
                col_y,
                level,
            } => (*col_x < self.xs && *col_y < self.ys && *level < self.levels)
                .then(|| self.ilc_id(*col_x, *col_y, *level)),
        }
    }

    pub fn resource(&self, id: ResourceId) -> Resource {
        let mut i = id as usize;
        if i < self.n_seg {
            return Resource::Seg(self.coord_of_linear(i));
        }
        i -= self.n_seg;
        if i < self.n_coax {
            return Resource::Coax(self.coord_of_linear(i / self.shells), i % self.shells);
        }
        i -= self.n_coax;
        let per_col = self.levels * self.segs;
        if i < self.n_bridge_x {
            let slot = i % per_col;
            let c = i / per_col;
            let (x, y) = (c % (self.xs - 1), c / (self.xs - 1));
            return Resource::Bridge {
                a: (x, y),
                b: (x + 1, y),
                level: slot / self.segs,
                seg: slot % self.segs,
            };
        }
        i -= self.n_bridge_x;
        if i < self.n_bridge_y {
            let slot = i % per_col;
            let c = i / per_col;
            let (x, y) = (c % self.xs, c / self.xs);
            return Resource::Bridge {
                a: (x, y),
                b: (x, y + 1),
                level: slot / self.segs,
                seg: slot % self.segs,
            };
        }
        i -= self.n_bridge_y;
        let level = i % self.levels;
        let c = i / self.levels;
        Resource::Ilc {
            col_x: c % self.xs,
            col_y: c / self.xs,
            level,
        }
    }

    pub fn kind(&self, id: ResourceId) -> ResourceKind {
        let i = id as usize;
        if i < self.n_seg {
            ResourceKind::Seg
        } else if i < self.n_seg + self.n_coax {
            ResourceKind::Coax
        } else if i < self.n_seg + self.n_coax + self.n_bridge_x + self.n_bridge_y {
            ResourceKind::Bridge
        } else {
            ResourceKind::Ilc
        }
    }

    /// Physical conductor length of a resource, micrometers.
    pub fn length_um(&self, id: ResourceId) -> f64 {
        match self.kind(id) {
            ResourceKind::Bridge => self.pitch_nm * 1e-3,
            _ => self.segment_pitch_nm * 1e-3,
        }
    }

    pub fn name(&self, id: ResourceId) -> String {
        self.resource(id).to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(x: usize, y: usize, l: usize, s: usize, k: usize) -> FabricConfig {
        FabricConfig {
            grid_cols_x: x,
            grid_cols_y: y,
            gate_levels_per_wire: l,
            segments_per_gate_level: s,
            coax_shells: k,
            ..FabricConfig::default()
        }
    }

    #[test]
    fn grid_segment_counts() {
        assert_eq!(build_grid(cfg(2, 2, 2, 4, 2)).unwrap().segment_count(), 32);
        assert_eq!(build_grid(cfg(1, 1, 1, 1, 2)).unwrap().segment_count(), 1);
        let err = build_grid(cfg(0, 1, 1, 1, 2)).unwrap_err();
        assert_eq!(err, ConfigError::InvalidConfig("grid_cols_x".into()));
    }

    #[test]
    fn grid_starts_empty() {
        let g = build_grid(cfg(2, 3, 2, 4, 1)).unwrap();
        assert_eq!(g.occupied_count(), 0);
        assert!(g.coords().all(|c| g.occupant(&c).is_none()));
        assert_eq!(g.coords().count(), g.segment_count());
    }

    #[test]
    fn tiny_graph_node_count() {
        let g = resource_graph(&build_grid(cfg(1, 1, 1, 2, 1)).unwrap());
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.count_of(ResourceKind::Bridge), 0);
    }

    #[test]
    fn single_adjacent_pair_has_one_bridge() {
        let g = resource_graph(&build_grid(cfg(2, 1, 1, 1, 0)).unwrap());
        assert_eq!(g.count_of(ResourceKind::Bridge), 1);
        let b = g.bridge_id((0, 0), (1, 0), 0, 0).unwrap();
        assert_eq!(g.neighbors(b).len(), 2);
    }

    #[test]
    fn ids_round_trip_through_resources() {
        let g = ResourceGraph::build(&cfg(3, 2, 2, 3, 2));
        for id in 0..g.node_count() as ResourceId {
            let r = g.resource(id);
            assert_eq!(g.id_of(&r), Some(id), "{r}");
        }
    }

    #[test]
    fn canonical_names() {
        let g = ResourceGraph::build(&cfg(2, 2, 2, 4, 2));
        let c = GridCoord::new(1, 0, 1, 3);
        assert_eq!(g.name(g.seg_id(&c)), "seg(1,0,1,3)");
        assert_eq!(g.name(g.coax_id(&c, 1)), "coax(1,0,1,3,1)");
        assert_eq!(g.name(g.ilc_id(0, 1, 0)), "ilc(0,1,0)");
        let b = g.bridge_id((0, 1), (0, 0), 1, 2).unwrap();
        assert_eq!(g.name(b), "brg(0,0|0,1,1,2)");
    }

    #[test]
    fn no_diagonal_bridges() {
        let g = ResourceGraph::build(&cfg(2, 2, 1, 1, 0));
        assert!(g.bridge_id((0, 0), (1, 1), 0, 0).is_none());
        assert!(g.bridge_id((0, 0), (0, 0), 0, 0).is_none());
    }
}
