//! Standard cells as nanowire-stack templates.
//!
//! A template occupies one gate level of one column. Transistor sites are
//! addressed relative to the level's doping boundary: offset `-1` is the
//! topmost n-type slot, offset `0` the lowest p-type slot. Static-CMOS gates
//! grow their pull-down stack downward and their pull-up network upward from
//! the boundary, so the output node always sits on the SB-ILC.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::fabric::{GridCoord, NanowireGrid, SiteOwner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CellKind {
    #[serde(rename = "INV")]
    Inv,
    #[serde(rename = "NAND2")]
    Nand2,
    #[serde(rename = "NAND3")]
    Nand3,
    #[serde(rename = "NAND4")]
    Nand4,
    #[serde(rename = "NOR2")]
    Nor2,
    #[serde(rename = "NOR3")]
    Nor3,
    #[serde(rename = "SRAM6T")]
    Sram6t,
}

impl CellKind {
    pub const ALL: [CellKind; 7] = [
        CellKind::Inv,
        CellKind::Nand2,
        CellKind::Nand3,
        CellKind::Nand4,
        CellKind::Nor2,
        CellKind::Nor3,
        CellKind::Sram6t,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CellKind::Inv => "INV",
            CellKind::Nand2 => "NAND2",
            CellKind::Nand3 => "NAND3",
            CellKind::Nand4 => "NAND4",
            CellKind::Nor2 => "NOR2",
            CellKind::Nor3 => "NOR3",
            CellKind::Sram6t => "SRAM6T",
        }
    }

    pub fn is_state_element(&self) -> bool {
        matches!(self, CellKind::Sram6t)
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown cell `{0}`")]
pub struct UnknownCell(pub String);

impl FromStr for CellKind {
    type Err = UnknownCell;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CellKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownCell(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    P,
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SiteRole {
    PullUp,
    PullDown,
    Access,
}

/// Gate signal of a transistor: a cell pin or a cell-internal node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GateDrive {
    Pin(String),
    Internal(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransistorSite {
    pub column_offset: usize,
    pub region: Region,
    /// Slot offset from the doping boundary (negative = n side).
    pub seg_offset: i32,
    pub role: SiteRole,
    pub gate: GateDrive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Network {
    Series,
    Parallel,
    CrossCoupled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InternalLink {
    Ilc { column_offset: usize },
    Bridge { from_column: usize, to_column: usize, seg_offset: i32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PinDirection {
    Input,
    Output,
    Power,
}

/// Where a pin is anchored inside the level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PinAnchor {
    Site(usize),
    /// Lowest p-type slot, on the SB-ILC.
    Boundary,
    Top,
    Bottom,
}

/// A point a route must reach to contact a pin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    /// Innermost coaxial shell around the site's gate.
    SiteGate(usize),
    Ilc,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinDef {
    pub direction: PinDirection,
    pub anchor: PinAnchor,
    pub terminals: Vec<Terminal>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Logic {
    Nand(u8),
    Nor(u8),
    StateElement,
}

impl Logic {
    pub fn eval(&self, inputs: &[bool]) -> Option<bool> {
        match self {
            Logic::Nand(_) => Some(!inputs.iter().all(|&b| b)),
            Logic::Nor(_) => Some(!inputs.iter().any(|&b| b)),
            Logic::StateElement => None,
        }
    }

    /// Bit-parallel evaluation over 64 vectors at once.
    pub fn eval_words(&self, inputs: &[u64]) -> Option<u64> {
        match self {
            Logic::Nand(_) => Some(!inputs.iter().fold(!0u64, |acc, w| acc & w)),
            Logic::Nor(_) => Some(!inputs.iter().fold(0u64, |acc, w| acc | w)),
            Logic::StateElement => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellTemplate {
    pub kind: CellKind,
    pub columns_used: usize,
    pub sites: Vec<TransistorSite>,
    pub pull_up: Network,
    pub pull_down: Network,
    pub internal_links: Vec<InternalLink>,
    pub pins: BTreeMap<String, PinDef>,
    pub logic: Logic,
}

pub const INPUT_PIN_NAMES: [&str; 4] = ["A", "B", "C", "D"];

fn static_cmos(kind: CellKind, fan_in: usize, nand: bool) -> CellTemplate {
    let mut sites = Vec::new();
    let mut pins = BTreeMap::new();
    for (i, name) in INPUT_PIN_NAMES.iter().take(fan_in).enumerate() {
        let n_site = sites.len();
        sites.push(TransistorSite {
            column_offset: 0,
            region: Region::N,
            seg_offset: -(i as i32) - 1,
            role: SiteRole::PullDown,
            gate: GateDrive::Pin(name.to_string()),
        });
        let p_site = sites.len();
        sites.push(TransistorSite {
            column_offset: 0,
            region: Region::P,
            seg_offset: i as i32,
            role: SiteRole::PullUp,
            gate: GateDrive::Pin(name.to_string()),
        });
        pins.insert(
            name.to_string(),
            PinDef {
                direction: PinDirection::Input,
                anchor: PinAnchor::Site(n_site),
                terminals: vec![Terminal::SiteGate(n_site), Terminal::SiteGate(p_site)],
            },
        );
    }
    pins.insert(
        "Y".to_string(),
        PinDef {
            direction: PinDirection::Output,
            anchor: PinAnchor::Boundary,
            terminals: vec![Terminal::Ilc],
        },
    );
    insert_rails(&mut pins);
    let (pull_up, pull_down) = if nand {
        (Network::Parallel, Network::Series)
    } else {
        (Network::Series, Network::Parallel)
    };
    CellTemplate {
        kind,
        columns_used: 1,
        sites,
        pull_up,
        pull_down,
        internal_links: vec![InternalLink::Ilc { column_offset: 0 }],
        pins,
        logic: if nand {
            Logic::Nand(fan_in as u8)
        } else {
            Logic::Nor(fan_in as u8)
        },
    }
}

fn insert_rails(pins: &mut BTreeMap<String, PinDef>) {
    pins.insert(
        "VDD".to_string(),
        PinDef {
            direction: PinDirection::Power,
            anchor: PinAnchor::Top,
            terminals: Vec::new(),
        },
    );
    pins.insert(
        "GND".to_string(),
        PinDef {
            direction: PinDirection::Power,
            anchor: PinAnchor::Bottom,
            terminals: Vec::new(),
        },
    );
}

fn sram6t() -> CellTemplate {
    let site = |region, seg_offset, role, gate: GateDrive| TransistorSite {
        column_offset: 0,
        region,
        seg_offset,
        role,
        gate,
    };
    let internal = |s: &str| GateDrive::Internal(s.to_string());
    let pin = |s: &str| GateDrive::Pin(s.to_string());
    let sites = vec![
        // inverter driving Q
        site(Region::N, -1, SiteRole::PullDown, internal("QB")),
        site(Region::P, 0, SiteRole::PullUp, internal("QB")),
        // inverter driving QB
        site(Region::N, -2, SiteRole::PullDown, internal("Q")),
        site(Region::P, 1, SiteRole::PullUp, internal("Q")),
        // write access (n) and read access (p)
        site(Region::N, -3, SiteRole::Access, pin("WWL")),
        site(Region::P, 2, SiteRole::Access, pin("RWL")),
    ];
    let mut pins = BTreeMap::new();
    let input = |site: usize| PinDef {
        direction: PinDirection::Input,
        anchor: PinAnchor::Site(site),
        terminals: vec![Terminal::SiteGate(site)],
    };
    pins.insert("WWL".to_string(), input(4));
    pins.insert("RWL".to_string(), input(5));
    pins.insert("WBL".to_string(), input(2));
    pins.insert(
        "RBL".to_string(),
        PinDef {
            direction: PinDirection::Output,
            anchor: PinAnchor::Boundary,
            terminals: vec![Terminal::Ilc],
        },
    );
    insert_rails(&mut pins);
    CellTemplate {
        kind: CellKind::Sram6t,
        columns_used: 1,
        sites,
        pull_up: Network::CrossCoupled,
        pull_down: Network::CrossCoupled,
        internal_links: vec![InternalLink::Ilc { column_offset: 0 }],
        pins,
        logic: Logic::StateElement,
    }
}

/// Canonical template for a cell kind.
pub fn get_template(kind: CellKind) -> CellTemplate {
    match kind {
        CellKind::Inv => static_cmos(kind, 1, true),
        CellKind::Nand2 => static_cmos(kind, 2, true),
        CellKind::Nand3 => static_cmos(kind, 3, true),
        CellKind::Nand4 => static_cmos(kind, 4, true),
        CellKind::Nor2 => static_cmos(kind, 2, false),
        CellKind::Nor3 => static_cmos(kind, 3, false),
        CellKind::Sram6t => sram6t(),
    }
}

/// Looks a template up by its textual name.
pub fn template_by_name(name: &str) -> Result<CellTemplate, UnknownCell> {
    Ok(get_template(name.parse()?))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub detail: String,
}

impl Violation {
    fn new(rule: &'static str, detail: impl Into<String>) -> Self {
        Self {
            rule,
            detail: detail.into(),
        }
    }
}

/// Checks every template invariant; returns all violations found.
pub fn validate_template(t: &CellTemplate) -> Result<(), Vec<Violation>> {
    let mut v = Vec::new();
    for (i, s) in t.sites.iter().enumerate() {
        let expected = match s.role {
            SiteRole::PullUp => Some(Region::P),
            SiteRole::PullDown => Some(Region::N),
            SiteRole::Access => None,
        };
        if let Some(r) = expected {
            if r != s.region {
                v.push(Violation::new(
                    "region mismatch",
                    format!("site {i} is {:?} but sits in the {:?} region", s.role, s.region),
                ));
            }
        }
        let on_p_side = s.seg_offset >= 0;
        if on_p_side != (s.region == Region::P) {
            v.push(Violation::new(
                "region mismatch",
                format!("site {i} offset {} lies outside its {:?} region", s.seg_offset, s.region),
            ));
        }
        if s.column_offset >= t.columns_used {
            v.push(Violation::new(
                "column range",
                format!("site {i} uses column offset {}", s.column_offset),
            ));
        }
    }
    for i in 0..t.sites.len() {
        for j in i + 1..t.sites.len() {
            let (a, b) = (&t.sites[i], &t.sites[j]);
            if a.column_offset == b.column_offset && a.seg_offset == b.seg_offset {
                v.push(Violation::new("site overlap", format!("sites {i} and {j}")));
            }
        }
    }
    let ilcs = t
        .internal_links
        .iter()
        .filter(|l| matches!(l, InternalLink::Ilc { .. }))
        .count();
    let outputs: Vec<_> = t
        .pins
        .iter()
        .filter(|(_, p)| p.direction == PinDirection::Output)
        .collect();
    if outputs.len() != 1 {
        v.push(Violation::new(
            "single output",
            format!("{} output pins", outputs.len()),
        ));
    }
    if ilcs != 1 {
        v.push(Violation::new(
            "single output SB-ILC",
            format!("{ilcs} SB-ILC links on the output"),
        ));
    }
    let count = |region: Region, role: SiteRole| {
        t.sites
            .iter()
            .filter(|s| s.region == region && s.role == role)
            .count()
    };
    match t.logic {
        Logic::Nand(n) | Logic::Nor(n) => {
            let n = n as usize;
            let nand = matches!(t.logic, Logic::Nand(_));
            let (up, down) = if nand || n == 1 {
                (Network::Parallel, Network::Series)
            } else {
                (Network::Series, Network::Parallel)
            };
            let single = n == 1;
            let topology_ok =
                single || (t.pull_up == up && t.pull_down == down);
            if count(Region::P, SiteRole::PullUp) != n
                || count(Region::N, SiteRole::PullDown) != n
                || t.sites.len() != 2 * n
                || !topology_ok
            {
                v.push(Violation::new(
                    "static CMOS structure",
                    format!("expected {n} pull-up and {n} pull-down sites"),
                ));
            }
        }
        Logic::StateElement => {
            let inverter = t
                .sites
                .iter()
                .filter(|s| s.role != SiteRole::Access)
                .count();
            if t.sites.len() != 6
                || inverter != 4
                || count(Region::P, SiteRole::Access) != 1
                || count(Region::N, SiteRole::Access) != 1
            {
                v.push(Violation::new(
                    "sram site roles",
                    "expected 4 inverter sites, 1 p read access, 1 n write access",
                ));
            }
        }
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlaceError {
    #[error("cell does not fit the grid at {0:?}")]
    OutOfBounds(GridCoord),
    #[error("overlap at {0:?}")]
    Overlap(GridCoord),
}

/// A template realized at absolute grid coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlacedCell {
    pub cell: u32,
    pub kind: CellKind,
    pub column: (usize, usize),
    pub level: usize,
    pub sites: Vec<GridCoord>,
    /// `(col_x, col_y, level)` of each SB-ILC the cell uses.
    pub ilcs: Vec<(usize, usize, usize)>,
    pub pins: BTreeMap<String, GridCoord>,
}

impl PlacedCell {
    /// Absolute segment of the slot just below / above the doping boundary.
    pub fn boundary_segs(&self, segs_per_level: usize) -> [GridCoord; 2] {
        let b = segs_per_level / 2;
        let (x, y) = self.column;
        [
            GridCoord::new(x, y, self.level, b.saturating_sub(1)),
            GridCoord::new(x, y, self.level, b.min(segs_per_level - 1)),
        ]
    }
}

fn resolve(
    grid: &NanowireGrid,
    base: &GridCoord,
    column_offset: usize,
    seg_offset: i32,
) -> Result<GridCoord, PlaceError> {
    let b = grid.config().doping_boundary() as i64;
    let seg = b + seg_offset as i64;
    let c = GridCoord::new(base.col_x + column_offset, base.col_y, base.level, seg.max(0) as usize);
    if seg < 0 || !grid.contains(&c) {
        return Err(PlaceError::OutOfBounds(c));
    }
    Ok(c)
}

/// Places a template with its first column at `base` (its `seg` is ignored)
/// and marks the occupied slots in `grid`.
pub fn instantiate(
    t: &CellTemplate,
    base: GridCoord,
    grid: &mut NanowireGrid,
    cell: u32,
) -> Result<PlacedCell, PlaceError> {
    let base = GridCoord { seg: 0, ..base };
    if !grid.contains(&base) {
        return Err(PlaceError::OutOfBounds(base));
    }
    let mut sites = Vec::with_capacity(t.sites.len());
    for s in &t.sites {
        sites.push(resolve(grid, &base, s.column_offset, s.seg_offset)?);
    }
    let mut ilcs = Vec::new();
    for l in &t.internal_links {
        match *l {
            InternalLink::Ilc { column_offset } => {
                let c = resolve(grid, &base, column_offset, 0)?;
                ilcs.push((c.col_x, c.col_y, c.level));
            }
            InternalLink::Bridge {
                from_column,
                to_column,
                seg_offset,
            } => {
                resolve(grid, &base, from_column, seg_offset)?;
                resolve(grid, &base, to_column, seg_offset)?;
            }
        }
    }
    let mut pins = BTreeMap::new();
    let segs = grid.segs_per_level();
    for (name, p) in &t.pins {
        let at = match p.anchor {
            PinAnchor::Site(i) => sites[i],
            PinAnchor::Boundary => resolve(grid, &base, 0, 0)?,
            PinAnchor::Top => GridCoord { seg: segs - 1, ..base },
            PinAnchor::Bottom => base,
        };
        pins.insert(name.clone(), at);
    }

    for c in &sites {
        if grid.occupant(c).is_some() || grid.is_reserved(c.col_x, c.col_y) {
            return Err(PlaceError::Overlap(*c));
        }
    }
    for &(x, y, l) in &ilcs {
        if grid.ilc_owner(x, y, l).is_some() {
            return Err(PlaceError::Overlap(GridCoord::new(x, y, l, grid.config().doping_boundary())));
        }
    }
    for (i, c) in sites.iter().enumerate() {
        grid.set_occupant(
            c,
            Some(SiteOwner {
                cell,
                site: i as u16,
            }),
        );
    }
    for &(x, y, l) in &ilcs {
        grid.set_ilc_owner(x, y, l, Some(cell));
    }
    Ok(PlacedCell {
        cell,
        kind: t.kind,
        column: (base.col_x, base.col_y),
        level: base.level,
        sites,
        ilcs,
        pins,
    })
}

/// Undoes `instantiate`.
pub fn remove(placed: &PlacedCell, grid: &mut NanowireGrid) {
    for c in &placed.sites {
        grid.set_occupant(c, None);
    }
    for &(x, y, l) in &placed.ilcs {
        grid.set_ilc_owner(x, y, l, None);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FabricConfig;
    use crate::fabric::build_grid;

    /// Switch-level evaluation from the template's site structure alone.
    fn switch_level(t: &CellTemplate, inputs: &[bool]) -> bool {
        let gate_of = |s: &TransistorSite| match &s.gate {
            GateDrive::Pin(p) => {
                let idx = INPUT_PIN_NAMES.iter().position(|n| n == p).unwrap();
                inputs[idx]
            }
            GateDrive::Internal(_) => unreachable!(),
        };
        let conducts = |role: SiteRole, net: Network| {
            let on: Vec<bool> = t
                .sites
                .iter()
                .filter(|s| s.role == role)
                .map(|s| match s.region {
                    Region::P => !gate_of(s),
                    Region::N => gate_of(s),
                })
                .collect();
            match net {
                Network::Series => on.iter().all(|&b| b),
                Network::Parallel => on.iter().any(|&b| b),
                Network::CrossCoupled => unreachable!(),
            }
        };
        let up = conducts(SiteRole::PullUp, t.pull_up);
        let down = conducts(SiteRole::PullDown, t.pull_down);
        assert_ne!(up, down, "networks must be complementary");
        up
    }

    #[test]
    fn nand3_structure() {
        let t = get_template(CellKind::Nand3);
        let p = t.sites.iter().filter(|s| s.region == Region::P).count();
        let n = t.sites.iter().filter(|s| s.region == Region::N).count();
        assert_eq!((p, n), (3, 3));
        assert_eq!(t.pull_up, Network::Parallel);
        assert_eq!(t.pull_down, Network::Series);
        assert_eq!(t.internal_links.len(), 1);
    }

    #[test]
    fn inverter_structure() {
        let t = get_template(CellKind::Inv);
        assert_eq!(t.sites.len(), 2);
        assert_eq!(t.internal_links, vec![InternalLink::Ilc { column_offset: 0 }]);
    }

    #[test]
    fn sram_roles() {
        let t = get_template(CellKind::Sram6t);
        assert_eq!(t.sites.len(), 6);
        let access: Vec<_> = t.sites.iter().filter(|s| s.role == SiteRole::Access).collect();
        assert_eq!(access.len(), 2);
        assert!(access.iter().any(|s| s.region == Region::P && s.gate == GateDrive::Pin("RWL".into())));
        assert!(access.iter().any(|s| s.region == Region::N && s.gate == GateDrive::Pin("WWL".into())));
    }

    #[test]
    fn every_canonical_template_validates() {
        for k in CellKind::ALL {
            assert_eq!(validate_template(&get_template(k)), Ok(()), "{k}");
        }
    }

    #[test]
    fn pull_up_in_n_region_is_flagged() {
        let mut t = get_template(CellKind::Nand2);
        let i = t.sites.iter().position(|s| s.role == SiteRole::PullUp).unwrap();
        t.sites[i].region = Region::N;
        let v = validate_template(&t).unwrap_err();
        assert!(v.iter().any(|v| v.rule == "region mismatch"));
    }

    #[test]
    fn double_output_ilc_is_flagged() {
        let mut t = get_template(CellKind::Nand2);
        t.internal_links.push(InternalLink::Ilc { column_offset: 0 });
        let v = validate_template(&t).unwrap_err();
        assert!(v.iter().any(|v| v.rule == "single output SB-ILC"));
    }

    #[test]
    fn unknown_kind() {
        assert_eq!(
            template_by_name("XOR2").unwrap_err(),
            UnknownCell("XOR2".into())
        );
    }

    #[test]
    fn nand_switch_level_matches_not_and() {
        for k in [CellKind::Inv, CellKind::Nand2, CellKind::Nand3, CellKind::Nand4] {
            let t = get_template(k);
            let n = t.sites.len() / 2;
            for v in 0..1u32 << n {
                let inputs: Vec<bool> = (0..n).map(|i| v >> i & 1 == 1).collect();
                let expected = !inputs.iter().all(|&b| b);
                assert_eq!(switch_level(&t, &inputs), expected, "{k} {inputs:?}");
                assert_eq!(t.logic.eval(&inputs), Some(expected));
            }
        }
    }

    #[test]
    fn nor_switch_level_matches_not_or() {
        for k in [CellKind::Nor2, CellKind::Nor3] {
            let t = get_template(k);
            let n = t.sites.len() / 2;
            for v in 0..1u32 << n {
                let inputs: Vec<bool> = (0..n).map(|i| v >> i & 1 == 1).collect();
                let expected = !inputs.iter().any(|&b| b);
                assert_eq!(switch_level(&t, &inputs), expected);
                assert_eq!(t.logic.eval(&inputs), Some(expected));
            }
        }
    }

    #[test]
    fn templates_carry_no_sizing_attribute() {
        for k in CellKind::ALL {
            let json = serde_json::to_string(&get_template(k)).unwrap();
            for word in ["width", "length", "size", "w_l", "fins"] {
                assert!(!json.contains(word), "{k} mentions {word}");
            }
        }
    }

    fn grid(x: usize, y: usize, levels: usize, segs: usize) -> NanowireGrid {
        build_grid(FabricConfig {
            grid_cols_x: x,
            grid_cols_y: y,
            gate_levels_per_wire: levels,
            segments_per_gate_level: segs,
            ..FabricConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn inverter_instantiation() {
        let mut g = grid(1, 1, 2, 6);
        let t = get_template(CellKind::Inv);
        let pc = instantiate(&t, GridCoord::new(0, 0, 0, 0), &mut g, 0).unwrap();
        assert_eq!(g.occupied_count(), 2);
        let names: Vec<_> = pc.pins.keys().cloned().collect();
        assert_eq!(names, ["A", "GND", "VDD", "Y"]);
        assert_eq!(pc.pins["Y"], GridCoord::new(0, 0, 0, 3));
        assert_eq!(pc.pins["A"], GridCoord::new(0, 0, 0, 2));
        assert_eq!(pc.pins["VDD"], GridCoord::new(0, 0, 0, 5));
        assert_eq!(pc.pins["GND"], GridCoord::new(0, 0, 0, 0));

        let again = instantiate(&t, GridCoord::new(0, 0, 0, 0), &mut g, 1);
        assert_eq!(again, Err(PlaceError::Overlap(GridCoord::new(0, 0, 0, 2))));
    }

    #[test]
    fn nand4_needs_four_series_slots() {
        let mut g = grid(1, 1, 1, 3);
        let r = instantiate(&get_template(CellKind::Nand4), GridCoord::new(0, 0, 0, 0), &mut g, 0);
        assert!(matches!(r, Err(PlaceError::OutOfBounds(_))));
        assert_eq!(g.occupied_count(), 0);
    }

    #[test]
    fn instantiate_then_remove_restores_grid() {
        let mut g = grid(2, 2, 2, 8);
        instantiate(&get_template(CellKind::Nor2), GridCoord::new(1, 1, 0, 0), &mut g, 7).unwrap();
        let before = g.clone();
        for (i, k) in CellKind::ALL.into_iter().enumerate() {
            let pc = instantiate(&get_template(k), GridCoord::new(0, 1, 1, 0), &mut g, i as u32).unwrap();
            assert_ne!(g, before);
            remove(&pc, &mut g);
            assert_eq!(g, before);
        }
    }
}
