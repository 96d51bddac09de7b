//! Static gridworld maps and the text format used for layout pools.
//!
//! A pool document is a sequence of blocks, one per layout:
//!
//! ```text
//! [L1]
//! A..D
//! .XD.
//! ..Y.
//! DZ.T
//! ```
//!
//! Glyphs: `A` agent start, `T` target, `D` ditch, `.` free, and any other
//! uppercase letter is an information item. Blocks are separated by one
//! blank line. [`serialize_pool`] emits exactly this canonical form, so a
//! canonical document survives a parse/serialize round trip byte for byte.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The pool shipped with the crate: five 4x4 maps, each holding X, Y and Z.
pub const DEFAULT_POOL: &str = include_str!("../../data/default_pool.txt");

/// A grid coordinate, row-major with row 0 at the top.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

/// Identifier of an information type, e.g. `X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ItemId(pub char);

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

const START: char = 'A';
const TARGET: char = 'T';
const DITCH: char = 'D';
const FREE: char = '.';

/// Upper bound on items per layout; collected sets are stored as a `u32` mask.
pub const MAX_ITEMS: usize = 16;

/// One gridworld instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Layout {
    id: String,
    width: usize,
    height: usize,
    start: Cell,
    target: Cell,
    ditches: BTreeSet<Cell>,
    /// Sorted by item id; an item's position here is its bit in collected masks.
    items: Vec<(ItemId, Cell)>,
}

impl Layout {
    /// Builds a layout and checks every structural invariant.
    pub fn new(
        id: impl Into<String>,
        width: usize,
        height: usize,
        start: Cell,
        target: Cell,
        ditches: BTreeSet<Cell>,
        items: BTreeMap<ItemId, Cell>,
    ) -> Result<Self> {
        let layout = Self {
            id: id.into(),
            width,
            height,
            start,
            target,
            ditches,
            items: items.into_iter().collect(),
        };
        layout.validate()?;
        Ok(layout)
    }

    fn violation(&self, constraint: impl Into<String>) -> Error {
        Error::InvalidLayout {
            layout_id: self.id.clone(),
            constraint: constraint.into(),
        }
    }

    /// Re-checks the invariants; useful for layouts obtained by deserialization.
    pub fn validate(&self) -> Result<()> {
        if self.width < 2 || self.height < 2 {
            return Err(self.violation("grid must be at least 2x2"));
        }
        if self.items.is_empty() {
            return Err(self.violation("layout must contain at least one item"));
        }
        if self.items.len() > MAX_ITEMS {
            return Err(self.violation(format!("at most {MAX_ITEMS} items are supported")));
        }
        let in_bounds = |c: &Cell| c.row < self.height && c.col < self.width;
        if !in_bounds(&self.start) {
            return Err(self.violation("start out of bounds"));
        }
        if !in_bounds(&self.target) {
            return Err(self.violation("target out of bounds"));
        }
        if let Some(d) = self.ditches.iter().find(|d| !in_bounds(d)) {
            return Err(self.violation(format!("ditch {d} out of bounds")));
        }
        if self.ditches.contains(&self.start) {
            return Err(self.violation("start must not be a ditch"));
        }
        if self.ditches.contains(&self.target) {
            return Err(self.violation("target must not be a ditch"));
        }
        if self.start == self.target {
            return Err(self.violation("start and target must differ"));
        }
        let mut seen = BTreeSet::new();
        for w in self.items.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(self.violation("item ids must be unique"));
            }
        }
        for (item, cell) in &self.items {
            if !in_bounds(cell) {
                return Err(self.violation(format!("item {item} out of bounds")));
            }
            if self.ditches.contains(cell) {
                return Err(self.violation(format!("item {item} must not be placed on a ditch")));
            }
            if *cell == self.start || *cell == self.target {
                return Err(self.violation(format!(
                    "item {item} must not share a cell with start or target"
                )));
            }
            if !seen.insert(*cell) {
                return Err(self.violation("item cells must be pairwise distinct"));
            }
        }
        Ok(())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn start(&self) -> Cell {
        self.start
    }

    pub fn target(&self) -> Cell {
        self.target
    }

    pub fn ditches(&self) -> &BTreeSet<Cell> {
        &self.ditches
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.height
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    /// Item ids in bit order.
    pub fn item_ids(&self) -> Vec<ItemId> {
        self.items.iter().map(|(id, _)| *id).collect()
    }

    pub fn item_cell(&self, item: ItemId) -> Option<Cell> {
        self.items
            .iter()
            .find(|(id, _)| *id == item)
            .map(|(_, c)| *c)
    }

    /// Bit position of `item` in collected masks.
    pub fn item_bit(&self, item: ItemId) -> Option<usize> {
        self.items.iter().position(|(id, _)| *id == item)
    }

    /// The item hosted by `cell`, with its bit position.
    pub fn item_at(&self, cell: Cell) -> Option<(usize, ItemId)> {
        self.items
            .iter()
            .position(|(_, c)| *c == cell)
            .map(|bit| (bit, self.items[bit].0))
    }

    pub fn is_ditch(&self, cell: Cell) -> bool {
        self.ditches.contains(&cell)
    }

    pub fn in_bounds(&self, row: isize, col: isize) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    /// Row-major cell number in `[0, cell_count)`.
    pub fn cell_number(&self, cell: Cell) -> usize {
        cell.row * self.width + cell.col
    }

    pub fn cell_from_number(&self, n: usize) -> Cell {
        Cell::new(n / self.width, n % self.width)
    }

    fn glyph(&self, cell: Cell) -> char {
        if cell == self.start {
            START
        } else if cell == self.target {
            TARGET
        } else if self.ditches.contains(&cell) {
            DITCH
        } else if let Some((_, id)) = self.item_at(cell) {
            id.0
        } else {
            FREE
        }
    }

    /// Grid rows as glyph strings.
    pub fn render(&self) -> Vec<String> {
        (0..self.height)
            .map(|r| {
                (0..self.width)
                    .map(|c| self.glyph(Cell::new(r, c)))
                    .collect()
            })
            .collect()
    }

    /// Parses a single grid given as glyph rows.
    pub fn from_rows<S: AsRef<str>>(id: &str, rows: &[S]) -> Result<Self> {
        let height = rows.len();
        let width = rows
            .first()
            .map(|r| r.as_ref().chars().count())
            .unwrap_or(0);
        let mut start = None;
        let mut target = None;
        let mut ditches = BTreeSet::new();
        let mut items = BTreeMap::new();
        let invalid = |constraint: String| Error::InvalidLayout {
            layout_id: id.to_string(),
            constraint,
        };
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.chars().count() != width {
                return Err(invalid(format!("row {r} has a different width")));
            }
            for (c, glyph) in row.chars().enumerate() {
                let cell = Cell::new(r, c);
                match glyph {
                    FREE => {}
                    START => {
                        if start.replace(cell).is_some() {
                            return Err(invalid("more than one start cell".into()));
                        }
                    }
                    TARGET => {
                        if target.replace(cell).is_some() {
                            return Err(invalid("more than one target cell".into()));
                        }
                    }
                    DITCH => {
                        ditches.insert(cell);
                    }
                    g if g.is_ascii_uppercase() => {
                        if items.insert(ItemId(g), cell).is_some() {
                            return Err(invalid(format!("item {g} placed more than once")));
                        }
                    }
                    g => return Err(invalid(format!("unknown glyph {g:?}"))),
                }
            }
        }
        let start = start.ok_or_else(|| invalid("missing start cell".into()))?;
        let target = target.ok_or_else(|| invalid("missing target cell".into()))?;
        Self::new(id, width, height, start, target, ditches, items)
    }
}

/// Parses a pool document. Blank lines between blocks are optional; the
/// result preserves document order.
pub fn parse_pool(text: &str) -> Result<Vec<Layout>> {
    let mut layouts = Vec::new();
    let mut current: Option<(String, usize, Vec<&str>)> = None;
    let finish = |block: Option<(String, usize, Vec<&str>)>, out: &mut Vec<Layout>| -> Result<()> {
        if let Some((id, line, rows)) = block {
            if rows.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: format!("layout {id} has no rows"),
                });
            }
            out.push(Layout::from_rows(&id, &rows)?);
        }
        Ok(())
    };
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let trimmed = line.trim_end();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let id = rest.strip_suffix(']').ok_or_else(|| Error::Parse {
                line: line_no,
                message: "unterminated layout header".into(),
            })?;
            if id.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: "empty layout id".into(),
                });
            }
            if layouts.iter().any(|l: &Layout| l.id() == id)
                || current.as_ref().is_some_and(|(cur, _, _)| cur == id)
            {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate layout id {id}"),
                });
            }
            finish(current.take(), &mut layouts)?;
            current = Some((id.to_string(), line_no, Vec::new()));
        } else {
            match current.as_mut() {
                Some((_, _, rows)) => rows.push(trimmed),
                None => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "grid row before any [layout] header".into(),
                    })
                }
            }
        }
    }
    finish(current, &mut layouts)?;
    if layouts.is_empty() {
        return Err(Error::EmptyPool);
    }
    Ok(layouts)
}

/// Canonical text form of a pool.
pub fn serialize_pool(layouts: &[Layout]) -> String {
    let blocks: Vec<String> = layouts
        .iter()
        .map(|l| {
            let mut s = format!("[{}]\n", l.id());
            for row in l.render() {
                s.push_str(&row);
                s.push('\n');
            }
            s
        })
        .collect();
    blocks.join("\n")
}

/// Parses the bundled five-layout pool.
pub fn default_pool() -> Vec<Layout> {
    parse_pool(DEFAULT_POOL).expect("bundled pool is valid")
}
