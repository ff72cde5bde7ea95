//! Planar compact sets at grid resolution.
//!
//! A [`GridSet`] is a finite union of closed grid boxes plus a finite set of
//! tagged isolated points. Box `(n, m)` at resolution `eps` is the half-open
//! square `(eps*n - eps/2, eps*n + eps/2] x i(eps*m - eps/2, eps*m + eps/2]`;
//! for set-theoretic purposes (distances, intersections) its closure is used.
//!
//! Spectrum components use 8-way box adjacency. Complement regions use 4-way
//! adjacency, so a diagonal chain of boxes separates the plane.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap, VecDeque};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("empty spectrum")]
    EmptySpectrum,
    #[error("resolution must be positive and finite, got {0}")]
    BadResolution(f64),
    #[error("non-finite coordinate in {0}")]
    NonFinite(Complex64),
    #[error("isolated point {0} lies in the closed box ({1}, {2})")]
    PointInBox(Complex64, i64, i64),
    #[error("isolated point {0} listed twice")]
    DuplicatePoint(Complex64),
}

/// Grid box `B_{n,m}`; identified by its integer indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GridBox {
    pub n: i64,
    pub m: i64,
}

const OFFSETS_8: [(i64, i64); 8] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];
const OFFSETS_4: [(i64, i64); 4] = [(-1, 0), (0, -1), (0, 1), (1, 0)];

impl GridBox {
    pub const fn new(n: i64, m: i64) -> Self {
        GridBox { n, m }
    }

    /// The box whose half-open extent contains `z`.
    pub fn containing(z: Complex64, resolution: f64) -> Self {
        GridBox {
            n: half_open_index(z.re, resolution),
            m: half_open_index(z.im, resolution),
        }
    }

    pub fn center(&self, resolution: f64) -> Complex64 {
        Complex64::new(resolution * self.n as f64, resolution * self.m as f64)
    }

    /// Closed extent of the box.
    pub fn rect(&self, resolution: f64) -> Rect {
        let half = resolution / 2.0;
        let (cx, cy) = (resolution * self.n as f64, resolution * self.m as f64);
        Rect {
            x0: cx - half,
            x1: cx + half,
            y0: cy - half,
            y1: cy + half,
        }
    }

    /// Closed boxes on a common grid intersect iff they are equal or 8-adjacent.
    pub fn touches(&self, other: &GridBox) -> bool {
        (self.n - other.n).abs() <= 1 && (self.m - other.m).abs() <= 1
    }

    pub fn neighbors8(&self) -> impl Iterator<Item = GridBox> {
        let (n, m) = (self.n, self.m);
        OFFSETS_8.iter().map(move |&(dn, dm)| GridBox::new(n + dn, m + dm))
    }

    pub fn neighbors4(&self) -> impl Iterator<Item = GridBox> {
        let (n, m) = (self.n, self.m);
        OFFSETS_4.iter().map(move |&(dn, dm)| GridBox::new(n + dn, m + dm))
    }
}

/// Index `k` with `x` in `(eps*k - eps/2, eps*k + eps/2]`.
fn half_open_index(x: f64, resolution: f64) -> i64 {
    let k = (x / resolution - 0.5).ceil() as i64;
    // Guard against rounding in the division putting x one box off.
    let lo = resolution * k as f64 - resolution / 2.0;
    let hi = resolution * k as f64 + resolution / 2.0;
    if x <= lo {
        k - 1
    } else if x > hi {
        k + 1
    } else {
        k
    }
}

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn dist(&self, z: Complex64) -> f64 {
        let dx = (self.x0 - z.re).max(z.re - self.x1).max(0.0);
        let dy = (self.y0 - z.im).max(z.im - self.y1).max(0.0);
        dx.hypot(dy)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        other.x0 >= self.x0 && other.x1 <= self.x1 && other.y0 >= self.y0 && other.y1 <= self.y1
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x0 <= other.x1 && other.x0 <= self.x1 && self.y0 <= other.y1 && other.y0 <= self.y1
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.x0, self.y0),
            Complex64::new(self.x1, self.y0),
            Complex64::new(self.x0, self.y1),
            Complex64::new(self.x1, self.y1),
        ]
    }

    pub fn half_diagonal(&self) -> f64 {
        (self.x1 - self.x0).hypot(self.y1 - self.y0) / 2.0
    }

    fn quadrants(&self) -> [Rect; 4] {
        let c = self.center();
        [
            Rect { x0: self.x0, x1: c.re, y0: self.y0, y1: c.im },
            Rect { x0: c.re, x1: self.x1, y0: self.y0, y1: c.im },
            Rect { x0: self.x0, x1: c.re, y0: c.im, y1: self.y1 },
            Rect { x0: c.re, x1: self.x1, y0: c.im, y1: self.y1 },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsolatedPoint {
    pub value: Complex64,
    #[serde(default)]
    pub is_cluster_point: bool,
}

impl IsolatedPoint {
    pub fn new(value: Complex64) -> Self {
        IsolatedPoint { value, is_cluster_point: false }
    }

    pub fn cluster(value: Complex64) -> Self {
        IsolatedPoint { value, is_cluster_point: true }
    }
}

fn cmp_complex(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// A compact planar set at resolution `eps`: closed boxes plus isolated points.
///
/// Equality compares boxes, point values and cluster flags. Use
/// [`GridSet::same_set`] to compare only the represented sets.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSet {
    resolution: f64,
    boxes: BTreeSet<GridBox>,
    points: Vec<IsolatedPoint>,
}

impl GridSet {
    pub fn new(
        resolution: f64,
        boxes: impl IntoIterator<Item = GridBox>,
        points: impl IntoIterator<Item = IsolatedPoint>,
    ) -> Result<Self, GeometryError> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(GeometryError::BadResolution(resolution));
        }
        let boxes: BTreeSet<GridBox> = boxes.into_iter().collect();
        let mut points: Vec<IsolatedPoint> = points.into_iter().collect();
        points.sort_by(|a, b| cmp_complex(&a.value, &b.value));
        for w in points.windows(2) {
            if w[0].value == w[1].value {
                return Err(GeometryError::DuplicatePoint(w[0].value));
            }
        }
        for p in &points {
            if !(p.value.re.is_finite() && p.value.im.is_finite()) {
                return Err(GeometryError::NonFinite(p.value));
            }
            let home = GridBox::containing(p.value, resolution);
            for b in std::iter::once(home).chain(home.neighbors8()) {
                if boxes.contains(&b) && b.rect(resolution).contains(p.value) {
                    return Err(GeometryError::PointInBox(p.value, b.n, b.m));
                }
            }
        }
        if boxes.is_empty() && points.is_empty() {
            return Err(GeometryError::EmptySpectrum);
        }
        Ok(GridSet { resolution, boxes, points })
    }

    pub fn from_boxes(resolution: f64, boxes: impl IntoIterator<Item = GridBox>) -> Result<Self, GeometryError> {
        Self::new(resolution, boxes, std::iter::empty())
    }

    pub fn from_points(
        resolution: f64,
        points: impl IntoIterator<Item = IsolatedPoint>,
    ) -> Result<Self, GeometryError> {
        Self::new(resolution, std::iter::empty(), points)
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn boxes(&self) -> &BTreeSet<GridBox> {
        &self.boxes
    }

    /// Isolated points, sorted by `(re, im)`.
    pub fn points(&self) -> &[IsolatedPoint] {
        &self.points
    }

    /// Equality of the represented sets, ignoring cluster flags.
    pub fn same_set(&self, other: &GridSet) -> bool {
        self.resolution == other.resolution
            && self.boxes == other.boxes
            && self.points.len() == other.points.len()
            && self.points.iter().zip(&other.points).all(|(a, b)| a.value == b.value)
    }

    /// Membership of `z` in the represented (closed) set.
    pub fn contains(&self, z: Complex64) -> bool {
        self.box_containing(z).is_some() || self.points.iter().any(|p| p.value == z)
    }

    /// A box of the set whose closure contains `z`, if any.
    pub fn box_containing(&self, z: Complex64) -> Option<GridBox> {
        let home = GridBox::containing(z, self.resolution);
        std::iter::once(home)
            .chain(home.neighbors8())
            .find(|b| self.boxes.contains(b) && b.rect(self.resolution).contains(z))
    }

    /// Euclidean distance from `z` to the represented set.
    pub fn dist(&self, z: Complex64) -> f64 {
        let mut best = f64::INFINITY;
        for b in &self.boxes {
            best = best.min(b.rect(self.resolution).dist(z));
            if best == 0.0 {
                return 0.0;
            }
        }
        for p in &self.points {
            best = best.min((p.value - z).norm());
        }
        best
    }

    /// Finite sample of the set: box centres followed by isolated points.
    pub fn atoms(&self) -> Vec<Complex64> {
        self.boxes
            .iter()
            .map(|b| b.center(self.resolution))
            .chain(self.points.iter().map(|p| p.value))
            .collect()
    }

    /// Bounding range of grid indices covering every box and point.
    pub fn index_bounds(&self) -> (i64, i64, i64, i64) {
        let cells = self
            .boxes
            .iter()
            .copied()
            .chain(self.points.iter().map(|p| GridBox::containing(p.value, self.resolution)));
        let mut nmin = i64::MAX;
        let mut nmax = i64::MIN;
        let mut mmin = i64::MAX;
        let mut mmax = i64::MIN;
        for c in cells {
            nmin = nmin.min(c.n);
            nmax = nmax.max(c.n);
            mmin = mmin.min(c.m);
            mmax = mmax.max(c.m);
        }
        (nmin, nmax, mmin, mmax)
    }

    /// Union of two sets on the same grid. Points falling into a box of the
    /// other set are absorbed; cluster flags are or-ed on shared points.
    pub fn union(&self, other: &GridSet) -> Result<GridSet, GeometryError> {
        if self.resolution != other.resolution {
            return Err(GeometryError::BadResolution(other.resolution));
        }
        let boxes: BTreeSet<GridBox> = self.boxes.union(&other.boxes).copied().collect();
        let probe = GridSet { resolution: self.resolution, boxes: boxes.clone(), points: Vec::new() };
        let mut points: Vec<IsolatedPoint> = Vec::new();
        for p in self.points.iter().chain(&other.points) {
            if probe.box_containing(p.value).is_some() {
                continue;
            }
            match points.iter_mut().find(|q| q.value == p.value) {
                Some(q) => q.is_cluster_point |= p.is_cluster_point,
                None => points.push(*p),
            }
        }
        GridSet::new(self.resolution, boxes, points)
    }
}

/// Rasterize a point sample: every box containing at least one point becomes
/// a region box of the result.
pub fn rasterize(points: &[Complex64], resolution: f64) -> Result<GridSet, GeometryError> {
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(GeometryError::BadResolution(resolution));
    }
    if points.is_empty() {
        return Err(GeometryError::EmptySpectrum);
    }
    let mut boxes = BTreeSet::new();
    for &z in points {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(GeometryError::NonFinite(z));
        }
        boxes.insert(GridBox::containing(z, resolution));
    }
    GridSet::from_boxes(resolution, boxes)
}

#[derive(Debug, Clone, PartialEq)]
pub enum ComponentKind {
    /// 8-connected boxes, sorted.
    Region(Vec<GridBox>),
    Singleton(IsolatedPoint),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub id: usize,
    pub kind: ComponentKind,
}

impl Component {
    pub fn is_region(&self) -> bool {
        matches!(self.kind, ComponentKind::Region(_))
    }

    pub fn boxes(&self) -> &[GridBox] {
        match &self.kind {
            ComponentKind::Region(b) => b,
            ComponentKind::Singleton(_) => &[],
        }
    }

    pub fn point(&self) -> Option<IsolatedPoint> {
        match &self.kind {
            ComponentKind::Region(_) => None,
            ComponentKind::Singleton(p) => Some(*p),
        }
    }

    /// Whether the component contains a non-isolated point of its set:
    /// regions are continua, singletons need the cluster flag.
    pub fn has_non_isolated_point(&self) -> bool {
        match &self.kind {
            ComponentKind::Region(_) => true,
            ComponentKind::Singleton(p) => p.is_cluster_point,
        }
    }

    /// Closed-set intersection with another component on the same grid.
    pub fn intersects(&self, other: &Component, resolution: f64) -> bool {
        match (&self.kind, &other.kind) {
            (ComponentKind::Region(a), ComponentKind::Region(b)) => {
                let set: BTreeSet<GridBox> = a.iter().copied().collect();
                b.iter()
                    .any(|x| std::iter::once(*x).chain(x.neighbors8()).any(|y| set.contains(&y)))
            }
            (ComponentKind::Region(a), ComponentKind::Singleton(p))
            | (ComponentKind::Singleton(p), ComponentKind::Region(a)) => {
                a.iter().any(|b| b.rect(resolution).contains(p.value))
            }
            (ComponentKind::Singleton(p), ComponentKind::Singleton(q)) => p.value == q.value,
        }
    }

    /// Whether this component, as a closed set, lies inside `other`.
    pub fn contained_in(&self, other: &Component, resolution: f64) -> bool {
        match (&self.kind, &other.kind) {
            (ComponentKind::Region(a), ComponentKind::Region(b)) => {
                let set: BTreeSet<GridBox> = b.iter().copied().collect();
                a.iter().all(|x| set.contains(x))
            }
            (ComponentKind::Singleton(p), ComponentKind::Region(b)) => {
                b.iter().any(|x| x.rect(resolution).contains(p.value))
            }
            (ComponentKind::Singleton(p), ComponentKind::Singleton(q)) => p.value == q.value,
            (ComponentKind::Region(_), ComponentKind::Singleton(_)) => false,
        }
    }
}

/// Components of the represented set: 8-connected box regions ordered by their
/// smallest box, followed by singletons ordered by `(re, im)`.
pub fn connected_components(g: &GridSet) -> Vec<Component> {
    let mut seen: BTreeSet<GridBox> = BTreeSet::new();
    let mut out = Vec::new();
    // BTreeSet iteration is lexicographic, so each region is discovered from
    // its minimal box and regions come out already ordered.
    for &start in &g.boxes {
        if seen.contains(&start) {
            continue;
        }
        let mut region = Vec::new();
        let mut queue = VecDeque::from([start]);
        seen.insert(start);
        while let Some(b) = queue.pop_front() {
            region.push(b);
            for nb in b.neighbors8() {
                if g.boxes.contains(&nb) && seen.insert(nb) {
                    queue.push_back(nb);
                }
            }
        }
        region.sort();
        out.push(Component { id: out.len(), kind: ComponentKind::Region(region) });
    }
    for p in &g.points {
        out.push(Component { id: out.len(), kind: ComponentKind::Singleton(*p) });
    }
    out
}

/// Which component of `components` contains `z`, if any.
pub fn component_containing(components: &[Component], z: Complex64, resolution: f64) -> Option<usize> {
    components.iter().position(|c| match &c.kind {
        ComponentKind::Region(bs) => bs.iter().any(|b| b.rect(resolution).contains(z)),
        ComponentKind::Singleton(p) => p.value == z,
    })
}

/// A bounded component of the complement, as complement grid cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Hole {
    pub id: usize,
    pub cells: Vec<GridBox>,
    /// Centre of the smallest cell.
    pub representative: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ComplementRegion {
    Hole(usize),
    Unbounded,
}

/// Discretized complement of a [`GridSet`] inside a bounding frame.
#[derive(Debug, Clone)]
pub struct Complement {
    resolution: f64,
    frame: (i64, i64, i64, i64),
    holes: Vec<Hole>,
    unbounded: Vec<GridBox>,
    owner: HashMap<GridBox, ComplementRegion>,
}

impl Complement {
    pub fn holes(&self) -> &[Hole] {
        &self.holes
    }

    /// Complement cells of the unbounded component that lie inside the frame.
    pub fn unbounded_cells(&self) -> &[GridBox] {
        &self.unbounded
    }

    pub fn frame(&self) -> (i64, i64, i64, i64) {
        self.frame
    }

    /// Region owning a grid cell, or `None` when the cell is a spectrum box.
    /// Cells outside the frame belong to the unbounded component.
    pub fn region_of_cell(&self, cell: GridBox) -> Option<ComplementRegion> {
        let (n0, n1, m0, m1) = self.frame;
        if cell.n < n0 || cell.n > n1 || cell.m < m0 || cell.m > m1 {
            return Some(ComplementRegion::Unbounded);
        }
        self.owner.get(&cell).copied()
    }

    /// Complement region containing a point not in `g`; `None` for points of `g`.
    pub fn region_of_point(&self, g: &GridSet, z: Complex64) -> Option<ComplementRegion> {
        if g.contains(z) {
            return None;
        }
        self.region_of_cell(GridBox::containing(z, self.resolution))
    }
}

/// Bounded and unbounded complement components of `g`, discretized on the
/// same grid inside a frame extended by `frame_margin` (at least one cell).
pub fn complement_components(g: &GridSet, frame_margin: f64) -> Complement {
    let eps = g.resolution;
    let pad = ((frame_margin / eps).ceil() as i64).max(1);
    let (nmin, nmax, mmin, mmax) = g.index_bounds();
    let frame = (nmin - pad, nmax + pad, mmin - pad, mmax + pad);
    let (n0, n1, m0, m1) = frame;
    let inside = |b: &GridBox| b.n >= n0 && b.n <= n1 && b.m >= m0 && b.m <= m1;
    let free = |b: &GridBox| inside(b) && !g.boxes.contains(b);

    let mut owner: HashMap<GridBox, ComplementRegion> = HashMap::new();
    let mut unbounded = Vec::new();
    let mut queue = VecDeque::new();
    for n in n0..=n1 {
        for m in m0..=m1 {
            if n == n0 || n == n1 || m == m0 || m == m1 {
                let b = GridBox::new(n, m);
                if free(&b) && owner.insert(b, ComplementRegion::Unbounded).is_none() {
                    queue.push_back(b);
                }
            }
        }
    }
    while let Some(b) = queue.pop_front() {
        unbounded.push(b);
        for nb in b.neighbors4() {
            if free(&nb) && !owner.contains_key(&nb) {
                owner.insert(nb, ComplementRegion::Unbounded);
                queue.push_back(nb);
            }
        }
    }
    unbounded.sort();

    let mut holes = Vec::new();
    for n in n0..=n1 {
        for m in m0..=m1 {
            let start = GridBox::new(n, m);
            if !free(&start) || owner.contains_key(&start) {
                continue;
            }
            let id = holes.len();
            let mut cells = Vec::new();
            owner.insert(start, ComplementRegion::Hole(id));
            queue.push_back(start);
            while let Some(b) = queue.pop_front() {
                cells.push(b);
                for nb in b.neighbors4() {
                    if free(&nb) && !owner.contains_key(&nb) {
                        owner.insert(nb, ComplementRegion::Hole(id));
                        queue.push_back(nb);
                    }
                }
            }
            cells.sort();
            let representative = cells[0].center(eps);
            holes.push(Hole { id, cells, representative });
        }
    }
    Complement { resolution: eps, frame, holes, unbounded, owner }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    upper: f64,
    rect: Rect,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.upper.total_cmp(&other.upper) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper.total_cmp(&other.upper)
    }
}

/// Whether the closed rectangle is covered by the union of the boxes of `y`.
fn covered(rect: &Rect, y: &GridSet) -> bool {
    let eps = y.resolution;
    let lo = GridBox::containing(Complex64::new(rect.x0, rect.y0), eps);
    let hi = GridBox::containing(Complex64::new(rect.x1, rect.y1), eps);
    let mut hits = Vec::new();
    for n in (lo.n - 1)..=(hi.n + 1) {
        for m in (lo.m - 1)..=(hi.m + 1) {
            let b = GridBox::new(n, m);
            if y.boxes.contains(&b) {
                let r = b.rect(eps);
                if r.contains_rect(rect) {
                    return true;
                }
                if r.intersects(rect) {
                    hits.push(r);
                }
            }
        }
    }
    if hits.is_empty() {
        return false;
    }
    // Coordinate compression over the rectangle.
    let mut xs = vec![rect.x0, rect.x1];
    let mut ys = vec![rect.y0, rect.y1];
    for r in &hits {
        for x in [r.x0, r.x1] {
            if x > rect.x0 && x < rect.x1 {
                xs.push(x);
            }
        }
        for v in [r.y0, r.y1] {
            if v > rect.y0 && v < rect.y1 {
                ys.push(v);
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    for wx in xs.windows(2) {
        for wy in ys.windows(2) {
            if wx[0] == wx[1] || wy[0] == wy[1] {
                continue;
            }
            let mid = Complex64::new((wx[0] + wx[1]) / 2.0, (wy[0] + wy[1]) / 2.0);
            if !hits.iter().any(|r| r.contains(mid)) {
                return false;
            }
        }
    }
    true
}

/// Upper bound for `sup_{z in rect} dist(z, y)`.
fn sup_bound(rect: &Rect, y: &GridSet, center_dist: f64) -> f64 {
    if covered(rect, y) {
        return 0.0;
    }
    let corners = rect.corners();
    // Distance to each convex piece of y is convex, so its maximum over the
    // rectangle is attained at a corner.
    let mut best = center_dist + rect.half_diagonal();
    for b in &y.boxes {
        let r = b.rect(y.resolution);
        let worst = corners.iter().map(|&c| r.dist(c)).fold(0.0, f64::max);
        best = best.min(worst);
    }
    for p in &y.points {
        let worst = corners.iter().map(|&c| (c - p.value).norm()).fold(0.0, f64::max);
        best = best.min(worst);
    }
    best
}

/// `sup_{a in x} dist(a, y)` by branch and bound over the boxes of `x`.
///
/// The returned value is attained at an evaluated point, so it never exceeds
/// the true supremum; it falls short by at most `1e-12 * (1 + scale)`.
pub fn directed_hausdorff(x: &GridSet, y: &GridSet) -> f64 {
    let mut best: f64 = 0.0;
    for p in &x.points {
        best = best.max(y.dist(p.value));
    }
    let scale = x
        .atoms()
        .iter()
        .chain(y.atoms().iter())
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(0.0, f64::max)
        + x.resolution.max(y.resolution);
    let tol = 1e-12 * (1.0 + scale);
    let min_size = 1e-10 * x.resolution;

    let mut heap = BinaryHeap::new();
    let push = |rect: Rect, best: &mut f64, heap: &mut BinaryHeap<Cell>| {
        for c in rect.corners() {
            *best = best.max(y.dist(c));
        }
        let cd = y.dist(rect.center());
        *best = best.max(cd);
        let upper = sup_bound(&rect, y, cd);
        if upper > *best + tol {
            heap.push(Cell { upper, rect });
        }
    };
    for b in &x.boxes {
        push(b.rect(x.resolution), &mut best, &mut heap);
    }
    while let Some(cell) = heap.pop() {
        if cell.upper <= best + tol {
            break;
        }
        if cell.rect.x1 - cell.rect.x0 < min_size {
            continue;
        }
        for q in cell.rect.quadrants() {
            push(q, &mut best, &mut heap);
        }
    }
    best
}

/// Hausdorff distance between the represented sets.
pub fn hausdorff_distance(x: &GridSet, y: &GridSet) -> f64 {
    directed_hausdorff(x, y).max(directed_hausdorff(y, x))
}

/// Hausdorff distance between two finite point sets.
pub fn point_set_hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    fn directed(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .map(|x| b.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }
    directed(a, b).max(directed(b, a))
}
