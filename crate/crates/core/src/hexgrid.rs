//! Hexagon/corner incidence graphs for the four shape families.
//!
//! Hexagons are pointy-top and addressed by axial coordinates `(q, r)`.
//! Every lattice corner is either the top (`N`) corner or the bottom (`S`)
//! corner of exactly one hexagon, so a corner is identified exactly by
//! `(q, r, cls)` without any floating-point deduplication.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

/// Axial offsets of the six neighbours of a hexagon.
pub const NEIGHBOR_OFFSETS: [(i32, i32); 6] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HexCoord {
    pub q: i32,
    pub r: i32,
}

impl HexCoord {
    pub const fn new(q: i32, r: i32) -> Self {
        HexCoord { q, r }
    }

    pub fn neighbors(self) -> [HexCoord; 6] {
        NEIGHBOR_OFFSETS.map(|(dq, dr)| HexCoord::new(self.q + dq, self.r + dr))
    }

    /// Hex distance on the axial lattice.
    pub fn distance(self, other: HexCoord) -> i32 {
        let dq = self.q - other.q;
        let dr = self.r - other.r;
        (dq.abs() + dr.abs() + (dq + dr).abs()) / 2
    }
}

impl fmt::Display for HexCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.q, self.r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum CornerClass {
    N,
    S,
}

impl fmt::Display for CornerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CornerClass::N => f.write_str("N"),
            CornerClass::S => f.write_str("S"),
        }
    }
}

/// Exact identity of a hexagon corner.
///
/// Canonical order is `(r, q, cls)` with `N` before `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct VertexKey {
    pub q: i32,
    pub r: i32,
    pub cls: CornerClass,
}

impl VertexKey {
    pub const fn new(q: i32, r: i32, cls: CornerClass) -> Self {
        VertexKey { q, r, cls }
    }

    /// The (up to) three hexagon centers that have this corner.
    pub fn incident_centers(self) -> [HexCoord; 3] {
        let (q, r) = (self.q, self.r);
        match self.cls {
            CornerClass::N => [HexCoord::new(q, r), HexCoord::new(q, r - 1), HexCoord::new(q + 1, r - 1)],
            CornerClass::S => [HexCoord::new(q, r), HexCoord::new(q - 1, r + 1), HexCoord::new(q, r + 1)],
        }
    }
}

impl Ord for VertexKey {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.r, self.q, self.cls).cmp(&(other.r, other.q, other.cls))
    }
}

impl PartialOrd for VertexKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for VertexKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.q, self.r, self.cls)
    }
}

/// The six corners of the hexagon at `center`, in a fixed order:
/// top, bottom, upper-right, upper-left, lower-right, lower-left.
pub fn hexagon_corners(center: HexCoord) -> [VertexKey; 6] {
    let HexCoord { q, r } = center;
    [
        VertexKey::new(q, r, CornerClass::N),
        VertexKey::new(q, r, CornerClass::S),
        VertexKey::new(q + 1, r - 1, CornerClass::S),
        VertexKey::new(q, r - 1, CornerClass::S),
        VertexKey::new(q, r + 1, CornerClass::N),
        VertexKey::new(q - 1, r + 1, CornerClass::N),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeFamily {
    Diamond,
    Triangular,
    Hexagonal,
    Star,
}

impl ShapeFamily {
    pub const ALL: [ShapeFamily; 4] = [
        ShapeFamily::Diamond,
        ShapeFamily::Triangular,
        ShapeFamily::Hexagonal,
        ShapeFamily::Star,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeFamily::Diamond => "diamond",
            ShapeFamily::Triangular => "triangular",
            ShapeFamily::Hexagonal => "hexagonal",
            ShapeFamily::Star => "star",
        }
    }

    pub fn supports(self, order: u32) -> bool {
        match self {
            ShapeFamily::Star => order == 2,
            _ => order >= 1,
        }
    }

    fn check(self, order: u32) -> Result<(), ShapeError> {
        if self.supports(order) {
            Ok(())
        } else {
            let reason = match self {
                ShapeFamily::Star => "the hexagonal star is only defined for order 2",
                _ => "order must be at least 1",
            };
            Err(ShapeError::Unsupported { family: self, order, reason })
        }
    }
}

impl fmt::Display for ShapeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShapeFamily {
    type Err = ShapeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ShapeFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| ShapeError::UnknownFamily(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("unsupported shape {family} of order {order}: {reason}")]
    Unsupported { family: ShapeFamily, order: u32, reason: &'static str },
    #[error("unknown shape family `{0}` (expected diamond, triangular, hexagonal or star)")]
    UnknownFamily(String),
}

/// Number of vertices of a shape, from the closed-form counts.
pub fn expected_vertex_count(family: ShapeFamily, order: u32) -> Result<usize, ShapeError> {
    family.check(order)?;
    let n = order as usize;
    Ok(match family {
        ShapeFamily::Diamond => 2 * n * n + 4 * n,
        ShapeFamily::Triangular => n * n + 4 * n + 1,
        ShapeFamily::Hexagonal => 6 * n * n,
        ShapeFamily::Star => 42,
    })
}

/// Number of hexagons of a shape.
pub fn expected_hexagon_count(family: ShapeFamily, order: u32) -> Result<usize, ShapeError> {
    family.check(order)?;
    let n = order as usize;
    Ok(match family {
        ShapeFamily::Diamond => n * n,
        ShapeFamily::Triangular => n * (n + 1) / 2,
        ShapeFamily::Hexagonal => 3 * n * (n - 1) + 1,
        ShapeFamily::Star => 13,
    })
}

/// Tip hexagons of the star, nestled between consecutive ring hexagons.
pub const STAR_TIPS: [HexCoord; 6] = [
    HexCoord::new(1, 1),
    HexCoord::new(-1, 2),
    HexCoord::new(-2, 1),
    HexCoord::new(-1, -1),
    HexCoord::new(1, -2),
    HexCoord::new(2, -1),
];

fn centers_for(family: ShapeFamily, order: u32) -> Vec<HexCoord> {
    let n = order as i32;
    let mut centers = Vec::new();
    match family {
        ShapeFamily::Diamond => {
            for r in 0..n {
                for q in 0..n {
                    centers.push(HexCoord::new(q, r));
                }
            }
        }
        ShapeFamily::Triangular => {
            for r in 0..n {
                for q in 0..n - r {
                    centers.push(HexCoord::new(q, r));
                }
            }
        }
        ShapeFamily::Hexagonal => {
            let k = n - 1;
            for r in -k..=k {
                for q in -k..=k {
                    if (q + r).abs() <= k {
                        centers.push(HexCoord::new(q, r));
                    }
                }
            }
        }
        ShapeFamily::Star => {
            let origin = HexCoord::new(0, 0);
            centers.push(origin);
            centers.extend(origin.neighbors());
            centers.extend(STAR_TIPS);
        }
    }
    centers.sort_by_key(|c| (c.r, c.q));
    centers
}

/// Immutable incidence structure of one shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    family: ShapeFamily,
    order: u32,
    vertices: Vec<VertexKey>,
    centers: Vec<HexCoord>,
    hexagons: Vec<[usize; 6]>,
    membership: Vec<u8>,
    vertex_hexagons: Vec<Vec<usize>>,
}

/// Builds the deduplicated hexagon/corner graph of a shape.
pub fn build_shape(family: ShapeFamily, order: u32) -> Result<Shape, ShapeError> {
    family.check(order)?;
    let centers = centers_for(family, order);
    let vertex_set: BTreeSet<VertexKey> = centers.iter().flat_map(|&c| hexagon_corners(c)).collect();
    let vertices: Vec<VertexKey> = vertex_set.into_iter().collect();
    let index: BTreeMap<VertexKey, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();

    let hexagons: Vec<[usize; 6]> = centers
        .iter()
        .map(|&c| hexagon_corners(c).map(|k| index[&k]))
        .collect();

    let mut vertex_hexagons = vec![Vec::new(); vertices.len()];
    for (h, hex) in hexagons.iter().enumerate() {
        for &v in hex {
            vertex_hexagons[v].push(h);
        }
    }
    let membership = vertex_hexagons.iter().map(|hs| hs.len() as u8).collect();

    Ok(Shape { family, order, vertices, centers, hexagons, membership, vertex_hexagons })
}

impl Shape {
    pub fn family(&self) -> ShapeFamily {
        self.family
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn hexagon_count(&self) -> usize {
        self.hexagons.len()
    }

    pub fn vertices(&self) -> &[VertexKey] {
        &self.vertices
    }

    pub fn centers(&self) -> &[HexCoord] {
        &self.centers
    }

    pub fn hexagons(&self) -> &[[usize; 6]] {
        &self.hexagons
    }

    pub fn membership(&self) -> &[u8] {
        &self.membership
    }

    /// Indices of the hexagons containing vertex `v`, ascending.
    pub fn hexagons_of(&self, v: usize) -> &[usize] {
        &self.vertex_hexagons[v]
    }

    pub fn hexagon_index(&self, center: HexCoord) -> Option<usize> {
        self.centers.iter().position(|&c| c == center)
    }

    pub fn vertex_index(&self, key: VertexKey) -> Option<usize> {
        self.vertices.binary_search(&key).ok()
    }

    /// Sum of the values `1..=n`.
    pub fn total(&self) -> u64 {
        let n = self.vertices.len() as u64;
        n * (n + 1) / 2
    }

    /// Largest possible hexagonal sum with values `1..=n`.
    pub fn max_hexagon_sum(&self) -> i64 {
        6 * self.vertices.len() as i64 - 15
    }

    /// Shape JSON document: `{family, order, vertices: [{q,r,cls}], hexagons: [[i;6]]}`.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct ShapeJson<'a> {
            family: &'static str,
            order: u32,
            vertices: &'a [VertexKey],
            hexagons: &'a [[usize; 6]],
        }
        let doc = ShapeJson {
            family: self.family.name(),
            order: self.order,
            vertices: &self.vertices,
            hexagons: &self.hexagons,
        };
        serde_json::to_string(&doc).expect("shape json is always serializable")
    }
}

/// A labelling of a shape's vertices; `values[i]` sits on canonical vertex `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    pub family: ShapeFamily,
    pub order: u32,
    pub values: Vec<u32>,
}

impl Assignment {
    pub fn new(shape: &Shape, values: Vec<u32>) -> Self {
        Assignment { family: shape.family, order: shape.order, values }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    OutOfRange { vertex: usize, value: u32 },
    Duplicate { value: u32 },
    Missing { value: u32 },
    HexagonSum { hexagon: usize, center: HexCoord, sum: u64, expected: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OutOfRange { vertex, value } => {
                write!(f, "value {value} at vertex {vertex} is out of range")
            }
            Violation::Duplicate { value } => write!(f, "duplicate value {value}"),
            Violation::Missing { value } => write!(f, "missing value {value}"),
            Violation::HexagonSum { hexagon, center, sum, expected } => write!(
                f,
                "hexagon {hexagon} at {center} sums to {sum}, expected {expected}"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("assignment has {found} values but the shape has {expected} vertices")]
    LengthMismatch { expected: usize, found: usize },
    #[error("assignment is for {found_family} {found_order}, shape is {family} {order}")]
    ShapeMismatch { family: ShapeFamily, order: u32, found_family: ShapeFamily, found_order: u32 },
    #[error("{} violation(s): {}", .0.len(), join_violations(.0))]
    Violations(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

fn permutation_violations(values: &[u32]) -> Vec<Violation> {
    let n = values.len();
    let mut seen = vec![0usize; n + 1];
    let mut out = Vec::new();
    for (vertex, &value) in values.iter().enumerate() {
        if value == 0 || value as usize > n {
            out.push(Violation::OutOfRange { vertex, value });
        } else {
            seen[value as usize] += 1;
        }
    }
    for (value, &count) in seen.iter().enumerate().skip(1) {
        if count > 1 {
            out.push(Violation::Duplicate { value: value as u32 });
        } else if count == 0 {
            out.push(Violation::Missing { value: value as u32 });
        }
    }
    out
}

/// Checks that `assignment` is a normal HTP solution and returns its magic constant.
///
/// On failure every violation is reported. Hexagon sums are compared with the
/// most frequent sum (earliest hexagon wins ties).
pub fn verify_solution(shape: &Shape, assignment: &Assignment) -> Result<u64, VerifyError> {
    if assignment.family != shape.family || assignment.order != shape.order {
        return Err(VerifyError::ShapeMismatch {
            family: shape.family,
            order: shape.order,
            found_family: assignment.family,
            found_order: assignment.order,
        });
    }
    let values = &assignment.values;
    if values.len() != shape.vertex_count() {
        return Err(VerifyError::LengthMismatch { expected: shape.vertex_count(), found: values.len() });
    }
    let mut violations = permutation_violations(values);

    let sums: Vec<u64> = shape
        .hexagons
        .iter()
        .map(|hex| hex.iter().map(|&v| u64::from(values[v])).sum())
        .collect();
    let mut freq: BTreeMap<u64, usize> = BTreeMap::new();
    for &s in &sums {
        *freq.entry(s).or_default() += 1;
    }
    let best = freq.values().copied().max().unwrap_or(0);
    let magic = sums.iter().copied().find(|s| freq[s] == best).unwrap_or(0);
    for (h, &sum) in sums.iter().enumerate() {
        if sum != magic {
            violations.push(Violation::HexagonSum {
                hexagon: h,
                center: shape.centers[h],
                sum,
                expected: magic,
            });
        }
    }

    if violations.is_empty() {
        Ok(magic)
    } else {
        Err(VerifyError::Violations(violations))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("complement needs a permutation of 1..n: {}", join_violations(.0))]
pub struct NotAPermutation(pub Vec<Violation>);

/// Replaces every value `v` by `n + 1 - v`; maps an `M` solution to a `6n + 6 - M` solution.
pub fn complement_solution(assignment: &Assignment) -> Result<Assignment, NotAPermutation> {
    let violations = permutation_violations(&assignment.values);
    if !violations.is_empty() {
        return Err(NotAPermutation(violations));
    }
    let n = assignment.values.len() as u32;
    Ok(Assignment {
        family: assignment.family,
        order: assignment.order,
        values: assignment.values.iter().map(|&v| n + 1 - v).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use CornerClass::{N, S};

    fn key(q: i32, r: i32, cls: CornerClass) -> VertexKey {
        VertexKey::new(q, r, cls)
    }

    fn supported() -> Vec<(ShapeFamily, u32)> {
        let mut out = vec![(ShapeFamily::Star, 2)];
        for family in [ShapeFamily::Diamond, ShapeFamily::Triangular, ShapeFamily::Hexagonal] {
            for order in 1..=4 {
                out.push((family, order));
            }
        }
        out
    }

    #[test]
    fn corners_of_origin() {
        assert_eq!(
            hexagon_corners(HexCoord::new(0, 0)),
            [key(0, 0, N), key(0, 0, S), key(1, -1, S), key(0, -1, S), key(0, 1, N), key(-1, 1, N)]
        );
    }

    #[test]
    fn neighbour_corners_overlap_in_two() {
        let a: BTreeSet<_> = hexagon_corners(HexCoord::new(1, 0)).into_iter().collect();
        let b: BTreeSet<_> = hexagon_corners(HexCoord::new(0, 1)).into_iter().collect();
        let shared: Vec<_> = a.intersection(&b).copied().collect();
        assert_eq!(shared, vec![key(1, 0, S), key(0, 1, N)]);

        let c: BTreeSet<_> = hexagon_corners(HexCoord::new(0, 0)).into_iter().collect();
        let d: BTreeSet<_> = hexagon_corners(HexCoord::new(1, 1)).into_iter().collect();
        assert!(c.is_disjoint(&d));
    }

    #[test]
    fn corner_incidence_matches_corner_lists() {
        for q in -3..=3 {
            for r in -3..=3 {
                for cls in [N, S] {
                    let k = key(q, r, cls);
                    for c in k.incident_centers() {
                        assert!(hexagon_corners(c).contains(&k), "{k} not a corner of {c}");
                    }
                }
            }
        }
    }

    #[test]
    fn reference_sizes() {
        let d2 = build_shape(ShapeFamily::Diamond, 2).unwrap();
        assert_eq!((d2.hexagon_count(), d2.vertex_count()), (4, 16));
        let h1 = build_shape(ShapeFamily::Hexagonal, 1).unwrap();
        assert_eq!((h1.hexagon_count(), h1.vertex_count()), (1, 6));
        let star = build_shape(ShapeFamily::Star, 2).unwrap();
        assert_eq!((star.hexagon_count(), star.vertex_count()), (13, 42));

        assert_eq!(expected_vertex_count(ShapeFamily::Diamond, 3), Ok(30));
        assert_eq!(expected_vertex_count(ShapeFamily::Triangular, 4), Ok(33));
        assert_eq!(expected_vertex_count(ShapeFamily::Hexagonal, 3), Ok(54));
    }

    #[test]
    fn unsupported_orders_are_rejected() {
        assert!(matches!(build_shape(ShapeFamily::Star, 3), Err(ShapeError::Unsupported { .. })));
        assert!(matches!(build_shape(ShapeFamily::Star, 1), Err(ShapeError::Unsupported { .. })));
        assert!(matches!(build_shape(ShapeFamily::Diamond, 0), Err(ShapeError::Unsupported { .. })));
        assert!(expected_vertex_count(ShapeFamily::Hexagonal, 0).is_err());
        assert_eq!("rhombus".parse::<ShapeFamily>(), Err(ShapeError::UnknownFamily("rhombus".into())));
        assert_eq!("star".parse::<ShapeFamily>(), Ok(ShapeFamily::Star));
    }

    #[test]
    fn counts_match_closed_forms() {
        for (family, order) in supported() {
            let shape = build_shape(family, order).unwrap();
            assert_eq!(shape.vertex_count(), expected_vertex_count(family, order).unwrap(), "{family} {order}");
            assert_eq!(shape.hexagon_count(), expected_hexagon_count(family, order).unwrap(), "{family} {order}");
        }
    }

    #[test]
    fn structure_invariants() {
        for (family, order) in supported() {
            let shape = build_shape(family, order).unwrap();
            for hex in shape.hexagons() {
                let distinct: BTreeSet<_> = hex.iter().collect();
                assert_eq!(distinct.len(), 6);
            }
            for (i, a) in shape.hexagons().iter().enumerate() {
                for (j, b) in shape.hexagons().iter().enumerate().skip(i + 1) {
                    let shared = a.iter().filter(|v| b.contains(v)).count();
                    let dist = shape.centers()[i].distance(shape.centers()[j]);
                    assert_eq!(shared, if dist == 1 { 2 } else { 0 }, "{family} {order} hexes {i},{j}");
                }
            }
            let present: BTreeSet<_> = shape.centers().iter().copied().collect();
            for (v, &k) in shape.vertices().iter().enumerate() {
                let m = shape.membership()[v];
                assert!((1..=3).contains(&m));
                let expected = k.incident_centers().iter().filter(|c| present.contains(c)).count();
                assert_eq!(m as usize, expected);
            }
            assert!(shape.vertices().windows(2).all(|w| w[0] < w[1]));
            assert_eq!(build_shape(family, order).unwrap(), shape);
        }
    }

    #[test]
    fn verify_single_hexagon() {
        let shape = build_shape(ShapeFamily::Diamond, 1).unwrap();
        let ok = Assignment::new(&shape, vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(verify_solution(&shape, &ok), Ok(21));

        let dup = Assignment::new(&shape, vec![1, 1, 3, 4, 5, 6]);
        let Err(VerifyError::Violations(v)) = verify_solution(&shape, &dup) else {
            panic!("duplicate accepted");
        };
        assert!(v.contains(&Violation::Duplicate { value: 1 }));
        assert!(v.contains(&Violation::Missing { value: 2 }));

        let short = Assignment::new(&shape, vec![1, 2, 3]);
        assert_eq!(
            verify_solution(&shape, &short),
            Err(VerifyError::LengthMismatch { expected: 6, found: 3 })
        );
    }

    #[test]
    fn verify_reports_deviating_hexagons() {
        let shape = build_shape(ShapeFamily::Diamond, 2).unwrap();
        let values: Vec<u32> = (1..=16).collect();
        let Err(VerifyError::Violations(v)) = verify_solution(&shape, &Assignment::new(&shape, values)) else {
            panic!("identity labelling is not magic");
        };
        assert!(v.iter().any(|x| matches!(x, Violation::HexagonSum { .. })));
    }

    #[test]
    fn complement_of_single_hexagon() {
        let shape = build_shape(ShapeFamily::Diamond, 1).unwrap();
        let a = Assignment::new(&shape, vec![1, 2, 3, 4, 5, 6]);
        let c = complement_solution(&a).unwrap();
        assert_eq!(c.values, vec![6, 5, 4, 3, 2, 1]);
        assert_eq!(verify_solution(&shape, &c), Ok(21));
        assert!(complement_solution(&Assignment::new(&shape, vec![1, 1, 3, 4, 5, 6])).is_err());
    }

    #[test]
    fn shape_json_is_stable() {
        let shape = build_shape(ShapeFamily::Diamond, 1).unwrap();
        let json = shape.to_json();
        assert_eq!(json, build_shape(ShapeFamily::Diamond, 1).unwrap().to_json());
        assert!(json.starts_with(r#"{"family":"diamond","order":1,"vertices":[{"q":0,"r":-1,"cls":"S"}"#));
    }

    proptest! {
        #[test]
        fn complement_is_an_involution(perm in Just((1..=30u32).collect::<Vec<_>>()).prop_shuffle()) {
            let shape = build_shape(ShapeFamily::Diamond, 3).unwrap();
            let a = Assignment::new(&shape, perm);
            let back = complement_solution(&complement_solution(&a).unwrap()).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
