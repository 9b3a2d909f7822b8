//! Magic-constant bounds with machine-checked coverage identities.
//!
//! Every derivation groups vertices structurally (disjoint hexagon sets,
//! leftovers, membership counts) and validates each linear identity it relies
//! on as a [`CoverCertificate`] before computing extremes. Intermediate
//! arithmetic is exact; the only rounding is the final floor to an integer.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Rational64;
use thiserror::Error;

use crate::hexgrid::{build_shape, HexCoord, Shape, ShapeError, ShapeFamily, STAR_TIPS};

/// `3n + 3`, the fixed point of the complement transform.
pub fn average_magic(n: usize) -> i64 {
    3 * n as i64 + 3
}

/// `6n + 6 - m`: the magic constant of the complemented labelling.
pub fn complement_magic(m: i64, n: usize) -> i64 {
    6 * n as i64 + 6 - m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    ExactFormula,
    Literature,
    Trivial,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::ExactFormula => "exact-formula",
            BoundKind::Literature => "literature",
            BoundKind::Trivial => "trivial",
        }
    }
}

impl fmt::Display for BoundKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MagicBounds {
    pub lower: i64,
    pub upper: i64,
    pub kind: BoundKind,
}

impl MagicBounds {
    pub fn contains(&self, m: i64) -> bool {
        (self.lower..=self.upper).contains(&m)
    }
}

/// Multiplicities over hexagons and single vertices asserting that, for every
/// vertex `v`, `sum(hex_mult[h] for h containing v) + vtx_mult[v] == target[v]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverCertificate {
    pub hex_mult: Vec<u32>,
    pub vtx_mult: Vec<u32>,
    pub target: Vec<u32>,
}

impl CoverCertificate {
    pub fn zeros(shape: &Shape) -> Self {
        CoverCertificate {
            hex_mult: vec![0; shape.hexagon_count()],
            vtx_mult: vec![0; shape.vertex_count()],
            target: vec![0; shape.vertex_count()],
        }
    }

    /// Builds a certificate from sparse `(index, multiplicity)` lists.
    pub fn from_sparse(
        shape: &Shape,
        hexagons: &[(usize, u32)],
        vertices: &[(usize, u32)],
        target: &[(usize, u32)],
    ) -> Result<Self, CertificateError> {
        let mut cert = Self::zeros(shape);
        for &(h, m) in hexagons {
            *cert
                .hex_mult
                .get_mut(h)
                .ok_or(CertificateError::HexagonOutOfRange { index: h, count: shape.hexagon_count() })? = m;
        }
        for (list, dest) in [(vertices, &mut cert.vtx_mult), (target, &mut cert.target)] {
            for &(v, m) in list {
                *dest
                    .get_mut(v)
                    .ok_or(CertificateError::VertexOutOfRange { index: v, count: shape.vertex_count() })? = m;
            }
        }
        Ok(cert)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateError {
    #[error("hexagon index {index} out of range (shape has {count})")]
    HexagonOutOfRange { index: usize, count: usize },
    #[error("vertex index {index} out of range (shape has {count})")]
    VertexOutOfRange { index: usize, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverCheck {
    Valid,
    Invalid { vertex: usize, achieved: u32, target: u32 },
}

impl CoverCheck {
    pub fn is_valid(self) -> bool {
        self == CoverCheck::Valid
    }
}

/// Checks the coverage identity; reports the first failing vertex.
pub fn check_cover_certificate(shape: &Shape, cert: &CoverCertificate) -> Result<CoverCheck, CertificateError> {
    if cert.hex_mult.len() != shape.hexagon_count() {
        let index = cert.hex_mult.len().max(shape.hexagon_count()) - 1;
        return Err(CertificateError::HexagonOutOfRange { index, count: shape.hexagon_count() });
    }
    for len in [cert.vtx_mult.len(), cert.target.len()] {
        if len != shape.vertex_count() {
            let index = len.max(shape.vertex_count()) - 1;
            return Err(CertificateError::VertexOutOfRange { index, count: shape.vertex_count() });
        }
    }
    let mut achieved = cert.vtx_mult.clone();
    for (h, hex) in shape.hexagons().iter().enumerate() {
        for &v in hex {
            achieved[v] += cert.hex_mult[h];
        }
    }
    Ok(achieved
        .iter()
        .zip(&cert.target)
        .position(|(a, t)| a != t)
        .map_or(CoverCheck::Valid, |vertex| CoverCheck::Invalid {
            vertex,
            achieved: achieved[vertex],
            target: cert.target[vertex],
        }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedCertificate {
    pub label: String,
    pub cert: CoverCertificate,
}

/// Intermediate quantities of a derivation and its inequality chain.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DerivationReport {
    pub quantities: Vec<(String, Rational64)>,
    pub chain: Vec<String>,
    /// Discrepancies with previously published values.
    pub warnings: Vec<String>,
    pub certificates: Vec<NamedCertificate>,
}

impl DerivationReport {
    fn set(&mut self, label: &str, value: impl Into<Rational64>) {
        self.quantities.push((label.to_string(), value.into()));
    }

    fn line(&mut self, text: impl Into<String>) {
        self.chain.push(text.into());
    }

    pub fn get(&self, label: &str) -> Option<Rational64> {
        self.quantities.iter().find(|(l, _)| l == label).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Certificate(#[from] CertificateError),
    #[error("certificate `{label}` rejected at vertex {vertex}: coverage {achieved}, expected {target}")]
    CertificateRejected { label: String, vertex: usize, achieved: u32, target: u32 },
    #[error("unexpected structure: {0}")]
    Structure(String),
    #[error("magic constant {0} is outside the refutation domain")]
    RefutationDomain(i64),
}

/// Sum of the `k` largest values of `1..=n`.
pub fn top_sum(n: usize, k: usize) -> i64 {
    let (n, k) = (n as i64, k as i64);
    k * (2 * n - k + 1) / 2
}

/// Sum of the `k` smallest values `1..=k`.
pub fn bottom_sum(k: usize) -> i64 {
    let k = k as i64;
    k * (k + 1) / 2
}

fn floor(x: Rational64) -> i64 {
    x.floor().to_integer()
}

type VertexSet = BTreeSet<usize>;

fn vertices_of(shape: &Shape, hexagons: &[usize]) -> VertexSet {
    hexagons.iter().flat_map(|&h| shape.hexagons()[h]).collect()
}

fn all_vertices(shape: &Shape) -> VertexSet {
    (0..shape.vertex_count()).collect()
}

fn expect_size(label: &str, set: &VertexSet, size: usize) -> Result<(), BoundsError> {
    if set.len() == size {
        Ok(())
    } else {
        Err(BoundsError::Structure(format!("group {label} has {} vertices, expected {size}", set.len())))
    }
}

fn hexagon_at(shape: &Shape, center: HexCoord) -> Result<usize, BoundsError> {
    shape
        .hexagon_index(center)
        .ok_or_else(|| BoundsError::Structure(format!("no hexagon at {center}")))
}

/// The unique hexagon minimising (largest center distance, total center distance).
fn central_hexagon(shape: &Shape) -> Result<usize, BoundsError> {
    let centers = shape.centers();
    let key: Vec<(i32, i32)> = centers
        .iter()
        .map(|&c| {
            let dists = centers.iter().map(|&o| c.distance(o));
            (dists.clone().max().unwrap_or(0), dists.sum())
        })
        .collect();
    let best = key.iter().copied().min().unwrap_or_default();
    let mut inner = (0..centers.len()).filter(|&h| key[h] == best);
    match (inner.next(), inner.next()) {
        (Some(h), None) => Ok(h),
        _ => Err(BoundsError::Structure("shape has no unique central hexagon".into())),
    }
}

/// Lexicographically smallest set (by hexagon index) of `size` pairwise
/// vertex-disjoint hexagons.
pub fn lex_disjoint_hexagons(shape: &Shape, size: usize) -> Option<Vec<usize>> {
    fn extend(shape: &Shape, size: usize, start: usize, chosen: &mut Vec<usize>, used: &mut Vec<bool>) -> bool {
        if chosen.len() == size {
            return true;
        }
        for h in start..shape.hexagon_count() {
            let hex = shape.hexagons()[h];
            if hex.iter().any(|&v| used[v]) {
                continue;
            }
            hex.iter().for_each(|&v| used[v] = true);
            chosen.push(h);
            if extend(shape, size, h + 1, chosen, used) {
                return true;
            }
            chosen.pop();
            hex.iter().for_each(|&v| used[v] = false);
        }
        false
    }
    let mut chosen = Vec::with_capacity(size);
    let mut used = vec![false; shape.vertex_count()];
    extend(shape, size, 0, &mut chosen, &mut used).then_some(chosen)
}

/// Certificate with multiplicity 1 on `hexagons` and on `singles`, and a
/// per-vertex target from `weight`.
fn certificate(shape: &Shape, hexagons: &[usize], singles: &VertexSet, weight: impl Fn(usize) -> u32) -> CoverCertificate {
    let mut cert = CoverCertificate::zeros(shape);
    for &h in hexagons {
        cert.hex_mult[h] = 1;
    }
    for &v in singles {
        cert.vtx_mult[v] = 1;
    }
    for v in 0..shape.vertex_count() {
        cert.target[v] = weight(v);
    }
    cert
}

fn validate(shape: &Shape, report: &mut DerivationReport, label: &str, cert: CoverCertificate) -> Result<(), BoundsError> {
    match check_cover_certificate(shape, &cert)? {
        CoverCheck::Valid => {
            report.certificates.push(NamedCertificate { label: label.to_string(), cert });
            Ok(())
        }
        CoverCheck::Invalid { vertex, achieved, target } => Err(BoundsError::CertificateRejected {
            label: label.to_string(),
            vertex,
            achieved,
            target,
        }),
    }
}

/// Bounds from an integer upper bound and complement symmetry.
fn symmetric(n: usize, upper: i64, kind: BoundKind) -> MagicBounds {
    MagicBounds { lower: complement_magic(upper, n), upper, kind }
}

/// Best known magic-constant range for a shape, with its derivation.
pub fn bounds_for(family: ShapeFamily, order: u32) -> Result<(MagicBounds, DerivationReport), BoundsError> {
    let shape = build_shape(family, order)?;
    let mut report = DerivationReport::default();
    let n = shape.vertex_count();
    report.set("n", n as i64);
    report.set("total", shape.total() as i64);
    let bounds = match (family, order) {
        (ShapeFamily::Diamond | ShapeFamily::Hexagonal, 1) => single_hexagon(&shape, &mut report)?,
        (ShapeFamily::Diamond, 2) => diamond_2(&shape, &mut report)?,
        (ShapeFamily::Diamond, 3) => diamond_3(&shape, &mut report)?,
        (ShapeFamily::Triangular, 2) => triangular_2(&shape, &mut report)?,
        (ShapeFamily::Triangular, 3) => triangular_3(&shape, &mut report)?,
        (ShapeFamily::Triangular, 4) => triangular_4(&shape, &mut report)?,
        (ShapeFamily::Hexagonal, 2) => hexagonal_2(&shape, &mut report)?,
        (ShapeFamily::Hexagonal, 3) => hexagonal_3(&shape, &mut report)?,
        (ShapeFamily::Star, 2) => star_2(&shape, &mut report)?,
        _ => trivial(&shape, &mut report),
    };
    debug_assert!(bounds.lower <= bounds.upper);
    Ok((bounds, report))
}

/// Min and max 6-subset sums of `1..=n`, intersected with complement symmetry.
fn trivial(shape: &Shape, report: &mut DerivationReport) -> MagicBounds {
    let n = shape.vertex_count();
    let lo = bottom_sum(6);
    let hi = top_sum(n, 6);
    let lower = lo.max(complement_magic(hi, n));
    let upper = hi.min(complement_magic(lo, n));
    report.set("min_six_sum", lo);
    report.set("max_six_sum", hi);
    report.line(format!("{lo} <= M <= {hi} (extreme sums of six distinct values in 1..{n})"));
    MagicBounds { lower, upper, kind: BoundKind::Trivial }
}

fn single_hexagon(shape: &Shape, report: &mut DerivationReport) -> Result<MagicBounds, BoundsError> {
    validate(shape, report, "single hexagon covers every vertex once", certificate(shape, &[0], &VertexSet::new(), |_| 1))?;
    let m = shape.total() as i64;
    report.set("M", m);
    report.line(format!("M = {m} (the only hexagon holds every value)"));
    Ok(MagicBounds { lower: m, upper: m, kind: BoundKind::ExactFormula })
}

fn diamond_2(shape: &Shape, report: &mut DerivationReport) -> Result<MagicBounds, BoundsError> {
    let n = shape.vertex_count();
    let total = shape.total() as i64;
    let outer = lex_disjoint_hexagons(shape, 2).ok_or_else(|| BoundsError::Structure("no disjoint pair".into()))?;
    let inner: Vec<usize> = (0..shape.hexagon_count()).filter(|h| !outer.contains(h)).collect();
    let outer_v = vertices_of(shape, &outer);
    let c: VertexSet = all_vertices(shape).difference(&outer_v).copied().collect();
    let a: VertexSet = vertices_of(shape, &inner[..1])
        .intersection(&vertices_of(shape, &inner[1..]))
        .copied()
        .collect();
    let b: VertexSet = vertices_of(shape, &inner)
        .into_iter()
        .filter(|v| !a.contains(v) && !c.contains(v))
        .collect();
    expect_size("a", &a, 2)?;
    expect_size("c", &c, 4)?;
    if a.iter().any(|&v| shape.membership()[v] != 3) {
        return Err(BoundsError::Structure("group a is not the pair of triple points".into()));
    }

    // outer pair + c: C = total - 2M
    validate(shape, report, "outer hexagon pair plus leftover c covers every vertex once", certificate(shape, &outer, &c, |_| 1))?;
    // inner pair: 2M = 2A + B + C
    validate(
        shape,
        report,
        "inner hexagon pair counts a twice, b and c once",
        certificate(shape, &inner, &VertexSet::new(), |v| {
            if a.contains(&v) {
                2
            } else if b.contains(&v) || c.contains(&v) {
                1
            } else {
                0
            }
        }),
    )?;

    let a_max = top_sum(n, a.len());
    let ab_max = top_sum(n, a.len() + b.len());
    let four_m = Rational64::from(a_max + ab_max + total);
    let m_max = four_m / 4;
    report.set("|a|", a.len() as i64);
    report.set("|b|", b.len() as i64);
    report.set("|c|", c.len() as i64);
    report.set("A_max", a_max);
    report.set("A+B_max", ab_max);
    report.set("4M_max", four_m);
    report.set("M_max", m_max);
    report.line(format!("C = {total} - 2M and 2M = 2A + B + C, so 4M = 2A + B + {total}"));
    report.line(format!(
        "4M <= A_max + (A+B)_max + {total} = {a_max} + {ab_max} + {total} = {four_m}, so M <= {}",
        floor(m_max)
    ));
    Ok(symmetric(n, floor(m_max), BoundKind::ExactFormula))
}

/// Outcome of the eight-hexagon argument against an extreme Diamond-3 constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diamond3Refutation {
    /// Constant as requested.
    pub magic: i64,
    /// Constant the argument ran on (the complement image for low constants).
    pub examined: i64,
    pub f_sum: i64,
    pub fd_max: i64,
    pub t_size: usize,
    pub d_size: usize,
    pub s_size: usize,
    pub t_max: i64,
    pub td_max: i64,
    pub bound_8m: i64,
    pub eight_m: i64,
    pub refuted: bool,
}

struct Diamond3Groups {
    disjoint: Vec<usize>,
    ring: Vec<usize>,
    f: VertexSet,
    t: VertexSet,
    d: VertexSet,
    s: VertexSet,
}

fn diamond_3_groups(shape: &Shape) -> Result<Diamond3Groups, BoundsError> {
    let disjoint = lex_disjoint_hexagons(shape, 4).ok_or_else(|| BoundsError::Structure("no disjoint quadruple".into()))?;
    let center = central_hexagon(shape)?;
    let ring: Vec<usize> = (0..shape.hexagon_count()).filter(|&h| h != center).collect();
    let f: VertexSet = all_vertices(shape).difference(&vertices_of(shape, &disjoint)).copied().collect();
    let mut ring_membership = vec![0u32; shape.vertex_count()];
    for &h in &ring {
        for &v in &shape.hexagons()[h] {
            ring_membership[v] += 1;
        }
    }
    let by = |k: u32| -> VertexSet { (0..shape.vertex_count()).filter(|&v| ring_membership[v] == k).collect() };
    let groups = Diamond3Groups { t: by(3), d: by(2), s: by(1), disjoint, ring, f };
    expect_size("f", &groups.f, 6)?;
    if groups.t.len() + groups.d.len() + groups.s.len() != shape.vertex_count() {
        return Err(BoundsError::Structure("a vertex lies outside the eight surrounding hexagons".into()));
    }
    Ok(groups)
}

/// Tests whether the eight hexagons around the center of the 3x3 diamond
/// rule out magic constant `magic`. Constants below the average are mapped
/// through the complement first.
pub fn refute_diamond3_extreme(magic: i64) -> Result<Diamond3Refutation, BoundsError> {
    let shape = build_shape(ShapeFamily::Diamond, 3)?;
    let n = shape.vertex_count();
    let total = shape.total() as i64;
    let examined = if magic < average_magic(n) { complement_magic(magic, n) } else { magic };
    // the six f-values must be distinct positive integers
    if examined <= average_magic(n) || total - 4 * examined < bottom_sum(6) {
        return Err(BoundsError::RefutationDomain(magic));
    }
    let g = diamond_3_groups(&shape)?;
    let fd: VertexSet = g.f.intersection(&g.d).copied().collect();
    let f_sum = total - 4 * examined;
    let fd_max = f_sum - bottom_sum(g.f.len() - fd.len());
    let t_max = top_sum(n, g.t.len());
    let td_max = top_sum(n, g.t.len() + g.d.len() - fd.len()) + fd_max;
    let bound_8m = total + t_max + td_max;
    let eight_m = 8 * examined;
    Ok(Diamond3Refutation {
        magic,
        examined,
        f_sum,
        fd_max,
        t_size: g.t.len(),
        d_size: g.d.len(),
        s_size: g.s.len(),
        t_max,
        td_max,
        bound_8m,
        eight_m,
        refuted: eight_m > bound_8m,
    })
}

fn diamond_3(shape: &Shape, report: &mut DerivationReport) -> Result<MagicBounds, BoundsError> {
    const LITERATURE: (i64, i64) = (76, 110);
    let n = shape.vertex_count();
    let g = diamond_3_groups(shape)?;
    validate(shape, report, "four disjoint hexagons plus the six f-vertices cover every vertex once", certificate(shape, &g.disjoint, &g.f, |_| 1))?;
    validate(
        shape,
        report,
        "eight surrounding hexagons count T three times, D twice, S once",
        certificate(shape, &g.ring, &VertexSet::new(), |v| {
            if g.t.contains(&v) {
                3
            } else if g.d.contains(&v) {
                2
            } else {
                1
            }
        }),
    )?;

    report.set("literature_lower", LITERATURE.0);
    report.set("literature_upper", LITERATURE.1);
    report.line(format!("{} <= M <= {} (published range)", LITERATURE.0, LITERATURE.1));
    let mut lower = LITERATURE.0;
    let mut upper = LITERATURE.1;
    let high = refute_diamond3_extreme(upper)?;
    report.set("f_sum", high.f_sum);
    report.set("fD_max", high.fd_max);
    report.set("|T|", high.t_size as i64);
    report.set("|D|", high.d_size as i64);
    report.set("|S|", high.s_size as i64);
    report.set("t_max", high.t_max);
    report.set("t+d_max", high.td_max);
    report.set("8M_bound", high.bound_8m);
    report.line(format!(
        "M = {upper}: f-sum = {}, 8M = {} > {} + t_max + (t+d)_max = {}",
        high.f_sum, high.eight_m, shape.total(), high.bound_8m
    ));
    if high.refuted {
        upper -= 1;
        let low = refute_diamond3_extreme(lower)?;
        if low.refuted {
            lower += 1;
            report.line(format!("M = {} is the complement image of {}, refuted likewise", low.magic, low.examined));
        }
    }
    report.line(format!("{lower} <= M <= {upper}"));
    debug_assert_eq!(lower, complement_magic(upper, n));
    Ok(MagicBounds { lower, upper, kind: BoundKind::Literature })
}

fn triangular_2(shape: &Shape, report: &mut DerivationReport) -> Result<MagicBounds, BoundsError> {
    let n = shape.vertex_count();
    let total = shape.total() as i64;
    let by = |k: u8| -> VertexSet { (0..n).filter(|&v| shape.membership()[v] == k).collect() };
    let (a, b, c) = (by(3), by(2), by(1));
    expect_size("a", &a, 1)?;
    expect_size("b", &b, 3)?;
    expect_size("c", &c, 9)?;
    let all: Vec<usize> = (0..shape.hexagon_count()).collect();
    validate(shape, report, "three hexagons count a three times, b twice, c once", certificate(shape, &all, &VertexSet::new(), |v| u32::from(shape.membership()[v])))?;

    let a_max = top_sum(n, a.len());
    let ab_max = top_sum(n, a.len() + b.len());
    let three_m = Rational64::from(a_max + ab_max + total);
    let m_max = three_m / 3;
    report.set("a_max", a_max);
    report.set("a+B_max", ab_max);
    report.set("3M_max", three_m);
    report.set("M_max", m_max);
    report.line(format!("3M = 3a + 2B + C = 2a + B + {total}"));
    report.line(format!("3M <= {a_max} + {ab_max} + {total} = {three_m}, so M <= {}", floor(m_max)));
    Ok(symmetric(n, floor(m_max), BoundKind::ExactFormula))
}

fn triangular_3(shape: &Shape, report: &mut DerivationReport) -> Result<MagicBounds, BoundsError> {
    const PUBLISHED_UPPER: i64 = 71;
    let n = shape.vertex_count();
    let total = shape.total() as i64;
    let disjoint = lex_disjoint_hexagons(shape, 3).ok_or_else(|| BoundsError::Structure("no disjoint triple".into()))?;
    let leftover: VertexSet = all_vertices(shape).difference(&vertices_of(shape, &disjoint)).copied().collect();
    expect_size("leftover", &leftover, 4)?;
    validate(shape, report, "three corner hexagons plus the leftover cover every vertex once", certificate(shape, &disjoint, &leftover, |_| 1))?;

    let leftover_min = bottom_sum(leftover.len());
    let three_m = Rational64::from(total - leftover_min);
    let m_max = three_m / 3;
    let upper = floor(m_max);
    report.set("leftover_min", leftover_min);
    report.set("3M_max", three_m);
    report.set("M_max", m_max);
    report.line(format!("3M = {total} - (a + d1 + d2 + d3) <= {total} - {leftover_min} = {three_m}, so M <= {upper}"));
    if upper != PUBLISHED_UPPER {
        report.warnings.push(format!(
            "published upper bound {PUBLISHED_UPPER} disagrees with the identity-derived {upper} \
             (complement of the published lower bound {} is {upper})",
            complement_magic(upper, n)
        ));
    }
    Ok(symmetric(n, upper, BoundKind::ExactFormula))
}

fn triangular_4(shape: &Shape, report: &mut DerivationReport) -> Result<MagicBounds, BoundsError> {
    const PUBLISHED_UPPER: i64 = 122;
    let n = shape.vertex_count();
    let total = shape.total() as i64;
    let center = central_hexagon(shape)?;
    let disjoint = lex_disjoint_hexagons(shape, 4).ok_or_else(|| BoundsError::Structure("no disjoint quadruple".into()))?;
    if !disjoint.contains(&center) {
        return Err(BoundsError::Structure("disjoint quadruple misses the central hexagon".into()));
    }
    let m_group: VertexSet = shape.hexagons()[center].iter().copied().collect();
    let leftover: VertexSet = all_vertices(shape).difference(&vertices_of(shape, &disjoint)).copied().collect();
    let member = |v: usize| shape.membership()[v];
    let a: VertexSet = leftover.iter().copied().filter(|&v| member(v) == 2).collect();
    let b: VertexSet = leftover.iter().copied().filter(|&v| member(v) == 1).collect();
    let rest = |k: u8| -> VertexSet {
        (0..n).filter(|v| member(*v) == k && !leftover.contains(v) && !m_group.contains(v)).collect()
    };
    let (c, d, e) = (rest(3), rest(2), rest(1));
    for (label, set, size) in [("a", &a, 3), ("b", &b, 6), ("c", &c, 3), ("d", &d, 6), ("e", &e, 9)] {
        expect_size(label, set, size)?;
    }
    let outside_center: VertexSet = all_vertices(shape).difference(&m_group).copied().collect();
    validate(shape, report, "central hexagon plus a, b, c, d, e cover every vertex once", certificate(shape, &[center], &outside_center, |_| 1))?;
    validate(shape, report, "four disjoint hexagons plus a and b cover every vertex once", certificate(shape, &disjoint, &leftover, |_| 1))?;
    let all: Vec<usize> = (0..shape.hexagon_count()).collect();
    validate(
        shape,
        report,
        "all ten hexagons count c and m three times, a and d twice, b and e once",
        certificate(shape, &all, &VertexSet::new(), |v| {
            if c.contains(&v) || m_group.contains(&v) {
                3
            } else if a.contains(&v) || d.contains(&v) {
                2
            } else {
                1
            }
        }),
    )?;

    let c_max = top_sum(n, c.len());
    let d_max = top_sum(n, c.len() + d.len()) - c_max;
    let b_min = bottom_sum(b.len());
    let twelve_m = Rational64::from(2 * c_max + d_max - b_min + 2 * total);
    let m_max = twelve_m / 12;
    let upper = floor(m_max);
    report.set("C_max", c_max);
    report.set("D_max", d_max);
    report.set("B_min", b_min);
    report.set("12M_max", twelve_m);
    report.set("M_max", m_max);
    report.line(format!(
        "10M = 2A + B + 3C + 2D + E + 3M and A + B + 4M = {total}, so 12M = 2C + D - B + {}",
        2 * total
    ));
    report.line(format!(
        "12M <= 2*{c_max} + {d_max} - {b_min} + {} = {twelve_m}, so M <= {m_max} and M <= {upper}",
        2 * total
    ));
    if upper != PUBLISHED_UPPER {
        report.warnings.push(format!(
            "published upper bound {PUBLISHED_UPPER} is slack: M <= {m_max} gives the integer bound {upper}"
        ));
    }
    Ok(symmetric(n, upper, BoundKind::ExactFormula))
}

fn hexagonal_2(shape: &Shape, report: &mut DerivationReport) -> Result<MagicBounds, BoundsError> {
    let n = shape.vertex_count();
    let total = shape.total() as i64;
    let center = central_hexagon(shape)?;
    let ring: Vec<usize> = (0..shape.hexagon_count()).filter(|&h| h != center).collect();
    let m_group: VertexSet = shape.hexagons()[center].iter().copied().collect();
    let outside = |k: u8| -> VertexSet {
        (0..n).filter(|v| shape.membership()[*v] == k && !m_group.contains(v)).collect()
    };
    let (b, c) = (outside(2), outside(1));
    expect_size("b", &b, 6)?;
    expect_size("c", &c, 12)?;
    let bc: VertexSet = b.union(&c).copied().collect();
    validate(shape, report, "center hexagon plus b and c cover every vertex once", certificate(shape, &[center], &bc, |_| 1))?;
    validate(
        shape,
        report,
        "six ring hexagons count m and b twice, c once",
        certificate(shape, &ring, &VertexSet::new(), |v| if c.contains(&v) { 1 } else { 2 }),
    )?;

    let b_max = top_sum(n, b.len());
    let five_m = Rational64::from(total + b_max);
    let m_max = five_m / 5;
    report.set("B_max", b_max);
    report.set("5M_max", five_m);
    report.set("M_max", m_max);
    report.line(format!("6M = 2M + 2B + C and M + B + C = {total}, so 5M = {total} + B"));
    report.line(format!("5M <= {total} + {b_max} = {five_m}, so M <= {m_max} and M <= {}", floor(m_max)));
    Ok(symmetric(n, floor(m_max), BoundKind::ExactFormula))
}

fn hexagonal_3(shape: &Shape, report: &mut DerivationReport) -> Result<MagicBounds, BoundsError> {
    let n = shape.vertex_count();
    let total = shape.total() as i64;
    let center = central_hexagon(shape)?;
    let origin = shape.centers()[center];
    let cover = |axial: bool| -> Result<Vec<usize>, BoundsError> {
        let mut hexes = vec![center];
        for (h, &c) in shape.centers().iter().enumerate() {
            let (dq, dr) = (c.q - origin.q, c.r - origin.r);
            let on_axis = dq == 0 || dr == 0 || dq + dr == 0;
            if c.distance(origin) == 2 && on_axis == axial {
                hexes.push(h);
            }
        }
        if hexes.len() == 7 {
            Ok(hexes)
        } else {
            Err(BoundsError::Structure("distance-2 ring is incomplete".into()))
        }
    };
    let axial = cover(true)?;
    let diagonal = cover(false)?;
    let b: VertexSet = all_vertices(shape).difference(&vertices_of(shape, &axial)).copied().collect();
    let c: VertexSet = all_vertices(shape).difference(&vertices_of(shape, &diagonal)).copied().collect();
    expect_size("b", &b, 12)?;
    expect_size("c", &c, 12)?;
    if !b.is_disjoint(&c) {
        return Err(BoundsError::Structure("leftover groups b and c overlap".into()));
    }
    validate(shape, report, "center plus axial distance-2 hexagons plus b cover every vertex once", certificate(shape, &axial, &b, |_| 1))?;
    validate(shape, report, "center plus diagonal distance-2 hexagons plus c cover every vertex once", certificate(shape, &diagonal, &c, |_| 1))?;

    let bc_min = bottom_sum(b.len() + c.len());
    let fourteen_m = Rational64::from(2 * total - bc_min);
    let m_max = fourteen_m / 14;
    report.set("B+C_min", bc_min);
    report.set("14M_max", fourteen_m);
    report.set("M_max", m_max);
    report.line(format!("B = C = {total} - 7M, so B + C = {} - 14M", 2 * total));
    report.line(format!("14M <= {} - {bc_min} = {fourteen_m}, so M <= {}", 2 * total, floor(m_max)));
    Ok(symmetric(n, floor(m_max), BoundKind::ExactFormula))
}

fn star_2(shape: &Shape, report: &mut DerivationReport) -> Result<MagicBounds, BoundsError> {
    let total = shape.total() as i64;
    let mut cover = vec![hexagon_at(shape, HexCoord::new(0, 0))?];
    for tip in STAR_TIPS {
        cover.push(hexagon_at(shape, tip)?);
    }
    validate(shape, report, "center plus six tip hexagons cover every vertex once", certificate(shape, &cover, &VertexSet::new(), |_| 1))?;
    let k = cover.len() as i64;
    if total % k != 0 {
        return Err(BoundsError::Structure(format!("exact cover of {k} hexagons does not divide {total}")));
    }
    let m = total / k;
    report.set("7M", total);
    report.set("M", m);
    report.line(format!("{k}M = {total}, so M = {m}"));
    Ok(MagicBounds { lower: m, upper: m, kind: BoundKind::ExactFormula })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shape(family: ShapeFamily, order: u32) -> Shape {
        build_shape(family, order).unwrap()
    }

    #[test]
    fn average_and_complement() {
        assert_eq!(average_magic(6), 21);
        assert_eq!(average_magic(16), 51);
        assert_eq!(average_magic(42), 129);
        assert_eq!(complement_magic(62, 16), 40);
        assert_eq!(complement_magic(93, 30), 93);
        assert_eq!(complement_magic(77, 30), 109);
        for m in 0..200 {
            assert_eq!(complement_magic(complement_magic(m, 30), 30), m);
        }
    }

    #[test]
    fn extreme_sums() {
        assert_eq!(top_sum(16, 2), 31);
        assert_eq!(top_sum(16, 6), 81);
        assert_eq!(top_sum(30, 14), (17..=30).sum::<i64>());
        assert_eq!(bottom_sum(24), 300);
        assert_eq!(top_sum(5, 0), 0);
    }

    #[test]
    fn diamond_2_cover_certificate() {
        let s = shape(ShapeFamily::Diamond, 2);
        let outer = [s.hexagon_index(HexCoord::new(0, 0)).unwrap(), s.hexagon_index(HexCoord::new(1, 1)).unwrap()];
        let covered = vertices_of(&s, &outer);
        let singles: Vec<(usize, u32)> = (0..16).filter(|v| !covered.contains(v)).map(|v| (v, 1)).collect();
        assert_eq!(singles.len(), 4);
        let target: Vec<(usize, u32)> = (0..16).map(|v| (v, 1)).collect();
        let cert = CoverCertificate::from_sparse(&s, &[(outer[0], 1), (outer[1], 1)], &singles, &target).unwrap();
        assert_eq!(check_cover_certificate(&s, &cert), Ok(CoverCheck::Valid));
    }

    #[test]
    fn star_cover_certificate() {
        let s = shape(ShapeFamily::Star, 2);
        let mut hexes = vec![(s.hexagon_index(HexCoord::new(0, 0)).unwrap(), 1)];
        hexes.extend(STAR_TIPS.iter().map(|&t| (s.hexagon_index(t).unwrap(), 1)));
        let target: Vec<(usize, u32)> = (0..42).map(|v| (v, 1)).collect();
        let cert = CoverCertificate::from_sparse(&s, &hexes, &[], &target).unwrap();
        assert!(check_cover_certificate(&s, &cert).unwrap().is_valid());
    }

    #[test]
    fn zero_certificate_is_valid() {
        let s = shape(ShapeFamily::Triangular, 3);
        assert!(check_cover_certificate(&s, &CoverCertificate::zeros(&s)).unwrap().is_valid());
    }

    #[test]
    fn certificate_errors_and_diagnostics() {
        let s = shape(ShapeFamily::Diamond, 1);
        assert_eq!(
            CoverCertificate::from_sparse(&s, &[(1, 1)], &[], &[]),
            Err(CertificateError::HexagonOutOfRange { index: 1, count: 1 })
        );
        assert_eq!(
            CoverCertificate::from_sparse(&s, &[], &[(6, 1)], &[]),
            Err(CertificateError::VertexOutOfRange { index: 6, count: 6 })
        );
        let mut cert = CoverCertificate::zeros(&s);
        cert.hex_mult[0] = 1;
        assert_eq!(
            check_cover_certificate(&s, &cert),
            Ok(CoverCheck::Invalid { vertex: 0, achieved: 1, target: 0 })
        );
        cert.hex_mult.push(0);
        assert!(check_cover_certificate(&s, &cert).is_err());
    }

    #[test]
    fn lex_disjoint_sets_match_layouts() {
        let at = |s: &Shape, cs: &[(i32, i32)]| -> Vec<usize> {
            let mut v: Vec<usize> = cs.iter().map(|&(q, r)| s.hexagon_index(HexCoord::new(q, r)).unwrap()).collect();
            v.sort();
            v
        };
        let d2 = shape(ShapeFamily::Diamond, 2);
        assert_eq!(lex_disjoint_hexagons(&d2, 2).unwrap(), at(&d2, &[(0, 0), (1, 1)]));
        let d3 = shape(ShapeFamily::Diamond, 3);
        assert_eq!(lex_disjoint_hexagons(&d3, 4).unwrap(), at(&d3, &[(0, 0), (2, 0), (0, 2), (2, 2)]));
        assert_eq!(lex_disjoint_hexagons(&d3, 5), None);
        let t3 = shape(ShapeFamily::Triangular, 3);
        assert_eq!(lex_disjoint_hexagons(&t3, 3).unwrap(), at(&t3, &[(0, 0), (2, 0), (0, 2)]));
        let t4 = shape(ShapeFamily::Triangular, 4);
        assert_eq!(lex_disjoint_hexagons(&t4, 4).unwrap(), at(&t4, &[(0, 0), (3, 0), (0, 3), (1, 1)]));
    }

    #[test]
    fn derivation_quantities() {
        let (b, r) = bounds_for(ShapeFamily::Diamond, 2).unwrap();
        assert_eq!((b.lower, b.upper, b.kind), (40, 62, BoundKind::ExactFormula));
        assert_eq!(r.get("A_max"), Some(31.into()));
        assert_eq!(r.get("A+B_max"), Some(81.into()));
        assert_eq!(r.get("|c|"), Some(4.into()));

        let (b, r) = bounds_for(ShapeFamily::Hexagonal, 2).unwrap();
        assert_eq!((b.lower, b.upper), (65, 85));
        assert_eq!(r.get("M_max"), Some(Rational64::new(429, 5)));

        let (b, r) = bounds_for(ShapeFamily::Triangular, 4).unwrap();
        assert_eq!((b.lower, b.upper), (83, 121));
        assert_eq!(r.get("12M_max"), Some(1458.into()));
        assert_eq!(r.get("M_max"), Some(Rational64::new(243, 2)));
        assert_eq!(r.warnings.len(), 1);

        let (b, r) = bounds_for(ShapeFamily::Triangular, 3).unwrap();
        assert_eq!((b.lower, b.upper), (57, 81));
        assert_eq!(r.get("leftover_min"), Some(10.into()));
        assert!(r.warnings[0].contains("71"));

        let (b, r) = bounds_for(ShapeFamily::Hexagonal, 3).unwrap();
        assert_eq!((b.lower, b.upper), (140, 190));
        assert_eq!(r.get("B+C_min"), Some(300.into()));
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn refutation_at_110() {
        let r = refute_diamond3_extreme(110).unwrap();
        assert_eq!((r.f_sum, r.fd_max), (25, 15));
        assert_eq!((r.t_size, r.d_size, r.s_size), (2, 14, 14));
        assert_eq!((r.t_max, r.td_max), (59, 344));
        assert_eq!((r.bound_8m, r.eight_m), (868, 880));
        assert!(r.refuted);
    }

    #[test]
    fn refutation_near_the_bound() {
        // f_sum = 465 - 436 = 29, fD_max = 19, bound = 465 + 59 + 329 + 19 = 872 = 8 * 109
        let r = refute_diamond3_extreme(109).unwrap();
        assert_eq!((r.f_sum, r.fd_max, r.bound_8m), (29, 19, 872));
        assert!(!r.refuted);
        let low = refute_diamond3_extreme(76).unwrap();
        assert_eq!(low.examined, 110);
        assert!(low.refuted);
        assert!(refute_diamond3_extreme(93).is_err());
        assert!(refute_diamond3_extreme(112).is_err());
        assert!(refute_diamond3_extreme(74).is_err());
    }

    #[test]
    fn two_f_vertices_sit_in_d() {
        let s = shape(ShapeFamily::Diamond, 3);
        let g = diamond_3_groups(&s).unwrap();
        assert_eq!(g.f.intersection(&g.d).count(), 2);
        assert_eq!(g.f.intersection(&g.s).count(), 4);
    }

    #[test]
    fn trivial_fallback() {
        let (b, r) = bounds_for(ShapeFamily::Diamond, 4).unwrap();
        assert_eq!((b.lower, b.upper, b.kind), (21, 6 * 48 - 15, BoundKind::Trivial));
        assert!(r.certificates.is_empty());
        assert!(bounds_for(ShapeFamily::Star, 3).is_err());
    }

    #[test]
    fn bounds_are_pure() {
        for family in ShapeFamily::ALL {
            for order in 1..=4 {
                if family.supports(order) {
                    assert_eq!(bounds_for(family, order), bounds_for(family, order));
                }
            }
        }
    }
}
