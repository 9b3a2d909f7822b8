//! Brute-force reference enumeration for small shapes.
//!
//! Vertices are visited hexagon-major (hexagon 0's corners in canonical order,
//! then the new corners of hexagon 1, and so on) and every value is tried in
//! ascending order. The only pruning is a completed hexagon whose sum is not
//! the target.

use thiserror::Error;

use crate::hexgrid::{Assignment, Shape};

/// Largest vertex count the oracle accepts.
pub const ORACLE_MAX_VERTICES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("shape has {vertices} vertices; the oracle handles at most {limit}")]
pub struct OracleTooLarge {
    pub vertices: usize,
    pub limit: usize,
}

struct Enumeration {
    magic: u64,
    n: usize,
    order: Vec<usize>,
    // hexagons containing the vertex placed at each depth
    touching: Vec<Vec<usize>>,
    // hexagons whose last vertex (in `order`) sits at each depth
    closing: Vec<Vec<usize>>,
    values: Vec<u32>,
    used: Vec<bool>,
    sums: Vec<u64>,
}

impl Enumeration {
    fn new(shape: &Shape, magic: i64) -> Result<Self, OracleTooLarge> {
        let n = shape.vertex_count();
        if n > ORACLE_MAX_VERTICES {
            return Err(OracleTooLarge { vertices: n, limit: ORACLE_MAX_VERTICES });
        }
        let mut order = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        for hex in shape.hexagons() {
            let mut corners = hex.to_vec();
            corners.sort_unstable();
            for v in corners {
                if !placed[v] {
                    placed[v] = true;
                    order.push(v);
                }
            }
        }
        let mut depth_of = vec![0; n];
        for (d, &v) in order.iter().enumerate() {
            depth_of[v] = d;
        }
        let mut closing = vec![Vec::new(); n];
        let mut touching = vec![Vec::new(); n];
        for (h, hex) in shape.hexagons().iter().enumerate() {
            let last = hex.iter().map(|&v| depth_of[v]).max().expect("six corners");
            closing[last].push(h);
            for &v in hex {
                touching[depth_of[v]].push(h);
            }
        }
        Ok(Enumeration {
            magic: u64::try_from(magic).unwrap_or(u64::MAX),
            n,
            order,
            touching,
            closing,
            values: vec![0; n],
            used: vec![false; n + 1],
            sums: vec![0; shape.hexagon_count()],
        })
    }

    fn place(&mut self, depth: usize, x: usize) {
        self.used[x] = true;
        self.values[self.order[depth]] = x as u32;
        for &h in &self.touching[depth] {
            self.sums[h] += x as u64;
        }
    }

    fn lift(&mut self, depth: usize, x: usize) {
        self.used[x] = false;
        self.values[self.order[depth]] = 0;
        for &h in &self.touching[depth] {
            self.sums[h] -= x as u64;
        }
    }

    /// Visits every valid labelling; `visit` returns true to stop.
    fn walk(&mut self, depth: usize, visit: &mut dyn FnMut(&[u32]) -> bool) -> bool {
        if depth == self.n {
            return visit(&self.values);
        }
        for x in 1..=self.n {
            if self.used[x] {
                continue;
            }
            self.place(depth, x);
            let ok = self.closing[depth].iter().all(|&h| self.sums[h] == self.magic);
            let stop = ok && self.walk(depth + 1, visit);
            self.lift(depth, x);
            if stop {
                return true;
            }
        }
        false
    }
}

/// Exact number of labellings of `shape` with every hexagon summing to `magic`.
pub fn oracle_count(shape: &Shape, magic: i64) -> Result<u64, OracleTooLarge> {
    let mut e = Enumeration::new(shape, magic)?;
    let mut count = 0u64;
    e.walk(0, &mut |_| {
        count += 1;
        false
    });
    Ok(count)
}

/// First labelling in enumeration order, if any.
pub fn oracle_find(shape: &Shape, magic: i64) -> Result<Option<Assignment>, OracleTooLarge> {
    let mut e = Enumeration::new(shape, magic)?;
    let mut found = None;
    e.walk(0, &mut |values| {
        found = Some(values.to_vec());
        true
    });
    Ok(found.map(|values| Assignment::new(shape, values)))
}
