//! Level-`n` Schreier graphs of the Fabrykowski-Gupta action.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::trees::{act_a, act_b, Vertex};

pub const DEFAULT_MAX_LEVEL: usize = 12;

/// Generator moves stored per vertex, in the order `a, a^-1, b, b^-1`.
#[derive(Clone, Debug)]
pub struct SchreierGraph {
    level: usize,
    moves: Vec<[u32; 4]>,
}

pub fn build_schreier(level: usize) -> Result<SchreierGraph> {
    build_schreier_capped(level, DEFAULT_MAX_LEVEL)
}

pub fn build_schreier_capped(level: usize, max_level: usize) -> Result<SchreierGraph> {
    if level > max_level {
        return Err(Error::LevelTooLarge { level, max: max_level });
    }
    let moves = Vertex::level_iter(level)
        .map(|x| {
            [act_a(x, 1), act_a(x, 2), act_b(x, 1), act_b(x, 2)].map(|y| y.index() as u32)
        })
        .collect();
    Ok(SchreierGraph { level, moves })
}

impl SchreierGraph {
    pub fn level(&self) -> usize {
        self.level
    }

    pub fn vertex_count(&self) -> usize {
        self.moves.len()
    }

    pub fn moves(&self, x: Vertex) -> [Vertex; 4] {
        self.moves[x.index() as usize].map(|i| Vertex::from_index(self.level, i as u64))
    }

    fn check(&self, x: Vertex) -> Result<()> {
        if x.level() != self.level {
            return Err(Error::Invalid(format!(
                "vertex {x} is at level {}, graph is at level {}",
                x.level(),
                self.level
            )));
        }
        Ok(())
    }

    /// BFS distances from `source` to every vertex (`u32::MAX` if unreachable).
    pub fn distances_from(&self, source: Vertex) -> Result<Vec<u32>> {
        self.check(source)?;
        let mut dist = vec![u32::MAX; self.moves.len()];
        let mut queue = VecDeque::new();
        dist[source.index() as usize] = 0;
        queue.push_back(source.index() as u32);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x as usize];
            for &y in &self.moves[x as usize] {
                if dist[y as usize] == u32::MAX {
                    dist[y as usize] = dx + 1;
                    queue.push_back(y);
                }
            }
        }
        Ok(dist)
    }

    pub fn distance(&self, u: Vertex, v: Vertex) -> Result<u32> {
        self.check(v)?;
        let d = self.distances_from(u)?[v.index() as usize];
        if d == u32::MAX {
            return Err(Error::Invalid(format!("{v} is unreachable from {u}")));
        }
        Ok(d)
    }

    pub fn is_connected(&self) -> bool {
        self.distances_from(Vertex::from_index(self.level, 0))
            .map(|d| d.iter().all(|&x| x != u32::MAX))
            .unwrap_or(false)
    }

    /// Undirected edge list `source,target,generator`, one row per `(x, x·s)`.
    pub fn edge_list_csv(&self) -> String {
        let mut out = String::from("source,target,generator\n");
        for x in Vertex::level_iter(self.level) {
            let m = self.moves(x);
            writeln!(out, "{x},{},a", m[0]).unwrap();
            writeln!(out, "{x},{},b", m[2]).unwrap();
        }
        out
    }
}

/// The pair `2^{n-1}0` and `2^n` whose distance controls the short-word
/// embedding of the wreath extensions.
pub fn critical_pair(level: usize) -> (Vertex, Vertex) {
    assert!(level >= 1);
    (Vertex::twos_then(level - 1, 0), Vertex::repeated(2, level))
}
