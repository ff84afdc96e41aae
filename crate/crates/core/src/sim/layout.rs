//! House geometry: rooms, gateways and the room adjacency graph.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::path::Path;

use crate::error::{Error, Result};

/// A 2-D point in metres.
pub type Point = [f64; 2];

/// Euclidean distance between two points.
pub fn distance(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Static description of a house: room names and positions, gateway
/// positions, and which rooms connect to which.
///
/// Adjacency is stored as index pairs into `rooms`; it is interpreted
/// symmetrically and must describe a connected graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HouseLayout {
    pub rooms: Vec<String>,
    pub room_positions: Vec<Point>,
    pub gateway_positions: Vec<Point>,
    pub adjacency: Vec<[usize; 2]>,
}

impl HouseLayout {
    /// Number of rooms (label classes).
    pub fn room_count(&self) -> usize {
        self.rooms.len()
    }

    /// Number of gateways.
    pub fn gateway_count(&self) -> usize {
        self.gateway_positions.len()
    }

    /// Index of a room by name.
    pub fn room_index(&self, name: &str) -> Option<usize> {
        self.rooms.iter().position(|r| r == name)
    }

    /// Neighbour lists implied by `adjacency`, symmetric by construction.
    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.rooms.len()];
        for &[a, b] in &self.adjacency {
            if a < self.rooms.len() && b < self.rooms.len() && a != b {
                if !nb[a].contains(&b) {
                    nb[a].push(b);
                }
                if !nb[b].contains(&a) {
                    nb[b].push(a);
                }
            }
        }
        for list in &mut nb {
            list.sort_unstable();
        }
        nb
    }

    /// Full validation: connectivity plus the two-class minimum the
    /// classifier needs.
    pub fn validate(&self) -> Result<()> {
        if self.rooms.len() < 2 {
            return Err(Error::InvalidLayout(format!(
                "need at least 2 rooms, got {}",
                self.rooms.len()
            )));
        }
        self.validate_connectivity()
    }

    /// Structural validation only; accepts single-room layouts, which are
    /// still simulable.
    pub fn validate_connectivity(&self) -> Result<()> {
        if self.rooms.is_empty() {
            return Err(Error::InvalidLayout("need at least 1 room".into()));
        }
        if self.gateway_positions.is_empty() {
            return Err(Error::InvalidLayout("need at least 1 gateway".into()));
        }
        if self.room_positions.len() != self.rooms.len() {
            return Err(Error::InvalidLayout(format!(
                "{} rooms but {} room positions",
                self.rooms.len(),
                self.room_positions.len()
            )));
        }
        for &[a, b] in &self.adjacency {
            if a >= self.rooms.len() || b >= self.rooms.len() {
                return Err(Error::InvalidLayout(format!(
                    "adjacency pair [{a}, {b}] out of range"
                )));
            }
        }
        // Connectivity: BFS from room 0 must reach everything.
        let nb = self.neighbours();
        let mut seen = vec![false; self.rooms.len()];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(r) = queue.pop_front() {
            for &n in &nb[r] {
                if !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        if let Some(unreached) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidLayout(format!(
                "room '{}' is unreachable from '{}'",
                self.rooms[unreached], self.rooms[0]
            )));
        }
        Ok(())
    }

    /// Shortest room-to-room path (inclusive of both endpoints) over the
    /// adjacency graph. Valid layouts always have one.
    pub fn shortest_path(&self, from: usize, to: usize) -> Vec<usize> {
        if from == to {
            return vec![from];
        }
        let nb = self.neighbours();
        let mut prev = vec![usize::MAX; self.rooms.len()];
        let mut queue = VecDeque::from([from]);
        prev[from] = from;
        while let Some(r) = queue.pop_front() {
            if r == to {
                break;
            }
            for &n in &nb[r] {
                if prev[n] == usize::MAX {
                    prev[n] = r;
                    queue.push_back(n);
                }
            }
        }
        let mut path = vec![to];
        let mut cur = to;
        while cur != from {
            cur = prev[cur];
            path.push(cur);
        }
        path.reverse();
        path
    }

    /// Loads a layout from a JSON file and validates it.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let layout: HouseLayout = serde_json::from_str(&text)?;
        layout.validate()?;
        Ok(layout)
    }

    /// The five-room, six-gateway demo house used by the examples and the
    /// end-to-end tests.
    pub fn demo() -> Self {
        HouseLayout {
            rooms: vec![
                "hall".into(),
                "kitchen".into(),
                "lounge".into(),
                "bedroom".into(),
                "bathroom".into(),
            ],
            room_positions: vec![
                [5.0, 4.0],  // hall, central
                [1.5, 1.5],  // kitchen
                [8.5, 1.5],  // lounge
                [1.5, 6.5],  // bedroom
                [8.5, 6.5],  // bathroom
            ],
            gateway_positions: vec![
                [0.5, 0.5],
                [9.5, 0.5],
                [0.5, 7.5],
                [9.5, 7.5],
                [5.0, 0.5],
                [5.0, 7.5],
            ],
            adjacency: vec![[0, 1], [0, 2], [0, 3], [0, 4]],
        }
    }
}
