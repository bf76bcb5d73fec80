//! Rectangular boards with 8-neighbour adjacency.

use super::{Direction, Player, Site};

/// A rectangular grid of sites indexed row-major.  Row 0 is player 1's home
/// side; rows increase towards player 1's forward direction.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Board {
    pub rows: usize,
    pub cols: usize,
    orth: Vec<Vec<Site>>,
    diag: Vec<Vec<Site>>,
    corners: Vec<Site>,
    edges: Vec<Site>,
    centre: Vec<Site>,
}

impl Board {
    pub fn square(k: usize) -> Board {
        Board::rectangle(k, k)
    }

    pub fn rectangle(rows: usize, cols: usize) -> Board {
        assert!(rows >= 2 && cols >= 2, "boards are at least 2x2");
        let count = rows * cols;
        let mut orth = vec![Vec::new(); count];
        let mut diag = vec![Vec::new(); count];
        for r in 0..rows {
            for c in 0..cols {
                let s = r * cols + c;
                for (dr, dc) in [(-1i32, 0i32), (0, -1), (0, 1), (1, 0)] {
                    if let Some(t) = offset_site(rows, cols, r, c, dr, dc) {
                        orth[s].push(t);
                    }
                }
                for (dr, dc) in [(-1i32, -1i32), (-1, 1), (1, -1), (1, 1)] {
                    if let Some(t) = offset_site(rows, cols, r, c, dr, dc) {
                        diag[s].push(t);
                    }
                }
            }
        }
        let corners = vec![0, cols - 1, (rows - 1) * cols, (rows - 1) * cols + cols - 1];
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                if r == 0 || r == rows - 1 || c == 0 || c == cols - 1 {
                    edges.push(r * cols + c);
                }
            }
        }
        // The centre block: the middle one or two rows crossed with the
        // middle one or two columns (1, 2 or 4 sites).
        let mid = |len: usize| -> Vec<usize> {
            if len % 2 == 1 {
                vec![len / 2]
            } else {
                vec![len / 2 - 1, len / 2]
            }
        };
        let mut centre = Vec::new();
        for &r in &mid(rows) {
            for &c in &mid(cols) {
                centre.push(r * cols + c);
            }
        }
        centre.sort_unstable();
        Board {
            rows,
            cols,
            orth,
            diag,
            corners,
            edges,
            centre,
        }
    }

    pub fn site_count(&self) -> usize {
        self.rows * self.cols
    }

    pub fn site(&self, row: usize, col: usize) -> Site {
        debug_assert!(row < self.rows && col < self.cols);
        row * self.cols + col
    }

    pub fn coords(&self, s: Site) -> (usize, usize) {
        (s / self.cols, s % self.cols)
    }

    pub fn orth_neighbors(&self, s: Site) -> &[Site] {
        &self.orth[s]
    }

    pub fn diag_neighbors(&self, s: Site) -> &[Site] {
        &self.diag[s]
    }

    pub fn corners(&self) -> &[Site] {
        &self.corners
    }

    /// All perimeter sites (corners included).
    pub fn edges(&self) -> &[Site] {
        &self.edges
    }

    pub fn centre(&self) -> &[Site] {
        &self.centre
    }

    /// One step from `from` in direction `d` as seen by player `p`.
    /// Player 1 faces increasing rows; everyone else faces decreasing rows,
    /// so their offsets are rotated 180 degrees.
    pub fn step(&self, from: Site, d: Direction, p: Player) -> Option<Site> {
        let (mut dr, mut dc) = d.base_offset();
        if p.id() != 1 {
            dr = -dr;
            dc = -dc;
        }
        let (r, c) = self.coords(from);
        offset_site(self.rows, self.cols, r, c, dr, dc)
    }

    /// Breadth-first graph distances over 8-neighbour adjacency from the
    /// nearest target.  Targets must be non-empty.
    pub fn distances_to(&self, targets: &[Site]) -> Vec<u32> {
        assert!(!targets.is_empty(), "distance targets must be non-empty");
        let mut dist = vec![u32::MAX; self.site_count()];
        let mut queue = std::collections::VecDeque::new();
        for &t in targets {
            if dist[t] != 0 {
                dist[t] = 0;
                queue.push_back(t);
            }
        }
        while let Some(s) = queue.pop_front() {
            let next = dist[s] + 1;
            for &t in self.orth[s].iter().chain(self.diag[s].iter()) {
                if dist[t] == u32::MAX {
                    dist[t] = next;
                    queue.push_back(t);
                }
            }
        }
        dist
    }
}

fn offset_site(rows: usize, cols: usize, r: usize, c: usize, dr: i32, dc: i32) -> Option<Site> {
    let nr = r as i32 + dr;
    let nc = c as i32 + dc;
    if nr < 0 || nc < 0 || nr >= rows as i32 || nc >= cols as i32 {
        None
    } else {
        Some(nr as usize * cols + nc as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_board_landmarks() {
        let b = Board::square(3);
        assert_eq!(b.site_count(), 9);
        assert_eq!(b.corners(), &[0, 2, 6, 8]);
        assert_eq!(b.centre(), &[4]);
        assert_eq!(b.edges().len(), 8);
    }

    #[test]
    fn even_board_has_four_centre_sites() {
        let b = Board::square(4);
        assert_eq!(b.centre(), &[5, 6, 9, 10]);
    }

    #[test]
    fn rectangle_centre_mixes_parities() {
        let b = Board::rectangle(3, 4);
        // Middle row 1, middle columns 1 and 2.
        assert_eq!(b.centre(), &[5, 6]);
    }

    #[test]
    fn adjacency_counts() {
        let b = Board::square(3);
        assert_eq!(b.orth_neighbors(4).len(), 4);
        assert_eq!(b.diag_neighbors(4).len(), 4);
        assert_eq!(b.orth_neighbors(0).len(), 2);
        assert_eq!(b.diag_neighbors(0).len(), 1);
    }

    #[test]
    fn distances_are_chebyshev_on_full_rectangles() {
        let b = Board::square(5);
        let d = b.distances_to(&[b.site(2, 2)]);
        for r in 0..5usize {
            for c in 0..5usize {
                let expect = r.abs_diff(2).max(c.abs_diff(2)) as u32;
                assert_eq!(d[b.site(r, c)], expect);
            }
        }
    }

    #[test]
    fn step_is_rotated_for_player_two() {
        let b = Board::square(3);
        let p1 = Player::new(1);
        let p2 = Player::new(2);
        assert_eq!(
            b.step(b.site(0, 1), Direction::Forward, p1),
            Some(b.site(1, 1))
        );
        assert_eq!(
            b.step(b.site(2, 1), Direction::Forward, p2),
            Some(b.site(1, 1))
        );
        assert_eq!(b.step(b.site(0, 1), Direction::Backward, p1), None);
        assert_eq!(
            b.step(b.site(1, 1), Direction::ForwardLeft, p1),
            Some(b.site(2, 0))
        );
        assert_eq!(
            b.step(b.site(1, 1), Direction::ForwardLeft, p2),
            Some(b.site(0, 2))
        );
    }
}
