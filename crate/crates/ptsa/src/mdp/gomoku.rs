use serde::{Deserialize, Serialize};

use super::MdpError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Player {
    Black,
    White,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Black => Player::White,
            Player::White => Player::Black,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cell {
    Empty,
    Black,
    White,
}

/// Desk-scale Gomoku position: a square board where the first player to
/// connect `win_length` stones in a row wins. Default 5x5 with 4-in-a-row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GomokuState {
    pub size: usize,
    pub win_length: usize,
    pub board: Vec<Cell>,
    pub to_move: Player,
}

impl GomokuState {
    pub fn new(size: usize, win_length: usize) -> Self {
        assert!(win_length >= 2 && win_length <= size);
        Self { size, win_length, board: vec![Cell::Empty; size * size], to_move: Player::Black }
    }

    fn cell(&self, row: usize, col: usize) -> Cell {
        self.board[row * self.size + col]
    }

    /// The winner, if either side has a completed line.
    pub fn winner(&self) -> Option<Player> {
        let dirs = [(0isize, 1isize), (1, 0), (1, 1), (1, -1)];
        for row in 0..self.size {
            for col in 0..self.size {
                let cell = self.cell(row, col);
                if cell == Cell::Empty {
                    continue;
                }
                for (dr, dc) in dirs {
                    let mut run = 1;
                    let (mut r, mut c) = (row as isize, col as isize);
                    loop {
                        r += dr;
                        c += dc;
                        if r < 0 || c < 0 || r >= self.size as isize || c >= self.size as isize {
                            break;
                        }
                        if self.cell(r as usize, c as usize) != cell {
                            break;
                        }
                        run += 1;
                    }
                    if run >= self.win_length {
                        return Some(if cell == Cell::Black { Player::Black } else { Player::White });
                    }
                }
            }
        }
        None
    }

    pub fn is_terminal(&self) -> bool {
        self.winner().is_some() || self.board.iter().all(|&c| c != Cell::Empty)
    }

    /// Empty cells, as flat board indices; empty when the game is decided.
    pub fn legal_actions(&self) -> Vec<usize> {
        if self.is_terminal() {
            return Vec::new();
        }
        (0..self.board.len()).filter(|&i| self.board[i] == Cell::Empty).collect()
    }

    /// Plays `action` for `to_move`. Returns the successor, the reward from
    /// the mover's perspective (+1 win / -1 loss / 0 otherwise, terminal
    /// states only), and the terminal flag.
    pub fn place(&self, action: usize) -> Result<(GomokuState, f64, bool), MdpError> {
        if action >= self.board.len() || self.board[action] != Cell::Empty || self.is_terminal() {
            return Err(MdpError::IllegalAction { state: format!("{self:?}"), action });
        }
        let mut next = self.clone();
        next.board[action] = match self.to_move {
            Player::Black => Cell::Black,
            Player::White => Cell::White,
        };
        next.to_move = self.to_move.other();
        let terminal = next.is_terminal();
        let reward = match next.winner() {
            Some(w) if w == self.to_move => 1.0,
            Some(_) => -1.0,
            None => 0.0,
        };
        Ok((next, if terminal { reward } else { 0.0 }, terminal))
    }

    /// Stable 64-bit key of the position, used to seed rollouts.
    pub fn board_key(&self) -> u64 {
        let mut key: u64 = if self.to_move == Player::Black { 1 } else { 2 };
        for &c in &self.board {
            let digit = match c {
                Cell::Empty => 0u64,
                Cell::Black => 1,
                Cell::White => 2,
            };
            key = key.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(digit + 1);
        }
        key
    }

    pub fn piece_counts(&self) -> (usize, usize) {
        let black = self.board.iter().filter(|&&c| c == Cell::Black).count();
        let white = self.board.iter().filter(|&&c| c == Cell::White).count();
        (black, white)
    }
}

impl Default for GomokuState {
    fn default() -> Self {
        Self::new(5, 4)
    }
}
