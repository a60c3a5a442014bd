//! Text notation: squares `c3`, moves `S@c3` / `L@f6`, decisions `R@a1-b1-c1` / `G@b2`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::board::{PieceKind, Square};
use super::{DecisionChoice, Move};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid notation {input:?}: {reason}")]
pub struct NotationError {
    pub input: String,
    pub reason: &'static str,
}

fn bad(input: &str, reason: &'static str) -> NotationError {
    NotationError {
        input: input.to_string(),
        reason,
    }
}

impl FromStr for Square {
    type Err = NotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bytes = s.as_bytes();
        if bytes.len() != 2 {
            return Err(bad(s, "expected a column letter a-f and a row digit 1-6"));
        }
        let col = bytes[0]
            .to_ascii_lowercase()
            .wrapping_sub(b'a')
            .wrapping_add(1);
        let row = bytes[1].wrapping_sub(b'0');
        Square::new(row, col).ok_or_else(|| bad(s, "square is off the board"))
    }
}

impl FromStr for PieceKind {
    type Err = NotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "S" | "s" | "small" => Ok(PieceKind::Small),
            "L" | "l" | "large" => Ok(PieceKind::Large),
            _ => Err(bad(s, "piece must be S or L")),
        }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.piece.letter(), self.at)
    }
}

impl FromStr for Move {
    type Err = NotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (piece, at) = s
            .split_once('@')
            .ok_or_else(|| bad(s, "expected <piece>@<square>"))?;
        Ok(Move {
            piece: piece.parse().map_err(|_| bad(s, "piece must be S or L"))?,
            at: at.parse().map_err(|_| bad(s, "bad target square"))?,
        })
    }
}

impl fmt::Display for DecisionChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecisionChoice::RemoveAlignment([a, b, c]) => write!(f, "R@{a}-{b}-{c}"),
            DecisionChoice::GraduateOne(sq) => write!(f, "G@{sq}"),
        }
    }
}

impl FromStr for DecisionChoice {
    type Err = NotationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (tag, rest) = s
            .split_once('@')
            .ok_or_else(|| bad(s, "expected R@.. or G@.."))?;
        match tag {
            "R" => {
                let squares = rest
                    .split('-')
                    .map(Square::from_str)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| bad(s, "bad square in alignment"))?;
                let mut window: [Square; 3] = squares
                    .try_into()
                    .map_err(|_| bad(s, "an alignment has exactly three squares"))?;
                window.sort();
                Ok(DecisionChoice::RemoveAlignment(window))
            }
            "G" => Ok(DecisionChoice::GraduateOne(
                rest.parse().map_err(|_| bad(s, "bad graduation square"))?,
            )),
            _ => Err(bad(s, "decision tag must be R or G")),
        }
    }
}

macro_rules! serde_via_notation {
    ($($ty:ty),*) => {$(
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    )*};
}

serde_via_notation!(Square, Move, DecisionChoice);
