use crate::{CoreError, Result};

/// One of the two walls of the slab.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    /// Outward normal: −1 at `x = 0`, +1 at `x = L`.
    pub fn normal(self) -> f64 {
        match self {
            Side::Left => -1.0,
            Side::Right => 1.0,
        }
    }

    /// Velocity component pointing into the domain, `ν = −μ n`.
    pub fn inward(self, mu: f64) -> f64 {
        -mu * self.normal()
    }

    /// True when `μ` enters the slab through this wall.
    pub fn is_incoming(self, mu: f64) -> bool {
        self.inward(mu) > 0.0
    }

    pub fn index(self) -> usize {
        match self {
            Side::Left => 0,
            Side::Right => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlabGeometry {
    length: f64,
}

impl SlabGeometry {
    pub fn new(length: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(CoreError::InvalidArgument(format!(
                "slab length must be positive, got {length}"
            )));
        }
        Ok(Self { length })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn wall_position(&self, side: Side) -> f64 {
        match side {
            Side::Left => 0.0,
            Side::Right => self.length,
        }
    }

    /// Distance from `x` to the given wall.
    pub fn distance(&self, x: f64, side: Side) -> f64 {
        match side {
            Side::Left => x,
            Side::Right => self.length - x,
        }
    }
}

impl Default for SlabGeometry {
    fn default() -> Self {
        Self { length: 1.0 }
    }
}
