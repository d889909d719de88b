use std::fmt;
use std::sync::Arc;

use phase_core::{Quadrature, Side};

/// Boundary datum `(t, side, μ) ↦ value`, read on incoming directions only.
pub type BoundaryFn = Arc<dyn Fn(f64, Side, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    InFlow,
    Diffuse,
    Specular,
}

impl BoundaryKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryKind::InFlow => "inflow",
            BoundaryKind::Diffuse => "diffuse",
            BoundaryKind::Specular => "specular",
        }
    }
}

/// Wall condition. `InFlow(g)` prescribes incoming values; `Diffuse(h)` sets
/// them to the outgoing half-range average plus `ε h`; `Specular(h)` to the
/// mirrored outgoing value plus `ε h`.
#[derive(Clone)]
pub enum BoundaryCondition {
    InFlow(BoundaryFn),
    Diffuse(BoundaryFn),
    Specular(BoundaryFn),
}

impl fmt::Debug for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BoundaryCondition::{:?}", self.kind())
    }
}

impl BoundaryCondition {
    pub fn kind(&self) -> BoundaryKind {
        match self {
            BoundaryCondition::InFlow(_) => BoundaryKind::InFlow,
            BoundaryCondition::Diffuse(_) => BoundaryKind::Diffuse,
            BoundaryCondition::Specular(_) => BoundaryKind::Specular,
        }
    }

    pub fn datum(&self) -> &BoundaryFn {
        match self {
            BoundaryCondition::InFlow(g) | BoundaryCondition::Diffuse(g) | BoundaryCondition::Specular(g) => g,
        }
    }

    pub fn constant_inflow(c: f64) -> Self {
        BoundaryCondition::InFlow(Arc::new(move |_, _, _| c))
    }

    pub fn zero(kind: BoundaryKind) -> Self {
        let z: BoundaryFn = Arc::new(|_, _, _| 0.0);
        match kind {
            BoundaryKind::InFlow => BoundaryCondition::InFlow(z),
            BoundaryKind::Diffuse => BoundaryCondition::Diffuse(z),
            BoundaryKind::Specular => BoundaryCondition::Specular(z),
        }
    }

    /// Incoming flux `Σ_{in} w μ h` of the datum at one wall and time.
    pub fn datum_flux(&self, quad: &Quadrature, t: f64, side: Side) -> f64 {
        let g = self.datum();
        quad.incoming(side).map(|k| quad.weight(k) * quad.node(k) * g(t, side, quad.node(k))).sum()
    }
}
