//! Physical parameters and lattice geometry.

use crate::error::{Error, Result};

/// Couplings of the model in the frame rotating at the cavity frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Tunnel coupling between neighbouring cavities.
    pub j: f64,
    /// Atom-cavity detuning.
    pub delta: f64,
    /// Atom-photon coupling.
    pub g: f64,
    /// Bare atomic decay rate.
    pub gamma_a: f64,
    /// Photon loss rate per cavity.
    pub gamma_c: f64,
}

impl SystemParams {
    /// Lossless parameters.
    pub fn new(j: f64, delta: f64, g: f64) -> Self {
        Self { j, delta, g, gamma_a: 0.0, gamma_c: 0.0 }
    }

    pub fn with_losses(mut self, gamma_a: f64, gamma_c: f64) -> Self {
        self.gamma_a = gamma_a;
        self.gamma_c = gamma_c;
        self
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [("J", self.j), ("g", self.g), ("gamma_a", self.gamma_a), ("gamma_c", self.gamma_c)];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParam { name, reason: format!("must be finite and >= 0, got {v}") });
            }
        }
        if !self.delta.is_finite() {
            return Err(Error::InvalidParam { name: "delta", reason: "must be finite".into() });
        }
        Ok(())
    }

    pub fn is_lossless(&self) -> bool {
        self.gamma_a == 0.0 && self.gamma_c == 0.0
    }

    /// Mean decay rate (γ_a + γ_c)/2.
    pub fn gamma_bar(&self) -> f64 {
        0.5 * (self.gamma_a + self.gamma_c)
    }

    /// The same couplings with δ → −δ.
    pub fn mirrored(&self) -> Self {
        Self { delta: -self.delta, ..*self }
    }
}

/// Upper (E > 2J) or lower (E < −2J) side of the photonic band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Upper,
    Lower,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Upper => 1.0,
            Branch::Lower => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Branch::Upper => "upper",
            Branch::Lower => "lower",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Open,
}

/// A finite array of `n_sites` cavities with atoms on some of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSpec {
    pub n_sites: usize,
    pub boundary: Boundary,
    pub atom_positions: Vec<usize>,
}

impl LatticeSpec {
    pub fn new(n_sites: usize, boundary: Boundary, atom_positions: Vec<usize>) -> Result<Self> {
        let spec = Self { n_sites, boundary, atom_positions };
        spec.validate()?;
        Ok(spec)
    }

    /// Ring of `n_sites` with one atom at site 0.
    pub fn single_atom_ring(n_sites: usize) -> Self {
        Self { n_sites, boundary: Boundary::Periodic, atom_positions: vec![0] }
    }

    /// Open chain with `n_atoms` atoms spaced by `spacing`, preceded and
    /// followed by `padding` empty sites.
    pub fn equally_spaced_open(n_atoms: usize, spacing: usize, padding: usize) -> Self {
        let span = if n_atoms == 0 { 0 } else { (n_atoms - 1) * spacing };
        Self {
            n_sites: span + 1 + 2 * padding,
            boundary: Boundary::Open,
            atom_positions: (0..n_atoms).map(|i| padding + i * spacing).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::InvalidParam { name: "n_sites", reason: "must be positive".into() });
        }
        if self.atom_positions.len() > 128 {
            return Err(Error::InvalidParam { name: "atom_positions", reason: "at most 128 atoms".into() });
        }
        for w in self.atom_positions.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::InvalidParam {
                    name: "atom_positions",
                    reason: "must be strictly increasing".into(),
                });
            }
        }
        if let Some(&last) = self.atom_positions.last() {
            if last >= self.n_sites {
                return Err(Error::InvalidParam {
                    name: "atom_positions",
                    reason: format!("site {last} outside [0, {})", self.n_sites),
                });
            }
        }
        Ok(())
    }

    pub fn n_atoms(&self) -> usize {
        self.atom_positions.len()
    }

    /// Site distance, using the minimum image on a ring.
    pub fn distance(&self, x: usize, y: usize) -> usize {
        let d = x.abs_diff(y);
        match self.boundary {
            Boundary::Open => d,
            Boundary::Periodic => d.min(self.n_sites - d),
        }
    }

    /// Nearest-neighbour bonds `(x, y)` with `x < y`, without duplicates.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        let mut bonds: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|x| (x, x + 1)).collect();
        if self.boundary == Boundary::Periodic && n > 2 {
            bonds.push((0, n - 1));
        }
        bonds.sort_unstable();
        bonds
    }

    /// Neighbour lists derived from [`LatticeSpec::bonds`].
    pub fn neighbours(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.n_sites];
        for (x, y) in self.bonds() {
            nb[x].push(y);
            nb[y].push(x);
        }
        for list in &mut nb {
            list.sort_unstable();
        }
        nb
    }
}
