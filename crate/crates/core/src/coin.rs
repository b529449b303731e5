//! Quantum coins on the extended complex plane.

use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::density::DensityMatrix2;
use crate::error::StateError;
use crate::numeric::NumericPolicy;

/// A point of the extended complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(Complex64),
    Infinity,
}

impl Extended {
    pub fn real(x: f64) -> Self {
        Extended::Finite(Complex64::new(x, 0.0))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Extended::Infinity)
    }

    pub fn finite(&self) -> Option<Complex64> {
        match *self {
            Extended::Finite(z) => Some(z),
            Extended::Infinity => None,
        }
    }
}

impl From<Complex64> for Extended {
    fn from(z: Complex64) -> Self {
        Extended::Finite(z)
    }
}

impl From<f64> for Extended {
    fn from(x: f64) -> Self {
        Extended::real(x)
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Infinity => f.write_str("inf"),
            Extended::Finite(z) => {
                if z.im == 0.0 {
                    write!(f, "{}", z.re)
                } else if z.re == 0.0 {
                    write!(f, "{}i", z.im)
                } else if z.im < 0.0 {
                    write!(f, "{}-{}i", z.re, -z.im)
                } else {
                    write!(f, "{}+{}i", z.re, z.im)
                }
            }
        }
    }
}

/// A quantum coin `|z⟩ ∝ a|H⟩ + b|V⟩` with `z = a/b`.
///
/// The pair is only defined up to a nonzero complex factor. `z = ∞` is
/// `(a, 0)` and `z = 0` is `(0, b)`; `(0, 0)` is not a state and cannot be
/// built through [`Coin::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coin {
    a: Complex64,
    b: Complex64,
}

/// Alternate name stressing that only the ratio `a : b` matters.
pub type ProjectiveAmplitude = Coin;

impl Coin {
    pub const ZERO: Coin = Coin {
        a: Complex64::new(0.0, 0.0),
        b: Complex64::new(1.0, 0.0),
    };
    pub const ONE: Coin = Coin {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(1.0, 0.0),
    };
    pub const INFINITY: Coin = Coin {
        a: Complex64::new(1.0, 0.0),
        b: Complex64::new(0.0, 0.0),
    };

    pub fn new(a: Complex64, b: Complex64) -> Result<Self, StateError> {
        if !(a.re.is_finite() && a.im.is_finite() && b.re.is_finite() && b.im.is_finite()) {
            return Err(StateError::NonFiniteCoin);
        }
        if a.norm_sqr() + b.norm_sqr() == 0.0 {
            return Err(StateError::NullCoin);
        }
        Ok(Coin { a, b })
    }

    /// Builds a coin from amplitudes that may vanish together. Callers use
    /// `None` as the indefinite marker.
    pub(crate) fn from_raw(a: Complex64, b: Complex64) -> Option<Self> {
        Coin::new(a, b).ok()
    }

    /// `z ↦ (z, 1)`.
    pub fn finite(z: Complex64) -> Self {
        Coin {
            a: z,
            b: Complex64::new(1.0, 0.0),
        }
    }

    pub fn real(x: f64) -> Self {
        Coin::finite(Complex64::new(x, 0.0))
    }

    #[inline]
    pub fn a(&self) -> Complex64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> Complex64 {
        self.b
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }

    /// Probability of measuring `|V⟩`, i.e. `1 / (1 + |z|²)`.
    pub fn bias(&self) -> f64 {
        self.b.norm_sqr() / self.norm_sqr()
    }

    pub fn value(&self) -> Extended {
        if self.b == Complex64::new(0.0, 0.0) {
            Extended::Infinity
        } else {
            Extended::Finite(self.a / self.b)
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.b == Complex64::new(0.0, 0.0)
    }

    /// Unit-norm representative with `b` real and non-negative (and `a`
    /// real positive at the pole).
    pub fn normalized(&self) -> Coin {
        let n = self.norm_sqr().sqrt();
        let phase = if self.b.norm() > 0.0 {
            self.b.conj() / self.b.norm()
        } else {
            self.a.conj() / self.a.norm()
        };
        Coin {
            a: self.a * phase / n,
            b: self.b * phase / n,
        }
    }

    /// Scale-invariant distance `|a₁b₂ − a₂b₁| / (‖u₁‖ ‖u₂‖)`; equals
    /// `sin` of half the Bloch-sphere angle between the two states.
    pub fn projective_distance(&self, other: &Coin) -> f64 {
        let cross = self.a * other.b - other.a * self.b;
        cross.norm() / (self.norm_sqr() * other.norm_sqr()).sqrt()
    }

    pub fn approx_eq(&self, other: &Coin) -> bool {
        self.projective_distance(other) <= NumericPolicy::DEFAULT.projective_eq
    }

    /// Pure-state projector `|z⟩⟨z|`.
    pub fn density(&self) -> DensityMatrix2 {
        DensityMatrix2::from_pure(self.a, self.b)
    }

    pub fn to_bloch(&self) -> BlochPoint {
        let ma = self.a.norm();
        let mb = self.b.norm();
        let theta = 2.0 * mb.atan2(ma);
        let phi = if ma == 0.0 || mb == 0.0 {
            0.0
        } else {
            wrap_angle(self.b.arg() - self.a.arg())
        };
        BlochPoint {
            theta,
            phi: if phi >= 2.0 * PI { 0.0 } else { phi },
        }
    }

    pub fn from_bloch(p: BlochPoint) -> Coin {
        let (s, c) = (p.theta / 2.0).sin_cos();
        Coin {
            a: Complex64::new(c, 0.0),
            b: Complex64::from_polar(s, p.phi),
        }
    }
}

/// Reduces an angle into `[0, 2π)`.
fn wrap_angle(x: f64) -> f64 {
    let r = x % (2.0 * PI);
    if r < 0.0 {
        r + 2.0 * PI
    } else {
        r
    }
}

impl From<Extended> for Coin {
    fn from(z: Extended) -> Self {
        coin_from_complex(z)
    }
}

/// `z ↦ (z, 1)`, `∞ ↦ (1, 0)`.
pub fn coin_from_complex(z: Extended) -> Coin {
    match z {
        Extended::Finite(z) => Coin::finite(z),
        Extended::Infinity => Coin::INFINITY,
    }
}

pub fn bias(c: &Coin) -> f64 {
    c.bias()
}

pub fn coin_density(c: &Coin) -> DensityMatrix2 {
    c.density()
}

/// Spherical coordinates `cos(θ/2)|H⟩ + sin(θ/2)e^{iφ}|V⟩`, so that
/// `z = cot(θ/2) e^{−iφ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochPoint {
    pub theta: f64,
    pub phi: f64,
}

impl BlochPoint {
    pub fn new(theta: f64, phi: f64) -> Self {
        BlochPoint {
            theta: theta.clamp(0.0, PI),
            phi: wrap_angle(phi),
        }
    }

    /// Cartesian Bloch vector `(sin θ cos φ, sin θ sin φ, cos θ)`.
    pub fn vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

pub fn coin_to_bloch(c: &Coin) -> BlochPoint {
    c.to_bloch()
}

pub fn bloch_to_coin(p: BlochPoint) -> Coin {
    Coin::from_bloch(p)
}
