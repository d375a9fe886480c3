//! Counter-based Gaussian stream.
//!
//! Uniforms come from the SplitMix64 finalizer applied to a counter: draw `n`
//! (zero based) of seed `s` is
//!
//! ```text
//! z = s + (n + 1) · 0x9E3779B97F4A7C15          (mod 2^64)
//! z = (z ^ (z >> 30)) · 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) · 0x94D049BB133111EB
//! x = z ^ (z >> 31)
//! u = ((x >> 11) + 0.5) · 2^-53                 (never 0 or 1)
//! ```
//!
//! Normals `2k` and `2k+1` are the Box–Muller pair built from uniforms `2k`
//! and `2k+1`: `r = sqrt(-2 ln u₀)`, `(r cos 2πu₁, r sin 2πu₁)`.
//! Path `p` under master seed `m` uses the seed `mix(m ^ mix(p + 1))`.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The SplitMix64 output function.
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the substream for path `path` under `master`.
pub fn path_seed(master: u64, path: u64) -> u64 {
    mix(master ^ mix(path.wrapping_add(1)))
}

/// `n`-th raw 64-bit output for `seed`.
pub fn raw(seed: u64, n: u64) -> u64 {
    mix(seed.wrapping_add(n.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// `n`-th uniform in the open interval `(0, 1)`.
pub fn uniform(seed: u64, n: u64) -> f64 {
    ((raw(seed, n) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Deterministic stream of standard normals.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianStream {
    seed: u64,
    counter: u64,
    spare: Option<f64>,
}

impl GaussianStream {
    pub const GENERATOR: &'static str = "splitmix64-counter/box-muller";

    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            counter: 0,
            spare: None,
        }
    }

    /// Substream for one path.
    pub fn for_path(master: u64, path: u64) -> Self {
        Self::new(path_seed(master, path))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of normals drawn so far.
    pub fn position(&self) -> u64 {
        self.counter - u64::from(self.spare.is_some())
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u0 = uniform(self.seed, self.counter);
        let u1 = uniform(self.seed, self.counter + 1);
        self.counter += 2;
        let r = (-2.0 * u0.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u1).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    pub fn fill(&mut self, out: &mut [f64]) {
        for z in out {
            *z = self.next_normal();
        }
    }
}

impl Iterator for GaussianStream {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        Some(self.next_normal())
    }
}
