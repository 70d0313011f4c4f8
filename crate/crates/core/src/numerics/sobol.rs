//! Two-dimensional Sobol sequence with seeded digit scrambling.
//!
//! Each coordinate is scrambled by a random lower-triangular binary matrix
//! (unit diagonal) followed by a random digital shift. Both preserve the
//! net structure of the unscrambled points, so the scrambled set keeps its
//! low discrepancy while different seeds give different point sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BITS: usize = 32;

fn direction_numbers() -> [[u32; BITS]; 2] {
    let mut dirs = [[0u32; BITS]; 2];
    // First coordinate: van der Corput in base 2.
    for (k, d) in dirs[0].iter_mut().enumerate() {
        *d = 1u32 << (BITS - 1 - k);
    }
    // Second coordinate: primitive polynomial x + 1, m_1 = 1, m_k = 2 m_{k-1} xor m_{k-1}.
    let mut m: u64 = 1;
    for (k, d) in dirs[1].iter_mut().enumerate() {
        if k > 0 {
            m = (m << 1) ^ m;
        }
        *d = (m << (BITS - 1 - k)) as u32;
    }
    dirs
}

/// Scrambled 2-D Sobol point generator.
#[derive(Debug, Clone)]
pub struct ScrambledSobol2 {
    dirs: [[u32; BITS]; 2],
    rows: [[u32; BITS]; 2],
    shift: [u32; 2],
}

impl ScrambledSobol2 {
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = [[0u32; BITS]; 2];
        for dim_rows in rows.iter_mut() {
            // Row k (k = 0 is the most significant digit) depends on input
            // digits 0..=k with a one on the diagonal.
            for (k, row) in dim_rows.iter_mut().enumerate() {
                let diag = 1u32 << (BITS - 1 - k);
                let above: u32 = if k == 0 {
                    0
                } else {
                    rng.random::<u32>() & !((1u32 << (BITS - k)) - 1)
                };
                *row = above | diag;
            }
        }
        let shift = [rng.random::<u32>(), rng.random::<u32>()];
        Self {
            dirs: direction_numbers(),
            rows,
            shift,
        }
    }

    fn raw(&self, index: u32, dim: usize) -> u32 {
        let mut x = 0u32;
        let mut i = index;
        let mut k = 0;
        while i != 0 {
            if i & 1 == 1 {
                x ^= self.dirs[dim][k];
            }
            i >>= 1;
            k += 1;
        }
        x
    }

    fn scramble(&self, x: u32, dim: usize) -> u32 {
        let mut y = 0u32;
        for (k, row) in self.rows[dim].iter().enumerate() {
            let bit = (x & row).count_ones() & 1;
            y |= bit << (BITS - 1 - k);
        }
        y ^ self.shift[dim]
    }

    /// Point `index` in the open unit square.
    pub fn point(&self, index: u32) -> [f64; 2] {
        let scale = 1.0 / (1u64 << BITS) as f64;
        let mut out = [0.0; 2];
        for (dim, o) in out.iter_mut().enumerate() {
            let y = self.scramble(self.raw(index, dim), dim);
            *o = (y as f64 + 0.5) * scale;
        }
        out
    }

    /// First `n` points.
    pub fn points(&self, n: usize) -> Vec<[f64; 2]> {
        (0..n as u32).map(|i| self.point(i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unscrambled_second_coordinate_matches_known_prefix() {
        let dirs = direction_numbers();
        let s = ScrambledSobol2 {
            dirs,
            rows: {
                let mut r = [[0u32; BITS]; 2];
                for d in 0..2 {
                    for k in 0..BITS {
                        r[d][k] = 1u32 << (BITS - 1 - k);
                    }
                }
                r
            },
            shift: [0, 0],
        };
        let scale = 1.0 / (1u64 << BITS) as f64;
        let ys: Vec<f64> = (0..4).map(|i| s.raw(i, 1) as f64 * scale).collect();
        assert_eq!(ys, vec![0.0, 0.5, 0.75, 0.25]);
        let xs: Vec<f64> = (0..4).map(|i| s.raw(i, 0) as f64 * scale).collect();
        assert_eq!(xs, vec![0.0, 0.5, 0.25, 0.75]);
    }

    #[test]
    fn each_dyadic_interval_gets_one_point() {
        // A (0, m, 1)-net property per coordinate: 2^m points, one per interval.
        let s = ScrambledSobol2::new(7);
        let pts = s.points(256);
        for dim in 0..2 {
            let mut seen = [false; 256];
            for p in &pts {
                let cell = (p[dim] * 256.0) as usize;
                assert!(!seen[cell]);
                seen[cell] = true;
            }
        }
    }

    #[test]
    fn seeded_determinism() {
        assert_eq!(ScrambledSobol2::new(3).points(50), ScrambledSobol2::new(3).points(50));
        assert_ne!(ScrambledSobol2::new(3).points(50), ScrambledSobol2::new(4).points(50));
    }
}
