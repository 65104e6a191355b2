//! Idempotent endofunctions on the finite set `{0, …, m−1}`.
//!
//! A map `f` is idempotent iff it fixes every point of its image, so an
//! idempotent map is determined by its image `S` together with an arbitrary
//! assignment of the remaining `m − |S|` points into `S`. Counting those
//! choices gives `Σₖ C(m, k) · k^(m−k)`.

use rayon::prelude::*;
use serde::Serialize;

/// Largest `m` for which maps are listed (7⁷ = 823 543 candidates).
pub const MAX_ENUMERATE_M: usize = 7;
/// Largest `m` for which the closed-form count fits comfortably in `u64`.
pub const MAX_COUNT_M: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FiniteError {
    #[error("domain size must be at least 1")]
    Empty,
    #[error("table entry {value} at position {position} is outside [0, {m})")]
    OutOfRange {
        position: usize,
        value: usize,
        m: usize,
    },
    #[error("m = {m} is outside the supported range 1..={max}")]
    UnsupportedSize { m: usize, max: usize },
    #[error("cannot compose maps on domains of size {0} and {1}")]
    SizeMismatch(usize, usize),
}

/// A map `{0..m−1} → {0..m−1}` stored as a lookup table.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct FiniteEndofunction {
    table: Vec<usize>,
}

impl FiniteEndofunction {
    pub fn new(table: Vec<usize>) -> Result<FiniteEndofunction, FiniteError> {
        let m = table.len();
        if m == 0 {
            return Err(FiniteError::Empty);
        }
        if let Some((position, &value)) = table.iter().enumerate().find(|(_, &v)| v >= m) {
            return Err(FiniteError::OutOfRange { position, value, m });
        }
        Ok(FiniteEndofunction { table })
    }

    pub fn identity(m: usize) -> Result<FiniteEndofunction, FiniteError> {
        FiniteEndofunction::new((0..m).collect())
    }

    pub fn m(&self) -> usize {
        self.table.len()
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, x: usize) -> usize {
        self.table[x]
    }

    /// `f(f(x)) = f(x)` for all x.
    pub fn is_idempotent(&self) -> bool {
        self.table.iter().all(|&y| self.table[y] == y)
    }

    /// Checks that `f` is the identity on its image, computing the image
    /// explicitly.
    pub fn image_fixing_holds(&self) -> bool {
        let mut in_image = vec![false; self.m()];
        for &y in &self.table {
            in_image[y] = true;
        }
        in_image
            .iter()
            .enumerate()
            .filter(|(_, &hit)| hit)
            .all(|(y, _)| self.table[y] == y)
    }

    /// `self ∘ other`, i.e. `x ↦ self(other(x))`.
    pub fn compose(&self, other: &FiniteEndofunction) -> Result<FiniteEndofunction, FiniteError> {
        if self.m() != other.m() {
            return Err(FiniteError::SizeMismatch(self.m(), other.m()));
        }
        Ok(FiniteEndofunction {
            table: other.table.iter().map(|&y| self.table[y]).collect(),
        })
    }

    /// k-fold composition `f ∘ … ∘ f`; `k = 0` gives the identity.
    pub fn iterate(&self, k: u64) -> FiniteEndofunction {
        let mut result = FiniteEndofunction {
            table: (0..self.m()).collect(),
        };
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = base.compose(&result).expect("same size");
            }
            base = base.compose(&base).expect("same size");
            k >>= 1;
        }
        result
    }

    pub fn image(&self) -> Vec<usize> {
        let mut img = self.table.clone();
        img.sort_unstable();
        img.dedup();
        img
    }

    /// Comma-separated table entries.
    pub fn to_csv_row(&self) -> String {
        self.table
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumerationMode {
    /// Filter all `m^m` maps.
    BruteForce,
    /// Choose the image set, fix it pointwise, map the rest into it.
    Constructive,
}

fn check_enumerable(m: usize) -> Result<(), FiniteError> {
    if m == 0 || m > MAX_ENUMERATE_M {
        return Err(FiniteError::UnsupportedSize {
            m,
            max: MAX_ENUMERATE_M,
        });
    }
    Ok(())
}

/// All idempotent maps on `{0..m−1}`, sorted lexicographically by table.
pub fn enumerate_idempotent(m: usize) -> Result<Vec<FiniteEndofunction>, FiniteError> {
    enumerate_idempotent_with(m, EnumerationMode::Constructive)
}

pub fn enumerate_idempotent_with(
    m: usize,
    mode: EnumerationMode,
) -> Result<Vec<FiniteEndofunction>, FiniteError> {
    check_enumerable(m)?;
    Ok(match mode {
        EnumerationMode::BruteForce => brute_force(m),
        EnumerationMode::Constructive => constructive(m),
    })
}

/// Advances `digits` as a base-`radix` odometer, last digit fastest.
/// Returns false after the final state.
fn odometer_step(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}

fn brute_force(m: usize) -> Vec<FiniteEndofunction> {
    let mut table = vec![0; m];
    let mut out = Vec::new();
    loop {
        if table.iter().all(|&y| table[y] == y) {
            out.push(FiniteEndofunction {
                table: table.clone(),
            });
        }
        if !odometer_step(&mut table, m) {
            break;
        }
    }
    out
}

fn constructive(m: usize) -> Vec<FiniteEndofunction> {
    let mut out: Vec<FiniteEndofunction> = (1u32..(1 << m))
        .into_par_iter()
        .flat_map_iter(|mask| {
            let image: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
            let free: Vec<usize> = (0..m).filter(|&i| mask & (1 << i) == 0).collect();
            let mut choice = vec![0; free.len()];
            let mut maps = Vec::new();
            loop {
                let mut table: Vec<usize> = (0..m).collect();
                for (&x, &c) in free.iter().zip(&choice) {
                    table[x] = image[c];
                }
                maps.push(FiniteEndofunction { table });
                if !odometer_step(&mut choice, image.len()) {
                    break;
                }
            }
            maps
        })
        .collect();
    out.sort_unstable();
    out
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// `Σ_{k=1..m} C(m, k) · k^(m−k)`, the number of idempotent maps.
pub fn count_idempotent(m: usize) -> Result<u64, FiniteError> {
    if m == 0 || m > MAX_COUNT_M {
        return Err(FiniteError::UnsupportedSize {
            m,
            max: MAX_COUNT_M,
        });
    }
    let m = m as u64;
    let total = (1..=m)
        .map(|k| u128::from(binomial(m, k)) * u128::from(k).pow((m - k) as u32))
        .sum::<u128>();
    Ok(u64::try_from(total).expect("count fits in u64 for m <= 20"))
}
