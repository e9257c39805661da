//! Program model and the configuration basis of the computer's Hilbert space.
//!
//! Each qubit is one particle on a chain of `N + 1` rows by two columns; the
//! row records algorithmic progress and the column the logical bit. Readout
//! particles add one two-position factor each. Basis states are ordered
//! lexicographically: qubit 0 is the most significant digit, then row, then
//! column, with readout positions as the least significant digits.

mod program;

pub use program::*;

use crate::error::{Error, Result};

/// Default cap on the basis dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 1 << 26;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    pub row: usize,
    pub col: u8,
}

impl Site {
    pub fn new(row: usize, col: u8) -> Self {
        Site { row, col }
    }

    fn digit(self) -> usize {
        2 * self.row + self.col as usize
    }
}

/// One occupied site per qubit plus one position per readout particle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub sites: Vec<Site>,
    pub readout: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigurationBasis {
    num_qubits: usize,
    num_steps: usize,
    num_readout: usize,
    dim: usize,
    qubit_strides: Vec<usize>,
}

pub fn enumerate_basis(program: &Program) -> Result<ConfigurationBasis> {
    enumerate_basis_with_cap(program, DEFAULT_DIMENSION_CAP)
}

pub fn enumerate_basis_with_cap(program: &Program, cap: usize) -> Result<ConfigurationBasis> {
    program.validate()?;
    ConfigurationBasis::new(
        program.num_qubits,
        program.num_steps,
        program.readout.len(),
        cap,
    )
}

impl ConfigurationBasis {
    pub fn new(num_qubits: usize, num_steps: usize, num_readout: usize, cap: usize) -> Result<Self> {
        if num_qubits == 0 || num_steps == 0 {
            return Err(Error::Validation(
                "basis needs at least one qubit and one step".into(),
            ));
        }
        let sites = 2 * (num_steps as u128 + 1);
        let exact = sites
            .checked_pow(num_qubits as u32)
            .and_then(|d| d.checked_mul(1u128 << num_readout.min(127)));
        let dim = match exact {
            Some(d) if d <= cap as u128 => d as usize,
            Some(d) => return Err(Error::Size { dim: d, cap }),
            None => return Err(Error::Size { dim: u128::MAX, cap }),
        };
        let readout_block = 1usize << num_readout;
        let sites = 2 * (num_steps + 1);
        let mut qubit_strides = vec![0; num_qubits];
        let mut stride = readout_block;
        for a in (0..num_qubits).rev() {
            qubit_strides[a] = stride;
            stride *= sites;
        }
        Ok(ConfigurationBasis {
            num_qubits,
            num_steps,
            num_readout,
            dim,
            qubit_strides,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn num_readout(&self) -> usize {
        self.num_readout
    }

    pub fn sites_per_qubit(&self) -> usize {
        2 * (self.num_steps + 1)
    }

    /// Index offset of one site step of qubit `a`.
    pub fn stride(&self, qubit: usize) -> usize {
        self.qubit_strides[qubit]
    }

    #[inline]
    pub fn site(&self, index: usize, qubit: usize) -> Site {
        let digit = (index / self.qubit_strides[qubit]) % self.sites_per_qubit();
        Site {
            row: digit / 2,
            col: (digit % 2) as u8,
        }
    }

    #[inline]
    pub fn row(&self, index: usize, qubit: usize) -> usize {
        (index / self.qubit_strides[qubit]) % self.sites_per_qubit() / 2
    }

    /// Position (0 = left, 1 = right) of readout particle `r`.
    #[inline]
    pub fn readout_position(&self, index: usize, particle: usize) -> u8 {
        ((index >> (self.num_readout - 1 - particle)) & 1) as u8
    }

    /// Index of the readout factor alone (`0..2^R`).
    #[inline]
    pub fn readout_block(&self, index: usize) -> usize {
        index & ((1usize << self.num_readout) - 1)
    }

    /// Index reached by moving qubit `a` from the site it occupies in `index` to `to`.
    #[inline]
    pub fn moved(&self, index: usize, qubit: usize, to: Site) -> usize {
        let from = self.site(index, qubit);
        let stride = self.qubit_strides[qubit];
        index - from.digit() * stride + to.digit() * stride
    }

    /// Index of the configuration with every qubit at `row`, columns given by
    /// the bits of `logical` (qubit 0 most significant) and readout factor `readout`.
    pub fn row_index(&self, row: usize, logical: usize, readout: usize) -> usize {
        let m = self.num_qubits;
        let mut index = readout;
        for a in 0..m {
            let bit = (logical >> (m - 1 - a)) & 1;
            index += (2 * row + bit) * self.qubit_strides[a];
        }
        index
    }

    pub fn config_index(&self, config: &Configuration) -> Result<usize> {
        if config.sites.len() != self.num_qubits {
            return Err(Error::Domain(format!(
                "configuration has {} sites for {} qubits",
                config.sites.len(),
                self.num_qubits
            )));
        }
        if config.readout.len() != self.num_readout {
            return Err(Error::Domain(format!(
                "configuration has {} readout positions for {} readout particles",
                config.readout.len(),
                self.num_readout
            )));
        }
        let mut index = 0;
        for (a, site) in config.sites.iter().enumerate() {
            if site.row > self.num_steps || site.col > 1 {
                return Err(Error::Domain(format!(
                    "qubit {a}: site (row {}, col {}) outside the chain",
                    site.row, site.col
                )));
            }
            index += site.digit() * self.qubit_strides[a];
        }
        for (r, &pos) in config.readout.iter().enumerate() {
            if pos > 1 {
                return Err(Error::Domain(format!(
                    "readout {r}: position {pos} is not 0 or 1"
                )));
            }
            index += (pos as usize) << (self.num_readout - 1 - r);
        }
        Ok(index)
    }

    pub fn index_config(&self, index: usize) -> Result<Configuration> {
        if index >= self.dim {
            return Err(Error::Domain(format!(
                "index {index} outside basis of dimension {}",
                self.dim
            )));
        }
        Ok(Configuration {
            sites: (0..self.num_qubits).map(|a| self.site(index, a)).collect(),
            readout: (0..self.num_readout)
                .map(|r| self.readout_position(index, r))
                .collect(),
        })
    }
}
