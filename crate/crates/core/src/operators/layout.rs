use serde::{Deserialize, Serialize};

use crate::{dim_cap, Error, Result};

/// A named tensor factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Register {
    pub label: String,
    pub dim: usize,
}

/// Ordered registers; the total space is their tensor product left to right.
///
/// Labels are unique and the total dimension never exceeds [`dim_cap`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Register>", into = "Vec<Register>")]
pub struct HilbertLayout {
    registers: Vec<Register>,
    dim: usize,
}

impl TryFrom<Vec<Register>> for HilbertLayout {
    type Error = Error;

    fn try_from(registers: Vec<Register>) -> Result<Self> {
        Self::from_registers(registers)
    }
}

impl From<HilbertLayout> for Vec<Register> {
    fn from(layout: HilbertLayout) -> Self {
        layout.registers
    }
}

impl HilbertLayout {
    pub fn new<I, S>(registers: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        Self::from_registers(
            registers
                .into_iter()
                .map(|(label, dim)| Register {
                    label: label.into(),
                    dim,
                })
                .collect(),
        )
    }

    pub fn from_registers(registers: Vec<Register>) -> Result<Self> {
        let cap = dim_cap();
        let mut dim = 1usize;
        for (i, reg) in registers.iter().enumerate() {
            if reg.dim == 0 {
                return Err(Error::Shape(format!("register `{}` has dimension 0", reg.label)));
            }
            if registers[..i].iter().any(|r| r.label == reg.label) {
                return Err(Error::Label(format!("duplicate register label `{}`", reg.label)));
            }
            dim = dim
                .checked_mul(reg.dim)
                .filter(|&d| d <= cap)
                .ok_or(Error::Capacity {
                    dim: dim.saturating_mul(reg.dim),
                    cap,
                })?;
        }
        Ok(Self { registers, dim })
    }

    /// Layout with a single register.
    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Self::new([(label.into(), dim)])
    }

    /// `n` qubit registers labelled `{prefix}0 .. {prefix}{n-1}`.
    pub fn qubits(prefix: &str, n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| (format!("{prefix}{i}"), 2)))
    }

    /// The zero-register layout of the scalars.
    pub fn trivial() -> Self {
        Self {
            registers: Vec::new(),
            dim: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.registers.iter().map(|r| r.label.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.registers.iter().map(|r| r.dim).collect()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.registers.iter().any(|r| r.label == label)
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.label == label)
            .ok_or_else(|| Error::Label(format!("unknown register label `{label}`")))
    }

    pub fn register_dim(&self, label: &str) -> Result<usize> {
        Ok(self.registers[self.position(label)?].dim)
    }

    /// Product of the dimensions of the named registers.
    pub fn dim_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<usize> {
        labels
            .iter()
            .try_fold(1usize, |acc, l| Ok(acc * self.register_dim(l.as_ref())?))
    }

    /// Sub-layout with the named registers in the given order.
    pub fn select<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let regs = labels
            .iter()
            .map(|l| Ok(self.registers[self.position(l.as_ref())?].clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_registers(regs)
    }

    /// Registers of `self` that are not named, in layout order.
    pub fn without<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        for l in labels {
            self.position(l.as_ref())?;
        }
        let regs = self
            .registers
            .iter()
            .filter(|r| !labels.iter().any(|l| l.as_ref() == r.label))
            .cloned()
            .collect();
        Self::from_registers(regs)
    }

    /// Named registers reordered to follow layout order.
    pub fn in_layout_order<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<String>> {
        let mut positions = labels
            .iter()
            .map(|l| self.position(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        positions.sort_unstable();
        for w in positions.windows(2) {
            if w[0] == w[1] {
                return Err(Error::Label(format!(
                    "register `{}` named twice",
                    self.registers[w[0]].label
                )));
            }
        }
        Ok(positions
            .into_iter()
            .map(|p| self.registers[p].label.clone())
            .collect())
    }

    /// Concatenation; labels must stay unique.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut regs = self.registers.clone();
        regs.extend(other.registers.iter().cloned());
        Self::from_registers(regs)
    }

    pub fn relabel(&self, mut f: impl FnMut(&str) -> String) -> Result<Self> {
        Self::from_registers(
            self.registers
                .iter()
                .map(|r| Register {
                    label: f(&r.label),
                    dim: r.dim,
                })
                .collect(),
        )
    }

    /// Flat index of `new` order → flat index in `self` order.
    ///
    /// `order` must be a permutation of the labels of `self`.
    pub(crate) fn permutation_map<S: AsRef<str>>(&self, order: &[S]) -> Result<(Self, Vec<usize>)> {
        if order.len() != self.len() {
            return Err(Error::Label(format!(
                "permutation names {} registers, layout has {}",
                order.len(),
                self.len()
            )));
        }
        let target = self.select(order)?;
        let src_pos: Vec<usize> = order
            .iter()
            .map(|l| self.position(l.as_ref()))
            .collect::<Result<_>>()?;
        let mut strides = vec![1usize; self.len()];
        for i in (0..self.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.registers[i + 1].dim;
        }
        let new_dims = target.dims();
        let new_strides_src: Vec<usize> = src_pos.iter().map(|&p| strides[p]).collect();
        let mut map = Vec::with_capacity(self.dim);
        let mut digits = vec![0usize; new_dims.len()];
        for _ in 0..self.dim {
            map.push(
                digits
                    .iter()
                    .zip(&new_strides_src)
                    .map(|(d, s)| d * s)
                    .sum(),
            );
            for k in (0..digits.len()).rev() {
                digits[k] += 1;
                if digits[k] < new_dims[k] {
                    break;
                }
                digits[k] = 0;
            }
        }
        Ok((target, map))
    }
}

impl std::fmt::Display for HilbertLayout {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .registers
            .iter()
            .map(|r| format!("{}:{}", r.label, r.dim))
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_labels() {
        assert!(matches!(
            HilbertLayout::new([("A", 2), ("A", 3)]),
            Err(Error::Label(_))
        ));
    }

    #[test]
    fn rejects_oversized_layouts() {
        assert!(matches!(
            HilbertLayout::new([("A", 4096), ("B", 2)]),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn permutation_map_swaps_two_registers() {
        let l = HilbertLayout::new([("A", 2), ("B", 3)]).unwrap();
        let (t, map) = l.permutation_map(&["B", "A"]).unwrap();
        assert_eq!(t.dims(), vec![3, 2]);
        // new index (b, a) = 2b + a maps to old 3a + b
        for b in 0..3 {
            for a in 0..2 {
                assert_eq!(map[2 * b + a], 3 * a + b);
            }
        }
    }

    #[test]
    fn layout_order_rejects_repeats() {
        let l = HilbertLayout::new([("A", 2), ("B", 3)]).unwrap();
        assert_eq!(l.in_layout_order(&["B", "A"]).unwrap(), vec!["A", "B"]);
        assert!(l.in_layout_order(&["B", "B"]).is_err());
    }
}
