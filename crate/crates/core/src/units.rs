use core::fmt;
use core::iter::Sum;
use core::ops::{Add, AddAssign, Sub};

/// Memory capacity in megabytes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mb(pub u64);

impl Mb {
    /// Capacity every pattern instance is assumed to occupy when no runtime
    /// measurement is available.
    pub const PER_PATTERN: Mb = Mb(64);

    pub const fn get(self) -> u64 {
        self.0
    }
}

impl Add for Mb {
    type Output = Mb;
    fn add(self, rhs: Mb) -> Mb {
        Mb(self.0 + rhs.0)
    }
}

impl AddAssign for Mb {
    fn add_assign(&mut self, rhs: Mb) {
        self.0 += rhs.0;
    }
}

impl Sub for Mb {
    type Output = Mb;
    fn sub(self, rhs: Mb) -> Mb {
        Mb(self.0 - rhs.0)
    }
}

impl Sum for Mb {
    fn sum<I: Iterator<Item = Mb>>(iter: I) -> Mb {
        Mb(iter.map(|m| m.0).sum())
    }
}

impl fmt::Display for Mb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} MB", self.0)
    }
}

/// A monthly price in euro cents. All cost arithmetic is done on integer
/// cents so sums over many containers never drift.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cents(pub u64);

impl Cents {
    pub const ZERO: Cents = Cents(0);

    pub const fn get(self) -> u64 {
        self.0
    }

    pub const fn from_eur(euros: u64, cents: u64) -> Cents {
        Cents(euros * 100 + cents)
    }

    pub fn saturating_sub(self, rhs: Cents) -> Cents {
        Cents(self.0.saturating_sub(rhs.0))
    }
}

impl Add for Cents {
    type Output = Cents;
    fn add(self, rhs: Cents) -> Cents {
        Cents(self.0 + rhs.0)
    }
}

impl AddAssign for Cents {
    fn add_assign(&mut self, rhs: Cents) {
        self.0 += rhs.0;
    }
}

impl Sum for Cents {
    fn sum<I: Iterator<Item = Cents>>(iter: I) -> Cents {
        Cents(iter.map(|c| c.0).sum())
    }
}

/// Formats as euros with two decimals, e.g. `15.94`.
impl fmt::Display for Cents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:02}", self.0 / 100, self.0 % 100)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn cents_display() {
        assert_eq!(Cents(1594).to_string(), "15.94");
        assert_eq!(Cents(5000).to_string(), "50.00");
        assert_eq!(Cents(7).to_string(), "0.07");
        assert_eq!(Cents::from_eur(7, 97), Cents(797));
    }
}
