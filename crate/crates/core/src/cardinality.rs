//! Groupoid cardinality `sum 1/|Aut|` over a list of isomorphism classes.

use std::ops::{Add, Div};

use num_rational::Ratio;
use num_traits::{FromPrimitive, One, Zero};

/// Exact cardinality as a reduced fraction.
pub type ExactCardinality = Ratio<u64>;

/// Floating-point cardinality, for display.
pub type ApproxCardinality = f64;

/// `sum 1/n` over the automorphism orders `n`.
///
/// # Panics
/// If an order is zero or does not fit the scalar.
pub fn groupoid_cardinality<T, I>(aut_orders: I) -> T
where
    T: Zero + One + Add<Output = T> + Div<Output = T> + FromPrimitive,
    I: IntoIterator<Item = usize>,
{
    aut_orders.into_iter().fold(T::zero(), |acc, n| {
        assert!(n > 0, "automorphism group orders are positive");
        acc + T::one() / T::from_usize(n).expect("order fits the scalar")
    })
}
