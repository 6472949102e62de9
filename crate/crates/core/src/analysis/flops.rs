//! Multiply-accumulate counting for convolutions.

/// FLOPs of a K x K convolution with bias producing an `h` x `w` x
/// `c_out` tensor from `c_in` input channels:
/// 2 * h * w * (c_in * K^2 + 1) * c_out.
///
/// Computed in 128-bit arithmetic with overflow checks; None means the
/// count does not fit in a u128.
pub fn conv_flops(h: u64, w: u64, c_in: u64, k: u64, c_out: u64) -> Option<u128> {
    let kk = u128::from(k).checked_mul(u128::from(k))?;
    let per_output = u128::from(c_in).checked_mul(kk)?.checked_add(1)?;
    u128::from(h)
        .checked_mul(u128::from(w))?
        .checked_mul(per_output)?
        .checked_mul(u128::from(c_out))?
        .checked_mul(2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_convolution_costs_four() {
        assert_eq!(conv_flops(1, 1, 1, 1, 1), Some(4));
    }

    #[test]
    fn first_stage_example() {
        // 200x280 output, 3 input channels, 7x7 kernel, 96 filters.
        assert_eq!(conv_flops(200, 280, 3, 7, 96), Some(1_591_296_000));
    }

    #[test]
    fn zero_output_costs_nothing() {
        assert_eq!(conv_flops(0, 5, 3, 3, 8), Some(0));
        assert_eq!(conv_flops(5, 5, 3, 3, 0), Some(0));
    }

    #[test]
    fn bias_only_convolution() {
        // c_in = 0 leaves just the bias add per output element.
        assert_eq!(conv_flops(2, 3, 0, 5, 4), Some(2 * 2 * 3 * 4));
    }

    #[test]
    fn overflow_returns_none() {
        assert_eq!(
            conv_flops(u64::MAX, u64::MAX, u64::MAX, u64::MAX, u64::MAX),
            None
        );
    }
}
