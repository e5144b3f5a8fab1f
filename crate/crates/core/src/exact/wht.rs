use crate::error::{Result, SkError};

/// Unnormalized Walsh–Hadamard transform in place:
/// `v̂[S] = Σ_x v[x]·(−1)^{popcount(S & x)}`. Applying it twice scales by
/// the length.
pub fn wht_in_place(v: &mut [f64]) -> Result<()> {
    let len = v.len();
    if !len.is_power_of_two() {
        return Err(SkError::NotPowerOfTwo(len));
    }
    let mut h = 1;
    while h < len {
        for block in v.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    Ok(())
}

pub fn wht(v: &[f64]) -> Result<Vec<f64>> {
    let mut out = v.to_vec();
    wht_in_place(&mut out)?;
    Ok(out)
}
