use crate::error::{Error, Result};

/// 64-bit FNV-1a over a byte string.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(PRIME);
    }
    hash
}

/// Deterministic train/val/test split.
///
/// Shapes are ordered by the FNV-1a hash of the seed's decimal string
/// concatenated with the shape id, so the same (ids, seed) always produces
/// the same split in any implementation. Set sizes follow largest-remainder
/// rounding of the ratios.
pub fn split_dataset(
    shape_ids: &[String],
    ratios: (f64, f64, f64),
    seed: u64,
) -> Result<(Vec<String>, Vec<String>, Vec<String>)> {
    let (r_train, r_val, r_test) = ratios;
    for r in [r_train, r_val, r_test] {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidArgument(format!("ratio {r} outside [0, 1]")));
        }
    }
    if ((r_train + r_val + r_test) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "ratios must sum to 1, got {}",
            r_train + r_val + r_test
        )));
    }
    let mut unique = std::collections::BTreeSet::new();
    for id in shape_ids {
        if !unique.insert(id) {
            return Err(Error::InvalidArgument(format!("duplicate shape id {id:?}")));
        }
    }

    let n = shape_ids.len();
    let sizes = largest_remainder(n, &[r_train, r_val, r_test]);

    let mut ordered: Vec<&String> = shape_ids.iter().collect();
    ordered.sort_by_key(|id| {
        let key = format!("{seed}{id}");
        (fnv1a64(key.as_bytes()), (*id).clone())
    });

    let take = |range: std::ops::Range<usize>| {
        let mut ids: Vec<String> = ordered[range].iter().map(|s| (*s).clone()).collect();
        ids.sort();
        ids
    };
    let train = take(0..sizes[0]);
    let val = take(sizes[0]..sizes[0] + sizes[1]);
    let test = take(sizes[0] + sizes[1]..n);
    Ok((train, val, test))
}

fn largest_remainder(n: usize, ratios: &[f64]) -> Vec<usize> {
    let targets: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut sizes: Vec<usize> = targets.iter().map(|t| t.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..ratios.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = targets[a] - targets[a].floor();
        let fb = targets[b] - targets[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for i in 0..(n - assigned) {
        sizes[order[i % order.len()]] += 1;
    }
    sizes
}
