use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Construction, CorpusError, EncodedCorpus};

/// Stratified train/validation split. Each class contributes
/// `round(n_class * train_fraction)` rows to the training part; both parts
/// keep the input row order.
pub fn split(
    encoded: &EncodedCorpus,
    train_fraction: f64,
    seed: u64,
) -> Result<(EncodedCorpus, EncodedCorpus), CorpusError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(CorpusError::InvalidFraction(train_fraction));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_train = vec![false; encoded.len()];
    for construction in Construction::ALL {
        let mut members: Vec<usize> =
            (0..encoded.len()).filter(|&i| encoded.labels[i] == construction.label()).collect();
        if members.is_empty() {
            continue;
        }
        let n_train = (members.len() as f64 * train_fraction).round() as usize;
        if n_train == 0 || n_train == members.len() {
            return Err(CorpusError::DegenerateSplit { construction, fraction: train_fraction });
        }
        members.shuffle(&mut rng);
        for &i in &members[..n_train] {
            in_train[i] = true;
        }
    }
    let (train, val): (Vec<usize>, Vec<usize>) = (0..encoded.len()).partition(|&i| in_train[i]);
    Ok((encoded.select(&train), encoded.select(&val)))
}
