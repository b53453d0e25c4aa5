//! Synthetic sign-up corpus.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::agents::UserProfile;
use crate::harness::config::CorpusSpec;
use crate::sim::RngStream;
use crate::units::Address;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Category {
    Clean,
    LowConfidence,
    Sanctioned,
    BadDocs,
}

/// Exactly the requested mix, shuffled, with ids `user(0..n)`.
pub fn generate_profiles(spec: &CorpusSpec, allowed_regions: &[String], rng: &mut RngStream) -> Vec<UserProfile> {
    let mut cats = Vec::with_capacity(spec.total());
    cats.extend(std::iter::repeat_n(Category::Clean, spec.clean));
    cats.extend(std::iter::repeat_n(Category::LowConfidence, spec.low_confidence));
    cats.extend(std::iter::repeat_n(Category::Sanctioned, spec.sanctioned));
    cats.extend(std::iter::repeat_n(Category::BadDocs, spec.bad_docs));
    cats.shuffle(rng);
    cats.into_iter()
        .enumerate()
        .map(|(i, cat)| {
            let region = if allowed_regions.is_empty() {
                "EU".to_string()
            } else {
                allowed_regions[rng.random_range(0..allowed_regions.len())].clone()
            };
            let confidence = match cat {
                Category::LowConfidence => rng.random_range(0.70..0.89),
                _ => rng.random_range(0.92..0.995),
            };
            UserProfile {
                id: Address::user(i as u64),
                region,
                sanctions_match: cat == Category::Sanctioned,
                face_match_confidence: confidence,
                docs_valid: cat != Category::BadDocs,
                tier: if rng.random_bool(0.9) { 1 } else { 2 },
            }
        })
        .collect()
}
