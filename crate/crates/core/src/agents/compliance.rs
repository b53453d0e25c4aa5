//! KYC/AML screening against synthetic user profiles.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::sim::{RngStream, SimTime};
use crate::units::Address;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserProfile {
    pub id: Address,
    pub region: String,
    pub sanctions_match: bool,
    pub face_match_confidence: f64,
    pub docs_valid: bool,
    pub tier: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComplianceOutcome {
    Approved,
    ManualReview,
    Denied,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplianceDecision {
    pub user: Address,
    pub outcome: ComplianceOutcome,
    pub decided_at: SimTime,
    pub processing_time_ms: u64,
    /// Set for manual reviews: when staff approve the profile.
    pub review_resolved_at: Option<SimTime>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComplianceConfig {
    pub manual_review_threshold: f64,
    pub allowed_regions: Vec<String>,
    pub approval_mean_s: f64,
    pub approval_std_s: f64,
    pub approval_min_s: f64,
    pub review_max_s: f64,
}

impl Default for ComplianceConfig {
    fn default() -> Self {
        ComplianceConfig {
            manual_review_threshold: 0.90,
            allowed_regions: ["EU", "UK", "US", "SG", "CH", "AE"].map(String::from).to_vec(),
            approval_mean_s: 168.0,
            approval_std_s: 30.0,
            approval_min_s: 60.0,
            review_max_s: 7200.0,
        }
    }
}

#[derive(Debug)]
pub struct ComplianceAgent {
    config: ComplianceConfig,
    decisions: BTreeMap<Address, ComplianceDecision>,
}

impl ComplianceAgent {
    pub fn new(config: ComplianceConfig) -> Self {
        ComplianceAgent { config, decisions: BTreeMap::new() }
    }

    pub fn config(&self) -> &ComplianceConfig {
        &self.config
    }

    /// Rule outcome without timing.
    pub fn classify(&self, p: &UserProfile) -> ComplianceOutcome {
        let region_ok = self.config.allowed_regions.iter().any(|r| r == &p.region);
        if p.sanctions_match || !region_ok || !p.docs_valid {
            ComplianceOutcome::Denied
        } else if p.face_match_confidence < self.config.manual_review_threshold {
            ComplianceOutcome::ManualReview
        } else {
            ComplianceOutcome::Approved
        }
    }

    /// Screens a profile once; repeated calls return the original decision.
    pub fn screen(&mut self, profile: &UserProfile, now: SimTime, rng: &mut RngStream) -> ComplianceDecision {
        if let Some(d) = self.decisions.get(&profile.id) {
            return d.clone();
        }
        let outcome = self.classify(profile);
        let c = &self.config;
        let normal = Normal::new(c.approval_mean_s, c.approval_std_s).expect("valid std");
        let secs = normal.sample(rng).max(c.approval_min_s);
        let processing_time_ms = (secs * 1000.0).round() as u64;
        let decided_at = now + processing_time_ms;
        let review_resolved_at = (outcome == ComplianceOutcome::ManualReview).then(|| {
            let wait = rng.random_range(1..=(c.review_max_s * 1000.0) as u64);
            decided_at + wait
        });
        let d = ComplianceDecision { user: profile.id, outcome, decided_at, processing_time_ms, review_resolved_at };
        self.decisions.insert(profile.id, d.clone());
        d
    }

    pub fn decision(&self, user: Address) -> Option<&ComplianceDecision> {
        self.decisions.get(&user)
    }

    /// Whether `user` may trade at `now`.
    pub fn is_onboarded(&self, user: Address, now: SimTime) -> bool {
        match self.decisions.get(&user) {
            Some(d) => match d.outcome {
                ComplianceOutcome::Approved => now >= d.decided_at,
                ComplianceOutcome::ManualReview => d.review_resolved_at.is_some_and(|t| now >= t),
                ComplianceOutcome::Denied => false,
            },
            None => false,
        }
    }

    /// Records a user as approved without screening (pre-onboarded load).
    pub fn preapprove(&mut self, user: Address, now: SimTime) {
        self.decisions.insert(
            user,
            ComplianceDecision {
                user,
                outcome: ComplianceOutcome::Approved,
                decided_at: now,
                processing_time_ms: 0,
                review_resolved_at: None,
            },
        );
    }

    pub fn decisions(&self) -> impl Iterator<Item = &ComplianceDecision> {
        self.decisions.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(id: u64) -> UserProfile {
        UserProfile {
            id: Address::user(id),
            region: "EU".into(),
            sanctions_match: false,
            face_match_confidence: 0.97,
            docs_valid: true,
            tier: 1,
        }
    }

    #[test]
    fn sanctioned_is_denied() {
        let mut agent = ComplianceAgent::new(ComplianceConfig::default());
        let mut rng = RngStream::new(1, "kyc");
        let p = UserProfile { sanctions_match: true, ..profile(0) };
        let d = agent.screen(&p, SimTime::ZERO, &mut rng);
        assert_eq!(d.outcome, ComplianceOutcome::Denied);
        assert!(!agent.is_onboarded(p.id, SimTime::from_secs(100_000)));
    }

    #[test]
    fn low_confidence_goes_to_review() {
        let mut agent = ComplianceAgent::new(ComplianceConfig::default());
        let mut rng = RngStream::new(1, "kyc");
        let p = UserProfile { face_match_confidence: 0.85, ..profile(0) };
        let d = agent.screen(&p, SimTime::ZERO, &mut rng);
        assert_eq!(d.outcome, ComplianceOutcome::ManualReview);
        let resolved = d.review_resolved_at.unwrap();
        assert!(resolved.since(d.decided_at) <= 7_200_000);
        assert!(!agent.is_onboarded(p.id, d.decided_at));
        assert!(agent.is_onboarded(p.id, resolved));
    }

    #[test]
    fn bad_docs_and_region_are_denied() {
        let agent = ComplianceAgent::new(ComplianceConfig::default());
        assert_eq!(agent.classify(&UserProfile { docs_valid: false, ..profile(0) }), ComplianceOutcome::Denied);
        assert_eq!(agent.classify(&UserProfile { region: "XX".into(), ..profile(0) }), ComplianceOutcome::Denied);
        // denial takes precedence over review
        let both = UserProfile { sanctions_match: true, face_match_confidence: 0.5, ..profile(0) };
        assert_eq!(agent.classify(&both), ComplianceOutcome::Denied);
    }

    #[test]
    fn approval_time_distribution() {
        let mut agent = ComplianceAgent::new(ComplianceConfig::default());
        let mut rng = RngStream::new(7, "kyc");
        let n = 10_000;
        let total: u64 = (0..n).map(|i| agent.screen(&profile(i), SimTime::ZERO, &mut rng).processing_time_ms).sum();
        let mean_s = total as f64 / n as f64 / 1000.0;
        assert!((mean_s - 168.0).abs() < 5.0, "mean {mean_s}");
    }

    #[test]
    fn screening_is_idempotent() {
        let mut agent = ComplianceAgent::new(ComplianceConfig::default());
        let mut rng = RngStream::new(1, "kyc");
        let a = agent.screen(&profile(3), SimTime::ZERO, &mut rng);
        let b = agent.screen(&profile(3), SimTime::from_secs(50), &mut rng);
        assert_eq!(a, b);
    }
}
