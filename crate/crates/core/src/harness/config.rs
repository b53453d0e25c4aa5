//! Declarative scenario description. Unknown keys are rejected at every level.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agents::orchestrator::ActionKind;
use crate::agents::{ComplianceConfig, MMConfig, RiskConfig};
use crate::agents::issuance::IssuanceConfig;
use crate::error::ConfigError;
use crate::governance::{GovAction, GovernanceConfig};
use crate::ledger::params::{BoundsRegistry, ParamKey};
use crate::ledger::LedgerConfig;
use crate::oracle::{FeedId, PriceProcess};
use crate::units::{Address, TokenAmount};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionMix {
    pub buy: f64,
    pub sell: f64,
    pub issue: f64,
    pub redeem: f64,
}

impl Default for ActionMix {
    fn default() -> Self {
        ActionMix { buy: 0.50, sell: 0.35, issue: 0.10, redeem: 0.05 }
    }
}

impl ActionMix {
    pub fn weights(&self) -> [(ActionKind, f64); 4] {
        [
            (ActionKind::Buy, self.buy),
            (ActionKind::Sell, self.sell),
            (ActionKind::Issue, self.issue),
            (ActionKind::Redeem, self.redeem),
        ]
    }

    /// Maps a uniform draw in [0, 1) to an action.
    pub fn pick(&self, u: f64) -> ActionKind {
        let mut acc = 0.0;
        for (kind, w) in self.weights() {
            acc += w;
            if u < acc {
                return kind;
            }
        }
        ActionKind::Buy
    }
}

/// Lognormal order size, parameterized by its median.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeDist {
    pub median_oz: f64,
    pub sigma: f64,
}

impl Default for SizeDist {
    fn default() -> Self {
        SizeDist { median_oz: 2.0, sigma: 0.8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultTarget {
    Oracle,
    Vault,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaultKind {
    Stuck,
    Spoofed,
    Misreport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSpec {
    pub target: FaultTarget,
    pub kind: FaultKind,
    #[serde(default = "primary")]
    pub feed: FeedId,
    pub start_ms: u64,
    pub duration_ms: u64,
    /// Spoof offset or misreport shortfall, as a fraction.
    #[serde(default)]
    pub magnitude: f64,
}

fn primary() -> FeedId {
    FeedId::Primary
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GovernanceStep {
    pub at_ms: u64,
    pub sender: Address,
    pub action: GovAction,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorOp {
    ClearReserveFreeze,
    DepositGold { oz: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorStep {
    pub at_ms: u64,
    pub op: OperatorOp,
}

/// One user action at a fixed time, outside the closed-loop load.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedAction {
    pub at_ms: u64,
    pub user: u64,
    pub action: ActionKind,
    pub amount_oz: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CorpusSpec {
    pub clean: usize,
    pub low_confidence: usize,
    pub sanctioned: usize,
    pub bad_docs: usize,
    /// Sign-ups are spread uniformly over this window.
    pub signup_window_ms: u64,
}

impl CorpusSpec {
    pub fn total(&self) -> usize {
        self.clean + self.low_confidence + self.sanctioned + self.bad_docs
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComplianceSpec {
    pub rules: ComplianceConfig,
    pub corpus: Option<CorpusSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GenesisConfig {
    pub mm_hot_oz: f64,
    pub mm_cold_oz: f64,
    /// Initial balance of every load user.
    pub user_oz: f64,
    pub extra: Vec<(Address, f64)>,
}

impl Default for GenesisConfig {
    fn default() -> Self {
        GenesisConfig { mm_hot_oz: 300.0, mm_cold_oz: 100.0, user_oz: 5.0, extra: Vec::new() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChainConfig {
    pub commit_latency_ms: u64,
    pub max_tx_per_block: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        let l = LedgerConfig::default();
        ChainConfig { commit_latency_ms: l.commit_latency_ms, max_tx_per_block: l.max_tx_per_block }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub seed: u64,
    pub duration_ms: u64,
    /// Metrics before this time are excluded from sustained averages.
    #[serde(default)]
    pub warmup_ms: u64,
    #[serde(default = "default_block_interval")]
    pub block_interval_ms: u64,
    #[serde(default)]
    pub chain: ChainConfig,
    #[serde(default)]
    pub user_count: usize,
    /// Users skip compliance when true.
    #[serde(default = "yes")]
    pub users_preapproved: bool,
    #[serde(default)]
    pub action_mix: ActionMix,
    /// Per-user Poisson rate of new actions while idle, per second.
    #[serde(default = "default_arrival")]
    pub arrival_rate: f64,
    #[serde(default)]
    pub size_dist: SizeDist,
    #[serde(default = "default_max_order")]
    pub max_order_oz: f64,
    /// Gateway time between admission and the order reaching the book.
    #[serde(default = "default_order_handling")]
    pub order_handling_ms: u64,
    #[serde(default)]
    pub price_process: PriceProcess,
    #[serde(default = "default_noise")]
    pub secondary_noise: f64,
    #[serde(default = "default_vault")]
    pub vault_initial_oz: f64,
    #[serde(default = "default_attestation")]
    pub attestation_interval_ms: u64,
    #[serde(default)]
    pub genesis: GenesisConfig,
    /// Initial on-chain parameter values in human units.
    #[serde(default)]
    pub params: BTreeMap<ParamKey, f64>,
    #[serde(default)]
    pub fault_schedule: Vec<FaultSpec>,
    #[serde(default)]
    pub governance_schedule: Vec<GovernanceStep>,
    #[serde(default)]
    pub operator_schedule: Vec<OperatorStep>,
    #[serde(default)]
    pub scripted: Vec<ScriptedAction>,
    #[serde(default)]
    pub governance: GovernanceConfig,
    #[serde(default)]
    pub mm: MMConfig,
    #[serde(default)]
    pub risk: RiskConfig,
    #[serde(default)]
    pub issuance: IssuanceConfig,
    #[serde(default)]
    pub compliance: ComplianceSpec,
    /// Log every workflow transition, not only terminal states.
    #[serde(default)]
    pub verbose_log: bool,
}

fn default_block_interval() -> u64 {
    1000
}
fn yes() -> bool {
    true
}
fn default_arrival() -> f64 {
    1.0 / 60.0
}
fn default_max_order() -> f64 {
    40.0
}
fn default_order_handling() -> u64 {
    200
}
fn default_noise() -> f64 {
    0.0002
}
fn default_vault() -> f64 {
    1000.0
}
fn default_attestation() -> u64 {
    60_000
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn ledger_config(&self) -> LedgerConfig {
        LedgerConfig {
            block_interval_ms: self.block_interval_ms,
            commit_latency_ms: self.chain.commit_latency_ms,
            max_tx_per_block: self.chain.max_tx_per_block,
            ..LedgerConfig::default()
        }
    }

    pub fn corpus_size(&self) -> usize {
        self.compliance.corpus.as_ref().map_or(0, CorpusSpec::total)
    }

    pub fn genesis_supply_oz(&self) -> f64 {
        self.genesis.mm_hot_oz
            + self.genesis.mm_cold_oz
            + self.genesis.user_oz * self.user_count as f64
            + self.genesis.extra.iter().map(|(_, oz)| oz).sum::<f64>()
    }

    /// Field-level checks; every problem is reported, not just the first.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut errs = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                errs.push(msg);
            }
        };
        check(!self.name.is_empty(), "name: must not be empty".into());
        check(self.duration_ms > 0, "duration_ms: must be positive".into());
        check(self.warmup_ms < self.duration_ms, "warmup_ms: must be below duration_ms".into());
        check(self.block_interval_ms > 0, "block_interval_ms: must be positive".into());
        let w = self.action_mix.weights();
        check(w.iter().all(|(_, x)| *x >= 0.0), "action_mix: weights must be non-negative".into());
        let sum: f64 = w.iter().map(|(_, x)| x).sum();
        check((sum - 1.0).abs() < 1e-9, format!("action_mix: weights sum to {sum}, expected 1"));
        check(self.arrival_rate > 0.0, "arrival_rate: must be positive".into());
        check(self.size_dist.median_oz > 0.0, "size_dist.median_oz: must be positive".into());
        check(self.size_dist.sigma >= 0.0, "size_dist.sigma: must be non-negative".into());
        check(self.max_order_oz > 0.0, "max_order_oz: must be positive".into());
        check(self.price_process.initial_price > 0.0, "price_process.initial_price: must be positive".into());
        check(!self.price_process.regimes.is_empty(), "price_process.regimes: at least one regime".into());
        check(
            self.price_process.regimes.iter().all(|r| r.sigma >= 0.0),
            "price_process.regimes: sigma must be non-negative".into(),
        );
        check(self.secondary_noise >= 0.0, "secondary_noise: must be non-negative".into());
        check(self.vault_initial_oz >= 0.0, "vault_initial_oz: must be non-negative".into());
        check(self.attestation_interval_ms > 0, "attestation_interval_ms: must be positive".into());
        check(
            self.genesis_supply_oz() <= self.vault_initial_oz + 1e-6,
            format!("genesis: supply {} OZ exceeds vault_initial_oz {}", self.genesis_supply_oz(), self.vault_initial_oz),
        );
        let reserve = TokenAmount::from_oz_f64(self.vault_initial_oz);
        let registry = BoundsRegistry::default();
        for (key, human) in &self.params {
            if let Err(e) = registry.check(*key, key.encode(*human), reserve) {
                check(false, format!("params.{key}: {e}"));
            }
        }
        for (i, f) in self.fault_schedule.iter().enumerate() {
            let consistent = matches!(
                (f.target, f.kind),
                (FaultTarget::Oracle, FaultKind::Stuck | FaultKind::Spoofed) | (FaultTarget::Vault, FaultKind::Misreport)
            );
            check(consistent, format!("fault_schedule[{i}]: kind {:?} does not apply to {:?}", f.kind, f.target));
            check(
                f.start_ms + f.duration_ms <= self.duration_ms,
                format!("fault_schedule[{i}]: start + duration exceeds duration_ms"),
            );
            if f.kind == FaultKind::Misreport {
                check((0.0..1.0).contains(&f.magnitude), format!("fault_schedule[{i}].magnitude: must be in [0, 1)"));
            }
        }
        let g = &self.governance;
        check(
            g.signers_required >= 1 && g.signers_required <= g.signers.len(),
            "governance.signers_required: must be between 1 and the number of signers".into(),
        );
        check((0.0..=1.0).contains(&g.quorum), "governance.quorum: must be in [0, 1]".into());
        let m = &self.mm;
        check(m.base_half_spread > 0.0, "mm.base_half_spread: must be positive".into());
        check(m.half_spread_cap >= m.base_half_spread, "mm.half_spread_cap: must be at least base_half_spread".into());
        check(!m.level_offsets_bps.is_empty(), "mm.level_offsets_bps: at least one level".into());
        check(m.inv_limit_oz > 0.0, "mm.inv_limit_oz: must be positive".into());
        check(
            m.rebalance_threshold_oz > 0.0 && m.rebalance_threshold_oz <= m.inv_limit_oz,
            "mm.rebalance_threshold_oz: must be in (0, inv_limit_oz]".into(),
        );
        let r = &self.risk;
        check(r.cycle_ms > 0, "risk.cycle_ms: must be positive".into());
        check(r.staleness_ms > 0, "risk.staleness_ms: must be positive".into());
        check(r.divergence > 0.0, "risk.divergence: must be positive".into());
        check(
            r.concentration_limit > 0.0 && r.concentration_limit < 1.0,
            "risk.concentration_limit: must be in (0, 1)".into(),
        );
        check(r.service_rate > 0.0, "risk.service_rate: must be positive".into());
        check(
            r.admission_throttle > 0.0 && r.admission_throttle <= 1.0,
            "risk.admission_throttle: must be in (0, 1]".into(),
        );
        check(
            r.background_rate >= 0.0 && r.background_rate < r.admission_throttle * r.service_rate,
            "risk.background_rate: must be below the admitted capacity".into(),
        );
        let c = &self.compliance.rules;
        check((0.0..=1.0).contains(&c.manual_review_threshold), "compliance.manual_review_threshold: must be in [0, 1]".into());
        for (i, s) in self.scripted.iter().enumerate() {
            check(s.at_ms < self.duration_ms, format!("scripted[{i}].at_ms: beyond duration_ms"));
            check(s.amount_oz > 0.0, format!("scripted[{i}].amount_oz: must be positive"));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(errs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        r#"{"name": "t", "duration_ms": 10000}"#
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ScenarioConfig::from_json(minimal()).unwrap();
        assert_eq!(cfg.block_interval_ms, 1000);
        assert_eq!(cfg.vault_initial_oz, 1000.0);
        assert_eq!(cfg.mm.level_offsets_bps.len(), 4);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ScenarioConfig::from_json(r#"{"name": "t", "duration_ms": 1, "bogus": 1}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
        let err = ScenarioConfig::from_json(r#"{"name": "t", "duration_ms": 1, "mm": {"levels": 3}}"#).unwrap_err();
        assert!(matches!(err, ConfigError::Parse(_)));
    }

    #[test]
    fn field_level_messages() {
        let text = r#"{"name": "t", "duration_ms": 1000,
            "action_mix": {"buy": 0.5, "sell": 0.5, "issue": 0.5, "redeem": 0.0},
            "params": {"breaker_swing_threshold": 0.5},
            "fault_schedule": [{"target": "vault", "kind": "stuck", "start_ms": 900, "duration_ms": 200}]}"#;
        let Err(ConfigError::Invalid(errs)) = ScenarioConfig::from_json(text) else { panic!("expected invalid") };
        assert!(errs.iter().any(|e| e.starts_with("action_mix")));
        assert!(errs.iter().any(|e| e.starts_with("params.breaker_swing_threshold")));
        assert_eq!(errs.iter().filter(|e| e.starts_with("fault_schedule[0]")).count(), 2);
    }

    #[test]
    fn round_trips() {
        let cfg = ScenarioConfig::from_json(minimal()).unwrap();
        assert_eq!(ScenarioConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn mix_pick_covers_weights() {
        let mix = ActionMix::default();
        assert_eq!(mix.pick(0.0), ActionKind::Buy);
        assert_eq!(mix.pick(0.6), ActionKind::Sell);
        assert_eq!(mix.pick(0.9), ActionKind::Issue);
        assert_eq!(mix.pick(0.99), ActionKind::Redeem);
    }
}
