//! In-game consequences attached to each task.

use serde::{Deserialize, Serialize};

/// Key linking a bank entry to its consequence bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsequenceId {
    PotionHeal,
    GateToll,
    FurSale,
    AuctionBonus,
    BanditAmbush,
    ClinicHeal,
    MayorPlan,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Effect {
    /// Write of the health bar. With `raise_only` the write never lowers
    /// current health (a potion cannot hurt).
    HealthSet {
        value: u16,
        display: String,
        #[serde(default)]
        raise_only: bool,
    },
    GoldDelta {
        deci_coins: i64,
    },
    GateOpen,
    BonusDisplay {
        text: String,
    },
    UnlockTasks {
        tasks: Vec<u8>,
    },
    /// Fade to black and move the player; the engine only emits it.
    BlackoutRelocate {
        destination: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsequenceBundle {
    pub effects: Vec<Effect>,
    pub alert_text: String,
}

fn health_set(value: u16, raise_only: bool) -> Effect {
    Effect::HealthSet {
        value,
        display: format!("{value}/{}", crate::session::HEALTH_MAX),
        raise_only,
    }
}

impl ConsequenceId {
    pub fn bundle(self) -> ConsequenceBundle {
        let (effects, alert) = match self {
            ConsequenceId::PotionHeal => (vec![health_set(150, true)], "150 health points gained!"),
            ConsequenceId::GateToll => (
                vec![Effect::GoldDelta { deci_coins: -30 }, Effect::GateOpen],
                "3 gold coins lost!",
            ),
            ConsequenceId::FurSale => (
                vec![Effect::GoldDelta { deci_coins: 35 }],
                "3.5 gold coins gained!",
            ),
            ConsequenceId::AuctionBonus => (
                vec![Effect::BonusDisplay { text: "+20".into() }],
                "You've won the dagger!",
            ),
            ConsequenceId::BanditAmbush => (
                vec![
                    Effect::UnlockTasks { tasks: vec![6, 7] },
                    Effect::BlackoutRelocate {
                        destination: "clinic".into(),
                    },
                    health_set(30, false),
                ],
                "You've been injured!",
            ),
            ConsequenceId::ClinicHeal => (vec![health_set(250, false)], "Healing steadily!"),
            // TODO: the mayor task has no state effect in the original game;
            // pick an alert line with the experimenters before a live run.
            ConsequenceId::MayorPlan => (vec![], "The attack plan is set!"),
        };
        ConsequenceBundle {
            effects,
            alert_text: alert.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_bundle_has_an_alert() {
        use ConsequenceId::*;
        for id in [
            PotionHeal,
            GateToll,
            FurSale,
            AuctionBonus,
            BanditAmbush,
            ClinicHeal,
            MayorPlan,
        ] {
            assert!(!id.bundle().alert_text.is_empty(), "{id:?}");
        }
    }

    #[test]
    fn effect_wire_shape() {
        let json = serde_json::to_string(&Effect::GoldDelta { deci_coins: -30 }).unwrap();
        assert_eq!(json, r#"{"kind":"gold_delta","deci_coins":-30}"#);
        let json = serde_json::to_string(&Effect::GateOpen).unwrap();
        assert_eq!(json, r#"{"kind":"gate_open"}"#);
    }
}
