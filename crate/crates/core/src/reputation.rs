//! Reputation infection: trust levels spreading through letters of
//! recommendation and third-party surveys. Both mechanisms read nothing
//! but trust levels.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ids::AgentId;
use crate::level::TrustLevel;
use crate::scalar::Scalar;
use crate::trust::{AppreciationKey, TrustStore};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReputationError {
    #[error("community is empty")]
    EmptyCommunity,
    #[error("no trust store for community member `{0}`")]
    MissingStore(AgentId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LorResponse {
    Communicated,
    Refused,
}

impl LorResponse {
    pub fn name(self) -> &'static str {
        match self {
            LorResponse::Communicated => "communicated",
            LorResponse::Refused => "refused",
        }
    }

    /// Peers at -1 or 0 decline to pass their level on.
    pub fn for_peer_level(peer: TrustLevel) -> Self {
        match peer.value() {
            -1 | 0 => LorResponse::Refused,
            _ => LorResponse::Communicated,
        }
    }
}

/// One letter-of-recommendation exchange: `asker` asks `peer` how far it
/// trusts `about`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LorExchange {
    pub asker: AgentId,
    pub peer: AgentId,
    pub about: AgentId,
    pub peer_level: TrustLevel,
    pub response: LorResponse,
}

impl LorExchange {
    pub fn new(asker: AgentId, peer: AgentId, about: AgentId, peer_level: TrustLevel) -> Self {
        LorExchange {
            asker,
            peer,
            about,
            peer_level,
            response: LorResponse::for_peer_level(peer_level),
        }
    }
}

/// New asker level after a recommendation, or `None` when the peer refuses.
///
/// | peer | asker becomes      |
/// |------|--------------------|
/// | -2   | `min(-1, asker)`   |
/// | -1,0 | refused, unchanged |
/// | 1    | 0                  |
/// | 2    | 1                  |
pub fn lor_update(asker_level: TrustLevel, peer_level: TrustLevel) -> Option<TrustLevel> {
    match peer_level.value() {
        -2 => Some(asker_level.min(TrustLevel::clamped(-1))),
        -1 | 0 => None,
        1 => Some(TrustLevel::NEUTRAL),
        _ => Some(TrustLevel::clamped(1)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyResult<S> {
    pub surveyor: AgentId,
    pub group: BTreeSet<AgentId>,
    pub about: AgentId,
    pub average: S,
}

/// Polls `group` for their general trust in `about` and averages it.
pub fn survey<S: Scalar>(
    surveyor: &AgentId,
    group: &BTreeSet<AgentId>,
    about: &AgentId,
    levels: impl Fn(&AgentId) -> TrustLevel,
) -> Result<SurveyResult<S>, ReputationError> {
    if group.is_empty() {
        return Err(ReputationError::EmptyCommunity);
    }
    let sum: i64 = group.iter().map(|m| i64::from(levels(m))).sum();
    Ok(SurveyResult {
        surveyor: surveyor.clone(),
        group: group.clone(),
        about: about.clone(),
        average: S::from_ratio(sum, group.len() as i64),
    })
}

/// Reinitializes a member's level from a survey average, approximating it
/// from below. Members with recent own observations keep their level.
pub fn survey_reinit<S: Scalar>(
    member_level: TrustLevel,
    average: S,
    has_recent_observations: bool,
) -> TrustLevel {
    if has_recent_observations {
        member_level
    } else {
        TrustLevel::clamped(average.floor_int())
    }
}

/// Histogram of the community's general trust in `about`.
pub fn reputation_distribution(
    community: &BTreeSet<AgentId>,
    stores: &BTreeMap<AgentId, TrustStore>,
    about: &AgentId,
) -> Result<BTreeMap<TrustLevel, usize>, ReputationError> {
    if community.is_empty() {
        return Err(ReputationError::EmptyCommunity);
    }
    let mut hist = BTreeMap::new();
    for member in community {
        let store = stores
            .get(member)
            .ok_or_else(|| ReputationError::MissingStore(member.clone()))?;
        let level = store.level(&AppreciationKey::trust(member, about));
        *hist.entry(level).or_insert(0) += 1;
    }
    Ok(hist)
}
