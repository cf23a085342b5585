use std::collections::HashSet;
use std::sync::{Arc, Mutex};
use std::thread;

use blocklot_core::beacon::BlockSource;
use blocklot_core::entropy::{EntropySource, OsEntropy};
use blocklot_core::ledger::{Ledger, LedgerConfig, Write};
use blocklot_core::lottery::{
    parse_export, to_export, AuthToken, LotteryEvent, OpenContext, OpenParams, Status,
};
use blocklot_core::verification::{
    audit_seed_schedule, run_fairness_trial, verify_event, FairnessReport, VerificationReport,
};
use chrono::{DateTime, Utc};
use tracing::info;

use crate::clock::{Clock, SystemClock};
use crate::config::ApiConfig;
use crate::error::ApiError;
use crate::views::{
    CheckResponse, DrawResponse, EventView, OpenRequest, OpenResponse, SubscribeResponse,
};

pub const DEFAULT_AUDIT_RUNS: usize = 10_000;

pub struct Service {
    ledger: Ledger,
    beacon: Arc<dyn BlockSource>,
    clock: Arc<dyn Clock>,
    entropy: Arc<dyn EntropySource>,
    config: ApiConfig,
    // strict mode only; deliberately kept off the ledger
    identities: Mutex<HashSet<(String, String)>>,
}

fn parse_token(s: &str, what: &str) -> Result<AuthToken, ApiError> {
    AuthToken::from_hex(s).map_err(|_| ApiError::InvalidParameter(format!("{what} must be 32 hex characters")))
}

fn decode(bytes: &[u8]) -> Result<LotteryEvent, ApiError> {
    parse_export(bytes).map_err(|e| ApiError::Internal(format!("unreadable event record: {e}")))
}

impl Service {
    pub fn new(
        config: ApiConfig,
        ledger: Ledger,
        beacon: Arc<dyn BlockSource>,
        clock: Arc<dyn Clock>,
        entropy: Arc<dyn EntropySource>,
    ) -> Result<Self, ApiError> {
        config.validate().map_err(ApiError::InvalidParameter)?;
        if ledger.peer_count() != config.peer_count {
            return Err(ApiError::InvalidParameter(format!(
                "ledger has {} peers, config says {}",
                ledger.peer_count(),
                config.peer_count
            )));
        }
        Ok(Service {
            ledger,
            beacon,
            clock,
            entropy,
            config,
            identities: Mutex::new(HashSet::new()),
        })
    }

    /// Production wiring: persistent ledger, configured beacon, system clock.
    pub fn from_config(config: ApiConfig) -> anyhow::Result<Self> {
        config.validate().map_err(anyhow::Error::msg)?;
        let ledger = Ledger::new(LedgerConfig {
            peer_count: config.peer_count,
            data_dir: config.data_dir.clone(),
            local_peer: 0,
        })?;
        let beacon: Arc<dyn BlockSource> = Arc::from(config.beacon.connect()?);
        Ok(Service::new(config, ledger, beacon, Arc::new(SystemClock), Arc::new(OsEntropy))?)
    }

    pub fn ledger(&self) -> &Ledger {
        &self.ledger
    }

    pub fn config(&self) -> &ApiConfig {
        &self.config
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    fn load(&self, event_id: &str) -> Result<LotteryEvent, ApiError> {
        decode(&self.ledger.get_state(event_id)?)
    }

    fn required_tip(&self, event: &LotteryEvent) -> u64 {
        event.target_height.saturating_add(self.config.confirmation_depth)
    }

    /// `open`: registers an event targeting tip + block_offset.
    pub fn open(&self, req: OpenRequest) -> Result<OpenResponse, ApiError> {
        let announcement_date = DateTime::parse_from_rfc3339(req.announcement_date.trim())
            .map_err(|e| ApiError::InvalidParameter(format!("announcement_date: {e}")))?
            .with_timezone(&Utc);
        let num_winners = u32::try_from(req.num_winners)
            .ok()
            .filter(|w| *w >= 1)
            .ok_or_else(|| ApiError::InvalidParameter("num_winners must be at least 1".into()))?;
        let block_offset = u64::try_from(req.block_offset)
            .map_err(|_| ApiError::InvalidParameter("block_offset must not be negative".into()))?;
        let params = OpenParams {
            name: req.name,
            announcement_date,
            num_winners,
            block_offset,
            note: req.note,
        };

        let latest_height = self.beacon.latest_height()?;
        let now = self.clock.now();
        let proposal = format!("open\n{}\n{}", params.name, announcement_date.timestamp());
        let (tx, (event_id, token, target_height)) =
            self.ledger.invoke::<_, ApiError, _>(proposal.as_bytes(), |state, tx| {
                let (event, token) = LotteryEvent::open(
                    params,
                    OpenContext {
                        latest_height,
                        now,
                        channel_id: self.config.channel_id.clone(),
                        open_tx_id: tx.clone(),
                    },
                    &*self.entropy,
                )?;
                if state.get(&event.event_id).is_some() {
                    return Err(ApiError::Internal("event id collision".into()));
                }
                let out = (event.event_id.clone(), token, event.target_height);
                Ok((
                    Some(Write {
                        key: event.event_id.clone(),
                        value: to_export(&event),
                    }),
                    out,
                ))
            })?;
        info!(event_id = %event_id, target_height, "event opened");
        Ok(OpenResponse {
            event_id,
            organizer_token: token.to_hex(),
            target_height,
            open_tx_id: tx,
        })
    }

    /// `query`: every event, in key order.
    pub fn query(&self) -> Result<Vec<EventView>, ApiError> {
        let now = self.clock.now();
        let tip = self.beacon.latest_height().ok();
        self.ledger
            .get_state_by_range("", "")?
            .into_iter()
            .map(|(_, value)| {
                let e = decode(&value)?;
                let reached = tip.map(|t| t >= self.required_tip(&e));
                Ok(EventView::new(&e, now, reached))
            })
            .collect()
    }

    pub fn event(&self, event_id: &str) -> Result<EventView, ApiError> {
        let e = self.load(event_id)?;
        let reached = self.beacon.latest_height().ok().map(|t| t >= self.required_tip(&e));
        Ok(EventView::new(&e, self.clock.now(), reached))
    }

    /// `subscribe`: appends SHA-256(identity ‖ token); the token goes back to
    /// the caller only.
    pub fn subscribe(&self, event_id: &str, identity: &str) -> Result<SubscribeResponse, ApiError> {
        if identity.is_empty() {
            return Err(ApiError::InvalidParameter("identity must not be empty".into()));
        }
        let strict_key = (event_id.to_string(), identity.to_string());
        let mut seen = self.identities.lock().expect("identity lock poisoned");
        if self.config.strict_identities && seen.contains(&strict_key) {
            return Err(ApiError::DuplicateMember);
        }
        let now = self.clock.now();
        let proposal = format!("subscribe\n{event_id}");
        let (tx, (token, digest)) = self.ledger.invoke::<_, ApiError, _>(proposal.as_bytes(), |state, tx| {
            let bytes = state
                .get(event_id)
                .ok_or_else(|| ApiError::NotFound(event_id.to_string()))?;
            let mut event = decode(bytes)?;
            let token = event.subscribe(identity, now, tx.clone(), &*self.entropy)?;
            let digest = *event.member_list.last().expect("just appended");
            Ok((
                Some(Write {
                    key: event_id.to_string(),
                    value: to_export(&event),
                }),
                (token, digest),
            ))
        })?;
        if self.config.strict_identities {
            seen.insert(strict_key);
        }
        info!(event_id, digest = %digest, "participant subscribed");
        Ok(SubscribeResponse {
            event_id: event_id.to_string(),
            participant_token: token.to_hex(),
            digest,
            subscribe_tx_id: tx,
        })
    }

    /// `draw`: seeds the shuffle with the target block hash once the date has
    /// passed and the block is buried `confirmation_depth` deep. Repeating a
    /// draw returns the stored result.
    pub fn draw(&self, event_id: &str, organizer_token: &str) -> Result<DrawResponse, ApiError> {
        let token = parse_token(organizer_token, "organizer_token")?;
        let event = self.load(event_id)?;
        if !event.organizer_token_matches(&token) {
            return Err(ApiError::BadToken);
        }
        if event.status == Status::Drawn {
            return DrawResponse::from_event(&event)
                .ok_or_else(|| ApiError::Internal("drawn event lacks draw fields".into()));
        }
        if self.clock.now() < event.announcement_date {
            return Err(ApiError::TooEarlyDate);
        }

        let required = self.required_tip(&event);
        let mut backoff = self.config.draw_poll_backoff;
        let mut tip = self.beacon.latest_height()?;
        for _ in 0..self.config.draw_poll_attempts {
            if tip >= required {
                break;
            }
            thread::sleep(backoff);
            backoff *= 2;
            tip = self.beacon.latest_height()?;
        }
        if tip < required {
            return Err(ApiError::TooEarlyBlock {
                target: event.target_height,
                required,
                tip,
            });
        }
        let seed = self.beacon.block(event.target_height)?.hash;

        let now = self.clock.now();
        let proposal = format!("draw\n{event_id}\n{seed}");
        let (_, drawn) = self.ledger.invoke::<_, ApiError, _>(proposal.as_bytes(), |state, tx| {
            let bytes = state
                .get(event_id)
                .ok_or_else(|| ApiError::NotFound(event_id.to_string()))?;
            let mut event = decode(bytes)?;
            if event.status == Status::Drawn {
                // lost a race with a concurrent draw
                return Ok((None, event));
            }
            event.draw(&token, seed, now, tx.clone())?;
            Ok((
                Some(Write {
                    key: event_id.to_string(),
                    value: to_export(&event),
                }),
                event,
            ))
        })?;
        info!(event_id, seed = %seed, winners = drawn.winner_list.len(), "event drawn");
        DrawResponse::from_event(&drawn)
            .ok_or_else(|| ApiError::Internal("drawn event lacks draw fields".into()))
    }

    /// `check`: is SHA-256(identity ‖ token) among the winners?
    pub fn check(&self, event_id: &str, identity: &str, token: &str) -> Result<CheckResponse, ApiError> {
        let token = parse_token(token, "token")?;
        let event = self.load(event_id)?;
        Ok(CheckResponse {
            winner: event.check_winner(identity, &token)?,
        })
    }

    /// `verify`: seed, event integrity, winner recomputation and majority
    /// checks against this node's copy of the event.
    pub fn verify(&self, event_id: &str) -> Result<VerificationReport, ApiError> {
        let event = self.load(event_id)?;
        if event.status != Status::Drawn {
            return Err(ApiError::NotDrawn);
        }
        let header = self.beacon.header(event.target_height)?;
        let responses = self.ledger.responses(event_id);
        Ok(verify_event(&event, &header, &event.initial_random_key, &responses)?)
    }

    /// Offline-style z-test audit over a hash-chained seed schedule.
    pub fn audit(
        &self,
        event_id: &str,
        runs: Option<usize>,
        seed: Option<&str>,
    ) -> Result<FairnessReport, ApiError> {
        let event = self.load(event_id)?;
        let runs = runs.unwrap_or(DEFAULT_AUDIT_RUNS);
        if runs > 1_000_000 {
            return Err(ApiError::InvalidParameter("runs is capped at 1000000".into()));
        }
        let seeds = audit_seed_schedule(seed.unwrap_or(event_id).as_bytes(), runs);
        Ok(run_fairness_trial(
            &event.member_list,
            event.num_winners as usize,
            runs,
            &seeds,
            self.config.z_max,
        )?)
    }
}
