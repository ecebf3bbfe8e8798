use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant};

use yeargraph_core::dynamics::transition_with;
use yeargraph_core::layout::{primary_slots, seeded_position, ForceGraph};
use yeargraph_core::{
    initial_layout, InitialLayout, LayoutParams, LayoutState, MatchMode, SubgraphQuery, SubgraphView,
    TransitionDiff, Year,
};

use crate::dataset::Dataset;
use crate::error::ApiError;

pub const DEFAULT_TTL: Duration = Duration::from_secs(30 * 60);

/// Time source for session expiry.
pub trait Clock: Send + Sync + fmt::Debug {
    /// Time elapsed since an arbitrary fixed origin.
    fn now(&self) -> Duration;
}

#[derive(Debug)]
pub struct SystemClock(Instant);

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock(Instant::now())
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.0.elapsed()
    }
}

/// A clock that only moves when told to.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn advance(&self, by: Duration) {
        self.0.fetch_add(by.as_millis() as u64, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> Duration {
        Duration::from_millis(self.0.load(Ordering::SeqCst))
    }
}

/// One client's view and layout.
#[derive(Debug)]
pub struct Session {
    pub id: String,
    pub dataset: Arc<Dataset>,
    pub query: SubgraphQuery,
    pub layout: InitialLayout,
    pub view: SubgraphView,
    pub topology: ForceGraph,
    pub state: LayoutState,
}

impl Session {
    pub fn create(
        id: String,
        dataset: Arc<Dataset>,
        query: SubgraphQuery,
        layout: InitialLayout,
        params: LayoutParams,
    ) -> Result<Self, ApiError> {
        let view = dataset.graph.query_subgraph(&query)?;
        let state = initial_layout(&view, layout, params)?;
        let topology = ForceGraph::new(&view);
        Ok(Session {
            id,
            dataset,
            query,
            layout,
            view,
            topology,
            state,
        })
    }

    /// Switches the session to `to_year`.
    ///
    /// Attributes present in both views keep their positions (moved primaries
    /// included) and matched applicants inherit the position of their partner.
    /// New primaries take their initial-layout slot; other new nodes get seeded
    /// positions.
    pub fn transition(&mut self, to_year: Year, mode: MatchMode) -> Result<TransitionDiff, ApiError> {
        let query = self.query.at_year(to_year);
        let view = self.dataset.graph.query_subgraph(&query)?;
        let diff = transition_with(&self.view, &view, mode)?;

        let old = &self.state;
        let params = old.params;
        let seeded = |id: &str| seeded_position(params.seed, id, params.radius / 2.0);
        let mut positions = BTreeMap::new();
        let mut prev_force = BTreeMap::new();
        let mut pinned = BTreeSet::new();
        let mut carry = |from: &str, to: &str, positions: &mut BTreeMap<_, _>| {
            positions.insert(to.to_string(), old.positions[from]);
            if let Some(f) = old.prev_force.get(from) {
                prev_force.insert(to.to_string(), *f);
            }
        };

        let slots = primary_slots(self.layout, view.primary_nodes.len(), &params);
        for (ranked, slot) in view.primary_nodes.iter().zip(slots) {
            let id = &ranked.node.id;
            pinned.insert(id.clone());
            if old.positions.contains_key(id) {
                carry(id, id, &mut positions);
            } else {
                positions.insert(id.clone(), slot);
            }
        }
        for node in &view.secondary_nodes {
            if old.positions.contains_key(&node.id) {
                carry(&node.id, &node.id, &mut positions);
            } else {
                positions.insert(node.id.clone(), seeded(&node.id));
            }
        }
        for (from, to) in &diff.kept_applicants {
            carry(from, to, &mut positions);
        }
        for id in &diff.added_applicants {
            positions.insert(id.clone(), seeded(id));
        }

        self.state = LayoutState {
            positions,
            pinned,
            prev_force,
            params,
            iteration: old.iteration,
        };
        self.topology = ForceGraph::new(&view);
        self.query = query;
        self.view = view;
        Ok(diff)
    }
}

#[derive(Debug)]
struct Entry {
    session: Arc<Mutex<Session>>,
    last_access: Duration,
}

#[derive(Debug, Default)]
struct Inner {
    next_id: u64,
    live: BTreeMap<String, Entry>,
    expired: BTreeSet<String>,
}

/// Live sessions with idle expiry. Each session has its own lock, so work on
/// one session never blocks another.
#[derive(Debug)]
pub struct SessionStore {
    ttl: Duration,
    clock: Arc<dyn Clock>,
    inner: Mutex<Inner>,
}

impl SessionStore {
    pub fn new(ttl: Duration, clock: Arc<dyn Clock>) -> Self {
        SessionStore {
            ttl,
            clock,
            inner: Mutex::new(Inner::default()),
        }
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn sweep(&self, inner: &mut Inner, now: Duration) {
        let stale: Vec<String> = inner
            .live
            .iter()
            .filter(|(_, e)| now.saturating_sub(e.last_access) > self.ttl)
            .map(|(id, _)| id.clone())
            .collect();
        for id in stale {
            inner.live.remove(&id);
            inner.expired.insert(id);
        }
    }

    /// Builds a session under the next id (`s000001`, `s000002`, ...) and
    /// stores it. Ids are only consumed by successful builds.
    pub fn create(&self, build: impl FnOnce(String) -> Result<Session, ApiError>) -> Result<Arc<Mutex<Session>>, ApiError> {
        let now = self.clock.now();
        let mut inner = self.lock();
        self.sweep(&mut inner, now);
        let id = format!("s{:06}", inner.next_id + 1);
        let session = Arc::new(Mutex::new(build(id.clone())?));
        inner.next_id += 1;
        inner.live.insert(
            id,
            Entry {
                session: session.clone(),
                last_access: now,
            },
        );
        Ok(session)
    }

    /// Looks up a session and refreshes its idle timer.
    pub fn get(&self, id: &str) -> Result<Arc<Mutex<Session>>, ApiError> {
        let now = self.clock.now();
        let mut inner = self.lock();
        self.sweep(&mut inner, now);
        if let Some(entry) = inner.live.get_mut(id) {
            entry.last_access = now;
            return Ok(entry.session.clone());
        }
        if inner.expired.contains(id) {
            return Err(ApiError::gone(format!("session `{id}` expired after {} s idle", self.ttl.as_secs())));
        }
        Err(ApiError::not_found(format!("unknown session `{id}`")))
    }

    pub fn len(&self) -> usize {
        self.lock().live.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Locks a session, recovering from a poisoned lock.
pub fn lock_session(session: &Mutex<Session>) -> MutexGuard<'_, Session> {
    session.lock().unwrap_or_else(|e| e.into_inner())
}
